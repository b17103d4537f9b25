"""Certification pipeline: behavior in, verdict plus certified state out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .hardy import (
    Behavior,
    HardyPoint,
    MeasurementAngles,
    angles_from_point,
    behavior_entries,
    check_hardy_constraints,
    check_hardy_form,
    hardy_state,
    is_local,
)
from .qcore import behavior_from_model, projector, qubit_observables

DEFAULT_TOL = 1e-6
BOUNDARY_MARGIN = 1e-4

CERTIFICATE_SCHEMA = "hardycert.certificate/1"

VERDICT_CERTIFIED = "certified"
VERDICT_REJECTED = "rejected"
VERDICT_BOUNDARY = "boundary"


@dataclass
class Certificate:
    """Self-test outcome for one observed behavior."""

    verdict: str
    residual: float
    point: HardyPoint | None = None
    state_amplitudes: np.ndarray | None = None
    angles: MeasurementAngles | None = None
    chsh_max: float | None = None
    tol: float = DEFAULT_TOL
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = {
            "schema": CERTIFICATE_SCHEMA,
            "version": __version__,
            "verdict": self.verdict,
            "residual": self.residual,
            "tol": self.tol,
            "notes": self.notes,
        }
        if self.point is not None:
            data["point"] = {"r": self.point.r, "s": self.point.s}
        if self.state_amplitudes is not None:
            data["state_amplitudes"] = [[z.real, z.imag] for z in self.state_amplitudes]
        if self.angles is not None:
            data["angles"] = {"alpha": self.angles.alpha, "beta": self.angles.beta,
                              "phi": self.angles.phi, "xi": self.angles.xi}
        if self.chsh_max is not None:
            data["chsh_max"] = self.chsh_max
        return data

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def certify(b: Behavior, tol: float = DEFAULT_TOL,
            boundary_margin: float = BOUNDARY_MARGIN) -> Certificate:
    """Decide whether the behavior self-tests a two-qubit Hardy state.

    Certified behaviors match the closed-form table at an interior point
    within tol; extracted points too close to the unit-square boundary get
    the 'boundary' verdict because the certified state degenerates there.
    """
    structural = b.validity_errors()
    if structural:
        return Certificate(verdict=VERDICT_REJECTED, residual=np.inf, tol=tol,
                           notes=["malformed behavior"] + structural)

    form = check_hardy_form(b, tol=tol)
    if form.point is None:
        return Certificate(verdict=VERDICT_REJECTED, residual=form.max_residual,
                           tol=tol, notes=form.diagnostics)
    if not form.ok:
        notes = [f"residual {form.max_residual:.6g} exceeds tolerance {tol:g}",
                 "behavior lies in the quantum-set interior; such statistics "
                 "arise from mixed entangled states in higher dimensions"]
        return Certificate(verdict=VERDICT_REJECTED, residual=form.max_residual,
                           point=form.point, tol=tol, notes=notes)

    if form.point.boundary_distance() < boundary_margin:
        return Certificate(
            verdict=VERDICT_BOUNDARY, residual=form.max_residual, point=form.point,
            tol=tol,
            notes=["extracted point within the boundary margin; the state is "
                   "product or degenerate there and the self-test claim does not apply"])

    constraints = check_hardy_constraints(b, tol=tol)
    if not constraints.ok:
        return Certificate(verdict=VERDICT_REJECTED, residual=form.max_residual,
                           point=form.point, tol=tol,
                           notes=["Hardy zero constraints violated: "
                                  f"{constraints.zero_residuals}"])

    locality = is_local(b)
    return Certificate(
        verdict=VERDICT_CERTIFIED,
        residual=form.max_residual,
        point=form.point,
        state_amplitudes=hardy_state(form.point),
        angles=angles_from_point(form.point),
        chsh_max=locality.chsh_max,
        tol=tol,
        notes=["phases phi, xi reported as 0: they are unobservable from the behavior"],
    )


def certificate_roundtrip_check(cert: Certificate, b: Behavior,
                                tol: float | None = None) -> bool:
    """Rebuild the behavior from the certificate both ways and compare to the input.

    Route one is the closed-form table at the certified point; route two is
    the Born rule applied to the certified state and measurement angles.
    """
    if cert.verdict != VERDICT_CERTIFIED:
        raise ValueError("roundtrip check applies to certified results only")
    if tol is None:
        tol = cert.tol
    closed = np.clip(behavior_entries(cert.point.r, cert.point.s), 0.0, 1.0)
    closed_ok = float(np.max(np.abs(closed - b.probs))) <= tol

    norm2 = float(np.vdot(cert.state_amplitudes, cert.state_amplitudes).real)
    if abs(norm2 - 1.0) > 1e-12:
        return False
    alice, bob = qubit_observables(cert.angles)
    simulated = behavior_from_model(projector(cert.state_amplitudes), alice, bob,
                                    validate_output=False)
    born_ok = simulated.max_deviation(b) <= tol
    return closed_ok and born_ok
