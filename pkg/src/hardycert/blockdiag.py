"""Block-diagonal black-box models: weighted direct sums of two-qubit Hardy blocks.

A model assigns a weight mu_ij and a Hardy point (r_ij, s_ij) to each pair of
an Alice block i and a Bob block j.  Per-party measurement angles are fixed
per block index (alpha_i for Alice, beta_j for Bob), so populated blocks in
one row or column must imply consistent angles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .hardy import (
    Behavior,
    HardyPoint,
    MeasurementAngles,
    angles_from_point,
    behavior_entries,
    check_hardy_form,
    hardy_state,
)
from .qcore import (
    ObservablePair,
    behavior_from_model,
    check_state_vector,
    fidelity,
    partial_trace,
    projector,
)

WEIGHT_TOL = 1e-12
ANGLE_TOL = 1e-12

BLOCKMODEL_SCHEMA = "hardycert.blockmodel/1"


@dataclass(frozen=True)
class Block:
    """One populated 2x2-by-2x2 component: indices, weight, and its Hardy point."""

    i: int
    j: int
    mu: float
    point: HardyPoint

    def __post_init__(self):
        if self.i < 0 or self.j < 0:
            raise ValueError("block indices must be nonnegative")
        if self.mu < 0:
            raise ValueError("block weight must be nonnegative")
        if not self.point.interior:
            raise ValueError("block points must be interior")

    def angles(self, phi: float = 0.0, xi: float = 0.0) -> MeasurementAngles:
        return angles_from_point(self.point, phi=phi, xi=xi)


class BlockModel:
    """Weighted family of Hardy blocks with shared global phases."""

    def __init__(self, blocks: list[Block], phi: float = 0.0, xi: float = 0.0):
        if not blocks:
            raise ValueError("model needs at least one block")
        seen = set()
        for blk in blocks:
            if (blk.i, blk.j) in seen:
                raise ValueError(f"duplicate block index ({blk.i}, {blk.j})")
            seen.add((blk.i, blk.j))
        total = sum(b.mu for b in blocks)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"block weights sum to {total!r}, expected 1")
        self.blocks = list(blocks)
        self.phi = float(phi)
        self.xi = float(xi)
        self.nA = max(b.i for b in blocks) + 1
        self.nB = max(b.j for b in blocks) + 1
        self._alphas, self._betas = self._party_angles()

    def _party_angles(self) -> tuple[np.ndarray, np.ndarray]:
        # every populated block in row i must imply the same alpha_i; likewise beta_j
        alphas = np.full(self.nA, np.nan)
        betas = np.full(self.nB, np.nan)
        for blk in self.populated():
            ang = blk.angles()
            for arr, idx, val, label in ((alphas, blk.i, ang.alpha, "alpha"),
                                         (betas, blk.j, ang.beta, "beta")):
                if np.isnan(arr[idx]):
                    arr[idx] = val
                elif abs(arr[idx] - val) > ANGLE_TOL:
                    raise ValueError(
                        f"inconsistent {label}_{idx}: {arr[idx]} vs {val} "
                        f"(block points in one row/column must share the angle)")
        # rows/columns populated only by zero-weight blocks still need an angle
        for blk in self.blocks:
            ang = blk.angles()
            if np.isnan(alphas[blk.i]):
                alphas[blk.i] = ang.alpha
            if np.isnan(betas[blk.j]):
                betas[blk.j] = ang.beta
        if np.any(np.isnan(alphas)) or np.any(np.isnan(betas)):
            raise ValueError("every block row and column needs at least one block")
        return alphas, betas

    def populated(self, tol: float = 0.0) -> list[Block]:
        return [b for b in self.blocks if b.mu > tol]

    def common_point(self, tol: float = 0.0) -> HardyPoint | None:
        """The shared Hardy point if all populated blocks agree within tol, else None."""
        pop = self.populated()
        r0, s0 = pop[0].point.r, pop[0].point.s
        for b in pop[1:]:
            if abs(b.point.r - r0) > tol or abs(b.point.s - s0) > tol:
                return None
        return pop[0].point

    def barycenter(self) -> HardyPoint:
        r = sum(b.mu * b.point.r for b in self.blocks)
        s = sum(b.mu * b.point.s for b in self.blocks)
        return HardyPoint(r, s)

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, point: HardyPoint, nA: int = 1, nB: int = 1,
                phi: float = 0.0, xi: float = 0.0) -> "BlockModel":
        mu = 1.0 / (nA * nB)
        blocks = [Block(i=i, j=j, mu=mu, point=point)
                  for i in range(nA) for j in range(nB)]
        return cls(blocks, phi=phi, xi=xi)

    @classmethod
    def weighted_common(cls, point: HardyPoint, weights, phi: float = 0.0,
                        xi: float = 0.0) -> "BlockModel":
        """Common-point model with an explicit nA-by-nB weight matrix."""
        w = np.asarray(weights, dtype=float)
        blocks = [Block(i=i, j=j, mu=float(w[i, j]), point=point)
                  for i in range(w.shape[0]) for j in range(w.shape[1])]
        return cls(blocks, phi=phi, xi=xi)

    @classmethod
    def diagonal(cls, points: list[HardyPoint], weights, phi: float = 0.0,
                 xi: float = 0.0) -> "BlockModel":
        """Distinct-point mixture: point k sits at block (k,k) with weight_k.

        Off-diagonal blocks carry zero weight, so per-party angles stay
        consistent by construction.
        """
        if len(points) != len(weights):
            raise ValueError("points and weights must have equal length")
        blocks = [Block(i=k, j=k, mu=float(w), point=pt)
                  for k, (pt, w) in enumerate(zip(points, weights))]
        return cls(blocks, phi=phi, xi=xi)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": BLOCKMODEL_SCHEMA,
            "blocks": [{"i": b.i, "j": b.j, "mu": b.mu, "r": b.point.r, "s": b.point.s}
                       for b in self.blocks],
            "phi": self.phi,
            "xi": self.xi,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "BlockModel":
        try:
            blocks = [Block(i=int(b["i"]), j=int(b["j"]), mu=float(b["mu"]),
                            point=HardyPoint(float(b["r"]), float(b["s"])))
                      for b in data["blocks"]]
            return cls(blocks, phi=float(data.get("phi", 0.0)),
                       xi=float(data.get("xi", 0.0)))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"block model JSON missing field: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "BlockModel":
        return cls.from_dict(json.loads(text))


def mixture_behavior(model: BlockModel) -> Behavior:
    """Weighted average of the per-block closed-form behaviors."""
    probs = np.zeros(16)
    for blk in model.blocks:
        if blk.mu == 0.0:
            continue
        probs += blk.mu * behavior_entries(blk.point.r, blk.point.s)
    return Behavior(np.clip(probs, 0.0, 1.0))


def build_global_model(model: BlockModel):
    """Explicit state and block-diagonal observables realizing the model.

    Returns (rho, alice_pairs, bob_pairs) with Alice dimension 2*nA and Bob
    dimension 2*nB; the Born-rule behavior of the triple equals
    mixture_behavior(model).
    """
    dA, dB = 2 * model.nA, 2 * model.nB
    chi = np.zeros(dA * dB, dtype=complex)
    for blk in model.blocks:
        if blk.mu == 0.0:
            continue
        psi = hardy_state(blk.point, phi=model.phi, xi=model.xi)
        for p in range(2):
            for q in range(2):
                chi[(2 * blk.i + p) * dB + (2 * blk.j + q)] += \
                    np.sqrt(blk.mu) * psi[2 * p + q]
    chi = check_state_vector(chi)
    rho = projector(chi)

    def party_pairs(n: int, angles: np.ndarray, phase: float):
        d = 2 * n
        diag_plus = np.zeros((d, d), dtype=complex)
        diag_minus = np.zeros((d, d), dtype=complex)
        rot_plus = np.zeros((d, d), dtype=complex)
        rot_minus = np.zeros((d, d), dtype=complex)
        for k in range(n):
            diag_plus[2 * k, 2 * k] = 1.0
            diag_minus[2 * k + 1, 2 * k + 1] = 1.0
            c, s = np.cos(angles[k] / 2.0), np.sin(angles[k] / 2.0)
            e = np.exp(1j * phase)
            u0 = np.zeros(d, dtype=complex)
            u1 = np.zeros(d, dtype=complex)
            u0[2 * k], u0[2 * k + 1] = c, e * s
            u1[2 * k], u1[2 * k + 1] = -s, e * c
            rot_plus += projector(u0)
            rot_minus += projector(u1)
        return (ObservablePair(plus=diag_plus, minus=diag_minus),
                ObservablePair(plus=rot_plus, minus=rot_minus))

    alice = party_pairs(model.nA, model._alphas, model.phi)
    bob = party_pairs(model.nB, model._betas, model.xi)
    return rho, alice, bob


@dataclass
class Lemma2Report:
    """Mixture-rigidity check: Hardy form holds iff all populated blocks share a point."""

    hardy_form_ok: bool
    form_residual: float
    barycenter: HardyPoint | None
    common_point: HardyPoint | None
    block_deviations: list[tuple[int, int, float]] = field(default_factory=list)
    consistent: bool = True
    notes: list[str] = field(default_factory=list)


def verify_lemma2(model: BlockModel, tol: float = 1e-9) -> Lemma2Report:
    """Cross-check the mixture behavior against the common-point criterion."""
    behavior = mixture_behavior(model)
    form = check_hardy_form(behavior, tol=tol)
    bary = model.barycenter()
    deviations = [
        (b.i, b.j, max(abs(b.point.r - bary.r), abs(b.point.s - bary.s)))
        for b in model.populated(tol=tol)
    ]
    blocks_common = all(dev <= tol for _, _, dev in deviations)
    consistent = form.ok == blocks_common
    notes = []
    if form.ok and not blocks_common:
        # residual is quadratic in block separation, so tiny separations can
        # slip under tol without contradicting rigidity
        consistent = max(dev for _, _, dev in deviations) < np.sqrt(tol) * 100
        notes.append("within tolerance, rigidity not violated"
                     if consistent else "Hardy form passed for separated blocks")
    if not form.ok:
        notes.append(f"behavior deviates from Hardy form by {form.max_residual:.6g}")
    return Lemma2Report(
        hardy_form_ok=form.ok,
        form_residual=form.max_residual,
        barycenter=bary,
        common_point=model.common_point(tol=tol),
        block_deviations=deviations,
        consistent=consistent,
        notes=notes,
    )


def local_isometry(n_blocks: int) -> np.ndarray:
    """Matrix of the block-unpacking isometry on one party plus its ancilla qubit.

    Maps basis state 2k to (2k, 0) and 2k+1 to (2k, 1) of the enlarged space,
    ordered (system, ancilla).
    """
    d = 2 * n_blocks
    v = np.zeros((2 * d, d))
    for m in range(d):
        k = m // 2
        v[(2 * k) * 2 + (m % 2), m] = 1.0
    return v


@dataclass
class ExtractionResult:
    junk: np.ndarray
    extracted: np.ndarray
    fidelity: float
    target_state: np.ndarray


def isometry_extract(model: BlockModel) -> ExtractionResult:
    """Pull the certified two-qubit state out of a common-point model.

    Appends an ancilla qubit per party, applies the local isometry on each
    side, and traces down to the ancilla pair.  Requires every populated
    block to sit at one Hardy point.
    """
    common = model.common_point(tol=0.0)
    if common is None:
        raise ValueError("isometry extraction requires a common-point model")
    rho, _, _ = build_global_model(model)
    dA, dB = 2 * model.nA, 2 * model.nB
    va = local_isometry(model.nA)
    vb = local_isometry(model.nB)
    # state lives on A (x) B; isometries emit (A, A') and (B, B')
    big = np.kron(va, vb) @ rho @ np.kron(va, vb).conj().T
    dims = [dA, 2, dB, 2]
    extracted = partial_trace(big, keep=[1, 3], dims=dims)
    junk = partial_trace(big, keep=[0, 2], dims=dims)
    target = hardy_state(common, phi=model.phi, xi=model.xi)
    fid = fidelity(target, extracted)
    return ExtractionResult(junk=junk, extracted=extracted, fidelity=fid,
                            target_state=target)
