"""Closed-form Hardy parametrization: (r,s) <-> angles <-> state <-> behavior."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
P_HARDY_MAX = (-11.0 + 5.0 * np.sqrt(5.0)) / 2.0

CONTEXTS = ("A0B0", "A0B1", "A1B0", "A1B1")
OUTCOMES = ("++", "+-", "-+", "--")

BEHAVIOR_SCHEMA = "hardycert.behavior/1"

# Tolerances for behavior validity (normalization / nonsignaling / range).
VALIDITY_TOL = 1e-10


class DegenerateParameterError(ValueError):
    """Raised when (r,s) or angles sit on a degenerate part of the parametrization."""


def behavior_index(x: int, y: int, a: int, b: int) -> int:
    """Flat index into the 16-vector: x-major, then y, then a, then b (0 = '+', 1 = '-')."""
    return ((x * 2 + y) * 2 + a) * 2 + b


@dataclass(frozen=True)
class HardyPoint:
    """The pair (r,s) = (p(-,-|A0,B0), p(-,-|A1,B0)) parametrizing Hardy behaviors."""

    r: float
    s: float

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.s <= 1.0):
            raise ValueError(f"(r,s)=({self.r},{self.s}) outside the unit square")

    @property
    def interior(self) -> bool:
        return 0.0 < self.r < 1.0 and 0.0 < self.s < 1.0

    def boundary_distance(self) -> float:
        return min(self.r, 1.0 - self.r, self.s, 1.0 - self.s)


@dataclass(frozen=True)
class MeasurementAngles:
    """Projective-measurement angles; half-angle shorthands C/S/T refer to cos, sin, tan of z/2."""

    alpha: float
    beta: float
    phi: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.alpha <= np.pi and 0.0 <= self.beta <= np.pi):
            raise ValueError("alpha and beta must lie in [0, pi]")


def behavior_entries(r, s):
    """Raw closed-form 16-vector(s) of Hardy probabilities at (r,s).

    Broadcasts over array inputs; returns shape r.shape + (16,).  No domain
    validation or clamping is done here so that objective evaluation and
    finite differencing remain smooth wherever r*s != 1.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    d = 1.0 - r * s
    zero = np.zeros(np.broadcast(r, s).shape)
    entries = [
        (1 - r) * r * (1 - s) * s / d,  # A0B0 ++
        (1 - r) ** 2 * s / d,           # A0B0 +-
        (1 - r) * (1 - s) + zero,       # A0B0 -+
        r + zero,                       # A0B0 --
        (1 - r) * s + zero,             # A0B1 ++
        zero,                           # A0B1 +-  (Hardy zero)
        (1 - r) * r * s**2 / d,         # A0B1 -+
        (1 - s) / d,                    # A0B1 --
        (1 - r) * (1 - s) / d,          # A1B0 ++
        r * (1 - s) ** 2 / d,           # A1B0 +-
        zero,                           # A1B0 -+  (Hardy zero)
        s + zero,                       # A1B0 --
        zero,                           # A1B1 ++  (Hardy zero)
        1 - s + zero,                   # A1B1 +-
        (1 - r) * s / d,                # A1B1 -+
        r * (1 - s) * s / d,            # A1B1 --
    ]
    return np.stack(entries, axis=-1)


class Behavior:
    """The 16 conditional probabilities p(a,b|x,y) of a 2-input/2-output Bell experiment.

    Stored as a fixed-order vector (x-major, then y, then a, then b) so that
    file round-trips are bit-reproducible.
    """

    def __init__(self, probs, validate: bool = True):
        p = np.asarray(probs, dtype=float)
        if p.shape != (16,):
            raise ValueError(f"behavior needs 16 entries, got shape {p.shape}")
        self.probs = p
        if validate:
            errors = self.validity_errors()
            if errors:
                raise ValueError("invalid behavior: " + "; ".join(errors))

    def p(self, x: int, y: int, a: int, b: int) -> float:
        return float(self.probs[behavior_index(x, y, a, b)])

    def context(self, x: int, y: int) -> np.ndarray:
        base = (x * 2 + y) * 4
        return self.probs[base : base + 4]

    def marginal_a(self, x: int, y: int, a: int) -> float:
        return self.p(x, y, a, 0) + self.p(x, y, a, 1)

    def marginal_b(self, x: int, y: int, b: int) -> float:
        return self.p(x, y, 0, b) + self.p(x, y, 1, b)

    def correlator(self, x: int, y: int) -> float:
        pp, pm, mp, mm = self.context(x, y)
        return float(pp + mm - pm - mp)

    def validity_errors(self, tol: float = VALIDITY_TOL) -> list[str]:
        errors = []
        if self.probs.min() < -tol or self.probs.max() > 1 + tol:
            errors.append("entries outside [0,1]")
        for x in range(2):
            for y in range(2):
                total = self.context(x, y).sum()
                if abs(total - 1.0) > tol:
                    errors.append(f"context {CONTEXTS[x * 2 + y]} sums to {total:.12g}")
        for x in range(2):
            for a in range(2):
                if abs(self.marginal_a(x, 0, a) - self.marginal_a(x, 1, a)) > tol:
                    errors.append(f"Alice marginal (x={x}, a={a}) signals")
        for y in range(2):
            for b in range(2):
                if abs(self.marginal_b(0, y, b) - self.marginal_b(1, y, b)) > tol:
                    errors.append(f"Bob marginal (y={y}, b={b}) signals")
        return errors

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        contexts = {}
        for x in range(2):
            for y in range(2):
                ctx = self.context(x, y)
                contexts[CONTEXTS[x * 2 + y]] = dict(zip(OUTCOMES, (float(v) for v in ctx)))
        return {"schema": BEHAVIOR_SCHEMA, "contexts": contexts}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict, validate: bool = True) -> "Behavior":
        try:
            contexts = data["contexts"]
            probs = [contexts[ctx][out] for ctx in CONTEXTS for out in OUTCOMES]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"behavior JSON missing field: {exc}") from exc
        return cls(probs, validate=validate)

    @classmethod
    def from_json(cls, text: str, validate: bool = True) -> "Behavior":
        return cls.from_dict(json.loads(text), validate=validate)

    def to_csv_row(self) -> str:
        return ",".join(f"{v:.17g}" for v in self.probs)

    @classmethod
    def from_csv_row(cls, row: str, validate: bool = True) -> "Behavior":
        return cls([float(tok) for tok in row.strip().split(",")], validate=validate)

    def __eq__(self, other):
        return isinstance(other, Behavior) and np.array_equal(self.probs, other.probs)

    def max_deviation(self, other: "Behavior") -> float:
        return float(np.max(np.abs(self.probs - other.probs)))


# -- (r,s) <-> angles -------------------------------------------------------


def angles_from_point(pt: HardyPoint, phi: float = 0.0, xi: float = 0.0) -> MeasurementAngles:
    """Measurement angles realizing the Hardy behavior at pt."""
    rs = pt.r * pt.s
    if rs >= 1.0:
        raise DegenerateParameterError("r*s = 1: angles undefined")
    alpha = 2.0 * np.arcsin(np.sqrt(1.0 - rs))
    beta = 2.0 * np.arcsin(np.sqrt((1.0 - pt.r) / (1.0 - rs)))
    return MeasurementAngles(alpha=float(alpha), beta=float(beta), phi=phi, xi=xi)


def point_from_angles(ang: MeasurementAngles) -> HardyPoint:
    """Inverse of angles_from_point on its range."""
    sa = np.sin(ang.alpha / 2.0)
    sb = np.sin(ang.beta / 2.0)
    ca = np.cos(ang.alpha / 2.0)
    r = 1.0 - sa**2 * sb**2
    if r <= 0.0:
        raise DegenerateParameterError("alpha = beta = pi: r = 0, s undefined")
    s = ca**2 / r
    return HardyPoint(r=float(r), s=float(min(s, 1.0)))


# -- state and behavior -----------------------------------------------------


def hardy_state(pt: HardyPoint, phi: float = 0.0, xi: float = 0.0) -> np.ndarray:
    """Normalized two-qubit Hardy state at an interior point, standard basis order 00,01,10,11."""
    if not pt.interior:
        raise ValueError(f"Hardy state requires an interior point, got ({pt.r},{pt.s})")
    r, s = pt.r, pt.s
    d = 1.0 - r * s
    amps = np.array(
        [
            -np.sqrt((1 - r) * r * (1 - s) * s / d),
            -np.exp(1j * xi) * np.sqrt((1 - r) ** 2 * s / d),
            -np.exp(1j * phi) * np.sqrt((1 - r) * (1 - s)),
            np.exp(1j * (xi + phi)) * np.sqrt(r),
        ],
        dtype=complex,
    )
    return amps


def hardy_behavior(pt: HardyPoint) -> Behavior:
    """Closed-form Hardy behavior at (r,s); the three Hardy zeros hold exactly."""
    if pt.r * pt.s >= 1.0:
        raise DegenerateParameterError("r*s = 1: behavior undefined")
    probs = np.clip(behavior_entries(pt.r, pt.s), 0.0, 1.0)
    return Behavior(probs)


def omega_star(r, s):
    """Hardy success probability p(+,+|A0,B0) = r(1-r)s(1-s)/(1-rs); broadcasts."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    return r * (1 - r) * s * (1 - s) / (1 - r * s)


# -- checks -----------------------------------------------------------------


@dataclass
class HardyConstraintResult:
    ok: bool
    p_hardy: float
    zero_residuals: dict[str, float]


def check_hardy_constraints(b: Behavior, tol: float = 1e-9) -> HardyConstraintResult:
    """Check the three zero constraints and positivity of the success probability."""
    zeros = {
        "p(+,-|A0,B1)": b.p(0, 1, 0, 1),
        "p(-,+|A1,B0)": b.p(1, 0, 1, 0),
        "p(+,+|A1,B1)": b.p(1, 1, 0, 0),
    }
    p_hardy = b.p(0, 0, 0, 0)
    ok = all(v <= tol for v in zeros.values()) and p_hardy > tol
    return HardyConstraintResult(ok=ok, p_hardy=p_hardy, zero_residuals=zeros)


@dataclass
class HardyFormResult:
    ok: bool
    point: HardyPoint | None
    max_residual: float
    entry_residuals: np.ndarray = field(repr=False, default=None)
    diagnostics: list[str] = field(default_factory=list)


def check_hardy_form(b: Behavior, tol: float = 1e-9) -> HardyFormResult:
    """Read (r,s) off the two designated entries and test the whole table against them.

    r = p(-,-|A0,B0), s = p(-,-|A1,B0); the residual is the max entrywise
    deviation from the closed-form behavior those parameters generate.
    """
    r = b.p(0, 0, 1, 1)
    s = b.p(1, 0, 1, 1)
    if not (0.0 <= r <= 1.0 and 0.0 <= s <= 1.0):
        return HardyFormResult(
            ok=False, point=None, max_residual=np.inf,
            diagnostics=[f"extracted (r,s)=({r},{s}) outside the unit square"],
        )
    if r * s >= 1.0:
        return HardyFormResult(
            ok=False, point=None, max_residual=np.inf,
            diagnostics=["extracted r*s = 1: closed form degenerate"],
        )
    pt = HardyPoint(r, s)
    residuals = np.abs(b.probs - np.clip(behavior_entries(r, s), 0.0, 1.0))
    max_res = float(residuals.max())
    return HardyFormResult(ok=max_res <= tol, point=pt, max_residual=max_res,
                           entry_residuals=residuals)


@dataclass
class LocalityResult:
    local: bool
    chsh_max: float


def is_local(b: Behavior, tol: float = 1e-10) -> LocalityResult:
    """Fine's theorem for 2 inputs / 2 outputs: local iff all eight CHSH values are <= 2."""
    errors = b.validity_errors()
    if errors:
        raise ValueError("locality test requires a valid nonsignaling behavior: "
                         + "; ".join(errors))
    e = np.array([[b.correlator(x, y) for y in range(2)] for x in range(2)])
    chsh_max = 0.0
    for x0, y0 in ((0, 0), (0, 1), (1, 0), (1, 1)):
        # minus sign on the (x0,y0) term, plus on the rest
        val = e.sum() - 2.0 * e[x0, y0]
        chsh_max = max(chsh_max, abs(val))
    return LocalityResult(local=chsh_max <= 2.0 + tol, chsh_max=float(chsh_max))
