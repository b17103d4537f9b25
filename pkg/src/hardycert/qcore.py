"""Dense complex linear algebra and Born-rule simulation for small bipartite systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hardy import Behavior, MeasurementAngles

# large enough for a 3x3-block party (dim 6) with its ancilla qubit on both
# sides: (2*6)**2 = 144 for the joint post-isometry state
MAX_DIM = 256

HERMITIAN_TOL = 1e-12
PROJECTOR_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds the cap of {MAX_DIM}")
    return m


def check_state_vector(psi, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state vector not normalized: |psi|^2 = {norm2!r}")
    return psi


def check_density(rho) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positivity; returns the array."""
    rho = _as_square(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density operator is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > HERMITIAN_TOL:
        raise ValueError(f"density operator trace is {tr}, expected 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < EIGENVALUE_FLOOR:
        raise ValueError(f"density operator has negative eigenvalue {evals.min()}")
    return rho


def check_projector(p) -> np.ndarray:
    p = _as_square(p)
    if np.max(np.abs(p - p.conj().T)) > PROJECTOR_TOL:
        raise ValueError("projector is not Hermitian")
    if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
        raise ValueError("operator is not idempotent")
    return p


@dataclass(frozen=True)
class ObservablePair:
    """Complete binary projective observable: projectors for outcomes +1 and -1."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = check_projector(self.plus)
        minus = check_projector(self.minus)
        if plus.shape != minus.shape:
            raise ValueError("projector dimensions differ")
        eye = np.eye(plus.shape[0])
        if np.max(np.abs(plus + minus - eye)) > HERMITIAN_TOL:
            raise ValueError("projectors do not sum to the identity")
        if np.max(np.abs(plus @ minus)) > PROJECTOR_TOL:
            raise ValueError("projectors are not orthogonal")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def dim(self) -> int:
        return self.plus.shape[0]

    def projector(self, outcome: int) -> np.ndarray:
        return self.plus if outcome == 0 else self.minus

    def observable(self) -> np.ndarray:
        return self.plus - self.minus


def projector(vec) -> np.ndarray:
    """Rank-one projector |v><v| from a (normalized) vector."""
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def tensor(a, b) -> np.ndarray:
    """Kronecker product."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def born_probability(rho, pa, pb, validate: bool = False) -> float:
    """p(a,b) = Tr(rho Pa (x) Pb), clamped to [0,1] after a tolerance check."""
    rho = _as_square(rho)
    pa = np.asarray(pa, dtype=complex)
    pb = np.asarray(pb, dtype=complex)
    if rho.shape[0] != pa.shape[0] * pb.shape[0]:
        raise ValueError(
            f"dimension mismatch: rho is {rho.shape[0]}, projectors give "
            f"{pa.shape[0]}x{pb.shape[0]}")
    if validate:
        check_density(rho)
        check_projector(pa)
        check_projector(pb)
    p = float(np.trace(rho @ tensor(pa, pb)).real)
    if p < -1e-12 or p > 1 + 1e-12:
        raise ValueError(f"Born probability {p!r} outside [0,1] beyond tolerance")
    return min(max(p, 0.0), 1.0)


def behavior_from_model(rho, alice, bob, validate_output: bool = True) -> Behavior:
    """Full behavior of a state and two ObservablePairs per party."""
    probs = np.empty(16)
    k = 0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    probs[k] = born_probability(
                        rho, alice[x].projector(a), bob[y].projector(b))
                    k += 1
    return Behavior(probs, validate=validate_output)


def qubit_observables(ang: MeasurementAngles) -> tuple[tuple[ObservablePair, ObservablePair],
                                                       tuple[ObservablePair, ObservablePair]]:
    """Standard Hardy measurement pairs for Alice (alpha, phi) and Bob (beta, xi).

    The first observable of each party is diagonal in the computational basis;
    the second is rotated by the half-angle construction.
    """
    z_pair = ObservablePair(plus=np.diag([1.0 + 0j, 0.0]), minus=np.diag([0.0j, 1.0]))

    def rotated(theta: float, phase: float) -> ObservablePair:
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        e = np.exp(1j * phase)
        u0 = np.array([c, e * s])
        u1 = np.array([-s, e * c])
        return ObservablePair(plus=projector(u0), minus=projector(u1))

    alice = (z_pair, rotated(ang.alpha, ang.phi))
    bob = (z_pair, rotated(ang.beta, ang.xi))
    return alice, bob


def fidelity(psi, rho) -> float:
    """<psi|rho|psi> for a pure target state."""
    psi = check_state_vector(psi)
    rho = _as_square(rho)
    if rho.shape[0] != psi.size:
        raise ValueError("dimension mismatch between state vector and density operator")
    val = float(np.vdot(psi, rho @ psi).real)
    return min(max(val, 0.0), 1.0)


def partial_trace(rho, keep, dims) -> np.ndarray:
    """Reduced density operator on the kept tensor factors.

    dims lists the local dimensions of each factor; keep lists the factor
    indices to retain, in output order.
    """
    rho = _as_square(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"product of dims {dims} != matrix dimension {rho.shape[0]}")
    keep = [int(k) for k in keep]
    if any(k < 0 or k >= len(dims) for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"invalid keep spec {keep} for {len(dims)} factors")
    n = len(dims)
    reshaped = rho.reshape(dims + dims)
    # contract each traced-out factor's row index with its column index
    traced = sorted(set(range(n)) - set(keep))
    for offset, t in enumerate(traced):
        axis = t - offset  # earlier traces shrink the index space
        reshaped = np.trace(reshaped, axis1=axis, axis2=axis + (n - offset))
    # axes now ordered by ascending original index; permute to requested order
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(k) for k in keep]
    m = len(keep)
    reshaped = np.transpose(reshaped, perm + [p + m for p in perm])
    out_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reshaped.reshape(out_dim, out_dim)
