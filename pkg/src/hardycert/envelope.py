"""Concave covers of probability objectives over the (r,s) square.

The cover of a sampled surface is taken as the upper hull of the lifted grid:
each upper facet supplies a supporting plane, and the cover value at a query
point is the minimum over those planes.  Equality and strict-concavity masks
on the same grid drive the rigidity analysis, and a one-parameter objective
family is swept to build region unions.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError

from .hardy import behavior_entries, omega_star

DEFAULT_EPS = 1e-5
DEFAULT_ETA = 1e-8

REGION_SCHEMA = "hardycert.region/1"
COVER_SCHEMA = "hardycert.cover/1"

THREADS_ENV = "HARDY_CERT_THREADS"


@dataclass(frozen=True)
class GridSpec:
    """Uniform n-by-n sampling of [delta, 1-delta]^2."""

    n: int = 201
    delta: float = 0.005

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 points per axis")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")

    @property
    def spacing(self) -> float:
        return (1.0 - 2.0 * self.delta) / (self.n - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(self.delta, 1.0 - self.delta, self.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        ax = self.axis()
        return np.meshgrid(ax, ax, indexing="ij")

    def nearest_index(self, r: float, s: float) -> tuple[int, int]:
        ax = self.axis()
        return int(np.argmin(np.abs(ax - r))), int(np.argmin(np.abs(ax - s)))


@dataclass(frozen=True)
class Objective:
    """Linear functional of the 16 closed-form Hardy probabilities plus a constant."""

    coeffs: tuple[float, ...]
    c0: float = 0.0

    def __post_init__(self):
        if len(self.coeffs) != 16:
            raise ValueError("an objective needs exactly 16 coefficients")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, r, s):
        return behavior_entries(r, s) @ np.asarray(self.coeffs) + self.c0


def success_objective() -> Objective:
    """The objective picking out p(+,+|A0,B0)."""
    coeffs = [0.0] * 16
    coeffs[0] = 1.0
    return Objective(coeffs=tuple(coeffs))


@dataclass(frozen=True)
class NuObjective:
    """One-parameter family: success probability tilted by the A0 marginal.

    evaluates to omega_star(r,s) + nu*(s - r*s) + (1-nu)*(1 - s + r*s) - 1/2,
    which reduces to omega_star exactly at nu = 1/2.
    """

    nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")

    def __call__(self, r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        marg = s - r * s  # p(+|A0)
        return omega_star(r, s) + self.nu * marg + (1.0 - self.nu) * (1.0 - marg) - 0.5

    def as_objective(self) -> Objective:
        coeffs = [0.0] * 16
        coeffs[0] = 1.0 + self.nu  # success term plus nu * p(+|A0)
        coeffs[1] = self.nu
        coeffs[2] = 1.0 - self.nu  # (1-nu) * p(-|A0)
        coeffs[3] = 1.0 - self.nu
        return Objective(coeffs=tuple(coeffs), c0=-0.5)


@dataclass
class ConcaveCover:
    """Piecewise-linear upper envelope of the lifted grid samples.

    planes has rows (a, b, c) for the facet planes z = a*r + b*s + c; facets
    holds the three (r, s, value) vertices of each upper-hull facet.
    """

    grid: GridSpec
    planes: np.ndarray
    facets: np.ndarray

    def evaluate(self, r, s) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        shape = np.broadcast(r, s).shape
        rf = np.broadcast_to(r, shape).ravel()
        sf = np.broadcast_to(s, shape).ravel()
        a, b, c = self.planes[:, 0], self.planes[:, 1], self.planes[:, 2]
        out = np.empty(rf.size)
        chunk = max(1, 2**22 // max(len(a), 1))
        for i in range(0, rf.size, chunk):
            block = (rf[i:i + chunk, None] * a[None, :]
                     + sf[i:i + chunk, None] * b[None, :] + c[None, :])
            out[i:i + chunk] = block.min(axis=1)
        return out.reshape(shape) if shape else float(out[0])

    def to_dict(self) -> dict:
        return {
            "schema": COVER_SCHEMA,
            "grid": {"n": self.grid.n, "delta": self.grid.delta},
            "planes": self.planes.tolist(),
            "facets": self.facets.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_cover(f, grid: GridSpec) -> ConcaveCover:
    """Concave cover of f sampled on the grid, via the upper hull of lifted points."""
    rr, ss = grid.mesh()
    zz = np.asarray(f(rr, ss), dtype=float)
    if not np.all(np.isfinite(zz)):
        raise ValueError("objective is not finite on the grid")
    pts = np.column_stack([rr.ravel(), ss.ravel(), zz.ravel()])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return _coplanar_cover(grid, pts)
    eq = hull.equations  # rows (nx, ny, nz, d) with outward normal, n.p + d = 0
    upper = eq[:, 2] > 1e-12
    if not np.any(upper):
        return _coplanar_cover(grid, pts)
    nz = eq[upper, 2]
    planes = np.column_stack([-eq[upper, 0] / nz, -eq[upper, 1] / nz, -eq[upper, 3] / nz])
    facets = pts[hull.simplices[upper]]
    return ConcaveCover(grid=grid, planes=planes, facets=facets)


def _coplanar_cover(grid: GridSpec, pts: np.ndarray) -> ConcaveCover:
    # all samples on one plane (linear objective): fit it directly
    A = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(A, pts[:, 2], rcond=None)
    residual = np.max(np.abs(A @ coef - pts[:, 2]))
    if residual > 1e-9:
        raise ValueError(f"degenerate hull but samples are not coplanar (residual {residual})")
    lo, hi = grid.delta, 1.0 - grid.delta
    corners = np.array([[lo, lo], [hi, lo], [lo, hi], [hi, hi]])
    z = corners @ coef[:2] + coef[2]
    tri = np.array([
        [[*corners[0], z[0]], [*corners[1], z[1]], [*corners[3], z[3]]],
        [[*corners[0], z[0]], [*corners[3], z[3]], [*corners[2], z[2]]],
    ])
    return ConcaveCover(grid=grid, planes=coef[None, :].copy(), facets=tri)


@dataclass
class RegionMask:
    """Boolean mask over a GridSpec, indexed [r_index, s_index]."""

    grid: GridSpec
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.grid.n, self.grid.n):
            raise ValueError("mask shape does not match grid")

    @property
    def coverage(self) -> float:
        return float(self.mask.mean())

    def contains(self, r: float, s: float) -> bool:
        i, j = self.grid.nearest_index(r, s)
        return bool(self.mask[i, j])

    def component_count(self) -> int:
        _, n = ndimage.label(self.mask, structure=np.ones((3, 3)))
        return int(n)

    def component_containing(self, r: float, s: float) -> "RegionMask":
        labels, _ = ndimage.label(self.mask, structure=np.ones((3, 3)))
        i, j = self.grid.nearest_index(r, s)
        lab = labels[i, j]
        comp = (labels == lab) if lab else np.zeros_like(self.mask)
        return RegionMask(grid=self.grid, mask=comp)

    def boundary(self) -> "RegionMask":
        """One-cell-wide boundary ring of the region (8-connectivity)."""
        inner = ndimage.binary_erosion(self.mask, structure=np.ones((3, 3)))
        return RegionMask(grid=self.grid, mask=self.mask & ~inner)

    def union(self, other: "RegionMask") -> "RegionMask":
        if other.grid != self.grid:
            raise ValueError("cannot combine masks on different grids")
        return RegionMask(grid=self.grid, mask=self.mask | other.mask)

    def intersection(self, other: "RegionMask") -> "RegionMask":
        if other.grid != self.grid:
            raise ValueError("cannot combine masks on different grids")
        return RegionMask(grid=self.grid, mask=self.mask & other.mask)

    # -- serialization ------------------------------------------------------

    def to_csv(self) -> str:
        ax = self.grid.axis()
        lines = ["r,s,in_region"]
        for i, r in enumerate(ax):
            for j, s in enumerate(ax):
                lines.append(f"{r:.17g},{s:.17g},{int(self.mask[i, j])}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema": REGION_SCHEMA,
            "grid": {"n": self.grid.n, "delta": self.grid.delta},
            "mask": ["".join("1" if v else "0" for v in row) for row in self.mask],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RegionMask":
        grid = GridSpec(n=data["grid"]["n"], delta=data["grid"]["delta"])
        mask = np.array([[ch == "1" for ch in row] for row in data["mask"]])
        return cls(grid=grid, mask=mask)


def equality_region(f, cover: ConcaveCover, eps: float = DEFAULT_EPS) -> RegionMask:
    """Grid points where the cover touches the objective (gap <= eps)."""
    rr, ss = cover.grid.mesh()
    gap = cover.evaluate(rr, ss) - np.asarray(f(rr, ss), dtype=float)
    return RegionMask(grid=cover.grid, mask=gap <= eps)


def hessian_eigenvalues(f, grid: GridSpec):
    """Central finite-difference Hessian eigenvalues at each grid point, step = spacing."""
    rr, ss = grid.mesh()
    h = grid.spacing
    f0 = np.asarray(f(rr, ss), dtype=float)
    frr = (f(rr + h, ss) - 2.0 * f0 + f(rr - h, ss)) / h**2
    fss = (f(rr, ss + h) - 2.0 * f0 + f(rr, ss - h)) / h**2
    frs = (f(rr + h, ss + h) - f(rr + h, ss - h)
           - f(rr - h, ss + h) + f(rr - h, ss - h)) / (4.0 * h**2)
    half_tr = (frr + fss) / 2.0
    disc = np.sqrt(((frr - fss) / 2.0) ** 2 + frs**2)
    return half_tr - disc, half_tr + disc


def concavity_region(f, grid: GridSpec, eta: float = DEFAULT_ETA) -> RegionMask:
    """Grid points where both Hessian eigenvalues are below -eta."""
    _, lam_max = hessian_eigenvalues(f, grid)
    return RegionMask(grid=grid, mask=lam_max < -eta)


def lemma1_region(f, grid: GridSpec, eps: float = DEFAULT_EPS,
                  eta: float = DEFAULT_ETA) -> RegionMask:
    """Certified region: cover touches the objective AND the objective is strictly concave."""
    cover = build_cover(f, grid)
    return equality_region(f, cover, eps).intersection(concavity_region(f, grid, eta))


def _nu_region(args) -> np.ndarray:
    nu, grid, eps, eta = args
    return lemma1_region(NuObjective(nu), grid, eps, eta).mask


@dataclass
class SweepResult:
    grid: GridSpec
    nus: list[float]
    regions: dict[float, RegionMask] = field(repr=False)
    union: RegionMask = field(repr=False)

    @property
    def coverage(self) -> float:
        return self.union.coverage

    def summary(self) -> str:
        return f"N={len(self.nus) + 1} coverage={self.coverage:.6f}"


def sweep_union(N: int, grid: GridSpec, eps: float = DEFAULT_EPS,
                eta: float = DEFAULT_ETA, workers: int | None = None) -> SweepResult:
    """Union of certified regions over the uniform nu grid {k/N : k = 1..N-1}."""
    if N < 2:
        raise ValueError("sweep needs N >= 2")
    nus = [k / N for k in range(1, N)]
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1"))
    args = [(nu, grid, eps, eta) for nu in nus]
    if workers > 1 and len(nus) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            masks = list(pool.map(_nu_region, args))
    else:
        masks = [_nu_region(a) for a in args]
    regions = {nu: RegionMask(grid=grid, mask=m) for nu, m in zip(nus, masks)}
    union = RegionMask(grid=grid, mask=np.logical_or.reduce(masks))
    return SweepResult(grid=grid, nus=nus, regions=regions, union=union)
