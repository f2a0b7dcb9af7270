"""Distances between root measures, grid densities, and closed forms.

Kolmogorov-Smirnov and 1-Wasserstein distances compare CDFs after both
sides are normalized to probability (the raw masses are recorded in the
report); the L1 density error compares raw densities.  No kernel density
estimation anywhere: discrete measures enter only through their CDFs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .densities import ClosedFormFamily
from .errors import DegenerateMeasureError, DomainError
from .poly_dynamics import EmpiricalCDF


@dataclass(frozen=True)
class FamilyCdf:
    """Normalized CDF of a closed-form family at a fixed time."""

    family: ClosedFormFamily
    t: float

    @property
    def support(self) -> tuple[float, float]:
        sup = self.family.support(self.t)
        return sup.a, sup.b

    @property
    def mass(self) -> float:
        return self.family.mass(self.t)

    def __call__(self, x):
        return self.family.cdf(self.t, x)


@dataclass(frozen=True)
class GridCdf:
    """Piecewise-linear CDF of a nonnegative density sampled on a grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise DomainError("grid and values must be matching 1-d arrays")
        cum = np.concatenate(
            ([0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid)))
        )
        total = cum[-1]
        if total <= 0.0:
            raise DegenerateMeasureError("grid density has zero mass")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cum", cum / total)
        object.__setattr__(self, "_mass", float(total))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def mass(self) -> float:
        return self._mass

    def __call__(self, x):
        out = np.interp(np.asarray(x, dtype=float), self.grid, self._cum)
        return float(out) if np.ndim(x) == 0 else out


def _check_mass(side) -> float:
    mass = getattr(side, "mass", None)
    if mass is None:  # empirical CDFs are unit mass by construction
        if getattr(side, "n", 0) <= 0:
            raise DegenerateMeasureError("empty empirical measure")
        return float(getattr(side, "n"))
    mass = float(mass)
    if mass <= 0.0:
        raise DegenerateMeasureError("zero-mass measure cannot be normalized")
    return mass


def ks_distance(empirical: EmpiricalCDF, reference) -> float:
    """sup |F_emp - F_ref| over jump points, their left limits, and
    inter-jump midpoints.

    Left limits make the sup exact when the reference itself is a step
    CDF; for continuous references they reduce to the usual comparison of
    both one-sided empirical values against F_ref at each jump.
    """
    _check_mass(empirical)
    _check_mass(reference)
    pts = [np.asarray(empirical.jumps, dtype=float)]
    ref_jumps = getattr(reference, "jumps", None)
    if ref_jumps is not None:
        pts.append(np.asarray(ref_jumps, dtype=float))
    pts = np.unique(np.concatenate(pts))
    if pts.size > 1:
        pts = np.union1d(pts, 0.5 * (pts[1:] + pts[:-1]))
    left = np.nextafter(pts, -np.inf)
    worst = 0.0
    for xs in (pts, left):
        diff = np.abs(
            np.asarray(empirical(xs), dtype=float) - np.asarray(reference(xs), dtype=float)
        )
        worst = max(worst, float(np.max(diff)))
    return worst


def sup_cdf_distance(a, b, samples: int = 8193) -> float:
    """sup |F_a - F_b| for two continuous CDFs, on a dense union grid."""
    _check_mass(a)
    _check_mass(b)
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    xs = np.linspace(lo, hi, samples)
    for side in (a, b):
        knots = getattr(side, "grid", None)
        if knots is not None:
            xs = np.union1d(xs, knots)
    return float(np.max(np.abs(np.asarray(a(xs)) - np.asarray(b(xs)))))


def _breakpoints(a, b) -> np.ndarray:
    pts = []
    for side in (a, b):
        jumps = getattr(side, "jumps", None)
        if jumps is not None:
            pts.append(np.asarray(jumps, dtype=float))
        else:
            pts.append(np.asarray(side.support, dtype=float))
        knots = getattr(side, "grid", None)
        if knots is not None:
            pts.append(np.asarray(knots, dtype=float))
    return np.unique(np.concatenate(pts))


def _cell_integral(side, lo: float, hi: float, nodes: np.ndarray):
    """CDF samples of one side on the interior nodes of a cell."""
    if getattr(side, "jumps", None) is not None:
        return np.full(nodes.size, side(0.5 * (lo + hi)))
    return np.asarray(side(nodes), dtype=float)


def wasserstein1(a, b, rel_tol: float = 1e-9, max_refine: int = 12) -> float:
    """W1 = integral |F_a - F_b| dx over the union of supports.

    The partition is refined at all jump points; step CDFs contribute
    their cell-constant value, continuous CDFs are integrated by the
    trapezoid rule with doubling refinement until the estimate settles.
    """
    _check_mass(a)
    _check_mass(b)
    cuts = _breakpoints(a, b)
    if cuts.size < 2:
        return 0.0
    both_discrete = (
        getattr(a, "jumps", None) is not None and getattr(b, "jumps", None) is not None
    )
    if both_discrete:
        mids = 0.5 * (cuts[1:] + cuts[:-1])
        return float(
            np.sum(np.abs(np.asarray(a(mids)) - np.asarray(b(mids))) * np.diff(cuts))
        )
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        width = hi - lo
        if width <= 0.0:
            continue
        prev = None
        pieces = 2
        for _ in range(max_refine):
            nodes = np.linspace(lo, hi, pieces + 1)
            fa = _cell_integral(a, lo, hi, nodes)
            fb = _cell_integral(b, lo, hi, nodes)
            est = float(np.trapezoid(np.abs(fa - fb), nodes))
            if prev is not None and abs(est - prev) <= rel_tol * max(1.0, abs(est)):
                break
            prev = est
            pieces *= 2
        total += est
    return total


def l1_density_error(state, reference: ClosedFormFamily, t: float) -> float:
    """Trapezoid integral of |u_grid - u_exact| over the union of supports.

    The exact density is treated as 0 outside its own support; its mass
    beyond the grid is added through the analytic CDF.
    """
    grid = state.grid
    values = state.values
    exact = np.asarray(reference.eval(t, grid), dtype=float)
    err = float(np.trapezoid(np.abs(values - exact), grid))
    mass = reference.mass(t)
    sup = reference.support(t)
    if sup.a < grid[0]:
        err += mass * float(reference.cdf(t, grid[0]))
    if sup.b > grid[-1]:
        err += mass * float(1.0 - reference.cdf(t, grid[-1]))
    return err


@dataclass(frozen=True)
class ComparisonReport:
    """Distances between two measures plus the normalization bookkeeping."""

    ks: float
    wasserstein1: float
    l1: float | None
    n_or_N: int
    normalization: tuple[float, float]

    def __post_init__(self):
        if not (0.0 <= self.ks <= 1.0):
            raise DomainError(f"KS distance {self.ks} outside [0, 1]")
        finite = [self.ks, self.wasserstein1, *self.normalization]
        if self.l1 is not None:
            finite.append(self.l1)
        if not all(np.isfinite(v) and v >= 0.0 for v in finite):
            raise DomainError("report fields must be finite and nonnegative")

    def to_json(self) -> str:
        payload = {
            "ks": self.ks,
            "wasserstein1": self.wasserstein1,
            "l1": self.l1,
            "n_or_N": self.n_or_N,
            "normalization": list(self.normalization),
        }
        return json.dumps(payload, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ComparisonReport":
        data = json.loads(text)
        return ComparisonReport(
            ks=data["ks"],
            wasserstein1=data["wasserstein1"],
            l1=data["l1"],
            n_or_N=data["n_or_N"],
            normalization=tuple(data["normalization"]),
        )
