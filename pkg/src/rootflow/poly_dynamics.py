"""Exact root flow of real-rooted polynomials under differentiation.

The logarithmic derivative of a polynomial with roots x_1 < ... < x_n is
S(x) = sum_i 1/(x - x_i); between consecutive roots S decreases from +inf
to -inf, so the derivative has exactly one root per gap.  Each gap root is
bracketed by bisection and polished by safeguarded Newton iterations on S.
Gap solves are independent, so a step can fan out across threads without
changing the result.

Cost is O(n) per gap and O(n^2) per differentiation step; no fast
summation is attempted.  That bounds practical use to n of a few thousand
with many steps, which is the intended scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError, PoleError

try:  # pragma: no cover - exercised implicitly by backend dispatch
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

_BISECT_ITERS = 10  # halves the gap to below 1e-3 of its width
_NEWTON_MAX_ITERS = 60
_NEWTON_REL_TOL = 1e-13
_PINCHED_GAP_REL = 1e-14


@dataclass(frozen=True)
class RootConfiguration:
    """Strictly increasing real roots of a polynomial of degree n."""

    roots: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.roots, dtype=float))
        if r.ndim != 1 or r.size < 1:
            raise ConstructionError("roots must form a non-empty 1-d vector")
        if not np.all(np.isfinite(r)):
            raise ConstructionError("roots must be finite")
        if r.size > 1 and not np.all(np.diff(r) > 0.0):
            raise ConstructionError("roots must be strictly increasing")
        object.__setattr__(self, "roots", r)

    @property
    def n(self) -> int:
        return self.roots.size

    def mean(self) -> float:
        return float(np.mean(self.roots))


@dataclass(frozen=True)
class DifferentiationSchedule:
    """How many derivatives to take and how often to record a snapshot."""

    k: int
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.k < 0:
            raise ConstructionError("derivative count must be nonnegative")
        if self.snapshot_stride < 1:
            raise ConstructionError("snapshot stride must be positive")


def log_derivative(config: RootConfiguration, x: float) -> float:
    """S(x) = sum_i 1/(x - x_i), accumulated small-distance first.

    Exact compensated summation (math.fsum) over terms ordered by
    ascending |x - x_i|, so the dominant near-field terms cancel first.
    """
    d = float(x) - config.roots
    if np.any(d == 0.0):
        raise PoleError(f"x = {x} coincides with a root")
    order = np.argsort(np.abs(d), kind="stable")
    return math.fsum(1.0 / d[order])


# ---------------------------------------------------------------------------
# Gap solvers
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @numba.njit(parallel=True, fastmath=True, cache=True)
    def _solve_gaps_kernel(roots):  # pragma: no cover - compiled
        n = roots.size
        m = n - 1
        out = np.empty(m)
        for g in numba.prange(m):
            lo = roots[g]
            hi = roots[g + 1]
            scale = max(1.0, abs(lo), abs(hi))
            if hi - lo <= _PINCHED_GAP_REL * scale:
                out[g] = 0.5 * (lo + hi)
                continue
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                s = 0.0
                for i in range(n):
                    s += 1.0 / (mid - roots[i])
                if s > 0.0:
                    lo = mid
                else:
                    hi = mid
            x = 0.5 * (lo + hi)
            for _ in range(_NEWTON_MAX_ITERS):
                s = 0.0
                sp = 0.0
                for i in range(n):
                    inv = 1.0 / (x - roots[i])
                    s += inv
                    sp += inv * inv
                if s > 0.0:
                    lo = x
                elif s < 0.0:
                    hi = x
                else:
                    break
                x_new = x + s / sp
                if not (lo < x_new < hi):
                    x_new = 0.5 * (lo + hi)
                done = abs(x_new - x) <= _NEWTON_REL_TOL * max(1.0, abs(x_new))
                x = x_new
                if done:
                    break
            out[g] = x
        return out


def _solve_gaps_numpy(roots: np.ndarray) -> np.ndarray:
    """Vectorized fallback mirroring the compiled kernel."""
    n = roots.size
    lo = roots[:-1].copy()
    hi = roots[1:].copy()
    scale = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    pinched = (hi - lo) <= _PINCHED_GAP_REL * scale
    out = 0.5 * (lo + hi)
    active = ~pinched
    if not np.any(active):
        return out
    lo_a = lo[active]
    hi_a = hi[active]

    def s_only(x):
        return (1.0 / (x[:, None] - roots[None, :])).sum(axis=1)

    def s_and_sp(x):
        inv = 1.0 / (x[:, None] - roots[None, :])
        return inv.sum(axis=1), (inv * inv).sum(axis=1)

    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo_a + hi_a)
        pos = s_only(mid) > 0.0
        lo_a = np.where(pos, mid, lo_a)
        hi_a = np.where(pos, hi_a, mid)
    x = 0.5 * (lo_a + hi_a)
    live = np.ones(x.size, dtype=bool)
    for _ in range(_NEWTON_MAX_ITERS):
        if not np.any(live):
            break
        s, sp = s_and_sp(x[live])
        lo_l = lo_a[live]
        hi_l = hi_a[live]
        lo_a[live] = np.where(s > 0.0, x[live], lo_l)
        hi_a[live] = np.where(s < 0.0, x[live], hi_l)
        x_new = x[live] + s / sp
        mid = 0.5 * (lo_a[live] + hi_a[live])
        inside = (x_new > lo_a[live]) & (x_new < hi_a[live])
        x_new = np.where(inside, x_new, mid)
        converged = (
            np.abs(x_new - x[live]) <= _NEWTON_REL_TOL * np.maximum(1.0, np.abs(x_new))
        ) | (s == 0.0)
        x[live] = x_new
        keep = live.copy()
        keep[live] = ~converged
        live = keep
    out[active] = x
    return out


def _solve_gaps(roots: np.ndarray, backend: str = "auto") -> np.ndarray:
    if backend == "auto":
        backend = "numba" if _HAVE_NUMBA else "numpy"
    if backend == "numba":
        if not _HAVE_NUMBA:
            raise DomainError("numba backend requested but numba is unavailable")
        return _solve_gaps_kernel(roots)
    if backend == "numpy":
        return _solve_gaps_numpy(roots)
    raise DomainError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# Public flow operations
# ---------------------------------------------------------------------------


def differentiate_once(
    config: RootConfiguration, backend: str = "auto"
) -> RootConfiguration:
    """Roots of the derivative: one root per gap of the input."""
    if config.n < 2:
        raise DomainError(
            "degree-1 input: the derivative is a nonzero constant with no roots"
        )
    return RootConfiguration(_solve_gaps(config.roots, backend))


def differentiate_k(
    config: RootConfiguration,
    schedule: DifferentiationSchedule,
    backend: str = "auto",
    threads: int | None = None,
) -> list[tuple[int, RootConfiguration]]:
    """Iterate differentiate_once, recording snapshots every stride steps.

    The step-0 snapshot (the input) is always included, as is the final
    configuration.  threads, when given with the numba backend, bounds the
    worker pool for the per-gap solves; results do not depend on it.
    """
    if schedule.k >= config.n:
        raise DomainError(f"cannot take {schedule.k} derivatives of degree {config.n}")
    old_threads = None
    if threads is not None and _HAVE_NUMBA:
        old_threads = numba.get_num_threads()
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        snapshots = [(0, config)]
        current = config
        for step in range(1, schedule.k + 1):
            current = differentiate_once(current, backend)
            if step % schedule.snapshot_stride == 0 or step == schedule.k:
                snapshots.append((step, current))
        return snapshots
    finally:
        if old_threads is not None:
            numba.set_num_threads(old_threads)


def min_gap(config: RootConfiguration) -> float:
    if config.n < 2:
        raise DomainError("minimum gap needs at least two roots")
    return float(np.min(np.diff(config.roots)))


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous step CDF of a root configuration."""

    xs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        object.__setattr__(self, "xs", xs)

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def jumps(self) -> np.ndarray:
        return self.xs

    @property
    def support(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, x):
        pos = np.searchsorted(self.xs, np.asarray(x, dtype=float), side="right")
        out = pos / self.n
        return float(out) if np.ndim(x) == 0 else out


def empirical_cdf(config: RootConfiguration) -> EmpiricalCDF:
    return EmpiricalCDF(config.roots)


def microscopic_shift_diagnostic(config, family, t: float) -> np.ndarray:
    """Predicted vs realized per-root displacement after one derivative.

    Around a bulk root y of a configuration drawn from a smooth density u,
    the derivative root nearest to y sits where the local root lattice
    (spacing h = 1/(n u)) balances the mean field of the far roots:

        cot(pi (x - y) / h) = -Hu(y) / u(y),

    whose first branch gives x - y = h (1/2 + arctan(Hu/u)/pi), folded to
    the nearest lattice period.  Note the half-spacing registration: even
    for the stationary arcsine profile the new roots sit half a gap away
    from the old ones; the transport of the density is carried by the
    arctan term.  Returns an (m, 2) array of (predicted, actual) offsets
    for the inner 80% of roots by index (edge roots obey different
    asymptotics and are excluded).
    """
    n = config.n
    if n < 100:
        raise DomainError("diagnostic needs at least 100 roots")
    lo = int(math.ceil(0.1 * n))
    hi = int(math.floor(0.9 * n))
    ys = config.roots[lo:hi]
    u = np.asarray(family.eval(t, ys), dtype=float)
    hu = np.asarray(family.hilbert(t, ys), dtype=float)
    spacing = 1.0 / (n * u)
    predicted = spacing * (0.5 + np.arctan2(hu, u) / np.pi)
    predicted = np.where(predicted > 0.5 * spacing, predicted - spacing, predicted)
    derived = differentiate_once(config).roots
    pos = np.clip(np.searchsorted(derived, ys), 1, derived.size - 1)
    left = derived[pos - 1]
    right = derived[pos]
    nearest = np.where(np.abs(left - ys) <= np.abs(right - ys), left, right)
    return np.column_stack([predicted, nearest - ys])


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def save_roots(config: RootConfiguration, path) -> None:
    """One-column CSV, header 'x', roots ascending, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"])
        for value in config.roots:
            writer.writerow([f"{value:.17g}"])


def load_roots(path) -> RootConfiguration:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:1] != ["x"]:
            raise ConstructionError(f"{path}: expected a one-column CSV with header x")
        values = [float(row[0]) for row in reader if row]
    return RootConfiguration(np.asarray(values))
