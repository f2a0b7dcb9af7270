"""Closed-form density families: arcsine, semicircle, Marchenko-Pastur.

Each family knows its density, support, analytic Hilbert transform, total
mass, normalized CDF, quantiles, and deterministic quantile sampling of
root configurations.  The semicircle and Marchenko-Pastur members form
shrinking one-parameter families that lose mass at unit rate; the arcsine
member is stationary with vanishing Hilbert transform on its support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError

_QUANTILE_TOL = 1e-12


@dataclass(frozen=True)
class SupportInterval:
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ConstructionError(f"invalid support [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, x, strict: bool = False):
        x = np.asarray(x, dtype=float)
        if strict:
            return (x > self.a) & (x < self.b)
        return (x >= self.a) & (x <= self.b)


def _match_ndim(value, x):
    return float(value) if np.ndim(x) == 0 else value


class ClosedFormFamily:
    """Shared quantile/sampling machinery; subclasses provide the formulas."""

    def require_valid_time(self, t: float) -> None:
        raise NotImplementedError

    def support(self, t: float) -> SupportInterval:
        raise NotImplementedError

    def eval(self, t: float, x):
        """Density value; zero outside the support."""
        self.require_valid_time(t)
        return _match_ndim(self._density(t, x), x)

    def hilbert(self, t: float, x):
        """Analytic Hilbert transform, defined strictly inside the support."""
        self.require_valid_time(t)
        sup = self.support(t)
        x_arr = np.asarray(x, dtype=float)
        if not np.all(sup.contains(x_arr, strict=True)):
            raise DomainError("Hilbert transform requested outside the open support")
        return _match_ndim(self._hilbert(t, x), x)

    def mass(self, t: float) -> float:
        raise NotImplementedError

    def cdf(self, t: float, x):
        """Normalized CDF in [0, 1] (mass factored out)."""
        self.require_valid_time(t)
        return _match_ndim(self._cdf(t, x), x)

    def quantile(self, t: float, q):
        """x with CDF(x) = q, by bisection on the analytic CDF."""
        self.require_valid_time(t)
        q_arr = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((q_arr < 0.0) | (q_arr > 1.0)):
            raise DomainError("quantile level outside [0, 1]")
        out = self._quantile(t, q_arr)
        return float(out[0]) if np.ndim(q) == 0 else out

    def sample_roots(self, t: float, n: int):
        """Deterministic quantile sampling: x_i at levels (i - 1/2)/n."""
        from .poly_dynamics import RootConfiguration

        if n < 2:
            raise DomainError("need at least two roots")
        levels = (np.arange(n) + 0.5) / n
        roots = self.quantile(t, levels)
        return RootConfiguration(roots)

    # -- default bisection quantile against the subclass CDF ---------------
    def _quantile(self, t: float, q: np.ndarray) -> np.ndarray:
        sup = self.support(t)
        lo = np.full_like(q, sup.a)
        hi = np.full_like(q, sup.b)
        # 0.5 * width / 2^iters <= tol
        iters = max(1, int(math.ceil(math.log2(max(sup.width / _QUANTILE_TOL, 2.0)))))
        for _ in range(iters + 1):
            mid = 0.5 * (lo + hi)
            below = self._cdf(t, mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        out[q == 0.0] = sup.a
        out[q == 1.0] = sup.b
        return out

    def _density(self, t: float, x):
        raise NotImplementedError

    def _hilbert(self, t: float, x):
        raise NotImplementedError

    def _cdf(self, t: float, x):
        raise NotImplementedError


@dataclass(frozen=True)
class Arcsine(ClosedFormFamily):
    """Stationary profile amplitude / sqrt(1 - x^2) on (-1, 1).

    The default amplitude 1/pi makes it a probability density.
    """

    amplitude: float = 1.0 / math.pi

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ConstructionError("amplitude must be positive")

    def require_valid_time(self, t: float) -> None:
        if not np.isfinite(t):
            raise DomainError("time must be finite")

    def support(self, t: float) -> SupportInterval:
        return SupportInterval(-1.0, 1.0)

    def mass(self, t: float) -> float:
        self.require_valid_time(t)
        return self.amplitude * math.pi

    def _density(self, t: float, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.amplitude / np.sqrt(np.maximum(1.0 - x * x, 0.0))
        return np.where(inside, val, 0.0)

    def _hilbert(self, t: float, x):
        return np.zeros_like(np.asarray(x, dtype=float)) + 0.0

    def _cdf(self, t: float, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        return (np.arcsin(x) + 0.5 * np.pi) / np.pi

    def _quantile(self, t: float, q: np.ndarray) -> np.ndarray:
        return -np.cos(np.pi * q)


@dataclass(frozen=True)
class Semicircle(ClosedFormFamily):
    """(2/pi) sqrt((T - t) - x^2) for 0 <= t < T; vanishes at t = T."""

    vanish_time: float

    def __post_init__(self):
        if not (np.isfinite(self.vanish_time) and self.vanish_time > 0):
            raise ConstructionError("vanish time must be positive")

    def require_valid_time(self, t: float) -> None:
        if not (0.0 <= t < self.vanish_time):
            raise DomainError(
                f"time {t} outside validity window [0, {self.vanish_time})"
            )

    def _radius_sq(self, t: float) -> float:
        return self.vanish_time - t

    def support(self, t: float) -> SupportInterval:
        self.require_valid_time(t)
        r = math.sqrt(self._radius_sq(t))
        return SupportInterval(-r, r)

    def mass(self, t: float) -> float:
        self.require_valid_time(t)
        return self._radius_sq(t)

    def _density(self, t: float, x):
        s = self._radius_sq(t)
        x = np.asarray(x, dtype=float)
        return (2.0 / np.pi) * np.sqrt(np.maximum(s - x * x, 0.0))

    def _hilbert(self, t: float, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * x / np.pi

    def _cdf(self, t: float, x):
        s = self._radius_sq(t)
        r = math.sqrt(s)
        x = np.clip(np.asarray(x, dtype=float), -r, r)
        rad = np.sqrt(np.maximum(s - x * x, 0.0))
        return 0.5 + (x * rad + s * np.arcsin(np.clip(x / r, -1.0, 1.0))) / (np.pi * s)


@dataclass(frozen=True)
class MarchenkoPastur(ClosedFormFamily):
    """Dilated Marchenko-Pastur profile, valid for 0 <= t < 1.

    The static profile with shape parameter c lives on
    (x_-, x_+) = ((sqrt(c+1) -+ 1)^2,) with density
    sqrt((x_+ - x)(x - x_-)) / (2 pi x); at time t the solution is that
    profile with parameter (c + t)/(1 - t), dilated by (1 - t).  Total
    mass is 1 - t.
    """

    ratio: float

    def __post_init__(self):
        if not (np.isfinite(self.ratio) and self.ratio >= 0):
            raise ConstructionError("shape ratio must be nonnegative")

    def require_valid_time(self, t: float) -> None:
        if not (0.0 <= t < 1.0):
            raise DomainError(f"time {t} outside validity window [0, 1)")

    def _scaled_ratio(self, t: float) -> float:
        return (self.ratio + t) / (1.0 - t)

    @staticmethod
    def static_edges(c: float) -> tuple[float, float]:
        root = math.sqrt(c + 1.0)
        return (root - 1.0) ** 2, (root + 1.0) ** 2

    @staticmethod
    def static_density(c: float, x):
        lo, hi = MarchenkoPastur.static_edges(c)
        x = np.asarray(x, dtype=float)
        rad = np.maximum((hi - x) * (x - lo), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(rad) / (2.0 * np.pi * x)
        return np.where(rad > 0.0, val, 0.0)

    @staticmethod
    def static_cdf(c: float, x):
        """Closed-form CDF of the static profile (unit mass)."""
        lo, hi = MarchenkoPastur.static_edges(c)
        half_sum = 0.5 * (hi + lo)
        half_diff = 0.5 * (hi - lo)
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        rad = np.sqrt(np.maximum((hi - x) * (x - lo), 0.0))
        asym = np.arcsin(np.clip((x - half_sum) / half_diff, -1.0, 1.0))
        out = rad + half_sum * (asym + 0.5 * np.pi)
        if c > 0.0:
            sq = math.sqrt(lo * hi)  # equals c
            arg = (half_sum * x - lo * hi) / (half_diff * x)
            out = out - sq * (np.arcsin(np.clip(arg, -1.0, 1.0)) + 0.5 * np.pi)
        return out / (2.0 * np.pi)

    def support(self, t: float) -> SupportInterval:
        self.require_valid_time(t)
        lo, hi = self.static_edges(self._scaled_ratio(t))
        scale = 1.0 - t
        return SupportInterval(scale * lo, scale * hi)

    def mass(self, t: float) -> float:
        self.require_valid_time(t)
        return 1.0 - t

    def _density(self, t: float, x):
        scale = 1.0 - t
        return self.static_density(self._scaled_ratio(t), np.asarray(x, float) / scale)

    def _hilbert(self, t: float, x):
        x = np.asarray(x, dtype=float)
        return (x - (self.ratio + t)) / (2.0 * np.pi * x)

    def _cdf(self, t: float, x):
        scale = 1.0 - t
        return self.static_cdf(self._scaled_ratio(t), np.asarray(x, float) / scale)


# ---------------------------------------------------------------------------
# Transport-equation diagnostics for the shrinking families
# ---------------------------------------------------------------------------


def flux(family: ClosedFormFamily, t: float, x):
    """Analytic flux (1/pi) arctan(Hu/u), extended by its +-1/2 limits.

    Accepts any time at which the family's formulas make sense (a touch
    wider than the public validity window, so centered time stencils can
    straddle t = 0).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(family, Arcsine):
        return np.zeros_like(x)
    if isinstance(family, Semicircle):
        s = family.vanish_time - t
        if s <= 0:
            raise DomainError("semicircle formulas need t < vanish time")
        rad = s - x * x
        inside = rad > 0.0
        out = np.where(x >= 0.0, 0.5, -0.5)
        ratio = np.where(inside, x / np.sqrt(np.where(inside, rad, 1.0)), 0.0)
        return np.where(inside, np.arctan(ratio) / np.pi, out)
    if isinstance(family, MarchenkoPastur):
        c = family.ratio
        if not (-c <= t < 1.0):
            raise DomainError("Marchenko-Pastur formulas need -c <= t < 1")
        rad = 2.0 * (2.0 + c - t) * x - (c + t) ** 2 - x * x
        inside = rad > 0.0
        out = np.where(x >= c + t, 0.5, -0.5)
        ratio = np.where(inside, (x - (c + t)) / np.sqrt(np.where(inside, rad, 1.0)), 0.0)
        return np.where(inside, np.arctan(ratio) / np.pi, out)
    raise DomainError(f"no analytic flux for {type(family).__name__}")


def flux_derivative(family: ClosedFormFamily, t: float, x):
    """Closed-form spatial derivative of :func:`flux` inside the support."""
    x = np.asarray(x, dtype=float)
    if isinstance(family, Semicircle):
        s = family.vanish_time - t
        return 1.0 / (np.pi * np.sqrt(s - x * x))
    if isinstance(family, MarchenkoPastur):
        c = family.ratio
        rad = 2.0 * (2.0 + c - t) * x - (c + t) ** 2 - x * x
        return (c + t + x) / (2.0 * np.pi * x * np.sqrt(rad))
    raise DomainError(f"no closed-form flux derivative for {type(family).__name__}")


def _density_any_time(family: ClosedFormFamily, t: float, x):
    """Density by formula, without the public validity-window guard."""
    if isinstance(family, Semicircle) and not t < family.vanish_time:
        raise DomainError("semicircle formulas need t < vanish time")
    if isinstance(family, MarchenkoPastur) and not (-family.ratio <= t < 1.0):
        raise DomainError("Marchenko-Pastur formulas need -c <= t < 1")
    return family._density(t, x)


def transport_residual(
    family: ClosedFormFamily,
    t: float,
    x,
    dt: float = 7e-4,
    dx_rel: float = 7e-4,
):
    """|d/dt u + d/dx flux| by 4th-order central differences of the formulas.

    dx_rel scales with the support half-width so the stencil resolution is
    uniform across families.
    """
    x = np.asarray(x, dtype=float)
    sup = family.support(t)
    hx = dx_rel * 0.5 * sup.width

    def d4(values):
        fm2, fm1, fp1, fp2 = values
        return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / 12.0

    u_t = d4([_density_any_time(family, t + k * dt, x) for k in (-2, -1, 1, 2)]) / dt
    f_x = d4([flux(family, t, x + k * hx) for k in (-2, -1, 1, 2)]) / hx
    return np.abs(u_t + f_x)
