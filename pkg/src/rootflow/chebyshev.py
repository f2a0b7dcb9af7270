"""Chebyshev machinery on a reference interval.

Series in the first-kind (T) and second-kind (U) bases, Gauss-Chebyshev
projection, and the finite Hilbert transform realized as a shift between
the two bases.  The Hilbert transform convention used throughout the
library is

    Hf(x) = (1/pi) p.v. integral f(y) / (x - y) dy,

under which the weighted first-kind basis maps to the second-kind basis
with a sign flip,

    H[ T_k(y) / sqrt(1-y^2) ](x) = -U_{k-1}(x),      k >= 1,

while the square-root-weighted second-kind basis maps without one,

    H[ sqrt(1-y^2) U_{n-1}(y) ](x) = T_n(x),         n >= 1.

Both identities follow from the Glauert integral
p.v. integral_0^pi cos(m t)/(cos t - cos s) dt = pi sin(m s)/sin(s), and the
relative sign is pinned down by the semicircle profile: the transform of
(2/pi) sqrt(1-x^2) must equal 2x/pi (its Stieltjes transform on the real
axis), which both identities above reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError, RejectedInputError

# Default mode cap for callers that do not pick their own resolution;
# the closed-form profiles used in this project are spectrally converged
# far below this.
DEFAULT_MODES = 256

# Above this degree the three-term recurrence is replaced by trigonometric
# evaluation (recurrence roundoff grows ~ k^2 eps).
_RECURRENCE_MAX_DEGREE = 64

_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class ChebSeries:
    """Coefficient vector in a Chebyshev basis on a reference interval.

    kind is "T" (first kind) or "U" (second kind); coeffs[k] multiplies
    the degree-k basis polynomial after the interval is mapped affinely
    onto [-1, 1].
    """

    kind: str
    coeffs: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("T", "U"):
            raise ConstructionError(f"unknown basis kind {self.kind!r}")
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise ConstructionError("coefficients must be a non-empty 1-d vector")
        if not np.all(np.isfinite(c)):
            raise ConstructionError("coefficients must be finite")
        a, b = float(self.interval[0]), float(self.interval[1])
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ConstructionError(f"invalid interval [{a}, {b}]")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "interval", (a, b))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def to_unit(self, x):
        """Map points of the interval onto the reference [-1, 1]."""
        a, b = self.interval
        return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)


def _clamp_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _CLAMP_TOL):
        raise DomainError("evaluation point outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def eval_t(k: int, x):
    """T_k(x) for x in [-1, 1] (inputs within 1e-12 are clamped)."""
    if k < 0 or k > 10**6:
        raise DomainError(f"degree {k} out of range")
    x = _clamp_unit(x)
    if k > _RECURRENCE_MAX_DEGREE:
        return np.cos(k * np.arccos(x))
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = x.copy()
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def eval_u(k: int, x):
    """U_k(x) for x in [-1, 1], same conventions as :func:`eval_t`."""
    if k < 0 or k > 10**6:
        raise DomainError(f"degree {k} out of range")
    x = _clamp_unit(x)
    if k > _RECURRENCE_MAX_DEGREE:
        theta = np.arccos(x)
        s = np.sin(theta)
        near_edge = s < 1e-9
        safe = np.where(near_edge, 1.0, s)
        vals = np.sin((k + 1) * theta) / safe
        # U_k(+-1) = (+-1)^k (k+1)
        limit = np.where(x > 0.0, float(k + 1), float((-1) ** k * (k + 1)))
        return np.where(near_edge, limit, vals)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 2.0 * x
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def gauss_chebyshev_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles and abscissas of the m-point Gauss-Chebyshev rule."""
    if m < 1:
        raise DomainError("need at least one quadrature node")
    theta = (2.0 * np.arange(m) + 1.0) * np.pi / (2.0 * m)
    return theta, np.cos(theta)


def project_weighted(g, modes: int = DEFAULT_MODES, interval=(-1.0, 1.0)) -> ChebSeries:
    """Expand g in the first-kind basis against the weight (1-x^2)^(-1/2).

    Coefficients a_k = (2/pi) int g(x) T_k(x) (1-x^2)^(-1/2) dx for k >= 1
    (half that for k = 0), computed with the (2*modes+1)-point
    Gauss-Chebyshev rule; exact for polynomial g of degree <= modes.
    g may be a callable on (-1, 1) or an array of samples at the standard
    nodes of that rule.
    """
    if modes < 0:
        raise DomainError("mode count must be nonnegative")
    m = 2 * modes + 1
    theta, nodes = gauss_chebyshev_nodes(m)
    if callable(g):
        samples = np.asarray(g(nodes), dtype=float)
    else:
        samples = np.asarray(g, dtype=float)
        if samples.shape != (m,):
            raise RejectedInputError(
                f"expected {m} samples at the Gauss-Chebyshev nodes, got {samples.shape}"
            )
    if not np.all(np.isfinite(samples)):
        raise RejectedInputError("non-finite sample value")
    # a_k = (2/m) sum_j g(x_j) cos(k theta_j), halved for k = 0
    k = np.arange(modes + 1)
    coeffs = (2.0 / m) * (np.cos(np.outer(k, theta)) @ samples)
    coeffs[0] *= 0.5
    return ChebSeries("T", coeffs, interval)


def finite_hilbert_weighted(series: ChebSeries) -> ChebSeries:
    """Transform of f = g / sqrt(1-x^2) given the first-kind series of g.

    With g = sum a_k T_k, returns Hf = -sum_{k>=1} a_k U_{k-1} as a
    second-kind series; the constant mode is annihilated.  See the module
    docstring for why the shift carries a minus sign under this
    transform convention.
    """
    if series.kind != "T":
        raise DomainError("expected a first-kind series")
    if series.coeffs.size <= 1:
        shifted = np.zeros(1)
    else:
        shifted = -series.coeffs[1:]
    return ChebSeries("U", shifted, series.interval)


def finite_hilbert_sqrtweight(series: ChebSeries) -> ChebSeries:
    """Transform of f = g * sqrt(1-x^2) given the second-kind series of g.

    With g = sum b_j U_j, returns Hf = sum b_j T_{j+1} as a first-kind
    series (so H[sqrt(1-x^2)](x) = x on the open interval).
    """
    if series.kind != "U":
        raise DomainError("expected a second-kind series")
    shifted = np.concatenate(([0.0], series.coeffs))
    return ChebSeries("T", shifted, series.interval)


def eval_series(series: ChebSeries, x):
    """Clenshaw evaluation of a series at points of its interval."""
    xi = series.to_unit(x)
    scalar = np.ndim(xi) == 0
    xi = _clamp_unit(xi)
    a = series.coeffs
    two_x = 2.0 * xi
    b1 = np.zeros_like(xi)
    b2 = np.zeros_like(xi)
    if series.kind == "T":
        for k in range(a.size - 1, 0, -1):
            b1, b2 = a[k] + two_x * b1 - b2, b1
        out = a[0] + xi * b1 - b2
    else:
        for k in range(a.size - 1, -1, -1):
            b1, b2 = a[k] + two_x * b1 - b2, b1
        out = b1
    return float(out) if scalar else out
