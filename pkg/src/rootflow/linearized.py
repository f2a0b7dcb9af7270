"""Exact modal evolution of the perturbation equation around the arcsine
profile.

The weighted perturbation v = w * sqrt(1-x^2) diagonalizes in the
first-kind Chebyshev basis: mode k grows by the factor exp(k*t) while the
constant mode rides along unchanged.  Consequently the sup-norm growth
rate of v reads off the polynomial degree of the initial datum, which is
what :func:`growth_exponent` estimates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .chebyshev import ChebSeries, eval_series, project_weighted
from .errors import DomainError, GrowthOverflowError, RejectedInputError

logger = logging.getLogger(__name__)

_EXP_LIMIT = 700.0  # exp beyond this leaves double range
_MEAN_ZERO_WARN = 1e-10
_SUP_GRID_SIZE = 2048


@dataclass(frozen=True)
class LinearizedState:
    """Time plus first-kind modal coefficients of v(t, x)."""

    t: float
    modal: ChebSeries

    def __post_init__(self):
        if self.modal.kind != "T":
            raise DomainError("modal coefficients must be in the first-kind basis")

    @property
    def coeffs(self) -> np.ndarray:
        return self.modal.coeffs


def project_initial(w0, modes: int) -> LinearizedState:
    """Modal coefficients of v(0, x) = w0(x) * sqrt(1 - x^2).

    The constant mode measures the failure of the mean-zero condition
    (mean against the arcsine weight); it is reported, not enforced.
    """

    def weighted(x):
        return np.asarray(w0(x), dtype=float) * np.sqrt(1.0 - x * x)

    series = project_weighted(weighted, modes)
    if abs(series.coeffs[0]) > _MEAN_ZERO_WARN:
        logger.warning(
            "initial datum violates the mean-zero condition: constant mode %.3e",
            series.coeffs[0],
        )
    return LinearizedState(0.0, series)


def evolve(state: LinearizedState, duration: float) -> LinearizedState:
    """Advance by `duration`: mode k picks up the factor exp(k * duration).

    Negative durations are allowed and act as smoothing (all modes decay).
    """
    if not np.isfinite(duration):
        raise DomainError("duration must be finite")
    a = state.coeffs
    k = np.arange(a.size, dtype=float)
    exponent = k * duration
    hot = (exponent > _EXP_LIMIT) & (a != 0.0)
    if np.any(hot):
        mode = int(np.argmax(hot))
        raise GrowthOverflowError(mode, float(exponent[mode]))
    grown = a * np.exp(np.clip(exponent, -_EXP_LIMIT, _EXP_LIMIT))
    return LinearizedState(state.t + duration, ChebSeries("T", grown, state.modal.interval))


def eval_v(state: LinearizedState, x):
    """The weighted perturbation v(t, x) itself."""
    return eval_series(state.modal, x)


def eval_w(state: LinearizedState, x):
    """w(t, x) = v(t, x) / sqrt(1 - x^2); singular weight near the edges."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) >= 1.0 - 1e-9):
        raise DomainError("w is evaluated only for |x| < 1 - 1e-9")
    out = eval_series(state.modal, x_arr) / np.sqrt(1.0 - x_arr * x_arr)
    return float(out) if np.ndim(x) == 0 else out


def _sup_grid() -> np.ndarray:
    return np.cos(np.pi * np.arange(_SUP_GRID_SIZE) / (_SUP_GRID_SIZE - 1))


def sup_norm(state: LinearizedState) -> float:
    """Max |v| on a 2048-point extrema grid (where T-polynomials peak)."""
    return float(np.max(np.abs(eval_series(state.modal, _sup_grid()))))


def growth_exponent(
    state0: LinearizedState, horizon: float, num_times: int = 41
) -> float:
    """Least-squares slope of log sup-norm of v over [0, horizon].

    For an initial datum that is a degree-d polynomial in the first-kind
    basis the slope converges to d: the top mode's exp(d t) growth
    dominates the sup norm.
    """
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    if num_times < 2:
        raise DomainError("need at least two time samples")
    if not np.any(state0.coeffs != 0.0):
        raise DomainError("growth exponent undefined for the zero state")
    times = np.linspace(0.0, horizon, num_times)
    norms = np.empty(num_times)
    for i, t in enumerate(times):
        norms[i] = sup_norm(evolve(state0, float(t)))
    if np.any(norms <= 0.0):
        raise DomainError("sup norm vanished; cannot fit a growth rate")
    slope, _ = np.polyfit(times, np.log(norms), 1)
    return float(slope)


def direct_check(state0: LinearizedState, t: float, modes: int, dt: float = 1e-4) -> float:
    """Max relative gap between RK4 modal integration and the exact factors.

    Integrates da_k/dt = k a_k for the first `modes` coefficients with
    classical RK4 at the given step and compares against a_k exp(k t);
    validates the exponential solution independently of it.
    """
    if t < 0.0:
        raise DomainError("check runs forward in time")
    a = state0.coeffs[:modes].astype(float).copy()
    k = np.arange(a.size, dtype=float)
    steps = int(round(t / dt))
    h = t / steps if steps else 0.0
    for _ in range(steps):
        k1 = k * a
        k2 = k * (a + 0.5 * h * k1)
        k3 = k * (a + 0.5 * h * k2)
        k4 = k * (a + h * k3)
        a = a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    exact = state0.coeffs[:modes] * np.exp(k * t)
    return float(np.max(np.abs(a - exact) / np.maximum(1.0, np.abs(exact))))


# ---------------------------------------------------------------------------
# JSON interchange: a modal state is a plain array [a_0, a_1, ...]
# ---------------------------------------------------------------------------


def modal_to_json(state: LinearizedState) -> str:
    return json.dumps([float(c) for c in state.coeffs])


def modal_from_json(text: str, t: float = 0.0) -> LinearizedState:
    data = json.loads(text)
    if not isinstance(data, list) or not data:
        raise RejectedInputError("expected a non-empty JSON array of coefficients")
    return LinearizedState(t, ChebSeries("T", np.asarray(data, dtype=float)))
