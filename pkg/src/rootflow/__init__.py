"""Root densities of real-rooted polynomials under iterated differentiation.

Four descriptions of one flow, each checkable against the others: exact
root dynamics of polynomials (poly_dynamics), a nonlocal transport solver
for the continuum density (pde_solver), the closed-form solution families
(densities), and the exact spectral evolution of the perturbation around
the stationary arcsine profile (linearized).  chebyshev supplies the
finite Hilbert transform; metrics the distances used for cross-checks.
"""

from .chebyshev import (
    ChebSeries,
    eval_series,
    eval_t,
    eval_u,
    finite_hilbert_sqrtweight,
    finite_hilbert_weighted,
    project_weighted,
)
from .densities import (
    Arcsine,
    ClosedFormFamily,
    MarchenkoPastur,
    Semicircle,
    SupportInterval,
)
from .linearized import LinearizedState, direct_check, evolve, growth_exponent
from .metrics import ComparisonReport, ks_distance, l1_density_error, wasserstein1
from .pde_solver import PdeState, SolverParams, run, state_from_family, total_mass
from .poly_dynamics import (
    DifferentiationSchedule,
    RootConfiguration,
    differentiate_k,
    differentiate_once,
    empirical_cdf,
    log_derivative,
    min_gap,
)

__version__ = "0.1.0"

__all__ = [
    "Arcsine",
    "ChebSeries",
    "ClosedFormFamily",
    "ComparisonReport",
    "DifferentiationSchedule",
    "LinearizedState",
    "MarchenkoPastur",
    "PdeState",
    "RootConfiguration",
    "Semicircle",
    "SolverParams",
    "SupportInterval",
    "differentiate_k",
    "differentiate_once",
    "direct_check",
    "empirical_cdf",
    "eval_series",
    "eval_t",
    "eval_u",
    "evolve",
    "finite_hilbert_sqrtweight",
    "finite_hilbert_weighted",
    "growth_exponent",
    "ks_distance",
    "l1_density_error",
    "log_derivative",
    "min_gap",
    "project_weighted",
    "run",
    "state_from_family",
    "total_mass",
    "wasserstein1",
]
