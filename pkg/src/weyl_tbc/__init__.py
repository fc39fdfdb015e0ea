"""Weyl-Titchmarsh coefficients and transparent boundary conditions for
one-dimensional Schrodinger operators ``-phi'' + V phi = lam phi``."""

from .errors import (
    ConfigError,
    EvaluatorFailure,
    NotRegularPoint,
    NumericalError,
    PoleDetected,
    WeylTBCError,
)
from .numerics import DEFAULT_TOL, SolutionPath, Tolerances, integrate_schrodinger, sqrt_branch
from .potentials import Free, Harmonic, PoschlTeller, Shifted, Side, Tabulated, parse_potential
from .resolvent import SourceTerm, solve_tbc_bvp, truncated_domain_oracle, regular_point_scan
from .spectrum import (
    Absorbing,
    Dirichlet,
    Robin,
    SpectralProblem,
    Transparent,
    absorbing_spectrum,
    find_spectrum,
    tbc_residual,
)
from .weyl import WeylEvaluation, herglotz_sample_check, weyl_m, weyl_solution

__version__ = "0.1.0"
