"""Exact excess-over-threshold laws and their distance to the GP limit.

The package evaluates, for families with a known second-order tail
structure, the exact density of rescaled (optionally recentered)
threshold exceedances, computes Hellinger / total-variation /
Kullback-Leibler / higher-order divergences from the generalised Pareto
limit by singularity-aware quadrature, fits the empirical decay rate
against the second-order rate function |A(v)|, and cross-checks every
quadrature with a seeded Monte Carlo oracle.
"""

from .distances import (DistanceReport, compute_report, dp_div, hellinger_sq,
                        kl_div, total_variation)
from .errors import (DegenerateRateError, DomainError, GpratesError,
                     QuadratureError, SweepError, UsageError, ZeroDensityError)
from .excess import (ExcessModel, density_ratio_sup, eta_diag,
                     excess_at_threshold, make_excess)
from .families import (Burr, ExactGP, Family, Gumbel, ReversedBurr,
                       parse_family_spec, von_mises_ratio)
from .limit_models import GevModel, GpModel
from .montecarlo import McEstimate, mc_hellinger_sq, mc_tv, sample_excesses
from .quadrature import quad
from .rates import (FitResult, GridPoint, SweepResult, Verdict,
                    check_kl_corollary, check_prop1, check_sandwich,
                    check_theorem1, fit_loglog, shift_hellinger_sq, sweep,
                    sweep_to_csv, sweep_to_jsonable)

__version__ = "0.1.0"

__all__ = [
    "Burr", "DegenerateRateError", "DistanceReport", "DomainError",
    "ExactGP", "ExcessModel", "Family", "FitResult", "GevModel", "GpModel",
    "GpratesError", "GridPoint", "Gumbel", "McEstimate", "QuadratureError",
    "ReversedBurr", "SweepError", "SweepResult", "UsageError", "Verdict",
    "ZeroDensityError", "check_kl_corollary", "check_prop1", "check_sandwich",
    "check_theorem1", "compute_report", "density_ratio_sup", "dp_div",
    "eta_diag", "excess_at_threshold", "fit_loglog", "hellinger_sq", "kl_div",
    "make_excess", "mc_hellinger_sq", "mc_tv", "parse_family_spec", "quad",
    "sample_excesses", "shift_hellinger_sq", "sweep", "sweep_to_csv",
    "sweep_to_jsonable", "total_variation", "von_mises_ratio",
]
