"""
Statistics of the difference of two Poisson counting processes.
"""
from .distribution import (
    SkellamParams,
    skellam_pmf_exact,
    skellam_pmf_grid,
    skellam_pmf_gaussian,
    skellam_pmf_bruteforce,
    skellam_moments,
    theta3_diagnostic,
    GAUSSIAN_VALIDITY_FLOOR,
)

__all__ = [
    "SkellamParams",
    "skellam_pmf_exact",
    "skellam_pmf_grid",
    "skellam_pmf_gaussian",
    "skellam_pmf_bruteforce",
    "skellam_moments",
    "theta3_diagnostic",
    "GAUSSIAN_VALIDITY_FLOOR",
]
