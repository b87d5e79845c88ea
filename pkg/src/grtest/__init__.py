"""Group-randomization hypothesis tests with studentized statistics.

Ships a generic randomization-test engine (Monte-Carlo and exact
enumeration, with the randomized tie weight that makes tests finitely exact
under group invariance) together with two complete applications: Pearson
correlation via rotation or coordinate-mirror randomization, and the
Mann-Whitney effect for right-censored paired data via within-pair exchange
randomization. A simulation harness reproduces the type-I-error and power
experiments at desk scale, and a CLI covers single-dataset analysis.
"""

from .core import DomainError, RandomSource, StepFunction, normalized, stieltjes_integral
from .engine import (
    TestResult,
    bootstrap_test,
    critical_value,
    enumerate_orbit_statistics,
    exact_enumeration_test,
    invert_ci,
    normal_test,
    pairing_permutation_test,
    randomization_test,
    randomized_covariance,
    reject_probability,
)
from .errors import BudgetExceededError, ConfigError, DegenerateDataError
from .groups import (
    CensoredPairedObservation,
    GroupKind,
    NotFiniteGroupError,
    PairedObservation,
    apply,
    enumerate_elements,
    sample_element,
)
from .pearson import (
    CorrelationStatistic,
    correlation_statistic,
    fisher_ci,
    pearson_rho,
    rho_variance,
)
from .statistic import TestStatistic
from .survival import (
    MannWhitneyStatistic,
    censoring_km,
    kaplan_meier,
    mw_effect,
    mw_influence,
    mw_statistic,
    mw_variance,
    nelson_aalen,
    truncate,
    truncate_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "CensoredPairedObservation",
    "ConfigError",
    "CorrelationStatistic",
    "DegenerateDataError",
    "DomainError",
    "GroupKind",
    "MannWhitneyStatistic",
    "NotFiniteGroupError",
    "PairedObservation",
    "RandomSource",
    "StepFunction",
    "TestResult",
    "TestStatistic",
    "apply",
    "bootstrap_test",
    "censoring_km",
    "correlation_statistic",
    "critical_value",
    "enumerate_elements",
    "enumerate_orbit_statistics",
    "exact_enumeration_test",
    "fisher_ci",
    "invert_ci",
    "kaplan_meier",
    "mw_effect",
    "mw_influence",
    "mw_statistic",
    "mw_variance",
    "nelson_aalen",
    "normal_test",
    "normalized",
    "pairing_permutation_test",
    "pearson_rho",
    "randomization_test",
    "randomized_covariance",
    "reject_probability",
    "rho_variance",
    "sample_element",
    "stieltjes_integral",
    "truncate",
    "truncate_sample",
]
