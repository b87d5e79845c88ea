"""Studentized randomization tests with exact tie handling, plus comparators.

The core construction: randomize the data through per-observation group
elements, compute the studentized statistic on every randomized replicate,
and reject when the observed statistic exceeds the conditional
(1 - alpha)-quantile c of the reference distribution. A randomized tie
weight gamma = (alpha - P(score > c)) / P(score = c) makes the rejection
probability exactly alpha under group invariance: the test function is

    phi = 1{score > c} + gamma * 1{score = c}.

Monte-Carlo mode draws B element vectors and appends the observed statistic
to the reference set (the identity element keeps the p-value valid under the
invariance hypothesis); exact mode enumerates all |G|^n element vectors of a
finite group. Bootstrap, pairing-permutation, and normal-quantile tests are
provided as comparators with the conventions used in the simulation study.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as spstats

from . import groups
from .core import RandomSource
from .errors import BudgetExceededError, DegenerateDataError
from .groups import GroupKind
from .statistic import TestStatistic

__all__ = [
    "TestResult",
    "critical_value",
    "reject_probability",
    "randomization_reference",
    "randomization_test",
    "enumerate_orbit_statistics",
    "exact_enumeration_test",
    "bootstrap_test",
    "pairing_permutation_test",
    "normal_test",
    "invert_ci",
    "randomized_covariance",
]

_SIDES = ("two-sided", "one-sided-upper", "one-sided-lower")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test.

    ``reject_prob`` is the randomized test function phi in [0, 1];
    ``replicates`` counts the reference replicates actually used (orbit size
    in exact mode, surviving resamples for the bootstrap); ``dropped`` counts
    degenerate bootstrap resamples that were discarded.
    """

    statistic: float
    critical_value: float
    gamma: float
    reject_prob: float
    p_value: float
    estimate: float
    std_err: float
    replicates: int
    mode: str
    alpha: float
    sided: str = "two-sided"
    dropped: int = 0


def _score(values, sided: str):
    if sided == "two-sided":
        return np.abs(values)
    if sided == "one-sided-upper":
        return np.asarray(values, dtype=float)
    if sided == "one-sided-lower":
        return -np.asarray(values, dtype=float)
    raise ValueError(f"sided must be one of {_SIDES}")


def critical_value(scores: np.ndarray, alpha: float) -> tuple[float, float]:
    """Conditional (1 - alpha)-quantile and tie weight of a reference set.

    ``scores`` carries equal probability 1/m per entry; the quantile is the
    ceil((1 - alpha) * m)-th order statistic and gamma is chosen so that
    P(score > c) + gamma * P(score = c) = alpha exactly.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    m = scores.size
    ordered = np.sort(scores)
    k = min(max(int(np.ceil((1.0 - alpha) * m)), 1), m)
    c = ordered[k - 1]
    p_gt = np.count_nonzero(scores > c) / m
    p_eq = np.count_nonzero(scores == c) / m
    gamma = (alpha - p_gt) / p_eq if p_eq > 0 else 0.0
    return float(c), float(min(max(gamma, 0.0), 1.0))


def reject_probability(score: float, c: float, gamma: float) -> float:
    """The randomized test function phi at one observed score."""
    if score > c:
        return 1.0
    if score == c:
        return gamma
    return 0.0


def randomization_reference(
    data,
    stat: TestStatistic,
    kind: GroupKind,
    B: int,
    source: RandomSource,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Observed statistic plus B randomized replicates (values, degeneracy flags)."""
    if B < 1:
        raise ValueError("B must be at least 1")
    if kind not in stat.kinds:
        raise ValueError(f"{stat.name} does not randomize over the {kind.value} group")
    data = np.asarray(data, dtype=float)
    params = groups.sample_matrix(kind, B, data.shape[0], source.generator())
    t_obs = stat.statistic(data)
    tilde, degenerate = stat.transformed_statistics(data, kind, params)
    return t_obs, tilde, degenerate


def _assemble(t_obs, reference, alpha, sided, estimate, std_err, replicates, mode, dropped=0):
    scores = _score(reference, sided)
    obs = float(_score(np.asarray([t_obs]), sided)[0])
    c, gamma = critical_value(scores, alpha)
    return TestResult(
        statistic=float(t_obs),
        critical_value=c,
        gamma=gamma,
        reject_prob=reject_probability(obs, c, gamma),
        p_value=float((1 + np.count_nonzero(scores >= obs)) / (scores.size + 1)),
        estimate=float(estimate),
        std_err=float(std_err),
        replicates=int(replicates),
        mode=mode,
        alpha=float(alpha),
        sided=sided,
        dropped=int(dropped),
    )


def randomization_test(
    data,
    stat: TestStatistic,
    kind: GroupKind,
    B: int = 999,
    alpha: float = 0.05,
    source: RandomSource | None = None,
    sided: str = "two-sided",
) -> TestResult:
    """Monte-Carlo group-randomization test of theta = stat.null_value.

    The reference set is the B randomized statistics together with the
    observed one; the p-value is (1 + #{|T~_b| >= |T|}) / (B + 1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    source = source if source is not None else RandomSource(0)
    data = np.asarray(data, dtype=float)
    t_obs, tilde, degenerate = randomization_reference(data, stat, kind, B, source)
    if bool(np.all(degenerate)):
        raise DegenerateDataError("degenerate randomization distribution")
    scores = _score(tilde, sided)
    obs = float(_score(np.asarray([t_obs]), sided)[0])
    c, gamma = critical_value(np.append(scores, obs), alpha)
    return TestResult(
        statistic=float(t_obs),
        critical_value=c,
        gamma=gamma,
        reject_prob=reject_probability(obs, c, gamma),
        p_value=float((1 + np.count_nonzero(scores >= obs)) / (B + 1)),
        estimate=stat.estimate(data),
        std_err=stat.standard_error(data),
        replicates=B,
        mode="monte-carlo",
        alpha=float(alpha),
        sided=sided,
    )


def enumerate_orbit_statistics(
    data,
    stat: TestStatistic,
    kind: GroupKind,
    budget: int = 1 << 20,
) -> np.ndarray:
    """Randomized statistics for every element vector of a finite group.

    Row 0 of the enumeration is the identity vector, so the first entry is
    the observed statistic under the randomized-replicate conventions.
    """
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    size = groups.orbit_size(kind, n)
    if size > budget:
        raise BudgetExceededError(
            f"orbit size {size} exceeds the budget {budget}; use randomization_test with Monte-Carlo replicates"
        )
    params = groups.enumerate_matrix(kind, n)
    values, _ = stat.transformed_statistics(data, kind, params)
    return values


def exact_enumeration_test(
    data,
    stat: TestStatistic,
    kind: GroupKind,
    alpha: float = 0.05,
    budget: int = 1 << 20,
    sided: str = "two-sided",
) -> TestResult:
    """Exact-enumeration randomization test over the full group orbit.

    The reference distribution is the exact conditional law of the statistic
    given the data; averaging the test function over the orbit returns alpha
    identically (finite-sample exactness made deterministic). The reported
    statistic is the identity-element orbit value.
    """
    data = np.asarray(data, dtype=float)
    orbit = enumerate_orbit_statistics(data, stat, kind, budget)
    return _assemble(
        orbit[0],
        orbit,
        alpha,
        sided,
        stat.estimate(data),
        stat.standard_error(data),
        orbit.size,
        "exact",
    )


def bootstrap_test(
    data,
    stat: TestStatistic,
    B: int = 999,
    alpha: float = 0.05,
    source: RandomSource | None = None,
    sided: str = "two-sided",
) -> TestResult:
    """Efron bootstrap comparator: resample with replacement, center at the estimate.

    Degenerate resamples are dropped and counted in ``dropped``; the critical
    value is the empirical (1 - alpha)-quantile of the surviving replicate
    scores (no exactness claim, gamma = 0).
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    source = source if source is not None else RandomSource(0)
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    indices = source.generator().integers(0, n, size=(B, n))
    t_obs = stat.statistic(data)
    tstar, degenerate = stat.bootstrap_statistics(data, indices)
    keep = ~degenerate
    effective = int(np.count_nonzero(keep))
    if effective == 0:
        raise DegenerateDataError("all bootstrap resamples degenerate")
    scores = _score(tstar[keep], sided)
    obs = float(_score(np.asarray([t_obs]), sided)[0])
    ordered = np.sort(scores)
    k = min(max(int(np.ceil((1.0 - alpha) * effective)), 1), effective)
    c = float(ordered[k - 1])
    return TestResult(
        statistic=float(t_obs),
        critical_value=c,
        gamma=0.0,
        reject_prob=float(obs > c),
        p_value=float((1 + np.count_nonzero(scores >= obs)) / (effective + 1)),
        estimate=stat.estimate(data),
        std_err=stat.standard_error(data),
        replicates=effective,
        mode="bootstrap",
        alpha=float(alpha),
        sided=sided,
        dropped=B - effective,
    )


def pairing_permutation_test(
    data,
    stat: TestStatistic,
    B: int = 999,
    alpha: float = 0.05,
    source: RandomSource | None = None,
    sided: str = "two-sided",
) -> TestResult:
    """Permutation comparator: permute the x coordinates across pairs.

    Finitely exact when the dependence structure is the independence copula;
    reference-set handling matches randomization_test.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    permuted = getattr(stat, "permuted_statistics", None)
    if permuted is None:
        raise ValueError(f"{stat.name} does not support pairing permutation")
    source = source if source is not None else RandomSource(0)
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    rng = source.generator()
    perms = rng.permuted(np.tile(np.arange(n), (B, 1)), axis=1)
    t_obs = stat.statistic(data)
    tilde, degenerate = permuted(data, perms)
    if bool(np.all(degenerate)):
        raise DegenerateDataError("degenerate permutation distribution")
    scores = _score(tilde, sided)
    obs = float(_score(np.asarray([t_obs]), sided)[0])
    c, gamma = critical_value(np.append(scores, obs), alpha)
    return TestResult(
        statistic=float(t_obs),
        critical_value=c,
        gamma=gamma,
        reject_prob=reject_probability(obs, c, gamma),
        p_value=float((1 + np.count_nonzero(scores >= obs)) / (B + 1)),
        estimate=stat.estimate(data),
        std_err=stat.standard_error(data),
        replicates=B,
        mode="permutation",
        alpha=float(alpha),
        sided=sided,
    )


def normal_test(data, stat: TestStatistic, alpha: float = 0.05, sided: str = "two-sided") -> TestResult:
    """Asymptotic comparator using standard normal quantiles."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    data = np.asarray(data, dtype=float)
    t_obs = stat.statistic(data)
    if sided == "two-sided":
        c = float(spstats.norm.ppf(1.0 - alpha / 2.0))
        p = 2.0 * float(spstats.norm.sf(abs(t_obs)))
    elif sided in _SIDES:
        c = float(spstats.norm.ppf(1.0 - alpha))
        tail = t_obs if sided == "one-sided-upper" else -t_obs
        p = float(spstats.norm.sf(tail))
    else:
        raise ValueError(f"sided must be one of {_SIDES}")
    obs = float(_score(np.asarray([t_obs]), sided)[0])
    return TestResult(
        statistic=float(t_obs),
        critical_value=c,
        gamma=0.0,
        reject_prob=float(obs > c),
        p_value=max(p, np.finfo(float).tiny),
        estimate=stat.estimate(data),
        std_err=stat.standard_error(data),
        replicates=0,
        mode="normal",
        alpha=float(alpha),
        sided=sided,
    )


def invert_ci(data, stat: TestStatistic, critical: float) -> tuple[float, float]:
    """Confidence interval {theta : |T_n(theta)| <= critical} by test inversion."""
    return stat.confidence_interval(np.asarray(data, dtype=float), critical)


def randomized_covariance(f_values, h_values) -> float:
    """Plug-in covariance mean(f*h) - mean(f)*mean(h) of randomized evaluations."""
    f = np.asarray(f_values, dtype=float)
    h = np.asarray(h_values, dtype=float)
    if f.shape != h.shape or f.ndim != 1 or f.size == 0:
        raise ValueError("f_values and h_values must be equal-length nonempty vectors")
    return float(np.mean(f * h) - np.mean(f) * np.mean(h))
