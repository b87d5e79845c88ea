"""Contract between studentized test statistics and the test engine.

A statistic bundles a point estimate, a plug-in standard error, and the
studentized pivot T_n(theta0); the engine only ever sees this interface.
The base class provides generic per-replicate loops for randomized,
bootstrap, and x-permuted replicates; concrete statistics override them
with vectorized implementations where it pays off (the loops remain the
reference path and are exercised against the overrides in the tests).
"""

from __future__ import annotations

import abc
from typing import ClassVar, Tuple

import numpy as np

from . import groups
from .groups import GroupKind

__all__ = ["TestStatistic"]


class TestStatistic(abc.ABC):
    """A real parameter with a studentized statistic sqrt(n)(est - theta0)/se.

    ``evaluate`` applies the documented degenerate-data conventions and
    reports them through its flag: the statistic on observed data falls back
    to 0 (conservative), while an ill-defined randomized replicate maps to
    the value returned by ``degenerate_replicate_value``.
    """

    name: ClassVar[str]
    kinds: ClassVar[Tuple[GroupKind, ...]]
    null_value: float

    @abc.abstractmethod
    def evaluate(self, data, theta0: float | None = None, *, randomized: bool = False) -> tuple[float, bool]:
        """Return (statistic value, degenerate flag) at theta0 (default null_value)."""

    @abc.abstractmethod
    def estimate(self, data) -> float:
        """Point estimate of the parameter (nan on degenerate data)."""

    @abc.abstractmethod
    def standard_error(self, data) -> float:
        """Plug-in standard error of the estimate (sigma_hat / sqrt(n))."""

    @abc.abstractmethod
    def confidence_interval(self, data, critical_value: float) -> tuple[float, float]:
        """Interval {theta : |T_n(theta)| <= critical_value} (test inversion)."""

    def statistic(self, data, theta0: float | None = None, *, randomized: bool = False) -> float:
        return self.evaluate(data, theta0, randomized=randomized)[0]

    def transformed_statistics(self, data, kind: GroupKind, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Statistics at the null for each group-transformed replicate.

        ``params`` is a groups.sample_matrix array; returns (values, flags)
        of shape (B,). The base implementation loops over replicates via
        groups.apply_matrix; subclasses override with batched code.
        """
        transformed = groups.apply_matrix(kind, params, np.asarray(data, dtype=float))
        values = np.empty(transformed.shape[0])
        flags = np.zeros(transformed.shape[0], dtype=bool)
        for b in range(transformed.shape[0]):
            values[b], flags[b] = self.evaluate(transformed[b], randomized=True)
        return values, flags

    def bootstrap_statistics(self, data, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Studentized statistics centered at the original estimate.

        ``indices`` has shape (B, n); replicate b evaluates the statistic at
        theta0 = estimate(data) on data[indices[b]].
        """
        data = np.asarray(data, dtype=float)
        center = self.estimate(data)
        values = np.empty(indices.shape[0])
        flags = np.zeros(indices.shape[0], dtype=bool)
        if not np.isfinite(center):
            flags[:] = True
            values[:] = 0.0
            return values, flags
        for b in range(indices.shape[0]):
            values[b], flags[b] = self.evaluate(data[indices[b]], center)
        return values, flags
