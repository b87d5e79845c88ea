"""Pearson correlation: estimate, Fisher-z studentized statistic, and variance.

The studentized pivot is

    T_n(rho0) = sqrt(n) * (1 - rho_hat^2) / sigma_hat * (atanh(rho_hat) - atanh(rho0)),

where sigma_hat^2 is the empirical variance (1/n convention) of the estimated
influence values Z_i = Xt_i*Yt_i - (rho_hat/2)*(Xt_i^2 + Yt_i^2) computed from
the empirically standardized coordinates Xt, Yt. The same formulas evaluate
randomized replicates; all moment reductions run along the last axis so that
(B, n) batches of mirrored/rotated samples are handled in one pass.

Degenerate-data conventions: on observed data a zero marginal variance (or a
perfectly linear sample) sets the statistic to 0, making the test
conservative; on randomized replicates an ill-defined or zero-numerator
correlation maps to +inf, inflating the critical value in the same
conservative direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import groups
from .errors import DegenerateDataError
from .groups import GroupKind
from .statistic import TestStatistic

__all__ = [
    "CorrelationFit",
    "correlation_fit",
    "pearson_rho",
    "rho_variance",
    "correlation_statistic",
    "fisher_ci",
    "randomized_rho",
    "randomized_statistics",
    "CorrelationStatistic",
]


@dataclass(frozen=True)
class CorrelationFit:
    rho_hat: float
    sigma_rho_hat: float
    n: int
    degenerate: bool


def _split_xy(sample) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("sample must have shape (n, 2)")
    if arr.shape[0] < 2:
        raise ValueError("need at least two observations")
    return arr[:, 0], arr[:, 1]


def _moments(x: np.ndarray, y: np.ndarray):
    """Centered second moments along the last axis (1/n convention)."""
    mx = np.mean(x, axis=-1, keepdims=True)
    my = np.mean(y, axis=-1, keepdims=True)
    xc = x - mx
    yc = y - my
    vx = np.mean(xc * xc, axis=-1)
    vy = np.mean(yc * yc, axis=-1)
    cxy = np.mean(xc * yc, axis=-1)
    return xc, yc, vx, vy, cxy


def _tn_core(x: np.ndarray, y: np.ndarray, rho0: float, randomized: bool):
    """Statistic, correlation, influence-variance, degeneracy along axis -1."""
    n = x.shape[-1]
    xc, yc, vx, vy, cxy = _moments(x, y)
    degenerate = (vx <= 0.0) | (vy <= 0.0)
    if randomized:
        degenerate = degenerate | (cxy == 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        sx = np.sqrt(np.where(vx > 0.0, vx, 1.0))
        sy = np.sqrt(np.where(vy > 0.0, vy, 1.0))
        rho = cxy / (sx * sy)
        rho = np.clip(rho, -1.0, 1.0)
        xs = xc / sx[..., np.newaxis]
        ys = yc / sy[..., np.newaxis]
        z = xs * ys - (rho[..., np.newaxis] / 2.0) * (xs * xs + ys * ys)
        zm = np.mean(z, axis=-1)
        sigma2 = np.mean(z * z, axis=-1) - zm * zm
        sigma2 = np.maximum(sigma2, 0.0)
        sigma = np.sqrt(sigma2)
        degenerate = degenerate | (np.abs(rho) >= 1.0) | (sigma == 0.0)
        t = np.sqrt(n) * (1.0 - rho * rho) / sigma * (np.arctanh(rho) - np.arctanh(rho0))

    fallback = np.inf if randomized else 0.0
    t = np.where(degenerate, fallback, t)
    return t, rho, sigma, degenerate


def correlation_fit(sample) -> CorrelationFit:
    """Fit rho_hat and its influence-based sigma_hat on one sample."""
    x, y = _split_xy(sample)
    _, rho, sigma, degenerate = _tn_core(x, y, 0.0, randomized=False)
    return CorrelationFit(float(rho), float(sigma), x.shape[-1], bool(degenerate))


def pearson_rho(sample) -> float:
    """Empirical correlation coefficient; raises DegenerateDataError if a marginal variance is 0."""
    x, y = _split_xy(sample)
    _, _, vx, vy, cxy = _moments(x, y)
    if vx <= 0.0 or vy <= 0.0:
        raise DegenerateDataError("zero marginal empirical variance")
    return float(np.clip(cxy / np.sqrt(vx * vy), -1.0, 1.0))


def rho_variance(sample) -> float:
    """Plug-in variance of sqrt(n)(rho_hat - rho): empirical variance of the Z_i."""
    x, y = _split_xy(sample)
    _, _, vx, vy, _ = _moments(x, y)
    if vx <= 0.0 or vy <= 0.0:
        raise DegenerateDataError("zero marginal empirical variance")
    _, _, sigma, _ = _tn_core(x, y, 0.0, randomized=False)
    return float(sigma) ** 2


def correlation_statistic(sample, rho0: float) -> float:
    """Studentized Fisher-z statistic T_n(rho0); 0 on degenerate samples."""
    if not -1.0 < rho0 < 1.0:
        raise ValueError("rho0 must lie in (-1, 1)")
    x, y = _split_xy(sample)
    t, _, _, _ = _tn_core(x, y, rho0, randomized=False)
    return float(t)


def fisher_ci(sample, critical_value: float) -> tuple[float, float]:
    """Interval {rho : |T_n(rho)| <= c}, closed-form through the Fisher transform.

    Degenerate samples give the whole parameter range (-1, 1).
    """
    if critical_value < 0:
        raise ValueError("critical_value must be nonnegative")
    x, y = _split_xy(sample)
    _, rho, sigma, degenerate = _tn_core(x, y, 0.0, randomized=False)
    if degenerate:
        return (-1.0, 1.0)
    n = x.shape[-1]
    half_width = critical_value * float(sigma) / (np.sqrt(n) * (1.0 - float(rho) ** 2))
    center = np.arctanh(float(rho))
    return (float(np.tanh(center - half_width)), float(np.tanh(center + half_width)))


def _transform(sample, kind: GroupKind, params: np.ndarray):
    x, y = _split_xy(sample)
    if kind is GroupKind.MIRROR:
        return x * params[..., 0], y * params[..., 1]
    if kind is GroupKind.ROTATION:
        c, s = np.cos(params), np.sin(params)
        return x * c - y * s, x * s + y * c
    raise ValueError(f"correlation statistics support mirror and rotation groups, not {kind.value}")


def randomized_rho(sample, kind: GroupKind, params: np.ndarray) -> np.ndarray:
    """Correlation of each group-transformed replicate (diagnostics)."""
    xt, yt = _transform(sample, kind, params)
    _, rho, _, _ = _tn_core(xt, yt, 0.0, randomized=True)
    return rho


def randomized_statistics(sample, kind: GroupKind, params: np.ndarray, rho0: float = 0.0):
    """T_n(rho0) on each transformed replicate, with degeneracy flags."""
    xt, yt = _transform(sample, kind, params)
    t, _, _, degenerate = _tn_core(xt, yt, rho0, randomized=True)
    return t, degenerate


class CorrelationStatistic(TestStatistic):
    """Engine adapter for the Fisher-z studentized correlation statistic."""

    name = "pearson-rho"
    kinds = (GroupKind.MIRROR, GroupKind.ROTATION)

    def __init__(self, null_value: float = 0.0):
        if not -1.0 < null_value < 1.0:
            raise ValueError("null correlation must lie in (-1, 1)")
        self.null_value = float(null_value)

    def evaluate(self, data, theta0=None, *, randomized=False):
        rho0 = self.null_value if theta0 is None else float(theta0)
        x, y = _split_xy(data)
        t, _, _, degenerate = _tn_core(x, y, rho0, randomized=randomized)
        return float(t), bool(degenerate)

    def estimate(self, data) -> float:
        fit = correlation_fit(data)
        return np.nan if fit.degenerate else fit.rho_hat

    def standard_error(self, data) -> float:
        fit = correlation_fit(data)
        return np.nan if fit.degenerate else fit.sigma_rho_hat / np.sqrt(fit.n)

    def confidence_interval(self, data, critical_value: float) -> tuple[float, float]:
        return fisher_ci(data, critical_value)

    def transformed_statistics(self, data, kind, params):
        return randomized_statistics(data, kind, params, self.null_value)

    def bootstrap_statistics(self, data, indices):
        data = np.asarray(data, dtype=float)
        center = self.estimate(data)
        if not np.isfinite(center):
            return np.zeros(indices.shape[0]), np.ones(indices.shape[0], dtype=bool)
        resampled = data[indices]
        t, _, _, degenerate = _tn_core(resampled[..., 0], resampled[..., 1], center, randomized=False)
        return t, degenerate

    def permuted_statistics(self, data, perms):
        """Statistics after permuting the x coordinates only."""
        x, y = _split_xy(data)
        t, _, _, degenerate = _tn_core(x[perms], np.broadcast_to(y, perms.shape), self.null_value, randomized=True)
        return t, degenerate
