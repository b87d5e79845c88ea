"""Numeric foundations: right-continuous step functions, Stieltjes sums, seeded streams.

Step functions on a time interval [0, tau] are the common currency of the
survival estimators (survival curves, cumulative hazards, variance processes).
They are immutable after construction and evaluation is vectorized, so they
can be shared freely across randomization workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "DomainError",
    "StepFunction",
    "RandomSource",
    "normalized",
    "stieltjes_integral",
]


class DomainError(ValueError):
    """Evaluation requested outside a step function's domain."""


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function on [0, tau].

    Parameters
    ----------
    jump_times : array_like
        Strictly increasing times in [0, tau] at which the value changes.
    values : array_like
        Value attained at and after each jump time (right-continuous).
    initial_value : float
        Value on [0, first jump); also the left limit at the first jump.
    tau : float
        Right end of the domain. Defaults to +inf (unbounded domain).
    """

    jump_times: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0
    tau: float = np.inf

    def __post_init__(self):
        times = np.asarray(self.jump_times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or vals.ndim != 1 or times.shape != vals.shape:
            raise ValueError("jump_times and values must be 1-d and of equal length")
        if times.size and (np.any(np.diff(times) <= 0)):
            raise ValueError("jump_times must be strictly increasing")
        if times.size and (times[0] < 0 or times[-1] > self.tau):
            raise ValueError("jump_times must lie in [0, tau]")
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "values", vals)

    def _check_domain(self, t: np.ndarray) -> None:
        if np.any(t < 0) or np.any(t > self.tau):
            raise DomainError(f"evaluation outside [0, {self.tau}]")

    def __call__(self, t):
        """Right-continuous evaluation: value at the largest jump time <= t."""
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        idx = np.searchsorted(self.jump_times, t, side="right")
        out = np.where(idx > 0, self.values[np.maximum(idx - 1, 0)], self.initial_value)
        return float(out) if out.ndim == 0 else out

    def left_limit(self, t):
        """Left limit f(t-): value at the largest jump time strictly < t."""
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        idx = np.searchsorted(self.jump_times, t, side="left")
        out = np.where(idx > 0, self.values[np.maximum(idx - 1, 0)], self.initial_value)
        return float(out) if out.ndim == 0 else out

    def normalized(self, t):
        """The +/- normalization (f(t) + f(t-)) / 2, the tie-splitting integrand."""
        return 0.5 * (self(t) + self.left_limit(t))

    def jump_sizes(self) -> np.ndarray:
        """Jumps f(t) - f(t-) at each jump time."""
        prev = np.concatenate(([self.initial_value], self.values[:-1]))
        return self.values - prev

    def terminal_value(self) -> float:
        """Value at the right end of the domain (after the last jump)."""
        return float(self.values[-1]) if self.values.size else self.initial_value


def normalized(f: StepFunction) -> Callable:
    """Return the function t -> (f(t) + f(t-)) / 2."""
    return f.normalized


def stieltjes_integral(
    g: Union[Callable, StepFunction],
    df: StepFunction,
    lower: float = 0.0,
    upper: float = np.inf,
    include_lower: bool = True,
    include_upper: bool = True,
) -> float:
    """Lebesgue-Stieltjes integral of ``g`` against the jumps of ``df``.

    Computes ``sum g(u) * (F(u) - F(u-))`` over the jump times ``u`` of ``df``
    that fall in the requested interval. The boundary-inclusion flags select
    between the four interval types [a,b], [a,b), (a,b], (a,b); interval
    endpoints are compared to jump times by exact equality.
    """
    times = df.jump_times
    keep = (times >= lower) if include_lower else (times > lower)
    keep &= (times <= upper) if include_upper else (times < upper)
    if not np.any(keep):
        return 0.0
    u = times[keep]
    dvals = df.jump_sizes()[keep]
    gu = np.asarray(g(u), dtype=float)
    return float(np.sum(gu * dvals))


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RandomSource:
    """Reproducible random stream keyed by (seed, stream_id).

    Identical keys reproduce identical draws; distinct stream ids give
    statistically independent streams. Child streams are derived by mixing
    the stream id with an index, so nested derivations stay collision-free
    for practical purposes.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def child(self, index: int) -> "RandomSource":
        mixed = _splitmix64((self.stream_id * 0x9E3779B97F4A7C15 + index + 1) & 0xFFFFFFFFFFFFFFFF)
        return RandomSource(self.seed, mixed)
