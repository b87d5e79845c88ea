"""Data generators for the simulation study.

Correlation scenarios:

- ``normal``: bivariate normal with correlation rho (symmetric, independent
  components at rho = 0);
- ``t5``: elliptical bivariate t with 5 degrees of freedom (symmetric,
  dependent even at rho = 0, heavy tails);
- ``chi5``: two independent chi-square(5) margins (right-skewed,
  independence copula);
- ``chi5corr``: correlated chi-square(5) margins built as (X + Z, Y + Z)
  from independent gammas with scale 2 and shapes 2.5*(1 - rho), 2.5*rho;
- ``mixture``: each pair drawn from t5 or the chi-square scenario with
  probability 1/2.

Survival scenarios combine a copula (Gumbel-Hougaard theta=5, Clayton
theta=-0.6, or independence) with either equal Exp(2) margins or Exp(2)
versus a 50/50 mixture of Exp(3) and Exp(lambda), where lambda is calibrated
so the truncated Mann-Whitney effect is exactly 1/2. Censoring times are
min(tau, U(0, b)) drawn independently per component; the alternative shifts
the first survival time to T1 / (1 + nu/2) ~ Exp(2 + nu).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .survival import truncate_sample

__all__ = [
    "BivariateSpec",
    "SurvivalSpec",
    "gen_bivariate",
    "gen_censored_paired",
    "draw_latent",
    "mixture_null_effect",
    "mixture_rate_solver",
    "CORRELATION_SCENARIOS",
]

CORRELATION_SCENARIOS = ("normal", "t5", "chi5", "chi5corr", "mixture")
_COPULAS = ("gumbel-hougaard", "clayton", "independence")
_MARGINS = ("equal-exp", "exp-mixture")


@dataclass(frozen=True)
class BivariateSpec:
    kind: str
    n: int
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in CORRELATION_SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; choose from {CORRELATION_SCENARIOS}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class SurvivalSpec:
    copula: str
    margins: str
    censor_max: float
    n: int
    tau: float = 1.0
    shift: float = 0.0  # nu >= 0; 0 recovers the null
    copula_param: float | None = None  # default 5 (Gumbel-Hougaard) or -0.6 (Clayton)

    def __post_init__(self):
        if self.copula not in _COPULAS:
            raise ValueError(f"unknown copula {self.copula!r}; choose from {_COPULAS}")
        if self.margins not in _MARGINS:
            raise ValueError(f"unknown margins {self.margins!r}; choose from {_MARGINS}")
        if self.censor_max <= 0 or self.tau <= 0 or self.shift < 0 or self.n < 1:
            raise ValueError("censor_max and tau must be positive, shift nonnegative, n positive")

    @property
    def theta(self) -> float:
        if self.copula_param is not None:
            return self.copula_param
        return {"gumbel-hougaard": 5.0, "clayton": -0.6, "independence": 0.0}[self.copula]


def _t5_pairs(rho: float, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, 2))
    z[:, 1] = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
    w = rng.chisquare(5, n)
    return z * np.sqrt(5.0 / w)[:, None]


def _chi5_pairs(rho: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if rho == 0.0:
        return rng.chisquare(5, (n, 2))
    x = rng.gamma(2.5 * (1.0 - rho), 2.0, n)
    y = rng.gamma(2.5 * (1.0 - rho), 2.0, n)
    z = rng.gamma(2.5 * rho, 2.0, n)
    return np.column_stack([x + z, y + z])


def gen_bivariate(spec: BivariateSpec, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. pairs from the requested correlation scenario, shape (n, 2)."""
    kind, n, rho = spec.kind, spec.n, spec.rho
    if kind == "normal":
        z = rng.standard_normal((n, 2))
        z[:, 1] = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
        return z
    if kind == "t5":
        return _t5_pairs(rho, n, rng)
    if kind == "chi5":
        return rng.chisquare(5, (n, 2))
    if kind == "chi5corr":
        return _chi5_pairs(rho, n, rng)
    heavy = _t5_pairs(rho, n, rng)
    skew = _chi5_pairs(rho, n, rng)
    pick = rng.random(n) < 0.5
    return np.where(pick[:, None], heavy, skew)


def _positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Kanter's representation: Laplace transform exp(-s^alpha), alpha in (0,1)."""
    u = rng.uniform(0.0, math.pi, n)
    e = rng.standard_exponential(n)
    a = (
        np.sin(alpha * u) ** (alpha / (1.0 - alpha))
        * np.sin((1.0 - alpha) * u)
        / np.sin(u) ** (1.0 / (1.0 - alpha))
    )
    return (a / e) ** ((1.0 - alpha) / alpha)


def _copula_uniforms(spec: SurvivalSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if spec.copula == "independence":
        u = rng.random((n, 2))
        return u[:, 0], u[:, 1]
    theta = spec.theta
    if spec.copula == "gumbel-hougaard":
        if theta < 1.0:
            raise ValueError("Gumbel-Hougaard parameter must be >= 1")
        if theta == 1.0:
            u = rng.random((n, 2))
            return u[:, 0], u[:, 1]
        alpha = 1.0 / theta
        v = _positive_stable(alpha, n, rng)
        e = rng.standard_exponential((n, 2))
        uu = np.exp(-((e / v[:, None]) ** alpha))
        return uu[:, 0], uu[:, 1]
    # Clayton via conditional-quantile inversion; valid for theta in (-1, 0) too,
    # where the frailty construction is unavailable.
    if theta <= -1.0 or theta == 0.0:
        raise ValueError("Clayton parameter must lie in (-1, 0) or (0, inf)")
    u1 = rng.random(n)
    w = rng.random(n)
    u2 = (1.0 + u1 ** (-theta) * (w ** (-theta / (1.0 + theta)) - 1.0)) ** (-1.0 / theta)
    return u1, u2


def _exp_quantile(u: np.ndarray, rate: float) -> np.ndarray:
    return -np.log1p(-u) / rate


def _mixture_quantile(u: np.ndarray, rate_a: float, rate_b: float) -> np.ndarray:
    """Inverse CDF of the 50/50 Exp(rate_a)/Exp(rate_b) mixture by bisection."""
    target = 1.0 - u
    lo = np.zeros_like(u)
    hi = -np.log(target) / min(rate_a, rate_b) + 1e-12
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        s_mid = 0.5 * (np.exp(-rate_a * mid) + np.exp(-rate_b * mid))
        high_side = s_mid > target
        lo = np.where(high_side, mid, lo)
        hi = np.where(high_side, hi, mid)
    return 0.5 * (lo + hi)


def mixture_null_effect(rate: float, tau: float) -> float:
    """Truncated Mann-Whitney effect of Exp(2) versus the Exp(3)/Exp(rate) mixture.

    Closed form: int_0^tau S1 f2 dt + S1(tau) S2(tau) / 2 for independent
    margins (the effect depends on the margins only).
    """
    lam = rate
    integral = 0.5 * (
        3.0 * (1.0 - math.exp(-5.0 * tau)) / 5.0
        + lam * (1.0 - math.exp(-(2.0 + lam) * tau)) / (2.0 + lam)
    )
    tail = 0.5 * math.exp(-2.0 * tau) * 0.5 * (math.exp(-3.0 * tau) + math.exp(-lam * tau))
    return integral + tail


@functools.lru_cache(maxsize=None)
def mixture_rate_solver(tau: float) -> float:
    """Mixture rate lambda with no Mann-Whitney effect at horizon tau (p = 1/2)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    f = lambda lam: mixture_null_effect(lam, tau) - 0.5
    lo, hi = 1e-6, 10.0
    if f(lo) * f(hi) > 0:
        raise ValueError("no mixture rate in (0, 10) achieves p = 1/2")
    return float(optimize.brentq(f, lo, hi, xtol=1e-13, rtol=1e-15))


def draw_latent(spec: SurvivalSpec, rng: np.random.Generator):
    """Latent survival and censoring draws (t1, t2, c1, c2) before observation.

    The censoring rate a configuration induces is the fraction of components
    with t > c among these latent draws.
    """
    n = spec.n
    u1, u2 = _copula_uniforms(spec, n, rng)
    t1 = _exp_quantile(u1, 2.0)
    if spec.margins == "equal-exp":
        t2 = _exp_quantile(u2, 2.0)
    else:
        t2 = _mixture_quantile(u2, 3.0, mixture_rate_solver(spec.tau))
    if spec.shift > 0:
        t1 = t1 / (1.0 + spec.shift / 2.0)
    c1 = np.minimum(spec.tau, rng.uniform(0.0, spec.censor_max, n))
    c2 = np.minimum(spec.tau, rng.uniform(0.0, spec.censor_max, n))
    return t1, t2, c1, c2


def gen_censored_paired(spec: SurvivalSpec, rng: np.random.Generator) -> np.ndarray:
    """n observed censored pairs (x1, x2, d1, d2), truncated at tau."""
    t1, t2, c1, c2 = draw_latent(spec, rng)
    x1 = np.minimum(t1, c1)
    x2 = np.minimum(t2, c2)
    d1 = (t1 <= c1).astype(float)
    d2 = (t2 <= c2).astype(float)
    return truncate_sample(np.column_stack([x1, x2, d1, d2]), spec.tau)
