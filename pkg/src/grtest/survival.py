"""Right-censored paired data: Kaplan-Meier machinery and the Mann-Whitney effect.

The effect is p = P(T1 > T2) + P(T1 = T2)/2 for independent draws from the two
margins truncated at a horizon tau, estimated by the plug-in

    p_hat = - integral of S1_hat^{+-} dS2_hat     over [0, tau],

with marginal Kaplan-Meier estimators S_j. Studentization uses the empirical
variance of per-observation influence values assembled from the common kernel
dK(t) = S_j(t) dS_k(t) - S_k(t) dS_j(t), the censoring survival estimators
H_j (reverse Kaplan-Meier, events preceding censorings at ties), and the
variance processes sigma_j^2(t) = n * int_0^t dLambda_j / [Y_j (1 - dLambda_j)].

Every quantity lives on the grid of observed times, so the whole computation
vectorizes over exchange-randomization replicates: a (B, n) swap matrix turns
into (B, K) margin curves through two matrix products, and per-observation
influence values come from cumulative-sum gathers. The scalar API is the
B = 1 case of the same kernel.

Conventions and guards:

- Influence values follow the plug-in variance estimator's sign convention
  (for discrete data they equal the negative of the exact Gateaux derivative
  of p_hat; only their centered second moment is ever used).
- Where a margin's largest observation is an uncensored time before tau, the
  terminal hazard jump dLambda = 1 would make 1/(1 - dLambda) singular; the
  at-risk deficit Y - D is floored at 1/2 there, and a zero denominator
  H_j(X-) S_j(X) for an uncensored X < tau is replaced by the smallest
  positive value of that product on the grid. Fits where a floor was actually
  used carry ``guarded=True``.
- A margin without any events makes the statistic ill-defined; both the
  observed and the randomized statistic fall back to 0, which can only make
  the test more conservative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StepFunction, stieltjes_integral
from .errors import DegenerateDataError
from .groups import GroupKind
from .statistic import TestStatistic

try:
    from ._mw_fast import exchange_batch as _exchange_batch
except ImportError:  # pragma: no cover - numba is a declared dependency
    _exchange_batch = None

__all__ = [
    "MarginalFit",
    "MWFit",
    "truncate",
    "truncate_sample",
    "kaplan_meier",
    "nelson_aalen",
    "censoring_km",
    "fit_margin",
    "mw_effect",
    "mw_influence",
    "mw_variance",
    "mw_statistic",
    "mw_fit",
    "exchange_statistics",
    "MannWhitneyStatistic",
]

_CHUNK_ELEMENTS = 1 << 20  # target elements per (chunk, K) work array


def truncate(obs, tau: float):
    """Truncate one (x1, x2, d1, d2) observation at the horizon tau.

    A component reaching tau becomes an event at tau: x = min(x, tau) and
    delta = 1 whenever the original x was >= tau.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    x1, x2, d1, d2 = obs
    if x1 >= tau:
        x1, d1 = tau, 1
    if x2 >= tau:
        x2, d2 = tau, 1
    return type(obs)(x1, x2, d1, d2) if hasattr(obs, "_fields") else (x1, x2, d1, d2)


def truncate_sample(sample, tau: float) -> np.ndarray:
    """Vectorized truncation of an (n, 4) sample at tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    arr = np.array(sample, dtype=float)
    for j in (0, 1):
        hit = arr[:, j] >= tau
        arr[hit, j] = tau
        arr[hit, j + 2] = 1.0
    return arr


def _counts(times: np.ndarray, flags: np.ndarray, grid: np.ndarray):
    at_risk = (times[:, None] >= grid[None, :]).sum(axis=0).astype(float)
    hits = times[:, None] == grid[None, :]
    events = (hits * flags[:, None]).sum(axis=0).astype(float)
    return at_risk, events


def kaplan_meier(times, deltas, tau: float = np.inf) -> StepFunction:
    """Product-limit survival estimator; jumps only at uncensored times."""
    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    if times.size == 0:
        raise ValueError("need at least one observation")
    grid = np.unique(times)
    at_risk, events = _counts(times, deltas, grid)
    values = np.cumprod(1.0 - events / at_risk)
    keep = events > 0
    return StepFunction(grid[keep], values[keep], 1.0, tau)


def nelson_aalen(times, deltas, tau: float = np.inf) -> StepFunction:
    """Cumulative hazard estimator with jumps (#events at u) / (#at risk at u)."""
    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    grid = np.unique(times)
    at_risk, events = _counts(times, deltas, grid)
    values = np.cumsum(events / at_risk)
    keep = events > 0
    return StepFunction(grid[keep], values[keep], 0.0, tau)


def censoring_km(times, deltas, tau: float = np.inf) -> StepFunction:
    """Reverse Kaplan-Meier for the censoring survival function.

    At tied times events precede censorings, so the censoring at-risk count
    at u is (#at risk) - (#events at u).
    """
    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    grid = np.unique(times)
    at_risk, events = _counts(times, deltas, grid)
    censorings = _counts(times, 1 - np.asarray(deltas, dtype=int), grid)[1]
    base = at_risk - events
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(censorings > 0, 1.0 - censorings / base, 1.0)
    values = np.cumprod(factors)
    keep = censorings > 0
    return StepFunction(grid[keep], values[keep], 1.0, tau)


@dataclass(frozen=True)
class MarginalFit:
    """All per-margin estimators on one time grid."""

    survival: StepFunction
    censoring: StepFunction
    cum_hazard: StepFunction
    sigma2: StepFunction
    at_risk: StepFunction  # right-continuous #\{X > t\}; left limit at u gives Y(u)
    n: int


def fit_margin(times, deltas, tau: float) -> MarginalFit:
    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    n = times.size
    grid = np.unique(times)
    at_risk, events = _counts(times, deltas, grid)
    dsig = np.where(events > 0, n * events / (at_risk * np.maximum(at_risk - events, 0.5)), 0.0)
    keep = events > 0
    sigma2 = StepFunction(grid[keep], np.cumsum(dsig)[keep], 0.0, tau)
    counts_at = (times[:, None] == grid[None, :]).sum(axis=0)
    risk_fn = StepFunction(grid, at_risk - counts_at, float(n), tau)
    return MarginalFit(
        survival=kaplan_meier(times, deltas, tau),
        censoring=censoring_km(times, deltas, tau),
        cum_hazard=nelson_aalen(times, deltas, tau),
        sigma2=sigma2,
        at_risk=risk_fn,
        n=n,
    )


def _split_censored(sample) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError("sample must have shape (n, 4): x1, x2, d1, d2")
    if arr.shape[0] < 1:
        raise ValueError("need at least one observation")
    if np.any(arr[:, :2] < 0) or not np.all(np.isfinite(arr[:, :2])):
        raise ValueError("times must be finite and nonnegative")
    d = arr[:, 2:]
    if not np.all((d == 0) | (d == 1)):
        raise ValueError("status indicators must be 0 or 1")
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def _check_truncated(x1, x2, tau):
    if tau <= 0:
        raise ValueError("tau must be positive")
    if max(x1.max(), x2.max()) > tau:
        raise ValueError("sample contains times beyond tau; apply truncation first")


class _ExchangeKernel:
    """Grid-based Mann-Whitney computation, batched over swap vectors."""

    def __init__(self, sample, tau: float):
        x1, x2, d1, d2 = _split_censored(sample)
        _check_truncated(x1, x2, tau)
        self.tau = float(tau)
        self.n = x1.size
        self.grid = np.unique(np.concatenate([x1, x2]))
        self.idx = np.stack([np.searchsorted(self.grid, x1), np.searchsorted(self.grid, x2)])
        self.times = np.stack([x1, x2])
        self.deltas = np.stack([d1, d2])
        g = self.grid[None, :]
        self.risk = [(t[:, None] >= g).astype(float) for t in (x1, x2)]
        hit1, hit2 = (x1[:, None] == g), (x2[:, None] == g)
        self.event = [hit1 * d1[:, None], hit2 * d2[:, None]]
        self.cens = [hit1 * (1.0 - d1)[:, None], hit2 * (1.0 - d2)[:, None]]
        self.lt_tau = self.grid < self.tau

    def _margin_curves(self, at_risk, events, censorings):
        with np.errstate(divide="ignore", invalid="ignore"):
            safe_y = np.maximum(at_risk, 1.0)
            dlam = np.where(at_risk > 0, events / safe_y, 0.0)
            surv = np.cumprod(1.0 - dlam, axis=-1)
            surv_prev = np.concatenate([np.ones_like(surv[..., :1]), surv[..., :-1]], axis=-1)
            cens_base = np.maximum(at_risk - events, 1.0)
            dlam_c = np.where(censorings > 0, censorings / cens_base, 0.0)
            haz_c = np.cumprod(1.0 - dlam_c, axis=-1)
            haz_prev = np.concatenate([np.ones_like(haz_c[..., :1]), haz_c[..., :-1]], axis=-1)
            dsig = np.where(
                events > 0,
                self.n * events / (safe_y * np.maximum(at_risk - events, 0.5)),
                0.0,
            )
        return {
            "S": surv,
            "Sprev": surv_prev,
            "dS": surv - surv_prev,
            "Hprev": haz_prev,
            "dLam": dlam,
            "sig": np.cumsum(dsig, axis=-1),
        }

    def _margin_terms(self, own, other, kernel, swap, comp):
        """Influence-bracket terms for one margin over all replicates.

        ``kernel`` is this margin's dK; ``comp`` selects which original
        component (0 or 1) feeds the margin under swap=False.
        """
        m = np.where(swap, self.idx[1 - comp][None, :], self.idx[comp][None, :])
        delta = np.where(swap, self.deltas[1 - comp][None, :], self.deltas[comp][None, :])
        use = delta * self.lt_tau[m]

        dk_lt = kernel * self.lt_tau
        cum_dk = np.cumsum(dk_lt, axis=-1)
        total_dk = cum_dk[..., -1:]
        ecum_dk = cum_dk - dk_lt
        sig_dk = own["sig"] * kernel
        ecum_sig_dk = np.cumsum(sig_dk, axis=-1) - sig_dk
        with np.errstate(divide="ignore", invalid="ignore"):
            t5_atoms = np.where(own["dLam"] > 0, other["S"] * own["dLam"] / own["Hprev"], 0.0)
        cum_t5 = np.cumsum(t5_atoms * self.lt_tau, axis=-1)

        take = lambda arr: np.take_along_axis(np.broadcast_to(arr, (m.shape[0], arr.shape[-1])), m, axis=-1)

        prod = own["Hprev"] * own["S"]
        positive = np.where(prod > 0, prod, np.inf)
        floor = np.min(positive, axis=-1, keepdims=True)
        floor = np.where(np.isfinite(floor), floor, 1.0 / (2.0 * self.n))
        den_raw = take(prod)
        floored = (den_raw <= 0) & (use > 0)
        den = np.where(den_raw > 0, den_raw, floor)

        term1 = use / den * (total_dk - take(cum_dk))
        term2 = use * take(other["Sprev"]) / take(own["Hprev"])
        term3 = take(ecum_sig_dk)
        term4 = take(own["sig"]) * (total_dk - take(ecum_dk))
        term5 = take(cum_t5)
        bracket = term1 - term2 - term3 - term4 + term5
        return bracket, np.any(floored, axis=-1)

    def compute(self, swaps: np.ndarray | None, want_influence: bool = True):
        """Return per-replicate (p_hat, sigma2, influence, no_events, guarded)."""
        if swaps is None:
            swaps = np.zeros((1, self.n), dtype=bool)
        s = swaps.astype(float)
        one_minus = 1.0 - s
        y1 = one_minus @ self.risk[0] + s @ self.risk[1]
        e1 = one_minus @ self.event[0] + s @ self.event[1]
        c1 = one_minus @ self.cens[0] + s @ self.cens[1]
        y2 = (self.risk[0].sum(axis=0) + self.risk[1].sum(axis=0))[None, :] - y1
        e2 = (self.event[0].sum(axis=0) + self.event[1].sum(axis=0))[None, :] - e1
        c2 = (self.cens[0].sum(axis=0) + self.cens[1].sum(axis=0))[None, :] - c1

        m1 = self._margin_curves(y1, e1, c1)
        m2 = self._margin_curves(y2, e2, c2)
        no_events = (e1.sum(axis=-1) == 0) | (e2.sum(axis=-1) == 0)

        s1pm = 0.5 * (m1["S"] + m1["Sprev"])
        p_hat = -np.sum(s1pm * m2["dS"], axis=-1)

        if not want_influence:
            return p_hat, None, None, no_events, np.zeros_like(no_events)

        kernel1 = m1["S"] * m2["dS"] - m2["S"] * m1["dS"]
        bracket1, guard1 = self._margin_terms(m1, m2, kernel1, swaps, comp=0)
        bracket2, guard2 = self._margin_terms(m2, m1, -kernel1, swaps, comp=1)
        influence = 0.5 * (bracket2 - bracket1)

        mean_if = influence.mean(axis=-1)
        sigma2 = np.mean(influence * influence, axis=-1) - mean_if * mean_if
        sigma2 = np.maximum(sigma2, 0.0)
        return p_hat, sigma2, influence, no_events, guard1 | guard2

    def compute_fast(self, swaps: np.ndarray, want_influence: bool = False):
        """Numba-backed replica of compute(); identical conventions and guards."""
        reps = swaps.shape[0]
        p_hat = np.empty(reps)
        sigma2 = np.empty(reps)
        no_events = np.empty(reps, dtype=np.bool_)
        guarded = np.empty(reps, dtype=np.bool_)
        influence = np.empty((reps, self.n)) if want_influence else np.empty((1, 1))
        _exchange_batch(
            np.ascontiguousarray(self.idx, dtype=np.int64),
            np.ascontiguousarray(self.deltas),
            np.ascontiguousarray(self.lt_tau),
            np.ascontiguousarray(swaps, dtype=np.bool_),
            self.n,
            want_influence,
            p_hat,
            sigma2,
            no_events,
            guarded,
            influence,
        )
        return p_hat, sigma2, influence if want_influence else None, no_events, guarded


@dataclass(frozen=True)
class MWFit:
    """Mann-Whitney effect estimate with its studentization ingredients."""

    p_hat: float
    sigma_phi_hat: float
    if_values: np.ndarray
    tau: float
    degenerate: bool
    guarded: bool = False


def mw_fit(sample, tau: float) -> MWFit:
    kernel = _ExchangeKernel(sample, tau)
    p_hat, sigma2, influence, no_events, guarded = kernel.compute(None)
    degenerate = bool(no_events[0]) or sigma2[0] == 0.0
    return MWFit(
        p_hat=float(p_hat[0]),
        sigma_phi_hat=float(np.sqrt(sigma2[0])),
        if_values=influence[0],
        tau=float(tau),
        degenerate=degenerate,
        guarded=bool(guarded[0]),
    )


def mw_effect(sample, tau: float) -> float:
    """Plug-in Mann-Whitney effect -int S1^{+-} dS2 over [0, tau].

    Raises DegenerateDataError when a margin has no events.
    """
    x1, x2, d1, d2 = _split_censored(sample)
    _check_truncated(x1, x2, tau)
    if d1.sum() == 0 or d2.sum() == 0:
        j = 1 if d1.sum() == 0 else 2
        raise DegenerateDataError(f"no events in margin {j}")
    s1 = kaplan_meier(x1, d1, tau)
    s2 = kaplan_meier(x2, d2, tau)
    return -stieltjes_integral(s1.normalized, s2, 0.0, tau, True, True)


def mw_influence(sample, tau: float) -> np.ndarray:
    """Per-observation plug-in influence values (variance-estimation convention)."""
    _, _, d1, d2 = _split_censored(sample)
    if d1.sum() == 0 or d2.sum() == 0:
        raise DegenerateDataError("a margin has no events")
    return mw_fit(sample, tau).if_values


def mw_variance(sample, tau: float) -> float:
    """Centered empirical variance (1/n convention) of the influence values."""
    x1, x2, d1, d2 = _split_censored(sample)
    if d1.sum() == 0 or d2.sum() == 0:
        raise DegenerateDataError("a margin has no events")
    return float(mw_fit(sample, tau).sigma_phi_hat ** 2)


def mw_statistic(sample, tau: float, p0: float) -> float:
    """Studentized statistic sqrt(n)(p_hat - p0)/sigma_hat; 0 on degenerate data."""
    fit = mw_fit(sample, tau)
    if fit.degenerate:
        return 0.0
    n = fit.if_values.shape[-1]
    return float(np.sqrt(n) * (fit.p_hat - p0) / fit.sigma_phi_hat)


def exchange_statistics(sample, tau: float, swaps: np.ndarray, p0: float = 0.5):
    """Randomized statistics for a (B, n) swap matrix, with degeneracy flags.

    Replicates whose margins lose all events (or have constant influence
    values) take the conservative value 0.
    """
    kernel = _ExchangeKernel(sample, tau)
    n = kernel.n
    values = np.empty(swaps.shape[0])
    flags = np.empty(swaps.shape[0], dtype=bool)
    if _exchange_batch is not None:
        chunk = swaps.shape[0]
    else:
        chunk = max(1, _CHUNK_ELEMENTS // max(kernel.grid.size, 1))
    for start in range(0, swaps.shape[0], chunk):
        stop = min(start + chunk, swaps.shape[0])
        if _exchange_batch is not None:
            p_hat, sigma2, _, no_events, _ = kernel.compute_fast(swaps[start:stop])
        else:
            p_hat, sigma2, _, no_events, _ = kernel.compute(swaps[start:stop])
        degenerate = no_events | (sigma2 == 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.sqrt(n) * (p_hat - p0) / np.sqrt(sigma2)
        values[start:stop] = np.where(degenerate, 0.0, t)
        flags[start:stop] = degenerate
    return values, flags


class MannWhitneyStatistic(TestStatistic):
    """Engine adapter for the censored Mann-Whitney effect at horizon tau."""

    name = "mann-whitney"
    kinds = (GroupKind.EXCHANGE,)

    def __init__(self, tau: float, null_value: float = 0.5):
        if tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= null_value <= 1.0:
            raise ValueError("null effect must lie in [0, 1]")
        self.tau = float(tau)
        self.null_value = float(null_value)

    def evaluate(self, data, theta0=None, *, randomized=False):
        p0 = self.null_value if theta0 is None else float(theta0)
        fit = mw_fit(data, self.tau)
        if fit.degenerate:
            return 0.0, True
        n = fit.if_values.shape[-1]
        return float(np.sqrt(n) * (fit.p_hat - p0) / fit.sigma_phi_hat), False

    def estimate(self, data) -> float:
        fit = mw_fit(data, self.tau)
        return np.nan if fit.degenerate else fit.p_hat

    def standard_error(self, data) -> float:
        fit = mw_fit(data, self.tau)
        if fit.degenerate:
            return np.nan
        return fit.sigma_phi_hat / np.sqrt(fit.if_values.shape[-1])

    def confidence_interval(self, data, critical_value: float) -> tuple[float, float]:
        fit = mw_fit(data, self.tau)
        if fit.degenerate:
            return (0.0, 1.0)
        half = critical_value * fit.sigma_phi_hat / np.sqrt(fit.if_values.shape[-1])
        return (max(0.0, fit.p_hat - half), min(1.0, fit.p_hat + half))

    def transformed_statistics(self, data, kind, params):
        if kind is not GroupKind.EXCHANGE:
            raise ValueError("the Mann-Whitney statistic randomizes over the exchange group")
        return exchange_statistics(data, self.tau, params, self.null_value)
