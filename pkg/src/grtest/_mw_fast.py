"""Numba kernel for batched exchange-randomized Mann-Whitney statistics.

Mirrors survival._ExchangeKernel.compute step for step (same guards, same
conventions, same evaluation order within a replicate); the numpy path stays
the reference implementation and the test suite checks agreement. Loops run
per replicate with O(n + K) scratch, parallelized over replicates.
"""

import numba
import numpy as np

# skip the TBB version probe (emits a warning on older TBB installs)
numba.config.THREADING_LAYER = "workqueue"


@numba.njit(cache=True, parallel=True)
def exchange_batch(idx, deltas, lt_tau, swaps, n_obs, want_if, p_out, sig2_out, noev_out, guard_out, if_out):
    B = swaps.shape[0]
    K = lt_tau.shape[0]
    n = idx.shape[1]
    nf = float(n_obs)
    for b in numba.prange(B):
        cnt1 = np.zeros(K)
        ev1 = np.zeros(K)
        cn1 = np.zeros(K)
        cnt2 = np.zeros(K)
        ev2 = np.zeros(K)
        cn2 = np.zeros(K)
        for i in range(n):
            if swaps[b, i]:
                a, c = 1, 0
            else:
                a, c = 0, 1
            m1 = idx[a, i]
            m2 = idx[c, i]
            d1v = deltas[a, i]
            d2v = deltas[c, i]
            cnt1[m1] += 1.0
            ev1[m1] += d1v
            cn1[m1] += 1.0 - d1v
            cnt2[m2] += 1.0
            ev2[m2] += d2v
            cn2[m2] += 1.0 - d2v

        s1 = np.empty(K)
        s1p = np.empty(K)
        ds1 = np.empty(K)
        h1p = np.empty(K)
        sig1 = np.empty(K)
        dlam1 = np.empty(K)
        s2 = np.empty(K)
        s2p = np.empty(K)
        ds2 = np.empty(K)
        h2p = np.empty(K)
        sig2 = np.empty(K)
        dlam2 = np.empty(K)

        y1 = 0.0
        y2 = 0.0
        # suffix at-risk counts written into cnt arrays (reused as Y)
        for k in range(K - 1, -1, -1):
            y1 += cnt1[k]
            cnt1[k] = y1
            y2 += cnt2[k]
            cnt2[k] = y2

        ev_sum1 = 0.0
        ev_sum2 = 0.0
        run_s1 = 1.0
        run_h1 = 1.0
        run_g1 = 0.0
        run_s2 = 1.0
        run_h2 = 1.0
        run_g2 = 0.0
        for k in range(K):
            y = cnt1[k]
            e = ev1[k]
            ev_sum1 += e
            dl = e / y if y > 0.0 else 0.0
            s1p[k] = run_s1
            run_s1 = run_s1 * (1.0 - dl)
            s1[k] = run_s1
            ds1[k] = s1[k] - s1p[k]
            dlam1[k] = dl
            base = y - e
            dlc = cn1[k] / base if cn1[k] > 0.0 else 0.0
            h1p[k] = run_h1
            run_h1 = run_h1 * (1.0 - dlc)
            gbase = base if base > 0.5 else 0.5
            if e > 0.0:
                run_g1 += nf * e / (y * gbase)
            sig1[k] = run_g1

            y = cnt2[k]
            e = ev2[k]
            ev_sum2 += e
            dl = e / y if y > 0.0 else 0.0
            s2p[k] = run_s2
            run_s2 = run_s2 * (1.0 - dl)
            s2[k] = run_s2
            ds2[k] = s2[k] - s2p[k]
            dlam2[k] = dl
            base = y - e
            dlc = cn2[k] / base if cn2[k] > 0.0 else 0.0
            h2p[k] = run_h2
            run_h2 = run_h2 * (1.0 - dlc)
            gbase = base if base > 0.5 else 0.5
            if e > 0.0:
                run_g2 += nf * e / (y * gbase)
            sig2[k] = run_g2

        cum_dk = np.empty(K)
        ecum_dk = np.empty(K)
        cum_sigdk1 = np.empty(K)
        cum_sigdk2 = np.empty(K)
        cum_t5_1 = np.empty(K)
        cum_t5_2 = np.empty(K)
        acc_dk = 0.0
        acc_g1 = 0.0
        acc_g2 = 0.0
        acc_t1 = 0.0
        acc_t2 = 0.0
        p_acc = 0.0
        floor1 = np.inf
        floor2 = np.inf
        for k in range(K):
            dk = s1[k] * ds2[k] - s2[k] * ds1[k]
            dk_lt = dk if lt_tau[k] else 0.0
            ecum_dk[k] = acc_dk
            acc_dk += dk_lt
            cum_dk[k] = acc_dk
            sgdk1 = sig1[k] * dk
            acc_g1 += sgdk1
            cum_sigdk1[k] = acc_g1 - sgdk1
            sgdk2 = sig2[k] * (-dk)
            acc_g2 += sgdk2
            cum_sigdk2[k] = acc_g2 - sgdk2
            if lt_tau[k]:
                if dlam1[k] > 0.0:
                    acc_t1 += s2[k] * dlam1[k] / h1p[k]
                if dlam2[k] > 0.0:
                    acc_t2 += s1[k] * dlam2[k] / h2p[k]
            cum_t5_1[k] = acc_t1
            cum_t5_2[k] = acc_t2
            p_acc -= 0.5 * (s1[k] + s1p[k]) * ds2[k]
            prod = h1p[k] * s1[k]
            if prod > 0.0 and prod < floor1:
                floor1 = prod
            prod = h2p[k] * s2[k]
            if prod > 0.0 and prod < floor2:
                floor2 = prod
        total_dk = acc_dk
        if not np.isfinite(floor1):
            floor1 = 1.0 / (2.0 * nf)
        if not np.isfinite(floor2):
            floor2 = 1.0 / (2.0 * nf)

        guard = False
        if_sum = 0.0
        if_sq = 0.0
        for i in range(n):
            if swaps[b, i]:
                a, c = 1, 0
            else:
                a, c = 0, 1
            m = idx[a, i]
            use = deltas[a, i] if lt_tau[m] else 0.0
            den = h1p[m] * s1[m]
            if den <= 0.0:
                if use > 0.0:
                    guard = True
                den = floor1
            term1 = use / den * (total_dk - cum_dk[m])
            term2 = use * s2p[m] / h1p[m]
            term3 = cum_sigdk1[m]
            term4 = sig1[m] * (total_dk - ecum_dk[m])
            term5 = cum_t5_1[m]
            bracket1 = term1 - term2 - term3 - term4 + term5

            m = idx[c, i]
            use = deltas[c, i] if lt_tau[m] else 0.0
            den = h2p[m] * s2[m]
            if den <= 0.0:
                if use > 0.0:
                    guard = True
                den = floor2
            term1 = use / den * (-(total_dk - cum_dk[m]))
            term2 = use * s1p[m] / h2p[m]
            term3 = cum_sigdk2[m]
            term4 = sig2[m] * (-(total_dk - ecum_dk[m]))
            term5 = cum_t5_2[m]
            bracket2 = term1 - term2 - term3 - term4 + term5

            v = 0.5 * (bracket2 - bracket1)
            if want_if:
                if_out[b, i] = v
            if_sum += v
            if_sq += v * v

        mean_if = if_sum / nf
        var_if = if_sq / nf - mean_if * mean_if
        if var_if < 0.0:
            var_if = 0.0
        p_out[b] = p_acc
        sig2_out[b] = var_if
        noev_out[b] = ev_sum1 == 0.0 or ev_sum2 == 0.0
        guard_out[b] = guard
