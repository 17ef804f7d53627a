"""Pure-Python run loop, composed from the public single-step operations.

Used when the compiled extension is unavailable, and as the reference the
compiled kernel is checked against.
"""
import numpy as np

from .combiner import (
    RlsCombiner2,
    SigmoidCombiner,
    SoftmaxCombinerM,
    combine2,
    grad_step,
    m_combiner_step,
    rls_step2_adomain,
)
from .errors import DivergenceError
from .filters import FilterParams, FilterState, l0lms_step
from .filters import msd as squared_deviation

COMB_NONE, COMB_GRAD, COMB_RLS2, COMB_SOFTMAX, COMB_SOFTMAX_COMBINED = 0, 1, 2, 3, 4
ENVELOPE_RTOL = 1e-12


def run_kernel(x, d, w_opt, mu, kappa, beta, attract, masks, cycle,
               comb_kind, mu_c, forget, delta, ceiling):
    T = x.shape[0]
    L = w_opt.shape[0]
    M = mu.shape[0]
    masks = masks.astype(bool)
    states = [
        FilterState.zeros(L, FilterParams(mu[k], kappa[k], beta[k], "l0lms" if attract[k] else "lms"))
        for k in range(M)
    ]
    if comb_kind == COMB_GRAD:
        comb = SigmoidCombiner(0.0, mu_c)
    elif comb_kind == COMB_RLS2:
        comb = RlsCombiner2(0.0, 1.0 / delta, forget)
    elif comb_kind in (COMB_SOFTMAX, COMB_SOFTMAX_COMBINED):
        comb = SoftmaxCombinerM.fresh(M, forget, delta)
        rule = "per_filter" if comb_kind == COMB_SOFTMAX else "combined"
    else:
        comb = None
    two = comb_kind in (COMB_GRAD, COMB_RLS2)

    msd = np.empty((T, M))
    msd_c = np.empty(T)
    weights = np.empty((T, 1 if two else M))
    window = np.zeros(L)
    violations = 0
    wsum_err = 0.0
    status = (0, -1, -1)

    for n in range(T):
        window[1:] = window[:-1]
        window[0] = x[n]
        W = np.array([s.w for s in states])
        if two:
            lam = comb.lam
            psi = np.array([lam, 1.0 - lam])
            w_comb = combine2(lam, W[0], W[1])
            weights[n, 0] = lam
        else:
            psi = comb.weights if comb is not None else np.full(M, 1.0 / M)
            w_comb = psi @ W
            weights[n] = psi
        wsum_err = max(wsum_err, abs(psi.sum() - 1.0))
        lo, hi = W.min(axis=0), W.max(axis=0)
        tol = ENVELOPE_RTOL * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
        violations += int(np.count_nonzero((w_comb < lo - tol) | (w_comb > hi + tol)))
        with np.errstate(over="ignore"):
            msd[n] = [squared_deviation(w, w_opt) for w in W]
            msd_c[n] = squared_deviation(w_comb, w_opt)

        ys = np.empty(M)
        row = cycle[n % M]
        for k in range(M):
            try:
                states[k], out = l0lms_step(states[k], window, d[n], masks[row[k]])
            except DivergenceError:
                status = (1, n, k + 1)
                break
            ys[k] = out.y
        if status[0]:
            msd[n + 1:] = np.nan
            msd_c[n + 1:] = np.nan
            weights[n + 1:] = np.nan
            break

        if comb_kind == COMB_GRAD:
            e_c = d[n] - combine2(comb.lam, ys[0], ys[1])
            comb = grad_step(comb, e_c, ys[0], ys[1])
        elif comb_kind == COMB_RLS2:
            comb, _ = rls_step2_adomain(comb, ys[0], ys[1], d[n])
        elif comb is not None:
            comb, _ = m_combiner_step(comb, ys, d[n], rule)

    return {
        "msd": msd,
        "msd_comb": msd_c,
        "weights": weights,
        "status": status,
        "saturated": bool(getattr(comb, "saturated", False)),
        "envelope_violations": violations,
        "weight_sum_error": wsum_err,
    }
