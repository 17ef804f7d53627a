# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled run loop. Same contract and arithmetic order as ``_pykernel``."""
import numpy as np

from libc.math cimport exp, fabs, isfinite

cdef enum:
    COMB_GRAD = 1
    COMB_RLS2 = 2
    COMB_SOFTMAX = 3
    COMB_SOFTMAX_COMBINED = 4

cdef double A_MAX = 5.0
cdef double ENVELOPE_RTOL = 1e-12


cdef inline double f_beta(double a, double beta) noexcept nogil:
    cdef double inv = 1.0 / beta
    if a > 0 and a <= inv:
        return beta * beta * a - beta
    if a < 0 and a >= -inv:
        return beta * beta * a + beta
    return 0.0


cdef inline double sigmoid(double a) noexcept nogil:
    cdef double z
    if a >= 0:
        return 1.0 / (1.0 + exp(-a))
    z = exp(a)
    return z / (1.0 + z)


cdef inline double clip(double a) noexcept nogil:
    if a > A_MAX:
        return A_MAX
    if a < -A_MAX:
        return -A_MAX
    return a


def run_kernel(const double[::1] x, const double[::1] d, const double[::1] w_opt,
               const double[::1] mu, const double[::1] kappa, const double[::1] beta,
               const unsigned char[::1] attract, const unsigned char[:, ::1] masks,
               const Py_ssize_t[:, ::1] cycle, int comb_kind, double mu_c,
               double forget, double delta, double ceiling):
    cdef Py_ssize_t T = x.shape[0], L = w_opt.shape[0], M = mu.shape[0]
    cdef bint two = comb_kind == COMB_GRAD or comb_kind == COMB_RLS2
    cdef bint soft = comb_kind == COMB_SOFTMAX or comb_kind == COMB_SOFTMAX_COMBINED
    cdef bint soft_combined = comb_kind == COMB_SOFTMAX_COMBINED
    cdef Py_ssize_t nw = 1 if two else M

    W_arr = np.zeros((M, L))
    msd_arr = np.full((T, M), np.nan)
    msdc_arr = np.full(T, np.nan)
    wts_arr = np.full((T, nw), np.nan)
    win_arr = np.zeros(L)
    psi_arr = np.empty(M)
    y_arr = np.empty(M)
    phi_arr = np.zeros(M)
    p_arr = np.full(M, 1.0 / delta)

    cdef double[:, ::1] W = W_arr
    cdef double[:, ::1] msd = msd_arr
    cdef double[::1] msd_c = msdc_arr
    cdef double[:, ::1] wts = wts_arr
    cdef double[::1] win = win_arr
    cdef double[::1] psi = psi_arr
    cdef double[::1] y = y_arr
    cdef double[::1] phi = phi_arr
    cdef double[::1] p = p_arr

    cdef double a = 0.0, r_in = 1.0 / delta
    cdef double lam = 0.5, s, c, lo, hi, tol, dv, e, inc, yc, yd, q, g, m, mx
    cdef double wsum_err = 0.0
    cdef long violations = 0
    cdef bint saturated = False
    cdef int code = 0
    cdef Py_ssize_t n, k, i, row, bad_n = -1, bad_k = -1

    with nogil:
        for n in range(T):
            i = L - 1
            while i > 0:
                win[i] = win[i - 1]
                i -= 1
            win[0] = x[n]

            # mixing weights in force for this sample
            if two:
                lam = sigmoid(a)
                psi[0] = lam
                psi[1] = 1.0 - lam
                wts[n, 0] = lam
            elif soft:
                mx = phi[0]
                for k in range(1, M):
                    if phi[k] > mx:
                        mx = phi[k]
                s = 0.0
                for k in range(M):
                    psi[k] = exp(phi[k] - mx)
                    s += psi[k]
                for k in range(M):
                    psi[k] = psi[k] / s
                    wts[n, k] = psi[k]
            else:
                for k in range(M):
                    psi[k] = 1.0 / M
                    wts[n, k] = psi[k]
            s = 0.0
            for k in range(M):
                s += psi[k]
            if fabs(s - 1.0) > wsum_err:
                wsum_err = fabs(s - 1.0)

            # outputs and deviations of the pre-update taps
            for k in range(M):
                s = 0.0
                c = 0.0
                for i in range(L):
                    s += W[k, i] * win[i]
                    dv = W[k, i] - w_opt[i]
                    c += dv * dv
                y[k] = s
                msd[n, k] = c
            s = 0.0
            for i in range(L):
                if two:
                    c = lam * W[0, i] + (1.0 - lam) * W[1, i]
                else:
                    c = 0.0
                    for k in range(M):
                        c += psi[k] * W[k, i]
                lo = W[0, i]
                hi = W[0, i]
                for k in range(1, M):
                    if W[k, i] < lo:
                        lo = W[k, i]
                    if W[k, i] > hi:
                        hi = W[k, i]
                tol = ENVELOPE_RTOL * (1.0 + (fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)))
                if c < lo - tol or c > hi + tol:
                    violations += 1
                dv = c - w_opt[i]
                s += dv * dv
            msd_c[n] = s

            # masked tap updates
            for k in range(M):
                e = d[n] - y[k]
                row = cycle[n % M, k]
                for i in range(L):
                    if masks[row, i]:
                        inc = mu[k] * e * win[i]
                        if attract[k]:
                            inc = inc + kappa[k] * beta[k] * f_beta(W[k, i], beta[k])
                        W[k, i] += inc
                        if not isfinite(W[k, i]):
                            code = 1
                            bad_n = n
                            bad_k = k + 1
                if code:
                    break
            if code:
                break

            # combiner
            if comb_kind == COMB_GRAD:
                e = d[n] - (lam * y[0] + (1.0 - lam) * y[1])
                a = clip(a + mu_c * e * (y[0] - y[1]) * lam * (1.0 - lam))
            elif comb_kind == COMB_RLS2:
                yd = y[0] - y[1]
                e = d[n] - (lam * y[0] + (1.0 - lam) * y[1])
                q = r_in / forget
                a = clip(a + q / (1.0 + yd * yd * q) * yd * e)
                r_in = 1.0 / (forget / r_in + yd * yd)
                if r_in > ceiling:
                    r_in = ceiling
                    saturated = True
            elif soft:
                yc = 0.0
                for k in range(M):
                    yc += psi[k] * y[k]
                m = 0.0
                for k in range(M):
                    if soft_combined:
                        yd = y[k] - yc
                        e = d[n] - yc
                    else:
                        yd = yc - y[k]
                        e = d[n] - y[k]
                    q = p[k] / forget
                    g = q * yd / (1.0 + q * yd * yd)
                    phi[k] = phi[k] + g * e
                    m += phi[k]
                    p[k] = 1.0 / (forget / p[k] + yd * yd)
                    if p[k] > ceiling:
                        p[k] = ceiling
                        saturated = True
                m = m / M
                for k in range(M):
                    phi[k] = clip(phi[k] - m)

    return {
        "msd": msd_arr,
        "msd_comb": msdc_arr,
        "weights": wts_arr,
        "status": (code, bad_n, bad_k),
        "saturated": bool(saturated),
        "envelope_violations": int(violations),
        "weight_sum_error": float(wsum_err),
    }
