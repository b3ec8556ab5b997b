# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``_pykernels``; same signatures, same results."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _dmin(double a, double b) nogil:
    return a if a < b else b


def scan_sum(long ks_in, long kf_in, double ps0, double pf0, double psf,
             double rs_in, double rf_in, double tol):
    cdef long total = ks_in + kf_in
    cdef long best_ks = -1, n = 0, d, ks, kf, j, m
    cdef double best_gain = 0.0, r_sf, r_s0, r_c, r_f, r_s, gain
    cdef long cand[2]
    for d in range(total + 1):
        m = 0
        if d == 0:
            cand[0] = ks_in
            m = 1
        else:
            if ks_in - d >= 0:
                cand[m] = ks_in - d
                m += 1
            if ks_in + d <= total:
                cand[m] = ks_in + d
                m += 1
        for j in range(m):
            ks = cand[j]
            n += 1
            kf = total - ks
            r_sf = ks * (1.0 - psf)
            if r_sf < rs_in - tol:
                continue
            r_s0 = ks * (1.0 - ps0)
            r_c = rs_in - r_s0 if rs_in > r_s0 else 0.0
            r_f = kf * (1.0 - pf0) - r_c
            if r_f < rf_in - tol:
                continue
            r_s = _dmin(r_sf, r_s0 + r_c)
            gain = (r_s + r_f) - rs_in - rf_in
            if best_ks < 0 or gain > best_gain + tol:
                best_ks = ks
                best_gain = gain
    return best_ks, best_gain, n


def scan_pf(long ks_in, long kf_in, double ps0, double pf0, double psf,
            double rs_in, double rf_in, double tol):
    cdef long total = ks_in + kf_in
    cdef long best_ks = -1, n = 0, d, ks, kf, j, m
    cdef double best_rc = 0.0, best_prod = 0.0
    cdef double r_sf, r_s0, cap, lo, hi, r_c, g_s, g_f, prod
    cdef long cand[2]
    for d in range(total + 1):
        m = 0
        if d == 0:
            cand[0] = ks_in
            m = 1
        else:
            if ks_in - d >= 0:
                cand[m] = ks_in - d
                m += 1
            if ks_in + d <= total:
                cand[m] = ks_in + d
                m += 1
        for j in range(m):
            ks = cand[j]
            n += 1
            kf = total - ks
            r_sf = ks * (1.0 - psf)
            r_s0 = ks * (1.0 - ps0)
            cap = kf * (1.0 - pf0)
            lo = rs_in - r_s0 if rs_in > r_s0 else 0.0
            hi = _dmin(cap - rf_in, r_sf - r_s0)
            if lo > hi + tol:
                continue
            if hi < lo:
                hi = lo
            r_c = 0.5 * (cap - rf_in - r_s0 + rs_in)
            if r_c < lo:
                r_c = lo
            elif r_c > hi:
                r_c = hi
            g_s = _dmin(r_sf, r_s0 + r_c) - rs_in
            g_f = cap - r_c - rf_in
            if g_s <= tol or g_f <= tol:
                continue
            prod = g_s * g_f
            if prod > best_prod + tol:
                best_ks = ks
                best_rc = r_c
                best_prod = prod
    return best_ks, best_rc, best_prod, n


def pair_batch(u_s, u_thin, u_relay, u_own, double pe_sf, double pe_s0,
               double pe_f0, double rho, bint forward_all):
    cdef const double[:, :] us = np.ascontiguousarray(u_s, dtype=np.float64)
    cdef const double[:, :] ut = np.ascontiguousarray(u_thin, dtype=np.float64)
    cdef const double[:, :] ur = np.ascontiguousarray(u_relay, dtype=np.float64)
    cdef const double[:, :] uo = np.ascontiguousarray(u_own, dtype=np.float64)
    cdef Py_ssize_t trials = us.shape[0], ks = us.shape[1], kf = ur.shape[1]
    out_arr = np.zeros((trials, 7), dtype=np.int64)
    cdef cnp.int64_t[:, :] out = out_arr
    cdef Py_ssize_t t, p
    cdef long n_bs, n_f, n_q, n_sel, n_relay, ok_r, ok_o, viol
    cdef bint f_ok, b_ok
    cdef double u
    with nogil:
        for t in range(trials):
            n_bs = 0; n_f = 0; n_q = 0; n_sel = 0; ok_r = 0; ok_o = 0; viol = 0
            for p in range(ks):
                u = us[t, p]
                f_ok = u >= pe_sf
                b_ok = u >= pe_s0
                if b_ok:
                    n_bs += 1
                    if not f_ok:
                        viol += 1
                if f_ok:
                    n_f += 1
                    if not b_ok:
                        n_q += 1
                        if forward_all or ut[t, p] < rho:
                            n_sel += 1
            n_relay = n_sel if n_sel < kf else kf
            for p in range(n_relay):
                if ur[t, p] >= pe_f0:
                    ok_r += 1
            for p in range(kf - n_relay):
                if uo[t, p] >= pe_f0:
                    ok_o += 1
            out[t, 0] = n_bs
            out[t, 1] = n_f
            out[t, 2] = n_q
            out[t, 3] = n_relay
            out[t, 4] = ok_r
            out[t, 5] = ok_o
            out[t, 6] = viol
    return out_arr
