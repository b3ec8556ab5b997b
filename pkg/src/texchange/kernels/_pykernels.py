"""Reference (pure Python / numpy) implementations of the hot kernels.

The compiled module ``_ckernels`` mirrors these signatures exactly; the
two must agree bit-for-bit on every input.
"""

import numpy as np


def _split_order(ks_in, total):
    # keep-initial first, then outward by distance; lower split first on ties
    yield ks_in
    for d in range(1, total + 1):
        if ks_in - d >= 0:
            yield ks_in - d
        if ks_in + d <= total:
            yield ks_in + d


def scan_sum(ks_in, kf_in, ps0, pf0, psf, rs_in, rf_in, tol):
    """Exhaustive sum-goodput scan over every split of the joint budget.

    Returns ``(ks, gain, n_evals)``; ``ks == -1`` when no split is feasible.
    """
    total = ks_in + kf_in
    best_ks, best_gain, n = -1, 0.0, 0
    for ks in _split_order(ks_in, total):
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
        r_s = min(r_sf, r_s0 + r_c)
        gain = (r_s + r_f) - rs_in - rf_in
        if best_ks < 0 or gain > best_gain + tol:
            best_ks, best_gain = ks, gain
    return best_ks, best_gain, n


def scan_pf(ks_in, kf_in, ps0, pf0, psf, rs_in, rf_in, tol):
    """Exhaustive proportional-fair scan.

    Returns ``(ks, r_c, product, n_evals)``; ``ks == -1`` when no split
    gives both nodes a strictly positive gain.
    """
    total = ks_in + kf_in
    best_ks, best_rc, best_prod, n = -1, 0.0, 0.0, 0
    for ks in _split_order(ks_in, total):
        n += 1
        kf = total - ks
        r_sf = ks * (1.0 - psf)
        r_s0 = ks * (1.0 - ps0)
        cap = kf * (1.0 - pf0)
        lo = rs_in - r_s0 if rs_in > r_s0 else 0.0
        hi = min(cap - rf_in, r_sf - r_s0)
        if lo > hi + tol:
            continue
        if hi < lo:
            hi = lo
        r_c = 0.5 * (cap - rf_in - r_s0 + rs_in)
        if r_c < lo:
            r_c = lo
        elif r_c > hi:
            r_c = hi
        g_s = min(r_sf, r_s0 + r_c) - rs_in
        g_f = cap - r_c - rf_in
        if g_s <= tol or g_f <= tol:
            continue
        prod = g_s * g_f
        if prod > best_prod + tol:
            best_ks, best_rc, best_prod = ks, r_c, prod
    return best_ks, best_rc, best_prod, n


def pair_batch(u_s, u_thin, u_relay, u_own, pe_sf, pe_s0, pe_f0, rho, forward_all):
    """Count per-trial packet outcomes for one sender/forwarder pair.

    ``u_s``/``u_thin`` have shape (trials, k_s_te); ``u_relay``/``u_own``
    have shape (trials, k_f_te). Returns an int64 array of shape
    (trials, 7) with columns: direct deliveries, packets held by the
    forwarder, relay queue length, relay transmissions, relay deliveries,
    forwarder own deliveries, coupling violations.
    """
    u_s = np.asarray(u_s, dtype=np.float64)
    trials = u_s.shape[0]
    kf = np.asarray(u_relay).shape[1]
    at_f = u_s >= pe_sf
    at_bs = u_s >= pe_s0
    queued = at_f & ~at_bs
    if forward_all:
        chosen = queued
    else:
        chosen = queued & (np.asarray(u_thin) < rho)
    n_relay = np.minimum(chosen.sum(axis=1), kf)
    cols = np.arange(kf)
    relay_mask = cols[None, :] < n_relay[:, None]
    own_mask = cols[None, :] < (kf - n_relay)[:, None]
    ok_relay = np.asarray(u_relay) >= pe_f0
    ok_own = np.asarray(u_own) >= pe_f0
    out = np.empty((trials, 7), dtype=np.int64)
    out[:, 0] = at_bs.sum(axis=1)
    out[:, 1] = at_f.sum(axis=1)
    out[:, 2] = queued.sum(axis=1)
    out[:, 3] = n_relay
    out[:, 4] = (ok_relay & relay_mask).sum(axis=1)
    out[:, 5] = (ok_own & own_mask).sum(axis=1)
    out[:, 6] = (at_bs & ~at_f).sum(axis=1)
    return out
