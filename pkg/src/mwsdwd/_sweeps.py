"""Cyclic coordinate sweeps for one mode block of the MM solver.

A single scalar implementation runs either pure-Python or numba-compiled
(install the `fast` extra). No fastmath is enabled, so both paths execute
the same IEEE double operations in the same order. Pure-Python is correct
but slow; simulation-study workloads want numba.

Layouts: u is (P, R) and updated in place; xtc is the contracted predictor
array transposed to (P, R, N) so the subject loop is contiguous; margins
is (N,) and updated in place.
"""

import numpy as np

VARIANT_CODE = {"coupled": 0, "separable-l2": 1, "tensor": 2}


def _pwl_quad_min_impl(acoef, z, oc, u, j, r, lam1):
    # Exact minimizer of 0.5*acoef*t^2 - z*t + lam1 * sum_m |oc[m,r]*t + c_m|
    # where c_m is the assembled-slice entry with this coordinate's own term
    # removed. Convex piecewise-quadratic: walk breakpoints in ascending
    # order tracking the subgradient offset.
    m_tot, rank = oc.shape
    if lam1 == 0.0:
        return z / acoef
    old = u[j, r]
    bp = np.empty(m_tot)
    wt = np.empty(m_tot)
    nb = 0
    slope = 0.0
    for m in range(m_tot):
        a_m = oc[m, r]
        if a_m == 0.0:
            continue
        c_m = -a_m * old
        for rp in range(rank):
            c_m += oc[m, rp] * u[j, rp]
        aa = abs(a_m)
        bp[nb] = -c_m / a_m
        wt[nb] = aa
        nb += 1
        slope += aa
    if nb == 0:
        return z / acoef
    order = np.argsort(bp[:nb])
    g = -lam1 * slope
    for idx in range(nb):
        mth = order[idx]
        t_m = bp[mth]
        t_star = (z - g) / acoef
        if t_star <= t_m:
            return t_star
        g += 2.0 * lam1 * wt[mth]
        if acoef * t_m - z + g >= 0.0:
            return t_m
    return (z - g) / acoef


def _sweep_block_impl(u, margins, xtc, y, w, q, quad, oc, dead, b0,
                      lam1, lam2, variant, max_inner, tol):
    """Sweep coordinates (j, r) then the intercept until the squared
    parameter change per sweep drops to tol. Returns (b0, sweeps run).

    quad[j, r] is the per-coordinate quadratic majorizer coefficient
    (at least 4 and at least 4x the mean squared contracted predictor,
    which keeps the surrogate an upper bound at any data scale). dead
    marks components pinned at zero because another mode's column is
    entirely zero; their contracted columns vanish identically.
    """
    p_k, rank, n = xtc.shape
    inv_n = 1.0 / n
    sweeps = 0
    for _ in range(max_inner):
        delta_sq = 0.0
        for j in range(p_k):
            for r in range(rank):
                if dead[r] == 1:
                    continue
                old = u[j, r]
                lin = 0.0
                for i in range(n):
                    mu = margins[i]
                    if mu <= 0.5:
                        dv = -1.0
                    else:
                        dv = -0.25 / (mu * mu)
                    lin += dv * xtc[j, r, i] * y[i]
                lin *= inv_n
                a = quad[j, r]
                z = a * old - lin
                if variant != 1:
                    # coupled/tensor ridge couples components through W
                    cross = 0.0
                    for rp in range(rank):
                        if rp != r:
                            cross += w[r, rp] * u[j, rp]
                    z -= lam2 * cross
                den = a + lam2 * w[r, r]
                if variant == 2:
                    new = _pwl_quad_min(den, z, oc, u, j, r, lam1)
                else:
                    gthr = lam1 * q[r]
                    az = abs(z) - gthr
                    if az <= 0.0:
                        new = 0.0
                    elif z > 0.0:
                        new = az / den
                    else:
                        new = -az / den
                d = new - old
                if d != 0.0:
                    u[j, r] = new
                    for i in range(n):
                        margins[i] += y[i] * xtc[j, r, i] * d
                    delta_sq += d * d
        # intercept step: loss curvature in b0 is at most 4
        s = 0.0
        for i in range(n):
            mu = margins[i]
            if mu <= 0.5:
                dv = -1.0
            else:
                dv = -0.25 / (mu * mu)
            s += dv * y[i]
        db = -0.25 * s * inv_n
        if db != 0.0:
            b0 += db
            for i in range(n):
                margins[i] += y[i] * db
            delta_sq += db * db
        sweeps += 1
        if delta_sq <= tol:
            break
    return b0, sweeps


try:
    from numba import njit

    _pwl_quad_min = njit(cache=True, nogil=True)(_pwl_quad_min_impl)
    _sweep_block = njit(cache=True, nogil=True)(_sweep_block_impl)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without the extra
    _pwl_quad_min = _pwl_quad_min_impl
    _sweep_block = _sweep_block_impl
    HAVE_NUMBA = False
