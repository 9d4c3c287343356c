"""Compiled inner-maximization kernel for the growth-model benchmark.

One kernel instance is compiled per (sector count, shock support size);
the dimension enters as a closure constant so numba unrolls the sector
loops.  The kernel runs projected coordinate ascent over per-good share
columns with a fixed three-point start set and golden-section line
searches, entirely allocation-free in the hot path.  Nodes are processed
independently and sequentially, so outputs are a pure function of the
inputs regardless of scheduling.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0

# continuation modes
CONT_GRID = 0           # multilinear interpolation of grid values
CONT_GRID_EXPAFFINE = 1  # grid holds w = exp(m*v + b); continuation is (ln w - b)/m
CONT_LOGLINEAR = 2      # closed form gamma . ln(y') + K

# grid spacing flags (per dimension)
SPACING_UNIFORM = 0
SPACING_LOG = 1
SPACING_IRREGULAR = 2

_KERNEL_CACHE: dict = {}


def get_sweep_kernel(n: int, n_shock: int):
    """Return the compiled sweep kernel for ``n`` sectors, ``n_shock`` atoms."""
    key = (int(n), int(n_shock))
    if key not in _KERNEL_CACHE:
        _KERNEL_CACHE[key] = _make_sweep(int(n), int(n_shock))
    return _KERNEL_CACHE[key]


def _make_sweep(n: int, n_shock: int):
    ncoord = n + 1
    corners = 1 << n

    @njit(cache=True)
    def sweep(Y, LNY, theta_w, A, beta, ln_shock, probs,
              nodes, counts, flat_vals, strides, t_lo, t_inv, spacing_kind,
              cont_kind, tm, tb, gamma, K, n_golden, max_sweeps, tol_improve,
              values_out, shares_out):
        M = Y.shape[0]
        S = np.empty((ncoord, n))
        lnS = np.empty((ncoord, n))
        g = np.empty(n)
        g2 = np.empty(n)
        sfloor = np.empty(n)
        bestS = np.empty((ncoord, n))
        idx = np.empty(n, dtype=np.int64)
        ww = np.empty(n)

        for node in range(M):
            y = Y[node]
            lny = LNY[node]
            # consumption shares stay above 1e-12/y (interiority floor on c);
            # input shares only need strict positivity, since zero-weight
            # inputs are optimally zero and must not be forced interior
            for j in range(n):
                f = 1e-12 / y[j]
                if f < 1e-15:
                    f = 1e-15
                elif f > 1e-3:
                    f = 1e-3
                sfloor[j] = f
            best_val = -1.0e308

            for start_id in range(3):
                # fixed start set: equal, consumption-heavy, investment-heavy
                if start_id == 0:
                    c_share = 1.0 / (n + 1.0)
                elif start_id == 1:
                    c_share = 0.8
                else:
                    c_share = 0.2
                x_share = (1.0 - c_share) / n
                ln_c = np.log(c_share)
                ln_x = np.log(x_share)
                u_c = 0.0
                for j in range(n):
                    S[0, j] = c_share
                    lnS[0, j] = ln_c
                    u_c += theta_w[j] * (ln_c + lny[j])
                    for i in range(n):
                        S[1 + i, j] = x_share
                        lnS[1 + i, j] = ln_x
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += A[i, j] * (ln_x + lny[j])
                    g[i] = acc

                def _obj(u_c2):
                    # expected continuation at log-outputs g2, plus utility term
                    cont = 0.0
                    for s in range(n_shock):
                        if cont_kind == CONT_LOGLINEAR:
                            v = K
                            for d in range(n):
                                v += gamma[d] * (g2[d] + ln_shock[s, d])
                        else:
                            for d in range(n):
                                lnq = g2[d] + ln_shock[s, d]
                                q = np.exp(lnq)
                                mc = counts[d]
                                if q <= nodes[d, 0]:
                                    i_ = 0
                                    t_ = 0.0
                                elif q >= nodes[d, mc - 1]:
                                    i_ = mc - 2
                                    t_ = 1.0
                                else:
                                    if spacing_kind[d] == SPACING_LOG:
                                        i_ = int((lnq - t_lo[d]) * t_inv[d])
                                    elif spacing_kind[d] == SPACING_UNIFORM:
                                        i_ = int((q - t_lo[d]) * t_inv[d])
                                    else:
                                        i_ = np.searchsorted(nodes[d, :mc], q) - 1
                                    if i_ < 0:
                                        i_ = 0
                                    elif i_ > mc - 2:
                                        i_ = mc - 2
                                    # direct index arithmetic can land one cell
                                    # off at boundaries; correct before blending
                                    if q < nodes[d, i_]:
                                        i_ -= 1
                                    elif q > nodes[d, i_ + 1]:
                                        i_ += 1
                                    if i_ < 0:
                                        i_ = 0
                                    elif i_ > mc - 2:
                                        i_ = mc - 2
                                    t_ = (q - nodes[d, i_]) / (nodes[d, i_ + 1] - nodes[d, i_])
                                idx[d] = i_
                                ww[d] = t_
                            v = 0.0
                            for corner in range(corners):
                                weight = 1.0
                                off = 0
                                for d in range(n):
                                    if corner & (1 << d):
                                        weight *= ww[d]
                                        off += (idx[d] + 1) * strides[d]
                                    else:
                                        weight *= 1.0 - ww[d]
                                        off += idx[d] * strides[d]
                                v += weight * flat_vals[off]
                            if cont_kind == CONT_GRID_EXPAFFINE:
                                v = (np.log(v) - tb) / tm
                        cont += probs[s] * v
                    return u_c2 + beta * cont

                def _cand(x, k, j, u_c_cur):
                    # candidate share x for coordinate (k, j); the rest of
                    # column j rescales proportionally to keep the sum at one
                    rho = (1.0 - x) / (1.0 - S[k, j])
                    lnrho = np.log(rho)
                    lnx2 = np.log(x)
                    u2 = u_c_cur
                    if k == 0:
                        u2 += theta_w[j] * (lnx2 - lnS[0, j])
                        for i in range(n):
                            g2[i] = g[i] + A[i, j] * lnrho
                    else:
                        u2 += theta_w[j] * lnrho
                        i0 = k - 1
                        for i in range(n):
                            if i == i0:
                                g2[i] = g[i] + A[i, j] * (lnx2 - lnS[k, j])
                            else:
                                g2[i] = g[i] + A[i, j] * lnrho
                    return _obj(u2)

                for d in range(n):
                    g2[d] = g[d]
                f_cur = _obj(u_c)

                for _sw in range(max_sweeps):
                    improve = 0.0
                    for j in range(n):
                        for k in range(ncoord):
                            rest = 1.0 - S[k, j]
                            if rest < 1e-300:
                                continue
                            a_ = sfloor[j] if k == 0 else 1e-15
                            b_ = 1.0 - (n + 1.0) * 1e-15
                            h = b_ - a_
                            c_ = b_ - INVPHI * h
                            d_ = a_ + INVPHI * h
                            fc = _cand(c_, k, j, u_c)
                            fd = _cand(d_, k, j, u_c)
                            for _g in range(n_golden):
                                if fc > fd:
                                    b_ = d_
                                    d_ = c_
                                    fd = fc
                                    h = b_ - a_
                                    c_ = b_ - INVPHI * h
                                    fc = _cand(c_, k, j, u_c)
                                else:
                                    a_ = c_
                                    c_ = d_
                                    fc = fd
                                    h = b_ - a_
                                    d_ = a_ + INVPHI * h
                                    fd = _cand(d_, k, j, u_c)
                            if fc > fd:
                                x_best = c_
                                f_best = fc
                            else:
                                x_best = d_
                                f_best = fd
                            if f_best > f_cur:
                                improve += f_best - f_cur
                                rho = (1.0 - x_best) / rest
                                lnrho = np.log(rho)
                                lnxb = np.log(x_best)
                                if k == 0:
                                    u_c += theta_w[j] * (lnxb - lnS[0, j])
                                    for i in range(n):
                                        g[i] += A[i, j] * lnrho
                                else:
                                    u_c += theta_w[j] * lnrho
                                    i0 = k - 1
                                    for i in range(n):
                                        if i == i0:
                                            g[i] += A[i, j] * (lnxb - lnS[k, j])
                                        else:
                                            g[i] += A[i, j] * lnrho
                                for kk in range(ncoord):
                                    if kk == k:
                                        S[kk, j] = x_best
                                        lnS[kk, j] = lnxb
                                    else:
                                        S[kk, j] *= rho
                                        lnS[kk, j] += lnrho
                                f_cur = f_best
                    if improve < tol_improve:
                        break
                if f_cur > best_val:
                    best_val = f_cur
                    for j in range(n):
                        for k in range(ncoord):
                            bestS[k, j] = S[k, j]
            values_out[node] = best_val
            for j in range(n):
                for k in range(ncoord):
                    shares_out[node, k, j] = bestS[k, j]

    return sweep
