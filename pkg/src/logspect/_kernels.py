"""Compiled inner loops of the L-ADMM solvers.

The arrays are updated in place; every iteration is the same sequence of
operations as written out in :mod:`logspect.solvers`.  Status codes:
0 = budget exhausted, 1 = converged, 2 = non-finite iterate.
"""

import math

import numpy as np
from numba import njit

_TINY_DEGREE = 1e-300


@njit(cache=True)
def _project_valid(X, out):
    m = X.shape[0]
    for i in range(m):
        out[i, i] = 0.0
        for j in range(i + 1, m):
            v = 0.5 * (X[i, j] + X[j, i])
            if v < 0.0:
                v = 0.0
            out[i, j] = v
            out[j, i] = v


@njit(cache=True)
def _objective(S, alpha):
    m = S.shape[0]
    tot = 0.0
    logs = 0.0
    for i in range(m):
        d = 0.0
        for j in range(m):
            d += S[i, j]
        if d <= _TINY_DEGREE:
            return math.inf
        tot += d
        logs += math.log(d)
    return tot - alpha * logs


@njit(cache=True)
def ladmm_rlogspect(S, AS, Zh, Lh, lam2, q, state, U, Ut, gap, alpha, delta, tau,
                    n_iters, eps_p, eps_d, adapt, adapt_every, max_changes,
                    changes, p_hist, d_hist, o_hist, h0, record_obj):
    """Run up to ``n_iters`` rLogSpecT iterations.

    ``state`` holds ``[rho, p_res, d_res]`` and is updated in place.
    Histories are written from index ``h0``.  Returns ``(iters, status)``.
    """
    m = S.shape[0]
    rho = state[0]
    X = np.empty((m, m))
    Gh = np.empty((m, m))
    Snew = np.empty((m, m))
    d = np.empty(m)
    dn = np.empty(m)
    for it in range(n_iters):
        # Z-update: project C S - S C + Lambda / rho onto the delta-ball
        nz2 = 0.0
        for i in range(m):
            for j in range(m):
                v = AS[i, j] + Lh[i, j] / rho
                X[i, j] = v
                nz2 += v * v
        nz = math.sqrt(nz2)
        shrink = 1.0
        if nz > delta:
            shrink = delta / nz
            # keep ||Z|| <= delta despite rounding
            nn = 0.0
            for i in range(m):
                for j in range(m):
                    nn += (X[i, j] * shrink) ** 2
            if math.sqrt(nn) > delta:
                shrink = shrink * (1.0 - 2.0 ** -52)
        for i in range(m):
            for j in range(m):
                Zh[i, j] = X[i, j] * shrink

        # q-update: positive root of q^2 - qt q - alpha / rho = 0
        c = 4.0 * alpha / rho
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += S[i, j]
            d[i] = s
            qt = s - lam2[i] / rho
            r = math.sqrt(qt * qt + c)
            if qt >= 0.0:
                q[i] = 0.5 * (qt + r)
            else:
                q[i] = 0.5 * c / (r - qt)

        # linearized S-update
        for i in range(m):
            for j in range(m):
                Gh[i, j] = gap[i, j] * (Lh[i, j] + rho * (AS[i, j] - Zh[i, j]))
        G = U @ (Gh @ Ut)
        step = 1.0 / (rho * tau)
        for i in range(m):
            row = 1.0 - lam2[i] + rho * (d[i] - q[i])
            for j in range(m):
                X[i, j] = S[i, j] - (G[i, j] + row) * step
        _project_valid(X, Snew)
        Sh = Ut @ (Snew @ U)

        # dual ascent and residuals
        p2 = 0.0
        dA2 = 0.0
        for i in range(m):
            for j in range(m):
                a = gap[i, j] * Sh[i, j]
                r1 = a - Zh[i, j]
                Lh[i, j] += rho * r1
                p2 += r1 * r1
                da = a - AS[i, j]
                dA2 += da * da
                AS[i, j] = a
        dd2 = 0.0
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += Snew[i, j]
            dn[i] = s
            r2 = q[i] - s
            lam2[i] += rho * r2
            p2 += r2 * r2
            dd = s - d[i]
            dd2 += dd * dd
        finite = True
        for i in range(m):
            for j in range(m):
                v = Snew[i, j]
                if not np.isfinite(v):
                    finite = False
                S[i, j] = v
        p_res = math.sqrt(p2)
        d_res = rho * math.sqrt(dA2 + dd2)
        state[1] = p_res
        state[2] = d_res
        p_hist[h0 + it] = p_res
        d_hist[h0 + it] = d_res
        if record_obj:
            o_hist[h0 + it] = _objective(S, alpha)
        if not finite or not np.isfinite(p_res) or not np.isfinite(d_res):
            state[0] = rho
            return it + 1, 2
        kk = h0 + it + 1
        if adapt and kk % adapt_every == 0 and changes[0] < max_changes:
            if p_res > 5.0 * d_res:
                rho = 2.0 * rho
                changes[0] += 1
            elif d_res > 5.0 * p_res:
                rho = 0.5 * rho
                changes[0] += 1
        state[0] = rho
        if p_res < eps_p and d_res < eps_d:
            return it + 1, 1
    return n_iters, 0


@njit(cache=True)
def _project_simplex(v, out):
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for k in range(n):
        css += u[k]
        t = (css - 1.0) / (k + 1)
        if u[k] - t > 0.0:
            theta = t
    for k in range(n):
        w = v[k] - theta
        out[k] = w if w > 0.0 else 0.0


@njit(cache=True)
def project_rspect(X, out):
    """Projection onto valid adjacency matrices with first row summing to 1."""
    m = X.shape[0]
    _project_valid(X, out)
    row = np.empty(m - 1)
    for j in range(1, m):
        row[j - 1] = 0.5 * (X[0, j] + X[j, 0])
    w = np.empty(m - 1)
    _project_simplex(row, w)
    for j in range(1, m):
        out[0, j] = w[j - 1]
        out[j, 0] = w[j - 1]


@njit(cache=True)
def ladmm_rspect(S, AS, Zh, Lh, state, U, Ut, gap, delta, tau, n_iters, eps_p, eps_d,
                 adapt, adapt_every, max_changes, changes, p_hist, d_hist, h0):
    """Run up to ``n_iters`` rSpecT iterations; ``state`` is
    ``[rho, p_res, d_res, step_res]``."""
    m = S.shape[0]
    rho = state[0]
    X = np.empty((m, m))
    Gh = np.empty((m, m))
    Snew = np.empty((m, m))
    for it in range(n_iters):
        nz2 = 0.0
        for i in range(m):
            for j in range(m):
                v = AS[i, j] + Lh[i, j] / rho
                X[i, j] = v
                nz2 += v * v
        nz = math.sqrt(nz2)
        shrink = delta / nz if nz > delta else 1.0
        for i in range(m):
            for j in range(m):
                Zh[i, j] = X[i, j] * shrink
                Gh[i, j] = gap[i, j] * (Lh[i, j] + rho * (AS[i, j] - Zh[i, j]))
        G = U @ (Gh @ Ut)
        step = 1.0 / (rho * tau)
        for i in range(m):
            for j in range(m):
                X[i, j] = S[i, j] - (G[i, j] + 1.0) * step
        project_rspect(X, Snew)
        Sh = Ut @ (Snew @ U)
        p2 = 0.0
        dA2 = 0.0
        ds2 = 0.0
        finite = True
        for i in range(m):
            for j in range(m):
                a = gap[i, j] * Sh[i, j]
                r1 = a - Zh[i, j]
                Lh[i, j] += rho * r1
                p2 += r1 * r1
                da = a - AS[i, j]
                dA2 += da * da
                AS[i, j] = a
                ds = Snew[i, j] - S[i, j]
                ds2 += ds * ds
                if not np.isfinite(Snew[i, j]):
                    finite = False
                S[i, j] = Snew[i, j]
        p_res = math.sqrt(p2)
        d_res = rho * math.sqrt(dA2)
        state[1] = p_res
        state[2] = d_res
        state[3] = rho * tau * math.sqrt(ds2)
        p_hist[h0 + it] = p_res
        d_hist[h0 + it] = d_res
        if not finite or not np.isfinite(p_res):
            state[0] = rho
            return it + 1, 2
        kk = h0 + it + 1
        if adapt and kk % adapt_every == 0 and changes[0] < max_changes:
            if p_res > 5.0 * d_res:
                rho = 2.0 * rho
                changes[0] += 1
            elif d_res > 5.0 * p_res:
                rho = 0.5 * rho
                changes[0] += 1
        state[0] = rho
        if p_res < eps_p and d_res < eps_d and state[3] < eps_d:
            return it + 1, 1
    return n_iters, 0


@njit(cache=True)
def _commutator_sq(Y, U, Ut, gap):
    """Return ``(||A(Y)||^2, A*A(Y))`` with ``A`` diagonal in the eigenbasis."""
    Yh = Ut @ (Y @ U)
    m = Y.shape[0]
    val = 0.0
    for i in range(m):
        for j in range(m):
            g = gap[i, j]
            a = g * Yh[i, j]
            val += a * a
            Yh[i, j] = g * a
    return val, U @ (Yh @ Ut)


@njit(cache=True)
def fista_delta_min(Y, U, Ut, gap, max_iters, tol):
    """Accelerated projected gradient for ``min 1/2 ||A(B y)||^2`` over the
    rSpecT set, with ``B y`` stored as the symmetric matrix ``Y``.

    ``||gap|| <= 1`` is assumed, so the gradient in ``y`` is 2-Lipschitz and
    the step ``1/2`` becomes ``Y - A*A(Y)`` in matrix form.  Momentum is
    restarted whenever the objective goes up.  Returns
    ``(best_value, iters, converged)`` and leaves the best point in ``Y``.
    """
    m = Y.shape[0]
    X = Y.copy()
    Xprev = Y.copy()
    V = Y.copy()
    Xn = np.empty((m, m))
    best = np.inf
    fprev = np.inf
    t = 1.0
    for it in range(max_iters):
        f, G = _commutator_sq(V, U, Ut, gap)
        for i in range(m):
            for j in range(m):
                Xn[i, j] = V[i, j] - G[i, j]
        project_rspect(Xn.copy(), Xn)
        # gradient mapping in edge coordinates: 2 * ||Xn - V|| over pairs
        gm = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                d = Xn[i, j] - V[i, j]
                gm += d * d
        gm = 2.0 * math.sqrt(gm)
        fx, _ = _commutator_sq(Xn, U, Ut, gap)
        if fx < best:
            best = fx
            for i in range(m):
                for j in range(m):
                    Y[i, j] = Xn[i, j]
        if gm < tol:
            return best, it + 1, True
        if fx > fprev:
            t = 1.0
            for i in range(m):
                for j in range(m):
                    V[i, j] = X[i, j]
            fprev = np.inf
            continue
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / tn
        for i in range(m):
            for j in range(m):
                Xprev[i, j] = X[i, j]
                X[i, j] = Xn[i, j]
                V[i, j] = Xn[i, j] + beta * (Xn[i, j] - Xprev[i, j])
        t = tn
        fprev = fx
    return best, max_iters, False
