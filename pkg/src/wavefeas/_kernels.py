"""Compiled iteration kernels for :class:`~wavefeas.constraints.WaveletProblem`.

These mirror the numpy implementations in :mod:`wavefeas.constraints` and
:mod:`wavefeas.solvers` operation for operation; the numpy versions remain the
reference and the test-suite checks agreement step by step.
"""

import numpy as np
from numba import njit

from .algebra import COLINEAR_TOL
from .constraints import SYMMETRIC

_ALG_CODE = {"dr": 0, "gcrm": 1, "lt": 2}


@njit(cache=True)
def _polar_into(a, b, c, d, out, idx0, idx1):
    det = a * d - b * c
    fro2 = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    adet = abs(det)
    if adet <= 1e-14 * fro2:
        ph = 1.0 + 0.0j
        adet = 0.0
    else:
        ph = det / adet
    scale = np.sqrt(fro2 + 2.0 * adet)
    if scale == 0.0:
        out[idx0, idx1, 0, 0] = 1.0
        out[idx0, idx1, 0, 1] = 0.0
        out[idx0, idx1, 1, 0] = 0.0
        out[idx0, idx1, 1, 1] = 1.0
        return
    out[idx0, idx1, 0, 0] = (a + ph * np.conj(d)) / scale
    out[idx0, idx1, 0, 1] = (b - ph * np.conj(c)) / scale
    out[idx0, idx1, 1, 0] = (c - ph * np.conj(b)) / scale
    out[idx0, idx1, 1, 1] = (d + ph * np.conj(a)) / scale


@njit(cache=True)
def _full(free, h):
    U = np.empty((2 * h, 2, 2), dtype=np.complex128)
    for j in range(h):
        for q in range(2):
            U[j, 0, q] = free[j, 0, q]
            U[j, 1, q] = free[j, 1, q]
            U[j + h, 0, q] = free[j, 1, q]
            U[j + h, 1, q] = free[j, 0, q]
    return U


@njit(cache=True)
def _shift(free, S, h):
    U = _full(free, h)
    M = 2 * h
    out = np.zeros((h, 2, 2), dtype=np.complex128)
    for j in range(h):
        for l in range(M):
            s = S[j, l]
            for p in range(2):
                for q in range(2):
                    out[j, p, q] += s * U[l, p, q]
    return out


@njit(cache=True)
def _project_ellipsoid(v, Q, s, gamma):
    # v: real 8-vector; Q, s: eigen-decomposition of L^T L
    n = v.shape[0]
    z = Q.T @ v
    lv = 0.0
    for i in range(n):
        lv += s[i] * z[i] * z[i]
    if lv <= gamma * gamma:
        return v.copy()
    g2 = gamma * gamma
    lo = 0.0
    hi = 1.0
    while True:
        f = 0.0
        for i in range(n):
            f += s[i] * z[i] * z[i] / (1.0 + hi * s[i]) ** 2
        if f - g2 <= 0.0:
            break
        lo = hi
        hi *= 2.0
    lam = lo
    for _ in range(200):
        f = 0.0
        df = 0.0
        for i in range(n):
            den = 1.0 + lam * s[i]
            f += s[i] * z[i] * z[i] / (den * den)
            df += -2.0 * s[i] * s[i] * z[i] * z[i] / (den * den * den)
        val = f - g2
        if val > 0:
            lo = lam
        else:
            hi = lam
        if df < 0:
            step = lam - val / df
        else:
            step = hi
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        if abs(step - lam) <= 1e-14 * max(1.0, lam) or hi - lo <= 1e-14 * max(1.0, hi):
            lam = step
            break
        lam = step
    w = np.empty(n)
    for i in range(n):
        w[i] = z[i] / (1.0 + lam * s[i])
    return Q @ w


@njit(cache=True)
def _project_V(x, P):
    (kind, h, gamma, Splus, Sminus, P3, sig_idx,
     pairs, cph, self_idx, self_Q, self_s,
     i1, r1, i2, r2, sign, target) = P
    out = np.empty_like(x)
    # B1
    for j in range(h):
        _polar_into(x[0, j, 0, 0], x[0, j, 0, 1], x[0, j, 1, 0], x[0, j, 1, 1], out, 0, j)
    a22 = x[0, 0, 1, 1]
    m = abs(a22)
    z = a22 / m if m >= 1e-14 else 1.0 + 0.0j
    out[0, 0, 0, 0] = 1.0
    out[0, 0, 0, 1] = 0.0
    out[0, 0, 1, 0] = 0.0
    out[0, 0, 1, 1] = z
    # B2
    sh = _shift(x[1], Splus, h)
    tmp = np.empty((1, h, 2, 2), dtype=np.complex128)
    for j in range(h):
        _polar_into(sh[j, 0, 0], sh[j, 0, 1], sh[j, 1, 0], sh[j, 1, 1], tmp, 0, j)
    out[1] = _shift(tmp[0], Sminus, h)
    # B4 then B3
    U = _full(x[2], h)
    b4 = np.empty(4 * h, dtype=np.complex128)
    for j in range(h):
        k = sig_idx[j]
        for p in range(2):
            for q in range(2):
                b4[4 * j + 2 * p + q] = 0.5 * (x[2, j, p, q] + np.conj(U[k, p, q]))
    b34 = P3 @ b4
    for j in range(h):
        for p in range(2):
            for q in range(2):
                out[2, j, p, q] = b34[4 * j + 2 * p + q]
    # B5
    y = x[3].copy()
    if kind == 0:
        for t in range(pairs.shape[0]):
            j = pairs[t]
            jp = h - j
            c = cph[j]
            # A = U_j, B = U_{M-j} = J U_{M/2-j};  d = A - c K B K
            d00 = y[j, 0, 0] - c * y[jp, 1, 0]
            d01 = y[j, 0, 1] + c * y[jp, 1, 1]
            d10 = y[j, 1, 0] + c * y[jp, 0, 0]
            d11 = y[j, 1, 1] - c * y[jp, 0, 1]
            nd = np.sqrt(abs(d00) ** 2 + abs(d01) ** 2 + abs(d10) ** 2 + abs(d11) ** 2)
            if nd > gamma:
                tt = 0.5 * (nd - gamma) / nd
                cc = np.conj(c)
                y[j, 0, 0] -= tt * d00
                y[j, 0, 1] -= tt * d01
                y[j, 1, 0] -= tt * d10
                y[j, 1, 1] -= tt * d11
                # B += tt conj(c) K d K; free[jp] = J B
                y[jp, 1, 0] += tt * cc * d00
                y[jp, 1, 1] -= tt * cc * d01
                y[jp, 0, 0] -= tt * cc * d10
                y[jp, 0, 1] += tt * cc * d11
        v = np.empty(8)
        for t in range(self_idx.shape[0]):
            idx = self_idx[t]
            for p in range(2):
                for q in range(2):
                    v[2 * (2 * p + q)] = y[idx, p, q].real
                    v[2 * (2 * p + q) + 1] = y[idx, p, q].imag
            w = _project_ellipsoid(v, self_Q[t], self_s[t], gamma)
            for p in range(2):
                for q in range(2):
                    y[idx, p, q] = w[2 * (2 * p + q)] + 1j * w[2 * (2 * p + q) + 1]
    else:
        for t in range(i1.shape[0]):
            u1 = y[i1[t], r1[t], 0]
            u2 = y[i2[t], r2[t], 0]
            d = u1 + sign * u2 - target[t]
            mag = abs(d)
            if mag > gamma:
                delta = (mag - gamma) / mag * d
                y[i1[t], r1[t], 0] = u1 - 0.5 * delta
                y[i2[t], r2[t], 0] = u2 - 0.5 * sign * delta
    out[3] = y
    return out


@njit(cache=True)
def _project_W(x):
    m = (x[0] + x[1] + x[2] + x[3]) * 0.25
    out = np.empty_like(x)
    for i in range(4):
        out[i] = m
    return out


@njit(cache=True)
def _inner(a, b):
    s = 0.0
    af = a.ravel()
    bf = b.ravel()
    for i in range(af.shape[0]):
        s += af[i].real * bf[i].real + af[i].imag * bf[i].imag
    return s


@njit(cache=True)
def _gap(x, P):
    w = _project_W(x)
    d = _project_V(w, P) - w
    return np.sqrt(2.0 * _inner(d, d))


@njit(cache=True)
def _colinear(x, y, z, tol):
    u = y - x
    v = z - x
    uu = _inner(u, u)
    vv = _inner(v, v)
    uv = _inner(u, v)
    if uu == 0.0 or vv == 0.0:
        return True
    return uv * uv >= (1.0 - tol) * uu * vv


@njit(cache=True)
def _circumcenter(x, y, z):
    a = _inner(y - z, y - z)
    b = _inner(x - z, x - z)
    c = _inner(x - y, x - y)
    if a >= b and a >= c:
        p, q, r = x, y, z
    elif b >= c:
        p, q, r = y, x, z
    else:
        p, q, r = z, x, y
    u = q - p
    v = r - p
    uu = _inner(u, u)
    vv = _inner(v, v)
    uv = _inner(u, v)
    det = uu * vv - uv * uv
    alpha = 0.5 * vv * (uu - uv) / det
    beta = 0.5 * uu * (vv - uv) / det
    return p + alpha * u + beta * v


@njit(cache=True)
def _dr(x, P):
    pv = _project_V(x, P)
    pw = _project_W(2.0 * pv - x)
    return x - pv + pw


@njit(cache=True)
def _gcrm(x, P, tol):
    pv = _project_V(x, P)
    r1 = 2.0 * pv - x
    pw = _project_W(r1)
    r2 = 2.0 * pw - r1
    if _colinear(x, r1, r2, tol):
        return x - pv + pw
    return _circumcenter(x, r1, r2)


@njit(cache=True)
def _lt(x, P, tol):
    Tx = _dr(x, P)
    T2x = _dr(Tx, P)
    d = T2x - Tx
    dd = _inner(d, d)
    scale = 1.0 + np.sqrt(_inner(x, x))
    if dd <= (1e-14 * scale) ** 2:
        p = 2.0 * d + x
    else:
        coef = _inner(Tx - x, d) / dd
        p = (2.0 + 2.0 * coef) * d + x
    y = 2.0 * Tx - x
    if _colinear(x, y, p, tol):
        return T2x
    return _circumcenter(x, y, p)


@njit(cache=True)
def _run(x, g, P, alg, tol, budget, coltol, trace):
    it = 0
    while g >= tol and it < budget:
        if alg == 0:
            x = _dr(x, P)
        elif alg == 1:
            x = _gcrm(x, P, coltol)
        else:
            x = _lt(x, P, coltol)
        g = _gap(x, P)
        if trace.shape[0] > 0:
            trace[it] = g
        it += 1
    return x, it, g


def kernel_params(problem):
    """Pack the precomputed operators of a WaveletProblem for the kernels.

    Returns ``None`` when the problem has no compiled path.
    """
    from .ensemble import _shift_matrix

    spec = problem.spec
    M, h = problem.M, problem.half
    P3 = problem._b3
    # the regularity projector is complex-linear: recover its complex form
    P3c = np.ascontiguousarray(P3[0::2, 0::2] + 1j * P3[1::2, 0::2])
    empty_i = np.zeros(0, dtype=np.int64)
    if spec.kind == SYMMETRIC:
        if problem._omega_kind == "general":
            return None
        kind = 0
        pairs = np.array(problem._pairs, dtype=np.int64)
        cph = np.asarray(problem._c, dtype=np.complex128)
        self_idx = np.array([i for i, _ in problem._self_maps], dtype=np.int64)
        Qs, ss = [], []
        for _, L in problem._self_maps:
            s, Q = np.linalg.eigh(L.T @ L)
            Qs.append(Q)
            ss.append(np.clip(s, 0.0, None))
        self_Q = np.ascontiguousarray(np.array(Qs))
        self_s = np.ascontiguousarray(np.array(ss))
        i1 = r1 = i2 = r2 = empty_i
        sign = 1.0
        target = np.zeros(0, dtype=np.complex128)
    else:
        kind = 1
        pairs = empty_i
        cph = np.zeros(0, dtype=np.complex128)
        self_idx = empty_i
        self_Q = np.zeros((0, 8, 8))
        self_s = np.zeros((0, 8))
        i1, r1 = (np.asarray(a, dtype=np.int64) for a in problem._u1)
        i2, r2 = (np.asarray(a, dtype=np.int64) for a in problem._u2)
        sign = float(problem._sign)
        target = np.asarray(problem._target, dtype=np.complex128)
    return (
        kind, h, float(spec.gamma),
        np.ascontiguousarray(_shift_matrix(M, 1)), np.ascontiguousarray(_shift_matrix(M, -1)),
        P3c, np.asarray(problem._sigma_idx, dtype=np.int64),
        pairs, cph, self_idx, self_Q, self_s,
        i1, r1, i2, r2, sign, target,
    )


class FastProblem:
    """Compiled counterpart of a WaveletProblem with the same step interface."""

    def __init__(self, problem, params):
        self.problem = problem
        self.spec = problem.spec
        self.params = params

    def project_V(self, x):
        return _project_V(np.ascontiguousarray(x, dtype=np.complex128), self.params)

    def project_W(self, x):
        return _project_W(np.ascontiguousarray(x, dtype=np.complex128))

    norm = staticmethod(lambda x: np.sqrt(2.0 * _inner(x, x)))

    def gap(self, x):
        return _gap(np.ascontiguousarray(x, dtype=np.complex128), self.params)

    def dr_step(self, x):
        return _dr(np.ascontiguousarray(x, dtype=np.complex128), self.params)

    def gcrm_step(self, x, colinear_tol=COLINEAR_TOL):
        return _gcrm(np.ascontiguousarray(x, dtype=np.complex128), self.params, colinear_tol)

    def lt_step(self, x, colinear_tol=COLINEAR_TOL):
        return _lt(np.ascontiguousarray(x, dtype=np.complex128), self.params, colinear_tol)

    def run(self, x, g, algorithm, tol, budget, colinear_tol, record_trace=False):
        trace = np.empty(max(budget, 0) if record_trace else 0)
        x, it, g = _run(
            np.ascontiguousarray(x, dtype=np.complex128), g, self.params,
            _ALG_CODE[algorithm], tol, budget, colinear_tol, trace,
        )
        return x, it, g, (trace[:it].tolist() if record_trace else None)
