"""Constraint sets for the wavelet feasibility problems and their projections.

All projections act on free arrays of shape ``(M/2, 2, 2)`` (see
:mod:`wavefeas.ensemble`) and return new arrays; inputs are never modified.
Distances are measured on the full sample view, which is a uniform rescaling
of the free coordinates, so nearest points computed on free coordinates are
nearest points of the consistent ensembles.

The sets, for samples ``U_j = U(j/M)``:

``B1``
    ``U_0 = diag(1, z)`` with ``|z| = 1`` and every ``U_j`` unitary.
``B2``
    The samples at the half-shifted nodes ``(j + 1/2)/M`` are unitary.
``B3``
    Regularity: ``sum_k alpha[l, k] U_k[0, 1] = 0`` for ``l = 0..D``.
``B4``
    Real-valued filters: ``U_j = conj(U_{-j})``.
``B5`` (symmetric)
    ``|U_j - c_j K U_{M-j} K| <= gamma`` for ``j = 1..M/2``.
``B5`` (cardinal)
    ``|U_j[0,0] + (-1)^P U_{j+M/2}[0,0] - exp(2 pi i P j / M)| <= gamma``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import J, K, polar_unitary
from .ensemble import check_M, full, half_shift, half_shift_inverse
from .exceptions import RankDeficiency

__all__ = [
    "ProblemSpec",
    "WaveletProblem",
    "project_B1",
    "project_B2",
    "project_B3",
    "project_B4",
    "project_B34",
    "project_B5_sym",
    "project_B5_card",
    "project_V",
    "project_W",
    "reflect",
    "regularity_functionals",
    "reality_involution",
    "symmetry_phases",
    "symmetry_defects",
    "cardinality_defects",
    "project_ellipsoid",
]

SYMMETRIC = "sym"
CARDINAL = "card"
_PHASE_MULT = {"4pi": 4, "2pi": 2}


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters of a wavelet feasibility problem.

    Parameters
    ----------
    kind : {'sym', 'card'}
        Near symmetry or near cardinality.
    M : int
        Number of samples (even, >= 4); filters have ``M`` taps.
    D : int
        Regularity order, ``0 <= D <= (M - 2) / 2``.
    gamma : float
        Slack of the near-symmetry / near-cardinality set.
    P : float, optional
        Symmetry centre (real, in ``(0, M-1)``) or cardinality point (integer
        in ``[0, M-1]``).  Defaults to 2 for ``'sym'`` and 1 for ``'card'``.
    symmetry_phase : {'4pi', '2pi'}
        Phase ``exp(4 pi i P j / M)`` (default) or ``exp(2 pi i P j / M)`` in
        the symmetry defect.
    """

    kind: str = SYMMETRIC
    M: int = 6
    D: int = 1
    gamma: float = 0.5
    P: float = None
    symmetry_phase: str = "4pi"

    def __post_init__(self):
        if self.kind not in (SYMMETRIC, CARDINAL):
            raise ValueError(f"kind must be 'sym' or 'card', got {self.kind!r}")
        object.__setattr__(self, "M", check_M(self.M))
        if int(self.D) != self.D or not 0 <= self.D <= (self.M - 2) // 2:
            raise ValueError(f"D must be an integer in [0, {(self.M - 2) // 2}], got {self.D!r}")
        object.__setattr__(self, "D", int(self.D))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.symmetry_phase not in _PHASE_MULT:
            raise ValueError("symmetry_phase must be '4pi' or '2pi'")
        P = self.P
        if P is None:
            P = 2 if self.kind == SYMMETRIC else 1
        if self.kind == SYMMETRIC:
            if not 0 < P < self.M - 1:
                raise ValueError(f"symmetry centre P must lie in (0, {self.M - 1}), got {P!r}")
            P = float(P) if int(P) != P else int(P)
        else:
            if int(P) != P or not 0 <= P <= self.M - 1:
                raise ValueError(f"cardinality point P must be an integer in [0, {self.M - 1}]")
            P = int(P)
        object.__setattr__(self, "P", P)

    @classmethod
    def symmetric(cls, **kwargs):
        return cls(kind=SYMMETRIC, **kwargs)

    @classmethod
    def cardinal(cls, **kwargs):
        return cls(kind=CARDINAL, **kwargs)

    def to_dict(self):
        return {
            "kind": self.kind,
            "M": self.M,
            "D": self.D,
            "gamma": self.gamma,
            "P": self.P,
            "symmetry_phase": self.symmetry_phase,
        }


# ---------------------------------------------------------------------------
# real/complex coordinate helpers


def _to_real(free):
    return np.ascontiguousarray(free, dtype=complex).reshape(-1).view(np.float64)


def _from_real(vec, shape):
    return np.ascontiguousarray(vec).view(complex).reshape(shape)


def _real_matrix(func, n_in):
    """Real matrix of a real-linear map on complex arrays of ``n_in`` entries."""
    cols = []
    for i in range(2 * n_in):
        e = np.zeros(2 * n_in)
        e[i] = 1.0
        cols.append(_to_real(func(e.view(complex))))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# regularity (B3) and reality (B4)


def regularity_functionals(spec):
    """Real matrix of the regularity functionals on flattened free coordinates.

    Functional ``l`` is ``sum_k alpha[l, k] * U_k[0, 1]`` with
    ``alpha[l, k] = sum_j j**l * exp(-2 pi i k j / M)``.  Each complex
    functional contributes two rows (real and imaginary part); columns follow
    the interleaved ``(re, im)`` layout of ``free.reshape(-1)``.

    Returns
    -------
    A : ndarray, shape (2 * (D + 1), 4 * M)
    alpha : ndarray, shape (D + 1, M), complex
    """
    M, D = spec.M, spec.D
    half = M // 2
    j = np.arange(M)
    alpha = np.array(
        [((j.astype(float) ** ell)[None, :] * np.exp(-2j * np.pi * np.outer(j, j) / M)).sum(axis=1)
         for ell in range(D + 1)]
    )
    coef = np.zeros((D + 1, half, 2, 2), dtype=complex)
    for k in range(M):
        # full-view entry [0, 1] of sample k lives at free[k][0, 1] or free[k - M/2][1, 1]
        if k < half:
            coef[:, k, 0, 1] += alpha[:, k]
        else:
            coef[:, k - half, 1, 1] += alpha[:, k]
    a = coef.reshape(D + 1, -1)
    rows = np.empty((2 * (D + 1), 4 * M))
    rows[0::2, 0::2] = a.real
    rows[0::2, 1::2] = -a.imag
    rows[1::2, 0::2] = a.imag
    rows[1::2, 1::2] = a.real
    return rows, alpha


def _regularity_projector(spec):
    A, _ = regularity_functionals(spec)
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    G = A @ A.T
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] < 1e-10 * s[0]:
        raise RankDeficiency(
            f"regularity functionals are dependent for M={spec.M}, D={spec.D}"
        )
    P = np.eye(A.shape[1]) - A.T @ np.linalg.solve(G, A)
    P.setflags(write=False)
    return P


def reality_involution(free):
    """``sigma(U)_j = conj(U_{-j})``; an isometric involution of consistent ensembles."""
    M = 2 * free.shape[-3]
    idx = (-np.arange(M // 2)) % M
    return np.conj(full(free)[..., idx, :, :])


# ---------------------------------------------------------------------------
# near symmetry (B5 sym)


def symmetry_phases(spec):
    """Unimodular phases ``c_j`` for ``j = 0..M/2``."""
    mult = _PHASE_MULT[spec.symmetry_phase]
    j = np.arange(spec.M // 2 + 1)
    return np.exp(1j * np.pi * mult * spec.P * j / spec.M)


def symmetry_defects(free, spec):
    """Matrices ``U_j - c_j K U_{M-j} K`` for ``j = 1..M/2``."""
    U = full(free)
    M = spec.M
    c = symmetry_phases(spec)
    return np.array([U[j] - c[j] * (K @ U[M - j] @ K) for j in range(1, M // 2 + 1)])


def cardinality_defects(free, spec):
    """Scalars ``U_j[0,0] + (-1)^P U_{j+M/2}[0,0] - exp(2 pi i P j/M)``, ``j = 1..M/2``."""
    U = full(free)
    M, P = spec.M, spec.P
    j = np.arange(1, M // 2 + 1)
    return U[j, 0, 0] + (-1) ** P * U[(j + M // 2) % M, 0, 0] - np.exp(2j * np.pi * P * j / M)


def project_ellipsoid(x, L, gamma, tol=1e-14, max_iter=200):
    """Project real vector ``x`` onto ``{y : |L y| <= gamma}``.

    Diagonalizes ``L^T L`` and solves the secular equation
    ``sum s_i z_i^2 / (1 + lam s_i)^2 = gamma^2`` for the multiplier by Newton's
    method safeguarded with bisection.
    """
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(L @ x) <= gamma:
        return x.copy()
    s, Q = np.linalg.eigh(L.T @ L)
    s = np.clip(s, 0.0, None)
    z = Q.T @ x
    w = s * z * z
    g2 = gamma * gamma

    def f(lam):
        return (w / (1.0 + lam * s) ** 2).sum() - g2

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
    lam = lo
    for _ in range(max_iter):
        val = f(lam)
        if val > 0:
            lo = lam
        else:
            hi = lam
        deriv = (-2.0 * w * s / (1.0 + lam * s) ** 3).sum()
        step = lam - val / deriv if deriv < 0 else hi
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if abs(step - lam) <= tol * max(1.0, lam) or hi - lo <= tol * max(1.0, hi):
            lam = step
            break
        lam = step
    return Q @ (z / (1.0 + lam * s))


@lru_cache(maxsize=None)
def _problem(spec):
    return WaveletProblem(spec)


class WaveletProblem:
    """Projections for one :class:`ProblemSpec`, with precomputed operators.

    The instance is immutable after construction and safe to share.
    """

    def __init__(self, spec):
        self.spec = spec
        M = spec.M
        self.M = M
        self.half = M // 2
        self.shape = (self.half, 2, 2)
        self._b3 = _regularity_projector(spec)
        self._sigma_idx = (-np.arange(self.half)) % M
        if spec.kind == SYMMETRIC:
            self._init_symmetric()
        else:
            self._init_cardinal()

    # -- setup -------------------------------------------------------------

    def _init_symmetric(self):
        spec, M, half = self.spec, self.M, self.half
        c = symmetry_phases(spec)
        self._c = c
        omega = c[1] * c[half - 1] if half > 1 else 1.0
        # pairs (j, M/2 - j) share free matrices; the two defects are
        # orthogonal when omega = 1 and coincide when omega = -1
        self._omega_kind = (
            "orthogonal" if abs(omega - 1) < 1e-12 else "same" if abs(omega + 1) < 1e-12 else "general"
        )
        self._pairs = [j for j in range(1, half) if j != half - j]
        self._self_maps = []
        if half % 2 == 0:
            j = half // 2
            cj = c[j]
            L = _real_matrix(lambda F: (F.reshape(2, 2) - cj * (K @ (J @ F.reshape(2, 2)) @ K)).reshape(-1), 4)
            self._self_maps.append((j, L))
        cm = c[half]
        L0 = _real_matrix(lambda F: (J @ F.reshape(2, 2) - cm * (K @ J @ F.reshape(2, 2) @ K)).reshape(-1), 4)
        self._self_maps.append((0, L0))

    def _init_cardinal(self):
        M, half, P = self.M, self.half, self.spec.P
        j = np.arange(1, half + 1)
        n1 = j % M
        n2 = (j + half) % M
        # full-view entry [0, 0] of sample n is free[n mod M/2][n >= M/2, 0]
        self._u1 = (n1 % half, (n1 >= half).astype(int))
        self._u2 = (n2 % half, (n2 >= half).astype(int))
        self._sign = (-1) ** P
        self._target = np.exp(2j * np.pi * P * j / M)

    # -- individual sets ---------------------------------------------------

    def project_B1(self, free):
        out = polar_unitary(free)
        a22 = free[0, 1, 1]
        mag = abs(a22)
        z = a22 / mag if mag >= 1e-14 else 1.0
        out[0] = np.array([[1.0, 0.0], [0.0, z]])
        return out

    def project_B2(self, free):
        shifted = half_shift(free)
        return half_shift_inverse(polar_unitary(shifted))

    def project_B3(self, free):
        return _from_real(self._b3 @ _to_real(free), free.shape)

    def project_B4(self, free):
        sig = np.conj(full(free)[self._sigma_idx])
        return 0.5 * (free + sig)

    def project_B34(self, free):
        return self.project_B3(self.project_B4(free))

    def _sym_pair(self, out, j):
        """Closed-form projection for defect ``j`` acting on ``(U_j, U_{M-j})``."""
        jp = self.half - j
        c = self._c[j]
        A = out[j]
        B = out[jp][::-1, :]  # U_{M-j} = J U_{M/2-j}
        d = A - c * (K @ B @ K)
        nd = np.sqrt((np.abs(d) ** 2).sum())
        g = self.spec.gamma
        if nd <= g:
            return
        t = (nd - g) / nd
        out[j] = A - 0.5 * t * d
        out[jp] = (B + 0.5 * t * np.conj(c) * (K @ d @ K))[::-1, :]

    def project_B5_sym(self, free):
        out = np.array(free, dtype=complex)
        if self._omega_kind == "general":
            self._sym_pairs_dykstra(out)
        else:
            for j in self._pairs:
                self._sym_pair(out, j)
        g = self.spec.gamma
        for idx, L in self._self_maps:
            out[idx] = _from_real(project_ellipsoid(_to_real(out[idx]), L, g), (2, 2))
        return out

    def _sym_pairs_dykstra(self, out, tol=1e-15, max_iter=100000):
        for j in self._pairs:
            jp = self.half - j
            if j > jp:
                continue
            # alternate the two closed-form projections with Dykstra corrections
            x = np.array([out[j], out[jp]])
            p = np.zeros_like(x)
            q = np.zeros_like(x)
            for _ in range(max_iter):
                y = x + p
                tmp = y.copy()
                buf = out.copy()
                buf[j], buf[jp] = tmp
                self._sym_pair(buf, j)
                y_new = np.array([buf[j], buf[jp]])
                p = y - y_new
                z = y_new + q
                buf[j], buf[jp] = z
                self._sym_pair(buf, jp)
                x_new = np.array([buf[j], buf[jp]])
                q = z - x_new
                if np.abs(x_new - x).max() <= tol:
                    x = x_new
                    break
                x = x_new
            out[j], out[jp] = x

    def project_B5_card(self, free):
        out = np.array(free, dtype=complex)
        i1, r1 = self._u1
        i2, r2 = self._u2
        u1 = out[i1, r1, 0]
        u2 = out[i2, r2, 0]
        d = u1 + self._sign * u2 - self._target
        mag = np.abs(d)
        g = self.spec.gamma
        over = mag > g
        if np.any(over):
            delta = np.where(over, (mag - g) / np.where(over, mag, 1.0), 0.0) * d
            out[i1, r1, 0] = u1 - 0.5 * delta
            out[i2, r2, 0] = u2 - 0.5 * self._sign * delta
        return out

    def project_B5(self, free):
        if self.spec.kind == SYMMETRIC:
            return self.project_B5_sym(free)
        return self.project_B5_card(free)

    # -- product space -----------------------------------------------------

    def project_V(self, x):
        return np.stack(
            [
                self.project_B1(x[0]),
                self.project_B2(x[1]),
                self.project_B34(x[2]),
                self.project_B5(x[3]),
            ]
        )

    @staticmethod
    def project_W(x):
        return np.broadcast_to(x.mean(axis=0), x.shape).copy()

    @staticmethod
    def norm(x):
        """Norm on the full sample view (``sqrt(2)`` times the Frobenius norm)."""
        return np.sqrt(2.0) * np.sqrt((x.real ** 2).sum() + (x.imag ** 2).sum())

    def gap(self, x):
        """``|P_V P_W x - P_W x|``; below tolerance, ``P_W x`` is feasible."""
        w = self.project_W(x)
        return self.norm(self.project_V(w) - w)


# ---------------------------------------------------------------------------
# functional surface


def project_B1(free):
    free = np.asarray(free, dtype=complex)
    return _problem(ProblemSpec(M=2 * len(free), D=0)).project_B1(free)


def project_B2(free):
    free = np.asarray(free, dtype=complex)
    return _problem(ProblemSpec(M=2 * len(free), D=0)).project_B2(free)


def project_B3(free, spec):
    return _problem(spec).project_B3(np.asarray(free, dtype=complex))


def project_B4(free):
    free = np.asarray(free, dtype=complex)
    return _problem(ProblemSpec(M=2 * len(free), D=0)).project_B4(free)


def project_B34(free, spec):
    return _problem(spec).project_B34(np.asarray(free, dtype=complex))


def project_B5_sym(free, spec):
    if spec.kind != SYMMETRIC:
        raise ValueError("project_B5_sym needs a symmetric ProblemSpec")
    return _problem(spec).project_B5_sym(np.asarray(free, dtype=complex))


def project_B5_card(free, spec):
    if spec.kind != CARDINAL:
        raise ValueError("project_B5_card needs a cardinal ProblemSpec")
    return _problem(spec).project_B5_card(np.asarray(free, dtype=complex))


def project_V(x, spec):
    return _problem(spec).project_V(np.asarray(x, dtype=complex))


def project_W(x):
    return WaveletProblem.project_W(np.asarray(x))


def reflect(project, x):
    """Reflector ``2 P(x) - x`` of a projection ``P``."""
    return 2.0 * project(x) - x
