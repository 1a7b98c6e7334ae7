"""Small-scale linear algebra used by the projection machinery.

Points of the ambient Hilbert space are plain numpy arrays of any shape
(real or complex).  They are treated as real vectors: the inner product is
``Re sum(x * conj(y))``.
"""

import numpy as np

from .exceptions import DegenerateTriple

__all__ = [
    "J",
    "K",
    "inner",
    "norm",
    "polar_unitary",
    "circumcenter",
    "colinear",
]

#: Row-swap matrix.
J = np.array([[0, 1], [1, 0]], dtype=complex)
#: Sign-flip ``diag(-1, 1)``; ``K @ A @ K`` negates the off-diagonal entries.
K = np.array([[-1, 0], [0, 1]], dtype=complex)

COLINEAR_TOL = 1e-12
_SINGULAR_TOL = 1e-14


def inner(x, y):
    """Real inner product ``Re sum(x * conj(y))`` of two same-shaped arrays."""
    return np.vdot(y, x).real


def norm(x):
    return np.sqrt(inner(x, x))


def polar_unitary(A):
    """Nearest unitary matrix (Frobenius norm) to a 2x2 matrix or a stack of them.

    Uses the closed form ``Q = (A + e^{i theta} adj(A)^H) / (s1 + s2)`` where
    ``det A = |det A| e^{i theta}`` and ``s1 + s2 = sqrt(|A|^2 + 2|det A|)`` is
    the sum of the singular values.  For rank-deficient input the free phase
    is fixed to ``theta = 0``, which selects the minimizer with ``det Q = 1``;
    the zero matrix maps to the identity.

    Parameters
    ----------
    A : array_like, shape (..., 2, 2)

    Returns
    -------
    Q : ndarray, shape (..., 2, 2), complex
    """
    A = np.asarray(A, dtype=complex)
    a, b = A[..., 0, 0], A[..., 0, 1]
    c, d = A[..., 1, 0], A[..., 1, 1]
    det = a * d - b * c
    fro2 = (np.abs(A) ** 2).sum(axis=(-2, -1))
    adet = np.abs(det)
    singular = adet <= _SINGULAR_TOL * fro2
    phase = np.where(singular, 1.0, det / np.where(singular, 1.0, adet))
    # e^{i theta} * adj(A)^H
    adjh = np.empty_like(A)
    adjh[..., 0, 0] = np.conj(d)
    adjh[..., 0, 1] = -np.conj(c)
    adjh[..., 1, 0] = -np.conj(b)
    adjh[..., 1, 1] = np.conj(a)
    scale = np.sqrt(fro2 + 2.0 * np.where(singular, 0.0, adet))
    zero = scale == 0.0
    Q = (A + phase[..., None, None] * adjh) / np.where(zero, 1.0, scale)[..., None, None]
    if np.any(zero):
        Q[zero] = np.eye(2)
    return Q


def colinear(x, y, z, tol=COLINEAR_TOL):
    """True when ``x, y, z`` lie on a common line (or coincide).

    With ``u = y - x`` and ``v = z - x`` the triple is colinear iff
    ``|u||v| = 0`` or ``<u, v>^2 >= (1 - tol) |u|^2 |v|^2``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = y - x
    v = z - x
    uu, vv, uv = inner(u, u), inner(v, v), inner(u, v)
    if uu == 0.0 or vv == 0.0:
        return True
    return uv * uv >= (1.0 - tol) * uu * vv


def circumcenter(x, y, z, tol=COLINEAR_TOL):
    """Point in the affine span of ``x, y, z`` equidistant from all three.

    Solves the 2x2 Gram system ``<c - p, q - p> = |q - p|^2 / 2``,
    ``<c - p, r - p> = |r - p|^2 / 2`` based at the vertex ``p`` opposite the
    longest side, which keeps thin triangles well conditioned.

    Raises
    ------
    DegenerateTriple
        If the triple is colinear per :func:`colinear` with the same ``tol``.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    z = np.asarray(z)
    if colinear(x, y, z, tol):
        raise DegenerateTriple("circumcenter undefined for colinear points")
    p, q, r = _by_opposite_side(x, y, z)
    u = q - p
    v = r - p
    uu, vv, uv = inner(u, u), inner(v, v), inner(u, v)
    det = uu * vv - uv * uv
    alpha = 0.5 * vv * (uu - uv) / det
    beta = 0.5 * uu * (vv - uv) / det
    return p + alpha * u + beta * v


def _by_opposite_side(x, y, z):
    # reorder so the first point faces the longest side
    a = inner(y - z, y - z)
    b = inner(x - z, x - z)
    c = inner(x - y, x - y)
    if a >= b and a >= c:
        return x, y, z
    if b >= c:
        return y, x, z
    return z, x, y
