"""Independent reference computations shared by the tests.

Nothing here calls the projection code under test: set memberships and linear
constraints are evaluated straight from their definitions.
"""

import numpy as np
import scipy.linalg

from wavefeas.algebra import K


def to_real(free):
    return np.concatenate([free.real.ravel(), free.imag.ravel()])


def to_complex(vec, shape=(3, 2, 2)):
    n = vec.size // 2
    return (vec[:n] + 1j * vec[n:]).reshape(shape)


def linear_real_matrix(func, shape=(3, 2, 2)):
    """Real matrix of a real-linear map, column by column."""
    n = int(np.prod(shape))
    cols = []
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1
        cols.append(to_real(func(to_complex(e, shape))))
    return np.column_stack(cols)


def samples(free):
    """All M samples, U_{j + M/2} = J U_j spelled out."""
    free = np.asarray(free)
    return np.concatenate([free, free[..., [1, 0], :]], axis=-3)


def regularity_values(free, spec):
    """sum_k alpha_lk U_k[0, 1] with alpha_lk = sum_j j^l exp(-2 pi i k j / M)."""
    U = samples(free)
    M = spec.M
    out = []
    for ell in range(spec.D + 1):
        alpha = [sum(j**ell * np.exp(-2j * np.pi * k * j / M) for j in range(M)) for k in range(M)]
        out.append(sum(alpha[k] * U[k][0, 1] for k in range(M)))
    return np.array(out)


def regularity_rows(spec):
    shape = (spec.M // 2, 2, 2)
    return linear_real_matrix(
        lambda F: np.concatenate([regularity_values(F, spec).real, regularity_values(F, spec).imag]), shape
    )


def reality_defect(free):
    """U_j - conj(U_{-j}) for every j."""
    U = samples(free)
    M = U.shape[-3]
    return U - np.conj(U[..., (-np.arange(M)) % M, :, :])


def reality_rows(M):
    shape = (M // 2, 2, 2)
    return linear_real_matrix(lambda F: reality_defect(F)[: M // 2], shape)


def nullspace(rows):
    return scipy.linalg.null_space(rows)


def symmetry_defect_norms(free, spec):
    """|U_j - c_j K U_{M-j} K| for j = 1..M/2 (batched over leading axes)."""
    U = samples(free)
    M = spec.M
    mult = 4 if spec.symmetry_phase == "4pi" else 2
    out = []
    for j in range(1, M // 2 + 1):
        c = np.exp(1j * np.pi * mult * spec.P * j / M)
        d = U[..., j, :, :] - c * (K @ U[..., M - j, :, :] @ K)
        out.append(np.sqrt((np.abs(d) ** 2).sum(axis=(-2, -1))))
    return np.stack(out, axis=-1)


def cardinality_defect_mags(free, spec):
    U = samples(free)
    M, P = spec.M, spec.P
    out = []
    for j in range(1, M // 2 + 1):
        d = U[..., j, 0, 0] + (-1) ** P * U[..., (j + M // 2) % M, 0, 0] - np.exp(2j * np.pi * P * j / M)
        out.append(np.abs(d))
    return np.stack(out, axis=-1)


def evaluate_at(free, xi):
    """Trigonometric polynomial through the samples, evaluated at the points xi."""
    U = samples(free)
    M = U.shape[-3]
    j = np.arange(M)
    k = np.arange(M)
    A = np.einsum("kj,...jab->...kab", np.exp(-2j * np.pi * np.outer(k, j) / M) / M, U)
    E = np.exp(2j * np.pi * np.outer(np.atleast_1d(xi), k))
    return np.einsum("nk,...kab->...nab", E, A)


def from_shifted(shifted):
    """Ensemble whose samples at (j + 1/2)/M are the given (consistent) free array.

    The polynomial through the shifted samples is evaluated half a step back.
    """
    M = 2 * shifted.shape[-3]
    return evaluate_at(shifted, (np.arange(M // 2) - 0.5) / M)


def random_hermitian(rng, shape):
    A = rng.standard_normal(shape + (2, 2)) + 1j * rng.standard_normal(shape + (2, 2))
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def expi(H, s):
    """exp(i s H) for Hermitian H via eigen-decomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * s[..., None] * w)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
