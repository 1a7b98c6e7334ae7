"""Ensembles: uniform samples of the 2x2 wavelet matrix on [0, 1).

An ensemble with ``M`` samples is stored by its first ``M/2`` matrices only
(the *free* part, an array of shape ``(M/2, 2, 2)``).  The second half is
implied by the consistency condition ``U_{j+M/2} = J U_j``, so every array of
free matrices is consistent by construction.

A product point is four ensembles stacked into an array of shape
``(4, M/2, 2, 2)``.

Norms are taken over the full ``M``-sample view.  Because ``J`` is a
permutation, that norm is ``sqrt(2)`` times the Frobenius norm of the free
array.
"""

from dataclasses import dataclass
from functools import lru_cache
import json

import numpy as np

from .algebra import inner
from .exceptions import InconsistentCoefficients

__all__ = [
    "Ensemble",
    "check_M",
    "full",
    "full_view",
    "free_part",
    "dft",
    "idft",
    "half_shift",
    "half_shift_inverse",
    "random_ensemble",
    "ensemble_norm",
    "ensemble_inner",
    "product_point",
]


def check_M(M):
    if int(M) != M or M < 4 or M % 2:
        raise ValueError(f"M must be an even integer >= 4, got {M!r}")
    return int(M)


def full(free):
    """Full ``(M, 2, 2)`` view of a free array (works on leading batch axes)."""
    free = np.asarray(free)
    return np.concatenate([free, free[..., ::-1, :]], axis=-3)


def full_view(free, j):
    """Sample ``U_j`` of the full view; ``j`` is reduced mod ``M``."""
    half = len(free)
    j = j % (2 * half)
    if j < half:
        return free[j]
    return free[j - half][::-1, :]


def free_part(samples):
    """First half of a full ``(M, 2, 2)`` sample array."""
    samples = np.asarray(samples)
    return samples[..., : samples.shape[-3] // 2, :, :]


def ensemble_inner(x, y):
    """Inner product of (stacks of) free arrays, measured on the full view."""
    return 2.0 * inner(x, y)


def ensemble_norm(x):
    return np.sqrt(ensemble_inner(x, x))


@lru_cache(maxsize=None)
def _dft_matrix(M):
    j = np.arange(M)
    F = np.exp(-2j * np.pi * np.outer(j, j) / M) / M
    F.setflags(write=False)
    return F


@lru_cache(maxsize=None)
def _shift_matrix(M, sign):
    """Rows ``0..M/2-1`` of ``F^{-1} diag(e^{sign*pi*i*k/M}) F`` acting on full views."""
    k = np.arange(M)
    F = _dft_matrix(M)
    Finv = np.conj(F.T) * M
    S = (Finv * np.exp(sign * 1j * np.pi * k / M)) @ F
    S = np.ascontiguousarray(S[: M // 2])
    S.setflags(write=False)
    return S


def _apply_rows(mat, samples):
    # mat: (R, M); samples: (..., M, 2, 2) -> (..., R, 2, 2)
    shp = samples.shape
    flat = samples.reshape(shp[:-3] + (shp[-3], 4))
    return (mat @ flat).reshape(shp[:-3] + (mat.shape[0], 2, 2))


def dft(free):
    """Coefficients ``A_k = (1/M) sum_j U_j exp(-2 pi i j k / M)``, shape ``(M, 2, 2)``."""
    U = full(free)
    return _apply_rows(_dft_matrix(U.shape[-3]), U)


def idft(coeffs, rtol=1e-10):
    """Inverse of :func:`dft`: ``U_j = sum_k A_k exp(2 pi i j k / M)``.

    Raises
    ------
    InconsistentCoefficients
        If the synthesized second half differs from ``J`` times the first half
        by more than ``rtol`` relative to the overall size.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    M = check_M(coeffs.shape[-3])
    Finv = np.conj(_dft_matrix(M).T) * M
    U = _apply_rows(Finv, coeffs)
    first, second = U[..., : M // 2, :, :], U[..., M // 2 :, :, :]
    err = np.abs(second - first[..., ::-1, :]).max()
    scale = max(1.0, np.abs(U).max())
    if err > rtol * scale:
        raise InconsistentCoefficients(
            f"synthesized samples violate U[j+M/2] = J U[j] (deviation {err:.3g})"
        )
    return first.copy()


def half_shift(free):
    """Samples at the half-shifted nodes ``(j + 1/2) / M``.

    The trigonometric polynomial ``U(xi) = sum_k A_k exp(2 pi i k xi)`` through
    the samples is re-evaluated half a grid step later.  The map is a linear
    isometry of the consistent ensembles.
    """
    U = full(free)
    return _apply_rows(_shift_matrix(U.shape[-3], 1), U)


def half_shift_inverse(free):
    U = full(free)
    return _apply_rows(_shift_matrix(U.shape[-3], -1), U)


def random_ensemble(M, seed):
    """Free array with i.i.d. standard normal real and imaginary parts.

    Uses a Philox (counter-based) generator so that a given ``(M, seed)`` is
    reproducible bit for bit.
    """
    M = check_M(M)
    rng = np.random.Generator(np.random.Philox(seed))
    re = rng.standard_normal((M // 2, 2, 2))
    im = rng.standard_normal((M // 2, 2, 2))
    return re + 1j * im


def product_point(free, copies=4):
    """Product point with every part equal to ``free``."""
    free = np.asarray(free, dtype=complex)
    return np.repeat(free[None], copies, axis=0)


@dataclass(frozen=True)
class Ensemble:
    """Consistent ensemble held by its free matrices ``U_0 .. U_{M/2-1}``."""

    free: np.ndarray

    def __post_init__(self):
        free = np.array(self.free, dtype=complex)
        if free.ndim != 3 or free.shape[1:] != (2, 2):
            raise ValueError(f"free part must have shape (M/2, 2, 2), got {free.shape}")
        check_M(2 * free.shape[0])
        free.setflags(write=False)
        object.__setattr__(self, "free", free)

    @property
    def M(self):
        return 2 * self.free.shape[0]

    @classmethod
    def random(cls, M, seed):
        return cls(random_ensemble(M, seed))

    def __getitem__(self, j):
        return full_view(self.free, j)

    def samples(self):
        return full(self.free)

    def coefficients(self):
        return dft(self.free)

    def half_shift(self):
        return Ensemble(half_shift(self.free))

    def norm(self):
        return ensemble_norm(self.free)

    def to_dict(self):
        entries = self.free.reshape(-1, 4)
        return {
            "M": self.M,
            "free": [[[float(z.real), float(z.imag)] for z in row] for row in entries],
        }

    @classmethod
    def from_dict(cls, data):
        free = np.array(
            [[complex(re, im) for re, im in row] for row in data["free"]], dtype=complex
        ).reshape(-1, 2, 2)
        ens = cls(free)
        if ens.M != data["M"]:
            raise ValueError(f"M={data['M']} does not match {len(data['free'])} free matrices")
        return ens

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
