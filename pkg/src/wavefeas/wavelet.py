"""Filters, residual checks and the cascade algorithm for feasible ensembles."""

from dataclasses import dataclass
import csv
import io
import json

import numpy as np

from .constraints import (
    SYMMETRIC,
    cardinality_defects,
    regularity_functionals,
    symmetry_defects,
)
from .ensemble import dft, full, half_shift
from .exceptions import Divergence, StructureViolation

__all__ = [
    "FilterPair",
    "extract_filters",
    "filters_from_coefficients",
    "ensemble_from_filters",
    "verify",
    "cascade",
    "cascade_csv",
    "passes",
]


def _parse_coeffs(values):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            out.append(complex(re, im))
        else:
            out.append(complex(v))
    return np.array(out, dtype=complex)


@dataclass(frozen=True)
class FilterPair:
    """Scaling filter ``h`` and wavelet filter ``g`` (``H(0) = sum(h) = 1``)."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        if h.ndim != 1 or h.shape != g.shape:
            raise ValueError("h and g must be 1-D sequences of equal length")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    def is_real(self, tol=1e-7):
        return max(np.abs(self.h.imag).max(), np.abs(self.g.imag).max()) < tol

    def to_dict(self):
        def enc(a):
            if np.all(a.imag == 0):
                return [float(v) for v in a.real]
            return [[float(v.real), float(v.imag)] for v in a]

        return {"h": enc(self.h), "g": enc(self.g)}

    @classmethod
    def from_dict(cls, data):
        return cls(_parse_coeffs(data["h"]), _parse_coeffs(data["g"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def extract_filters(free, tol=1e-10):
    """Scaling and wavelet filters of an ensemble given by its free array."""
    return filters_from_coefficients(dft(np.asarray(free, dtype=complex)), tol)


def filters_from_coefficients(A, tol=1e-10):
    """Read ``h_k = A_k[0, 0]`` and ``g_k = A_k[0, 1]`` off transform coefficients.

    Raises
    ------
    StructureViolation
        If the second row of ``A_k`` is not ``(-1)^k`` times the first.
    """
    A = np.asarray(A, dtype=complex)
    M = A.shape[0]
    sign = (-1.0) ** np.arange(M)
    dev = np.abs(A[:, 1, :] - sign[:, None] * A[:, 0, :]).max()
    if dev > tol * max(1.0, np.abs(A).max()):
        raise StructureViolation(f"coefficient rows break the (-1)^k pattern by {dev:.3g}")
    return FilterPair(A[:, 0, 0].copy(), A[:, 0, 1].copy())


def _trig(coeffs, xi):
    k = np.arange(len(coeffs))
    return np.exp(2j * np.pi * np.outer(xi, k)) @ coeffs


def ensemble_from_filters(h, g):
    """Free array of ``U(j/M) = [[H, G], [H(.+1/2), G(.+1/2)]]`` for ``j < M/2``."""
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    M = len(h)
    xi = np.arange(M // 2) / M
    free = np.empty((M // 2, 2, 2), dtype=complex)
    free[:, 0, 0] = _trig(h, xi)
    free[:, 0, 1] = _trig(g, xi)
    free[:, 1, 0] = _trig(h, xi + 0.5)
    free[:, 1, 1] = _trig(g, xi + 0.5)
    return free


def _unitarity(samples):
    eye = np.eye(2)
    prod = samples @ np.conj(np.swapaxes(samples, -1, -2))
    return np.sqrt((np.abs(prod - eye) ** 2).sum(axis=(-2, -1))).max()


def verify(free, spec):
    """Residuals of every design condition for an ensemble.

    Returns a dict; ``*_excess`` entries are how far the near-symmetry or
    near-cardinality defects exceed ``gamma`` (zero when inside the set).
    Never raises on infeasible input.
    """
    free = np.asarray(free, dtype=complex)
    U = full(free)
    M = U.shape[0]
    filters = extract_filters(free, tol=np.inf)
    h = filters.h
    A, _ = regularity_functionals(spec)
    reg = A @ np.ascontiguousarray(free).reshape(-1).view(np.float64)
    sigma = np.conj(U[(-np.arange(M)) % M])
    orth = []
    for n in range(-(M // 2), M // 2 + 1):
        shifted = np.zeros_like(h)
        lo, hi = max(0, 2 * n), min(M, M + 2 * n)
        shifted[lo:hi] = h[lo - 2 * n : hi - 2 * n]
        orth.append(abs((h * np.conj(shifted)).sum() - (0.5 if n == 0 else 0.0)))
    report = {
        "unitarity": float(_unitarity(U)),
        "unitarity_shifted": float(_unitarity(full(half_shift(free)))),
        "u0_form": float(max(abs(U[0, 0, 1]), abs(U[0, 1, 0]), abs(abs(U[0, 1, 1]) - 1))),
        "h0": float(abs(U[0, 0, 0] - 1)),
        "sum_h": float(abs(h.sum() - 1)),
        "regularity": float(np.abs(reg).max()),
        "reality": float(np.sqrt((np.abs(U - sigma) ** 2).sum(axis=(-2, -1))).max()),
        "filter_imag": float(max(np.abs(filters.h.imag).max(), np.abs(filters.g.imag).max())),
        "orthonormality": float(max(orth)),
    }
    if spec.kind == SYMMETRIC:
        d = np.sqrt((np.abs(symmetry_defects(free, spec)) ** 2).sum(axis=(-2, -1)))
        report["symmetry_defect"] = float(d.max())
        report["symmetry_excess"] = float(max(d.max() - spec.gamma, 0.0))
    else:
        d = np.abs(cardinality_defects(free, spec))
        report["cardinality_defect"] = float(d.max())
        report["cardinality_excess"] = float(max(d.max() - spec.gamma, 0.0))
    return report


def passes(report, hard_tol=1e-7, orth_tol=1e-6, excess_tol=0.0):
    """True when every residual of a :func:`verify` report is within tolerance."""
    hard = ("unitarity", "unitarity_shifted", "u0_form", "h0", "sum_h", "regularity", "reality")
    ok = all(report[k] < hard_tol for k in hard)
    ok &= report["orthonormality"] < orth_tol
    excess = report.get("symmetry_excess", report.get("cardinality_excess"))
    return bool(ok and excess <= excess_tol)


def cascade(filters, levels=10, blowup=1e6):
    """Sample the scaling function and wavelet by the cascade algorithm.

    Starts from the indicator of ``[0, 1)`` and applies
    ``phi <- 2 sum_k h_k phi(2x - k)`` ``levels`` times on the dyadic grid of
    spacing ``2**-levels`` over ``[0, M-1]``.  Each iterate is a step function
    on that grid, so grid values are exact.

    Returns
    -------
    x, phi, psi : ndarray
        ``psi = 2 sum_k g_k phi(2x - k)`` from the final ``phi``.

    Raises
    ------
    Divergence
        If ``max |phi|`` exceeds ``blowup``.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    h = np.asarray(filters.h, dtype=complex)
    g = np.asarray(filters.g, dtype=complex)
    if np.abs(h.imag).max() < 1e-12 and np.abs(g.imag).max() < 1e-12:
        h, g = h.real, g.real
    M = len(h)
    scale = 2 ** levels
    n = (M - 1) * scale + 1
    x = np.arange(n) / scale
    phi = ((x >= 0) & (x < 1)).astype(h.dtype)

    def refine(coeffs, f):
        out = np.zeros(n, dtype=np.result_type(coeffs, f))
        i = np.arange(n)
        for k, c in enumerate(coeffs):
            idx = 2 * i - k * scale
            ok = (idx >= 0) & (idx < n)
            out[ok] += 2.0 * c * f[idx[ok]]
        return out

    for _ in range(levels):
        phi = refine(h, phi)
        if np.abs(phi).max() > blowup:
            raise Divergence("cascade iterates exceed the blow-up bound")
    psi = refine(g, phi)
    return x, phi, psi


def cascade_csv(x, phi, psi):
    """CSV text with header ``x,phi,psi`` and 17 significant digits (real parts)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "phi", "psi"])
    for row in zip(x, np.real(phi), np.real(psi)):
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()
