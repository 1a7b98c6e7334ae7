import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavefeas.algebra import J
from wavefeas.ensemble import (
    Ensemble,
    dft,
    ensemble_norm,
    full,
    full_view,
    half_shift,
    half_shift_inverse,
    idft,
    product_point,
    random_ensemble,
)
from wavefeas.exceptions import InconsistentCoefficients

from conftest import random_free, random_unitary
from oracles import from_shifted


def _direct_dft(U):
    M = len(U)
    return np.array([sum(U[j] * np.exp(-2j * np.pi * j * k / M) for j in range(M)) / M for k in range(M)])


def _evaluate(U, xi):
    """Trigonometric polynomial through the samples U_j, evaluated at xi (direct)."""
    A = _direct_dft(U)
    return sum(A[k] * np.exp(2j * np.pi * k * xi) for k in range(len(U)))


def _single_frequency(M, X):
    return np.array([np.exp(2j * np.pi * j / M) * X for j in range(M // 2)])


def test_full_view_indices(rng):
    E = random_free(rng)
    np.testing.assert_array_equal(full_view(E, 0), E[0])
    np.testing.assert_array_equal(full_view(E, 3), J @ E[0])
    np.testing.assert_array_equal(full_view(E, 6), E[0])
    np.testing.assert_array_equal(full(E)[4], J @ E[1])


def test_dft_constant():
    X = np.array([[1 + 1j, 2], [1 + 1j, 2]])
    A = dft(np.array([X] * 3))
    np.testing.assert_allclose(A[0], X, atol=1e-15)
    np.testing.assert_allclose(A[1:], 0, atol=1e-14)


def test_dft_single_frequency():
    M = 6
    X = np.array([[1, 2j], [-1, -2j]])  # J X = -X
    A = dft(_single_frequency(M, X))
    np.testing.assert_allclose(A[1], X, atol=1e-14)
    np.testing.assert_allclose(np.delete(A, 1, axis=0), 0, atol=1e-14)


@pytest.mark.parametrize("M", [4, 6, 8, 10])
def test_dft_direct_summation_and_sign_pattern(rng, M):
    E = random_free(rng, M)
    A = dft(E)
    np.testing.assert_allclose(A, _direct_dft(full(E)), atol=1e-13)
    sign = (-1.0) ** np.arange(M)
    np.testing.assert_allclose(A[:, 1, :], sign[:, None] * A[:, 0, :], atol=1e-13)


def test_idft_constant():
    X = np.array([[3, 1j], [3, 1j]])
    A = np.zeros((6, 2, 2), dtype=complex)
    A[0] = X
    np.testing.assert_allclose(idft(A), np.array([X] * 3), atol=1e-15)


@pytest.mark.parametrize("M", [4, 6, 8])
def test_idft_round_trip(rng, M):
    E = random_free(rng, M)
    np.testing.assert_allclose(idft(dft(E)), E, atol=1e-12)


def test_idft_rejects_inconsistent(rng):
    A = dft(random_free(rng))
    A[2, 1, 0] += 0.1
    with pytest.raises(InconsistentCoefficients):
        idft(A)


def test_parseval(rng):
    for M in (4, 6, 12):
        E = random_free(rng, M)
        A = dft(E)
        assert (np.abs(A) ** 2).sum() == pytest.approx(ensemble_norm(E) ** 2 / M, rel=1e-12)


def test_half_shift_constant():
    X = np.array([[1, 2], [1, 2]], dtype=complex)
    E = np.array([X] * 3)
    np.testing.assert_allclose(half_shift(E), E, atol=1e-14)


def test_half_shift_single_frequency():
    M = 6
    X = np.array([[1, 2j], [-1, -2j]])
    E = _single_frequency(M, X)
    np.testing.assert_allclose(half_shift(E), np.exp(1j * np.pi / M) * E, atol=1e-14)


@pytest.mark.parametrize("M", [4, 6, 8])
def test_half_shift_evaluates_at_midpoints(rng, M):
    E = random_free(rng, M)
    U = full(E)
    S = half_shift(E)
    for j in range(M // 2):
        np.testing.assert_allclose(S[j], _evaluate(U, (j + 0.5) / M), atol=1e-12)
    S2 = half_shift(S)
    for j in range(M // 2):
        np.testing.assert_allclose(S2[j], _evaluate(U, (j + 1) / M), atol=1e-12)
        np.testing.assert_allclose(S2[j], full_view(E, j + 1), atol=1e-12)


def test_half_shift_isometry_and_period(rng):
    for M in (4, 6, 8):
        E = random_free(rng, M)
        assert ensemble_norm(half_shift(E)) == pytest.approx(ensemble_norm(E), rel=1e-12)
        X = E
        for _ in range(2 * M):
            X = half_shift(X)
        np.testing.assert_allclose(X, E, atol=1e-10)
        np.testing.assert_allclose(half_shift_inverse(half_shift(E)), E, atol=1e-12)


def test_random_ensemble_deterministic():
    np.testing.assert_array_equal(random_ensemble(6, 3), random_ensemble(6, 3))
    assert ensemble_norm(random_ensemble(6, 3)) != ensemble_norm(random_ensemble(6, 4))


def test_random_ensemble_consistency():
    U = full(random_ensemble(6, 11))
    for j in range(3):
        np.testing.assert_array_equal(U[j + 3], J @ U[j])


def test_product_point_norm(rng):
    E = random_free(rng)
    x = product_point(E)
    assert x.shape == (4, 3, 2, 2)
    parts = sum(ensemble_norm(p) ** 2 for p in x)
    assert parts == pytest.approx(4 * ensemble_norm(E) ** 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_ensemble_json_round_trip(half, seed):
    E = Ensemble.random(2 * half, seed)
    again = Ensemble.from_json(E.to_json())
    np.testing.assert_array_equal(again.free, E.free)
    data = json.loads(E.to_json())
    assert data["M"] == 2 * half
    assert len(data["free"]) == half and len(data["free"][0]) == 4


def test_ensemble_rejects_bad_M():
    with pytest.raises(ValueError):
        Ensemble(np.zeros((1, 2, 2), dtype=complex))


def test_unshift_oracle_inverts_half_shift(rng):
    V = random_unitary(rng, 3)
    np.testing.assert_allclose(half_shift(from_shifted(V)), V, atol=1e-13)
    np.testing.assert_allclose(from_shifted(V), half_shift_inverse(V), atol=1e-13)
