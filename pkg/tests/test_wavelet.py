import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wavefeas.constraints import ProblemSpec
from wavefeas.ensemble import dft, random_ensemble
from wavefeas.exceptions import Divergence, StructureViolation
from wavefeas.wavelet import (
    FilterPair,
    cascade,
    cascade_csv,
    ensemble_from_filters,
    extract_filters,
    filters_from_coefficients,
    passes,
    verify,
)

HAAR = FilterPair([0.5, 0.5], [0.5, -0.5])


def _haar6():
    h = np.zeros(6)
    g = np.zeros(6)
    h[:2] = 0.5
    g[:2] = [0.5, -0.5]
    return h, g


def _hat(x):
    return np.clip(1 - np.abs(x - 1), 0, None)


def test_extract_constant_ensemble():
    X = np.array([[1, 0], [1, 0]], dtype=complex)
    f = extract_filters(np.array([X] * 3))
    np.testing.assert_allclose(f.h, [1, 0, 0, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(f.g, 0, atol=1e-15)


def test_extract_haar_from_samples():
    h, g = _haar6()
    f = extract_filters(ensemble_from_filters(h, g))
    np.testing.assert_allclose(f.h, h, atol=1e-15)
    np.testing.assert_allclose(f.g, g, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([4, 6, 8]), st.data())
def test_filters_ensemble_round_trip(M, data):
    parts = data.draw(arrays(np.float64, (4, M), elements=st.floats(-10, 10)))
    h = parts[0] + 1j * parts[1]
    g = parts[2] + 1j * parts[3]
    f = extract_filters(ensemble_from_filters(h, g))
    np.testing.assert_allclose(f.h, h, atol=1e-12)
    np.testing.assert_allclose(f.g, g, atol=1e-12)


def test_structure_violation():
    A = dft(random_ensemble(6, 0))
    filters_from_coefficients(A)
    A[3, 1, 1] += 1e-3
    with pytest.raises(StructureViolation):
        filters_from_coefficients(A)


def test_verify_haar():
    h, g = _haar6()
    report = verify(ensemble_from_filters(h, g), ProblemSpec.cardinal())
    assert report["unitarity"] < 1e-12
    assert report["unitarity_shifted"] < 1e-12
    assert report["orthonormality"] < 1e-12
    assert report["sum_h"] < 1e-12
    assert report["filter_imag"] < 1e-12


def test_verify_random_positive():
    report = verify(random_ensemble(6, 3), ProblemSpec.symmetric())
    for key in ("unitarity", "unitarity_shifted", "h0", "sum_h", "regularity", "reality", "orthonormality"):
        assert report[key] > 0
    assert not passes(report)


def test_solved_card_filters(card_solution, spec_card):
    f = extract_filters(card_solution.solution)
    assert f.is_real(1e-7)
    assert abs(f.h.sum() - 1) < 1e-7
    report = verify(card_solution.solution, spec_card)
    assert report["orthonormality"] < 1e-6
    assert report["cardinality_excess"] <= 1e-9


def test_cascade_haar_exact_every_level():
    for levels in range(1, 12):
        x, phi, psi = cascade(HAAR, levels)
        assert len(x) == 2**levels + 1
        np.testing.assert_array_equal(phi, ((x >= 0) & (x < 1)).astype(float))
        np.testing.assert_array_equal(psi, np.where(x < 0.5, 1.0, np.where(x < 1, -1.0, 0.0)))


def test_cascade_hat():
    f = FilterPair([0.25, 0.5, 0.25], [0.25, -0.5, 0.25])
    for levels in (4, 7, 10):
        x, phi, _ = cascade(f, levels)
        assert np.abs(phi - _hat(x)).max() < 2.0 ** (-levels + 2)


@pytest.mark.parametrize("filters", [HAAR, FilterPair([0.25, 0.5, 0.25], [0, 0, 0])], ids=["haar", "hat"])
def test_cascade_mass(filters):
    for levels in range(1, 11):
        _, phi, _ = cascade(filters, levels)
        assert abs(phi.sum() * 2.0**-levels - 1) < 1e-8


def test_cascade_mass_solved(card_solution):
    f = extract_filters(card_solution.solution)
    for levels in (3, 6, 10):
        _, phi, _ = cascade(f, levels)
        assert abs(phi.real.sum() * 2.0**-levels - 1) < 1e-8


def test_cascade_near_cardinal(card_solution, spec_card):
    f = extract_filters(card_solution.solution)
    x, phi, _ = cascade(f, 10)
    at_integers = phi.real[::1024]
    k = np.arange(len(at_integers))
    # integer samples stay close to the delta at P; their deviation is driven by the defects
    dev = np.abs(at_integers - (k == spec_card.P))
    assert dev.max() < 2 * spec_card.gamma
    assert at_integers[spec_card.P] == max(at_integers)


def test_cascade_divergence():
    with pytest.raises(Divergence):
        cascade(FilterPair([2.0, -1.0, 0.5, -0.5], [0, 0, 0, 0]), 10)


def test_cascade_csv_format():
    x, phi, psi = cascade(HAAR, 3)
    text = cascade_csv(x, phi, psi)
    lines = text.splitlines()
    assert lines[0] == "x,phi,psi"
    assert len(lines) == 10
    assert lines[1] == "0,1,1"
    assert float(lines[-1].split(",")[0]) == 1.0


def test_filter_pair_json():
    f = FilterPair([1 + 2j, 0.5], [0, -1j])
    again = FilterPair.from_json(json.dumps(f.to_dict()))
    np.testing.assert_array_equal(again.h, f.h)
    np.testing.assert_array_equal(again.g, f.g)
    assert HAAR.to_dict() == {"h": [0.5, 0.5], "g": [0.5, -0.5]}
