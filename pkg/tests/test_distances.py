import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from culturenet.distances import (DistanceMatrix, culturalmap_distance, excluded_categories,
                                  long_form_csv, margdistr_distance, mean_distance,
                                  measure_correlations, network_index, pairwise,
                                  parcorr_distance, phi_divergence, phi_terms, probedge_distance,
                                  raw_values, standardize)
from culturenet.errors import (CountryMismatch, DegenerateRange, DimensionMismatch,
                               NoCommonSupport)
from oracles import symmetric_kl


def dm(values, measure="Mean", countries=None):
    v = np.asarray(values, dtype=float)
    return DistanceMatrix(measure, tuple(countries or [f"C{i}" for i in range(v.shape[0])]), v)


def from_upper(upper, n):
    v = np.zeros((n, n))
    v[np.triu_indices(n, 1)] = upper
    return v + v.T


def random_pmf(rng, k):
    w = rng.random(k) + 1e-3
    return {c + 1: float(x) for c, x in enumerate(w / w.sum())}


def test_parcorr_examples():
    a = np.eye(4)
    b = a.copy()
    b[0, 2] = b[2, 0] = 0.5
    assert parcorr_distance(a, a) == 0
    assert parcorr_distance(a, b) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert parcorr_distance(b, a) == parcorr_distance(a, b)
    with pytest.raises(DimensionMismatch):
        parcorr_distance(np.eye(3), np.eye(4))


def test_probedge_examples():
    ones = np.ones((10, 10))
    zeros = np.eye(10)
    np.fill_diagonal(ones, 1)
    assert probedge_distance(ones, ones) == 0
    assert probedge_distance(ones, zeros) == pytest.approx(math.sqrt(90), abs=1e-12)
    a = np.zeros((5, 5))
    b = a.copy()
    b[1, 3] = b[3, 1] = 0.3
    assert probedge_distance(a, b) == pytest.approx(math.sqrt(0.18), abs=1e-12)


def test_phi_examples():
    f_l = {1: 0.5, 2: 0.5}
    f_m = {1: 0.25, 2: 0.75}
    assert phi_divergence(f_l, f_l) == 0
    assert phi_divergence(f_l, f_m) == pytest.approx(0.13733, abs=5e-6)
    assert phi_divergence(f_m, f_l) == phi_divergence(f_l, f_m)


def test_phi_common_support_only():
    phi, excluded = phi_terms({1: 0.5, 2: 0.5}, {1: 0.25, 2: 0.5, 3: 0.25})
    assert excluded == [3]
    assert phi == pytest.approx(0.25 * math.log(2) / 2)
    with pytest.raises(NoCommonSupport):
        phi_divergence({1: 1.0}, {2: 1.0})


def test_margdistr_examples():
    same = [{1: 0.5, 2: 0.5}, {0: 0.1, 1: 0.9}]
    assert margdistr_distance(same, same) == 0
    other = [{1: 0.25, 2: 0.75}, {0: 0.1, 1: 0.9}]
    assert margdistr_distance(same, other) == pytest.approx(0.13733, abs=5e-6)
    # two variables with phi = 0.3 each combine to sqrt(0.18)
    phis = np.array([0.3, 0.3])
    assert math.sqrt(np.sum(phis ** 2)) == pytest.approx(0.42426, abs=5e-6)


def test_mean_and_map_examples():
    assert mean_distance([1, 2, 3], [1, 2, 3]) == 0
    assert mean_distance([3, 4, 0, 0], [0, 0, 0, 0]) == 5
    assert mean_distance([1, 5], [2, 0]) == mean_distance([2, 0], [1, 5])
    assert culturalmap_distance([0, 0], [1, 0]) == 1
    with pytest.raises(DimensionMismatch):
        mean_distance([1, 2], [1, 2, 3])


def test_standardize_examples():
    d = dm(from_upper([2, 4, 6], 3))
    s = standardize(d)
    assert sorted(s.upper().tolist()) == [0.0, 0.5, 1.0]
    assert (s.raw_min, s.raw_max) == (2.0, 6.0)
    again = standardize(s)
    np.testing.assert_array_equal(again.values, s.values)
    assert (again.raw_min, again.raw_max) == (2.0, 6.0)
    np.testing.assert_allclose(raw_values(s), d.values)
    with pytest.raises(DegenerateRange):
        standardize(dm(from_upper([3, 3, 3], 3)))


def test_network_index_examples():
    one = standardize(dm(from_upper([0, 0, 0, 0, 0, 7], 4), "MargDistr"))
    par = standardize(dm(from_upper([0, 0, 0, 0, 0, 2], 4), "ParCorr"))
    ni = network_index(one, par)
    assert ni.measure == "NetworkIndex"
    assert ni.upper()[-1] == 1.0 and np.all(ni.upper()[:-1] == 0)
    x = standardize(dm(from_upper([1, 5, 2, 8, 3, 4], 4), "MargDistr"))
    y = DistanceMatrix("ParCorr", x.countries, x.values, True, 0.0, 1.0)
    np.testing.assert_allclose(network_index(x, y).values, x.values, atol=1e-15)
    assert np.allclose(ni.values, ni.values.T)


def test_network_index_country_mismatch():
    a = standardize(dm(from_upper([1, 2, 3], 3), "MargDistr", ["A", "B", "C"]))
    b = standardize(dm(from_upper([1, 2, 3], 3), "ParCorr", ["A", "B", "D"]))
    with pytest.raises(CountryMismatch):
        network_index(a, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 10))
def test_phi_symmetric_and_matches_oracle(seed, k):
    rng = np.random.default_rng(seed)
    f, g = random_pmf(rng, k), random_pmf(rng, k)
    assert phi_divergence(f, g) == phi_divergence(g, f)
    assert phi_divergence(f, g) >= 0
    assert phi_divergence(f, g) == pytest.approx(symmetric_kl(f, g), rel=1e-12, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 9))
def test_standardize_idempotent_and_order_preserving(seed, n):
    rng = np.random.default_rng(seed)
    upper = rng.random(n * (n - 1) // 2) * 10
    d = dm(from_upper(upper, n))
    s = standardize(d)
    assert s.upper().min() == 0 and s.upper().max() == 1
    np.testing.assert_array_equal(standardize(s).values, s.values)
    np.testing.assert_array_equal(np.argsort(s.upper(), kind="stable"),
                                  np.argsort(d.upper(), kind="stable"))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6))
def test_triangle_inequality(seed, p):
    rng = np.random.default_rng(seed)
    mats = [rng.uniform(-1, 1, (p, p)) for _ in range(3)]
    vecs = [rng.normal(size=p) for _ in range(3)]
    for fn, (a, b, c) in ((parcorr_distance, mats), (probedge_distance, mats),
                          (mean_distance, vecs), (culturalmap_distance, [v[:2] for v in vecs])):
        assert fn(a, c) <= fn(a, b) + fn(b, c) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 8))
def test_probedge_bounded(seed, p):
    rng = np.random.default_rng(seed)
    a, b = rng.random((p, p)), rng.random((p, p))
    a, b = (a + a.T) / 2, (b + b.T) / 2
    np.fill_diagonal(a, 0)
    np.fill_diagonal(b, 0)
    assert probedge_distance(a, b) <= math.sqrt(p * (p - 1)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100), st.floats(0, 5))
def test_network_index_invariant_to_common_affine_rescale(seed, scale, shift):
    rng = np.random.default_rng(seed)
    n = 5
    u, v = rng.random(10), rng.random(10)
    base = network_index(standardize(dm(from_upper(u, n), "MargDistr")),
                         standardize(dm(from_upper(v, n), "ParCorr")))
    moved = network_index(standardize(dm(from_upper(scale * u + shift, n), "MargDistr")),
                          standardize(dm(from_upper(scale * v + shift, n), "ParCorr")))
    np.testing.assert_allclose(moved.values, base.values, atol=1e-9)


def test_pairwise_and_long_form():
    countries = ("AA", "BB", "CC")
    means = [np.array([0.0, 0.0]), np.array([3.0, 4.0]), np.array([0.0, 0.0])]
    d = pairwise("Mean", countries, means, mean_distance)
    assert d.values[0, 1] == 5 and d.values[0, 2] == 0
    s = standardize(d)
    lines = long_form_csv([d, s]).splitlines()
    assert lines[0] == "country_a,country_b,measure,raw_value,standardized_value"
    assert len(lines) == 1 + 2 * 3
    assert lines[1] == "AA,BB,Mean,5.0,1.0"
    assert lines[4] == lines[1]
    names, corr = measure_correlations([d, s])
    assert names == ["Mean", "Mean"] and corr[0, 1] == pytest.approx(1.0)


def test_excluded_categories_report():
    marg = [[{1: 0.5, 2: 0.5}], [{1: 0.5, 3: 0.5}]]
    rows = excluded_categories(["AA", "BB"], marg)
    assert rows == [{"country_a": "AA", "country_b": "BB", "variable": None, "excluded": [2, 3]}]


def test_distance_matrix_validation_and_roundtrip():
    with pytest.raises(ValueError):
        dm([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        dm([[0, 1], [1, 0]], measure="Other")
    with pytest.raises(DimensionMismatch):
        DistanceMatrix("Mean", ("A",), np.zeros((2, 2)))
    s = standardize(dm(from_upper([1, 2, 4], 3)))
    back = DistanceMatrix.from_dict(s.to_dict())
    np.testing.assert_array_equal(back.values, s.values)
    assert back.standardized and back.raw_max == 4.0
