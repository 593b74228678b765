import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etsm import (DISSIMILARITY, ConfigurationError, Dataset, DomainError, MetricKind,
                  ParameterSpec, SimilarityMatrix, UnsupportedMetricError, ValidationError,
                  euclidean_dissimilarity, gen_random, hybrid_matrix, hybridize, monomer_matrix,
                  pairwise_metric)
from etsm.similarity import read_matrix_text

import oracle

R = ParameterSpec("v", MetricKind.R)


def xr(base):
    return ParameterSpec("v", MetricKind.XR, base)


@pytest.mark.parametrize("vi, vj, spec, expected", [
    (10, 50, R, 0.2),
    (5, 5, R, 1.0),
    (0, 0, R, 1.0),
    (0, 3, R, 0.0),
    (7, 4, xr(2.0), 0.125),
])
def test_pairwise_metric_examples(vi, vj, spec, expected):
    assert pairwise_metric(vi, vj, spec) == pytest.approx(expected, abs=1e-15)


def test_pairwise_metric_errors():
    with pytest.raises(DomainError):
        pairwise_metric(-1, 2, R)
    with pytest.raises(UnsupportedMetricError):
        pairwise_metric(1, 2, ParameterSpec("x", MetricKind.EUCLIDEAN))


finite = st.floats(0, 1e3, allow_nan=False)


@given(finite, finite, st.floats(1.01, 20))
def test_metric_symmetry_and_identity(a, b, base):
    for spec in (R, xr(base)):
        s = pairwise_metric(a, b, spec)
        assert s == pairwise_metric(b, a, spec)
        assert 0 <= s <= 1
        if a == b:
            assert s == 1


@given(st.floats(0, 50), st.floats(0.01, 50), st.floats(1.01, 5))
def test_xr_strictly_decreasing(d, extra, base):
    near = pairwise_metric(0, d, xr(base))
    far = pairwise_metric(0, d + extra, xr(base))
    assert far < near or near == far == 0.0


def ds(values, specs):
    return Dataset([f"o{i}" for i in range(len(values))], specs, values)


def test_monomer_examples():
    m = monomer_matrix(ds([[10], [50]], [R]), 0)
    np.testing.assert_allclose(m.entries, [[1, 0.2], [0.2, 1]], atol=1e-15)
    const = monomer_matrix(ds([[3], [3], [3]], [xr(1.1)]), 0)
    np.testing.assert_array_equal(const.entries, np.ones((3, 3)))
    m = monomer_matrix(ds([[0], [3], [3]], [xr(2.0)]), 0)
    expected = [[1, 2 ** -3, 2 ** -3], [2 ** -3, 1, 1], [2 ** -3, 1, 1]]
    np.testing.assert_allclose(m.entries, expected, atol=1e-15)


def test_monomer_rejects_coordinates():
    with pytest.raises(UnsupportedMetricError):
        monomer_matrix(ds([[1], [2]], [ParameterSpec("x", MetricKind.EUCLIDEAN)]), 0)


def sim(entries):
    return SimilarityMatrix(np.array(entries, dtype=float))


def test_hybridize_examples():
    a = sim([[1, 0.25], [0.25, 1]])
    b = sim([[1, 1.0], [1.0, 1]])
    assert hybridize([a]).entries.tolist() == a.entries.tolist()
    assert hybridize([a, b], [1, 1]).entries[0, 1] == pytest.approx(0.5, abs=1e-15)
    c, d = sim([[1, 0.2], [0.2, 1]]), sim([[1, 0.8], [0.8, 1]])
    assert hybridize([c, d]).entries[0, 1] == pytest.approx(math.sqrt(0.2 * 0.8), abs=1e-15)
    assert math.sqrt(0.16) == pytest.approx(0.4)


def test_hybridize_zero_annihilates_and_weight_zero_ignores():
    z, h = sim([[1, 0.0], [0.0, 1]]), sim([[1, 0.5], [0.5, 1]])
    assert hybridize([z, h]).entries[0, 1] == 0.0
    assert hybridize([z, h], [0, 1]).entries[0, 1] == pytest.approx(0.5)


def test_hybridize_errors():
    a = sim([[1, 0.5], [0.5, 1]])
    with pytest.raises(ConfigurationError):
        hybridize([a, a], [0, 0])
    with pytest.raises(ValidationError):
        hybridize([a, sim(np.eye(3))])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(1, 6), st.integers(0, 2**31))
def test_hybrid_permutation_invariant_in_monomer_order(n, p, seed):
    rng = np.random.default_rng(seed)
    data = gen_random(n, p, 1, 20, seed=seed)
    monos = [monomer_matrix(data, j) for j in range(p)]
    order = rng.permutation(p)
    a = hybridize(monos).entries
    b = hybridize([monos[j] for j in order]).entries
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert a.min() >= 0 and a.max() <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(1, 5), st.integers(0, 2**31))
def test_one_pass_hybrid_matches_monomer_route(n, p, seed):
    rng = np.random.default_rng(seed)
    values = rng.uniform(0, 30, (n, p))
    values[rng.random((n, p)) < 0.15] = 0.0
    specs = [ParameterSpec(f"p{j}", MetricKind.R if j % 2 else MetricKind.XR,
                           float(rng.uniform(1.05, 3)), float(rng.uniform(0, 2)) + (j == 0))
             for j in range(p)]
    data = Dataset([f"o{i}" for i in range(n)], specs, values)
    route = hybridize([monomer_matrix(data, j) for j in range(p)], [s.weight for s in specs])
    np.testing.assert_allclose(hybrid_matrix(data).entries, route.entries, rtol=1e-9, atol=1e-300)


def test_hybrid_matrix_survives_monomer_underflow():
    data = ds([[0.0], [400.0]], [ParameterSpec("v", MetricKind.XR, 10.0)])
    assert monomer_matrix(data, 0).entries[0, 1] == 0.0
    two = Dataset(["a", "b"], [ParameterSpec("u", MetricKind.XR, 10.0),
                               ParameterSpec("w", MetricKind.XR, 10.0)], [[0.0, 0.0], [400.0, 0.0]])
    assert hybrid_matrix(two).entries[0, 1] == pytest.approx(10.0 ** -200, rel=1e-9)


def coords(points):
    return ds(points, [ParameterSpec(a, MetricKind.EUCLIDEAN) for a in "xyz"][:len(points[0])])


def test_euclidean_examples():
    d = euclidean_dissimilarity(coords([[0, 0, 0], [3, 4, 0], [3, 4, 0]]))
    assert d.kind is DISSIMILARITY
    assert d.entries[0, 1] == 5.0 and d.entries[1, 2] == 0.0
    line = euclidean_dissimilarity(coords([[0, 0, 0], [1, 0, 0], [3, 0, 0]])).entries
    assert [line[0, 1], line[0, 2], line[1, 2]] == [1.0, 3.0, 2.0]


def test_euclidean_rejects_mixed():
    mixed = Dataset(["a"], [ParameterSpec("x", MetricKind.EUCLIDEAN), ParameterSpec("y")], [[1, 2]])
    with pytest.raises(ConfigurationError):
        euclidean_dissimilarity(mixed)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**31))
def test_euclidean_matches_oracle_and_triangle_inequality(n, seed):
    pts = np.random.default_rng(seed).normal(0, 5, (n, 3))
    d = euclidean_dissimilarity(coords(pts.tolist())).entries
    for i, j in itertools.combinations(range(n), 2):
        assert d[i, j] == pytest.approx(oracle.distance(pts[i], pts[j]), rel=1e-12)
    for i, j, k in itertools.permutations(range(n), 3):
        assert d[i, j] <= d[i, k] + d[k, j] + 1e-9


def test_matrix_validation():
    with pytest.raises(ValidationError):
        sim([[1, 0.5], [0.4, 1]])
    with pytest.raises(ValidationError):
        sim([[0.9, 0.5], [0.5, 1]])
    with pytest.raises(ValidationError):
        SimilarityMatrix(np.ones((2, 2)), DISSIMILARITY)
    with pytest.raises(ValidationError):
        sim([[1, np.nan], [np.nan, 1]])


def test_matrix_csv_roundtrip_17_digits():
    data = gen_random(6, 4, seed=11)
    m = hybrid_matrix(data)
    back = read_matrix_text(m.to_csv())
    assert back.kind is m.kind and back.labels == m.labels
    np.testing.assert_array_equal(back.entries, m.entries)
    d = euclidean_dissimilarity(coords(np.random.default_rng(0).normal(size=(4, 3)).tolist()))
    np.testing.assert_array_equal(read_matrix_text(d.to_csv()).entries, d.entries)
