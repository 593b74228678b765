import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etsm import (DISSIMILARITY, HOMOGENEOUS, ConfigurationError, DichotomyViolationError,
                  DomainError, EtsmConfig, Partition, SimilarityMatrix, ValidationError, contrast,
                  extract_partition, iterate, transform_step)
from etsm.core import _geometric_fast, _pair_average, _step

import oracle

S3 = [[1, .8, .2], [.8, 1, .3], [.2, .3, 1]]
# frozen from oracle.step / oracle.run
S3_GM = (0.7528288231048228, 0.24662120743304702, 0.2823108086643085)
S3_AM_01 = 0.7555555555555555
S3_OMEGA = 0.375


def sim(entries, labels=None):
    return SimilarityMatrix(np.array(entries, dtype=float), labels=labels)


def random_similarity(rng, n, low=0.0):
    m = rng.uniform(low, 1, (n, n))
    m = np.triu(m, 1)
    m = m + m.T
    np.fill_diagonal(m, 1.0)
    return m


def two_block(sizes, omega, order=None):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    m = np.where(labels[:, None] == labels[None, :], 1.0, omega)
    if order is not None:
        m = m[np.ix_(order, order)]
    return m


def test_step_hand_oracle():
    out = transform_step(sim(S3), "GM").entries
    assert (out[0, 1], out[0, 2], out[1, 2]) == pytest.approx(S3_GM, abs=1e-4)
    np.testing.assert_allclose(out, oracle.step(S3, "GM"), atol=1e-14)
    assert transform_step(sim(S3), "AM").entries[0, 1] == pytest.approx(S3_AM_01, abs=1e-5)
    assert (0.8 + 0.8 + 0.2 / 0.3) / 3 == pytest.approx(S3_AM_01, abs=1e-12)


@pytest.mark.parametrize("mode", ["AM", "GM"])
def test_two_block_is_fixed_point(mode):
    m = two_block([2, 3], 0.37)
    np.testing.assert_allclose(transform_step(sim(m), mode).entries, m, atol=1e-15, rtol=0)


def test_fast_gm_matches_generic_kernel():
    rng = np.random.default_rng(5)
    m = random_similarity(rng, 17)
    m[2, 5] = m[5, 2] = 0.0
    m[3, 9] = m[9, 3] = 0.0
    np.testing.assert_allclose(_geometric_fast(m), _pair_average(m, True, False, False), rtol=1e-12)


@pytest.mark.parametrize("mode", ["AM", "GM"])
def test_iteration_kernel_agrees_with_public_step(mode):
    m = random_similarity(np.random.default_rng(8), 30)
    np.testing.assert_allclose(_step(m, mode), transform_step(sim(m), mode).entries,
                               rtol=0, atol=1e-15)


def test_gm_zero_short_circuit():
    m = np.array([[1, 0, .5], [0, 1, .5], [.5, .5, 1]])
    out = transform_step(sim(m), "GM").entries
    assert out[0, 1] == 0.0
    np.testing.assert_allclose(out, oracle.step(m.tolist(), "GM"), atol=1e-14)


def test_dissimilarity_step():
    d = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    m = SimilarityMatrix(d, DISSIMILARITY)
    am = transform_step(m, "AM").entries
    np.testing.assert_allclose(am, oracle.step(d.tolist(), "AM"), atol=1e-14)
    # GM annihilates a zero-diagonal input
    gm = transform_step(m, "GM").entries
    assert gm[0, 1] == gm[0, 2] == gm[1, 2] == 0.0


def test_exclude_self_flag():
    out = transform_step(sim(S3), "AM", exclude_self=True).entries
    # only k = 2 remains for the pair (0, 1)
    assert out[0, 1] == pytest.approx(0.2 / 0.3)
    with pytest.raises(ConfigurationError):
        transform_step(sim([[1, .5], [.5, 1]]), "GM", exclude_self=True)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**31), st.sampled_from(["AM", "GM"]))
def test_step_range_symmetry_and_equivariance(n, seed, mode):
    rng = np.random.default_rng(seed)
    m = random_similarity(rng, n)
    out = transform_step(sim(m), mode).entries
    assert np.array_equal(out, out.T)
    assert np.all(np.diag(out) == 1) and out.min() >= 0 and out.max() <= 1
    perm = rng.permutation(n)
    permuted = transform_step(sim(m[np.ix_(perm, perm)]), mode).entries
    assert np.array_equal(permuted, out[np.ix_(perm, perm)])


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**31))
def test_duplicate_rows_cohere(n, seed):
    rng = np.random.default_rng(seed)
    m = random_similarity(rng, n, low=0.05)
    # make object 1 an exact copy of object 0
    m[1, :] = m[0, :]
    m[:, 1] = m[:, 0]
    m[0, 1] = m[1, 0] = 1.0
    m[1, 1] = 1.0
    assert transform_step(sim(m), "GM").entries[0, 1] == 1.0
    outcome = iterate(sim(m))
    if outcome.partition is not HOMOGENEOUS:
        side = outcome.partition.left if 0 in outcome.partition.left else outcome.partition.right
        assert 1 in side


def test_closed_system_sensitivity():
    s4 = [[1, .9, .4, .2], [.9, 1, .5, .3], [.4, .5, 1, .7], [.2, .3, .7, 1]]
    full = transform_step(sim(s4)).entries[:3, :3]
    sub = transform_step(sim([r[:3] for r in s4[:3]])).entries
    assert np.abs(full - sub).max() >= 1e-3


def test_contrast_examples():
    assert contrast(1.0, 37.0) == 1.0
    assert contrast(0.5, 1 / 0.082) == pytest.approx(0.19958, abs=1e-4)
    assert contrast(0.5, 1 / 0.082) == pytest.approx(oracle.contrast(0.5, 1 / 0.082), rel=1e-12)
    tiny = contrast(0.89459, 80)
    assert 5.6e-12 < tiny < 5.6e-10
    # log-space form of the same value
    k = 0.082 * 80
    assert tiny == pytest.approx(math.exp((math.exp(0.89459) - 1) ** k - (math.e - 1) ** k), rel=1e-9)


@pytest.mark.parametrize("C", [0.1, 1, 10, 80, 150, 200])
def test_contrast_fixes_endpoints_and_matches_oracle(C):
    assert contrast(0.0, C) == 0.0
    assert contrast(1.0, C) == 1.0
    s = np.linspace(0, 1, 41)
    out = contrast(s, C)
    assert np.all(np.isfinite(out))
    assert np.all(np.diff(out) >= 0)
    if 0.082 * C < 12:  # oracle's direct form overflows beyond this
        for x, y in zip(s[1:-1], out[1:-1]):
            assert y == pytest.approx(oracle.contrast(x, C), rel=1e-9, abs=1e-300)


@given(st.floats(0.01, 0.99), st.floats(1, 100), st.floats(1, 100))
def test_contrast_decreases_with_C(s, c1, c2):
    lo, hi = sorted((c1, c2))
    assert contrast(s, hi) <= contrast(s, lo) + 1e-15


def test_contrast_domain():
    with pytest.raises(DomainError):
        contrast(1.2, 10)
    with pytest.raises(DomainError):
        contrast(0.5, 250)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        EtsmConfig(contrast_C=500)
    with pytest.raises(ConfigurationError):
        EtsmConfig(mean_mode="median")
    with pytest.raises(ConfigurationError):
        EtsmConfig(converge_eps=0)
    assert EtsmConfig(mean_mode="am").mean_mode == "AM"


def test_extract_partition_examples():
    blocks = sim(two_block([2, 2], 0.6))
    assert contrast(0.6, 80) < 1e-6
    assert extract_partition(blocks) == Partition((0, 1), (2, 3))
    assert extract_partition(sim(np.ones((4, 4)))) is HOMOGENEOUS
    near = extract_partition(sim(two_block([3, 2], 0.89459)))
    assert near == Partition((0, 1, 2), (3, 4))


def test_extract_partition_resolves_omega_close_to_one():
    m = two_block([3, 4], 1 - 1e-7)
    assert extract_partition(sim(m)) == Partition((0, 1, 2), (3, 4, 5, 6))
    assert extract_partition(sim(two_block([3, 4], 1 - 1e-11))) is HOMOGENEOUS


def test_extract_partition_three_blocks_is_violation():
    with pytest.raises(DichotomyViolationError) as err:
        extract_partition(sim(two_block([2, 2, 2], 0.3)))
    assert err.value.n_components == 3
    assert sum(err.value.histogram) == 15


def test_extract_partition_requires_positive_contrast():
    with pytest.raises(ConfigurationError):
        extract_partition(sim(two_block([2, 2], 0.5)), EtsmConfig(contrast_C=0))


def test_iterate_fixed_point():
    m = two_block([2, 2], 0.6)
    out = iterate(sim(m), tracked_pairs=[(0, 1), (0, 2)])
    assert out.t_used == 1
    assert out.partition == Partition((0, 1), (2, 3))
    assert out.omega == pytest.approx(0.6, abs=1e-15)
    assert out.trace.values == [[1.0, pytest.approx(0.6, abs=1e-15)]]


def test_iterate_hand_example():
    config = EtsmConfig()
    out = iterate(sim(S3, ["o1", "o2", "o3"]), config, tracked_pairs=[(0, 1)])
    assert out.partition == Partition((0, 1), (2,))
    # the dominant pair has settled to 1: its last change is below converge_eps
    last, previous = out.trace.values[-1][0], out.trace.values[-2][0]
    assert abs(last - previous) < config.converge_eps
    assert out.final_matrix.entries[0, 1] >= 1 - 1e-10
    assert out.omega == pytest.approx(S3_OMEGA, abs=1e-9)
    ref, _ = oracle.run(S3)
    assert out.omega == pytest.approx(ref[0][2], abs=1e-9)


def test_iterate_am_first_for_dissimilarity():
    rng = np.random.default_rng(3)
    pts = np.vstack([rng.normal(0, 0.3, (4, 3)), rng.normal(4, 0.3, (3, 3))])
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    d = np.triu(d, 1) + np.triu(d, 1).T
    out = iterate(SimilarityMatrix(d, DISSIMILARITY), tracked_pairs=[(0, 1)])
    ref, t = oracle.run(d.tolist(), first_am=True, eps=1e-12)
    assert out.partition == Partition((0, 1, 2, 3), (4, 5, 6))
    assert out.omega == pytest.approx(ref[0][5], abs=1e-8)
    assert math.isnan(out.trace.max_delta[0])


def test_iterate_single_object_and_pair():
    assert iterate(sim([[1.0]])).partition is HOMOGENEOUS
    pair = iterate(sim([[1, .4], [.4, 1]]))
    assert pair.t_used == 1


def test_iterate_t_max_without_split_is_violation():
    rng = np.random.default_rng(0)
    m = random_similarity(rng, 12)
    with pytest.raises(DichotomyViolationError) as err:
        iterate(sim(m), EtsmConfig(t_max=1))
    assert err.value.t_used == 1


def test_iterate_snapshots():
    out = iterate(sim(S3), snapshot_every=10)
    assert sorted(out.snapshots) == list(range(10, out.t_used + 1, 10))


def test_iterate_rejects_bad_pairs():
    with pytest.raises(ValidationError):
        iterate(sim(S3), tracked_pairs=[(0, 5)])


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 25), st.integers(0, 2**31))
def test_iterate_always_bifurcates(n, seed):
    m = random_similarity(np.random.default_rng(seed), n, low=0.01)
    out = iterate(sim(m))
    assert out.partition is not HOMOGENEOUS
    left, right = out.partition.sides
    assert sorted(left + right) == list(range(n))
    f = out.final_matrix.entries
    assert f[np.ix_(left, left)].min() >= 1 - 1e-7
    assert f[np.ix_(right, right)].min() >= 1 - 1e-7
    assert out.omega < 1 - 1e-9
