import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmc.core import ObservationSet
from csmc.errors import DomainError
from csmc.sampling import Rng, sample_columns, sample_mask, split_train_test


def test_rng_child_streams_are_independent_and_reproducible():
    root = Rng(42)
    a = root.child(1).generator().standard_normal(4)
    b = root.child(2).generator().standard_normal(4)
    assert not np.allclose(a, b)
    assert np.array_equal(a, root.child(1).generator().standard_normal(4))


def test_rng_rejects_unknown_algorithm():
    with pytest.raises(DomainError):
        Rng(0, algorithm="mt19937")


def test_sample_columns_exhaustive():
    sel = sample_columns(10, 1.0, Rng(0))
    assert list(sel.indices) == list(range(10))
    assert sel.alpha == 1.0


def test_sample_columns_cardinality_and_distinctness():
    sel = sample_columns(1000, 0.2, Rng(7))
    assert len(sel) == 200
    assert len(set(sel.indices.tolist())) == 200
    assert np.all(np.diff(sel.indices) > 0)


def test_sample_columns_rounding_is_half_even_with_floor_one():
    assert len(sample_columns(5, 0.5, Rng(0))) == 2  # round(2.5) -> 2
    assert len(sample_columns(7, 0.5, Rng(0))) == 4  # round(3.5) -> 4
    assert len(sample_columns(100, 0.001, Rng(0))) == 1


def test_sample_columns_domain_errors():
    for alpha in (0.0, -0.2, 1.2):
        with pytest.raises(DomainError):
            sample_columns(10, alpha, Rng(0))
    with pytest.raises(DomainError):
        sample_columns(0, 0.5, Rng(0))


def test_sample_columns_monte_carlo_uniformity():
    # picking 2 of 4 columns: each appears with frequency 1/2 (binomial
    # oracle: se ~ 0.0016 over 1e5 seeds, so 1.5% is a >9-sigma band)
    n_seeds = 100_000
    hits = np.zeros(4)
    for seed in range(n_seeds):
        hits[sample_columns(4, 0.5, Rng(seed)).indices] += 1
    freq = hits / n_seeds
    assert np.all(np.abs(freq - 0.5) < 0.015)


def test_sample_mask_examples():
    full = sample_mask(2, 2, 1.0, Rng(0))
    assert len(full) == 4
    big = sample_mask(300, 1000, 0.5, Rng(1))
    assert len(big) == 150_000
    pairs = set(zip(big.rows.tolist(), big.cols.tolist()))
    assert len(pairs) == 150_000


def test_sample_mask_monte_carlo_uniformity():
    n_seeds = 100_000
    hits = np.zeros((3, 3))
    for seed in range(n_seeds):
        om = sample_mask(3, 3, 1.0 / 9.0, Rng(seed))
        assert len(om) == 1
        hits[om.rows[0], om.cols[0]] += 1
    freq = hits / n_seeds
    assert np.all(np.abs(freq - 1.0 / 9.0) < 0.01)


def test_sample_mask_domain_errors():
    with pytest.raises(DomainError):
        sample_mask(10, 10, 0.0, Rng(0))
    with pytest.raises(DomainError):
        sample_mask(10, 10, 1.5, Rng(0))
    with pytest.raises(DomainError):
        sample_mask(3, 3, 0.05, Rng(0))  # 0.45 expected cells


def test_split_train_test_partition():
    om = sample_mask(10, 10, 1.0, Rng(3))
    train, test = split_train_test(om, 0.8, Rng(5))
    assert len(train) == 80 and len(test) == 20
    all_pairs = set(om)
    assert set(train) | set(test) == all_pairs
    assert set(train) & set(test) == set()


def test_split_train_test_reproducible():
    om = sample_mask(8, 9, 0.6, Rng(11))
    a = split_train_test(om, 0.7, Rng(2))
    b = split_train_test(om, 0.7, Rng(2))
    assert a[0] == b[0] and a[1] == b[1]


def test_split_train_test_domain_errors():
    om = sample_mask(4, 4, 1.0, Rng(0))
    for frac in (0.0, 1.0):
        with pytest.raises(DomainError):
            split_train_test(om, frac, Rng(0))
    tiny = ObservationSet.from_pairs((2, 2), [(0, 0)])
    with pytest.raises(DomainError):
        split_train_test(tiny, 0.5, Rng(0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 0.9), st.integers(2, 8), st.integers(2, 8), st.floats(0.2, 1.0))
def test_split_partitions_every_random_mask(seed, frac, n1, n2, rho):
    if rho * n1 * n2 < 1:
        rho = 1.0
    om = sample_mask(n1, n2, rho, Rng(seed))
    if len(om) < 2:
        return
    train, test = split_train_test(om, frac, Rng(seed + 1))
    assert len(train) == round(frac * len(om))
    assert set(train) | set(test) == set(om)
    assert not set(train) & set(test)


def test_seed_determinism_across_samplers():
    assert sample_columns(50, 0.3, Rng(9)).indices.tolist() == sample_columns(50, 0.3, Rng(9)).indices.tolist()
    assert sample_mask(6, 7, 0.4, Rng(9)) == sample_mask(6, 7, 0.4, Rng(9))
