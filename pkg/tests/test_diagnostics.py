import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmc.diagnostics import (
    coherence,
    condition_number,
    recovery_bounds,
    subspace_coherence,
)
from csmc.errors import DomainError


def coherence_oracle(x, rank_tol=1e-10):
    # brute-force evaluation of the subspace-coherence definition from an
    # independent SVD: mu(U) = (n / k) max_i ||U U^T e_i||^2
    u, s, vt = np.linalg.svd(x)
    r = int((s > rank_tol * s[0]).sum())
    out = []
    for basis in (u[:, :r], vt[:r].T):
        n = basis.shape[0]
        proj = basis @ basis.T
        norms = [np.linalg.norm(proj @ np.eye(n)[:, i]) ** 2 for i in range(n)]
        out.append(n / r * max(norms))
    return max(out), r


def random_orthonormal(rng, n, k):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q


def test_subspace_coherence_reference_values():
    flat = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
    assert subspace_coherence(flat) == pytest.approx(1.0, abs=1e-12)
    axis = np.array([[0.0], [1.0]])
    assert subspace_coherence(axis) == pytest.approx(2.0, abs=1e-12)
    assert subspace_coherence(np.eye(5)) == pytest.approx(1.0, abs=1e-12)


def test_subspace_coherence_rejects_non_orthonormal():
    with pytest.raises(DomainError):
        subspace_coherence(np.array([[1.0], [1.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 6), st.integers(6, 20))
def test_subspace_coherence_bounds(seed, k, n):
    basis = random_orthonormal(np.random.default_rng(seed), n, k)
    mu = subspace_coherence(basis)
    assert 1.0 - 1e-9 <= mu <= n / k + 1e-9


def test_coherence_examples():
    mu, r = coherence(np.eye(4))
    assert mu == pytest.approx(1.0, abs=1e-12) and r == 4
    spike = np.zeros((4, 4))
    spike[0, 0] = 1.0
    mu, r = coherence(spike)
    assert mu == pytest.approx(4.0, abs=1e-12) and r == 1


def test_coherence_matches_bruteforce_oracle():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((50, 3)) @ rng.standard_normal((3, 80))
    mu, r = coherence(x)
    mu_ref, r_ref = coherence_oracle(x)
    assert r == r_ref == 3
    assert mu == pytest.approx(mu_ref, abs=1e-8)


def test_coherence_zero_matrix_rejected():
    with pytest.raises(DomainError):
        coherence(np.zeros((3, 3)))


def test_coherence_invariances():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((12, 4)) @ rng.standard_normal((4, 9))
    mu, r = coherence(x)
    perm = rng.permutation(9)
    mu_p, r_p = coherence(x[:, perm])
    assert mu_p == pytest.approx(mu, rel=1e-9) and r_p == r
    mu_s, r_s = coherence(-2.5 * x)
    assert mu_s == pytest.approx(mu, rel=1e-9) and r_s == r


def test_condition_number_examples():
    assert condition_number(np.eye(3)) == pytest.approx(1.0, abs=1e-12)
    assert condition_number(np.diag([4.0, 2.0])) == pytest.approx(2.0, abs=1e-12)
    rng = np.random.default_rng(1)
    q1 = random_orthonormal(rng, 6, 3)
    q2 = random_orthonormal(rng, 5, 3)
    x = q1 @ np.diag([10.0, 5.0, 1.0]) @ q2.T
    assert condition_number(x) == pytest.approx(10.0, abs=1e-9)
    with pytest.raises(DomainError):
        condition_number(np.zeros((2, 2)))


def test_recovery_bounds_reference_values():
    b = recovery_bounds(300, 1000, 5, 5, 1.0, 1.0, 1.0, math.log(10.0))
    assert b.d_min == 137  # ceil(35 * (ln 10 + ln 5))
    b = recovery_bounds(300, 1000, 1, 1, 1.0, 1.0, 1.0, 1.0)
    assert b.d_min == 7  # ln 1 = 0
    assert recovery_bounds(10, 10, 2, 2, 1.0, 1.0, 1.0, math.log(3.0)).success_prob == 0.0


def test_recovery_bounds_formulas():
    gamma = 2.0
    b = recovery_bounds(60, 200, 4, 3, 2.5, 3.0, 2.0, gamma)
    assert b.d_min == math.ceil(7 * 2.5 * 4 * (gamma + math.log(4)))
    assert b.omega_min == math.ceil(3 * 200 * 3.0 * (gamma + math.log(200 * 3 / 2)))
    assert b.thm1_d_min == math.ceil(1.06 * 2.5 * 4 * math.log(4 * 200))
    assert b.coherence_inflation == pytest.approx(100 * 4.0 * 2.5)
    assert 0.0 < b.success_prob < 1.0


def test_recovery_bounds_monotone_in_gamma_rank_and_coherence():
    base = recovery_bounds(100, 400, 3, 3, 1.5, 1.5, 1.2, 1.0)
    assert recovery_bounds(100, 400, 3, 3, 1.5, 1.5, 1.2, 2.0).d_min >= base.d_min
    assert recovery_bounds(100, 400, 4, 4, 1.5, 1.5, 1.2, 1.0).d_min >= base.d_min
    assert recovery_bounds(100, 400, 3, 3, 2.5, 1.5, 1.2, 1.0).d_min >= base.d_min
    assert recovery_bounds(100, 400, 3, 3, 1.5, 2.5, 1.2, 1.0).omega_min >= base.omega_min
    assert recovery_bounds(100, 400, 3, 3, 1.5, 1.5, 1.2, 2.0).omega_min >= base.omega_min


def test_recovery_bounds_domain_errors():
    with pytest.raises(DomainError):
        recovery_bounds(10, 10, 2, 2, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        recovery_bounds(10, 10, 2, 3, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        recovery_bounds(10, 10, 0, 0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        recovery_bounds(10, 10, 2, 2, 0.5, 1.0, 1.0, 1.0)
