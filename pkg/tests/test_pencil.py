from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ckrank.errors import NegativeEigenvalue, NotPositiveDefinite
from ckrank.pencil import cholesky, gen_eig_pencil, pencil_batch, sym_eig

from conftest import random_spd, rel_err


def faddeev_leverrier(m):
    """Characteristic polynomial coefficients (highest degree first)."""
    d = m.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(m)
    for k in range(1, d + 1):
        M = m @ M + coeffs[-1] * np.eye(d)
        coeffs.append(-np.trace(m @ M) / k)
    return np.array(coeffs)


def polished_roots(coeffs):
    roots = np.sort(np.roots(coeffs).real)
    deriv = np.polyder(coeffs)
    for _ in range(5):
        roots = roots - np.polyval(coeffs, roots) / np.polyval(deriv, roots)
    return np.sort(roots)


class TestCholesky:
    def test_identity(self):
        assert_allclose(cholesky(np.eye(3)), np.eye(3))

    def test_hand_factor(self):
        L = cholesky([[4.0, 2.0], [2.0, 5.0]])
        assert_allclose(L, [[2.0, 0.0], [1.0, 2.0]])
        assert_allclose(L @ L.T, [[4.0, 2.0], [2.0, 5.0]])

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            cholesky([[1.0, 0.5], [0.0, 1.0]])

    def test_stacked(self):
        rng = np.random.default_rng(0)
        ms = np.stack([random_spd(rng, 4) for _ in range(5)])
        L = cholesky(ms)
        assert_allclose(L @ np.swapaxes(L, -1, -2), ms, rtol=1e-12, atol=1e-12)
        assert np.all(np.triu(L, 1) == 0)


class TestSymEig:
    def test_diagonal(self):
        w, V = sym_eig(np.diag([3.0, 1.0]))
        assert_allclose(w, [1.0, 3.0])
        assert_allclose(np.abs(V), [[0.0, 1.0], [1.0, 0.0]])

    def test_identity(self):
        w, _ = sym_eig(np.eye(4))
        assert_allclose(w, np.ones(4))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_5x5_against_characteristic_polynomial(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((5, 5))
        m = a + a.T
        w, V = sym_eig(m)
        assert rel_err(w, polished_roots(faddeev_leverrier(m))) < 1e-9
        assert_allclose(V.T @ V, np.eye(5), atol=1e-13)
        assert_allclose(m @ V, V * w, atol=1e-12)


class TestGenEigPencil:
    def test_diagonal_pencil(self):
        res = gen_eig_pencil(np.diag([2.0, 8.0]), np.diag([1.0, 2.0]))
        assert_allclose(res.eigenvalues, [2.0, 4.0])
        assert res.condition_flag is False

    def test_identity_pencil(self):
        b = random_spd(np.random.default_rng(1), 4)
        assert_allclose(gen_eig_pencil(b, b).eigenvalues, np.ones(4), rtol=1e-12)

    def test_random_pairs_against_dense_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            d = int(rng.integers(1, 7))
            b = random_spd(rng, d, cond=1e3)
            g = rng.standard_normal((d, int(rng.integers(1, d + 1))))
            a = g @ g.T  # PSD, possibly singular
            oracle = np.sort(np.linalg.eigvals(np.linalg.solve(b, a)).real)
            oracle = np.where(np.abs(oracle) < 1e-12 * np.abs(oracle).max(), 0.0, oracle)
            got = gen_eig_pencil(a, b).eigenvalues
            assert rel_err(got, oracle) < 1e-9

    def test_vectors_diagonalize_both_matrices(self):
        rng = np.random.default_rng(2)
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        res, V = gen_eig_pencil(a, b, return_vectors=True)
        assert_allclose(V.T @ b @ V, np.eye(4), atol=1e-12)
        assert_allclose(a @ V, b @ V * res.eigenvalues, atol=1e-10)

    def test_psd_rounding_is_clamped(self):
        a = np.array([[1.0, 1.0], [1.0, 1.0]])
        w = gen_eig_pencil(a, np.eye(2)).eigenvalues
        assert w[0] == 0.0 and w[1] == pytest.approx(2.0)

    def test_indefinite_a_raises(self):
        with pytest.raises(NegativeEigenvalue):
            gen_eig_pencil(np.diag([-1.0, 1.0]), np.eye(2))

    def test_singular_b_raises(self):
        with pytest.raises(NotPositiveDefinite):
            gen_eig_pencil(np.eye(2), np.diag([1.0, 0.0]))

    def test_condition_flag(self):
        res = gen_eig_pencil(np.eye(2), np.diag([1.0, 1e-14]))
        assert res.condition_flag is True

    def test_exact_rational_pencil(self):
        # det(lam b - a) = 0 with a = [[2,1],[1,2]], b = [[2,0],[0,1]]:
        # 2 lam^2 - 6 lam + 3 = 0  ->  lam = (3 +/- sqrt 3) / 2
        w = gen_eig_pencil([[2.0, 1.0], [1.0, 2.0]], [[2.0, 0.0], [0.0, 1.0]]).eigenvalues
        assert_allclose(w, [(3 - np.sqrt(3)) / 2, (3 + np.sqrt(3)) / 2], rtol=1e-14)

    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_congruence_invariance(self, seed, d):
        rng = np.random.default_rng(seed)
        a, b = random_spd(rng, d), random_spd(rng, d)
        M = rng.standard_normal((d, d)) + 3 * np.eye(d)
        w1 = gen_eig_pencil(a, b).eigenvalues
        w2 = gen_eig_pencil(M @ a @ M.T, M @ b @ M.T).eigenvalues
        assert rel_err(w2, w1) < 1e-8

    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_eigenvalue_sum_is_trace(self, seed, d):
        rng = np.random.default_rng(seed)
        a, b = random_spd(rng, d), random_spd(rng, d)
        w = gen_eig_pencil(a, b).eigenvalues
        assert np.sum(w) == pytest.approx(np.trace(np.linalg.solve(b, a)), rel=1e-10)
        assert np.all(np.diff(w) >= 0)


def test_batch_matches_single_and_marks_failures():
    rng = np.random.default_rng(5)
    a = np.stack([random_spd(rng, 3) for _ in range(4)])
    b = np.stack([random_spd(rng, 3) for _ in range(4)])
    b[2] = np.diag([1.0, 1.0, -1.0])
    w, flag, ok = pencil_batch(a, b)
    assert ok.tolist() == [True, True, False, True]
    assert np.all(np.isnan(w[2]))
    for i in (0, 1, 3):
        assert_allclose(w[i], gen_eig_pencil(a[i], b[i]).eigenvalues, rtol=1e-14)
