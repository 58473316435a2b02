from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from ckrank.errors import DegenerateData, MissingCriticalValue
from ckrank.limitdist import CritValRow, CritValTable
from ckrank.lrv import estimate_w0, lrv_estimate
from ckrank.ranktest import (
    CSV_HEADER,
    batch_eigenvalues,
    build_moments,
    build_zstar,
    compensated_cumsum,
    demean,
    lambda_stat,
    pencil_eigenvalues,
    run_test,
    statistic_from_eigenvalues,
)
from ckrank.rng import RngState
from ckrank.simulate import SeriesMatrix, mc_design, occupation, retained, simulate_path, split_regimes

from conftest import rel_err

Y6 = [1.0, -0.5, 2.0, -1.5, 0.3, -0.2]
X6 = [0.4, 1.1, -0.7, 0.9, 2.2, -1.3]


def brute_force_statistic(rows, k):
    """Dense oracle: explicit sums, det(lam B - A) interpolated as a polynomial."""
    n, d = len(rows), len(rows[0])
    means = [sum(r[j] for r in rows) / n for j in range(d)]
    m = [[r[j] - means[j] for j in range(d)] for r in rows]
    s, acc = [], [0.0] * d
    for row in m:
        acc = [a + b for a, b in zip(acc, row)]
        s.append(list(acc))
    A = np.array([[sum(r[i] * r[j] for r in m) / n for j in range(d)] for i in range(d)])
    B = np.array([[sum(r[i] * r[j] for r in s) / n**3 for j in range(d)] for i in range(d)])
    # det(lam B - A) has degree d; recover its coefficients from d + 1 evaluations
    nodes = np.linspace(0.0, 2.0 * np.trace(A) / np.trace(B) + 1.0, d + 1)
    vals = [np.linalg.det(t * B - A) for t in nodes]
    coeffs = np.polyfit(nodes, vals, d)
    roots = np.sort(np.roots(coeffs).real)
    deriv = np.polyder(coeffs)
    for _ in range(5):
        roots = roots - np.polyval(coeffs, roots) / np.polyval(deriv, roots)
    return float(np.sum(np.sort(roots)[:k]))


def simulated(kind="nonlinear", n=300, seed=0):
    """First path from ``seed`` onward with at least 15% of observations in each regime."""
    params, _ = mc_design(kind)
    while True:
        series = simulate_path(params, n, RngState(seed)).series
        if retained(occupation(series.y), 0.15):
            return series
        seed += 1


class TestTransforms:
    def test_build_zstar_rows(self):
        z = build_zstar(np.array([[3.0, 5.0], [-2.0, 5.0], [0.0, 1.0]]))
        assert_array_equal(z.values, [[3, 0, 5], [0, -2, 5], [0, 0, 1]])
        assert z.roles == ("y+", "y-", "x1")

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
    def test_zstar_parts_reconstruct_y(self, y):
        zs = build_zstar(np.array(y)[:, None]).values
        assert_array_equal(zs[:, 0] + zs[:, 1], y)

    def test_demean_examples(self):
        assert_array_equal(demean(np.full((4, 1), 5.0)), 0.0)
        assert_array_equal(demean(np.array([[1.0], [3.0]])), [[-1.0], [1.0]])
        m = np.random.default_rng(0).standard_normal((50, 3)) + 7.0
        once = demean(m)
        assert np.abs(once.mean(axis=0)).max() < 1e-12 * np.abs(m).max()
        assert_allclose(demean(once), once, atol=1e-14)
        with pytest.raises(ValueError):
            demean(np.ones((1, 2)))

    def test_demean_keeps_series_roles(self):
        s = SeriesMatrix(np.array([[1.0, 2.0], [3.0, 6.0]]), ("y", "x1"))
        out = demean(s)
        assert out.roles == ("y", "x1")
        assert_array_equal(out.values, [[-1.0, -2.0], [1.0, 2.0]])


class TestCumsum:
    def test_matches_exact_prefix_sums(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((5000, 2)) * 10.0 ** rng.integers(-3, 4, (5000, 2))
        got = compensated_cumsum(m)
        exact = np.empty_like(m)
        for j in range(2):
            acc = Fraction(0)
            for t in range(len(m)):
                acc += Fraction(m[t, j])
                exact[t, j] = float(acc)
        plain = np.cumsum(m, axis=0)
        scale = np.abs(m).sum(axis=0)
        assert np.max(np.abs(got - exact) / scale) <= np.max(np.abs(plain - exact) / scale) + 1e-16
        assert np.max(np.abs(got - exact) / scale) < 1e-14

    def test_batched_and_short_inputs(self):
        m = np.arange(12.0).reshape(2, 3, 2)
        assert_array_equal(compensated_cumsum(m), np.cumsum(m, axis=1))
        assert_array_equal(compensated_cumsum(np.ones((130, 1)))[:, 0], np.arange(1.0, 131.0))


class TestMoments:
    def test_two_rows(self):
        # s_1 = a, s_2 = 0; with n = 2 > d the example is one-dimensional
        a = np.array([1.5])
        mp = build_moments(np.vstack([a, -a]))
        assert_allclose(mp.A, np.outer(a, a))
        assert_allclose(mp.B, np.outer(a, a) / 8.0)

    def test_two_rows_rank_one_in_higher_dimension(self):
        a = np.array([1.5, -2.0])
        with pytest.raises(DegenerateData):
            build_moments(np.vstack([a, -a, np.zeros(2)]))

    def test_symmetric(self):
        mp = build_moments(demean(np.random.default_rng(2).standard_normal((100, 4)).cumsum(axis=0)))
        assert_array_equal(mp.A, mp.A.T)
        assert_array_equal(mp.B, mp.B.T)

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateData):
            build_moments(np.zeros((10, 2)))

    def test_single_nonzero_column_is_degenerate(self):
        m = np.zeros((10, 3))
        m[:, 1] = demean(np.arange(10.0))
        with pytest.raises(DegenerateData):
            build_moments(m)

    def test_too_short(self):
        with pytest.raises(DegenerateData):
            build_moments(np.ones((2, 3)))


class TestLambda:
    @pytest.mark.parametrize("q0", [1, 2])
    def test_tiny_dataset_against_brute_force(self, q0):
        z = np.column_stack([Y6, X6])
        mb = lambda_stat(z, q0, "mb")
        rows = [[max(y, 0.0), min(y, 0.0), x] for y, x in zip(Y6, X6)]
        assert rel_err(mb.lambda_stat, brute_force_statistic(rows, q0 + 1)) < 1e-9
        sb = lambda_stat(z, q0, "sb")
        assert rel_err(sb.lambda_stat, brute_force_statistic([[y, x] for y, x in zip(Y6, X6)], q0)) < 1e-9

    def test_eigenvalues_ascending_and_nonnegative(self):
        out = lambda_stat(simulated(), 1, "mb")
        assert out.eigenvalues.shape == (3,)
        assert np.all(np.diff(out.eigenvalues) >= 0) and out.eigenvalues[0] >= 0
        assert out.lambda_stat == pytest.approx(out.eigenvalues[:2].sum())
        assert out.reject is None and out.crit_value is None

    def test_monotone_in_q0(self):
        z = simulated(n=200, seed=3)
        mb = [lambda_stat(z, q0, "mb").lambda_stat for q0 in (1, 2)]
        sb = [lambda_stat(z, q0, "sb").lambda_stat for q0 in (1, 2)]
        assert mb[0] <= mb[1] and sb[0] <= sb[1]

    def test_single_column_mb(self):
        y = 5.0 * np.sin(np.arange(200) / 15.0) + RngState(8).standard_normal(200)
        out = lambda_stat(y, 1, "mb")
        assert out.eigenvalues.shape == (2,)

    def test_q0_range(self):
        with pytest.raises(ValueError):
            lambda_stat(simulated(n=50), 3, "mb")
        with pytest.raises(ValueError):
            lambda_stat(simulated(n=50), 1, "johansen")

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_invariance_to_column_transforms_and_shifts(self, seed):
        rng = np.random.default_rng(seed)
        zs = split_regimes(simulated(n=120, seed=seed).values)
        base = pencil_eigenvalues(zs)
        M = rng.standard_normal((3, 3)) + 2.0 * np.eye(3)
        shift = rng.uniform(-50, 50, 3)
        assert rel_err(pencil_eigenvalues(zs @ M.T), base) < 1e-8
        assert rel_err(pencil_eigenvalues(zs + shift), base) < 1e-8

    def test_batch_matches_single(self):
        paths = np.stack([simulated(n=150, seed=100 * s).values for s in range(5)])
        for variant, q0 in (("mb", 1), ("mb", 2), ("sb", 1), ("sb", 2)):
            eig, ok = batch_eigenvalues(paths, variant)
            assert ok.all()
            stats = statistic_from_eigenvalues(eig, q0, variant)
            for j in range(5):
                single = lambda_stat(paths[j], q0, variant).lambda_stat
                assert stats[j] == pytest.approx(single, rel=1e-10)


def table_with(crits, variant="mb", q0=1, tau=0.15, alpha=0.1):
    return CritValTable([CritValRow(variant, q0, tau, alpha, w0, c, 5000, 10000, 2000, 0) for w0, c in crits])


class TestRunTest:
    def test_decision_follows_critical_value(self):
        z = simulated(n=300, seed=2)
        lam = lambda_stat(z, 1, "mb").lambda_stat
        high = run_test(z, 1, "mb", table_with([(0.0, lam * 2)]), 0.1)
        low = run_test(z, 1, "mb", table_with([(0.0, lam / 2)]), 0.1)
        assert high.reject is False and low.reject is True
        assert high.tau == 0.15 and high.crit_value == lam * 2

    def test_sb_uses_unconditional_row(self):
        z = simulated(n=300, seed=2)
        out = run_test(z, 1, "sb", table_with([(0.0, 1.0)], variant="sb", tau=0.0), 0.1)
        assert out.tau == 0.0 and out.reject is True

    def test_missing_row(self):
        z = simulated(n=300, seed=2)
        with pytest.raises(MissingCriticalValue):
            run_test(z, 2, "mb", table_with([(0.0, 1.0)]), 0.1)
        with pytest.raises(MissingCriticalValue):
            run_test(z, 1, "mb", table_with([(0.0, 1.0)]), 0.05)

    def test_nonzero_initial_value_interpolates(self):
        z = simulated(n=400, seed=6)
        y0 = 3.0
        est = lrv_estimate(z.y, y0=y0, regime="+")
        w0 = estimate_w0(y0, z.n, est).value
        table = table_with([(0.0, 100.0), (1.0, 200.0)])
        out = run_test(z, 1, "mb", table, 0.1, y0=y0)
        assert out.w0_estimate == pytest.approx(w0)
        assert out.crit_value == pytest.approx(100.0 + 100.0 * w0)

    def test_report_formats(self):
        z = simulated(n=300, seed=2)
        out = run_test(z, 1, "mb", table_with([(0.0, 1e9)]), 0.1)
        fields = out.csv_row().split(",")
        assert len(fields) == len(CSV_HEADER.split(","))
        assert fields[0] == "mb" and fields[-1] == "0"
        assert "fail to reject" in out.summary()
