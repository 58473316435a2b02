from __future__ import annotations

import functools

import numpy as np
import pytest

from ckrank.limitdist import CritValTable, LimitSimConfig, make_table, simulate_limit_draws


def rel_err(actual, expected):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = np.maximum(np.abs(expected).max(initial=0.0), np.finfo(float).tiny)
    return float(np.abs(actual - expected).max(initial=0.0) / scale)


def random_spd(rng, d, cond=100.0):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    w = np.exp(rng.uniform(0.0, np.log(cond), d))
    return (q * w) @ q.T


@pytest.fixture(scope="session")
def small_tables():
    """Coarse MB and SB tables (cheap, for plumbing tests only)."""
    mb = CritValTable()
    sb = CritValTable()
    for q0 in (1, 2):
        mb = mb.merge(make_table(LimitSimConfig("mb", q0, grid=200, reps=3000, seed=11, alphas=(0.05, 0.10))))
        sb = sb.merge(make_table(LimitSimConfig("sb", q0, grid=200, reps=2000, seed=11, taus=(0.0,), alphas=(0.05, 0.10))))
    return mb, sb


@functools.lru_cache(maxsize=None)
def limit_draws(variant, q0, grid, reps, seed):
    """Limit draws shared between test modules (computed once per session)."""
    return simulate_limit_draws(variant, q0, grid, reps, seed)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
