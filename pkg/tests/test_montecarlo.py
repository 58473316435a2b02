from __future__ import annotations

import numpy as np
import pytest

from ckrank.errors import RetentionExhausted
from ckrank.montecarlo import (
    CSV_HEADER,
    McConfig,
    format_cells,
    replicate,
    run_cell,
    run_table,
    verify_lln,
)
from ckrank.ranktest import lambda_stat
from ckrank.simulate import mc_design, occupation, replication_key, retained, simulate_paths


def test_redraws_follow_attempt_counter():
    cfg = McConfig(reps=40, sample_sizes=(60,), base_seed=3)
    stats = replicate(cfg, "nonlinear", 60)
    params, _ = mc_design("nonlinear")
    assert stats.discards.sum() > 0
    for j in range(40):
        attempts = int(stats.discards[j])
        keys = [replication_key(3, "nonlinear", 60, j, a) for a in range(attempts + 1)]
        paths = simulate_paths(params, 60, keys)
        flags = [retained(occupation(p[:, 0]), 0.15) for p in paths]
        assert flags == [False] * attempts + [True]
        expected = lambda_stat(paths[-1], 1, "mb").lambda_stat
        assert stats.mb[j, :2].sum() == pytest.approx(expected, rel=1e-10)


def test_worker_count_does_not_change_results(small_tables):
    mb, sb = small_tables
    kw = dict(mb_table=mb, sb_table=sb, designs=("nonlinear",), sample_sizes=(80,), reps=600, base_seed=9)
    one = format_cells(run_table(McConfig(**kw)))
    two = format_cells(run_table(McConfig(workers=2, **kw)))
    assert one == two


def test_single_replication(small_tables):
    mb, sb = small_tables
    cfg = McConfig(mb_table=mb, sb_table=sb, reps=1, sample_sizes=(100,))
    cells = run_table(cfg)
    assert len(cells) == 8
    assert {c.rejection_rate for c in cells} <= {0.0, 1.0}
    assert format_cells(cells).splitlines()[0] == CSV_HEADER


def test_run_cell_matches_table(small_tables):
    mb, sb = small_tables
    cfg = McConfig(mb_table=mb, sb_table=sb, designs=("linear",), sample_sizes=(100,), reps=300)
    cells = run_table(cfg)
    single = run_cell(cfg, "linear", 100, 2, "mb")
    assert single in cells


def test_missing_table_fails_before_simulating(small_tables):
    mb, _ = small_tables
    with pytest.raises(ValueError):
        run_table(McConfig(mb_table=mb, reps=10))


def test_retention_exhausted():
    # with a 0.49 threshold almost no short path is retained
    cfg = McConfig(reps=5, retention_threshold=0.49, max_redraws_per_rep=2)
    with pytest.raises(RetentionExhausted):
        replicate(cfg, "linear", 30)


@pytest.mark.parametrize("kwargs", [dict(reps=0), dict(retention_threshold=0.5), dict(designs=("cubic",)),
                                    dict(sample_sizes=(5,))])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        McConfig(**kwargs)


def test_lln_nonlinear_design():
    report = verify_lln("nonlinear", 20_000, 1)
    assert report.target_mean == pytest.approx(-2.0)
    assert report.passes()
    assert report.count_plus + report.count_minus == 20_000
    assert "mean" in report.summary()


def test_lln_linear_design_full_sample():
    # y is close to a random walk here, so regime means settle slowly; only check the full sample
    report = verify_lln("linear", 20_000, 1)
    assert abs(report.mean - report.target_mean) <= 0.1
    assert report.min_eig_plus > 0 and report.min_eig_minus > 0
