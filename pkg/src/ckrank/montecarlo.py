"""Rejection-rate study for the bivariate designs and a numeric LLN check.

Replication ``j`` of design ``d`` at sample size ``n`` draws its
innovations from ``replication_key(base_seed, d, n, j, attempt)``, starting
at ``attempt = 0`` and moving to the next attempt whenever the path spends
fewer than ``ceil(threshold * n)`` periods in either regime. Replications
are grouped in fixed-size chunks that may run in separate processes; since
every chunk is a pure function of its replication indices, the results do
not depend on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateData, RetentionExhausted
from .limitdist import CritValTable
from .ranktest import batch_eigenvalues, statistic_from_eigenvalues
from .rng import RngState
from .simulate import (
    DESIGN_IDS,
    DESIGNS,
    mc_design,
    min_regime_count,
    replication_key,
    simulate_path,
    simulate_paths,
    split_regimes,
)

CHUNK = 250
CSV_HEADER = "design,n,q0,variant,rejection_rate,reps,mean_discards"
TABLE_ORDER = (("sb", 1), ("mb", 1), ("sb", 2), ("mb", 2))


@dataclass(frozen=True)
class McConfig:
    """Settings for the rejection-rate study.

    ``designs`` lists the designs covered by :func:`run_table`.
    """

    mb_table: CritValTable | None = None
    sb_table: CritValTable | None = None
    designs: tuple = ("linear", "nonlinear")
    sample_sizes: tuple = (200, 500, 1000, 1500)
    reps: int = 10_000
    base_seed: int = 0
    retention_threshold: float = 0.15
    alpha: float = 0.10
    tau: float = 0.15
    max_redraws_per_rep: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0.0 <= self.retention_threshold < 0.5:
            raise ValueError("retention_threshold must lie in [0, 0.5)")
        for d in self.designs:
            if d not in DESIGNS:
                raise ValueError(f"unknown design {d!r}")
        if any(n < 10 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 10")


@dataclass(frozen=True)
class McCell:
    design: str
    n: int
    q0: int
    variant: str
    rejection_rate: float
    reps_used: int
    mean_discards_per_rep: float

    def csv(self) -> str:
        return (
            f"{self.design},{self.n},{self.q0},{self.variant},"
            f"{self.rejection_rate!r},{self.reps_used},{self.mean_discards_per_rep!r}"
        )


@dataclass(frozen=True, eq=False)
class ReplicationStats:
    """Pencil eigenvalues of every retained replication of one (design, n)."""

    mb: np.ndarray
    sb: np.ndarray
    discards: np.ndarray


def _retained_mask(paths: np.ndarray, threshold: float) -> np.ndarray:
    n = paths.shape[1]
    plus = np.count_nonzero(paths[:, :, 0] >= 0.0, axis=1)
    return np.minimum(plus, n - plus) >= min_regime_count(threshold, n)


def _chunk(args):
    design, n, base_seed, threshold, max_redraws, start, stop = args
    params, _ = mc_design(design)
    reps = np.arange(start, stop)
    paths = np.empty((len(reps), n, params.p))
    discards = np.zeros(len(reps), dtype=np.int64)
    pending = np.ones(len(reps), dtype=bool)
    attempt = 0
    while np.any(pending):
        if attempt > max_redraws:
            raise RetentionExhausted(
                f"{design}, n={n}: replication(s) {reps[pending][:5].tolist()} not retained after {max_redraws} redraws"
            )
        idx = np.flatnonzero(pending)
        keys = [replication_key(base_seed, design, n, int(reps[i]), attempt) for i in idx]
        z = simulate_paths(params, n, keys)
        keep = _retained_mask(z, threshold)
        paths[idx[keep]] = z[keep]
        discards[idx[~keep]] += 1
        pending[idx[keep]] = False
        attempt += 1
    mb, ok_mb = batch_eigenvalues(paths, "mb")
    sb, ok_sb = batch_eigenvalues(paths, "sb")
    if not (np.all(ok_mb) and np.all(ok_sb)):
        raise DegenerateData(f"{design}, n={n}: degenerate moments in a retained replication")
    return mb, sb, discards


def replicate(cfg: McConfig, design: str, n: int) -> ReplicationStats:
    """Simulate all ``cfg.reps`` retained replications of one (design, n)."""
    tasks = [
        (design, n, cfg.base_seed, cfg.retention_threshold, cfg.max_redraws_per_rep, s, min(s + CHUNK, cfg.reps))
        for s in range(0, cfg.reps, CHUNK)
    ]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_chunk, tasks))
    else:
        parts = [_chunk(t) for t in tasks]
    return ReplicationStats(
        mb=np.concatenate([p[0] for p in parts]),
        sb=np.concatenate([p[1] for p in parts]),
        discards=np.concatenate([p[2] for p in parts]),
    )


def _critical_value(cfg: McConfig, variant: str, q0: int) -> float:
    if variant == "mb":
        if cfg.mb_table is None:
            raise ValueError("an MB critical-value table is required")
        return cfg.mb_table.lookup("mb", q0, cfg.tau, cfg.alpha, 0.0)
    if cfg.sb_table is None:
        raise ValueError("an SB critical-value table is required")
    return cfg.sb_table.lookup("sb", q0, 0.0, cfg.alpha, 0.0)


def cell_from_stats(cfg: McConfig, design: str, n: int, q0: int, variant: str, stats: ReplicationStats) -> McCell:
    crit = _critical_value(cfg, variant, q0)
    eig = stats.mb if variant == "mb" else stats.sb
    lam = statistic_from_eigenvalues(eig, q0, variant)
    return McCell(
        design, n, q0, variant,
        rejection_rate=float(np.count_nonzero(lam > crit)) / len(lam),
        reps_used=len(lam),
        mean_discards_per_rep=float(stats.discards.mean()),
    )


def run_cell(cfg: McConfig, design: str, n: int, q0: int, variant: str) -> McCell:
    """Rejection rate of one test at one (design, n)."""
    variant = variant.lower()
    _critical_value(cfg, variant, q0)  # fail before simulating
    return cell_from_stats(cfg, design, n, q0, variant, replicate(cfg, design, n))


def run_table(cfg: McConfig) -> list[McCell]:
    """All cells for ``cfg.designs x cfg.sample_sizes x {SB, MB} x {q0 = 1, 2}``.

    The four tests at a given (design, n) share the same replications.
    """
    for variant, q0 in TABLE_ORDER:
        _critical_value(cfg, variant, q0)
    cells = []
    for design in cfg.designs:
        for n in cfg.sample_sizes:
            stats = replicate(cfg, design, n)
            cells += [cell_from_stats(cfg, design, n, q0, v, stats) for v, q0 in TABLE_ORDER]
    return cells


def format_cells(cells) -> str:
    return "\n".join([CSV_HEADER] + [c.csv() for c in cells]) + "\n"


def write_cells(cells, path) -> None:
    Path(path).write_text(format_cells(cells))


# ---------------------------------------------------------------------------
# law of large numbers


@dataclass(frozen=True, eq=False)
class LlnReport:
    """Sample moments of ``xi_t = beta*' z*_t`` and ``w_t = (xi_t, dz_t')'`` by regime."""

    design: str
    n: int
    target_mean: float
    mean: float
    mean_plus: float
    mean_minus: float
    count_plus: int
    count_minus: int
    second_moment_plus: np.ndarray
    second_moment_minus: np.ndarray
    min_eig_plus: float = field(init=False)
    min_eig_minus: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "min_eig_plus", float(np.linalg.eigvalsh(self.second_moment_plus)[0]))
        object.__setattr__(self, "min_eig_minus", float(np.linalg.eigvalsh(self.second_moment_minus)[0]))

    def passes(self, mean_tol: float = 0.1, regime_tol: float = 0.15) -> bool:
        return (
            abs(self.mean - self.target_mean) <= mean_tol
            and abs(self.mean_plus - self.target_mean) <= regime_tol
            and abs(self.mean_minus - self.target_mean) <= regime_tol
            and self.min_eig_plus > 0.0
            and self.min_eig_minus > 0.0
        )

    def summary(self) -> str:
        return "\n".join([
            f"design {self.design}, n = {self.n}, analytic mean of xi = {self.target_mean:g}",
            f"  mean(xi)              {self.mean:.4f}",
            f"  mean(xi | y >= 0)     {self.mean_plus:.4f}  ({self.count_plus} obs)",
            f"  mean(xi | y < 0)      {self.mean_minus:.4f}  ({self.count_minus} obs)",
            f"  min eig E[w w'|+]     {self.min_eig_plus:.4g}",
            f"  min eig E[w w'|-]     {self.min_eig_minus:.4g}",
        ])


def verify_lln(design: str, n: int, seed: int) -> LlnReport:
    """Regime-conditional sample moments along one long path.

    The analytic mean of the equilibrium error solves ``alpha mu = -c``.
    Second moments are of the stationary vector ``w_t = (xi_t, dz_t')'``
    (with ``z_0 = 0``) within each regime.
    """
    params, spec = mc_design(design)
    alpha = spec.alpha[:, 0]
    target = float(-np.dot(alpha, params.c) / np.dot(alpha, alpha))
    z = simulate_path(params, n, RngState(seed, DESIGN_IDS[design], n)).series.values
    zs = split_regimes(z)
    xi = zs @ spec.beta_star[:, 0]
    plus = z[:, 0] >= 0.0
    if plus.all() or not plus.any():
        raise DegenerateData("path never leaves one regime")
    w = np.column_stack([xi, np.diff(z, axis=0, prepend=0.0)])
    wp, wm = w[plus], w[~plus]
    return LlnReport(
        design=design, n=n, target_mean=target,
        mean=float(xi.mean()), mean_plus=float(xi[plus].mean()), mean_minus=float(xi[~plus].mean()),
        count_plus=int(plus.sum()), count_minus=int((~plus).sum()),
        second_moment_plus=wp.T @ wp / len(wp), second_moment_minus=wm.T @ wm / len(wm),
    )

