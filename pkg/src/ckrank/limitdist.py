"""Limiting distributions of the rank statistics by discretized Brownian motion.

A draw builds ``W0`` on the grid ``i / G`` (``i = 0..G``) from independent
``N(0, 1/G)`` increments, starting at ``w0_init * e1``. For the MB limit the
first coordinate is split into its nonnegative and negative parts; for the
SB limit the path is used as is. The path is demeaned over ``i = 1..G``,
cumulated into ``V``, and the draw is

    trace(S_W S_V^-1),  S_W = G^-1 sum W W',  S_V = G^-1 sum V V',

i.e. the sum of all eigenvalues of the pencil ``(S_W, S_V)``.

Draw ``j`` of a simulation with base ``seed`` reads its increments from the
stream ``derive_key(seed, j)`` (row-major ``(G, q)``), so any draw can be
regenerated on its own and the result does not depend on how draws are
split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientAcceptedDraws, MissingCriticalValue, SingularLimit
from .pencil import pencil_batch
from .rng import RngState, derive_key, normals
from .simulate import split_regimes

MIN_ACCEPTED = 1000
CHUNK = 500
MATCH_TOL = 1e-12
QUANTILE_NOTE = (
    "# crit = order statistic k = ceil((1 - alpha) * accepted) of the draws "
    "with occupation_min >= tau; no interpolation"
)
CSV_HEADER = "variant,q0,tau,alpha,w0_init,crit,accepted,total,grid,seed"


@dataclass(frozen=True)
class LimitDraw:
    lambda_value: float
    occupation_min: float
    w0_init: float = 0.0


# ---------------------------------------------------------------------------
# single draws


def draw_w0_path(q: int, G: int, w0_init: float, rng: RngState | None = None, *, increments=None) -> np.ndarray:
    """Path ``W0(i / G)``, ``i = 0..G``, shape ``(G + 1, q)``.

    ``increments`` of shape ``(G, q)`` replace the random ones.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if increments is None:
        increments = rng.standard_normal((G, q)) / math.sqrt(G)
    increments = np.asarray(increments, dtype=float).reshape(G, q)
    path = np.zeros((G + 1, q))
    path[0, 0] = w0_init
    path[1:] = path[0] + np.cumsum(increments, axis=0)
    return path


def build_w0star(path: np.ndarray) -> np.ndarray:
    """``([W0_1]+, [W0_1]-, W0_2, ..)`` at every grid point."""
    return split_regimes(np.asarray(path, dtype=float))


def _occupation_min(first: np.ndarray) -> np.ndarray:
    G = first.shape[-1]
    plus = np.count_nonzero(first >= 0.0, axis=-1)
    return np.minimum(plus, G - plus) / G


def limit_functional(W: np.ndarray):
    """Trace functional of paths sampled at ``i = 1..G``, shape ``(..., G, d)``.

    Returns ``(values, ok)``; ``ok`` is false where ``S_V`` is not
    positive definite, and the value there is NaN.
    """
    G = W.shape[-2]
    Wbar = W - W.mean(axis=-2, keepdims=True)
    V = np.cumsum(Wbar, axis=-2) / G
    SW = np.swapaxes(Wbar, -1, -2) @ Wbar / G
    SV = np.swapaxes(V, -1, -2) @ V / G
    SW = 0.5 * (SW + np.swapaxes(SW, -1, -2))
    SV = 0.5 * (SV + np.swapaxes(SV, -1, -2))
    w, _, ok = pencil_batch(SW, SV)
    return np.sum(w, axis=-1), ok


def _draw(points: np.ndarray, w0_init: float) -> LimitDraw:
    value, ok = limit_functional(points[None])
    if not ok[0]:
        raise SingularLimit("cumulated limit moment matrix is not positive definite")
    return LimitDraw(float(value[0]), float(_occupation_min(points[None, :, 0])[0]), w0_init)


def lambda_limit_draw(w0star_path: np.ndarray, w0_init: float | None = None) -> LimitDraw:
    """MB limit draw from a sign-split path of shape ``(G + 1, q + 1)``.

    The occupation of the first Brownian coordinate is read off the split
    columns (``y+ + y-`` recovers it).
    """
    path = np.asarray(w0star_path, dtype=float)
    points = path[1:]
    first = points[:, 0] + points[:, 1]
    value, ok = limit_functional(points[None])
    if not ok[0]:
        raise SingularLimit("cumulated limit moment matrix is not positive definite")
    init = float(path[0, 0] + path[0, 1]) if w0_init is None else w0_init
    return LimitDraw(float(value[0]), float(_occupation_min(first[None])[0]), init)


def sb_limit_draw(q0: int, G: int, rng: RngState | None = None, *, increments=None) -> LimitDraw:
    """SB limit draw: the trace functional of a ``q0``-dimensional standard BM."""
    path = draw_w0_path(q0, G, 0.0, rng, increments=increments)
    return _draw(path[1:], 0.0)


# ---------------------------------------------------------------------------
# batched simulation


def _check_variant(variant: str) -> str:
    variant = variant.lower()
    if variant not in ("mb", "sb"):
        raise ValueError(f"variant must be 'mb' or 'sb', got {variant!r}")
    return variant


def _chunk(args):
    variant, q0, G, seed, w0_init, substeps, start, stop = args
    keys = np.array([derive_key(seed, j) for j in range(start, stop)], dtype=np.uint64)
    fine = G * substeps
    e = normals(keys, 0, fine * q0).reshape(len(keys), fine, q0) / math.sqrt(fine)
    W = np.cumsum(e, axis=1)[:, substeps - 1::substeps]
    if w0_init:
        W[:, :, 0] += w0_init
    occ = _occupation_min(W[:, :, 0])
    if variant == "mb":
        W = split_regimes(W)
    value, ok = limit_functional(W)
    return value, occ, ok


def simulate_limit_draws(
    variant: str,
    q0: int,
    G: int,
    reps: int,
    seed: int,
    *,
    w0_init: float = 0.0,
    workers: int = 1,
    chunk: int = CHUNK,
    substeps: int = 1,
):
    """Draws ``0..reps-1`` of the MB or SB limit.

    With ``substeps = k`` each path is generated on the finer grid ``k G``
    from the same stream and then sampled at every ``k``-th point. The
    sampled path has the same law as a direct ``G``-step path, and draws
    from ``(G, k)`` and ``(k G, 1)`` share their Brownian paths, which
    isolates the discretization effect of the grid from simulation noise.

    Returns ``(values, occupation_min, ok)``; ``ok`` is false for draws
    that hit :class:`SingularLimit` (their value is NaN).
    """
    variant = _check_variant(variant)
    if q0 < 1 or G < 1 or reps < 1 or substeps < 1:
        raise ValueError("q0, G, reps and substeps must be positive")
    tasks = [
        (variant, q0, G, seed, float(w0_init), substeps, s, min(s + chunk, reps))
        for s in range(0, reps, chunk)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, tasks))
    else:
        parts = [_chunk(t) for t in tasks]
    values = np.concatenate([p[0] for p in parts])
    occ = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts])
    return values, occ, ok


def conditional_quantile(values, alpha: float) -> float:
    """Order statistic ``k = max(1, ceil((1 - alpha) m))`` of ``m`` values.

    ``alpha = 1`` returns the minimum.
    """
    v = np.sort(np.asarray(values, dtype=float).reshape(-1))
    if v.size == 0:
        raise ValueError("no values")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    k = max(1, math.ceil(round((1.0 - alpha) * v.size, 9)))
    return float(v[k - 1])


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class CritValRow:
    variant: str
    q0: int
    tau: float
    alpha: float
    w0_init: float
    crit: float
    accepted: int
    total: int
    grid: int
    seed: int

    def sort_key(self):
        return (self.variant, self.q0, self.tau, self.alpha, self.w0_init)

    def csv(self) -> str:
        return (
            f"{self.variant},{self.q0},{self.tau!r},{self.alpha!r},{self.w0_init!r},"
            f"{self.crit:.17g},{self.accepted},{self.total},{self.grid},{self.seed}"
        )


@dataclass
class CritValTable:
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=CritValRow.sort_key)

    def merge(self, other: CritValTable) -> CritValTable:
        return CritValTable(self.rows + other.rows)

    def to_csv_text(self) -> str:
        lines = [QUANTILE_NOTE, CSV_HEADER] + [r.csv() for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text: str) -> CritValTable:
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0].strip() != CSV_HEADER:
            raise ValueError(f"critical-value table must start with header {CSV_HEADER!r}")
        rows = []
        for ln in lines[1:]:
            f = ln.strip().split(",")
            if len(f) != 10:
                raise ValueError(f"malformed table row: {ln!r}")
            rows.append(CritValRow(
                f[0].lower(), int(f[1]), float(f[2]), float(f[3]), float(f[4]),
                float(f[5]), int(f[6]), int(f[7]), int(f[8]), int(f[9]),
            ))
        return cls(rows)

    @classmethod
    def read(cls, path) -> CritValTable:
        return cls.from_csv_text(Path(path).read_text())

    def lookup(self, variant: str, q0: int, tau: float, alpha: float, w0: float = 0.0) -> float:
        """Critical value, interpolating linearly in ``w0`` between tabulated rows.

        Raises
        ------
        MissingCriticalValue
            If no row matches ``(variant, q0, tau, alpha)`` or ``w0`` lies
            outside the tabulated ``w0_init`` range.
        """
        cands = sorted(
            (r for r in self.rows
             if r.variant == variant.lower() and r.q0 == q0
             and abs(r.tau - tau) <= MATCH_TOL and abs(r.alpha - alpha) <= MATCH_TOL),
            key=lambda r: r.w0_init,
        )
        for r in cands:
            if abs(r.w0_init - w0) <= MATCH_TOL:
                return r.crit
        for lo, hi in zip(cands, cands[1:]):
            if lo.w0_init < w0 < hi.w0_init:
                t = (w0 - lo.w0_init) / (hi.w0_init - lo.w0_init)
                return lo.crit + t * (hi.crit - lo.crit)
        raise MissingCriticalValue(
            f"no critical value for variant={variant}, q0={q0}, tau={tau}, alpha={alpha}, w0={w0:g}"
        )


@dataclass(frozen=True)
class LimitSimConfig:
    variant: str
    q0: int
    grid: int = 2000
    reps: int = 100_000
    seed: int = 0
    taus: tuple = (0.0, 0.15)
    alphas: tuple = (0.01, 0.05, 0.10)
    w0_init: float = 0.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", _check_variant(self.variant))
        if self.q0 < 1:
            raise ValueError("q0 must be >= 1")
        if self.grid < 100:
            raise ValueError("grid must be >= 100")
        if self.reps < 1000:
            raise ValueError("reps must be >= 1000")
        if not self.taus or any(not 0.0 <= t < 0.5 for t in self.taus):
            raise ValueError("taus must lie in [0, 0.5)")
        if not self.alphas or any(not 0.0 < a < 1.0 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        if self.variant == "sb" and (self.w0_init != 0.0 or any(t > 0 for t in self.taus)):
            raise ValueError("SB tables are unconditional: use tau = 0 and w0_init = 0")


def make_table(cfg: LimitSimConfig) -> CritValTable:
    """Tabulate conditional critical values from ``cfg.reps`` limit draws.

    Raises
    ------
    InsufficientAcceptedDraws
        If fewer than 1000 draws satisfy ``occupation_min >= tau`` for some tau.
    """
    values, occ, ok = simulate_limit_draws(
        cfg.variant, cfg.q0, cfg.grid, cfg.reps, cfg.seed, w0_init=cfg.w0_init, workers=cfg.workers,
    )
    return table_from_draws(cfg, values, occ, ok)


def table_from_draws(cfg: LimitSimConfig, values, occ, ok) -> CritValTable:
    """Tabulate critical values from draws already simulated under ``cfg``."""
    values, occ, ok = np.asarray(values), np.asarray(occ), np.asarray(ok, dtype=bool)
    if values.shape != (cfg.reps,):
        raise ValueError(f"expected {cfg.reps} draws, got {values.shape}")
    rows = []
    for tau in cfg.taus:
        keep = ok & (occ >= tau)
        accepted = int(np.count_nonzero(keep))
        if accepted < MIN_ACCEPTED:
            raise InsufficientAcceptedDraws(
                f"only {accepted} of {cfg.reps} draws accepted at tau={tau}; raise reps"
            )
        for alpha in cfg.alphas:
            rows.append(CritValRow(
                cfg.variant, cfg.q0, float(tau), float(alpha), float(cfg.w0_init),
                conditional_quantile(values[keep], alpha), accepted, cfg.reps, cfg.grid, cfg.seed,
            ))
    return CritValTable(rows)
