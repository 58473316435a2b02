"""Sample paths from a CKSVAR and the bivariate Monte Carlo designs.

Each period the structural equation ``Phi0 z*_t = rhs_t`` is piecewise
linear in ``y_t``. Under coherency exactly one of the two linear branches
is sign-consistent, so the solver tries ``y >= 0`` first and falls back to
``y < 0``. Paths start from ``z_t = 0`` (or a supplied history) with no
burn-in unless requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cksvar import CksvarParams, CointCaseTwoSpec, canonical_selector, check_case_ii, check_coherency
from .errors import CoherencyParadox, CoherencyViolated
from .pencil import cholesky
from .rng import RngState, derive_key, normals

BRANCH_TOL = 1e-10

DESIGNS = {"linear": -1.0, "nonlinear": -0.5}
DESIGN_IDS = {"linear": 1, "nonlinear": 2}


@dataclass(frozen=True, eq=False)
class SeriesMatrix:
    """Time-major observations ``values[t, j]``; column 0 is ``y``."""

    values: np.ndarray
    roles: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] < 1:
            raise ValueError("series needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise ValueError("series has non-finite values")
        if len(self.roles) != v.shape[1]:
            raise ValueError("one role label per column required")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "roles", tuple(self.roles))

    @classmethod
    def from_array(cls, values) -> SeriesMatrix:
        v = np.asarray(values, dtype=float)
        d = 1 if v.ndim == 1 else v.shape[1]
        return cls(v, default_roles(d))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, 0]


def default_roles(d: int) -> tuple:
    return ("y",) + tuple(f"x{i}" for i in range(1, d))


@dataclass(frozen=True)
class SimulatedPath:
    series: SeriesMatrix
    innovations: np.ndarray


@dataclass(frozen=True)
class OccupationStats:
    count_plus: int
    count_minus: int

    @property
    def n(self) -> int:
        return self.count_plus + self.count_minus

    @property
    def frac_plus(self) -> float:
        return self.count_plus / self.n

    @property
    def frac_minus(self) -> float:
        return self.count_minus / self.n


# ---------------------------------------------------------------------------
# solving one period


class _Solver:
    """Precomputed branch inverses for repeated solves."""

    def __init__(self, params: CksvarParams):
        if not check_coherency(params):
            raise CoherencyViolated("parameters violate the coherency conditions")
        self.inv_plus = np.linalg.inv(params.Phi0_plus)
        self.inv_minus = np.linalg.inv(params.Phi0_minus)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for a stack of right-hand sides ``rhs[..., p]``."""
        z_pos = rhs @ self.inv_plus.T
        z_neg = rhs @ self.inv_minus.T
        y_pos = z_pos[..., 0]
        y_neg = z_neg[..., 0]
        pos_ok = y_pos >= 0.0
        neg_ok = y_neg < 0.0
        scale = np.maximum(1.0, np.abs(rhs).max(axis=-1))
        # both or neither branch consistent: only tolerated as roundoff at y ~ 0
        ambiguous = pos_ok == neg_ok
        if np.any(ambiguous):
            near_zero = (np.abs(y_pos) <= BRANCH_TOL * scale) | (np.abs(y_neg) <= BRANCH_TOL * scale)
            if np.any(ambiguous & ~near_zero):
                raise CoherencyParadox("neither or both regimes solve the structural equation")
            pos_ok = pos_ok | (ambiguous & near_zero)
        return np.where(pos_ok[..., None], z_pos, z_neg)


def solve_step(params: CksvarParams, rhs) -> np.ndarray:
    """Solve ``phi0+ y+ + phi0- y- + Phi0_x x = rhs`` for ``z = (y, x)``.

    Examples
    --------
    >>> p = CksvarParams.from_blocks([2.0], [1.0], np.zeros((1, 0)))
    >>> solve_step(p, [4.0]), solve_step(p, [-3.0])
    (array([2.]), array([-3.]))
    """
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    return _Solver(params).solve(rhs)


def split_regimes(z: np.ndarray) -> np.ndarray:
    """``z* = (y+, y-, x)`` along the last axis, with ``y = 0`` counted as ``+``."""
    y = z[..., :1]
    pos = y >= 0.0
    return np.concatenate([np.where(pos, y, 0.0), np.where(pos, 0.0, y), z[..., 1:]], axis=-1)


def _innovation_factor(params: CksvarParams) -> np.ndarray:
    if not np.any(params.Sigma_u):
        return np.zeros_like(params.Sigma_u)
    return cholesky(params.Sigma_u)


def _run_recursion(params: CksvarParams, u: np.ndarray, init: np.ndarray) -> np.ndarray:
    """Iterate the model over innovations ``u[batch, t, p]`` from history ``init[batch, k, p]``."""
    solver = _Solver(params)
    batch, n, p = u.shape
    k = params.k
    hist = [split_regimes(init[:, j]) for j in range(k)]  # oldest first
    Phi_T = [m.T for m in params.Phi]  # lag i -> Phi[i-1]
    out = np.empty((batch, n, p))
    for t in range(n):
        rhs = params.c + u[:, t]
        for i in range(1, k + 1):
            rhs = rhs + hist[-i] @ Phi_T[i - 1]
        z = solver.solve(rhs)
        out[:, t] = z
        if k:
            hist.append(split_regimes(z))
            hist.pop(0)
    return out


def _initial_history(init, k: int, p: int, batch: int) -> np.ndarray:
    if init is None:
        return np.zeros((batch, k, p))
    init = np.asarray(init, dtype=float).reshape(k, p)
    return np.broadcast_to(init, (batch, k, p)).copy()


def simulate_path(
    params: CksvarParams,
    n: int,
    rng: RngState | int,
    *,
    init=None,
    burn_in: int = 0,
    innovations=None,
) -> SimulatedPath:
    """Simulate ``z_1..z_n``.

    Parameters
    ----------
    params : CksvarParams
    n : int
        Number of reported observations.
    rng : RngState or int
        Stream for the standard normals (an int is used as a seed). Row
        ``t`` of the innovations uses normals ``t*p .. t*p + p - 1``.
    init : array_like, shape (k, p), optional
        ``z_{-k+1}, ..., z_0`` (oldest first); zeros by default.
    burn_in : int
        Periods simulated and discarded before the reported sample.
    innovations : array_like, shape (burn_in + n, p), optional
        Explicit ``u_t``, bypassing ``rng``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p, k = params.p, params.k
    total = n + burn_in
    if innovations is None:
        if not isinstance(rng, RngState):
            rng = RngState(rng)
        e = rng.standard_normal((total, p))
        u = e @ _innovation_factor(params).T
    else:
        u = np.asarray(innovations, dtype=float).reshape(total, p)
    z = _run_recursion(params, u[None], _initial_history(init, k, p, 1))[0]
    return SimulatedPath(SeriesMatrix.from_array(z[burn_in:]), u[burn_in:])


def simulate_paths(params: CksvarParams, n: int, keys, *, burn_in: int = 0) -> np.ndarray:
    """Simulate one path per stream key, vectorized across keys.

    Path ``j`` equals ``simulate_path(params, n, rng)`` for an
    :class:`RngState` whose key is ``keys[j]``. Returns ``(len(keys), n, p)``.
    """
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1)
    p, k = params.p, params.k
    total = n + burn_in
    e = normals(keys, 0, total * p).reshape(len(keys), total, p)
    u = e @ _innovation_factor(params).T
    z = _run_recursion(params, u, _initial_history(None, k, p, len(keys)))
    return z[:, burn_in:]


# ---------------------------------------------------------------------------
# Monte Carlo designs


def mc_design(kind: str) -> tuple[CksvarParams, CointCaseTwoSpec]:
    """The bivariate designs ``dz_t = c + alpha beta*' z*_{t-1} + u_t``.

    ``alpha = (0.5, 0.1)'``, ``beta* = (-1, beta_y-, 1)'``, ``c = 2 alpha``,
    ``u_t ~ N(0, I_2)``, with ``beta_y- = -1`` (``"linear"``) or
    ``-0.5`` (``"nonlinear"``). Written in levels as a canonical
    CKSVAR(1): ``Phi1 = I*_2 + alpha beta*'``.
    """
    if kind not in DESIGNS:
        raise ValueError(f"design must be one of {sorted(DESIGNS)}, got {kind!r}")
    alpha = np.array([0.5, 0.1])
    beta_star = np.array([-1.0, DESIGNS[kind], 1.0])
    Phi0 = canonical_selector(2)
    Phi1 = Phi0 + np.outer(alpha, beta_star)
    params = CksvarParams(Phi0=Phi0, Phi=Phi1[None], c=2.0 * alpha, Sigma_u=np.eye(2))
    return params, check_case_ii(params, r=1)


# ---------------------------------------------------------------------------
# regime occupation


def occupation(y) -> OccupationStats:
    """Counts of ``y_t >= 0`` and ``y_t < 0``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size < 1:
        raise ValueError("need at least one observation")
    plus = int(np.count_nonzero(y >= 0.0))
    return OccupationStats(plus, y.size - plus)


def min_regime_count(threshold: float, n: int) -> int:
    """``ceil(threshold * n)``, guarded against representation error."""
    return math.ceil(round(threshold * n, 9))


def retained(stats: OccupationStats, threshold: float) -> bool:
    """Whether both regimes hold at least ``ceil(threshold * n)`` observations."""
    if not 0.0 <= threshold <= 0.5:
        raise ValueError("threshold must lie in [0, 0.5]")
    return min(stats.count_plus, stats.count_minus) >= min_regime_count(threshold, stats.n)


# ---------------------------------------------------------------------------
# CSV


def write_series_csv(series: SeriesMatrix, path) -> None:
    """Header ``y,x1,...``; one row per period, 17 significant digits."""
    lines = [",".join(series.roles)]
    lines += [",".join(f"{v:.17g}" for v in row) for row in series.values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_series_csv(path) -> SeriesMatrix:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in text[0].split(",")]
    if header[0] != "y":
        raise ValueError(f"{path}: first column must be 'y', got {header[0]!r}")
    rows = [[float(v) for v in line.split(",")] for line in text[1:] if line.strip()]
    values = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return SeriesMatrix(values, tuple(header))


def replication_key(base_seed: int, design: str, n: int, rep: int, attempt: int = 0) -> int:
    """Seed for one Monte Carlo replication attempt."""
    return derive_key(base_seed, DESIGN_IDS[design], n, rep, attempt)
