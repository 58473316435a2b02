"""Censored-and-kinked SVAR parameterization and validity checks.

The structural model for ``z_t = (y_t, x_t')'`` with ``p`` variables and
``k`` lags is written on the augmented vector ``z*_t = (y_t+, y_t-, x_t')'``::

    Phi0 @ z*_t = c + sum_i Phi[i-1] @ z*_{t-i} + u_t

where every coefficient block ``Phi_i = [phi_i+, phi_i-, Phi_i^x]`` is
``p x (p+1)`` and ``u_t ~ (0, Sigma_u)``. The threshold is normalized to
zero; a nonzero threshold ``b`` is absorbed into ``c`` at construction, and
``y`` is then measured relative to ``b`` (recorded in ``y_offset``).
"""

from __future__ import annotations

import ast
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    CoherencyViolated,
    DimensionMismatch,
    JsrOverflow,
    RankDeficient,
    RankMismatch,
    SignCondition,
    StabilityUnverified,
)
from .pencil import cholesky_factor

RANK_RTOL = 1e-8
DET_RTOL = 1e-8
JSR_MAX_DEPTH = 8
JSR_BUDGET = 2 ** 16


def canonical_selector(p: int) -> np.ndarray:
    """The canonical contemporaneous matrix ``I*_p = [[1, 1, 0], [0, 0, I]]``."""
    sel = np.zeros((p, p + 1))
    sel[0, 0] = sel[0, 1] = 1.0
    sel[1:, 2:] = np.eye(p - 1)
    return sel


def regime_selector(y: float, p: int) -> np.ndarray:
    """``S_p(y)``, the ``(p+1) x p`` map ``z -> z*`` at a given sign of ``y``."""
    S = np.zeros((p + 1, p))
    if y >= 0:
        S[0, 0] = 1.0
    else:
        S[1, 0] = 1.0
    S[2:, 1:] = np.eye(p - 1)
    return S


@dataclass(frozen=True, eq=False)
class CksvarParams:
    """Structural CKSVAR(k) parameters.

    Attributes
    ----------
    Phi0 : ndarray, shape (p, p+1)
        ``[phi0_plus, phi0_minus, Phi0_x]``.
    Phi : ndarray, shape (k, p, p+1)
        ``Phi[i-1] = [phi_i_plus, phi_i_minus, Phi_i_x]`` for lag ``i``.
    c : ndarray, shape (p,)
    Sigma_u : ndarray, shape (p, p)
        Symmetric positive semi-definite. An exactly zero matrix is
        accepted so that degenerate (noise-free) paths can be produced.
    y_offset : float
        Threshold ``b`` that was folded into ``c``; simulated ``y`` is
        ``y_original - y_offset``.
    """

    Phi0: np.ndarray
    Phi: np.ndarray
    c: np.ndarray
    Sigma_u: np.ndarray
    y_offset: float = 0.0
    b_threshold: float = field(default=0.0, init=False)

    def __post_init__(self):
        Phi0 = np.array(self.Phi0, dtype=float, ndmin=2)
        p = Phi0.shape[0]
        Phi = np.array(self.Phi, dtype=float)
        if Phi.size == 0:
            Phi = Phi.reshape(0, p, p + 1)
        c = np.array(self.c, dtype=float).reshape(-1)
        Sigma = np.array(self.Sigma_u, dtype=float, ndmin=2)
        if Phi0.shape != (p, p + 1):
            raise DimensionMismatch(f"Phi0 must be p x (p+1), got {Phi0.shape}")
        if Phi.ndim != 3 or Phi.shape[1:] != (p, p + 1):
            raise DimensionMismatch(f"lag blocks must be k x p x (p+1), got {Phi.shape}")
        if c.shape != (p,):
            raise DimensionMismatch(f"c must have length {p}, got {c.shape}")
        if Sigma.shape != (p, p):
            raise DimensionMismatch(f"Sigma_u must be {p} x {p}, got {Sigma.shape}")
        for name, arr in (("Phi0", Phi0), ("Phi", Phi), ("c", c), ("Sigma_u", Sigma)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if not np.allclose(Sigma, Sigma.T, rtol=0, atol=1e-10 * max(1.0, np.abs(Sigma).max())):
            raise ValueError("Sigma_u must be symmetric")
        if np.any(Sigma != 0) and not cholesky_factor(Sigma)[2]:
            raise ValueError("Sigma_u must be positive definite")
        for arr in (Phi0, Phi, c, Sigma):
            arr.setflags(write=False)
        object.__setattr__(self, "Phi0", Phi0)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "Sigma_u", Sigma)

    @classmethod
    def from_blocks(
        cls,
        phi0_plus,
        phi0_minus,
        Phi0_x,
        lag_phi_plus=(),
        lag_phi_minus=(),
        lag_Phi_x=(),
        c=None,
        Sigma_u=None,
        b_threshold=0.0,
    ) -> CksvarParams:
        """Assemble from the per-regime blocks, folding a nonzero threshold into ``c``."""
        phi0_plus = np.asarray(phi0_plus, dtype=float).reshape(-1)
        p = phi0_plus.shape[0]
        Phi0_x = np.asarray(Phi0_x, dtype=float).reshape(p, p - 1)
        Phi0 = np.column_stack([phi0_plus, np.asarray(phi0_minus, dtype=float).reshape(-1), Phi0_x])
        if not (len(lag_phi_plus) == len(lag_phi_minus) == len(lag_Phi_x)):
            raise DimensionMismatch("lag block lists must have equal length")
        lags = [
            np.column_stack([
                np.asarray(a, dtype=float).reshape(-1),
                np.asarray(b, dtype=float).reshape(-1),
                np.asarray(X, dtype=float).reshape(p, p - 1),
            ])
            for a, b, X in zip(lag_phi_plus, lag_phi_minus, lag_Phi_x)
        ]
        Phi = np.array(lags).reshape(len(lags), p, p + 1)
        c = np.zeros(p) if c is None else np.asarray(c, dtype=float).reshape(-1)
        Sigma_u = np.eye(p) if Sigma_u is None else Sigma_u
        if b_threshold:
            # y+ = b + [y - b]_+, y- = b + [y - b]_-, so b moves into the intercept
            poly_at_one = Phi0[:, :2].sum(axis=1) - Phi[:, :, :2].sum(axis=(0, 2))
            c = c - b_threshold * poly_at_one
        return cls(Phi0=Phi0, Phi=Phi, c=c, Sigma_u=Sigma_u, y_offset=float(b_threshold))

    @property
    def p(self) -> int:
        return self.Phi0.shape[0]

    @property
    def k(self) -> int:
        return self.Phi.shape[0]

    @property
    def phi0_plus(self):
        return self.Phi0[:, 0]

    @property
    def phi0_minus(self):
        return self.Phi0[:, 1]

    @property
    def Phi0_x(self):
        return self.Phi0[:, 2:]

    @property
    def lag_phi_plus(self):
        return [m[:, 0] for m in self.Phi]

    @property
    def lag_phi_minus(self):
        return [m[:, 1] for m in self.Phi]

    @property
    def lag_Phi_x(self):
        return [m[:, 2:] for m in self.Phi]

    @property
    def Phi0_plus(self) -> np.ndarray:
        """``[phi0+, Phi0^x]``, the contemporaneous matrix when ``y >= 0``."""
        return np.column_stack([self.Phi0[:, 0], self.Phi0[:, 2:]])

    @property
    def Phi0_minus(self) -> np.ndarray:
        return np.column_stack([self.Phi0[:, 1], self.Phi0[:, 2:]])

    def is_canonical(self, atol=1e-10) -> bool:
        return bool(np.allclose(self.Phi0, canonical_selector(self.p), rtol=0, atol=atol))

    def __repr__(self):
        return f"CksvarParams(p={self.p}, k={self.k}, y_offset={self.y_offset})"


# ---------------------------------------------------------------------------
# coherency and canonical form


@dataclass(frozen=True)
class CoherencyReport:
    ok: bool
    det_plus: float
    det_minus: float
    det_xx: float
    schur_plus: float
    schur_minus: float

    def __bool__(self):
        return self.ok


def _schur(params: CksvarParams):
    Phi0 = params.Phi0
    Phi_xx = Phi0[1:, 2:]
    phi_yx = Phi0[0, 2:]
    det_xx = float(np.linalg.det(Phi_xx)) if params.p > 1 else 1.0
    if det_xx == 0.0:
        return det_xx, np.nan, np.nan
    if params.p > 1:
        w = np.linalg.solve(Phi_xx.T, phi_yx)
        schur = Phi0[0, :2] - w @ Phi0[1:, :2]
    else:
        schur = Phi0[0, :2].copy()
    return det_xx, float(schur[0]), float(schur[1])


def check_coherency(params: CksvarParams) -> CoherencyReport:
    """Unique-solvability conditions for the piecewise-linear structural equation.

    True iff ``sgn det Phi0+ == sgn det Phi0- != 0``, ``Phi0_xx`` is
    invertible and both Schur complements
    ``phi0_yy(+/-) - phi0_yx' Phi0_xx^{-1} phi0_xy(+/-)`` are positive.
    """
    det_plus = float(np.linalg.det(params.Phi0_plus))
    det_minus = float(np.linalg.det(params.Phi0_minus))
    det_xx, schur_plus, schur_minus = _schur(params)
    ok = (
        det_plus != 0.0
        and np.sign(det_plus) == np.sign(det_minus)
        and det_xx != 0.0
        and schur_plus > 0
        and schur_minus > 0
    )
    return CoherencyReport(bool(ok), det_plus, det_minus, det_xx, schur_plus, schur_minus)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Canonical transformation: ``z~*_t = P_inv @ z*_t`` and ``Phi~(L) = Q Phi(L) P``."""

    P_inv: np.ndarray
    Q: np.ndarray
    params_tilde: CksvarParams

    @property
    def P(self) -> np.ndarray:
        return np.linalg.inv(self.P_inv)

    def transform_zstar(self, zstar: np.ndarray) -> np.ndarray:
        """Map rows of structural ``z*`` to canonical ``z~*``."""
        return np.asarray(zstar) @ self.P_inv.T


def to_canonical(params: CksvarParams) -> CanonicalForm:
    """Transform a coherent structural CKSVAR into its canonical form."""
    report = check_coherency(params)
    if not report:
        raise CoherencyViolated(f"coherency conditions fail: {report}")
    p = params.p
    Phi0 = params.Phi0
    Phi_xx = Phi0[1:, 2:]

    P_inv = np.zeros((p + 1, p + 1))
    P_inv[0, 0] = report.schur_plus
    P_inv[1, 1] = report.schur_minus
    P_inv[2:, :] = Phi0[1:, :]
    Q = np.eye(p)
    if p > 1:
        Q[0, 1:] = -np.linalg.solve(Phi_xx.T, Phi0[0, 2:])

    P = np.linalg.inv(P_inv)
    Phi0_t = Q @ Phi0 @ P
    target = canonical_selector(p)
    if not np.allclose(Phi0_t, target, rtol=0, atol=1e-10 * max(1.0, np.abs(Phi0).max())):
        raise CoherencyViolated("canonical transformation did not produce I*_p")
    Phi_t = np.einsum("ij,ljk,km->lim", Q, params.Phi, P) if params.k else params.Phi.copy()
    tilde = CksvarParams(
        Phi0=target,
        Phi=Phi_t,
        c=Q @ params.c,
        Sigma_u=Q @ params.Sigma_u @ Q.T,
        y_offset=params.y_offset,
    )
    return CanonicalForm(P_inv=P_inv, Q=Q, params_tilde=tilde)


# ---------------------------------------------------------------------------
# case (ii) cointegration


@dataclass(frozen=True)
class JsrBracket:
    lower: float
    upper: float
    depth: int


@dataclass(frozen=True, eq=False)
class CointCaseTwoSpec:
    """Case-(ii) decomposition ``Pi+/- = alpha beta+/-'`` of a canonical CKSVAR.

    The factorization is not unique; only ``Pi_plus`` and ``Pi_minus`` are
    identified, so compare specs through those.
    """

    r: int
    q: int
    alpha: np.ndarray
    beta_y_plus: np.ndarray
    beta_y_minus: np.ndarray
    beta_x: np.ndarray
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    Pi_plus: np.ndarray
    Pi_minus: np.ndarray
    Pi_x: np.ndarray
    Gamma: list
    alpha_perp: np.ndarray
    beta_perp_plus: np.ndarray
    beta_perp_minus: np.ndarray
    sign_dets: tuple = (np.nan, np.nan)
    stability: JsrBracket | None = None

    @property
    def p(self) -> int:
        return self.alpha.shape[0]

    @property
    def beta_plus(self) -> np.ndarray:
        return np.vstack([self.beta_y_plus[None, :], self.beta_x])

    @property
    def beta_minus(self) -> np.ndarray:
        return np.vstack([self.beta_y_minus[None, :], self.beta_x])

    @property
    def beta_star(self) -> np.ndarray:
        """``(p+1) x r`` linear cointegrating matrix acting on ``z*``."""
        return np.vstack([self.beta_y_plus[None, :], self.beta_y_minus[None, :], self.beta_x])

    def beta(self, y: float) -> np.ndarray:
        return self.beta_plus if y >= 0 else self.beta_minus


def _rank(m: np.ndarray, scale: float) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * scale))


def _complement(m: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(m)`` in R^dim."""
    if m.size == 0 or m.shape[1] == 0:
        return np.eye(dim)
    u, s, _ = np.linalg.svd(m, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * max(s.max(), np.finfo(float).tiny)))
    return u[:, rank:]


def _gammas(Phi: np.ndarray) -> list:
    """``Gamma_i = -sum_{j>i} Phi_j`` for ``i = 1..k-1`` (each ``p x (p+1)``)."""
    k = Phi.shape[0]
    return [-Phi[i:].sum(axis=0) for i in range(1, k)]


def check_case_ii(params: CksvarParams, r: int, *, max_depth: int = JSR_MAX_DEPTH) -> CointCaseTwoSpec:
    """Verify the case-(ii) configuration with cointegrating rank ``r``.

    Works on the canonical form of ``params``. Raises :class:`RankMismatch`
    or :class:`SignCondition` when those conditions fail; an inconclusive
    JSR bracket only triggers a :class:`StabilityUnverified` warning and is
    recorded in ``spec.stability``.
    """
    canon = to_canonical(params)
    tp = canon.params_tilde
    p, k = tp.p, tp.k
    q = p - r
    if not 0 <= r <= p - 1:
        raise RankMismatch(f"rank r must lie in 0..{p - 1}, got {r}")

    Pi = -(tp.Phi0 - tp.Phi.sum(axis=0))
    pi_plus, pi_minus, Pi_x = Pi[:, 0], Pi[:, 1], Pi[:, 2:]
    Pi_plus = np.column_stack([pi_plus, Pi_x])
    Pi_minus = np.column_stack([pi_minus, Pi_x])
    scale = max(np.abs(Pi).max(), np.finfo(float).tiny)
    ranks = (_rank(Pi_x, scale), _rank(Pi_plus, scale), _rank(Pi_minus, scale))
    if ranks != (r, r, r):
        raise RankMismatch(f"rank(Pi_x, Pi+, Pi-) = {ranks}, expected {r}")

    if r > 0:
        theta_plus = np.linalg.lstsq(Pi_x, pi_plus, rcond=None)[0]
        theta_minus = np.linalg.lstsq(Pi_x, pi_minus, rcond=None)[0]
        u, s, vt = np.linalg.svd(Pi_x, full_matrices=False)
        alpha = u[:, :r] * s[:r]
        beta_x = vt[:r].T
        lead = beta_x[:r, :r]
        if np.linalg.cond(lead) < 1e8:
            alpha = alpha @ lead.T
            beta_x = beta_x @ np.linalg.inv(lead)
    else:
        theta_plus = np.zeros(p - 1)
        theta_minus = np.zeros(p - 1)
        alpha = np.zeros((p, 0))
        beta_x = np.zeros((p - 1, 0))
    for theta, pi in ((theta_plus, pi_plus), (theta_minus, pi_minus)):
        if np.abs(Pi_x @ theta - pi).max() > RANK_RTOL * scale:
            raise RankMismatch("pi+/- not in the column space of Pi_x")
    beta_y_plus = theta_plus @ beta_x
    beta_y_minus = theta_minus @ beta_x

    Gamma = _gammas(tp.Phi)
    Gamma_sum = sum(Gamma) if Gamma else np.zeros((p, p + 1))
    Gamma1_plus = tp.Phi0_plus - np.column_stack([Gamma_sum[:, 0], Gamma_sum[:, 2:]])
    Gamma1_minus = tp.Phi0_minus - np.column_stack([Gamma_sum[:, 1], Gamma_sum[:, 2:]])

    alpha_perp = _complement(alpha, p)
    beta_x_perp = _complement(beta_x, p - 1)

    def beta_perp(theta):
        bp = np.zeros((p, q))
        bp[0, 0] = 1.0
        bp[1:, 0] = -theta
        bp[1:, 1:] = beta_x_perp
        return bp

    bperp_plus, bperp_minus = beta_perp(theta_plus), beta_perp(theta_minus)
    d_plus = float(np.linalg.det(alpha_perp.T @ Gamma1_plus @ bperp_plus))
    d_minus = float(np.linalg.det(alpha_perp.T @ Gamma1_minus @ bperp_minus))
    if d_plus == 0.0 or d_minus == 0.0 or np.sign(d_plus) != np.sign(d_minus):
        raise SignCondition(f"det alpha_perp' Gamma(1;y) beta_perp(y) = ({d_plus:.4g}, {d_minus:.4g})")

    spec = CointCaseTwoSpec(
        r=r, q=q, alpha=alpha, beta_y_plus=beta_y_plus, beta_y_minus=beta_y_minus,
        beta_x=beta_x, theta_plus=theta_plus, theta_minus=theta_minus,
        Pi_plus=Pi_plus, Pi_minus=Pi_minus, Pi_x=Pi_x, Gamma=Gamma,
        alpha_perp=alpha_perp, beta_perp_plus=bperp_plus, beta_perp_minus=bperp_minus,
        sign_dets=(d_plus, d_minus),
    )
    bracket = jsr_bracket(build_companion(spec), max_depth)
    if bracket.upper >= 1.0:
        warnings.warn(
            f"JSR bracket [{bracket.lower:.4f}, {bracket.upper:.4f}] at depth {bracket.depth} "
            "does not certify stability",
            StabilityUnverified,
            stacklevel=2,
        )
    return replace(spec, stability=bracket)


def build_companion(spec: CointCaseTwoSpec) -> tuple[np.ndarray, np.ndarray]:
    """Companion matrices ``I + bbeta(+1)' balpha`` and ``I + bbeta(-1)' balpha``.

    ``balpha`` stacks ``[alpha, Gamma_1, ..., Gamma_{k-1}]`` over identity
    blocks; ``bbeta(y)'`` stacks ``beta(y)'`` over the ``S_p(y)`` / ``-I``
    differencing band. Both are built from the (canonical) spec.
    """
    p, r = spec.p, spec.r
    m = len(spec.Gamma)  # k - 1
    # a zero or reduced-rank alpha still yields well-defined matrices (alpha = 0 gives I)
    for name, mat in (("beta+", spec.beta_plus), ("beta-", spec.beta_minus)):
        if _rank(mat, max(np.abs(mat).max(initial=0.0), np.finfo(float).tiny)) < r:
            raise RankDeficient(f"{name} is not of full column rank {r}")
    rows = p + m * (p + 1)
    cols = r + m * (p + 1)

    balpha = np.zeros((rows, cols))
    balpha[:p, :r] = spec.alpha
    for i, G in enumerate(spec.Gamma):
        c0 = r + i * (p + 1)
        balpha[:p, c0:c0 + p + 1] = G
        balpha[p + i * (p + 1):p + (i + 1) * (p + 1), c0:c0 + p + 1] = np.eye(p + 1)

    out = []
    for sign in (1.0, -1.0):
        bbeta_t = np.zeros((cols, rows))
        bbeta_t[:r, :p] = spec.beta(sign).T
        for i in range(m):
            r0 = r + i * (p + 1)
            if i == 0:
                bbeta_t[r0:r0 + p + 1, :p] = regime_selector(sign, p)
            else:
                c_prev = p + (i - 1) * (p + 1)
                bbeta_t[r0:r0 + p + 1, c_prev:c_prev + p + 1] = np.eye(p + 1)
            c_cur = p + i * (p + 1)
            bbeta_t[r0:r0 + p + 1, c_cur:c_cur + p + 1] = -np.eye(p + 1)
        out.append(np.eye(cols) + bbeta_t @ balpha)
    return out[0], out[1]


def jsr_bracket(mats, max_depth: int = JSR_MAX_DEPTH, *, budget: int = JSR_BUDGET) -> JsrBracket:
    """Bracket the joint spectral radius by exhaustive products up to ``max_depth``.

    ``lower`` is the largest ``rho(P)**(1/m)`` and ``upper`` the smallest
    over ``m`` of ``max ||P||_2**(1/m)``, both over all products ``P`` of
    length ``m <= max_depth``.
    """
    mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionMismatch("JSR matrices must be square and of equal size")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    total = sum(len(mats) ** m for m in range(1, max_depth + 1))
    if total > budget:
        raise JsrOverflow(f"{total} products exceed budget {budget}")
    if d == 0:
        return JsrBracket(0.0, 0.0, max_depth)

    base = np.stack(mats)
    prods = base
    lower, upper = 0.0, np.inf
    for m in range(1, max_depth + 1):
        if m > 1:
            prods = np.einsum("aij,bjk->abik", prods, base).reshape(-1, d, d)
        rho = np.max(np.abs(np.linalg.eigvals(prods)), axis=-1)
        norms = np.linalg.norm(prods, ord=2, axis=(-2, -1))
        lower = max(lower, float(np.max(rho)) ** (1.0 / m))
        upper = min(upper, float(np.max(norms)) ** (1.0 / m))
    return JsrBracket(lower=lower, upper=max(upper, lower), depth=max_depth)


def check_det_restriction(spec: CointCaseTwoSpec, c) -> bool:
    """Whether ``c`` lies in ``span Pi+ ∩ span Pi-`` (no deterministic trends).

    ``c`` must be expressed in the same (canonical) coordinates as ``spec``.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    norm = np.linalg.norm(c)
    if norm == 0.0:
        return True
    for Pi in (spec.Pi_plus, spec.Pi_minus):
        coef = np.linalg.lstsq(Pi, c, rcond=None)[0]
        if np.linalg.norm(Pi @ coef - c) > DET_RTOL * norm:
            return False
    return True


# ---------------------------------------------------------------------------
# parameter files


def parse_params(text: str) -> CksvarParams:
    """Parse the ``key = value`` parameter format.

    Matrices are bracketed row-major lists (``[[1, 0], [0, 1]]``), vectors
    either flat or as column lists. ``#`` starts a comment. Lag blocks that
    are omitted default to zero; ``c`` defaults to zero, ``Sigma_u`` to the
    identity and ``b`` to zero.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            values[key] = ast.literal_eval(val)
        except (ValueError, SyntaxError) as exc:
            raise ValueError(f"line {lineno}: cannot parse value for {key!r}") from exc

    try:
        p = int(values.pop("p"))
        k = int(values.pop("k"))
        phi0_plus = values.pop("phi0_plus")
        phi0_minus = values.pop("phi0_minus")
    except KeyError as exc:
        raise ValueError(f"missing required key {exc.args[0]!r}") from None
    Phi0_x = values.pop("Phi0_x", np.zeros((p, 0)).tolist())

    def arr(v, shape):
        a = np.asarray(v, dtype=float)
        if a.size != int(np.prod(shape)):
            raise DimensionMismatch(f"expected {shape}, got {a.shape}")
        return a.reshape(shape)

    lag_plus, lag_minus, lag_x = [], [], []
    for i in range(1, k + 1):
        lag_plus.append(arr(values.pop(f"phi{i}_plus", [0.0] * p), (p,)))
        lag_minus.append(arr(values.pop(f"phi{i}_minus", [0.0] * p), (p,)))
        lag_x.append(arr(values.pop(f"Phi{i}_x", np.zeros((p, p - 1)).tolist()), (p, p - 1)))
    c = arr(values.pop("c", [0.0] * p), (p,))
    Sigma_u = arr(values.pop("Sigma_u", np.eye(p).tolist()), (p, p))
    b = float(values.pop("b", 0.0))
    if values:
        raise ValueError(f"unknown keys: {sorted(values)}")
    return CksvarParams.from_blocks(
        arr(phi0_plus, (p,)), arr(phi0_minus, (p,)), arr(Phi0_x, (p, p - 1)),
        lag_plus, lag_minus, lag_x, c=c, Sigma_u=Sigma_u, b_threshold=b,
    )


def load_params(path) -> CksvarParams:
    return parse_params(Path(path).read_text())


def format_params(params: CksvarParams) -> str:
    """Inverse of :func:`parse_params` (threshold already folded into ``c``)."""

    def fmt(a):
        return repr(np.asarray(a).tolist())

    lines = [
        f"p = {params.p}",
        f"k = {params.k}",
        f"phi0_plus = {fmt(params.phi0_plus)}",
        f"phi0_minus = {fmt(params.phi0_minus)}",
        f"Phi0_x = {fmt(params.Phi0_x)}",
    ]
    for i, (a, b, X) in enumerate(zip(params.lag_phi_plus, params.lag_phi_minus, params.lag_Phi_x), 1):
        lines += [f"phi{i}_plus = {fmt(a)}", f"phi{i}_minus = {fmt(b)}", f"Phi{i}_x = {fmt(X)}"]
    lines += [f"c = {fmt(params.c)}", f"Sigma_u = {fmt(params.Sigma_u)}"]
    return "\n".join(lines) + "\n"
