"""Breitung-type variance-ratio rank statistics, standard and modified.

The modified (MB) statistic works on the demeaned ``z* = (y+, y-, x)`` and
sums the ``q0 + 1`` smallest eigenvalues of ``det(lam B - A) = 0``; the
standard (SB) one works on the demeaned ``z`` and sums ``q0`` of them.

Moments are pre-scaled, ``A = n^-1 sum m_t m_t'`` and
``B = n^-3 sum s_t s_t'`` with ``s_t`` the partial sums, so that the
pencil eigenvalues are already ``n**2`` times the raw ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, NegativeEigenvalue, NotPositiveDefinite
from .limitdist import CritValTable
from .lrv import estimate_w0, lrv_estimate
from .pencil import CONDITION_THRESHOLD, cholesky_factor, gen_eig_pencil, pencil_batch
from .simulate import OccupationStats, SeriesMatrix, occupation, split_regimes

VARIANTS = ("mb", "sb")
DEFAULT_TAU = {"mb": 0.15, "sb": 0.0}
CUMSUM_BLOCK = 64
COLLINEARITY_TOL = 1e-8
CSV_HEADER = "variant,q0,lambda,crit,alpha,tau,frac_plus,reject"


@dataclass(frozen=True, eq=False)
class MomentPair:
    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True, eq=False)
class TestOutcome:
    """Statistic and (when a critical value was applied) the decision."""

    __test__ = False  # not a pytest class

    variant: str
    q0: int
    lambda_stat: float
    eigenvalues: np.ndarray
    occupation: OccupationStats
    crit_value: float | None = None
    alpha: float | None = None
    tau: float | None = None
    reject: bool | None = None
    w0_estimate: float | None = None

    def csv_row(self) -> str:
        def g(v):
            return "" if v is None else f"{v:.17g}"

        reject = "" if self.reject is None else str(int(self.reject))
        return ",".join([
            self.variant, str(self.q0), g(self.lambda_stat), g(self.crit_value),
            g(self.alpha), g(self.tau), g(self.occupation.frac_plus), reject,
        ])

    def summary(self) -> str:
        occ = self.occupation
        lines = [
            f"{self.variant.upper()} test of H0: q = {self.q0} common trends (n = {occ.n})",
            f"  statistic        {self.lambda_stat:.6f}",
            f"  eigenvalues      {np.array2string(self.eigenvalues, precision=6)}",
            f"  regime shares    y>=0: {occ.frac_plus:.4f}  y<0: {occ.frac_minus:.4f}",
        ]
        if self.crit_value is not None:
            decision = "reject" if self.reject else "fail to reject"
            lines += [
                f"  critical value   {self.crit_value:.6f}  (alpha = {self.alpha:g}, tau = {self.tau:g})",
                f"  decision         {decision}",
            ]
            if self.tau and min(occ.frac_plus, occ.frac_minus) < self.tau:
                lines.append(f"  note: the smaller regime share is below tau = {self.tau:g}")
        return "\n".join(lines)


def _values(z) -> np.ndarray:
    return z.values if isinstance(z, SeriesMatrix) else np.asarray(z, dtype=float)


def build_zstar(z) -> SeriesMatrix:
    """``(y, x) -> (y+, y-, x)`` row by row (``y = 0`` goes to ``y+ = y- = 0``)."""
    v = _values(z)
    if v.ndim == 1:
        v = v[:, None]
    roles = ("y+", "y-") + tuple(f"x{i}" for i in range(1, v.shape[1]))
    return SeriesMatrix(split_regimes(v), roles)


def demean(m):
    """Subtract column means. Accepts a SeriesMatrix or an array ``(..., n, d)``."""
    if isinstance(m, SeriesMatrix):
        return SeriesMatrix(demean(m.values), m.roles)
    v = np.asarray(m, dtype=float)
    if v.ndim == 1:
        return demean(v[:, None])[:, 0]
    if v.shape[-2] < 2:
        raise ValueError("demeaning needs n >= 2")
    return v - v.mean(axis=-2, keepdims=True)


def compensated_cumsum(m: np.ndarray, block: int = CUMSUM_BLOCK) -> np.ndarray:
    """Partial sums along axis -2 with compensated carries between blocks.

    Within blocks of ``block`` rows the running sum is ordinary; block
    totals are accumulated with Kahan summation, so the error does not grow
    with ``n``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[-2]
    nb = -(-n // block)
    pad = nb * block - n
    if pad:
        widths = [(0, 0)] * m.ndim
        widths[-2] = (0, pad)
        m = np.pad(m, widths)
    shaped = m.reshape(m.shape[:-2] + (nb, block, m.shape[-1]))
    local = np.cumsum(shaped, axis=-2)
    totals = local[..., -1, :]
    offsets = np.empty_like(totals)
    acc = np.zeros(totals.shape[:-2] + totals.shape[-1:])
    comp = np.zeros_like(acc)
    for j in range(nb):
        offsets[..., j, :] = acc - comp
        y = totals[..., j, :] - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    out = (local + offsets[..., None, :]).reshape(m.shape)
    return out[..., :n, :]


def _moments(m: np.ndarray):
    n = m.shape[-2]
    s = compensated_cumsum(m)
    mt = np.swapaxes(m, -1, -2)
    st = np.swapaxes(s, -1, -2)
    A = (mt @ m) / n
    B = (st @ s) / float(n) ** 3
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    return A, B


def build_moments(m) -> MomentPair:
    """Pre-scaled moment matrices of demeaned data.

    Raises
    ------
    DegenerateData
        If ``B`` is not numerically positive definite (zero or collinear
        columns, constant data).
    """
    v = _values(m)
    if v.ndim == 1:
        v = v[:, None]
    n, d = v.shape
    if n <= d:
        raise DegenerateData(f"need n > d, got n={n}, d={d}")
    A, B = _moments(v)
    _, pivots, ok = cholesky_factor(B)
    if not ok or pivots.min() < CONDITION_THRESHOLD * pivots.max():
        raise DegenerateData("cumulated moment matrix is singular")
    return MomentPair(A, B)


def _check_q0(q0: int, p: int):
    if not 1 <= q0 <= p:
        raise ValueError(f"q0 must lie in 1..{p}, got {q0}")


def _check_variant(variant: str) -> str:
    variant = variant.lower()
    if variant not in VARIANTS:
        raise ValueError(f"variant must be 'mb' or 'sb', got {variant!r}")
    return variant


def _orthonormalize(m: np.ndarray):
    """Orthonormal basis ``Q`` of the columns of ``m`` (stacked ``(..., n, d)``).

    The pencil of ``Q`` is congruent to the pencil of ``m`` (``m = Q R``), so
    both have the same eigenvalues, but forming moments from ``Q`` avoids
    squaring the conditioning of the data columns. ``ok`` is false where a
    column lies (numerically) in the span of the others.
    """
    Q, R = np.linalg.qr(m)
    diag = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    norms = np.linalg.norm(m, axis=-2)
    ok = np.all(diag > COLLINEARITY_TOL * norms, axis=-1)
    return Q, ok


def pencil_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of the pre-scaled pencil of the demeaned columns of ``m``."""
    v = demean(_values(m))
    if v.ndim == 1:
        v = v[:, None]
    n, d = v.shape
    if n <= d:
        raise DegenerateData(f"need n > d, got n={n}, d={d}")
    Q, ok = _orthonormalize(v)
    if not ok:
        raise DegenerateData("data columns are collinear")
    moments = build_moments(Q)
    try:
        res = gen_eig_pencil(moments.A, moments.B)
    except (NotPositiveDefinite, NegativeEigenvalue) as exc:
        raise DegenerateData(str(exc)) from exc
    if res.condition_flag:
        raise DegenerateData("cumulated moment matrix is ill-conditioned")
    return res.eigenvalues


def lambda_stat(z, q0: int, variant: str = "mb") -> TestOutcome:
    """Rank statistic ``Lambda_{n,q0}`` (no decision attached)."""
    variant = _check_variant(variant)
    v = _values(z)
    if v.ndim == 1:
        v = v[:, None]
    p = v.shape[1]
    _check_q0(q0, p)
    w = pencil_eigenvalues(split_regimes(v) if variant == "mb" else v)
    k = q0 + 1 if variant == "mb" else q0
    return TestOutcome(
        variant=variant, q0=q0, lambda_stat=float(np.sum(w[:k])),
        eigenvalues=w, occupation=occupation(v[:, 0]),
    )


def batch_eigenvalues(paths: np.ndarray, variant: str) -> tuple[np.ndarray, np.ndarray]:
    """Pencil eigenvalues for a stack of paths ``(batch, n, p)``.

    Returns ``(eigenvalues, ok)``; rows that would raise
    :class:`DegenerateData` in :func:`lambda_stat` have ``ok`` false.
    """
    variant = _check_variant(variant)
    data = split_regimes(paths) if variant == "mb" else np.asarray(paths, dtype=float)
    Q, ok = _orthonormalize(demean(data))
    A, B = _moments(Q)
    w, flag, chol_ok = pencil_batch(A, B)
    ok = ok & chol_ok & ~flag
    return np.where(ok[:, None], w, np.nan), ok


def statistic_from_eigenvalues(eigenvalues: np.ndarray, q0: int, variant: str) -> np.ndarray:
    k = q0 + 1 if _check_variant(variant) == "mb" else q0
    return np.sum(eigenvalues[..., :k], axis=-1)


def run_test(
    z,
    q0: int,
    variant: str,
    table: CritValTable,
    alpha: float = 0.10,
    tau: float | None = None,
    *,
    y0: float = 0.0,
    lrv_lags: int | None = None,
    kernel: str = "bartlett",
) -> TestOutcome:
    """Compute the statistic and compare it with a tabulated critical value.

    MB defaults to ``tau = 0.15`` and SB to the unconditional ``tau = 0``
    row. With a nonzero initial value ``y0`` (the observation preceding the
    sample) the MB row is chosen at the estimated initialization
    ``W0_hat``, interpolating linearly between tabulated ``w0_init`` values.
    """
    variant = _check_variant(variant)
    if tau is None:
        tau = DEFAULT_TAU[variant]
    out = lambda_stat(z, q0, variant)
    w0 = 0.0
    if variant == "mb" and y0 != 0.0:
        y = _values(z)
        y = y[:, 0] if y.ndim == 2 else y
        est = lrv_estimate(y, y0=y0, lags=lrv_lags, kernel=kernel, regime="+" if y0 > 0 else "-")
        w0 = estimate_w0(y0, len(y), est).value
    crit = table.lookup(variant, q0, tau, alpha, w0)
    return TestOutcome(
        variant=variant, q0=q0, lambda_stat=out.lambda_stat, eigenvalues=out.eigenvalues,
        occupation=out.occupation, crit_value=crit, alpha=alpha, tau=tau,
        reject=bool(out.lambda_stat > crit), w0_estimate=w0,
    )
