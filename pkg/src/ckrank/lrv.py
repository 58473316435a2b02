"""Regime-restricted long-run variances and the initialization estimate.

For each regime the autocovariances of the first differences are
normalized by the number of observations in that regime,

    gamma_l(+) = (sum_t 1{y_t >= 0})^-1 sum_t dy_t dy_{t-l} 1{y_t >= 0},

only the current period being regime-restricted. The long-run standard
deviation is ``omega = sqrt(sum_{|l| <= L} K(l / L) gamma_|l|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegime, TooFewObservations, ZeroLrv

KERNELS = ("bartlett",)


@dataclass(frozen=True)
class LrvEstimate:
    """Long-run standard deviations by regime.

    A regime that was not requested has ``None``. ``clamped`` lists the
    regimes whose kernel sum came out negative and was set to zero.
    """

    omega_plus: float | None
    omega_minus: float | None
    lags_used: int
    kernel: str = "bartlett"
    clamped: tuple = ()


@dataclass(frozen=True)
class W0Estimate:
    value: float
    regime_used: str


def default_lags(n: int) -> int:
    """``floor(4 (n / 100)**(2/9))``, at least 1."""
    return max(1, math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def kernel_weights(lags: int, kernel: str = "bartlett") -> np.ndarray:
    """Weights ``K(l / L)`` for ``l = 0..L``.

    >>> kernel_weights(2)
    array([1. , 0.5, 0. ])
    """
    if kernel != "bartlett":
        raise ValueError(f"unknown kernel {kernel!r}; available: {KERNELS}")
    if lags < 1:
        raise ValueError("lags must be >= 1")
    ell = np.arange(lags + 1)
    return np.maximum(0.0, 1.0 - ell / lags)


def _regime_lrv(dy: np.ndarray, mask: np.ndarray, weights: np.ndarray) -> tuple[float, bool]:
    count = int(np.count_nonzero(mask))
    gamma = np.empty(len(weights))
    dm = np.where(mask, dy, 0.0)
    for ell in range(len(weights)):
        gamma[ell] = np.dot(dm[ell:], dy[:len(dy) - ell]) / count
    total = weights[0] * gamma[0] + 2.0 * np.dot(weights[1:], gamma[1:])
    if total < 0.0:
        return 0.0, True
    return math.sqrt(total), False


def lrv_estimate(
    y,
    *,
    y0: float | None = None,
    lags: int | None = None,
    kernel: str = "bartlett",
    regime: str = "both",
) -> LrvEstimate:
    """Kernel long-run standard deviations of ``dy`` within each regime.

    Parameters
    ----------
    y : array_like, shape (n,)
        Levels ``y_1..y_n``.
    y0 : float, optional
        The level preceding the sample. When given, ``dy_1 = y_1 - y0`` is
        used; otherwise differencing starts at ``t = 2``.
    lags : int, optional
        Truncation ``L``; defaults to :func:`default_lags` of the sample size.
    regime : {"both", "+", "-"}
        Which regime(s) to estimate.

    Raises
    ------
    TooFewObservations
        If fewer than ``2 L + 2`` observations are available.
    EmptyRegime
        If a requested regime has no observations.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if regime not in ("both", "+", "-"):
        raise ValueError("regime must be 'both', '+' or '-'")
    n = y.size
    L = default_lags(n) if lags is None else int(lags)
    weights = kernel_weights(L, kernel)
    if n < 2 * L + 2:
        raise TooFewObservations(f"need n >= 2L + 2 = {2 * L + 2}, got n = {n}")
    if y0 is None:
        dy = np.diff(y)
        level = y[1:]
    else:
        dy = np.diff(y, prepend=float(y0))
        level = y

    plus = level >= 0.0
    out = {"+": None, "-": None}
    clamped = []
    for sign, mask in (("+", plus), ("-", ~plus)):
        if regime not in ("both", sign):
            continue
        if not np.any(mask):
            raise EmptyRegime(f"no observations in regime {sign}")
        omega, was_clamped = _regime_lrv(dy, mask, weights)
        out[sign] = omega
        if was_clamped:
            clamped.append(sign)
    return LrvEstimate(out["+"], out["-"], L, kernel, tuple(clamped))


def estimate_w0(y0: float, n: int, est: LrvEstimate) -> W0Estimate:
    """``n**-0.5 * y0 / omega`` using the regime of ``y0``.

    >>> estimate_w0(10.0, 100, LrvEstimate(2.0, 1.0, 4)).value
    0.5

    Raises
    ------
    ZeroLrv
        If the needed ``omega`` is zero or was not estimated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if y0 == 0.0:
        return W0Estimate(0.0, "+")
    sign = "+" if y0 > 0 else "-"
    omega = est.omega_plus if sign == "+" else est.omega_minus
    if not omega:
        raise ZeroLrv(f"long-run standard deviation for regime {sign} is zero or missing")
    return W0Estimate(y0 / math.sqrt(n) / omega, sign)
