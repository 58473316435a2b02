"""Small dense symmetric kernels: Cholesky, cyclic Jacobi, definite pencils.

All routines accept a single ``(d, d)`` matrix or a stack ``(..., d, d)``;
stacks are processed elementwise in lockstep, which is how the limit
simulation pushes 10**5 tiny pencils through without a Python-level loop
per draw. Dimensions are expected to be small (the pencils here are at
most ``p + 1``), so plain loops over matrix indices are fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeEigenvalue, NoConvergence, NotPositiveDefinite

SYMMETRY_RTOL = 1e-10
CONDITION_THRESHOLD = 1e-12
NEGATIVE_TOL = 1e-10
MAX_SWEEPS = 60


@dataclass(frozen=True)
class PencilResult:
    """Ascending generalized eigenvalues of ``a v = lam b v``.

    For a stack input, ``eigenvalues`` has shape ``(..., d)`` and
    ``condition_flag`` has the leading shape.
    """

    eigenvalues: np.ndarray
    condition_flag: np.ndarray | bool


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _check_symmetric(m, name="matrix"):
    scale = np.max(np.abs(m), axis=(-2, -1), keepdims=True)
    asym = np.max(np.abs(m - np.swapaxes(m, -1, -2)), axis=(-2, -1), keepdims=True)
    if np.any(asym > SYMMETRY_RTOL * np.maximum(scale, np.finfo(float).tiny)):
        raise ValueError(f"{name} is not symmetric")


def cholesky_factor(m):
    """Cholesky factor without raising.

    Returns ``(L, pivots, ok)`` where ``pivots`` are the elimination pivots
    ``L[j, j]**2`` and ``ok`` marks stack elements whose pivots were all
    strictly positive. Where ``ok`` is false, ``L`` is meaningless.
    """
    m = np.asarray(m, dtype=float)
    d = m.shape[-1]
    L = np.zeros_like(m)
    pivots = np.empty(m.shape[:-1])
    ok = np.ones(m.shape[:-2], dtype=bool)
    for j in range(d):
        piv = m[..., j, j] - np.sum(L[..., j, :j] ** 2, axis=-1)
        pivots[..., j] = piv
        ok &= piv > 0
        ljj = np.sqrt(np.where(piv > 0, piv, 1.0))
        L[..., j, j] = ljj
        for i in range(j + 1, d):
            s = m[..., i, j] - np.sum(L[..., i, :j] * L[..., j, :j], axis=-1)
            L[..., i, j] = s / ljj
    return L, pivots, ok


def cholesky(m):
    """Lower-triangular ``L`` with ``L @ L.T == m`` for symmetric positive-definite ``m``.

    Raises
    ------
    NotPositiveDefinite
        If any elimination pivot is ``<= 0``.
    """
    m = _as_square(m)
    _check_symmetric(m)
    L, _, ok = cholesky_factor(m)
    if not np.all(ok):
        raise NotPositiveDefinite("matrix is not positive definite")
    return L


def _forward_solve(L, rhs):
    """Solve ``L X = rhs`` for lower-triangular ``L`` (stacked)."""
    d = L.shape[-1]
    X = np.empty_like(rhs)
    for i in range(d):
        acc = rhs[..., i, :] - np.einsum("...k,...kj->...j", L[..., i, :i], X[..., :i, :])
        X[..., i, :] = acc / L[..., i, i][..., None]
    return X


def _jacobi_rotate(A, V, p, q):
    apq = A[..., p, q]
    nonzero = apq != 0.0
    safe_apq = np.where(nonzero, apq, 1.0)
    # a negligible apq can overflow tau; t then correctly becomes 0
    with np.errstate(over="ignore"):
        tau = (A[..., q, q] - A[..., p, p]) / (2.0 * safe_apq)
        sign = np.where(tau >= 0.0, 1.0, -1.0)
        t = sign / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    t = np.where(nonzero, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    c_ = c[..., None]
    s_ = s[..., None]

    # A <- J^T A J, V <- V J with J = [[c, s], [-s, c]] in the (p, q) plane
    col_p = A[..., :, p].copy()
    col_q = A[..., :, q]
    A[..., :, p] = c_ * col_p - s_ * col_q
    A[..., :, q] = s_ * col_p + c_ * col_q
    row_p = A[..., p, :].copy()
    row_q = A[..., q, :]
    A[..., p, :] = c_ * row_p - s_ * row_q
    A[..., q, :] = s_ * row_p + c_ * row_q
    A[..., p, q] = 0.0
    A[..., q, p] = 0.0

    vp = V[..., :, p].copy()
    vq = V[..., :, q]
    V[..., :, p] = c_ * vp - s_ * vq
    V[..., :, q] = s_ * vp + c_ * vq


def sym_eig(m, *, max_sweeps=MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns
    -------
    eigenvalues : ndarray, shape (..., d)
        Ascending.
    eigenvectors : ndarray, shape (..., d, d)
        Orthonormal columns matching ``eigenvalues``.

    Raises
    ------
    NoConvergence
        If the off-diagonal mass is still above tolerance after
        ``max_sweeps`` full sweeps.
    """
    m = _as_square(m)
    _check_symmetric(m)
    A = 0.5 * (m + np.swapaxes(m, -1, -2))
    d = A.shape[-1]
    V = np.broadcast_to(np.eye(d), A.shape).copy()
    eps = np.finfo(float).eps
    total = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    offdiag = ~np.eye(d, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.where(offdiag, A * A, 0.0), axis=(-2, -1)))
        if np.all(off <= eps * total):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                _jacobi_rotate(A, V, p, q)
    else:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.diagonal(A, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[..., None, :], axis=-1)
    return w, V


def _reduce(a, b):
    L, pivots, ok = cholesky_factor(b)
    flag = np.min(pivots, axis=-1) < CONDITION_THRESHOLD * np.max(pivots, axis=-1)
    Y = _forward_solve(L, a)
    C = _forward_solve(L, np.swapaxes(Y, -1, -2))
    return L, 0.5 * (C + np.swapaxes(C, -1, -2)), flag, ok


def gen_eig_pencil(a, b, *, return_vectors=False):
    """Generalized eigenvalues of the symmetric-definite pencil ``det(lam b - a) = 0``.

    ``b`` is factored as ``L L^T`` and the standard symmetric problem for
    ``L^{-1} a L^{-T}`` is solved with :func:`sym_eig`. Eigenvalues in
    ``[-1e-10 * scale, 0)`` are clamped to zero, with
    ``scale = max(1, max |lam|)``; anything more negative raises
    :class:`NegativeEigenvalue`.

    ``condition_flag`` is set when the smallest Cholesky pivot of ``b``
    is below ``1e-12`` times the largest. With ``return_vectors`` the
    ``b``-orthonormal eigenvectors are returned as a second value.
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"pencil shapes differ: {a.shape} vs {b.shape}")
    _check_symmetric(a, "a")
    _check_symmetric(b, "b")

    L, C, flag, ok = _reduce(a, b)
    if not np.all(ok):
        raise NotPositiveDefinite("b is not positive definite")
    w, V = sym_eig(C)

    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1, keepdims=True))
    if np.any(w < -NEGATIVE_TOL * scale):
        raise NegativeEigenvalue(f"pencil eigenvalue {w.min():.3e} below clamping tolerance")
    w = np.where(w < 0.0, 0.0, w)

    if flag.ndim == 0:
        flag = bool(flag)
    result = PencilResult(eigenvalues=w, condition_flag=flag)
    if return_vectors:
        return result, _back_solve(np.swapaxes(L, -1, -2), V)
    return result


def pencil_batch(a, b):
    """Non-raising variant of :func:`gen_eig_pencil` for stacks of pencils.

    Returns ``(eigenvalues, condition_flag, ok)``; ``ok`` is false where
    ``b`` is not positive definite or an eigenvalue falls below the
    clamping tolerance, and those rows of ``eigenvalues`` are NaN.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _, C, flag, ok = _reduce(a, b)
    ok = ok & np.all(np.isfinite(C), axis=(-2, -1))
    C = np.where(ok[..., None, None], C, 0.0)
    w, _ = sym_eig(C)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1, keepdims=True))
    ok = ok & ~np.any(w < -NEGATIVE_TOL * scale, axis=-1)
    w = np.where(w < 0.0, 0.0, w)
    w = np.where(ok[..., None], w, np.nan)
    return w, flag, ok


def _back_solve(U, rhs):
    """Solve ``U X = rhs`` for upper-triangular ``U`` (stacked)."""
    d = U.shape[-1]
    X = np.empty_like(rhs)
    for i in range(d - 1, -1, -1):
        acc = rhs[..., i, :] - np.einsum("...k,...kj->...j", U[..., i, i + 1:], X[..., i + 1:, :])
        X[..., i, :] = acc / U[..., i, i][..., None]
    return X
