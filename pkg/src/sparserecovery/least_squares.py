"""Support-restricted least-squares kernels.

``CholState`` keeps a growing Cholesky factor of the support Gram matrix
``B^H B`` (used by OMP). ``lsqr_solve`` wraps SciPy's LSQR with a warm start
(used by CoSaMP).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, lsqr

from .errors import RankError

GUARD = 1e-12


@dataclass
class CholState:
    """Cholesky factor ``L L^H = B^H B`` of a growing support.

    Attributes
    ----------
    support : list of int
        Column ordinals in insertion order.
    factor : ndarray
        Lower-triangular factor (only the leading ``k x k`` block is used).
    rhs : ndarray
        Cached ``B^H y`` entries in support order.
    """

    support: list = field(default_factory=list)
    factor: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    rhs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def with_capacity(cls, capacity: int, dtype=float) -> "CholState":
        """Empty state with storage preallocated for ``capacity`` columns."""
        capacity = max(int(capacity), 1)
        return cls([], np.zeros((capacity, capacity), dtype=dtype), np.zeros(capacity, dtype=dtype))

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def L(self) -> np.ndarray:
        k = self.size
        return self.factor[:k, :k]

    def _grow(self, dtype):
        k = self.size
        cap = self.factor.shape[0]
        dtype = np.result_type(self.factor.dtype, dtype)
        if k + 1 > cap or dtype != self.factor.dtype:
            new_cap = max(2 * cap, k + 1, 8)
            fac = np.zeros((new_cap, new_cap), dtype=dtype)
            fac[:k, :k] = self.factor[:k, :k]
            self.factor = fac
            rhs = np.zeros(new_cap, dtype=np.result_type(self.rhs.dtype, dtype))
            rhs[:k] = self.rhs[:k]
            self.rhs = rhs


def chol_insert(
    state: CholState,
    index: int,
    gram_column,
    self_product: float,
    rhs_entry,
    factor_row=None,
    guard: float = GUARD,
) -> CholState:
    """Append one column to the factored support.

    Parameters
    ----------
    state : CholState
        Modified in place and returned.
    index : int
        Ordinal of the new column ``b``.
    gram_column : array_like of shape (k,)
        ``B_k^H b`` for the current support.
    self_product : float
        ``b^H b``.
    rhs_entry : scalar
        ``b^H y``.
    factor_row : array_like, optional
        ``L^{-1} B_k^H b`` if already known; skips the forward substitution.
    guard : float
        Relative lower limit for the squared new diagonal entry.

    Raises
    ------
    RankError
        If the Schur complement ``b^H b - |l|^2`` is not above
        ``guard * b^H b``.
    """
    k = state.size
    g = np.asarray(gram_column).reshape(k)
    if factor_row is None:
        row = sla.solve_triangular(state.L, g, lower=True) if k else np.zeros(0, g.dtype)
    else:
        row = np.asarray(factor_row).reshape(k)
    schur = float(self_product) - float(np.vdot(row, row).real)
    if not (schur > 0.0 and schur > guard * float(self_product)):
        raise RankError(
            f"support Gram matrix is numerically singular when adding column {index} "
            f"(step {k + 1}, Schur complement {schur:.3e})",
            step=k + 1,
        )
    state._grow(np.result_type(row.dtype, np.asarray(rhs_entry).dtype, float))
    state.factor[k, :k] = np.conj(row)
    state.factor[k, k] = np.sqrt(schur)
    state.rhs[k] = rhs_entry
    state.support.append(int(index))
    return state


def chol_solve(state: CholState, rhs=None) -> np.ndarray:
    """Solve ``(B^H B) x = rhs`` (default: the cached ``B^H y``)."""
    k = state.size
    if k == 0:
        return np.zeros(0, dtype=state.factor.dtype)
    b = state.rhs[:k] if rhs is None else np.asarray(rhs).reshape(k)
    L = state.L
    w = sla.solve_triangular(L, b, lower=True)
    return sla.solve_triangular(L, w, lower=True, trans="C")


class LsqrResult(NamedTuple):
    x: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def lsqr_solve(
    apply: Callable,
    apply_adjoint: Callable,
    y,
    x0=None,
    tol: float = 1e-8,
    max_iters: int = 200,
    shape=None,
) -> LsqrResult:
    """Warm-started least squares ``min ||B x - y||`` by LSQR.

    The correction ``dx`` is solved against the deflated residual
    ``y - B x0``. A warm start that already satisfies
    ``||B^H (y - B x0)|| <= tol * ||B^H y||`` returns after zero iterations.

    Parameters
    ----------
    apply, apply_adjoint : callable
        Actions of ``B`` and ``B^H``.
    y : ndarray of shape (m,)
    x0 : ndarray of shape (n,), optional
    tol : float
        LSQR ``atol``/``btol``.
    max_iters : int
    shape : (int, int), optional
        Shape of ``B``; inferred from ``y`` and ``x0`` when omitted.
    """
    y = np.asarray(y)
    if shape is None:
        if x0 is None:
            raise ValueError("shape is required without x0")
        shape = (y.shape[0], np.asarray(x0).shape[0])
    m, n = shape
    x0 = np.zeros(n, dtype=y.dtype) if x0 is None else np.asarray(x0)
    dtype = np.result_type(y.dtype, x0.dtype, float)
    r0 = y - apply(x0)
    g0 = apply_adjoint(r0)
    scale = np.linalg.norm(apply_adjoint(y))
    if np.linalg.norm(g0) <= tol * scale or np.linalg.norm(r0) == 0.0:
        return LsqrResult(x0.astype(dtype), float(np.linalg.norm(r0)), 0, True)
    lin = LinearOperator((m, n), matvec=apply, rmatvec=apply_adjoint, dtype=dtype)
    out = lsqr(lin, r0.astype(dtype), atol=tol, btol=tol, iter_lim=max_iters)
    dx, istop, itn = out[0], out[1], out[2]
    x = x0 + dx
    res = float(np.linalg.norm(y - apply(x)))
    return LsqrResult(x, res, int(itn), istop in (1, 2, 4, 5))
