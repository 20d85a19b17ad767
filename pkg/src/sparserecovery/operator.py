"""The normalized sampling operator ``A = m^{-1/2} (w_l b_j(x^l))``.

:class:`SamplingOperator` applies ``A`` and ``A^H`` tile by tile, regenerating
atoms on the fly. :class:`DenseOperator` wraps an explicit matrix. For tall
systems, :func:`compress` replaces ``(A, y)`` by a square system
``(A~, y~)`` with ``A~^H A~ = A^H A`` and ``A~^H y~ = A^H y`` and with
``||A~ z - y~|| = ||A z - y||`` for every ``z``. Every decoder in this
package depends on the data only through these quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.linalg import blas

from .dictionaries import Dictionary, SamplePoints
from .errors import DimensionError, RankError, SizeError
from .index_sets import IndexSet

DENSE_CAP = 2**24
CACHE_CAP = 2**22
TILE = 1024


class NormEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def _as_vector(v, n: int, name: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionError(f"{name} must be a vector of length {n}, got shape {v.shape}")
    return v


class LinearOperatorBase:
    """Shared conveniences for operators with ``apply`` and ``apply_adjoint``."""

    shape: tuple
    dtype: np.dtype

    @property
    def m(self) -> int:
        return self.shape[0]

    @property
    def n(self) -> int:
        return self.shape[1]

    def __matmul__(self, z):
        return self.apply(z)

    def residual_norm(self, z, y) -> float:
        return float(np.linalg.norm(self.apply(z) - y))


class DenseOperator(LinearOperatorBase):
    """Explicit matrix with the operator interface.

    Parameters
    ----------
    matrix : array_like of shape (m, n)
    gram : ndarray, optional
        Precomputed ``A^H A``; computed lazily otherwise.
    """

    def __init__(self, matrix, gram=None):
        mat = np.asarray(matrix)
        if mat.ndim != 2:
            raise DimensionError("matrix must be two-dimensional")
        if not np.issubdtype(mat.dtype, np.complexfloating):
            mat = mat.astype(float)
        self.matrix = mat
        self._adjoint = np.ascontiguousarray(mat.conj().T)
        self.shape = mat.shape
        self.dtype = mat.dtype
        self._gram = gram

    def apply(self, z) -> np.ndarray:
        z = _as_vector(z, self.n, "z")
        return self.matrix @ z

    def apply_adjoint(self, r) -> np.ndarray:
        r = _as_vector(r, self.m, "r")
        return self._adjoint @ r

    def columns(self, idx) -> np.ndarray:
        return self.matrix[:, np.asarray(idx, dtype=np.int64)]

    def materialize(self) -> np.ndarray:
        return self.matrix.copy()

    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = self._adjoint @ self.matrix
        return self._gram


class SamplingOperator(LinearOperatorBase):
    """Matrix-free ``A = m^{-1/2} diag(w) (b_j(x^l))``.

    Parameters
    ----------
    dictionary : Dictionary
    index_set : IndexSet
    samples : SamplePoints or ndarray of shape (m, d)
    weights : ndarray of shape (m,), optional
        Row weights; defaults to the dictionary's precondition weights.
    tile : int
        Tile edge for row and column blocking.
    precision : {"f64", "f32"}
        Precision of atom evaluation. Accumulation is always double.
    cache_cap : int
        Blocks up to this many entries are generated once and kept.
    dense_cap : int
        Upper limit for :meth:`materialize`.
    """

    def __init__(
        self,
        dictionary: Dictionary,
        index_set: IndexSet,
        samples,
        weights=None,
        tile: int = TILE,
        precision: str = "f64",
        cache_cap: int = CACHE_CAP,
        dense_cap: int = DENSE_CAP,
    ):
        pts = samples.points if isinstance(samples, SamplePoints) else samples
        self.dictionary = dictionary
        self.index_set = index_set
        self.points = dictionary.check_points(pts)
        if index_set.dim != dictionary.dim:
            raise DimensionError("index set and dictionary dimensions differ")
        self.K = dictionary.check_indices(index_set)
        m = self.points.shape[0]
        if weights is None:
            weights = dictionary.precondition_weights(self.points)
        self.weights = np.asarray(weights, dtype=float).reshape(m)
        self.scale = 1.0 / math.sqrt(m)
        self.shape = (m, len(index_set))
        self.dtype = np.dtype(np.complex128 if dictionary.is_complex else np.float64)
        if precision not in ("f64", "f32"):
            raise ValueError("precision must be 'f64' or 'f32'")
        self.precision = precision
        self.tile = int(tile)
        self.dense_cap = dense_cap
        self._cache = None
        if m * len(index_set) <= cache_cap:
            self._cache = self._block(slice(0, m), slice(0, len(index_set)))

    def _atom_dtype(self):
        if self.dictionary.is_complex:
            return np.complex64 if self.precision == "f32" else np.complex128
        return np.float32 if self.precision == "f32" else np.float64

    def _block(self, rows, cols) -> np.ndarray:
        X = self.points[rows]
        K = self.K[cols]
        blk = self.dictionary.evaluate(X, K, dtype=self._atom_dtype(), check=False)
        blk = blk.astype(self.dtype, copy=False)
        return blk * (self.scale * self.weights[rows])[:, None]

    def _tiles(self, size):
        return [slice(i, min(i + self.tile, size)) for i in range(0, size, self.tile)]

    def apply(self, z) -> np.ndarray:
        z = _as_vector(z, self.n, "z")
        if self._cache is not None:
            return self._cache @ z
        out = np.zeros(self.m, dtype=np.result_type(self.dtype, z.dtype))
        for rows in self._tiles(self.m):
            for cols in self._tiles(self.n):
                out[rows] += self._block(rows, cols) @ z[cols]
        return out

    def apply_adjoint(self, r) -> np.ndarray:
        r = _as_vector(r, self.m, "r")
        if self._cache is not None:
            return self._cache.conj().T @ r
        out = np.zeros(self.n, dtype=np.result_type(self.dtype, r.dtype))
        for cols in self._tiles(self.n):
            for rows in self._tiles(self.m):
                out[cols] += self._block(rows, cols).conj().T @ r[rows]
        return out

    def columns(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if self._cache is not None:
            return self._cache[:, idx]
        out = np.empty((self.m, idx.size), dtype=self.dtype)
        for rows in self._tiles(self.m):
            out[rows] = self._block(rows, idx)
        return out

    def materialize(self) -> np.ndarray:
        if self.m * self.n > self.dense_cap:
            raise SizeError(
                f"dense matrix would have {self.m * self.n} entries, cap is {self.dense_cap}",
                count=self.m * self.n,
            )
        if self._cache is not None:
            return self._cache.copy()
        return self._block(slice(0, self.m), slice(0, self.n))

    def gram(self, row_tile: int = 2048) -> np.ndarray:
        """``A^H A`` accumulated over row tiles in a fixed order."""
        return self.normal_equations(None, row_tile)[0]

    def normal_equations(self, y=None, row_tile: int = 2048):
        """``(A^H A, A^H y)`` from a single pass over the atoms.

        ``A^H y`` is ``None`` when ``y`` is omitted.
        """
        n = self.n
        if y is not None:
            y = _as_vector(y, self.m, "y")
            atb = np.zeros(n, dtype=np.result_type(self.dtype, y.dtype))
        complex_ = np.issubdtype(self.dtype, np.complexfloating)
        G = np.zeros((n, n), dtype=self.dtype, order="F")
        for start in range(0, self.m, row_tile):
            rows = slice(start, min(start + row_tile, self.m))
            blk = np.asfortranarray(self._block(rows, slice(0, n)))
            if complex_:
                G = blas.zherk(1.0, blk, beta=1.0, c=G, trans=2, lower=0, overwrite_c=1)
            else:
                G = blas.dsyrk(1.0, blk, beta=1.0, c=G, trans=1, lower=0, overwrite_c=1)
            if y is not None:
                atb += blk.conj().T @ y[rows]
        upper = np.triu(G)
        full = upper + np.triu(upper, 1).conj().T
        if complex_:
            full[np.diag_indices(n)] = full.diagonal().real
        return np.ascontiguousarray(full), (atb if y is not None else None)


@dataclass
class CompressedSystem:
    """Square surrogate ``(A~, y~)`` of a tall least-squares system.

    Attributes
    ----------
    operator : DenseOperator
        ``A~ = [R; 0]`` with ``A^H A = R^H R``.
    y : ndarray
        ``y~ = [R^{-H} A^H y; rho]`` with ``rho^2 = ||y||^2 - ||R^{-H} A^H y||^2``.
    gram : ndarray
        ``A^H A``.
    atb : ndarray
        ``A^H y``.
    """

    operator: DenseOperator
    y: np.ndarray
    gram: np.ndarray
    atb: np.ndarray
    y_norm: float = field(default=0.0)


def compress(op, y) -> CompressedSystem:
    """Cholesky-based compression of a tall system ``(A, y)``.

    Raises
    ------
    RankError
        If ``A^H A`` is not numerically positive definite.
    """
    y = _as_vector(y, op.m, "y")
    if hasattr(op, "normal_equations"):
        G, atb = op.normal_equations(y)
    else:
        G, atb = op.gram(), op.apply_adjoint(y)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise RankError("Gram matrix is not positive definite; cannot compress") from exc
    top = sla.solve_triangular(L, atb, lower=True)
    ynorm2 = float(np.vdot(y, y).real)
    rho = math.sqrt(max(ynorm2 - float(np.vdot(top, top).real), 0.0))
    R = L.conj().T
    n = G.shape[0]
    mat = np.zeros((n + 1, n), dtype=np.result_type(G.dtype, atb.dtype))
    mat[:n] = R
    ytil = np.concatenate([top, [rho]]).astype(mat.dtype)
    return CompressedSystem(
        operator=DenseOperator(mat, gram=G), y=ytil, gram=G, atb=atb, y_norm=math.sqrt(ynorm2)
    )


def spectral_norm(op, max_iters: int = 200, tol: float = 1e-10, seed=0) -> NormEstimate:
    """Power iteration on ``A^H A``.

    Returns the square root of the last Rayleigh quotient, which never
    exceeds the true norm, together with a convergence flag.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    rng = np.random.default_rng(seed)
    n = op.shape[1]
    if np.issubdtype(np.dtype(op.dtype), np.complexfloating):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for it in range(1, max_iters + 1):
        w = op.apply_adjoint(op.apply(v))
        lam = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return NormEstimate(0.0, True, it)
        v = w / nw
        if it > 1 and abs(lam - lam_prev) <= tol * abs(lam):
            return NormEstimate(math.sqrt(max(lam, 0.0)), True, it)
        lam_prev = lam
    return NormEstimate(math.sqrt(max(lam, 0.0)), False, max_iters)
