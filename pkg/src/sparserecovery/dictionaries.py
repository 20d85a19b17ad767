"""Tensor-product orthonormal systems, their bounds and samplers.

Three families are provided:

* ``fourier``: ``exp(2 pi i k.x)`` on the torus ``[0, 1)^d`` with the uniform
  measure, optionally sampled from the equidistant grid ``G(D, d)``.
* ``chebyshev``: ``prod_i sqrt(2)^{min(1, k_i)} cos(k_i arccos x_i)`` on
  ``[-1, 1]^d`` with the arcsine (Chebyshev) measure.
* ``legendre``: orthonormal Legendre polynomials on ``[-1, 1]^d`` with the
  uniform measure, preconditioned by the envelope
  ``phi(x) = prod_i (2/pi)^{1/2} (1 - x_i^2)^{-1/4}``. Decoders use
  ``L_k / phi`` and samples from ``phi^2 dmu``, the arcsine law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, PoleError
from .index_sets import IndexSet

KINDS = ("fourier", "chebyshev", "legendre")

# per-coordinate envelope sqrt(6/pi) (1 - x^2)^{-1/4}, whose squared L2 norm
# under dx/2 is 3; normalizing by sqrt(3) gives phi
_ENVELOPE_CONST = math.sqrt(6.0 / math.pi)


@dataclass(frozen=True)
class Dictionary:
    """A tensor-product orthonormal system.

    Parameters
    ----------
    kind : {"fourier", "chebyshev", "legendre"}
        ``"legendre"`` denotes the preconditioned Legendre system.
    dim : int
        Ambient dimension ``d``.
    """

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dictionary kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def signed(self) -> bool:
        """Whether frequencies range over Z (Fourier) rather than N_0."""
        return self.kind == "fourier"

    @property
    def is_complex(self) -> bool:
        return self.kind == "fourier"

    @property
    def preconditioned(self) -> bool:
        return self.kind == "legendre"

    @property
    def domain(self) -> tuple:
        return (0.0, 1.0) if self.kind == "fourier" else (-1.0, 1.0)

    def check_points(self, X) -> np.ndarray:
        """Return ``X`` as an ``(m, d)`` float array, validating the domain."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1) if self.dim > 1 or X.size == 1 else X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionError(f"points must have shape (m, {self.dim})")
        lo, hi = self.domain
        if not np.all(np.isfinite(X)) or np.any(X < lo) or np.any(X > hi):
            raise DomainError(f"points outside the domain [{lo}, {hi}]^{self.dim}")
        if self.preconditioned and np.any(np.abs(X) == 1.0):
            raise PoleError("preconditioned Legendre atoms have poles at |x_i| = 1")
        return X

    def check_indices(self, K) -> np.ndarray:
        K = K.indices if isinstance(K, IndexSet) else np.asarray(K, dtype=np.int64)
        K = np.atleast_2d(K)
        if K.shape[1] != self.dim:
            raise DimensionError(f"multi-indices must have length {self.dim}")
        if not self.signed and np.any(K < 0):
            raise ValueError(f"{self.kind} indices must be non-negative")
        return K

    def evaluate(self, X, K, dtype=np.complex128, check: bool = True) -> np.ndarray:
        """Original-basis atoms ``b_k(x)`` as an ``(m, n)`` block.

        For the preconditioned system this returns the plain orthonormal
        Legendre products; see :meth:`decoder_atoms` for ``b_k / phi``.
        """
        if check:
            X = self.check_points(X)
            K = self.check_indices(K)
        if self.kind == "fourier":
            phase = X @ K.T.astype(float)
            phase -= np.floor(phase)
            real = np.float32 if np.dtype(dtype) == np.complex64 else np.float64
            return np.exp((2j * np.pi) * phase.astype(real)).astype(dtype, copy=False)
        block = np.ones((X.shape[0], K.shape[0]), dtype=float)
        table = _chebyshev_table if self.kind == "chebyshev" else _legendre_table
        for i in range(self.dim):
            col = K[:, i]
            top = int(col.max()) if col.size else 0
            block *= table(X[:, i], top)[:, col]
        return block.astype(dtype, copy=False)

    def decoder_atoms(self, X, K, dtype=np.complex128) -> np.ndarray:
        """Atoms used by the decoders: ``b_k`` or ``b_k / phi`` when preconditioned."""
        X = self.check_points(X)
        block = self.evaluate(X, K, dtype=dtype)
        if self.preconditioned:
            block *= self.precondition_weights(X)[:, None]
        return block

    def atom_eval(self, k, x) -> complex:
        """Single decoder atom at a single point."""
        X = np.asarray(x, dtype=float).reshape(1, self.dim)
        K = np.asarray(k, dtype=np.int64).reshape(1, self.dim)
        return complex(self.decoder_atoms(X, K)[0, 0])

    def uniform_bound(self) -> float:
        """Sup-norm bound of the decoder atoms."""
        if self.kind == "fourier":
            return 1.0
        if self.kind == "chebyshev":
            return math.sqrt(2.0) ** self.dim
        return 3.0 ** (self.dim / 2.0)

    def precondition_weights(self, X) -> np.ndarray:
        """``1 / phi(x)`` per point (all ones for bounded systems)."""
        X = self.check_points(X)
        if not self.preconditioned:
            return np.ones(X.shape[0])
        # 1/phi per coordinate = sqrt(3) / envelope = sqrt(pi/2) (1 - x^2)^{1/4}
        per = math.sqrt(3.0) / _ENVELOPE_CONST * (1.0 - X**2) ** 0.25
        return np.prod(per, axis=1)

    def precondition_weight(self, x) -> float:
        return float(self.precondition_weights(np.asarray(x, float).reshape(1, self.dim))[0])

    def draw_samples(self, m: int, seed=None, grid=None) -> "SamplePoints":
        """Draw ``m`` iid points from the sampling measure.

        Parameters
        ----------
        m : int
            Number of points.
        seed : int or None
            Seed for :func:`numpy.random.default_rng`.
        grid : int, optional
            ``D`` for the equidistant grid ``{n / (2D) : n in {0..2D}}^d``
            (Fourier only).
        """
        if m < 1:
            raise ValueError("m must be positive")
        rng = np.random.default_rng(seed)
        if grid is not None:
            if self.kind != "fourier":
                raise ValueError("grid sampling is only defined for the Fourier system")
            D = int(grid)
            if D < 1:
                raise ValueError("grid parameter D must be positive")
            pts = rng.integers(0, 2 * D + 1, size=(m, self.dim)) / (2.0 * D)
            sampler = f"fourier-grid-D{D}"
        elif self.kind == "fourier":
            pts = rng.random((m, self.dim))
            sampler = "uniform"
        else:
            # arcsine law; for the preconditioned system phi^2 dmu is the same law
            pts = np.cos(np.pi * rng.random((m, self.dim)))
            sampler = "arcsine"
        return SamplePoints(points=pts, seed=seed, sampler=sampler)


@dataclass(frozen=True)
class SamplePoints:
    """Sample points with their provenance."""

    points: np.ndarray
    seed: object
    sampler: str

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def save(self, path) -> None:
        """Text header line followed by little-endian float64 row-major data."""
        header = f"m={self.m} d={self.dim} seed={self.seed} sampler={self.sampler}\n"
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(np.ascontiguousarray(self.points, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "SamplePoints":
        raw = Path(path).read_bytes()
        cut = raw.index(b"\n")
        fields = dict(item.split("=", 1) for item in raw[:cut].decode("ascii").split())
        m, d = int(fields["m"]), int(fields["d"])
        pts = np.frombuffer(raw[cut + 1 :], dtype="<f8").reshape(m, d).astype(float)
        seed = fields["seed"]
        seed = None if seed == "None" else int(seed)
        return cls(points=pts, seed=seed, sampler=fields["sampler"])


def _chebyshev_table(x: np.ndarray, top: int) -> np.ndarray:
    """Columns ``sqrt(2)^{min(1,k)} T_k(x)`` for ``k = 0..top``."""
    out = np.empty((x.shape[0], top + 1))
    out[:, 0] = 1.0
    if top >= 1:
        out[:, 1] = x
    for k in range(2, top + 1):
        out[:, k] = 2.0 * x * out[:, k - 1] - out[:, k - 2]
    out[:, 1:] *= math.sqrt(2.0)
    return out


def _legendre_table(x: np.ndarray, top: int) -> np.ndarray:
    """Columns ``sqrt(2k+1) P_k(x)``, orthonormal under ``dx / 2``."""
    out = np.empty((x.shape[0], top + 1))
    out[:, 0] = 1.0
    if top >= 1:
        out[:, 1] = x
    for k in range(2, top + 1):
        out[:, k] = ((2 * k - 1) * x * out[:, k - 1] - (k - 1) * out[:, k - 2]) / k
    out *= np.sqrt(2.0 * np.arange(top + 1) + 1.0)
    return out


def fourier(d: int) -> Dictionary:
    return Dictionary("fourier", d)


def chebyshev(d: int) -> Dictionary:
    return Dictionary("chebyshev", d)


def legendre_preconditioned(d: int) -> Dictionary:
    return Dictionary("legendre", d)
