"""Finite multi-index sets used as search spaces.

An :class:`IndexSet` stores its multi-indices as an ``(n, d)`` integer array
sorted lexicographically, so that column ordinals are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, SizeError

DEFAULT_CAP = 2**27

_WEIGHT_KINDS = ("shifted", "max")


@dataclass(frozen=True, eq=False)
class IndexSet:
    """An ordered, duplicate-free set of integer multi-indices.

    Parameters
    ----------
    indices : ndarray of shape (n, d)
        Multi-indices, one per row. They are sorted lexicographically and
        checked for duplicates on construction.
    """

    indices: np.ndarray
    _lookup: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.indices, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise DimensionError("indices must have shape (n, d) with d >= 1")
        if arr.shape[0] > 1:
            order = np.lexsort(arr.T[::-1])
            arr = arr[order]
            if np.any(np.all(arr[1:] == arr[:-1], axis=1)):
                raise ValueError("index set contains duplicate multi-indices")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)

    @property
    def dim(self) -> int:
        return self.indices.shape[1]

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.indices)

    def __contains__(self, k) -> bool:
        return tuple(int(v) for v in k) in self._position_map()

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.indices.shape == other.indices.shape and bool(
            np.all(self.indices == other.indices)
        )

    def __hash__(self):
        return hash((self.indices.shape, self.indices.tobytes()))

    def _position_map(self) -> dict:
        if self._lookup is None:
            lookup = {tuple(int(v) for v in row): i for i, row in enumerate(self.indices)}
            object.__setattr__(self, "_lookup", lookup)
        return self._lookup

    def position(self, k) -> int:
        """Ordinal of multi-index ``k``; raises ``KeyError`` if absent."""
        return self._position_map()[tuple(int(v) for v in k)]

    def positions(self, ks) -> np.ndarray:
        """Ordinals of the rows of ``ks``, ``-1`` for rows not in the set."""
        ks = np.atleast_2d(np.asarray(ks, dtype=np.int64))
        if ks.shape[1] != self.dim:
            raise DimensionError("multi-index length does not match the set dimension")
        codes, base, offset = _encode_pair(self.indices, ks)
        mine = _encode(self.indices, base, offset)
        loc = np.searchsorted(mine, codes)
        loc = np.minimum(loc, len(mine) - 1) if len(mine) else loc
        hit = (len(mine) > 0) & (mine[loc] == codes) if len(mine) else np.zeros(len(ks), bool)
        return np.where(hit, loc, -1)

    def contains_all(self, other: "IndexSet") -> bool:
        """True when ``other`` is a subset of this set."""
        if len(other) == 0:
            return True
        return bool(np.all(self.positions(other.indices) >= 0))

    def max_abs(self) -> int:
        """Largest entry magnitude over all members (0 for an empty set)."""
        return int(np.abs(self.indices).max()) if len(self) else 0

    def to_text(self) -> str:
        lines = [f"d={self.dim} n={len(self)}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.indices)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IndexSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty index-set document")
        header = dict(item.split("=") for item in lines[0].split())
        d, n = int(header["d"]), int(header["n"])
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
        if len(rows) != n or any(len(r) != d for r in rows):
            raise ValueError("index-set body does not match its header")
        return cls(np.array(rows, dtype=np.int64).reshape(n, d))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "IndexSet":
        return cls.from_text(Path(path).read_text())


def _encode_pair(a: np.ndarray, b: np.ndarray):
    both = np.concatenate([a, b]) if len(a) else b
    lo = both.min(axis=0) if len(both) else np.zeros(a.shape[1], np.int64)
    hi = both.max(axis=0) if len(both) else np.zeros(a.shape[1], np.int64)
    base = hi - lo + 1
    if float(np.prod(base.astype(float))) >= 2.0**62:
        raise SizeError("multi-index range too large to encode")
    return _encode(b, base, lo), base, lo


def _encode(rows: np.ndarray, base: np.ndarray, offset: np.ndarray) -> np.ndarray:
    code = np.zeros(len(rows), dtype=np.int64)
    for i in range(rows.shape[1]):
        code = code * base[i] + (rows[:, i] - offset[i])
    return code


def _check_weight(weight: str) -> None:
    if weight not in _WEIGHT_KINDS:
        raise ValueError(f"weight must be one of {_WEIGHT_KINDS}, got {weight!r}")


def pi_weight(k, r=None, weight: str = "shifted") -> float:
    """Hyperbolic weight of a multi-index.

    Parameters
    ----------
    k : sequence of int
        The multi-index.
    r : sequence of float, optional
        Per-coordinate exponents; all ones when absent.
    weight : {"shifted", "max"}
        ``"shifted"`` uses ``1 + |k_i|`` per factor, ``"max"`` uses
        ``max(1, |k_i|)``.

    Returns
    -------
    float
        ``prod_i w(k_i) ** r_i``.
    """
    _check_weight(weight)
    k = np.abs(np.asarray(k, dtype=float)).ravel()
    base = 1.0 + k if weight == "shifted" else np.maximum(1.0, k)
    if r is None:
        return float(np.prod(base))
    r = np.asarray(r, dtype=float).ravel()
    if r.shape != k.shape:
        raise DimensionError("weights must have the same length as k")
    return float(np.prod(base**r))


def pi_weights(indices: np.ndarray, r=None, weight: str = "shifted") -> np.ndarray:
    """Vectorized :func:`pi_weight` over the rows of ``indices``."""
    _check_weight(weight)
    a = np.abs(np.asarray(indices, dtype=float))
    base = 1.0 + a if weight == "shifted" else np.maximum(1.0, a)
    if r is not None:
        base = base ** np.asarray(r, dtype=float)
    return np.prod(base, axis=1)


def full_cube(M: int, d: int, signed: bool = True, cap: int = DEFAULT_CAP) -> IndexSet:
    """All multi-indices with entries in ``[-M, M]`` (signed) or ``[0, M]``."""
    if M < 0 or d < 1:
        raise ValueError("need M >= 0 and d >= 1")
    side = 2 * M + 1 if signed else M + 1
    count = side**d
    if count > cap:
        raise SizeError(f"cube has {count} indices, cap is {cap}", count=count)
    axis = np.arange(-M, M + 1) if signed else np.arange(0, M + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return IndexSet(np.stack([g.ravel() for g in grids], axis=1))


def hyperbolic_cross(
    s: float,
    d: int,
    r=None,
    signed: bool = True,
    weight: str = "shifted",
    cap: int = DEFAULT_CAP,
) -> IndexSet:
    """Hyperbolic cross ``{k : prod_i w(k_i) ** r_i <= s}``.

    The set is grown one coordinate at a time: every prefix carries its
    remaining budget and is extended by the contiguous range of admissible
    values, so the cost is proportional to ``d * |J|`` and the lexicographic
    order falls out of the construction.

    Parameters
    ----------
    s : float
        Radius, ``s >= 1``.
    d : int
        Dimension.
    r : sequence of float, optional
        Anisotropy exponents (all ones when absent).
    signed : bool
        Signed (Fourier) or non-negative (Chebyshev, Legendre) entries.
    weight : {"shifted", "max"}
        Per-factor weight ``1 + |k|`` or ``max(1, |k|)``.
    cap : int
        Maximum cardinality before :class:`SizeError` is raised.
    """
    _check_weight(weight)
    if s < 1 or d < 1:
        raise ValueError("need s >= 1 and d >= 1")
    r = np.ones(d) if r is None else np.asarray(r, dtype=float).ravel()
    if r.shape != (d,) or np.any(r <= 0):
        raise ValueError("weights must be a positive vector of length d")

    tol = 1e-12
    prefixes = np.zeros((1, 0), dtype=np.int64)
    budget = np.array([float(s)])
    for i in range(d):
        root = budget ** (1.0 / r[i]) * (1.0 + tol)
        vmax = np.floor(root - 1.0 if weight == "shifted" else root).astype(np.int64)
        vmax = np.maximum(vmax, 0)
        counts = 2 * vmax + 1 if signed else vmax + 1
        total = int(counts.sum())
        if total > cap:
            raise SizeError(f"hyperbolic cross exceeds cap {cap} (at least {total} indices)", count=total)
        parent = np.repeat(np.arange(len(prefixes)), counts)
        starts = np.cumsum(counts) - counts
        local = np.arange(total) - np.repeat(starts, counts)
        values = local - np.repeat(vmax, counts) if signed else local
        absval = np.abs(values).astype(float)
        w = 1.0 + absval if weight == "shifted" else np.maximum(1.0, absval)
        prefixes = np.concatenate([prefixes[parent], values[:, None]], axis=1)
        budget = budget[parent] / w ** r[i]
    return IndexSet(prefixes)


def cross_with_size(
    target: int,
    d: int,
    r=None,
    signed: bool = True,
    weight: str = "shifted",
    cap: int = DEFAULT_CAP,
    s_max: float = 1e9,
):
    """Integer-radius hyperbolic cross whose cardinality is closest to ``target``.

    Returns
    -------
    (IndexSet, int)
        The set and the radius ``s`` that produced it.
    """
    if target < 1:
        raise ValueError("target must be positive")

    def build(radius):
        return hyperbolic_cross(radius, d, r=r, signed=signed, weight=weight, cap=cap)

    lo, hi = 1, 1
    J_hi = build(hi)
    while len(J_hi) < target:
        if hi >= s_max:
            return J_hi, hi
        lo, hi = hi, min(2 * hi, int(s_max))
        J_hi = build(hi)
    # smallest radius reaching the target lies in (lo, hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        J_mid = build(mid)
        if len(J_mid) >= target:
            hi, J_hi = mid, J_mid
        else:
            lo = mid
    if hi > 1:
        J_lo = build(hi - 1)
        if abs(len(J_lo) - target) < abs(len(J_hi) - target):
            return J_lo, hi - 1
    return J_hi, hi
