"""Error metrics: best n-term errors, Wiener norms, truncation tails, the
Parseval error split, Monte-Carlo L_q norms and rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SizeError, UnsupportedError
from .index_sets import IndexSet, hyperbolic_cross, pi_weights
from .test_functions import GroundTruth

SUPERSET_FACTOR = 10.0
SUPERSET_CAP = 3_000_000
MC_BATCHES = 5


@dataclass(frozen=True)
class CoeffSequence:
    """Coefficient values on an index set with optional certified tails.

    Attributes
    ----------
    values : ndarray
    index_set : IndexSet, optional
    tail_l1 : float, optional
        Upper bound for the l1 norm of all coefficients outside the set.
    tail_l2 : float, optional
        Upper bound for the l2 norm of all coefficients outside the set.
    """

    values: np.ndarray
    index_set: Optional[IndexSet] = None
    tail_l1: Optional[float] = None
    tail_l2: Optional[float] = None

    def __post_init__(self):
        vals = np.asarray(self.values).ravel()
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficient values must be finite")
        for name in ("tail_l1", "tail_l2"):
            t = getattr(self, name)
            if t is not None and not t >= 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.index_set is not None and len(self.index_set) != vals.size:
            raise ValueError("index set and values differ in length")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


def _magnitudes(v) -> np.ndarray:
    vals = v.values if isinstance(v, CoeffSequence) else np.asarray(v).ravel()
    return np.abs(vals)


def _sorted_desc(mag: np.ndarray) -> np.ndarray:
    # stable sort on the negated magnitudes: ties keep ordinal order
    return mag[np.argsort(-mag, kind="stable")]


def best_n_term(v, n: int, p: float = 2.0) -> float:
    """``sigma_n(v)_{l_p}``: the l_p norm of ``v`` beyond its ``n`` largest entries.

    ``p = inf`` returns the ``(n+1)``-st largest magnitude.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not p >= 1.0:
        raise ValueError("p must lie in [1, inf]")
    tail = _sorted_desc(_magnitudes(v))[n:]
    if tail.size == 0:
        return 0.0
    if math.isinf(p):
        return float(tail[0])
    top = tail[0]
    if top == 0.0:
        return 0.0
    return float(top * np.sum((tail / top) ** p) ** (1.0 / p))


def best_n_term_series(v, ns: Sequence[int], p: float = 2.0) -> np.ndarray:
    """``best_n_term`` for many ``n`` at once (finite ``p``)."""
    if not 1.0 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    ns = np.asarray(ns, dtype=np.int64)
    if np.any(ns < 0):
        raise ValueError("n must be non-negative")
    powered = _sorted_desc(_magnitudes(v)) ** p
    # suffix[n] = sum of entries at positions >= n, accumulated from the small end
    suffix = np.concatenate([np.cumsum(powered[::-1])[::-1], [0.0]])
    return suffix[np.minimum(ns, powered.size)] ** (1.0 / p)


def wiener_norm(v, theta: float = 1.0) -> float:
    """l_theta norm of the coefficients, plus the certified tail when present."""
    if not 1.0 <= theta < math.inf:
        raise ValueError("theta must lie in [1, inf)")
    mag = _magnitudes(v)
    top = float(mag.max()) if mag.size else 0.0
    val = 0.0 if top == 0.0 else top * float(np.sum((mag / top) ** theta) ** (1.0 / theta))
    if isinstance(v, CoeffSequence):
        # ||.||_theta <= ||.||_2 for theta >= 2 and <= ||.||_1 always
        tail = v.tail_l2 if theta >= 2.0 and v.tail_l2 is not None else v.tail_l1
        if tail is not None:
            val += tail
    return val


def ground_truth_sequence(gt: GroundTruth, J: IndexSet, superset_factor: float = SUPERSET_FACTOR,
                          superset_cap: int = SUPERSET_CAP) -> CoeffSequence:
    """Oracle coefficients on ``J`` with certified l1 and l2 tails."""
    vals = gt.coefficients(J)
    split = truncation_split(gt, J, superset_factor, superset_cap)
    l1 = None if gt.l1_upper is None else max(gt.l1_upper - float(np.abs(vals).sum()), 0.0)
    return CoeffSequence(vals, J, tail_l1=l1, tail_l2=split.total)


@dataclass(frozen=True)
class TruncationSplit:
    """``E_J(f)_{L_2}`` resolved into an explicit and a Parseval part.

    Attributes
    ----------
    explicit_sq : float
        ``sum |[f]_k|^2`` over the superset minus ``J``.
    remainder_sq : float
        ``||f||^2 - sum |[f]_k|^2`` over the superset (mass beyond it).
    superset_size : int
    superset_radius : float
    """

    explicit_sq: float
    remainder_sq: float
    superset_size: int
    superset_radius: float

    @property
    def total(self) -> float:
        return math.sqrt(self.explicit_sq + self.remainder_sq)


def _superset(gt: GroundTruth, J: IndexSet, factor: float, cap: int):
    """A ``max``-weight cross containing ``J``, shrinking the factor to fit ``cap``."""
    base = float(pi_weights(J.indices, weight="max").max()) if len(J) else 1.0
    f = max(float(factor), 1.0)
    while True:
        radius = f * base
        try:
            S = hyperbolic_cross(radius, gt.dim, signed=gt.signed, weight="max", cap=cap)
            return S, radius
        except SizeError:
            if f <= 1.0:
                raise
            f = max(1.0, f / 1.5)


def truncation_split(gt: GroundTruth, J: IndexSet, superset_factor: float = SUPERSET_FACTOR,
                     superset_cap: int = SUPERSET_CAP) -> TruncationSplit:
    """Explicit and remainder parts of ``||f - P_J f||^2``.

    The superset is the cross ``{k : prod max(1, |k_i|) <= factor * R}`` with
    ``R`` the largest such product over ``J``, so it contains ``J``. The
    mass beyond it follows from Parseval with the exact ``||f||^2``.
    """
    if not gt.has_coefficients:
        raise UnsupportedError(f"{gt.name} has no coefficient oracle")
    if J.dim != gt.dim:
        raise ValueError("index set dimension does not match the ground truth")
    S, radius = _superset(gt, J, superset_factor, superset_cap)
    cs = np.abs(gt.coefficients(S)) ** 2
    inside = J.positions(S.indices) >= 0
    explicit = float(np.sum(cs[~inside]))
    # sum the small terms first for a stable remainder
    total = float(np.sum(np.sort(cs)))
    remainder = max(gt.norm_sq - total, 0.0)
    return TruncationSplit(explicit, remainder, len(S), radius)


def truncation_error(gt: GroundTruth, J: IndexSet, mode: str = "L2",
                     superset_factor: float = SUPERSET_FACTOR, superset_cap: int = SUPERSET_CAP) -> float:
    """Truncation error of ``f`` for the search space ``V_J``.

    Parameters
    ----------
    mode : {"L2", "Linf-upper"}
        ``"L2"`` is ``||f - P_J f||_{L_2}``. ``"Linf-upper"`` is the upper
        bound ``sum_{k not in J} |[f]_k|`` on the sup-norm of the tail.
    """
    if not gt.has_coefficients:
        raise UnsupportedError(f"{gt.name} has no coefficient oracle")
    if mode == "L2":
        return truncation_split(gt, J, superset_factor, superset_cap).total
    if mode == "Linf-upper":
        if gt.l1_upper is None:
            raise UnsupportedError(f"{gt.name} has no l1 bound")
        inside = float(np.abs(gt.coefficients(J)).sum()) if len(J) else 0.0
        return max(gt.l1_upper - inside, 0.0)
    raise ValueError(f"unknown mode {mode!r}")


def l2_error_split(gt: GroundTruth, J: IndexSet, result, superset_factor: float = SUPERSET_FACTOR,
                   superset_cap: int = SUPERSET_CAP, trunc: Optional[float] = None) -> float:
    """``||f - sum_J c_k b_k||_{L_2}`` from coefficients alone.

    ``result`` is a :class:`~sparserecovery.decoders.DecoderResult` or a
    coefficient vector ordered like ``J``. A precomputed truncation error
    may be passed as ``trunc``.
    """
    coeffs = np.asarray(getattr(result, "coefficients", result)).ravel()
    if coeffs.size != len(J):
        raise ValueError("coefficient vector and index set differ in length")
    if trunc is None:
        trunc = truncation_error(gt, J, "L2", superset_factor, superset_cap)
    inside = float(np.sum(np.abs(gt.coefficients(J) - coeffs) ** 2))
    return math.sqrt(inside + trunc * trunc)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Batch-means estimate of an L_q distance; unpacks as ``(estimate, stderr)``."""

    estimate: float
    stderr: float
    batch_estimates: tuple
    n_points: int

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def _draw(sampler, n: int, seed):
    if hasattr(sampler, "draw_samples"):
        return sampler.draw_samples(n, seed=seed).points
    return np.asarray(sampler(n, np.random.default_rng(seed)), dtype=float)


def monte_carlo_lq(f: Callable, g: Optional[Callable], q: float, N: int, seed, sampler,
                   batches: int = MC_BATCHES, chunk: int = 65536) -> MonteCarloEstimate:
    """Monte-Carlo estimate of ``(E_mu |f - g|^q)^{1/q}``.

    The ``N`` points are split into ``batches`` equal batches with
    independent child seeds. The estimate uses the mean of the batch means
    of ``|f - g|^q``; its standard error is the batch-means standard error
    carried through ``t -> t^{1/q}`` by the delta method.

    Parameters
    ----------
    f, g : callable
        Evaluators ``X (n, d) -> (n,)``; ``g=None`` means zero.
    sampler : Dictionary or callable
        Either an object with ``draw_samples(n, seed)`` or a callable
        ``(n, rng) -> X``.
    """
    if not 1.0 <= q < math.inf:
        raise ValueError("q must lie in [1, inf)")
    if N < 1:
        raise ValueError("N must be positive")
    batches = max(1, min(int(batches), int(N)))
    sizes = [N // batches + (1 if b < N % batches else 0) for b in range(batches)]
    children = np.random.SeedSequence(seed).spawn(batches)
    means = []
    for size, child in zip(sizes, children):
        X = _draw(sampler, size, child)
        acc = 0.0
        for start in range(0, size, chunk):
            blk = X[start : start + chunk]
            diff = np.asarray(f(blk)) - (0.0 if g is None else np.asarray(g(blk)))
            acc += float(np.sum(np.abs(diff) ** q))
        means.append(acc / size)
    means = np.asarray(means)
    weights = np.asarray(sizes, dtype=float) / N
    M = float(np.dot(weights, means))
    est = M ** (1.0 / q)
    if batches > 1 and M > 0.0:
        se_mean = float(np.std(means, ddof=1)) / math.sqrt(batches)
        se = se_mean * M ** (1.0 / q - 1.0) / q
    else:
        se = 0.0
    return MonteCarloEstimate(est, se, tuple(float(b) ** (1.0 / q) for b in means), int(N))


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of ``log(err / log(n)^kappa) = log C + rho log n``."""

    rho: float
    log_constant: float
    residual: float
    kappa: float

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return np.exp(self.log_constant) * n**self.rho * np.log(n) ** self.kappa


def rate_fit(points, kappa: float = 0.0) -> RateFit:
    """Fit ``error ~ C n^rho (log n)^kappa`` with ``kappa`` fixed.

    Parameters
    ----------
    points : sequence of (n, error)
        At least three points with ``n > 1`` strictly increasing and
        positive errors.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] != 2:
        raise ValueError("rate_fit needs at least three (n, error) points")
    n, err = arr[:, 0], arr[:, 1]
    if np.any(np.diff(n) <= 0):
        raise ValueError("n must be strictly increasing")
    if np.any(err <= 0) or (kappa != 0.0 and np.any(n <= 1)):
        raise ValueError("errors must be positive and n > 1 when kappa != 0")
    ln = np.log(n)
    target = np.log(err) - (kappa * np.log(ln) if kappa != 0.0 else 0.0)
    X = np.column_stack([ln, np.ones_like(ln)])
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = float(np.linalg.norm(X @ coef - target))
    return RateFit(float(coef[0]), float(coef[1]), resid, float(kappa))


def envelope_best_n_term(gt: GroundTruth, radius: float, ns, p: float = 2.0, cap: int = SUPERSET_CAP):
    """Best n-term errors of the decay envelope ``a_k`` over a large cross.

    Terms outside the cross ``{prod (1+|k_i|) <= radius}`` are omitted, so
    the values are lower estimates that tighten as ``radius`` grows.
    """
    S = hyperbolic_cross(radius, gt.dim, signed=gt.signed, cap=cap)
    return best_n_term_series(gt.envelope(S.indices), ns, p)
