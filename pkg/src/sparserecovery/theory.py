"""Computable forms of the recovery theory: RIP constants by enumeration,
NSP constants and their empirical check, the lambda rule, sample-count
bounds and the subset family behind the instance-optimality lower bound.

All logarithms are natural.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import BudgetError, DomainError

RIP_BUDGET = math.comb(24, 4)
RIP_BATCH = 65536
SUBSET_DRAWS = 10**6


def _gram(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("A must be a dense matrix")
    return A.conj().T @ A


def _deviation(blocks: np.ndarray) -> np.ndarray:
    """``||G_S - I||_2`` for a stack of Hermitian blocks."""
    ev = np.linalg.eigvalsh(blocks)
    return np.maximum(ev[:, -1] - 1.0, 1.0 - ev[:, 0])


def _blocks(G: np.ndarray, supports: np.ndarray) -> np.ndarray:
    return G[supports[:, :, None], supports[:, None, :]]


def _greedy_support(G: np.ndarray, n: int) -> np.ndarray:
    """A support with large deviation, grown from the most coherent pair."""
    N = G.shape[0]
    off = np.abs(G - np.diag(np.diag(G)))
    diag_dev = np.abs(np.diag(G).real - 1.0)
    if n == 1 or N == 1:
        return np.array([int(np.argmax(diag_dev))])
    i, j = np.unravel_index(int(np.argmax(off)), off.shape)
    S = [int(min(i, j)), int(max(i, j))]
    while len(S) < n:
        rest = np.setdiff1d(np.arange(N), S)
        cand = np.array([sorted(S + [int(c)]) for c in rest])
        S = list(cand[int(np.argmax(_deviation(_blocks(G, cand))))])
    return np.array(sorted(S))


def rip_constant_bruteforce(A, n: int, budget: int = RIP_BUDGET, stop_above: Optional[float] = None,
                            batch: int = RIP_BATCH) -> float:
    """Restricted isometry constant ``delta_n`` by enumerating all supports.

    ``delta_n = max_{|S| = n} ||A_S^H A_S - I||_2``, evaluated with batched
    symmetric eigenvalue solves in lexicographic support order.

    Parameters
    ----------
    A : array_like of shape (m, N)
    n : int
        Sparsity order, ``1 <= n <= N``.
    budget : int
        Largest admissible number of supports ``C(N, n)``.
    stop_above : float, optional
        Return as soon as a support with deviation ``>= stop_above`` is
        found. The returned value is then a lower bound that already
        exceeds ``stop_above``; a return value below it is exact.

    Raises
    ------
    BudgetError
        If ``C(N, n)`` exceeds ``budget``.
    """
    G = _gram(A)
    N = G.shape[0]
    if not 1 <= n <= N:
        raise ValueError("n must satisfy 1 <= n <= N")
    total = math.comb(N, n)
    if total > budget:
        raise BudgetError(f"C({N}, {n}) = {total} supports exceed the budget {budget}")
    best = 0.0
    if stop_above is not None:
        best = float(_deviation(_blocks(G, _greedy_support(G, n)[None, :]))[0])
        if best >= stop_above:
            return best
    combos = itertools.combinations(range(N), n)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, batch)), dtype=np.int64)
        if chunk.size == 0:
            break
        dev = _deviation(_blocks(G, chunk.reshape(-1, n)))
        best = max(best, float(dev.max()))
        if stop_above is not None and best >= stop_above:
            break
    return best


@dataclass(frozen=True)
class NSPConstants:
    """Constants of the l2-robust null space property of some order."""

    rho: float
    tau: float
    delta: Optional[float] = None

    def __post_init__(self):
        if not (self.rho >= 0.0 and self.tau >= 0.0):
            raise ValueError("NSP constants must be non-negative")


def nsp_from_rip(delta: float) -> NSPConstants:
    """``rho = delta / (1 - 2 delta)`` and ``tau = sqrt(1 + delta) / (1 - 2 delta)``.

    A matrix with ``delta_{2n} < 1/3`` has the l2-robust NSP of order ``n``
    with these constants.
    """
    if not 0.0 <= delta < 1.0 / 3.0:
        raise DomainError(f"delta must lie in [0, 1/3), got {delta}")
    den = 1.0 - 2.0 * delta
    return NSPConstants(delta / den, math.sqrt(1.0 + delta) / den, float(delta))


@dataclass
class NSPReport:
    """Outcome of :func:`nsp_empirical_check`."""

    trials: int
    checks: int
    violations: int
    worst_ratio: float
    witness: Optional[tuple] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def nsp_empirical_check(A, n: int, constants: NSPConstants, trials: int = 10_000, seed=0,
                        rtol: float = 1e-10) -> NSPReport:
    """Test ``||v_S||_2 <= rho n^{-1/2} ||v_{S^c}||_1 + tau ||A v||_2`` on random data.

    Each trial draws ``v`` (alternately a Gaussian vector and a random
    element of ``ker A`` when the kernel is nontrivial) and checks both a
    random support of size at most ``n`` and the worst support, the ``n``
    largest entries of ``v``.

    ``worst_ratio`` is the largest ``lhs / rhs`` seen.
    """
    A = np.asarray(A)
    m, N = A.shape
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 1 <= n <= N:
        raise ValueError("n must satisfy 1 <= n <= N")
    rng = np.random.default_rng(seed)
    complex_ = np.iscomplexobj(A)
    _, sv, Vh = np.linalg.svd(A)
    rank = int(np.sum(sv > sv[0] * max(m, N) * np.finfo(float).eps)) if sv.size else 0
    kernel = Vh[rank:].conj().T
    rho, tau = constants.rho, constants.tau
    violations, checks, worst, witness = 0, 0, 0.0, None
    for t in range(trials):
        if kernel.shape[1] and t % 2 == 1:
            c = rng.standard_normal(kernel.shape[1])
            if complex_:
                c = c + 1j * rng.standard_normal(kernel.shape[1])
            v = kernel @ c
        else:
            v = rng.standard_normal(N)
            if complex_:
                v = v + 1j * rng.standard_normal(N)
        res = float(np.linalg.norm(A @ v))
        mag = np.abs(v)
        size = int(rng.integers(1, n + 1))
        for S in (rng.choice(N, size=size, replace=False), np.argsort(-mag, kind="stable")[:n]):
            mask = np.zeros(N, dtype=bool)
            mask[S] = True
            lhs = float(np.linalg.norm(mag[mask]))
            rhs = rho / math.sqrt(n) * float(mag[~mask].sum()) + tau * res
            checks += 1
            ratio = lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0)
            if ratio > worst:
                worst = ratio
            if lhs > rhs * (1.0 + rtol) + 1e-14 * float(np.linalg.norm(mag)):
                violations += 1
                if witness is None:
                    witness = (v.copy(), np.sort(np.asarray(S)))
    return NSPReport(trials, checks, violations, worst, witness)


class LambdaRule(NamedTuple):
    value: float
    threshold: float
    clears: bool


def rlasso_lambda(tau: float, rho: float, n: int) -> LambdaRule:
    """``lambda = 3 tau sqrt(n)`` and the sufficient threshold ``(3 + rho)/(1 + rho) tau sqrt(n)``."""
    if not (tau > 0 and n > 0 and 0 <= rho < 1):
        raise DomainError("need tau > 0, n > 0 and 0 <= rho < 1")
    root = math.sqrt(n)
    value = 3.0 * tau * root
    threshold = (3.0 + rho) / (1.0 + rho) * tau * root
    return LambdaRule(value, threshold, value >= threshold)


def sample_complexity_upper(B: float, n: int, J_size: int, gamma: float, alpha: float = 1.0,
                            mode: str = "general", d: Optional[int] = None, D: Optional[int] = None) -> int:
    """Number of samples sufficient for ``delta_{2n} < 1/3`` with probability ``1 - gamma``.

    ``mode="general"``:
    ``ceil(alpha B^2 n (log^2(B^2 n) log|J| + log(log(B^2 n) / gamma)))``.
    ``mode="fourier"`` (grid sampling ``G(D, d)``):
    ``ceil(alpha d n log^2(n + 1) log(D + 1))``.

    ``alpha`` is an unspecified universal constant; the default 1 is a
    placeholder.
    """
    if alpha <= 0 or n <= 0:
        raise DomainError("alpha and n must be positive")
    if mode == "fourier":
        if d is None or D is None or d < 1 or D < 1:
            raise DomainError("fourier mode needs d >= 1 and D >= 1")
        return math.ceil(alpha * d * n * math.log(n + 1) ** 2 * math.log(D + 1))
    if mode != "general":
        raise ValueError(f"unknown mode {mode!r}")
    if not (B > 0 and J_size >= 1 and 0 < gamma < 1):
        raise DomainError("need B > 0, |J| >= 1 and 0 < gamma < 1")
    b2n = B * B * n
    if b2n <= 1:
        raise DomainError("B^2 n must exceed 1")
    lg = math.log(b2n)
    return math.ceil(alpha * b2n * (lg * lg * math.log(J_size) + math.log(lg / gamma)))


class LowerBound(NamedTuple):
    m: int
    degenerate: bool


def io_lower_bound(n: int, N: int, C: float, mode: str = "same-norm") -> LowerBound:
    """Fewest measurements compatible with instance optimality of constant ``C``.

    ``same-norm``: ``ceil(n log(N / 4n) / (4 log(2C + 3)))``;
    ``mixed``: ``ceil(n log(N / 4n) / (4 log(12C + 7)))``.
    ``N <= 4n`` is degenerate and returns ``m = 0`` with the flag set.
    """
    if n < 1 or N < 1 or C <= 0:
        raise DomainError("need n >= 1, N >= 1 and C > 0")
    if mode == "same-norm":
        den = 4.0 * math.log(2.0 * C + 3.0)
    elif mode == "mixed":
        den = 4.0 * math.log(12.0 * C + 7.0)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if N <= 4 * n:
        return LowerBound(0, True)
    return LowerBound(math.ceil(n * math.log(N / (4.0 * n)) / den), False)


@dataclass
class SubsetFamily:
    """n-subsets of ``{0..N-1}`` with pairwise intersections below ``n / 2``."""

    N: int
    n: int
    sets: list
    target: int
    draws: int
    complete: bool

    def verify(self) -> bool:
        """Replay the pairwise-intersection certificate."""
        for a, b in itertools.combinations(self.sets, 2):
            if 2 * len(set(a) & set(b)) >= self.n:
                return False
        return all(len(set(s)) == self.n and all(0 <= i < self.N for i in s) for s in self.sets)


def subset_family(N: int, n: int, seed=0, max_draws: int = SUBSET_DRAWS) -> SubsetFamily:
    """Randomized greedy family of ``n``-subsets with ``|S & T| < n/2``.

    Draws random subsets and keeps those compatible with every kept set
    until ``ceil((N / 4n)^{n/2})`` sets are kept or ``max_draws`` draws are
    spent, in which case ``complete`` is false.
    """
    if n < 1 or 2 * n > N:
        raise DomainError("need 1 <= n and 2n <= N")
    target = max(1, math.ceil((N / (4.0 * n)) ** (n / 2.0)))
    rng = np.random.default_rng(seed)
    kept: list = []
    member = np.zeros((0, N), dtype=np.int32)
    draws = 0
    while len(kept) < target and draws < max_draws:
        draws += 1
        S = np.sort(rng.choice(N, size=n, replace=False))
        if member.shape[0]:
            overlap = member[:, S].sum(axis=1)
            if np.any(2 * overlap >= n):
                continue
        row = np.zeros((1, N), dtype=np.int32)
        row[0, S] = 1
        member = np.vstack([member, row])
        kept.append(tuple(int(i) for i in S))
    return SubsetFamily(N, n, kept, target, draws, len(kept) >= target)
