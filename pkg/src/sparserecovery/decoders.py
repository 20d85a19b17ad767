"""Sparse decoders: restarted PDHGM for the square-root Lasso, OMP and CoSaMP.

All decoders accept any operator exposing ``shape``, ``dtype``, ``apply``,
``apply_adjoint`` and ``columns`` (see :mod:`sparserecovery.operator`).
OMP and CoSaMP additionally accept a precomputed Gram matrix, which turns
their per-step cost from ``O(m |J|)`` into ``O(|J| k)``.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, DivergenceError, RankError
from .least_squares import CholState, chol_insert, chol_solve, lsqr_solve
from .operator import CompressedSystem, DenseOperator, SamplingOperator, compress, spectral_norm

STEP_CAP = 20000


# ---------------------------------------------------------------- configs


@dataclass
class RLassoConfig:
    """Parameters of the restarted PDHGM for the square-root Lasso.

    ``lam`` wins over ``lam_factor`` (``lam = lam_factor * sqrt(m)``);
    ``alpha`` wins over ``alpha_factor`` (``alpha = alpha_factor * ||A||``).
    """

    lam: Optional[float] = None
    lam_factor: float = 1.0
    restarts: int = 11
    alpha: Optional[float] = None
    alpha_factor: float = 1.0
    beta: float = 2.0
    max_inner: int = 1_000_000
    early_stop: bool = True
    norm_iters: int = 500
    norm_tol: float = 1e-10

    kind = "rlasso"

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.lam_factor <= 0 or self.alpha_factor <= 0:
            raise ValueError("multipliers must be positive")
        if self.restarts < 1:
            raise ValueError("at least one restart is required")
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_inner < 1:
            raise ValueError("inner-iteration cap must be positive")

    @classmethod
    def preset(cls, name: str, **overrides) -> "RLassoConfig":
        """``fourier-paper`` (beta 2, alpha = ||A||) or ``chebyshev-paper``
        (beta 3, alpha = 0.3 ||A||), both with lambda = sqrt(m) and 11 restarts."""
        presets = {
            "fourier-paper": dict(beta=2.0, alpha_factor=1.0),
            "chebyshev-paper": dict(beta=3.0, alpha_factor=0.3),
        }
        if name not in presets:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
        params = dict(lam_factor=1.0, restarts=11, **presets[name])
        params.update(overrides)
        return cls(**params)

    def resolve_lambda(self, m: int) -> float:
        return float(self.lam) if self.lam is not None else self.lam_factor * math.sqrt(m)


@dataclass
class OMPConfig:
    """``steps`` defaults to ``min(|J|, m, 20000)``."""

    steps: Optional[int] = None

    kind = "omp"

    def __post_init__(self):
        if self.steps is not None and self.steps < 1:
            raise ValueError("OMP needs at least one step")

    def resolve_steps(self, m: int, N: int) -> int:
        return min(N, m, STEP_CAP) if self.steps is None else int(self.steps)


@dataclass
class CoSaMPConfig:
    """``sparsity`` defaults to ``min(m // 4, |J|, 20000)``."""

    sparsity: Optional[int] = None
    iterations: int = 20
    lsq_tol: float = 1e-8
    lsq_iters: int = 200

    kind = "cosamp"

    def __post_init__(self):
        if self.sparsity is not None and self.sparsity < 1:
            raise ValueError("CoSaMP sparsity must be at least 1")
        if self.iterations < 1:
            raise ValueError("CoSaMP needs at least one iteration")
        if self.lsq_tol <= 0 or self.lsq_iters < 1:
            raise ValueError("invalid inner least-squares settings")

    def resolve_sparsity(self, m: int, N: int) -> int:
        if self.sparsity is not None:
            return int(self.sparsity)
        return max(1, min(m // 4, N, STEP_CAP))


@dataclass
class DecoderResult:
    """Coefficients on ``V_J`` plus diagnostics.

    Attributes
    ----------
    coefficients : ndarray of shape (|J|,)
    support : ndarray of int
        Sorted ordinals of the non-zero coefficients.
    diagnostics : list of dict
        One record per restart (rLasso) or step/iteration (OMP, CoSaMP).
    wall_time : float
    iterations : int
        Total inner iterations (rLasso), steps (OMP) or outer iterations (CoSaMP).
    flags : dict
        Non-fatal conditions such as an exhausted budget.
    decoder : str
    """

    coefficients: np.ndarray
    support: np.ndarray
    diagnostics: list = field(default_factory=list)
    wall_time: float = 0.0
    iterations: int = 0
    flags: dict = field(default_factory=dict)
    decoder: str = ""

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.coefficients))

    def write_diagnostics(self, path) -> None:
        """Append the diagnostics as JSON lines."""
        with open(path, "a", encoding="utf-8") as fh:
            for rec in self.diagnostics:
                fh.write(json.dumps({"decoder": self.decoder, **rec}) + "\n")


def _support(z: np.ndarray) -> np.ndarray:
    return np.flatnonzero(z)


# ---------------------------------------------------------------- rLasso


def soft_shrink(x, t: float):
    """Phase-preserving soft thresholding ``sign(x) max(|x| - t, 0)``."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x)
    a = np.abs(x)
    keep = a > t
    scale = np.where(keep, 1.0 - t / np.where(keep, a, 1.0), 0.0)
    out = x * scale
    return out if out.ndim else out[()]


def dual_project(q):
    """Projection onto the closed unit ball of l2: ``q / max(1, ||q||)``."""
    q = np.asarray(q)
    return q / max(1.0, float(np.linalg.norm(q)))


def rlasso_objective(A, y, z, lam: float) -> float:
    """``||A z - y|| + ||z||_1 / lam``."""
    return float(np.linalg.norm(A.apply(z) - y) + np.abs(z).sum() / lam)


class PdhgmOutput(NamedTuple):
    z: np.ndarray
    q: np.ndarray
    iterations: int
    gap: float
    objective: float


def _gap(Az_avg, AHq_avg, z_avg, q_avg, y, lam):
    primal = float(np.linalg.norm(Az_avg - y) + np.abs(z_avg).sum() / lam)
    qn = float(np.linalg.norm(q_avg))
    an = float(np.abs(AHq_avg).max()) if AHq_avg.size else 0.0
    s = 1.0
    if qn > 1.0:
        s = min(s, 1.0 / qn)
    if an * lam > 1.0:
        s = min(s, 1.0 / (lam * an))
    dual = -s * float(np.vdot(q_avg, y).real)
    return primal - dual, primal


def pdhgm(A, y, lam, tau, sigma, K, z0=None, q0=None, gap_tol=None, norm=None) -> PdhgmOutput:
    """Primal-dual hybrid gradient iterations for the square-root Lasso.

    Runs ``K`` steps of

    * ``z+ = S_{tau/lam}(z - tau A^H q)``
    * ``q~ = q + sigma A(2 z+ - z) - sigma y``
    * ``q+ = q~ / max(1, ||q~||)``

    and returns the ergodic averages of ``z`` and ``q``. When ``gap_tol`` is
    given, the loop stops as soon as the primal-dual gap of the averages
    drops below it.

    Raises
    ------
    DivergenceError
        On a non-finite iterate.
    """
    m, N = A.shape
    y = np.asarray(y)
    if y.shape != (m,):
        raise DimensionError("y must have length m")
    if K < 1:
        raise ValueError("K must be at least 1")
    if norm is not None and tau * sigma * norm**2 > 1.0 + 1e-9:
        warnings.warn("step sizes violate tau * sigma <= 1 / ||A||^2", RuntimeWarning)
    dtype = np.result_type(A.dtype, y.dtype, float)
    z = np.zeros(N, dtype) if z0 is None else np.asarray(z0, dtype=dtype).copy()
    q = np.zeros(m, dtype) if q0 is None else np.asarray(q0, dtype=dtype).copy()
    Az = A.apply(z)
    AHq = A.apply_adjoint(q)
    z_avg, q_avg = z.copy(), q.copy()
    Az_avg, AHq_avg = Az.copy(), AHq.copy()
    thresh = tau / lam
    gap = math.inf
    primal = math.nan
    done = K
    for k in range(K):
        z_new = soft_shrink(z - tau * AHq, thresh)
        Az_new = A.apply(z_new)
        q = dual_project(q + sigma * (2.0 * Az_new - Az) - sigma * y)
        AHq = A.apply_adjoint(q)
        z, Az = z_new, Az_new
        w = 1.0 / (k + 1)
        z_avg += w * (z - z_avg)
        q_avg += w * (q - q_avg)
        Az_avg += w * (Az - Az_avg)
        AHq_avg += w * (AHq - AHq_avg)
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(q))):
            raise DivergenceError(f"non-finite PDHGM iterate at iteration {k + 1}", iteration=k + 1)
        if gap_tol is not None:
            gap, primal = _gap(Az_avg, AHq_avg, z_avg, q_avg, y, lam)
            if gap < gap_tol:
                done = k + 1
                break
    if gap_tol is None:
        gap, primal = _gap(Az_avg, AHq_avg, z_avg, q_avg, y, lam)
    return PdhgmOutput(z_avg, q_avg, done, gap, primal)


def restarted_pdhgm(A, y, config: RLassoConfig = None, m=None, norm=None, z0=None) -> DecoderResult:
    """Restarted PDHGM driven by the sharpness schedule.

    Parameters
    ----------
    A : operator
    y : ndarray
    config : RLassoConfig
    m : int, optional
        Sample count for the ``lambda = c sqrt(m)`` rule; defaults to the
        row count of ``A`` (pass the original count for compressed systems).
    norm : float, optional
        ``||A||_2``; estimated by power iteration when absent.
    z0 : ndarray, optional
        Starting point (zero by default).
    """
    config = config or RLassoConfig()
    start = time.perf_counter()
    rows, N = A.shape
    y = np.asarray(y)
    lam = config.resolve_lambda(rows if m is None else m)
    if norm is None:
        norm = spectral_norm(A, max_iters=config.norm_iters, tol=config.norm_tol).value
    dtype = np.result_type(A.dtype, y.dtype, float)
    z = np.zeros(N, dtype) if z0 is None else np.asarray(z0, dtype=dtype).copy()
    q = np.zeros(rows, dtype)
    if norm == 0.0 or not np.any(y):
        # z = 0 minimizes the objective when y = 0 or A = 0
        obj = float(np.linalg.norm(y))
        diag = [dict(restart=k + 1, objective=obj, best=obj, iterations=0, gap=0.0, epsilon=0.0)
                for k in range(config.restarts)]
        zero = np.zeros(N, dtype)
        return DecoderResult(zero, _support(zero), diag, time.perf_counter() - start, 0,
                             {"budget_exhausted": False, "lambda": lam, "norm": norm}, "rlasso")
    alpha = config.alpha if config.alpha is not None else config.alpha_factor * norm
    tau = sigma = 1.0 / norm
    eps = rlasso_objective(A, y, z, lam)
    best_z, best_obj = z.copy(), eps
    diagnostics = []
    total = 0
    exhausted = False
    for k in range(config.restarts):
        delta = (2.0 * eps / alpha) ** (1.0 / config.beta)
        eps = eps / math.e
        budget = math.ceil(2.0 * delta * norm / eps)
        K = min(budget, config.max_inner)
        out = pdhgm(A, y, lam, tau * delta, sigma / delta, K, z, q,
                    gap_tol=eps if config.early_stop else None)
        z, q = out.z, out.q
        total += out.iterations
        if out.iterations == K and K < budget and out.gap >= eps:
            exhausted = True
        obj = out.objective
        if obj < best_obj:
            best_obj, best_z = obj, z.copy()
        diagnostics.append(dict(restart=k + 1, objective=obj, best=best_obj, iterations=out.iterations,
                                gap=out.gap, epsilon=eps, delta=delta))
    coef = best_z
    return DecoderResult(coef, _support(coef), diagnostics, time.perf_counter() - start, total,
                         {"budget_exhausted": exhausted, "lambda": lam, "norm": norm, "alpha": alpha},
                         "rlasso")


# ---------------------------------------------------------------- OMP


def _masked_argmax(c: np.ndarray, selected: np.ndarray) -> int:
    a = np.abs(c)
    a[selected] = -1.0
    return int(np.argmax(a))


def omp(A, y, K=None, gram=None, atb=None, y_norm=None, record_path: bool = False) -> DecoderResult:
    """Orthogonal matching pursuit with an incrementally updated Cholesky factor.

    Parameters
    ----------
    A : operator
    y : ndarray of shape (m,)
    K : int, optional
        Number of steps, default ``min(|J|, m, 20000)``.
    gram, atb : ndarray, optional
        ``A^H A`` and ``A^H y``. When given, correlations are updated from the
        Gram matrix instead of a full adjoint per step.
    y_norm : float, optional
        ``||y||`` for the Gram path (defaults to ``||y||`` of the given ``y``).
    record_path : bool
        Store the full coefficient vector after every step in the diagnostics.

    Raises
    ------
    RankError
        If a selected column makes the support Gram matrix singular.
    """
    start = time.perf_counter()
    m, N = A.shape
    y = np.asarray(y)
    if y.shape != (m,):
        raise DimensionError("y must have length m")
    K = OMPConfig(K).resolve_steps(m, N)
    if K > min(m, N) and gram is None:
        raise ValueError(f"OMP steps {K} exceed min(m, |J|) = {min(m, N)}")
    if K > N:
        raise ValueError(f"OMP steps {K} exceed |J| = {N}")
    dtype = np.result_type(A.dtype, y.dtype, float)
    selected = np.zeros(N, dtype=bool)
    diagnostics = []
    if gram is not None:
        atb = A.apply_adjoint(y) if atb is None else np.asarray(atb)
        ynorm2 = float(np.vdot(y, y).real) if y_norm is None else float(y_norm) ** 2
        state, coef_S = _omp_gram(gram, atb, ynorm2, K, selected, diagnostics, dtype, record_path, N)
    else:
        state, coef_S = _omp_direct(A, y, K, selected, diagnostics, dtype, record_path, N)
    z = np.zeros(N, dtype)
    z[state.support] = coef_S
    return DecoderResult(z, np.array(sorted(state.support), dtype=np.int64), diagnostics,
                         time.perf_counter() - start, K, {}, "omp")


def _omp_direct(A, y, K, selected, diagnostics, dtype, record_path, N):
    m = A.shape[0]
    state = CholState.with_capacity(K, dtype)
    B = np.zeros((m, K), dtype=dtype, order="F")
    r = y.astype(dtype)
    coef = np.zeros(0, dtype)
    for k in range(K):
        c = A.apply_adjoint(r)
        j = _masked_argmax(c, selected)
        b = A.columns([j])[:, 0]
        g = B[:, :k].conj().T @ b
        chol_insert(state, j, g, float(np.vdot(b, b).real), np.vdot(b, y))
        selected[j] = True
        B[:, k] = b
        coef = chol_solve(state)
        r = y - B[:, : k + 1] @ coef
        rec = dict(step=k + 1, index=j, correlation=float(abs(c[j])), residual=float(np.linalg.norm(r)))
        if record_path:
            full = np.zeros(N, dtype)
            full[state.support] = coef
            rec["coefficients"] = full
        diagnostics.append(rec)
    return state, coef


def _omp_gram(G, atb, ynorm2, K, selected, diagnostics, dtype, record_path, N):
    # W = G[:, S] L^{-H}; then A^H A z_S = W u with L u = (A^H y)_S, so the
    # correlation drops by one rank-one term per step.
    state = CholState.with_capacity(K, dtype)
    W = np.zeros((N, K), dtype=dtype, order="F")
    u = np.zeros(K, dtype=dtype)
    c = atb.astype(dtype).copy()
    unorm2 = 0.0
    for k in range(K):
        j = _masked_argmax(c, selected)
        corr = float(abs(c[j]))
        row = np.conj(W[j, :k])
        gcol = np.conj(G[j, :]) if np.iscomplexobj(G) else G[j, :]
        chol_insert(state, j, gcol[state.support], float(np.real(G[j, j])), atb[j], factor_row=row)
        selected[j] = True
        d = state.factor[k, k].real
        w = (gcol - W[:, :k] @ row) / d
        W[:, k] = w
        u[k] = (atb[j] - np.vdot(row, u[:k])) / d
        c -= w * u[k]
        unorm2 += abs(u[k]) ** 2
        rec = dict(step=k + 1, index=j, correlation=corr, residual=math.sqrt(max(ynorm2 - unorm2, 0.0)))
        if record_path:
            coef = sla.solve_triangular(state.L, u[: k + 1], lower=True, trans="C")
            full = np.zeros(N, dtype)
            full[state.support] = coef
            rec["coefficients"] = full
        diagnostics.append(rec)
    coef = sla.solve_triangular(state.L, u[:K], lower=True, trans="C") if K else np.zeros(0, dtype)
    return state, coef


# ---------------------------------------------------------------- CoSaMP


def _top(values: np.ndarray, count: int) -> np.ndarray:
    """Ordinals of the ``count`` largest magnitudes, ties to the smaller ordinal."""
    order = np.argsort(-np.abs(values), kind="stable")
    return order[:count]


def cosamp(A, y, n, K=20, lsq_tol=1e-8, lsq_iters=200, gram=None, atb=None,
           record_path: bool = False) -> DecoderResult:
    """Compressive sampling matching pursuit.

    Each iteration merges the current support with the ``2n`` largest
    residual correlations, solves least squares on the merged set by
    warm-started LSQR and keeps the ``n`` largest entries.
    """
    start = time.perf_counter()
    m, N = A.shape
    y = np.asarray(y)
    if y.shape != (m,):
        raise DimensionError("y must have length m")
    if n < 1 or K < 1:
        raise ValueError("need n >= 1 and K >= 1")
    if 3 * n > m and gram is None:
        warnings.warn(f"CoSaMP with 3n = {3 * n} > m = {m} may be ill-posed", RuntimeWarning)
    dtype = np.result_type(A.dtype, y.dtype, float)
    if gram is not None and atb is None:
        atb = A.apply_adjoint(y)
    z = np.zeros(N, dtype)
    S = np.zeros(0, dtype=np.int64)
    diagnostics = []
    unconverged = 0
    for k in range(K):
        if gram is not None:
            c = atb - gram[:, S] @ z[S]
        else:
            c = A.apply_adjoint(y - A.apply(z))
        T = np.union1d(S, _top(c, min(2 * n, N)))
        B = A.columns(T)
        sol = lsqr_solve(lambda v: B @ v, lambda v: B.conj().T @ v, y, x0=z[T].astype(dtype),
                         tol=lsq_tol, max_iters=lsq_iters)
        if not sol.converged:
            unconverged += 1
        keep = np.sort(_top(sol.x, min(n, T.size)))
        S = T[keep]
        z = np.zeros(N, dtype)
        z[S] = sol.x[keep]
        res = float(np.linalg.norm(y - B[:, keep] @ sol.x[keep]))
        rec = dict(iteration=k + 1, candidates=int(T.size), residual=res, lsq_iterations=sol.iterations,
                   lsq_converged=sol.converged)
        if record_path:
            rec["coefficients"] = z.copy()
            rec["candidate_set"] = T.copy()
        diagnostics.append(rec)
    flags = {"lsq_unconverged": unconverged}
    if unconverged:
        warnings.warn(f"inner LSQR did not converge in {unconverged} CoSaMP iterations", RuntimeWarning)
    return DecoderResult(z, _support(z), diagnostics, time.perf_counter() - start, K, flags, "cosamp")


# ---------------------------------------------------------------- dispatch


class ExpansionFunction:
    """``x -> sum_j c_j b_j(x)`` in the original (non-preconditioned) basis."""

    def __init__(self, dictionary, index_set, coefficients, chunk: int = 4096):
        self.dictionary = dictionary
        self.index_set = index_set
        self.coefficients = np.asarray(coefficients)
        self.chunk = chunk
        nz = np.flatnonzero(self.coefficients)
        self._K = index_set.indices[nz]
        self._c = self.coefficients[nz]

    def __call__(self, X) -> np.ndarray:
        X = self.dictionary.check_points(X)
        dtype = np.complex128 if self.dictionary.is_complex else np.float64
        out = np.zeros(X.shape[0], dtype=np.result_type(dtype, self._c.dtype))
        if self._c.size == 0:
            return out
        for i in range(0, X.shape[0], self.chunk):
            blk = self.dictionary.evaluate(X[i : i + self.chunk], self._K, dtype=dtype, check=False)
            out[i : i + self.chunk] = blk @ self._c
        return out


def should_compress(m: int, N: int, max_columns: int = 8192) -> bool:
    """Compression pays off for tall systems whose Gram matrix fits in memory."""
    return m >= N and N <= max_columns and m * N > 2**22


def decode(dictionary, index_set, samples, values, config, compress_system="auto",
           precision: str = "f64", operator=None):
    """Recover coefficients on ``V_J`` from raw samples ``f(X)``.

    Parameters
    ----------
    dictionary : Dictionary
    index_set : IndexSet
    samples : SamplePoints or ndarray
    values : ndarray of shape (m,)
        Raw function values; multiplied by the precondition weights for the
        preconditioned Legendre system.
    config : RLassoConfig, OMPConfig or CoSaMPConfig
    compress_system : {"auto", True, False}
        Replace a tall system by its exact square surrogate.
    precision : {"f64", "f32"}
    operator : SamplingOperator, optional
        Reuse an existing operator for these samples.

    Returns
    -------
    (DecoderResult, ExpansionFunction)
    """
    A = operator or SamplingOperator(dictionary, index_set, samples, precision=precision)
    m, N = A.shape
    values = np.asarray(values)
    if values.shape != (m,):
        raise DimensionError("values must have one entry per sample")
    y = A.weights * values / math.sqrt(m)
    use = should_compress(m, N) if compress_system == "auto" else bool(compress_system)
    system = None
    if use:
        try:
            system = compress(A, y)
        except RankError:
            if compress_system is True:
                raise
            system = None
    result = run_decoder(A, y, config, system=system)
    result.flags["compressed"] = system is not None
    return result, ExpansionFunction(dictionary, index_set, result.coefficients)


def run_decoder(A, y, config, system: Optional[CompressedSystem] = None) -> DecoderResult:
    """Dispatch a configured decoder on ``(A, y)`` or on its compressed form."""
    m, N = A.shape
    op, rhs = (system.operator, system.y) if system is not None else (A, y)
    if isinstance(config, RLassoConfig):
        return restarted_pdhgm(op, rhs, config, m=m)
    if isinstance(config, OMPConfig):
        K = config.resolve_steps(m, N)
        if system is not None:
            return omp(op, rhs, K, gram=system.gram, atb=system.atb, y_norm=system.y_norm)
        return omp(op, rhs, K)
    if isinstance(config, CoSaMPConfig):
        n = config.resolve_sparsity(m, N)
        if system is not None:
            return cosamp(op, rhs, n, config.iterations, config.lsq_tol, config.lsq_iters,
                          gram=system.gram, atb=system.atb)
        return cosamp(op, rhs, n, config.iterations, config.lsq_tol, config.lsq_iters)
    raise TypeError(f"unsupported decoder config {type(config).__name__}")
