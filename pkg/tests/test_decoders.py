import math
import warnings

import numpy as np
import pytest

from reference import cvxpy_rlasso, naive_cosamp, naive_omp
from sparserecovery.decoders import (
    CoSaMPConfig,
    DecoderResult,
    OMPConfig,
    RLassoConfig,
    cosamp,
    decode,
    dual_project,
    omp,
    pdhgm,
    restarted_pdhgm,
    rlasso_objective,
    run_decoder,
    soft_shrink,
)
from sparserecovery.dictionaries import chebyshev, fourier
from sparserecovery.errors import DivergenceError
from sparserecovery.index_sets import hyperbolic_cross
from sparserecovery.operator import DenseOperator, SamplingOperator, compress, spectral_norm


def desk_instance(seed, m=120, N=201, s=12, complex_=True):
    rng = np.random.default_rng(seed)
    if complex_:
        x = rng.random(m)
        k = np.arange(N) - N // 2
        M = np.exp(2j * np.pi * np.outer(x, k)) / np.sqrt(m)
    else:
        M = rng.standard_normal((m, N)) / np.sqrt(m)
    z = np.zeros(N, M.dtype)
    z[rng.choice(N, s, replace=False)] = rng.standard_normal(s)
    y = M @ z + 0.05 * rng.standard_normal(m) / np.sqrt(m)
    return M, y


def test_soft_shrink():
    assert soft_shrink(3.0, 1.0) == 2.0
    assert soft_shrink(-0.5, 1.0) == 0.0
    assert soft_shrink(3 + 4j, 1.0) == pytest.approx((3 + 4j) * 0.8)
    with pytest.raises(ValueError):
        soft_shrink(1.0, -1.0)


def test_dual_project():
    assert np.allclose(dual_project(np.array([3.0, 4.0])), [0.6, 0.8])
    assert np.allclose(dual_project(np.array([0.3, 0.4])), [0.3, 0.4])


def test_presets():
    f = RLassoConfig.preset("fourier-paper")
    c = RLassoConfig.preset("chebyshev-paper")
    assert (f.beta, f.alpha_factor, f.restarts) == (2.0, 1.0, 11)
    assert (c.beta, c.alpha_factor) == (3.0, 0.3)
    assert f.resolve_lambda(400) == 20.0
    assert RLassoConfig(lam_factor=2).resolve_lambda(100) == 20.0
    with pytest.raises(ValueError):
        RLassoConfig.preset("nope")
    with pytest.raises(ValueError):
        RLassoConfig(restarts=0)


def test_config_defaults():
    assert OMPConfig().resolve_steps(50_000, 4563) == 4563
    assert OMPConfig().resolve_steps(10**6, 10**6) == 20000
    assert CoSaMPConfig().resolve_sparsity(400, 1000) == 100
    with pytest.raises(ValueError):
        CoSaMPConfig(iterations=0)


def test_pdhgm_gap_certificate():
    M, y = desk_instance(0)
    A = DenseOperator(M)
    lam = math.sqrt(M.shape[0])
    norm = spectral_norm(A).value
    out = pdhgm(A, y, lam, 1 / norm, 1 / norm, 3000)
    best, _ = cvxpy_rlasso(M, y, lam)
    assert out.gap >= -1e-9
    assert out.objective >= best - 1e-9
    assert out.objective - out.gap <= best + 1e-9


def test_pdhgm_divergence_detected():
    A = DenseOperator(np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(DivergenceError), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pdhgm(A, np.array([np.inf, 1.0]), 1.0, 0.5, 0.5, 5)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("complex_", [True, False])
def test_restarted_pdhgm_matches_dense_solver(seed, complex_):
    M, y = desk_instance(seed, complex_=complex_)
    A = DenseOperator(M)
    res = restarted_pdhgm(A, y, RLassoConfig.preset("fourier-paper"))
    lam = res.flags["lambda"]
    best, _ = cvxpy_rlasso(M, y, lam)
    obj = rlasso_objective(A, y, res.coefficients, lam)
    assert abs(obj - best) <= 1e-4 * best
    assert len(res.diagnostics) == 11
    bests = [d["best"] for d in res.diagnostics]
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))


def test_restarted_pdhgm_zero_data():
    A = DenseOperator(np.eye(3))
    res = restarted_pdhgm(A, np.zeros(3))
    assert np.all(res.coefficients == 0) and res.nnz == 0


def test_restarted_pdhgm_budget_flag():
    M, y = desk_instance(3)
    res = restarted_pdhgm(DenseOperator(M), y, RLassoConfig(max_inner=2, restarts=3))
    assert res.flags["budget_exhausted"]


@pytest.mark.parametrize("seed", range(4))
def test_omp_matches_naive(seed):
    M, y = desk_instance(seed)
    K = 30
    S_ref, path_ref = naive_omp(M, y, K)
    res = omp(DenseOperator(M), y, K, record_path=True)
    assert [d["index"] for d in res.diagnostics] == S_ref
    for rec, ref in zip(res.diagnostics, path_ref):
        assert np.abs(rec["coefficients"] - ref).max() < 1e-8
    G = M.conj().T @ M
    gres = omp(DenseOperator(M), y, K, gram=G, atb=M.conj().T @ y, record_path=True)
    assert [d["index"] for d in gres.diagnostics] == S_ref
    for rec, ref in zip(gres.diagnostics, path_ref):
        assert np.abs(rec["coefficients"] - ref).max() < 1e-8


def test_omp_residual_trace():
    M, y = desk_instance(5, complex_=False)
    res = omp(DenseOperator(M), y, 20)
    r = y - M @ res.coefficients
    assert res.diagnostics[-1]["residual"] == pytest.approx(np.linalg.norm(r), rel=1e-10)
    G = M.T @ M
    gres = omp(DenseOperator(M), y, 20, gram=G, atb=M.T @ y)
    assert gres.diagnostics[-1]["residual"] == pytest.approx(np.linalg.norm(r), rel=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_cosamp_matches_naive(seed):
    M, y = desk_instance(seed)
    n, K = 12, 10
    ref = naive_cosamp(M, y, n, K)
    res = cosamp(DenseOperator(M), y, n, K, lsq_tol=1e-14, lsq_iters=1000, record_path=True)
    for rec, zr in zip(res.diagnostics, ref):
        assert np.abs(rec["coefficients"] - zr).max() < 1e-8
    G = M.conj().T @ M
    gres = cosamp(DenseOperator(M), y, n, K, lsq_tol=1e-14, lsq_iters=1000, gram=G, record_path=True)
    for rec, zr in zip(gres.diagnostics, ref):
        assert np.abs(rec["coefficients"] - zr).max() < 1e-8


def test_cosamp_warns_on_unconverged_lsqr():
    M, y = desk_instance(0)
    with pytest.warns(RuntimeWarning):
        res = cosamp(DenseOperator(M), y, 12, 3, lsq_tol=1e-14, lsq_iters=1)
    assert res.flags["lsq_unconverged"] > 0


def test_planted_recovery(planted):
    A, y, z = planted(0)
    for cfg in (RLassoConfig.preset("fourier-paper"), OMPConfig(10), CoSaMPConfig(10, 20)):
        res = run_decoder(A, y, cfg)
        assert np.linalg.norm(res.coefficients - z) < 1e-4, cfg


def test_decode_compressed_matches_plain():
    D = chebyshev(2)
    J = hyperbolic_cross(8, 2, signed=False)
    X = D.draw_samples(600, seed=1)
    f = lambda P: np.exp(P[:, 0]) * np.cos(P[:, 1])
    vals = f(X.points)
    for cfg in (OMPConfig(12), CoSaMPConfig(6, lsq_tol=1e-13, lsq_iters=500), RLassoConfig.preset("chebyshev-paper")):
        plain, _ = decode(D, J, X, vals, cfg, compress_system=False)
        comp, g = decode(D, J, X, vals, cfg, compress_system=True)
        assert comp.flags["compressed"] and not plain.flags["compressed"]
        tol = 1e-7 if cfg.kind != "rlasso" else 1e-4
        assert np.abs(plain.coefficients - comp.coefficients).max() < tol
        assert np.abs(g(X.points[:50]) - f(X.points[:50])).max() < 0.2


def test_expansion_function_roundtrip():
    D = fourier(2)
    J = hyperbolic_cross(4, 2)
    c = np.zeros(len(J), complex)
    c[J.position((1, 0))] = 1.0
    X = D.draw_samples(300, seed=0)
    res, g = decode(D, J, X, np.exp(2j * np.pi * X.points[:, 0]), OMPConfig(1))
    assert np.allclose(res.coefficients, c, atol=1e-12)
    assert np.allclose(g([[0.25, 0.1]]), [1j])


def test_diagnostics_jsonl(tmp_path):
    M, y = desk_instance(1)
    res = omp(DenseOperator(M), y, 3)
    res.write_diagnostics(tmp_path / "d.jsonl")
    lines = (tmp_path / "d.jsonl").read_text().splitlines()
    assert len(lines) == 3 and '"decoder": "omp"' in lines[0]
    assert isinstance(res, DecoderResult)
