"""Naive reference decoders: dense correlations and from-scratch normal equations."""

import warnings

import numpy as np


def naive_omp(A, y, K):
    m, N = A.shape
    S, path = [], []
    r = y.copy()
    for _ in range(K):
        c = np.abs(A.conj().T @ r)
        c[S] = -1.0
        S.append(int(np.argmax(c)))
        B = A[:, S]
        x = np.linalg.solve(B.conj().T @ B, B.conj().T @ y)
        r = y - B @ x
        z = np.zeros(N, dtype=np.result_type(A, y))
        z[S] = x
        path.append(z)
    return S, path


def _top(v, count):
    return np.argsort(-np.abs(v), kind="stable")[:count]


def naive_cosamp(A, y, n, K):
    m, N = A.shape
    z = np.zeros(N, dtype=np.result_type(A, y))
    S = np.zeros(0, dtype=np.int64)
    path = []
    for _ in range(K):
        c = A.conj().T @ (y - A @ z)
        T = np.union1d(S, _top(c, min(2 * n, N)))
        B = A[:, T]
        x = np.linalg.solve(B.conj().T @ B, B.conj().T @ y)
        keep = np.sort(_top(x, min(n, T.size)))
        S = T[keep]
        z = np.zeros(N, dtype=z.dtype)
        z[S] = x[keep]
        path.append(z)
    return path


def cvxpy_rlasso(A, y, lam):
    """Optimal value of ``min ||A z - y|| + ||z||_1 / lam`` by an interior-point solver."""
    import cvxpy as cp

    N = A.shape[1]
    z = cp.Variable(N, complex=np.iscomplexobj(A) or np.iscomplexobj(y))
    prob = cp.Problem(cp.Minimize(cp.norm(A @ z - y, 2) + cp.norm1(z) / lam))
    for tol in (1e-10, 1e-9, 1e-8):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.CLARABEL, tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol)
        if prob.status == cp.OPTIMAL:
            return float(prob.value), np.asarray(z.value)
    raise RuntimeError(f"reference solver status {prob.status}")
