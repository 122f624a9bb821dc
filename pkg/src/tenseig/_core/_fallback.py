"""Pure numpy implementation of the solver loops.

Same functions and return conventions as the compiled ``_kernels`` module;
selected automatically when the extension is not built.
"""
import numpy as np

from ..dense_linalg import _householder_complement, solve_general
from ..errors import SingularMatrix

CONVERGED, ITERATION_CAP, STEP_FAILURE = 0, 1, 2
ZERO_NORM = 1e-14


def contract_matrix(t_flat, n, m, x):
    a = np.asarray(t_flat, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float)
    for _ in range(m - 2):
        a = a.reshape(-1, n) @ x
    M = a.reshape(n, n)
    M = np.triu(M) + np.triu(M, 1).T
    v = M @ x
    return M, v, float(x @ v)


def _normalized(w):
    nrm = np.sqrt(w @ w)
    if not nrm > ZERO_NORM:
        return None
    return w / nrm


def _ncm_step(t, n, m, x):
    M, v, mu = contract_matrix(t, n, m, x)
    A = (m - 1) * M - m * np.outer(x, v)
    A[np.diag_indices(n)] -= mu
    try:
        y = solve_general(A, -(v - mu * x))
    except SingularMatrix:
        return None
    return _normalized(x + y)


def _oncm_step(t, n, m, x):
    M, v, mu = contract_matrix(t, n, m, x)
    U = _householder_complement(x)
    H = (m - 1) * M
    H[np.diag_indices(n)] -= mu
    Hp = U.T @ (H @ U)
    Hp = np.triu(Hp) + np.triu(Hp, 1).T
    try:
        z = solve_general(Hp, -(U.T @ (v - mu * x)))
    except SingularMatrix:
        return None
    return _normalized(x + U @ z)


def adaptive_alpha(M, m, tau, direction):
    w = np.linalg.eigvalsh(m * (m - 1) * M)
    if direction >= 0:
        return max(0.0, (tau - w[0]) / m)
    return min(0.0, -(tau + w[-1]) / m)


def _power_step(t, n, m, x, variant, alpha, tau, direction):
    M, v, mu = contract_matrix(t, n, m, x)
    if variant == 2:
        alpha = adaptive_alpha(M, m, tau, direction)
    elif variant == 0:
        alpha = 0.0
    return _normalized(v + alpha * x)


def _run(step, x0, n, delta, kmax, record):
    x = np.array(x0, dtype=float).reshape(-1)
    trace = [x.copy()] if record else None
    for k in range(1, kmax + 1):
        xn = step(x)
        if xn is None:
            return x, k - 1, STEP_FAILURE, (np.array(trace) if record else None)
        d = np.sqrt(np.sum((xn - x) ** 2))
        x = xn
        if record:
            trace.append(x.copy())
        if d < delta:
            return x, k, CONVERGED, (np.array(trace) if record else None)
    return x, kmax, ITERATION_CAP, (np.array(trace) if record else None)


def _newton_stepper(t_flat, n, m, method):
    t = np.asarray(t_flat, dtype=float).reshape(-1)
    if method == 0:
        return lambda x: _ncm_step(t, n, m, x)
    return lambda x: _oncm_step(t, n, m, x)


def newton_run(t_flat, n, m, x0, method, delta, kmax, record=False):
    return _run(_newton_stepper(t_flat, n, m, method), x0, n, delta, kmax, record)


def power_run(t_flat, n, m, x0, variant, alpha, tau, direction, delta, kmax, record=False):
    t = np.asarray(t_flat, dtype=float).reshape(-1)
    step = lambda x: _power_step(t, n, m, x, variant, alpha, tau, direction)  # noqa: E731
    return _run(step, x0, n, delta, kmax, record)


def _batch(run, X0, n):
    X0 = np.asarray(X0, dtype=float).reshape(-1, n)
    X = np.empty_like(X0)
    iters = np.zeros(len(X0), dtype=np.int32)
    status = np.zeros(len(X0), dtype=np.int32)
    for s, x0 in enumerate(X0):
        X[s], iters[s], status[s], _ = run(x0)
    return X, iters, status


def newton_batch(t_flat, n, m, X0, method, delta, kmax):
    step = _newton_stepper(t_flat, n, m, method)
    return _batch(lambda x0: _run(step, x0, n, delta, kmax, False), X0, n)


def power_batch(t_flat, n, m, X0, variant, alpha, tau, direction, delta, kmax):
    return _batch(lambda x0: power_run(t_flat, n, m, x0, variant, alpha, tau, direction, delta, kmax), X0, n)
