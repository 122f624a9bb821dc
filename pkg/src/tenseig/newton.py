"""Newton correction methods (NCM and orthogonal NCM) for tensor eigenpairs.

The single-step functions here are written directly against :mod:`tenseig.tensor`
and serve as the readable reference; :func:`run_newton` drives whole runs
through the selected kernel backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .dense_linalg import orthonormal_complement, solve_general
from .errors import SingularMatrix, StepFailure
from .tensor import (
    SymmetricTensor,
    _unit,
    contract_to_vector,
    gradient,
    hessian,
    jacobian_A,
    projected_hessian,
)

NEWTON_METHODS = {"ncm": 0, "oncm": 1}
POWER_METHODS = ("hopm", "shopm", "ashopm")
ZERO_NORM = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    """Options shared by every iteration.

    ``tau``, ``alpha`` and ``direction`` only affect the power methods
    (``alpha`` is the fixed shift of ``shopm``; ``tau`` and ``direction`` drive
    ``ashopm``).
    """

    method: str = "oncm"
    delta: float = 1e-10
    kmax: int = 200
    tau: float = 1e-6
    alpha: float = 0.0
    direction: str = "max"
    trace: bool = False

    def __post_init__(self):
        if self.method not in NEWTON_METHODS and self.method not in POWER_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.direction not in ("max", "min"):
            raise ValueError("direction must be 'max' or 'min'")


@dataclass
class SolveOutcome:
    status: str  # converged | iteration-cap | step-failure
    x: np.ndarray
    eigenvalue: float
    iterations: int
    residual: float
    method: str = ""
    trace: np.ndarray | None = None
    mu_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _finish(T, x):
    x = x / np.linalg.norm(x)
    v = contract_to_vector(T, x)
    lam = float(x @ v)
    return x, lam, float(np.linalg.norm(v - lam * x))


def _normalize_step(x, step):
    w = x + step
    nrm = np.linalg.norm(w)
    if not nrm > ZERO_NORM:
        raise StepFailure(f"|x + step| = {nrm:.3e}")
    return w / nrm


def ncm_step(T: SymmetricTensor, x) -> np.ndarray:
    """One NCM update: solve ``A(x) y = -g(x)`` and renormalise ``x + y``."""
    x = _unit(T, x)
    try:
        y = solve_general(jacobian_A(T, x), -gradient(T, x))
    except SingularMatrix as exc:
        raise StepFailure(str(exc)) from exc
    return _normalize_step(x, y)


def oncm_correction(T: SymmetricTensor, x) -> np.ndarray:
    """Tangent correction ``u = -U Hp^{-1} U^T g``."""
    x = _unit(T, x)
    U = orthonormal_complement(x / np.linalg.norm(x))
    try:
        z = solve_general(projected_hessian(T, x, U), -(U.T @ gradient(T, x)))
    except SingularMatrix as exc:
        raise StepFailure(str(exc)) from exc
    return U @ z


def oncm_step(T: SymmetricTensor, x) -> np.ndarray:
    """One O-NCM update. The correction is orthogonal to ``x``, so ``|x + u| >= 1``."""
    x = _unit(T, x)
    return _normalize_step(x, oncm_correction(T, x))


def solve_bordered(T: SymmetricTensor, x):
    """Solve the ``(n+1)``-dimensional bordered system for ``(u, beta)``.

    ``[[H(x), -x], [x^T, 0]] (u, beta) = (-g(x), 0)``
    """
    x = _unit(T, x)
    n = T.dim
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = hessian(T, x)
    K[:n, n] = -x
    K[n, :n] = x
    try:
        sol = solve_general(K, np.r_[-gradient(T, x), 0.0])
    except SingularMatrix as exc:
        raise StepFailure(str(exc)) from exc
    return sol[:n], float(sol[n])


def gauss_newton_objective(T: SymmetricTensor, x) -> float:
    """``0.5 * |g(x)|^2``; zero exactly at eigenvectors."""
    g = gradient(T, x)
    return 0.5 * float(g @ g)


def _check_start(T, x0):
    return np.array(_unit(T, x0), dtype=float)


def run_newton(T: SymmetricTensor, x0, config: SolverConfig = SolverConfig(), backend=None) -> SolveOutcome:
    """Iterate NCM or O-NCM from ``x0`` until the step falls below ``delta``.

    Failures (singular system, iteration cap) are reported in ``status``;
    nothing is raised for them.
    """
    if config.method not in NEWTON_METHODS:
        raise ValueError(f"{config.method!r} is not a Newton method")
    x0 = _check_start(T, x0)
    kern = _core.get_backend(backend)
    x, iters, status, trace = kern.newton_run(
        T.flat, T.dim, T.order, x0, NEWTON_METHODS[config.method], config.delta, config.kmax, config.trace
    )
    x, lam, res = _finish(T, x)
    return SolveOutcome(_core.STATUS_NAMES[int(status)], x, lam, int(iters), res, config.method, trace)


def solve(T: SymmetricTensor, x0, config: SolverConfig = SolverConfig(), backend=None) -> SolveOutcome:
    """Run whichever method ``config.method`` names."""
    if config.method in NEWTON_METHODS:
        return run_newton(T, x0, config, backend)
    from .power import PowerConfig, run_power

    return run_power(T, x0, PowerConfig.from_solver_config(config), backend)

