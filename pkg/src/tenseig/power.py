"""Higher-order power iterations: plain, fixed-shift and adaptively shifted."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .dense_linalg import symmetric_eigen
from .errors import ZeroIterate
from .newton import SolveOutcome, SolverConfig, _check_start, _finish
from .tensor import SymmetricTensor, _unit, contract_to_matrix, contract_to_vector, hessian

ZERO_NORM = 1e-14
_VARIANTS = {"plain": 0, "fixed": 1, "adaptive": 2}


@dataclass(frozen=True)
class PowerConfig:
    variant: str = "adaptive"  # plain | fixed | adaptive
    alpha: float = 0.0
    tau: float = 1e-6
    direction: str = "max"
    delta: float = 1e-10
    kmax: int = 200
    trace: bool = False

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown power variant {self.variant!r}")
        if not self.delta > 0 or self.kmax < 1 or self.tau < 0:
            raise ValueError("need delta > 0, kmax >= 1 and tau >= 0")
        if self.direction not in ("max", "min"):
            raise ValueError("direction must be 'max' or 'min'")

    @property
    def method(self):
        return {"plain": "hopm", "fixed": "shopm", "adaptive": "ashopm"}[self.variant]

    @classmethod
    def from_solver_config(cls, config: SolverConfig) -> "PowerConfig":
        variant = {"hopm": "plain", "shopm": "fixed", "ashopm": "adaptive"}[config.method]
        return cls(variant, config.alpha, config.tau, config.direction, config.delta, config.kmax, config.trace)


def _normalized(w):
    nrm = np.linalg.norm(w)
    if not nrm > ZERO_NORM:
        raise ZeroIterate(f"|iterate| = {nrm:.3e}")
    return w / nrm


def hopm_step(T: SymmetricTensor, x) -> np.ndarray:
    """``T(I,x,...,x) / |T(I,x,...,x)|``."""
    x = _unit(T, x)
    return _normalized(contract_to_vector(T, x))


def shifted_hopm_step(T: SymmetricTensor, x, alpha: float) -> np.ndarray:
    x = _unit(T, x)
    return _normalized(contract_to_vector(T, x) + alpha * x)


def adaptive_shift(T: SymmetricTensor, x, tau: float = 1e-6, direction: str = "max", form: str = "lagrangian") -> float:
    """Shift that makes the shifted objective locally convex (``max``) or concave (``min``).

    ``form="lagrangian"`` uses the spectrum of ``H(x)``:
    ``max(0, (tau - lambda_min(H))/m)`` or ``min(0, -(tau + lambda_max(H))/m)``.
    ``form="curvature"`` uses the Euclidean Hessian ``m(m-1) T(I,I,x,...,x)`` of
    ``mu`` in place of ``H``; this is the shift the iteration applies, since it
    is the one that guarantees monotone ``mu`` along the iterates.
    """
    x = _unit(T, x)
    m = T.order
    if form == "lagrangian":
        w = symmetric_eigen(hessian(T, x)).eigenvalues
    elif form == "curvature":
        w = symmetric_eigen(m * (m - 1) * contract_to_matrix(T, x)).eigenvalues
    else:
        raise ValueError("form must be 'lagrangian' or 'curvature'")
    # pad by the eigenvalue round-off so the shifted spectrum clears tau after recomputation
    pad = 8 * np.finfo(float).eps * max(1.0, float(np.abs(w).max())) / m
    if direction == "max":
        return max(0.0, (tau - w[0]) / m + pad)
    if direction == "min":
        return min(0.0, -(tau + w[-1]) / m - pad)
    raise ValueError("direction must be 'max' or 'min'")


def run_power(T: SymmetricTensor, x0, config: PowerConfig = PowerConfig(), backend=None) -> SolveOutcome:
    """Iterate the configured power method; zero iterates end the run as ``step-failure``."""
    x0 = _check_start(T, x0)
    kern = _core.get_backend(backend)
    x, iters, status, trace = kern.power_run(
        T.flat,
        T.dim,
        T.order,
        x0,
        _VARIANTS[config.variant],
        config.alpha,
        config.tau,
        1 if config.direction == "max" else -1,
        config.delta,
        config.kmax,
        config.trace,
    )
    x, lam, res = _finish(T, x)
    out = SolveOutcome(_core.STATUS_NAMES[int(status)], x, lam, int(iters), res, config.method, trace)
    if trace is not None:
        out.mu_trace = np.array([float(y @ contract_to_vector(T, y)) for y in trace])
    return out
