"""Validation, stability classification and comparison of eigenpairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense_linalg import symmetric_eigen
from .errors import InsufficientTrace, NotEigenpair
from .tensor import SymmetricTensor, _vec, contract_to_vector, projected_hessian

VALIDATION_TOL = 1e-8
RANK_RTOL = 1e-7
SAME_PAIR_TOL = 1e-6
SIGN_TOL = 1e-10
ORDER_WINDOW = (1e-12, 1e-1)


@dataclass
class StabilityReport:
    hp_spectrum: np.ndarray
    gamma: float
    rank: int
    rank_tol: float
    power_class: str  # positive-stable | negative-stable | power-unstable
    newton_stable: bool

    @property
    def rank_deficient(self) -> bool:
        return self.rank < len(self.hp_spectrum)


@dataclass
class Eigenpair:
    x: np.ndarray
    eigenvalue: float
    residual: float
    source: str = ""
    stability: StabilityReport | None = None
    hits: int = 0
    first_hit: int = -1


def validate_eigenpair(T: SymmetricTensor, x, tol: float = VALIDATION_TOL):
    """Return ``(lambda, residual, ok)`` with ``lambda = mu(x)`` after renormalising ``x``."""
    x = _vec(T, x)
    x = x / np.linalg.norm(x)
    v = contract_to_vector(T, x)
    lam = float(x @ v)
    res = float(np.linalg.norm(v - lam * x))
    return lam, res, res <= tol


def classify(T: SymmetricTensor, x) -> StabilityReport:
    """Spectrum of the projected Hessian and the stability classes it implies."""
    x = np.asarray(x, dtype=float)
    lam, res, ok = validate_eigenpair(T, x)
    if not ok:
        raise NotEigenpair(f"residual {res:.3e} exceeds {VALIDATION_TOL}")
    x = x / np.linalg.norm(x)
    w = symmetric_eigen(projected_hessian(T, x)).eigenvalues
    tol = RANK_RTOL * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    gamma = float(np.min(np.abs(w))) if w.size else np.inf
    rank = int(np.sum(np.abs(w) > tol))
    if w.size and w[0] > tol:
        power_class = "positive-stable"
    elif w.size and w[-1] < -tol:
        power_class = "negative-stable"
    else:
        power_class = "power-unstable"
    return StabilityReport(w, gamma, rank, tol, power_class, gamma > tol)


def canonical_sign(x, eigenvalue: float, m: int):
    """Representative of the class ``(x, lam) ~ (-x, (-1)^m lam)`` with first significant coordinate positive."""
    x = np.asarray(x, dtype=float)
    big = np.flatnonzero(np.abs(x) > SIGN_TOL)
    if big.size and x[big[0]] < 0:
        return -x, (-1) ** m * eigenvalue
    return x.copy(), eigenvalue


def pair_distance(x, y) -> float:
    return min(float(np.linalg.norm(x - y)), float(np.linalg.norm(x + y)))


def same_eigenpair(p, q, tol: float = SAME_PAIR_TOL) -> bool:
    """Whether two (canonical) eigenpairs or vectors coincide up to sign."""
    xp = p.x if hasattr(p, "x") else np.asarray(p, dtype=float)
    xq = q.x if hasattr(q, "x") else np.asarray(q, dtype=float)
    return pair_distance(xp, xq) <= tol


def trace_errors(trace, x_star):
    x_star = np.asarray(x_star, dtype=float)
    return np.array([pair_distance(np.asarray(x, dtype=float), x_star) for x in trace])


def _error_pairs(e, window):
    lo, hi = window
    ok = (e >= lo) & (e <= hi)
    return [(e[k], e[k + 1]) for k in range(e.size - 1) if ok[k] and ok[k + 1]]


def _slope(pairs):
    a = np.log([p[0] for p in pairs])
    b = np.log([p[1] for p in pairs])
    return float(np.polyfit(a, b, 1)[0])


def order_from_errors(errors, window=ORDER_WINDOW) -> float:
    """Least-squares slope of ``log e_{k+1}`` against ``log e_k`` inside ``window``."""
    e = np.asarray(errors, dtype=float)
    if e.size < 4:
        raise InsufficientTrace(f"need at least 4 iterates, got {e.size}")
    pairs = _error_pairs(e, window)
    if len(pairs) < 2:
        raise InsufficientTrace(f"only {len(pairs)} error pairs inside {window}")
    return _slope(pairs)


def pooled_order(error_sequences, window=ORDER_WINDOW) -> float:
    """One fitted order over the in-window ``(e_k, e_{k+1})`` pairs of many runs.

    Runs started close to a root often have a single pre-floor step; pooling
    them gives a slope that does not hinge on two points of one run.
    """
    pairs = [q for e in error_sequences for q in _error_pairs(np.asarray(e, dtype=float), window)]
    if len(pairs) < 2 or len({p[0] for p in pairs}) < 2:
        raise InsufficientTrace(f"only {len(pairs)} error pairs inside {window}")
    return _slope(pairs)


def convergence_order(trace, x_star, window=ORDER_WINDOW) -> float:
    """Fitted convergence order of an iterate trace towards ``x_star``."""
    return order_from_errors(trace_errors(trace, x_star), window)
