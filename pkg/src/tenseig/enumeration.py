"""Multi-start enumeration of real eigenpairs.

Start ``i`` draws its initial point from a Philox stream keyed by
``(seed, i)``, so the set of outcomes does not depend on how starts are
split into chunks or spread over worker threads. Chunks run through the
batch kernels (the compiled one releases the GIL) and are merged in start
order.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .newton import NEWTON_METHODS, SolverConfig
from .spectral import SAME_PAIR_TOL, SIGN_TOL, VALIDATION_TOL, Eigenpair, classify
from .tensor import SymmetricTensor

CHUNK = 512
_POWER_VARIANTS = {"hopm": 0, "shopm": 1, "ashopm": 2}


def start_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for start ``index`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_unit_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere (normalized standard normal)."""
    while True:
        z = rng.standard_normal(n)
        nrm = np.linalg.norm(z)
        if nrm > 0:
            return z / nrm


def initial_points(n: int, seed: int, lo: int, hi: int) -> np.ndarray:
    return np.array([sample_unit_sphere(n, start_stream(seed, i)) for i in range(lo, hi)]).reshape(-1, n)


@dataclass
class EnumerationResult:
    tensor: str
    method: str
    starts: int
    seed: int
    pairs: list = field(default_factory=list)
    failures: int = 0
    failure_kinds: dict = field(default_factory=dict)  # iteration-cap | step-failure | rejected
    duration: float = 0.0
    last_new_start: int = -1
    status: str = "complete"  # complete | budget-exhausted (oracle-driven runs)
    assignments: np.ndarray | None = field(default=None, repr=False)  # pair index per start, -1 on failure

    @property
    def hits(self):
        return [p.hits for p in self.pairs]

    @property
    def saturated(self) -> bool:
        """No new pair appeared in the second half of the starts."""
        return self.starts > 0 and self.last_new_start < self.starts / 2


def _run_chunk(T, config, seed, lo, hi, backend):
    kern = _core.get_backend(backend)
    X0 = initial_points(T.dim, seed, lo, hi)
    if config.method in NEWTON_METHODS:
        return kern.newton_batch(T.flat, T.dim, T.order, X0, NEWTON_METHODS[config.method], config.delta, config.kmax)
    direction = 1 if config.direction == "max" else -1
    return kern.power_batch(
        T.flat, T.dim, T.order, X0, _POWER_VARIANTS[config.method], config.alpha, config.tau, direction,
        config.delta, config.kmax,
    )


def _batch_contract(T, X):
    """Rows ``T(I,x,...,x)`` for every row ``x`` of ``X``."""
    n, S = T.dim, len(X)
    R = T.flat.reshape(-1, n) @ X.T  # (n^(m-1), S)
    while R.shape[0] > n:
        R = np.einsum("ajs,js->as", R.reshape(R.shape[0] // n, n, S), X.T)
    return R.T


def _run_starts(T, config, seed, lo, hi, workers, backend):
    bounds = [(a, min(a + CHUNK, hi)) for a in range(lo, hi, CHUNK)]
    if not bounds:
        return np.empty((0, T.dim)), np.empty(0, np.int32), np.empty(0, np.int32)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _run_chunk(T, config, seed, b[0], b[1], backend), bounds))
    else:
        parts = [_run_chunk(T, config, seed, a, b, backend) for a, b in bounds]
    X = np.concatenate([p[0] for p in parts])
    return X, np.concatenate([p[1] for p in parts]), np.concatenate([p[2] for p in parts])


def _canonical_rows(X, lam, m):
    big = np.abs(X) > SIGN_TOL
    first = np.argmax(big, axis=1)
    flip = X[np.arange(len(X)), first] < 0
    X = np.where(flip[:, None], -X, X)
    if m % 2:
        lam = np.where(flip, -lam, lam)
    return X, lam


class _Matcher:
    """Incremental dedup: assigns each canonical vector to a distinct pair id."""

    def __init__(self, n, tol=SAME_PAIR_TOL):
        self.reps = np.empty((0, n))
        self.tol = tol

    def assign(self, x):
        if len(self.reps):
            d = np.minimum(np.linalg.norm(self.reps - x, axis=1), np.linalg.norm(self.reps + x, axis=1))
            j = int(np.argmin(d))
            if d[j] <= self.tol:
                return j, False
        self.reps = np.vstack([self.reps, x])
        return len(self.reps) - 1, True


def _outcomes(T, X, status):
    """Validate converged rows; return (canonical X, lambda, residual, kind) with kind -1 ok, else failure code."""
    nrm = np.linalg.norm(X, axis=1)
    X = X / np.where(nrm > 0, nrm, 1.0)[:, None]
    V = _batch_contract(T, X)
    lam = np.einsum("si,si->s", X, V)
    res = np.linalg.norm(V - lam[:, None] * X, axis=1)
    X, lam = _canonical_rows(X, lam, T.order)
    kind = np.where(status == 0, np.where(res <= VALIDATION_TOL, -1, 3), status)
    return X, lam, res, kind


def _aggregate(T, label, config, seed, X, status, t0, status_text="complete"):
    X, lam, res, kind = _outcomes(T, X, status)
    matcher = _Matcher(T.dim)
    assign = np.full(len(X), -1, dtype=np.int64)
    first = []
    last_new = -1
    for i in np.flatnonzero(kind == -1):
        j, new = matcher.assign(X[i])
        assign[i] = j
        if new:
            first.append(int(i))
            last_new = int(i)
    hits = np.bincount(assign[assign >= 0], minlength=len(first))
    pairs = []
    for j, i in enumerate(first):
        p = Eigenpair(X[i].copy(), float(lam[i]), float(res[i]), config.method, None, int(hits[j]), i)
        p.stability = classify(T, p.x)
        pairs.append(p)
    order = sorted(range(len(pairs)), key=lambda j: (round(pairs[j].eigenvalue, 9), tuple(pairs[j].x)))
    remap = np.full(len(pairs) + 1, -1, dtype=np.int64)
    remap[np.array(order, dtype=np.int64)] = np.arange(len(order))
    assign = np.where(assign >= 0, remap[assign], -1)
    kinds = {
        "iteration-cap": int(np.sum(kind == 1)),
        "step-failure": int(np.sum(kind == 2)),
        "rejected": int(np.sum(kind == 3)),
    }
    return EnumerationResult(
        tensor=label, method=config.method, starts=len(X), seed=seed, pairs=[pairs[j] for j in order],
        failures=sum(kinds.values()), failure_kinds=kinds, duration=time.perf_counter() - t0,
        last_new_start=last_new, status=status_text, assignments=assign,
    )


def _label(T, label):
    return label or f"order {T.order} dim {T.dim}"


def enumerate_pairs(
    T: SymmetricTensor,
    config: SolverConfig = SolverConfig(),
    starts: int = 1000,
    seed: int = 0,
    workers: int = 1,
    backend=None,
    label: str | None = None,
) -> EnumerationResult:
    """Run ``starts`` random starts and collect the distinct validated eigenpairs.

    Pairs are in canonical sign and sorted by eigenvalue (rounded to 1e-9),
    then by vector; ``hits`` counts the starts that converged to each.
    """
    if starts < 1:
        raise ValueError("starts must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    t0 = time.perf_counter()
    X, _, status = _run_starts(T, config, seed, 0, starts, workers, backend)
    return _aggregate(T, _label(T, label), config, seed, X, status, t0)


def enumerate_until_oracle(
    T: SymmetricTensor,
    oracle,
    config: SolverConfig = SolverConfig(),
    budget: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    backend=None,
    label: str | None = None,
    tol: float = SAME_PAIR_TOL,
) -> EnumerationResult:
    """Enumerate until every oracle vector has been hit, or ``budget`` starts are used.

    The result covers starts ``0 .. k`` where ``k`` is the start that completed
    the oracle set (status ``complete``), or all ``budget`` starts
    (status ``budget-exhausted``).
    """
    refs = np.array([np.asarray(getattr(p, "x", p), dtype=float) for p in oracle])
    if refs.size == 0:
        raise ValueError("oracle list must be nonempty")
    t0 = time.perf_counter()
    found = np.full(len(refs), -1)
    Xs, Ss = [], []
    used = 0
    step = CHUNK * max(1, workers)
    while used < budget and np.any(found < 0):
        hi = min(budget, used + step)
        X, _, status = _run_starts(T, config, seed, used, hi, workers, backend)
        Xc, _, _, kind = _outcomes(T, X, status)
        for r in np.flatnonzero(kind == -1):
            d = np.minimum(np.linalg.norm(refs - Xc[r], axis=1), np.linalg.norm(refs + Xc[r], axis=1))
            fresh = (d <= tol) & (found < 0)
            found[fresh] = used + r
        Xs.append(X)
        Ss.append(status)
        used = hi
    X = np.concatenate(Xs) if Xs else np.empty((0, T.dim))
    status = np.concatenate(Ss) if Ss else np.empty(0, np.int32)
    if np.all(found >= 0):
        stop = int(found.max()) + 1
        return _aggregate(T, _label(T, label), config, seed, X[:stop], status[:stop], t0, "complete")
    return _aggregate(T, _label(T, label), config, seed, X, status, t0, "budget-exhausted")


def hit_histogram(result: EnumerationResult):
    """Rows ``(|lambda|, hits, method)``, one per distinct pair."""
    return [(abs(p.eigenvalue), p.hits, result.method) for p in result.pairs]


def small_eigenvalue_hit_fractions(results, fraction: float = 0.1, tol: float = SAME_PAIR_TOL):
    """Hit fraction of each result on the pairs in the lowest-``|lambda|`` ``fraction``.

    The pair pool is the union (under sign-equivalence) of the pairs found by
    all ``results``; each result's fraction is its hits on the selected pairs
    divided by its number of starts.
    """
    pool = []
    for res in results:
        for p in res.pairs:
            if not any(min(np.linalg.norm(p.x - q.x), np.linalg.norm(p.x + q.x)) <= tol for q in pool):
                pool.append(p)
    pool.sort(key=lambda p: abs(p.eigenvalue))
    chosen = pool[: max(1, math.ceil(fraction * len(pool)))]
    out = []
    for res in results:
        h = 0
        for p in res.pairs:
            if any(min(np.linalg.norm(p.x - q.x), np.linalg.norm(p.x + q.x)) <= tol for q in chosen):
                h += p.hits
        out.append(h / res.starts)
    return chosen, out
