"""Test tensors with known eigenstructure.

The ``T_omega`` family is the identity cubic tensor plus ``omega`` times the
all-ones cubic tensor. Every eigenvector has at most two distinct
coordinates, ``a`` on a subset ``A`` and ``b`` elsewhere, and the ratio
``alpha = a/b`` solves::

    omega s^2 alpha^2 + (2 omega s (n-s) - 1) alpha + omega (n-s)^2 = 0,    s = |A|

so the full real spectrum is available in closed form.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import (
    Polynomial,
    SymmetricTensor,
    _check_size,
    from_polynomial,
    from_sorted_entries,
    linear_form_power,
    mu,
)

DISCRIMINANT_TOL = 1e-12


def t_omega(n: int, omega: float) -> SymmetricTensor:
    """``sum_i e_i^{(x)3} + omega * 1^{(x)3}``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    data = np.full((n, n, n), float(omega))
    for i in range(n):
        data[i, i, i] = 1.0 + omega
    return SymmetricTensor(data)


def omega_thresholds(n: int) -> list[float]:
    """Values of omega at which real eigenpairs of ``T_omega`` merge and vanish."""
    if n < 2:
        raise ValueError("n must be at least 2")
    l = n // 2
    return [1.0 / (4 * (l - i) * (n - l + i)) for i in range(l)]


@dataclass
class OmegaOracleEntry:
    size: int
    alpha: float | None  # ratio a/b; inf stands for b = 0
    pattern: tuple[float, float]  # unit-norm coefficients on 1_A and 1_{A^c}
    eigenvalue: float
    multiplicity: int
    discriminant: float
    threshold: bool = False


@dataclass
class OmegaCensus:
    omega: float
    n: int
    roots_per_size: dict = field(default_factory=dict)
    pairs_per_size: dict = field(default_factory=dict)
    total: int = 0
    threshold_sizes: list = field(default_factory=list)


@dataclass
class OracleEigenpair:
    x: np.ndarray
    eigenvalue: float
    size: int
    subset: tuple
    threshold: bool


def _ratios(n, s, omega):
    """Real ratios ``a/b`` for subset size ``s`` as (a, b) pairs, plus the discriminant."""
    D = 1.0 - 4.0 * omega * s * (n - s)
    if omega == 0.0:
        # the quadratic degenerates; homogeneous roots are b = 0 and a = 0
        return [(1.0, 0.0), (0.0, 1.0)], D, False
    qa = omega * s * s
    qb = 2.0 * omega * s * (n - s) - 1.0
    if abs(D) <= DISCRIMINANT_TOL:
        return [(-qb / (2.0 * qa), 1.0)], D, True
    if D < 0:
        return [], D, False
    root = math.sqrt(D)
    # numerically stable pair of roots
    q = -0.5 * (qb + math.copysign(root, qb))
    r1, r2 = q / qa, (omega * (n - s) ** 2) / q
    return [(r1, 1.0), (r2, 1.0)], D, False


def _canonical(x):
    i = int(np.argmax(np.abs(x) > 1e-10))
    return -x if x[i] < 0 else x


def omega_eigenpair_oracle(n: int, omega: float):
    """Closed-form real eigenpairs of ``T_omega`` (requires ``omega >= 0``).

    Returns ``(entries, pairs)``: one :class:`OmegaOracleEntry` per real root
    and subset size, and the materialised, de-duplicated list of
    :class:`OracleEigenpair` (canonical sign: first nonzero coordinate > 0).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    T = t_omega(n, omega)
    ones = np.ones(n) / math.sqrt(n)
    pairs = [OracleEigenpair(ones, mu(T, ones), 0, (), False)]
    entries = [OmegaOracleEntry(0, 1.0, (1 / math.sqrt(n), 1 / math.sqrt(n)), pairs[0].eigenvalue, 1, 1.0)]
    for s in range(1, n // 2 + 1):
        roots, D, thr = _ratios(n, s, omega)
        for a, b in roots:
            if b != 0.0 and abs(a / b - 1.0) <= 1e-12:
                continue
            scale = math.sqrt(s * a * a + (n - s) * b * b)
            pa, pb = a / scale, b / scale
            lam = mu(T, np.r_[np.full(s, pa), np.full(n - s, pb)])
            alpha = a / b if b != 0.0 else math.inf
            entries.append(OmegaOracleEntry(s, alpha, (pa, pb), lam, math.comb(n, s), D, thr))
            for subset in itertools.combinations(range(n), s):
                x = np.full(n, pb)
                x[list(subset)] = pa
                x = _canonical(x)
                pairs.append(OracleEigenpair(x, mu(T, x), s, subset, thr))
    return entries, _dedupe(pairs)


def _dedupe(pairs, tol=1e-6):
    out = []
    for p in pairs:
        if not any(min(np.linalg.norm(p.x - q.x), np.linalg.norm(p.x + q.x)) <= tol for q in out):
            out.append(p)
    return out


def count_real_eigenpairs(n: int, omega: float) -> OmegaCensus:
    """Census of the real eigenpairs of ``T_omega`` by subset size."""
    _, pairs = omega_eigenpair_oracle(n, omega)
    census = OmegaCensus(omega=omega, n=n, total=len(pairs))
    for s in range(1, n // 2 + 1):
        roots, D, thr = _ratios(n, s, omega)
        census.roots_per_size[s] = len(roots)
        census.pairs_per_size[s] = sum(1 for p in pairs if p.size == s)
        if thr:
            census.threshold_sizes.append(s)
    return census


def random_gaussian_symmetric(m: int, n: int, seed) -> SymmetricTensor:
    """Symmetric tensor with i.i.d. N(0, 1) entries up to symmetry.

    One normal is drawn per sorted multi-index, in lexicographic order, and
    copied to every permutation of that index.
    """
    _check_size(m, n)
    count = math.comb(n + m - 1, m)
    values = np.random.default_rng(seed).standard_normal(count)
    return from_sorted_entries(m, n, values)


def motzkin_polynomial() -> Polynomial:
    """``x1^4 x2^2 + x1^2 x2^4 + x3^6 - 3 x1^2 x2^2 x3^2`` (degree 6, three variables)."""
    return Polynomial.from_terms(6, 3, [((4, 2, 0), 1.0), ((2, 4, 0), 1.0), ((0, 0, 6), 1.0), ((2, 2, 2), -3.0)])


def pairwise_quartic_polynomial(n: int = 6) -> Polynomial:
    """``sum_{i<j} (x_j - x_i)^4``."""
    total = Polynomial(4, n, {})
    for i, j in itertools.combinations(range(n), 2):
        c = np.zeros(n)
        c[j], c[i] = 1.0, -1.0
        total = total + linear_form_power(c, 4)
    return total


def degenerate_example(which: str) -> SymmetricTensor:
    """Two tensors with degenerate eigenpairs.

    ``"motzkin"`` (order 6, dim 3) has 17 real eigenpair classes, six of them
    with eigenvalue zero. ``"pairwise-quartic"`` (order 4, dim 6) has a trivial
    eigenvector along the all-ones vector and a continuum of eigenvectors
    with eigenvalue 4.5.
    """
    if which == "motzkin":
        return from_polynomial(motzkin_polynomial())
    if which == "pairwise-quartic":
        return from_polynomial(pairwise_quartic_polynomial(6))
    raise ValueError(f"unknown example {which!r}; expected 'motzkin' or 'pairwise-quartic'")


def identity_tensor(m: int, n: int) -> SymmetricTensor:
    """``sum_i e_i^{(x)m}``."""
    data = np.zeros((n,) * m)
    for i in range(n):
        data[(i,) * m] = 1.0
    return SymmetricTensor(data)

