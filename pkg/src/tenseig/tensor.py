"""Symmetric tensors and the multilinear quantities built from them.

A :class:`SymmetricTensor` stores all ``n**m`` entries densely. Every quantity
the solvers need (``mu``, gradient, Hessian, projected Hessian, Jacobian, the
higher-order expansion remainders) is computed by contracting the last modes
one at a time, a single O(n**m) pass per call.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dense_linalg import orthonormal_complement
from .errors import DegreeMismatch, DimMismatch, NonFinite, NotUnit, SizeGuard, SizeMismatch

MAX_ENTRIES = 10**8
UNIT_TOL = 1e-8
FIBER_RANK_RTOL = 1e-10


class SymmetricTensor:
    """Immutable dense symmetric tensor of order ``m`` and dimension ``n``.

    The constructor does not symmetrize; it rejects input that is not exactly
    invariant under index permutations. Use :func:`symmetrize` for raw data.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        data = np.array(data, dtype=float)
        if data.ndim < 2 or len(set(data.shape)) != 1:
            raise SizeMismatch(f"expected a cubical array, got shape {data.shape}")
        _check_size(data.ndim, data.shape[0])
        if not np.all(np.isfinite(data)):
            raise NonFinite("tensor entries must be finite")
        if not _is_symmetric(data):
            raise ValueError("tensor is not symmetric; use symmetrize()")
        data.setflags(write=False)
        self._data = data

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Read-only ``(n,)*m`` view of the entries."""
        return self._data

    @property
    def flat(self) -> np.ndarray:
        return self._data.reshape(-1)

    def get(self, *index) -> float:
        return float(self._data[index])

    def __repr__(self):
        return f"SymmetricTensor(order={self.order}, dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self._data.shape, self._data.tobytes()))

    def __neg__(self):
        return SymmetricTensor(-self._data)

    def __reduce__(self):
        return (SymmetricTensor, (np.array(self._data),))


def _check_size(m, n):
    if n < 1 or m < 1:
        raise SizeMismatch(f"bad tensor shape order={m} dim={n}")
    if n**m > MAX_ENTRIES:
        raise SizeGuard(f"{n}**{m} entries exceeds the storage guard of {MAX_ENTRIES}")


def _is_symmetric(data):
    # adjacent transpositions generate the whole symmetric group
    m = data.ndim
    for k in range(m - 1):
        axes = list(range(m))
        axes[k], axes[k + 1] = axes[k + 1], axes[k]
        if not np.array_equal(data, data.transpose(axes)):
            return False
    return True


def symmetrize(order: int, dim: int, raw) -> SymmetricTensor:
    """Average ``raw`` over all index permutations.

    Entries whose permutation orbit is already constant are copied verbatim,
    so symmetric input comes back bit-identical.
    """
    _check_size(order, dim)
    raw = np.asarray(raw, dtype=float)
    if raw.size != dim**order:
        raise SizeMismatch(f"expected {dim**order} entries, got {raw.size}")
    raw = raw.reshape((dim,) * order)
    total = np.zeros_like(raw)
    lo = np.full_like(raw, np.inf)
    hi = np.full_like(raw, -np.inf)
    count = 0
    for perm in itertools.permutations(range(order)):
        t = raw.transpose(perm)
        total += t
        np.minimum(lo, t, out=lo)
        np.maximum(hi, t, out=hi)
        count += 1
    out = np.where(lo == hi, raw, total / count)
    if not _is_symmetric(out):
        # averaging is permutation invariant up to summation order; mirror from sorted indices
        out = _mirror_sorted(out)
    return SymmetricTensor(out)


def _mirror_sorted(data):
    out = np.empty_like(data)
    n, m = data.shape[0], data.ndim
    for idx in itertools.combinations_with_replacement(range(n), m):
        v = data[idx]
        for p in set(itertools.permutations(idx)):
            out[p] = v
    return out


def from_sorted_entries(order: int, dim: int, values) -> SymmetricTensor:
    """Build a tensor from one value per sorted multi-index (lexicographic order)."""
    _check_size(order, dim)
    data = np.empty((dim,) * order)
    keys = list(itertools.combinations_with_replacement(range(dim), order))
    values = np.asarray(values, dtype=float)
    if values.shape != (len(keys),):
        raise SizeMismatch(f"expected {len(keys)} distinct entries, got {values.shape}")
    for idx, v in zip(keys, values):
        for p in set(itertools.permutations(idx)):
            data[p] = v
    return SymmetricTensor(data)


# ---------------------------------------------------------------------------
# contractions


def _vec(T, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (T.dim,):
        raise DimMismatch(f"vector of shape {x.shape} for a tensor of dimension {T.dim}")
    if not np.all(np.isfinite(x)):
        raise NonFinite("vector entries must be finite")
    return x


def _unit(T, x):
    x = _vec(T, x)
    if abs(np.linalg.norm(x) - 1.0) > UNIT_TOL:
        raise NotUnit(f"|x| = {np.linalg.norm(x)!r}; normalize first")
    return x


def contract(T: SymmetricTensor, *vectors) -> np.ndarray:
    """Contract the last ``len(vectors)`` modes of ``T`` with the given vectors.

    ``contract(T, x, x)`` for a cubic tensor is ``T(I, x, x)``; passing ``m``
    vectors yields a 0-d array.
    """
    n = T.dim
    if len(vectors) > T.order:
        raise DimMismatch("more vectors than tensor modes")
    a = T.data
    for v in reversed(vectors):
        v = _vec(T, v)
        a = a.reshape(-1, n) @ v
    return a.reshape((n,) * (T.order - len(vectors)))


def contract_to_matrix(T: SymmetricTensor, x) -> np.ndarray:
    """``T(I, I, x, ..., x)``, returned exactly symmetric."""
    x = _vec(T, x)
    n = T.dim
    a = T.data.reshape(-1)
    for _ in range(T.order - 2):
        a = a.reshape(-1, n) @ x
    M = a.reshape(n, n)
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def contract_to_vector(T: SymmetricTensor, x) -> np.ndarray:
    """``T(I, x, ..., x)``."""
    x = _vec(T, x)
    return contract_to_matrix(T, x) @ x


def mu(T: SymmetricTensor, x) -> float:
    """The homogeneous form ``T(x, ..., x)``."""
    x = _vec(T, x)
    return float(x @ contract_to_vector(T, x))


def gradient(T: SymmetricTensor, x) -> np.ndarray:
    x = _unit(T, x)
    v = contract_to_vector(T, x)
    return v - (x @ v) * x


def hessian(T: SymmetricTensor, x) -> np.ndarray:
    x = _unit(T, x)
    M = contract_to_matrix(T, x)
    return (T.order - 1) * M - float(x @ M @ x) * np.eye(T.dim)


def projected_hessian(T: SymmetricTensor, x, U=None) -> np.ndarray:
    """``U^T H(x) U`` with ``U`` the Householder complement of ``x``."""
    x = _unit(T, x)
    if U is None:
        U = orthonormal_complement(x / np.linalg.norm(x))
    Hp = U.T @ hessian(T, x) @ U
    return np.triu(Hp) + np.triu(Hp, 1).T


def jacobian_A(T: SymmetricTensor, x) -> np.ndarray:
    """Jacobian of the gradient map: ``H(x) - m x T(I,x,...,x)^T``."""
    x = _unit(T, x)
    M = contract_to_matrix(T, x)
    v = M @ x
    m = T.order
    return (m - 1) * M - float(x @ v) * np.eye(T.dim) - m * np.outer(x, v)


def _mixed_scalar(T, x, y, nx, ny):
    return float(contract(T, *([x] * nx + [y] * ny)))


def _mixed_vector(T, x, y, nx, ny):
    return contract(T, *([x] * nx + [y] * ny))


def delta_ncm(T: SymmetricTensor, x, y) -> np.ndarray:
    """Higher-order remainder of the NCM linearisation.

    Satisfies ``g~(x + y) = g(x) + A(x) y - delta_ncm(x, y)`` where ``g~`` is
    the gradient formula evaluated off the sphere.
    """
    x = _unit(T, x)
    y = _vec(T, y)
    m = T.order
    out = np.zeros(T.dim)
    for i in range(2, m + 1):
        out += math.comb(m, i) * _mixed_scalar(T, x, y, m - i, i) * x
    for i in range(1, m + 1):
        out += math.comb(m, i) * _mixed_scalar(T, x, y, m - i, i) * y
    for i in range(2, m):
        out -= math.comb(m - 1, i) * _mixed_vector(T, x, y, m - i - 1, i)
    return out


def delta_oncm(T: SymmetricTensor, x, u, beta: float) -> np.ndarray:
    """Higher-order remainder of the bordered (O-NCM) linearisation."""
    x = _unit(T, x)
    u = _vec(T, u)
    m = T.order
    out = beta * u
    for i in range(2, m):
        out = out - math.comb(m - 1, i) * _mixed_vector(T, x, u, m - i - 1, i)
    return out


def fiber_span(T: SymmetricTensor):
    """Orthonormal bases of the span of the mode-1 fibers and of its complement.

    Unit vectors in the complement are eigenvectors with eigenvalue zero and a
    vanishing projected Hessian.
    """
    n = T.dim
    U, s, _ = np.linalg.svd(T.data.reshape(n, -1), full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0], U
    r = int(np.sum(s > FIBER_RANK_RTOL * s[0]))
    return U[:, :r], U[:, r:]


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    """Homogeneous polynomial as a map from exponent tuples to coefficients."""

    degree: int
    dim: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for exps in self.terms:
            if len(exps) != self.dim or any(e < 0 for e in exps):
                raise DimMismatch(f"exponent vector {exps} does not match dim {self.dim}")
            if sum(exps) != self.degree:
                raise DegreeMismatch(f"exponent vector {exps} does not sum to {self.degree}")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x ** np.array(e)) for e, c in self.terms.items()))

    @classmethod
    def from_terms(cls, degree, dim, terms):
        acc: dict = {}
        for e, c in terms:
            e = tuple(int(k) for k in e)
            acc[e] = acc.get(e, 0.0) + float(c)
        return cls(degree, dim, {e: c for e, c in acc.items() if c != 0.0})

    def __add__(self, other):
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise DegreeMismatch("cannot add polynomials of different degree or dimension")
        return Polynomial.from_terms(self.degree, self.dim, [*self.terms.items(), *other.terms.items()])

    def scale(self, c):
        return Polynomial(self.degree, self.dim, {e: c * v for e, v in self.terms.items()})


def linear_form_power(coeffs, degree: int) -> Polynomial:
    """Expand ``(sum_i c_i x_i) ** degree`` into monomials."""
    coeffs = [float(c) for c in coeffs]
    n = len(coeffs)
    terms = []
    for idx in itertools.combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in idx:
            e[i] += 1
        c = multinomial(e) * math.prod(coeffs[i] ** e[i] for i in range(n))
        terms.append((tuple(e), c))
    return Polynomial.from_terms(degree, n, terms)


def multinomial(exps) -> int:
    out = math.factorial(sum(exps))
    for k in exps:
        out //= math.factorial(k)
    return out


def from_polynomial(p: Polynomial) -> SymmetricTensor:
    """The unique symmetric tensor whose form ``mu`` equals ``p``."""
    m, n = p.degree, p.dim
    _check_size(m, n)
    data = np.zeros((n,) * m)
    for exps, c in p.terms.items():
        if sum(exps) != m:
            raise DegreeMismatch(f"exponent vector {exps} does not sum to {m}")
        idx = tuple(i for i, k in enumerate(exps) for _ in range(k))
        v = c / multinomial(exps)
        for perm in set(itertools.permutations(idx)):
            data[perm] = v
    return SymmetricTensor(data)
