import itertools
import math

import numpy as np
import pytest

from tenseig.models import (
    count_real_eigenpairs,
    degenerate_example,
    identity_tensor,
    omega_eigenpair_oracle,
    omega_thresholds,
    random_gaussian_symmetric,
    t_omega,
)
from tenseig.spectral import classify, same_eigenpair, validate_eigenpair
from tenseig.tensor import from_polynomial, linear_form_power, mu


def count_by_numpy_roots(n, omega):
    """Independent census: real roots != 1 of the ratio quadratic, via np.roots."""
    total = 1
    seen = set()
    for s in range(1, n // 2 + 1):
        if omega == 0.0:
            patterns = [(1.0, 0.0), (0.0, 1.0)]  # a = 0 or b = 0
        else:
            r = np.roots([omega * s * s, 2 * omega * s * (n - s) - 1, omega * (n - s) ** 2])
            patterns = sorted({(round(v.real, 8), 1.0) for v in r if abs(v.imag) <= 1e-7 and abs(v.real - 1) > 1e-8})
        for a, b in patterns:
            for A in itertools.combinations(range(n), s):
                x = np.full(n, b)
                x[list(A)] = a
                x /= np.linalg.norm(x)
                key = tuple(np.round(x * np.sign(x[np.flatnonzero(x)[0]]), 8))
                if key not in seen:
                    seen.add(key)
                    total += 1
    return total


def test_t_omega_entries():
    T = t_omega(3, 0.2)
    assert T.get(1, 1, 1) == 1.2 and T.get(0, 1, 2) == 0.2 and T.get(0, 0, 1) == 0.2
    assert t_omega(4, 0.0) == identity_tensor(3, 4)


def test_t_omega_value_on_diagonal():
    x = np.ones(3) / np.sqrt(3)
    assert mu(t_omega(3, 0.125), x) == pytest.approx((1 + 9 * 0.125) / np.sqrt(3), abs=1e-14)


def test_t_omega_matches_polynomial():
    n, om = 5, 0.03
    p = linear_form_power(np.eye(n)[0], 3)
    for i in range(1, n):
        p = p + linear_form_power(np.eye(n)[i], 3)
    p = p + linear_form_power(np.ones(n), 3).scale(om)
    np.testing.assert_allclose(from_polynomial(p).data, t_omega(n, om).data, atol=1e-15)


def test_thresholds():
    np.testing.assert_allclose(omega_thresholds(5), [1 / 24, 1 / 16])
    np.testing.assert_allclose(omega_thresholds(3), [0.125])
    np.testing.assert_allclose(omega_thresholds(7), [1 / 48, 1 / 40, 1 / 24])
    for n in range(2, 12):
        assert np.all(np.diff(omega_thresholds(n)) > 0)


@pytest.mark.parametrize(
    "n,omega,expected",
    [(5, 0.02, 31), (3, 0.125, 4), (5, 0.07, 1), (5, 0.05, 11), (4, 0.0, 15), (7, 0.0, 127)],
)
def test_census_counts(n, omega, expected):
    assert count_real_eigenpairs(n, omega).total == expected
    assert count_by_numpy_roots(n, omega) == expected


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_census_monotone_and_limits(n):
    thr = omega_thresholds(n)
    grid = np.linspace(0, 1.5 * thr[-1], 61)
    grid = grid[np.abs(grid - 1 / n**2) > 1e-9]  # see test_census_dip_at_uniform_coincidence
    counts = [count_real_eigenpairs(n, w).total for w in grid]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert count_real_eigenpairs(n, 0.5 * thr[0]).total == 2**n - 1
    assert count_real_eigenpairs(n, 1.01 * thr[-1]).total == 1


@pytest.mark.parametrize("n,dip", [(5, 16), (4, 5), (3, 4)])
def test_census_dip_at_uniform_coincidence(n, dip):
    # at omega = 1/n^2 one root of every size is alpha = 1, so those pairs coincide with the uniform vector
    c = count_real_eigenpairs(n, 1 / n**2)
    assert c.total == dip == count_by_numpy_roots(n, 1 / n**2)
    T = t_omega(n, 1 / n**2)
    assert classify(T, np.ones(n) / math.sqrt(n)).rank_deficient


@pytest.mark.parametrize("n", [3, 5, 7])
def test_census_formula_odd_n(n):
    c = count_real_eigenpairs(n, 0.3 * omega_thresholds(n)[0])
    assert c.total == 1 + sum(c.roots_per_size[s] * math.comb(n, s) for s in c.roots_per_size)


@pytest.mark.parametrize("n,omega", [(3, 0.125), (4, 0.03), (5, 0.02), (5, 0.05), (6, 0.01), (4, 1 / 16)])
def test_oracle_pairs_are_eigenpairs(n, omega):
    T = t_omega(n, omega)
    _, pairs = omega_eigenpair_oracle(n, omega)
    for p in pairs:
        lam, res, ok = validate_eigenpair(T, p.x, tol=1e-10)
        assert ok and lam == pytest.approx(p.eigenvalue, abs=1e-12)
        assert np.linalg.norm(p.x) == pytest.approx(1.0, abs=1e-14)
    for p, q in itertools.combinations(pairs, 2):
        assert not same_eigenpair(p.x, q.x)


def test_uniform_vector_always_present():
    for omega in (0.0, 0.03, 0.2):
        _, pairs = omega_eigenpair_oracle(4, omega)
        assert any(same_eigenpair(p.x, np.ones(4) / 2) for p in pairs)


def test_threshold_closed_form_n3():
    entries, pairs = omega_eigenpair_oracle(3, 0.125)
    size1 = [e for e in entries if e.size == 1]
    assert len(size1) == 1 and size1[0].threshold and size1[0].alpha == pytest.approx(2.0)
    x = np.array([2.0, 1.0, 1.0]) / np.sqrt(6)
    hit = [p for p in pairs if same_eigenpair(p.x, x)]
    assert len(hit) == 1 and hit[0].eigenvalue == pytest.approx(math.sqrt(1.5), abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_threshold_pairs_closed_form_and_rank_deficient(n):
    l = n // 2
    for i, omega in enumerate(omega_thresholds(n)):
        s = l - i
        T = t_omega(n, omega)
        _, pairs = omega_eigenpair_oracle(n, omega)
        for A in itertools.combinations(range(n), s):
            x = np.full(n, float(s))
            x[list(A)] = n - s
            x *= math.sqrt(1.0 / (n * s * (n - s)))
            # for even n and s = n/2 the closed form is the uniform vector
            hit = [p for p in pairs if same_eigenpair(p.x, x, tol=1e-7)]
            assert len(hit) == 1
            assert hit[0].eigenvalue == pytest.approx(math.sqrt(n / (s * (n - s))), abs=1e-7)
            assert classify(T, hit[0].x).rank_deficient


@pytest.mark.parametrize("n", [3, 4, 5])
def test_zero_omega_pairs(n):
    _, pairs = omega_eigenpair_oracle(n, 0.0)
    for p in pairs:
        s = int(np.sum(np.abs(p.x) > 1e-12))
        assert p.eigenvalue == pytest.approx(1 / math.sqrt(s), abs=1e-14)
        np.testing.assert_allclose(p.x[np.abs(p.x) > 1e-12], 1 / math.sqrt(s), atol=1e-15)


def test_random_tensor_deterministic_and_symmetric():
    a = random_gaussian_symmetric(4, 3, 42)
    b = random_gaussian_symmetric(4, 3, 42)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, random_gaussian_symmetric(4, 3, 43).data)


def test_random_tensor_entry_statistics():
    m, n = 3, 39
    T = random_gaussian_symmetric(m, n, 7)
    vals = np.array([T.get(*idx) for idx in itertools.combinations_with_replacement(range(n), m)])
    assert len(vals) >= 10**4
    assert abs(vals.mean()) <= 4 / math.sqrt(len(vals))
    assert vals.std() == pytest.approx(1.0, abs=0.05)


def test_pairwise_quartic_examples():
    T = degenerate_example("pairwise-quartic")
    lam, res, ok = validate_eigenpair(T, np.array([1, 1, 0, 0, -1, -1]) / 2, tol=1e-10)
    assert ok and lam == pytest.approx(4.5, abs=1e-10)
    one = np.ones(6) / math.sqrt(6)
    lam, res, ok = validate_eigenpair(T, one, tol=1e-10)
    assert ok and abs(lam) <= 1e-12
    rep = classify(T, one)
    assert np.abs(rep.hp_spectrum).max() <= 1e-10 and rep.rank == 0


def test_motzkin_zero_eigenpairs():
    """The six zero-eigenvalue classes: +-e1, +-e2 and the four (+-1,+-1,1)/sqrt3."""
    T = degenerate_example("motzkin")
    zero = [np.eye(3)[0], np.eye(3)[1]] + [np.array([1.0, a, b]) / math.sqrt(3) for a in (1, -1) for b in (1, -1)]
    ranks = []
    for x in zero:
        lam, res, ok = validate_eigenpair(T, x, tol=1e-12)
        assert ok and abs(lam) <= 1e-14
        ranks.append(classify(T, x).rank)
    assert ranks == [1, 1, 2, 2, 2, 2]


def test_unknown_example():
    with pytest.raises(ValueError):
        degenerate_example("c")
