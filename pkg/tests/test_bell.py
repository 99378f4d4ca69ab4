from fractions import Fraction
from functools import lru_cache
from math import comb

import pytest
import sympy as sp
from sympy.functions.combinatorial.numbers import stirling

from utils.bell import BellArgs, bell_terms, compose_egf, partial_bell
from utils.config import Defaults
from utils.errors import DomainError


# === Partial Bell polynomials ===

def test_all_ones_partition():
    assert partial_bell(BellArgs(4, 4, (2,))) == 16


def test_two_parts_of_three():
    assert partial_bell(BellArgs(3, 2, (1, 1))) == 3


def test_single_part():
    assert partial_bell(BellArgs(5, 1, (1, 2, 3, 4, 7))) == 7


def test_against_sympy(rng):
    for _ in range(15):
        n = int(rng.integers(1, 10))
        k = int(rng.integers(1, n + 1))
        x = [int(v) for v in rng.integers(-3, 4, size=n - k + 1)]
        assert partial_bell(BellArgs(n, k, tuple(x))) == sp.bell(n, k, x)


def test_stirling_numbers_of_second_kind():
    # B_{n,k}(1,1,...) = S(n,k)
    for n in range(1, 9):
        for k in range(1, n + 1):
            assert partial_bell(BellArgs(n, k, (1,) * (n - k + 1))) == stirling(n, k)


@lru_cache(maxsize=None)
def bell_by_recurrence(n, k, x):
    """B_{n,k} = sum_i C(n-1, i-1) x_i B_{n-i,k-1}."""
    if n == 0 or k == 0:
        return 1 if n == k else 0
    return sum(comb(n - 1, i - 1) * x[i - 1] * bell_by_recurrence(n - i, k - 1, x) for i in range(1, n - k + 2))


def test_against_recurrence(rng):
    x = tuple(int(v) for v in rng.integers(-4, 5, size=12))
    for n in range(1, 13):
        for k in range(1, n + 1):
            assert partial_bell(BellArgs(n, k, x[:n - k + 1])) == bell_by_recurrence(n, k, x)


def test_homogeneity(rng):
    for _ in range(10):
        n = int(rng.integers(1, 11))
        k = int(rng.integers(1, n + 1))
        a = Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 5))) * (1 if rng.random() < 0.5 else -1)
        b = Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 5)))
        x = tuple(Fraction(int(v), 3) for v in rng.integers(-6, 7, size=n - k + 1))
        scaled = tuple(a * b ** h * x_h for h, x_h in enumerate(x, start=1))
        assert partial_bell(BellArgs(n, k, scaled)) == a ** k * b ** n * partial_bell(BellArgs(n, k, x))


def test_term_coefficients_sum_to_partition_count():
    # every set partition of {1..n} into k blocks is counted once
    assert sum(c for c, _ in bell_terms(6, 3)) == 90


@pytest.mark.parametrize("n,k,x", [(3, 0, ()), (3, 4, ()), (4, 2, (1, 1))])
def test_bad_arguments(n, k, x):
    with pytest.raises(DomainError):
        BellArgs(n, k, x)


def test_order_cap():
    n = Defaults.BELL_MAX_N + 1
    with pytest.raises(DomainError):
        bell_terms(n, n)


# === Faa di Bruno composition ===

def test_identity_outer_function():
    g = [0, 1, 2, 3, 5]
    assert compose_egf([0, 1], g) == g


def test_exp_of_x():
    assert compose_egf([1] * 8, [0, 1] + [0] * 6) == [1] * 8


def test_square_of_polynomial():
    x = sp.Symbol("x")
    inner = x + x ** 2 / 2
    expected = [sp.diff(inner ** 2, x, n).subs(x, 0) for n in range(5)]
    # f(y) = y^2 at y = g(0) = 0: f = 0, f' = 0, f'' = 2
    assert compose_egf([0, 0, 2], [0, 1, 1, 0, 0]) == expected
    assert expected[2] == 2 and expected[3] == 6


def test_composition_against_sympy():
    x = sp.Symbol("x")
    inner = sp.sin(x) + 1
    outer = sp.exp
    N = 6
    g = [sp.diff(inner, x, n).subs(x, 0) for n in range(N + 1)]
    f_derivs = [sp.exp(1)] * (N + 1)
    expected = [sp.diff(outer(inner), x, n).subs(x, 0) for n in range(N + 1)]
    got = compose_egf(f_derivs, g)
    for a, b in zip(got, expected):
        assert float(a) == pytest.approx(float(b))


def test_short_inner_series():
    with pytest.raises(DomainError):
        compose_egf([1, 1], [0, 1], N=4)


def test_no_float_drift_in_exact_mode():
    value = partial_bell(BellArgs(10, 4, tuple(range(1, 8))))
    assert isinstance(value, int)
    assert value == sp.bell(10, 4, list(range(1, 8)))
