from fractions import Fraction

import pytest

from utils.errors import NonConvergentSum, OutsideDomain, ParamMismatch, Unsupported
from utils.exponentials import exp_series_report
from utils.ward_series import (ENTIRE, POINT_ONLY, ConvergenceClass, TruncatedEgf, classify_series, egf_add,
                               egf_eval, egf_mul, geometric_tail)


# === Ring operations ===

def test_add_zero(worked):
    f = TruncatedEgf(worked, (1, 2, 3))
    assert (f + 0).coeffs == f.coeffs


def test_add_coefficientwise(worked):
    ones = TruncatedEgf(worked, (1,) * 5)
    assert egf_add(ones, ones).coeffs == (2,) * 5


def test_times_one(worked):
    f = TruncatedEgf(worked, (Fraction(1, 2), 3, -1, 7))
    assert (f * TruncatedEgf.constant(worked, 1, 3)).coeffs == f.coeffs


def test_exp_times_exp_prime_of_minus_z(worked):
    N = 12
    exp = TruncatedEgf.exponential(worked, N, a=1, u=worked.phi)
    exp_prime = TruncatedEgf.exponential(worked, N, a=-1, u=worked.phi_prime)
    assert egf_mul(exp, exp_prime).coeffs == (1,) + (0,) * N


def test_exp_identity_in_float_mode(fibonacci):
    N = 8
    product = egf_mul(TruncatedEgf.exponential(fibonacci, N, a=1, u=fibonacci.phi),
                      TruncatedEgf.exponential(fibonacci, N, a=-1, u=fibonacci.phi_prime))
    weights = product.power_coefficients()
    assert weights[0] == pytest.approx(1)
    for w in weights[1:]:
        assert w == pytest.approx(0, abs=1e-10)


def test_double_root_is_classical(degenerate):
    one_plus_x = TruncatedEgf(degenerate, (1, 1, 0))
    assert (one_plus_x ** 2).coeffs == (1, 2, 2)
    assert (one_plus_x ** 2).power_coefficients() == [1, 2, 1]


def test_variable_series_evaluates_to_x(worked):
    x = TruncatedEgf.variable(worked, 4)
    assert x(0.37) == pytest.approx(0.37)
    assert (x * x).power_coefficients()[2] == 1


def test_scaled_series(worked):
    f = TruncatedEgf.exponential(worked, 6)
    assert f.scaled(2).coeffs == tuple(2 ** n for n in range(7))


def test_params_must_match(worked, pell):
    with pytest.raises(ParamMismatch):
        TruncatedEgf(worked, (1, 1)) + TruncatedEgf(pell, (1, 1))


def test_series_division_unsupported(worked):
    f = TruncatedEgf(worked, (1, 1))
    with pytest.raises(Unsupported):
        f / f
    assert (f / 2).coeffs == (Fraction(1, 2), Fraction(1, 2))


def test_mixed_orders_truncate(worked):
    short, long = TruncatedEgf(worked, (1, 1)), TruncatedEgf(worked, (1, 1, 1, 1))
    assert (short + long).N == 1
    assert long.truncate(2).N == 2


def test_from_dict_reads_exact_strings(worked):
    f = TruncatedEgf(worked, (Fraction(1, 3), 2))
    data = f.to_dict()
    assert data["coeffs"] == ["1/3", 2]
    assert TruncatedEgf.from_dict(data).coeffs == f.coeffs


# === Convergence classes ===

def test_entire_below_phi(fibonacci):
    assert classify_series(fibonacci, 1, 5) == ENTIRE


def test_disk_at_phi(fibonacci):
    region = classify_series(fibonacci, fibonacci.phi, 1)
    assert region.kind == "Disk"
    assert region.radius == pytest.approx(1 / (1 - fibonacci.q))


def test_point_only_above_double_root(degenerate):
    assert classify_series(degenerate, 1.5, 1) == POINT_ONLY
    assert classify_series(degenerate, 1, 1) == ENTIRE


def test_expanding_branch_uses_phi_prime(expanding):
    assert classify_series(expanding, 1, 1) == ENTIRE
    region = classify_series(expanding, 2, 1)
    assert region.radius == pytest.approx(1 / abs(1 / expanding.q - 1))
    assert classify_series(expanding, 3, 1) == POINT_ONLY


def test_disk_admits():
    disk = ConvergenceClass.disk(2.0)
    assert disk.admits(1.9) and not disk.admits(-2.0)
    assert ConvergenceClass.disk(float("inf")) == ENTIRE
    assert POINT_ONLY.admits(0) and not POINT_ONLY.admits(1e-9)


# === Evaluation ===

def test_eval_at_zero(worked):
    f = TruncatedEgf(worked, (Fraction(7, 2), 1, 1))
    assert egf_eval(f, Fraction(1, 2), 0).value == 3.5


def test_eval_u_zero(worked):
    f = TruncatedEgf.exponential(worked, 10)
    assert egf_eval(f, 0, 0.25).value == pytest.approx(1.25)


def test_eval_exp_series(worked):
    u = Fraction(1, 2)
    short = egf_eval(TruncatedEgf.exponential(worked, 30), u, 1)
    long = egf_eval(TruncatedEgf.exponential(worked, 60), u, 1)
    assert short.tail_bound < 1e-12
    assert short.value == pytest.approx(long.value, rel=1e-12)
    assert short.value == pytest.approx(exp_series_report(worked, u, 1).value, rel=1e-12)


def test_eval_outside_domain(worked):
    with pytest.raises(OutsideDomain):
        egf_eval(TruncatedEgf.exponential(worked, 10), 4, 1)


def test_geometric_tail():
    assert geometric_tail([1.0, 0.5, 0.25], 2) == pytest.approx(0.25)
    assert geometric_tail([1.0], 0) == 0.0
    with pytest.raises(NonConvergentSum):
        geometric_tail([1.0, 2.0, 4.0], 2)


def test_eval_on_the_root_reads_alpha_from_coefficients(fibonacci):
    ones = TruncatedEgf(fibonacci, (1,) * 21)
    with pytest.raises(OutsideDomain):
        egf_eval(ones, fibonacci.phi, 5.0)
    inside = egf_eval(ones, fibonacci.phi, 0.3)
    assert inside.value > 1
    assert inside.tail_bound < 1e-3


def test_eval_on_the_root_with_given_alpha(fibonacci):
    ones = TruncatedEgf(fibonacci, (1,) * 21)
    with pytest.raises(OutsideDomain):
        egf_eval(ones, fibonacci.phi, 0.5, alpha=2)


def test_eval_on_the_root_of_a_polynomial(worked):
    constant = TruncatedEgf.constant(worked, 3, 6)
    assert egf_eval(constant, worked.phi, 100).value == 3


# === Ring laws ===

def _random_series(params, rng, N=6):
    return TruncatedEgf(params, tuple(Fraction(int(k), int(d)) for k, d in
                                      zip(rng.integers(-5, 6, N + 1), rng.integers(1, 4, N + 1))))


def test_product_is_associative_and_commutative(worked, rng):
    for _ in range(5):
        f, g, h = (_random_series(worked, rng) for _ in range(3))
        assert ((f * g) * h).coeffs == (f * (g * h)).coeffs
        assert (f * g).coeffs == (g * f).coeffs


def test_product_distributes_over_sum(worked, rng):
    for _ in range(5):
        f, g, h = (_random_series(worked, rng) for _ in range(3))
        assert (f * (g + h)).coeffs == (f * g + f * h).coeffs
