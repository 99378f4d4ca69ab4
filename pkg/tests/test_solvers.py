import math
from fractions import Fraction

import pytest

from utils.config import Defaults
from utils.core_params import make_params
from utils.errors import DegenerateQ, DomainError, OutsideDomain
from utils.exponentials import exp_series_report, exp_st
from utils.expr_parser import parse_expr
from utils.operators import QPeriodic
from utils.sequences import fibotorial, st_number
from utils.solvers import (EquationSpec, Region, RisingFactor, ambartsumian, approximation_error_bound,
                           bell_autonomous_solve, classify_E, e_q_product, e_q_series, existence_interval,
                           lipschitz_estimate, modulated_residual, modulated_solution, pantograph_exponential,
                           residual_lattice, solve_linear_pantograph, successive_approximation,
                           two_term_pantograph)
from utils.ward_series import ENTIRE, POINT_ONLY, TruncatedEgf

wave = lambda y: math.sin(2 * math.pi * y)
half = Fraction(1, 2)


# === Helpers ===

def test_rising_factor_at_u_one():
    assert RisingFactor(2, 3, 1, 4).value == 625
    assert RisingFactor(-1, half, half, 2).value == Fraction(3, 8)
    with pytest.raises(DomainError):
        RisingFactor(1, 1, 1, -1)


def test_residual_lattice(worked, degenerate):
    assert residual_lattice(worked, 1, points=4) == pytest.approx([1 / 3, 2 / 9, 4 / 27, 8 / 81])
    assert residual_lattice(degenerate, 1, points=3) == pytest.approx([1, 0.5, 0.25])


# === Linear pantograph ===

def test_linear_worked(worked):
    report = solve_linear_pantograph(worked, 1, half, 1, N=24)
    assert report.series.coeffs == TruncatedEgf.exponential(worked, 24, 1, half).coeffs
    assert report.max_residual < Defaults.RESIDUAL_LINEAR
    assert report.region.convergence == ENTIRE
    assert report.to_dict()["region"]["equation"] == "linear"


def test_linear_a_zero_is_constant(worked):
    report = solve_linear_pantograph(worked, 0, half, 3, N=6)
    assert report.series.coeffs == (3, 0, 0, 0, 0, 0, 0)
    assert report.lattice_values == pytest.approx([3.0] * len(report.lattice))


def test_linear_at_phi(worked):
    report = solve_linear_pantograph(worked, 1, 3, 1, N=24)
    assert report.region.convergence.kind == "Disk"
    assert report.max_residual < Defaults.RESIDUAL_LINEAR


def test_linear_point_only(worked):
    with pytest.raises(OutsideDomain):
        solve_linear_pantograph(worked, 1, 4, 1)


# === q-periodic modulations ===

def test_constant_modulation_scales_exp(worked):
    for c in (0.0, 1.0, 2.5):
        G = QPeriodic.constant(worked, c)
        assert modulated_solution(worked, 1, half, G, 0.7) == pytest.approx(c * exp_st(worked, half, 0.7), rel=1e-12)


def test_wave_modulation_is_bounded(worked):
    G = QPeriodic(wave, worked)
    for x in (0.1, 0.5, 0.9):
        assert abs(modulated_solution(worked, 1, half, G, x)) <= exp_st(worked, half, x) + 1e-12


def test_modulation_needs_positive_x(worked):
    with pytest.raises(DomainError):
        modulated_solution(worked, 1, half, QPeriodic.constant(worked, 1.0), 0)


@pytest.mark.parametrize("G", [
    lambda p: QPeriodic.constant(p, 1.0),
    lambda p: QPeriodic(wave, p),
    lambda p: QPeriodic(lambda y: math.cos(2 * math.pi * y) + 2, p),
])
def test_modulated_residual(worked, G):
    report = modulated_residual(worked, 1, half, G(worked))
    assert report.max_residual < Defaults.RESIDUAL_MODULATED
    assert report.series is None


# === E-function and its regions ===

def test_classify_worked(worked):
    region = classify_E(worked, half, 1, 1)
    assert region.label == "S1"
    assert region.convergence == ENTIRE
    assert region.to_dict()["domain"] == "entire"


def test_classify_on_the_root(worked):
    region = classify_E(worked, 3, 1, 1)
    assert region.label == "S8"
    assert region.convergence.radius == pytest.approx(3.0)
    assert region.meta["branch"] == "|u|=|root|"


def test_classify_unit_root():
    p = make_params(Fraction(4, 3), Fraction(-1, 3))
    assert classify_E(p, 1, 1, -1).label == "S7"
    nine = classify_E(p, 1, 1, 1)
    assert nine.label == "S9"
    assert nine.convergence.radius == pytest.approx(0.75)
    three = classify_E(p, Fraction(1, 3), 2, 1)
    assert three.label == "S3"
    assert three.convergence.radius == pytest.approx(0.75)


def test_classify_point_only():
    p = make_params(Fraction(3, 4), Fraction(-1, 8))
    region = classify_E(p, Fraction(1, 4), 1, 1)
    assert region.label == "S4"
    assert region.convergence == POINT_ONLY


def test_classify_reductions(worked):
    b_only = classify_E(worked, 3, 0, 2)
    assert b_only.label is None
    assert b_only.convergence.radius == pytest.approx(1.5)
    assert b_only.meta["reduction"] == "exp(b z, u)"
    a_only = classify_E(worked, 4, 2, 0)
    assert a_only.convergence == ENTIRE


def test_unclassified_is_a_result(worked):
    region = classify_E(worked, 4, 1, 1)
    assert not region.classified
    assert not region.admits(0.1)
    assert region.to_dict()["domain"] == "unclassified"


def test_table_restriction(worked):
    assert classify_E(worked, half, 1, 1, table="T").label == "T1"


def test_classify_guards(worked):
    with pytest.raises(DomainError):
        classify_E(worked, half, 0, 0)
    with pytest.raises(DomainError):
        classify_E(worked, 0, 1, 1)


def test_region_to_dict_for_reduction():
    assert Region(None, ENTIRE, {"reduction": "exp(a z)"}).to_dict()["region"] is None


REGION_CASES = [
    # (s, t), u, a, b, table, label
    ((5, -6), half, 1, 1, None, "S1"),
    ((-1, 2), half, 1, 1, None, "S2"),
    ((Fraction(4, 3), Fraction(-1, 3)), Fraction(1, 3), 2, 1, None, "S3"),
    ((Fraction(3, 4), Fraction(-1, 8)), Fraction(1, 4), 1, 1, None, "S4"),
    ((Fraction(-3, 4), Fraction(-1, 8)), Fraction(1, 8), 1, 1, None, "S5"),
    ((-5, -6), 2, 1, 1, None, "S6"),
    ((Fraction(4, 3), Fraction(-1, 3)), 1, 1, -1, None, "S7"),
    ((5, -6), 3, 1, 1, None, "S8"),
    ((Fraction(4, 3), Fraction(-1, 3)), 1, 1, 1, None, "S9"),
    ((5, -6), half, 1, 1, "T", "T1"),
    ((3, -2), half, 1, 1, "T", "T2"),
    ((-half, half), half, 1, 1, None, "T3"),
    ((Fraction(-1, 4), Fraction(1, 8)), Fraction(1, 4), 1, 1, None, "T4"),
    ((Fraction(3, 4), Fraction(-1, 8)), Fraction(1, 8), 1, 1, "T", "T5"),
    ((5, -6), 2, 1, 1, "T", "T6"),
    ((-half, half), 1, 1, -1, None, "T7"),
    ((-5, -6), 3, 1, 1, None, "T8"),
    ((-half, half), 1, 1, 1, None, "T9"),
]


@pytest.mark.parametrize("pair,u,a,b,table,label", REGION_CASES, ids=[case[-1] for case in REGION_CASES])
def test_every_table_row(pair, u, a, b, table, label):
    assert classify_E(make_params(*pair), u, a, b, table=table).label == label


@pytest.mark.parametrize("pair,u,a,b,table,label", REGION_CASES, ids=[case[-1] for case in REGION_CASES])
def test_region_matches_coefficient_ratios(pair, u, a, b, table, label):
    # c_{n+1}/c_n = (a + b u^n)/{n+1} tends to 1/radius
    p = make_params(*pair)
    region = classify_E(p, u, a, b, table=table)
    n = 60
    ratio = float(abs((a + b * Fraction(u) ** n) / st_number(p, n + 1)))
    if region.convergence.kind == "Entire":
        assert ratio < 1e-6
    elif region.convergence.kind == "Disk":
        assert ratio == pytest.approx(1 / region.convergence.radius, rel=1e-6)
    else:
        assert ratio > 1e6


def test_disk_radii_off_the_worked_pair():
    reflected = make_params(-5, -6)
    assert classify_E(reflected, 3, 1, 1).convergence.radius == pytest.approx(3.0)
    mixed = make_params(-half, half)
    assert classify_E(mixed, half, 1, 1).convergence.radius == pytest.approx(2 / 3)
    assert classify_E(mixed, 1, 1, 1).convergence.radius == pytest.approx(1 / 3)


# === Two-term pantograph ===

def test_two_term_worked(worked):
    report = two_term_pantograph(worked, 1, 1, half, N=24)
    assert report.region.label == "S1"
    assert report.series.coeffs[:4] == (1, 2, Fraction(3), Fraction(3) * Fraction(5, 4))
    assert report.max_residual < Defaults.RESIDUAL_LINEAR


def test_two_term_at_u_one(worked):
    report = two_term_pantograph(worked, 1, 1, 1, N=8)
    assert report.series.coeffs == tuple(2 ** n for n in range(9))


def test_two_term_without_delay(worked):
    assert two_term_pantograph(worked, 3, 0, half, N=5).series.coeffs == tuple(3 ** n for n in range(6))


def test_two_term_point_only(worked):
    with pytest.raises(OutsideDomain):
        two_term_pantograph(worked, 0, 1, 4)


def test_pantograph_exponential_matches_series(worked):
    assert pantograph_exponential(worked, 1, 1, half, 0).value == 1
    value = pantograph_exponential(worked, 1, 1, half, 0.5).value
    assert value == pytest.approx(two_term_pantograph(worked, 1, 1, half, N=30).series(0.5), rel=1e-10)


# === E_q products ===

def test_e_q_telescopes():
    q = half
    assert e_q_product(q, 1, -q, 1) == pytest.approx(2, rel=1e-12)


def test_e_q_at_zero():
    assert e_q_product(Fraction(1, 3), 1, 2, 0) == pytest.approx(1)


def test_e_q_reflection():
    q = Fraction(1, 3)
    assert e_q_product(q, 1, 2, 0.1) * e_q_product(q, 2, 1, -0.1) == pytest.approx(1, rel=1e-12)


def test_e_q_inverse_base():
    q = Fraction(1, 3)
    assert e_q_product(1 / q, 1, 2, 0.1) == pytest.approx(e_q_product(q, 2, 1, 0.1), rel=1e-14)


def test_e_q_product_matches_series():
    q = Fraction(1, 3)
    assert e_q_product(q, 1, 2, 0.1) == pytest.approx(e_q_series(q, 1, 2, 0.1).value, rel=1e-9)


def test_e_q_guards():
    for q in (0, 1, -1):
        with pytest.raises(DegenerateQ):
            e_q_product(q, 1, 1, 0.1)


# === Ambartsumian ===

def test_ambartsumian_coefficients(worked):
    report = ambartsumian(worked, 2, 1, N=12)
    weights = report.series.power_coefficients()
    assert weights[:3] == [1, Fraction(-1, 2), Fraction(3, 40)]
    assert report.max_residual < Defaults.RESIDUAL_LINEAR
    assert report.extras["v"] == 2


def test_ambartsumian_large_v():
    w = Fraction(1, 10 ** 6)
    assert float(RisingFactor(-1, w, w, 3).value) == pytest.approx(-1, rel=1e-5)


def test_ambartsumian_zero_initial_value(worked):
    assert set(ambartsumian(worked, 2, 0, N=6).series.coeffs) == {0}


@pytest.mark.parametrize("v", [1, half, -2])
def test_ambartsumian_needs_v_above_one(worked, v):
    with pytest.raises(DomainError):
        ambartsumian(worked, v, 1)


# === Bell-polynomial solver ===

def test_bell_linear_rhs_is_exponential(worked):
    report = bell_autonomous_solve(worked, parse_expr("2*y"), half, 1, N=8)
    assert report.series.coeffs == TruncatedEgf.exponential(worked, 8, 2, half).coeffs


def test_bell_constant_rhs(worked):
    report = bell_autonomous_solve(worked, parse_expr("3"), half, 1, N=4)
    assert report.series.coeffs == (1, 3, 0, 0, 0)


def test_bell_quadratic_residual(worked):
    report = bell_autonomous_solve(worked, parse_expr("yu^2"), half, half, N=24)
    assert report.max_residual < Defaults.RESIDUAL_BELL
    assert report.series.coeffs[1] == Fraction(1, 4)


def test_bell_rejects_explicit_x(worked):
    with pytest.raises(DomainError):
        bell_autonomous_solve(worked, parse_expr("x*y"), half, 1)


# === Successive approximation ===

def test_iterates_are_exp_partial_sums(worked):
    spec = EquationSpec(worked, half, parse_expr("yu"), L1=0.0, L2=1.0, M=2.0)
    report = successive_approximation(spec, iterations=4, N=8)
    expected = TruncatedEgf.exponential(worked, 8, 1, half).coeffs
    assert report.series.coeffs == expected[:5] + (0,) * 4
    assert report.extras["mode"] == "series"
    assert report.extras["regime"] == "T"
    assert report.extras["binding"] == "alpha"
    assert report.extras["interval"] == pytest.approx(0.25)
    assert not report.extras["estimated"]
    assert len(report.extras["differences"]) == 4
    assert report.error_bound > 0


def test_zero_rhs_keeps_the_constant(worked):
    spec = EquationSpec(worked, half, parse_expr("0"), L1=0.0, L2=0.0, M=0.0)
    report = successive_approximation(spec, iterations=3, N=5)
    assert report.series.coeffs == (1, 0, 0, 0, 0, 0)
    assert report.error_bound == 0
    assert report.region is None


def test_iterates_match_rising_factors(worked):
    spec = EquationSpec(worked, half, parse_expr("2*y + yu"), L1=2.0, L2=1.0, M=4.0)
    report = successive_approximation(spec, iterations=6, N=10)
    assert report.series.coeffs[:7] == tuple(RisingFactor(2, 1, half, n).value for n in range(7))
    assert report.region.label == "T1"


@pytest.mark.parametrize("rhs,L2,M", [("yu^2", 4.0, 4.0), ("3*yu", 3.0, 6.0)])
def test_iterates_agree_with_bell_solver(worked, rhs, L2, M):
    spec = EquationSpec(worked, half, parse_expr(rhs), L1=0.0, L2=L2, M=M)
    iterated = successive_approximation(spec, iterations=9, N=8).series.coeffs
    bell = bell_autonomous_solve(worked, parse_expr(rhs), half, 1, N=8).series.coeffs
    assert [float(c) for c in iterated] == pytest.approx([float(c) for c in bell], rel=1e-9)


def test_iteration_guards(worked):
    with pytest.raises(DomainError):
        successive_approximation(EquationSpec(worked, half, parse_expr("y"), init=(1, 1), L1=1.0, L2=0.0, M=1.0))
    with pytest.raises(OutsideDomain):
        successive_approximation(EquationSpec(worked, 4, parse_expr("y"), L1=1.0, L2=0.0, M=1.0))
    with pytest.raises(DomainError):
        EquationSpec(worked, 0, parse_expr("y"))


# === Bounds ===

def test_error_bound_without_delay_term(worked):
    M, L1, a, n = 1.0, 1.0, 0.5, 3
    expected = M * a ** n * L1 ** (n - 1) / float(fibotorial(worked, 1, n)) * exp_series_report(worked, 1, L1 * a).value
    assert approximation_error_bound(worked, M, L1, 0.0, half, a, n - 1) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("rhs,L1,L2,M,exact", [
    ("yu", 0.0, 1.0, 2.0, lambda x: exp_st(make_params(5, -6), half, x, tol=1e-20)),
    ("2*y + yu", 2.0, 1.0, 6.0, lambda x: pantograph_exponential(make_params(5, -6), 2, 1, half, x, tol=1e-20).value),
])
def test_error_bound_covers_true_error(worked, rhs, L1, L2, M, exact):
    spec = EquationSpec(worked, half, parse_expr(rhs), L1=L1, L2=L2, M=M)
    for iterations in range(1, 6):
        report = successive_approximation(spec, iterations=iterations, N=12)
        width = report.extras["interval"]
        error = max(abs(exact(x) - report.series(x)) for x in report.lattice + [width, -width])
        bound = approximation_error_bound(worked, M, L1, L2, half, 1, iterations, 12)
        assert bound == pytest.approx(report.error_bound)
        assert error <= bound


def test_error_bound_decreases(worked):
    bounds = [approximation_error_bound(worked, 1.0, 1.0, 1.0, half, 0.5, p) for p in range(1, 6)]
    assert bounds[0] > 0
    assert all(later < earlier for earlier, later in zip(bounds, bounds[1:]))


def test_error_bound_guards(worked):
    assert approximation_error_bound(worked, 0.0, 1.0, 1.0, half, 0.5, 2) == 0
    with pytest.raises(DomainError):
        approximation_error_bound(worked, 1.0, -1.0, 1.0, half, 0.5, 2)


def test_lipschitz_estimate():
    estimate = lipschitz_estimate(parse_expr("2*y + 3*yu"), 1, 0.5, 1)
    assert estimate.L1 == pytest.approx(2 * Defaults.LIPSCHITZ_SAFETY)
    assert estimate.L2 == pytest.approx(3 * Defaults.LIPSCHITZ_SAFETY)
    assert estimate.M == pytest.approx(10)


def test_existence_interval():
    by_alpha = existence_interval(1, 1, 2.0, 1.0, 1.0, 3, Fraction(1, 3))
    assert by_alpha.binding == "alpha"
    assert by_alpha.alpha == pytest.approx(0.5)
    assert by_alpha.half_width == pytest.approx(1 / 6)
    by_lipschitz = existence_interval(1, 1, 0.1, 4.0, 4.0, 1, 1)
    assert by_lipschitz.binding == "lipschitz"
    assert by_lipschitz.half_width == pytest.approx(0.25)
    assert existence_interval(2, 1, 0, 0.0, 0.0, 1, 1).alpha == 2
