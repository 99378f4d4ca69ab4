"""
The (s,t)-integral on q-geometric lattices.

For |q| < 1:
    int_a^b f d_{s,t} = (1-q) sum_n [b f(b q^n/phi) - a f(a q^n/phi)] q^n
For |q| > 1 the lattice r q^{-n}/phi' is used with weight (1 - 1/q) q^{-n}.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from utils.config import Defaults
from utils.core_params import StParams
from utils.errors import DegenerateQ, DomainError, NonConvergentSum
from utils.numeric import Number, is_exact
from utils.operators import QPeriodic, st_derivative
from utils.ward_series import TruncatedEgf

logger = logging.getLogger('integration')

RealFunction = Callable[[float], float]


@dataclass(frozen=True)
class QLattice:
    endpoint: Number
    params: StParams
    points: np.ndarray


def _lattice_geometry(p: StParams) -> Tuple[Number, Number, Number]:
    """(ratio, scale, weight) such that points are r ratio^n scale."""
    if p.degenerate_q:
        raise DegenerateQ("the (s,t)-integral needs q != 1")
    if p.contracting:
        return p.q, 1 / p.phi, 1 - p.q
    return p.q_inverse, 1 / p.phi_prime, 1 - p.q_inverse


def q_lattice(r: Number, p: StParams, n_cut: int = 64) -> QLattice:
    ratio, scale, _ = _lattice_geometry(p)
    exact = is_exact(r, ratio, scale)
    points = [r * ratio ** n * scale for n in range(n_cut + 1)]
    return QLattice(r, p, np.array(points, dtype=object if exact else float))


def st_integral(f: RealFunction, a: Number, b: Number, p: StParams,
                tol: float = Defaults.TOL, max_terms: int = Defaults.INTEGRAL_MAX_TERMS) -> float:
    """
    Lattice sum of f over [a, b].

    Stops once Defaults.INTEGRAL_STOP_RUN consecutive terms fall below
    tol (1 - |ratio|).

    Raises:
        DegenerateQ: q = 1
        NonConvergentSum: max_terms terms did not meet tol
    """
    ratio, scale, weight = _lattice_geometry(p)
    ratio, scale, weight = float(ratio), float(scale), float(weight)
    a, b = float(a), float(b)
    threshold = tol * (1 - abs(ratio))

    terms = []
    power, quiet = 1.0, 0
    for n in range(max_terms):
        term = b * f(b * power * scale) if b != 0 else 0.0
        if a != 0:
            term -= a * f(a * power * scale)
        term *= power
        terms.append(term)
        quiet = quiet + 1 if abs(term) < threshold else 0
        if quiet >= Defaults.INTEGRAL_STOP_RUN:
            logger.debug(f"st_integral: [{a}, {b}] converged after {n + 1} terms")
            return weight * math.fsum(terms)
        power *= ratio
    raise NonConvergentSum(f"(s,t)-integral over [{a}, {b}] did not reach tol={tol} in {max_terms} terms")


def series_antiderivative(f: TruncatedEgf) -> TruncatedEgf:
    """Shift coefficients up: a'_0 = 0, a'_{n+1} = a_n."""
    return TruncatedEgf(f.params, (0,) + f.coeffs)


def fundamental_theorem_residual(f: RealFunction, a: Number, b: Number, p: StParams,
                                 tol: float = Defaults.TOL) -> float:
    """|int_a^b Df - (f(b) - f(a))|."""
    derivative = lambda x: float(st_derivative(f, p, 1, x))
    integral = st_integral(derivative, a, b, p, tol)
    return abs(integral - (float(f(b)) - float(f(a))))


def integration_by_parts_residual(f: RealFunction, g: RealFunction, a: Number, b: Number, p: StParams,
                                  tol: float = Defaults.TOL) -> float:
    """|int Df(x) g(phi' x) - [f g]_a^b + int f(phi x) Dg(x)|."""
    phi, phi_prime = float(p.phi), float(p.phi_prime)
    left = st_integral(lambda x: float(st_derivative(f, p, 1, x)) * g(phi_prime * x), a, b, p, tol)
    right = st_integral(lambda x: f(phi * x) * float(st_derivative(g, p, 1, x)), a, b, p, tol)
    boundary = float(f(b)) * float(g(b)) - float(f(a)) * float(g(a))
    return abs(left - boundary + right)


def q_periodic_factor_check(G: QPeriodic, f: RealFunction, a: Number, b: Number, p: StParams,
                            tol: float = Defaults.TOL) -> float:
    """
    Residual of pulling a q-periodic factor out of the integral:

        int_a^b G(log_q x) f(x) = [G(log_q(r/phi)) int_0^r f]_{r=a}^{r=b}
    """
    if not 0 <= a < b:
        raise DomainError(f"need 0 <= a < b, got a={a}, b={b}")
    if not 0 < p.q < 1:
        raise DomainError(f"the q-periodic factor rule needs 0 < q < 1, got q={p.q}")
    phi = float(p.phi)

    def primitive(r: float) -> float:
        if r == 0:
            return 0.0
        return G(r / phi) * st_integral(f, 0, r, p, tol)

    left = st_integral(lambda x: G(x) * f(x), a, b, p, tol)
    return abs(left - (primitive(float(b)) - primitive(float(a))))


#############################################
# Order properties
#############################################
def lattice_sup(f: RealFunction, a: Number, b: Number, p: StParams, n_cut: int = 200) -> float:
    """sup |f| over the lattice points of [a, b]; the boundedness check for integrability."""
    points = np.concatenate([
        q_lattice(float(r), p, n_cut).points.astype(float) for r in (a, b) if r != 0
    ] or [np.zeros(1)])
    return float(np.max(np.abs([f(x) for x in points])))


def _check_order_regime(a: Number, b: Number, p: StParams):
    if not a <= 0 <= b:
        raise DomainError(f"order properties need a <= 0 <= b, got [{a}, {b}]")
    if not 0 < p.q < 1:
        raise DomainError(f"order properties need 0 < q < 1, got q={p.q}")


def monotonicity_check(f: RealFunction, g: RealFunction, a: Number, b: Number, p: StParams,
                       n_cut: int = 200, tol: float = Defaults.TOL) -> bool:
    """f <= g on the lattice implies int f <= int g."""
    _check_order_regime(a, b, p)
    for r in (a, b):
        if r == 0:
            continue
        for x in q_lattice(float(r), p, n_cut).points.astype(float):
            if f(x) > g(x):
                raise DomainError(f"f <= g fails on the lattice at x={x}")
    return st_integral(f, a, b, p, tol) <= st_integral(g, a, b, p, tol) + 10 * tol


def triangle_inequality_check(f: RealFunction, a: Number, b: Number, p: StParams,
                              tol: float = Defaults.TOL) -> bool:
    """|int f| <= int |f|."""
    _check_order_regime(a, b, p)
    return abs(st_integral(f, a, b, p, tol)) <= st_integral(lambda x: abs(f(x)), a, b, p, tol) + 10 * tol
