"""
The deformed (s,t)-derivative

    D_{us,u^2t} f(x) = (f(u phi x) - f(u phi' x)) / (u (phi - phi') x),

its named specializations, its action on truncated series, and the
q-periodic functions that form its kernel.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Tuple, Union

import numpy as np

from utils.config import Defaults
from utils.core_params import StParams, make_params
from utils.errors import DegenerateQ, DomainError, ParamMismatch, Unsupported
from utils.numeric import Number, as_exact
from utils.ward_series import TruncatedEgf

logger = logging.getLogger('operators')

RealFunction = Callable[[float], float]


def numerical_derivative(f: RealFunction, x: float, steps: Tuple[float, ...] = Defaults.RICHARDSON_STEPS) -> float:
    """Central differences at x refined by Richardson extrapolation over the given steps."""
    x = float(x)
    estimates = [(f(x + h) - f(x - h)) / (2 * h) for h in steps]
    # central differences carry an h^2 error; eliminate order by order
    order = 2
    while len(estimates) > 1:
        refined = []
        for (coarse, fine), (h0, h1) in zip(zip(estimates, estimates[1:]), zip(steps, steps[1:])):
            ratio = (h0 / h1) ** order
            refined.append((ratio * fine - coarse) / (ratio - 1))
        estimates, steps = refined, steps[1:]
        order += 2
    return estimates[0]


def _difference_quotient(f: RealFunction, a: Number, b: Number, x: Number) -> Number:
    """(f(a x) - f(b x)) / ((a - b) x), with f'(0) at x = 0."""
    if x == 0:
        return numerical_derivative(f, 0.0)
    return (f(a * x) - f(b * x)) / ((a - b) * x)


def st_derivative(f: RealFunction, p: StParams, u: Number, x: Number) -> Number:
    """
    Apply D_{us,u^2t} to f at x.

    At x = 0 the value is f'(0), computed numerically. For a double root
    (q = 1) the quotient degenerates to f'(u phi x).
    """
    u = as_exact(u)
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    if p.degenerate_q:
        return numerical_derivative(f, float(u * p.phi * x))
    return _difference_quotient(f, u * p.phi, u * p.phi_prime, x)


def series_derivative(f: TruncatedEgf) -> TruncatedEgf:
    """D x^n/{n}! = x^{n-1}/{n-1}!, so coefficients shift down by one."""
    if f.N < 1:
        raise DomainError("series_derivative needs order N >= 1")
    return TruncatedEgf(f.params, f.coeffs[1:])


#############################################
# Named specializations
#############################################
_SQRT5 = math.sqrt(5.0)
_SQRT2 = math.sqrt(2.0)


def fibonacci_derivative(f: RealFunction, u: float, x: float) -> float:
    golden, conjugate = (1 + _SQRT5) / 2, (1 - _SQRT5) / 2
    if x == 0:
        return numerical_derivative(f, 0.0)
    return (f(golden * u * x) - f(conjugate * u * x)) / (_SQRT5 * u * x)


def pell_derivative(f: RealFunction, u: float, x: float) -> float:
    if x == 0:
        return numerical_derivative(f, 0.0)
    return (f((1 + _SQRT2) * u * x) - f((1 - _SQRT2) * u * x)) / (2 * _SQRT2 * u * x)


def jacobsthal_derivative(f: RealFunction, u: float, x: float) -> float:
    if x == 0:
        return numerical_derivative(f, 0.0)
    return (f(2 * u * x) - f(-u * x)) / (3 * u * x)


def mersenne_derivative(f: RealFunction, u: float, x: float) -> float:
    if x == 0:
        return numerical_derivative(f, 0.0)
    return (f(2 * u * x) - f(u * x)) / (u * x)


def pq_derivative(f: RealFunction, p: float, q: float, u: float, x: float) -> float:
    """(p,q)-derivative, the (s,t) = (p+q, -pq) case."""
    if p == q:
        raise DegenerateQ("the (p,q)-derivative needs p != q")
    return _difference_quotient(f, u * p, u * q, x)


def chebyshev_derivative(f: RealFunction, r: float, u: float, x: float) -> float:
    """(s,t) = (2r, -1) with |r| > 1."""
    if abs(r) <= 1:
        raise DomainError(f"the Chebyshev derivative needs |r| > 1, got {r}")
    root = math.sqrt(r * r - 1)
    return _difference_quotient(f, u * (r + root), u * (r - root), x)


def lucas_derivative(f: RealFunction, P: float, Q: float, u: float, x: float) -> float:
    """(s,t) = (P, -Q) with P^2 - 4Q > 0."""
    disc = P * P - 4 * Q
    if disc <= 0:
        raise DomainError(f"the Lucas derivative needs P^2 - 4Q > 0, got {disc}")
    root = math.sqrt(disc)
    return _difference_quotient(f, u * (P + root) / 2, u * (P - root) / 2, x)


#############################################
# q-periodic functions
#############################################
@dataclass(frozen=True)
class QPeriodic:
    """p(x) = G(log_q x) for a period-1 function G; requires 0 < q != 1."""
    G: Callable[[float], float]
    params: StParams

    @classmethod
    def constant(cls, params: StParams, c: float) -> "QPeriodic":
        return cls(lambda y: c, params)

    @property
    def q(self) -> float:
        q = self.params.q
        if q < 0:
            raise Unsupported(f"q={q} < 0 needs the complex logarithm branch")
        if q == 0:
            raise Unsupported("q = 0 has no logarithm")
        if self.params.degenerate_q:
            raise DegenerateQ("q-periodic functions need q != 1")
        return float(q)

    def __call__(self, x: float) -> float:
        return q_periodic_eval(self, x)

    def is_periodic(self, samples: int = Defaults.PERIOD_SAMPLES, tol: float = 1e-10) -> bool:
        grid = np.linspace(0.0, 1.0, samples, endpoint=False)
        return all(math.isclose(self.G(y + 1.0), self.G(y), rel_tol=tol, abs_tol=tol) for y in grid)

    def _combine(self, other: Union["QPeriodic", float], op: Callable[[float, float], float]) -> "QPeriodic":
        if isinstance(other, QPeriodic):
            if other.params.as_tuple() != self.params.as_tuple():
                raise ParamMismatch("q-periodic functions over different (s,t)")
            g1, g2 = self.G, other.G
            return QPeriodic(lambda y: op(g1(y), g2(y)), self.params)
        g1 = self.G
        return QPeriodic(lambda y: op(g1(y), other), self.params)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__


def q_periodic_eval(qp: QPeriodic, x: float) -> float:
    q = qp.q
    if x <= 0:
        raise DomainError(f"q-periodic functions are defined for x > 0, got {x}")
    return qp.G(math.log(float(x)) / math.log(q))


#############################################
# Product rules
#############################################
class ProductRuleResiduals(NamedTuple):
    first: float
    swapped: float


def product_rule_residuals(f: RealFunction, g: RealFunction, p: StParams, x: float, u: Number = 1) -> ProductRuleResiduals:
    """
    Residuals of the two product rules

        D(fg)(x) = f(u phi x) Dg(x) + g(u phi' x) Df(x)
        D(fg)(x) = f(u phi' x) Dg(x) + g(u phi x) Df(x)
    """
    if x == 0:
        raise DomainError("product rule residuals are taken at x != 0")
    fg = lambda y: f(y) * g(y)
    d_fg = st_derivative(fg, p, u, x)
    d_f = st_derivative(f, p, u, x)
    d_g = st_derivative(g, p, u, x)
    a, b = u * p.phi * x, u * p.phi_prime * x
    return ProductRuleResiduals(
        first=float(abs(d_fg - f(a) * d_g - g(b) * d_f)),
        swapped=float(abs(d_fg - f(b) * d_g - g(a) * d_f)),
    )


def product_rule_residual(f: RealFunction, g: RealFunction, p: StParams, x: float, u: Number = 1) -> float:
    return max(product_rule_residuals(f, g, p, x, u))


if __name__ == "__main__":
    pell = make_params(2, 1)
    print("D x^5 at x=2, Pell:", st_derivative(lambda y: y ** 5, pell, 1, 2))
    qp = QPeriodic(lambda y: math.sin(2 * math.pi * y), make_params(5, -6))
    print("p(x), p(qx):", qp(0.7), qp(0.7 * 2 / 3))
