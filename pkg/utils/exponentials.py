"""
Deformed (s,t)-exponentials exp_{s,t}(z,u) = sum u^{C(n,2)} z^n/{n}!,
their u = phi and u = phi' instances Exp and Exp', infinite-product forms,
(p,q)-powers and the binomial exponential.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from typing_extensions import Literal

from utils.config import Defaults
from utils.core_params import StParams, make_params
from utils.errors import DegenerateQ, DomainError, NonConvergentSum, OutsideDomain, PoleHit, StCalcError
from utils.numeric import Number, as_exact, binom2, compare
from utils.sequences import fibonacci_numbers
from utils.ward_series import ENTIRE, POINT_ONLY, ConvergenceClass, EgfValue

logger = logging.getLogger('exponentials')


@dataclass(frozen=True)
class ExpKind:
    kind: Literal["Deformed", "Exp", "ExpPrime"]
    u: Optional[Number] = None

    def resolve(self, p: StParams) -> Number:
        """The deformation parameter this kind stands for."""
        if self.kind == "Exp":
            return p.phi
        if self.kind == "ExpPrime":
            return p.phi_prime
        if self.u is None:
            raise DomainError("a Deformed exponential needs u")
        return self.u


EXP = ExpKind("Exp")
EXP_PRIME = ExpKind("ExpPrime")


@dataclass(frozen=True)
class PqPower:
    """(x (-) a)^n_{p,q} = prod_{k<n} (p^k x - q^k a)."""
    x: Number
    a: Number
    n: int
    p: Number
    q: Number

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"n must be nonnegative, got {self.n}")


#############################################
# Series
#############################################
def exp_convergence(p: StParams, u: Number) -> ConvergenceClass:
    """
    Convergence of exp_{s,t}(z,u): entire for |u| below the dominant root
    modulus, disk of radius |root|/sqrt(s^2+4t) on it, z = 0 only above.
    """
    u = abs(as_exact(u))
    if u == 0:
        return ENTIRE
    if p.degenerate_q:
        return ENTIRE if compare(u, abs(p.phi)) <= 0 else POINT_ONLY
    root = abs(p.phi) if p.contracting else abs(p.phi_prime)
    position = compare(u, root)
    if position < 0:
        return ENTIRE
    if position > 0:
        return POINT_ONLY
    return ConvergenceClass("Disk", float(root) / math.sqrt(float(p.discriminant)))


def exp_series_report(p: StParams, u: Number, z: Number, tol: float = Defaults.TOL,
                      max_terms: int = Defaults.SERIES_MAX_TERMS) -> EgfValue:
    """
    Sum exp_{s,t}(z,u) until the geometric tail estimate drops below tol.

    Raises:
        OutsideDomain: z outside the convergence region
        NonConvergentSum: max_terms terms were not enough
    """
    if z == 0:
        return EgfValue(1.0, 0.0, 1)
    if u == 0:
        return EgfValue(1.0 + float(z), 0.0, 2)
    region = exp_convergence(p, u)
    if not region.admits(z):
        raise OutsideDomain(f"exp_{{{p.s},{p.t}}}(z,u={u}) does not converge at z={z} ({region.kind})")

    uf, zf = float(u), float(z)
    s, t = float(p.s), float(p.t)
    previous_number, number = 0.0, 1.0
    term, terms = 1.0, [1.0]
    decaying = 0
    for n in range(1, max_terms):
        if n > 1:
            previous_number, number = number, s * number + t * previous_number
        new_term = term * uf ** (n - 1) * zf / number
        terms.append(new_term)
        if new_term == 0.0:
            return EgfValue(math.fsum(terms), 0.0, len(terms))
        ratio = abs(new_term / term)
        decaying = decaying + 1 if ratio < 1 else 0
        term = new_term
        if decaying >= 3:
            tail = abs(term) * ratio / (1 - ratio)
            if tail < tol:
                return EgfValue(math.fsum(terms), tail, len(terms))
    raise NonConvergentSum(f"exp_{{{p.s},{p.t}}}({z},{u}) needs more than {max_terms} terms")


def exp_st(p: StParams, u: Number, z: Number, tol: float = Defaults.TOL) -> float:
    return exp_series_report(p, u, z, tol).value


def exp_kind_value(p: StParams, kind: ExpKind, z: Number, tol: float = Defaults.TOL) -> float:
    return exp_st(p, kind.resolve(p), z, tol)


#############################################
# Infinite products
#############################################
def factor_count(c: float, ratio: float, K: Optional[int]) -> int:
    if K is not None:
        return K
    if c == 0 or ratio == 0:
        return 1
    # last factor within PRODUCT_EPS of 1
    needed = math.log(Defaults.PRODUCT_EPS / abs(c)) / math.log(abs(ratio))
    return min(max(1, math.ceil(needed) + 1), Defaults.PRODUCT_MAX_FACTORS)


def q_pochhammer(c: float, ratio: float, K: int, denominator: bool = False) -> float:
    """
    prod_{k<K} (1 - c ratio^k).

    Raises:
        PoleHit: denominator=True and some factor is within POLE_EPS of 0
    """
    if denominator and K > 0:
        factors = 1.0 - c * np.power(ratio, np.arange(K, dtype=float))
        smallest = float(np.min(np.abs(factors)))
        if smallest < Defaults.POLE_EPS:
            raise PoleHit(f"product factor vanishes (|factor| = {smallest:.3g})")
    if ratio == 0:
        return 1.0 - c if K > 0 else 1.0
    return float(mpmath.qp(c, ratio, K))


def exp_product(p: StParams, kind: ExpKind, z: Number, K: Optional[int] = None) -> float:
    """
    Partial products of Exp and Exp'.

    |q| < 1:  Exp(z) = prod 1/(1 - (1-q) q^k z),    Exp'(z) = prod (1 + (1-q) q^k z)
    |q| > 1:  Exp(z) = prod (1 - (1/q-1) q^{-k} z), Exp'(z) = prod 1/(1 + (1/q-1) q^{-k} z)
    """
    if p.degenerate_q:
        raise DegenerateQ("product forms need q != 1")
    if kind.kind == "Deformed":
        raise DomainError("product forms exist for Exp and ExpPrime only")
    z = float(z)
    if p.contracting:
        ratio, c = float(p.q), float(1 - p.q) * z
        if kind.kind == "Exp":
            return 1.0 / q_pochhammer(c, ratio, factor_count(c, ratio, K), denominator=True)
        return q_pochhammer(-c, ratio, factor_count(c, ratio, K))
    ratio, c = float(p.q_inverse), float(p.q_inverse - 1) * z
    if kind.kind == "Exp":
        return q_pochhammer(c, ratio, factor_count(c, ratio, K))
    return 1.0 / q_pochhammer(-c, ratio, factor_count(c, ratio, K), denominator=True)


#############################################
# (p,q)-powers and the binomial exponential
#############################################
def pq_power(arg: PqPower) -> Number:
    result = as_exact(arg.x) * 0 + 1
    for k in range(arg.n):
        result = result * (arg.p ** k * arg.x - arg.q ** k * arg.a)
    return result


def pq_power_expansion(arg: PqPower) -> Number:
    """sum_k C(n,k)_{p,q} p^{C(k,2)} q^{C(n-k,2)} x^k (-a)^{n-k}."""
    p, q = as_exact(arg.p), as_exact(arg.q)
    numbers = fibonacci_numbers(p + q, -p * q, arg.n)
    factorials = [p * 0 + 1]
    for m in range(1, arg.n + 1):
        factorials.append(factorials[-1] * numbers[m])
    total = 0
    for k in range(arg.n + 1):
        binomial = factorials[arg.n] / (factorials[k] * factorials[arg.n - k])
        total = total + binomial * p ** binom2(k) * q ** binom2(arg.n - k) * arg.x ** k * (-arg.a) ** (arg.n - k)
    return total


def binomial_exp(p: StParams, a: Number, x: Number, y: Number, tol: float = Defaults.TOL) -> float:
    """Exp(a x) Exp'(-a y)."""
    return exp_st(p, p.phi, a * x, tol) * exp_st(p, p.phi_prime, -a * y, tol)


def binomial_exp_series(p: StParams, a: Number, x: Number, y: Number, N: int = Defaults.N) -> float:
    """sum_{n<=N} a^n (x (-) y)^n_{phi,phi'} / {n}!."""
    numbers = fibonacci_numbers(p.s, p.t, N)
    terms, factorial = [], 1.0
    for n in range(N + 1):
        if n:
            factorial *= float(numbers[n])
        power = pq_power(PqPower(float(x), float(y), n, float(p.phi), float(p.phi_prime)))
        terms.append(float(a) ** n * power / factorial)
    return math.fsum(terms)


def shifted_exp_solution(p: StParams, a: Number, eta: Number, xi: Number, x: Number,
                         tol: float = Defaults.TOL) -> float:
    """xi Exp(a x) Exp'(-a eta): solves D y = a y(phi x) with y(eta) = xi."""
    return float(xi) * binomial_exp(p, a, x, eta, tol)


#############################################
# Inequalities
#############################################
@dataclass
class InequalityReport:
    rows: List[Dict] = field(default_factory=list)
    untested: List[float] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        checks = [row[key] for row in self.rows for key in row if key.endswith("_holds")]
        return all(c for c in checks if c is not None)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "untested": self.untested, "all_hold": self.all_hold}


def _safe(fn):
    try:
        return fn()
    except StCalcError as e:
        logger.debug(f"inequality check skipped: {e}")
        return None


def exp_inequality_report(p: StParams, u: Number, x_grid: Sequence[float], v: Optional[Number] = None,
                          s_pair: Optional[Tuple[Number, Number]] = None,
                          t_pair: Optional[Tuple[Number, Number]] = None) -> InequalityReport:
    """
    Boolean table over x_grid for

    - exp(x,u) < Exp'(x) < e^x when |q| < 1 and 0 < u < phi' (plus e^x < Exp(x) for x < 1/(1-q)),
    - 1 <= exp(x,u) <= exp(x,v) for u < v,
    - exp_{s1,t}(x,u) > exp_{s2,t}(x,u) for s1 < s2 and the same in t.

    Negative x is recorded as untested. At x = 0 every value is 1 and the
    comparisons are checked non-strictly.
    """
    report = InequalityReport()
    chain_applies = p.contracting and not p.degenerate_q and 0 < u < p.phi_prime
    for x in x_grid:
        x = float(x)
        if x < 0:
            report.untested.append(x)
            continue
        strict = x > 0
        less = (lambda a, b: a < b) if strict else (lambda a, b: a <= b + 1e-15)
        row = {"x": x}
        base = _safe(lambda: exp_st(p, u, x))
        row["exp"] = base

        if chain_applies:
            prime = _safe(lambda: exp_st(p, p.phi_prime, x))
            row["exp_prime"], row["e"] = prime, math.exp(x)
            row["chain_holds"] = None if None in (base, prime) else less(base, prime) and less(prime, math.exp(x))
            if x < float(1 / (1 - p.q)):
                upper = _safe(lambda: exp_st(p, p.phi, x))
                row["exp_upper"] = upper
                row["upper_holds"] = None if upper is None else less(math.exp(x), upper)
        if v is not None:
            other = _safe(lambda: exp_st(p, v, x))
            row["exp_v"] = other
            ordered = less if u < v else (lambda a, b: less(b, a))
            row["monotone_u_holds"] = None if None in (base, other) else base >= 1 - 1e-15 and ordered(base, other)
        for name, pair, build in (("s", s_pair, lambda val: make_params(val, p.t)),
                                  ("t", t_pair, lambda val: make_params(p.s, val))):
            if pair is None:
                continue
            low, high = sorted(pair)
            first = _safe(lambda: exp_st(build(low), u, x))
            second = _safe(lambda: exp_st(build(high), u, x))
            row[f"exp_{name}_low"], row[f"exp_{name}_high"] = first, second
            row[f"monotone_{name}_holds"] = None if None in (first, second) else less(second, first)
        report.rows.append(row)
    return report
