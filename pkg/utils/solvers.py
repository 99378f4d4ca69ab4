"""
Solvers for (s,t)-pantograph equations D y = f(x, y(x), y(ux)).

Closed-form Ward series for the linear, two-term and Ambartsumian equations,
q-periodic modulations of the linear solution, a Bell-polynomial solver for
autonomous right-hand sides and successive approximation with its a priori
error bound. Every report carries the residual of its solution on a
q-geometric lattice.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import sympy as sp
from typing_extensions import Literal

from utils.bell import BellArgs, partial_bell
from utils.config import Defaults
from utils.core_params import StParams, make_params
from utils.errors import DegenerateQ, DomainError, NonConvergentIteration, NonConvergentSum, OutsideDomain
from utils.exponentials import exp_convergence, factor_count, q_pochhammer
from utils.expr_parser import ExprAst, evaluate, is_polynomial, to_sympy, variables
from utils.integration import series_antiderivative, st_integral
from utils.numeric import Number, as_exact, compare, is_zero, to_json_value
from utils.operators import QPeriodic, series_derivative, st_derivative
from utils.sequences import fibonacci_numbers, fibotorial
from utils.ward_series import ENTIRE, POINT_ONLY, ConvergenceClass, EgfValue, TruncatedEgf

logger = logging.getLogger('solvers')

Regime = Literal["S", "T"]
SeriesRhs = Callable[[TruncatedEgf, float], float]

_DOMAIN_NAMES = {"Entire": "entire", "Disk": "disk", "PointOnly": "point"}


#############################################
# Types
#############################################
@dataclass(frozen=True)
class RisingFactor:
    """(a (+) b)^n_{1,u} = prod_{k<n} (a + b u^k); equals (a+b)^n at u = 1."""
    a: Number
    b: Number
    u: Number
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"n must be nonnegative, got {self.n}")

    @property
    def value(self) -> Number:
        a, b, u = as_exact(self.a), as_exact(self.b), as_exact(self.u)
        result = as_exact(1)
        for k in range(self.n):
            result = result * (a + b * u ** k)
        return result


@dataclass(frozen=True)
class Region:
    """
    Where E_{s,t}(a,b,u;z) converges.

    label is S1..S9 or T1..T9 when a table row matched. A None label with a
    convergence class is a reduction to an exponential (a = 0 or b = 0);
    None with no convergence class is Unclassified.
    """
    label: Optional[str]
    convergence: Optional[ConvergenceClass] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def classified(self) -> bool:
        return self.convergence is not None

    def admits(self, z: Number) -> bool:
        return self.classified and self.convergence.admits(z)

    def to_dict(self) -> dict:
        out = {"region": self.label}
        if self.convergence is None:
            out["domain"] = "unclassified"
        else:
            out["domain"] = _DOMAIN_NAMES[self.convergence.kind]
            if self.convergence.radius is not None:
                out["radius"] = self.convergence.radius
        out.update(self.meta)
        return out


@dataclass(frozen=True)
class EquationSpec:
    """
    D y = rhs(x, y(x), y(ux)), y(eta) = xi.

    a_dom and b_box span the rectangle |x| <= a_dom/|root|, |y - xi| <= b_box
    on which M, L1 and L2 bound the right-hand side; any of them left as None
    is estimated by sampling.
    """
    params: StParams
    u: Number
    rhs: ExprAst
    init: Tuple[Number, Number] = (0, 1)
    a_dom: Number = 1
    b_box: Number = 1
    L1: Optional[float] = None
    L2: Optional[float] = None
    M: Optional[float] = None
    regime: Optional[Regime] = None

    def __post_init__(self):
        if not self.u > 0:
            raise DomainError(f"u must be positive, got {self.u}")
        if not (self.a_dom > 0 and self.b_box > 0):
            raise DomainError(f"the rectangle needs a > 0 and b > 0, got a={self.a_dom}, b={self.b_box}")
        if self.regime not in (None, "S", "T"):
            raise DomainError(f"regime must be S or T, got {self.regime!r}")


@dataclass
class SolveReport:
    series: Optional[TruncatedEgf]
    lattice: List[float]
    lattice_values: List[float]
    max_residual: float
    error_bound: Optional[float] = None
    region: Optional[Region] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "series": self.series.to_dict() if self.series is not None else None,
            "lattice": self.lattice,
            "values": self.lattice_values,
            "residual": self.max_residual,
            "bound": self.error_bound,
            "region": self.region.to_dict() if self.region is not None else None,
        }
        out.update(self.extras)
        return to_json_value(out)


class LipschitzEstimate(NamedTuple):
    L1: float
    L2: float
    M: float


class ExistenceInterval(NamedTuple):
    half_width: float
    alpha: float
    binding: Literal["alpha", "lipschitz"]


#############################################
# Lattice and residual helpers
#############################################
def residual_lattice(p: StParams, x_max: Number, points: int = Defaults.LATTICE_POINTS) -> List[float]:
    """
    x_max |r|^j/|root|, j < points, with r, root = q, phi for |q| < 1 and
    1/q, phi' otherwise. Roots below 1 in modulus are not divided by, so the
    points stay in (0, x_max].
    """
    if p.degenerate_q or p.q == 0:
        ratio, root = 0.5, abs(p.phi)
    elif p.contracting:
        ratio, root = abs(p.q), abs(p.phi)
    else:
        ratio, root = abs(p.q_inverse), abs(p.phi_prime)
    scale = float(x_max) / max(1.0, float(root))
    return [scale * float(ratio) ** j for j in range(points)]


def _scaled(convergence: ConvergenceClass, c: Number) -> ConvergenceClass:
    """Convergence of g(c z) from that of g(z)."""
    if convergence.kind != "Disk":
        return convergence
    if c == 0:
        return ENTIRE
    return ConvergenceClass("Disk", convergence.radius / abs(float(c)))


def _lattice_extent(convergence: Optional[ConvergenceClass], x_max: Number) -> float:
    extent = float(x_max)
    if convergence is not None and convergence.kind == "Disk":
        extent = min(extent, Defaults.DISK_SHRINK * convergence.radius)
    return extent


def _series_report(series: TruncatedEgf, rhs: SeriesRhs, extent: float, region: Optional[Region] = None,
                   extras: Optional[Dict[str, Any]] = None) -> SolveReport:
    """Substitute the series into D y = rhs on the residual lattice."""
    lattice = residual_lattice(series.params, extent)
    derivative = series_derivative(series)
    values = [series(x) for x in lattice]
    residual = max(abs(derivative(x) - rhs(series, x)) for x in lattice)
    logger.debug(f"_series_report: N={series.N} extent={extent:.6g} residual={residual:.3g}")
    return SolveReport(series, lattice, values, residual, region=region, extras=extras or {})


def _check_order(N: int):
    if N < 1:
        raise DomainError(f"series solutions need N >= 1, got {N}")


#############################################
# Linear pantograph and its modulations
#############################################
def solve_linear_pantograph(p: StParams, a: Number, u: Number, xi: Number, N: int = Defaults.N,
                            x_max: Number = Defaults.LATTICE_X_MAX) -> SolveReport:
    """
    D y = a y(ux), y(0) = xi, solved by xi exp_{s,t}(a x, u).

    Raises:
        OutsideDomain: exp_{s,t}(., u) converges at z = 0 only
    """
    _check_order(N)
    a, u, xi = as_exact(a), as_exact(u), as_exact(xi)
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    convergence = _scaled(exp_convergence(p, u), a) if a != 0 else ENTIRE
    if convergence.kind == "PointOnly":
        raise OutsideDomain(f"exp_{{{p.s},{p.t}}}(z, u={u}) converges at z = 0 only")

    series = TruncatedEgf.exponential(p, N, a, u) * xi
    uf, af = float(u), float(a)
    region = Region(None, convergence, {"equation": "linear"})
    return _series_report(series, lambda y, x: af * y(uf * x), _lattice_extent(convergence, x_max), region)


def modulated_solution(p: StParams, a: Number, u: Number, G: QPeriodic, x: Number, N: int = Defaults.N) -> float:
    """
    sum_{n<=N} u^{C(n,2)} a^n G(u^n x/phi^n) x^n/{n}!, a solution of
    D y = a y(ux) for every q-periodic G.

    Raises:
        DomainError: x <= 0
        Unsupported: q < 0
        OutsideDomain: a x outside the convergence region of exp_{s,t}(., u)
    """
    if x <= 0:
        raise DomainError(f"modulated solutions are defined for x > 0, got {x}")
    G.q  # raises for q <= 0 and q = 1
    convergence = _scaled(exp_convergence(p, u), a) if a != 0 else ENTIRE
    if not convergence.admits(x):
        raise OutsideDomain(f"x={x} is outside the convergence region {convergence.kind}")

    numbers = fibonacci_numbers(p.s, p.t, N)
    af, uf, xf = float(a), float(u), float(x)
    shrink = uf / float(p.phi)
    term, total = 1.0, G(xf)
    for n in range(1, N + 1):
        term *= af * uf ** (n - 1) * xf / float(numbers[n])
        if term == 0.0:
            break
        total += term * G(xf * shrink ** n)
    return total


def modulated_residual(p: StParams, a: Number, u: Number, G: QPeriodic, N: int = Defaults.N,
                       x_max: Number = Defaults.LATTICE_X_MAX) -> SolveReport:
    """Lattice residual |D y - a y(u.)| of the modulated solution."""
    convergence = _scaled(exp_convergence(p, u), a) if a != 0 else ENTIRE
    lattice = residual_lattice(p, _lattice_extent(convergence, x_max))
    af, uf = float(a), float(u)

    def y(x: float) -> float:
        return modulated_solution(p, a, u, G, x, N)

    values = [y(x) for x in lattice]
    residual = max(abs(float(st_derivative(y, p, 1, x)) - af * y(uf * x)) for x in lattice)
    region = Region(None, convergence, {"equation": "modulated"})
    return SolveReport(None, lattice, values, residual, region=region)


#############################################
# Two-term pantograph and the E-function
#############################################
def region_table_row(Q: Number, R: Number, position: int, a: Number, b: Number) -> Optional[Tuple[int, ConvergenceClass]]:
    """
    Row of the convergence table for (Q, R) = (q, phi) or (1/q, phi').

    position is the sign of |u| - |R|. Rows 1-5 need |u| < |R|, rows 6-9
    need |u| = |R|. Returns (row, convergence class) or None.
    """
    absQ, absR = abs(Q), abs(R)
    gap = abs(1 - Q)
    q_side, r_side = compare(absQ, 1), compare(absR, 1)
    q_inside = absQ != 0 and q_side < 0

    def disk(scale: Number) -> ConvergenceClass:
        if is_zero(scale) or is_zero(gap):
            return ENTIRE
        return ConvergenceClass("Disk", float(1 / (abs(scale) * gap)))

    if absR == 0:
        return None
    if position < 0:
        if q_side != 0 and r_side > 0:
            return 1, ENTIRE
        if q_side > 0 and r_side <= 0 and compare(1 / absR, absQ) < 0:
            return 2, ENTIRE
        if q_inside and r_side == 0:
            return 3, disk(a)
        if q_inside and r_side < 0:
            return 4, POINT_ONLY
        if q_side > 0 and compare(1 / absR, absQ) > 0:
            return 5, POINT_ONLY
        return None
    if position == 0:
        if q_side > 0 and r_side > 0:
            return 6, ENTIRE
        if q_inside and r_side == 0:
            return (7, ENTIRE) if is_zero(a + b) else (9, disk(a + b))
        if q_inside and r_side > 0:
            return 8, disk(b)
    return None


def classify_E(p: StParams, u: Number, a: Number, b: Number, table: Optional[Regime] = None) -> Region:
    """
    Convergence region of E_{s,t}(a,b,u;z) = sum (a (+) b)^n_{1,u} z^n/{n}!.

    The S table on (q, phi) is tried first, then the T table on (1/q, phi');
    table restricts the search to one of them. b = 0 and a = 0 reduce to
    exp_{s,t}(a z) and exp_{s,t}(b z, u).

    Raises:
        DomainError: a = b = 0 or u = 0
    """
    a, b, u = as_exact(a), as_exact(b), as_exact(u)
    if a == 0 and b == 0:
        raise DomainError("classify_E needs a != 0 or b != 0")
    if u == 0:
        raise DomainError("classify_E needs u != 0")
    if b == 0:
        return Region(None, _scaled(exp_convergence(p, 1), a), {"reduction": "exp(a z)"})
    if a == 0:
        return Region(None, _scaled(exp_convergence(p, u), b), {"reduction": "exp(b z, u)"})

    tables = []
    if table in (None, "S"):
        tables.append(("S", p.q, p.phi))
    if table in (None, "T") and p.q != 0:
        tables.append(("T", p.q_inverse, p.phi_prime))
    for prefix, Q, R in tables:
        position = compare(abs(u), abs(R))
        if position > 0:
            continue
        row = region_table_row(Q, R, position, a, b)
        if row is not None:
            index, convergence = row
            branch = "|u|<|root|" if position < 0 else "|u|=|root|"
            logger.debug(f"classify_E: (s,t)=({p.s},{p.t}) u={u} -> {prefix}{index}")
            return Region(f"{prefix}{index}", convergence, {"branch": branch})
    logger.info(f"classify_E: (s,t)=({p.s},{p.t}) u={u} a={a} b={b} matches no table row")
    return Region(None, None, {"reason": "no table row matches (q, phi, u)"})


def pantograph_exponential(p: StParams, a: Number, b: Number, u: Number, z: Number, tol: float = Defaults.TOL,
                           max_terms: int = Defaults.SERIES_MAX_TERMS, min_terms: int = 0) -> EgfValue:
    """
    Sum E_{s,t}(a,b,u;z) until the geometric tail estimate drops below tol,
    using the term ratio (a + b u^n) z/{n+1}.

    Raises:
        OutsideDomain: the classified region excludes z
        NonConvergentSum: terms overflow or max_terms were not enough
    """
    if z == 0 or (a == 0 and b == 0):
        return EgfValue(1.0, 0.0, 1)
    region = classify_E(p, u, a, b)
    if region.classified and not region.admits(z):
        raise OutsideDomain(f"E_{{{p.s},{p.t}}}({a},{b},{u};z) does not converge at z={z} "
                            f"({region.label or region.convergence.kind})")

    af, bf, uf, zf = float(a), float(b), float(u), float(z)
    s, t = float(p.s), float(p.t)
    previous_number, number = 0.0, 1.0
    term, terms = 1.0, [1.0]
    u_power, decaying = 1.0, 0
    for n in range(max_terms):
        if n:
            previous_number, number = number, s * number + t * previous_number
        new_term = term * (af + bf * u_power) * zf / number
        u_power *= uf
        if not math.isfinite(new_term):
            raise NonConvergentSum(f"E-series terms overflow at n={n + 1}")
        terms.append(new_term)
        if new_term == 0.0:
            return EgfValue(math.fsum(terms), 0.0, len(terms))
        ratio = abs(new_term / term)
        decaying = decaying + 1 if ratio < 1 else 0
        term = new_term
        if decaying >= 3 and len(terms) > min_terms:
            tail = abs(term) * ratio / (1 - ratio)
            if tail < tol:
                return EgfValue(math.fsum(terms), tail, len(terms))
    raise NonConvergentSum(f"E_{{{p.s},{p.t}}}({a},{b},{u};{z}) needs more than {max_terms} terms")


def two_term_pantograph(p: StParams, a: Number, b: Number, u: Number, N: int = Defaults.N,
                        x_max: Number = Defaults.LATTICE_X_MAX) -> SolveReport:
    """
    D y = a y(x) + b y(ux), y(0) = 1, solved by E_{s,t}(a,b,u;x).

    Raises:
        OutsideDomain: the region is PointOnly
    """
    _check_order(N)
    region = classify_E(p, u, a, b)
    if region.classified and region.convergence.kind == "PointOnly":
        raise OutsideDomain(f"E_{{{p.s},{p.t}}}({a},{b},{u};x) converges at x = 0 only ({region.label})")
    if not region.classified:
        logger.warning(f"two_term_pantograph: unclassified region, residual lattice extends to {x_max}")

    series = TruncatedEgf(p, tuple(RisingFactor(a, b, u, n).value for n in range(N + 1)))
    af, bf, uf = float(a), float(b), float(u)
    rhs = lambda y, x: af * y(x) + bf * y(uf * x)
    return _series_report(series, rhs, _lattice_extent(region.convergence, x_max), region)


def e_q_product(q: Number, a: Number, b: Number, z: Number, K: Optional[int] = None) -> float:
    """
    Partial product of E_q(a,b;z) = E_{1+q,-q}(a,b,q;z):

        |q| < 1:  prod (1 + b(1-q) q^k z)/(1 - a(1-q) q^k z)
        |q| > 1:  the |q| < 1 form at 1/q with a and b exchanged

    K defaults to the number of factors that still differ from 1 by more
    than PRODUCT_EPS.

    Raises:
        DegenerateQ: q = 0 or |q| = 1
        PoleHit: a denominator factor vanishes
    """
    q = as_exact(q)
    if q == 0 or compare(abs(q), 1) == 0:
        raise DegenerateQ(f"E_q needs 0 < |q| != 1, got q={q}")
    if abs(q) < 1:
        ratio, top, bottom = q, b, a
    else:
        ratio, top, bottom = 1 / q, a, b
    c = float(1 - ratio) * float(z)
    ratio = float(ratio)
    up, down = float(top) * c, float(bottom) * c
    numerator = q_pochhammer(-up, ratio, factor_count(up, ratio, K))
    denominator = q_pochhammer(down, ratio, factor_count(down, ratio, K), denominator=True)
    return numerator / denominator


def e_q_series(q: Number, a: Number, b: Number, z: Number, tol: float = Defaults.TOL) -> EgfValue:
    """E_q(a,b;z) summed as the two-term pantograph series at (s,t) = (1+q,-q), u = q."""
    q = as_exact(q)
    return pantograph_exponential(make_params(1 + q, -q), a, b, q, z, tol)


#############################################
# Ambartsumian
#############################################
def ambartsumian(p: StParams, v: Number, xi: Number, N: int = Defaults.N,
                 x_max: Number = Defaults.LATTICE_X_MAX) -> SolveReport:
    """D y = -y(x) + y(x/v)/v, y(0) = xi, solved by xi E_{s,t}(-1, 1/v, 1/v; x)."""
    _check_order(N)
    v, xi = as_exact(v), as_exact(xi)
    if not v > 1:
        raise DomainError(f"the Ambartsumian equation needs v > 1, got {v}")
    w = 1 / v
    region = classify_E(p, w, -1, w)
    series = TruncatedEgf(p, tuple(xi * RisingFactor(-1, w, w, n).value for n in range(N + 1)))
    wf = float(w)
    rhs = lambda y, x: -y(x) + wf * y(wf * x)
    return _series_report(series, rhs, _lattice_extent(region.convergence, x_max), region, {"v": v})


#############################################
# Bell-polynomial solver
#############################################
def _sympy_number(value: Number) -> sp.Expr:
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        return sp.Rational(value.numerator, value.denominator)
    return sp.Float(value)


def _from_sympy(value: sp.Expr) -> Number:
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    if not value.is_finite:
        raise DomainError(f"derivative value {value} is not finite")
    return float(value)


def _derivatives_at(expr: sp.Expr, symbol: sp.Symbol, point: Number, order: int) -> List[Number]:
    """f(point), f'(point), ..., f^(order)(point); stops at the first identically zero derivative."""
    derivs, current = [], expr
    at = _sympy_number(point)
    for _ in range(order + 1):
        derivs.append(_from_sympy(current.subs(symbol, at)))
        current = sp.diff(current, symbol)
        if current == 0:
            break
    return derivs


def bell_autonomous_solve(p: StParams, f: ExprAst, u: Number, y0: Number, N: int = Defaults.N,
                          x_max: Number = Defaults.LATTICE_X_MAX) -> SolveReport:
    """
    D y = f(y(ux)), y(0) = y0, through Faa di Bruno.

    With w(x) = y(ux) = sum c_m x^m/m!, c_m = a_m u^m m!/{m}!, the Ward
    coefficients satisfy

        a_0 = y0,  a_{n+1} = {n}!/n! sum_k f^(k)(y0) B_{n,k}(c_1, ..., c_{n-k+1})

    with a_1 = f(y0). f is written in y (or yu) only.
    """
    _check_order(N)
    names = variables(f)
    if "x" in names or len(names) > 1:
        raise DomainError(f"an autonomous right-hand side uses one of y, yu only, got {sorted(names)}")
    u, y0 = as_exact(u), as_exact(y0)
    y = sp.Symbol("y")
    derivs = _derivatives_at(to_sympy(f, {"x": sp.Symbol("x"), "y": y, "yu": y}), y, y0, N - 1)

    numbers = fibonacci_numbers(p.s, p.t, N)
    fact = [as_exact(1)]
    for m in range(1, N + 1):
        fact.append(fact[-1] * numbers[m])

    coeffs = [y0]
    for n in range(N):
        if n == 0:
            value = derivs[0]
        else:
            classical = [coeffs[m] * u ** m * math.factorial(m) / fact[m] for m in range(1, n + 1)]
            value = 0
            for k in range(1, min(n, len(derivs) - 1) + 1):
                if derivs[k] == 0:
                    continue
                value = value + derivs[k] * partial_bell(BellArgs(n, k, tuple(classical[: n - k + 1])))
        coeffs.append(value * fact[n] / math.factorial(n))
    series = TruncatedEgf(p, tuple(coeffs))

    uf = float(u)

    def rhs(solution: TruncatedEgf, x: float) -> float:
        delayed = solution(uf * x)
        return float(evaluate(f, {"x": x, "y": delayed, "yu": delayed}))

    return _series_report(series, rhs, float(x_max), extras={"derivatives": derivs})


#############################################
# Successive approximation
#############################################
def lipschitz_estimate(rhs: ExprAst, y0: Number, x_half: float, b_box: Number,
                       samples: int = Defaults.LIPSCHITZ_SAMPLES,
                       safety: float = Defaults.LIPSCHITZ_SAFETY) -> LipschitzEstimate:
    """
    Sample |f|, |df/dy| and |df/dyu| on |x| <= x_half, |y - y0|, |yu - y0| <= b.
    The Lipschitz constants carry the safety factor, M is the sampled sup.

    Raises:
        DomainError: f or a gradient is not finite on the sampling grid
    """
    x, y, yu = sp.symbols("x y yu")
    expr = to_sympy(rhs, {"x": x, "y": y, "yu": yu})
    xs = np.linspace(-float(x_half), float(x_half), samples)
    ys = np.linspace(float(y0) - float(b_box), float(y0) + float(b_box), samples)
    X, Y, YU = np.meshgrid(xs, ys, ys, indexing="ij")

    def sup(e: sp.Expr) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.asarray(sp.lambdify((x, y, yu), e, "numpy")(X, Y, YU), dtype=float)
        values = np.broadcast_to(values, X.shape)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"{e} is not finite on the sampling rectangle")
        return float(np.max(np.abs(values)))

    estimate = LipschitzEstimate(safety * sup(sp.diff(expr, y)), safety * sup(sp.diff(expr, yu)), sup(expr))
    logger.debug(f"lipschitz_estimate: {estimate}")
    return estimate


def _preferred_regime(p: StParams, u: Number) -> Regime:
    if p.phi_prime != 0 and compare(u, abs(p.phi_prime)) <= 0:
        return "T"
    return "S"


def _regime_geometry(p: StParams, regime: Regime) -> Tuple[Number, Number]:
    """(|root|, gap) of the regime: (|phi|, |1-q|) or (|phi'|, |1/q-1|)."""
    if regime == "S":
        return abs(p.phi), abs(1 - p.q)
    if p.q == 0:
        raise DomainError("the T-regime needs q != 0")
    return abs(p.phi_prime), abs(p.q_inverse - 1)


def existence_interval(a_dom: Number, b_box: Number, M: float, L1: float, L2: float,
                       root: Number, gap: Number) -> ExistenceInterval:
    """
    Half-width of the interval the iterates converge on: the smaller of
    alpha/|root| with alpha = min(a, b/M) and the widest Lipschitz interval
    1/(min(L1, L2) gap).
    """
    alpha = float(a_dom) if M == 0 else min(float(a_dom), float(b_box) / M)
    by_alpha = alpha / float(root)
    smallest = min(L1, L2)
    by_lipschitz = math.inf if smallest == 0 or gap == 0 else 1 / (smallest * float(gap))
    if by_lipschitz < by_alpha:
        return ExistenceInterval(by_lipschitz, alpha, "lipschitz")
    return ExistenceInterval(by_alpha, alpha, "alpha")


def _check_growth(differences: List[float]):
    streak = 0
    for previous, current in zip(differences, differences[1:]):
        streak = streak + 1 if current > previous * (1 + 1e-9) and current > 0 else 0
    if streak >= Defaults.GROWTH_LIMIT:
        raise NonConvergentIteration(
            f"successive differences grew {streak} times in a row: {[f'{d:.3g}' for d in differences[-streak - 1:]]}")


def _lift(value, p: StParams, N: int) -> TruncatedEgf:
    if isinstance(value, TruncatedEgf):
        return value
    return TruncatedEgf.constant(p, value, N)


def _iterate_series(spec: EquationSpec, y0: Number, iterations: int, N: int,
                    lattice: List[float]) -> Tuple[TruncatedEgf, List[float]]:
    p, u = spec.params, as_exact(spec.u)
    x = TruncatedEgf.variable(p, N)
    phi = TruncatedEgf.constant(p, y0, N)
    differences = []
    for k in range(iterations):
        rhs = _lift(evaluate(spec.rhs, {"x": x, "y": phi, "yu": phi.scaled(u)}), p, N)
        new = (series_antiderivative(rhs) + y0).truncate(N)
        differences.append(max(abs(new(r) - phi(r)) for r in lattice))
        logger.debug(f"_iterate_series: iteration {k + 1} difference {differences[-1]:.3g}")
        _check_growth(differences)
        phi = new
    return phi, differences


def _next_iterate(previous: Callable[[float], float], f: Callable[[float, float, float], float],
                  p: StParams, u: float, y0: float, tol: float) -> Callable[[float], float]:
    """phi_{k+1}(x) = y0 + int_0^x f(r, phi_k(r), phi_k(ur)) d_{s,t}r, memoized per point."""
    cache: Dict[float, float] = {}

    def integrand(r: float) -> float:
        return f(r, previous(r), previous(u * r))

    def iterate(x: float) -> float:
        key = float(f"{x:.13g}")
        if key not in cache:
            cache[key] = y0 + st_integral(integrand, 0, x, p, tol)
        return cache[key]

    return iterate


def _iterate_lattice(spec: EquationSpec, y0: Number, iterations: int, lattice: List[float],
                     tol: float) -> Tuple[List[float], List[float], float]:
    def f(x: float, y: float, yu: float) -> float:
        return float(evaluate(spec.rhs, {"x": x, "y": y, "yu": yu}))

    y0f, uf = float(y0), float(spec.u)
    levels = [lambda x: y0f]
    differences = []
    for k in range(iterations):
        levels.append(_next_iterate(levels[-1], f, spec.params, uf, y0f, tol))
        differences.append(max(abs(levels[-1](x) - levels[-2](x)) for x in lattice))
        logger.debug(f"_iterate_lattice: iteration {k + 1} difference {differences[-1]:.3g}")
        _check_growth(differences)
    following = _next_iterate(levels[-1], f, spec.params, uf, y0f, tol)
    values = [levels[-1](x) for x in lattice]
    residual = max(abs(following(x) - value) for x, value in zip(lattice, values))
    return values, differences, residual


def successive_approximation(spec: EquationSpec, iterations: int = Defaults.ITERATIONS, N: int = Defaults.N,
                             tol: float = Defaults.TOL) -> SolveReport:
    """
    Iterate phi_{k+1}(x) = y0 + int_0^x f(r, phi_k(r), phi_k(ur)) d_{s,t}r.

    Polynomial right-hand sides iterate exactly on truncated Ward series;
    anything else iterates pointwise through lattice integrals. The report
    holds the successive-difference norms, the regime, the existence interval
    with its binding constraint and the a priori error bound.

    Raises:
        DomainError: eta != 0
        OutsideDomain: u exceeds the root of the chosen regime
        NonConvergentIteration: differences grew GROWTH_LIMIT times in a row
    """
    eta, y0 = spec.init
    if eta != 0:
        raise DomainError(f"successive approximation starts from y(0); eta must be 0, got {eta}")
    if iterations < 1:
        raise DomainError(f"need at least one iteration, got {iterations}")
    p, u, y0 = spec.params, as_exact(spec.u), as_exact(y0)
    regime = spec.regime or _preferred_regime(p, u)
    root, gap = _regime_geometry(p, regime)
    if root == 0 or compare(u, root) > 0:
        raise OutsideDomain(f"u={u} exceeds |root|={float(root):.6g} of the {regime}-regime")

    L1, L2, M = spec.L1, spec.L2, spec.M
    estimated = None in (L1, L2, M)
    if estimated:
        estimate = lipschitz_estimate(spec.rhs, y0, float(spec.a_dom) / float(root), spec.b_box)
        L1 = estimate.L1 if L1 is None else L1
        L2 = estimate.L2 if L2 is None else L2
        M = estimate.M if M is None else M
        logger.warning(f"successive_approximation: using sampled bounds L1={L1:.6g} L2={L2:.6g} M={M:.6g}")

    interval = existence_interval(spec.a_dom, spec.b_box, M, L1, L2, root, gap)
    lattice = residual_lattice(p, interval.half_width)
    extras = {
        "regime": regime,
        "interval": interval.half_width,
        "binding": interval.binding,
        "alpha": interval.alpha,
        "L1": L1,
        "L2": L2,
        "M": M,
        "estimated": estimated,
        "iterations": iterations,
    }

    if is_polynomial(spec.rhs):
        series, differences = _iterate_series(spec, y0, iterations, N, lattice)

        def rhs(y: TruncatedEgf, x: float) -> float:
            return float(evaluate(spec.rhs, {"x": x, "y": y(x), "yu": y(float(u) * x)}))

        report = _series_report(series, rhs, interval.half_width, extras=extras)
        report.extras["mode"] = "series"
    else:
        values, differences, residual = _iterate_lattice(spec, y0, iterations, lattice, tol)
        report = SolveReport(None, lattice, values, residual, extras=extras)
        report.extras["mode"] = "lattice"
    report.extras["differences"] = differences

    if L1 or L2:
        report.region = classify_E(p, u, L1, L2, table=regime)
    try:
        report.error_bound = approximation_error_bound(p, M, L1, L2, u, spec.a_dom, iterations, N)
    except (OutsideDomain, NonConvergentSum) as e:
        logger.warning(f"successive_approximation: no error bound ({e.name}: {e})")
        report.extras["bound_error"] = e.name
    return report


def approximation_error_bound(p: StParams, M: float, L1: float, L2: float, u: Number, a_dom: Number,
                              iter_p: int, N: int = Defaults.N) -> float:
    """
    |phi - phi_p| <= M a^{p+1} (L1 (+) L2)^{p+1}_{1,u} / ((L1+L2) {p+1}_{|s|,t}!)
                     * E_{|s|,t}(L1, L2 u^{p+1}, u; a)

    The E factor is summed over at least N terms and includes its tail
    estimate.

    Raises:
        OutsideDomain: E_{|s|,t}(L1, L2 u^{p+1}, u; z) does not converge at z = a
    """
    if min(M, L1, L2) < 0 or not a_dom > 0 or not u > 0 or iter_p < 0:
        raise DomainError(f"the error bound needs M, L1, L2 >= 0 and a, u > 0; got M={M} L1={L1} L2={L2} "
                          f"a={a_dom} u={u} p={iter_p}")
    if M == 0 or L1 + L2 == 0:
        return 0.0
    abs_params = make_params(abs(p.s), p.t)
    n = iter_p + 1
    shifted = L2 * as_exact(u) ** n
    region = classify_E(abs_params, u, L1, shifted)
    if not region.admits(a_dom):
        raise OutsideDomain(f"E_{{|s|,t}}({L1},{shifted},{u};z) does not converge at z={a_dom} "
                            f"({region.label or 'unclassified'})")
    E = pantograph_exponential(abs_params, L1, shifted, u, a_dom, min_terms=N)
    sigma = Fraction(a_dom) ** n * Fraction(RisingFactor(L1, L2, u, n).value) / Fraction(fibotorial(abs_params, 1, n))
    bound = float(M) * float(sigma) / float(L1 + L2) * (E.value + E.tail_bound)
    logger.debug(f"approximation_error_bound: p={iter_p} sigma={float(sigma):.3g} E={E.value:.6g} -> {bound:.3g}")
    return bound
