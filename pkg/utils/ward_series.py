"""
Truncated (s,t)-exponential generating functions sum a_n x^n/{n}_{s,t}!,
their ring operations (fibonomial convolution) and convergence classes of the
deformed series sum u^{C(n,2)} a_n z^n/{n}!.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

from typing_extensions import Literal

from utils.core_params import StParams, make_params
from utils.errors import DomainError, NonConvergentSum, OutsideDomain, ParamMismatch, Unsupported, ZeroFactor
from utils.numeric import Number, as_exact, binom2, compare, is_exact, parse_number, to_json_value
from utils.sequences import fibonacci_numbers, fibonomial

logger = logging.getLogger('ward_series')


@dataclass(frozen=True)
class ConvergenceClass:
    kind: Literal["Entire", "Disk", "PointOnly"]
    radius: Optional[float] = None

    def admits(self, x: Number) -> bool:
        if self.kind == "Entire":
            return True
        if self.kind == "PointOnly":
            return x == 0
        return abs(x) < self.radius

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.radius is not None:
            out["radius"] = self.radius
        return out

    @classmethod
    def disk(cls, radius: float) -> "ConvergenceClass":
        if math.isinf(radius):
            return cls("Entire")
        return cls("Disk", radius)


ENTIRE = ConvergenceClass("Entire")
POINT_ONLY = ConvergenceClass("PointOnly")


class EgfValue(NamedTuple):
    value: float
    tail_bound: float
    terms: int


@dataclass(frozen=True)
class TruncatedEgf:
    """sum_{n<=N} a_n x^n/{n}_{s,t}! over fixed params."""
    params: StParams
    coeffs: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(as_exact(c) for c in self.coeffs))
        if not self.coeffs:
            raise DomainError("a truncated series needs at least one coefficient")
        numbers = fibonacci_numbers(self.params.s, self.params.t, self.N)
        for k in range(1, self.N + 1):
            if numbers[k] == 0:
                raise ZeroFactor(f"{{{k}}}_{{{self.params.s},{self.params.t}}} = 0 inside order {self.N}")

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    # ----- constructors -----
    @classmethod
    def constant(cls, params: StParams, c: Number, N: int) -> "TruncatedEgf":
        return cls(params, (c,) + (0,) * N)

    @classmethod
    def variable(cls, params: StParams, N: int) -> "TruncatedEgf":
        """The series of x: a_1 = {1}! = 1."""
        return cls(params, tuple(1 if n == 1 else 0 for n in range(N + 1)))

    @classmethod
    def exponential(cls, params: StParams, N: int, a: Number = 1, u: Number = 1) -> "TruncatedEgf":
        """exp_{s,t}(a x, u): a_n = a^n u^{C(n,2)}."""
        a, u = as_exact(a), as_exact(u)
        return cls(params, tuple(a ** n * u ** binom2(n) for n in range(N + 1)))

    # ----- structure -----
    def truncate(self, N: int) -> "TruncatedEgf":
        if N >= self.N:
            return self
        return TruncatedEgf(self.params, self.coeffs[: N + 1])

    def scaled(self, c: Number) -> "TruncatedEgf":
        """Series of f(c x)."""
        c = as_exact(c)
        return TruncatedEgf(self.params, tuple(a * c ** n for n, a in enumerate(self.coeffs)))

    def power_coefficients(self) -> List[Number]:
        """Ordinary coefficients a_n/{n}!."""
        numbers = fibonacci_numbers(self.params.s, self.params.t, self.N)
        out, fact = [], 1
        for n, a in enumerate(self.coeffs):
            if n:
                fact = fact * numbers[n]
            out.append(a / fact)
        return out

    def __call__(self, x: Number) -> float:
        """The truncated polynomial itself at x, no tail check."""
        return math.fsum(_terms(self, 1, float(x)))

    # ----- arithmetic -----
    def _lift(self, other) -> "TruncatedEgf":
        if isinstance(other, TruncatedEgf):
            return other
        return TruncatedEgf.constant(self.params, other, self.N)

    def __add__(self, other):
        return egf_add(self, self._lift(other))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedEgf(self.params, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return egf_add(self, -self._lift(other))

    def __rsub__(self, other):
        return egf_add(self._lift(other), -self)

    def __mul__(self, other):
        if isinstance(other, TruncatedEgf):
            return egf_mul(self, other)
        other = as_exact(other)
        return TruncatedEgf(self.params, tuple(a * other for a in self.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedEgf):
            raise Unsupported("division by a series is not supported; divide by constants only")
        return self * (1 / as_exact(other))

    def __rtruediv__(self, other):
        raise Unsupported("division by a series is not supported; divide by constants only")

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise Unsupported(f"series powers must be nonnegative integers, got {exponent}")
        result = TruncatedEgf.constant(self.params, 1, self.N)
        for _ in range(exponent):
            result = egf_mul(result, self)
        return result

    # ----- serialization -----
    def to_dict(self) -> dict:
        return {
            "s": to_json_value(self.params.s),
            "t": to_json_value(self.params.t),
            "N": self.N,
            "basis": "st-egf",
            "coeffs": [to_json_value(a) for a in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TruncatedEgf":
        if data.get("basis") != "st-egf":
            raise DomainError(f"unknown series basis {data.get('basis')!r}")
        parse = lambda v: parse_number(v) if isinstance(v, str) else v
        params = make_params(parse(data["s"]), parse(data["t"]))
        coeffs = tuple(parse(c) for c in data["coeffs"])
        if len(coeffs) != data["N"] + 1:
            raise DomainError(f"N={data['N']} but {len(coeffs)} coefficients")
        return cls(params, coeffs)


def _check_params(f: TruncatedEgf, g: TruncatedEgf):
    if f.params.as_tuple() != g.params.as_tuple():
        raise ParamMismatch(f"series over {f.params.as_tuple()} and {g.params.as_tuple()}")


def egf_add(f: TruncatedEgf, g: TruncatedEgf) -> TruncatedEgf:
    _check_params(f, g)
    order = min(f.N, g.N)
    return TruncatedEgf(f.params, tuple(f.coeffs[n] + g.coeffs[n] for n in range(order + 1)))


def egf_mul(f: TruncatedEgf, g: TruncatedEgf) -> TruncatedEgf:
    """c_n = sum_k C(n,k)_{s,t} a_k b_{n-k}."""
    _check_params(f, g)
    order = min(f.N, g.N)
    coeffs = []
    for n in range(order + 1):
        total = 0
        for k in range(n + 1):
            a, b = f.coeffs[k], g.coeffs[n - k]
            if a == 0 or b == 0:
                continue
            total = total + fibonomial(f.params, 1, n, k) * a * b
        coeffs.append(total)
    return TruncatedEgf(f.params, tuple(coeffs))


def classify_series(p: StParams, u: Number, alpha: Number) -> ConvergenceClass:
    """
    Where sum u^{C(n,2)} a_n z^n/{n}! converges, given alpha = lim |a_{n+1}/a_n|.

    |q|<1: entire for u < |phi|, disk 1/(alpha|1-q|) at u = |phi|, z=0 only above.
    |q|>1: the same with |phi'| and |1/q - 1|.
    Double root (s,t) = (2c,-c^2): entire for u <= |c|, z=0 only above.
    The divisibility side conditions on a_n are not checked.
    """
    u = as_exact(u)
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")

    if p.degenerate_q:
        return ENTIRE if compare(u, abs(p.phi)) <= 0 else POINT_ONLY

    if p.contracting:
        root, gap = abs(p.phi), abs(1 - p.q)
    else:
        root, gap = abs(p.phi_prime), abs(p.q_inverse - 1)

    position = compare(u, root)
    if position < 0:
        return ENTIRE
    if position > 0:
        return POINT_ONLY
    if alpha == 0:
        return ENTIRE
    return ConvergenceClass("Disk", float(1 / (alpha * gap)))


def geometric_tail(terms: Sequence[float], order: int) -> float:
    """
    Tail estimate |first omitted term|/(1 - r) from the last two nonzero
    retained terms, r being their per-index ratio.

    Raises:
        NonConvergentSum: r >= 1
    """
    nonzero = [(n, abs(v)) for n, v in enumerate(terms) if v != 0]
    if len(nonzero) < 2:
        return 0.0
    (i, ti), (j, tj) = nonzero[-2], nonzero[-1]
    r = (tj / ti) ** (1.0 / (j - i))
    if r >= 1:
        raise NonConvergentSum(f"term ratio {r:.3g} >= 1 at order {order}")
    return tj * r ** (order + 1 - j) / (1 - r)


def _terms(f: TruncatedEgf, u: Number, x: float) -> List[float]:
    # exact a_n u^{C(n,2)}/{n}! before going to float, so large N does not overflow
    terms = []
    for n, c in enumerate(f.power_coefficients()):
        weight = c * u ** binom2(n) if is_exact(c, u) else float(c) * float(u) ** binom2(n)
        terms.append(float(weight) * x ** n)
    return terms


def _ratio_estimate(f: TruncatedEgf) -> Number:
    """|a_j/a_i|^{1/(j-i)} from the last two nonzero coefficients; 0 when fewer than two."""
    nonzero = [(n, abs(a)) for n, a in enumerate(f.coeffs) if a != 0]
    if len(nonzero) < 2:
        return 0
    (i, ai), (j, aj) = nonzero[-2], nonzero[-1]
    ratio = aj / ai
    return ratio if j - i == 1 else float(ratio) ** (1.0 / (j - i))


def egf_eval(f: TruncatedEgf, u: Number, x: Number, alpha: Optional[Number] = None) -> EgfValue:
    """
    Evaluate sum_{n<=N} u^{C(n,2)} a_n x^n/{n}! with a tail estimate.

    Args:
        f: the series
        u: deformation parameter; u = 0 gives a_0 + a_1 x
        x: real point
        alpha: coefficient ratio limit; estimated from the last coefficients when omitted

    Raises:
        OutsideDomain: the convergence class excludes x
        NonConvergentSum: the retained terms do not decay
    """
    u = as_exact(u)
    if x == 0:
        return EgfValue(float(f.coeffs[0]), 0.0, 1)
    if u == 0:
        value = f.coeffs[0] + (f.coeffs[1] * x if f.N >= 1 else 0)
        return EgfValue(float(value), 0.0, min(f.N + 1, 2))

    if alpha is None:
        # on the root the radius depends on alpha; read it off the retained coefficients
        alpha = _ratio_estimate(f) if classify_series(f.params, u, 1).kind == "Disk" else 0
    region = classify_series(f.params, u, alpha)
    if not region.admits(x):
        raise OutsideDomain(f"x={x} is outside the convergence region {region.kind}"
                            + (f" (radius {region.radius:.6g})" if region.radius else ""))

    terms = _terms(f, u, float(x))
    tail = geometric_tail(terms, f.N)
    logger.debug(f"egf_eval: N={f.N} x={x} u={u} tail={tail:.3g}")
    return EgfValue(math.fsum(terms), tail, len(terms))
