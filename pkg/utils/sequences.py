"""
(s,t)-Fibonacci numbers {n}_{s,t}, fibotorials, fibonomials, the companion
matrix powers and the limit classification of u^{n-1}{n}_{s,t}.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional

import numpy as np
from typing_extensions import Literal

from utils.core_params import StParams
from utils.errors import DegenerateQ, DomainError, ZeroFactor
from utils.numeric import Number, as_exact, binom2, compare, is_exact

logger = logging.getLogger('sequences')


class SeqValue(NamedTuple):
    n: int
    value: Number


@dataclass(frozen=True)
class LimitClass:
    kind: Literal["Zero", "Finite", "Divergent"]
    limit: Optional[Number] = None
    # |q|>1 with phi_prime < 0: the sequence flips sign, limit is of its magnitude
    alternating: bool = False

    def to_dict(self) -> dict:
        return {"kind": self.kind, "limit": self.limit, "alternating": self.alternating}


class ChebyshevCheck(NamedTuple):
    value: Number
    reference: Number
    agrees: bool


@lru_cache(maxsize=256)
def _recurrence(s: Number, t: Number, n: int) -> tuple:
    values = [s * 0, s * 0 + 1]
    for _ in range(n - 1):
        values.append(s * values[-1] + t * values[-2])
    return tuple(values[: n + 1])


def fibonacci_numbers(s: Number, t: Number, n: int) -> List[Number]:
    """
    {0}..{n} for the recurrence {n+2} = s{n+1} + t{n}, without validating (s,t).

    Used directly for (p,q)-numbers and Chebyshev values where s^2+4t may be
    negative.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return list(_recurrence(as_exact(s), as_exact(t), n))


def st_number(p: StParams, n: int) -> Number:
    """{n}_{s,t} by the defining recurrence. Exact when s and t are."""
    return fibonacci_numbers(p.s, p.t, n)[n]


def st_sequence(p: StParams, n_max: int) -> List[SeqValue]:
    return [SeqValue(n, v) for n, v in enumerate(fibonacci_numbers(p.s, p.t, n_max))]


def st_number_binet(p: StParams, n: int) -> Number:
    """(phi^n - phi'^n)/(phi - phi'); n (s/2)^{n-1} on the double-root branch."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n == 0:
        return p.phi * 0
    if p.degenerate_q:
        return n * p.phi ** (n - 1)
    return (p.phi ** n - p.phi_prime ** n) / (p.phi - p.phi_prime)


def q_number(q: Number, n: int) -> Number:
    """[n]_q = 1 + q + ... + q^{n-1}."""
    return sum((q ** k for k in range(n)), q * 0)


def st_number_qform(p: StParams, n: int) -> Number:
    """phi^{n-1} [n]_q, the q-form of {n}_{s,t}."""
    if p.degenerate_q:
        raise DegenerateQ("the q-form needs q != 1")
    if n == 0:
        return p.phi * 0
    return p.phi ** (n - 1) * (1 - p.q ** n) / (1 - p.q)


def fibotorial(p: StParams, u: Number, n: int) -> Number:
    """
    Deformed fibotorial u^{C(n,2)} {1}{2}...{n}.

    Raises:
        ZeroFactor: some {k}_{s,t} with k <= n is zero
    """
    numbers = fibonacci_numbers(p.s, p.t, n)
    result = as_exact(u) ** binom2(n)
    for k in range(1, n + 1):
        if numbers[k] == 0:
            raise ZeroFactor(f"{{{k}}}_{{{p.s},{p.t}}} = 0")
        result *= numbers[k]
    return result


def fibotorial_qform(p: StParams, n: int) -> Number:
    """phi^{C(n,2)} [n]_q!, equal to fibotorial(p, 1, n)."""
    result = p.phi ** binom2(n)
    for k in range(1, n + 1):
        result *= q_number(p.q, k)
    return result


def _log_fibotorial(numbers: List[Number], n: int):
    log_abs, negatives = 0.0, 0
    for k in range(1, n + 1):
        value = float(numbers[k])
        if value == 0:
            raise ZeroFactor(f"{{{k}}} = 0")
        log_abs += math.log(abs(value))
        negatives += value < 0
    return log_abs, negatives


def fibonomial(p: StParams, u: Number, n: int, k: int) -> Number:
    """
    Deformed fibonomial u^{k(n-k)} {n}!/({k}!{n-k}!).

    Exact fibotorial ratio in exact mode; log-space products in float mode
    so large n does not overflow.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    u = as_exact(u)
    if is_exact(p.s, p.t, u):
        return u ** (k * (n - k)) * fibotorial(p, 1, n) / (fibotorial(p, 1, k) * fibotorial(p, 1, n - k))

    numbers = fibonacci_numbers(p.s, p.t, n)
    log_n, neg_n = _log_fibotorial(numbers, n)
    log_k, neg_k = _log_fibotorial(numbers, k)
    log_nk, neg_nk = _log_fibotorial(numbers, n - k)
    sign = -1.0 if (neg_n - neg_k - neg_nk) % 2 else 1.0
    return float(u) ** (k * (n - k)) * sign * math.exp(log_n - log_k - log_nk)


def _companion(p: StParams, u: Number) -> np.ndarray:
    u = as_exact(u)
    dtype = object if is_exact(p.s, p.t, u) else float
    return np.array([[u * p.s, u * u * p.t], [u * 0 + 1, u * 0]], dtype=dtype)


def matrix_power(p: StParams, u: Number, n: int) -> np.ndarray:
    """
    Closed form of [[us, u^2 t],[1, 0]]^n:

        [[u^n {n+1}, u^{n+1} t {n}], [u^{n-1} {n}, u^n t {n-1}]]
    """
    if n < 1:
        raise DomainError(f"matrix_power needs n >= 1, got {n}")
    u = as_exact(u)
    f = fibonacci_numbers(p.s, p.t, n + 1)
    dtype = object if is_exact(p.s, p.t, u) else float
    return np.array(
        [
            [u ** n * f[n + 1], u ** (n + 1) * p.t * f[n]],
            [u ** (n - 1) * f[n], u ** n * p.t * f[n - 1]],
        ],
        dtype=dtype,
    )


def matrix_power_iterated(p: StParams, u: Number, n: int) -> np.ndarray:
    base = _companion(p, u)
    result = base
    for _ in range(n - 1):
        result = result @ base
    return result


def limit_class(p: StParams, u: Number) -> LimitClass:
    """
    Behaviour of u^{n-1}{n}_{s,t} as n grows.

    |q|<1: Zero below u = 1/phi, Finite(1/(1-q)) at it, Divergent above.
    |q|>1: the same with 1/|phi'| and Finite(1/(1-1/q)).
    """
    if p.degenerate_q:
        raise DegenerateQ("limit classification needs |q| != 1")
    u = as_exact(u)
    if u < 0:
        raise DomainError(f"u must be nonnegative, got {u}")

    if p.contracting:
        position = compare(u * abs(p.phi), 1)
        finite = 1 / (1 - p.q)
        alternating = False
    else:
        position = compare(u * abs(p.phi_prime), 1)
        finite = 1 / (1 - p.q_inverse)
        alternating = p.phi_prime < 0

    logger.debug(f"limit_class: (s,t)=({p.s},{p.t}) u={u} position={position}")
    if position < 0:
        return LimitClass("Zero")
    if position == 0:
        return LimitClass("Finite", finite, alternating)
    return LimitClass("Divergent")


def chebyshev_check(tval: Number, n: int) -> ChebyshevCheck:
    """{n}_{2t,-1} against U_{n-1}(t) from the Chebyshev recurrence."""
    tval = as_exact(tval)
    value = fibonacci_numbers(2 * tval, -1, n)[n]
    # U_{-1} = 0, U_0 = 1, U_k = 2t U_{k-1} - U_{k-2}
    previous, current = tval * 0, tval * 0 + 1
    if n == 0:
        reference = previous
    else:
        for _ in range(n - 1):
            previous, current = current, 2 * tval * current - previous
        reference = current
    agrees = value == reference if is_exact(tval) else math.isclose(value, reference, rel_tol=1e-10, abs_tol=1e-12)
    if not agrees:
        logger.warning(f"chebyshev_check: {value} != U_{n - 1}({tval}) = {reference}")
    return ChebyshevCheck(value, reference, agrees)


if __name__ == "__main__":
    from utils.core_params import make_params, named_params

    for family in ("fibonacci", "pell", "jacobsthal", "mersenne"):
        params = named_params(family)
        print(family, [v.value for v in st_sequence(params, 10)])
    print("(5,-6):", [st_number(make_params(5, -6), n) for n in range(6)])
    print(matrix_power(make_params(5, -6), 1, 4))
