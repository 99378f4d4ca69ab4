"""
Partial Bell polynomials B_{n,k} and Faa di Bruno composition of classical
exponential generating functions.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from utils.config import Defaults
from utils.errors import DomainError
from utils.numeric import Number

logger = logging.getLogger('bell')

# (coefficient, ((h, j_h), ...)) with coefficient n!/prod(j_h! (h!)^{j_h})
BellTerm = Tuple[int, Tuple[Tuple[int, int], ...]]


@dataclass(frozen=True)
class BellArgs:
    n: int
    k: int
    x: Tuple[Number, ...]

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        if len(self.x) != self.n - self.k + 1:
            raise DomainError(f"B_{{{self.n},{self.k}}} takes {self.n - self.k + 1} arguments, got {len(self.x)}")
        object.__setattr__(self, "x", tuple(self.x))


def _partitions(n: int, k: int, largest: int):
    """Partitions of n into exactly k parts, each <= largest, non-increasing."""
    if k == 0:
        if n == 0:
            yield ()
        return
    for part in range(min(n - k + 1, largest), 0, -1):
        if part * k < n:
            break
        for rest in _partitions(n - part, k - 1, part):
            yield (part,) + rest


@lru_cache(maxsize=None)
def bell_terms(n: int, k: int) -> Tuple[BellTerm, ...]:
    if n > Defaults.BELL_MAX_N:
        raise DomainError(f"partial Bell polynomials are capped at n={Defaults.BELL_MAX_N}, got {n}")
    terms = []
    for parts in _partitions(n, k, n):
        multiplicities = {}
        for h in parts:
            multiplicities[h] = multiplicities.get(h, 0) + 1
        denominator = 1
        for h, j in multiplicities.items():
            denominator *= math.factorial(j) * math.factorial(h) ** j
        terms.append((math.factorial(n) // denominator, tuple(sorted(multiplicities.items()))))
    logger.debug(f"B_{{{n},{k}}}: {len(terms)} partitions")
    return tuple(terms)


def partial_bell(args: BellArgs) -> Number:
    """
    B_{n,k}(x_1, ..., x_{n-k+1}) summed over the partitions of n into k parts.

    Integer coefficients stay exact; the result is exact when every x_h is.
    """
    total = 0
    for coefficient, multiplicities in bell_terms(args.n, args.k):
        term = coefficient
        for h, j in multiplicities:
            term = term * args.x[h - 1] ** j
        total = total + term
    return total


def compose_egf(f_derivs: Sequence[Number], g: Sequence[Number], N: Optional[int] = None) -> List[Number]:
    """
    Classical EGF coefficients of f(g(x)) through order N.

    Args:
        f_derivs: f(b_0), f'(b_0), f''(b_0), ...; missing entries count as zero
        g: classical EGF coefficients b_0, b_1, ..., b_N of g
        N: truncation order, defaults to len(g) - 1

    Returns:
        [f(b_0), c_1, ..., c_N] with c_n = sum_k f^(k)(b_0) B_{n,k}(b_1, ...)
    """
    if N is None:
        N = len(g) - 1
    if len(g) < N + 1:
        raise DomainError(f"g needs {N + 1} coefficients, got {len(g)}")
    result = [f_derivs[0]]
    for n in range(1, N + 1):
        value = 0
        for k in range(1, min(n, len(f_derivs) - 1) + 1):
            if f_derivs[k] == 0:
                continue
            value = value + f_derivs[k] * partial_bell(BellArgs(n, k, tuple(g[1:n - k + 2])))
        result.append(value)
    return result


if __name__ == "__main__":
    print("B_{3,2}(1,1) =", partial_bell(BellArgs(3, 2, (1, 1))))
    print("B_{4,4}(2) =", partial_bell(BellArgs(4, 4, (2,))))
    # exp(x) composed with x -> e^x coefficients
    print(compose_egf([1] * 8, [0, 1] + [0] * 6))
