"""
Parameter pairs (s,t), their characteristic roots and deformations.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from utils.errors import DegenerateParams, DomainError
from utils.numeric import Number, as_exact, is_exact, sqrt

logger = logging.getLogger('core_params')


@dataclass(frozen=True)
class StParams:
    """
    A validated pair (s,t) with the roots of x^2 - s x - t.

    phi is the root (s + sqrt(s^2+4t))/2, phi_prime the other one, q their
    ratio phi_prime/phi. For s^2+4t = 0 both roots coincide and q = 1; such
    pairs are kept but flagged with degenerate_q.
    """
    s: Number
    t: Number
    phi: Number
    phi_prime: Number
    q: Number
    degenerate_q: bool = False

    @property
    def exact(self) -> bool:
        return is_exact(self.s, self.t, self.phi, self.phi_prime, self.q)

    @property
    def discriminant(self) -> Number:
        return self.s * self.s + 4 * self.t

    @property
    def root_gap(self) -> Number:
        """phi - phi_prime, i.e. sqrt(s^2+4t)."""
        return self.phi - self.phi_prime

    @property
    def q_inverse(self) -> Number:
        if self.q == 0:
            raise DomainError(f"q = 0 has no inverse for (s,t)=({self.s},{self.t})")
        return 1 / self.q

    @property
    def contracting(self) -> bool:
        """True in the |q| < 1 branch."""
        return abs(self.q) < 1

    def as_tuple(self):
        return (self.s, self.t)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "phi": self.phi,
            "phi_prime": self.phi_prime,
            "q": self.q,
            "degenerate_q": self.degenerate_q,
        }


@dataclass(frozen=True)
class Deformation:
    u: Number

    def __post_init__(self):
        if not self.u > 0:
            raise DomainError(f"deformation parameter must be positive, got u={self.u}")


def make_params(s: Number, t: Number) -> StParams:
    """
    Build StParams for the recurrence {n+2} = s{n+1} + t{n}.

    Args:
        s: recurrence coefficient, nonzero
        t: recurrence coefficient with s^2 + 4t >= 0

    Returns:
        StParams with phi, phi_prime and q

    Raises:
        DegenerateParams: s = 0, s^2 + 4t < 0, or phi = 0 (s < 0, t = 0)
    """
    s, t = as_exact(s), as_exact(t)
    if s == 0:
        raise DegenerateParams("s must be nonzero")
    disc = s * s + 4 * t
    if disc < 0:
        raise DegenerateParams(f"s^2 + 4t must be positive, got {disc} for (s,t)=({s},{t})")

    if disc == 0:
        half = s / 2 if is_exact(s) else s / 2.0
        logger.debug(f"(s,t)=({s},{t}) has a double root {half}; q=1")
        return StParams(s=s, t=t, phi=half, phi_prime=half, q=Fraction(1) if is_exact(half) else 1.0,
                        degenerate_q=True)

    root = sqrt(disc)
    if is_exact(s, t) and not is_exact(root):
        logger.debug(f"discriminant {disc} is not a rational square, using float roots")
        s_f, t_f = float(s), float(t)
        phi = (s_f + root) / 2
        phi_prime = (s_f - root) / 2
    else:
        phi = (s + root) / 2
        phi_prime = (s - root) / 2
    if phi == 0:
        raise DegenerateParams(f"phi = 0 for (s,t)=({s},{t}); q is undefined")
    return StParams(s=s, t=t, phi=phi, phi_prime=phi_prime, q=phi_prime / phi)


def deform(p: StParams, u: Union[Number, Deformation]) -> StParams:
    """Return the params (u s, u^2 t). q is unchanged."""
    if not isinstance(u, Deformation):
        u = Deformation(as_exact(u))
    return make_params(u.u * p.s, u.u * u.u * p.t)


# Named specializations of {n}_{s,t}
FAMILIES = {
    "fibonacci": lambda: (1, 1),
    "pell": lambda: (2, 1),
    "jacobsthal": lambda: (1, 2),
    "mersenne": lambda: (3, -2),
    "repunit": lambda b: (b + 1, -b),
    "pq": lambda p, q: (p + q, -p * q),
    "chebyshev": lambda t: (2 * t, -1),
    "lucas": lambda P, Q: (P, -Q),
}


def named_params(family: str, *args: Number) -> StParams:
    """
    StParams for a named family, e.g. named_params("pell") or
    named_params("pq", 3, 2).
    """
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    try:
        s, t = builder(*[as_exact(a) for a in args])
    except TypeError:
        raise DomainError(f"wrong number of arguments for family {family!r}")
    return make_params(s, t)
