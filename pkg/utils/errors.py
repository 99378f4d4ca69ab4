"""
Error types raised by the stcalc library.

Every library error carries the exit code the CLI maps it to and a short
machine-readable name that ends up in the JSON error artifact.
"""
from typing import FrozenSet, Iterable, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_NON_CONVERGENCE = 3


class StCalcError(ValueError):
    exit_code = EXIT_DOMAIN

    @property
    def name(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"name": self.name, "message": str(self)}


class UsageError(StCalcError):
    exit_code = EXIT_USAGE


class DegenerateParams(StCalcError):
    """(s,t) violates s != 0 and s^2 + 4t >= 0."""


class DegenerateQ(StCalcError):
    """The operation needs q != 1 (or a usable q)."""


class ZeroFactor(StCalcError):
    """Some {k}_{s,t} vanishes inside a fibotorial."""


class ParamMismatch(StCalcError):
    pass


class OutsideDomain(StCalcError):
    pass


class DomainError(StCalcError):
    pass


class Unsupported(StCalcError):
    pass


class PoleHit(StCalcError):
    pass


class NonConvergentSum(StCalcError):
    exit_code = EXIT_NON_CONVERGENCE


class NonConvergentIteration(StCalcError):
    exit_code = EXIT_NON_CONVERGENCE


class ExprSyntaxError(StCalcError):
    exit_code = EXIT_USAGE

    def __init__(self, position: int, expected: Iterable[str], found: Optional[str] = None):
        self.position = position
        self.expected: FrozenSet[str] = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected))
        got = "end of input" if found is None else repr(found)
        super().__init__(f"at position {position}: expected one of {{{wanted}}}, found {got}")

    @property
    def name(self) -> str:
        return "SyntaxError"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "message": str(self),
            "position": self.position,
            "expected": sorted(self.expected),
        }
