"""
Recursive descent parser for right-hand sides of functional-difference
equations in the variables x, y and yu (the value y(u x)).

GRAMMAR

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' uint)?
    atom   := number | 'x' | 'y' | 'yu' | '(' expr ')' | '-' atom

Integer literals parse to exact Fractions, decimals to floats.
"""
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Union

import sympy as sp

from utils.errors import DomainError, ExprSyntaxError
from utils.numeric import Number

logger = logging.getLogger('expr_parser')

VARIABLES = ("x", "y", "yu")


#############################################
# AST
#############################################
@dataclass(frozen=True)
class Num:
    value: Number


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exponent: int


ExprAst = Union[Num, Var, Neg, BinOp, Pow]


#############################################
# Tokenizer
#############################################
class Token(NamedTuple):
    kind: str  # number, ident, op, eof
    text: str
    position: int


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def tokenize(text: str) -> List[Token]:
    tokens, position = [], 0
    while True:
        while position < len(text) and text[position].isspace():
            position += 1
        if position >= len(text):
            tokens.append(Token("eof", "", position))
            return tokens
        match = _TOKEN_RE.match(text, position)
        if not match or match.end() == position:
            raise ExprSyntaxError(position, {"number", "x", "y", "yu", "(", "-"}, text[position])
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        position = match.end()


#############################################
# Parser
#############################################
class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def fail(self, expected) -> ExprSyntaxError:
        token = self.current
        return ExprSyntaxError(token.position, expected, None if token.kind == "eof" else token.text)

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.current.kind != "eof":
            raise self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ExprAst:
        node = self.atom()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise self.fail({"nonnegative integer"})
            self.advance()
            node = Pow(node, int(token.text))
        return node

    def atom(self) -> ExprAst:
        token = self.current
        if token.kind == "number":
            self.advance()
            if token.text.isdigit():
                return Num(Fraction(int(token.text)))
            return Num(float(token.text))
        if token.kind == "ident":
            if token.text not in VARIABLES:
                raise self.fail(set(VARIABLES))
            self.advance()
            return Var(token.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expr()
            if not (self.current.kind == "op" and self.current.text == ")"):
                raise self.fail({")"})
            self.advance()
            return node
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Neg(self.atom())
        raise self.fail({"number", "x", "y", "yu", "(", "-"})


def parse_expr(text: str) -> ExprAst:
    """
    Parse an equation right-hand side.

    Raises:
        ExprSyntaxError: with the offending position and the expected tokens
    """
    ast = _Parser(text).parse()
    logger.debug(f"parse_expr: {text!r} -> {ast}")
    return ast


#############################################
# Printing and evaluation
#############################################
def _is_atom(node: ExprAst) -> bool:
    return isinstance(node, (Var, Neg)) or (isinstance(node, Num) and _number_is_literal(node.value))


def _number_is_literal(value: Number) -> bool:
    if isinstance(value, Fraction):
        return value.denominator == 1 and value >= 0
    return value >= 0


def _number_text(value: Number) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator) if value >= 0 else f"(0 - {-value.numerator})"
        return f"({value.numerator}/{value.denominator})"
    return repr(float(value)) if value >= 0 else f"(0 - {repr(-float(value))})"


def _atom_text(node: ExprAst) -> str:
    text = print_expr(node)
    return text if _is_atom(node) else f"({text})"


def print_expr(node: ExprAst) -> str:
    """Text that parse_expr reads back to the same tree."""
    if isinstance(node, Num):
        return _number_text(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _atom_text(node.operand)
    if isinstance(node, Pow):
        return f"{_atom_text(node.base)}^{node.exponent}"
    if isinstance(node, BinOp):
        return f"({print_expr(node.left)} {node.op} {print_expr(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: ExprAst, env: Mapping[str, Any]) -> Any:
    """
    Evaluate over any values supporting + - * / and integer powers
    (numbers, truncated series, numpy arrays).
    """
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise DomainError(f"no value bound for variable {node.name!r}")
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Pow):
        return evaluate(node.base, env) ** node.exponent
    left, right = evaluate(node.left, env), evaluate(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if isinstance(right, (int, float, Fraction)) and right == 0:
        raise DomainError("division by zero in expression")
    return left / right


def variables(node: ExprAst) -> FrozenSet[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, (Neg,)):
        return variables(node.operand)
    if isinstance(node, Pow):
        return variables(node.base)
    return variables(node.left) | variables(node.right)


def is_polynomial(node: ExprAst) -> bool:
    """True when no variable appears in a denominator."""
    if isinstance(node, (Num, Var)):
        return True
    if isinstance(node, Neg):
        return is_polynomial(node.operand)
    if isinstance(node, Pow):
        return is_polynomial(node.base)
    if node.op == "/" and variables(node.right):
        return False
    return is_polynomial(node.left) and is_polynomial(node.right)


def to_sympy(node: ExprAst, symbols: Optional[Dict[str, sp.Symbol]] = None) -> sp.Expr:
    """Exact sympy expression: integer literals become Rationals."""
    if symbols is None:
        symbols = {name: sp.Symbol(name) for name in VARIABLES}
    if isinstance(node, Num):
        value = node.value
        if isinstance(value, Fraction):
            return sp.Rational(value.numerator, value.denominator)
        return sp.Float(value)
    if isinstance(node, Var):
        return symbols[node.name]
    if isinstance(node, Neg):
        return -to_sympy(node.operand, symbols)
    if isinstance(node, Pow):
        return to_sympy(node.base, symbols) ** node.exponent
    left, right = to_sympy(node.left, symbols), to_sympy(node.right, symbols)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right


if __name__ == "__main__":
    tree = parse_expr("x*(y^2 - 1)/3")
    print(tree)
    print(print_expr(tree), "=", evaluate(tree, {"x": 2, "y": 3, "yu": 0}))
