"""Arithmetic expressions in the variables x and y.

Coefficient fields (diffusion, reaction, advection components, source) are
supplied as text and parsed once into an immutable AST.  Evaluation accepts
scalars or numpy arrays and is pure, so compiled expressions can be shared
freely between workers.

Grammar (tightest first): ``^`` (right associative), unary ``-``, ``* /``,
``+ -``.  Functions: sin, cos, exp, sqrt, abs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")
VARIABLES = ("x", "y")

_UFUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


def _tokenize(source):
    """Split source into (kind, text, pos) tuples; kind is one of
    'num', 'ident', 'op', 'lparen', 'rparen'."""
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                if source[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    while k < n and source[k].isdigit():
                        k += 1
                    j = k
            tokens.append(("num", source[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(("rparen", ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    return tokens


class _Parser:
    """Recursive descent over the token list.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?        # exponent may carry a unary minus
    atom   := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
    """

    def __init__(self, tokens, source_len):
        self.tokens = tokens
        self.pos = 0
        self.source_len = source_len

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("end", "", self.source_len)

    def advance(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {what}, got {tok[1]!r}" if tok[1] else f"expected {what}", tok[2])
        return tok

    def parse(self):
        node = self.expression()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expression(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def atom(self):
        tok = self.advance()
        kind, text, pos = tok
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("lparen", "'(' after function name")
                arg = self.expression()
                self.expect("rparen", "')'")
                return Call(text, arg)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
        if kind == "lparen":
            node = self.expression()
            self.expect("rparen", "')'")
            return node
        raise ExprSyntaxError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def _first_offender(x, y, mask):
    """Coordinates of the first point where mask is True, for error reporting."""
    xb, yb, mb = np.broadcast_arrays(x, y, mask)
    idx = np.argmax(mb.ravel())
    return float(xb.ravel()[idx]), float(yb.ravel()[idx])


def _eval(node, x, y):
    if isinstance(node, Num):
        if np.ndim(x) or np.ndim(y):
            return np.full(np.broadcast(x, y).shape, node.value)
        return node.value
    if isinstance(node, Var):
        v = x if node.name == "x" else y
        if np.ndim(x) or np.ndim(y):
            return np.broadcast_to(v, np.broadcast(x, y).shape)
        return v
    if isinstance(node, Neg):
        return -_eval(node.operand, x, y)
    if isinstance(node, Call):
        arg = _eval(node.arg, x, y)
        if node.func == "sqrt" and np.any(np.less(arg, 0.0)):
            raise EvalDomainError("sqrt of negative value", _first_offender(x, y, np.less(arg, 0.0)))
        with np.errstate(over="ignore", invalid="ignore"):
            out = _UFUNCS[node.func](arg)
        bad = ~np.isfinite(out)
        if np.any(bad):
            raise EvalDomainError(f"{node.func} produced a non-finite value", _first_offender(x, y, bad))
        return out
    if isinstance(node, BinOp):
        left = _eval(node.left, x, y)
        right = _eval(node.right, x, y)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            zero = np.equal(right, 0.0)
            if np.any(zero):
                raise EvalDomainError("division by zero", _first_offender(x, y, zero))
            return left / right
        if node.op == "^":
            with np.errstate(over="ignore", invalid="ignore"):
                out = np.power(left, right)
            bad = ~np.isfinite(out)
            if np.any(bad):
                raise EvalDomainError("power produced a non-finite value", _first_offender(x, y, bad))
            return out
    raise TypeError(f"unknown AST node {node!r}")


_LEVEL_ADD = 1
_LEVEL_MUL = 2
_LEVEL_NEG = 3
_LEVEL_POW = 4
_LEVEL_ATOM = 5

_OP_LEVEL = {"+": _LEVEL_ADD, "-": _LEVEL_ADD, "*": _LEVEL_MUL, "/": _LEVEL_MUL, "^": _LEVEL_POW}


def _level(node):
    if isinstance(node, (Num, Var, Call)):
        return _LEVEL_ATOM
    if isinstance(node, Neg):
        return _LEVEL_NEG
    return _OP_LEVEL[node.op]


def _print(node):
    # Parenthesization mirrors the grammar so that parse(_print(tree))
    # rebuilds the identical tree (needed for bitwise round-trip equality).
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg)})"
    if isinstance(node, Neg):
        inner = _print(node.operand)
        if _level(node.operand) <= _LEVEL_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    lvl = _OP_LEVEL[node.op]
    left = _print(node.left)
    right = _print(node.right)
    # '^' associates right: a left-nested power needs parens, a right-nested
    # one does not.  The left-associative ops are the mirror image.
    if _level(node.left) < lvl or (_level(node.left) == lvl and node.op == "^"):
        left = f"({left})"
    if _level(node.right) < lvl or (_level(node.right) == lvl and node.op != "^"):
        right = f"({right})"
    return f"{left}^{right}" if node.op == "^" else f"{left} {node.op} {right}"


class Expression:
    """Immutable compiled expression in x and y."""

    __slots__ = ("root", "source")

    def __init__(self, root, source=""):
        self.root = root
        self.source = source

    def __call__(self, x, y):
        """Evaluate at a point or elementwise over broadcast arrays."""
        if np.ndim(x) == 0 and np.ndim(y) == 0:
            return float(_eval(self.root, float(x), float(y)))
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = _eval(self.root, x, y)
        return np.array(out, dtype=np.float64)  # writable copy, drops broadcast views

    def to_source(self):
        """Render back to parseable text (parse(to_source()) evaluates identically)."""
        return _print(self.root)

    def is_constant(self):
        def walk(node):
            if isinstance(node, Var):
                return False
            if isinstance(node, Neg):
                return walk(node.operand)
            if isinstance(node, Call):
                return walk(node.arg)
            if isinstance(node, BinOp):
                return walk(node.left) and walk(node.right)
            return True

        return walk(self.root)

    def __repr__(self):
        return f"Expression({self.to_source()!r})"


def parse(source):
    """Parse expression text into an Expression.

    Raises ExprSyntaxError (with character position) on malformed input and
    UnknownIdentifierError for identifiers outside x, y and the function set.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    tokens = _tokenize(source)
    return Expression(_Parser(tokens, len(source)).parse(), source)


def evaluate(e, x, y):
    """Functional form of Expression.__call__."""
    return e(x, y)
