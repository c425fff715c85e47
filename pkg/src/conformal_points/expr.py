"""Closed-form scalar expressions: parsing, evaluation, symbolic derivatives.

Grammar (standard precedence, ^ binds tightest and is right-associative):

    expr   :=  term  (('+' | '-') term)*
    term   :=  unary (('*' | '/') unary)*
    unary  :=  '-' unary | power
    power  :=  atom ('^' unary)?
    atom   :=  NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Supported functions: sin, cos, tan, exp, log, sqrt, abs (one argument)
and atan2 (two arguments).  The name ``pi`` is accepted as a numeric
constant.  Every other identifier must be a declared variable.

ASTs are immutable; evaluation and differentiation are pure functions, so
expressions are safe to share between threads.  Evaluation accepts either
scalars or numpy arrays as variable values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    EvalDomainError,
    ExprSyntaxError,
    MissingBindingError,
    UnknownIdentifierError,
)

__all__ = [
    "Node", "Num", "Var", "Neg", "BinOp", "Call",
    "parse", "evaluate", "evaluate_array", "differentiate", "to_string",
    "variables_of",
]


# --- AST nodes ------------------------------------------------------------

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple


FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1,
    "sqrt": 1, "abs": 1, "atan2": 2,
}

CONSTANTS = {"pi": math.pi}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            # skip leading whitespace manually to report the right offset
            stripped = source[pos:]
            off = pos + (len(stripped) - len(stripped.lstrip()))
            if off >= n:
                break
            raise ExprSyntaxError(f"unexpected character '{source[off]}'", off)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source, variables):
        self.source = source
        self.variables = set(variables)
        bad = self.variables & (set(FUNCTIONS) | set(CONSTANTS))
        if bad:
            raise ValueError(f"variable names collide with builtins: {sorted(bad)}")
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(
                f"unexpected token '{text or 'end of input'}'", off, expected=f"'{op}'")
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token '{text}'", off,
                                  expected="end of input")
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        if kind == "op" and text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifierError(text, off)
                self.advance()
                args = [self.expr()]
                while True:
                    k, t, o = self.peek()
                    if k == "op" and t == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != FUNCTIONS[text]:
                    raise ExprSyntaxError(
                        f"{text} takes {FUNCTIONS[text]} argument(s), got {len(args)}",
                        off)
                return Call(text, tuple(args))
            if text in self.variables:
                return Var(text)
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            raise UnknownIdentifierError(text, off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"unexpected token '{text or 'end of input'}'", off,
            expected="number, identifier or '('")


def parse(source, variables):
    """Parse ``source`` into an AST whose variables come from ``variables``."""
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, expected="an expression")
    return _Parser(source, variables).parse()


# --- evaluation -----------------------------------------------------------

_NUMPY_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "abs": np.abs, "atan2": np.arctan2,
}


def _eval(node, binding):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return binding[node.name]
        except KeyError:
            raise MissingBindingError(node.name) from None
    if isinstance(node, Neg):
        return -_eval(node.arg, binding)
    if isinstance(node, BinOp):
        a = _eval(node.left, binding)
        b = _eval(node.right, binding)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return np.divide(a, b)
        return np.power(a, b)
    if isinstance(node, Call):
        args = [_eval(a, binding) for a in node.args]
        return _NUMPY_FUNCS[node.func](*args)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast, binding):
    """Evaluate at a scalar binding; non-finite results raise EvalDomainError."""
    with np.errstate(all="ignore"):
        value = _eval(ast, binding)
    value = float(value)
    if not math.isfinite(value):
        raise EvalDomainError(
            f"expression '{to_string(ast)}' is not finite at {binding}")
    return value


def evaluate_array(ast, binding):
    """Vectorized evaluation; non-finite entries are returned as-is (NaN/inf)."""
    with np.errstate(all="ignore"):
        value = _eval(ast, binding)
    return np.asarray(value, dtype=float)


def _codegen(node):
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_codegen(node.arg)})"
    if isinstance(node, BinOp):
        a, b = _codegen(node.left), _codegen(node.right)
        if node.op == "^":
            return f"({a}**{b})"
        return f"({a}{node.op}{b})"
    if isinstance(node, Call):
        args = ",".join(_codegen(a) for a in node.args)
        return f"np.{_NUMPY_FUNCS[node.func].__name__}({args})"
    raise TypeError(f"not an expression node: {node!r}")


def compile_evaluator(ast, variables):
    """Compile an AST into a fast callable of the declared variables.

    Semantics match evaluate_array: non-finite values pass through.  This is
    the hot path for grid scans and Newton refinements.
    """
    src = f"lambda {', '.join(variables)}: {_codegen(ast)}"
    return eval(compile(src, "<expression>", "eval"), {"np": np})


# --- symbolic differentiation ----------------------------------------------

def _is_num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_num(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a, b):
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a, n):
    if n == 1:
        return a
    if n == 0:
        return Num(1.0)
    return BinOp("^", a, Num(float(n)))


def differentiate(ast, var):
    """Symbolic partial derivative with respect to the variable ``var``.

    Integer-constant exponents use the power rule; any other exponent is
    rewritten as exp(b*log(a)) before differentiating.  The derivative of
    abs is expressed as arg/abs(arg), which evaluates to NaN at 0 and is
    therefore flagged at evaluation time, not here.
    """
    d = lambda node: differentiate(node, var)
    if isinstance(ast, Num):
        return Num(0.0)
    if isinstance(ast, Var):
        return Num(1.0 if ast.name == var else 0.0)
    if isinstance(ast, Neg):
        inner = d(ast.arg)
        return Num(0.0) if _is_num(inner, 0.0) else Neg(inner)
    if isinstance(ast, BinOp):
        a, b = ast.left, ast.right
        if ast.op == "+":
            return _add(d(a), d(b))
        if ast.op == "-":
            return _sub(d(a), d(b))
        if ast.op == "*":
            return _add(_mul(d(a), b), _mul(a, d(b)))
        if ast.op == "/":
            num = _sub(_mul(d(a), b), _mul(a, d(b)))
            if _is_num(num, 0.0):
                return Num(0.0)
            return _div(num, _pow(b, 2))
        # power
        if isinstance(b, Num) and float(b.value).is_integer():
            n = int(b.value)
            if n == 0:
                return Num(0.0)
            return _mul(_mul(Num(float(n)), _pow(a, n - 1)), d(a))
        rewritten = Call("exp", (_mul(b, Call("log", (a,))),))
        return d(rewritten)
    if isinstance(ast, Call):
        if ast.func == "atan2":
            y, x = ast.args
            num = _sub(_mul(x, d(y)), _mul(y, d(x)))
            if _is_num(num, 0.0):
                return Num(0.0)
            den = _add(_pow(x, 2), _pow(y, 2))
            return _div(num, den)
        (arg,) = ast.args
        da = d(arg)
        if _is_num(da, 0.0):
            return Num(0.0)
        if ast.func == "sin":
            outer = Call("cos", (arg,))
        elif ast.func == "cos":
            outer = Neg(Call("sin", (arg,)))
        elif ast.func == "tan":
            outer = _div(Num(1.0), _pow(Call("cos", (arg,)), 2))
        elif ast.func == "exp":
            outer = ast
        elif ast.func == "log":
            return _div(da, arg)
        elif ast.func == "sqrt":
            return _div(da, _mul(Num(2.0), ast))
        elif ast.func == "abs":
            outer = _div(arg, ast)
        else:  # pragma: no cover - exhaustive over FUNCTIONS
            raise ValueError(f"no derivative rule for {ast.func}")
        return _mul(outer, da)
    raise TypeError(f"not an expression node: {ast!r}")


# --- printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 2, "^": 3, "atom": 4}


def _fmt(node, parent_prec, right_side=False):
    if isinstance(node, Num):
        if node.value < 0:
            return f"({node.value!r})"
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        args = ", ".join(_fmt(a, 0) for a in node.args)
        return f"{node.func}({args})"
    if isinstance(node, Neg):
        inner = _fmt(node.arg, _PREC["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PREC["neg"] or right_side else text
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        if node.op == "^":
            left = _fmt(node.left, prec + 1)
            right = _fmt(node.right, prec)
        else:
            left = _fmt(node.left, prec)
            right = _fmt(node.right, prec + (node.op in "-/"), right_side=True)
        text = f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {node!r}")


def to_string(ast):
    """Render an AST back to parseable source text."""
    return _fmt(ast, 0)


def variables_of(ast):
    """Set of variable names that actually occur in the AST."""
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Neg):
        return variables_of(ast.arg)
    if isinstance(ast, BinOp):
        return variables_of(ast.left) | variables_of(ast.right)
    if isinstance(ast, Call):
        out = set()
        for a in ast.args:
            out |= variables_of(a)
        return out
    return set()
