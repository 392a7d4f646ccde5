"""Scalar-field expressions over chart coordinates, with exact jets.

A :class:`ScalarField` is a parsed expression over declared coordinate
names.  Evaluation propagates second-order jets (value, gradient, Hessian)
through every elementary operation, so first and second derivatives are
exact to roundoff -- no finite differences on the evaluation path.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``^`` binds tightest, then unary minus, then ``* /``, then ``+ -``.
Functions: sin, cos, sinh, cosh, tanh, exp, ln, sqrt, abs (all unary).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _jetcore_py

__all__ = [
    "ExprError",
    "ParseError",
    "EvalDomainError",
    "Jet2",
    "ScalarField",
    "parse_scalar_expr",
    "eval_jet2",
    "format_expr",
    "jet_backend_name",
    "set_jet_backend",
    "available_backends",
]

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "ln", "sqrt", "abs")

_FUNC_OPS = {
    "sin": _jetcore_py.OP_SIN,
    "cos": _jetcore_py.OP_COS,
    "sinh": _jetcore_py.OP_SINH,
    "cosh": _jetcore_py.OP_COSH,
    "tanh": _jetcore_py.OP_TANH,
    "exp": _jetcore_py.OP_EXP,
    "ln": _jetcore_py.OP_LN,
    "sqrt": _jetcore_py.OP_SQRT,
    "abs": _jetcore_py.OP_ABS,
}

_BINOP_OPS = {
    "+": _jetcore_py.OP_ADD,
    "-": _jetcore_py.OP_SUB,
    "*": _jetcore_py.OP_MUL,
    "/": _jetcore_py.OP_DIV,
}

_ERR_MESSAGES = {
    _jetcore_py.ERR_DIV_ZERO: "division by zero",
    _jetcore_py.ERR_LN_DOMAIN: "ln of a non-positive value",
    _jetcore_py.ERR_SQRT_DOMAIN: "sqrt of a non-positive value (jet is singular at 0)",
    _jetcore_py.ERR_POW_DOMAIN: "non-integer power of a non-positive base",
    _jetcore_py.ERR_ABS_DERIV: "abs is not differentiable at 0",
    _jetcore_py.ERR_BAD_OP: "corrupt tape",
}


class ExprError(ValueError):
    """Base class for expression-language errors."""


class ParseError(ExprError):
    """Syntax or validation error, carrying the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalDomainError(ExprError):
    """A singular elementary operation hit during jet evaluation."""

    def __init__(self, message: str, fragment: str, span: tuple[int, int]):
        super().__init__(f"{message} in subexpression {fragment!r}")
        self.fragment = fragment
        self.span = span


# --- AST ------------------------------------------------------------------
# Spans are source byte ranges, excluded from equality so that
# parse(print(ast)) == ast holds structurally.


@dataclass(frozen=True)
class Num:
    value: float
    span: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    span: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    span: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"
    span: tuple[int, int] = field(default=(0, 0), compare=False)


Node = Num | Var | Neg | BinOp | Call


# --- tokenizer ------------------------------------------------------------

_OPERATOR_CHARS = "+-*/^(),"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPERATOR_CHARS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            start = i
            while i < n and (text[i].isdigit() or text[i] == "."):
                i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            lexeme = text[start:i]
            try:
                float(lexeme)
            except ValueError:
                raise ParseError(f"malformed number {lexeme!r}", start) from None
            tokens.append(("num", lexeme, start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(("name", text[start:i], start))
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    return tokens


# --- parser ---------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, coords: tuple[str, ...]):
        self.text = text
        self.coords = coords
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.pos += 1
        return tok

    def expect(self, lexeme: str):
        tok = self.next()
        if tok[0] != "op" or tok[1] != lexeme:
            raise ParseError(f"expected {lexeme!r}, found {tok[1]!r}", tok[2])

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while (tok := self.peek()) is not None and tok[1] in ("+", "-") and tok[0] == "op":
            self.next()
            rhs = self.term()
            node = BinOp(tok[1], node, rhs, (node.span[0], rhs.span[1]))
        return node

    def term(self) -> Node:
        node = self.unary()
        while (tok := self.peek()) is not None and tok[1] in ("*", "/") and tok[0] == "op":
            self.next()
            rhs = self.unary()
            node = BinOp(tok[1], node, rhs, (node.span[0], rhs.span[1]))
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "-":
            self.next()
            arg = self.unary()
            return Neg(arg, (tok[2], arg.span[1]))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "^":
            self.next()
            exponent = self.unary()
            return BinOp("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def atom(self) -> Node:
        tok = self.next()
        kind, lexeme, off = tok
        if kind == "num":
            value = float(lexeme)
            if not np.isfinite(value):
                raise ParseError(f"number {lexeme!r} overflows a 64-bit float", off)
            return Num(value, (off, off + len(lexeme)))
        if kind == "name":
            nxt = self.peek()
            if nxt is not None and nxt[0] == "op" and nxt[1] == "(":
                if lexeme not in FUNCTIONS:
                    raise ParseError(f"unknown function {lexeme!r}", off)
                self.next()
                arg = self.expr()
                comma = self.peek()
                if comma is not None and comma[0] == "op" and comma[1] == ",":
                    raise ParseError(f"{lexeme} takes exactly one argument", comma[2])
                closing = self.next()
                if closing[0] != "op" or closing[1] != ")":
                    raise ParseError("expected ')'", closing[2])
                return Call(lexeme, arg, (off, closing[2] + 1))
            if lexeme in FUNCTIONS:
                raise ParseError(f"function {lexeme!r} used without arguments", off)
            if lexeme not in self.coords:
                raise ParseError(
                    f"unknown identifier {lexeme!r} (coordinates are {', '.join(self.coords)})",
                    off,
                )
            return Var(lexeme, (off, off + len(lexeme)))
        if kind == "op" and lexeme == "(":
            node = self.expr()
            closing = self.next()
            if closing[0] != "op" or closing[1] != ")":
                raise ParseError("expected ')'", closing[2])
            return node
        raise ParseError(f"unexpected token {lexeme!r}", off)


# --- printer --------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def format_expr(node: Node) -> str:
    """Render an AST back to source; parse(format_expr(ast)) == ast."""
    return _fmt(node, 0)


def _fmt(node: Node, parent_prec: int) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_fmt(node.arg, 0)})"
    if isinstance(node, Neg):
        inner = _fmt(node.arg, _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        if node.op == "^":
            # right-associative; the exponent re-enters at unary level
            left = _fmt(node.left, prec + 1)
            right = _fmt(node.right, _PRECEDENCE["neg"])
        else:
            left = _fmt(node.left, prec)
            right = _fmt(node.right, prec + 1)
        text = f"{left} {node.op} {right}" if node.op != "^" else f"{left}^{right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an AST node: {node!r}")


# --- tape compilation -----------------------------------------------------


class _Tape:
    """Flat SSA program plus scratch layout for the kernels."""

    def __init__(self, root: Node, coords: tuple[str, ...]):
        ops: list[int] = []
        ia: list[int] = []
        ib: list[int] = []
        spans: list[tuple[int, int]] = []
        consts: list[float] = []

        def const_idx(x: float) -> int:
            consts.append(float(x))
            return len(consts) - 1

        def emit(op: int, a: int, b: int, span) -> int:
            ops.append(op)
            ia.append(a)
            ib.append(b)
            spans.append(span)
            return len(ops) - 1

        def walk(node: Node) -> int:
            if isinstance(node, Num):
                return emit(_jetcore_py.OP_CONST, const_idx(node.value), -1, node.span)
            if isinstance(node, Var):
                return emit(_jetcore_py.OP_VAR, coords.index(node.name), -1, node.span)
            if isinstance(node, Neg):
                return emit(_jetcore_py.OP_NEG, walk(node.arg), -1, node.span)
            if isinstance(node, Call):
                return emit(_FUNC_OPS[node.fn], walk(node.arg), -1, node.span)
            if isinstance(node, BinOp):
                if node.op == "^":
                    base = walk(node.left)
                    exp_node = node.right
                    neg = isinstance(exp_node, Neg) and isinstance(exp_node.arg, Num)
                    if isinstance(exp_node, Num) or neg:
                        c = -exp_node.arg.value if neg else exp_node.value
                        if float(c).is_integer() and abs(c) < 2**31:
                            return emit(_jetcore_py.OP_POWI, base, int(c), node.span)
                        return emit(_jetcore_py.OP_POWC, base, const_idx(c), node.span)
                    # general exponent: a^b = exp(b * ln a), a > 0 required
                    exp_reg = walk(exp_node)
                    ln_reg = emit(_jetcore_py.OP_LN, base, -1, node.span)
                    mul_reg = emit(_jetcore_py.OP_MUL, exp_reg, ln_reg, node.span)
                    return emit(_jetcore_py.OP_EXP, mul_reg, -1, node.span)
                a = walk(node.left)
                b = walk(node.right)
                return emit(_BINOP_OPS[node.op], a, b, node.span)
            raise TypeError(f"not an AST node: {node!r}")

        walk(root)
        self.ops = np.asarray(ops, dtype=np.int32)
        self.ia = np.asarray(ia, dtype=np.int32)
        self.ib = np.asarray(ib, dtype=np.int32)
        self.consts = np.asarray(consts, dtype=np.float64)
        self.spans = spans
        self.size = len(ops)
        self.nvars = len(coords)


# --- backend selection ----------------------------------------------------

_backends: dict[str, object] = {"python": _jetcore_py}
try:  # pragma: no cover - exercised indirectly
    from . import _jetcore as _jetcore_ext

    if getattr(_jetcore_ext, "OPCODE_VERSION", None) == _jetcore_py.OPCODE_VERSION:
        _backends["cython"] = _jetcore_ext
except ImportError:
    pass

if os.environ.get("APAPR_PURE_PY"):
    _active_backend = "python"
else:
    _active_backend = "cython" if "cython" in _backends else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_backends))


def jet_backend_name() -> str:
    """Name of the kernel in use: 'cython' or 'python'."""
    return _active_backend


def set_jet_backend(name: str) -> None:
    """Select the jet kernel at runtime (used by the benchmark)."""
    global _active_backend
    if name not in _backends:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active_backend = name


# --- public types ---------------------------------------------------------


class Jet2:
    """Second-order jet: value, gradient and exactly-symmetric Hessian."""

    __slots__ = ("value", "gradient", "hessian")

    def __init__(self, value: float, gradient: np.ndarray, hessian: np.ndarray):
        self.value = value
        self.gradient = gradient
        self.hessian = hessian

    def __repr__(self):
        return f"Jet2(value={self.value!r}, gradient={self.gradient!r}, hessian={self.hessian!r})"


@dataclass(frozen=True)
class ScalarField:
    """Parsed expression over a fixed coordinate list."""

    coords: tuple[str, ...]
    ast: Node
    tape: _Tape = field(compare=False, repr=False)
    text: str = field(compare=False, default="")

    def __str__(self):
        return format_expr(self.ast)

    def value(self, p) -> float:
        return eval_jet2(self, p).value

    def jet(self, p) -> Jet2:
        return eval_jet2(self, p)


def parse_scalar_expr(text: str, coords) -> ScalarField:
    """Parse an expression string over the given coordinate names."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    coords = tuple(coords)
    ast = _Parser(text, coords).parse()
    return ScalarField(coords=coords, ast=ast, tape=_Tape(ast, coords), text=text)


def field_from_ast(ast: Node, coords) -> ScalarField:
    """Wrap an already-built AST as a ScalarField."""
    coords = tuple(coords)
    return ScalarField(coords=coords, ast=ast, tape=_Tape(ast, coords), text=format_expr(ast))


def eval_jet2(f: ScalarField, p) -> Jet2:
    """Evaluate value, gradient and Hessian of f at point p exactly."""
    point = np.asarray(p, dtype=np.float64)
    if point.shape != (f.tape.nvars,):
        raise ValueError(
            f"point has shape {point.shape}, field expects {f.tape.nvars} coordinates {f.coords}"
        )
    tape = f.tape
    n = tape.nvars
    m = tape.size
    val = np.empty(m)
    grad = np.empty((m, n))
    hess = np.empty((m, n, n))
    kernel = _backends[_active_backend]
    status = kernel.eval_tape(tape.ops, tape.ia, tape.ib, tape.consts, n, point, val, grad, hess)
    if status != _jetcore_py.STATUS_OK:
        kind = status & 15
        idx = status >> 4
        span = tape.spans[idx]
        source = f.text or format_expr(f.ast)
        fragment = source[span[0] : span[1]] or source
        raise EvalDomainError(_ERR_MESSAGES.get(kind, "evaluation error"), fragment, span)
    return Jet2(float(val[m - 1]), grad[m - 1].copy(), hess[m - 1].copy())
