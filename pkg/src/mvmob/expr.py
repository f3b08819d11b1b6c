"""Boolean condition expressions used by navigation guards and rule control flows.

Grammar::

    expr    := or
    or      := and ("or" and)*
    and     := not ("and" not)*
    not     := "not" not | cmp
    cmp     := operand (CMPOP operand)?
    operand := literal | path | "(" expr ")"
    path    := IDENT ("." IDENT)*

Evaluation is total: a comparison whose path cannot be resolved, or whose
operands are of different kinds, is simply false.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Mapping, Optional, Union

from mvmob.lexer import EOF, FLOAT, IDENT, INT, OP, STRING, DSLSyntaxError, TokenCursor, tokenize

KEYWORDS = frozenset({"and", "or", "not", "true", "false", "null"})

Scalar = Union[str, int, float, bool, None]


class Expr:
    """Base of the condition expression tree."""

    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Literal(Expr):
    value: Scalar

    # 1 == 1.0 == True in Python; literals of different kinds are different trees
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Literal):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class Path(Expr):
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("path needs at least one segment")

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class And(Expr):
    operands: tuple[Expr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "operands", tuple(self.operands))
        if len(self.operands) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or(Expr):
    operands: tuple[Expr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "operands", tuple(self.operands))
        if len(self.operands) < 2:
            raise ValueError("Or needs at least two operands")


class CompareOp(str, Enum):
    EQ = "=="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="


CMP_SYMBOLS = frozenset(op.value for op in CompareOp)


@dataclass(frozen=True)
class Compare(Expr):
    op: CompareOp
    lhs: Union[Literal, Path]
    rhs: Union[Literal, Path]

    def __post_init__(self) -> None:
        object.__setattr__(self, "op", CompareOp(self.op))
        for side in (self.lhs, self.rhs):
            if not isinstance(side, (Literal, Path)):
                raise ValueError("comparison operands must be literals or paths")


TRUE = Literal(True)


# -- runtime values ---------------------------------------------------------


@dataclass(eq=False)
class EntityInstance:
    """A stored entity instance.  References hold other instances (or lists of them)."""

    entity: str
    id: int
    properties: dict[str, Any] = field(default_factory=dict)
    references: dict[str, Any] = field(default_factory=dict)

    def key(self) -> tuple[str, int]:
        return self.entity, self.id

    def snapshot(self) -> dict:
        def ref(v):
            if isinstance(v, EntityInstance):
                return v.id
            if isinstance(v, list):
                return [x.id for x in v]
            return v

        return {
            "entity": self.entity,
            "id": self.id,
            "properties": dict(self.properties),
            "references": {k: ref(v) for k, v in self.references.items()},
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EntityInstance):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    __hash__ = None  # type: ignore[assignment]


_MISSING = object()


class Environment:
    """Name bindings visible to conditions."""

    def __init__(self, bindings: Optional[Mapping[str, Any]] = None):
        self.bindings: dict[str, Any] = dict(bindings or {})

    def bind(self, name: str, value: Any) -> "Environment":
        env = Environment(self.bindings)
        env.bindings[name] = value
        return env

    def lookup(self, segments: tuple[str, ...]) -> Any:
        """Return the value at ``segments`` or the module-private missing marker."""
        value = self.bindings.get(segments[0], _MISSING)
        for seg in segments[1:]:
            if isinstance(value, EntityInstance):
                if seg in value.properties:
                    value = value.properties[seg]
                elif seg in value.references:
                    value = value.references[seg]
                else:
                    return _MISSING
            elif isinstance(value, dict):
                value = value.get(seg, _MISSING)
            else:
                return _MISSING
            if value is _MISSING:
                return _MISSING
        return value

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Environment):
            return NotImplemented
        return self.bindings == other.bindings

    def __repr__(self) -> str:
        return f"Environment({self.bindings!r})"


# -- evaluation -------------------------------------------------------------


def _kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, _dt.date):
        return "date"
    if isinstance(value, EntityInstance):
        return "instance"
    return "other"


def _operand(side: Union[Literal, Path], env: Environment) -> Any:
    if isinstance(side, Literal):
        return side.value
    return env.lookup(side.segments)


def compare_values(op: CompareOp, a: Any, b: Any) -> bool:
    if a is _MISSING or b is _MISSING:
        return False
    ka, kb = _kind(a), _kind(b)
    if op in (CompareOp.EQ, CompareOp.NE):
        if ka == "null" or kb == "null":
            same = ka == kb
            return same if op is CompareOp.EQ else not same
        if ka != kb or ka == "other":
            return False
        if ka == "instance":
            same = a.key() == b.key()
        else:
            same = a == b
        return same if op is CompareOp.EQ else not same
    if ka != kb or ka not in ("number", "date"):
        return False
    if op is CompareOp.LT:
        return a < b
    if op is CompareOp.LE:
        return a <= b
    if op is CompareOp.GT:
        return a > b
    return a >= b


def evaluate(expr: Expr, env: Optional[Environment] = None) -> bool:
    env = env if env is not None else Environment()
    if isinstance(expr, Or):
        return any(evaluate(e, env) for e in expr.operands)
    if isinstance(expr, And):
        return all(evaluate(e, env) for e in expr.operands)
    if isinstance(expr, Not):
        return not evaluate(expr.operand, env)
    if isinstance(expr, Compare):
        return compare_values(expr.op, _operand(expr.lhs, env), _operand(expr.rhs, env))
    if isinstance(expr, Literal):
        return expr.value is True
    if isinstance(expr, Path):
        return env.lookup(expr.segments) is True
    raise TypeError(f"not an expression: {expr!r}")


def value_of(expr: Expr, env: Environment) -> Any:
    """Evaluate an action argument: literals and paths yield values, anything else a boolean."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Path):
        value = env.lookup(expr.segments)
        return None if value is _MISSING else value
    return evaluate(expr, env)


def is_resolvable(path: Path, env: Environment) -> bool:
    return env.lookup(path.segments) is not _MISSING


def iter_nodes(expr: Expr) -> Iterator[Expr]:
    yield expr
    if isinstance(expr, (And, Or)):
        for e in expr.operands:
            yield from iter_nodes(e)
    elif isinstance(expr, Not):
        yield from iter_nodes(expr.operand)
    elif isinstance(expr, Compare):
        yield expr.lhs
        yield expr.rhs


def free_paths(expr: Expr) -> frozenset[Path]:
    return frozenset(n for n in iter_nodes(expr) if isinstance(n, Path))


# -- printing ---------------------------------------------------------------


def format_literal(value: Scalar) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value, ensure_ascii=False)


def format_expr(expr: Expr) -> str:
    """Canonical text: single spaces, parentheses only where precedence needs them."""
    if isinstance(expr, Literal):
        return format_literal(expr.value)
    if isinstance(expr, Path):
        return str(expr)
    if isinstance(expr, Compare):
        return f"{format_expr(expr.lhs)} {expr.op.value} {format_expr(expr.rhs)}"
    if isinstance(expr, Not):
        inner = expr.operand
        text = format_expr(inner)
        if isinstance(inner, (And, Or)):
            text = f"({text})"
        return f"not {text}"
    if isinstance(expr, And):
        parts = []
        for e in expr.operands:
            text = format_expr(e)
            parts.append(f"({text})" if isinstance(e, (And, Or)) else text)
        return " and ".join(parts)
    if isinstance(expr, Or):
        parts = []
        for e in expr.operands:
            text = format_expr(e)
            parts.append(f"({text})" if isinstance(e, Or) else text)
        return " or ".join(parts)
    raise TypeError(f"not an expression: {expr!r}")


# -- parsing ----------------------------------------------------------------

_OPERAND_START = frozenset({"literal", "path", "'('", "'not'"})


def parse_expression(cur: TokenCursor) -> Expr:
    return _parse_or(cur)


def _parse_or(cur: TokenCursor) -> Expr:
    items = [_parse_and(cur)]
    while cur.accept("or"):
        items.append(_parse_and(cur))
    return items[0] if len(items) == 1 else Or(tuple(items))


def _parse_and(cur: TokenCursor) -> Expr:
    items = [_parse_not(cur)]
    while cur.accept("and"):
        items.append(_parse_not(cur))
    return items[0] if len(items) == 1 else And(tuple(items))


def _parse_not(cur: TokenCursor) -> Expr:
    if cur.accept("not"):
        return Not(_parse_not(cur))
    return _parse_cmp(cur)


def _at_cmp(cur: TokenCursor) -> bool:
    tok = cur.peek()
    return tok.kind == OP and tok.text in CMP_SYMBOLS


def _parse_cmp(cur: TokenCursor) -> Expr:
    lhs = _parse_operand(cur)
    if not _at_cmp(cur):
        return lhs
    op_tok = cur.advance()
    if not isinstance(lhs, (Literal, Path)):
        raise DSLSyntaxError(
            "comparison operands must be literals or paths", op_tok.line, op_tok.col, code="PAR010"
        )
    rhs_tok = cur.peek()
    rhs = _parse_operand(cur)
    if not isinstance(rhs, (Literal, Path)):
        raise DSLSyntaxError(
            "comparison operands must be literals or paths", rhs_tok.line, rhs_tok.col, code="PAR010"
        )
    if _at_cmp(cur):
        tok = cur.peek()
        raise DSLSyntaxError(
            "comparison operators do not chain", tok.line, tok.col, {"'and'", "'or'", "')'"}, code="PAR010"
        )
    return Compare(CompareOp(op_tok.text), lhs, rhs)


def _parse_operand(cur: TokenCursor) -> Expr:
    tok = cur.peek()
    if tok.kind in (INT, FLOAT, STRING):
        cur.advance()
        return Literal(tok.value)  # type: ignore[arg-type]
    if tok.kind == IDENT:
        if tok.text == "true":
            cur.advance()
            return Literal(True)
        if tok.text == "false":
            cur.advance()
            return Literal(False)
        if tok.text == "null":
            cur.advance()
            return Literal(None)
        if tok.text in KEYWORDS:
            raise cur.error(f"expected an operand, found {tok.describe()}", _OPERAND_START)
        segments = [cur.advance().text]
        while cur.at(".") and cur.peek(1).kind == IDENT:
            cur.advance()
            seg = cur.advance()
            if seg.text in KEYWORDS:
                raise cur.error(f"keyword {seg.text!r} cannot be a path segment", {"identifier"}, seg)
            segments.append(seg.text)
        return Path(tuple(segments))
    if cur.accept("("):
        inner = _parse_or(cur)
        cur.expect(")")
        return inner
    raise cur.error(f"expected an operand, found {tok.describe()}", _OPERAND_START)


def parse_expr(text: str) -> Expr:
    """Parse a standalone condition.  Raises :class:`DSLSyntaxError`."""
    tokens, lex_errors = tokenize(text)
    if lex_errors:
        e = lex_errors[0]
        raise DSLSyntaxError(e.message, e.line, e.col, code=e.code)
    cur = TokenCursor(tokens)
    expr = parse_expression(cur)
    if not cur.at_kind(EOF):
        raise cur.error(
            f"unexpected {cur.peek().describe()} after expression", {"'and'", "'or'", "end of input"}
        )
    return expr
