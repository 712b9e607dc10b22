"""AST node types for decision programs and causal equations.

Source positions are carried for diagnostics but excluded from equality, so
two parses of the same program compare equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..spaces import Domain

BINARY_OPS = ("or", "and", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*")
COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Num:
    value: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "not"
    operand: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Cond:
    """Expression-level ``if test then a else b``."""

    test: "Expr"
    then: "Expr"
    orelse: "Expr"
    line: int = field(default=0, compare=False)


Expr = Union[Num, Var, Unary, Binary, Cond]


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    test: Expr
    body: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    value: Expr
    line: int = field(default=0, compare=False)


Stmt = Union[Assign, If, Return]


@dataclass(frozen=True)
class Param:
    name: str
    domain: Domain | None = None


@dataclass(frozen=True)
class DecisionProgram:
    name: str
    params: tuple[Param, ...]
    body: tuple[Stmt, ...]
    constants: tuple[tuple[str, int], ...] = ()
    origin: str = field(default="<inline>", compare=False)

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def with_constants(self, overrides: dict[str, int]) -> "DecisionProgram":
        """Rebind ``const`` declarations; unknown names are an error."""
        known = dict(self.constants)
        unknown = set(overrides) - set(known)
        if unknown:
            raise KeyError(f"{self.name} declares no constant(s) {sorted(unknown)}")
        known.update({k: int(v) for k, v in overrides.items()})
        return DecisionProgram(self.name, self.params, self.body,
                               tuple((k, known[k]) for k, _ in self.constants), self.origin)


def free_vars(expr: Expr) -> set[str]:
    if isinstance(expr, Num):
        return set()
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Unary):
        return free_vars(expr.operand)
    if isinstance(expr, Binary):
        return free_vars(expr.left) | free_vars(expr.right)
    return free_vars(expr.test) | free_vars(expr.then) | free_vars(expr.orelse)


def substitute(expr: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace variable references by expressions (capture is impossible: no binders)."""
    if isinstance(expr, Num):
        return expr
    if isinstance(expr, Var):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Unary):
        return Unary(expr.op, substitute(expr.operand, mapping), expr.line)
    if isinstance(expr, Binary):
        return Binary(expr.op, substitute(expr.left, mapping), substitute(expr.right, mapping), expr.line)
    return Cond(substitute(expr.test, mapping), substitute(expr.then, mapping),
                substitute(expr.orelse, mapping), expr.line)


def rename_stmts(body: tuple[Stmt, ...], mapping: dict[str, str]) -> tuple[Stmt, ...]:
    """Consistently rename variables (both reads and writes) in a statement list."""
    exprs = {old: Var(new) for old, new in mapping.items()}
    out: list[Stmt] = []
    for stmt in body:
        if isinstance(stmt, Assign):
            out.append(Assign(mapping.get(stmt.name, stmt.name), substitute(stmt.value, exprs), stmt.line))
        elif isinstance(stmt, Return):
            out.append(Return(substitute(stmt.value, exprs), stmt.line))
        else:
            out.append(If(substitute(stmt.test, exprs), rename_stmts(stmt.body, mapping),
                          rename_stmts(stmt.orelse, mapping), stmt.line))
    return tuple(out)


def assigned_names(body: tuple[Stmt, ...]) -> set[str]:
    names: set[str] = set()
    for stmt in body:
        if isinstance(stmt, Assign):
            names.add(stmt.name)
        elif isinstance(stmt, If):
            names |= assigned_names(stmt.body) | assigned_names(stmt.orelse)
    return names


def referenced_names(body: tuple[Stmt, ...]) -> set[str]:
    names: set[str] = set()
    for stmt in body:
        if isinstance(stmt, (Assign, Return)):
            names |= free_vars(stmt.value)
        else:
            names |= free_vars(stmt.test) | referenced_names(stmt.body) | referenced_names(stmt.orelse)
    return names
