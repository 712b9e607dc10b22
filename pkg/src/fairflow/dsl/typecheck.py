"""Static checks, output-domain inference and compilation to Python callables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..errors import (DomainMismatch, MissingReturn, TypecheckError, UnboundVariable,
                      WidthOverflowRisk)
from ..spaces import Domain, InputSpace
from .ast import Assign, Binary, Cond, DecisionProgram, Expr, Num, Return, Stmt, Unary, Var

WIDTH = 32
INT_MIN = -(1 << (WIDTH - 1))
INT_MAX = (1 << (WIDTH - 1)) - 1

# above this many points the output domain is over-approximated from intervals
ENUMERATE_OUTPUTS_LIMIT = 200_000

Interval = tuple[int, int]


def _hull(a: Interval, b: Interval) -> Interval:
    return min(a[0], b[0]), max(a[1], b[1])


def expr_interval(expr: Expr, env: Mapping[str, Interval], where: str = "") -> Interval:
    """Interval of every value ``expr`` (and each subexpression) may take.

    Raises WidthOverflowRisk when any intermediate might leave int32.
    """
    if isinstance(expr, Num):
        iv = (expr.value, expr.value)
    elif isinstance(expr, Var):
        iv = env[expr.name]
    elif isinstance(expr, Unary):
        inner = expr_interval(expr.operand, env, where)
        iv = (-inner[1], -inner[0]) if expr.op == "-" else (0, 1)
    elif isinstance(expr, Cond):
        expr_interval(expr.test, env, where)
        iv = _hull(expr_interval(expr.then, env, where), expr_interval(expr.orelse, env, where))
    else:
        a = expr_interval(expr.left, env, where)
        b = expr_interval(expr.right, env, where)
        if expr.op == "+":
            iv = (a[0] + b[0], a[1] + b[1])
        elif expr.op == "-":
            iv = (a[0] - b[1], a[1] - b[0])
        elif expr.op == "*":
            corners = [x * y for x in a for y in b]
            iv = (min(corners), max(corners))
        else:
            iv = (0, 1)
    if iv[0] < INT_MIN or iv[1] > INT_MAX:
        line = getattr(expr, "line", 0)
        raise WidthOverflowRisk(
            f"{where}line {line}: value range [{iv[0]},{iv[1]}] may exceed {WIDTH}-bit arithmetic"
        )
    return iv


class _Checker:
    def __init__(self, program: DecisionProgram, param_intervals: dict[str, Interval]):
        self.program = program
        self.where = f"{program.origin}:{program.name}: "
        self.returns: list[Interval] = []
        self.param_intervals = param_intervals

    def _check_refs(self, expr: Expr, defined: Mapping[str, Interval]) -> None:
        if isinstance(expr, Var):
            if expr.name not in defined:
                raise UnboundVariable(
                    f"{self.where}line {expr.line}: variable {expr.name!r} is not a parameter "
                    "and is not assigned on every path before this use"
                )
        elif isinstance(expr, Unary):
            self._check_refs(expr.operand, defined)
        elif isinstance(expr, Binary):
            self._check_refs(expr.left, defined)
            self._check_refs(expr.right, defined)
        elif isinstance(expr, Cond):
            for sub in (expr.test, expr.then, expr.orelse):
                self._check_refs(sub, defined)

    def _value(self, expr: Expr, env: dict[str, Interval]) -> Interval:
        self._check_refs(expr, env)
        return expr_interval(expr, env, self.where)

    def block(self, body: tuple[Stmt, ...], env: dict[str, Interval]) -> dict[str, Interval] | None:
        """Check a block; return the env on fall-through, or None if every path returned."""
        env = dict(env)
        for i, stmt in enumerate(body):
            if isinstance(stmt, Return):
                self.returns.append(self._value(stmt.value, env))
                if i != len(body) - 1:
                    raise TypecheckError(
                        f"{self.where}line {body[i + 1].line}: unreachable statement after return"
                    )
                return None
            if isinstance(stmt, Assign):
                env[stmt.name] = self._value(stmt.value, env)
                continue
            self._value(stmt.test, env)
            then_env = self.block(stmt.body, env)
            else_env = self.block(stmt.orelse, env)
            if then_env is None and else_env is None:
                if i != len(body) - 1:
                    raise TypecheckError(
                        f"{self.where}line {body[i + 1].line}: unreachable statement after return"
                    )
                return None
            if then_env is None:
                env = else_env
            elif else_env is None:
                env = then_env
            else:
                env = {k: _hull(then_env[k], else_env[k]) for k in then_env.keys() & else_env.keys()}
        return env

    def run(self) -> list[Interval]:
        tail = self.block(self.program.body, self.param_intervals)
        if tail is not None:
            raise MissingReturn(f"{self.where}some execution path does not end in a return")
        return self.returns


# -- compilation to Python -----------------------------------------------------

_PY_BINOP = {"+": "+", "-": "-", "*": "*", "==": "==", "!=": "!=",
             "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _py_expr(expr: Expr, names: Mapping[str, str]) -> str:
    if isinstance(expr, Num):
        return f"({expr.value})"
    if isinstance(expr, Var):
        return names[expr.name]
    if isinstance(expr, Unary):
        inner = _py_expr(expr.operand, names)
        return f"(-{inner})" if expr.op == "-" else f"(0 if {inner} else 1)"
    if isinstance(expr, Cond):
        return (f"({_py_expr(expr.then, names)} if {_py_expr(expr.test, names)} "
                f"else {_py_expr(expr.orelse, names)})")
    left, right = _py_expr(expr.left, names), _py_expr(expr.right, names)
    if expr.op == "and":
        return f"(1 if ({left} and {right}) else 0)"
    if expr.op == "or":
        return f"(1 if ({left} or {right}) else 0)"
    if expr.op in ("+", "-", "*"):
        return f"({left} {_PY_BINOP[expr.op]} {right})"
    return f"(1 if {left} {_PY_BINOP[expr.op]} {right} else 0)"


def _py_block(body: tuple[Stmt, ...], names: Mapping[str, str], indent: int, out: list[str]) -> None:
    pad = "    " * indent
    if not body:
        out.append(f"{pad}pass")
    for stmt in body:
        if isinstance(stmt, Return):
            out.append(f"{pad}return {_py_expr(stmt.value, names)}")
        elif isinstance(stmt, Assign):
            out.append(f"{pad}{names[stmt.name]} = {_py_expr(stmt.value, names)}")
        else:
            out.append(f"{pad}if {_py_expr(stmt.test, names)}:")
            _py_block(stmt.body, names, indent + 1, out)
            if stmt.orelse:
                out.append(f"{pad}else:")
                _py_block(stmt.orelse, names, indent + 1, out)


def compile_program(program: DecisionProgram) -> Callable[..., int]:
    """Compile to a plain Python function taking the parameters positionally.

    Identifiers are mangled (``v_<name>``) so DSL names can never collide with
    Python keywords or builtins.
    """
    from .ast import assigned_names

    all_names = set(program.param_names) | assigned_names(program.body) | {n for n, _ in program.constants}
    names = {n: f"v_{n}" for n in all_names}
    lines = [f"def _decide({', '.join(names[p] for p in program.param_names)}):"]
    for cname, cvalue in program.constants:
        lines.append(f"    {names[cname]} = ({cvalue})")
    _py_block(program.body, names, 1, lines)
    namespace: dict = {}
    exec(compile("\n".join(lines), f"<dsl:{program.name}>", "exec"), namespace)
    return namespace["_decide"]


# -- validated programs ----------------------------------------------------------


@dataclass(frozen=True)
class ValidatedProgram:
    """A program that passed :func:`typecheck` against concrete input domains.

    Immutable and safe to share between threads; ``fn`` carries no state.
    """

    program: DecisionProgram
    domains: tuple[tuple[str, Domain], ...]
    output_domain: tuple[int, ...]
    output_interval: Interval
    fn: Callable[..., int] = field(repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.program.name

    @property
    def param_names(self) -> list[str]:
        return self.program.param_names

    def domain_of(self, name: str) -> Domain:
        return dict(self.domains)[name]

    def __call__(self, *args: int) -> int:
        return self.fn(*args)

    def call(self, assignment: Mapping[str, int]) -> int:
        return self.fn(*(assignment[p] for p in self.program.param_names))

    def call_with(self, space: InputSpace) -> Callable[[int, tuple[int, ...]], int]:
        """Return ``f(g, u)`` for the given space's (protected, unprotected) layout."""
        order = space.names
        index = [order.index(p) for p in self.program.param_names]
        fn = self.fn
        if index == list(range(len(order))):
            return lambda g, u: fn(g, *u)

        def call(g: int, u: tuple[int, ...]) -> int:
            row = (g, *u)
            return fn(*(row[i] for i in index))
        return call


def _param_domains(program: DecisionProgram, space: InputSpace | Mapping[str, Domain]) -> dict[str, Domain]:
    if isinstance(space, InputSpace):
        declared = {v.name: v.domain for v in space.variables}
    else:
        declared = dict(space)
    params = program.param_names
    if set(params) != set(declared):
        missing = sorted(set(declared) - set(params))
        extra = sorted(set(params) - set(declared))
        raise DomainMismatch(
            f"{program.name}: parameters {params} do not match declared inputs {sorted(declared)}"
            f" (missing {missing}, unexpected {extra})"
        )
    for p in program.params:
        if p.domain is not None and not declared[p.name].issubset(p.domain):
            raise DomainMismatch(
                f"{program.name}: input {p.name} ranges over {declared[p.name]}, "
                f"outside the declared parameter domain {p.domain}"
            )
        if declared[p.name].lo < INT_MIN or declared[p.name].hi > INT_MAX:
            raise WidthOverflowRisk(f"{program.name}: domain of {p.name} exceeds {WIDTH} bits")
    consts = {n for n, _ in program.constants}
    if consts & set(params):
        raise TypecheckError(f"{program.name}: constants shadow parameters {sorted(consts & set(params))}")
    return {p: declared[p] for p in params}


def typecheck(program: DecisionProgram, space: InputSpace | Mapping[str, Domain]) -> ValidatedProgram:
    """Verify program invariants against the input domains and infer its outputs.

    ``space`` is an :class:`InputSpace` or a plain ``name -> Domain`` mapping
    (the latter is how causal equations and composed programs are checked).
    """
    domains = _param_domains(program, space)
    intervals = {n: (d.lo, d.hi) for n, d in domains.items()}
    for cname, cvalue in program.constants:
        if not INT_MIN <= cvalue <= INT_MAX:
            raise WidthOverflowRisk(f"{program.name}: constant {cname} exceeds {WIDTH} bits")
        intervals[cname] = (cvalue, cvalue)
    returns = _Checker(program, intervals).run()
    out_iv = (min(r[0] for r in returns), max(r[1] for r in returns))
    fn = compile_program(program)
    npoints = math.prod(len(d) for d in domains.values())
    if npoints <= ENUMERATE_OUTPUTS_LIMIT:
        order = program.param_names
        outputs = {fn(*row) for row in itertools.product(*(domains[p].values for p in order))}
        output_domain = tuple(sorted(outputs))
    else:
        output_domain = tuple(range(out_iv[0], out_iv[1] + 1))
    return ValidatedProgram(program, tuple(domains.items()), output_domain, out_iv, fn)


def evaluate(program: ValidatedProgram, assignment: Mapping[str, int]) -> int:
    """Run the program on one assignment; total and deterministic after typecheck."""
    for name, dom in program.domains:
        if name not in assignment:
            raise DomainMismatch(f"{program.name}: assignment does not bind {name}")
        if assignment[name] not in dom:
            raise DomainMismatch(f"{program.name}: {name}={assignment[name]} outside {dom}")
    return program.call(assignment)
