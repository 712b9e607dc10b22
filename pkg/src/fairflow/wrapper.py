"""Compile non-uniform unprotected inputs into uniform index inputs.

A pmf whose probabilities are multiples of ``1/N`` is realized by a new input
``idx`` uniform on ``[1, N]`` plus a lookup ``x = if idx <= c1 then v1 else
...`` prepended to the program body.  The wrapped program only has uniform
inputs, which is what the counting backend needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dsl.ast import Assign, Cond, DecisionProgram, Expr, Num, Param, Var, Binary, referenced_names, assigned_names
from .dsl.typecheck import ValidatedProgram, typecheck
from .errors import InvalidDistribution
from .spaces import Domain, Distribution, InputSpace, Variable


def resolution(dist: Distribution) -> int:
    """Smallest N such that every probability is a multiple of 1/N."""
    n = 1
    for _, p in dist.items():
        n = math.lcm(n, p.denominator)
    return n


@dataclass(frozen=True)
class Wrapped:
    program: ValidatedProgram
    space: InputSpace
    # original input name -> (index input name, index size, value per index 1..N)
    lookups: dict


def _lookup_expr(index: str, cuts: list[tuple[int, int]]) -> Expr:
    """cuts: (upper index bound, value) in ascending order."""
    expr: Expr = Num(cuts[-1][1])
    for bound, value in reversed(cuts[:-1]):
        expr = Cond(Binary("<=", Var(index), Num(bound)), Num(value), expr)
    return expr


def wrap_nonuniform(program: ValidatedProgram, space: InputSpace,
                    size: int | dict[str, int] | None = None) -> Wrapped:
    """Replace each non-uniform unprotected input by a uniform index.

    ``size`` fixes the index range (a multiple of the pmf's resolution);
    by default the resolution itself is used.  Uniform inputs pass through.
    """
    prog = program.program
    taken = {p.name for p in prog.params} | assigned_names(prog.body) | referenced_names(prog.body)
    taken |= {n for n, _ in prog.constants}
    params: list[Param] = []
    prefix: list[Assign] = []
    new_vars: list[Variable] = []
    lookups = {}
    by_name = {v.name: v for v in space.unprotected}
    for p in prog.params:
        var = by_name.get(p.name)
        if var is None or var.dist.is_uniform:
            params.append(p)
            if var is not None:
                new_vars.append(var)
            continue
        n = resolution(var.dist)
        want = size.get(p.name) if isinstance(size, dict) else size
        if want is not None:
            if want % n:
                raise InvalidDistribution(
                    f"{p.name}: index size {want} cannot represent the pmf exactly "
                    f"(needs a multiple of {n})")
            n = want
        index = f"{p.name}_index"
        while index in taken:
            index += "_"
        taken.add(index)
        cuts, table, acc = [], [], 0
        for value, prob in var.dist.items():
            share = prob * n
            if share == 0:
                continue
            acc += int(share)
            cuts.append((acc, value))
            table += [value] * int(share)
        assert acc == n
        dom = Domain.range(1, n)
        params.append(Param(index, dom))
        new_vars.append(Variable(index, dom, Distribution.uniform(dom)))
        prefix.append(Assign(p.name, _lookup_expr(index, cuts)))
        lookups[p.name] = (index, n, tuple(table))
    wrapped = DecisionProgram(f"{prog.name}_wrapped", tuple(params), tuple(prefix) + prog.body,
                              prog.constants, prog.origin)
    # keep the unprotected order of the original space, index inputs in place
    order = {name: i for i, name in enumerate(space.u_names)}
    new_vars.sort(key=lambda v: order.get(v.name, order.get(_source_of(v.name, lookups), 0)))
    new_space = InputSpace(space.protected, tuple(new_vars), space.cap)
    return Wrapped(typecheck(wrapped, new_space), new_space, lookups)


def _source_of(index: str, lookups: dict) -> str | None:
    for name, (idx, _, _) in lookups.items():
        if idx == index:
            return name
    return None
