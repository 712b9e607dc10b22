"""Seeded generator of small loop-free decision programs for property tests."""

from __future__ import annotations

import random

from fairflow.dsl.ast import Assign, Binary, Cond, DecisionProgram, If, Num, Param, Return, Unary, Var
from fairflow.dsl.typecheck import typecheck
from fairflow.errors import TypecheckError
from fairflow.spaces import Domain, Distribution, InputSpace, Variable

CMP = ("==", "!=", "<", "<=", ">", ">=")


class ProgramGen:
    def __init__(self, seed: int, binary: bool = True):
        self.rng = random.Random(seed)
        self.binary = binary

    def space(self) -> InputSpace:
        r = self.rng
        lo = r.randint(-3, 2)
        g = Domain.range(lo, lo + r.randint(1, 4))
        us = []
        for i in range(r.randint(1, 2)):
            ulo = r.randint(-4, 3)
            dom = Domain.range(ulo, ulo + r.randint(1, 5))
            us.append(Variable(f"u{i}", dom, Distribution.uniform(dom)))
        return InputSpace(Variable("g", g, Distribution.uniform(g)), tuple(us))

    def expr(self, names: list[str], depth: int) -> object:
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            return Var(r.choice(names)) if r.random() < 0.7 else Num(r.randint(0, 6))
        kind = r.random()
        if kind < 0.35:
            return Binary(r.choice(("+", "-", "*")), self.expr(names, depth - 1), self.expr(names, depth - 1))
        if kind < 0.6:
            return self.test(names, depth - 1)
        if kind < 0.7:
            return Unary("-", self.expr(names, depth - 1))
        if kind < 0.8:
            return Cond(self.test(names, depth - 1), self.expr(names, depth - 1), self.expr(names, depth - 1))
        return Binary(r.choice(("and", "or")), self.test(names, depth - 1), self.test(names, depth - 1))

    def test(self, names: list[str], depth: int) -> object:
        r = self.rng
        t = Binary(r.choice(CMP), self.expr(names, max(depth - 1, 0)), self.expr(names, max(depth - 1, 0)))
        return Unary("not", t) if r.random() < 0.15 else t

    def result(self, names: list[str]) -> object:
        if self.binary:
            return self.test(names, 2)
        return self.expr(names, 2)

    def block(self, names: list[str], depth: int, counter: list[int]) -> tuple:
        r = self.rng
        stmts = []
        names = list(names)
        for _ in range(r.randint(0, 2)):
            if r.random() < 0.5 and counter[0] < 4:
                name = f"t{counter[0]}"
                counter[0] += 1
            else:
                name = r.choice(names)
            stmts.append(Assign(name, self.expr(names, 2)))
            if name not in names:
                names.append(name)
        if depth > 0 and r.random() < 0.6:
            body = self.block(names, depth - 1, counter)
            orelse = self.block(names, depth - 1, counter) if r.random() < 0.8 else ()
            stmts.append(If(self.test(names, 2), body, orelse))
            if not orelse:
                stmts.append(Return(self.result(names)))
        else:
            stmts.append(Return(self.result(names)))
        return tuple(stmts)

    def program(self, space: InputSpace, index: int) -> DecisionProgram:
        names = space.names
        body = self.block(names, 2, [0])
        return DecisionProgram(f"rand{index}", tuple(Param(n) for n in names), body)


def random_programs(count: int, seed: int = 2024, binary: bool = True):
    """Yield (validated program, space) pairs; programs the typechecker rejects are skipped."""
    gen = ProgramGen(seed, binary)
    made = 0
    attempts = 0
    while made < count:
        attempts += 1
        if attempts > count * 20:
            raise RuntimeError("generator rejects too many programs")
        space = gen.space()
        prog = gen.program(space, made)
        try:
            vp = typecheck(prog, space)
        except TypecheckError:
            continue
        if binary and not set(vp.output_domain) <= {0, 1}:
            continue
        made += 1
        yield vp, space


_CACHE: dict = {}


def corpus_crosscheck(count: int = 200, seed: int = 2024, binary: bool = True) -> list:
    """Cross-check results for the random corpus, computed once per test session."""
    from fairflow.engine import cross_check

    key = (count, seed, binary)
    if key not in _CACHE:
        _CACHE[key] = [(vp, space, cross_check(vp, space))
                       for vp, space in random_programs(count, seed, binary)]
    return _CACHE[key]


def differential(vp, space, rng, samples: int) -> list:
    """Compare the circuit against the evaluator on random points; return the mismatches."""
    from fairflow.engine import bitblast

    names = space.names
    columns = [rng.choices(v.domain.values, k=samples) for v in space.variables]
    points = [dict(zip(names, row)) for row in zip(*columns)]
    values, ok = bitblast(vp, space).evaluate_batch(points)
    order = [names.index(p) for p in vp.param_names]
    expected = [vp.fn(*(row[i] for i in order)) for row in zip(*columns)]
    return [(p, v, e) for p, v, e, k in zip(points, values, expected, ok) if v != e or not k]


def corpus_differential(samples: int = 10_000, seed: int = 17) -> list:
    """Mismatch lists for the generated programs, computed once per test session."""
    import random

    key = ("differential", samples, seed)
    if key not in _CACHE:
        rng = random.Random(seed)
        programs = list(random_programs(200)) + list(random_programs(40, seed=99, binary=False))
        _CACHE[key] = [(vp, differential(vp, space, rng, samples)) for vp, space in programs]
    return _CACHE[key]
