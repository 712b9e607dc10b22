"""Projected model counting and the two-backend cross-check.

The quantity of interest is the set ``{(u, d) : exists g. d = P(g, u)}``.
The enumeration backend builds it by running the program on every point; the
counting backend bit-blasts the program and enumerates SAT models projected
onto the U and D bits, blocking each projection once found.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from ..dsl.typecheck import ValidatedProgram
from ..errors import BackendMismatch
from ..spaces import InputSpace
from .circuit import Circuit, bitblast
from .cnf import CnfFormula, to_cnf
from .sat import Solver

DEFAULT_CONFLICT_BUDGET = 1_000_000


def projected_models(formula: CnfFormula,
                     conflict_budget: int | None = DEFAULT_CONFLICT_BUDGET) -> set[tuple[tuple[int, ...], int]]:
    """All (u, d) projections of the formula's models, via blocking clauses."""
    solver = Solver(formula.num_vars, formula.clauses, conflict_budget=conflict_budget)
    projection = formula.projection
    found: set[tuple[tuple[int, ...], int]] = set()
    while solver.solve():
        model = solver.model
        if not formula.check_model(model):
            raise AssertionError("SAT core returned a model violating the formula")
        key = formula.decode(model)
        if key in found:
            raise AssertionError(f"projection {key} found twice despite blocking")
        found.add(key)
        if not projection:
            break
        solver.add_clause([-v if model[v] else v for v in projection])
    return found


def projected_count(formula: CnfFormula, conflict_budget: int | None = DEFAULT_CONFLICT_BUDGET) -> int:
    """|{(u,d) : some g-bits extend (u,d) to a model}|."""
    return len(projected_models(formula, conflict_budget))


def _u_slices(space: InputSpace, jobs: int) -> list[list[tuple[int, ...]]]:
    points = list(space.u_points())
    if jobs <= 1:
        return [points]
    step = -(-len(points) // jobs)
    return [points[i:i + step] for i in range(0, len(points), step)]


def enumeration_pairs(program: ValidatedProgram, space: InputSpace, jobs: int = 1) -> set[tuple[tuple[int, ...], int]]:
    """The (u, d) set by running the program on every point of G x U."""
    space._guard(space.size())
    call = program.call_with(space)
    groups = space.groups

    def work(us):
        return {(u, call(g, u)) for u in us for g in groups}

    slices = _u_slices(space, jobs)
    if len(slices) == 1:
        return work(slices[0])
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        out: set = set()
        for part in pool.map(work, slices):
            out |= part
        return out


def enumeration_count(program: ValidatedProgram, space: InputSpace, jobs: int = 1) -> int:
    return len(enumeration_pairs(program, space, jobs))


@dataclass
class CountingRun:
    circuit: Circuit
    formula: CnfFormula
    pairs: set
    seconds: float
    stats: dict = field(default_factory=dict)


def count_program(program: ValidatedProgram, space: InputSpace,
                  circuit_hook: Callable[[Circuit], Circuit] | None = None,
                  conflict_budget: int | None = DEFAULT_CONFLICT_BUDGET) -> CountingRun:
    """Bit-blast, Tseitin-encode and count. ``circuit_hook`` exists for fault injection."""
    start = time.perf_counter()
    circuit = bitblast(program, space)
    if circuit_hook is not None:
        circuit = circuit_hook(circuit)
    formula = to_cnf(circuit)
    pairs = projected_models(formula, conflict_budget)
    return CountingRun(circuit, formula, pairs, time.perf_counter() - start,
                       {"vars": formula.num_vars, "clauses": len(formula.clauses),
                        "gates": circuit.gate_count})


def cross_check(program: ValidatedProgram, space: InputSpace,
                circuit_hook: Callable[[Circuit], Circuit] | None = None, jobs: int = 1) -> dict:
    """Run both backends and insist they agree on the (u, d) set.

    Raises BackendMismatch with a distinguishing (u, d) witness otherwise.
    """
    t0 = time.perf_counter()
    enum_pairs = enumeration_pairs(program, space, jobs)
    t_enum = time.perf_counter() - t0
    run = count_program(program, space, circuit_hook)
    if run.pairs != enum_pairs:
        diff = sorted(enum_pairs ^ run.pairs)
        witness = diff[0]
        side = "enumeration only" if witness in enum_pairs else "counting only"
        raise BackendMismatch(f"{program.name}: backends disagree ({side} {witness})",
                              len(enum_pairs), len(run.pairs), witness)
    return {
        "program": program.name,
        "enumeration_count": len(enum_pairs),
        "counting_count": len(run.pairs),
        "match": True,
        "timings": {"enumeration_s": t_enum, "counting_s": run.seconds},
        "formula": run.stats,
    }
