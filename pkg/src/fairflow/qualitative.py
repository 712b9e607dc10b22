"""Noninterference checks and demographic-parity tables.

All checks enumerate the finite input space.  Witnesses are the first
violation in (u, g1, g2) lexicographic order, where u follows the product
order of the unprotected domains and groups follow domain order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .dsl.typecheck import ValidatedProgram
from .engine.counting import count_program
from .errors import BackendMismatch, DomainMismatch, ZeroMassCondition, ZeroMassGroup
from .spaces import InputSpace

PARITY_CAVEAT = (
    "Restricted and conditional information flow do not imply (conditional) "
    "demographic parity: conditioning on a class or condition changes the "
    "group-conditional input distribution. This verdict carries no parity guarantee."
)


@dataclass(frozen=True)
class Counterexample:
    g1: int
    g2: int
    u: dict
    d1: int
    d2: int

    def as_dict(self) -> dict:
        return {"g1": self.g1, "g2": self.g2, "u": dict(self.u), "d1": self.d1, "d2": self.d2}


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: object | None = None
    property: str = ""
    caveat: str | None = None
    backend: str = "enumeration"

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("a verdict holds exactly when it has no witness")

    def __bool__(self) -> bool:
        return self.holds

    def as_dict(self) -> dict:
        out = {"property": self.property, "holds": self.holds, "backend": self.backend,
               "witness": None if self.witness is None else self.witness.as_dict()}
        if self.caveat is not None:
            out["caveat"] = self.caveat
        return out


@dataclass(frozen=True)
class ParityTable:
    groups: tuple[int, ...]
    outcomes: tuple[int, ...]
    rows: dict  # g -> {d: Fraction}
    max_gap: Fraction
    condition: str | None = field(default=None, compare=False)

    def as_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "outcomes": list(self.outcomes),
            "rows": {str(g): {str(d): str(p) for d, p in row.items()} for g, row in self.rows.items()},
            "maxGap": str(self.max_gap),
        }


def _same_inputs(p: ValidatedProgram, other: ValidatedProgram, what: str) -> None:
    if set(p.param_names) != set(other.param_names):
        raise DomainMismatch(
            f"{what} {other.name} reads {other.param_names}, but {p.name} reads {p.param_names}")


def _first_violation(space: InputSpace, us: list[tuple[int, ...]],
                     p: Callable, related: Callable[[int, int, tuple], bool]) -> Counterexample | None:
    groups = space.groups
    for u in us:
        outs = [p(g, u) for g in groups]
        for i, g1 in enumerate(groups):
            for j in range(i + 1, len(groups)):
                if outs[i] != outs[j] and related(g1, groups[j], u):
                    return Counterexample(g1, groups[j], dict(zip(space.u_names, u)), outs[i], outs[j])
    return None


def _search(space: InputSpace, p: Callable, related, jobs: int) -> Counterexample | None:
    space._guard(space.size())
    us = list(space.u_points())
    if jobs <= 1 or len(us) < 2:
        return _first_violation(space, us, p, related)
    step = -(-len(us) // jobs)
    chunks = [us[i:i + step] for i in range(0, len(us), step)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        # map preserves chunk order, so the first non-empty result is the
        # lexicographically first witness overall
        for found in pool.map(lambda c: _first_violation(space, c, p, related), chunks):
            if found is not None:
                return found
    return None


def check_unconditional_ni(p: ValidatedProgram, space: InputSpace, jobs: int = 1,
                           backend: str = "enumeration") -> Verdict:
    """P(g1,u) = P(g2,u) for all groups g1, g2 and every u.

    ``backend="counting"`` decides the property from the projected count
    (it holds iff the count equals |U|) and then re-runs enumeration to agree
    and to find the witness.
    """
    call = p.call_with(space)
    witness = _search(space, call, lambda g1, g2, u: True, jobs)
    if backend == "counting":
        count = len(count_program(p, space).pairs)
        if (count == space.u_size()) != (witness is None):
            raise BackendMismatch(f"{p.name}: noninterference verdicts disagree",
                                  space.u_size() if witness is None else -1, count, None)
    elif backend != "enumeration":
        raise ValueError(f"unknown backend {backend!r}")
    return Verdict(witness is None, witness, "unconditional-noninterference", backend=backend)


def check_restricted_if(p: ValidatedProgram, r: ValidatedProgram, space: InputSpace,
                        jobs: int = 1) -> Verdict:
    """R(g1,u) = R(g2,u) implies P(g1,u) = P(g2,u)."""
    _same_inputs(p, r, "restricted classification")
    call, rc = p.call_with(space), r.call_with(space)
    witness = _search(space, call, lambda g1, g2, u: rc(g1, u) == rc(g2, u), jobs)
    return Verdict(witness is None, witness, "restricted-information-flow", PARITY_CAVEAT)


def check_conditional_if(p: ValidatedProgram, psi: ValidatedProgram, space: InputSpace,
                         jobs: int = 1) -> Verdict:
    """P(g1,u) = P(g2,u) whenever neither (g1,u) nor (g2,u) satisfies psi."""
    _same_inputs(p, psi, "condition")
    call, pc = p.call_with(space), psi.call_with(space)
    witness = _search(space, call, lambda g1, g2, u: not pc(g1, u) and not pc(g2, u), jobs)
    return Verdict(witness is None, witness, "conditional-information-flow", PARITY_CAVEAT)


def _parity(p: ValidatedProgram, space: InputSpace, keep: Callable | None, tol: Fraction,
            prop: str, condition: str | None) -> tuple[ParityTable, Verdict]:
    call = p.call_with(space)
    groups = space.groups
    g_probs = dict(space.protected.dist.items())
    zero = [g for g in groups if g_probs[g] == 0]
    if zero:
        raise ZeroMassGroup(f"groups {zero} have zero probability")
    outcomes = p.output_domain
    joint = {g: {d: Fraction(0) for d in outcomes} for g in groups}
    mass = {g: Fraction(0) for g in groups}
    for u, pu in space.marginal_u():
        for g in groups:
            if keep is not None and not keep(g, u):
                continue
            w = g_probs[g] * pu
            joint[g][call(g, u)] += w
            mass[g] += w
    if keep is not None:
        if sum(mass.values()) == 0:
            raise ZeroMassCondition(f"condition {condition} has zero probability")
        empty = [g for g in groups if mass[g] == 0]
        if empty:
            raise ZeroMassGroup(f"groups {empty} have zero probability under condition {condition}")
    rows = {g: {d: joint[g][d] / mass[g] for d in outcomes} for g in groups}
    gap = max((max(rows[g][d] for g in groups) - min(rows[g][d] for g in groups)
               for d in outcomes), default=Fraction(0))
    table = ParityTable(groups, outcomes, rows, gap, condition)
    holds = gap <= tol
    witness = None
    if not holds:
        d = max(outcomes, key=lambda d: max(rows[g][d] for g in groups) - min(rows[g][d] for g in groups))
        hi = max(groups, key=lambda g: rows[g][d])
        lo = min(groups, key=lambda g: rows[g][d])
        witness = ParityGap(d, hi, lo, rows[hi][d], rows[lo][d])
    return table, Verdict(holds, witness, prop)


@dataclass(frozen=True)
class ParityGap:
    outcome: int
    g_high: int
    g_low: int
    p_high: Fraction
    p_low: Fraction

    def as_dict(self) -> dict:
        return {"outcome": self.outcome, "g_high": self.g_high, "g_low": self.g_low,
                "p_high": str(self.p_high), "p_low": str(self.p_low)}


def demographic_parity(p: ValidatedProgram, space: InputSpace,
                       tol: Fraction = Fraction(0)) -> tuple[ParityTable, Verdict]:
    """Exact Pr[P(G,U)=d | G=g] per group; parity holds iff the largest gap <= tol."""
    return _parity(p, space, None, Fraction(tol), "demographic-parity", None)


def conditional_demographic_parity(p: ValidatedProgram, cond: ValidatedProgram, space: InputSpace,
                                   tol: Fraction = Fraction(0)) -> tuple[ParityTable, Verdict]:
    """Parity table of P restricted to the event cond(G,U) != 0."""
    _same_inputs(p, cond, "condition")
    cc = cond.call_with(space)
    return _parity(p, space, lambda g, u: cc(g, u) != 0, Fraction(tol),
                   "conditional-demographic-parity", cond.name)
