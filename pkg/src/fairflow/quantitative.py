"""Conditional vulnerability and Fairness Spread, computed exactly.

Three routes reach the same numbers and are checked against each other:
the spread formula itself, ``|G| * V - 1`` with G made uniform, and the
projected count of ``{(u, d) : exists g. d = P(g, u)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .dsl.typecheck import ValidatedProgram
from .engine.counting import count_program, enumeration_pairs
from .errors import IncompleteTable, NonBinaryOutcome, NonUniformDistribution, ZeroMassGroup
from .spaces import InputSpace
from .wrapper import wrap_nonuniform

FAVORABLE = 1


def render_decimal(value: Fraction, places: int = 6) -> str:
    """Correctly rounded (half-even) fixed-point rendering of an exact rational."""
    scaled = round(value * 10**places)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if places == 0:
        return f"{sign}{scaled}"
    whole, frac = divmod(scaled, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


@dataclass(frozen=True)
class MetricValue:
    exact: Fraction
    backend: str  # "enumeration" | "counting" | "cpt"
    count: int | None = None
    per_u: tuple = field(default=(), compare=False)

    @property
    def decimal(self) -> str:
        return render_decimal(self.exact)

    def render(self, places: int = 6) -> str:
        return render_decimal(self.exact, places)

    def __float__(self) -> float:
        return float(self.exact)


@dataclass(frozen=True)
class ConditionalOutcomeTable:
    """Pr[P(G,U) = d | G = g, U = u] for every (g, u) of the space.

    Deterministic programs give 0/1 rows; explicit tables (CPTs) may be
    probabilistic.
    """

    groups: tuple[int, ...]
    us: tuple[tuple[int, ...], ...]
    outcomes: tuple[int, ...]
    rows: Mapping[tuple[int, tuple[int, ...]], Mapping[int, Fraction]]

    def __post_init__(self):
        for g in self.groups:
            for u in self.us:
                row = self.rows.get((g, u))
                if row is None:
                    raise IncompleteTable(f"no outcome row for g={g}, u={u}")
                if any(p < 0 for p in row.values()) or sum(row.values()) != 1:
                    raise IncompleteTable(f"row for g={g}, u={u} is not a distribution")
                if not set(row) <= set(self.outcomes):
                    raise IncompleteTable(f"row for g={g}, u={u} uses undeclared outcomes")

    @classmethod
    def from_program(cls, program: ValidatedProgram, space: InputSpace) -> "ConditionalOutcomeTable":
        call = program.call_with(space)
        us = tuple(space.u_points())
        rows = {(g, u): {call(g, u): Fraction(1)} for u in us for g in space.groups}
        return cls(space.groups, us, program.output_domain, rows)

    @classmethod
    def from_cpt(cls, space: InputSpace, cpt: Mapping, outcomes=(0, 1)) -> "ConditionalOutcomeTable":
        """``cpt[(g, u)] = {d: prob}``; a bare ``u`` value is accepted for single-component U."""
        rows = {}
        for (g, u), row in cpt.items():
            key_u = u if isinstance(u, tuple) else (u,)
            rows[(g, key_u)] = {d: Fraction(p) for d, p in row.items()}
        return cls(space.groups, tuple(space.u_points()), tuple(outcomes), rows)

    def mu(self, g: int, u: tuple[int, ...], favorable: int = FAVORABLE) -> Fraction:
        return self.rows[(g, u)].get(favorable, Fraction(0))


def _table(target, space: InputSpace) -> tuple[ConditionalOutcomeTable, str]:
    if isinstance(target, ConditionalOutcomeTable):
        return target, "cpt"
    return ConditionalOutcomeTable.from_program(target, space), "enumeration"


def _require_binary(outcomes: tuple[int, ...], favorable: int) -> None:
    if len(outcomes) > 2 or (len(outcomes) == 2 and favorable not in outcomes):
        raise NonBinaryOutcome(
            f"Fairness Spread needs a binary outcome containing the favorable value "
            f"{favorable}; got outcomes {list(outcomes)}")


def conditional_vulnerability(target, space: InputSpace) -> MetricValue:
    """Probability of guessing G in one try after seeing the decision and U.

    ``target`` is a typechecked program or a :class:`ConditionalOutcomeTable`;
    the G and U distributions come from ``space``.  Evaluated term by term as
    ``sum_u sum_d max_g Pr[P=d, U=u] * Pr[G=g | P=d, U=u]``.
    """
    table, backend = _table(target, space)
    g_items = space.protected.dist.items()
    total = Fraction(0)
    for u, pu in space.marginal_u():
        if pu == 0:
            continue
        for d in table.outcomes:
            joint = {g: pg * pu * table.rows[(g, u)].get(d, Fraction(0)) for g, pg in g_items}
            mass = sum(joint.values())  # Pr[P=d, U=u]
            if mass == 0:
                continue
            total += max(mass * (joint[g] / mass) for g, _ in g_items)
    return MetricValue(total, backend)


def vulnerability_by_counting(program: ValidatedProgram, space: InputSpace,
                              backend: str = "counting") -> MetricValue:
    """V = |{(u,d) : exists g. d = P(g,u)}| / (|U| |G|) for uniform G and U.

    ``backend`` picks how the set is obtained: "counting" (SAT, projected
    blocking clauses) or "enumeration".
    """
    if not space.protected.dist.is_uniform or not all(v.dist.is_uniform for v in space.unprotected):
        raise NonUniformDistribution(
            "counting requires uniform G and U; wrap non-uniform inputs with wrap_nonuniform first")
    if backend == "counting":
        count = len(count_program(program, space).pairs)
    elif backend == "enumeration":
        count = len(enumeration_pairs(program, space))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return MetricValue(Fraction(count, space.u_size() * len(space.groups)), backend, count)


def fairness_spread(target, space: InputSpace, favorable: int = FAVORABLE) -> MetricValue:
    """S = sum_u Pr[U=u] * (max_g mu(g,u) - min_g mu(g,u)).

    mu is obtained by conditioning the joint distribution on (G=g, U=u), so
    the declared G distribution is used (and cancels); every group must have
    positive mass.  Per-u terms are kept in ``per_u``.
    """
    table, backend = _table(target, space)
    _require_binary(table.outcomes, favorable)
    g_items = space.protected.dist.items()
    for g, pg in g_items:
        if pg == 0:
            raise ZeroMassGroup(f"group {g} has zero probability")
    total = Fraction(0)
    per_u = []
    for u, pu in space.marginal_u():
        mus = []
        for g, pg in g_items:
            joint_fav = pg * pu * table.mu(g, u, favorable)
            joint = pg * pu
            mus.append(joint_fav / joint if joint else table.mu(g, u, favorable))
        spread = max(mus) - min(mus)
        per_u.append((u, spread))
        total += pu * spread
    return MetricValue(total, backend, per_u=tuple(per_u))


def fairness_spread_via_vulnerability(program: ValidatedProgram, space: InputSpace,
                                      backend: str = "enumeration",
                                      favorable: int = FAVORABLE,
                                      wrap_size: int | None = None) -> MetricValue:
    """S = |G| * V - 1, with V measured under a uniform G.

    With ``backend="counting"`` V comes from the projected count; non-uniform
    U inputs are first wrapped into uniform index inputs.
    """
    _require_binary(program.output_domain, favorable)
    uniform_g = space.with_uniform_protected()
    n = len(space.groups)
    if backend == "enumeration":
        v = conditional_vulnerability(program, uniform_g)
        return MetricValue(n * v.exact - 1, "enumeration")
    if backend == "counting":
        if all(var.dist.is_uniform for var in uniform_g.unprotected):
            v = vulnerability_by_counting(program, uniform_g, "counting")
        else:
            wrapped = wrap_nonuniform(program, uniform_g, wrap_size)
            v = vulnerability_by_counting(wrapped.program, wrapped.space, "counting")
        return MetricValue(n * v.exact - 1, "counting", v.count)
    raise ValueError(f"unknown backend {backend!r}")
