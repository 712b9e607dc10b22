"""Structural causal models, interventions and counterfactual analyses.

A model is a list of background variables B with independent distributions
and an ordered list of equations ``let V = expr`` over B and earlier V.
Definition order is the topological order, so models are acyclic by
construction and deterministic given b.

Model file syntax (``.scm``, ``#`` comments, optional semicolons)::

    bg B1 : [0,9] ~ uniform
    bg B2 : {0,1} ~ pmf {0: 3/10, 1: 7/10}
    let group = B1
    let zipCode = if group >= 6 then B3 else B4
    protected group [: domain]

The optional domain after ``protected`` fixes the values an intervention may
set; without it, the values the equation reaches over B are used.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping

from .dsl.ast import Assign, DecisionProgram, Expr, Param, Var, free_vars
from .dsl.lexer import TokenStream, tokenize
from .dsl.parser import ExprParser, SourceProgram, parse_domain
from .dsl.typecheck import INT_MAX, INT_MIN, ValidatedProgram, _py_expr, expr_interval, typecheck
from .errors import (DomainMismatch, DslSyntaxError, ExposureMismatch, ModelError,
                     NonBinaryOutcome, ProtectedVariableClamped, WidthOverflowRisk)
from .quantitative import MetricValue, fairness_spread, fairness_spread_via_vulnerability
from .qualitative import Verdict
from .spaces import DEFAULT_CAP, Distribution, Domain, InputSpace, Variable, parse_probability


# -- model ---------------------------------------------------------------------


@dataclass(frozen=True)
class CausalModel:
    background: tuple[Variable, ...]
    equations: tuple[tuple[str, Expr], ...]
    protected: str
    protected_domain: Domain | None = None  # declared intervention domain
    origin: str = field(default="<inline>", compare=False)
    cap: int = field(default=DEFAULT_CAP, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "background", tuple(self.background))
        object.__setattr__(self, "equations", tuple(self.equations))
        defined: set[str] = set()
        for var in self.background:
            if var.name in defined:
                raise ModelError(f"{self.origin}: {var.name} declared twice")
            defined.add(var.name)
        for name, expr in self.equations:
            if name in defined:
                raise ModelError(f"{self.origin}: {name} defined more than once")
            unknown = free_vars(expr) - defined
            if unknown:
                raise ModelError(f"{self.origin}: {name} refers to undefined {sorted(unknown)}")
            defined.add(name)
        if self.protected not in defined:
            raise ModelError(f"{self.origin}: protected variable {self.protected} is not defined")
        self._check_width()
        object.__setattr__(self, "_solver", self._compile())
        object.__setattr__(self, "_groups", self._intervention_domain())

    # structure

    @property
    def b_names(self) -> list[str]:
        return [v.name for v in self.background]

    @property
    def names(self) -> list[str]:
        return self.b_names + [n for n, _ in self.equations]

    @property
    def groups(self) -> tuple[int, ...]:
        """Values an intervention on the protected variable may set."""
        return self._groups

    def equation(self, name: str) -> Expr:
        for n, expr in self.equations:
            if n == name:
                return expr
        raise KeyError(name)

    def b_size(self) -> int:
        return math.prod(len(v.domain) for v in self.background)

    def with_background(self, name: str, dist: Distribution) -> "CausalModel":
        """Same equations with one background distribution replaced."""
        bg = []
        for v in self.background:
            bg.append(Variable(v.name, dist.domain, dist) if v.name == name else v)
        if name not in self.b_names:
            raise ModelError(f"no background variable {name}")
        return CausalModel(tuple(bg), self.equations, self.protected, self.protected_domain,
                           self.origin, self.cap)

    # evaluation

    def background_points(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        """(b, Pr[B=b]) over the support of B, in product order."""
        n = self.b_size()
        if n > self.cap:
            from .errors import SpaceTooLarge
            raise SpaceTooLarge(f"{n} background points exceed the enumeration cap of {self.cap}")
        for combo in itertools.product(*(v.dist.support() for v in self.background)):
            weight = Fraction(1)
            for _, p in combo:
                weight *= p
            yield tuple(value for value, _ in combo), weight

    def solve(self, b: tuple[int, ...] | Mapping[str, int],
              overrides: Mapping[str, int] | None = None) -> dict[str, int]:
        """Values of every variable given b; overrides replace equations by constants."""
        if isinstance(b, Mapping):
            b = tuple(b[n] for n in self.b_names)
        return dict(zip(self.names, self._solver(*b, overrides or {})))

    def _compile(self) -> Callable[..., tuple[int, ...]]:
        mangled = {n: f"v_{n}" for n in self.names}
        lines = [f"def _solve({', '.join(mangled[n] for n in self.b_names)}, ov):"]
        for n in self.b_names:
            lines.append(f"    if {n!r} in ov: {mangled[n]} = ov[{n!r}]")
        for n, expr in self.equations:
            lines.append(f"    {mangled[n]} = ov[{n!r}] if {n!r} in ov else {_py_expr(expr, mangled)}")
        lines.append(f"    return ({', '.join(mangled[n] for n in self.names)},)")
        namespace: dict = {}
        exec(compile("\n".join(lines), f"<model:{self.origin}>", "exec"), namespace)
        return namespace["_solve"]

    def _check_width(self) -> None:
        env = {v.name: (v.domain.lo, v.domain.hi) for v in self.background}
        for n, expr in self.equations:
            iv = expr_interval(expr, env, f"{self.origin}: equation {n}")
            if n == self.protected and self.protected_domain is not None:
                iv = (min(iv[0], self.protected_domain.lo), max(iv[1], self.protected_domain.hi))
            env[n] = iv
        if self.protected_domain is not None:
            if self.protected_domain.lo < INT_MIN or self.protected_domain.hi > INT_MAX:
                raise WidthOverflowRisk(f"{self.origin}: protected domain exceeds 32 bits")
        object.__setattr__(self, "_intervals", env)

    def _intervention_domain(self) -> tuple[int, ...]:
        if self.protected_domain is not None:
            return self.protected_domain.values
        reached = {self.solve(b)[self.protected] for b, _ in self.background_points()}
        return tuple(sorted(reached))

    def reachable(self, names: Iterable[str], intervene: bool = True) -> dict[str, Domain]:
        """Values each variable takes over B, including under every intervention."""
        names = list(names)
        idx = [self.names.index(n) for n in names]
        seen: set[tuple[int, ...]] = set()
        settings = [{}] + ([{self.protected: g} for g in self.groups] if intervene else [])
        solve = self._solver
        for b in itertools.product(*(v.domain.values for v in self.background)):
            for ov in settings:
                values = solve(*b, ov)
                seen.add(tuple(values[i] for i in idx))
        return {n: Domain.of({row[k] for row in seen}) for k, n in enumerate(names)}


@dataclass(frozen=True)
class Intervention:
    target: str
    value: int


@dataclass(frozen=True)
class PathSpec:
    """Model variables held at their factual values in counterfactual runs."""

    clamped: frozenset[str] = frozenset()

    def __init__(self, clamped: Iterable[str] = ()):
        object.__setattr__(self, "clamped", frozenset(clamped))

    def validate(self, model: CausalModel) -> None:
        if model.protected in self.clamped:
            raise ProtectedVariableClamped(
                f"the protected variable {model.protected} cannot be clamped")
        unknown = self.clamped - set(model.names)
        if unknown:
            raise ModelError(f"paths name undefined variables {sorted(unknown)}")


# -- model files ---------------------------------------------------------------


def _probability(ts: TokenStream) -> Fraction:
    tok = ts.peek
    if tok.kind == "decimal":
        return parse_probability(ts.advance().text)
    num = ts.expect_kind("int", "probability").text
    if ts.accept("/"):
        num += "/" + ts.expect_kind("int", "denominator").text
    try:
        return parse_probability(num)
    except Exception as exc:
        raise DslSyntaxError(str(exc), ts.origin, tok.line, tok.column) from exc


def _background(ts: TokenStream) -> Variable:
    name = ts.expect_kind("ident", "background name").text
    ts.expect(":")
    dom = parse_domain(ts)
    ts.expect("~")
    if ts.accept("uniform"):
        return Variable(name, dom, Distribution.uniform(dom))
    start = ts.expect("pmf")
    ts.expect("{")
    pmf: dict[int, Fraction] = {}
    while True:
        neg = ts.accept("-") is not None
        value = int(ts.expect_kind("int", "value").text)
        ts.expect(":")
        pmf[-value if neg else value] = _probability(ts)
        if not ts.accept(","):
            break
    ts.expect("}")
    try:
        return Variable(name, dom, Distribution.from_pmf(dom, pmf))
    except Exception as exc:
        raise DslSyntaxError(str(exc), ts.origin, start.line, start.column) from exc


def parse_model(src: SourceProgram | str) -> CausalModel:
    if isinstance(src, str):
        src = SourceProgram(src)
    ts = TokenStream(tokenize(src.text, src.origin), src.origin)
    exprs = ExprParser(ts)
    background: list[Variable] = []
    equations: list[tuple[str, Expr]] = []
    protected: tuple[str, Domain | None] | None = None
    while ts.peek.kind != "eof":
        if ts.accept("bg"):
            background.append(_background(ts))
        elif ts.accept("let"):
            name = ts.expect_kind("ident", "variable name").text
            ts.expect("=")
            equations.append((name, exprs.expr()))
        elif ts.at("protected"):
            tok = ts.advance()
            if protected is not None:
                raise DslSyntaxError("protected declared twice", src.origin, tok.line, tok.column)
            name = ts.expect_kind("ident", "variable name").text
            protected = (name, parse_domain(ts) if ts.accept(":") else None)
        else:
            raise ts.error("unexpected token", ("'bg'", "'let'", "'protected'"))
        ts.accept(";")
    if protected is None:
        raise ts.error("model declares no protected variable", ("'protected'",))
    return CausalModel(tuple(background), tuple(equations), protected[0], protected[1], src.origin)


def load_model(path) -> CausalModel:
    return parse_model(SourceProgram.from_file(path))


# -- composition ---------------------------------------------------------------


@dataclass(frozen=True)
class ComposedProgram:
    """The decision program fed by the model: b -> P(G(b), U(b)).

    With an intervention the protected equation is replaced by the constant;
    ``clamped`` variables keep the value they have without the intervention.
    """

    model: CausalModel
    decision: ValidatedProgram
    intervention: Intervention | None = None
    clamped: frozenset[str] = frozenset()

    def __call__(self, b: tuple[int, ...] | Mapping[str, int]) -> int:
        values = self._values(b)
        return self.decision.call(values)

    def _values(self, b) -> dict[str, int]:
        m = self.model
        if self.intervention is None:
            return m.solve(b)
        overrides = {self.intervention.target: self.intervention.value}
        if self.clamped:
            factual = m.solve(b)
            overrides.update({n: factual[n] for n in self.clamped})
        return m.solve(b, overrides)


def _decision_for(p: DecisionProgram | ValidatedProgram, c: CausalModel) -> ValidatedProgram:
    program = p.program if isinstance(p, ValidatedProgram) else p
    return _typed_decision(program, c)


@functools.lru_cache(maxsize=64)
def _typed_decision(program: DecisionProgram, c: CausalModel) -> ValidatedProgram:
    missing = [n for n in program.param_names if n not in c.names]
    if missing:
        raise ExposureMismatch(
            f"{program.name} reads {missing}, which model {c.origin} does not define")
    clash = {n for n, _ in program.constants} & set(c.names)
    if clash:
        raise ExposureMismatch(f"{program.name}: constants {sorted(clash)} shadow model variables")
    # parameter domains come from the model; declared domains are not binding here
    bare = DecisionProgram(program.name, tuple(Param(n) for n in program.param_names),
                           program.body, program.constants, program.origin)
    return typecheck(bare, c.reachable(program.param_names))


def compose(p: DecisionProgram | ValidatedProgram, c: CausalModel) -> ComposedProgram:
    return ComposedProgram(c, _decision_for(p, c))


def compose_intervened(p: DecisionProgram | ValidatedProgram, c: CausalModel, g: int,
                       paths: PathSpec | None = None) -> ComposedProgram:
    if g not in c.groups:
        raise DomainMismatch(f"{c.protected}={g} is outside the intervention domain {list(c.groups)}")
    clamped = frozenset()
    if paths is not None:
        paths.validate(c)
        clamped = paths.clamped
    return ComposedProgram(c, _decision_for(p, c), Intervention(c.protected, g), clamped)


# -- analyses ------------------------------------------------------------------


@dataclass(frozen=True)
class CounterfactualWitness:
    b: dict
    g1: int
    g2: int
    d1: int
    d2: int

    def as_dict(self) -> dict:
        return {"b": dict(self.b), "g1": self.g1, "g2": self.g2, "d1": self.d1, "d2": self.d2}


@dataclass(frozen=True)
class _Rows:
    """Per-b factual and counterfactual outputs, shared by all analyses."""

    groups: tuple[int, ...]
    rows: tuple[tuple[tuple[int, ...], Fraction, int, tuple[int, ...]], ...]  # b, weight, factual, per g


def _rows(p, c: CausalModel, paths: PathSpec | None = None, favorable: int = 1) -> _Rows:
    decision = _decision_for(p, c)
    outs = decision.output_domain
    if len(outs) > 2 or (len(outs) == 2 and favorable not in outs):
        raise NonBinaryOutcome(f"{decision.name} has outcomes {list(outs)}; a binary outcome is required")
    clamped = frozenset()
    if paths is not None:
        paths.validate(c)
        clamped = paths.clamped
    solve, names, fn = c._solver, c.names, decision.fn
    idx = [names.index(n) for n in decision.param_names]
    rows = []
    for b, weight in c.background_points():
        factual = solve(*b, {})
        fixed = {n: factual[names.index(n)] for n in clamped}
        per_g = []
        for g in c.groups:
            values = solve(*b, {**fixed, c.protected: g})
            per_g.append(fn(*(values[i] for i in idx)))
        rows.append((b, weight, fn(*(factual[i] for i in idx)), tuple(per_g)))
    return _Rows(c.groups, tuple(rows))


def _spread(rows: _Rows, favorable: int, backend: str) -> MetricValue:
    total = Fraction(0)
    per_b = []
    for b, weight, _, per_g in rows.rows:
        fav = [1 if d == favorable else 0 for d in per_g]
        s = max(fav) - min(fav)
        per_b.append((b, Fraction(s)))
        total += weight * s
    return MetricValue(total, backend, per_u=tuple(per_b))


def spread_over_background(p, c: CausalModel, favorable: int = 1) -> MetricValue:
    """Fairness Spread of the intervened composition, with B in the role of U."""
    return _spread(_rows(p, c, None, favorable), favorable, "enumeration")


def path_specific_spread(p, c: CausalModel, paths: PathSpec, favorable: int = 1) -> MetricValue:
    """Spread where the ``paths`` variables keep their factual values under intervention."""
    return _spread(_rows(p, c, paths, favorable), favorable, "enumeration")


def check_counterfactual_fairness(p, c: CausalModel, paths: PathSpec | None = None,
                                  favorable: int = 1) -> Verdict:
    """Every intervention on the protected variable yields the same decision, for every b."""
    rows = _rows(p, c, paths, favorable)
    for b, _, _, per_g in rows.rows:
        for i, j in itertools.combinations(range(len(per_g)), 2):
            if per_g[i] != per_g[j]:
                w = CounterfactualWitness(dict(zip(c.b_names, b)), rows.groups[i], rows.groups[j],
                                          per_g[i], per_g[j])
                return Verdict(False, w, "counterfactual-fairness")
    return Verdict(True, None, "counterfactual-fairness")


def prob_deviating_counterfactual(p, c: CausalModel, favorable: int = 1) -> MetricValue:
    """Pr over B that some intervention changes the factual decision."""
    total = Fraction(0)
    for _, weight, factual, per_g in _rows(p, c, None, favorable).rows:
        if any(d != factual for d in per_g):
            total += weight
    return MetricValue(total, "enumeration")


# -- inlining ------------------------------------------------------------------


def inline_composition(p, c: CausalModel, paths: PathSpec | None = None) -> tuple[ValidatedProgram, InputSpace]:
    """One decision program over (intervened G, B) computing the counterfactual output.

    The protected variable becomes the program's protected input with a
    uniform distribution over the intervention domain; background variables
    become the unprotected inputs.  Clamped variables read a factual copy of
    the equations.  The result feeds the ordinary spread and counting
    routines, which gives an independent route to every causal number.
    """
    decision = _decision_for(p, c)
    clamped = frozenset()
    if paths is not None:
        paths.validate(c)
        clamped = paths.clamped
    program = decision.program
    taken = set(c.names) | {n for n, _ in program.constants}
    from .dsl.ast import assigned_names
    taken |= assigned_names(program.body)

    def fresh(base: str) -> str:
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    body: list = []
    factual: dict[str, str] = {}
    if clamped:
        from .dsl.ast import substitute
        for n in c.b_names:
            factual[n] = n
        for n, expr in c.equations:
            factual[n] = fresh(f"{n}_factual")
            body.append(Assign(factual[n], substitute(expr, {k: Var(v) for k, v in factual.items()})))
    for n, expr in c.equations:
        if n == c.protected:
            continue
        body.append(Assign(n, Var(factual[n]) if n in clamped else expr))
    g_name = c.protected
    if g_name in c.b_names:
        # intervening on a background variable: the program input replaces it
        raise ModelError("inlining requires the protected variable to be defined by an equation")
    params = (Param(g_name),) + tuple(Param(n) for n in c.b_names)
    inlined = DecisionProgram(f"{program.name}_composed", params, tuple(body) + program.body,
                              program.constants, program.origin)
    g_dom = Domain.of(c.groups)
    space = InputSpace(Variable(g_name, g_dom, Distribution.uniform(g_dom)), c.background, c.cap)
    return typecheck(inlined, space), space


def spread_over_background_inlined(p, c: CausalModel, paths: PathSpec | None = None,
                                   backend: str = "enumeration", favorable: int = 1,
                                   wrap_size: int | None = None) -> MetricValue:
    """Spread computed on the inlined program, by the spread formula or |G|V-1 counting."""
    vp, space = inline_composition(p, c, paths)
    if backend == "direct":
        return fairness_spread(vp, space, favorable)
    return fairness_spread_via_vulnerability(vp, space, backend, favorable, wrap_size)
