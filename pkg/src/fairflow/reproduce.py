"""The golden matrix behind ``fairflow reproduce``.

Each golden recomputes one published or derived number from the shipped
corpus and compares it with the expected value: exactly, or within the
stated tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .causal import (PathSpec, check_counterfactual_fairness, load_model, path_specific_spread,
                     prob_deviating_counterfactual, spread_over_background)
from .config import corpus_dir, load_config
from .dsl import load_program, typecheck
from .engine import cross_check
from .qualitative import (check_conditional_if, check_restricted_if, check_unconditional_ni,
                          conditional_demographic_parity)
from .quantitative import (ConditionalOutcomeTable, conditional_vulnerability, fairness_spread,
                           fairness_spread_via_vulnerability, vulnerability_by_counting)
from .spaces import Distribution, Domain, InputSpace, Variable
from .wrapper import wrap_nonuniform


@dataclass(frozen=True)
class Golden:
    name: str
    compute: Callable[[], object]
    expected: object
    tol: Fraction | None = None


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    got: str
    expected: str
    seconds: float


def _corpus(name: str) -> str:
    return str(corpus_dir() / name)


def _vp(name: str, space: InputSpace, constants: dict | None = None):
    return typecheck(load_program(_corpus(name + ".dp"), constants), space)


def _scores(name: str):
    space = load_config("scores.json").space
    vp = _vp(name, space)
    count = cross_check(vp, space)["counting_count"]
    v = vulnerability_by_counting(vp, space).exact
    return count, v, fairness_spread(vp, space).exact


def _scores_skewed():
    cfg = load_config("scores_skewed.json")
    space = cfg.space
    vp = _vp("c3", space)
    wrapped = wrap_nonuniform(vp, space.with_uniform_protected(), cfg.wrap_size)
    count = cross_check(wrapped.program, wrapped.space)["counting_count"]
    v = vulnerability_by_counting(wrapped.program, wrapped.space).exact
    s = fairness_spread(vp, space).exact
    if fairness_spread_via_vulnerability(vp, space, "counting", wrap_size=cfg.wrap_size).exact != s:
        raise AssertionError("spread routes disagree")
    return count, v, s


def _causal(metric, program: str, model: str, paths=None):
    m = load_model(_corpus(model))
    p = load_program(_corpus(program))
    return metric(p, m) if paths is None else metric(p, m, PathSpec(paths))


def _password():
    g = Domain.range(1, 3)
    space = InputSpace(Variable("secret", g, Distribution.uniform(g)),
                       (Variable("guess", g, Distribution.uniform(g)),))
    cpt = {(s, (u,)): {1: Fraction(int(s == u)), 0: Fraction(int(s != u))} for s in g for u in g}
    return conditional_vulnerability(ConditionalOutcomeTable.from_cpt(space, cpt), space).exact


def _two_tables():
    dom = Domain.range(0, 1)
    space = InputSpace(Variable("g", dom, Distribution.from_pmf(dom, {0: "1/50", 1: "49/50"})),
                       (Variable("u", Domain.of([0]), Distribution.uniform(Domain.of([0]))),))
    half = {0: Fraction(1, 2), 1: Fraction(1, 2)}
    fair = ConditionalOutcomeTable.from_cpt(space, {(0, 0): half, (1, 0): half})
    skew = ConditionalOutcomeTable.from_cpt(space, {(0, 0): {0: Fraction(1)}, (1, 0): half})
    return (conditional_vulnerability(fair, space).exact, conditional_vulnerability(skew, space).exact,
            fairness_spread(fair, space).exact, fairness_spread(skew, space).exact)


def _flow_without_parity():
    cfg = load_config("flow_without_parity.json")
    space = cfg.space
    p = typecheck(cfg.load_program(), space)
    r = typecheck(cfg.load_program("restriction"), space)
    cond = typecheck(cfg.load_program("condition"), space)
    table, parity = conditional_demographic_parity(p, cond, space)
    return (check_restricted_if(p, r, space).holds, parity.holds,
            table.rows[0][1], table.rows[1][1])


def _credit(t: int):
    space = load_config("credit.json").space
    return fairness_spread(_vp("credit", space, {"T": t}), space).exact


def _qualitative():
    space = load_config("scores.json").space
    ni = tuple(check_unconditional_ni(_vp(n, space), space).holds for n in ("c1", "c2", "c3"))
    r, psi = _vp("c3_restriction", space), _vp("c3_declass", space)
    a1 = tuple((check_restricted_if(_vp(n, space), r, space).holds,
                check_conditional_if(_vp(n, space), psi, space).holds) for n in ("c3", "c3_group8"))
    return ni, a1


def goldens() -> list[Golden]:
    f = Fraction
    out = [
        Golden("scores c1 (count, V, S)", lambda: _scores("c1"), (20, f(1, 5), f(1))),
        Golden("scores c2 (count, V, S)", lambda: _scores("c2"), (10, f(1, 10), f(0))),
        Golden("scores c3 (count, V, S)", lambda: _scores("c3"), (12, f(3, 25), f(1, 5))),
        Golden("scores c3 non-uniform (count, V, S)", _scores_skewed, (130, f(13, 100), f(3, 10))),
        Golden("causal spread c2", lambda: _causal(spread_over_background, "c2.dp", "zipcode.scm").exact,
               f(131, 490)),
        Golden("causal spread c3", lambda: _causal(spread_over_background, "c3.dp", "zipcode.scm").exact,
               f(112, 490)),
        Golden("path-specific spread c2", lambda: _causal(path_specific_spread, "c2.dp", "zipcode.scm",
                                                          ["zipCode"]).exact, f(0)),
        Golden("path-specific spread c3", lambda: _causal(path_specific_spread, "c3.dp", "zipcode.scm",
                                                          ["zipCode"]).exact, f(67, 350)),
        Golden("insurance fair classifier counterfactually fair",
               lambda: _causal(check_counterfactual_fairness, "insurance_fair.dp", "insurance.scm").holds,
               True),
        Golden("insurance engine classifier spread",
               lambda: _causal(spread_over_background, "insurance_engine.dp", "insurance.scm").exact,
               f(36, 100), f(2, 100)),
        Golden("insurance Pr[Diff=1] equals spread",
               lambda: _causal(prob_deviating_counterfactual, "insurance_engine.dp", "insurance.scm").exact,
               f(37, 101)),
        Golden("password vulnerability", _password, f(2, 3)),
        Golden("two outcome tables (V fair, V skew, S fair, S skew)", _two_tables,
               (f(49, 50), f(49, 50), f(0), f(1, 2))),
        Golden("restricted flow without parity (restricted holds, parity holds, Pr A, Pr B)", _flow_without_parity,
               (True, False, f(1), f(0))),
        Golden("qualitative NI c1/c2/c3, restricted and conditional verdicts", _qualitative,
               ((False, True, False), ((True, True), (False, True)))),
    ]
    for t in range(0, 11):
        out.append(Golden(f"credit spread T={t}", lambda t=t: _credit(t), f(min(2 * t, 20 - 2 * t), 10)))
    return out


def _matches(got, expected, tol) -> bool:
    if tol is None:
        return got == expected
    return abs(Fraction(got) - Fraction(expected)) <= tol


def _show(value) -> str:
    if isinstance(value, tuple):
        return "(" + ", ".join(_show(v) for v in value) + ")"
    return str(value)


def run_goldens(selected: list[Golden] | None = None) -> list[Outcome]:
    results = []
    for golden in selected or goldens():
        start = time.perf_counter()
        try:
            got = golden.compute()
            passed = _matches(got, golden.expected, golden.tol)
            shown = _show(got)
        except Exception as exc:  # a crashing golden is a failing golden
            passed, shown = False, f"{type(exc).__name__}: {exc}"
        expected = _show(golden.expected) + (f" +/- {golden.tol}" if golden.tol is not None else "")
        results.append(Outcome(golden.name, passed, shown, expected, time.perf_counter() - start))
    return results
