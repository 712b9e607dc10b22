from fractions import Fraction

import pytest

from fairflow.config import corpus_dir, load_config
from fairflow.dsl import load_program, parse_program, typecheck
from fairflow.errors import InvalidDistribution, NonBinaryOutcome, NonUniformDistribution, ZeroMassGroup
from fairflow.quantitative import (ConditionalOutcomeTable, conditional_vulnerability, fairness_spread,
                                   fairness_spread_via_vulnerability, render_decimal,
                                   vulnerability_by_counting)
from fairflow.spaces import Distribution, Domain, InputSpace, Variable, uniform_space
from fairflow.wrapper import resolution, wrap_nonuniform

SCORES = uniform_space(("group", 0, 9), ("score", 1, 10))


def vp(name, space=SCORES, constants=None):
    return typecheck(load_program(corpus_dir() / f"{name}.dp", constants), space)


def brute_vulnerability(program, space):
    """Pr[guess correct] for the Bayes-optimal guesser, from the joint table."""
    joint = {}
    for point, w in space.enumerate():
        key = (tuple(point[n] for n in space.u_names), program.call(point))
        joint.setdefault(key, {}).setdefault(point[space.protected.name], Fraction(0))
        joint[key][point[space.protected.name]] += w
    return sum(max(row.values()) for row in joint.values())


@pytest.mark.parametrize("name,v,s", [("c1", Fraction(1, 5), 1), ("c2", Fraction(1, 10), 0),
                                      ("c3", Fraction(3, 25), Fraction(1, 5))])
def test_scores_uniform(name, v, s):
    program = vp(name)
    assert conditional_vulnerability(program, SCORES).exact == v
    assert brute_vulnerability(program, SCORES) == v
    assert vulnerability_by_counting(program, SCORES).exact == v
    assert fairness_spread(program, SCORES).exact == s


def test_scores_skewed_row():
    cfg = load_config("scores_skewed.json")
    program = vp("c3", cfg.space)
    assert fairness_spread(program, cfg.space).exact == Fraction(3, 10)
    via = fairness_spread_via_vulnerability(program, cfg.space, "counting", wrap_size=cfg.wrap_size)
    assert (via.exact, via.count) == (Fraction(3, 10), 130)


def test_wrapper_preserves_the_distribution():
    cfg = load_config("scores_skewed.json")
    score = cfg.space.variable("score")
    program = vp("c3", cfg.space)
    assert resolution(score.dist) == 100
    for size in (100, 200):
        wrapped = wrap_nonuniform(program, cfg.space, size)
        index, n, table = wrapped.lookups["score"]
        assert n == size
        for value, p in score.dist.items():
            assert Fraction(table.count(value), n) == p
        # every index value maps to the same decision as the value it stands for
        call = wrapped.program.call_with(wrapped.space)
        for g in cfg.space.groups:
            for i in range(1, n + 1):
                assert call(g, (i,)) == program(g, table[i - 1])
        assert fairness_spread(wrapped.program, wrapped.space).exact == Fraction(3, 10)


def test_wrapper_rejects_unrepresentable_size():
    cfg = load_config("scores_skewed.json")
    with pytest.raises(InvalidDistribution):
        wrap_nonuniform(vp("c3", cfg.space), cfg.space, 30)


def test_counting_needs_uniform_inputs():
    cfg = load_config("scores_skewed.json")
    with pytest.raises(NonUniformDistribution):
        vulnerability_by_counting(vp("c3", cfg.space), cfg.space)


def test_password_checker():
    space = load_config("password.json").space
    assert conditional_vulnerability(vp("password", space), space).exact == Fraction(2, 3)


def two_tables_space():
    dom = Domain.range(0, 1)
    u = Domain.of([0])
    return InputSpace(Variable("g", dom, Distribution.from_pmf(dom, {0: "1/50", 1: "49/50"})),
                      (Variable("u", u, Distribution.uniform(u)),))


def test_naive_metric_cannot_tell_the_example_tables_apart():
    space = two_tables_space()
    half = {0: Fraction(1, 2), 1: Fraction(1, 2)}
    fair = ConditionalOutcomeTable.from_cpt(space, {(0, 0): half, (1, 0): half})
    skew = ConditionalOutcomeTable.from_cpt(space, {(0, 0): {0: 1}, (1, 0): half})
    assert conditional_vulnerability(fair, space).exact == Fraction(49, 50)
    assert conditional_vulnerability(skew, space).exact == Fraction(49, 50)
    assert fairness_spread(fair, space).exact == 0
    assert fairness_spread(skew, space).exact == Fraction(1, 2)


@pytest.mark.parametrize("t", range(0, 11))
def test_credit_sweep(t):
    space = load_config("credit.json").space
    assert fairness_spread(vp("credit", space, {"T": t}), space).exact == Fraction(min(2 * t, 20 - 2 * t), 10)


@pytest.mark.parametrize("name", ["c1", "c2", "c3", "c3_group8"])
def test_spread_independent_of_group_distribution(name):
    program = vp(name)
    base = fairness_spread(program, SCORES).exact
    dom = SCORES.protected.domain
    for weights in ([1] * 10, list(range(1, 11)), [1, 5, 1, 5, 1, 5, 1, 5, 1, 20]):
        total = sum(weights)
        dist = Distribution.from_pmf(dom, {g: Fraction(w, total) for g, w in zip(dom, weights)})
        assert fairness_spread(program, SCORES.with_protected_dist(dist)).exact == base


def test_zero_mass_group_is_refused():
    dom = SCORES.protected.domain
    dist = Distribution.from_pmf(dom, {g: Fraction(1, 9) for g in range(1, 10)})
    with pytest.raises(ZeroMassGroup):
        fairness_spread(vp("c1"), SCORES.with_protected_dist(dist))


def test_non_binary_outcome_is_refused():
    space = load_config("salary.json").space
    with pytest.raises(NonBinaryOutcome):
        fairness_spread(vp("salary_cumulative", space), space)
    # vulnerability is still defined
    assert conditional_vulnerability(vp("salary_count", space), space).exact == Fraction(1, 2)


def test_spread_per_u_terms():
    s = fairness_spread(vp("c3"), SCORES)
    spread = {u: x for u, x in s.per_u}
    assert spread[(6,)] == spread[(7,)] == 1
    assert all(spread[(k,)] == 0 for k in (1, 2, 3, 4, 5, 8, 9, 10))


def test_rendering():
    assert render_decimal(Fraction(112, 490), 2) == "0.23"
    assert render_decimal(Fraction(131, 490), 2) == "0.27"
    assert render_decimal(Fraction(67, 350), 2) == "0.19"
    assert render_decimal(Fraction(1, 8), 2) == "0.12"
    assert render_decimal(Fraction(-1, 3)) == "-0.333333"


def test_favorable_outcome_flip():
    space = uniform_space(("g", 0, 1), ("u", 0, 1))
    program = typecheck(parse_program("program p(g, u) { return g == u; }"), space)
    assert fairness_spread(program, space, favorable=0).exact == fairness_spread(program, space).exact == 1
