from fractions import Fraction

import pytest

from fairflow.config import corpus_dir, load_config
from fairflow.dsl import evaluate, load_program, parse_program, typecheck
from fairflow.errors import DomainMismatch, ZeroMassCondition
from fairflow.qualitative import (PARITY_CAVEAT, check_conditional_if, check_restricted_if,
                                  check_unconditional_ni, conditional_demographic_parity,
                                  demographic_parity)
from fairflow.spaces import uniform_space

SCORES = uniform_space(("group", 0, 9), ("score", 1, 10))


def vp(name, space=SCORES):
    return typecheck(load_program(corpus_dir() / f"{name}.dp"), space)


def assert_witness_revalidates(program, verdict, space):
    w = verdict.witness
    a = {space.protected.name: w.g1, **w.u}
    b = {space.protected.name: w.g2, **w.u}
    assert evaluate(program, a) == w.d1
    assert evaluate(program, b) == w.d2
    assert w.d1 != w.d2


@pytest.mark.parametrize("name,holds", [("c1", False), ("c2", True), ("c3", False)])
def test_unconditional_noninterference(name, holds):
    program = vp(name)
    for backend in ("enumeration", "counting"):
        verdict = check_unconditional_ni(program, SCORES, backend=backend)
        assert verdict.holds is holds
        if not holds:
            assert_witness_revalidates(program, verdict, SCORES)


def test_first_witness_is_lexicographic():
    verdict = check_unconditional_ni(vp("c3"), SCORES)
    assert (verdict.witness.u, verdict.witness.g1, verdict.witness.g2) == ({"score": 6}, 0, 6)


def test_parallel_search_finds_the_same_witness():
    for name in ("c1", "c3"):
        assert check_unconditional_ni(vp(name), SCORES, jobs=4).witness == \
            check_unconditional_ni(vp(name), SCORES).witness


def test_c3_under_restriction_and_condition():
    r, psi = vp("c3_restriction"), vp("c3_declass")
    restricted = check_restricted_if(vp("c3"), r, SCORES)
    conditional = check_conditional_if(vp("c3"), psi, SCORES)
    assert restricted.holds and conditional.holds
    assert restricted.caveat == conditional.caveat == PARITY_CAVEAT


def test_group8_variant():
    r, psi = vp("c3_restriction"), vp("c3_declass")
    program = vp("c3_group8")
    restricted = check_restricted_if(program, r, SCORES)
    assert not restricted.holds
    assert_witness_revalidates(program, restricted, SCORES)
    w = restricted.witness
    assert r(w.g1, w.u["score"]) == r(w.g2, w.u["score"])
    assert check_conditional_if(program, psi, SCORES).holds


def test_restriction_must_read_the_same_inputs():
    other = typecheck(parse_program("program r(group) { return group > 4; }"), {"group": SCORES.protected.domain})
    with pytest.raises(DomainMismatch):
        check_restricted_if(vp("c3"), other, SCORES)


def test_demographic_parity_without_noninterference():
    space = load_config("parity_demo.json").space
    program = vp("parity_without_ni", space)
    table, verdict = demographic_parity(program, space)
    assert verdict.holds and table.max_gap == 0
    assert not check_unconditional_ni(program, space).holds


def test_parity_table_c1():
    table, verdict = demographic_parity(vp("c1"), SCORES)
    assert not verdict.holds
    assert table.rows[0][1] == 0 and table.rows[5][1] == 1
    assert table.max_gap == 1


def test_parity_tolerance():
    _, verdict = demographic_parity(vp("c3"), SCORES, tol=Fraction(1, 5))
    assert verdict.holds
    _, verdict = demographic_parity(vp("c3"), SCORES, tol=Fraction(1, 10))
    assert not verdict.holds


def test_flow_without_parity_counterexample():
    cfg = load_config("flow_without_parity.json")
    space = cfg.space
    program = typecheck(cfg.load_program(), space)
    r = typecheck(cfg.load_program("restriction"), space)
    cond = typecheck(cfg.load_program("condition"), space)
    assert check_restricted_if(program, r, space).holds
    table, verdict = conditional_demographic_parity(program, cond, space)
    assert not verdict.holds
    assert table.rows[0][1] == 1 and table.rows[1][1] == 0


def test_c3_conditional_parity_outside_declassification():
    # conditional information flow holds, yet parity on the non-declassified
    # population fails: group < 6 accepts 1/2, group >= 6 accepts 3/8
    table, verdict = conditional_demographic_parity(vp("c3"), vp("c3_not_declass"), SCORES)
    assert table.rows[0][1] == Fraction(1, 2)
    assert table.rows[9][1] == Fraction(3, 8)
    assert not verdict.holds


def test_empty_condition():
    never = typecheck(parse_program("program n(group, score) { return false; }"), SCORES)
    with pytest.raises(ZeroMassCondition):
        conditional_demographic_parity(vp("c3"), never, SCORES)
