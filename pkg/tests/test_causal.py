from fractions import Fraction

import pytest

from fairflow.causal import (PathSpec, check_counterfactual_fairness, compose, compose_intervened,
                             load_model, parse_model, path_specific_spread, prob_deviating_counterfactual,
                             spread_over_background, spread_over_background_inlined)
from fairflow.config import corpus_dir
from fairflow.dsl import load_program, parse_program
from fairflow.errors import (DomainMismatch, DslSyntaxError, ExposureMismatch, ModelError,
                             NonBinaryOutcome, ProtectedVariableClamped)
from fairflow.quantitative import render_decimal
from fairflow.spaces import Distribution, Domain


@pytest.fixture(scope="module")
def zipcode():
    return load_model(corpus_dir() / "zipcode.scm")


@pytest.fixture(scope="module")
def insurance():
    return load_model(corpus_dir() / "insurance.scm")


def prog(name):
    return load_program(corpus_dir() / f"{name}.dp")


def brute_spread(program, model, clamp=()):
    """Independent oracle: plain loops over B with the equations written out by hand."""
    total = Fraction(0)
    for b1 in range(10):
        for b2 in range(10):
            for b3 in range(-1, 6):
                for b4 in range(-3, 4):
                    outs = set()
                    for g in range(10):
                        zip_factual = b3 if b1 >= 6 else b4
                        zip_code = zip_factual if "zipCode" in clamp else (b3 if g >= 6 else b4)
                        outs.add(program(g, b2 + zip_code))
                    total += Fraction(len(outs) - 1, 4900)
    return total


def test_model_structure(zipcode):
    assert zipcode.b_names == ["B1", "B2", "B3", "B4"]
    assert zipcode.groups == tuple(range(10))
    assert zipcode.b_size() == 4900


def test_compose_by_hand(zipcode):
    composed = compose(prog("c2"), zipcode)
    assert zipcode.solve((7, 5, 3, 0))["score"] == 8
    assert composed((7, 5, 3, 0)) == 1


def test_intervention_takes_the_other_branch(zipcode):
    values = zipcode.solve((3, 5, 4, -2), {"group": 6})
    assert values["zipCode"] == 4
    assert zipcode.solve((3, 5, 4, -2))["zipCode"] == -2


def test_null_intervention_matches_factual(zipcode):
    c3 = prog("c3")
    factual = compose(c3, zipcode)
    for b, _ in zipcode.background_points():
        g = zipcode.solve(b)["group"]
        assert compose_intervened(c3, zipcode, g)(b) == factual(b)


def test_identity_model():
    model = parse_model("bg g : [0,1] ~ uniform\nbg u : [0,3] ~ uniform\nprotected g")
    program = parse_program("program p(g, u) { return u > g; }")
    composed = compose(program, model)
    for g in range(2):
        for u in range(4):
            assert composed((g, u)) == int(u > g)


def test_insurance_fixed_point(insurance):
    values = insurance.solve((1, 70))
    assert values["engine"] == 860   # 8.6 in real units
    assert values["accident"] == 1400  # 14 > 12
    a = insurance.solve((0, 50), {"gender": 0})["engine"]
    b = insurance.solve((0, 50), {"gender": 1})["engine"]
    assert b - a == 300


@pytest.mark.parametrize("name,expected,rendered", [("c2", Fraction(131, 490), "0.27"),
                                                    ("c3", Fraction(112, 490), "0.23")])
def test_zipcode_spreads(zipcode, name, expected, rendered):
    program = prog(name)
    s = spread_over_background(program, zipcode)
    assert s.exact == expected
    assert render_decimal(s.exact, 2) == rendered
    assert spread_over_background_inlined(program, zipcode, backend="direct").exact == expected


def test_zipcode_oracle(zipcode):
    def c3(group, score):
        return int(score >= 8) if group >= 6 else int(score >= 6)

    assert brute_spread(c3, zipcode) == Fraction(112, 490)
    assert brute_spread(c3, zipcode, clamp=("zipCode",)) == Fraction(67, 350)


@pytest.mark.parametrize("name,expected", [("c2", Fraction(0)), ("c3", Fraction(67, 350))])
def test_path_specific(zipcode, name, expected):
    s = path_specific_spread(prog(name), zipcode, PathSpec(["zipCode"]))
    assert s.exact == expected
    assert spread_over_background_inlined(prog(name), zipcode, PathSpec(["zipCode"]), "direct").exact == expected


def test_path_specific_goldens_render(zipcode):
    assert render_decimal(path_specific_spread(prog("c3"), zipcode, PathSpec(["zipCode"])).exact, 2) == "0.19"


def test_empty_path_set_is_plain_spread(zipcode):
    for name in ("c2", "c3"):
        assert path_specific_spread(prog(name), zipcode, PathSpec()).exact == \
            spread_over_background(prog(name), zipcode).exact


def test_clamping_the_protected_variable_is_refused(zipcode):
    with pytest.raises(ProtectedVariableClamped):
        path_specific_spread(prog("c3"), zipcode, PathSpec(["group"]))
    with pytest.raises(ModelError):
        path_specific_spread(prog("c3"), zipcode, PathSpec(["nowhere"]))


def test_insurance(insurance):
    engine, fair = prog("insurance_engine"), prog("insurance_fair")
    s = spread_over_background(engine, insurance).exact
    assert s == Fraction(37, 101)
    assert abs(s - Fraction(36, 100)) <= Fraction(2, 100)
    assert spread_over_background(fair, insurance).exact == 0
    assert check_counterfactual_fairness(fair, insurance).holds
    # dual route: inline the composition and count
    assert spread_over_background_inlined(engine, insurance, backend="counting").exact == s


def test_counterfactual_witness(zipcode):
    verdict = check_counterfactual_fairness(prog("c2"), zipcode)
    assert not verdict.holds
    w = verdict.witness
    b = tuple(w.b[n] for n in zipcode.b_names)
    assert compose_intervened(prog("c2"), zipcode, w.g1)(b) == w.d1
    assert compose_intervened(prog("c2"), zipcode, w.g2)(b) == w.d2 != w.d1


def test_fairness_and_zero_spread_coincide(zipcode, insurance):
    for model, names in ((zipcode, ("c1", "c2", "c3")), (insurance, ("insurance_engine", "insurance_fair"))):
        for name in names:
            holds = check_counterfactual_fairness(prog(name), model).holds
            assert holds == (spread_over_background(prog(name), model).exact == 0)


def test_deviation_probability_bound(zipcode, insurance):
    for name in ("c1", "c2", "c3"):
        diff = prob_deviating_counterfactual(prog(name), zipcode).exact
        assert 0 < diff <= spread_over_background(prog(name), zipcode).exact
    for name in ("insurance_engine", "insurance_fair"):
        assert prob_deviating_counterfactual(prog(name), insurance).exact == \
            spread_over_background(prog(name), insurance).exact


def test_deviation_per_b_ignores_group_marginal(zipcode):
    # B1 only feeds the protected variable; reweighting it changes nothing per b
    skewed = zipcode.with_background("B1", Distribution.from_pmf(Domain.range(0, 9), {0: "1/2", 9: "1/2"}))
    c3 = prog("c3")
    per_b = {b: s for b, s in spread_over_background(c3, zipcode).per_u}
    for b, s in spread_over_background(c3, skewed).per_u:
        assert per_b[b] == s


def test_constant_decision(zipcode):
    const = parse_program("program k(score) { return 1; }")
    assert prob_deviating_counterfactual(const, zipcode).exact == 0
    assert check_counterfactual_fairness(const, zipcode).holds


def test_exposure_mismatch(zipcode):
    with pytest.raises(ExposureMismatch):
        compose(parse_program("program p(salary) { return salary > 3; }"), zipcode)


def test_intervention_outside_domain(zipcode):
    with pytest.raises(DomainMismatch):
        compose_intervened(prog("c3"), zipcode, 12)


def test_non_binary_decision(zipcode):
    with pytest.raises(NonBinaryOutcome):
        spread_over_background(parse_program("program p(score) { return score; }"), zipcode)


@pytest.mark.parametrize("src", [
    "bg B : [0,1] ~ uniform\nlet x = y\nprotected x",
    "bg B : [0,1] ~ uniform\nlet x = B\nlet x = B\nprotected x",
    "bg B : [0,1] ~ uniform\nlet x = B\nprotected z",
])
def test_malformed_models(src):
    with pytest.raises(ModelError):
        parse_model(src)


def test_model_syntax_errors():
    with pytest.raises(DslSyntaxError):
        parse_model("bg B : [0,1] ~ normal\nprotected B")
    with pytest.raises(DslSyntaxError):
        parse_model("bg B : [0,1] ~ uniform")


def test_pmf_backgrounds_and_declared_domain():
    model = parse_model("""
        bg B : {0,1} ~ pmf {0: 3/10, 1: 0.7};
        let g = B;
        let d = 1 - g;
        protected g : [0,2]
    """)
    assert model.groups == (0, 1, 2)
    assert model.background[0].dist.prob(1) == Fraction(7, 10)
