"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed even when output capture is on.
"""

import random
from fractions import Fraction

import pytest

from fairflow.causal import (PathSpec, load_model, path_specific_spread, prob_deviating_counterfactual,
                             check_counterfactual_fairness, spread_over_background,
                             spread_over_background_inlined)
from fairflow.config import corpus_dir, load_config
from fairflow.dsl import evaluate, load_program, typecheck
from fairflow.engine import cross_check, enumeration_pairs
from fairflow.qualitative import (check_conditional_if, check_restricted_if, check_unconditional_ni,
                                  conditional_demographic_parity)
from fairflow.quantitative import (ConditionalOutcomeTable, conditional_vulnerability, fairness_spread,
                                   fairness_spread_via_vulnerability, render_decimal,
                                   vulnerability_by_counting)
from fairflow.spaces import Distribution, Domain, InputSpace, Variable
from fairflow.wrapper import wrap_nonuniform

from progen import corpus_crosscheck, corpus_differential, differential

SAMPLES = 10_000
SCORES_PROGRAMS = ("c1", "c2", "c3", "c3_group8", "c3_restriction", "c3_declass", "c3_not_declass")


@pytest.fixture
def verdict(capsys):
    """Print one summary line for the criterion, then fail if it did not hold."""
    def record(number, title, check):
        try:
            detail = check()
            error = None
        except Exception as exc:  # any failure, including oracle mismatches
            detail, error = f"{type(exc).__name__}: {exc}", exc
        with capsys.disabled():
            print(f"\n{'PASS' if error is None else 'FAIL'} criterion {number}: {title} ({detail})")
        if error is not None:
            raise error
    return record


def program(name, space, constants=None):
    return typecheck(load_program(corpus_dir() / f"{name}.dp", constants), space)


def corpus_instances():
    """Every binary-output corpus program together with its input space."""
    scores = load_config("scores.json").space
    out = [(name, program(name, scores), scores) for name in SCORES_PROGRAMS]
    parity_demo = load_config("parity_demo.json").space
    out.append(("parity_without_ni", program("parity_without_ni", parity_demo), parity_demo))
    pw = load_config("password.json").space
    out.append(("password", program("password", pw), pw))
    credit = load_config("credit.json")
    out.append(("credit", program("credit", credit.space, credit.constants), credit.space))
    corr = load_config("flow_without_parity.json").space
    for name in ("flow_without_parity", "flow_without_parity_r", "flow_without_parity_class0"):
        out.append((name, program(name, corr), corr))
    salary = load_config("salary.json").space
    for name in ("salary_flat", "salary_any"):
        out.append((name, program(name, salary), salary))
    return [(n, vp, s) for n, vp, s in out if set(vp.output_domain) <= {0, 1}]


def causal_instances():
    zipcode = load_model(corpus_dir() / "zipcode.scm")
    insurance = load_model(corpus_dir() / "insurance.scm")
    out = [(name, load_program(corpus_dir() / f"{name}.dp"), zipcode) for name in ("c1", "c2", "c3")]
    out += [(name, load_program(corpus_dir() / f"{name}.dp"), insurance)
            for name in ("insurance_engine", "insurance_fair")]
    return out


def test_criterion_01_scores(verdict):
    def check():
        space = load_config("scores.json").space
        expected = {"c1": (20, Fraction(1, 5), 1), "c2": (10, Fraction(1, 10), 0),
                    "c3": (12, Fraction(3, 25), Fraction(1, 5))}
        for name, row in expected.items():
            vp = program(name, space)
            result = cross_check(vp, space)
            assert result["enumeration_count"] == result["counting_count"]
            got = (result["counting_count"], vulnerability_by_counting(vp, space).exact,
                   fairness_spread(vp, space).exact)
            assert got == row, (name, got)
        cfg = load_config("scores_skewed.json")
        vp = program("c3", cfg.space)
        wrapped = wrap_nonuniform(vp, cfg.space, cfg.wrap_size)
        result = cross_check(wrapped.program, wrapped.space)
        assert result["enumeration_count"] == result["counting_count"] == 130
        assert wrapped.space.u_size() == 100
        assert vulnerability_by_counting(wrapped.program, wrapped.space).exact == Fraction(13, 100)
        assert fairness_spread(vp, cfg.space).exact == Fraction(3, 10)
        return "c1 20/1/5/1, c2 10/1/10/0, c3 12/3/25/1/5, non-uniform 130/13/100/3/10"
    verdict(1, "scores counts, V and S on both backends", check)


def test_criterion_02_spread_is_scaled_vulnerability(verdict):
    def check():
        n = 0
        for name, vp, space in corpus_instances():
            s = fairness_spread(vp, space).exact
            for backend in ("enumeration", "counting"):
                assert fairness_spread_via_vulnerability(vp, space, backend).exact == s, (name, backend)
            n += 1
        cfg = load_config("scores_skewed.json")
        vp = program("c3", cfg.space)
        assert fairness_spread_via_vulnerability(vp, cfg.space, "counting", wrap_size=cfg.wrap_size).exact \
            == fairness_spread(vp, cfg.space).exact
        n += 1
        for name, p, model in causal_instances():
            direct = spread_over_background(p, model).exact
            assert spread_over_background_inlined(p, model, backend="enumeration").exact == direct, name
            n += 1
        random_set = corpus_crosscheck()
        assert len(random_set) == 200
        for vp, space, result in random_set:
            groups = len(space.groups)
            v = Fraction(result["counting_count"], space.u_size() * groups)
            assert fairness_spread(vp, space).exact == groups * v - 1, vp.name
        return f"{n} corpus instances and {len(random_set)} random programs"
    verdict(2, "S = |G|V - 1 under uniform G", check)


def test_criterion_03_group_distribution_irrelevant(verdict):
    def check():
        n = 0
        for name, vp, space in corpus_instances():
            base = fairness_spread(vp, space).exact
            dom = space.protected.domain
            k = len(dom)
            for weights in ([1] * k, list(range(1, k + 1)), [1 + 5 * (i % 2) for i in range(k)], [2 ** i for i in range(k)]):
                total = sum(weights)
                dist = Distribution.from_pmf(dom, {g: Fraction(w, total) for g, w in zip(dom, weights)})
                assert fairness_spread(vp, space.with_protected_dist(dist)).exact == base, name
            n += 1
        return f"{n} programs, 4 group distributions each"
    verdict(3, "S independent of the group distribution", check)


def test_criterion_04_causal_goldens(verdict):
    def check():
        model = load_model(corpus_dir() / "zipcode.scm")
        got = {}
        for name, exact, shown in (("c3", Fraction(112, 490), "0.23"), ("c2", Fraction(131, 490), "0.27")):
            s = spread_over_background(load_program(corpus_dir() / f"{name}.dp"), model).exact
            assert s == exact and render_decimal(s, 2) == shown, (name, s)
            got[name] = f"{s} ~ {render_decimal(s, 2)}"
        return f"c3 {got['c3']}, c2 {got['c2']}"
    verdict(4, "spread over the background model", check)


def test_criterion_05_path_specific(verdict):
    def check():
        model = load_model(corpus_dir() / "zipcode.scm")
        paths = PathSpec(["zipCode"])
        c2 = path_specific_spread(load_program(corpus_dir() / "c2.dp"), model, paths).exact
        c3 = path_specific_spread(load_program(corpus_dir() / "c3.dp"), model, paths).exact
        assert c2 == 0
        assert c3 == Fraction(67, 350) and render_decimal(c3, 2) == "0.19"
        return f"c2 0, c3 {c3} ~ {render_decimal(c3, 2)}"
    verdict(5, "path-specific spread with zipCode clamped", check)


def test_criterion_06_insurance(verdict):
    def check():
        model = load_model(corpus_dir() / "insurance.scm")
        fair = load_program(corpus_dir() / "insurance_fair.dp")
        engine = load_program(corpus_dir() / "insurance_engine.dp")
        assert spread_over_background(fair, model).exact == 0
        assert check_counterfactual_fairness(fair, model).holds
        s = spread_over_background(engine, model).exact
        assert abs(s - Fraction(36, 100)) <= Fraction(2, 100)
        assert s == Fraction(37, 101)
        return f"fair 0, engine-only {s} ~ {render_decimal(s, 4)} within 0.36 +/- 0.02"
    verdict(6, "insurance classifiers", check)


def test_criterion_07_deviation_bound(verdict):
    def check():
        parts = []
        for name, p, model in causal_instances():
            diff = prob_deviating_counterfactual(p, model).exact
            s = spread_over_background(p, model).exact
            assert diff <= s, name
            if len(model.groups) == 2:
                assert diff == s, name
            parts.append(f"{name} {diff}<={s}")
        return ", ".join(parts)
    verdict(7, "Pr[Diff] <= S, equal when |G| = 2", check)


def test_criterion_08_password(verdict):
    def check():
        space = load_config("password.json").space
        secret = space.protected.domain
        guess = space.unprotected[0].domain
        cpt = {(g, u): {int(g == u): Fraction(1)} for g in secret for u in guess}
        v = conditional_vulnerability(ConditionalOutcomeTable.from_cpt(space, cpt), space).exact
        assert v == Fraction(2, 3)
        assert conditional_vulnerability(program("password", space), space).exact == v
        return f"V = {v}"
    verdict(8, "password checker vulnerability", check)


def test_criterion_09_example_tables(verdict):
    def check():
        dom = Domain.range(0, 1)
        u = Domain.of([0])
        space = InputSpace(Variable("g", dom, Distribution.from_pmf(dom, {0: "1/50", 1: "49/50"})),
                           (Variable("u", u, Distribution.uniform(u)),))
        half = {0: Fraction(1, 2), 1: Fraction(1, 2)}
        fair = ConditionalOutcomeTable.from_cpt(space, {(0, 0): half, (1, 0): half})
        skew = ConditionalOutcomeTable.from_cpt(space, {(0, 0): {0: 1}, (1, 0): half})
        v = (conditional_vulnerability(fair, space).exact, conditional_vulnerability(skew, space).exact)
        s = (fairness_spread(fair, space).exact, fairness_spread(skew, space).exact)
        assert v == (Fraction(49, 50), Fraction(49, 50)) and s[0] != s[1]
        return f"V {v[0]} for both, S {s[0]} vs {s[1]}"
    verdict(9, "equal vulnerability, different spread", check)


def test_criterion_10_flow_without_parity(verdict):
    def check():
        cfg = load_config("flow_without_parity.json")
        space = cfg.space
        p = typecheck(cfg.load_program(), space)
        r = typecheck(cfg.load_program("restriction"), space)
        cond = typecheck(cfg.load_program("condition"), space)
        assert check_restricted_if(p, r, space).holds
        table, parity = conditional_demographic_parity(p, cond, space)
        assert not parity.holds
        rates = (table.rows[0][1], table.rows[1][1])
        assert rates == (1, 0)
        return f"restricted flow holds, acceptance {rates[0]} vs {rates[1]} in class R=0"
    verdict(10, "restricted flow without conditional parity", check)


def test_criterion_11_credit_sweep(verdict):
    def check():
        cfg = load_config("credit.json")
        sweep = {}
        for t in range(11):
            vp = program("credit", cfg.space, {"T": t})
            brute = Fraction(sum(abs(vp.call({"gender": 0, "amount": a}) - vp.call({"gender": 1, "amount": a}))
                                 for a in range(1, 11)), 10)
            sweep[t] = fairness_spread(vp, cfg.space).exact
            assert sweep[t] == brute == Fraction(min(2 * t, 20 - 2 * t), 10), t
        assert (sweep[0], sweep[5], sweep[10]) == (0, 1, 0)
        assert max(sweep, key=sweep.get) == 5
        return "S(T) = " + " ".join(str(sweep[t]) for t in range(11))
    verdict(11, "credit threshold sweep", check)


def test_criterion_12_qualitative(verdict):
    def check():
        space = load_config("scores.json").space
        for name, holds in (("c1", False), ("c2", True), ("c3", False)):
            vp = program(name, space)
            for backend in ("enumeration", "counting"):
                v = check_unconditional_ni(vp, space, backend=backend)
                assert v.holds is holds, (name, backend)
                if not holds:
                    w = v.witness
                    d1 = evaluate(vp, {space.protected.name: w.g1, **w.u})
                    d2 = evaluate(vp, {space.protected.name: w.g2, **w.u})
                    assert (d1, d2) == (w.d1, w.d2) and d1 != d2
        r, psi = program("c3_restriction", space), program("c3_declass", space)
        c3, g8 = program("c3", space), program("c3_group8", space)
        assert check_restricted_if(c3, r, space).holds
        assert check_conditional_if(c3, psi, space).holds
        assert not check_restricted_if(g8, r, space).holds
        assert check_conditional_if(g8, psi, space).holds
        return "NI c1 fails, c2 holds, c3 fails; c3 restricted+conditional hold; group>=8 restricted fails, conditional holds"
    verdict(12, "qualitative verdicts", check)


def test_criterion_13_backend_equivalence(verdict):
    def check():
        corpus = 0
        rng = random.Random(13)
        for name, vp, space in corpus_instances():
            result = cross_check(vp, space)
            assert result["enumeration_count"] == result["counting_count"] == len(enumeration_pairs(vp, space))
            assert not differential(vp, space, rng, SAMPLES), name
            corpus += 1
        random_set = corpus_crosscheck()
        mismatched = [vp.name for vp, _, r in random_set if r["enumeration_count"] != r["counting_count"]]
        assert not mismatched, mismatched
        diffs = corpus_differential(SAMPLES)
        bad = [(vp.name, m[:2]) for vp, m in diffs if m]
        assert not bad, bad
        return (f"{corpus} corpus and {len(random_set)} random count agreements, "
                f"{corpus + len(diffs)} programs x {SAMPLES} samples with 0 mismatches")
    verdict(13, "counting equals enumeration, circuit equals evaluator", check)
