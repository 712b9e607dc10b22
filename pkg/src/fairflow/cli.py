"""Command-line entry point.

Exit codes: 0 property holds / metric computed, 1 property violated,
2 usage or configuration error, 3 the two backends disagree.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .causal import (PathSpec, check_counterfactual_fairness, inline_composition, path_specific_spread,
                     prob_deviating_counterfactual, spread_over_background)
from .config import AnalysisConfig, load_config, resolve
from .dsl import typecheck
from .engine import count_program, cross_check
from .errors import BackendMismatch, ConfigError, FairflowError
from .qualitative import (check_conditional_if, check_restricted_if, check_unconditional_ni,
                          conditional_demographic_parity, demographic_parity)
from .quantitative import (conditional_vulnerability, fairness_spread,
                           fairness_spread_via_vulnerability, vulnerability_by_counting)
from .report import Report, metric_json
from .reproduce import run_goldens
from .spaces import parse_probability
from .wrapper import wrap_nonuniform

EXIT_OK, EXIT_VIOLATED, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2, 3

COMMANDS = ("check-ni", "check-restricted", "check-conditional", "parity", "vulnerability",
            "spread", "counterfactual", "path-specific", "crosscheck", "reproduce")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairflow", description="Fairness as information flow.")
    parser.add_argument("--version", action="version", version=f"fairflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--format", choices=("text", "json"), default="text")
        cmd.add_argument("--no-timings", action="store_true", help="omit wall-clock timings")
        if name == "reproduce":
            continue
        cmd.add_argument("--space", "--config", dest="space", metavar="JSON",
                         help="analysis config with the input space (and optionally other files)")
        cmd.add_argument("--program", help="decision program (.dp)")
        cmd.add_argument("--model", help="causal model (.scm)")
        cmd.add_argument("--restriction", help="restricted classification program")
        cmd.add_argument("--condition", help="declassification / conditioning program")
        cmd.add_argument("--paths", help="comma-separated variables held at factual values")
        cmd.add_argument("--backend", choices=("enum", "count", "both"), default="enum")
        cmd.add_argument("--favorable", type=int, default=None)
        cmd.add_argument("--tol", default="0", help="parity tolerance, e.g. 1/100")
        cmd.add_argument("--jobs", type=int, default=1)
        cmd.add_argument("--emit-cnf", metavar="PATH", help="write the DIMACS formula (crosscheck)")
        cmd.add_argument("--const", action="append", default=[], metavar="NAME=VALUE",
                         help="override a program constant")
    return parser


def _config(args) -> AnalysisConfig:
    cfg = load_config(args.space) if args.space else AnalysisConfig()
    for key in ("program", "model", "restriction", "condition"):
        value = getattr(args, key)
        if value:
            setattr(cfg, key, resolve(value))
    if args.paths is not None:
        cfg.paths = PathSpec(p.strip() for p in args.paths.split(",") if p.strip())
    for item in args.const:
        name, sep, value = item.partition("=")
        try:
            cfg.constants[name.strip()] = int(value)
        except ValueError:
            sep = ""
        if not sep:
            raise ConfigError(f"--const expects NAME=INTEGER, got {item!r}")
    if args.favorable is not None:
        cfg.favorable = args.favorable
    cfg.validate()
    return cfg


def _backends(flag: str) -> list[str]:
    return {"enum": ["enumeration"], "count": ["counting"], "both": ["enumeration", "counting"]}[flag]


def _agree(values: dict, what: str) -> None:
    distinct = {v.exact for v in values.values()}
    if len(distinct) > 1:
        raise BackendMismatch(f"{what}: backends disagree {values}", -1, -1, None)


def _run(args, report: Report) -> int:
    cfg = _config(args)
    cmd = args.command
    started = time.perf_counter()

    if cmd in ("counterfactual", "path-specific") or (cmd in ("spread", "crosscheck") and cfg.model):
        return _run_causal(args, cfg, report, started)

    space = cfg.require_space()
    vp = typecheck(cfg.load_program(), space)

    if cmd == "check-ni":
        backend = "counting" if args.backend in ("count", "both") else "enumeration"
        verdict = check_unconditional_ni(vp, space, args.jobs, backend)
        report.add("noninterference", verdict.as_dict())
        status = EXIT_OK if verdict.holds else EXIT_VIOLATED
    elif cmd == "check-restricted":
        r = typecheck(cfg.load_program("restriction"), space)
        verdict = check_restricted_if(vp, r, space, args.jobs)
        report.add("restrictedInformationFlow", verdict.as_dict())
        status = EXIT_OK if verdict.holds else EXIT_VIOLATED
    elif cmd == "check-conditional":
        psi = typecheck(cfg.load_program("condition"), space)
        verdict = check_conditional_if(vp, psi, space, args.jobs)
        report.add("conditionalInformationFlow", verdict.as_dict())
        status = EXIT_OK if verdict.holds else EXIT_VIOLATED
    elif cmd == "parity":
        tol = parse_probability(args.tol)
        if cfg.condition:
            cond = typecheck(cfg.load_program("condition"), space)
            table, verdict = conditional_demographic_parity(vp, cond, space, tol)
        else:
            table, verdict = demographic_parity(vp, space, tol)
        report.add("parityTable", table.as_dict())
        report.add("parity", verdict.as_dict())
        status = EXIT_OK if verdict.holds else EXIT_VIOLATED
    elif cmd == "vulnerability":
        values = {}
        for backend in _backends(args.backend):
            if backend == "enumeration":
                values[backend] = conditional_vulnerability(vp, space)
            elif all(v.dist.is_uniform for v in space.unprotected):
                values[backend] = vulnerability_by_counting(vp, space)
            else:
                wrapped = wrap_nonuniform(vp, space, cfg.wrap_size)
                values[backend] = vulnerability_by_counting(wrapped.program, wrapped.space)
        _agree(values, "vulnerability")
        for backend, v in values.items():
            report.add(f"V[{backend}]" if len(values) > 1 else "V", metric_json(v))
        status = EXIT_OK
    elif cmd == "spread":
        s = fairness_spread(vp, space, cfg.favorable)
        report.add("S", metric_json(s, space.u_names, per_u=True))
        for backend in _backends(args.backend):
            via = fairness_spread_via_vulnerability(vp, space, backend, cfg.favorable, cfg.wrap_size)
            _agree({"spread": s, backend: via}, "spread")
            report.add(f"S[|G|V-1, {backend}]", metric_json(via))
        status = EXIT_OK
    elif cmd == "crosscheck":
        status = _crosscheck(vp, space, args, report, cfg)
    else:
        raise ConfigError(f"{cmd} is not applicable here")
    report.time("analysis_s", time.perf_counter() - started)
    return status


def _crosscheck(vp, space, args, report: Report, cfg: AnalysisConfig) -> int:
    if not all(v.dist.is_uniform for v in space.unprotected):
        wrapped = wrap_nonuniform(vp, space, cfg.wrap_size)
        vp, space = wrapped.program, wrapped.space
    result = cross_check(vp, space, jobs=args.jobs)
    timings = result.pop("timings")
    for key, secs in timings.items():
        report.time(key, secs)
    report.add("crosscheck", result)
    if args.emit_cnf:
        run = count_program(vp, space)
        Path(args.emit_cnf).write_text(run.formula.to_dimacs(), encoding="utf-8")
    return EXIT_OK


def _run_causal(args, cfg: AnalysisConfig, report: Report, started: float) -> int:
    model = cfg.load_model()
    program = cfg.load_program()
    fav = cfg.favorable
    cmd = args.command
    status = EXIT_OK
    if cmd == "path-specific":
        paths = cfg.paths or PathSpec()
        spread = path_specific_spread(program, model, paths, fav)
        verdict = check_counterfactual_fairness(program, model, paths, fav)
        report.add("pathSpecificFairness", verdict.as_dict())
        report.add("S", metric_json(spread, model.b_names, per_u=False))
        status = EXIT_OK if verdict.holds else EXIT_VIOLATED
        extra_paths = paths
    elif cmd == "crosscheck":
        vp, space = inline_composition(program, model, cfg.paths)
        return _crosscheck(vp, space, args, report, cfg)
    else:
        spread = spread_over_background(program, model, fav)
        report.add("S", metric_json(spread, model.b_names, per_u=False))
        if cmd == "counterfactual":
            verdict = check_counterfactual_fairness(program, model, None, fav)
            report.add("counterfactualFairness", verdict.as_dict())
            report.add("PrDiff", metric_json(prob_deviating_counterfactual(program, model, fav)))
            status = EXIT_OK if verdict.holds else EXIT_VIOLATED
        extra_paths = None
    if args.backend in ("count", "both"):
        vp, space = inline_composition(program, model, extra_paths)
        via = fairness_spread_via_vulnerability(vp, space, "counting", fav, cfg.wrap_size)
        _agree({"enumeration": spread, "counting": via}, "causal spread")
        report.add("S[|G|V-1, counting]", metric_json(via))
    report.time("analysis_s", time.perf_counter() - started)
    return status


def _reproduce(report: Report) -> int:
    outcomes = run_goldens()
    report.add("goldens", [{"golden": o.name, "status": "PASS" if o.passed else "FAIL",
                            "got": o.got, "expected": o.expected} for o in outcomes])
    for o in outcomes:
        report.time(o.name, o.seconds)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VIOLATED


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = Report(args.command, {}, timings=not args.no_timings)
    try:
        if args.command == "reproduce":
            status = _reproduce(report)
        else:
            status = _run(args, report)
            report.data["config"] = _config(args).echo()
    except BackendMismatch as exc:
        print(f"fairflow: backend mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (FairflowError, OSError) as exc:
        print(f"fairflow: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = report.to_json() if args.format == "json" else report.to_text()
    sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
