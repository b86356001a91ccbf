"""Command-line interface.

Subcommands: ``check``, ``classify``, ``monitor``, ``simulate`` and
``revise-candidates``.  Every command can emit its report as JSON with
``--json``; reports carry the sha256 of each input file so runs are
diffable.  ``classify`` encodes its verdict in the exit code:
0 relaxation, 2 strengthening, 3 equivalent, 4 incomparable,
5 non-total model without ``--complete-selfloops``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from decimal import Decimal
from pathlib import Path as FsPath
from typing import Any, Optional

from . import __version__
from .dslio import (
    ParseError,
    SchemaError,
    parse_formula,
    parse_model,
    parse_norms,
    parse_path,
    parse_scenario,
    path_json,
    render_norms,
    render_runlog,
    verdict_json,
)
from .errors import NormsupError, NotTotal
from .model import Path, complete_total, sample_path, validate as validate_system
from .norms import MonitorMode, Tiebreak, describe_norm, lint_norms, run_trace
from .revision import (
    CandidatePool,
    EditDirection,
    Relation,
    classify_revision,
    generate_candidates,
    oracle_compare,
    syntactic_classify,
)
from .supervision import run_episode, supervise

_EXIT_BY_RELATION = {
    Relation.RELAXATION: 0,
    Relation.STRENGTHENING: 2,
    Relation.EQUIVALENT: 3,
    Relation.INCOMPARABLE: 4,
}

_TIEBREAKS = {t.value: t for t in Tiebreak}


@dataclass
class Report:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    body: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def add_input(self, path: str) -> None:
        digest = hashlib.sha256(FsPath(path).read_bytes()).hexdigest()
        self.inputs[path] = digest

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "inputs": self.inputs,
            "warnings": self.warnings,
            **self.body,
        }
        return json.dumps(doc, sort_keys=True, indent=2, default=str)

    def to_text(self) -> str:
        lines = [f"normsup {self.command}"]
        for path, digest in self.inputs.items():
            lines.append(f"  input {path} sha256={digest[:12]}...")
        for key, value in self.body.items():
            lines.append(_format_field(key, value))
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def _format_field(key: str, value: Any, indent: str = "  ") -> str:
    if isinstance(value, dict):
        inner = "\n".join(
            _format_field(k, v, indent + "  ") for k, v in value.items()
        )
        return f"{indent}{key}:\n{inner}" if inner else f"{indent}{key}: {{}}"
    if isinstance(value, list):
        if not value:
            return f"{indent}{key}: []"
        inner = "\n".join(f"{indent}  - {v}" for v in value)
        return f"{indent}{key}:\n{inner}"
    return f"{indent}{key}: {value}"


def _emit(report: Report, as_json: bool) -> None:
    print(report.to_json() if as_json else report.to_text())


def _read(path: str) -> str:
    return FsPath(path).read_text(encoding="utf-8")


def _load_model(path: str, selfloops: bool):
    system = parse_model(_read(path))
    defects = validate_system(system)
    if defects:
        raise SchemaError([(path, str(d)) for d in defects])
    if selfloops:
        system = complete_total(system)
    return system


def cmd_check(args) -> int:
    report = Report("check")
    report.add_input(args.model)
    report.add_input(args.norms)
    defects: list[str] = []
    system = None
    norms = None
    try:
        system = parse_model(_read(args.model))
        defects += [str(d) for d in validate_system(system)]
    except (ParseError, SchemaError) as exc:
        defects.append(f"{args.model}: {exc}")
    try:
        norms = parse_norms(_read(args.norms), file=args.norms)
    except ParseError as exc:
        defects.append(f"{args.norms}: {exc}")
    if norms is not None:
        vocab = system.atoms if system is not None else None
        for lint in lint_norms(norms, vocab):
            message = str(lint)
            if "outside the vocabulary" in message:
                defects.append(message)
            else:
                report.warnings.append(message)
        report.body["norms"] = [describe_norm(n) for n in norms]
    report.body["defects"] = defects
    report.body["ok"] = not defects
    _emit(report, args.json)
    return 0 if not defects else 1


def cmd_classify(args) -> int:
    report = Report("classify")
    report.add_input(args.model)
    report.add_input(args.before)
    report.add_input(args.after)
    tiebreak = _TIEBREAKS[args.tiebreak]
    try:
        system = _load_model(args.model, args.complete_selfloops)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    before = parse_norms(_read(args.before), file=args.before)
    after = parse_norms(_read(args.after), file=args.after)
    try:
        verdict = classify_revision(system, before, after, tiebreak)
    except NotTotal as exc:
        print(f"error: {exc} (rerun with --complete-selfloops)", file=sys.stderr)
        return 5
    report.body["verdict"] = verdict_json(verdict)
    if args.oracle:
        oracle = oracle_compare(system, before, after, tiebreak=tiebreak)
        report.body["oracle_relation"] = oracle.relation.value
        if oracle.relation is not verdict.relation:
            # A disagreement between the exact classifier and the
            # brute-force oracle is a bug; fail loudly.
            print(
                "error: classifier/oracle disagreement: "
                f"{verdict.relation.value} vs {oracle.relation.value}",
                file=sys.stderr,
            )
            return 1
    if args.syntactic:
        syntactic: dict[str, Any] = {}
        strictness_model = system if args.strictness == "model-relative" else None
        if before.ids() == after.ids():
            for n in before:
                sv = syntactic_classify(n, after.by_id(n.id), strictness_model)
                syntactic[n.id] = {
                    "direction": sv.direction.value,
                    "fired_cases": sorted(c.value for c in sv.fired_cases),
                    "deviation": sv.deviation,
                }
                if sv.deviation:
                    report.warnings.append(
                        f"{n.id}: obligation-deadline case applied with reversed polarity"
                    )
        else:
            syntactic["note"] = "norm ids differ; per-norm syntactic check skipped"
        report.body["syntactic"] = syntactic
    _emit(report, args.json)
    return _EXIT_BY_RELATION[verdict.relation]


def cmd_monitor(args) -> int:
    report = Report("monitor")
    report.add_input(args.model)
    report.add_input(args.norms)
    try:
        system = _load_model(args.model, args.complete_selfloops)
        norms = parse_norms(_read(args.norms), file=args.norms)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.path_file:
        report.add_input(args.path_file)
        try:
            path = parse_path(_read(args.path_file))
        except SchemaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    elif args.path:
        path = Path(tuple(args.path.split(",")))
    else:
        path = sample_path(system, args.length, args.seed)
    problems = path.check_in(system, from_init=not args.anywhere)
    if problems:
        print("error: path not accepted: " + "; ".join(problems), file=sys.stderr)
        return 1
    mode = MonitorMode.PATH if args.mode == "path" else MonitorMode.EVENT
    result = run_trace(norms, system, path, mode, _TIEBREAKS[args.tiebreak])
    report.body["path"] = path_json(path)
    report.body["mode"] = args.mode
    report.body["events"] = [
        {
            "step": e.step,
            "norm": e.norm_id,
            "kind": e.kind.value,
            "sanction": str(e.sanction),
        }
        for e in result.events
    ]
    report.body["final"] = {k: v.value for k, v in sorted(result.final.items())}
    report.body["ledger_total"] = str(result.ledger.total)
    _emit(report, args.json)
    return 0


def cmd_simulate(args) -> int:
    report = Report("simulate")
    report.add_input(args.scenario)
    try:
        scenario = parse_scenario(_read(args.scenario), file=args.scenario)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed_override is not None:
        scenario = replace(scenario, seed=args.seed_override)
    try:
        if args.supervise:
            result = supervise(scenario)
            log = result.log
            report.body["revisions"] = [
                {
                    "window": d.window_index,
                    "window_score": d.window_score,
                    "adopted": d.adopted is not None,
                    "relation": None
                    if d.verdict is None
                    else d.verdict.relation.value,
                    "sanction_change": None
                    if d.verdict is None
                    else d.verdict.sanction_change.value,
                }
                for d in result.decisions
            ]
        else:
            log = run_episode(scenario)
    except (ValueError, NormsupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report.body["scenario"] = scenario.id
    report.body["seed"] = scenario.seed
    report.body["objective_rates"] = {
        k: v for k, v in sorted(log.objective_rates.items())
    }
    report.body["ledger_total"] = str(log.ledger.total)
    report.body["violations"] = len(log.ledger.entries)
    report.body["deadlock_steps"] = log.deadlock_steps
    if args.out:
        text = render_runlog(log, norms_text=render_norms(scenario.norms))
        FsPath(args.out).write_text(text, encoding="utf-8")
        report.body["runlog"] = args.out
    _emit(report, args.json)
    return 0


def cmd_revise_candidates(args) -> int:
    report = Report("revise-candidates")
    report.add_input(args.norms)
    norms = parse_norms(_read(args.norms), file=args.norms)
    try:
        norm = norms.by_id(args.norm_id)
    except KeyError:
        print(f"error: no norm {args.norm_id} in {args.norms}", file=sys.stderr)
        return 1
    system = None
    if args.model:
        report.add_input(args.model)
        system = _load_model(args.model, args.complete_selfloops)
    pool = CandidatePool(
        tuple(parse_formula(f) for f in args.pool_formula),
        tuple(Decimal(s) for s in args.pool_sanction),
    )
    direction = EditDirection(args.direction)
    candidates = [
        describe_norm(c) for c in generate_candidates(norm, pool, direction, system)
    ]
    report.body["norm"] = describe_norm(norm)
    report.body["direction"] = direction.value
    report.body["candidates"] = candidates
    _emit(report, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normsup",
        description="Monitor conditional norms, classify revisions, and supervise runs.",
    )
    parser.add_argument("--version", action="version", version=f"normsup {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json", action="store_true", help="emit the report as JSON")

    p = sub.add_parser("check", help="validate a model and a norm file")
    common(p)
    p.add_argument("model")
    p.add_argument("norms")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="classify a revision of a norm set")
    common(p)
    p.add_argument("model")
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("--syntactic", action="store_true", help="also run the per-norm case checks")
    p.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    p.add_argument("--complete-selfloops", action="store_true", help="self-loop deadlock states first")
    p.add_argument("--tiebreak", choices=sorted(_TIEBREAKS), default=Tiebreak.TARGET_FIRST.value)
    p.add_argument(
        "--strictness",
        choices=["model-relative", "valid-only"],
        default="model-relative",
        help="formula ordering used by the per-norm case checks",
    )
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("monitor", help="run monitors over a path")
    common(p)
    p.add_argument("model")
    p.add_argument("norms")
    p.add_argument("--mode", choices=["path", "event"], default="event")
    p.add_argument("--path", help="comma-separated state ids")
    p.add_argument("--path-file", help="JSON path file ({stem, cycle})")
    p.add_argument("--length", type=int, default=10, help="sampled path length")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--anywhere", action="store_true", help="accept paths not starting at init")
    p.add_argument("--complete-selfloops", action="store_true")
    p.add_argument("--tiebreak", choices=sorted(_TIEBREAKS), default=Tiebreak.TARGET_FIRST.value)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("simulate", help="run a scenario episode")
    common(p)
    p.add_argument("scenario")
    p.add_argument("--supervise", action="store_true", help="enable the norm-update loop")
    p.add_argument("--out", help="write the run log (JSONL) here")
    p.add_argument("--seed-override", type=int, help="replace the scenario seed (experiments)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("revise-candidates", help="enumerate single-edit revision candidates")
    common(p)
    p.add_argument("norms")
    p.add_argument("norm_id")
    p.add_argument("--direction", choices=[d.value for d in EditDirection], required=True)
    p.add_argument("--model", help="model for model-relative strictness")
    p.add_argument("--pool-formula", action="append", default=[], help="candidate formula (repeatable)")
    p.add_argument("--pool-sanction", action="append", default=[], help="candidate sanction (repeatable)")
    p.add_argument("--complete-selfloops", action="store_true")
    p.set_defaults(func=cmd_revise_candidates)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NormsupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
