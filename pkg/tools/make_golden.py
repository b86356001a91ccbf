"""Regenerate the golden files under tests/golden/.

Run from the repository root after any intentional behavior change:
    python tools/make_golden.py
"""

from __future__ import annotations

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from normsup.datafiles import data_text
from normsup.dslio import (
    parse_model,
    parse_norms,
    parse_scenario,
    render_norms,
    render_runlog,
    verdict_json,
)
from normsup.revision import classify_revision, compare_sanctions, syntactic_classify
from normsup.supervision import supervise

GOLDEN = ROOT / "tests" / "golden"


def classification_golden(model_name: str, before_name: str, after_name: str) -> dict:
    system = parse_model(data_text(f"{model_name}.ts.json"))
    before = parse_norms(data_text(f"{before_name}.norm"))
    after = parse_norms(data_text(f"{after_name}.norm"))
    verdict = classify_revision(system, before, after)
    doc = {"revision": verdict_json(verdict)}
    syntactic = {}
    for n in before:
        try:
            counterpart = after.by_id(n.id)
        except KeyError:
            continue
        sv = syntactic_classify(n, counterpart, system)
        syntactic[n.id] = {
            "direction": sv.direction.value,
            "fired_cases": sorted(c.value for c in sv.fired_cases),
            "deviation": sv.deviation,
        }
    doc["syntactic"] = syntactic
    doc["sanction_change"] = compare_sanctions(before, after).value
    return doc


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    pairs = [
        ("road", "road_n1", "road_r1"),
        ("road", "road_n1", "road_r2"),
        ("road", "road_n1", "road_r3"),
        ("road", "road_n1", "road_s1"),
        ("noise", "noise_n2", "noise_r5"),
        ("noise", "noise_n2", "noise_r6"),
        ("noise", "noise_n2", "noise_s2"),
        ("narrow", "narrow_n3", "narrow_r8"),
        ("narrow", "narrow_n3", "narrow_r9"),
    ]
    for model_name, before_name, after_name in pairs:
        doc = classification_golden(model_name, before_name, after_name)
        out = GOLDEN / f"classify_{before_name}_to_{after_name}.json"
        out.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        print("wrote", out.name)
    for name in ("road", "noise"):
        scenario = parse_scenario(data_text(f"{name}.scenario.json"))
        result = supervise(scenario)
        text = render_runlog(result.log, norms_text=render_norms(scenario.norms))
        out = GOLDEN / f"{name}_supervised.runlog.jsonl"
        out.write_text(text, encoding="utf-8")
        print("wrote", out.name)
    for name, argv in CLI_REPORTS:
        out = GOLDEN / name
        out.write_text(cli_report(argv), encoding="utf-8")
        print("wrote", out.name)


CLI_REPORTS = [
    (
        "cli_classify_road_r2.json",
        ["classify", "road.ts.json", "road_n1.norm", "road_r2.norm",
         "--syntactic", "--oracle", "--json"],
    ),
    (
        "cli_simulate_road_supervised.json",
        ["simulate", "road.scenario.json", "--supervise", "--json"],
    ),
    (
        "cli_simulate_noise_supervised.json",
        ["simulate", "noise.scenario.json", "--supervise", "--json"],
    ),
]


def cli_report(argv: list[str]) -> str:
    """Run one CLI command inside a directory holding the shipped data
    files under their plain names, so the report (with input hashes) is
    machine-independent."""
    import contextlib
    import io
    import os
    import tempfile

    from normsup.cli import main as cli_main
    from normsup.datafiles import data_names

    with tempfile.TemporaryDirectory() as tmp:
        for name in data_names():
            (pathlib.Path(tmp) / name).write_text(data_text(name), encoding="utf-8")
        cwd = os.getcwd()
        buffer = io.StringIO()
        try:
            os.chdir(tmp)
            with contextlib.redirect_stdout(buffer):
                code = cli_main(argv)
        finally:
            os.chdir(cwd)
    assert code in (0, 2, 3, 4), f"unexpected exit {code} for {argv}"
    return buffer.getvalue()


if __name__ == "__main__":
    main()
