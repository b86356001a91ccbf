"""Regenerate the shipped data files under src/normsup/data/.

Run from the repository root:  python tools/make_data.py
"""

from __future__ import annotations

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from normsup.dslio import parse_norms, render_model, render_norms, render_scenario, parse_scenario
from normsup.model import TransitionSystem
from normsup.revision import classify_revision, oracle_compare, syntactic_classify, compare_sanctions

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "normsup" / "data"


def road_model() -> TransitionSystem:
    labels = {
        "out": set(),
        "out_fast": {"speedAbove15"},
        "in_slow": {"inRoad"},
        "in_slow_traffic": {"inRoad", "trafficHigh"},
        "in_fast": {"inRoad", "speedAbove15"},
        "in_vfast": {"inRoad", "speedAbove15", "speedAbove20"},
        "in_fast_traffic": {"inRoad", "trafficHigh", "speedAbove15"},
        "half_slow": {"inRoad", "firstHalfCompleted"},
        "half_fast": {"inRoad", "firstHalfCompleted", "speedAbove15"},
    }
    edges = [
        ("out", "out"), ("out", "in_slow"), ("out", "in_slow_traffic"), ("out", "out_fast"),
        ("out_fast", "out_fast"), ("out_fast", "out"),
        ("in_slow", "in_slow"), ("in_slow", "in_fast"), ("in_slow", "in_vfast"), ("in_slow", "half_slow"),
        ("in_slow_traffic", "in_slow_traffic"), ("in_slow_traffic", "in_fast_traffic"), ("in_slow_traffic", "half_slow"),
        ("in_fast", "in_fast"), ("in_fast", "in_vfast"), ("in_fast", "half_slow"),
        ("in_vfast", "in_vfast"), ("in_vfast", "half_slow"),
        ("in_fast_traffic", "in_fast_traffic"), ("in_fast_traffic", "half_slow"),
        ("half_slow", "half_slow"), ("half_slow", "half_fast"), ("half_slow", "out"),
        ("half_fast", "half_fast"), ("half_fast", "out"),
    ]
    atoms = {"inRoad", "trafficHigh", "speedAbove15", "speedAbove20", "firstHalfCompleted"}
    return TransitionSystem(atoms, labels.keys(), labels, "out", edges)


ROAD_NORMS = {
    "road_n1": "set road_n1;\nnorm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }",
    "road_r1": "set road_r1;\nnorm n1 { when: inRoad & trafficHigh; forbid: speedAbove15; until: never; sanction: 10000; }",
    "road_r2": "set road_r2;\nnorm n1 { when: inRoad; forbid: speedAbove20; until: never; sanction: 10000; }",
    "road_r3": "set road_r3;\nnorm n1 { when: inRoad; forbid: speedAbove15; until: firstHalfCompleted; sanction: 10000; }",
    "road_s1": "set road_s1;\nnorm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 5; }",
}


def noise_model() -> TransitionSystem:
    labels = {
        "away": {"outOfRoad", "oneKmFarAway", "speedbelow50"},
        "appr_slow": {"outOfRoad", "aroundTheRoad", "speedbelow50"},
        "appr_fast": {"outOfRoad", "aroundTheRoad"},
        "road_slow": {"inRoad", "speedbelow50"},
        "road_fast": {"inRoad"},
        "exit_slow": {"outOfRoad", "aroundTheRoad", "speedbelow50"},
        "exit_fast": {"outOfRoad"},
        "far_fast": {"outOfRoad", "oneKmFarAway"},
        "scoot_appr": {"outOfRoad", "aroundTheRoad", "speedbelow50", "typeScooter"},
        "scoot_road": {"inRoad", "speedbelow50", "typeScooter"},
        "scoot_exit": {"outOfRoad", "aroundTheRoad", "speedbelow50", "typeScooter"},
    }
    edges = [
        ("away", "away"), ("away", "appr_slow"), ("away", "appr_fast"), ("away", "scoot_appr"),
        ("appr_slow", "appr_slow"), ("appr_slow", "road_slow"), ("appr_slow", "away"),
        ("appr_fast", "appr_fast"), ("appr_fast", "road_fast"), ("appr_fast", "exit_fast"),
        ("road_slow", "road_slow"), ("road_slow", "road_fast"), ("road_slow", "exit_slow"),
        ("road_fast", "road_fast"), ("road_fast", "road_slow"), ("road_fast", "exit_fast"), ("road_fast", "exit_slow"),
        ("exit_slow", "away"),
        ("exit_fast", "far_fast"),
        ("far_fast", "far_fast"), ("far_fast", "away"),
        ("scoot_appr", "scoot_road"),
        ("scoot_road", "scoot_road"), ("scoot_road", "scoot_exit"),
        ("scoot_exit", "away"),
    ]
    atoms = {"inRoad", "outOfRoad", "aroundTheRoad", "speedbelow50", "oneKmFarAway", "typeScooter"}
    return TransitionSystem(atoms, labels.keys(), labels, "away", edges)


NOISE_NORMS = {
    "noise_n2": "set noise_n2;\nnorm n2 { when: inRoad; oblige: speedbelow50; until: outOfRoad; sanction: 5; }",
    "noise_r5": (
        "set noise_r5;\nnorm n2 { when: inRoad | aroundTheRoad; oblige: speedbelow50; "
        "until: outOfRoad & oneKmFarAway; sanction: 5; }"
    ),
    "noise_r6": "set noise_r6;\nnorm n2 { when: inRoad; oblige: typeScooter; until: outOfRoad; sanction: 5; }",
    "noise_s2": "set noise_s2;\nnorm n2 { when: inRoad; oblige: speedbelow50; until: outOfRoad; sanction: 10000; }",
}


def narrow_model() -> TransitionSystem:
    labels = {
        "idle": {"outOfRoad_c1", "speedbelow50_c1", "wait_c1", "wait_c2"},
        "standoff": {"firstEnd_c1", "secEnd_c2", "wait_c1", "wait_c2", "outOfRoad_c1", "speedbelow50_c1"},
        "pass_c1": {"move_c1", "wait_c2", "outOfRoad_c1", "speedbelow50_c1"},
        "pass_c2": {"wait_c1", "move_c2", "outOfRoad_c1", "speedbelow50_c1"},
        "ride_slow": {"inRoad_c1", "speedbelow50_c1"},
        "ride_fast": {"inRoad_c1"},
        "exit_slow": {"outOfRoad_c1", "speedbelow50_c1"},
        "exit_fast": {"outOfRoad_c1"},
    }
    edges = [
        ("idle", "idle"), ("idle", "standoff"), ("idle", "ride_slow"), ("idle", "ride_fast"),
        ("standoff", "standoff"), ("standoff", "pass_c1"), ("standoff", "pass_c2"),
        ("pass_c1", "idle"), ("pass_c2", "idle"),
        ("ride_slow", "ride_slow"), ("ride_slow", "ride_fast"), ("ride_slow", "exit_slow"),
        ("ride_fast", "ride_fast"), ("ride_fast", "ride_slow"), ("ride_fast", "exit_fast"),
        ("exit_slow", "idle"), ("exit_fast", "idle"),
    ]
    atoms = {
        "firstEnd_c1", "secEnd_c2", "move_c1", "wait_c1", "move_c2", "wait_c2",
        "inRoad_c1", "outOfRoad_c1", "speedbelow50_c1",
    }
    return TransitionSystem(atoms, labels.keys(), labels, "idle", edges)


NARROW_NORMS = {
    "narrow_n3": (
        "set narrow_n3;\nnorm n3 { when: firstEnd_c1 & secEnd_c2; oblige: move_c1 & wait_c2; "
        "until: !(firstEnd_c1 & secEnd_c2); sanction: 10000; }"
    ),
    "narrow_r8": (
        "set narrow_r8;\nnorm n3 { when: firstEnd_c1 & secEnd_c2; oblige: wait_c1 & move_c2; "
        "until: !(firstEnd_c1 & secEnd_c2); sanction: 10000; }"
    ),
    "narrow_r9": (
        "set narrow_r9;\nnorm n3 { when: inRoad_c1; oblige: speedbelow50_c1; "
        "until: outOfRoad_c1; sanction: 10000; }"
    ),
}


def road_scenario() -> dict:
    world = {
        "format": 1,
        "atoms": ["inRoad_{a}", "speedAbove15_{a}", "speedAbove20_{a}"],
        "states": [
            {"id": "out", "labels": []},
            {"id": "p0s", "labels": ["inRoad_{a}"]},
            {"id": "p1s", "labels": ["inRoad_{a}"]},
            {"id": "p2s", "labels": ["inRoad_{a}"]},
            {"id": "p3s", "labels": ["inRoad_{a}"]},
            {"id": "p0f", "labels": ["inRoad_{a}", "speedAbove15_{a}"]},
            {"id": "p1f", "labels": ["inRoad_{a}", "speedAbove15_{a}"]},
            {"id": "p2f", "labels": ["inRoad_{a}", "speedAbove15_{a}"]},
            {"id": "p3f", "labels": ["inRoad_{a}", "speedAbove15_{a}"]},
        ],
        "init": "out",
        "edges": [
            ["out", "out"], ["out", "p0s"], ["out", "p0f"],
            ["p0s", "p1s"], ["p0s", "p1f"],
            ["p1s", "p2s"], ["p1s", "p2f"],
            ["p2s", "p3s"], ["p2s", "p3f"],
            ["p3s", "out"],
            ["p0f", "p2s"], ["p0f", "p2f"],
            ["p1f", "p3s"], ["p1f", "p3f"],
            ["p2f", "out"],
            ["p3f", "out"],
        ],
    }
    utilities = {
        "out": 0, "p0s": 1, "p1s": 2, "p2s": 3, "p3s": 4,
        "p0f": 10, "p1f": 11, "p2f": 12, "p3f": 13,
    }
    return {
        "format": 1,
        "id": "road",
        "world": world,
        "agents": [
            {"id": a, "sanction_sensitivity": 1.0, "epsilon": 0.0, "utilities": utilities}
            for a in ("c1", "c2", "c3")
        ],
        "norms": (
            "# format 1\nset road;\n\nnorm n1 {\n  when: inRoad_{a};\n"
            "  forbid: speedAbove15_{a};\n  until: never;\n  sanction: 10000;\n}\n"
        ),
        "objectives": [
            {
                "id": "residence",
                "kind": "max_consecutive",
                "atom": "inRoad_{a}",
                "limit": 3,
                "threshold": 0,
                "scope": "per_agent",
            }
        ],
        "pool": {"formulas": ["speedAbove20_{a}"], "sanctions": ["5"]},
        "enforcement": "sanctioning",
        "seed": 7,
        "horizon": 15,
        "window": 5,
        "theta_low": 0.9,
        "theta_high": 1.0,
        "minutes_per_step": 10,
    }


def noise_scenario() -> dict:
    world = {
        "format": 1,
        "atoms": ["inRoad_{a}", "outOfRoad_{a}", "speedbelow50_{a}", "noisy_{a}"],
        "states": [
            {"id": "out", "labels": ["outOfRoad_{a}", "speedbelow50_{a}"]},
            {"id": "rs0", "labels": ["inRoad_{a}", "speedbelow50_{a}"]},
            {"id": "rs1", "labels": ["inRoad_{a}", "speedbelow50_{a}"]},
            {"id": "rf0", "labels": ["inRoad_{a}"]},
            {"id": "rf1", "labels": ["inRoad_{a}"]},
            {"id": "exs", "labels": ["outOfRoad_{a}", "speedbelow50_{a}"]},
            {"id": "exf", "labels": ["outOfRoad_{a}", "noisy_{a}"]},
        ],
        "init": "out",
        "edges": [
            ["out", "out"], ["out", "rs0"], ["out", "rf0"],
            ["rs0", "rs1"], ["rs0", "rf1"],
            ["rs1", "exs"],
            ["rf0", "rf1"], ["rf0", "rs1"],
            ["rf1", "exf"], ["rf1", "exs"],
            ["exs", "out"],
            ["exf", "out"],
        ],
    }
    utilities = {"out": 0, "rs0": 1, "rs1": 2, "rf0": 10, "rf1": 11, "exs": 3, "exf": 14}
    return {
        "format": 1,
        "id": "noise",
        "world": world,
        "agents": [
            {"id": a, "sanction_sensitivity": 1.0, "epsilon": 0.0, "utilities": utilities}
            for a in ("c1", "c2")
        ],
        "norms": (
            "# format 1\nset noise;\n\nnorm n2 {\n  when: inRoad_{a};\n"
            "  oblige: speedbelow50_{a};\n  until: outOfRoad_{a};\n  sanction: 5;\n}\n"
        ),
        "objectives": [
            {
                "id": "quiet",
                "kind": "always_below_count",
                "atom": "noisy_{a}",
                "limit": 1,
                "threshold": 1,
                "scope": "global",
            }
        ],
        "pool": {"formulas": [], "sanctions": ["10000"]},
        "enforcement": "sanctioning",
        "seed": 11,
        "horizon": 12,
        "window": 4,
        "theta_low": 0.9,
        "theta_high": 1.0,
        "minutes_per_step": 5,
    }


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "road.ts.json").write_text(render_model(road_model()), encoding="utf-8")
    (DATA / "noise.ts.json").write_text(render_model(noise_model()), encoding="utf-8")
    (DATA / "narrow.ts.json").write_text(render_model(narrow_model()), encoding="utf-8")
    for name, text in {**ROAD_NORMS, **NOISE_NORMS, **NARROW_NORMS}.items():
        norms = parse_norms(text)
        (DATA / f"{name}.norm").write_text(render_norms(norms), encoding="utf-8")
    for scenario in (road_scenario(), noise_scenario()):
        text = json.dumps(scenario, sort_keys=True, indent=2) + "\n"
        parsed = parse_scenario(text)  # sanity: must parse cleanly
        (DATA / f"{parsed.id}.scenario.json").write_text(
            render_scenario(parsed), encoding="utf-8"
        )
    print("data files written to", DATA)

    # quick verification of the intended classifications
    road = road_model()
    for name, expected in (("road_r1", "relaxation"), ("road_r2", "relaxation"), ("road_r3", "relaxation")):
        before = parse_norms(ROAD_NORMS["road_n1"])
        after = parse_norms(ROAD_NORMS[name])
        verdict = classify_revision(road, before, after)
        oracle = oracle_compare(road, before, after)
        print(f"road n1 -> {name}: {verdict.relation.value} (oracle {oracle.relation.value})")
        assert verdict.relation.value == expected, name
        assert oracle.relation.value == expected, name
        sv = syntactic_classify(before.norms[0], after.norms[0], road)
        print("   syntactic:", sv.direction.value, sorted(c.value for c in sv.fired_cases))
    print("road s1 sanctions:", compare_sanctions(parse_norms(ROAD_NORMS["road_n1"]), parse_norms(ROAD_NORMS["road_s1"])).value)

    noise = noise_model()
    for name in ("noise_r5", "noise_r6"):
        before = parse_norms(NOISE_NORMS["noise_n2"])
        after = parse_norms(NOISE_NORMS[name])
        verdict = classify_revision(noise, before, after)
        oracle = oracle_compare(noise, before, after)
        print(f"noise n2 -> {name}: {verdict.relation.value} (oracle {oracle.relation.value})")
        assert verdict.relation.value == "strengthening", name
        assert oracle.relation.value == "strengthening", name
    print("noise s2 sanctions:", compare_sanctions(parse_norms(NOISE_NORMS["noise_n2"]), parse_norms(NOISE_NORMS["noise_s2"])).value)
    sv = syntactic_classify(parse_norms(NOISE_NORMS["noise_n2"]).norms[0], parse_norms(NOISE_NORMS["noise_r6"]).norms[0], noise)
    print("noise r6 syntactic:", sv.direction.value, sorted(c.value for c in sv.fired_cases))

    narrow = narrow_model()
    for name in ("narrow_r8", "narrow_r9"):
        before = parse_norms(NARROW_NORMS["narrow_n3"])
        after = parse_norms(NARROW_NORMS[name])
        verdict = classify_revision(narrow, before, after)
        oracle = oracle_compare(narrow, before, after)
        print(f"narrow n3 -> {name}: {verdict.relation.value} (oracle {oracle.relation.value})")
        assert verdict.relation.value == "incomparable", name
        assert oracle.relation.value == "incomparable", name
        assert verdict.witness_in_R_not_N is not None and verdict.witness_in_N_not_R is not None


if __name__ == "__main__":
    main()
