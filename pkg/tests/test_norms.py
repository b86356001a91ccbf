from __future__ import annotations

from decimal import Decimal
from random import Random

from helpers import random_instance, random_system
from normsup.dslio import parse_formula, parse_norms
from normsup.formula import Atom
from normsup.model import Path, TransitionSystem, sample_lasso
from normsup.norms import (
    EventKind,
    Lifecycle,
    MonitorMode,
    Norm,
    NormKind,
    NormSet,
    Tiebreak,
    ground_norm,
    ground_normset,
    lint_norms,
    monitor_init,
    run_trace,
    step_lifecycle,
    violates_path,
)
from normsup.formula import Strictness, strictness


def norm(text: str, ident: str = "x") -> Norm:
    return parse_norms(f"norm {ident} {{ {text} }}").norms[0]


N1 = norm("when: inRoad; forbid: speedAbove15; until: never; sanction: 10000;", "n1")
N2 = norm("when: inRoad; oblige: speedbelow50; until: outOfRoad; sanction: 5;", "n2")

VOCAB = {"inRoad", "speedAbove15", "speedbelow50", "outOfRoad"}


def labeled_system(label_seq):
    """A chain system exposing the given label sequence as its only path."""
    states = [f"t{i}" for i in range(len(label_seq))]
    labels = dict(zip(states, label_seq))
    edges = list(zip(states, states[1:])) + [(states[-1], states[-1])]
    return TransitionSystem(VOCAB, states, labels, states[0], edges), Path(tuple(states))


class TestMonitorInit:
    def test_condition_false_stays_idle(self):
        monitor, events = monitor_init(N1, frozenset())
        assert monitor.lifecycle is Lifecycle.IDLE
        assert events == []

    def test_detaches_when_condition_holds(self):
        monitor, events = monitor_init(N1, frozenset({"inRoad"}))
        assert monitor.lifecycle is Lifecycle.ACTIVE
        assert [e.kind for e in events] == [EventKind.DETACHED]

    def test_instantaneous_detach_and_violation(self):
        monitor, events = monitor_init(N1, frozenset({"inRoad", "speedAbove15"}))
        assert monitor.lifecycle is Lifecycle.VIOLATED
        assert [e.kind for e in events] == [EventKind.DETACHED, EventKind.VIOLATED]
        assert events[-1].sanction == Decimal(10000)


class TestMonitorStep:
    def test_active_prohibition_violates_on_target(self):
        state, events = step_lifecycle(N1, Lifecycle.ACTIVE, {"inRoad", "speedAbove15"})
        assert state is Lifecycle.VIOLATED
        assert [e.kind for e in events] == [EventKind.VIOLATED]

    def test_active_obligation_complies_on_target(self):
        state, events = step_lifecycle(N2, Lifecycle.ACTIVE, {"inRoad", "speedbelow50"})
        assert state is Lifecycle.IDLE
        assert [e.kind for e in events] == [EventKind.COMPLIED]

    def test_idle_without_condition_does_nothing(self):
        state, events = step_lifecycle(N2, Lifecycle.IDLE, set())
        assert state is Lifecycle.IDLE and events == []

    def test_obligation_violates_at_deadline(self):
        state, events = step_lifecycle(N2, Lifecycle.ACTIVE, {"outOfRoad"})
        assert state is Lifecycle.VIOLATED
        assert [e.kind for e in events] == [EventKind.VIOLATED]
        assert events[0].sanction == Decimal(5)

    def test_prohibition_withdraws_at_deadline(self):
        until = norm("when: inRoad; forbid: speedAbove15; until: outOfRoad; sanction: 1;")
        state, events = step_lifecycle(until, Lifecycle.ACTIVE, {"outOfRoad"})
        assert state is Lifecycle.IDLE
        assert [e.kind for e in events] == [EventKind.WITHDRAWN]

    def test_target_beats_deadline_by_default(self):
        # obligation met in the very state where the deadline arrives
        state, events = step_lifecycle(
            N2, Lifecycle.ACTIVE, {"outOfRoad", "speedbelow50"}
        )
        assert state is Lifecycle.IDLE
        assert [e.kind for e in events] == [EventKind.COMPLIED]

    def test_deadline_first_option_reverses_the_tie(self):
        state, events = step_lifecycle(
            N2,
            Lifecycle.ACTIVE,
            {"outOfRoad", "speedbelow50"},
            tiebreak=Tiebreak.DEADLINE_FIRST,
        )
        assert state is Lifecycle.VIOLATED
        assert [e.kind for e in events] == [EventKind.VIOLATED]

    def test_path_mode_violated_is_absorbing(self):
        state, events = step_lifecycle(
            N1, Lifecycle.VIOLATED, {"inRoad", "speedAbove15"}, mode=MonitorMode.PATH
        )
        assert state is Lifecycle.VIOLATED and events == []

    def test_event_mode_resets_after_violation(self):
        # next input is processed from idle: it re-detaches and violates again
        state, events = step_lifecycle(
            N1, Lifecycle.VIOLATED, {"inRoad", "speedAbove15"}, mode=MonitorMode.EVENT
        )
        assert state is Lifecycle.VIOLATED
        assert [e.kind for e in events] == [EventKind.DETACHED, EventKind.VIOLATED]

    def test_closed_instance_redetaches_only_on_next_input(self):
        # complying input closes the instance; no second detachment on the same labels
        state, events = step_lifecycle(N2, Lifecycle.ACTIVE, {"inRoad", "speedbelow50"})
        assert state is Lifecycle.IDLE
        assert [e.kind for e in events] == [EventKind.COMPLIED]


class TestRunTrace:
    def test_violating_trace_charges_once(self):
        system, path = labeled_system([{"inRoad"}, {"inRoad", "speedAbove15"}])
        result = run_trace(NormSet("N", (N1,)), system, path)
        kinds = [(e.step, e.kind) for e in result.events]
        assert kinds == [(0, EventKind.DETACHED), (1, EventKind.VIOLATED)]
        assert result.ledger.total == Decimal(10000)

    def test_empty_labels_no_events(self):
        system, path = labeled_system([set(), set(), set()])
        result = run_trace(NormSet("N", (N1,)), system, path)
        assert result.events == ()
        assert result.ledger.total == 0

    def test_obligation_detach_then_comply(self):
        system, path = labeled_system([{"inRoad"}, {"inRoad", "speedbelow50"}])
        result = run_trace(NormSet("N", (N2,)), system, path)
        assert [e.kind for e in result.events] == [EventKind.DETACHED, EventKind.COMPLIED]
        assert result.ledger.total == 0

    def test_event_mode_charges_every_violation(self):
        system, path = labeled_system(
            [{"inRoad", "speedAbove15"}, {"inRoad", "speedAbove15"}]
        )
        result = run_trace(NormSet("N", (N1,)), system, path, MonitorMode.EVENT)
        fines = [e for e in result.events if e.kind is EventKind.VIOLATED]
        assert len(fines) == 2
        assert result.ledger.total == Decimal(20000)

    def test_path_mode_stops_at_first_violation(self):
        system, path = labeled_system(
            [{"inRoad", "speedAbove15"}, {"inRoad", "speedAbove15"}]
        )
        result = run_trace(NormSet("N", (N1,)), system, path, MonitorMode.PATH)
        fines = [e for e in result.events if e.kind is EventKind.VIOLATED]
        assert len(fines) == 1

    def test_modes_agree_until_first_violation(self):
        rng = Random(7)
        for seed in range(30):
            system, before, _ = random_instance(seed)
            path = sample_lasso(system, seed)
            p = run_trace(before, system, path, MonitorMode.PATH)
            e = run_trace(before, system, path, MonitorMode.EVENT)
            cut = next(
                (i for i, ev in enumerate(e.events) if ev.kind is EventKind.VIOLATED),
                len(e.events),
            )
            assert p.events[: cut + 1] == e.events[: cut + 1]

    def test_determinism(self):
        system, path = labeled_system([{"inRoad"}, {"inRoad", "speedAbove15"}, set()])
        a = run_trace(NormSet("N", (N1, N2)), system, path)
        b = run_trace(NormSet("N", (N1, N2)), system, path)
        assert a.events == b.events


class TestViolatesPath:
    def test_matches_event_mode_presence(self):
        for seed in range(40):
            system, before, _ = random_instance(seed)
            path = sample_lasso(system, seed + 1000)
            for n in before:
                expect = any(
                    e.kind is EventKind.VIOLATED
                    for e in run_trace(
                        NormSet("X", (n,)), system, path, MonitorMode.EVENT
                    ).events
                )
                assert violates_path(n, system, path) == expect

    def test_obligation_with_never_deadline_cannot_be_violated(self):
        never = norm("when: inRoad; oblige: speedbelow50; until: never; sanction: 5;")
        system, path = labeled_system([{"inRoad"}, {"inRoad"}, {"outOfRoad"}])
        assert violates_path(never, system, path) is False

    def test_lasso_unrolling_agrees_with_longer_unrollings(self):
        for seed in range(40):
            system, before, _ = random_instance(seed + 3000)
            lasso = sample_lasso(system, seed)
            for n in before:
                short = violates_path(n, system, lasso)
                long_prefix = Path(lasso.unrolled(6))
                assert short == violates_path(n, system, long_prefix)

    def test_stricter_prohibition_violates_fewer_paths(self):
        rng = Random(12)
        for seed in range(25):
            system = random_system(Random(seed + 61))
            atoms = sorted(system.atoms)
            base = Norm(
                "p1",
                parse_formula("true"),
                NormKind.PROHIBITION,
                Atom(atoms[0]),
                None,
                Decimal(1),
            )
            from normsup.formula import And

            stricter = base.replace(
                target=And(Atom(atoms[0]), Atom(atoms[-1])), id="p2"
            )
            if (
                strictness(stricter.target, base.target, system)
                is not Strictness.STRICTLY_STRICTER
            ):
                continue
            for k in range(30):
                path = sample_lasso(system, rng.randrange(10**6))
                if violates_path(stricter, system, path):
                    assert violates_path(base, system, path)


class TestGrounding:
    def test_substitutes_agent_placeholders(self):
        template = norm(
            "when: inRoad_{a}; forbid: speedAbove15_{a}; until: never; sanction: 1;"
        )
        grounded = ground_norm(template, "c1")
        assert grounded.id == "x@c1"
        assert grounded.cond == Atom("inRoad_c1")
        assert grounded.target == Atom("speedAbove15_c1")

    def test_plain_norms_kept_once(self):
        ns = NormSet("N", (N1,))
        assert ground_normset(ns, ["c1", "c2"]) == ns

    def test_one_copy_per_agent(self):
        template = norm("when: inRoad_{a}; forbid: speedAbove15_{a}; until: never; sanction: 1;")
        grounded = ground_normset(NormSet("N", (template,)), ["c1", "c2"])
        assert [n.id for n in grounded] == ["x@c1", "x@c2"]


class TestLints:
    def test_obligation_with_never_deadline_is_flagged(self):
        never = norm("when: inRoad; oblige: speedbelow50; until: never; sanction: 5;")
        warnings = lint_norms(NormSet("N", (never,)))
        assert any("never" in str(w) for w in warnings)

    def test_unknown_atoms_against_vocabulary(self):
        warnings = lint_norms(NormSet("N", (N1,)), vocabulary={"inRoad"})
        assert any("speedAbove15" in str(w) for w in warnings)

    def test_clean_set(self):
        assert lint_norms(NormSet("N", (N1,)), vocabulary=VOCAB) == []
