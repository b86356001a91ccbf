from __future__ import annotations

from random import Random

import pytest

from helpers import random_system
from normsup.errors import BudgetExceeded, NotTotal
from normsup.model import (
    Path,
    TransitionSystem,
    complete_total,
    count_paths,
    enumerate_paths,
    is_total,
    reachable_states,
    sample_lasso,
    sample_path,
    validate,
)


def chain(*states: str) -> TransitionSystem:
    edges = list(zip(states, states[1:])) + [(states[-1], states[-1])]
    return TransitionSystem({"a"}, states, {}, states[0], edges)


class TestValidate:
    def test_well_formed(self):
        assert validate(chain("s0", "s1")) == []

    def test_edge_to_undeclared_state(self):
        system = TransitionSystem({"a"}, {"s0"}, {}, "s0", {("s0", "nowhere")})
        kinds = {d.kind for d in validate(system)}
        assert "unknown state" in kinds

    def test_label_outside_vocabulary(self):
        system = TransitionSystem({"a"}, {"s0"}, {"s0": {"ghost"}}, "s0", set())
        kinds = {d.kind for d in validate(system)}
        assert "unknown atom" in kinds

    def test_missing_init(self):
        system = TransitionSystem({"a"}, {"s0"}, {}, "elsewhere", set())
        assert any(d.kind == "unknown state" for d in validate(system))


class TestReachability:
    def test_single_state_no_edges(self):
        system = TransitionSystem(set(), {"s0"}, {}, "s0", set())
        assert reachable_states(system) == {"s0"}

    def test_chain(self):
        assert reachable_states(chain("s0", "s1", "s2")) == {"s0", "s1", "s2"}

    def test_isolated_state_not_reached(self):
        system = TransitionSystem(
            set(), {"s0", "s1", "s2"}, {}, "s0", {("s0", "s1"), ("s1", "s1")}
        )
        assert reachable_states(system) == {"s0", "s1"}


class TestTotality:
    def test_self_loop_is_total(self):
        system = TransitionSystem(set(), {"s0"}, {}, "s0", {("s0", "s0")})
        assert is_total(system)

    def test_deadlock_detected_and_completed(self):
        system = TransitionSystem(set(), {"s0", "s1"}, {}, "s0", {("s0", "s1")})
        assert not is_total(system)
        completed = complete_total(system)
        assert ("s1", "s1") in completed.edges
        assert is_total(completed)

    def test_complete_total_is_idempotent(self):
        system = chain("s0", "s1")
        assert complete_total(system) == system
        once = complete_total(TransitionSystem(set(), {"s0"}, {}, "s0", set()))
        assert complete_total(once) == once

    def test_unreachable_deadlock_is_ignored(self):
        system = TransitionSystem(
            set(), {"s0", "dead"}, {}, "s0", {("s0", "s0")}
        )
        assert is_total(system)
        assert complete_total(system) == system


class TestEnumeratePaths:
    def test_self_loop_unique_path(self):
        system = TransitionSystem(set(), {"s0"}, {}, "s0", {("s0", "s0")})
        assert [p.states for p in enumerate_paths(system, 3)] == [("s0", "s0", "s0")]

    def test_branching(self):
        system = TransitionSystem(
            set(),
            {"s0", "s1", "s2"},
            {},
            "s0",
            {("s0", "s1"), ("s0", "s2"), ("s1", "s1"), ("s2", "s2")},
        )
        assert [p.states for p in enumerate_paths(system, 2)] == [
            ("s0", "s1"),
            ("s0", "s2"),
        ]

    def test_complete_graph_count(self):
        states = {"s0", "s1", "s2"}
        system = TransitionSystem(set(), states, {}, "s0", {(a, b) for a in states for b in states})
        assert len(list(enumerate_paths(system, 3))) == 9

    def test_lexicographic_order(self):
        system = TransitionSystem(
            set(), {"s0", "s1", "s2"}, {}, "s0",
            {("s0", "s2"), ("s0", "s1"), ("s1", "s1"), ("s2", "s2")},
        )
        first = next(iter(enumerate_paths(system, 2)))
        assert first.states == ("s0", "s1")

    def test_budget(self):
        states = [f"s{i}" for i in range(4)]
        system = TransitionSystem(
            set(), states, {}, "s0", {(a, b) for a in states for b in states}
        )
        with pytest.raises(BudgetExceeded):
            list(enumerate_paths(system, 12, budget=100))

    def test_requires_totality(self):
        system = TransitionSystem(set(), {"s0", "s1"}, {}, "s0", {("s0", "s1")})
        with pytest.raises(NotTotal):
            list(enumerate_paths(system, 2))

    @pytest.mark.parametrize("seed", range(12))
    def test_count_matches_out_degree_product_sum(self, seed):
        # independent oracle: expand the path tree level by level
        system = random_system(Random(seed), max_states=4)
        length = 5
        level = {system.init: 1}
        for _ in range(length - 1):
            nxt: dict[str, int] = {}
            for s, n in level.items():
                for t in system.successors(s):
                    nxt[t] = nxt.get(t, 0) + n
            level = nxt
        expected = sum(level.values())
        assert count_paths(system, length) == expected
        assert len(list(enumerate_paths(system, length))) == expected


class TestSampling:
    def test_deterministic_chain_ignores_seed(self):
        system = chain("s0", "s1", "s2")
        assert sample_path(system, 3, 1).states == sample_path(system, 3, 99).states

    def test_same_seed_same_path(self):
        system = random_system(Random(3))
        assert sample_path(system, 6, 42) == sample_path(system, 6, 42)

    def test_seeds_spread_over_branches(self):
        system = TransitionSystem(
            set(), {"s0", "s1", "s2"}, {}, "s0",
            {("s0", "s1"), ("s0", "s2"), ("s1", "s1"), ("s2", "s2")},
        )
        paths = {sample_path(system, 2, seed).states for seed in range(100)}
        assert len(paths) >= 2

    @pytest.mark.parametrize("seed", range(10))
    def test_sampled_paths_are_valid(self, seed):
        system = random_system(Random(seed + 50))
        path = sample_path(system, 7, seed)
        assert path.check_in(system) == []

    @pytest.mark.parametrize("seed", range(10))
    def test_sampled_lassos_close_properly(self, seed):
        system = random_system(Random(seed + 80))
        lasso = sample_lasso(system, seed)
        assert lasso.is_lasso
        assert lasso.check_in(system) == []
        assert len(lasso.cycle) >= 1


class TestPath:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Path(())

    def test_unroll(self):
        lasso = Path(("s0", "s1", "s2"), cycle_start=1)
        assert lasso.unrolled(2) == ("s0", "s1", "s2", "s1", "s2")
        assert lasso.stem == ("s0",)
        assert lasso.cycle == ("s1", "s2")

    def test_check_reports_missing_edges(self):
        system = chain("s0", "s1")
        bad = Path(("s0", "s0"))
        assert any("missing edge" in p for p in bad.check_in(system))
        unclosed = Path(("s0", "s1"), cycle_start=0)
        assert any("cycle does not close" in p for p in unclosed.check_in(system))
