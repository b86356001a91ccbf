from __future__ import annotations

from decimal import Decimal

import pytest

from helpers import random_edit_pair, random_instance
from normsup.dslio import parse_norms
from normsup.errors import BudgetExceeded, NotTotal, VocabularyMismatch
from normsup.formula import And, Atom, Or
from normsup.model import TransitionSystem
from normsup.norms import NormSet, violates_any
from normsup.revision import (
    CandidatePool,
    EditDirection,
    Relation,
    SanctionChange,
    SyntacticCase,
    SyntacticDirection,
    classify_revision,
    compare_sanctions,
    generate_candidates,
    oracle_compare,
    syntactic_classify,
    viol_contains,
)


def norms_of(text: str) -> NormSet:
    return parse_norms(text)


class TestViolContains:
    def test_reflexive(self, road_model, road_norms):
        assert viol_contains(road_model, road_norms["n1"], road_norms["n1"]).holds

    def test_wider_prohibition_contains_narrower(self, road_model, road_norms):
        # everything the 20 km/h ban catches, the 15 km/h ban catches too
        result = viol_contains(road_model, road_norms["n1"], road_norms["r2"])
        assert result.holds and result.counterexample is None

    def test_counterexample_reaches_the_band_between_limits(self, road_model, road_norms):
        result = viol_contains(road_model, road_norms["r2"], road_norms["n1"])
        assert not result.holds
        witness = result.counterexample
        assert witness is not None and witness.is_lasso
        assert witness.check_in(road_model) == []
        assert violates_any(road_norms["n1"], road_model, witness)
        assert not violates_any(road_norms["r2"], road_model, witness)
        assert "in_fast" in witness.states

    def test_unsatisfiable_condition_is_contained_in_anything(self, road_model, road_norms):
        empty = norms_of(
            "set empty;\nnorm z { when: false; forbid: speedAbove15; until: never; sanction: 1; }"
        )
        assert viol_contains(road_model, road_norms["n1"], empty).holds

    def test_rejects_non_total_systems(self, road_norms):
        system = TransitionSystem({"inRoad"}, {"s0", "s1"}, {}, "s0", {("s0", "s1")})
        with pytest.raises(NotTotal):
            viol_contains(system, road_norms["n1"], road_norms["n1"])

    def test_rejects_foreign_atoms(self, road_model):
        alien = norms_of("norm z { when: somethingElse; forbid: inRoad; until: never; sanction: 1; }")
        with pytest.raises(VocabularyMismatch):
            viol_contains(road_model, alien, alien)


class TestClassifyRevision:
    def test_narrower_condition_relaxes(self, road_model, road_norms):
        verdict = classify_revision(road_model, road_norms["n1"], road_norms["r1"])
        assert verdict.relation is Relation.RELAXATION
        assert verdict.witness_in_N_not_R is not None
        assert verdict.witness_in_R_not_N is None

    def test_strengthening_on_noise_model(self, noise_model, noise_norms):
        verdict = classify_revision(noise_model, noise_norms["n2"], noise_norms["r5"])
        assert verdict.relation is Relation.STRENGTHENING

    def test_incomparable_on_narrow_model(self, narrow_model, narrow_norms):
        verdict = classify_revision(narrow_model, narrow_norms["n3"], narrow_norms["r9"])
        assert verdict.relation is Relation.INCOMPARABLE
        assert verdict.witness_in_R_not_N is not None
        assert verdict.witness_in_N_not_R is not None

    def test_identity_is_equivalent(self, road_model, road_norms):
        verdict = classify_revision(road_model, road_norms["n1"], road_norms["n1"])
        assert verdict.relation is Relation.EQUIVALENT
        assert verdict.sanction_change is SanctionChange.UNCHANGED

    def test_equal_violation_sets_are_not_a_relaxation(self, road_model, road_norms):
        # strictness matters: identical sets classify as equivalent,
        # never as relaxation or strengthening
        verdict = classify_revision(road_model, road_norms["n1"], road_norms["s1"])
        assert verdict.relation is Relation.EQUIVALENT
        assert verdict.sanction_change is SanctionChange.DECREASED

    @pytest.mark.parametrize("seed", range(60))
    def test_symmetry(self, seed):
        system, before, after = random_instance(seed + 500)
        forward = classify_revision(system, before, after).relation
        backward = classify_revision(system, after, before).relation
        mirror = {
            Relation.RELAXATION: Relation.STRENGTHENING,
            Relation.STRENGTHENING: Relation.RELAXATION,
            Relation.EQUIVALENT: Relation.EQUIVALENT,
            Relation.INCOMPARABLE: Relation.INCOMPARABLE,
        }
        assert backward is mirror[forward]

    @pytest.mark.parametrize("seed", range(60))
    def test_witnesses_replay(self, seed):
        system, before, after = random_instance(seed + 700)
        verdict = classify_revision(system, before, after)
        if verdict.witness_in_R_not_N is not None:
            w = verdict.witness_in_R_not_N
            assert w.check_in(system) == []
            assert violates_any(after, system, w)
            assert not violates_any(before, system, w)
        if verdict.witness_in_N_not_R is not None:
            w = verdict.witness_in_N_not_R
            assert w.check_in(system) == []
            assert violates_any(before, system, w)
            assert not violates_any(after, system, w)


class TestOracle:
    def test_identity_is_equivalent(self, road_model, road_norms):
        verdict = oracle_compare(road_model, road_norms["n1"], road_norms["n1"])
        assert verdict.relation is Relation.EQUIVALENT

    def test_single_unlabeled_state(self):
        system = TransitionSystem({"inRoad"}, {"s0"}, {}, "s0", {("s0", "s0")})
        ns = norms_of("norm z { when: inRoad; forbid: inRoad; until: never; sanction: 1; }")
        other = norms_of("set o;\nnorm z { when: true; forbid: inRoad; until: never; sanction: 1; }")
        assert oracle_compare(system, ns, other).relation is Relation.EQUIVALENT

    def test_agrees_on_the_shipped_examples(self, road_model, road_norms, noise_model, noise_norms):
        for model, pairs in (
            (road_model, [(road_norms["n1"], road_norms["r1"])]),
            (noise_model, [(noise_norms["n2"], noise_norms["r6"])]),
        ):
            for before, after in pairs:
                assert (
                    oracle_compare(model, before, after).relation
                    is classify_revision(model, before, after).relation
                )

    @pytest.mark.parametrize("seed", range(30))
    def test_oracle_witnesses_replay(self, seed):
        system, before, after = random_instance(seed + 1300)
        verdict = oracle_compare(system, before, after)
        for witness, violated, clean in (
            (verdict.witness_in_R_not_N, after, before),
            (verdict.witness_in_N_not_R, before, after),
        ):
            if witness is None:
                continue
            assert witness.check_in(system) == []
            assert violates_any(violated, system, witness)
            assert not violates_any(clean, system, witness)

    def test_desk_scale_guard(self):
        states = [f"s{i}" for i in range(10)]
        system = TransitionSystem(
            {"a"}, states, {}, "s0", {(s, t) for s in states for t in states}
        )
        big = NormSet(
            "N",
            tuple(
                norms_of(
                    f"norm n{i} {{ when: a; forbid: a; until: never; sanction: 1; }}"
                ).norms[0].replace(id=f"n{i}")
                for i in range(4)
            ),
        )
        with pytest.raises(BudgetExceeded):
            oracle_compare(system, big, big)


class TestSyntactic:
    def test_stricter_condition_fires_the_condition_case(self, road_model, road_norms):
        verdict = syntactic_classify(
            road_norms["n1"].norms[0], road_norms["r1"].norms[0], road_model
        )
        assert verdict.direction is SyntacticDirection.RELAXATION_OR_EQUIVALENT
        assert verdict.fired_cases == {SyntacticCase.COND_CASE}
        assert not verdict.deviation

    def test_later_deadline_fires_the_deadline_case(self, road_model, road_norms):
        verdict = syntactic_classify(
            road_norms["n1"].norms[0], road_norms["r3"].norms[0], road_model
        )
        assert verdict.direction is SyntacticDirection.RELAXATION_OR_EQUIVALENT
        assert verdict.fired_cases == {SyntacticCase.DEADLINE_CASE}
        assert not verdict.deviation

    def test_scooter_target_strengthens_given_the_model(self, noise_model, noise_norms):
        verdict = syntactic_classify(
            noise_norms["n2"].norms[0], noise_norms["r6"].norms[0], noise_model
        )
        assert verdict.direction is SyntacticDirection.STRENGTHENING_OR_EQUIVALENT
        assert verdict.fired_cases == {SyntacticCase.TARGET_CASE}

    def test_obligation_deadline_edits_carry_the_deviation_flag(self, noise_norms):
        n2 = noise_norms["n2"].norms[0]
        tightened = n2.replace(deadline=And(n2.deadline, Atom("oneKmFarAway")))
        verdict = syntactic_classify(n2, tightened)
        assert verdict.deviation
        # a stricter deadline gives the obligation more time: relaxing
        assert verdict.direction is SyntacticDirection.RELAXATION_OR_EQUIVALENT
        assert verdict.fired_cases == {SyntacticCase.DEADLINE_CASE}

    def test_kind_change_is_unknown(self, road_norms, noise_norms):
        verdict = syntactic_classify(road_norms["n1"].norms[0], noise_norms["n2"].norms[0])
        assert verdict.direction is SyntacticDirection.UNKNOWN
        assert verdict.fired_cases == frozenset()

    def test_mixed_pulls_are_unknown(self, noise_norms):
        n2 = noise_norms["n2"].norms[0]
        mixed = n2.replace(
            cond=Or(n2.cond, Atom("aroundTheRoad")),  # strengthens
            target=Or(n2.target, Atom("typeScooter")),  # relaxes the obligation
        )
        verdict = syntactic_classify(n2, mixed)
        assert verdict.direction is SyntacticDirection.UNKNOWN

    @pytest.mark.parametrize("seed", range(80))
    def test_unflagged_relaxations_are_semantically_sound(self, seed):
        system, n1, n2 = random_edit_pair(seed + 40000)
        verdict = syntactic_classify(n1, n2, system)
        if (
            verdict.direction is SyntacticDirection.RELAXATION_OR_EQUIVALENT
            and not verdict.deviation
        ):
            assert viol_contains(
                system, NormSet("N", (n1,)), NormSet("R", (n2,))
            ).holds


class TestCompareSanctions:
    def test_decrease(self, road_norms):
        assert (
            compare_sanctions(road_norms["n1"], road_norms["s1"])
            is SanctionChange.DECREASED
        )

    def test_increase(self, noise_norms):
        assert (
            compare_sanctions(noise_norms["n2"], noise_norms["s2"])
            is SanctionChange.INCREASED
        )

    def test_unchanged(self, road_norms):
        assert compare_sanctions(road_norms["n1"], road_norms["n1"]) is SanctionChange.UNCHANGED

    def test_mixed(self):
        two = norms_of(
            "set two;\n"
            "norm a { when: x; forbid: y; until: never; sanction: 5; }\n"
            "norm b { when: x; forbid: y; until: never; sanction: 5; }"
        )
        moved = NormSet(
            "two",
            (
                two.norms[0].replace(sanction=Decimal(1)),
                two.norms[1].replace(sanction=Decimal(9)),
            ),
        )
        assert compare_sanctions(two, moved) is SanctionChange.MIXED

    def test_unmatched_ids(self, road_norms, narrow_norms):
        assert (
            compare_sanctions(road_norms["n1"], narrow_norms["n3"])
            is SanctionChange.NOT_COMPARABLE
        )


class TestGenerateCandidates:
    def test_condition_conjunct_appears_for_relax(self, road_norms):
        n1 = road_norms["n1"].norms[0]
        pool = CandidatePool(formulas=(Atom("trafficHigh"),))
        out = generate_candidates(n1, pool, EditDirection.RELAX)
        assert any(
            c.cond == And(Atom("inRoad"), Atom("trafficHigh")) for c in out
        )

    def test_empty_pool_yields_nothing(self, road_norms):
        out = generate_candidates(
            road_norms["n1"].norms[0], CandidatePool(), EditDirection.RELAX
        )
        assert out == []

    def test_condition_disjunct_appears_for_strengthen(self, noise_norms):
        n2 = noise_norms["n2"].norms[0]
        pool = CandidatePool(formulas=(Atom("aroundTheRoad"), Atom("oneKmFarAway")))
        out = generate_candidates(n2, pool, EditDirection.STRENGTHEN)
        assert any(c.cond == Or(Atom("inRoad"), Atom("aroundTheRoad")) for c in out)
        # the deadline conjunct lands on the relax side (reversed
        # obligation polarity, flagged), not here
        tightened = And(Atom("outOfRoad"), Atom("oneKmFarAway"))
        assert not any(c.deadline == tightened for c in out)
        relax = generate_candidates(n2, pool, EditDirection.RELAX)
        assert any(c.deadline == tightened for c in relax)

    def test_sanction_edits_follow_the_direction(self, road_norms):
        n1 = road_norms["n1"].norms[0]
        pool = CandidatePool(sanctions=(Decimal(5), Decimal(20000)))
        relax = generate_candidates(n1, pool, EditDirection.RELAX)
        strengthen = generate_candidates(n1, pool, EditDirection.STRENGTHEN)
        assert [c.sanction for c in relax] == [Decimal(5)]
        assert [c.sanction for c in strengthen] == [Decimal(20000)]

    def test_alter_collects_unknown_edits(self, road_norms):
        n1 = road_norms["n1"].norms[0]
        pool = CandidatePool(formulas=(Atom("firstHalfCompleted"),))
        out = generate_candidates(n1, pool, EditDirection.ALTER)
        assert any(c.cond == Atom("firstHalfCompleted") for c in out)

    def test_deterministic_component_then_pool_order(self, road_norms):
        n1 = road_norms["n1"].norms[0]
        pool = CandidatePool(
            formulas=(Atom("trafficHigh"),), sanctions=(Decimal(5),)
        )
        out = generate_candidates(n1, pool, EditDirection.RELAX)
        assert out == generate_candidates(n1, pool, EditDirection.RELAX)
        # condition edits come first, the sanction edit last
        assert out[0].cond != n1.cond
        assert out[-1].sanction == Decimal(5)
