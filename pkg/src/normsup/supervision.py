"""Deterministic multi-agent simulation under enforced norms, plus the
runtime supervision loop that revises them.

Every agent walks its own copy of a shared world graph; atom names in
the world and in norm templates may carry the ``{a}`` placeholder, which
grounding replaces with the agent id.  The global labeling of a tick is
the union of all agents' grounded state labels, and one event-mode
monitor per grounded norm consumes that sequence.

Agents are memoryless maximizers with a one-step lookahead: each tick,
in fixed agent-id order, an agent scores every successor by intrinsic
utility minus (sanction sensitivity x sanctions the move would trigger)
and takes the argmax, exploring uniformly with probability epsilon.
Under regimentation the violating successors are removed outright; if
nothing survives, the move falls back to the full set and the step is
flagged as a regimentation deadlock.

The supervision loop reviews the run every ``window`` steps.  When the
window's mean objective satisfaction drops below ``theta_low`` it picks
a revision direction from the evidence (failures on violation-free
steps mean the norms over-restrict, so relax; failures co-occurring
with violations mean they under-restrict, so strengthen; mixed evidence
tries both), scores each single-edit candidate by a seeded fresh
rollout, and adopts the best candidate that strictly improves on the
window score.  The whole loop is a pure function of the scenario file:
identical inputs produce byte-identical run logs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from random import Random
from typing import Mapping, Optional, Sequence

from .model import TransitionSystem, require_total, validate as validate_system
from .norms import (
    EventKind,
    MonitorEvent,
    MonitorMode,
    NormMonitor,
    NormSet,
    SanctionLedger,
    ground_normset,
)
from .revision import (
    CandidatePool,
    EditDirection,
    RevisionVerdict,
    classify_revision,
    generate_candidates,
)


class Enforcement(Enum):
    SANCTIONING = "sanctioning"
    REGIMENTATION = "regimentation"


class ObjectiveKind(Enum):
    MAX_CONSECUTIVE = "max_consecutive"
    ALWAYS_BELOW_COUNT = "always_below_count"
    NEVER_ATOM = "never_atom"


class Scope(Enum):
    PER_AGENT = "per_agent"
    GLOBAL = "global"


@dataclass(frozen=True)
class Objective:
    """A monitorable stand-in for a system-level goal.

    ``max_consecutive``: every agent's longest consecutive run of the
    atom stays within ``limit`` steps.  ``always_below_count``: fewer
    than ``threshold`` agents carry the atom at any step.
    ``never_atom``: no agent ever carries the atom.
    """

    id: str
    kind: ObjectiveKind
    atom: str  # may contain the {a} placeholder
    limit: int = 1  # max_consecutive
    threshold: int = 0  # always_below_count
    scope: Scope = Scope.GLOBAL

    def __post_init__(self) -> None:
        if self.kind is ObjectiveKind.MAX_CONSECUTIVE and self.limit < 1:
            raise ValueError(f"objective {self.id}: limit must be >= 1")
        if self.kind is ObjectiveKind.ALWAYS_BELOW_COUNT and self.threshold < 0:
            raise ValueError(f"objective {self.id}: threshold must be >= 0")


@dataclass(frozen=True)
class AgentSpec:
    """Policy parameters of one agent."""

    id: str
    sanction_sensitivity: float = 1.0  # weight of fines against utility
    epsilon: float = 0.0  # exploration rate
    utilities: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sanction_sensitivity < 0:
            raise ValueError(f"agent {self.id}: sanction sensitivity must be >= 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"agent {self.id}: epsilon must be within [0, 1]")


@dataclass(frozen=True)
class Scenario:
    id: str
    world: TransitionSystem  # template; atoms may carry {a}
    agents: tuple[AgentSpec, ...]
    norms: NormSet  # templates, grounded per agent
    objectives: tuple[Objective, ...]
    pool: CandidatePool
    enforcement: Enforcement = Enforcement.SANCTIONING
    seed: int = 0
    horizon: int = 0
    window: int = 1
    theta_low: float = 0.0
    theta_high: float = 1.0
    minutes_per_step: int = 1

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.window > max(self.horizon, 1):
            raise ValueError("window must not exceed the horizon")
        if not self.theta_low <= self.theta_high:
            raise ValueError("theta_low must not exceed theta_high")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")

    def agent_ids(self) -> list[str]:
        return [a.id for a in self.agents]


def validate_scenario(scenario: Scenario) -> list[str]:
    """Human-readable scenario defects (empty when well formed)."""
    problems = [str(d) for d in validate_system(scenario.world)]
    ids = scenario.agent_ids()
    if len(ids) != len(set(ids)):
        problems.append("duplicate agent ids")
    if not ids:
        problems.append("scenario declares no agents")
    grounded_vocab = _grounded_vocabulary(scenario)
    grounded = ground_normset(scenario.norms, ids)
    for n in grounded:
        extra = n.atoms() - grounded_vocab
        if extra:
            problems.append(
                f"norm {n.id} uses atoms outside the grounded vocabulary: "
                + ", ".join(sorted(extra))
            )
    for agent in scenario.agents:
        unknown = set(agent.utilities) - scenario.world.states
        if unknown:
            problems.append(
                f"agent {agent.id} scores unknown states: " + ", ".join(sorted(unknown))
            )
    return problems


def _grounded_vocabulary(scenario: Scenario) -> frozenset[str]:
    out: set[str] = set()
    for atom in scenario.world.atoms:
        if "{a}" in atom:
            out.update(atom.replace("{a}", a) for a in scenario.agent_ids())
        else:
            out.add(atom)
    return frozenset(out)


def ground_world(world: TransitionSystem, agent: str) -> TransitionSystem:
    """The world template with every ``{a}`` atom grounded for one agent."""
    sub = lambda a: a.replace("{a}", agent)  # noqa: E731
    return TransitionSystem(
        {sub(a) for a in world.atoms},
        world.states,
        {s: {sub(a) for a in world.labels[s]} for s in world.states},
        world.init,
        world.edges,
    )


# ---------------------------------------------------------------------------
# run logs


@dataclass(frozen=True)
class AgentStep:
    """One agent's slice of a step record.

    Actions are successor choices, so ``action`` always names the same
    state as ``state``; both are logged to keep records self-describing.
    """

    action: str
    state: str
    labels: frozenset[str]


@dataclass(frozen=True)
class RevisionDecision:
    window_index: int
    window_score: float
    directions: tuple[EditDirection, ...]
    considered: int
    adopted: Optional[NormSet]
    rollout_score: Optional[float]
    verdict: Optional[RevisionVerdict]


@dataclass(frozen=True)
class StepRecord:
    step: int
    agents: dict[str, AgentStep]
    events: tuple[MonitorEvent, ...]
    flags: dict[str, bool]  # per-objective step satisfaction
    normset_id: str
    deadlock: bool = False
    revision: Optional[RevisionDecision] = None

    def global_labels(self) -> frozenset[str]:
        out: set[str] = set()
        for a in self.agents.values():
            out |= a.labels
        return frozenset(out)


@dataclass
class RunLog:
    scenario_id: str
    seed: int
    enforcement: Enforcement
    records: list[StepRecord]
    objective_rates: dict[str, float] = field(default_factory=dict)
    ledger: SanctionLedger = field(default_factory=SanctionLedger)
    revisions: list[RevisionDecision] = field(default_factory=list)
    final_norms: Optional[NormSet] = None
    deadlock_steps: int = 0


# ---------------------------------------------------------------------------
# the simulator


def agent_choose(
    agent: AgentSpec,
    options: Sequence[tuple[str, frozenset[str]]],
    monitors: Sequence[NormMonitor],
    enforcement: Enforcement,
    rng: Random,
) -> tuple[str, bool]:
    """Pick a successor from ``options`` (successor id, global labels if
    chosen), sorted by successor id.

    Returns the choice and a deadlock flag (regimentation removed every
    option and had to fall back to the full set).
    """

    def fine(labels: frozenset[str]) -> Decimal:
        total = Decimal(0)
        for m in monitors:
            _, events = m.peek(labels)
            for e in events:
                if e.kind is EventKind.VIOLATED:
                    total += e.sanction
        return total

    scored = [(succ, agent.utilities.get(succ, 0.0), fine(labels)) for succ, labels in options]
    deadlock = False
    if enforcement is Enforcement.REGIMENTATION:
        enabled = [o for o in scored if o[2] == 0]
        if not enabled:
            deadlock = True
            enabled = scored
    else:
        enabled = scored
    if rng.random() < agent.epsilon:
        succ, _, _ = enabled[rng.randrange(len(enabled))]
        return succ, deadlock
    best = enabled[0]
    best_score = best[1] - agent.sanction_sensitivity * float(best[2])
    for option in enabled[1:]:
        score = option[1] - agent.sanction_sensitivity * float(option[2])
        if score > best_score:
            best, best_score = option, score
    return best[0], deadlock


class _Simulation:
    """Mutable episode state; one instance per (rollout or main) run."""

    def __init__(
        self,
        scenario: Scenario,
        enforced: NormSet,
        seed: int,
        positions: Optional[dict[str, str]] = None,
    ) -> None:
        self.scenario = scenario
        self.rng = Random(seed)
        self.agent_ids = sorted(scenario.agent_ids())
        self.agents = {a.id: a for a in scenario.agents}
        self.positions = dict(positions) if positions else {
            a: scenario.world.init for a in self.agent_ids
        }
        self.ground_labels = {
            a: {s: frozenset(at.replace("{a}", a) for at in scenario.world.labels[s])
                for s in scenario.world.states}
            for a in self.agent_ids
        }
        self.deadlocks = 0
        self.ledger = SanctionLedger()
        self.consec: dict[tuple[str, str], int] = {}
        self.set_norms(enforced)

    def set_norms(self, enforced: NormSet) -> None:
        self.enforced = enforced
        grounded = ground_normset(enforced, self.agent_ids)
        self.monitors = [NormMonitor(n, MonitorMode.EVENT) for n in grounded]

    def global_labels(self, positions: Mapping[str, str]) -> frozenset[str]:
        out: set[str] = set()
        for a in self.agent_ids:
            out |= self.ground_labels[a][positions[a]]
        return frozenset(out)

    def snapshot(self) -> dict[str, str]:
        return dict(self.positions)

    def _flags(self, step: int) -> dict[str, bool]:
        """Per-step objective satisfaction, with consecutive-run counters
        carried over the whole run so straddling runs are not missed."""
        flags = {}
        for obj in self.scenario.objectives:
            if obj.kind is ObjectiveKind.MAX_CONSECUTIVE:
                ok = True
                for a in self.agent_ids:
                    atom = obj.atom.replace("{a}", a)
                    key = (obj.id, a)
                    if atom in self.ground_labels[a][self.positions[a]]:
                        self.consec[key] = self.consec.get(key, 0) + 1
                    else:
                        self.consec[key] = 0
                    if self.consec[key] > obj.limit:
                        ok = False
                flags[obj.id] = ok
            else:
                count = sum(
                    1
                    for a in self.agent_ids
                    if obj.atom.replace("{a}", a)
                    in self.ground_labels[a][self.positions[a]]
                )
                if obj.kind is ObjectiveKind.ALWAYS_BELOW_COUNT:
                    flags[obj.id] = count < obj.threshold
                else:
                    flags[obj.id] = count == 0
        return flags

    def initial_record(self) -> StepRecord:
        labels = self.global_labels(self.positions)
        events: list[MonitorEvent] = []
        for m in self.monitors:
            events.extend(m.feed(labels))
        self.ledger = self.ledger.extended(events)
        return StepRecord(
            0,
            {
                a: AgentStep(self.positions[a], self.positions[a], self.ground_labels[a][self.positions[a]])
                for a in self.agent_ids
            },
            tuple(events),
            self._flags(0),
            self.enforced.id,
        )

    def step(self, step_index: int) -> StepRecord:
        world = self.scenario.world
        new_positions = dict(self.positions)
        deadlock = False
        for a in self.agent_ids:
            options = []
            for succ in world.successors(new_positions[a]):
                trial = dict(new_positions)
                trial[a] = succ
                options.append((succ, self.global_labels(trial)))
            choice, dl = agent_choose(
                self.agents[a], options, self.monitors, self.scenario.enforcement, self.rng
            )
            deadlock = deadlock or dl
            new_positions[a] = choice
        self.positions = new_positions
        if deadlock:
            self.deadlocks += 1
        labels = self.global_labels(self.positions)
        events: list[MonitorEvent] = []
        for m in self.monitors:
            events.extend(m.feed(labels))
        events = [replace(e, step=step_index) for e in events]
        self.ledger = self.ledger.extended(events)
        return StepRecord(
            step_index,
            {
                a: AgentStep(self.positions[a], self.positions[a], self.ground_labels[a][self.positions[a]])
                for a in self.agent_ids
            },
            tuple(events),
            self._flags(step_index),
            self.enforced.id,
            deadlock=deadlock,
        )


def evaluate_objective(
    objective: Objective, records: Sequence[StepRecord], agent_ids: Sequence[str]
) -> float:
    """Satisfaction rate of one objective over a record slice.

    ``max_consecutive`` rates agents (fraction whose longest run within
    the slice stays within the limit); the counting objectives rate
    steps.  An empty slice is vacuously satisfied.
    """
    if not records:
        return 1.0
    if objective.kind is ObjectiveKind.MAX_CONSECUTIVE:
        ok = 0
        for a in agent_ids:
            atom = objective.atom.replace("{a}", a)
            run = longest = 0
            for r in records:
                if atom in r.agents[a].labels:
                    run += 1
                    longest = max(longest, run)
                else:
                    run = 0
            if longest <= objective.limit:
                ok += 1
        return ok / len(agent_ids) if agent_ids else 1.0
    good = 0
    for r in records:
        count = sum(
            1 for a in agent_ids if objective.atom.replace("{a}", a) in r.agents[a].labels
        )
        if objective.kind is ObjectiveKind.ALWAYS_BELOW_COUNT:
            good += count < objective.threshold
        else:
            good += count == 0
    return good / len(records)


def mean_objective_score(
    scenario: Scenario, records: Sequence[StepRecord]
) -> float:
    if not scenario.objectives:
        return 1.0
    agent_ids = sorted(scenario.agent_ids())
    return sum(
        evaluate_objective(o, records, agent_ids) for o in scenario.objectives
    ) / len(scenario.objectives)


def stable_hash(*parts) -> int:
    """Deterministic 64-bit hash used to derive rollout seeds."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _prepare(scenario: Scenario, enforced: Optional[NormSet]) -> NormSet:
    problems = validate_scenario(scenario)
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))
    require_total(scenario.world)
    return enforced if enforced is not None else scenario.norms


def run_episode(
    scenario: Scenario,
    enforced: Optional[NormSet] = None,
    seed: Optional[int] = None,
) -> RunLog:
    """One plain episode (no supervision) of ``scenario.horizon`` steps."""
    enforced = _prepare(scenario, enforced)
    seed = scenario.seed if seed is None else seed
    sim = _Simulation(scenario, enforced, seed)
    records = [sim.initial_record()]
    for i in range(1, scenario.horizon + 1):
        records.append(sim.step(i))
    return _finish(scenario, seed, sim, records, [])


def _finish(scenario, seed, sim, records, revisions) -> RunLog:
    agent_ids = sorted(scenario.agent_ids())
    rates = {o.id: evaluate_objective(o, records, agent_ids) for o in scenario.objectives}
    return RunLog(
        scenario_id=scenario.id,
        seed=seed,
        enforcement=scenario.enforcement,
        records=records,
        objective_rates=rates,
        ledger=sim.ledger,
        revisions=revisions,
        final_norms=sim.enforced,
        deadlock_steps=sim.deadlocks,
    )


def _select_directions(window: Sequence[StepRecord]) -> tuple[EditDirection, ...]:
    failing = [r for r in window if not all(r.flags.values())]
    if not failing:
        return (EditDirection.RELAX, EditDirection.STRENGTHEN)
    with_fines = [r for r in failing if any(e.kind is EventKind.VIOLATED for e in r.events)]
    if not with_fines:
        return (EditDirection.RELAX,)
    if len(with_fines) == len(failing):
        return (EditDirection.STRENGTHEN,)
    return (EditDirection.RELAX, EditDirection.STRENGTHEN)


def _enumerate_candidates(
    enforced: NormSet, pool: CandidatePool, directions: Sequence[EditDirection]
) -> list[NormSet]:
    """Candidate sets in deterministic order: direction, then norm id,
    then the generate_candidates order; duplicates dropped."""
    out: list[NormSet] = []
    seen: set[tuple] = set()
    for direction in directions:
        for norm in sorted(enforced, key=lambda n: n.id):
            for edited in generate_candidates(norm, pool, direction):
                candidate = NormSet(
                    enforced.id,
                    tuple(edited if n.id == norm.id else n for n in enforced),
                )
                key = tuple(
                    (n.id, n.cond, n.kind, n.target, n.deadline, n.sanction)
                    for n in candidate
                )
                if key in seen:
                    continue
                seen.add(key)
                out.append(candidate)
    return out


@dataclass(frozen=True)
class SupervisionResult:
    final_norms: NormSet
    log: RunLog
    decisions: tuple[RevisionDecision, ...]


def supervise(scenario: Scenario) -> SupervisionResult:
    """Run the full supervision loop over one episode.

    Reviews fire after every ``window`` steps; candidate rollouts run on
    forked copies of the live simulation with seeds derived by
    ``stable_hash(seed, window_index, candidate_index)``, so the main
    run's random stream is untouched by the search.
    """
    enforced = _prepare(scenario, None)
    sim = _Simulation(scenario, enforced, scenario.seed)
    records = [sim.initial_record()]
    revisions: list[RevisionDecision] = []
    window_index = 0
    for i in range(1, scenario.horizon + 1):
        records.append(sim.step(i))
        if i % scenario.window != 0:
            continue
        window_index += 1
        window = records[i - scenario.window + 1 : i + 1]
        score = mean_objective_score(scenario, window)
        if score >= scenario.theta_low:
            continue
        directions = _select_directions(window)
        candidates = _enumerate_candidates(sim.enforced, scenario.pool, directions)
        positions = sim.snapshot()
        best: Optional[NormSet] = None
        best_score = score  # adoption requires a strict improvement
        for ci, candidate in enumerate(candidates):
            roll_seed = stable_hash(scenario.seed, window_index, ci)
            roll = _Simulation(scenario, candidate, roll_seed, positions)
            roll_records = [roll.step(j) for j in range(1, scenario.window + 1)]
            roll_score = mean_objective_score(scenario, roll_records)
            if roll_score > best_score:
                best, best_score = candidate, roll_score
        decision = RevisionDecision(
            window_index=window_index,
            window_score=score,
            directions=tuple(directions),
            considered=len(candidates),
            adopted=best,
            rollout_score=best_score if best is not None else None,
            verdict=(
                _template_verdict(scenario, sim.enforced, best)
                if best is not None
                else None
            ),
        )
        revisions.append(decision)
        records[-1] = replace(records[-1], revision=decision)
        if best is not None:
            # Fresh idle monitors for the revised set; they first see the
            # labeling of the next step, exactly like a log replay does.
            sim.set_norms(best)
    log = _finish(scenario, scenario.seed, sim, records, revisions)
    return SupervisionResult(sim.enforced, log, tuple(revisions))


def _template_verdict(
    scenario: Scenario, before: NormSet, after: NormSet
) -> RevisionVerdict:
    """Classification of an adopted revision on the single-agent
    grounding of the world (every agent's copy is isomorphic)."""
    agent = sorted(scenario.agent_ids())[0]
    world = ground_world(scenario.world, agent)
    before_g = ground_normset(before, [agent])
    after_g = ground_normset(after, [agent])
    return classify_revision(world, before_g, after_g)
