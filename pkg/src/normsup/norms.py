"""Conditional norms and their monitor automata.

A norm ``(cond; O(target)|F(target); deadline; sanction)`` detaches when
its condition holds, then persists until it is obeyed, violated, or its
deadline state is reached.  Each norm is monitored by a deterministic
three-state automaton (Idle / Active / Violated) advanced one labeling
at a time.

Lifecycle table (single source of truth, per input labeling L):

* Idle: if L satisfies cond, become Active and immediately apply the
  Active checks on the same L (instantaneous detachment); else stay Idle.
* Active obligation: if L satisfies target -> Complied -> Idle; else if
  L satisfies deadline -> Violated; else stay Active.
* Active prohibition: if L satisfies target -> Violated; else if L
  satisfies deadline -> Withdrawn -> Idle; else stay Active.

The target is checked before the deadline when both hold in one state,
giving obligations the benefit of last-moment compliance; the opposite
tie-break is available as a semantics option for experimentation.
After an instance closes at step j, the condition is re-checked starting
at step j+1, never on the same labeling.

Path-mode monitors keep Violated absorbing (path-set semantics); in
event mode a violation emits a sanctioned event and the monitor resets
to Idle at the next input.

A deadline of ``None`` means *never*: the norm, once detached, stays in
force forever.  An obligation with a ``never`` deadline can never be
violated; :func:`lint_norms` flags this.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace
from decimal import Decimal
from enum import Enum
from typing import AbstractSet, Iterable, Optional, Sequence

from .errors import UnknownAtom, VocabularyMismatch
from .formula import Formula, atoms_of, evaluate, ground_formula, render
from .model import Path, TransitionSystem


class NormKind(Enum):
    OBLIGATION = "obligation"
    PROHIBITION = "prohibition"


class Tiebreak(Enum):
    """Which check wins when target and deadline hold in the same state."""

    TARGET_FIRST = "target-first"
    DEADLINE_FIRST = "deadline-first"


@dataclass(frozen=True)
class Norm:
    """A conditional norm with a numeric (exact-decimal) sanction."""

    id: str
    cond: Formula
    kind: NormKind
    target: Formula
    deadline: Optional[Formula]  # None means "never"
    sanction: Decimal

    def __post_init__(self) -> None:
        if self.sanction < 0:
            raise ValueError(f"norm {self.id}: sanction must be non-negative")

    def atoms(self) -> frozenset[str]:
        out = atoms_of(self.cond) | atoms_of(self.target)
        if self.deadline is not None:
            out |= atoms_of(self.deadline)
        return out

    def replace(self, **changes) -> "Norm":
        return dc_replace(self, **changes)


@dataclass(frozen=True)
class NormSet:
    """An ordered, id-unique collection of norms."""

    id: str
    norms: tuple[Norm, ...]

    def __post_init__(self) -> None:
        ids = [n.id for n in self.norms]
        if len(ids) != len(set(ids)):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate norm id(s): {', '.join(dup)}")

    def __iter__(self):
        return iter(self.norms)

    def __len__(self) -> int:
        return len(self.norms)

    def by_id(self, norm_id: str) -> Norm:
        for n in self.norms:
            if n.id == norm_id:
                return n
        raise KeyError(norm_id)

    def ids(self) -> frozenset[str]:
        return frozenset(n.id for n in self.norms)

    def atoms(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for n in self.norms:
            out |= n.atoms()
        return out


class Lifecycle(Enum):
    IDLE = "idle"
    ACTIVE = "active"
    VIOLATED = "violated"


class MonitorMode(Enum):
    PATH = "path"  # Violated is absorbing
    EVENT = "event"  # Violated emits and resets at the next input


class EventKind(Enum):
    DETACHED = "detached"
    COMPLIED = "complied"
    WITHDRAWN = "withdrawn"
    VIOLATED = "violated"


@dataclass(frozen=True)
class MonitorEvent:
    step: int
    norm_id: str
    kind: EventKind
    sanction: Decimal = Decimal(0)


@dataclass(frozen=True)
class SanctionLedger:
    """All violation charges of a run, in step order."""

    entries: tuple[MonitorEvent, ...] = ()

    @property
    def total(self) -> Decimal:
        return sum((e.sanction for e in self.entries), Decimal(0))

    def extended(self, events: Iterable[MonitorEvent]) -> "SanctionLedger":
        fines = tuple(e for e in events if e.kind is EventKind.VIOLATED)
        return SanctionLedger(self.entries + fines)


def step_lifecycle(
    norm: Norm,
    lifecycle: Lifecycle,
    labels: AbstractSet[str],
    *,
    mode: MonitorMode = MonitorMode.EVENT,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
    step: int = 0,
) -> tuple[Lifecycle, list[MonitorEvent]]:
    """Advance one monitor by one labeling; pure function."""
    events: list[MonitorEvent] = []
    if lifecycle is Lifecycle.VIOLATED:
        if mode is MonitorMode.PATH:
            return Lifecycle.VIOLATED, events
        lifecycle = Lifecycle.IDLE  # event mode: reset, then process this input
    if lifecycle is Lifecycle.IDLE:
        if not evaluate(norm.cond, labels):
            return Lifecycle.IDLE, events
        events.append(MonitorEvent(step, norm.id, EventKind.DETACHED))

    target = evaluate(norm.target, labels)
    deadline = norm.deadline is not None and evaluate(norm.deadline, labels)

    def complied() -> tuple[Lifecycle, list[MonitorEvent]]:
        events.append(MonitorEvent(step, norm.id, EventKind.COMPLIED))
        return Lifecycle.IDLE, events

    def withdrawn() -> tuple[Lifecycle, list[MonitorEvent]]:
        events.append(MonitorEvent(step, norm.id, EventKind.WITHDRAWN))
        return Lifecycle.IDLE, events

    def violated() -> tuple[Lifecycle, list[MonitorEvent]]:
        events.append(MonitorEvent(step, norm.id, EventKind.VIOLATED, norm.sanction))
        return Lifecycle.VIOLATED, events

    if norm.kind is NormKind.OBLIGATION:
        first, second = (
            ((target, complied), (deadline, violated))
            if tiebreak is Tiebreak.TARGET_FIRST
            else ((deadline, violated), (target, complied))
        )
    else:
        first, second = (
            ((target, violated), (deadline, withdrawn))
            if tiebreak is Tiebreak.TARGET_FIRST
            else ((deadline, withdrawn), (target, violated))
        )
    for holds, outcome in (first, second):
        if holds:
            return outcome()
    return Lifecycle.ACTIVE, events


class NormMonitor:
    """Stateful wrapper around :func:`step_lifecycle` for one norm."""

    __slots__ = ("norm", "mode", "tiebreak", "lifecycle", "_step")

    def __init__(
        self,
        norm: Norm,
        mode: MonitorMode = MonitorMode.EVENT,
        tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
    ) -> None:
        self.norm = norm
        self.mode = mode
        self.tiebreak = tiebreak
        self.lifecycle = Lifecycle.IDLE
        self._step = 0

    def feed(self, labels: AbstractSet[str]) -> list[MonitorEvent]:
        """Process one labeling (the first call handles the initial state)."""
        self.lifecycle, events = step_lifecycle(
            self.norm,
            self.lifecycle,
            labels,
            mode=self.mode,
            tiebreak=self.tiebreak,
            step=self._step,
        )
        self._step += 1
        return events

    def peek(self, labels: AbstractSet[str]) -> tuple[Lifecycle, list[MonitorEvent]]:
        """One-step lookahead that does not advance the monitor."""
        return step_lifecycle(
            self.norm,
            self.lifecycle,
            labels,
            mode=self.mode,
            tiebreak=self.tiebreak,
            step=self._step,
        )

    def clone(self) -> "NormMonitor":
        out = NormMonitor(self.norm, self.mode, self.tiebreak)
        out.lifecycle = self.lifecycle
        out._step = self._step
        return out


def monitor_init(
    norm: Norm,
    labels: AbstractSet[str],
    mode: MonitorMode = MonitorMode.EVENT,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> tuple[NormMonitor, list[MonitorEvent]]:
    """Fresh monitor advanced over the initial labeling."""
    monitor = NormMonitor(norm, mode, tiebreak)
    events = monitor.feed(labels)
    return monitor, events


@dataclass(frozen=True)
class TraceResult:
    events: tuple[MonitorEvent, ...]
    final: dict[str, Lifecycle]
    ledger: SanctionLedger


def _labels_along(system: TransitionSystem, path: Path, cycles: int = 2) -> list[frozenset[str]]:
    return [system.labels[s] for s in path.unrolled(cycles)]


def run_trace(
    norms: NormSet | Sequence[Norm],
    system: TransitionSystem,
    path: Path,
    mode: MonitorMode = MonitorMode.EVENT,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> TraceResult:
    """Monitor every norm independently along ``path`` and collect the
    events in step order plus the sanction ledger.

    Lasso paths are evaluated on the stem plus two unrollings of the
    cycle, which suffices for violation detection because the monitor
    state at each lasso position is periodic after one full cycle.
    """
    norm_list = list(norms)
    vocab = system.atoms
    for n in norm_list:
        extra = n.atoms() - vocab
        if extra:
            raise UnknownAtom(extra, vocab)
    bad = [s for s in path.states if s not in system.states]
    if bad:
        raise VocabularyMismatch(f"path state(s) not in system: {', '.join(sorted(set(bad)))}")

    monitors = [NormMonitor(n, mode, tiebreak) for n in norm_list]
    events: list[MonitorEvent] = []
    ledger = SanctionLedger()
    for labels in _labels_along(system, path):
        step_events: list[MonitorEvent] = []
        for m in monitors:
            step_events.extend(m.feed(labels))
        events.extend(step_events)
        ledger = ledger.extended(step_events)
    final = {m.norm.id: m.lifecycle for m in monitors}
    return TraceResult(tuple(events), final, ledger)


def violates_path(
    norm: Norm,
    system: TransitionSystem,
    path: Path,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> bool:
    """True iff path-mode monitoring of ``norm`` along ``path`` reaches
    Violated (lassos unrolled as in :func:`run_trace`)."""
    lifecycle = Lifecycle.IDLE
    for labels in _labels_along(system, path):
        lifecycle, _ = step_lifecycle(
            norm, lifecycle, labels, mode=MonitorMode.PATH, tiebreak=tiebreak
        )
        if lifecycle is Lifecycle.VIOLATED:
            return True
    return False


def violates_any(
    norms: NormSet | Sequence[Norm],
    system: TransitionSystem,
    path: Path,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> bool:
    return any(violates_path(n, system, path, tiebreak) for n in norms)


def ground_norm(norm: Norm, agent: str) -> Norm:
    """Substitute the agent id into ``{a}`` placeholders; the grounded
    norm id is ``<id>@<agent>`` when any substitution happened."""
    cond = ground_formula(norm.cond, agent)
    target = ground_formula(norm.target, agent)
    deadline = None if norm.deadline is None else ground_formula(norm.deadline, agent)
    if (cond, target, deadline) == (norm.cond, norm.target, norm.deadline):
        return norm
    return Norm(f"{norm.id}@{agent}", cond, norm.kind, target, deadline, norm.sanction)


def ground_normset(norms: NormSet, agents: Sequence[str]) -> NormSet:
    """One grounded copy per agent for template norms; non-template norms
    are kept once."""
    out: list[Norm] = []
    seen: set[str] = set()
    for n in norms:
        grounded = [ground_norm(n, a) for a in agents]
        if all(g is n for g in grounded):
            out.append(n)
            continue
        for g in grounded:
            if g.id not in seen:
                seen.add(g.id)
                out.append(g)
    return NormSet(norms.id, tuple(out))


@dataclass(frozen=True)
class Lint:
    norm_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.norm_id}: {self.message}"


def lint_norms(norms: NormSet, vocabulary: Optional[AbstractSet[str]] = None) -> list[Lint]:
    """Non-fatal warnings: unsatisfiable-obligation patterns and unknown
    atoms relative to an optional vocabulary."""
    warnings: list[Lint] = []
    for n in norms:
        if n.kind is NormKind.OBLIGATION and n.deadline is None:
            warnings.append(
                Lint(n.id, "obligation with deadline 'never' can never be violated")
            )
        if vocabulary is not None:
            extra = n.atoms() - frozenset(vocabulary)
            if extra:
                warnings.append(
                    Lint(n.id, "atoms outside the vocabulary: " + ", ".join(sorted(extra)))
                )
    return warnings


def describe_norm(norm: Norm) -> str:
    """One-line human rendering used by reports."""
    z = "F" if norm.kind is NormKind.PROHIBITION else "O"
    dl = "never" if norm.deadline is None else render(norm.deadline)
    return (
        f"{norm.id} = ({render(norm.cond)}; {z}({render(norm.target)}); "
        f"{dl}; {norm.sanction})"
    )
