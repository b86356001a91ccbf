"""Finite transition systems and paths through them.

A system is a finite set of states with propositional labelings, a
distinguished initial state and a transition relation.  Runs of the
system are infinite, so most consumers require the relation to be total
on reachable states; :func:`complete_total` can close deadlocks with
self-loops, but callers must opt in (silent completion would change
which paths exist).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Iterator, Mapping, Optional

from .errors import BudgetExceeded, NotTotal
from .formula import ATOM_NAME_RE, TEMPLATE_ATOM_RE

#: Default ceiling for enumerate_paths (number of paths, not steps).
DEFAULT_PATH_BUDGET = 10**6


@dataclass(frozen=True)
class Defect:
    """A structural problem found by :func:`validate`; data, not an error."""

    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class TransitionSystem:
    """Immutable finite transition system.

    Construction never raises for structural problems (see
    :func:`validate`); queries that need a well-formed system say so in
    their docstring.
    """

    __slots__ = ("atoms", "states", "labels", "init", "edges", "_succ", "_reachable")

    def __init__(
        self,
        atoms: Iterable[str],
        states: Iterable[str],
        labels: Mapping[str, AbstractSet[str]],
        init: str,
        edges: Iterable[tuple[str, str]],
    ) -> None:
        object.__setattr__(self, "atoms", frozenset(atoms))
        object.__setattr__(self, "states", frozenset(states))
        object.__setattr__(
            self,
            "labels",
            {s: frozenset(labels.get(s, frozenset())) for s in self.states},
        )
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "edges", frozenset((a, b) for a, b in edges))
        succ: dict[str, tuple[str, ...]] = {s: () for s in self.states}
        by_src: dict[str, list[str]] = {}
        for a, b in self.edges:
            by_src.setdefault(a, []).append(b)
        for a, dests in by_src.items():
            if a in succ:
                succ[a] = tuple(sorted(dests))
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_reachable", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("TransitionSystem is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return (
            self.atoms == other.atoms
            and self.states == other.states
            and self.labels == other.labels
            and self.init == other.init
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.atoms, self.states, self.init, self.edges))

    def __repr__(self) -> str:
        return (
            f"TransitionSystem(|S|={len(self.states)}, |T|={len(self.edges)}, "
            f"init={self.init!r})"
        )

    def successors(self, state: str) -> tuple[str, ...]:
        """Successor states in lexicographic id order."""
        return self._succ.get(state, ())

    def sorted_states(self) -> list[str]:
        return sorted(self.states)

    def reachable(self) -> frozenset[str]:
        """States reachable from the initial state; always contains it.

        Requires a validated system (edges between declared states).
        """
        cached = self._reachable
        if cached is not None:
            return cached
        seen = {self.init}
        frontier = [self.init]
        while frontier:
            s = frontier.pop()
            for t in self.successors(s):
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        out = frozenset(seen)
        object.__setattr__(self, "_reachable", out)
        return out


@dataclass(frozen=True)
class Path:
    """A finite prefix or a lasso (stem + repeating cycle) of a run.

    ``cycle_start is None`` marks a finite prefix; otherwise the states
    from that index onward form the cycle, whose last state must step
    back to ``states[cycle_start]``.
    """

    states: tuple[str, ...]
    cycle_start: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("a path has at least one state")
        if self.cycle_start is not None and not (
            0 <= self.cycle_start < len(self.states)
        ):
            raise ValueError("cycle_start out of range")

    @property
    def is_lasso(self) -> bool:
        return self.cycle_start is not None

    @property
    def stem(self) -> tuple[str, ...]:
        return self.states if self.cycle_start is None else self.states[: self.cycle_start]

    @property
    def cycle(self) -> tuple[str, ...]:
        return () if self.cycle_start is None else self.states[self.cycle_start :]

    def unrolled(self, cycles: int = 2) -> tuple[str, ...]:
        """Stem plus the cycle repeated ``cycles`` times (identity for
        finite prefixes)."""
        if self.cycle_start is None:
            return self.states
        return self.stem + self.cycle * cycles

    def check_in(self, system: TransitionSystem, from_init: bool = True) -> list[str]:
        """Return human-readable problems (empty when the path is valid
        in ``system``)."""
        problems = []
        for s in self.states:
            if s not in system.states:
                problems.append(f"unknown state {s}")
        if from_init and self.states[0] != system.init:
            problems.append(f"path starts at {self.states[0]}, not init {system.init}")
        for a, b in zip(self.states, self.states[1:]):
            if (a, b) not in system.edges:
                problems.append(f"missing edge {a} -> {b}")
        if self.cycle_start is not None:
            back = (self.states[-1], self.states[self.cycle_start])
            if back not in system.edges:
                problems.append(f"cycle does not close: missing edge {back[0]} -> {back[1]}")
        return problems


def reachable_states(system: TransitionSystem) -> frozenset[str]:
    """States reachable from init (function form of
    :meth:`TransitionSystem.reachable`)."""
    return system.reachable()


def validate(system: TransitionSystem) -> list[Defect]:
    """Structural checks; an empty list means the system is well formed."""
    defects: list[Defect] = []
    if not system.states:
        defects.append(Defect("empty", "system declares no states"))
    if system.init not in system.states:
        defects.append(Defect("unknown state", f"init {system.init!r} is not a declared state"))
    for name in sorted(system.atoms):
        if not (ATOM_NAME_RE.match(name) or TEMPLATE_ATOM_RE.match(name)):
            defects.append(Defect("bad atom name", repr(name)))
    for s in system.sorted_states():
        extra = system.labels[s] - system.atoms
        for a in sorted(extra):
            defects.append(Defect("unknown atom", f"state {s} is labeled with undeclared atom {a}"))
    for a, b in sorted(system.edges):
        if a not in system.states:
            defects.append(Defect("unknown state", f"edge source {a!r}"))
        if b not in system.states:
            defects.append(Defect("unknown state", f"edge target {b!r}"))
    return defects


def deadlocks(system: TransitionSystem) -> list[str]:
    """Reachable states without outgoing edges, sorted."""
    return sorted(s for s in system.reachable() if not system.successors(s))


def is_total(system: TransitionSystem) -> bool:
    """True iff every reachable state has at least one successor."""
    return not deadlocks(system)


def require_total(system: TransitionSystem) -> None:
    dead = deadlocks(system)
    if dead:
        raise NotTotal(dead)


def complete_total(system: TransitionSystem) -> TransitionSystem:
    """Self-loop every reachable deadlock state; identity when already
    total (idempotent, preserves labels and existing edges)."""
    dead = deadlocks(system)
    if not dead:
        return system
    return TransitionSystem(
        system.atoms,
        system.states,
        system.labels,
        system.init,
        system.edges | {(s, s) for s in dead},
    )


def count_paths(system: TransitionSystem, length: int) -> int:
    """Number of paths of exactly ``length`` states from init (dynamic
    programming over out-degrees)."""
    if length <= 0:
        return 0
    current = {system.init: 1}
    for _ in range(length - 1):
        nxt: dict[str, int] = {}
        for s, n in current.items():
            for t in system.successors(s):
                nxt[t] = nxt.get(t, 0) + n
        current = nxt
    return sum(current.values())


def enumerate_paths(
    system: TransitionSystem,
    length: int,
    budget: int = DEFAULT_PATH_BUDGET,
) -> Iterator[Path]:
    """All paths of exactly ``length`` states from init, in lexicographic
    state-id order.  Raises BudgetExceeded up front when the count grows
    past ``budget``."""
    if length <= 0:
        raise ValueError("length must be positive")
    require_total(system)
    total = count_paths(system, length)
    if total > budget:
        raise BudgetExceeded(f"{total} paths of length {length} exceed budget {budget}")

    def walk(prefix: list[str]) -> Iterator[Path]:
        if len(prefix) == length:
            yield Path(tuple(prefix))
            return
        for t in system.successors(prefix[-1]):
            prefix.append(t)
            yield from walk(prefix)
            prefix.pop()

    yield from walk([system.init])


def sample_path(system: TransitionSystem, length: int, seed: int) -> Path:
    """Seeded uniform random walk of exactly ``length`` states from init.

    Uses a dedicated ``random.Random(seed)`` (Mersenne Twister), so the
    same (system, length, seed) always yields the same path.
    """
    import random

    if length <= 0:
        raise ValueError("length must be positive")
    require_total(system)
    rng = random.Random(seed)
    states = [system.init]
    while len(states) < length:
        succ = system.successors(states[-1])
        states.append(succ[rng.randrange(len(succ))])
    return Path(tuple(states))


def sample_lasso(system: TransitionSystem, seed: int) -> Path:
    """Seeded random walk extended until a state repeats, folded into a
    lasso at the first repetition."""
    import random

    require_total(system)
    rng = random.Random(seed)
    states = [system.init]
    seen = {system.init: 0}
    while True:
        succ = system.successors(states[-1])
        nxt = succ[rng.randrange(len(succ))]
        if nxt in seen:
            return Path(tuple(states), cycle_start=seen[nxt])
        seen[nxt] = len(states)
        states.append(nxt)
