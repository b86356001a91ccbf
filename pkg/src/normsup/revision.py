"""Classifying replacements of one norm set by another.

The semantic route compares violation sets exactly: a revision relaxes
the enforced set when the paths violating the new set form a strict
subset of the paths violating the old one, strengthens it in the mirror
case, is equivalent when both inclusions hold, and is incomparable
otherwise (equivalent and incomparable both count as plain alterations
at presentation level, but the verdict keeps them apart).

Containment is decided on the product of the system with path-mode
monitors for both sets: nodes violating the allegedly-larger set are
made terminal, and a counterexample exists exactly when some surviving
reachable node with a violated smaller-set monitor lies on a cycle.
Witnesses are returned as stem+cycle lassos, preferring shortest stem,
then shortest cycle, with breadth-first lexicographic tie-breaking.

:func:`oracle_compare` re-derives the same four-way relation by brute
force over concrete finite paths, stopping each branch at the first
repeated (state, monitor-vector) pair; a repeat guarantees an infinite
extension with unchanged verdicts because violated monitors are
absorbing and monitors are deterministic.  The classifier and the
oracle share nothing but the monitor step semantics.

The syntactic route gives cheap sufficient conditions on a single norm
pair: a stricter condition, a stricter prohibited (or less strict
obliged) target, and a less strict prohibition deadline each relax the
norm.  For an obligation the deadline polarity is deliberately
reversed -- a deadline holding in more states arrives earlier and yields
more deadline violations -- and the verdict carries a deviation flag so
downstream consumers can tell these cases apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Optional

from .engine import explore_product
from .errors import BudgetExceeded, VocabularyMismatch
from .formula import FALSE, Formula, And, Or, Strictness, compare_formulas
from .model import Path, TransitionSystem, require_total
from .norms import (
    Lifecycle,
    MonitorMode,
    Norm,
    NormKind,
    NormSet,
    Tiebreak,
    step_lifecycle,
)


class Relation(Enum):
    RELAXATION = "relaxation"
    STRENGTHENING = "strengthening"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


class SanctionChange(Enum):
    INCREASED = "increased"
    DECREASED = "decreased"
    MIXED = "mixed"
    UNCHANGED = "unchanged"
    NOT_COMPARABLE = "not_comparable"


@dataclass(frozen=True)
class RevisionVerdict:
    """Outcome of comparing an original set N with a revision R."""

    relation: Relation
    witness_in_R_not_N: Optional[Path]
    witness_in_N_not_R: Optional[Path]
    sanction_change: SanctionChange

    def __post_init__(self) -> None:
        r, wr, wn = self.relation, self.witness_in_R_not_N, self.witness_in_N_not_R
        ok = {
            Relation.RELAXATION: wr is None and wn is not None,
            Relation.STRENGTHENING: wr is not None and wn is None,
            Relation.EQUIVALENT: wr is None and wn is None,
            Relation.INCOMPARABLE: wr is not None and wn is not None,
        }[r]
        if not ok:
            raise ValueError(f"witnesses inconsistent with relation {r}")


@dataclass(frozen=True)
class ContainmentResult:
    holds: bool
    counterexample: Optional[Path]


class SyntacticDirection(Enum):
    RELAXATION_OR_EQUIVALENT = "relaxation_or_equivalent"
    STRENGTHENING_OR_EQUIVALENT = "strengthening_or_equivalent"
    UNKNOWN = "unknown"


class SyntacticCase(Enum):
    COND_CASE = "cond"
    TARGET_CASE = "target"
    DEADLINE_CASE = "deadline"


@dataclass(frozen=True)
class SyntacticVerdict:
    direction: SyntacticDirection
    fired_cases: frozenset[SyntacticCase]
    deviation: bool = False  # obligation-deadline polarity reversal applied

    def __post_init__(self) -> None:
        if self.direction is SyntacticDirection.UNKNOWN and self.fired_cases:
            raise ValueError("unknown verdicts carry no fired cases")


def _check_vocab(system: TransitionSystem, *sets: NormSet) -> None:
    extra: set[str] = set()
    for ns in sets:
        extra |= ns.atoms() - system.atoms
    if extra:
        raise VocabularyMismatch(
            "norm atoms outside the system vocabulary: " + ", ".join(sorted(extra))
        )


def _cyclic_nodes(adj: list[list[int]], alive: list[bool]) -> list[bool]:
    """Nodes on some cycle of the subgraph induced by ``alive`` (nodes in
    a strongly connected component of size > 1, or with a self-loop)."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    cyclic = [False] * n
    counter = 0
    for root in range(n):
        if not alive[root] or index[root] != -1:
            continue
        work: list[list[int]] = [[root, 0]]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            descended = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if not alive[w]:
                    continue
                if index[w] == -1:
                    work[-1][1] = pi
                    work.append([w, 0])
                    descended = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1:
                    for w in comp:
                        cyclic[w] = True
                elif v in adj[v]:
                    cyclic[v] = True
    return cyclic


def _bfs(adj: list[list[int]], alive: list[bool], start: int):
    dist = {start: 0}
    parent: dict[int, int] = {}
    queue = [start]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for v in adj[u]:
            if alive[v] and v not in dist:
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return dist, parent, queue


def _shortest_cycle(adj: list[list[int]], alive: list[bool], u: int) -> list[int]:
    """Shortest node cycle [u, ..] returning to ``u`` (BFS, successor
    order breaks ties)."""
    if u in adj[u]:
        return [u]
    dist = {u: 0}
    parent: dict[int, int] = {}
    queue = [u]
    qi = 0
    while qi < len(queue):
        x = queue[qi]
        qi += 1
        for v in adj[x]:
            if not alive[v]:
                continue
            if v == u:
                cycle = [x]
                while cycle[-1] != u:
                    cycle.append(parent[cycle[-1]])
                cycle.reverse()
                return cycle  # starts at u, ends at predecessor of u
            if v not in dist:
                dist[v] = dist[x] + 1
                parent[v] = x
                queue.append(v)
    raise AssertionError("no cycle through a node reported cyclic")


def viol_contains(
    system: TransitionSystem,
    larger: NormSet,
    smaller: NormSet,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> ContainmentResult:
    """Decide whether every path violating ``smaller`` also violates
    ``larger``; on failure return a lasso counterexample violating
    ``smaller`` but no norm of ``larger``.

    Requires a valid, total system whose vocabulary covers both sets.
    """
    require_total(system)
    _check_vocab(system, larger, smaller)
    big = list(larger)
    small = list(smaller)
    norms = big + small
    product = explore_product(
        system, norms, kill_ids=range(len(big)), tiebreak=tiebreak
    )
    n_nodes = len(product.nodes)
    alive = [not product.is_killed(i) for i in range(n_nodes)]
    adj = product.adjacency()
    cyclic = _cyclic_nodes(adj, alive)
    small_slice = range(len(big), len(norms))

    def flagged(i: int) -> bool:
        codes = product.lifecycle_codes(i)
        return any(codes[j] == 2 for j in small_slice)

    candidates = [i for i in range(n_nodes) if alive[i] and cyclic[i] and flagged(i)]
    if not alive[0] or not candidates:
        return ContainmentResult(True, None)

    dist, parent, _ = _bfs(adj, alive, 0)
    reachable = [i for i in candidates if i in dist]
    if not reachable:
        return ContainmentResult(True, None)
    target = min(reachable, key=lambda i: (dist[i], i))

    stem_nodes = [target]
    while stem_nodes[-1] != 0:
        stem_nodes.append(parent[stem_nodes[-1]])
    stem_nodes.reverse()
    cycle_nodes = _shortest_cycle(adj, alive, target)
    states = tuple(
        product.state_of(i) for i in stem_nodes[:-1] + cycle_nodes
    )
    witness = Path(states, cycle_start=len(stem_nodes) - 1)
    return ContainmentResult(False, witness)


def _relate(
    after_in_before: ContainmentResult, before_in_after: ContainmentResult
) -> tuple[Relation, Optional[Path], Optional[Path]]:
    """Map the two containments to the four-way relation plus witnesses.

    ``after_in_before`` decides Viol(R) subset-of Viol(N); its
    counterexample violates R but not N.
    """
    c1, c2 = after_in_before.holds, before_in_after.holds
    w_r_not_n = after_in_before.counterexample
    w_n_not_r = before_in_after.counterexample
    if c1 and c2:
        return Relation.EQUIVALENT, None, None
    if c1:
        return Relation.RELAXATION, None, w_n_not_r
    if c2:
        return Relation.STRENGTHENING, w_r_not_n, None
    return Relation.INCOMPARABLE, w_r_not_n, w_n_not_r


def compare_sanctions(before: NormSet, after: NormSet) -> SanctionChange:
    """Component-wise comparison of sanctions of norms matched by id."""
    if before.ids() != after.ids():
        return SanctionChange.NOT_COMPARABLE
    ups = downs = 0
    for n in before:
        delta = after.by_id(n.id).sanction - n.sanction
        if delta > 0:
            ups += 1
        elif delta < 0:
            downs += 1
    if ups and downs:
        return SanctionChange.MIXED
    if ups:
        return SanctionChange.INCREASED
    if downs:
        return SanctionChange.DECREASED
    return SanctionChange.UNCHANGED


def classify_revision(
    system: TransitionSystem,
    before: NormSet,
    after: NormSet,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> RevisionVerdict:
    """Exact classification of the revision ``before -> after`` over the
    paths of ``system``."""
    after_in_before = viol_contains(system, before, after, tiebreak)
    before_in_after = viol_contains(system, after, before, tiebreak)
    relation, w_r, w_n = _relate(after_in_before, before_in_after)
    return RevisionVerdict(relation, w_r, w_n, compare_sanctions(before, after))


#: Desk-scale ceiling on the (states x monitor-vectors) bound for the oracle.
ORACLE_NODE_LIMIT = 5000
ORACLE_STEP_BUDGET = 5_000_000


def oracle_compare(
    system: TransitionSystem,
    before: NormSet,
    after: NormSet,
    horizon: Optional[int] = None,
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
    step_budget: int = ORACLE_STEP_BUDGET,
) -> RevisionVerdict:
    """Brute-force re-derivation of :func:`classify_revision`.

    Enumerates concrete paths from the initial state depth-first in
    lexicographic successor order, advancing one path-mode monitor per
    norm of both sets.  A branch ends when its (state, monitor-vector)
    pair repeats: looping the repeated segment forever extends the run
    to an infinite path on which exactly the already-violated norms are
    violated.  The first such run violating one set but not the other
    becomes that direction's witness lasso.
    """
    require_total(system)
    _check_vocab(system, before, after)
    norms = list(before) + list(after)
    k = len(norms)
    bound = len(system.states) * (3**k)
    if horizon is None:
        if bound > ORACLE_NODE_LIMIT:
            raise BudgetExceeded(
                f"oracle bound {bound} exceeds desk-scale limit {ORACLE_NODE_LIMIT}"
            )
        horizon = 2 * bound
    n_before = len(before.norms)

    def advance(vec, labels):
        out = []
        for n, life in zip(norms, vec):
            nxt, _ = step_lifecycle(
                n, life, labels, mode=MonitorMode.PATH, tiebreak=tiebreak
            )
            out.append(nxt)
        return tuple(out)

    def flags(vec) -> tuple[bool, bool]:
        viol_before = any(v is Lifecycle.VIOLATED for v in vec[:n_before])
        viol_after = any(v is Lifecycle.VIOLATED for v in vec[n_before:])
        return viol_before, viol_after

    labels = system.labels
    init_vec = advance(tuple(Lifecycle.IDLE for _ in norms), labels[system.init])
    root = (system.init, init_vec)
    on_path = {root: 0}
    path_states = [system.init]
    # frame: [state, vec, successors, next_index]
    frames = [[system.init, init_vec, system.successors(system.init), 0]]
    found_r_not_n: Optional[Path] = None
    found_n_not_r: Optional[Path] = None
    steps = 0

    while frames:
        frame = frames[-1]
        state, vec, succs, idx = frame
        if idx >= len(succs):
            frames.pop()
            del on_path[(state, vec)]
            path_states.pop()
            continue
        frame[3] += 1
        steps += 1
        if steps > step_budget:
            raise BudgetExceeded(f"oracle step budget {step_budget} exceeded")
        nxt = succs[idx]
        nvec = advance(vec, labels[nxt])
        node = (nxt, nvec)
        first = on_path.get(node)
        if first is not None:
            viol_b, viol_a = flags(nvec)
            if viol_a and not viol_b and found_r_not_n is None:
                found_r_not_n = Path(tuple(path_states), cycle_start=first)
            if viol_b and not viol_a and found_n_not_r is None:
                found_n_not_r = Path(tuple(path_states), cycle_start=first)
            if found_r_not_n is not None and found_n_not_r is not None:
                break
            continue
        if len(path_states) >= horizon:
            continue
        on_path[node] = len(path_states)
        path_states.append(nxt)
        frames.append([nxt, nvec, system.successors(nxt), 0])

    c1 = ContainmentResult(found_r_not_n is None, found_r_not_n)
    c2 = ContainmentResult(found_n_not_r is None, found_n_not_r)
    relation, w_r, w_n = _relate(c1, c2)
    return RevisionVerdict(relation, w_r, w_n, compare_sanctions(before, after))


_RELAX = 1
_STRENGTHEN = -1
_NEUTRAL = 0


def _deadline_formula(norm: Norm) -> Formula:
    return FALSE if norm.deadline is None else norm.deadline


def syntactic_classify(
    n1: Norm,
    n2: Norm,
    system: Optional[TransitionSystem] = None,
) -> SyntacticVerdict:
    """Sufficient per-component check of ``n2`` against ``n1``.

    Strictness is model-relative when a system is given, otherwise the
    model-independent ordering through implication validity is used.
    All changed components must pull in the same direction; any
    incomparable component, mixed pulls, or a kind change yields
    Unknown.  The obligation-deadline reversal (see module docstring)
    sets the ``deviation`` flag.
    """
    if n1.kind is not n2.kind:
        return SyntacticVerdict(SyntacticDirection.UNKNOWN, frozenset())

    obligation = n1.kind is NormKind.OBLIGATION
    contributions: list[tuple[SyntacticCase, int, bool]] = []

    rel = compare_formulas(n2.cond, n1.cond, system)
    if rel is Strictness.INCOMPARABLE:
        return SyntacticVerdict(SyntacticDirection.UNKNOWN, frozenset())
    if rel is not Strictness.EQUIVALENT:
        pull = _RELAX if rel is Strictness.STRICTLY_STRICTER else _STRENGTHEN
        contributions.append((SyntacticCase.COND_CASE, pull, False))

    rel = compare_formulas(n2.target, n1.target, system)
    if rel is Strictness.INCOMPARABLE:
        return SyntacticVerdict(SyntacticDirection.UNKNOWN, frozenset())
    if rel is not Strictness.EQUIVALENT:
        stricter = rel is Strictness.STRICTLY_STRICTER
        # Stricter prohibited targets forbid less; stricter obliged
        # targets demand more.
        pull = (_STRENGTHEN if stricter else _RELAX) if obligation else (
            _RELAX if stricter else _STRENGTHEN
        )
        contributions.append((SyntacticCase.TARGET_CASE, pull, False))

    rel = compare_formulas(_deadline_formula(n2), _deadline_formula(n1), system)
    if rel is Strictness.INCOMPARABLE:
        return SyntacticVerdict(SyntacticDirection.UNKNOWN, frozenset())
    if rel is not Strictness.EQUIVALENT:
        stricter = rel is Strictness.STRICTLY_STRICTER
        if obligation:
            # Reversed polarity: an earlier (less strict) deadline means
            # more unmet-deadline violations, hence a strengthening.
            pull = _RELAX if stricter else _STRENGTHEN
            contributions.append((SyntacticCase.DEADLINE_CASE, pull, True))
        else:
            pull = _STRENGTHEN if stricter else _RELAX
            contributions.append((SyntacticCase.DEADLINE_CASE, pull, False))

    pulls = {p for _, p, _ in contributions}
    if _RELAX in pulls and _STRENGTHEN in pulls:
        return SyntacticVerdict(SyntacticDirection.UNKNOWN, frozenset())
    fired = frozenset(c for c, _, _ in contributions)
    deviation = any(dev for _, _, dev in contributions)
    if _STRENGTHEN in pulls:
        return SyntacticVerdict(
            SyntacticDirection.STRENGTHENING_OR_EQUIVALENT, fired, deviation
        )
    # All components equivalent also lands here: an equal revision is
    # trivially "relaxation or equivalent".
    return SyntacticVerdict(
        SyntacticDirection.RELAXATION_OR_EQUIVALENT, fired, deviation
    )


@dataclass(frozen=True)
class CandidatePool:
    """Raw material for single-component edits."""

    formulas: tuple[Formula, ...] = ()
    sanctions: tuple[Decimal, ...] = ()


class EditDirection(Enum):
    RELAX = "relax"
    STRENGTHEN = "strengthen"
    ALTER = "alter"


def _component_edits(norm: Norm, component: str, p: Formula) -> list[Norm]:
    """Replace / conjoin / disjoin one component with a pool formula."""
    if component == "deadline":
        current = norm.deadline
        variants: list[Optional[Formula]] = [p]
        if current is not None:
            variants += [And(current, p), Or(current, p)]
        return [norm.replace(deadline=v) for v in variants]
    current = getattr(norm, component)
    variants = [p, And(current, p), Or(current, p)]
    return [norm.replace(**{component: v}) for v in variants]


def _norm_key(n: Norm):
    return (n.cond, n.kind, n.target, n.deadline, n.sanction)


def generate_candidates(
    norm: Norm,
    pool: CandidatePool,
    direction: EditDirection,
    system: Optional[TransitionSystem] = None,
) -> list[Norm]:
    """Single-component edits of ``norm`` matching ``direction``.

    Formula edits are kept when :func:`syntactic_classify` fires at
    least one case in the requested direction (Alter keeps the Unknown
    ones); sanction edits are kept when the new amount moves the right
    way.  Deterministic order: condition, target, deadline, sanction;
    within a component, pool order; within a pool entry, replacement
    before conjunction before disjunction.
    """
    out: list[Norm] = []
    seen = {_norm_key(norm)}
    for component in ("cond", "target", "deadline"):
        for p in pool.formulas:
            for edited in _component_edits(norm, component, p):
                key = _norm_key(edited)
                if key in seen:
                    continue
                seen.add(key)
                verdict = syntactic_classify(norm, edited, system)
                if direction is EditDirection.RELAX:
                    keep = (
                        verdict.direction
                        is SyntacticDirection.RELAXATION_OR_EQUIVALENT
                        and verdict.fired_cases
                    )
                elif direction is EditDirection.STRENGTHEN:
                    keep = (
                        verdict.direction
                        is SyntacticDirection.STRENGTHENING_OR_EQUIVALENT
                        and verdict.fired_cases
                    )
                else:
                    keep = verdict.direction is SyntacticDirection.UNKNOWN
                if keep:
                    out.append(edited)
    for amount in pool.sanctions:
        if direction is EditDirection.RELAX and amount < norm.sanction:
            out.append(norm.replace(sanction=amount))
        elif direction is EditDirection.STRENGTHEN and amount > norm.sanction:
            out.append(norm.replace(sanction=amount))
    return out
