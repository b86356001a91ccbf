"""Integer encodings and backend selection for the hot kernels.

The product exploration behind the revision classifier and the bulk
path-mode trace checks run over flat integer arrays: formulas become
postfix programs, state labelings become bitmasks, monitor vectors are
packed two bits per norm.  Two interchangeable kernel implementations
exist:

* ``normsup._kernels`` -- Cython extension (preferred);
* ``normsup._kernels_py`` -- pure Python, always available.

The compiled backend is chosen at import time when present; set the
environment variable ``NORMSUP_PURE_PYTHON=1`` to force the fallback
(``benchmarks/bench_kernels.py`` compares the two).

Capacity: at most 64 atoms per system and 16 monitors per product.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BudgetExceeded, UnknownAtom, VocabularyTooLarge
from .formula import And, Atom, FalseF, Formula, Not, Or, TrueF
from .model import TransitionSystem
from .norms import Lifecycle, Norm, Tiebreak

if os.environ.get("NORMSUP_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

from ._kernels_py import OP_AND, OP_ATOM, OP_END, OP_FALSE, OP_NOT, OP_OR, OP_TRUE

MAX_KERNEL_ATOMS = 64
MAX_KERNEL_NORMS = 16
MAX_PROGRAM_STACK = 120

DEFAULT_NODE_BUDGET = 5_000_000

_LIFE_BY_CODE = {0: Lifecycle.IDLE, 1: Lifecycle.ACTIVE, 2: Lifecycle.VIOLATED}
_TIEBREAK_CODE = {Tiebreak.TARGET_FIRST: 0, Tiebreak.DEADLINE_FIRST: 1}


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND


def kernels():
    """The selected kernel module (compiled or pure)."""
    return _impl


def compile_formula(f: Formula, atom_index: dict[str, int], progs: array) -> int:
    """Append the postfix program of ``f`` to ``progs``; returns its offset."""
    off = len(progs)
    depth = 0
    max_depth = 0

    def emit(op: int, arg: int = 0) -> None:
        progs.append(op)
        progs.append(arg)

    def walk(node: Formula) -> None:
        nonlocal depth, max_depth
        if isinstance(node, Atom):
            try:
                bit = atom_index[node.name]
            except KeyError:
                raise UnknownAtom({node.name}, atom_index.keys()) from None
            emit(OP_ATOM, bit)
            depth += 1
        elif isinstance(node, TrueF):
            emit(OP_TRUE)
            depth += 1
        elif isinstance(node, FalseF):
            emit(OP_FALSE)
            depth += 1
        elif isinstance(node, Not):
            walk(node.operand)
            emit(OP_NOT)
        elif isinstance(node, (And, Or)):
            walk(node.left)
            walk(node.right)
            emit(OP_AND if isinstance(node, And) else OP_OR)
            depth -= 1
        else:
            raise TypeError(f"not a formula: {node!r}")
        max_depth = max(max_depth, depth)

    walk(f)
    emit(OP_END)
    if max_depth > MAX_PROGRAM_STACK:
        raise VocabularyTooLarge(
            f"formula needs stack depth {max_depth} > {MAX_PROGRAM_STACK}"
        )
    return off


@dataclass
class SystemCode:
    """Flat encoding of a transition system (states in sorted id order)."""

    states: list[str]
    index: dict[str, int]
    atom_index: dict[str, int]
    succ_off: array
    succ_list: array
    masks: array
    init: int


def encode_system(system: TransitionSystem) -> SystemCode:
    atoms = sorted(system.atoms)
    if len(atoms) > MAX_KERNEL_ATOMS:
        raise VocabularyTooLarge(
            f"{len(atoms)} atoms exceed the kernel capacity of {MAX_KERNEL_ATOMS}"
        )
    atom_index = {a: i for i, a in enumerate(atoms)}
    states = system.sorted_states()
    index = {s: i for i, s in enumerate(states)}
    succ_off = array("i", [0])
    succ_list = array("i")
    for s in states:
        for t in system.successors(s):
            succ_list.append(index[t])
        succ_off.append(len(succ_list))
    masks = array("Q")
    for s in states:
        m = 0
        for a in system.labels[s]:
            m |= 1 << atom_index[a]
        masks.append(m)
    return SystemCode(states, index, atom_index, succ_off, succ_list, masks, index[system.init])


@dataclass
class NormsCode:
    """Flat encoding of an ordered list of norms against an atom index."""

    norms: list[Norm]
    meta: array
    progs: array

    @property
    def n(self) -> int:
        return len(self.norms)


def encode_norms(norms: Sequence[Norm], atom_index: dict[str, int]) -> NormsCode:
    if len(norms) > MAX_KERNEL_NORMS:
        raise BudgetExceeded(
            f"{len(norms)} monitors exceed the kernel capacity of {MAX_KERNEL_NORMS}"
        )
    meta = array("i")
    progs = array("i")
    from .norms import NormKind

    for n in norms:
        kind = 0 if n.kind is NormKind.OBLIGATION else 1
        cond_off = compile_formula(n.cond, atom_index, progs)
        target_off = compile_formula(n.target, atom_index, progs)
        deadline_off = compile_formula(
            n.deadline if n.deadline is not None else FalseF(), atom_index, progs
        )
        meta.extend((kind, cond_off, target_off, deadline_off))
    return NormsCode(list(norms), meta, progs)


@dataclass
class Product:
    """Reachable product of a system with a vector of path-mode monitors."""

    syscode: SystemCode
    normscode: NormsCode
    nodes: list[int]  # packed codes, discovery order; node 0 is initial
    edges_src: list[int]
    edges_dst: list[int]
    kill_mask: int

    @property
    def shift(self) -> int:
        return 2 * self.normscode.n

    def state_of(self, node: int) -> str:
        return self.syscode.states[self.nodes[node] >> self.shift]

    def lifecycle_codes(self, node: int) -> tuple[int, ...]:
        bits = self.nodes[node]
        return tuple((bits >> (2 * i)) & 3 for i in range(self.normscode.n))

    def lifecycles(self, node: int) -> tuple[Lifecycle, ...]:
        return tuple(_LIFE_BY_CODE[c] for c in self.lifecycle_codes(node))

    def is_killed(self, node: int) -> bool:
        codes = self.lifecycle_codes(node)
        return any(
            codes[i] == 2 for i in range(self.normscode.n) if (self.kill_mask >> i) & 1
        )

    def adjacency(self) -> list[list[int]]:
        """Successor lists in edge-emission order (lexicographic by
        successor state id, killed sources have none)."""
        out: list[list[int]] = [[] for _ in self.nodes]
        for s, d in zip(self.edges_src, self.edges_dst):
            out[s].append(d)
        return out


def explore_product(
    system: TransitionSystem,
    norms: Sequence[Norm],
    kill_ids: Iterable[int] = (),
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Product:
    """Build the reachable (state, monitor-vector) product.

    ``kill_ids`` are norm *indices* whose violation makes a node
    terminal (never expanded); paths through such nodes do not exist in
    the resulting graph.
    """
    syscode = encode_system(system)
    normscode = encode_norms(norms, syscode.atom_index)
    kill_mask = 0
    for i in kill_ids:
        kill_mask |= 1 << i
    try:
        nodes, src, dst = _impl.product_explore(
            len(syscode.states),
            syscode.succ_off,
            syscode.succ_list,
            syscode.masks,
            normscode.progs,
            normscode.meta,
            normscode.n,
            kill_mask,
            _TIEBREAK_CODE[tiebreak],
            syscode.init,
            node_budget,
        )
    except ValueError as exc:
        raise BudgetExceeded(str(exc)) from None
    return Product(syscode, normscode, list(nodes), list(src), list(dst), kill_mask)


def final_path_lifecycles(
    system: TransitionSystem,
    norms: Sequence[Norm],
    states: Sequence[str],
    tiebreak: Tiebreak = Tiebreak.TARGET_FIRST,
) -> dict[str, Lifecycle]:
    """Path-mode fold over a concrete state sequence via the kernel."""
    syscode = encode_system(system)
    normscode = encode_norms(norms, syscode.atom_index)
    masks = array("Q", (syscode.masks[syscode.index[s]] for s in states))
    codes = _impl.path_lifecycles(
        normscode.progs, normscode.meta, normscode.n, masks, _TIEBREAK_CODE[tiebreak]
    )
    return {n.id: _LIFE_BY_CODE[c] for n, c in zip(norms, codes)}
