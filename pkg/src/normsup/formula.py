"""Propositional formulas over named atoms.

Formulas are immutable trees built from ``true``, ``false``, atoms,
negation, conjunction and disjunction.  They label transition-system
states, and appear as the condition, target and deadline of conditional
norms.  Besides plain evaluation the module provides two orderings:

* :func:`implies_valid` -- validity of ``f -> g`` under every valuation
  (model-independent, exhaustive sweep, small vocabularies only);
* :func:`strictness` -- containment of the satisfying *reachable states*
  of a given transition system (model-relative, the default ordering
  used by the revision classifier).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import AbstractSet, Iterable, Optional

from .errors import UnknownAtom, VocabularyTooLarge

ATOM_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Atom names in scenario templates may embed the agent placeholder "{a}",
# which grounding replaces with an agent id before any evaluation.
TEMPLATE_ATOM_RE = re.compile(r"(?:[A-Za-z_]|\{a\})(?:[A-Za-z0-9_]|\{a\})*\Z")

#: Exhaustive-sweep bound for implies_valid / equivalent_valid.
MAX_SWEEP_ATOMS = 20


class Formula:
    """Base class; concrete nodes are the dataclasses below."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True, slots=True)
class TrueF(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True, slots=True)
class FalseF(Formula):
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str

    def __post_init__(self) -> None:
        if not TEMPLATE_ATOM_RE.match(self.name):
            raise ValueError(f"invalid atom name: {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Not(Formula):
    operand: Formula

    def __str__(self) -> str:
        return "!" + _child_str(self.operand, _PREC_NOT)


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return (
            _child_str(self.left, _PREC_AND, right=False)
            + " & "
            + _child_str(self.right, _PREC_AND, right=True)
        )


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return (
            _child_str(self.left, _PREC_OR, right=False)
            + " | "
            + _child_str(self.right, _PREC_OR, right=True)
        )


TRUE = TrueF()
FALSE = FalseF()

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_LEAF = 4


def _prec(f: Formula) -> int:
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, Not):
        return _PREC_NOT
    return _PREC_LEAF


def _child_str(f: Formula, parent_prec: int, right: bool = False) -> str:
    """Render a child with the fewest parentheses that re-parse to the
    same tree (binary operators associate to the left in the grammar)."""
    p = _prec(f)
    if p < parent_prec or (right and p == parent_prec and parent_prec != _PREC_NOT):
        return "(" + str(f) + ")"
    return str(f)


def render(f: Formula) -> str:
    """Canonical concrete syntax; ``parse_formula(render(f)) == f``."""
    return str(f)


def atoms_of(f: Formula) -> frozenset[str]:
    """All atom names occurring in ``f``."""
    out: set[str] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or)):
            stack.append(node.left)
            stack.append(node.right)
    return frozenset(out)


def depth_of(f: Formula) -> int:
    """Height of the formula tree (leaves have depth 0)."""
    if isinstance(f, Not):
        return 1 + depth_of(f.operand)
    if isinstance(f, (And, Or)):
        return 1 + max(depth_of(f.left), depth_of(f.right))
    return 0


def evaluate(
    f: Formula,
    labels: AbstractSet[str],
    vocabulary: Optional[AbstractSet[str]] = None,
) -> bool:
    """Truth value of ``f`` when exactly the atoms in ``labels`` hold.

    When ``vocabulary`` is given, referencing an atom outside it raises
    :class:`UnknownAtom`; otherwise every unknown atom is simply false.
    """
    if vocabulary is not None:
        extra = atoms_of(f) - frozenset(vocabulary)
        if extra:
            raise UnknownAtom(extra, vocabulary)
    return _eval(f, labels)


def _eval(f: Formula, labels: AbstractSet[str]) -> bool:
    if isinstance(f, Atom):
        return f.name in labels
    if isinstance(f, And):
        return _eval(f.left, labels) and _eval(f.right, labels)
    if isinstance(f, Or):
        return _eval(f.left, labels) or _eval(f.right, labels)
    if isinstance(f, Not):
        return not _eval(f.operand, labels)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    raise TypeError(f"not a formula: {f!r}")


def implies_valid(f: Formula, g: Formula) -> bool:
    """True iff ``f -> g`` holds under every valuation of the atoms of
    ``f`` and ``g`` (exhaustive sweep, at most MAX_SWEEP_ATOMS atoms)."""
    names = sorted(atoms_of(f) | atoms_of(g))
    if len(names) > MAX_SWEEP_ATOMS:
        raise VocabularyTooLarge(
            f"{len(names)} atoms exceed the sweep bound of {MAX_SWEEP_ATOMS}"
        )
    for bits in range(1 << len(names)):
        labels = {names[i] for i in range(len(names)) if bits >> i & 1}
        if _eval(f, labels) and not _eval(g, labels):
            return False
    return True


def equivalent_valid(f: Formula, g: Formula) -> bool:
    """True iff ``f`` and ``g`` agree under every valuation."""
    return implies_valid(f, g) and implies_valid(g, f)


class Strictness(Enum):
    """Outcome of comparing two formulas by their satisfying sets.

    ``STRICTLY_STRICTER`` means the first formula is satisfied strictly
    less often than the second (its satisfying set is a proper subset).
    """

    STRICTLY_STRICTER = "strictly_stricter"
    EQUIVALENT = "equivalent"
    STRICTLY_LESS_STRICT = "strictly_less_strict"
    INCOMPARABLE = "incomparable"

    def flipped(self) -> "Strictness":
        if self is Strictness.STRICTLY_STRICTER:
            return Strictness.STRICTLY_LESS_STRICT
        if self is Strictness.STRICTLY_LESS_STRICT:
            return Strictness.STRICTLY_STRICTER
        return self


def _compare_sets(a: frozenset, b: frozenset) -> Strictness:
    if a == b:
        return Strictness.EQUIVALENT
    if a < b:
        return Strictness.STRICTLY_STRICTER
    if a > b:
        return Strictness.STRICTLY_LESS_STRICT
    return Strictness.INCOMPARABLE


def strictness(f: Formula, g: Formula, system) -> Strictness:
    """Model-relative comparison over the reachable states of ``system``.

    Computes the satisfying reachable state sets of both formulas and
    compares them by inclusion.  Atoms must belong to the system's
    vocabulary.
    """
    vocab = system.atoms
    extra = (atoms_of(f) | atoms_of(g)) - vocab
    if extra:
        raise UnknownAtom(extra, vocab)
    reach = system.reachable()
    sat_f = frozenset(s for s in reach if _eval(f, system.labels[s]))
    sat_g = frozenset(s for s in reach if _eval(g, system.labels[s]))
    return _compare_sets(sat_f, sat_g)


def strictness_valid(f: Formula, g: Formula) -> Strictness:
    """Model-independent comparison through validity of implication.

    Used when no transition system is supplied; coarser than
    :func:`strictness` (independent atoms are always incomparable).
    """
    fg = implies_valid(f, g)
    gf = implies_valid(g, f)
    if fg and gf:
        return Strictness.EQUIVALENT
    if fg:
        return Strictness.STRICTLY_STRICTER
    if gf:
        return Strictness.STRICTLY_LESS_STRICT
    return Strictness.INCOMPARABLE


def compare_formulas(f: Formula, g: Formula, system=None) -> Strictness:
    """Strictness of ``f`` relative to ``g``, model-relative when a
    system is given and model-independent otherwise."""
    if system is None:
        return strictness_valid(f, g)
    return strictness(f, g, system)


def ground_formula(f: Formula, agent: str) -> Formula:
    """Replace the ``{a}`` placeholder in every atom name with ``agent``."""
    if isinstance(f, Atom):
        return Atom(f.name.replace("{a}", agent))
    if isinstance(f, Not):
        return Not(ground_formula(f.operand, agent))
    if isinstance(f, And):
        return And(ground_formula(f.left, agent), ground_formula(f.right, agent))
    if isinstance(f, Or):
        return Or(ground_formula(f.left, agent), ground_formula(f.right, agent))
    return f


def random_formula(rng, atom_names: Iterable[str], max_depth: int = 2) -> Formula:
    """Uniform-ish random formula for property tests and desk experiments.

    Deterministic for a given ``rng`` state; leaves are atoms or
    constants, inner nodes are drawn from {not, and, or}.
    """
    names = sorted(atom_names)
    if max_depth <= 0 or rng.random() < 0.3:
        roll = rng.random()
        if not names or roll < 0.1:
            return TRUE if rng.random() < 0.5 else FALSE
        return Atom(rng.choice(names))
    op = rng.choice(("not", "and", "or"))
    if op == "not":
        return Not(random_formula(rng, names, max_depth - 1))
    left = random_formula(rng, names, max_depth - 1)
    right = random_formula(rng, names, max_depth - 1)
    return And(left, right) if op == "and" else Or(left, right)
