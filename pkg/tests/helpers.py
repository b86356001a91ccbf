"""Seeded random generators shared by the test modules."""

from __future__ import annotations

from decimal import Decimal
from random import Random

from normsup.formula import FALSE, And, Or, random_formula
from normsup.model import TransitionSystem
from normsup.norms import Norm, NormKind, NormSet

ATOM_POOL = ("a", "b", "c")


def random_system(rng: Random, max_states: int = 5, atom_pool=ATOM_POOL) -> TransitionSystem:
    """Total random system: every state keeps at least one successor."""
    n = rng.randint(1, max_states)
    atoms = list(atom_pool[: rng.randint(1, len(atom_pool))])
    states = [f"s{i}" for i in range(n)]
    labels = {s: {a for a in atoms if rng.random() < 0.45} for s in states}
    edges = set()
    for s in states:
        for t in rng.sample(states, rng.randint(1, min(3, n))):
            edges.add((s, t))
    return TransitionSystem(atoms, states, labels, "s0", edges)


def random_norm(rng: Random, atoms, ident: str) -> Norm:
    cond = random_formula(rng, atoms, 2)
    target = random_formula(rng, atoms, 2)
    deadline = None if rng.random() < 0.3 else random_formula(rng, atoms, 2)
    kind = rng.choice((NormKind.OBLIGATION, NormKind.PROHIBITION))
    sanction = Decimal(rng.choice((1, 5, 100)))
    return Norm(ident, cond, kind, target, deadline, sanction)


def random_normset(rng: Random, atoms, set_id: str, max_norms: int = 2) -> NormSet:
    count = rng.randint(1, max_norms)
    return NormSet(
        set_id, tuple(random_norm(rng, atoms, f"{set_id}{i}") for i in range(count))
    )


def random_instance(seed: int):
    """One (system, before, after) classification instance."""
    rng = Random(seed)
    system = random_system(rng)
    atoms = sorted(system.atoms)
    before = random_normset(rng, atoms, "n")
    after = random_normset(rng, atoms, "r")
    return system, before, after


def random_single_edit(rng: Random, atoms, norm: Norm) -> Norm:
    """Change exactly one formula component of ``norm``."""
    component = rng.choice(("cond", "target", "deadline"))
    p = random_formula(rng, atoms, 2)
    combinator = rng.choice(("replace", "and", "or"))
    if component == "deadline":
        current = norm.deadline if norm.deadline is not None else FALSE
    else:
        current = getattr(norm, component)
    if combinator == "and":
        p = And(current, p)
    elif combinator == "or":
        p = Or(current, p)
    return norm.replace(**{component: p})


def random_edit_pair(seed: int):
    """A (system, norm, edited-norm) soundness-check instance."""
    rng = Random(seed)
    system = random_system(rng)
    atoms = sorted(system.atoms)
    norm = random_norm(rng, atoms, "n0")
    return system, norm, random_single_edit(rng, atoms, norm)


def random_scenario(seed: int):
    """A structurally valid random scenario (for format round-trips)."""
    from normsup.revision import CandidatePool
    from normsup.supervision import (
        AgentSpec,
        Enforcement,
        Objective,
        ObjectiveKind,
        Scenario,
        Scope,
    )

    rng = Random(seed)
    world = random_system(rng, max_states=4, atom_pool=("go_{a}", "stop_{a}", "shared"))
    atoms = sorted(world.atoms)
    agents = tuple(
        AgentSpec(
            f"a{i}",
            sanction_sensitivity=float(rng.randint(0, 3)),
            epsilon=rng.choice((0.0, 0.25, 1.0)),
            utilities={s: float(rng.randint(-2, 5)) for s in sorted(world.states)},
        )
        for i in range(rng.randint(1, 3))
    )
    norms = random_normset(rng, atoms, f"set{seed}", max_norms=3)
    kinds = list(ObjectiveKind)
    objectives = tuple(
        Objective(
            f"o{i}",
            rng.choice(kinds),
            rng.choice(atoms),
            limit=rng.randint(1, 4),
            threshold=rng.randint(0, 3),
            scope=rng.choice((Scope.PER_AGENT, Scope.GLOBAL)),
        )
        for i in range(rng.randint(0, 2))
    )
    pool = CandidatePool(
        formulas=tuple(
            random_formula(rng, atoms, 2) for _ in range(rng.randint(0, 2))
        ),
        sanctions=tuple(Decimal(rng.choice((1, 7, 500))) for _ in range(rng.randint(0, 2))),
    )
    horizon = rng.randint(1, 10)
    theta = sorted((rng.choice((0.0, 0.25, 0.5, 0.9)), rng.choice((0.5, 0.75, 1.0))))
    return Scenario(
        id=f"scenario{seed}",
        world=world,
        agents=agents,
        norms=norms,
        objectives=objectives,
        pool=pool,
        enforcement=rng.choice(list(Enforcement)),
        seed=rng.randint(0, 10**6),
        horizon=horizon,
        window=rng.randint(1, horizon),
        theta_low=theta[0],
        theta_high=theta[1],
        minutes_per_step=rng.randint(1, 30),
    )
