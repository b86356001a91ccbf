"""Benchmark: compiled kernels vs the pure-Python fallback.

Times the two hot paths behind the revision classifier and the bulk
trace checks on a randomly generated (seeded) workload:

* ``product_explore`` -- reachable (state x monitor-vector) product;
* ``path_lifecycles`` -- path-mode monitor fold over a long label run.

Run from the repository root:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time
from array import array
from decimal import Decimal
from random import Random

from normsup import _kernels_py
from normsup.engine import encode_norms, encode_system
from normsup.formula import random_formula
from normsup.model import TransitionSystem
from normsup.norms import Norm, NormKind

try:
    from normsup import _kernels
except ImportError:
    _kernels = None

N_STATES = 60
N_ATOMS = 10
N_NORMS = 6
WALK_STEPS = 400_000
REPEAT = 5


def build_workload(seed: int = 2024):
    rng = Random(seed)
    atoms = [f"p{i}" for i in range(N_ATOMS)]
    states = [f"s{i:02d}" for i in range(N_STATES)]
    labels = {s: {a for a in atoms if rng.random() < 0.4} for s in states}
    edges = set()
    for s in states:
        for t in rng.sample(states, rng.randint(2, 4)):
            edges.add((s, t))
    system = TransitionSystem(atoms, states, labels, states[0], edges)
    norms = []
    for i in range(N_NORMS):
        norms.append(
            Norm(
                f"n{i}",
                random_formula(rng, atoms, 2),
                rng.choice((NormKind.OBLIGATION, NormKind.PROHIBITION)),
                random_formula(rng, atoms, 2),
                None if rng.random() < 0.3 else random_formula(rng, atoms, 2),
                Decimal(10),
            )
        )
    syscode = encode_system(system)
    normscode = encode_norms(norms, syscode.atom_index)
    walk = array("Q")
    state = syscode.init
    for _ in range(WALK_STEPS):
        walk.append(syscode.masks[state])
        succs = syscode.succ_list[syscode.succ_off[state] : syscode.succ_off[state + 1]]
        state = succs[rng.randrange(len(succs))]
    return syscode, normscode, walk


def best_of(fn, repeat: int = REPEAT) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    syscode, normscode, walk = build_workload()
    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))

    rows = []
    reference = {}
    for name, impl in backends:
        def run_product(impl=impl):
            return impl.product_explore(
                len(syscode.states),
                syscode.succ_off,
                syscode.succ_list,
                syscode.masks,
                normscode.progs,
                normscode.meta,
                normscode.n,
                0,
                0,
                syscode.init,
                10**7,
            )

        def run_trace(impl=impl):
            return impl.path_lifecycles(
                normscode.progs, normscode.meta, normscode.n, walk, 0
            )

        t_product, product = best_of(run_product)
        t_trace, trace = best_of(run_trace)
        rows.append((name, t_product, len(product[0]), t_trace))
        reference[name] = (list(product[0]), list(trace))

    if len(reference) == 2:
        assert reference["python"] == reference["cython"], "backends disagree!"

    print(f"workload: {N_STATES} states, {N_ATOMS} atoms, {N_NORMS} monitors, "
          f"{WALK_STEPS} walk steps (best of {REPEAT})")
    print(f"{'backend':<8} {'product_explore':>16} {'nodes':>8} {'path_lifecycles':>16}")
    for name, t_product, nodes, t_trace in rows:
        print(f"{name:<8} {t_product * 1000:>13.1f} ms {nodes:>8} {t_trace * 1000:>13.1f} ms")
    if len(rows) == 2:
        speed_product = rows[0][1] / rows[1][1]
        speed_trace = rows[0][3] / rows[1][3]
        print(f"speedup  {speed_product:>13.1f} x {'':>8} {speed_trace:>13.1f} x")


if __name__ == "__main__":
    main()
