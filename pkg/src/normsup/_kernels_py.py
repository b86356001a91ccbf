"""Pure-Python kernels: the fallback twin of the compiled extension.

Operates on the flat integer encodings produced by :mod:`normsup.engine`
(postfix formula programs, per-norm metadata, label bitmasks, CSR
successor lists).  The compiled module ``normsup._kernels`` implements
the same three entry points with identical semantics; the test suite and
the benchmark drive both.

Lifecycle codes: 0 idle, 1 active, 2 violated (path mode, absorbing).
Norm kind codes: 0 obligation, 1 prohibition.
Tiebreak codes: 0 target-first, 1 deadline-first.
"""

from __future__ import annotations

OP_TRUE = 0
OP_FALSE = 1
OP_ATOM = 2
OP_NOT = 3
OP_AND = 4
OP_OR = 5
OP_END = 6


def eval_program(progs, off, mask):
    """Run one postfix program starting at ``off`` against a label mask."""
    stack = []
    i = off
    while True:
        op = progs[i]
        arg = progs[i + 1]
        i += 2
        if op == OP_END:
            return stack[-1]
        if op == OP_TRUE:
            stack.append(1)
        elif op == OP_FALSE:
            stack.append(0)
        elif op == OP_ATOM:
            stack.append((mask >> arg) & 1)
        elif op == OP_NOT:
            stack[-1] ^= 1
        elif op == OP_AND:
            b = stack.pop()
            stack[-1] = stack[-1] & b
        else:  # OP_OR
            b = stack.pop()
            stack[-1] = stack[-1] | b


def _step(kind, life, c, t, d, tiebreak):
    if life == 2:
        return 2
    if life == 0 and not c:
        return 0
    if kind == 0:  # obligation: comply on target, violate at deadline
        if tiebreak == 0:
            if t:
                return 0
            if d:
                return 2
        else:
            if d:
                return 2
            if t:
                return 0
    else:  # prohibition: violate on target, withdraw at deadline
        if tiebreak == 0:
            if t:
                return 2
            if d:
                return 0
        else:
            if d:
                return 0
            if t:
                return 2
    return 1


def _advance(progs, meta, n_norms, monbits, mask, tiebreak):
    out = 0
    for i in range(n_norms):
        base = 4 * i
        life = (monbits >> (2 * i)) & 3
        if life == 2:
            out |= 2 << (2 * i)
            continue
        c = eval_program(progs, meta[base + 1], mask)
        if life == 0 and not c:
            continue
        t = eval_program(progs, meta[base + 2], mask)
        d = eval_program(progs, meta[base + 3], mask)
        out |= _step(meta[base], life, c, t, d, tiebreak) << (2 * i)
    return out


def path_lifecycles(progs, meta, n_norms, masks, tiebreak):
    """Fold path-mode monitors over a label-mask sequence; returns the
    final lifecycle code of every norm."""
    bits = 0
    for mask in masks:
        bits = _advance(progs, meta, n_norms, bits, mask, tiebreak)
    return [(bits >> (2 * i)) & 3 for i in range(n_norms)]


def product_explore(
    n_states,
    succ_off,
    succ_list,
    masks,
    progs,
    meta,
    n_norms,
    kill_mask,
    tiebreak,
    init_state,
    node_budget,
):
    """Breadth-first exploration of the system x monitor-vector product.

    Nodes are packed as ``(state_index << 2*n_norms) | monitor_bits`` and
    reported in discovery order (node 0 is the initial node).  Nodes
    where any kill-masked monitor is violated are discovered but never
    expanded, so the reported edges are exactly the edges of the product
    graph with those nodes made terminal.  Returns
    ``(nodes, edges_src, edges_dst)``; raises ValueError past the node
    budget.
    """
    shift = 2 * n_norms
    mon_mask = (1 << shift) - 1

    def killed(bits):
        for i in range(n_norms):
            if (kill_mask >> i) & 1 and ((bits >> (2 * i)) & 3) == 2:
                return True
        return False

    init_bits = _advance(progs, meta, n_norms, 0, masks[init_state], tiebreak)
    init_code = (init_state << shift) | init_bits
    nodes = [init_code]
    index = {init_code: 0}
    edges_src = []
    edges_dst = []
    qi = 0
    while qi < len(nodes):
        u = qi
        qi += 1
        code = nodes[u]
        bits = code & mon_mask
        if killed(bits):
            continue
        st = code >> shift
        for j in range(succ_off[st], succ_off[st + 1]):
            t_state = succ_list[j]
            nbits = _advance(progs, meta, n_norms, bits, masks[t_state], tiebreak)
            ncode = (t_state << shift) | nbits
            v = index.get(ncode)
            if v is None:
                v = len(nodes)
                if v >= node_budget:
                    raise ValueError("product node budget exceeded")
                nodes.append(ncode)
                index[ncode] = v
            edges_src.append(u)
            edges_dst.append(v)
    return nodes, edges_src, edges_dst
