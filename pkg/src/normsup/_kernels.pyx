# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: the hot twin of normsup._kernels_py.

Same entry points, same integer encodings, same semantics; see the pure
module for the documentation.  Selected at import time by
normsup.engine when the extension built.
"""

from libc.stdint cimport uint64_t, int32_t

DEF STACK_MAX = 128

cdef int OP_TRUE = 0
cdef int OP_FALSE = 1
cdef int OP_ATOM = 2
cdef int OP_NOT = 3
cdef int OP_AND = 4
cdef int OP_OR = 5
cdef int OP_END = 6


cdef inline int _eval(const int[:] progs, int off, uint64_t mask) nogil:
    cdef int stack[STACK_MAX]
    cdef int sp = 0
    cdef int i = off
    cdef int op, arg
    while True:
        op = progs[i]
        arg = progs[i + 1]
        i += 2
        if op == 6:  # OP_END
            return stack[sp - 1]
        if op == 0:
            stack[sp] = 1
            sp += 1
        elif op == 1:
            stack[sp] = 0
            sp += 1
        elif op == 2:
            stack[sp] = <int>((mask >> arg) & 1)
            sp += 1
        elif op == 3:
            stack[sp - 1] ^= 1
        elif op == 4:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] & stack[sp]
        else:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] | stack[sp]


cdef inline int _step(int kind, int life, int c, int t, int d, int tiebreak) nogil:
    if life == 2:
        return 2
    if life == 0 and c == 0:
        return 0
    if kind == 0:
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
    else:
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


cdef inline uint64_t _advance(const int[:] progs, const int[:] meta, int n_norms,
                              uint64_t monbits, uint64_t mask, int tiebreak) nogil:
    cdef uint64_t out = 0
    cdef int i, base, life, c, t, d
    for i in range(n_norms):
        base = 4 * i
        life = <int>((monbits >> (2 * i)) & 3)
        if life == 2:
            out |= (<uint64_t>2) << (2 * i)
            continue
        c = _eval(progs, meta[base + 1], mask)
        if life == 0 and c == 0:
            continue
        t = _eval(progs, meta[base + 2], mask)
        d = _eval(progs, meta[base + 3], mask)
        out |= (<uint64_t>_step(meta[base], life, c, t, d, tiebreak)) << (2 * i)
    return out


def eval_program(const int[:] progs, int off, mask):
    return _eval(progs, off, <uint64_t>mask)


def path_lifecycles(const int[:] progs, const int[:] meta, int n_norms,
                    const uint64_t[:] masks, int tiebreak):
    cdef uint64_t bits = 0
    cdef Py_ssize_t i
    for i in range(masks.shape[0]):
        bits = _advance(progs, meta, n_norms, bits, masks[i], tiebreak)
    return [<int>((bits >> (2 * i)) & 3) for i in range(n_norms)]


def product_explore(int n_states, const int[:] succ_off, const int[:] succ_list,
                    const uint64_t[:] masks, const int[:] progs, const int[:] meta,
                    int n_norms, kill_mask, int tiebreak, int init_state,
                    long node_budget):
    cdef int shift = 2 * n_norms
    cdef uint64_t mon_mask = ((<uint64_t>1) << shift) - 1
    cdef uint64_t kmask = <uint64_t>kill_mask
    cdef uint64_t init_bits, code, bits, nbits, ncode
    cdef int st, t_state
    cdef Py_ssize_t qi = 0
    cdef int j, i
    cdef bint kill

    init_bits = _advance(progs, meta, n_norms, 0, masks[init_state], tiebreak)
    init_code = ((<uint64_t>init_state) << shift) | init_bits
    nodes = [init_code]
    index = {init_code: 0}
    edges_src = []
    edges_dst = []
    while qi < len(nodes):
        code = <uint64_t>nodes[qi]
        qi += 1
        bits = code & mon_mask
        kill = False
        for i in range(n_norms):
            if (kmask >> i) & 1 and ((bits >> (2 * i)) & 3) == 2:
                kill = True
                break
        if kill:
            continue
        st = <int>(code >> shift)
        for j in range(succ_off[st], succ_off[st + 1]):
            t_state = succ_list[j]
            nbits = _advance(progs, meta, n_norms, bits, masks[t_state], tiebreak)
            ncode = ((<uint64_t>t_state) << shift) | nbits
            v = index.get(ncode)
            if v is None:
                v = len(nodes)
                if v >= node_budget:
                    raise ValueError("product node budget exceeded")
                nodes.append(ncode)
                index[ncode] = v
            edges_src.append(qi - 1)
            edges_dst.append(v)
    return nodes, edges_src, edges_dst
