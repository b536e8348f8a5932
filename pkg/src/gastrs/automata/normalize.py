"""Bring an automaton into the shape saturation expects.

Three passes:

1. every control c that is a parent gets a shadow tree state carrying its
   parent transitions, and each transition reading c as a child is
   duplicated to read the shadow as well;
2. each tree key (q, i, m, q') gets its own fresh order-n state copying the
   outgoing transitions of every state it used;
3. for k = n..2, each order-k key (s, S) gets its own fresh order-(k-1) top
   state copying the transitions of every top state it used.

Fresh states are non-final, so empty stacks are no longer accepted from
initial states; nothing else about the language changes.
"""

from __future__ import annotations

from .core import TreeAutomaton, normal_form_violations, trim


def _copy_out(A: TreeAutomaton, idx, src: str, dst: str) -> None:
    k = A.state_order[src]
    if k == 1:
        rows = list(idx.out1_state.get(src, ()))
        for a, br, S in rows:
            A.add_delta1(dst, a, br, S)
    else:
        rows = list(idx.outk.get(src, ()))
        for top, S in rows:
            A.add_delta(k, dst, top, S)


def normalize(A: TreeAutomaton, force: bool = False) -> TreeAutomaton:
    if not force and not normal_form_violations(A):
        return A.copy()
    B = A.copy()
    n = B.order

    # 1. shadow controls that act as parents
    parents = {q for (q, _, _, _) in B.tree_trans}
    for c in sorted(B.controls & parents):
        shadow = B.fresh_name(c + "~")
        B.add_tree_state(shadow, final=c in B.finals)
        moved = {}
        for key, lst in list(B.tree_trans.items()):
            q, i, m, child = key
            if q == c:
                moved[(shadow, i, m, child)] = lst
                del B.tree_trans[key]
        B.tree_trans.update(moved)
        for (q, i, m, child), lst in list(B.tree_trans.items()):
            if child == c and shadow not in B.finals:
                for s in lst:
                    B.add_tree_transition(q, i, m, shadow, s)
        B._touch()
    for c in list(B.controls & B.finals):
        # a final control could only label the virtual root, which never happens
        B.finals.discard(c)

    # 2. one private order-n state per tree key
    idx = B.index
    for key in sorted(B.tree_trans):
        old = B.tree_trans[key]
        fresh = B.new_stack_state(n, prefix="k")
        for s in old:
            _copy_out(B, idx, s, fresh)
        B.tree_trans[key] = [fresh]
    B._touch()

    # 3. one private top state per order-k key
    for k in range(n, 1, -1):
        idx = B.index
        for key in sorted(B.delta[k], key=lambda kk: (kk[0], sorted(kk[1]))):
            old = B.delta[k][key]
            fresh = B.new_stack_state(k - 1, prefix="t")
            for s in old:
                _copy_out(B, idx, s, fresh)
            B.delta[k][key] = [fresh]
        B._touch()
    return trim(B)


def shadow_free(A: TreeAutomaton) -> bool:
    return not any(q in A.controls for (q, _, _, _) in A.tree_trans)

