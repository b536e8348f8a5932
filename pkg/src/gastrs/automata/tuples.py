"""Automata given by whole-node transitions ``q <- (q1, s1) ... (qm, sm)``.

Such a transition checks all children of a node at once. It is simulated
with per-child transitions by naming the state after the transition that
produced it: the state (q, t) is reached only through t, so the children
of one node cannot mix readings taken from different tuple transitions.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

from .core import TreeAutomaton

TupleTransition = Tuple[str, Sequence[Tuple[str, str]]]


def from_tuple_transitions(base: TreeAutomaton, tuple_delta: Iterable[TupleTransition]) -> TreeAutomaton:
    """Build an automaton from tuple transitions over the stack layers,
    controls and tree-state finals of `base` (whose own tree transitions
    are ignored). A final state f accepts via a unary tuple ``f <- (q, s)``.
    """
    delta: List[Tuple[str, Tuple[Tuple[str, str], ...]]] = [
        (q, tuple(kids)) for q, kids in tuple_delta
    ]
    R = TreeAutomaton(base.order, base.alphabet, base.controls)
    for k in base.layer_states:
        for s in base.layer_states[k]:
            R.add_stack_state(s, k, s in base.layer_finals[k])
    for k, d in base.delta.items():
        for key, lst in d.items():
            R.delta[k][key] = list(lst)
    R.delta1 = set(base.delta1)
    R._touch()

    names = {}
    for idx, (q, kids) in enumerate(delta):
        if q in base.finals:
            # root readings have a single child, so nothing can mix
            name = q
        else:
            name = f"{q}.{idx}"
            while name in R.all_names():
                name += "'"
        names[idx] = name
        if name not in R.tree_states:
            R.add_tree_state(name, final=q in base.finals)
    by_parent = {}
    for idx, (q, _) in enumerate(delta):
        if q not in base.finals:
            by_parent.setdefault(q, []).append(idx)
    for idx, (q, kids) in enumerate(delta):
        m = len(kids)
        for i, (child, s) in enumerate(kids, 1):
            if child in base.controls:
                R.add_tree_transition(names[idx], i, m, child, s)
            else:
                for j in by_parent.get(child, ()):
                    R.add_tree_transition(names[idx], i, m, names[j], s)
    return R
