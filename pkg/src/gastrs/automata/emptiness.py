"""Emptiness for stack layers and the tree layer.

The answer for the stack layers comes from the set of realised types. The
type of an order-k stack is the set of order-k states accepting it, and a
type is realised when some stack has exactly that type. Types are built
bottom-up: the empty order-k stack has type F_k, and the type of
``t + rest`` is fixed by the types of its top item (plus annotation, at
order 1) and of the rest. A set S is jointly productive iff S is contained
in some realised type. Each type keeps one witness stack.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from ..stacks import Stack, Sym, empty
from ..trees import Node
from .core import TreeAutomaton


class StackTypes:
    def __init__(self, A: TreeAutomaton):
        self.A = A
        self.version = A.version
        n = A.order
        self.types: Dict[int, Dict[FrozenSet[str], Stack]] = {k: {} for k in range(1, n + 1)}
        # every evaluated combination, used to build exact type states
        self.combos_k = []  # (k, top type, rest type, result)
        self.combos_1 = []  # (char, annotation order, annotation type, rest type, result)
        self._compute()

    def _compute(self):
        A = self.A
        n = A.order
        types = self.types
        for k in range(1, n + 1):
            types[k][frozenset(A.layer_finals[k])] = empty(k)
        delta_k = {k: list(A.delta_transitions(k)) for k in range(2, n + 1)}
        by_char = defaultdict(list)
        for s, a, br, S in A.delta1:
            by_char[a].append((s, br, S))
        done = set()
        changed = True
        while changed:
            changed = False
            for k in range(n, 1, -1):
                tops = list(types[k - 1].items())
                rests = list(types[k].items())
                for tt, tw in tops:
                    for rt, rw in rests:
                        key = (k, tt, rt)
                        if key in done:
                            continue
                        done.add(key)
                        ty = frozenset(s for s, top, S in delta_k[k] if top in tt and S <= rt)
                        self.combos_k.append((k, tt, rt, ty))
                        if ty not in types[k]:
                            types[k][ty] = Stack(k, (tw,) + rw.items)
                            changed = True
            anns = [(j, at, aw) for j in range(1, n + 1) for at, aw in types[j].items()]
            rests = list(types[1].items())
            for a in A.alphabet:
                rows = by_char.get(a, ())
                for j, at, aw in anns:
                    fit = [(s, S) for s, br, S in rows if br <= at]
                    for rt, rw in rests:
                        key = (a, j, at, rt)
                        if key in done:
                            continue
                        done.add(key)
                        ty = frozenset(s for s, S in fit if S <= rt)
                        self.combos_1.append((a, j, at, rt, ty))
                        if ty not in types[1]:
                            types[1][ty] = Stack(1, (Sym(a, aw),) + rw.items)
                            changed = True

    def realised(self, k: int) -> Dict[FrozenSet[str], Stack]:
        return self.types[k]

    def witness_for(self, S: Iterable[str], k: Optional[int] = None) -> Optional[Stack]:
        """A stack accepted from every state of S, or None."""
        S = frozenset(S)
        if k is None:
            if not S:
                raise ValueError("order needed for the empty set")
            k = self.A.state_order[next(iter(S))]
        best = None
        for ty, w in self.types[k].items():
            if S <= ty and (best is None or w.size() < best.size()):
                best = w
        return best

    def productive(self, S: Iterable[str], k: Optional[int] = None) -> bool:
        return self.witness_for(S, k) is not None


def stack_types(A: TreeAutomaton) -> StackTypes:
    cached = getattr(A, "_types_cache", None)
    if cached is not None and cached.version == A.version:
        return cached
    st = StackTypes(A)
    A._types_cache = st
    return st


def stack_state_nonempty(A: TreeAutomaton, s: str) -> Tuple[bool, Optional[Stack]]:
    w = stack_types(A).witness_for({s})
    return w is not None, w


def is_empty(A: TreeAutomaton) -> Tuple[bool, Optional[Node]]:
    """Decide emptiness; when non-empty also return an accepted tree."""
    st = stack_types(A)
    wit = {}

    def stack_for(s):
        if s not in wit:
            wit[s] = st.witness_for({s})
        return wit[s]

    by_parent = defaultdict(lambda: defaultdict(list))
    for q, i, m, c, s in A.tree_transitions():
        by_parent[q][m].append((i, c, s))
    marked: Dict[str, Optional[tuple]] = {c: None for c in A.controls}
    changed = True
    while changed:
        changed = False
        for q in sorted(by_parent):
            if q in marked:
                continue
            for m in sorted(by_parent[q]):
                choice = {}
                for i, c, s in sorted(by_parent[q][m]):
                    if i not in choice and c in marked and c not in A.finals and stack_for(s) is not None:
                        choice[i] = (c, s)
                if len(choice) == m:
                    marked[q] = (m, [choice[i] for i in range(1, m + 1)])
                    changed = True
                    break
    for f, i, m, q, s in sorted(A.tree_transitions()):
        if f in A.finals and i == 1 and m == 1 and q in marked and stack_for(s) is not None:
            return False, _build(q, stack_for(s), marked, stack_for)
    return True, None


def _build(q, stack, marked, stack_for):
    just = marked[q]
    if just is None:
        return Node(stack, q)
    m, kids = just
    return Node(stack, None, [_build(c, stack_for(s), marked, stack_for) for c, s in kids])


def realised_type_count(A: TreeAutomaton) -> Dict[int, int]:
    st = stack_types(A)
    return {k: len(v) for k, v in st.types.items()}
