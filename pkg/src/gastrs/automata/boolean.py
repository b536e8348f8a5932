"""Union, intersection and complement of stack tree automata.

Stack-layer intersections are synchronous products: the state for a set X
of source states pairs one transition of each member, takes the product
state of the top states and unions the target and annotation sets.

Complements go through exact type states. For every realised type tau
(see `emptiness`) the state E(tau) accepts exactly the stacks of type tau.
Its transitions mirror how types combine, so any boolean condition over
source states becomes a union of type states.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from ..errors import NotNormalized
from .core import TreeAutomaton
from .emptiness import StackTypes, stack_types
from .normalize import normalize, shadow_free


def rename_apart(A: TreeAutomaton, B: TreeAutomaton) -> TreeAutomaton:
    """Copy of B whose non-control states avoid every name used by A."""
    taken = A.all_names() | B.all_names()
    mapping = {}
    for x in sorted(B.all_names() - B.controls):
        if x in A.all_names():
            y = x + "'"
            while y in taken:
                y += "'"
            taken.add(y)
            mapping[x] = y
    return B.rename(lambda x: mapping.get(x, x))


def _merge_into(R: TreeAutomaton, B: TreeAutomaton) -> None:
    R.controls |= B.controls
    R.tree_states |= B.tree_states
    R.finals |= B.finals
    for k in B.layer_states:
        R.layer_states[k] |= B.layer_states[k]
        R.layer_finals[k] |= B.layer_finals[k]
    R.state_order.update(B.state_order)
    for key, lst in B.tree_trans.items():
        cur = R.tree_trans.setdefault(key, [])
        cur.extend(x for x in lst if x not in cur)
    for k, d in B.delta.items():
        for key, lst in d.items():
            cur = R.delta[k].setdefault(key, [])
            cur.extend(x for x in lst if x not in cur)
    R.delta1 |= B.delta1
    R._touch()


def _check_compatible(A: TreeAutomaton, B: TreeAutomaton) -> None:
    if A.order != B.order:
        raise ValueError(f"orders differ: {A.order} vs {B.order}")
    if set(A.alphabet) != set(B.alphabet):
        raise ValueError("alphabets differ")


def _shadowed(A: TreeAutomaton) -> TreeAutomaton:
    return A if shadow_free(A) else normalize(A)


def union(A: TreeAutomaton, B: TreeAutomaton) -> TreeAutomaton:
    _check_compatible(A, B)
    A1 = _shadowed(A)
    B1 = rename_apart(A1, _shadowed(B))
    R = A1.copy()
    _merge_into(R, B1)
    return R


def union_all(automata: List[TreeAutomaton]) -> TreeAutomaton:
    R = automata[0].copy()
    for B in automata[1:]:
        R = union(R, B)
    return R


class ProductStates:
    """Intersection states over the stack layers of R."""

    def __init__(self, R: TreeAutomaton):
        self.R = R
        self.made: Dict[FrozenSet[str], str] = {}
        self.todo: List[Tuple[FrozenSet[str], str]] = []

    def state(self, members: Iterable[str]) -> str:
        X = frozenset(members)
        if len(X) == 1:
            return next(iter(X))
        hit = self.made.get(X)
        if hit is not None:
            return hit
        R = self.R
        k = R.state_order[next(iter(X))]
        final = all(x in R.layer_finals[k] for x in X)
        name = R.new_stack_state(k, prefix=f"p{k}_", final=final)
        self.made[X] = name
        self.todo.append((X, name))
        return name

    def run(self) -> None:
        R = self.R
        while self.todo:
            X, name = self.todo.pop()
            members = sorted(X)
            idx = R.index
            k = R.state_order[members[0]]
            if k == 1:
                per = [idx.out1_state.get(x, ()) for x in members]
                rows = []
                for combo in itertools.product(*per):
                    chars = {a for a, _, _ in combo}
                    if len(chars) != 1:
                        continue
                    br = frozenset().union(*(b for _, b, _ in combo))
                    if len({R.state_order[b] for b in br}) > 1:
                        continue
                    rest = frozenset().union(*(S for _, _, S in combo))
                    rows.append((chars.pop(), br, rest))
                for a, br, rest in rows:
                    R.add_delta1(name, a, br, rest)
            else:
                per = [idx.outk.get(x, ()) for x in members]
                rows = []
                for combo in itertools.product(*per):
                    top = self.state(t for t, _ in combo)
                    rest = frozenset().union(*(S for _, S in combo))
                    rows.append((top, rest))
                for top, rest in rows:
                    R.add_delta(k, name, top, rest)


def intersect(A: TreeAutomaton, B: TreeAutomaton) -> TreeAutomaton:
    _check_compatible(A, B)
    A1 = _shadowed(A)
    B1 = rename_apart(A1, _shadowed(B))
    R = TreeAutomaton(A.order, A.alphabet, A1.controls | B1.controls)
    for k in range(1, A.order + 1):
        for src in (A1, B1):
            for s in src.layer_states[k]:
                R.add_stack_state(s, k, s in src.layer_finals[k])
    for src in (A1, B1):
        for k, d in src.delta.items():
            for key, lst in d.items():
                R.delta[k][key] = list(lst)
        R.delta1 |= src.delta1
    R._touch()
    prod = ProductStates(R)
    i2 = B1.index
    names: Dict[Tuple[str, str], str] = {}

    def pair(q1, q2):
        if q1 == q2 and q1 in R.controls:
            return q1
        key = (q1, q2)
        if key not in names:
            base = f"{q1}&{q2}"
            while base in R.all_names():
                base += "'"
            names[key] = base
            R.add_tree_state(base, final=q1 in A1.finals and q2 in B1.finals)
        return names[key]

    by_child1 = defaultdict(list)
    for q, i, m, c, s in A1.tree_transitions():
        by_child1[c].append((q, i, m, s))
    seen = set()
    todo = [(c, c) for c in sorted(R.controls)]
    pending = []
    while todo:
        x1, x2 = todo.pop()
        if (x1, x2) in seen:
            continue
        seen.add((x1, x2))
        for q1, i, m, s1 in by_child1.get(x1, ()):
            for q2, s2 in i2.by_pos_child.get((i, m, x2), ()):
                if (q1 in A1.finals) != (q2 in B1.finals):
                    continue
                parent = pair(q1, q2)
                pending.append((parent, i, m, pair(x1, x2), s1, s2))
                if q1 not in A1.finals:
                    todo.append((q1, q2))
    for parent, i, m, child, s1, s2 in pending:
        R.add_tree_transition(parent, i, m, child, prod.state((s1, s2)))
    prod.run()
    return R


# ----------------------------------------------------------------------
# complement


class TypeStates:
    """Exact type states E(tau) for the realised types of a source automaton,
    materialised inside the target automaton R."""

    def __init__(self, st: StackTypes, R: TreeAutomaton):
        self.st = st
        self.R = R
        A = st.A
        self.E: Dict[Tuple[int, FrozenSet[str]], str] = {}
        self.unions: Dict[Tuple[int, FrozenSet[FrozenSet[str]]], str] = {}
        for k in range(1, A.order + 1):
            empty_type = frozenset(A.layer_finals[k])
            for j, ty in enumerate(sorted(st.types[k], key=sorted)):
                self.E[(k, ty)] = R.add_stack_state(
                    _unique(R, f"E{k}_{j}"), k, final=(ty == empty_type)
                )
        for k, top, rest, ty in st.combos_k:
            R.add_delta(k, self.E[(k, ty)], self.E[(k - 1, top)], [self.E[(k, rest)]])
        for a, j, ann, rest, ty in st.combos_1:
            R.add_delta1(self.E[(1, ty)], a, [self.E[(j, ann)]], [self.E[(1, rest)]])
        self._out = None

    def union(self, k: int, types: Iterable[FrozenSet[str]]) -> Optional[str]:
        """A state accepting exactly the stacks whose type is in `types`."""
        types = frozenset(types)
        if not types:
            return None
        if len(types) == 1:
            return self.E[(k, next(iter(types)))]
        key = (k, types)
        hit = self.unions.get(key)
        if hit is not None:
            return hit
        R = self.R
        members = [self.E[(k, t)] for t in sorted(types, key=sorted)]
        final = any(x in R.layer_finals[k] for x in members)
        name = R.add_stack_state(_unique(R, f"U{k}_{len(self.unions)}"), k, final=final)
        self.unions[key] = name
        idx = R.index
        if k == 1:
            rows = [r for x in members for r in idx.out1_state.get(x, ())]
            for a, br, S in rows:
                R.add_delta1(name, a, br, S)
        else:
            rows = [r for x in members for r in idx.outk.get(x, ())]
            for top, S in rows:
                R.add_delta(k, name, top, S)
        return name


def _unique(R: TreeAutomaton, base: str) -> str:
    name = base
    while name in R.tree_states or name in R.state_order:
        name += "'"
    return name


def complement(A: TreeAutomaton, max_arity: Optional[int] = None) -> TreeAutomaton:
    """Automaton accepting exactly the trees of arity at most max_arity that
    A rejects. The arity bound defaults to the larger of 2 and the largest
    arity used by A."""
    if not shadow_free(A):
        raise NotNormalized("complement needs controls without incoming transitions")
    m_max = max_arity if max_arity is not None else max(A.max_arity(), 2)
    n = A.order
    st = stack_types(A)
    R = TreeAutomaton(n, A.alphabet, A.controls)
    ts = TypeStates(st, R)
    top_types = sorted(st.types[n], key=sorted)
    rows = defaultdict(list)
    for q, i, m, c, s in A.tree_transitions():
        rows[(i, m, c)].append((q, s))

    pattern_cache: Dict[tuple, Dict[FrozenSet[str], List[FrozenSet[str]]]] = {}

    def patterns(i, m, M):
        key = (i, m, M)
        hit = pattern_cache.get(key)
        if hit is None:
            trs = [(q, s) for c in M for q, s in rows.get((i, m, c), ()) if q not in A.finals]
            hit = defaultdict(list)
            for ty in top_types:
                pi = frozenset(q for q, s in trs if s in ty)
                hit[pi].append(ty)
            pattern_cache[key] = hit
        return hit

    meanings = {frozenset([c]) for c in A.controls}
    comps: Dict[Tuple[int, int], set] = {}
    while True:
        for m in range(1, m_max + 1):
            for i in range(1, m + 1):
                comp = comps.setdefault((i, m), set())
                for M in meanings:
                    comp.update(patterns(i, m, M))
        new = set(meanings)
        for m in range(1, m_max + 1):
            cs = [comps[(i, m)] for i in range(1, m + 1)]
            for combo in itertools.product(*cs):
                new.add(frozenset.intersection(*combo))
        if new == meanings:
            break
        meanings = new

    # tuple states
    tuple_names: Dict[tuple, str] = {}
    meaning_of: Dict[str, FrozenSet[str]] = {c: frozenset([c]) for c in A.controls}
    for m in range(1, m_max + 1):
        cs = [sorted(comps[(i, m)], key=sorted) for i in range(1, m + 1)]
        for combo in itertools.product(*cs):
            name = R.add_tree_state(_unique(R, f"N{m}_{len(tuple_names)}"))
            tuple_names[combo] = name
            meaning_of[name] = frozenset.intersection(*combo)
    by_meaning = defaultdict(list)
    for x, M in meaning_of.items():
        by_meaning[M].append(x)
    root = R.add_tree_state(_unique(R, "ROOT"), final=True)
    for combo, name in sorted(tuple_names.items(), key=lambda kv: kv[1]):
        m = len(combo)
        for i, pi in enumerate(combo, 1):
            for M, kids in by_meaning.items():
                tys = patterns(i, m, M).get(pi)
                if not tys:
                    continue
                s = ts.union(n, tys)
                for x in kids:
                    R.add_tree_transition(name, i, m, x, s)
    for M, kids in by_meaning.items():
        trs = [s for c in M for q, s in rows.get((1, 1, c), ()) if q in A.finals]
        good = [ty for ty in top_types if not any(s in ty for s in trs)]
        s = ts.union(n, good)
        if s is None:
            continue
        for x in kids:
            R.add_tree_transition(root, 1, 1, x, s)
    return R
