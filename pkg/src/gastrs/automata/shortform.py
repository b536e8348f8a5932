"""Flattened views of transition chains.

A full short form ``(q, i, m, q', a, B, (S_1, ..., S_n))`` summarises a tree
transition followed by one transition per order down to order 1: the chain
reads the top character a, the annotation from B and, at each order k, the
remainder of the top order-k stack from S_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from ..errors import FinalTargetViolation
from .core import TreeAutomaton

EMPTY: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class ShortForm:
    parent: str
    i: int
    m: int
    child: str
    char: str
    br: FrozenSet[str]
    sets: Tuple[FrozenSet[str], ...]  # S_1 .. S_n

    def __str__(self):
        parts = " ".join("{" + ",".join(sorted(S)) + "}" for S in self.sets)
        br = "{" + ",".join(sorted(self.br)) + "}"
        return f"{self.parent} <-({self.i},{self.m}) {self.child} [{self.char} {br}; {parts}]"


class ShortForms:
    """Per-version cache of the chains readable from each stack state."""

    def __init__(self, A: TreeAutomaton):
        self.A = A
        self.version = A.version
        self._full: Dict[str, List[tuple]] = {}
        self._by_char: Dict[Tuple[str, str], List[tuple]] = {}
        self._trunc: Dict[Tuple[str, int], List[tuple]] = {}

    def full(self, s: str) -> List[Tuple[str, FrozenSet[str], Tuple[FrozenSet[str], ...]]]:
        """All (a, B, (S_1..S_k)) readable from the order-k state s."""
        hit = self._full.get(s)
        if hit is not None:
            return hit
        A = self.A
        idx = A.index
        k = A.state_order[s]
        out = []
        if k == 1:
            for a, br, S in idx.out1_state.get(s, ()):
                out.append((a, br, (S,)))
        else:
            for top, S in idx.outk.get(s, ()):
                for a, br, low in self.full(top):
                    out.append((a, br, low + (S,)))
        self._full[s] = out
        return out

    def full_char(self, s: str, a: str):
        key = (s, a)
        hit = self._by_char.get(key)
        if hit is None:
            hit = [(br, sets) for c, br, sets in self.full(s) if c == a]
            self._by_char[key] = hit
        return hit

    def truncated(self, s: str, k: int) -> List[Tuple[str, Tuple[FrozenSet[str], ...]]]:
        """All (s_k, (S_{k+1}..S_j)) reachable from the order-j state s by
        following top states down to order k."""
        key = (s, k)
        hit = self._trunc.get(key)
        if hit is not None:
            return hit
        A = self.A
        j = A.state_order[s]
        if j == k:
            out = [(s, ())]
        else:
            out = []
            for top, S in A.index.outk.get(s, ()):
                for sk, sets in self.truncated(top, k):
                    out.append((sk, sets + (S,)))
        self._trunc[key] = out
        return out

    def lifted(self, S: FrozenSet[str], k: int, a: str) -> Set[Tuple[FrozenSet[str], Tuple[FrozenSet[str], ...]]]:
        """Set-lifted full short forms over character a from every state of S
        (all of order k): (B, (S_1..S_k)) with components unioned, keeping
        only combinations whose annotation states share one order."""
        A = self.A
        acc = {(EMPTY, (EMPTY,) * k)}
        for x in sorted(S):
            opts = self.full_char(x, a)
            if not opts:
                return set()
            nxt = set()
            for br0, sets0 in acc:
                o0 = A.br_order(br0)
                for br1, sets1 in opts:
                    if br0 and br1 and A.br_order(br1) != o0:
                        continue
                    nxt.add((br0 | br1, tuple(p | q for p, q in zip(sets0, sets1))))
            acc = nxt
            if not acc:
                break
        return acc


def short_forms(A: TreeAutomaton, cache: Optional[ShortForms] = None):
    """Yield every full short form of A."""
    cache = cache or ShortForms(A)
    for (q, i, m, c), lst in A.tree_trans.items():
        for s in lst:
            for a, br, sets in cache.full(s):
                yield ShortForm(q, i, m, c, a, br, sets)


def resolve_short_forms_from(A: TreeAutomaton, q: str, i: int, m: int, child: str, cache=None) -> Set[ShortForm]:
    cache = cache or ShortForms(A)
    out = set()
    for s in A.tree_trans.get((q, i, m, child), ()):
        for a, br, sets in cache.full(s):
            out.add(ShortForm(q, i, m, child, a, br, sets))
    return out


def resolve_truncated_from(A: TreeAutomaton, q: str, i: int, m: int, child: str, k: int, cache=None):
    """The order-k truncated readings (s_k, (S_{k+1}..S_n)) of a tree key."""
    cache = cache or ShortForms(A)
    out = set()
    for s in A.tree_trans.get((q, i, m, child), ()):
        out.update(cache.truncated(s, k))
    return out


def expand_short_form(A: TreeAutomaton, sf: ShortForm) -> bool:
    """Materialise sf as a transition chain, reusing existing keyed
    transitions. Returns True when anything new was added."""
    if sf.child in A.finals:
        raise FinalTargetViolation(f"final state {sf.child} cannot label a child")
    n = A.order
    changed = False
    key = (sf.parent, sf.i, sf.m, sf.child)
    lst = A.tree_trans.get(key)
    if lst:
        s = lst[0]
    else:
        s = A.new_stack_state(n)
        A.add_tree_transition(sf.parent, sf.i, sf.m, sf.child, s)
        changed = True
    for k in range(n, 1, -1):
        rest = sf.sets[k - 1]
        lst = A.delta[k].get((s, rest))
        if lst:
            s = lst[0]
        else:
            top = A.new_stack_state(k - 1)
            A.add_delta(k, s, top, rest)
            s = top
            changed = True
    if A.add_delta1(s, sf.char, sf.br, sf.sets[0]):
        changed = True
    return changed
