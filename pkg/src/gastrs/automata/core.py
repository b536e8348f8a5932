"""Stack tree automata: a bottom-up tree layer whose transitions are guarded
by states of a nested alternating stack automaton, one layer per order.

Tree transitions are stored as ``(q, i, m, q') -> [s, ...]``: a node labelled
q may have, as its i-th of m children, a node labelled q' whose stack is
accepted from the order-n state s. A tree is accepted when its root is
labelled q and some final state f has a transition ``(f, 1, 1, q)`` reading
the root stack.

Stack layers: for k >= 2 transitions ``(s, S) -> [s', ...]`` read the top
order-(k-1) stack from s' and the rest from every state of S. Order-1
transitions ``(s, a, B, S)`` read character a, its annotation from every state
of B (all of one order) and the rest from every state of S. A stack is
accepted from a set when it is accepted from each member; an empty stack
is accepted from final states.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from ..errors import FinalTargetViolation, StateOrderMismatch, ValidationError
from ..stacks import Stack
from ..trees import Node

TreeKey = Tuple[str, int, int, str]
StateSet = FrozenSet[str]


class TreeAutomaton:
    def __init__(self, order: int, alphabet: Sequence[str], controls: Iterable[str]):
        self.order = order
        self.alphabet = tuple(alphabet)
        self.controls = set(controls)
        self.tree_states: Set[str] = set(self.controls)
        self.finals: Set[str] = set()
        self.layer_states: Dict[int, Set[str]] = {k: set() for k in range(1, order + 1)}
        self.layer_finals: Dict[int, Set[str]] = {k: set() for k in range(1, order + 1)}
        self.state_order: Dict[str, int] = {}
        self.tree_trans: Dict[TreeKey, List[str]] = {}
        # per order k >= 2: (s, S) -> [s', ...]
        self.delta: Dict[int, Dict[Tuple[str, StateSet], List[str]]] = {
            k: {} for k in range(2, order + 1)
        }
        self.delta1: Set[Tuple[str, str, StateSet, StateSet]] = set()
        self.version = 0
        self._fresh = 0
        self._idx = None
        self._memo = {}
        self._memo_version = -1

    # ------------------------------------------------------------------
    # construction

    def _touch(self):
        self.version += 1
        self._idx = None

    def all_names(self) -> Set[str]:
        return self.tree_states | set(self.state_order)

    def fresh_name(self, prefix: str) -> str:
        while True:
            self._fresh += 1
            name = f"{prefix}{self._fresh}"
            if name not in self.tree_states and name not in self.state_order:
                return name

    def add_tree_state(self, q: str, final: bool = False) -> str:
        if q in self.state_order:
            raise ValidationError(f"{q} is already a stack state")
        self.tree_states.add(q)
        if final:
            self.finals.add(q)
        self._touch()
        return q

    def add_stack_state(self, s: str, k: int, final: bool = False) -> str:
        if not 1 <= k <= self.order:
            raise StateOrderMismatch(f"no stack layer of order {k}")
        old = self.state_order.get(s)
        if old is not None and old != k:
            raise StateOrderMismatch(f"{s} is an order-{old} state")
        if s in self.tree_states:
            raise ValidationError(f"{s} is already a tree state")
        self.state_order[s] = k
        self.layer_states[k].add(s)
        if final:
            self.layer_finals[k].add(s)
        self._touch()
        return s

    def new_stack_state(self, k: int, prefix: Optional[str] = None, final: bool = False) -> str:
        return self.add_stack_state(self.fresh_name(prefix or f"s{k}_"), k, final)

    def add_tree_transition(self, q: str, i: int, m: int, child: str, s: str) -> bool:
        if child in self.finals:
            raise FinalTargetViolation(f"final state {child} cannot label a child")
        if not 1 <= i <= m:
            raise ValidationError(f"child position {i} outside 1..{m}")
        if self.state_order.get(s) != self.order:
            raise StateOrderMismatch(f"{s} is not an order-{self.order} state")
        for x in (q, child):
            if x not in self.tree_states:
                raise ValidationError(f"unknown tree state {x}")
        lst = self.tree_trans.setdefault((q, i, m, child), [])
        if s in lst:
            return False
        lst.append(s)
        self._touch()
        return True

    def add_delta(self, k: int, s: str, top: str, rest: Iterable[str]) -> bool:
        rest = frozenset(rest)
        if k == 1:
            raise ValueError("use add_delta1 for order-1 transitions")
        if self.state_order.get(s) != k or any(self.state_order.get(x) != k for x in rest):
            raise StateOrderMismatch(f"order-{k} transition over states of another order")
        if self.state_order.get(top) != k - 1:
            raise StateOrderMismatch(f"{top} is not an order-{k - 1} state")
        lst = self.delta[k].setdefault((s, rest), [])
        if top in lst:
            return False
        lst.append(top)
        self._touch()
        return True

    def add_delta1(self, s: str, a: str, br: Iterable[str], rest: Iterable[str]) -> bool:
        br = frozenset(br)
        rest = frozenset(rest)
        if self.state_order.get(s) != 1 or any(self.state_order.get(x) != 1 for x in rest):
            raise StateOrderMismatch("order-1 transition over states of another order")
        if len({self.state_order.get(x) for x in br}) > 1 or None in {self.state_order.get(x) for x in br}:
            raise StateOrderMismatch("annotation states must share one order")
        if a not in self.alphabet:
            raise ValidationError(f"unknown character {a!r}")
        t = (s, a, br, rest)
        if t in self.delta1:
            return False
        self.delta1.add(t)
        self._touch()
        return True

    def copy(self) -> "TreeAutomaton":
        B = TreeAutomaton(self.order, self.alphabet, self.controls)
        B.tree_states = set(self.tree_states)
        B.finals = set(self.finals)
        B.layer_states = {k: set(v) for k, v in self.layer_states.items()}
        B.layer_finals = {k: set(v) for k, v in self.layer_finals.items()}
        B.state_order = dict(self.state_order)
        B.tree_trans = {k: list(v) for k, v in self.tree_trans.items()}
        B.delta = {k: {kk: list(v) for kk, v in d.items()} for k, d in self.delta.items()}
        B.delta1 = set(self.delta1)
        B._fresh = self._fresh
        return B

    def rename(self, fn) -> "TreeAutomaton":
        """Copy with every non-control state renamed by fn."""
        def r(x):
            return x if x in self.controls else fn(x)

        B = TreeAutomaton(self.order, self.alphabet, self.controls)
        B.tree_states = {r(q) for q in self.tree_states}
        B.finals = {r(q) for q in self.finals}
        B.layer_states = {k: {r(x) for x in v} for k, v in self.layer_states.items()}
        B.layer_finals = {k: {r(x) for x in v} for k, v in self.layer_finals.items()}
        B.state_order = {r(x): k for x, k in self.state_order.items()}
        B.tree_trans = {
            (r(q), i, m, r(c)): [r(s) for s in v] for (q, i, m, c), v in self.tree_trans.items()
        }
        B.delta = {
            k: {(r(s), frozenset(map(r, S))): [r(x) for x in v] for (s, S), v in d.items()}
            for k, d in self.delta.items()
        }
        B.delta1 = {(r(s), a, frozenset(map(r, br)), frozenset(map(r, S))) for s, a, br, S in self.delta1}
        return B

    # ------------------------------------------------------------------
    # views

    def tree_transitions(self) -> Iterable[Tuple[str, int, int, str, str]]:
        for (q, i, m, c), lst in self.tree_trans.items():
            for s in lst:
                yield q, i, m, c, s

    def delta_transitions(self, k: int) -> Iterable[Tuple[str, str, StateSet]]:
        for (s, S), lst in self.delta[k].items():
            for top in lst:
                yield s, top, S

    def transition_count(self) -> Dict[str, int]:
        out = {"tree": sum(len(v) for v in self.tree_trans.values())}
        for k in range(self.order, 1, -1):
            out[f"order{k}"] = sum(len(v) for v in self.delta[k].values())
        out["order1"] = len(self.delta1)
        return out

    def state_count(self) -> Dict[str, int]:
        out = {"tree": len(self.tree_states)}
        for k in range(self.order, 0, -1):
            out[f"order{k}"] = len(self.layer_states[k])
        return out

    def max_arity(self) -> int:
        return max((m for (_, _, m, _) in self.tree_trans), default=0)

    def arities(self) -> Set[int]:
        return {m for (_, _, m, _) in self.tree_trans}

    def br_order(self, br: StateSet) -> Optional[int]:
        for x in br:
            return self.state_order[x]
        return None

    @property
    def index(self) -> "_Index":
        if self._idx is None:
            self._idx = _Index(self)
        return self._idx

    def initial_stack_states(self) -> Set[str]:
        out = set()
        for lst in self.tree_trans.values():
            out.update(lst)
        for k in self.delta:
            for lst in self.delta[k].values():
                out.update(lst)
        return out

    # ------------------------------------------------------------------
    # acceptance

    def _memo_table(self):
        if self._memo_version != self.version:
            self._memo = {}
            self._memo_version = self.version
        return self._memo

    def accepts_from(self, s: str, stack: Stack, offset: int = 0) -> bool:
        """Is stack (read from the given item offset) accepted from state s?"""
        k = self.state_order.get(s)
        if k is None:
            raise StateOrderMismatch(f"unknown stack state {s}")
        if k != stack.order:
            return False
        memo = self._memo_table()
        key = (s, stack, offset)
        hit = memo.get(key)
        if hit is not None:
            return hit
        memo[key] = False  # stacks are finite, so no real cycles; guard anyway
        res = self._accepts(s, k, stack, offset)
        memo[key] = res
        return res

    def _accepts(self, s, k, stack, offset):
        if offset >= len(stack.items):
            return s in self.layer_finals[k]
        idx = self.index
        x = stack.items[offset]
        if k == 1:
            for br, rest in idx.out1.get((s, x.char), ()):
                if all(self.accepts_from(b, x.ann) for b in br) and all(
                    self.accepts_from(t, stack, offset + 1) for t in rest
                ):
                    return True
            return False
        for top, rest in idx.outk.get(s, ()):
            if self.accepts_from(top, x) and all(self.accepts_from(t, stack, offset + 1) for t in rest):
                return True
        return False

    def accepts_set(self, S: Iterable[str], stack: Stack) -> bool:
        return all(self.accepts_from(s, stack) for s in S)

    def run_labels(self, t: Node) -> Set[str]:
        """Set of tree states that can label the root of t in a partial run."""
        if t.is_leaf:
            return {t.control}
        labels = None
        m = len(t.children)
        idx = self.index
        for i, c in enumerate(t.children, 1):
            below = self.run_labels(c)
            ok = set()
            for child in below:
                for q, s in idx.by_pos_child.get((i, m, child), ()):
                    if q not in ok and (labels is None or q in labels) and self.accepts_from(s, c.stack):
                        ok.add(q)
            labels = ok if labels is None else labels & ok
            if not labels:
                return set()
        return labels

    def accepts_tree(self, t: Optional[Node]) -> bool:
        if t is None:
            return False
        labels = self.run_labels(t)
        idx = self.index
        for q in labels:
            for f, s in idx.by_pos_child.get((1, 1, q), ()):
                if f in self.finals and self.accepts_from(s, t.stack):
                    return True
        return False


class _Index:
    """Lookup tables derived from an automaton; rebuilt after each change."""

    def __init__(self, A: TreeAutomaton):
        self.by_pos_child = defaultdict(list)
        self.by_child = defaultdict(list)
        self.by_parent = defaultdict(list)
        for q, i, m, c, s in A.tree_transitions():
            self.by_pos_child[(i, m, c)].append((q, s))
            self.by_child[c].append((q, i, m, s))
            self.by_parent[q].append((i, m, c, s))
        self.outk = defaultdict(list)
        for k in A.delta:
            for s, top, S in A.delta_transitions(k):
                self.outk[s].append((top, S))
        self.out1 = defaultdict(list)
        self.out1_state = defaultdict(list)
        for s, a, br, S in sorted(A.delta1, key=_t1_sort_key):
            self.out1[(s, a)].append((br, S))
            self.out1_state[s].append((a, br, S))


def _t1_sort_key(t):
    s, a, br, S = t
    return (s, a, sorted(br), sorted(S))


def stack_accepts(A: TreeAutomaton, S0: Iterable[str], s: Stack) -> bool:
    S0 = list(S0)
    for x in S0:
        k = A.state_order.get(x)
        if k is None:
            raise StateOrderMismatch(f"unknown stack state {x}")
        if k != s.order:
            raise StateOrderMismatch(f"{x} is an order-{k} state, stack has order {s.order}")
    return A.accepts_set(S0, s)


def tree_accepts(A: TreeAutomaton, t: Optional[Node]) -> bool:
    return A.accepts_tree(t)


# ----------------------------------------------------------------------
# structural predicates


def key_uniqueness_violations(A: TreeAutomaton) -> List[str]:
    out = []
    for key, lst in A.tree_trans.items():
        if len(lst) > 1:
            out.append(f"tree key {key} has {len(lst)} transitions")
    for k, d in A.delta.items():
        for (s, S), lst in d.items():
            if len(lst) > 1:
                out.append(f"order-{k} key ({s}, {sorted(S)}) has {len(lst)} transitions")
    return out


def normal_form_violations(A: TreeAutomaton) -> List[str]:
    """Check the side conditions saturation relies on.

    Controls must never be parents; initial stack states (those labelling
    tree transitions or reading the top of an order-k transition) must be
    non-final, never appear inside a target or annotation set, and label
    exactly one transition. Keys must also be unique.
    """
    out = []
    for (q, i, m, c) in A.tree_trans:
        if q in A.controls:
            out.append(f"control {q} has an incoming transition")
            break
    for c in sorted(A.controls & A.finals):
        out.append(f"control {c} is final")
    uses = defaultdict(int)
    for lst in A.tree_trans.values():
        for s in lst:
            uses[s] += 1
    for k in A.delta:
        for lst in A.delta[k].values():
            for s in lst:
                uses[s] += 1
    targets = set()
    for k in A.delta:
        for (s, S) in A.delta[k]:
            targets |= S
    for s, a, br, S in A.delta1:
        targets |= S
        targets |= br
    for s in sorted(uses):
        k = A.state_order[s]
        if s in A.layer_finals[k]:
            out.append(f"initial state {s} is final")
        if s in targets:
            out.append(f"initial state {s} has an incoming transition")
        if uses[s] > 1:
            out.append(f"initial state {s} labels {uses[s]} transitions")
    out.extend(key_uniqueness_violations(A))
    return out


def is_normalized(A: TreeAutomaton) -> bool:
    return not normal_form_violations(A)


def reachable_stack_states(A: TreeAutomaton) -> Set[str]:
    seen = set(A.initial_stack_states())
    todo = list(seen)
    idx = A.index
    while todo:
        s = todo.pop()
        nxt = []
        for top, S in idx.outk.get(s, ()):
            nxt.append(top)
            nxt.extend(S)
        for a, br, S in idx.out1_state.get(s, ()):
            nxt.extend(br)
            nxt.extend(S)
        for x in nxt:
            if x not in seen:
                seen.add(x)
                todo.append(x)
    return seen


def trim(A: TreeAutomaton) -> TreeAutomaton:
    """Drop stack states not reachable from any tree transition."""
    keep = reachable_stack_states(A)
    B = TreeAutomaton(A.order, A.alphabet, A.controls)
    B.tree_states = set(A.tree_states)
    B.finals = set(A.finals)
    B.tree_trans = {k: list(v) for k, v in A.tree_trans.items()}
    for k in A.layer_states:
        B.layer_states[k] = {x for x in A.layer_states[k] if x in keep}
        B.layer_finals[k] = {x for x in A.layer_finals[k] if x in keep}
    B.state_order = {x: k for x, k in A.state_order.items() if x in keep}
    B.delta = {k: {kk: list(v) for kk, v in d.items() if kk[0] in keep} for k, d in A.delta.items()}
    B.delta1 = {t for t in A.delta1 if t[0] in keep}
    B._fresh = A._fresh
    return B


def same_structure(A: TreeAutomaton, B: TreeAutomaton) -> bool:
    return (
        A.order == B.order
        and A.alphabet == B.alphabet
        and A.controls == B.controls
        and A.tree_states == B.tree_states
        and A.finals == B.finals
        and A.layer_states == B.layer_states
        and A.layer_finals == B.layer_finals
        and {k: set(v) for k, v in A.tree_trans.items()} == {k: set(v) for k, v in B.tree_trans.items()}
        and {k: {kk: set(v) for kk, v in d.items()} for k, d in A.delta.items()}
        == {k: {kk: set(v) for kk, v in d.items()} for k, d in B.delta.items()}
        and A.delta1 == B.delta1
    )
