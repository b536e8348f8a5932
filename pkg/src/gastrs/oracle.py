"""Independent ground truth: forward search, exhaustive enumeration, random
instance generators and brute-force run search.

Nothing here uses saturation or the bottom-up membership procedure, so the
results can be compared against them.

Several checks restrict attention to grounded trees, i.e. trees whose
stacks contain no empty substack below the top level (empty annotations
are allowed). Saturation reads stacks through their top characters, so it
describes exactly the runs that stay grounded.
"""

from __future__ import annotations

import enum
import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .automata.core import TreeAutomaton
from .stacks import (
    Collapse,
    CPush,
    EMPTY1,
    Pop,
    Push,
    Rew,
    Stack,
    Sym,
    empty,
)
from .trees import Gastrs, Join, Local, Node, Spawn, TreeOp, is_grounded_tree, successor_steps


# ----------------------------------------------------------------------
# forward search


@dataclass
class SearchBudget:
    max_depth: int = 12
    max_nodes: int = 8
    max_stack: int = 24
    max_visited: int = 200_000

    def __post_init__(self):
        for name in ("max_depth", "max_nodes", "max_stack", "max_visited"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


class Verdict(enum.Enum):
    REACHABLE = "reachable"
    EXHAUSTED_NEGATIVE = "exhausted-negative"
    NOT_WITHIN_BUDGET = "not-within-budget"


@dataclass
class ReachResult:
    verdict: Verdict
    run: Optional[List[Tuple[object, int]]] = None
    visited: int = 0
    switches: Optional[int] = None

    @property
    def reachable(self) -> bool:
        return self.verdict is Verdict.REACHABLE


def _within(t: Node, b: SearchBudget) -> bool:
    return t.node_count() <= b.max_nodes and t.symbol_count() <= b.max_stack


def bounded_forward_reach(
    G: Gastrs,
    t: Node,
    A0: TreeAutomaton,
    budget: Optional[SearchBudget] = None,
    grounded: bool = False,
    negatives: Optional[set] = None,
) -> ReachResult:
    """Breadth-first search from t for a tree accepted by A0.

    With grounded=True, successors with an empty substack are dropped. A
    `negatives` set, when given, is consulted and extended with trees
    proven unable to reach the target (for repeated queries on one
    instance)."""
    b = budget or SearchBudget()
    parent: Dict[Node, Optional[Tuple[Node, object, int]]] = {t: None}
    if A0.accepts_tree(t):
        return ReachResult(Verdict.REACHABLE, [], 1)
    queue = deque([(t, 0)])
    overflow = False
    while queue:
        cur, depth = queue.popleft()
        if depth >= b.max_depth:
            if any(True for _ in successor_steps(G.rules, cur)):
                overflow = True
            continue
        for rule, i, nxt in successor_steps(G.rules, cur):
            if nxt in parent:
                continue
            if grounded and not is_grounded_tree(nxt):
                continue
            if negatives is not None and nxt in negatives:
                continue
            if not _within(nxt, b):
                overflow = True
                continue
            if len(parent) >= b.max_visited:
                overflow = True
                break
            parent[nxt] = (cur, rule, i)
            if A0.accepts_tree(nxt):
                run = []
                x = nxt
                while parent[x] is not None:
                    p, r, j = parent[x]
                    run.append((r, j))
                    x = p
                run.reverse()
                return ReachResult(Verdict.REACHABLE, run, len(parent))
            queue.append((nxt, depth + 1))
    if overflow:
        return ReachResult(Verdict.NOT_WITHIN_BUDGET, None, len(parent))
    if negatives is not None:
        negatives.update(parent)
    return ReachResult(Verdict.EXHAUSTED_NEGATIVE, None, len(parent))


class ExhaustiveReach:
    """Reachability decided by memoised recursion over successors, for
    systems where every run terminates. Revisiting a tree on the current
    path means the system is not terminating and raises ValueError."""

    def __init__(self, G: Gastrs, A0: TreeAutomaton, grounded: bool = True):
        self.G = G
        self.A0 = A0
        self.grounded = grounded
        self.memo: Dict[Node, bool] = {}

    def reachable(self, t: Node) -> bool:
        return self._reach(t, set())

    def _reach(self, t: Node, active: set) -> bool:
        memo = self.memo
        if t in memo:
            return memo[t]
        if t in active:
            raise ValueError("system has a cyclic run")
        if self.A0.accepts_tree(t):
            memo[t] = True
            return True
        active.add(t)
        found = False
        for _, _, nxt in successor_steps(self.G.rules, t):
            if self.grounded and not is_grounded_tree(nxt):
                continue
            if self._reach(nxt, active):
                found = True
                break
        active.discard(t)
        memo[t] = found
        return found

    def verdict(self, t: Node) -> Verdict:
        return Verdict.REACHABLE if self.reachable(t) else Verdict.EXHAUSTED_NEGATIVE


def replay(G_rules: Sequence[TreeOp], t: Node, run) -> Node:
    """Apply a (rule, leaf index) sequence step by step."""
    from .trees import apply_tree_op_at

    for rule, i in run:
        t = apply_tree_op_at(rule, i, t)
    return t


def global_forward_reach(
    GG,
    g: str,
    t: Node,
    targets: Dict[str, TreeAutomaton],
    bound: int,
    budget: Optional[SearchBudget] = None,
    grounded: bool = False,
) -> ReachResult:
    """Search over (global, tree) pairs allowing at most `bound` changes of
    the global state. The run lists (g, rule, g', leaf index) steps."""
    b = budget or SearchBudget()

    def hit(gl, tree):
        A = targets.get(gl)
        return A is not None and A.accepts_tree(tree)

    start = (g, t)
    best = {start: 0}
    parent = {start: None}
    if hit(g, t):
        return ReachResult(Verdict.REACHABLE, [], 1, switches=0)
    by_global: Dict[str, list] = {}
    for g1, op, g2 in GG.rules:
        by_global.setdefault(g1, []).append((op, g2))
    queue = deque([(start, 0, 0)])
    overflow = False
    while queue:
        (gl, cur), depth, sw = queue.popleft()
        if sw > best.get((gl, cur), sw):
            continue
        rules = by_global.get(gl, ())
        if depth >= b.max_depth:
            overflow = overflow or bool(rules)
            continue
        for op, g2 in rules:
            nsw = sw + (g2 != gl)
            if nsw > bound:
                continue
            for rule, i, nxt in successor_steps([op], cur):
                key = (g2, nxt)
                if key in best and best[key] <= nsw:
                    continue
                if grounded and not is_grounded_tree(nxt):
                    continue
                if not _within(nxt, b):
                    overflow = True
                    continue
                if len(best) >= b.max_visited:
                    overflow = True
                    break
                best[key] = nsw
                parent[key] = ((gl, cur), (gl, rule, g2, i))
                if hit(g2, nxt):
                    run = []
                    x = key
                    while parent[x] is not None:
                        p, step = parent[x]
                        run.append(step)
                        x = p
                    run.reverse()
                    return ReachResult(Verdict.REACHABLE, run, len(best), switches=nsw)
                queue.append((key, depth + 1, nsw))
    verdict = Verdict.NOT_WITHIN_BUDGET if overflow else Verdict.EXHAUSTED_NEGATIVE
    return ReachResult(verdict, None, len(best))


# ----------------------------------------------------------------------
# exhaustive enumeration


@dataclass(frozen=True)
class Bounds:
    """Enumeration bounds. `symbols` caps the total number of stack symbols
    in a tree (annotations included); `ann_depth` caps annotation nesting
    (0 means every annotation is the empty order-1 stack)."""

    nodes: int = 1
    symbols: int = 2
    ann_depth: int = 0
    max_arity: Optional[int] = None
    grounded: bool = True


class StackEnumerator:
    def __init__(self, order: int, alphabet: Sequence[str], ann_depth: int = 0, grounded: bool = True):
        self.n = order
        self.alphabet = tuple(alphabet)
        self.ann_depth = ann_depth
        self.grounded = grounded
        self._stacks = lru_cache(maxsize=None)(self._stacks_impl)
        self._seqs = lru_cache(maxsize=None)(self._seqs_impl)
        self._syms = lru_cache(maxsize=None)(self._syms_impl)

    def stacks(self, k: int, size: int, depth: Optional[int] = None) -> Tuple[Stack, ...]:
        """Stacks of order k with exactly `size` units. A unit is a symbol;
        outside grounded mode an empty substack also costs one unit."""
        return self._stacks(k, size, self.ann_depth if depth is None else depth)

    def _stacks_impl(self, k, size, depth):
        out = []
        for items in self._seqs(k, size, depth, True):
            out.append(Stack(k, items))
        if not self.grounded:
            out.extend(Stack(k, items) for items in self._seqs(k, size, depth, False))
        return tuple(out)

    def _item_options(self, k, size, depth):
        # items of an order-k stack, each with exactly `size` units
        if k == 1:
            return self._syms(size, depth)
        if self.grounded:
            return self.stacks(k - 1, size, depth) if size >= 1 else ()
        opts = list(self.stacks(k - 1, size, depth)) if size >= 1 else []
        if size == 1:
            opts.insert(0, empty(k - 1))
        return tuple(opts)

    def _seqs_impl(self, k, size, depth, nonempty):
        # sequences of items totalling `size`; nonempty selects length >= 1
        out = []
        if size == 0:
            return ((),) if not nonempty else ()
        for first in range(1, size + 1):
            heads = self._item_options(k, first, depth)
            if not heads:
                continue
            for rest in self._seqs(k, size - first, depth, False):
                for h in heads:
                    out.append((h,) + rest)
        if not nonempty:
            return tuple(out)
        return tuple(out)

    def _annotations(self, size, depth):
        if size == 0:
            anns = [EMPTY1] + ([empty(j) for j in range(2, self.n + 1)] if depth >= 1 else [])
            return anns
        if depth == 0:
            return []
        out = []
        for j in range(1, self.n + 1):
            out.extend(self.stacks(j, size, depth - 1))
        return out

    def _syms_impl(self, size, depth):
        out = []
        for a in self.alphabet:
            for ann in self._annotations(size - 1, depth):
                out.append(Sym(a, ann))
        return tuple(out)

    def up_to(self, k: int, max_size: int) -> Iterator[Stack]:
        lo = 1 if self.grounded else 0
        if lo == 0:
            yield empty(k)
        for s in range(1, max_size + 1):
            yield from self.stacks(k, s)


def _shapes(n: int) -> List[tuple]:
    """Ordered tree shapes with exactly n nodes; a shape is the tuple of its
    children's shapes."""
    if n == 1:
        return [()]
    out = []
    for forest in _forests(n - 1):
        out.append(forest)
    return out


@lru_cache(maxsize=None)
def _forests(n: int) -> Tuple[tuple, ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        for head in _shapes(first):
            for rest in _forests(n - first):
                out.append((head,) + rest)
    return tuple(out)


def _shape_nodes(shape) -> int:
    return 1 + sum(_shape_nodes(c) for c in shape)


def enumerate_trees(
    alphabet: Sequence[str],
    controls: Sequence[str],
    order: int,
    bounds: Bounds,
) -> Iterator[Node]:
    """Every tree within the bounds, each exactly once, in a fixed order."""
    se = StackEnumerator(order, alphabet, bounds.ann_depth, bounds.grounded)
    lo = 1 if bounds.grounded else 0
    controls = tuple(controls)

    def stacks_with(size):
        if size == 0:
            return (empty(order),)
        return se.stacks(order, size)

    def fill(shape, budget):
        # yields (node, units used)
        reserve_kids = lo * (_shape_nodes(shape) - 1)
        for size in range(lo, budget - reserve_kids + 1):
            for st in stacks_with(size):
                if not shape:
                    for c in controls:
                        yield Node(st, c), size
                else:
                    for kids, used in fill_forest(shape, budget - size):
                        yield Node(st, None, kids), size + used

    def fill_forest(shapes, budget):
        if not shapes:
            yield (), 0
            return
        head, rest = shapes[0], shapes[1:]
        reserve = lo * sum(_shape_nodes(s) for s in rest)
        for node, used in fill(head, budget - reserve):
            for tail, used2 in fill_forest(rest, budget - used):
                yield (node,) + tail, used + used2

    for n in range(1, bounds.nodes + 1):
        for shape in _shapes(n):
            if bounds.max_arity is not None and _max_arity(shape) > bounds.max_arity:
                continue
            for t, _ in fill(shape, bounds.symbols):
                yield t


def _max_arity(shape) -> int:
    return max([len(shape)] + [_max_arity(c) for c in shape])


# ----------------------------------------------------------------------
# random generation


def random_stack(rng: random.Random, order: int, alphabet: Sequence[str], max_symbols: int = 10,
                 ann_prob: float = 0.3, grounded: bool = True) -> Stack:
    """A random order-`order` stack with at most max_symbols symbols."""
    budget = [max(1, rng.randint(1, max_symbols))]

    def sym():
        budget[0] -= 1
        ann = EMPTY1
        if budget[0] > 0 and rng.random() < ann_prob:
            j = rng.randint(1, order)
            ann = build(j, True, nonempty=rng.random() < 0.7)
        return Sym(rng.choice(alphabet), ann)

    def build(k, top, nonempty=True):
        items = []
        want = rng.randint(1, 3)
        while budget[0] > 0 and len(items) < want:
            if k == 1:
                items.append(sym())
            else:
                if not grounded and rng.random() < 0.1:
                    items.append(empty(k - 1))
                else:
                    items.append(build(k - 1, False))
        if not items and (nonempty or grounded):
            if k == 1:
                budget[0] = max(budget[0], 1)
                items.append(sym())
            else:
                items.append(build(k - 1, False))
        return Stack(k, items)

    return build(order, True)


def random_tree(rng: random.Random, order: int, alphabet: Sequence[str], controls: Sequence[str],
                max_nodes: int = 4, max_arity: int = 2, max_symbols: int = 5, grounded: bool = True,
                ann_prob: float = 0.2) -> Node:
    nodes = rng.randint(1, max_nodes)

    def build(budget):
        st = random_stack(rng, order, alphabet, max_symbols, ann_prob, grounded)
        if budget <= 1 or rng.random() < 0.4:
            return Node(st, rng.choice(controls)), 1
        kids = []
        used = 1
        arity = rng.randint(1, max_arity)
        for _ in range(arity):
            if budget - used <= 0:
                break
            c, u = build(budget - used)
            kids.append(c)
            used += u
        if not kids:
            return Node(st, rng.choice(controls)), 1
        return Node(st, None, kids), used

    return build(nodes)[0]


ALL_KINDS = ("rew", "cpush", "push", "pop", "collapse", "spawn", "join")
TERMINATING_KINDS = ("pop", "collapse", "join")


def random_rule(rng: random.Random, kind: str, order: int, alphabet, controls) -> TreeOp:
    c = lambda: rng.choice(controls)  # noqa: E731
    if kind == "rew":
        return Local(c(), Rew(rng.choice(alphabet), rng.choice(alphabet)), c())
    if kind == "cpush":
        return Local(c(), CPush(rng.randint(1, order)), c())
    if kind == "push":
        return Local(c(), Push(rng.randint(2, order)), c())
    if kind == "pop":
        return Local(c(), Pop(rng.randint(1, order)), c())
    if kind == "collapse":
        return Local(c(), Collapse(rng.randint(1, order)), c())
    if kind == "spawn":
        return Spawn(c(), tuple(c() for _ in range(rng.randint(1, 2))))
    if kind == "join":
        return Join(tuple(c() for _ in range(rng.randint(1, 2))), c())
    raise ValueError(kind)


def random_system(rng: random.Random, order: int, alphabet, controls, n_rules: int,
                  kinds: Sequence[str] = ALL_KINDS, must_include: Sequence[str] = ()) -> Gastrs:
    kinds = [k for k in kinds if not (k == "push" and order < 2)]
    chosen = [k for k in must_include if k in kinds]
    while len(chosen) < n_rules:
        chosen.append(rng.choice(kinds))
    rules = [random_rule(rng, k, order, alphabet, controls) for k in chosen[:max(n_rules, len(chosen))]]
    return Gastrs(order, tuple(alphabet), tuple(controls), tuple(rules))


def is_terminating_family(G: Gastrs) -> bool:
    """True when every rule strictly shrinks (nodes, symbols) on grounded
    trees."""
    for r in G.rules:
        if isinstance(r, Join):
            continue
        if isinstance(r, Local) and isinstance(r.op, (Pop, Collapse)):
            continue
        return False
    return True


def random_target(rng: random.Random, order: int, alphabet, controls, layer_states: int = 3,
                  max_arity: int = 2, tries: int = 50) -> TreeAutomaton:
    """A small random automaton with a nonempty language, normalised.

    Every layer has a final state accepting everything, so random guards
    are satisfiable often enough to be interesting."""
    from .automata.emptiness import is_empty
    from .automata.normalize import normalize

    for _ in range(tries):
        A = _random_automaton(rng, order, alphabet, controls, layer_states, max_arity)
        if not is_empty(A)[0]:
            return normalize(A)
    return normalize(A)


def _random_automaton(rng, order, alphabet, controls, layer_states, max_arity):
    A = TreeAutomaton(order, alphabet, controls)
    A.add_tree_state("f", final=True)
    A.add_tree_state("r")
    names = {}
    for k in range(1, order + 1):
        names[k] = [f"u{k}_{j}" for j in range(layer_states)]
        for j, s in enumerate(names[k]):
            A.add_stack_state(s, k, final=(j == layer_states - 1))
    for k in range(1, order + 1):
        univ = names[k][-1]
        if k == 1:
            for a in alphabet:
                A.add_delta1(univ, a, (), [univ])
        else:
            A.add_delta(k, univ, names[k - 1][-1], [univ])
        for s in names[k]:
            for _ in range(rng.randint(0 if s == univ else 1, 2)):
                rest = rng.sample(names[k], rng.randint(0, 2))
                if k == 1:
                    br = ()
                    if rng.random() < 0.3:
                        j = rng.randint(1, order)
                        br = rng.sample(names[j], 1)
                    A.add_delta1(s, rng.choice(alphabet), br, rest)
                else:
                    A.add_delta(k, s, rng.choice(names[k - 1]), rest)
    top = names[order]
    leaves = list(controls)
    for _ in range(rng.randint(1, 2)):
        A.add_tree_transition("f", 1, 1, rng.choice(leaves + ["r"]), rng.choice(top))
    m = rng.randint(1, max_arity)
    for i in range(1, m + 1):
        A.add_tree_transition("r", i, m, rng.choice(leaves), rng.choice(top))
    return A


# ----------------------------------------------------------------------
# brute-force run search


@dataclass
class StackCertificate:
    """Labels of the positions of a stack's tree view: position p of frame f
    is the point before item p; the last position follows the last item."""

    labels: Dict[Tuple[int, int], frozenset] = field(default_factory=dict)
    choices: Dict[Tuple[int, int, str], tuple] = field(default_factory=dict)


class _View:
    def __init__(self, s: Stack):
        self.frames: List[Stack] = []
        self.child: Dict[Tuple[int, int], int] = {}
        self._add(s)

    def _add(self, s: Stack) -> int:
        f = len(self.frames)
        self.frames.append(s)
        for p, x in enumerate(s.items):
            sub = x.ann if s.order == 1 else x
            self.child[(f, p)] = self._add(sub)
        return f


def check_stack_certificate(A: TreeAutomaton, S0, s: Stack, cert: StackCertificate) -> bool:
    """Verify the run conditions position by position."""
    view = _View(s)
    L = lambda f, p: cert.labels.get((f, p), frozenset())  # noqa: E731
    if not frozenset(S0) <= L(0, 0):
        return False
    for f, st in enumerate(view.frames):
        k = st.order
        for p in range(len(st.items) + 1):
            for q in L(f, p):
                if A.state_order.get(q) != k:
                    return False
        if not L(f, len(st.items)) <= A.layer_finals[k]:
            return False
        for p, x in enumerate(st.items):
            below = L(view.child[(f, p)], 0)
            nxt = L(f, p + 1)
            for q in L(f, p):
                t = cert.choices.get((f, p, q))
                if t is None:
                    return False
                if k == 1:
                    src, a, br, rest = t
                    if src != q or a != x.char or (src, a, br, rest) not in A.delta1:
                        return False
                    if not br <= below or not rest <= nxt:
                        return False
                else:
                    top, rest = t
                    if top not in A.delta[k].get((q, rest), ()):
                        return False
                    if top not in below or not rest <= nxt:
                        return False
    return True


class BruteForce:
    """Run search against one automaton. Transition tables are built once;
    no acceptance results are shared between stacks or trees."""

    def __init__(self, A: TreeAutomaton):
        self.A = A
        self.trans_k: Dict[str, list] = {}
        for k in A.delta:
            for q, top, rest in A.delta_transitions(k):
                self.trans_k.setdefault(q, []).append((top, rest))
        self.trans_1: Dict[tuple, list] = {}
        for t in A.delta1:
            self.trans_1.setdefault((t[0], t[1]), []).append(t)
        self.candidates = sorted(A.tree_states - A.finals)

    def stack_certificate(self, S0, s: Stack) -> Optional[StackCertificate]:
        """Search all transition choices for a labelling that satisfies the
        run conditions; return it, or None when none exists."""
        A = self.A
        view = _View(s)
        trans_k, trans_1 = self.trans_k, self.trans_1

        def solve(f: int, p: int, need: frozenset):
            # yields partial certificates (labels, choices) for frame f from p on
            st = view.frames[f]
            if p == len(st.items):
                if need <= A.layer_finals[st.order]:
                    yield {(f, p): need}, {}
                return
            x = st.items[p]
            qs = sorted(need)
            if st.order == 1:
                opts = [trans_1.get((q, x.char), []) for q in qs]
            else:
                opts = [[(q,) + o for o in trans_k.get(q, [])] for q in qs]
            child = view.child[(f, p)]
            for combo in itertools.product(*opts):
                if st.order == 1:
                    down = frozenset().union(*(t[2] for t in combo))
                    if len({A.state_order[b] for b in down}) > 1:
                        continue
                    rest = frozenset().union(*(t[3] for t in combo))
                else:
                    down = frozenset(t[1] for t in combo)
                    rest = frozenset().union(*(t[2] for t in combo))
                below = next(solve(child, 0, down), None)
                if below is None:
                    continue
                after = next(solve(f, p + 1, rest), None)
                if after is None:
                    continue
                labels = {(f, p): need}
                labels.update(below[0])
                labels.update(after[0])
                choices = dict(below[1])
                choices.update(after[1])
                for q, t in zip(qs, combo):
                    choices[(f, p, q)] = t if st.order == 1 else (t[1], t[2])
                yield labels, choices
                return

        S0 = frozenset(S0)
        for labels, choices in solve(0, 0, S0):
            cert = StackCertificate(labels, choices)
            if check_stack_certificate(A, S0, s, cert):
                return cert
        return None

    def stack_accepts(self, S0, s: Stack) -> bool:
        return self.stack_certificate(S0, s) is not None

    def tree_accepts(self, t: Node) -> bool:
        """Try every labelling of the internal nodes by non-final tree states."""
        A = self.A
        nodes = {}
        internal = []
        leaves = []

        def walk(n, addr):
            nodes[addr] = n
            (leaves if n.is_leaf else internal).append(addr)
            for j, c in enumerate(n.children, 1):
                walk(c, addr + (j,))

        walk(t, ())
        memo = {}

        def acc(s, stack):
            key = (s, stack)
            if key not in memo:
                memo[key] = self.stack_accepts([s], stack)
            return memo[key]

        for labels in itertools.product(self.candidates, repeat=len(internal)):
            lab = dict(zip(internal, labels))
            for addr in leaves:
                lab[addr] = nodes[addr].control
            ok = True
            for addr in internal:
                n = nodes[addr]
                m = len(n.children)
                for j, c in enumerate(n.children, 1):
                    ss = A.tree_trans.get((lab[addr], j, m, lab[addr + (j,)]), ())
                    if not any(acc(s, c.stack) for s in ss):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            for f in sorted(A.finals):
                if any(acc(s, t.stack) for s in A.tree_trans.get((f, 1, 1, lab[()]), ())):
                    return True
        return False


def brute_stack_certificate(A: TreeAutomaton, S0, s: Stack) -> Optional[StackCertificate]:
    return BruteForce(A).stack_certificate(S0, s)


def brute_stack_accepts(A: TreeAutomaton, S0, s: Stack) -> bool:
    return BruteForce(A).stack_accepts(S0, s)


def brute_tree_accepts(A: TreeAutomaton, t: Node) -> bool:
    return BruteForce(A).tree_accepts(t)
