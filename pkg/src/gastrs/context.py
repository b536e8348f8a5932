"""Rewrite systems with a global state and context-bounded backward
reachability.

A global rule ``(g, op, g')`` fires only while the global state is g and
moves it to g'. Runs are bounded by the number of global changes. The
answer for a global g is assembled from backward sequences g = g0, g1, ...,
gm (consecutive globals distinct, m at most the bound): the last global
saturates its own target, and each earlier one saturates the trees that
are one change away from the answer of its successor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .automata.boolean import union_all
from .automata.core import TreeAutomaton
from .automata.normalize import normalize
from .automata.shortform import ShortForm, ShortForms, expand_short_form
from .errors import RuleShapeViolation
from .saturation import saturate
from .stacks import Rew
from .trees import Gastrs, Join, Local, Spawn, TreeOp, normalize_joins, op_controls

log = logging.getLogger(__name__)

GlobalRule = Tuple[str, TreeOp, str]


@dataclass
class GlobalGastrs:
    order: int
    alphabet: Tuple[str, ...]
    controls: Tuple[str, ...]
    globals: Tuple[str, ...]
    rules: Tuple[GlobalRule, ...] = ()

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.controls = tuple(self.controls)
        self.globals = tuple(self.globals)
        self.rules = tuple(dict.fromkeys(tuple(r) for r in self.rules))

    def change_rules(self, g: str, g2: str) -> List[TreeOp]:
        return [op for a, op, b in self.rules if a == g and b == g2]

    def as_plain(self, g: str) -> Gastrs:
        return project_local(self, g)

    def validate(self) -> None:
        from .errors import ValidationError

        gs = set(self.globals)
        for g, op, g2 in self.rules:
            for x in (g, g2):
                if x not in gs:
                    raise ValidationError(f"unknown global {x!r}")
        Gastrs(self.order, self.alphabet, self.controls, tuple(op for _, op, _ in self.rules)).validate()


def project_local(GG: GlobalGastrs, g: str) -> Gastrs:
    """The rules that fire at g without changing the global state."""
    rules = tuple(op for a, op, b in GG.rules if a == g == b)
    return Gastrs(GG.order, GG.alphabet, GG.controls, rules)


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def normalize_global(GG: GlobalGastrs) -> GlobalGastrs:
    """Rewrite every change rule into an identity-or-relabelling rew.

    A local or join change rule first fires inside g and hands its leaf to a
    fresh control; the change itself is then an identity rewrite of that
    leaf. A spawn change rule first moves its leaf to a fresh control by an
    identity rewrite that changes the global, and the spawn follows in g'.
    Either way the run makes exactly one global change.
    """
    taken = set(GG.controls)
    controls = list(GG.controls)
    rules: List[GlobalRule] = []
    for g, op, g2 in GG.rules:
        if g == g2 or (isinstance(op, Local) and isinstance(op.op, Rew)):
            rules.append((g, op, g2))
            continue
        mid = _fresh(f"{g}_{g2}_" + "_".join(op_controls(op)), taken)
        controls.append(mid)
        if isinstance(op, Local):
            rules.append((g, Local(op.source, op.op, mid), g))
            rules.extend((g, Local(mid, Rew(a, a), op.target), g2) for a in GG.alphabet)
        elif isinstance(op, Join):
            rules.append((g, Join(op.sources, mid), g))
            rules.extend((g, Local(mid, Rew(a, a), op.target), g2) for a in GG.alphabet)
        elif isinstance(op, Spawn):
            rules.extend((g, Local(op.source, Rew(a, a), mid), g2) for a in GG.alphabet)
            rules.append((g2, Spawn(mid, op.targets), g2))
    return GlobalGastrs(GG.order, GG.alphabet, tuple(controls), GG.globals, tuple(rules))


def marked(q: str, j: int) -> str:
    return f"{q}|{j}"


def mark_single_application(A: TreeAutomaton, max_arity: Optional[int] = None) -> TreeAutomaton:
    """Tree states (q, j) remember where a single change application sits:
    j = 0 when the subtree has none, otherwise the child containing it.
    Only trees with exactly one application are accepted; no transition yet
    marks a leaf, so the result starts out empty."""
    m = max_arity if max_arity is not None else max(A.max_arity(), 1)
    R = TreeAutomaton(A.order, A.alphabet, A.controls)
    for k in A.layer_states:
        for s in A.layer_states[k]:
            R.add_stack_state(s, k, s in A.layer_finals[k])
    for k, d in A.delta.items():
        for key, lst in d.items():
            R.delta[k][key] = list(lst)
    R.delta1 = set(A.delta1)
    for q in sorted(A.tree_states):
        for j in range(m + 1):
            R.add_tree_state(marked(q, j), final=(q in A.finals and j > 0))
    for q, i, n, c, s in A.tree_transitions():
        if c in A.controls:
            R.add_tree_transition(marked(q, 0), i, n, c, s)
            for j in range(1, n + 1):
                if j != i:
                    R.add_tree_transition(marked(q, j), i, n, c, s)
        R.add_tree_transition(marked(q, 0), i, n, marked(c, 0), s)
        for j in range(1, m + 1):
            R.add_tree_transition(marked(q, i), i, n, marked(c, j), s)
        for j in range(1, n + 1):
            if j != i:
                R.add_tree_transition(marked(q, j), i, n, marked(c, 0), s)
    return R


def add_change_transitions(A2: TreeAutomaton, A_prev: TreeAutomaton, rules: Sequence[TreeOp]) -> TreeAutomaton:
    """Let the marked leaf be the one a change rule rewrites: every reading
    of A_prev over the rewritten top becomes a marked reading of the
    original top."""
    R = A2.copy()
    for c in A_prev.controls:
        if c not in R.tree_states:
            R.add_tree_state(c)
        R.controls.add(c)
    sf = ShortForms(A_prev)
    pending = []
    for rule in rules:
        if not (isinstance(rule, Local) and isinstance(rule.op, Rew)):
            raise RuleShapeViolation(f"change rule {rule} is not a rew")
        a, b = rule.op.a, rule.op.b
        for q, i, n, s in A_prev.index.by_child.get(rule.target, ()):
            for br, sets in sf.full_char(s, b):
                pending.append(ShortForm(marked(q, i), i, n, rule.source, a, br, sets))
    for e in pending:
        expand_short_form(R, e)
    return R


@dataclass
class ContextResult:
    automata: Dict[str, TreeAutomaton]
    saturations: int = 0
    sequences: List[Tuple[str, ...]] = field(default_factory=list)


def global_sequences(globals_: Sequence[str], start: str, bound: int):
    """All sequences from start with at most `bound` changes and distinct
    neighbours."""
    out = []

    def walk(seq):
        out.append(tuple(seq))
        if len(seq) <= bound:
            for g in globals_:
                if g != seq[-1]:
                    walk(seq + [g])

    walk([start])
    return out


def context_bounded_prestar(
    GG: GlobalGastrs, targets: Dict[str, TreeAutomaton], bound: int, **saturate_kw
) -> ContextResult:
    GGn = normalize_global(GG)
    memo: Dict[Tuple[str, ...], Optional[TreeAutomaton]] = {}
    result = ContextResult({})
    local = {g: normalize_joins(project_local(GGn, g)) for g in GGn.globals}

    def solve(seq):
        if seq in memo:
            return memo[seq]
        g = seq[0]
        if len(seq) == 1:
            T = targets.get(g)
            start = None if T is None else normalize(T)
        else:
            prev = solve(seq[1:])
            rules = GGn.change_rules(g, seq[1])
            if prev is None or not rules:
                start = None
            else:
                A2 = mark_single_application(prev)
                start = normalize(add_change_transitions(A2, prev, rules))
        if start is None:
            memo[seq] = None
            return None
        result.saturations += 1
        A = saturate(local[g], start, **saturate_kw)
        memo[seq] = A
        return A

    for g in GGn.globals:
        parts = []
        for seq in global_sequences(GGn.globals, g, bound):
            result.sequences.append(seq)
            A = solve(seq)
            if A is not None:
                parts.append(A)
        if parts:
            result.automata[g] = union_all(parts)
        else:
            E = TreeAutomaton(GG.order, GG.alphabet, GGn.controls)
            result.automata[g] = E
    log.debug("context-bounded run: %d saturations", result.saturations)
    return result
