"""Backward reachability by saturation.

Starting from a normalised target automaton, transitions are added, never
removed, until the automaton accepts every tree from which the target can
be reached. Each rule of the system contributes one family of new
transitions per round, read off the short forms already present:

* rew a b (c -> c'): what c' accepts over b, c accepts over a;
* cpush k / push k: splice the duplicated top back into one reading;
* pop k / collapse k: the popped level is read by the state that was
  waiting for it, either as the rest of the stack or as the annotation;
* spawn: a leaf must satisfy its future parent and all its children;
* join: the merged leaves may carry any stack.
"""

from __future__ import annotations

import logging
import resource
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .automata.core import TreeAutomaton, key_uniqueness_violations, normal_form_violations
from .automata.shortform import EMPTY, ShortForm, ShortForms, expand_short_form
from .errors import MemoryCapExceeded, PreconditionViolated
from .stacks import CPush, Collapse, Pop, Push, Rew
from .trees import Gastrs, Join, Node, Spawn

log = logging.getLogger(__name__)

FAMILIES = ("rew", "cpush", "push", "pop", "collapse", "spawn", "join")


def family_of(rule) -> str:
    if isinstance(rule, Spawn):
        return "spawn"
    if isinstance(rule, Join):
        return "join"
    return {Rew: "rew", CPush: "cpush", Push: "push", Pop: "pop", Collapse: "collapse"}[type(rule.op)]


@dataclass
class SaturationStats:
    rounds: int = 0
    converged: bool = False
    added: Dict[str, int] = field(default_factory=lambda: {f: 0 for f in FAMILIES})
    per_round: List[Dict[str, int]] = field(default_factory=list)
    initial_transitions: Dict[str, int] = field(default_factory=dict)
    final_transitions: Dict[str, int] = field(default_factory=dict)
    final_states: Dict[str, int] = field(default_factory=dict)
    tree_key_bound: int = 0
    bound_violations: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "converged": self.converged,
            "added": dict(self.added),
            "per_round": [dict(r) for r in self.per_round],
            "initial_transitions": dict(self.initial_transitions),
            "final_transitions": dict(self.final_transitions),
            "final_states": dict(self.final_states),
            "tree_key_bound": self.tree_key_bound,
            "bound_violations": list(self.bound_violations),
        }


def join_violations(G: Gastrs) -> List[str]:
    seen = {}
    out = []
    for r in G.rules:
        if isinstance(r, Join):
            if r.target in seen:
                out.append(f"control {r.target} is the target of several joins")
            seen[r.target] = r
    return out


def _total(A: TreeAutomaton) -> int:
    return sum(A.transition_count().values())


def _rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


class Saturator:
    def __init__(
        self,
        G: Gastrs,
        A0: TreeAutomaton,
        family_order: Sequence[str] = FAMILIES,
        check: bool = True,
        mem_cap_mb: Optional[float] = None,
        on_round: Optional[Callable[["Saturator"], None]] = None,
    ):
        if check:
            problems = join_violations(G) + normal_form_violations(A0)
            if A0.order != G.order:
                problems.append(f"system has order {G.order}, automaton order {A0.order}")
            missing = set(G.alphabet) - set(A0.alphabet)
            if missing:
                problems.append(f"characters {sorted(missing)} unknown to the automaton")
            if problems:
                raise PreconditionViolated(problems)
        self.G = G
        A = A0.copy()
        if set(G.alphabet) != set(A.alphabet):
            A.alphabet = tuple(dict.fromkeys(A.alphabet + G.alphabet))
        for c in G.controls:
            if c not in A.tree_states:
                A.add_tree_state(c)
            A.controls.add(c)
        self.A = A
        self.family_order = tuple(family_order)
        self.mem_cap_mb = mem_cap_mb
        self.on_round = on_round
        self.by_family = {f: [r for r in G.rules if family_of(r) == f] for f in FAMILIES}
        self.seen: Dict[str, set] = {f: set() for f in FAMILIES}
        self.stats = SaturationStats()
        self.stats.initial_transitions = A.transition_count()
        arities = A.arities() | G.arities()
        self.stats.tree_key_bound = len(A.tree_states) ** 2 * sum(arities)
        self._base_states = {k: len(v) for k, v in A.layer_states.items()}

    # ------------------------------------------------------------------
    # emissions per family

    def _emit_rew(self, rule, sf: ShortForms):
        A = self.A
        c, op, c2 = rule.source, rule.op, rule.target
        for q, i, m, s in A.index.by_child.get(c2, ()):
            for br, sets in sf.full_char(s, op.b):
                yield ShortForm(q, i, m, c, op.a, br, sets)

    def _emit_cpush(self, rule, sf: ShortForms):
        A = self.A
        k = rule.op.k
        c, c2 = rule.source, rule.target
        for q, i, m, s in A.index.by_child.get(c2, ()):
            for a, br, sets in sf.full(s):
                if br and A.br_order(br) != k:
                    continue
                for br2, (s1,) in sf.lifted(sets[0], 1, a):
                    new = list(sets)
                    if k == 1:
                        new[0] = s1 | br
                    else:
                        new[0] = s1
                        new[k - 1] = sets[k - 1] | br
                    yield ShortForm(q, i, m, c, a, br2, tuple(new))

    def _emit_push(self, rule, sf: ShortForms):
        A = self.A
        k = rule.op.k
        c, c2 = rule.source, rule.target
        for q, i, m, s in A.index.by_child.get(c2, ()):
            for a, br, sets in sf.full(s):
                for br2, low in sf.lifted(sets[k - 1], k, a):
                    if br and br2 and A.br_order(br) != A.br_order(br2):
                        continue
                    new = [sets[j] | low[j] for j in range(k - 1)]
                    new.append(low[k - 1])
                    new.extend(sets[k:])
                    yield ShortForm(q, i, m, c, a, br | br2, tuple(new))

    def _emit_pop(self, rule, sf: ShortForms, as_annotation=False):
        A = self.A
        k = rule.op.k
        c, c2 = rule.source, rule.target
        for q, i, m, s in A.index.by_child.get(c2, ()):
            for sk, upper in sf.truncated(s, k):
                if as_annotation:
                    br = frozenset([sk])
                    sets = (EMPTY,) * k + upper
                else:
                    br = EMPTY
                    sets = (EMPTY,) * (k - 1) + (frozenset([sk]),) + upper
                for a in A.alphabet:
                    yield ShortForm(q, i, m, c, a, br, sets)

    def _emit_spawn(self, rule, sf: ShortForms):
        A = self.A
        c = rule.source
        kids = rule.targets
        mm = len(kids)
        n = A.order
        tt = A.tree_trans
        for (q, j, m, q2), lst in list(tt.items()):
            child_states = []
            for i, ci in enumerate(kids, 1):
                states = tt.get((q2, i, mm, ci))
                if not states:
                    break
                child_states.append(states)
            else:
                for s in lst:
                    for a, br, sets in sf.full(s):
                        acc = {(br, sets)}
                        for states in child_states:
                            opts = [o for s_i in states for o in sf.full_char(s_i, a)]
                            nxt = set()
                            for br0, sets0 in acc:
                                for br1, sets1 in opts:
                                    if br0 and br1 and A.br_order(br0) != A.br_order(br1):
                                        continue
                                    nxt.add((br0 | br1, tuple(x | y for x, y in zip(sets0, sets1))))
                            acc = nxt
                            if not acc:
                                break
                        for br_u, sets_u in acc:
                            assert len(sets_u) == n
                            yield ShortForm(q, j, m, c, a, br_u, sets_u)

    def _emit_join(self, rule, sf: ShortForms):
        A = self.A
        m = len(rule.sources)
        none = (EMPTY,) * A.order
        for j, cj in enumerate(rule.sources, 1):
            for a in A.alphabet:
                yield ShortForm(rule.target, j, m, cj, a, EMPTY, none)

    def _emissions(self, family, rule, sf):
        if family == "rew":
            return self._emit_rew(rule, sf)
        if family == "cpush":
            return self._emit_cpush(rule, sf)
        if family == "push":
            return self._emit_push(rule, sf)
        if family == "pop":
            return self._emit_pop(rule, sf)
        if family == "collapse":
            return self._emit_pop(rule, sf, as_annotation=True)
        if family == "spawn":
            return self._emit_spawn(rule, sf)
        return self._emit_join(rule, sf)

    # ------------------------------------------------------------------

    def step(self) -> bool:
        """Apply every rule family once; False when nothing was added."""
        A = self.A
        changed = False
        row = {}
        for family in self.family_order:
            before = _total(A)
            for rule in self.by_family[family]:
                sf = ShortForms(A)
                seen = self.seen[family]
                batch = []
                for e in self._emissions(family, rule, sf):
                    if e not in seen:
                        seen.add(e)
                        batch.append(e)
                for e in batch:
                    if expand_short_form(A, e):
                        changed = True
            added = _total(A) - before
            row[family] = added
            self.stats.added[family] += added
        self.stats.rounds += 1
        self.stats.per_round.append(row)
        self._check_bounds()
        if self.mem_cap_mb is not None and _rss_mb() > self.mem_cap_mb:
            raise MemoryCapExceeded(f"resident memory above {self.mem_cap_mb:.0f} MB")
        if self.on_round is not None:
            self.on_round(self)
        return changed

    def _check_bounds(self):
        A = self.A
        out = self.stats.bound_violations
        out.extend(key_uniqueness_violations(A))
        tree = sum(len(v) for v in A.tree_trans.values())
        if tree > self.stats.tree_key_bound:
            out.append(f"{tree} tree transitions exceed the key bound {self.stats.tree_key_bound}")
        keys_above = len(A.tree_trans)
        for k in range(A.order, 0, -1):
            q = len(A.layer_states[k])
            limit = self._base_states[k] + keys_above
            if q > limit:
                out.append(f"{q} order-{k} states exceed {limit}")
            if k >= 2:
                keys_above = len(A.delta[k])
                if keys_above > q * 2 ** q:
                    out.append(f"order-{k} keys exceed {q}*2^{q}")

    def run(self, max_rounds: Optional[int] = None) -> TreeAutomaton:
        while max_rounds is None or self.stats.rounds < max_rounds:
            if not self.step():
                self.stats.converged = True
                break
        A = self.A
        self.stats.final_transitions = A.transition_count()
        self.stats.final_states = A.state_count()
        log.debug("saturation finished after %d rounds", self.stats.rounds)
        return A


def saturate(G: Gastrs, A0: TreeAutomaton, **kw) -> TreeAutomaton:
    max_rounds = kw.pop("max_rounds", None)
    return Saturator(G, A0, **kw).run(max_rounds)


def saturate_with_stats(G: Gastrs, A0: TreeAutomaton, max_rounds=None, **kw):
    sat = Saturator(G, A0, **kw)
    A = sat.run(max_rounds)
    return A, sat.stats


def saturation_step(state: Saturator):
    changed = state.step()
    return state, changed


def prestar_member(G: Gastrs, A0: TreeAutomaton, t: Node) -> bool:
    return saturate(G, A0).accepts_tree(t)
