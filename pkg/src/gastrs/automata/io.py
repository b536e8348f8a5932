"""Line-oriented automaton files and DOT export.

Example::

    order 1
    alphabet a b _
    controls p q
    tree-states f p q
    finals f
    layer 1 states s1 s2 s3
    layer 1 finals s3
    tree-trans f 1 1 q s1
    trans 1 s1 b {} {s2}
    trans 1 s2 _ {} {s3}

Order-k transitions (k >= 2) are written ``trans k s s' {S}``; order-1
transitions ``trans 1 s a {B}@j {S}`` where j is the order of the
annotation states (omitted when B is empty).
"""

from __future__ import annotations

import re
from typing import List

from ..errors import GastrsError, ParseError
from .core import TreeAutomaton

_SET = re.compile(r"^\{([^{}]*)\}(?:@(\d+))?$")


def _fmt_set(S) -> str:
    return "{" + ",".join(sorted(S)) + "}"


def format_automaton(A: TreeAutomaton) -> str:
    lines = [
        f"order {A.order}",
        "alphabet " + " ".join(A.alphabet),
        "controls " + " ".join(sorted(A.controls)),
        "tree-states " + " ".join(sorted(A.tree_states)),
        "finals " + " ".join(sorted(A.finals)),
    ]
    for k in range(A.order, 0, -1):
        lines.append(f"layer {k} states " + " ".join(sorted(A.layer_states[k])))
        lines.append(f"layer {k} finals " + " ".join(sorted(A.layer_finals[k])))
    for q, i, m, c, s in sorted(A.tree_transitions()):
        lines.append(f"tree-trans {q} {i} {m} {c} {s}")
    for k in range(A.order, 1, -1):
        rows = sorted((s, top, sorted(S)) for s, top, S in A.delta_transitions(k))
        for s, top, S in rows:
            lines.append(f"trans {k} {s} {top} {_fmt_set(S)}")
    for s, a, br, S in sorted(A.delta1, key=lambda t: (t[0], t[1], sorted(t[2]), sorted(t[3]))):
        b = _fmt_set(br)
        if br:
            b += f"@{A.br_order(br)}"
        lines.append(f"trans 1 {s} {a} {b} {_fmt_set(S)}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _parse_set(tok: str, lineno: int):
    m = _SET.match(tok)
    if not m:
        raise ParseError(f"expected a state set like {{a,b}}, got {tok!r}", line=lineno)
    body = m.group(1).strip()
    names = [x.strip() for x in body.split(",")] if body else []
    if any(not x for x in names):
        raise ParseError(f"empty state name in {tok!r}", line=lineno)
    return frozenset(names), (int(m.group(2)) if m.group(2) else None)


def parse_automaton(text: str) -> TreeAutomaton:
    header = {}
    body = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] in ("order", "alphabet", "controls"):
            if words[0] in header:
                raise ParseError(f"duplicate {words[0]} line", line=lineno)
            header[words[0]] = (words[1:], lineno)
        else:
            body.append((lineno, words))
    for key in ("order", "alphabet", "controls"):
        if key not in header:
            raise ParseError(f"missing {key} line", line=1)
    ow, ol = header["order"]
    if len(ow) != 1 or not ow[0].isdigit() or int(ow[0]) < 1:
        raise ParseError("order must be a positive integer", line=ol)
    A = TreeAutomaton(int(ow[0]), header["alphabet"][0], header["controls"][0])
    # declarations first so transitions may reference any state
    trans = []
    finals: List[tuple] = []
    layer_finals: List[tuple] = []
    for lineno, words in body:
        kw = words[0]
        try:
            if kw == "tree-states":
                for q in words[1:]:
                    A.add_tree_state(q)
            elif kw == "finals":
                finals.append((lineno, words[1:]))
            elif kw == "layer":
                if len(words) < 3 or not words[1].isdigit() or words[2] not in ("states", "finals"):
                    raise ParseError("expected 'layer K states ...' or 'layer K finals ...'", line=lineno)
                k = int(words[1])
                if words[2] == "states":
                    for s in words[3:]:
                        A.add_stack_state(s, k)
                else:
                    layer_finals.append((lineno, k, words[3:]))
            elif kw in ("tree-trans", "trans"):
                trans.append((lineno, words))
            else:
                raise ParseError(f"unknown keyword {kw!r}", line=lineno)
        except ParseError:
            raise
        except GastrsError as e:
            raise ParseError(str(e), line=lineno) from None
    for lineno, names in finals:
        for q in names:
            if q not in A.tree_states:
                raise ParseError(f"final {q} is not a tree state", line=lineno)
            A.finals.add(q)
    for lineno, k, names in layer_finals:
        for s in names:
            if A.state_order.get(s) != k:
                raise ParseError(f"final {s} is not an order-{k} state", line=lineno)
            A.layer_finals[k].add(s)
    for lineno, words in trans:
        try:
            if words[0] == "tree-trans":
                if len(words) != 6 or not words[2].isdigit() or not words[3].isdigit():
                    raise ParseError("expected 'tree-trans q i m q2 s'", line=lineno)
                A.add_tree_transition(words[1], int(words[2]), int(words[3]), words[4], words[5])
                continue
            if len(words) < 2 or not words[1].isdigit():
                raise ParseError("expected 'trans K ...'", line=lineno)
            k = int(words[1])
            if k == 1:
                if len(words) != 6:
                    raise ParseError("expected 'trans 1 s a {B}@j {S}'", line=lineno)
                br, j = _parse_set(words[4], lineno)
                rest, j2 = _parse_set(words[5], lineno)
                if j2 is not None:
                    raise ParseError("order tag only allowed on the annotation set", line=lineno)
                for b in br:
                    if b not in A.state_order:
                        raise ParseError(f"unknown stack state {b}", line=lineno)
                    if j is not None and A.state_order[b] != j:
                        raise ParseError(f"{b} is not an order-{j} state", line=lineno)
                if br and j is None:
                    raise ParseError("a non-empty annotation set needs an @order tag", line=lineno)
                A.add_delta1(words[2], words[3], br, rest)
            else:
                if len(words) != 5:
                    raise ParseError(f"expected 'trans {k} s s2 {{S}}'", line=lineno)
                rest, j = _parse_set(words[4], lineno)
                if j is not None:
                    raise ParseError("order tag only allowed on order-1 annotation sets", line=lineno)
                if k not in A.delta:
                    raise ParseError(f"no stack layer of order {k}", line=lineno)
                A.add_delta(k, words[2], words[3], rest)
        except ParseError:
            raise
        except GastrsError as e:
            raise ParseError(str(e), line=lineno) from None
    return A


def read_automaton(path) -> TreeAutomaton:
    with open(path) as fh:
        return parse_automaton(fh.read())


def write_automaton(A: TreeAutomaton, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_automaton(A))


# ----------------------------------------------------------------------
# DOT


def _q(x: str) -> str:
    return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(A: TreeAutomaton, name: str = "automaton") -> str:
    out = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    out.append("  subgraph cluster_tree {")
    out.append('    label="tree layer";')
    for q in sorted(A.tree_states):
        shape = "doublecircle" if q in A.finals else ("box" if q in A.controls else "circle")
        out.append(f"    {_q('T:' + q)} [label={_q(q)}, shape={shape}];")
    for q, i, m, c, s in sorted(A.tree_transitions()):
        out.append(f"    {_q('T:' + c)} -> {_q('T:' + q)} [label={_q(f'{i}/{m} {s}')}];")
    out.append("  }")
    n_hyper = 0
    for k in range(A.order, 0, -1):
        out.append(f"  subgraph cluster_layer{k} {{")
        out.append(f'    label="order-{k} layer";')
        for s in sorted(A.layer_states[k]):
            shape = "doublecircle" if s in A.layer_finals[k] else "circle"
            out.append(f"    {_q(s)} [shape={shape}];")
        if k >= 2:
            rows = sorted((s, top, sorted(S)) for s, top, S in A.delta_transitions(k))
            for s, top, S in rows:
                n_hyper += 1
                h = f"h{n_hyper}"
                out.append(f"    {h} [shape=point];")
                out.append(f"    {_q(s)} -> {h} [arrowhead=none];")
                out.append(f"    {h} -> {_q(top)} [style=dashed, label=\"top\"];")
                for x in S:
                    out.append(f"    {h} -> {_q(x)};")
        else:
            rows = sorted(A.delta1, key=lambda t: (t[0], t[1], sorted(t[2]), sorted(t[3])))
            for s, a, br, S in rows:
                n_hyper += 1
                h = f"h{n_hyper}"
                out.append(f"    {h} [shape=point];")
                out.append(f"    {_q(s)} -> {h} [arrowhead=none, label={_q(a)}];")
                for b in sorted(br):
                    out.append(f"    {h} -> {_q(b)} [style=dotted, label=\"ann\"];")
                for x in sorted(S):
                    out.append(f"    {h} -> {_q(x)};")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
