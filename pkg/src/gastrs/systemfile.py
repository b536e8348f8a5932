"""Line-oriented rewrite-system files.

::

    order 2
    alphabet a b _
    controls p q r
    rule local p rew a b q
    rule local p push 2 q
    rule spawn p -> q r
    rule join q r -> p

Systems with global state add ``globals g1 g2`` and tag each rule with
``[g1->g2]`` right after the ``rule`` keyword. An untagged rule in such a
system fires in every global without changing it.
"""

from __future__ import annotations

import re
from typing import List, Union

from .context import GlobalGastrs
from .errors import ParseError, ValidationError
from .stacks import Collapse, CPush, Pop, Push, Rew, StackOp, validate_op
from .trees import Gastrs, Join, Local, Spawn, TreeOp, op_controls

_TAG = re.compile(r"^\[([^\[\]\s>-]+)->([^\[\]\s>-]+)\]$")
_OPS = {"cpush": CPush, "push": Push, "pop": Pop, "collapse": Collapse}


def _col(raw: str, word: str) -> int:
    i = raw.find(word)
    return i + 1 if i >= 0 else 1


class _LineError(Exception):
    def __init__(self, msg, word=None):
        self.msg = msg
        self.word = word


def _parse_op(words: List[str]) -> TreeOp:
    if not words:
        raise _LineError("empty rule")
    kind = words[0]
    if kind == "local":
        if len(words) < 4:
            raise _LineError("expected 'local p OP q'")
        src, name = words[1], words[2]
        if name == "rew":
            if len(words) != 6:
                raise _LineError("expected 'local p rew a b q'")
            op: StackOp = Rew(words[3], words[4])
            tgt = words[5]
        elif name in _OPS:
            if len(words) != 5:
                raise _LineError(f"expected 'local p {name} K q'")
            if not words[3].isdigit():
                raise _LineError(f"expected an order, got {words[3]!r}", words[3])
            op = _OPS[name](int(words[3]))
            tgt = words[4]
        else:
            raise _LineError(f"unknown stack operation {name!r}", name)
        return Local(src, op, tgt)
    if kind in ("spawn", "join"):
        if "->" not in words:
            raise _LineError(f"expected '->' in {kind} rule")
        cut = words.index("->")
        left, right = words[1:cut], words[cut + 1:]
        if kind == "spawn":
            if len(left) != 1 or not right:
                raise _LineError("expected 'spawn p -> q1 ... qm'")
            return Spawn(left[0], tuple(right))
        if len(right) != 1 or not left:
            raise _LineError("expected 'join q1 ... qm -> p'")
        return Join(tuple(left), right[0])
    raise _LineError(f"unknown rule kind {kind!r}", kind)


def parse_system(text: str) -> Union[Gastrs, GlobalGastrs]:
    header = {}
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        words = line.split()
        if not words:
            continue
        kw = words[0]
        if kw in ("order", "alphabet", "controls", "globals"):
            if kw in header:
                raise ParseError(f"duplicate {kw} line", line=lineno)
            header[kw] = (words[1:], lineno, raw)
        elif kw == "rule":
            tag = None
            rest = words[1:]
            if rest and rest[0].startswith("["):
                m = _TAG.match(rest[0])
                if not m:
                    raise ParseError(f"malformed global tag {rest[0]!r}", line=lineno, column=_col(raw, rest[0]))
                tag = (m.group(1), m.group(2))
                rest = rest[1:]
            try:
                op = _parse_op(rest)
            except _LineError as err:
                col = _col(raw, err.word) if err.word else None
                raise ParseError(err.msg, line=lineno, column=col) from None
            rules.append((tag, op, lineno, raw))
        else:
            raise ParseError(f"unknown keyword {kw!r}", line=lineno, column=_col(raw, kw))
    for kw in ("order", "alphabet", "controls"):
        if kw not in header:
            raise ParseError(f"missing {kw} line", line=1)
    ow, ol, _ = header["order"]
    if len(ow) != 1 or not ow[0].isdigit() or int(ow[0]) < 1:
        raise ParseError("order must be a positive integer", line=ol)
    n = int(ow[0])
    alphabet = tuple(header["alphabet"][0])
    controls = tuple(header["controls"][0])
    for name, seq in (("character", alphabet), ("control", controls)):
        if len(set(seq)) != len(seq):
            raise ValidationError(f"duplicate {name} declared")
    cs = set(controls)
    for tag, op, lineno, raw in rules:
        for c in op_controls(op):
            if c not in cs:
                raise ValidationError(f"line {lineno}, column {_col(raw, c)}: unknown control {c!r}")
        if isinstance(op, Local):
            try:
                validate_op(op.op, n, alphabet)
            except ValueError as e:
                raise ValidationError(f"line {lineno}: {e}") from None
    if "globals" not in header:
        for tag, op, lineno, raw in rules:
            if tag is not None:
                raise ValidationError(f"line {lineno}: global tag in a system without globals")
        return Gastrs(n, alphabet, controls, tuple(op for _, op, _, _ in rules))
    gs = tuple(header["globals"][0])
    out = []
    for tag, op, lineno, raw in rules:
        if tag is None:
            out.extend((g, op, g) for g in gs)
            continue
        for g in tag:
            if g not in gs:
                raise ValidationError(f"line {lineno}, column {_col(raw, g)}: unknown global {g!r}")
        out.append((tag[0], op, tag[1]))
    return GlobalGastrs(n, alphabet, controls, gs, tuple(out))


def format_rule(op: TreeOp) -> str:
    return str(op)


def format_system(G: Union[Gastrs, GlobalGastrs]) -> str:
    lines = [f"order {G.order}", "alphabet " + " ".join(G.alphabet), "controls " + " ".join(G.controls)]
    if isinstance(G, GlobalGastrs):
        lines.append("globals " + " ".join(G.globals))
        for g, op, g2 in G.rules:
            lines.append(f"rule [{g}->{g2}] {op}")
    else:
        for op in G.rules:
            lines.append(f"rule {op}")
    return "\n".join(lines) + "\n"


def read_system(path):
    with open(path) as fh:
        return parse_system(fh.read())
