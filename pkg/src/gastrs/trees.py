"""Annotated stack trees, tree operations and rewrite systems.

A tree is a `Node`: leaves carry a control and a stack, internal nodes carry
a stack and an ordered, non-empty tuple of children. Rewriting happens only
at leaves. Node addresses are tuples of 1-based child indices; leaves are
numbered 1, 2, ... from left to right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .errors import IndexOutOfRange, NotApplicable, ParseError, StackOpError, ValidationError
from .stacks import (
    Rew,
    Stack,
    StackOp,
    apply_stack_op,
    chars_of,
    format_stack,
    is_grounded,
    parse_stack_prefix,
)


class Node:
    __slots__ = ("stack", "control", "children", "_hash", "_nodes", "_symbols")

    def __init__(self, stack: Stack, control: Optional[str] = None, children: Sequence["Node"] = ()):
        children = tuple(children)
        if children and control is not None:
            raise ValueError("internal nodes carry no control")
        if not children and control is None:
            raise ValueError("leaves need a control")
        self.stack = stack
        self.control = control
        self.children = children
        self._hash = hash((stack, control, children))
        self._nodes = 1 + sum(c._nodes for c in children)
        self._symbols = stack.size() + sum(c._symbols for c in children)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Node):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.control == other.control
            and self.stack == other.stack
            and self.children == other.children
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Node({format_tree(self)})"

    def __str__(self):
        return format_tree(self)

    def node_count(self) -> int:
        return self._nodes

    def symbol_count(self) -> int:
        return self._symbols

    def measure(self) -> Tuple[int, int]:
        return (self._nodes, self._symbols)

    def leaves(self) -> List["Node"]:
        out = []
        _collect_leaves(self, out)
        return out

    def arities(self) -> set:
        out = set()
        stack = [self]
        while stack:
            t = stack.pop()
            if t.children:
                out.add(len(t.children))
                stack.extend(t.children)
        return out

    def stacks(self) -> Iterator[Stack]:
        yield self.stack
        for c in self.children:
            yield from c.stacks()


def leaf_node(control: str, stack: Stack) -> Node:
    return Node(stack, control)


def inner_node(stack: Stack, children: Sequence[Node]) -> Node:
    return Node(stack, None, children)


def _collect_leaves(t: Node, out: list):
    if t.is_leaf:
        out.append(t)
    else:
        for c in t.children:
            _collect_leaves(c, out)


def leaf_addresses(t: Node) -> List[Tuple[int, ...]]:
    out = []

    def walk(n, addr):
        if n.is_leaf:
            out.append(addr)
        else:
            for j, c in enumerate(n.children, 1):
                walk(c, addr + (j,))

    walk(t, ())
    return out


def leaf(t: Node, i: int) -> Tuple[int, ...]:
    """Address of the i-th leaf (1-based, left to right)."""
    addrs = leaf_addresses(t)
    if not 1 <= i <= len(addrs):
        raise IndexOutOfRange(f"tree has {len(addrs)} leaves, asked for leaf {i}")
    return addrs[i - 1]


def node_at(t: Node, addr: Sequence[int]) -> Node:
    for j in addr:
        t = t.children[j - 1]
    return t


def replace_at(t: Node, addr: Sequence[int], new: Node) -> Node:
    if not addr:
        return new
    j = addr[0] - 1
    kids = list(t.children)
    kids[j] = replace_at(kids[j], addr[1:], new)
    return Node(t.stack, None, kids)


def is_grounded_tree(t: Node) -> bool:
    return all(is_grounded(s) for s in t.stacks())


# --------------------------------------------------------------------------
# tree operations


@dataclass(frozen=True)
class Local:
    source: str
    op: StackOp
    target: str

    def __str__(self):
        return f"local {self.source} {self.op} {self.target}"


@dataclass(frozen=True)
class Spawn:
    source: str
    targets: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ValueError("spawn needs at least one child")

    def __str__(self):
        return f"spawn {self.source} -> {' '.join(self.targets)}"


@dataclass(frozen=True)
class Join:
    sources: Tuple[str, ...]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise ValueError("join needs at least one child")

    def __str__(self):
        return f"join {' '.join(self.sources)} -> {self.target}"


TreeOp = Union[Local, Spawn, Join]


def op_controls(op: TreeOp) -> Tuple[str, ...]:
    if isinstance(op, Local):
        return (op.source, op.target)
    if isinstance(op, Spawn):
        return (op.source,) + op.targets
    return op.sources + (op.target,)


def apply_tree_op_at(op: TreeOp, i: int, t: Node) -> Node:
    """Apply op at the i-th leaf of t."""
    addr = leaf(t, i)
    lf = node_at(t, addr)
    if isinstance(op, Local):
        if lf.control != op.source:
            raise NotApplicable(f"leaf {i} has control {lf.control}, rule needs {op.source}")
        try:
            s = apply_stack_op(op.op, lf.stack)
        except StackOpError as e:
            raise NotApplicable(f"stack operation {op.op} does not apply: {e}") from e
        return replace_at(t, addr, Node(s, op.target))
    if isinstance(op, Spawn):
        if lf.control != op.source:
            raise NotApplicable(f"leaf {i} has control {lf.control}, rule needs {op.source}")
        kids = [Node(lf.stack, q) for q in op.targets]
        return replace_at(t, addr, Node(lf.stack, None, kids))
    if isinstance(op, Join):
        if not addr or addr[-1] != 1:
            raise NotApplicable(f"leaf {i} is not the first child of a parent")
        parent = node_at(t, addr[:-1])
        m = len(op.sources)
        if len(parent.children) != m:
            raise NotApplicable(f"parent has {len(parent.children)} children, join needs {m}")
        for c, q in zip(parent.children, op.sources):
            if not c.is_leaf:
                raise NotApplicable("a sibling of the joined leaves is not a leaf")
            if c.control != q:
                raise NotApplicable(f"sibling control {c.control} does not match {q}")
        return replace_at(t, addr[:-1], Node(parent.stack, op.target))
    raise TypeError(f"not a tree operation: {op!r}")


def _try_at(op: TreeOp, addr, lf: Node, t: Node) -> Optional[Node]:
    if isinstance(op, Local):
        if lf.control != op.source:
            return None
        try:
            s = apply_stack_op(op.op, lf.stack)
        except StackOpError:
            return None
        return replace_at(t, addr, Node(s, op.target))
    if isinstance(op, Spawn):
        if lf.control != op.source:
            return None
        kids = [Node(lf.stack, q) for q in op.targets]
        return replace_at(t, addr, Node(lf.stack, None, kids))
    if not addr or addr[-1] != 1:
        return None
    parent = node_at(t, addr[:-1])
    if len(parent.children) != len(op.sources):
        return None
    for c, q in zip(parent.children, op.sources):
        if not c.is_leaf or c.control != q:
            return None
    return replace_at(t, addr[:-1], Node(parent.stack, op.target))


def successor_steps(rules: Sequence[TreeOp], t: Optional[Node]) -> Iterator[Tuple[TreeOp, int, Node]]:
    """Yield (rule, leaf index, result) for every applicable rewrite."""
    if t is None:
        return
    for i, addr in enumerate(leaf_addresses(t), 1):
        lf = node_at(t, addr)
        for op in rules:
            r = _try_at(op, addr, lf, t)
            if r is not None:
                yield op, i, r


# --------------------------------------------------------------------------
# rewrite systems


@dataclass
class Gastrs:
    order: int
    alphabet: Tuple[str, ...]
    controls: Tuple[str, ...]
    rules: Tuple[TreeOp, ...] = ()

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.controls = tuple(self.controls)
        self.rules = tuple(dict.fromkeys(self.rules))

    def validate(self) -> None:
        from .stacks import validate_op

        if self.order < 1:
            raise ValidationError("order must be at least 1")
        cs = set(self.controls)
        for r in self.rules:
            for c in op_controls(r):
                if c not in cs:
                    raise ValidationError(f"rule {r}: unknown control {c!r}")
            if isinstance(r, Local):
                try:
                    validate_op(r.op, self.order, self.alphabet)
                except ValueError as e:
                    raise ValidationError(f"rule {r}: {e}") from None

    def max_spawn_width(self) -> int:
        return max((len(r.targets) for r in self.rules if isinstance(r, Spawn)), default=0)

    def arities(self) -> set:
        out = set()
        for r in self.rules:
            if isinstance(r, Spawn):
                out.add(len(r.targets))
            elif isinstance(r, Join):
                out.add(len(r.sources))
        return out

    def check_tree(self, t: Node) -> None:
        """Raise ValidationError if t does not fit this system."""
        cs = set(self.controls)
        sigma = set(self.alphabet)
        for n in _walk(t):
            if n.stack.order != self.order:
                raise ValidationError(f"stack {format_stack(n.stack)} is not order {self.order}")
            if n.control is not None and n.control not in cs:
                raise ValidationError(f"unknown control {n.control!r}")
            for c in chars_of(n.stack):
                if c not in sigma:
                    raise ValidationError(f"unknown character {c!r}")


def _walk(t: Node):
    yield t
    for c in t.children:
        yield from _walk(c)


def successors(G: Gastrs, t: Optional[Node]) -> set:
    return {r for _, _, r in successor_steps(G.rules, t)}


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def normalize_joins(G: Gastrs) -> Gastrs:
    """Make every control the target of at most one join rule.

    When several joins share a target q, each is redirected to a fresh
    control which then moves to q by an identity rewrite of the top
    character.
    """
    by_target = {}
    for r in G.rules:
        if isinstance(r, Join):
            by_target.setdefault(r.target, []).append(r)
    if all(len(v) <= 1 for v in by_target.values()):
        return G
    taken = set(G.controls)
    controls = list(G.controls)
    rules = []
    for r in G.rules:
        if isinstance(r, Join) and len(by_target[r.target]) > 1:
            mid = _fresh(r.target + "_" + "_".join(r.sources), taken)
            controls.append(mid)
            rules.append(Join(r.sources, mid))
            rules.extend(Local(mid, Rew(a, a), r.target) for a in G.alphabet)
        else:
            rules.append(r)
    return Gastrs(G.order, G.alphabet, tuple(controls), tuple(rules))


# --------------------------------------------------------------------------
# tree text syntax: (node STACK child...) and (leaf q STACK)

_WS = re.compile(r"\s*")
_IDENT = re.compile(r"[^\s\[\]\^{}(),#@]+")


def format_tree(t: Node) -> str:
    if t.is_leaf:
        return f"(leaf {t.control} {format_stack(t.stack)})"
    return "(node " + format_stack(t.stack) + "".join(" " + format_tree(c) for c in t.children) + ")"


def _parse_tree(text: str, pos: int):
    pos = _WS.match(text, pos).end()
    if not text.startswith("(", pos):
        raise ParseError("expected '('", text, pos)
    pos = _WS.match(text, pos + 1).end()
    m = _IDENT.match(text, pos)
    if not m or m.group() not in ("leaf", "node"):
        raise ParseError("expected 'leaf' or 'node'", text, pos)
    kind = m.group()
    pos = _WS.match(text, m.end()).end()
    if kind == "leaf":
        m = _IDENT.match(text, pos)
        if not m:
            raise ParseError("expected a control", text, pos)
        q = m.group()
        pos = _WS.match(text, m.end()).end()
        s, pos = parse_stack_prefix(text, pos)
        pos = _WS.match(text, pos).end()
        if not text.startswith(")", pos):
            raise ParseError("expected ')'", text, pos)
        return Node(s, q), pos + 1
    s, pos = parse_stack_prefix(text, pos)
    kids = []
    while True:
        pos = _WS.match(text, pos).end()
        if text.startswith(")", pos):
            pos += 1
            break
        if pos >= len(text):
            raise ParseError("unterminated node", text, pos)
        c, pos = _parse_tree(text, pos)
        kids.append(c)
    if not kids:
        raise ParseError("internal node without children", text, pos)
    return Node(s, None, kids), pos


def parse_tree(text: str) -> Node:
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    t, pos = _parse_tree(body, 0)
    if body[pos:].strip():
        raise ParseError("trailing input after tree", body, pos)
    return t
