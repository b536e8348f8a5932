"""Annotated higher-order stacks and the operations acting on them.

An order-k stack (k >= 2) is a sequence of order-(k-1) stacks; an order-1
stack is a sequence of symbols, each symbol carrying an annotation stack of
any order. Stacks are immutable values with structural equality and a
hash computed once per value, so substructures may be shared freely.

The first item of a stack is its top.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .errors import (
    AnnotationOrderMismatch,
    EmptyStack,
    OrderMismatch,
    ParseError,
    TopCharMismatch,
)


class Sym:
    """A stack character together with its annotation stack."""

    __slots__ = ("char", "ann", "_hash")

    def __init__(self, char: str, ann: "Stack"):
        self.char = char
        self.ann = ann
        self._hash = hash((char, ann))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Sym):
            return NotImplemented
        return self._hash == other._hash and self.char == other.char and self.ann == other.ann

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Sym({self.char!r}, {format_stack(self.ann)})"

    def size(self) -> int:
        return 1 + self.ann.size()


class Stack:
    """An order-k annotated stack with items listed top first."""

    __slots__ = ("order", "items", "_hash", "_size")

    def __init__(self, order: int, items: Sequence = ()):
        if order < 1:
            raise OrderMismatch(f"stack order must be positive, got {order}")
        items = tuple(items)
        if order == 1:
            for x in items:
                if not isinstance(x, Sym):
                    raise OrderMismatch("order-1 stacks hold symbols")
        else:
            for x in items:
                if not isinstance(x, Stack) or x.order != order - 1:
                    raise OrderMismatch(f"order-{order} stacks hold order-{order - 1} stacks")
        self.order = order
        self.items = items
        self._hash = hash((order, items))
        self._size = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Stack):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.order == other.order
            and self.items == other.items
        )

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"Stack({format_stack(self)})"

    def __str__(self):
        return format_stack(self)

    @property
    def is_empty(self) -> bool:
        return not self.items

    def tail(self) -> "Stack":
        """The stack with its top item removed."""
        if not self.items:
            raise EmptyStack(f"order-{self.order} stack is empty")
        return Stack(self.order, self.items[1:])

    def size(self) -> int:
        """Total number of symbols, annotations included."""
        if self._size is None:
            self._size = sum(x.size() for x in self.items)
        return self._size

    def depth(self) -> int:
        """Annotation nesting depth: 0 when every annotation is empty."""
        best = 0
        if self.order == 1:
            for x in self.items:
                if x.ann.items or x.ann.order != 1:
                    best = max(best, 1 + x.ann.depth())
        else:
            for x in self.items:
                best = max(best, x.depth())
        return best


EMPTY1 = Stack(1, ())


def empty(order: int) -> Stack:
    return EMPTY1 if order == 1 else Stack(order, ())


def sym(char: str, ann: Optional[Stack] = None) -> Sym:
    return Sym(char, EMPTY1 if ann is None else ann)


def word(chars: Union[str, Sequence[str]]) -> Stack:
    """Order-1 stack of unannotated characters; a str is split per character."""
    return Stack(1, [sym(c) for c in chars])


def is_grounded(s: Stack) -> bool:
    """True when s and every stack nested in it (annotations included) is
    non-empty below its top level, i.e. every item of an order-k stack is
    non-empty and the stack itself has at least one item.

    Annotations may be empty; a non-empty annotation must itself be grounded.
    """
    if not s.items:
        return False
    return _grounded_items(s)


def _grounded_items(s: Stack) -> bool:
    if s.order == 1:
        for x in s.items:
            if x.ann.items and not _grounded_items(x.ann):
                return False
        return True
    for x in s.items:
        if not x.items or not _grounded_items(x):
            return False
    return True


# --------------------------------------------------------------------------
# composition and top access


def compose(s: Stack, k: int, t: Stack) -> Stack:
    """Place the order-(k-1) stack s on top of t, descending into t's top
    items until reaching its order-k level."""
    if k < 2 or s.order != k - 1 or t.order < k:
        raise OrderMismatch(
            f"cannot compose order-{s.order} stack at level {k} onto order-{t.order} stack"
        )
    if t.order == k:
        return Stack(k, (s,) + t.items)
    if not t.items:
        raise OrderMismatch(f"order-{t.order} stack is empty, cannot descend to level {k}")
    return Stack(t.order, (compose(s, k, t.items[0]),) + t.items[1:])


def top_stack(s: Stack, k: int) -> Stack:
    """The topmost order-k stack contained in s."""
    if k > s.order:
        raise OrderMismatch(f"no order-{k} stack inside an order-{s.order} stack")
    while s.order > k:
        if not s.items:
            raise EmptyStack(f"order-{s.order} stack is empty")
        s = s.items[0]
    return s


def top_sym(s: Stack) -> Sym:
    t = top_stack(s, 1)
    if not t.items:
        raise EmptyStack("order-1 stack is empty")
    return t.items[0]


def _replace_top(s: Stack, k: int, fn) -> Stack:
    """Rebuild s with its topmost order-k stack replaced by fn(top)."""
    if s.order == k:
        return fn(s)
    if not s.items:
        raise EmptyStack(f"order-{s.order} stack is empty")
    return Stack(s.order, (_replace_top(s.items[0], k, fn),) + s.items[1:])


# --------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class Rew:
    a: str
    b: str

    def __str__(self):
        return f"rew {self.a} {self.b}"


@dataclass(frozen=True)
class CPush:
    k: int

    def __str__(self):
        return f"cpush {self.k}"


@dataclass(frozen=True)
class Push:
    k: int

    def __str__(self):
        return f"push {self.k}"


@dataclass(frozen=True)
class Pop:
    k: int

    def __str__(self):
        return f"pop {self.k}"


@dataclass(frozen=True)
class Collapse:
    k: int

    def __str__(self):
        return f"collapse {self.k}"


StackOp = Union[Rew, CPush, Push, Pop, Collapse]


def validate_op(op: StackOp, n: int, alphabet=None) -> None:
    """Raise ValueError if op is not an order-n operation."""
    if isinstance(op, Rew):
        if alphabet is not None:
            for c in (op.a, op.b):
                if c not in alphabet:
                    raise ValueError(f"unknown character {c!r}")
        return
    lo = 2 if isinstance(op, Push) else 1
    if not lo <= op.k <= n:
        raise ValueError(f"{op} needs order between {lo} and {n}")


def apply_stack_op(op: StackOp, s: Stack) -> Stack:
    """Apply op to the order-n stack s (n = s.order)."""
    n = s.order
    if isinstance(op, Rew):
        def rew(t):
            if not t.items:
                raise EmptyStack("order-1 stack is empty")
            x = t.items[0]
            if x.char != op.a:
                raise TopCharMismatch(f"top character is {x.char!r}, expected {op.a!r}")
            return Stack(1, (Sym(op.b, x.ann),) + t.items[1:])
        return _replace_top(s, 1, rew)

    k = op.k
    if k > n or k < 1:
        raise OrderMismatch(f"{op} on an order-{n} stack")

    if isinstance(op, CPush):
        body = top_stack(s, k)
        if not body.items:
            raise EmptyStack(f"order-{k} stack is empty")
        x = top_sym(s)
        ann = Stack(k, body.items[1:])
        return _replace_top(s, 1, lambda t: Stack(1, (Sym(x.char, ann),) + t.items))

    if isinstance(op, Push):
        if k < 2:
            raise OrderMismatch("push needs order at least 2")

        def push(t):
            if not t.items:
                raise EmptyStack(f"order-{k} stack is empty")
            return Stack(k, (t.items[0],) + t.items)
        return _replace_top(s, k, push)

    if isinstance(op, Pop):
        def pop(t):
            if not t.items:
                raise EmptyStack(f"order-{k} stack is empty")
            return Stack(k, t.items[1:])
        return _replace_top(s, k, pop)

    if isinstance(op, Collapse):
        x = top_sym(s)
        if x.ann.order != k:
            raise AnnotationOrderMismatch(
                f"collapse {k} needs an order-{k} annotation, found order {x.ann.order}"
            )
        return _replace_top(s, k, lambda t: x.ann)

    raise TypeError(f"not a stack operation: {op!r}")


def try_apply(op: StackOp, s: Stack) -> Optional[Stack]:
    """Like apply_stack_op but returns None when op does not apply."""
    try:
        return apply_stack_op(op, s)
    except (EmptyStack, TopCharMismatch, AnnotationOrderMismatch):
        return None


# --------------------------------------------------------------------------
# text syntax: [k e1 e2 ...] with order-1 elements a or a^{STACK}

_TOKEN = re.compile(r"\s*(\[|\]|\^\{|\}|[^\s\[\]\^{}()]+)")


def format_stack(s: Stack) -> str:
    parts = [f"[{s.order}"]
    for x in s.items:
        parts.append(" ")
        if s.order == 1:
            parts.append(x.char)
            if x.ann.order != 1 or x.ann.items:
                parts.append("^{" + format_stack(x.ann) + "}")
        else:
            parts.append(format_stack(x))
    parts.append("]")
    return "".join(parts)


class _Lexer:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def peek(self) -> Optional[str]:
        m = _TOKEN.match(self.text, self.pos)
        return m.group(1) if m else None

    def next(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            self.fail("unexpected end of input")
        self.pos = m.end()
        return m.group(1)

    def fail(self, msg: str):
        raise ParseError(msg, self.text, self.pos)


def _parse_stack(lx: _Lexer) -> Stack:
    if lx.next() != "[":
        lx.fail("expected '['")
    tok = lx.next()
    if not tok.isdigit() or int(tok) < 1:
        lx.fail(f"expected a positive stack order, got {tok!r}")
    k = int(tok)
    items = []
    while True:
        tok = lx.peek()
        if tok is None:
            lx.fail("unterminated stack")
        if tok == "]":
            lx.next()
            break
        if k == 1:
            char = lx.next()
            if char in ("[", "^{", "}"):
                lx.fail(f"expected a character, got {char!r}")
            ann = EMPTY1
            if lx.peek() == "^{":
                lx.next()
                ann = _parse_stack(lx)
                if lx.next() != "}":
                    lx.fail("expected '}' after annotation")
            items.append(Sym(char, ann))
        else:
            child = _parse_stack(lx)
            if child.order != k - 1:
                lx.fail(f"order-{k} stack contains an order-{child.order} stack")
            items.append(child)
    return Stack(k, items)


def parse_stack(text: str) -> Stack:
    lx = _Lexer(text)
    s = _parse_stack(lx)
    if lx.peek() is not None:
        lx.fail("trailing input after stack")
    return s


def parse_stack_prefix(text: str, pos: int):
    """Parse a stack starting at pos; return (stack, end position)."""
    lx = _Lexer(text, pos)
    s = _parse_stack(lx)
    return s, lx.pos


def chars_of(s: Stack) -> Iterator[str]:
    """All characters occurring in s, annotations included."""
    if s.order == 1:
        for x in s.items:
            yield x.char
            yield from chars_of(x.ann)
    else:
        for x in s.items:
            yield from chars_of(x)
