"""Backward reachability (pre*) for ground annotated stack tree rewrite
systems, by saturation of stack tree automata."""

__version__ = "0.1.0"

from .automata import (  # noqa: E402
    TreeAutomaton,
    complement,
    intersect,
    is_empty,
    normalize,
    parse_automaton,
    format_automaton,
    read_automaton,
    tree_accepts,
    union,
)
from .context import GlobalGastrs, context_bounded_prestar  # noqa: E402
from .saturation import prestar_member, saturate, saturate_with_stats  # noqa: E402
from .stacks import Collapse, CPush, Pop, Push, Rew, Stack, Sym, apply_stack_op, parse_stack  # noqa: E402
from .systemfile import parse_system, read_system  # noqa: E402
from .trees import Gastrs, Join, Local, Node, Spawn, parse_tree, successors  # noqa: E402

__all__ = [
    "Collapse",
    "CPush",
    "Gastrs",
    "GlobalGastrs",
    "Join",
    "Local",
    "Node",
    "Pop",
    "Push",
    "Rew",
    "Spawn",
    "Stack",
    "Sym",
    "TreeAutomaton",
    "apply_stack_op",
    "complement",
    "context_bounded_prestar",
    "format_automaton",
    "intersect",
    "is_empty",
    "normalize",
    "parse_automaton",
    "parse_stack",
    "parse_system",
    "parse_tree",
    "prestar_member",
    "read_automaton",
    "read_system",
    "saturate",
    "saturate_with_stats",
    "successors",
    "tree_accepts",
    "union",
]
