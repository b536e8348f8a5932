"""Stack tree automata and their algorithms."""

from .boolean import complement, intersect, union, union_all
from .core import (
    TreeAutomaton,
    is_normalized,
    key_uniqueness_violations,
    normal_form_violations,
    same_structure,
    stack_accepts,
    tree_accepts,
    trim,
)
from .emptiness import is_empty, stack_state_nonempty, stack_types
from .io import format_automaton, parse_automaton, read_automaton, to_dot, write_automaton
from .normalize import normalize
from .shortform import (
    ShortForm,
    ShortForms,
    expand_short_form,
    resolve_short_forms_from,
    resolve_truncated_from,
    short_forms,
)
from .tuples import from_tuple_transitions

__all__ = [
    "ShortForm",
    "ShortForms",
    "TreeAutomaton",
    "complement",
    "expand_short_form",
    "format_automaton",
    "from_tuple_transitions",
    "intersect",
    "is_empty",
    "is_normalized",
    "key_uniqueness_violations",
    "normal_form_violations",
    "normalize",
    "parse_automaton",
    "read_automaton",
    "resolve_short_forms_from",
    "resolve_truncated_from",
    "same_structure",
    "short_forms",
    "stack_accepts",
    "stack_state_nonempty",
    "stack_types",
    "to_dot",
    "tree_accepts",
    "trim",
    "union",
    "union_all",
    "write_automaton",
]
