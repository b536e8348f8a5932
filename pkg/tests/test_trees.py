import random

import pytest
from hypothesis import given, settings, strategies as st

from gastrs.errors import IndexOutOfRange, NotApplicable, ParseError
from gastrs.oracle import ExhaustiveReach, random_tree
from gastrs.stacks import Pop, Rew, parse_stack
from gastrs.trees import (
    Gastrs,
    Join,
    Local,
    Node,
    Spawn,
    apply_tree_op_at,
    format_tree,
    leaf,
    normalize_joins,
    parse_tree,
    successors,
)

T = parse_tree


def test_leaf_indexing():
    single = T("(leaf p [1 a])")
    assert leaf(single, 1) == ()
    two = T("(node [1 a] (leaf p [1 a]) (leaf q [1 b]))")
    assert leaf(two, 2) == (2,)
    with pytest.raises(IndexOutOfRange):
        leaf(two, 3)
    with pytest.raises(IndexOutOfRange):
        leaf(two, 0)


def test_spawn_then_join():
    t = T("(leaf p [1 a])")
    spawned = apply_tree_op_at(Spawn("p", ("q1", "q2")), 1, t)
    assert spawned == T("(node [1 a] (leaf q1 [1 a]) (leaf q2 [1 a]))")
    assert apply_tree_op_at(Join(("q1", "q2"), "r"), 1, spawned) == T("(leaf r [1 a])")


def test_local_rewrite():
    assert apply_tree_op_at(Local("p", Rew("a", "b"), "q"), 1, T("(leaf p [1 a])")) == T("(leaf q [1 b])")


def test_not_applicable_reasons():
    t = T("(node [1 a] (leaf q1 [1 a]) (leaf q2 [1 a]))")
    with pytest.raises(NotApplicable, match="control"):
        apply_tree_op_at(Local("p", Pop(1), "p"), 1, t)
    with pytest.raises(NotApplicable, match="first child"):
        apply_tree_op_at(Join(("q2",), "r"), 2, t)
    with pytest.raises(NotApplicable, match="children"):
        apply_tree_op_at(Join(("q1",), "r"), 1, t)
    with pytest.raises(NotApplicable, match="does not apply"):
        apply_tree_op_at(Local("q1", Rew("b", "a"), "p"), 1, t)


def test_join_needs_leaf_siblings():
    t = T("(node [1 a] (leaf q1 [1 a]) (node [1 a] (leaf q2 [1 a])))")
    with pytest.raises(NotApplicable):
        apply_tree_op_at(Join(("q1", "q2"), "r"), 1, t)


def test_successors_examples():
    G = Gastrs(1, "ab", "pq", (Local("p", Rew("a", "b"), "q"),))
    assert successors(G, T("(leaf p [1 a])")) == {T("(leaf q [1 b])")}
    assert successors(G, T("(leaf q [1 b])")) == set()
    assert successors(Gastrs(1, "ab", "pq", ()), T("(leaf p [1 a])")) == set()
    assert successors(G, None) == set()


def test_normalize_joins_counts():
    one = Gastrs(1, "ab", ("q1", "q2", "q"), (Join(("q1", "q2"), "q"),))
    assert normalize_joins(one) is one
    none = Gastrs(1, "ab", "pq", (Local("p", Pop(1), "q"),))
    assert normalize_joins(none) is none
    G = Gastrs(1, "ab", ("q1", "q2", "r1", "r2", "q"), (Join(("q1", "q2"), "q"), Join(("r1", "r2"), "q")))
    N = normalize_joins(G)
    assert len(N.controls) == len(G.controls) + 2
    joins = [r for r in N.rules if isinstance(r, Join)]
    assert len(joins) == 2 and len({j.target for j in joins}) == 2
    assert sum(isinstance(r, Local) for r in N.rules) == 2 * len(G.alphabet)


def test_normalize_joins_preserves_reachability(rng):
    """Projected onto original controls, the join-normalised system reaches
    the same leaf labels."""
    G = Gastrs(1, "ab", ("p", "q1", "q2", "r"), (
        Spawn("p", ("q1", "q2")), Join(("q1", "q2"), "r"), Spawn("r", ("q1",)), Join(("q1",), "r")))
    N = normalize_joins(G)
    assert N is not G
    for _ in range(30):
        t = random_tree(rng, 1, "ab", ("p", "q1", "q2"), max_nodes=3, max_symbols=3)
        original = lambda x: all(c in G.controls for c in _controls(x))  # noqa: E731
        assert _closure(G, t, 3) <= set(filter(original, _closure(N, t, 6)))
        assert set(filter(original, _closure(N, t, 3))) <= _closure(G, t, 3)


def _controls(t):
    if t.is_leaf:
        return [t.control]
    return [c for k in t.children for c in _controls(k)]


def _closure(G, t, depth):
    seen = {t}
    frontier = {t}
    for _ in range(depth):
        frontier = {n for x in frontier for n in successors(G, x)} - seen
        seen |= frontier
    return seen


def test_shapes_well_formed(rng):
    G = Gastrs(2, "ab", "pq", (Spawn("p", ("q", "p")), Join(("q", "p"), "q"), Local("q", Pop(2), "p")))
    for _ in range(50):
        t = random_tree(rng, 2, "ab", "pq", max_nodes=4, max_symbols=5)
        for n in successors(G, t):
            _check_shape(n, 2)


def _check_shape(t, order):
    assert t.stack.order == order
    if t.is_leaf:
        assert t.control is not None
    else:
        assert t.control is None and t.children
        for c in t.children:
            _check_shape(c, order)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_tree_text_round_trip(seed):
    t = random_tree(random.Random(seed), 2, "ab_", "pq", max_nodes=5, ann_prob=0.3)
    assert parse_tree(format_tree(t)) == t
    assert format_tree(parse_tree(format_tree(t))) == format_tree(t)


def test_parse_tree_errors():
    with pytest.raises(ParseError):
        parse_tree("(leaf p [1 a]")
    with pytest.raises(ParseError):
        parse_tree("(node [1 a])")
    with pytest.raises(ParseError) as e:
        parse_tree("(twig p [1 a])")
    assert e.value.line == 1


def test_parse_tree_comments():
    assert parse_tree("# start\n(leaf p [1 a]) # done\n") == Node(parse_stack("[1 a]"), "p")


def test_spawn_join_identity_on_samples(rng):
    sp = Spawn("p", ("q", "q"))
    jn = Join(("q", "q"), "p")
    for _ in range(40):
        t = random_tree(rng, 1, "ab", ("p",), max_nodes=4)
        n_leaves = len(_controls(t))
        i = rng.randint(1, n_leaves)
        assert apply_tree_op_at(jn, i, apply_tree_op_at(sp, i, t)) == t


def test_exhaustive_reach_detects_cycles():
    G = Gastrs(1, "ab", "p", (Local("p", Rew("a", "a"), "p"),))
    from gastrs.automata import TreeAutomaton

    A = TreeAutomaton(1, "ab", "p")
    with pytest.raises(ValueError):
        ExhaustiveReach(G, A).reachable(T("(leaf p [1 a])"))
