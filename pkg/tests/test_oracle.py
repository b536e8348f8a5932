import random

import pytest

from gastrs.automata import TreeAutomaton, read_automaton
from gastrs.context import GlobalGastrs, project_local
from gastrs.oracle import (
    Bounds,
    ExhaustiveReach,
    SearchBudget,
    StackEnumerator,
    Verdict,
    bounded_forward_reach,
    enumerate_trees,
    global_forward_reach,
    is_terminating_family,
    random_stack,
    random_system,
    random_target,
    random_tree,
    replay,
)
from gastrs.stacks import Pop, Push
from gastrs.systemfile import read_system
from gastrs.trees import Gastrs, Local, is_grounded_tree, parse_tree

from conftest import corpus_path

T = parse_tree


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_depth=0)


def test_reach_examples(s1):
    G, A0 = s1
    r = bounded_forward_reach(G, T("(leaf q [1 b _])"), A0)
    assert r.verdict is Verdict.REACHABLE and r.run == []
    r = bounded_forward_reach(G, T("(leaf p [1 a _])"), A0)
    assert r.verdict is Verdict.REACHABLE and len(r.run) == 1
    assert A0.accepts_tree(replay(G.rules, T("(leaf p [1 a _])"), r.run))
    r = bounded_forward_reach(G, T("(leaf p [1 b _])"), A0)
    assert r.verdict is Verdict.EXHAUSTED_NEGATIVE and not r.reachable


def test_budget_exceeded_is_distinct():
    G = Gastrs(2, ("a",), ("p",), (Local("p", Push(2), "p"),))
    A0 = TreeAutomaton(2, ("a",), ("p",))
    r = bounded_forward_reach(G, T("(leaf p [2 [1 a]])"), A0, SearchBudget(max_depth=5))
    assert r.verdict is Verdict.NOT_WITHIN_BUDGET


def test_spawn_join_run(s2):
    G, A0 = s2
    r = bounded_forward_reach(G, T("(leaf p [1 a])"), A0)
    assert r.reachable and len(r.run) == 2
    assert A0.accepts_tree(replay(G.rules, T("(leaf p [1 a])"), r.run))


def test_witness_runs_replay():
    rng = random.Random(5)
    for _ in range(40):
        G = random_system(rng, 2, ("a", "b"), ("p", "q"), 4)
        A0 = random_target(rng, 2, G.alphabet, G.controls)
        for _ in range(10):
            t = random_tree(rng, 2, G.alphabet, G.controls, max_nodes=3, max_symbols=4)
            r = bounded_forward_reach(G, t, A0, SearchBudget(max_depth=6, max_visited=5000))
            if r.reachable:
                assert A0.accepts_tree(replay(G.rules, t, r.run))


def test_exhaustive_reach_agrees_with_bfs():
    rng = random.Random(9)
    for _ in range(30):
        G = random_system(rng, 1, ("a", "b"), ("p", "q"), 4, kinds=("pop", "join", "collapse"))
        assert is_terminating_family(G)
        A0 = random_target(rng, 1, G.alphabet, G.controls)
        ex = ExhaustiveReach(G, A0, grounded=False)
        for _ in range(20):
            t = random_tree(rng, 1, G.alphabet, G.controls, max_nodes=3, max_symbols=4)
            r = bounded_forward_reach(G, t, A0, SearchBudget(max_depth=20, max_nodes=8, max_stack=24))
            assert r.verdict is not Verdict.NOT_WITHIN_BUDGET
            assert ex.verdict(t) is r.verdict


def test_not_terminating():
    assert not is_terminating_family(Gastrs(2, "a", "p", (Local("p", Push(2), "p"),)))
    assert is_terminating_family(Gastrs(1, "a", "p", (Local("p", Pop(1), "p"),)))


def test_enumerate_examples():
    assert len(list(enumerate_trees(("a",), ("p",), 1, Bounds(nodes=1, symbols=1)))) == 1
    trees = list(enumerate_trees(("a", "b"), ("p",), 1, Bounds(nodes=1, symbols=2)))
    assert len(trees) == 6
    assert sorted(str(t.stack) for t in trees) == sorted(["[1 a]", "[1 b]", "[1 a a]", "[1 a b]", "[1 b a]", "[1 b b]"])


def test_enumerate_distinct_and_monotone():
    small = Bounds(nodes=2, symbols=3, ann_depth=0)
    seen = {}
    for b in (small, Bounds(nodes=3, symbols=3), Bounds(nodes=2, symbols=4), Bounds(nodes=2, symbols=3, ann_depth=1)):
        ts = list(enumerate_trees(("a", "b"), ("p",), 2, b))
        assert len(ts) == len(set(ts))
        assert all(is_grounded_tree(t) for t in ts)
        assert all(t.node_count() <= b.nodes for t in ts)
        seen[b] = set(ts)
    for b, ts in seen.items():
        assert seen[small] <= ts


def test_enumerate_deterministic():
    b = Bounds(nodes=2, symbols=3, ann_depth=1)
    assert list(enumerate_trees("ab", "pq", 2, b)) == list(enumerate_trees("ab", "pq", 2, b))


def test_stack_enumerator_counts():
    se = StackEnumerator(1, ("a", "b"))
    assert [len(se.stacks(1, n)) for n in range(1, 4)] == [2, 4, 8]
    ng = StackEnumerator(2, ("a",), grounded=False)
    assert any(not is_grounded_tree(T(f"(leaf p {s})")) for s in ng.up_to(2, 2))


def test_random_stack_sizes():
    rng = random.Random(2)
    for order in (1, 2, 3):
        for _ in range(200):
            s = random_stack(rng, order, "ab", max_symbols=10)
            assert s.order == order and s.size() <= 10


def test_global_reach_zero_is_local():
    G = read_system(corpus_path("systems", "order2.g"))
    A0 = read_automaton(corpus_path("automata", "order2_alt.aut"))
    GG = GlobalGastrs(2, G.alphabet, G.controls, ("g", "h"),
                      tuple(("g", r, "g") for r in G.rules) + (("g", G.rules[0], "h"),))
    rng = random.Random(4)
    b = SearchBudget(max_depth=5, max_visited=3000)
    for _ in range(30):
        t = random_tree(rng, 2, G.alphabet, G.controls, max_nodes=2, max_symbols=4)
        a = global_forward_reach(GG, "g", t, {"g": A0}, 0, b)
        c = bounded_forward_reach(project_local(GG, "g"), t, A0, b)
        assert a.verdict is c.verdict
