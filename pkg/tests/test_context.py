import pytest

from gastrs.automata import is_empty, read_automaton
from gastrs.context import (
    GlobalGastrs,
    add_change_transitions,
    context_bounded_prestar,
    global_sequences,
    mark_single_application,
    marked,
    normalize_global,
    project_local,
)
from gastrs.automata.normalize import normalize
from gastrs.errors import RuleShapeViolation
from gastrs.oracle import Verdict, global_forward_reach, random_tree
from gastrs.saturation import saturate
from gastrs.stacks import Pop, Rew
from gastrs.systemfile import read_system
from gastrs.trees import Local, Spawn, parse_tree, successor_steps

from conftest import corpus_path

T = parse_tree


@pytest.fixture
def two_globals():
    GG = read_system(corpus_path("systems", "two_globals.g"))
    targets = {"h": read_automaton(corpus_path("automata", "two_globals_h.aut"))}
    start = T(open(corpus_path("trees", "two_global_start.t")).read())
    return GG, targets, start


def test_project_local():
    GG = GlobalGastrs(1, "ab", "pq", ("g", "h"), (
        ("g", Local("p", Rew("a", "b"), "q"), "g"),
        ("g", Local("p", Pop(1), "q"), "h"),
    ))
    assert project_local(GG, "h").rules == ()
    assert project_local(GG, "g").rules == (Local("p", Rew("a", "b"), "q"),)
    only = GlobalGastrs(1, "ab", "pq", ("g",), (("g", Local("p", Pop(1), "q"), "g"),))
    assert project_local(only, "g").rules == (Local("p", Pop(1), "q"),)


def test_marking_is_empty_and_sized():
    for name in ("s1_target", "two_leaf", "order2_tree"):
        A = read_automaton(corpus_path("automata", name + ".aut"))
        M = mark_single_application(A)
        assert is_empty(M)[0]
        m = max(A.max_arity(), 1)
        non_controls = len(A.tree_states - A.controls)
        assert len(M.tree_states) == len(A.controls) + len(A.tree_states) * (m + 1)
        assert non_controls >= 1


def test_unmarked_runs_project(rng):
    A = read_automaton(corpus_path("automata", "two_leaf.aut"))
    M = mark_single_application(A)
    for _ in range(200):
        t = random_tree(rng, 1, A.alphabet, sorted(A.controls), max_nodes=4)
        # leaves keep their control; (q, 0) labels are the original inner labels
        inner = {q for q in A.run_labels(t) if q not in A.controls}
        assert {q for q in M.run_labels(t) if q.endswith("|0")} == {marked(q, 0) for q in inner}


def test_change_transitions(rng):
    A_prev = read_automaton(corpus_path("automata", "s1_target.aut"))
    rule = Local("p", Rew("a", "b"), "q")
    R = add_change_transitions(mark_single_application(A_prev), A_prev, [rule])
    assert R.accepts_tree(T("(leaf p [1 a _])"))
    assert not R.accepts_tree(T("(leaf q [1 b _])"))
    added = len(R.tree_trans) - len(mark_single_application(A_prev).tree_trans)
    assert added == A_prev.max_arity()
    none = add_change_transitions(mark_single_application(A_prev), A_prev, [Local("q", Rew("a", "b"), "p")])
    assert is_empty(none)[0]
    with pytest.raises(RuleShapeViolation):
        add_change_transitions(mark_single_application(A_prev), A_prev, [Local("p", Pop(1), "q")])


def test_change_transitions_exhaustive():
    from gastrs.oracle import Bounds, enumerate_trees

    A_prev = read_automaton(corpus_path("automata", "two_leaf.aut"))
    rule = Local("q", Rew("a", "b"), "q")
    R = normalize(add_change_transitions(mark_single_application(A_prev), A_prev, [rule]))
    for t in enumerate_trees(("a", "b", "_"), ("p", "q"), 1, Bounds(nodes=4, symbols=4)):
        one_step = any(A_prev.accepts_tree(n) for _, _, n in successor_steps([rule], t))
        assert R.accepts_tree(t) == one_step, t


def test_sequences():
    seqs = global_sequences(("g", "h", "k"), "g", 2)
    assert ("g",) in seqs and ("g", "h", "g") in seqs
    assert all(len(s) <= 3 and all(a != b for a, b in zip(s, s[1:])) for s in seqs)
    assert len(seqs) == 1 + 2 + 4


def test_normalize_global_shapes():
    GG = GlobalGastrs(1, "ab", "pq", ("g", "h"), (
        ("g", Local("p", Pop(1), "q"), "h"),
        ("h", Spawn("q", ("p", "p")), "g"),
    ))
    N = normalize_global(GG)
    for g, op, g2 in N.rules:
        if g != g2:
            assert isinstance(op, Local) and isinstance(op.op, Rew)
    assert len(N.controls) == len(GG.controls) + 2


def test_two_global_example(two_globals):
    GG, targets, t = two_globals
    at0 = context_bounded_prestar(GG, targets, 0)
    at1 = context_bounded_prestar(GG, targets, 1)
    assert not at0.automata["g"].accepts_tree(t)
    assert at1.automata["g"].accepts_tree(t)
    fw = global_forward_reach(GG, "g", t, targets, 1)
    assert fw.verdict is Verdict.REACHABLE and fw.switches == 1
    assert global_forward_reach(GG, "g", t, targets, 0).verdict is Verdict.EXHAUSTED_NEGATIVE


def test_saturation_count(two_globals):
    GG, targets, _ = two_globals
    for bound in range(3):
        res = context_bounded_prestar(GG, targets, bound)
        assert res.saturations <= len(res.sequences)
        # each distinct sequence is saturated at most once
        assert len(set(res.sequences)) == len(res.sequences)


def test_bound_zero_single_global(rng):
    G = read_system(corpus_path("systems", "order2.g"))
    A0 = read_automaton(corpus_path("automata", "order2_alt.aut"))
    GG = GlobalGastrs(G.order, G.alphabet, G.controls, ("g",), tuple(("g", r, "g") for r in G.rules))
    res = context_bounded_prestar(GG, {"g": A0}, 0)
    A = saturate(G, A0)
    for _ in range(200):
        t = random_tree(rng, 2, G.alphabet, G.controls, max_nodes=3, max_symbols=5)
        assert res.automata["g"].accepts_tree(t) == A.accepts_tree(t)


def test_bound_zero_independent_globals(rng):
    G = read_system(corpus_path("systems", "s1.g"))
    A0 = read_automaton(corpus_path("automata", "s1_target.aut"))
    GG = GlobalGastrs(1, G.alphabet, G.controls, ("g", "h"), (("g", G.rules[0], "g"),))
    res = context_bounded_prestar(GG, {"g": A0, "h": A0}, 0)
    assert res.automata["g"].accepts_tree(T("(leaf p [1 a _])"))
    assert not res.automata["h"].accepts_tree(T("(leaf p [1 a _])"))
    assert res.automata["h"].accepts_tree(T("(leaf q [1 b _])"))
