"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also without ``-s``) before it
asserts, so ``pytest tests/test_acceptance.py`` doubles as a report.
"""

import random
import time
from collections import defaultdict

import pytest

from gastrs.automata import is_empty, key_uniqueness_violations, normal_form_violations, read_automaton
from gastrs.automata.boolean import complement, intersect, union
from gastrs.automata.normalize import normalize
from gastrs.context import GlobalGastrs, context_bounded_prestar
from gastrs.oracle import (
    ALL_KINDS,
    TERMINATING_KINDS,
    BruteForce,
    Bounds,
    ExhaustiveReach,
    SearchBudget,
    Verdict,
    enumerate_trees,
    global_forward_reach,
    is_terminating_family,
    random_stack,
    random_system,
    random_target,
    random_tree,
)
from gastrs.saturation import FAMILIES, family_of, saturate, saturate_with_stats
from gastrs.stacks import Collapse, CPush, Pop, Push, Rew, top_stack, top_sym, try_apply
from gastrs.systemfile import read_system
from gastrs.trees import normalize_joins, parse_tree, successors

from conftest import corpus_automata, corpus_path


@pytest.fixture
def report(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return say


def _name(path):
    return path.rsplit("/", 1)[-1]


# ----------------------------------------------------------------------
# shared batches


@pytest.fixture(scope="module")
def corpus_scan():
    """One pass over every small tree per automaton signature: bottom-up vs
    brute-force membership, plus a reservoir of accepted trees for the
    sampled criteria."""
    t0 = time.perf_counter()
    autos = {_name(p): read_automaton(p) for p in corpus_automata()}
    groups = defaultdict(list)
    for name, A in autos.items():
        groups[(A.order, tuple(A.alphabet), tuple(sorted(A.controls)))].append(name)
    trees = mismatches = 0
    accepted = {name: [] for name in autos}
    any_accepted = dict.fromkeys(autos, False)
    for (order, alphabet, controls), names in sorted(groups.items()):
        brute = {n: BruteForce(autos[n]) for n in names}
        for t in enumerate_trees(alphabet, controls, order, Bounds(nodes=3, symbols=5, ann_depth=1)):
            trees += 1
            for n in names:
                a = autos[n].accepts_tree(t)
                if a != brute[n].tree_accepts(t):
                    mismatches += 1
                if a:
                    any_accepted[n] = True
                    if len(accepted[n]) < 200:
                        accepted[n].append(t)
    return {
        "autos": autos,
        "trees": trees,
        "mismatches": mismatches,
        "accepted": accepted,
        "any_accepted": any_accepted,
        "seconds": time.perf_counter() - t0,
    }


def sample_trees(scan, name, rng, n=500):
    A = scan["autos"][name]
    pos = scan["accepted"][name][: n // 4]
    rand = [random_tree(rng, A.order, A.alphabet, sorted(A.controls), max_nodes=3, max_symbols=5)
            for _ in range(n - len(pos))]
    return pos + rand


def _c3_instances(seed=2024, count=200):
    rng = random.Random(seed)
    for _ in range(count):
        order = rng.choice([1, 2])
        al = ("a", "b", "c")[: rng.randint(1, 3)]
        cs = ("p", "q", "r")[: rng.randint(1, 3)]
        G = random_system(rng, order, al, cs, rng.randint(1, 5))
        A0 = random_target(rng, order, al, G.controls)
        yield rng, G, A0


@pytest.fixture(scope="module")
def closure_batch():
    t0 = time.perf_counter()
    kinds = set()
    violations = []
    runs = []
    for i, (rng, G, A0) in enumerate(_c3_instances()):
        kinds.update(family_of(r) for r in G.rules)
        Gn = normalize_joins(G)
        A, st = saturate_with_stats(Gn, A0)
        runs.append((f"c3#{i}", A, st))
        for _ in range(50):
            t = random_tree(rng, G.order, G.alphabet, Gn.controls, max_nodes=4, max_symbols=5)
            if A0.accepts_tree(t) and not A.accepts_tree(t):
                violations.append((i, "target lost", t))
            if not A.accepts_tree(t) and any(A.accepts_tree(n) for n in successors(Gn, t)):
                violations.append((i, "not closed", t))
    return {"runs": runs, "kinds": kinds, "violations": violations, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def terminating_batch():
    t0 = time.perf_counter()
    rng = random.Random(77)
    runs = []
    mismatches = []
    trees = 0
    for i in range(60):
        order = 1 + i % 2
        if order == 1:
            al, depth = ("a", "b"), 1
        elif i % 4 == 1:
            al, depth = ("a",), 1
        else:
            al, depth = ("a", "b"), 0
        cs = ("p", "q")
        G = random_system(rng, order, al, cs, rng.randint(2, 5), kinds=TERMINATING_KINDS, must_include=("join",))
        assert is_terminating_family(G)
        A0 = random_target(rng, order, al, G.controls)
        A, st = saturate_with_stats(normalize_joins(G), A0)
        runs.append((f"c4#{i}", A, st))
        grounded = ExhaustiveReach(G, A0, grounded=True)
        full = ExhaustiveReach(G, A0, grounded=False)
        for t in enumerate_trees(al, cs, order, Bounds(nodes=4, symbols=5, ann_depth=depth)):
            trees += 1
            x = A.accepts_tree(t)
            if x != grounded.reachable(t):
                mismatches.append((i, "grounded", t, x))
            elif x and not full.reachable(t):
                mismatches.append((i, "unsound", t, x))
    return {"runs": runs, "mismatches": mismatches, "trees": trees, "seconds": time.perf_counter() - t0}


# ----------------------------------------------------------------------
# criteria


def test_c1_stack_algebra(report):
    t0 = time.perf_counter()
    rng = random.Random(1)
    checked = failures = 0
    for n in (1, 2, 3):
        for _ in range(1000):
            s = random_stack(rng, n, ("a", "b", "c"), max_symbols=10)
            for k in range(2, n + 1):
                p = try_apply(Push(k), s)
                if p is not None:
                    checked += 1
                    failures += try_apply(Pop(k), p) != s
            for k in range(1, n + 1):
                c = try_apply(CPush(k), s)
                if c is not None:
                    checked += 1
                    failures += try_apply(Collapse(k), c) != try_apply(Pop(k), s)
            if top_stack(s, 1).items:
                a = top_sym(s).char
                checked += 1
                failures += try_apply(Rew("z", a), try_apply(Rew(a, "z"), s)) != s
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 5
    report(1, ok, f"{checked} identities, {failures} failures, {dt:.1f}s (limit 5s)")
    assert ok


def test_c2_membership_vs_brute_force(corpus_scan, report):
    dt = corpus_scan["seconds"]
    ok = corpus_scan["mismatches"] == 0 and dt < 60
    report(2, ok, f"{len(corpus_scan['autos'])} automata, {corpus_scan['trees']} trees, "
                  f"{corpus_scan['mismatches']} mismatches, {dt:.1f}s (limit 60s)")
    assert ok


def test_c3_one_step_closure(closure_batch, report):
    dt = closure_batch["seconds"]
    missing = set(ALL_KINDS) - closure_batch["kinds"]
    bad = closure_batch["violations"]
    ok = not bad and not missing and dt < 600
    report(3, ok, f"{len(closure_batch['runs'])} systems x 50 trees, {len(bad)} violations, "
                  f"kinds missing {sorted(missing)}, {dt:.1f}s (limit 600s)")
    assert ok, bad[:5]


def test_c4_exhaustive_prestar(terminating_batch, report):
    dt = terminating_batch["seconds"]
    bad = terminating_batch["mismatches"]
    ok = not bad and dt < 900
    report(4, ok, f"{len(terminating_batch['runs'])} systems, {terminating_batch['trees']} trees, "
                  f"{len(bad)} mismatches, {dt:.1f}s (limit 900s)")
    assert ok, bad[:5]


def test_c5_transition_discipline(closure_batch, terminating_batch, report):
    problems = []
    runs = closure_batch["runs"] + terminating_batch["runs"]
    for tag, A, st in runs:
        problems += [(tag, v) for v in key_uniqueness_violations(A)]
        problems += [(tag, v) for v in st.bound_violations]
        if not st.converged:
            problems.append((tag, "did not converge"))
        if st.final_transitions["tree"] > st.tree_key_bound:
            problems.append((tag, "tree transitions above key bound"))
    ok = not problems
    report(5, ok, f"{len(runs)} saturations, {len(problems)} violations")
    assert ok, problems[:5]


def test_c6_boolean_algebra(corpus_scan, report):
    rng = random.Random(6)
    autos = corpus_scan["autos"]
    errors = []
    checks = 0
    for name, A in sorted(autos.items()):
        partners = [m for m, B in sorted(autos.items())
                    if B.order == A.order and set(B.alphabet) == set(A.alphabet)]
        C = complement(A)
        CC = complement(C)
        products = [(m, union(A, autos[m]), intersect(A, autos[m])) for m in partners]
        for t in sample_trees(corpus_scan, name, rng):
            a = A.accepts_tree(t)
            checks += 1
            if C.accepts_tree(t) == a:
                errors.append((name, "complement", t))
            if CC.accepts_tree(t) != a:
                errors.append((name, "double complement", t))
            for m, U, I in products:
                b = autos[m].accepts_tree(t)
                if U.accepts_tree(t) != (a or b):
                    errors.append((name, m, "union", t))
                if I.accepts_tree(t) != (a and b):
                    errors.append((name, m, "intersect", t))
    ok = not errors
    report(6, ok, f"{len(autos)} automata, {checks} sampled trees, {len(errors)} violations")
    assert ok, errors[:5]


def test_c7_emptiness(corpus_scan, report):
    errors = []
    for name, A in sorted(corpus_scan["autos"].items()):
        empty, witness = is_empty(A)
        if empty and corpus_scan["any_accepted"][name]:
            errors.append((name, "claimed empty"))
        if not empty and not A.accepts_tree(witness):
            errors.append((name, "witness rejected"))
        if not empty and not BruteForce(A).tree_accepts(witness):
            errors.append((name, "witness rejected by brute force"))
    ok = not errors
    report(7, ok, f"{len(corpus_scan['autos'])} automata, {len(errors)} violations")
    assert ok, errors


def test_c8_normalization(corpus_scan, report):
    rng = random.Random(8)
    errors = []
    for name, A in sorted(corpus_scan["autos"].items()):
        N = normalize(A)
        errors += [(name, v) for v in normal_form_violations(N)]
        for t in sample_trees(corpus_scan, name, rng):
            if N.accepts_tree(t) != A.accepts_tree(t):
                errors.append((name, t))
    ok = not errors
    report(8, ok, f"{len(corpus_scan['autos'])} automata x 500 trees, {len(errors)} violations")
    assert ok, errors[:5]


def _random_global_system(rng):
    order = rng.choice([1, 2])
    al, cs, gs = ("a", "b"), ("p", "q"), ("g", "h")
    G = random_system(rng, order, al, cs, rng.randint(2, 5))
    rules = tuple((rng.choice(gs), r, rng.choice(gs)) for r in G.rules)
    if all(g == g2 for g, _, g2 in rules):
        rules += (("g", G.rules[0], "h"),)
    targets = {g: random_target(rng, order, al, cs) for g in gs if rng.random() < 0.7} or {"h": random_target(rng, order, al, cs)}
    return GlobalGastrs(order, al, cs, gs, rules), targets


def test_c9_context_bounding(report):
    t0 = time.perf_counter()
    rng = random.Random(9)
    errors = []

    # (a) one global, no changes: same as plain saturation
    pairs = [("order2.g", "order2_alt"), ("order2.g", "order2_tree"), ("s1.g", "s1_target"), ("s2.g", "s2_target")]
    sampled = 0
    for sysname, autname in pairs:
        G = read_system(corpus_path("systems", sysname))
        A0 = read_automaton(corpus_path("automata", autname + ".aut"))
        GG = GlobalGastrs(G.order, G.alphabet, G.controls, ("g",), tuple(("g", r, "g") for r in G.rules))
        cb = context_bounded_prestar(GG, {"g": A0}, 0).automata["g"]
        plain = saturate(normalize_joins(G), A0)
        for _ in range(150):
            t = random_tree(rng, G.order, G.alphabet, G.controls, max_nodes=3, max_symbols=5)
            sampled += 1
            if cb.accepts_tree(t) != plain.accepts_tree(t):
                errors.append(("l=0", sysname, t))

    # (b) the shipped two-global example
    GG = read_system(corpus_path("systems", "two_globals.g"))
    targets = {"h": read_automaton(corpus_path("automata", "two_globals_h.aut"))}
    start = parse_tree(open(corpus_path("trees", "two_global_start.t")).read())
    at0 = context_bounded_prestar(GG, targets, 0).automata["g"].accepts_tree(start)
    at1 = context_bounded_prestar(GG, targets, 1).automata["g"].accepts_tree(start)
    fw0 = global_forward_reach(GG, "g", start, targets, 0)
    fw1 = global_forward_reach(GG, "g", start, targets, 1)
    if at0 or not at1:
        errors.append(("example", at0, at1))
    if fw0.verdict is not Verdict.EXHAUSTED_NEGATIVE or fw1.verdict is not Verdict.REACHABLE or fw1.switches != 1:
        errors.append(("example forward", fw0.verdict, fw1.verdict, fw1.switches))

    # (c) monotone in the bound, and complete against forward search
    budget = SearchBudget(max_depth=6, max_nodes=5, max_stack=8, max_visited=3000)
    for _ in range(15):
        GG, targets = _random_global_system(rng)
        levels = [context_bounded_prestar(GG, targets, b).automata for b in range(3)]
        for _ in range(40):
            t = random_tree(rng, GG.order, GG.alphabet, GG.controls, max_nodes=3, max_symbols=4)
            for g in GG.globals:
                acc = [L[g].accepts_tree(t) for L in levels]
                if acc != sorted(acc):
                    errors.append(("monotone", g, t, acc))
                r = global_forward_reach(GG, g, t, targets, 1, budget, grounded=True)
                if r.reachable and not acc[1]:
                    errors.append(("incomplete", g, t))
    dt = time.perf_counter() - t0
    ok = not errors and dt < 300
    report(9, ok, f"{sampled} trees at bound 0, example {'ok' if not at0 and at1 else 'wrong'}, "
                  f"{len(errors)} violations, {dt:.1f}s (limit 300s)")
    assert ok, errors[:5]


def test_c10_family_order(report):
    errors = []
    systems = 0
    for rng, G, A0 in _c3_instances(count=20):
        systems += 1
        Gn = normalize_joins(G)
        A = saturate(Gn, A0, family_order=FAMILIES)
        B = saturate(Gn, A0, family_order=tuple(reversed(FAMILIES)))
        for _ in range(200):
            t = random_tree(rng, G.order, G.alphabet, Gn.controls, max_nodes=4, max_symbols=5)
            if A.accepts_tree(t) != B.accepts_tree(t):
                errors.append((systems, t))
    ok = not errors
    report(10, ok, f"{systems} systems x 200 trees, two family orders, {len(errors)} violations")
    assert ok, errors[:5]
