"""The ``gastrs`` command.

Exit codes: 0 on success, 2 on any error. ``member`` exits 1 when the tree
is rejected.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional

from . import __version__
from .automata import (
    complement,
    format_automaton,
    intersect,
    is_empty,
    normalize,
    read_automaton,
    to_dot,
    union,
)
from .context import GlobalGastrs, context_bounded_prestar
from .errors import GastrsError, MemoryCapExceeded
from .oracle import Bounds, SearchBudget, Verdict, bounded_forward_reach, enumerate_trees
from .saturation import FAMILIES, Saturator
from .systemfile import read_system
from .trees import Gastrs, format_tree, normalize_joins, parse_tree

log = logging.getLogger("gastrs")


class UsageError(GastrsError):
    pass


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read_tree(path: str):
    with open(path) as fh:
        return parse_tree(fh.read())


def _mem_cap() -> Optional[float]:
    raw = os.environ.get("GASTRS_MAX_MEM")
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"GASTRS_MAX_MEM must be a number of megabytes, got {raw!r}") from None


def _normalized(A, path: str):
    """Normalise, warning when that drops empty-stack acceptance."""
    initial = set()
    for lst in A.tree_trans.values():
        initial.update(lst)
    for d in A.delta.values():
        for lst in d.values():
            initial.update(lst)
    lost = sorted(s for s in initial if s in A.layer_finals[A.state_order[s]])
    if lost:
        print(f"gastrs: warning: {path}: initial states {', '.join(lost)} accept the empty stack; "
              "normalising drops this, mark the stack bottom with _ instead", file=sys.stderr)
    return normalize(A)


def _plain_system(path: str) -> Gastrs:
    G = read_system(path)
    if isinstance(G, GlobalGastrs):
        raise UsageError(f"{path} has global states; use cbreach")
    return G


class RunReport:
    """Machine-readable summary. Everything except `timing` depends only on
    the inputs."""

    def __init__(self, command: str, inputs: List[str]):
        self.command = command
        self.inputs = {p: _digest(p) for p in inputs}
        self.stats: Dict = {}
        self.verdict: Optional[str] = None
        self._t0 = time.perf_counter()

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "stats": self.stats,
            "verdict": self.verdict,
            "timing": {"wall_ms": round((time.perf_counter() - self._t0) * 1000, 3)},
        }

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------------
# commands


def cmd_saturate(args) -> int:
    G = _plain_system(args.system)
    A0 = read_automaton(args.target)
    if args.normalize:
        A0 = _normalized(A0, args.target)
    order = FAMILIES
    if args.family_order:
        order = tuple(args.family_order.split(","))
        if sorted(order) != sorted(FAMILIES):
            raise UsageError("--family-order must list every family once: " + ",".join(FAMILIES))
    report = RunReport("saturate", [args.system, args.target])
    sat = Saturator(normalize_joins(G), A0, family_order=order, mem_cap_mb=_mem_cap())
    A = sat.run(args.max_rounds)
    _write(format_automaton(A), args.output)
    st = sat.stats.as_dict()
    st["bound_ok"] = not st["bound_violations"]
    report.stats = st
    report.verdict = "converged" if sat.stats.converged else "round-limit"
    if args.report:
        from .report import write_saturation_report

        for p in write_saturation_report(sat.stats, args.report):
            log.info("wrote %s", p)
    if args.stats:
        # the automaton owns stdout when no output file is given
        out = sys.stderr if args.output in (None, "-") else sys.stdout
        out.write(report.dumps())
    return 0


def cmd_member(args) -> int:
    A = read_automaton(args.automaton)
    t = _read_tree(args.tree)
    ok = A.accepts_tree(t)
    print("accepted" if ok else "rejected")
    return 0 if ok else 1


def cmd_empty(args) -> int:
    A = read_automaton(args.automaton)
    empty, witness = is_empty(A)
    if empty:
        print("empty")
    else:
        print("nonempty")
        print(format_tree(witness))
    return 0


def cmd_union(args) -> int:
    _write(format_automaton(union(read_automaton(args.left), read_automaton(args.right))), args.output)
    return 0


def cmd_intersect(args) -> int:
    _write(format_automaton(intersect(read_automaton(args.left), read_automaton(args.right))), args.output)
    return 0


def cmd_complement(args) -> int:
    if not args.experimental:
        raise UsageError("complement is experimental; pass --experimental to run it")
    A = read_automaton(args.automaton)
    _write(format_automaton(complement(A, max_arity=args.max_arity)), args.output)
    return 0


def cmd_normalize(args) -> int:
    _write(format_automaton(_normalized(read_automaton(args.automaton), args.automaton)), args.output)
    return 0


def cmd_dot(args) -> int:
    A = read_automaton(args.automaton)
    _write(to_dot(A, os.path.splitext(os.path.basename(args.automaton))[0]), args.output)
    return 0


def _parse_targets(items: List[str]) -> Dict[str, str]:
    out = {}
    for item in items:
        g, sep, path = item.partition("=")
        if not sep or not g or not path:
            raise UsageError(f"expected GLOBAL=FILE, got {item!r}")
        if g in out:
            raise UsageError(f"global {g} given twice")
        out[g] = path
    return out


def cmd_cbreach(args) -> int:
    GG = read_system(args.system)
    if not isinstance(GG, GlobalGastrs):
        raise UsageError(f"{args.system} declares no globals")
    paths = _parse_targets(args.targets)
    for g in paths:
        if g not in GG.globals:
            raise UsageError(f"unknown global {g!r}")
    targets = {g: read_automaton(p) for g, p in paths.items()}
    if args.bound < 0:
        raise UsageError("--bound must be non-negative")
    res = context_bounded_prestar(GG, targets, args.bound, mem_cap_mb=_mem_cap())
    os.makedirs(args.output, exist_ok=True)
    for g, A in sorted(res.automata.items()):
        with open(os.path.join(args.output, f"{g}.aut"), "w") as fh:
            fh.write(format_automaton(A))
    print(f"bound {args.bound}: {len(res.sequences)} sequences, {res.saturations} saturations")
    for g in sorted(res.automata):
        print(f"{g}: {os.path.join(args.output, g + '.aut')}")
    return 0


def _budget(args) -> SearchBudget:
    return SearchBudget(args.depth, args.max_nodes, args.max_stack, args.max_visited)


def cmd_fwd(args) -> int:
    G = _plain_system(args.system)
    t = _read_tree(args.tree)
    A0 = read_automaton(args.target)
    res = bounded_forward_reach(G, t, A0, _budget(args), grounded=args.grounded)
    print(res.verdict.value)
    if res.reachable:
        for rule, i in res.run:
            print(f"  leaf {i}: {rule}")
    return 0


def _parse_bounds(text: str) -> Bounds:
    names = {"nodes": "nodes", "symbols": "symbols", "ann": "ann_depth", "arity": "max_arity"}
    kw = {}
    for part in filter(None, text.split(",")):
        key, sep, val = part.partition("=")
        if not sep or key not in names or not val.isdigit():
            raise UsageError(f"bad bound {part!r}; use nodes=N,symbols=N,ann=N,arity=N")
        kw[names[key]] = int(val)
    return Bounds(**kw)


def cmd_xcheck(args) -> int:
    G = normalize_joins(_plain_system(args.system))
    A0 = read_automaton(args.target)
    bounds = _parse_bounds(args.bounds)
    budget = _budget(args)
    sat = Saturator(G, A0, mem_cap_mb=_mem_cap())
    A = sat.run()
    table: Dict[tuple, int] = {}
    controls = sorted(set(G.controls) & set(A0.controls)) or sorted(G.controls)
    incomplete = unsound = 0
    for t in enumerate_trees(G.alphabet, controls, G.order, bounds):
        accepted = A.accepts_tree(t)
        v = bounded_forward_reach(G, t, A0, budget, grounded=True).verdict
        if accepted and v is not Verdict.REACHABLE:
            full = bounded_forward_reach(G, t, A0, budget).verdict
            if full is Verdict.REACHABLE:
                v = full
            elif full is Verdict.EXHAUSTED_NEGATIVE:
                unsound += 1
        if v is Verdict.REACHABLE and not accepted:
            incomplete += 1
        key = (v.value, accepted)
        table[key] = table.get(key, 0) + 1
    print(f"{'oracle':<20} {'saturation':<10} {'trees':>8}")
    for (v, acc), n in sorted(table.items()):
        print(f"{v:<20} {'accepted' if acc else 'rejected':<10} {n:>8}")
    print(f"incomplete {incomplete}  unsound {unsound}")
    if args.report:
        from .report import write_xcheck_report

        for p in write_xcheck_report(table, args.report):
            log.info("wrote %s", p)
    return 0


# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gastrs", description="Backward reachability for annotated stack tree rewrite systems.")
    p.add_argument("--version", action="version", version=f"gastrs {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("saturate", help="compute the backward-reachable set of a target")
    s.add_argument("system")
    s.add_argument("target")
    s.add_argument("-o", "--output")
    s.add_argument("--stats", action="store_true", help="print a JSON run report")
    s.add_argument("--max-rounds", type=int)
    s.add_argument("--normalize", action="store_true", help="normalise the target first")
    s.add_argument("--family-order", help="comma-separated rule families, default " + ",".join(FAMILIES))
    s.add_argument("--report", metavar="DIR", help="write stats.csv and rounds.png here")
    s.set_defaults(func=cmd_saturate)

    s = sub.add_parser("member", help="exit 0 if the tree is accepted, 1 if not")
    s.add_argument("automaton")
    s.add_argument("tree")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("empty", help="decide emptiness, printing a witness tree")
    s.add_argument("automaton")
    s.set_defaults(func=cmd_empty)

    for name, fn in (("union", cmd_union), ("intersect", cmd_intersect)):
        s = sub.add_parser(name)
        s.add_argument("left")
        s.add_argument("right")
        s.add_argument("-o", "--output")
        s.set_defaults(func=fn)

    s = sub.add_parser("complement")
    s.add_argument("automaton")
    s.add_argument("--max-arity", type=int, help="largest node arity of the complemented universe")
    s.add_argument("--experimental", action="store_true", help="acknowledge the construction is experimental")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_complement)

    s = sub.add_parser("normalize")
    s.add_argument("automaton")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("dot", help="Graphviz rendering of an automaton")
    s.add_argument("automaton")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_dot)

    s = sub.add_parser("cbreach", help="context-bounded backward reachability")
    s.add_argument("system")
    s.add_argument("--targets", nargs="+", required=True, metavar="GLOBAL=FILE")
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("-o", "--output", required=True, metavar="OUTDIR")
    s.set_defaults(func=cmd_cbreach)

    def budget_args(s, depth):
        s.add_argument("--depth", type=int, default=depth)
        s.add_argument("--max-nodes", type=int, default=8)
        s.add_argument("--max-stack", type=int, default=24)
        s.add_argument("--max-visited", type=int, default=200_000)

    s = sub.add_parser("fwd", help="bounded forward search")
    s.add_argument("system")
    s.add_argument("tree")
    s.add_argument("target")
    budget_args(s, 12)
    s.add_argument("--grounded", action="store_true", help="ignore trees with empty substacks")
    s.set_defaults(func=cmd_fwd)

    s = sub.add_parser("xcheck", help="compare saturation with forward search on all small trees")
    s.add_argument("system")
    s.add_argument("target")
    s.add_argument("--bounds", default="nodes=2,symbols=3", help="e.g. nodes=3,symbols=4,ann=1")
    budget_args(s, 8)
    s.add_argument("--report", metavar="DIR", help="write xcheck.csv and xcheck.png here")
    s.set_defaults(func=cmd_xcheck)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except MemoryCapExceeded as e:
        print(f"gastrs: aborted: {e}", file=sys.stderr)
        return 2
    except (GastrsError, OSError, ValueError) as e:
        print(f"gastrs: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
