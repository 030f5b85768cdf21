"""Command line harness: solve one instance, verify invariants over a seeded
suite, benchmark round/message scaling, or generate STP files."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from .engine import Engine
from .graph import (
    GENERATOR_KINDS,
    GraphError,
    WeightedGraph,
    format_weight,
    generate_graph,
    graph_metrics,
    parse_stp,
    serialize_stp,
)
from .oracles import (
    MAX_EXACT_TERMINALS,
    OracleError,
    dreyfus_wagner,
    kmb_sequential,
    lexicographic_spd,
)
from .pipeline import stccm_a, stccm_b
from .verify import CHECK_NAMES, suite_graph, verify_suite

ALGORITHMS = ("stccm-a", "stccm-b", "kmb", "exact")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    env_seed = os.environ.get("CLIQUE_STEINER_SEED")
    if env_seed is not None and hasattr(args, "seed"):
        args.seed = int(env_seed)
    try:
        return args.func(args)
    except (GraphError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clique-steiner",
        description="Terminal-spanning tree construction over a simulated clique network",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance and print a result record")
    solve.add_argument("--alg", choices=ALGORITHMS, default="stccm-a")
    solve.add_argument("--input", help="STP file path (- for stdin)")
    solve.add_argument("--gen", choices=GENERATOR_KINDS, help="generate the instance instead")
    solve.add_argument("--kind", choices=GENERATOR_KINDS, help="alias for --gen")
    solve.add_argument("--n", type=int, default=8)
    solve.add_argument("--t", type=int)
    solve.add_argument("--density", type=float, default=0.45)
    solve.add_argument("--seed", type=int, default=1)
    solve.add_argument("--max-rounds", type=int, default=20_000)
    solve.add_argument("--trace", help="write one line per message to this file")
    solve.add_argument("--out", help="also write the record as JSON to this file")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="run the seeded invariant suite")
    verify.add_argument("--instances", type=int, default=200)
    verify.add_argument("--check", choices=CHECK_NAMES, default="all")
    verify.add_argument("--seed", type=int, default=1)
    verify.add_argument("--break-pruning", action="store_true", help=argparse.SUPPRESS)
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="measure round/message scaling")
    bench.add_argument("--sizes", default="8,27,64")
    bench.add_argument("--algs", default="stccm-a,stccm-b")
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--max-rounds", type=int, default=100_000)
    bench.set_defaults(func=cmd_bench)

    gen = sub.add_parser("gen", help="generate an STP instance file")
    gen.add_argument("--kind", choices=GENERATOR_KINDS, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--t", type=int)
    gen.add_argument("--density", type=float, default=0.45)
    gen.add_argument("--wmin", type=int, default=1)
    gen.add_argument("--wmax", type=int, default=20)
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--out", help="output path (default stdout)")
    gen.set_defaults(func=cmd_gen)
    return parser


def _load_graph(args) -> WeightedGraph:
    kind = args.gen or args.kind
    if args.input and kind:
        raise GraphError("give either --input or --gen, not both")
    if args.input:
        text = sys.stdin.read() if args.input == "-" else open(args.input).read()
        return parse_stp(text)
    if kind:
        return generate_graph(
            kind, args.n, seed=args.seed, terminal_count=args.t, density=args.density
        )
    raise GraphError("no instance given: use --input FILE or --gen KIND")


def cmd_solve(args) -> int:
    g = _load_graph(args)
    trace = [] if args.trace else None
    record = {"algorithm": args.alg, "n": g.n, "m": g.m, "t": g.t,
              "S": lexicographic_spd(g)}
    if args.alg in ("stccm-a", "stccm-b"):
        engine = Engine(max_rounds=args.max_rounds, trace=trace)
        run = stccm_a if args.alg == "stccm-a" else stccm_b
        tree, metrics = run(g, engine)
        edges = tree.edges
        record["cost"] = tree.cost
        record["rounds"] = metrics.rounds_elapsed
        record["messages"] = metrics.messages_sent
        record["steps"] = [
            {"label": label, "rounds": r, "messages": m}
            for label, r, m in metrics.phases
        ]
    elif args.alg == "kmb":
        edges = kmb_sequential(g)
        record["cost"] = sum(w for _, _, w in edges)
    else:  # exact
        result = dreyfus_wagner(g)
        edges = result.edges
        record["cost"] = result.cost
        record["terminal_leaf_count"] = result.terminal_leaf_count
    if args.alg != "exact" and g.t <= MAX_EXACT_TERMINALS and g.n <= 16:
        opt = dreyfus_wagner(g)
        record["opt_cost"] = opt.cost
        if opt.cost > 0:
            record["ratio"] = float(Fraction(record["cost"]) / Fraction(opt.cost))
    print_record(record, edges)
    if args.trace:
        with open(args.trace, "w") as fh:
            for round_no, src, dst, tag in trace:
                fh.write(f"{round_no} {src} {dst} {tag}\n")
    if args.out:
        payload = dict(record)
        payload["edges"] = [[u, v, str(w)] for u, v, w in edges]
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)
            fh.write("\n")
    return 0


def print_record(record: dict, edges) -> None:
    for key, value in record.items():
        if key == "steps":
            for step in value:
                print(f"step={step['label']} rounds={step['rounds']} messages={step['messages']}")
        elif key in ("cost", "opt_cost"):
            print(f"{key}={format_weight(value)}")
        else:
            print(f"{key}={value}")
    for u, v, w in edges:
        print(f"tree_edge={u} {v} {format_weight(w)}")


def cmd_verify(args) -> int:
    printed = {"count": 0}

    def progress(seed, report):
        printed["count"] += 1
        if printed["count"] % 50 == 0:
            print(f"checked {printed['count']} instances (through seed {seed})")

    reports, failures, max_ratio = verify_suite(
        instances=args.instances, check=args.check, seed0=args.seed,
        progress=progress, break_pruning=args.break_pruning,
    )
    worst_bound = max(
        (Fraction(2) * (1 - Fraction(1, r.graph.t)) for r in reports if r.graph.t > 1),
        default=Fraction(2),
    )
    print(f"instances={len(reports)} check={args.check}")
    print(f"max_observed_ratio={float(max_ratio):.6f} (bound 2(1-1/t) <= {float(worst_bound):.6f})")
    if failures:
        for seed, message in failures[:20]:
            print(f"FAIL seed={seed}: {message}")
        g = suite_graph(failures[0][0])
        print(f"first failing instance (seed {failures[0][0]}):")
        sys.stdout.write(serialize_stp(g))
        print(f"total failures: {len(failures)}")
        return 1
    print("all checks passed")
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    algs = [a for a in args.algs.split(",") if a]
    rows = []
    for alg in algs:
        solver = stccm_a if alg == "stccm-a" else stccm_b
        kinds = ["complete"] if alg == "stccm-a" else ["complete", "path"]
        for kind in kinds:
            for n in sizes:
                g = generate_graph(kind, n, seed=args.seed,
                                   terminal_count=max(2, n // 4),
                                   weight_range=(1, 1) if kind == "complete" else (1, 8))
                s = lexicographic_spd(g)
                tree, metrics = solver(g, Engine(max_rounds=args.max_rounds))
                rows.append((alg, kind, n, g.t, s,
                             metrics.rounds_elapsed, metrics.messages_sent, metrics))
    print(f"{'alg':<9}{'kind':<10}{'n':>4}{'t':>4}{'S':>4}{'rounds':>8}{'messages':>10}")
    for alg, kind, n, t, s, rounds, messages, _ in rows:
        print(f"{alg:<9}{kind:<10}{n:>4}{t:>4}{s:>4}{rounds:>8}{messages:>10}")
    print()
    for alg, kind, n, t, s, rounds, messages, metrics in rows:
        if alg == "stccm-a":
            c1 = rounds / (n ** (1 / 3) * max(1, math.ceil(math.log2(n))))
            cm = messages / (n ** (7 / 3) * max(1, math.ceil(math.log2(n))))
            print(f"stccm-a {kind} n={n}: rounds = {c1:.2f} * n^(1/3)*log2(n); "
                  f"messages = {cm:.2f} * n^(7/3)*log2(n)")
        else:
            phases = sum(1 for label, _, _ in metrics.phases if label == "mst")
            mst_rounds = sum(r for label, r, _ in metrics.phases if label == "mst")
            loglog = max(1.0, math.log2(max(2.0, math.log2(n))) + 1)
            tail = rounds - (s + 2)
            print(f"stccm-b {kind} n={n}: rounds = (S+2) + {tail} "
                  f"(merge phases take {mst_rounds} rounds <= 4*ceil(loglog n)+4 = {4 * loglog + 4:.0f}); "
                  f"messages = {messages / (max(1, (s + 2) * (n - t) ** 2 + n * n)):.2f} * (S(n-t)^2 + n^2)")
    return 0


def cmd_gen(args) -> int:
    g = generate_graph(args.kind, args.n, seed=args.seed, terminal_count=args.t,
                       density=args.density, weight_range=(args.wmin, args.wmax))
    text = serialize_stp(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
