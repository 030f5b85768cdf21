"""Seeded instance suite shared by the CLI verifier and the acceptance tests.

One report per instance bundles both solver runs, the exact oracles, and the
measured round/message envelopes, so every invariant can be checked off the
same data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import Engine
from .graph import INF, WeightedGraph, generate_graph
from .mst import edge_key, lotker_mst
from .oracles import (
    kz_mst_cost,
    brute_force_spf,
    complete_distance_graph,
    dijkstra,
    dreyfus_wagner,
    kmb_sequential,
    kruskal,
    lexicographic_spd,
    shortest_straight_path,
)
from .pipeline import extract_straight_paths, stccm_a, stccm_b
from .spf import validate_spf


@dataclass
class InstanceReport:
    seed: int
    graph: WeightedGraph
    spd: int
    tree_a: object
    metrics_a: object
    details_a: dict
    tree_b: object
    metrics_b: object
    details_b: dict
    opt: object
    violations: list = field(default_factory=list)


def suite_graph(seed: int, n_lo: int = 5, n_hi: int = 12, t_max: int = 6,
                weight_range=(1, 20), density: float = 0.45) -> WeightedGraph:
    n = n_lo + (seed * 7) % (n_hi - n_lo + 1)
    t = 1 + (seed * 13) % min(t_max, n)
    return generate_graph(
        "random-connected", n, seed=seed, terminal_count=t,
        density=density, weight_range=weight_range,
    )


def perturbed_graph(seed: int, **kwargs) -> WeightedGraph:
    """Suite graph with seed-derived epsilon weights added per edge."""
    g = suite_graph(seed, **kwargs)
    scale = 1_000_003
    edges = {}
    for idx, (key, w) in enumerate(sorted(g.edges.items())):
        eps = Fraction((seed * 31 + idx * 7919) % scale + 1, scale * scale)
        edges[key] = w + eps
    return WeightedGraph(g.n, edges, g.terminals)


def has_distinct_terminal_distances(g: WeightedGraph) -> bool:
    dists = [w for _, _, w in complete_distance_graph(g)]
    return len(dists) == len(set(dists))


def run_instance(seed: int, graph: WeightedGraph | None = None,
                 with_exact: bool = True, max_rounds: int = 20_000) -> InstanceReport:
    g = graph if graph is not None else suite_graph(seed)
    details_a, details_b = {}, {}
    tree_a, metrics_a = stccm_a(g, Engine(max_rounds=max_rounds), details_a)
    tree_b, metrics_b = stccm_b(g, Engine(max_rounds=max_rounds), details_b)
    opt = dreyfus_wagner(g) if with_exact and g.t <= 12 else None
    return InstanceReport(
        seed=seed,
        graph=g,
        spd=lexicographic_spd(g),
        tree_a=tree_a,
        metrics_a=metrics_a,
        details_a=details_a,
        tree_b=tree_b,
        metrics_b=metrics_b,
        details_b=details_b,
        opt=opt,
    )


def approx_bound(leaf_count: int):
    return Fraction(2) * (1 - Fraction(1, max(1, leaf_count)))


def phase_metrics(metrics, label: str):
    rounds = sum(r for name, r, _ in metrics.phases if name == label)
    messages = sum(m for name, _, m in metrics.phases if name == label)
    return rounds, messages


# ---------------------------------------------------------------------------
# Individual checks; each returns a list of violation strings
# ---------------------------------------------------------------------------

def check_spf(report: InstanceReport) -> list:
    g = report.graph
    out = []
    fa, fb = report.details_a["forest"], report.details_b["forest"]
    oracle = brute_force_spf(g)
    if fa.sources != oracle.sources or fa.dists != oracle.dists:
        out.append("matrix-based forest (s, d) differs from the oracle forest")
    if fb.sources != oracle.sources or fb.dists != oracle.dists:
        out.append("relaxation forest (s, d) differs from the oracle forest")
    for name, forest in (("apsp", fa), ("relax", fb), ("oracle", oracle)):
        bad = validate_spf(forest, g)
        if bad:
            out.append(f"{name} forest invalid: {bad[0]}")
    return out


def check_spf_envelopes(report: InstanceReport) -> list:
    g, s = report.graph, report.spd
    out = []
    rounds, messages = phase_metrics(report.metrics_b, "spf-b")
    if rounds > s + 2:
        out.append(f"relaxation ran {rounds} rounds > S+2 = {s + 2}")
    n, t = g.n, g.t
    bound = (s + 2) * (n - t) ** 2 + n * t + n
    if messages > bound:
        out.append(f"relaxation sent {messages} messages > bound {bound}")
    r2, m2 = phase_metrics(report.metrics_b, "reweight")
    if m2 != 2 * g.m:
        out.append(f"reweight sent {m2} messages, expected exactly {2 * g.m}")
    if r2 > 1:
        out.append(f"reweight took {r2} rounds, expected 1")
    return out


def check_ratio(report: InstanceReport) -> list:
    if report.opt is None:
        return []
    out = []
    bound = approx_bound(report.opt.terminal_leaf_count) * report.opt.cost
    for name, tree in (("stccm-a", report.tree_a), ("stccm-b", report.tree_b)):
        if tree.cost > bound:
            out.append(
                f"{name} cost {tree.cost} exceeds 2(1-1/l) bound {bound} "
                f"(opt {report.opt.cost}, l={report.opt.terminal_leaf_count})"
            )
        if tree.cost < report.opt.cost:
            out.append(f"{name} cost {tree.cost} beats the optimum {report.opt.cost}")
    return out


def check_agreement(report: InstanceReport) -> list:
    if report.tree_a.cost != report.tree_b.cost:
        return [
            f"solver disagreement: {report.tree_a.cost} vs {report.tree_b.cost}"
        ]
    return []


def check_mst_phases(records, n: int) -> list:
    out = []
    limit = math.ceil(math.log2(max(2, math.log2(n)))) + 1 if n > 2 else 1
    if len(records) > limit:
        out.append(f"{len(records)} merge phases exceed bound {limit} for n={n}")
    for rec in records:
        floor = 2 ** (2 ** (rec.phase - 2)) if rec.phase >= 2 else 1
        if rec.n_min < floor:
            out.append(
                f"phase {rec.phase} started with min fragment {rec.n_min} < {floor}"
            )
    return out


def check_straight_paths(report: InstanceReport) -> list:
    out = []
    g = report.graph
    for u, v, length in extract_straight_paths(report.tree_b, g).paths:
        expect = shortest_straight_path(g, u, v)
        if length != expect:
            out.append(
                f"straight path {u}-{v} has length {length}, shortest is {expect}"
            )
    return out


def check_kz_equality(report: InstanceReport, tree=None, internals=None) -> list:
    """Connector total vs the exact terminal-closure MST (distinct distances)."""
    g = report.graph
    if not has_distinct_terminal_distances(g):
        return []
    out = []
    kz_cost = kz_mst_cost(g)
    internals = internals or report.details_b.get("internals")
    tree = tree or report.tree_b
    if internals is not None:
        gc, tm_edges, _ = internals
        connector = sum(
            gc.weight(u, v) for u, v, _ in tm_edges
            if gc.categories[(u, v) if u < v else (v, u)] == "inter_tree"
        )
        if connector != kz_cost:
            out.append(
                f"selected connector total {connector} != terminal-closure MST {kz_cost}"
            )
    if tree.cost != kz_cost:
        out.append(f"tree cost {tree.cost} != terminal-closure MST cost {kz_cost}")
    return out


def check_structure(report: InstanceReport) -> list:
    """Output shape: acyclic, connected, spans Z, every leaf a terminal."""
    out = []
    g = report.graph
    terminals = set(g.terminals)
    for name, tree in (("stccm-a", report.tree_a), ("stccm-b", report.tree_b)):
        members = tree.node_set()
        if not terminals <= members:
            out.append(f"{name} output misses terminals")
            continue
        if len(tree.edges) != len(members) - 1:
            out.append(f"{name} output is not a tree")
            continue
        adj = {v: [] for v in members}
        for a, b, _ in tree.edges:
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(members))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if seen != members:
            out.append(f"{name} output is disconnected")
            continue
        if len(members) > 1:
            for v in members:
                if len(adj[v]) == 1 and v not in terminals:
                    out.append(f"{name} kept non-terminal leaf {v}")
                    break
    return out


def check_degenerate(report: InstanceReport) -> list:
    g = report.graph
    out = []
    if g.t == 2:
        z1, z2 = g.terminals
        expect = dijkstra(g, z1)[0][z2]
        for name, tree in (("stccm-a", report.tree_a), ("stccm-b", report.tree_b)):
            if tree.cost != expect:
                out.append(f"{name} two-terminal cost {tree.cost} != distance {expect}")
    if g.t == g.n:
        expect = sum(w for _, _, w in kruskal(g.n, [(u, v, w) for (u, v), w in g.edges.items()]))
        for name, tree in (("stccm-a", report.tree_a), ("stccm-b", report.tree_b)):
            if tree.cost != expect:
                out.append(f"{name} all-terminal cost {tree.cost} != MST weight {expect}")
    return out


CHECK_NAMES = ("spf", "mst", "ratio", "rounds", "messages", "all")


def check_report(report: InstanceReport, check: str = "all") -> list:
    out = []
    if check in ("spf", "all"):
        out += check_spf(report)
        out += check_straight_paths(report)
    if check in ("rounds", "messages", "all"):
        out += check_spf_envelopes(report)
    if check in ("mst", "all"):
        g = report.graph
        internals = report.details_b.get("internals")
        if internals is not None:
            gc, tm_edges, records = internals
            finite = [
                (u, v, w) for (u, v), w in gc.weights.items() if w != INF
            ]
            expect = {edge_key(u, v, w) for u, v, w in kruskal(g.n, finite)}
            got = {edge_key(u, v, w) for u, v, w in tm_edges}
            if expect != got:
                out.append("clique merge tree differs from the sequential tree")
            out += check_mst_phases(records, g.n)
    if check in ("ratio", "all"):
        out += check_ratio(report)
        out += check_agreement(report)
        out += check_degenerate(report)
    if check == "all":
        out += check_structure(report)
    return out


def verify_suite(instances: int = 200, check: str = "all", seed0: int = 1,
                 progress=None, break_pruning: bool = False):
    """Run the seeded suite; returns (reports, failures, max observed ratio)."""
    from . import pipeline

    failures = []
    reports = []
    max_ratio = Fraction(0)
    pipeline.BREAK_PRUNING_HOOK = break_pruning
    try:
        for i in range(instances):
            seed = seed0 + i
            report = run_instance(seed)
            for message in check_report(report, check):
                failures.append((seed, message))
            if report.opt is not None and report.opt.cost > 0:
                for tree in (report.tree_a, report.tree_b):
                    max_ratio = max(max_ratio, Fraction(tree.cost, 1) / report.opt.cost)
            reports.append(report)
            if progress is not None:
                progress(seed, report)
    finally:
        pipeline.BREAK_PRUNING_HOOK = False
    return reports, failures, max_ratio
