"""Shortest path forest construction and validation.

A forest assigns every node a source terminal s(v), the exact distance d(v)
to it, and a parent pi(v) whose edge realizes that distance.  Terminals are
their own roots.  Two constructions are provided: one on top of all-pairs
distances and routing tables, and a message-driven relaxation that needs no
precomputed distances and settles within S + 2 rounds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Engine, NodeProgram, RoundMetrics, broadcast_outbox
from .graph import INF, WeightedGraph
from .minplus import distributed_apsp


@dataclass
class ShortestPathForest:
    sources: list  # s(v): terminal id
    dists: list    # d(v): exact distance to s(v)
    preds: list    # pi(v): parent, pi(z) = z for terminals

    def dump(self) -> str:
        """Per-node line "v s(v) d(v) pi(v)" for golden-file comparisons."""
        from .graph import format_weight

        return "\n".join(
            f"{v} {self.sources[v]} {format_weight(self.dists[v])} {self.preds[v]}"
            for v in range(len(self.sources))
        ) + "\n"


class ForestError(Exception):
    pass


def spf_from_apsp(g: WeightedGraph, D: list, R: list) -> ShortestPathForest:
    """Forest from distance rows and routing rows.

    Each non-terminal picks the closest terminal (smallest id on ties) and
    its first routing hop toward it as parent.
    """
    terminals = set(g.terminals)
    sources = [0] * g.n
    dists = [0] * g.n
    preds = [0] * g.n
    for v in range(g.n):
        if v in terminals:
            sources[v], dists[v], preds[v] = v, 0, v
            continue
        best = min((D[v][z], z) for z in g.terminals)
        if best[0] == INF:
            raise ForestError(f"node {v} cannot reach any terminal")
        dists[v], sources[v] = best
        preds[v] = R[v][sources[v]]
    return ShortestPathForest(sources, dists, preds)


def canonical_parent(node: int, source, dist, neighbor_view: dict) -> int:
    """Smallest-id neighbor one tight hop closer to the shared source.

    ``neighbor_view`` maps each graph neighbor to (weight, its source, its
    distance).  Normalizing parents this way makes both forest constructions
    hand the exact same forest to the rest of the pipeline.
    """
    best = None
    for u in sorted(neighbor_view):
        w, s_u, d_u = neighbor_view[u]
        if s_u == source and d_u + w == dist:
            best = u
            break
    if best is None:
        raise ForestError(f"node {node} has no tight edge toward its source")
    return best


class _SpfAssembleProgram(NodeProgram):
    """Terminal flags, closest-terminal choice, one neighbor exchange, and a
    parent announcement: a fixed four-round script after the matrix work."""

    busy = True

    def __init__(self, node: int, n: int, is_terminal: bool, dist_row, edge_weights):
        self.node = node
        self.n = n
        self.is_terminal = is_terminal
        self.dist_row = dist_row
        self.edge_weights = edge_weights  # graph neighbor -> weight
        self.known_terminals = []
        self.chosen = None
        self.neighbor_view = {}

    def step(self, round_no: int, inbox: list):
        if round_no == 1:
            return broadcast_outbox(self.node, self.n, ("tflag", (self.node, self.is_terminal)))
        if round_no == 2:
            for env in inbox:
                node, flag = env.payload[1]
                if flag:
                    self.known_terminals.append(node)
            if self.is_terminal:
                self.known_terminals.append(self.node)
                source, dist = self.node, 0
            else:
                dist, source = min((self.dist_row[z], z) for z in sorted(self.known_terminals))
            self.source, self.dist = source, dist
            body = ("set-source", (source, dist))
            return [(nbr, body) for nbr in sorted(self.edge_weights)]
        if round_no == 3:
            for env in inbox:
                s_u, d_u = env.payload[1]
                self.neighbor_view[env.src] = (self.edge_weights[env.src], s_u, d_u)
            if self.is_terminal:
                self.chosen = (self.node, 0, self.node)
                self.halted = True
                self.busy = False
                return []
            parent = canonical_parent(self.node, self.source, self.dist, self.neighbor_view)
            self.chosen = (self.source, self.dist, parent)
            self.halted = True
            self.busy = False
            return [(parent, ("parent-announce", (self.node,)))]
        return []


def spf_a_run(g: WeightedGraph, engine: Engine):
    """Distributed forest construction: APSP rows, then local choice, one
    neighbor exchange, and a parent announcement."""
    D, R, apsp_metrics = distributed_apsp(g, engine)
    terminals = set(g.terminals)
    programs = [
        _SpfAssembleProgram(v, g.n, v in terminals, D[v], {u: w for u, w in g.adj[v]})
        for v in range(g.n)
    ]
    assemble_metrics = engine.run(programs, label="spf-assemble")
    sources = [0] * g.n
    dists = [0] * g.n
    preds = [0] * g.n
    for v in range(g.n):
        sources[v], dists[v], preds[v] = programs[v].chosen
    metrics = RoundMetrics()
    metrics.merge(apsp_metrics)
    metrics.merge(assemble_metrics)
    forest = ShortestPathForest(sources, dists, preds)
    return forest, metrics, D, R


# ---------------------------------------------------------------------------
# Relaxation construction (no precomputed distances)
# ---------------------------------------------------------------------------


class SpfBProgram(NodeProgram):
    """Message-driven nearest-terminal relaxation.

    The initiator wakes everyone; terminals burst one update to all nodes
    (self included, and counted); non-terminals relax (distance, source)
    lexicographically over incoming offers and rebroadcast on their basic
    edges only when they strictly improve.  Edges from which a terminal
    update was received are blocked and never used for sends again.
    """

    def __init__(self, node: int, n: int, is_terminal: bool, edge_weights: dict, initiator: int = 0):
        self.node = node
        self.n = n
        self.is_terminal = is_terminal
        self.edge_weights = edge_weights  # neighbor -> weight in the input graph
        self.initiator = initiator
        self.started = False
        self.woke = False
        self.blocked = set()
        self.ts = None
        self.td = INF
        self.tpi = None
        self.sent_rounds = []  # rounds in which this node sent update bursts
        self.td_history = []   # (round, td) at every improvement
        self.neighbor_latest = {}  # graph neighbor -> latest (source, distance)

    def step(self, round_no: int, inbox: list):
        outbox = []
        if not self.started:
            self.started = True
            if self.node == self.initiator:
                return broadcast_outbox(self.node, self.n, ("wakeup", ()), include_self=True)
            if not inbox:
                return []
        updates = []
        for env in inbox:
            tag, fields = env.payload
            if tag == "wakeup" and not self.woke:
                self.woke = True
                if self.is_terminal:
                    self.ts, self.td, self.tpi = self.node, 0, self.node
                    self.sent_rounds.append(round_no)
                    outbox = broadcast_outbox(
                        self.node,
                        self.n,
                        ("update", (self.node, self.node, 0, True)),
                        include_self=True,
                    )
            elif tag == "update":
                updates.append((env.src, fields))
        improved = False
        for src, (idn, tsn, tdn, tfn) in updates:
            if tfn:
                self.blocked.add(src)
            if src in self.edge_weights and tdn != INF:
                self.neighbor_latest[src] = (tsn, tdn)
            if self.is_terminal:
                continue
            w = self.edge_weights.get(src)
            if w is None or tdn == INF:
                continue
            cand = (tdn + w, tsn)
            if cand < (self.td, self.ts if self.ts is not None else self.n):
                self.td, self.ts, self.tpi = cand[0], cand[1], idn
                self.td_history.append((round_no, self.td))
                improved = True
        if improved:
            self.sent_rounds.append(round_no)
            body = ("update", (self.node, self.ts, self.td, False))
            outbox = [
                (dst, body)
                for dst in range(self.n)
                if dst != self.node and dst not in self.blocked
            ]
        return outbox


def spf_b_run(g: WeightedGraph, engine: Engine):
    """Run the relaxation protocol to quiescence; returns (forest, metrics).

    Settled (source, distance) values come straight from the relaxation; the
    recorded parent is then normalized to the canonical tight neighbor, which
    every node can do locally from the updates it already received.
    """
    terminals = set(g.terminals)
    programs = []
    for v in range(g.n):
        weights = {u: w for u, w in g.adj[v]}
        programs.append(SpfBProgram(v, g.n, v in terminals, weights))
    metrics = engine.run(programs, label="spf-b")
    sources = [0] * g.n
    dists = [0] * g.n
    preds = [0] * g.n
    for v in range(g.n):
        p = programs[v]
        if p.ts is None:
            raise ForestError(f"node {v} never reached by any terminal")
        sources[v], dists[v] = p.ts, p.td
        if v in terminals:
            preds[v] = v
        else:
            view = {
                u: (p.edge_weights[u], s_u, d_u)
                for u, (s_u, d_u) in p.neighbor_latest.items()
            }
            preds[v] = canonical_parent(v, p.ts, p.td, view)
    return ShortestPathForest(sources, dists, preds), metrics, programs


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_spf(f: ShortestPathForest, g: WeightedGraph) -> list:
    """Check every forest clause; violations come back as strings, not errors."""
    violations = []
    n = g.n
    terminals = set(g.terminals)
    if len(f.sources) != n or len(f.dists) != n or len(f.preds) != n:
        return [f"forest has wrong size for n={n}"]
    for z in g.terminals:
        if f.sources[z] != z:
            violations.append(f"terminal {z} has source {f.sources[z]}")
        if f.dists[z] != 0:
            violations.append(f"terminal {z} has nonzero distance {f.dists[z]}")
        if f.preds[z] != z:
            violations.append(f"terminal {z} has parent {f.preds[z]}")
    for v in range(n):
        if f.sources[v] not in terminals:
            violations.append(f"node {v} source {f.sources[v]} is not a terminal")
    for v in range(n):
        if v in terminals:
            continue
        p = f.preds[v]
        if p == v or not g.has_edge(v, p):
            violations.append(f"node {v} parent edge ({v},{p}) not in graph")
            continue
        if f.sources[v] != f.sources[p]:
            violations.append(f"node {v} and parent {p} have different sources")
        if f.dists[v] != f.dists[p] + g.weight(v, p):
            violations.append(f"node {v} distance is not parent distance plus edge weight")
    # parent chains must reach the source without cycles (disjoint tree cover)
    for v in range(n):
        cur, steps = v, 0
        while cur not in terminals and steps <= n:
            cur = f.preds[cur]
            steps += 1
        if steps > n:
            violations.append(f"node {v} parent chain does not terminate")
        elif cur != f.sources[v]:
            violations.append(f"node {v} parent chain reaches {cur}, source is {f.sources[v]}")
    # distances must be the true nearest-terminal distances
    true_dist, _ = multi_source_nearest(g)
    for v in range(n):
        if f.dists[v] != true_dist[v]:
            violations.append(
                f"node {v} distance {f.dists[v]} differs from true nearest-terminal distance {true_dist[v]}"
            )
    return violations


def multi_source_nearest(g: WeightedGraph):
    """Exact nearest-terminal (distance, smallest source) for every node."""
    import heapq

    best = [(INF, g.n)] * g.n
    heap = []
    for z in g.terminals:
        best[z] = (0, z)
        heapq.heappush(heap, (0, z, z))
    while heap:
        d, s, v = heapq.heappop(heap)
        if (d, s) > best[v]:
            continue
        for u, w in g.adj[v]:
            cand = (d + w, s)
            if cand < best[u]:
                best[u] = cand
                heapq.heappush(heap, (d + w, s, u))
    return [b[0] for b in best], [b[1] for b in best]
