"""Exact sequential reference implementations used only for verification.

Everything here is pure, deterministic, exact-arithmetic, and written to be
obviously correct rather than fast.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from .graph import INF, WeightedGraph
from .spf import ShortestPathForest, multi_source_nearest


class OracleError(Exception):
    pass


def floyd_warshall(g: WeightedGraph) -> list:
    n = g.n
    dist = [[INF] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0
    for (u, v), w in g.edges.items():
        dist[u][v] = w
        dist[v][u] = w
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            di = dist[i]
            for j in range(n):
                cand = dik + dk[j]
                if cand < di[j]:
                    di[j] = cand
    return dist


def dijkstra(g: WeightedGraph, source: int):
    """Exact single-source distances with smallest-predecessor tie-breaks."""
    dist = [INF] * g.n
    pred = [None] * g.n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for u, w in g.adj[v]:
            nd = d + w
            if nd < dist[u] or (nd == dist[u] and pred[u] is not None and v < pred[u]):
                dist[u] = nd
                pred[u] = v
                heapq.heappush(heap, (nd, u))
    return dist, pred


def shortest_path(g: WeightedGraph, u: int, v: int) -> list:
    dist, pred = dijkstra(g, u)
    if dist[v] == INF:
        raise OracleError(f"{v} unreachable from {u}")
    path = [v]
    while path[-1] != u:
        path.append(pred[path[-1]])
    return list(reversed(path))


def lexicographic_spd(g: WeightedGraph) -> int:
    """Shortest path diameter via Dijkstra on (weight, hops) pairs."""
    worst = 0
    for src in range(g.n):
        best = [(INF, INF)] * g.n
        best[src] = (0, 0)
        heap = [(0, 0, src)]
        while heap:
            d, h, v = heapq.heappop(heap)
            if (d, h) > best[v]:
                continue
            for u, w in g.adj[v]:
                cand = (d + w, h + 1)
                if cand < best[u]:
                    best[u] = cand
                    heapq.heappush(heap, (d + w, h + 1, u))
        for d, h in best:
            if d == INF:
                raise OracleError("graph is disconnected")
            worst = max(worst, h)
    return worst


def kruskal(n: int, weighted_edges, require_spanning: bool = True) -> list:
    """Unique MST under the (weight, min id, max id) total order."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for w, a, b in sorted((w, *((u, v) if u < v else (v, u))) for u, v, w in weighted_edges):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
            chosen.append((a, b, w))
    if require_spanning and len(chosen) != n - 1:
        raise OracleError("graph is disconnected; no spanning tree")
    return chosen


def graph_edges(g: WeightedGraph):
    return [(u, v, w) for (u, v), w in g.edges.items()]


def complete_distance_graph(g: WeightedGraph):
    """K_Z: terminal pairs weighted by exact shortest distances in g."""
    dist = floyd_warshall(g)
    edges = []
    for i, u in enumerate(g.terminals):
        for v in g.terminals[i + 1:]:
            edges.append((u, v, dist[u][v]))
    return edges


def kz_mst_cost(g: WeightedGraph):
    """Cost of the minimum spanning tree of K_Z (0 for a single terminal)."""
    if g.t == 1:
        return 0
    index = {z: i for i, z in enumerate(g.terminals)}
    relabeled = [(index[u], index[v], w) for u, v, w in complete_distance_graph(g)]
    return sum(w for _, _, w in kruskal(g.t, relabeled))


def brute_force_spf(g: WeightedGraph) -> ShortestPathForest:
    """Nearest terminal per node by terminal-source Dijkstra, smallest-id ties."""
    dists, sources = multi_source_nearest(g)
    terminals = set(g.terminals)
    preds = [0] * g.n
    for v in range(g.n):
        if v in terminals:
            preds[v] = v
            continue
        best = None
        for u, w in g.adj[v]:
            if sources[u] == sources[v] and dists[u] + w == dists[v]:
                if best is None or u < best:
                    best = u
        if best is None:
            raise OracleError(f"no tight parent edge at node {v}")
        preds[v] = best
    return ShortestPathForest(sources, dists, preds)


# ---------------------------------------------------------------------------
# Exact terminal-spanning optimum
# ---------------------------------------------------------------------------

MAX_EXACT_TERMINALS = 12


@dataclass
class ExactSteinerResult:
    edges: list
    cost: object
    terminal_leaf_count: int


def dreyfus_wagner(g: WeightedGraph) -> ExactSteinerResult:
    """Exact optimum by dynamic programming over terminal subsets (t <= 12)."""
    terminals = list(g.terminals)
    t = len(terminals)
    if t > MAX_EXACT_TERMINALS:
        raise OracleError(f"exact solver limited to {MAX_EXACT_TERMINALS} terminals, got {t}")
    if t == 1:
        return ExactSteinerResult([], 0, 1)
    dist = floyd_warshall(g)
    n = g.n
    base = terminals[:-1]
    full = (1 << len(base)) - 1
    # dp[mask][v]: cheapest tree spanning the mask terminals plus v
    dp = [[INF] * n for _ in range(full + 1)]
    choice = [[None] * n for _ in range(full + 1)]
    for i, z in enumerate(base):
        for v in range(n):
            dp[1 << i][v] = dist[z][v]
            choice[1 << i][v] = ("path", z)
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        row = dp[mask]
        # merge two sub-trees at v
        sub = (mask - 1) & mask
        while sub:
            other = mask ^ sub
            if sub < other:
                a, b = dp[sub], dp[other]
                for v in range(n):
                    cand = a[v] + b[v]
                    if cand < row[v]:
                        row[v] = cand
                        choice[mask][v] = ("split", sub)
            sub = (sub - 1) & mask
        # then relax over shortest paths
        order = sorted(range(n), key=lambda v: (row[v] if row[v] != INF else INF, v))
        for u in order:
            du = row[u]
            if du == INF:
                continue
            for v in range(n):
                cand = du + dist[u][v]
                if cand < row[v]:
                    row[v] = cand
                    choice[mask][v] = ("path", u)
    root = terminals[-1]
    best_cost = dp[full][root]
    if best_cost == INF:
        raise OracleError("terminals are not connected")
    # realize the optimum as an edge set, then rebuild a clean tree from it
    subgraph_edges = set()

    def add_path(a, b):
        path = shortest_path(g, a, b)
        for x, y in zip(path, path[1:]):
            subgraph_edges.add((min(x, y), max(x, y)))

    def expand(mask, v):
        kind, arg = choice[mask][v]
        if mask & (mask - 1) == 0:
            add_path(arg, v)
            return
        if kind == "split":
            expand(arg, v)
            expand(mask ^ arg, v)
            return
        add_path(arg, v)
        expand(mask, arg)

    expand(full, root)
    nodes = {root} | set(terminals)
    for a, b in subgraph_edges:
        nodes.add(a)
        nodes.add(b)
    weighted = [(a, b, g.weight(a, b)) for a, b in subgraph_edges]
    tree = _spanning_tree_of(nodes, weighted)
    tree = prune_non_terminal_leaves(tree, set(terminals))
    cost = sum(w for _, _, w in tree)
    if cost != best_cost:
        raise OracleError("tree realization does not match optimal value")
    leaves = _leaf_count(tree) if tree else 1
    return ExactSteinerResult(sorted(tree), cost, leaves)


def _spanning_tree_of(nodes, weighted_edges):
    index = {v: i for i, v in enumerate(sorted(nodes))}
    relabeled = [(index[a], index[b], w) for a, b, w in weighted_edges]
    chosen = kruskal(len(index), relabeled)
    back = {i: v for v, i in index.items()}
    return [(min(back[a], back[b]), max(back[a], back[b]), w) for a, b, w in chosen]


def prune_non_terminal_leaves(edges: list, terminals: set) -> list:
    edges = list(edges)
    while True:
        degree = {}
        for a, b, _ in edges:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        removable = {
            v for v, d in degree.items() if d == 1 and v not in terminals
        }
        if not removable:
            return edges
        edges = [e for e in edges if e[0] not in removable and e[1] not in removable]


def _leaf_count(edges: list) -> int:
    degree = {}
    for a, b, _ in edges:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    return sum(1 for d in degree.values() if d == 1)


def steiner_brute_force(g: WeightedGraph):
    """Minimum over all vertex supersets of Z of the induced MST cost (n <= 8)."""
    if g.n > 8:
        raise OracleError("enumeration oracle limited to n <= 8")
    terminals = set(g.terminals)
    others = [v for v in range(g.n) if v not in terminals]
    best = None
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            nodes = terminals | set(extra)
            induced = [
                (u, v, w) for (u, v), w in g.edges.items() if u in nodes and v in nodes
            ]
            try:
                tree = _spanning_tree_of(nodes, induced)
            except OracleError:
                continue
            cost = sum(w for _, _, w in tree)
            if best is None or cost < best:
                best = cost
    if best is None:
        raise OracleError("terminals cannot be connected")
    return best


def kmb_sequential(g: WeightedGraph) -> list:
    """Metric-closure 2(1-1/l) approximation, steps 1-5, deterministic ties."""
    if g.t == 1:
        return []
    kz = complete_distance_graph(g)
    index = {z: i for i, z in enumerate(g.terminals)}
    closure_mst = kruskal(g.t, [(index[u], index[v], w) for u, v, w in kz])
    back = {i: z for z, i in index.items()}
    subgraph = set()
    for a, b, _ in closure_mst:
        path = shortest_path(g, back[a], back[b])
        for x, y in zip(path, path[1:]):
            subgraph.add((min(x, y), max(x, y)))
    nodes = set()
    for a, b in subgraph:
        nodes.add(a)
        nodes.add(b)
    nodes |= set(g.terminals)
    tree = _spanning_tree_of(nodes, [(a, b, g.weight(a, b)) for a, b in subgraph])
    return sorted(prune_non_terminal_leaves(tree, set(g.terminals)))


def shortest_straight_path(g: WeightedGraph, u: int, v: int):
    """Cheapest u-v path whose interior avoids every other terminal, or INF."""
    forbidden = set(g.terminals) - {u, v}
    dist = {u: 0}
    heap = [(0, u)]
    while heap:
        d, x = heapq.heappop(heap)
        if x == v:
            return d
        if d > dist.get(x, INF):
            continue
        for y, w in g.adj[x]:
            if y in forbidden:
                continue
            nd = d + w
            if nd < dist.get(y, INF):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return INF
