"""Weighted graph container, STP file I/O, generators, and distance metrics.

Weights are exact: plain ``int`` where possible, ``fractions.Fraction``
otherwise.  ``math.inf`` is the absorbing "no edge / unreachable" sentinel and
never appears as an edge weight.  Graphs are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

INF = math.inf

Weight = "int | Fraction"  # informal alias; finite, > 0 for edge weights


class GraphError(Exception):
    """Invalid graph input (parse error, invariant violation, bad parameters)."""


def as_weight(value):
    """Normalize a rational to int when integral, Fraction otherwise."""
    if isinstance(value, int):
        return value
    f = Fraction(value)
    return int(f) if f.denominator == 1 else f


def format_weight(w) -> str:
    """Render a weight exactly: integer, terminating decimal, or ``p/q``."""
    w = as_weight(w)
    if isinstance(w, int):
        return str(w)
    den = w.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{w.numerator}/{w.denominator}"
    digits = max(twos, fives)
    scaled = w.numerator * 10**digits // den
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}" if digits else f"{sign}{text}"


def parse_weight(text: str):
    try:
        return as_weight(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise GraphError(f"bad weight {text!r}") from exc


class WeightedGraph:
    """Simple connected undirected graph with positive weights and terminals.

    Node ids are dense integers ``0..n-1``; edges are keyed ``(u, v)`` with
    ``u < v``. ``terminals`` is a sorted tuple, never empty.
    """

    def __init__(self, node_count: int, edges: dict, terminals: Iterable[int]):
        self.n = node_count
        self.edges = dict(edges)
        self.terminals = tuple(sorted(set(terminals)))
        self._validate()
        adj = [[] for _ in range(self.n)]
        for (u, v), w in sorted(self.edges.items()):
            adj[u].append((v, w))
            adj[v].append((u, w))
        self.adj = adj

    def _validate(self):
        if self.n < 1:
            raise GraphError("graph needs at least one node")
        if not self.terminals:
            raise GraphError("terminal set is empty")
        for z in self.terminals:
            if not 0 <= z < self.n:
                raise GraphError(f"terminal {z} out of range")
        normalized = {}
        for (u, v), w in self.edges.items():
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u},{v}) out of range")
            key = (u, v) if u < v else (v, u)
            if key in normalized:
                raise GraphError(f"parallel edge {key}")
            w = as_weight(w)
            if not w > 0:
                raise GraphError(f"non-positive weight on edge {key}")
            normalized[key] = w
        self.edges = normalized
        if not self.is_connected():
            raise GraphError("graph is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def t(self) -> int:
        return len(self.terminals)

    def weight(self, u: int, v: int):
        return self.edges[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        seen = {0}
        stack = [0]
        nbrs = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def structurally_equal(self, other: "WeightedGraph") -> bool:
        return (
            self.n == other.n
            and self.edges == other.edges
            and self.terminals == other.terminals
        )

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m}, t={self.t})"


@dataclass(frozen=True)
class GraphMetrics:
    """Distance metrics of an instance: D <= S <= n-1 on connected graphs."""

    shortest_path_diameter: int
    unweighted_diameter: int
    edge_count: int
    terminal_count: int


# ---------------------------------------------------------------------------
# STP file subset (SteinLib style)
# ---------------------------------------------------------------------------

def parse_stp(text: str) -> WeightedGraph:
    """Parse the STP subset: a Graph section with E lines, a Terminals section.

    Raises GraphError with a line number on malformed input; ids in the file
    are arbitrary positive integers and are remapped to 0..n-1 in increasing
    numeric order.
    """
    declared_nodes = declared_edges = declared_terminals = None
    raw_edges = []
    raw_terminals = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("33"):
            continue
        parts = line.split()
        head = parts[0].upper()
        if head == "SECTION":
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: malformed SECTION")
            section = parts[1].lower()
        elif head == "END":
            section = None
        elif head == "EOF":
            break
        elif section == "graph":
            if head == "NODES" and len(parts) == 2:
                declared_nodes = _parse_count(parts[1], lineno)
            elif head == "EDGES" and len(parts) == 2:
                declared_edges = _parse_count(parts[1], lineno)
            elif head == "E" and len(parts) == 4:
                u, v = _parse_id(parts[1], lineno), _parse_id(parts[2], lineno)
                if u == v:
                    raise GraphError(f"line {lineno}: self-loop on node {u}")
                w = parse_weight(parts[3])
                if not w > 0:
                    raise GraphError(f"line {lineno}: non-positive weight")
                raw_edges.append((u, v, w))
            else:
                raise GraphError(f"line {lineno}: unrecognized graph line {line!r}")
        elif section == "terminals":
            if head == "TERMINALS" and len(parts) == 2:
                declared_terminals = _parse_count(parts[1], lineno)
            elif head == "T" and len(parts) == 2:
                raw_terminals.append(_parse_id(parts[1], lineno))
            else:
                raise GraphError(f"line {lineno}: unrecognized terminal line {line!r}")
        else:
            raise GraphError(f"line {lineno}: directive outside a known section")

    ids = sorted({u for u, _, _ in raw_edges} | {v for _, v, _ in raw_edges} | set(raw_terminals))
    if declared_nodes is not None and declared_nodes >= len(ids):
        # trust the declared count so isolated... single-node instances work
        if ids and (min(ids) < 1 or max(ids) > declared_nodes):
            raise GraphError("node id outside declared Nodes range")
        remap = {i: i - 1 for i in range(1, declared_nodes + 1)}
        n = declared_nodes
    else:
        remap = {node_id: idx for idx, node_id in enumerate(ids)}
        n = len(ids)
    if n == 0:
        raise GraphError("no nodes in input")
    if declared_edges is not None and declared_edges != len(raw_edges):
        raise GraphError(f"declared Edges {declared_edges} != {len(raw_edges)} E lines")
    if declared_terminals is not None and declared_terminals != len(raw_terminals):
        raise GraphError("declared Terminals count mismatch")
    if not raw_terminals:
        raise GraphError("no terminals in input")
    edges = {}
    for u, v, w in raw_edges:
        a, b = remap[u], remap[v]
        key = (a, b) if a < b else (b, a)
        if key in edges:
            raise GraphError(f"duplicate edge between {u} and {v}")
        edges[key] = w
    return WeightedGraph(n, edges, [remap[z] for z in raw_terminals])


def _parse_count(text: str, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise GraphError(f"line {lineno}: expected an integer count") from None
    if value < 0:
        raise GraphError(f"line {lineno}: negative count")
    return value


def _parse_id(text: str, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise GraphError(f"line {lineno}: expected a node id") from None
    if value < 1:
        raise GraphError(f"line {lineno}: node ids must be >= 1")
    return value


def serialize_stp(g: WeightedGraph) -> str:
    """Canonical STP text: 1-based ids, edges sorted by (min, max)."""
    lines = ["SECTION Graph", f"Nodes {g.n}", f"Edges {g.m}"]
    for (u, v), w in sorted(g.edges.items()):
        lines.append(f"E {u + 1} {v + 1} {format_weight(w)}")
    lines.append("END")
    lines.append("")
    lines.append("SECTION Terminals")
    lines.append(f"Terminals {g.t}")
    for z in g.terminals:
        lines.append(f"T {z + 1}")
    lines.append("END")
    lines.append("")
    lines.append("EOF")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

GENERATOR_KINDS = ("random-connected", "grid", "path", "cycle", "complete")


def generate_graph(
    kind: str,
    n: int,
    seed: int,
    terminal_count: int | None = None,
    density: float = 0.35,
    weight_range: tuple[int, int] = (1, 20),
) -> WeightedGraph:
    """Deterministic instance generator; identical seed means identical graph."""
    if kind not in GENERATOR_KINDS:
        raise GraphError(f"unknown generator kind {kind!r}")
    if n < 1:
        raise GraphError("n must be >= 1")
    t = terminal_count if terminal_count is not None else max(1, n // 3)
    if not 1 <= t <= n:
        raise GraphError(f"terminal count {t} infeasible for n={n}")
    lo, hi = weight_range
    if lo < 1 or hi < lo:
        raise GraphError(f"bad weight range {weight_range}")
    rng = random.Random(seed)

    def w():
        return rng.randint(lo, hi)

    edges = {}
    if kind == "path":
        for i in range(n - 1):
            edges[(i, i + 1)] = w()
    elif kind == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        for i in range(n - 1):
            edges[(i, i + 1)] = w()
        edges[(0, n - 1)] = w()
    elif kind == "complete":
        for u in range(n):
            for v in range(u + 1, n):
                edges[(u, v)] = w()
    elif kind == "grid":
        rows = max(1, int(math.isqrt(n)))
        cols = (n + rows - 1) // rows
        for node in range(n):
            r, c = divmod(node, cols)
            if c + 1 < cols and node + 1 < n:
                edges[(node, node + 1)] = w()
            if (r + 1) * cols + c < n:
                edges[(node, (r + 1) * cols + c)] = w()
    else:  # random-connected
        if not 0.0 <= density <= 1.0:
            raise GraphError(f"density {density} outside [0, 1]")
        # random spanning tree first, then extra edges by density
        order = list(range(n))
        rng.shuffle(order)
        for idx in range(1, n):
            u = order[idx]
            v = order[rng.randrange(idx)]
            key = (u, v) if u < v else (v, u)
            edges[key] = w()
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) not in edges and rng.random() < density:
                    edges[(u, v)] = w()
    terminals = sorted(rng.sample(range(n), t))
    return WeightedGraph(n, edges, terminals)


# ---------------------------------------------------------------------------
# Distance metrics
# ---------------------------------------------------------------------------

def shortest_path_diameter(g: WeightedGraph) -> int:
    """Max over ordered pairs of the minimum hop count among min-weight paths.

    Computed by Bellman-Ford style iteration over (weight, hops) pairs; the
    independent test oracle uses a lexicographic Dijkstra instead.
    """
    best = 0
    for src in range(g.n):
        dist = [INF] * g.n
        hops = [0] * g.n
        dist[src] = 0
        changed = True
        while changed:
            changed = False
            for (u, v), w in g.edges.items():
                for a, b in ((u, v), (v, u)):
                    if dist[a] == INF:
                        continue
                    nd, nh = dist[a] + w, hops[a] + 1
                    if nd < dist[b] or (nd == dist[b] and nh < hops[b]):
                        dist[b] = nd
                        hops[b] = nh
                        changed = True
        for v in range(g.n):
            if dist[v] == INF:
                raise GraphError("disconnected graph has no shortest path diameter")
            if hops[v] > best:
                best = hops[v]
    return best


def unweighted_diameter(g: WeightedGraph) -> int:
    from collections import deque

    nbrs = [[] for _ in range(g.n)]
    for u, v in g.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    best = 0
    for src in range(g.n):
        depth = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    queue.append(v)
        if len(depth) != g.n:
            raise GraphError("disconnected graph has no diameter")
        best = max(best, max(depth.values()))
    return best


def graph_metrics(g: WeightedGraph) -> GraphMetrics:
    return GraphMetrics(
        shortest_path_diameter=shortest_path_diameter(g),
        unweighted_diameter=unweighted_diameter(g),
        edge_count=g.m,
        terminal_count=g.t,
    )
