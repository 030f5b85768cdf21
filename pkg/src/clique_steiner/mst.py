"""Deterministic fragment-merging MST over the clique in O(log log n) phases.

Each phase takes four rounds: (1) every node tells every other node the
lightest edge it has into that node's fragment, (2) each fragment's members
ship their fragment's N lightest outgoing edges (N = minimum fragment size,
one edge per member) to the coordinator, (3) the coordinator merges locally
under the safety rule and hands each newly selected edge to a distinct
intermediate node, (4) intermediates broadcast.  Fragment growth is at least
quadratic per phase, and every node ends up knowing the full edge set.

Edges are ordered by (weight, smaller endpoint, larger endpoint) throughout,
which makes the tree unique and comparable with the sequential oracle.
Infinite-weight edges are never enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Engine, NodeProgram, broadcast_outbox
from .graph import INF, WeightedGraph


class MstError(Exception):
    pass


class DisconnectedGcError(MstError):
    """The finite-weight part of the graph does not connect all nodes."""


EDGE_ORDER = "weight, then smaller endpoint id, then larger endpoint id"


def edge_key(u: int, v: int, w):
    a, b = (u, v) if u < v else (v, u)
    return (w, a, b)


def collect_n_lightest(edges, comp, fragment, n_min):
    """The fragment's n_min lightest outgoing edges to distinct fragments.

    ``edges`` iterates finite (u, v, w); fewer edges come back when the
    fragment has fewer neighboring fragments.
    """
    best = {}
    for u, v, w in edges:
        cu, cv = comp[u], comp[v]
        if cu == cv:
            continue
        if cu == fragment:
            other = cv
        elif cv == fragment:
            other = cu
        else:
            continue
        key = edge_key(u, v, w)
        if other not in best or key < best[other]:
            best[other] = key
    return sorted(best.values())[:n_min]


def merge_with_safety_rule(cluster_edges: dict, n_min: int, comp: list):
    """Scan reported edges in order, merging while the certifying side is safe.

    ``cluster_edges`` maps each fragment id to its sorted reported edges
    (at most n_min, to distinct fragments); a fragment that reported fewer
    than n_min edges is known completely.  An edge is selected when it joins
    two different fragments and at least one of them still has an uninspected
    reported edge on every member (or complete knowledge), which certifies
    the edge as that fragment's minimum outgoing edge.  Returns the selected
    edges and the resulting fragment-id union map.
    """
    occurrences = {}
    for cid, edges in cluster_edges.items():
        for key in edges:
            occurrences.setdefault(key, []).append(cid)
    parent = {cid: cid for cid in cluster_edges}
    fragile = {cid: 0 for cid in cluster_edges}
    uninspected = {cid: len(edges) for cid, edges in cluster_edges.items()}
    complete = {cid: len(edges) < n_min for cid, edges in cluster_edges.items()}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    selected = []
    for key in sorted(occurrences):
        w, a, b = key
        ca, cb = find(comp[a]), find(comp[b])
        if ca != cb and (fragile[ca] == 0 or fragile[cb] == 0):
            selected.append(key)
            root, child = (ca, cb) if ca < cb else (cb, ca)
            parent[child] = root
            fragile[root] += fragile[child]
        for cid in occurrences[key]:
            uninspected[cid] -= 1
            if uninspected[cid] == 0 and not complete[cid]:
                fragile[find(cid)] += 1
    union_map = {cid: find(cid) for cid in cluster_edges}
    return selected, union_map


@dataclass
class PhaseRecord:
    """Per-phase trace for the growth and phase-count checks."""

    phase: int
    n_min: int
    fragments_before: int
    selected: list


class _MstProgram(NodeProgram):
    """One clique node running the four-round phase protocol."""

    busy = True
    coordinator = 0

    def __init__(self, node: int, n: int, incident: list):
        self.node = node
        self.n = n
        self.incident = incident  # list of (neighbor, finite weight)
        self.comp = list(range(n))
        self.mst_edges = []
        self.pending = []
        self.cluster_candidates = {}
        self.phase_records = []  # kept at the coordinator
        self.phase = 0

    def _find(self, x):
        comp = self.comp
        root = x
        while comp[root] != root:
            root = comp[root]
        while comp[x] != root:
            comp[x], x = root, comp[x]
        return root

    def _apply_pending(self):
        for w, a, b in sorted(self.pending):
            ra, rb = self._find(a), self._find(b)
            if ra != rb:
                root, child = (ra, rb) if ra < rb else (rb, ra)
                self.comp[child] = root
            self.mst_edges.append((w, a, b))
        self.pending = []

    def _fragments(self):
        sizes = {}
        for v in range(self.n):
            sizes[self._find(v)] = sizes.get(self._find(v), 0) + 1
        return sizes

    def step(self, round_no: int, inbox: list):
        local = (round_no - 1) % 4 + 1
        if local == 1:
            for env in inbox:
                a, b, w = env.payload[1]
                self.pending.append((w, a, b))
            self._apply_pending()
            sizes = self._fragments()
            if len(sizes) <= 1:
                self.halted = True
                self.busy = False
                return []
            self.phase += 1
            self.cluster_candidates = {}
            my_root = self._find(self.node)
            best = {}
            for nbr, w in self.incident:
                other = self._find(nbr)
                if other == my_root:
                    continue
                key = edge_key(self.node, nbr, w)
                if other not in best or key < best[other]:
                    best[other] = key
            outbox = []
            for dst in range(self.n):
                if dst == self.node:
                    continue
                target = self._find(dst)
                if target == my_root:
                    continue
                key = best.get(target)
                if key is not None:
                    w, a, b = key
                    outbox.append((dst, ("mst-cand", (a, b, w))))
            return outbox
        if local == 2:
            my_root = self._find(self.node)
            per_cluster = {}
            for env in inbox:
                a, b, w = env.payload[1]
                sender_cluster = self._find(env.src)
                key = (w, a, b) if a < b else (w, b, a)
                cur = per_cluster.get(sender_cluster)
                if cur is None or key < cur:
                    per_cluster[sender_cluster] = key
            sizes = self._fragments()
            n_min = min(sizes.values())
            chosen = sorted(per_cluster.values())[:n_min]
            members = sorted(v for v in range(self.n) if self._find(v) == my_root)
            rank = members.index(self.node)
            if rank < len(chosen):
                w, a, b = chosen[rank]
                return [(self.coordinator, ("mst-ship", (a, b, w)))]
            return []
        if local == 3:
            if self.node != self.coordinator:
                return []
            sizes = self._fragments()
            n_min = min(sizes.values())
            cluster_edges = {root: [] for root in sizes}
            for env in inbox:
                a, b, w = env.payload[1]
                cluster_edges[self._find(env.src)].append((w, a, b))
            for edges in cluster_edges.values():
                edges.sort()
            selected, _ = merge_with_safety_rule(cluster_edges, n_min, [self._find(v) for v in range(self.n)])
            if not selected:
                raise DisconnectedGcError(
                    f"{len(sizes)} fragments have no finite connecting edge"
                )
            self.phase_records.append(
                PhaseRecord(self.phase, n_min, len(sizes), list(selected))
            )
            outbox = []
            for idx, (w, a, b) in enumerate(selected):
                outbox.append((idx, ("mst-edge", (a, b, w))))
            return outbox
        # local == 4: intermediates broadcast the edge they were handed
        outbox = []
        for env in inbox:
            a, b, w = env.payload[1]
            self.pending.append((w, a, b))
            outbox.extend(broadcast_outbox(self.node, self.n, ("mst-edge", (a, b, w))))
        return outbox


def _incident_finite(gc, v: int):
    if hasattr(gc, "finite_incident"):
        return gc.finite_incident(v)
    return [(u, w) for u, w in gc.adj[v] if w != INF]


def lotker_mst(gc, engine: Engine):
    """Distributed MST of the finite part of ``gc`` under the shared order.

    Returns (edge list as (u, v, w) with u < v, RoundMetrics, phase records).
    Raises DisconnectedGcError when the finite-weight subgraph cannot span.
    """
    n = gc.n
    programs = [_MstProgram(v, n, sorted(_incident_finite(gc, v))) for v in range(n)]
    metrics = engine.run(programs, label="mst")
    edges = sorted({(a, b, w) for w, a, b in programs[0].mst_edges})
    for p in programs[1:]:
        if sorted({(a, b, w) for w, a, b in p.mst_edges}) != edges:
            raise MstError("nodes disagree on the final edge set")
    records = programs[0].phase_records
    return edges, metrics, records
