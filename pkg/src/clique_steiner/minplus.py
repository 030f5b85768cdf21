"""All-pairs shortest paths by iterated min-plus squaring.

Two forms share identical arithmetic and tie-breaks: a pure local oracle
(`minplus_product` / `iterated_squaring`) and a simulated distributed form
(`distributed_apsp`) that partitions each squaring over the cube of
elementwise additions, one sub-cube per node, and routes sub-matrix entries
with the balanced router.  Witnesses always take the smallest minimizing
intermediate node, so routing tables from both forms agree entrywise.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .engine import Engine, NodeProgram, RoundMetrics, route_balanced
from .graph import INF, WeightedGraph


def weight_matrix(g: WeightedGraph, size: int | None = None) -> list:
    """Adjacency weight matrix padded to `size` rows; missing edges are INF."""
    n = size if size is not None else g.n
    mat = [[INF] * n for _ in range(n)]
    for u in range(n):
        mat[u][u] = 0
    for (u, v), w in g.edges.items():
        mat[u][v] = w
        mat[v][u] = w
    return mat


def minplus_product(A: list, B: list):
    """C[u][v] = min_w A[u][w] + B[w][v] with smallest-id witnesses."""
    n = len(A)
    C = [[INF] * n for _ in range(n)]
    Q = [[None] * n for _ in range(n)]
    for u in range(n):
        Au, Cu, Qu = A[u], C[u], Q[u]
        for w in range(n):
            a = Au[w]
            if a == INF:
                continue
            Bw = B[w]
            for v in range(n):
                b = Bw[v]
                if b == INF:
                    continue
                cand = a + b
                if cand < Cu[v]:
                    Cu[v] = cand
                    Qu[v] = w
    return C, Q


def squaring_iterations(n: int) -> int:
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


def initial_routing(W: list) -> list:
    """Base routing table: R[u][v] = v exactly on edges."""
    n = len(W)
    return [
        [v if u != v and W[u][v] != INF else None for v in range(n)]
        for u in range(n)
    ]


def iterated_squaring(W: list):
    """ceil(log2 n) squarings of W; returns exact distances and routing table.

    After each squaring, strictly improved entries re-point the routing table
    through the witness: R[u][v] <- R[u][Q[u][v]], against the pre-update row.
    """
    n = len(W)
    M = [row[:] for row in W]
    R = initial_routing(W)
    for _ in range(squaring_iterations(n)):
        C, Q = minplus_product(M, M)
        for u in range(n):
            Mu, Cu, Qu, Ru = M[u], C[u], Q[u], R[u]
            new_row = Ru[:]
            for v in range(n):
                if Cu[v] < Mu[v]:
                    new_row[v] = Ru[Qu[v]]
            R[u] = new_row
        M = C
    return M, R


def routing_walk(D: list, R: list, W: list, u: int, v: int) -> list:
    """Follow R from u to v; returns the node sequence (raises on a bad table)."""
    if u == v:
        return [u]
    path = [u]
    cur = u
    for _ in range(len(D)):
        nxt = R[cur][v]
        if nxt is None or W[cur][nxt] == INF:
            raise ValueError(f"routing table breaks at {cur}->{v}")
        path.append(nxt)
        cur = nxt
        if cur == v:
            return path
    raise ValueError(f"routing walk from {u} to {v} did not terminate")


# ---------------------------------------------------------------------------
# Distributed form: one sub-cube of the n x n x n addition cube per node
# ---------------------------------------------------------------------------

def next_cube(n: int) -> int:
    c = 1
    while c**3 < n:
        c += 1
    return c**3


@lru_cache(maxsize=None)
def _cube_patterns(c: int):
    """Distribution/redistribution payload patterns and route schedules.

    Node (i, j, kk) = i*c^2 + j*c + kk computes the sub-cube covering row
    block i, column block j, intermediate block kk: it needs sub-matrices
    (rows i x cols kk) and (rows kk x cols j), and ships its partial products
    back to the row owners.  Patterns depend only on c, so schedules are
    cached across runs.
    """
    B = c * c
    n = c**3
    dist_load = [[] for _ in range(n)]
    for u in range(n):
        bu = u // B
        seen = set()
        for kk in range(c):
            for j in range(c):
                dst = bu * B + j * c + kk
                for y in range(kk * B, (kk + 1) * B):
                    if (dst, y) not in seen:
                        seen.add((dst, y))
                        dist_load[u].append((dst, (u, y, dst)))
        for i in range(c):
            for j in range(c):
                dst = i * B + j * c + bu
                for y in range(j * B, (j + 1) * B):
                    if (dst, y) not in seen:
                        seen.add((dst, y))
                        dist_load[u].append((dst, (u, y, dst)))
    redist_load = [[] for _ in range(n)]
    for p in range(n):
        i, j = p // B, (p % B) // c
        for u in range(i * B, (i + 1) * B):
            for v in range(j * B, (j + 1) * B):
                redist_load[p].append((u, (p, u, v)))
    return route_balanced(n, dist_load), route_balanced(n, redist_load)


class _ApspProgram(NodeProgram):
    """Scripted per-node program for one full iterated-squaring run."""

    busy = True

    def __init__(self, node: int, n: int, c: int, row: list, dist_sched, redist_sched, iterations: int):
        self.node = node
        self.n = n
        self.c = c
        self.B = c * c
        self.row = row
        self.r_row = [
            v if v != node and row[v] != INF else None for v in range(n)
        ]
        self.dist_sched = dist_sched
        self.redist_sched = redist_sched
        self.iterations = iterations
        self.phase_len = dist_sched.rounds + redist_sched.rounds
        self.entries = {}
        self.relay_store = {}
        self.best = {}  # v -> (val, wit) candidate for own row
        if iterations == 0:
            self.halted = True

    def step(self, round_no: int, inbox: list):
        it, local = divmod(round_no - 1, self.phase_len)
        local += 1
        rd = self.dist_sched.rounds
        in_dist = local <= rd
        # classify arrivals: relay slots are recognized by (phase round, src)
        for env in inbox:
            prev_it, prev_local = divmod(env.round - 1, self.phase_len)
            prev_local += 1
            if prev_local <= rd:
                key = self.dist_sched.arrivals[self.node].get((prev_local + 1, env.src))
            else:
                key = self.redist_sched.arrivals[self.node].get(
                    (prev_local - rd + 1, env.src)
                )
            if key is not None:
                self.relay_store[key] = env.payload
                continue
            tag, fields = env.payload
            if tag == "aw":
                u, y, val = fields
                self.entries[(u, y)] = val
            else:  # "pp": partial product for my own row
                u, v, val, wit = fields
                cur = self.best.get(v)
                if cur is None or val < cur[0] or (val == cur[0] and wit < cur[1]):
                    self.best[v] = (val, wit)

        if local == 1 and it > 0:
            self._finalize_iteration()
        if it >= self.iterations:
            self.halted = True
            self.busy = False
            return []

        outbox = []
        if in_dist:
            for key, dst in self.dist_sched.origin_sends[self.node].get(local, ()):
                u, y, _ = key
                val = self.row[y]
                if val != INF:
                    outbox.append((dst, ("aw", (u, y, val))))
            for key, dst in self.dist_sched.forward_sends[self.node].get(local, ()):
                body = self.relay_store.pop(key, None)
                if body is not None:
                    outbox.append((dst, body))
        else:
            rl = local - rd
            if rl == 1:
                self._compute_partials()
            for key, dst in self.redist_sched.origin_sends[self.node].get(rl, ()):
                _, u, v = key
                got = self.partials.get((u, v))
                if got is not None:
                    outbox.append((dst, ("pp", (u, v, got[0], got[1]))))
            for key, dst in self.redist_sched.forward_sends[self.node].get(rl, ()):
                body = self.relay_store.pop(key, None)
                if body is not None:
                    outbox.append((dst, body))
        return outbox

    def _compute_partials(self):
        B, c = self.B, self.c
        p = self.node
        i, j, kk = p // B, (p % B) // c, p % c
        rows = range(i * B, (i + 1) * B)
        mids = range(kk * B, (kk + 1) * B)
        cols = range(j * B, (j + 1) * B)
        entries = self.entries
        partials = {}
        for u in rows:
            row_best = {}
            for w in mids:
                a = entries.get((u, w))
                if a is None:
                    continue
                for v in cols:
                    b = entries.get((w, v))
                    if b is None:
                        continue
                    cand = a + b
                    cur = row_best.get(v)
                    if cur is None or cand < cur[0]:
                        row_best[v] = (cand, w)
            for v, best in row_best.items():
                partials[(u, v)] = best
        self.partials = partials
        self.entries = {}

    def _finalize_iteration(self):
        row = self.row
        r_row = self.r_row
        new_r = r_row[:]
        for v, (val, wit) in self.best.items():
            if val < row[v]:
                row[v] = val
                new_r[v] = r_row[wit]
        self.r_row = new_r
        self.best = {}
        self.partials = {}


def distributed_apsp(g: WeightedGraph, engine: Engine):
    """Distributed iterated squaring over the padded clique.

    Pads n up to the next perfect cube with unreachable dummy rows, runs
    ceil(log2 n') squarings through the engine, and strips the padding.
    Returns (distance rows, routing rows, RoundMetrics) for the real nodes.
    """
    n = g.n
    if n == 1:
        return [[0]], [[None]], RoundMetrics(0, 0, [("apsp", 0, 0)])
    np_ = next_cube(n)
    c = 1
    while c**3 < np_:
        c += 1
    dist_sched, redist_sched = _cube_patterns(c)
    W = weight_matrix(g, np_)
    iterations = squaring_iterations(np_)
    programs = [
        _ApspProgram(u, np_, c, W[u][:], dist_sched, redist_sched, iterations)
        for u in range(np_)
    ]
    metrics = engine.run(programs, label="apsp")
    dist_rows = [programs[u].row[:n] for u in range(n)]
    routing_rows = [programs[u].r_row[:n] for u in range(n)]
    return dist_rows, routing_rows, metrics
