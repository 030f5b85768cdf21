"""Deterministic round-synchronous execution over a complete message network.

Every node program is a state machine stepped once per round.  Messages sent
in round r are delivered at the start of round r+1; at most one message per
ordered node pair per round, and a payload carries at most MAX_FIELDS scalar
slots (ids, weights, flags, distances).  Self-delivery is allowed and counted.

Round accounting: the first dispatch round is round 1, and ``rounds_elapsed``
is the index of the last round in which any message was sent (0 when nothing
was ever sent).  The engine observes quiescence globally: it stops after a
round with no pending deliveries and no new messages, or when every program
has halted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

MAX_FIELDS = 4


class EngineError(Exception):
    """Protocol violation or non-termination inside a simulated run."""


class BandwidthViolation(EngineError):
    pass


class LoadImbalanceError(EngineError):
    pass


def payload(tag: str, *fields):
    """One bounded message body: a tag plus at most MAX_FIELDS scalar slots."""
    if len(fields) > MAX_FIELDS:
        raise EngineError(f"payload {tag!r} carries {len(fields)} fields > {MAX_FIELDS}")
    return (tag, fields)


@dataclass(frozen=True)
class Envelope:
    src: int
    dst: int
    payload: tuple
    round: int

    @property
    def tag(self) -> str:
        return self.payload[0]


@dataclass
class RoundMetrics:
    """Exact round/message accounting; totals equal the breakdown sums."""

    rounds_elapsed: int = 0
    messages_sent: int = 0
    phases: list = field(default_factory=list)  # (label, rounds, messages)

    def add_phase(self, label: str, rounds: int, messages: int):
        self.phases.append((label, rounds, messages))
        self.rounds_elapsed += rounds
        self.messages_sent += messages

    def merge(self, other: "RoundMetrics"):
        for label, rounds, messages in other.phases:
            self.add_phase(label, rounds, messages)


class NodeProgram:
    """Per-node deterministic state machine.

    ``step(round_no, inbox)`` receives the envelopes delivered this round
    (sorted by sender) and returns the outbox as ``(dst, payload)`` pairs,
    at most one per destination.  Set ``self.halted`` to stop being stepped.
    A program following a fixed multi-round script may set ``busy`` so that a
    data-dependent silent round is not mistaken for global quiescence.
    """

    halted = False
    busy = False

    def step(self, round_no: int, inbox: list) -> list:
        raise NotImplementedError


class Engine:
    """Runs node programs in lock-step rounds with exact accounting."""

    def __init__(self, max_rounds: int = 10_000, trace: list | None = None):
        if max_rounds < 1:
            raise EngineError("max_rounds must be >= 1")
        self.max_rounds = max_rounds
        self.trace = trace

    def run(self, programs: list, label: str = "run") -> RoundMetrics:
        n = len(programs)
        if n < 1:
            raise EngineError("need at least one node")
        inboxes = [[] for _ in range(n)]
        pending = 0
        messages = 0
        last_send_round = 0
        round_no = 0
        trace = self.trace
        while True:
            round_no += 1
            if round_no > self.max_rounds:
                raise EngineError(
                    f"{label}: exceeded max_rounds={self.max_rounds} without terminating"
                )
            delivered = pending
            pending = 0
            next_inboxes = [[] for _ in range(n)]
            sent_this_round = 0
            for v in range(n):
                program = programs[v]
                inbox = inboxes[v]
                if program.halted:
                    continue
                if inbox:
                    inbox.sort(key=lambda env: env.src)
                outbox = program.step(round_no, inbox)
                if not outbox:
                    continue
                seen_dsts = set()
                for dst, body in outbox:
                    if not 0 <= dst < n:
                        raise EngineError(f"node {v} sent to invalid node {dst}")
                    if dst in seen_dsts:
                        raise BandwidthViolation(
                            f"node {v} sent two messages to {dst} in round {round_no}"
                        )
                    seen_dsts.add(dst)
                    if len(body[1]) > MAX_FIELDS:
                        raise EngineError(
                            f"node {v} payload {body[0]!r} exceeds {MAX_FIELDS} fields"
                        )
                    next_inboxes[dst].append(Envelope(v, dst, body, round_no))
                    sent_this_round += 1
                    if trace is not None:
                        trace.append((round_no, v, dst, body[0]))
            messages += sent_this_round
            if sent_this_round:
                last_send_round = round_no
            pending = sent_this_round
            inboxes = next_inboxes
            if pending == 0 and all(p.halted for p in programs):
                break
            if (
                delivered == 0
                and sent_this_round == 0
                and not any(p.busy and not p.halted for p in programs)
            ):
                break  # fully silent round with nothing in flight: quiescence
        return RoundMetrics(
            rounds_elapsed=last_send_round,
            messages_sent=messages,
            phases=[(label, last_send_round, messages)],
        )


def broadcast_outbox(node: int, n: int, body: tuple, include_self: bool = False) -> list:
    """Outbox addressing every node (optionally including the sender itself)."""
    return [(dst, body) for dst in range(n) if include_self or dst != node]


# ---------------------------------------------------------------------------
# Balanced routing (replacement for the cited deterministic routing scheme)
# ---------------------------------------------------------------------------


@dataclass
class RouteSchedule:
    """Precomputed deterministic delivery plan for a balanced payload load.

    ``origin_sends[v]``: round -> list of (key, dst) for payloads starting at
    v; ``forward_sends[v]``: round -> list of (key, dst) relayed onward by v;
    ``arrivals[v]``: (round, src) -> key, so a relay can recognize a payload
    from its deterministic slot without extra routing fields on the wire.
    """

    n: int
    rounds: int
    message_budget: int  # payload count plus one per relay hop
    origin_sends: list
    forward_sends: list
    arrivals: list
    relay_hops: int


def route_balanced(n: int, load: list, k: int | None = None) -> RouteSchedule:
    """Schedule (dst, key) payload lists so no link carries two messages in a
    round, finishing within ceil(k/(n-1)) + 2 rounds for balanced loads.

    Each payload is sent directly or through exactly one relay.  ``k`` may be
    given to enforce the balance precondition; it defaults to the observed
    maximum of per-node send and receive counts.
    """
    if len(load) != n:
        raise LoadImbalanceError(f"load has {len(load)} rows for n={n}")
    send_counts = [len(row) for row in load]
    recv_counts = [0] * n
    for row in load:
        for dst, _ in row:
            if not 0 <= dst < n:
                raise LoadImbalanceError(f"destination {dst} out of range")
            recv_counts[dst] += 1
    observed = max(send_counts + recv_counts) if any(send_counts) else 0
    if k is None:
        k = observed
    elif observed > k:
        raise LoadImbalanceError(f"load {observed} exceeds declared bound k={k}")
    origin_sends = [{} for _ in range(n)]
    forward_sends = [{} for _ in range(n)]
    arrivals = [{} for _ in range(n)]
    if observed == 0:
        return RouteSchedule(n, 0, 0, origin_sends, forward_sends, arrivals, 0)
    if n == 1:
        # self-delivery only: one message per round on the single self link
        rounds = 0
        for rounds, (dst, key) in enumerate(load[0], start=1):
            origin_sends[0].setdefault(rounds, []).append((key, dst))
        total = len(load[0])
        return RouteSchedule(n, rounds, total, origin_sends, forward_sends, arrivals, 0)

    pair_queues = {}
    for src in range(n):
        for dst, key in load[src]:
            pair_queues.setdefault((src, dst), []).append(key)
    deepest = max(len(q) for q in pair_queues.values())
    bound = -(-k // (n - 1)) + 2

    # plan: key -> (src, send_round, relay_or_None, forward_round_or_None, dst)
    if deepest <= bound or n == 2:
        plan = []
        for (src, dst), queue in sorted(pair_queues.items()):
            for slot, key in enumerate(queue, start=1):
                plan.append((key, src, slot, None, None, dst))
    else:
        # Two-phase relaying: the first `quota` payloads of each ordered pair
        # go direct in conflict-free slots, the excess is spread over relays
        # picked by a seeded round-robin cursor with a bounded greedy scan,
        # one extra hop each.  Several quota values are tried; the
        # fewest-rounds plan wins.
        best_plan = None
        base = -(-k // (n - 1))
        quotas = {max(1, base + d) for d in range(6)}
        quotas.add(max(1, min(deepest, base + 8)))
        for quota in sorted(quotas):
            candidate = _relay_plan(n, pair_queues, quota)
            if best_plan is None or candidate[1] < best_plan[1]:
                best_plan = candidate
        plan = best_plan[0]

    # Compact away globally empty rounds so a waiting engine never observes a
    # silent round mid-schedule; relabeling preserves per-link exclusivity.
    used = sorted({r for _, _, r, _, _, _ in plan} | {fr for _, _, _, _, fr, _ in plan if fr})
    renumber = {r: i + 1 for i, r in enumerate(used)}
    relay_hops = 0
    rounds = 0
    for key, src, r1, relay, r2, dst in plan:
        r1 = renumber[r1]
        if relay is None:
            origin_sends[src].setdefault(r1, []).append((key, dst))
        else:
            r2 = renumber[r2]
            origin_sends[src].setdefault(r1, []).append((key, relay))
            arrivals[relay][(r1 + 1, src)] = key
            forward_sends[relay].setdefault(r2, []).append((key, dst))
            relay_hops += 1
            rounds = max(rounds, r2)
        rounds = max(rounds, r1)
    total = sum(send_counts) + relay_hops
    return RouteSchedule(n, rounds, total, origin_sends, forward_sends, arrivals, relay_hops)


_RELAY_SCAN_LIMIT = 24


def _relay_plan(n: int, pair_queues: dict, quota: int):
    """Schedule with per-pair direct quota and greedily relayed excess."""
    plan = []
    busy = {}  # (src, dst) -> set of occupied rounds
    excess = []
    rounds_used = 0

    def first_free(earliest, a, b):
        taken = busy.get((a, b))
        if taken is None:
            return earliest
        r = earliest
        while r in taken:
            r += 1
        return r

    def claim(r, a, b):
        busy.setdefault((a, b), set()).add(r)

    for (src, dst), queue in sorted(pair_queues.items()):
        for slot, key in enumerate(queue):
            if slot < quota:
                claim(slot + 1, src, dst)
                plan.append((key, src, slot + 1, None, None, dst))
                rounds_used = max(rounds_used, slot + 1)
            else:
                excess.append((slot - quota, src, dst, key))
    excess.sort(key=lambda item: item[:3])

    relay_order = {}
    cursor = {}
    for _, src, dst, key in excess:
        order = relay_order.get(src)
        if order is None:
            order = [x for x in range(n) if x != src]
            random.Random((0xC11D << 8) ^ src).shuffle(order)
            relay_order[src] = order
            cursor[src] = 0
        start = cursor[src]
        cursor[src] = (start + 1) % len(order)
        best = None
        scanned = 0
        for offset in range(len(order)):
            relay = order[(start + offset) % len(order)]
            if relay == dst:
                continue
            r1 = first_free(1, src, relay)
            r2 = first_free(r1 + 1, relay, dst)
            if best is None or (r2, r1) < (best[2], best[1]):
                best = (relay, r1, r2)
            scanned += 1
            if best[2] == 2 or scanned >= _RELAY_SCAN_LIMIT:
                break
        relay, r1, r2 = best
        claim(r1, src, relay)
        claim(r2, relay, dst)
        plan.append((key, src, r1, relay, r2, dst))
        rounds_used = max(rounds_used, r2)
    return plan, rounds_used
