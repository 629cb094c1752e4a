"""Synchronous lockstep round engine.

A message sent in round ``r`` is delivered, and recorded in the trace, in
round ``r + 1``. Within a round every vertex first receives its inbox and
then takes at most one protocol step; vertices are visited in index order
so a run is a deterministic function of its inputs.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ._rational import Q, fmt
from .graph import WeightedGraph
from .messages import Message, payload_bits
from .protocol import IterationRecord, Phase, ProtocolParams, Status, Variant, VertexProcess


class RoundCapExceeded(RuntimeError):
    """The run did not finish within the round cap. Termination is proven, so this is a bug."""


class SimulationFinished(RuntimeError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Configured start round per vertex; vertices not listed start at round 0.

    A vertex starts no later than the first round a message reaches it,
    whatever is configured here.
    """

    activation: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for v, r in self.activation.items():
            if r < 0:
                raise ValueError(f"vertex {v}: activation round {r} is negative")

    def start(self, v: int) -> int:
        return self.activation.get(v, 0)

    @property
    def simultaneous(self) -> bool:
        return all(r == 0 for r in self.activation.values())


@dataclass(frozen=True)
class Lifecycle:
    vertex: int
    activated: int
    returned: int
    status: Status
    iterations: int


@dataclass
class Trace:
    params: ProtocolParams
    messages: list[Message] = field(default_factory=list)
    lifecycle: dict[int, Lifecycle] = field(default_factory=dict)
    history: dict[int, list[IterationRecord]] = field(default_factory=dict)

    def to_jsonl(self) -> str:
        return "".join(m.to_json() + "\n" for m in self.messages)

    def status(self, v: int) -> Status:
        return self.lifecycle[v].status

    @property
    def in_cover(self) -> frozenset[int]:
        return frozenset(v for v, lc in self.lifecycle.items() if lc.status is Status.IN_COVER)


@dataclass
class RunReport:
    cover: frozenset[int]
    cover_weight: Q
    iterations: list[int]
    rounds: list[int]
    max_message_bits: int
    total_messages: int
    messages_per_round: list[int]
    total_rounds: int

    def to_dict(self) -> dict:
        return {
            "cover": sorted(self.cover),
            "cover_weight": fmt(self.cover_weight),
            "cover_weight_float": float(self.cover_weight),
            "iterations": self.iterations,
            "rounds": self.rounds,
            "max_iterations": max(self.iterations, default=0),
            "max_message_bits": self.max_message_bits,
            "total_messages": self.total_messages,
            "messages_per_round": self.messages_per_round,
            "total_rounds": self.total_rounds,
        }


@dataclass(frozen=True)
class RoundEvents:
    round: int
    delivered: tuple[Message, ...]
    sent: tuple[Message, ...]
    activated: tuple[int, ...]
    returned: tuple[int, ...]


def default_round_cap(g: WeightedGraph, params: ProtocolParams, schedule: Schedule | None = None) -> int:
    """Ten times the proven per-vertex round bound, plus the latest configured start."""
    from .bounds import round_bound

    degrees = {g.degree(v) for v in range(g.n)} - {0}
    iters = max((int(math.ceil(round_bound(d, params.epsilon))) + 1 for d in degrees), default=0)
    per_run = 3 * iters + (1 if params.variant is Variant.CONGEST else 0) + 1
    latest = max(schedule.activation.values(), default=0) if schedule else 0
    return 10 * per_run + latest


class Engine:
    """Stepwise driver; :func:`run_simulation` is the batch entry point."""

    def __init__(
        self,
        g: WeightedGraph,
        params: ProtocolParams,
        schedule: Schedule | None = None,
        round_cap: int | None = None,
        order_seed: int | None = None,
    ):
        self.g = g
        self.params = params
        self.schedule = schedule or Schedule()
        self.round_cap = default_round_cap(g, params, self.schedule) if round_cap is None else round_cap
        if self.round_cap < 1:
            raise ValueError("round_cap must be positive")
        self.procs = [
            VertexProcess(v, g.weights[v], g.adjacency[v], params, order_seed) for v in range(g.n)
        ]
        self.trace = Trace(params)
        self.round = 0
        self._in_flight: list[Message] = []
        self._finished = False

    @property
    def finished(self) -> bool:
        return self._finished

    def step(self) -> RoundEvents:
        if self._finished:
            raise SimulationFinished("stepping a finished simulation")
        if self.round > self.round_cap:
            raise RoundCapExceeded(f"no termination within {self.round_cap} rounds")
        r = self.round
        inbox: dict[int, list[Message]] = {}
        for m in self._in_flight:
            if m.round != r:
                raise AssertionError(f"message {m.to_record()} delivered in round {r}")
            if not self.g.has_edge(m.src, m.dst):
                raise AssertionError(f"message over non-edge {m.src}-{m.dst}")
            inbox.setdefault(m.dst, []).append(m)
        delivered = tuple(self._in_flight)
        self.trace.messages.extend(delivered)

        activated, returned, sent = [], [], []
        for p in self.procs:
            if p.phase is Phase.IDLE and (self.schedule.start(p.vid) <= r or p.vid in inbox):
                p.activate(r)
                activated.append(p.vid)
                if p.done:
                    returned.append(p.vid)
                    self._record_return(p)
                    continue
            if p.activated_round is None or p.done:
                for m in inbox.get(p.vid, ()):
                    p._receive(m)
                continue
            out = p.on_round(r, inbox.get(p.vid, ()))
            sent.extend(out)
            if p.done:
                returned.append(p.vid)
                self._record_return(p)

        self._in_flight = sent
        self.round += 1
        if not sent and all(p.done for p in self.procs):
            self._finished = True
        return RoundEvents(r, delivered, tuple(sent), tuple(activated), tuple(returned))

    def _record_return(self, p: VertexProcess) -> None:
        self.trace.lifecycle[p.vid] = Lifecycle(
            p.vid, p.activated_round, p.returned_round, p.status, p.state.iteration  # type: ignore[arg-type]
        )
        self.trace.history[p.vid] = list(p.history)

    def run(self) -> tuple[Trace, RunReport]:
        while not self._finished:
            self.step()
        return self.trace, self.report()

    def report(self) -> RunReport:
        if not self._finished:
            raise RuntimeError("report requested before the run finished")
        t = self.trace
        congest = self.params.variant is Variant.CONGEST
        iters = [t.lifecycle[v].iterations for v in range(self.g.n)]
        rounds = [
            3 * k + (1 if congest and self.g.degree(v) else 0) for v, k in enumerate(iters)
        ]
        per_round = Counter(m.round for m in t.messages)
        cover = t.in_cover
        return RunReport(
            cover=cover,
            cover_weight=self.g.weight_of(cover),
            iterations=iters,
            rounds=rounds,
            max_message_bits=max((payload_bits(m) for m in t.messages), default=0),
            total_messages=len(t.messages),
            messages_per_round=[per_round.get(r, 0) for r in range(self.round)],
            total_rounds=self.round,
        )


def run_simulation(
    g: WeightedGraph,
    protocol: ProtocolParams,
    schedule: Schedule | None = None,
    round_cap: int | None = None,
    order_seed: int | None = None,
) -> tuple[Trace, RunReport]:
    """Run the protocol on ``g`` to completion.

    ``order_seed`` switches request processing from ascending neighbour
    index to a seeded per-vertex shuffle.
    """
    return Engine(g, protocol, schedule, round_cap, order_seed).run()


@dataclass(frozen=True)
class MessageStats:
    max_bits: int
    histogram: dict[int, int]
    by_kind: dict[str, int]
    budget_bits: int
    over_budget: int


def congest_bit_budget(weight_bits: int, n: int) -> int:
    return 2 * weight_bits + math.ceil(math.log2(n + 1)) + 8


def message_stats(t: Trace | Iterable[Message], weight_bits: int, n: int) -> MessageStats:
    """Payload sizes under the notional encoding, against the CONGEST allowance
    ``2b + ceil(log2(n+1)) + 8`` for weights of width ``b``."""
    msgs = t.messages if isinstance(t, Trace) else list(t)
    budget = congest_bit_budget(weight_bits, n)
    hist: Counter[int] = Counter()
    by_kind: dict[str, int] = {}
    over = 0
    for m in msgs:
        b = payload_bits(m)
        hist[b] += 1
        by_kind[m.kind.value] = max(by_kind.get(m.kind.value, 0), b)
        over += b > budget
    return MessageStats(max(hist, default=0), dict(sorted(hist.items())), by_kind, budget, over)


def trace_to_json(t: Trace) -> str:
    """Whole-trace dump: parameters, messages, lifecycle events and iteration snapshots."""
    doc = {
        "epsilon": fmt(t.params.epsilon),
        "variant": t.params.variant.value,
        "messages": [m.to_record() for m in t.messages],
        "lifecycle": [
            {
                "vertex": lc.vertex,
                "activated": lc.activated,
                "returned": lc.returned,
                "status": lc.status.value,
                "iterations": lc.iterations,
            }
            for _, lc in sorted(t.lifecycle.items())
        ],
        "history": {
            str(v): [
                {
                    "iter": h.iteration,
                    "w_start": fmt(h.w_start),
                    "d_start": h.d_start,
                    "bank_start": fmt(h.bank_start),
                    "granted_out": fmt(h.granted_out),
                    "received_in": fmt(h.received_in),
                    "w_end": fmt(h.w_end),
                    "d_end": h.d_end,
                }
                for h in recs
            ]
            for v, recs in sorted(t.history.items())
        },
    }
    return json.dumps(doc, indent=1)
