"""Vault/bank local-ratio protocol for weighted vertex cover, per vertex.

Every vertex splits its weight into a *vault* (``eps' * w0``; half that
under CONGEST), which funds the requests it sends, and a *bank* (the
rest), which funds budgets granted to its neighbours' requests. One
iteration is

1. ``make_requests``: ask each live neighbour for ``vault / d_i``;
2. ``grant_budgets``: answer incoming requests in order, each capped by
   what is left in the bank;
3. ``absorb_budgets``: subtract received budgets, drop neighbours that
   could not pay in full;
4. ``finalize_iteration``: join the cover once ``w_i <= eps' * w0``,
   otherwise drop neighbours that announced joining and stop with no
   neighbours left.

The phase functions operate on a :class:`VertexState` and are pure
bookkeeping. :class:`VertexProcess` wraps them into the message-driven
process that the round engine drives.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ._rational import Q, Rational, as_fraction
from .messages import Kind, Message


class ProtocolError(RuntimeError):
    """A vertex received a message that its phase order does not allow."""


class Variant(str, enum.Enum):
    LOCAL = "local"
    CONGEST = "congest"


class Status(str, enum.Enum):
    RUNNING = "Running"
    IN_COVER = "InCover"
    NOT_IN_COVER = "NotInCover"


@dataclass(frozen=True)
class ProtocolParams:
    epsilon: Q
    variant: Variant = Variant.LOCAL

    def __post_init__(self) -> None:
        eps = as_fraction(self.epsilon)
        if eps <= 0:
            raise ValueError(f"epsilon must be positive, got {eps}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def epsilon_prime(self) -> Q:
        return self.epsilon / (2 + self.epsilon)

    def threshold(self, w0: Q) -> Q:
        return self.epsilon_prime * w0

    def vault(self, w0: Q) -> Q:
        if self.variant is Variant.CONGEST:
            return self.epsilon_prime * w0 / 2
        return self.epsilon_prime * w0

    def quantum(self, w0: Q) -> Q:
        """Unit of a quantized CONGEST budget for a granter of weight ``w0``."""
        return self.epsilon_prime * w0 / 2

    def congest_request(self, w0_sender: Q, degree: int) -> Q:
        """Request amount a receiver reconstructs from a degree message."""
        return self.epsilon_prime * w0_sender / (2 * degree)


@dataclass
class VertexState:
    vid: int
    w0: Q
    w_cur: Q
    vault: Q
    bank: Q
    live_neighbors: list[int]
    params: ProtocolParams
    iteration: int = 0
    status: Status = Status.RUNNING
    granted: Q = Q(0)
    requests_out: dict[int, Q] = field(default_factory=dict)

    @property
    def degree_cur(self) -> int:
        return len(self.live_neighbors)

    @property
    def threshold(self) -> Q:
        return self.params.threshold(self.w0)


@dataclass(frozen=True)
class Grant:
    """A budget answered to one request: the effective amount both ends record."""

    neighbor: int
    amount: Q
    full: bool
    t: int | None = None

    def to_message(self, src: int, iteration: int, rnd: int, variant: Variant) -> Message:
        if variant is Variant.LOCAL:
            return Message(Kind.BUDGET_EXACT, src, self.neighbor, iteration, self.amount, rnd)
        if self.full:
            return Message(Kind.BUDGET_ACCEPT, src, self.neighbor, iteration, None, rnd)
        return Message(Kind.BUDGET_QUANTIZED, src, self.neighbor, iteration, self.t, rnd)


def init_vertex(w: Rational, neighbors: Iterable[int], params: ProtocolParams, vid: int = 0) -> VertexState:
    w0 = as_fraction(w)
    if w0 <= 0:
        raise ValueError(f"vertex {vid}: weight must be positive, got {w0}")
    vault = params.vault(w0)
    live = sorted(neighbors)
    return VertexState(
        vid=vid,
        w0=w0,
        w_cur=w0,
        vault=vault,
        bank=w0 - vault,
        live_neighbors=live,
        params=params,
        status=Status.RUNNING if live else Status.NOT_IN_COVER,
    )


def make_requests(s: VertexState) -> dict[int, Q] | int:
    """Open an iteration: reset the bank and ask every live neighbour for ``vault / d_i``.

    Returns the per-neighbour amounts under LOCAL and the single degree
    ``d_i`` under CONGEST, where receivers rebuild the amount themselves.
    """
    if s.status is not Status.RUNNING:
        raise ProtocolError(f"vertex {s.vid}: make_requests while {s.status.value}")
    d = s.degree_cur
    if d == 0:
        raise ProtocolError(f"vertex {s.vid}: make_requests with no live neighbours")
    s.bank = s.w_cur - s.vault
    s.granted = Q(0)
    amount = s.vault / d
    s.requests_out = {u: amount for u in s.live_neighbors}
    if s.params.variant is Variant.CONGEST:
        return d
    return dict(s.requests_out)


def grant_budgets(s: VertexState, incoming: Sequence[tuple[int, Rational]]) -> list[Grant]:
    if s.status is not Status.RUNNING:
        raise ProtocolError(f"vertex {s.vid}: grant_budgets while {s.status.value}")
    congest = s.params.variant is Variant.CONGEST
    grants = []
    total = Q(0)
    for u, req in incoming:
        req = as_fraction(req)
        if req < 0:
            raise ValueError(f"vertex {s.vid}: negative request {req} from {u}")
        if s.bank >= req:
            g = Grant(u, req, True)
        elif congest:
            q = s.params.quantum(s.w0)
            t = int(math.floor(s.bank / q))
            g = Grant(u, t * q, False, t)
        else:
            g = Grant(u, s.bank, False)
        s.bank -= g.amount
        total += g.amount
        grants.append(g)
    s.granted += total
    s.w_cur -= total
    return grants


def absorb_budgets(s: VertexState, responses: Mapping[int, Rational]) -> None:
    """Subtract received budgets; neighbours that paid less than asked are dropped."""
    if set(responses) != set(s.requests_out):
        extra = sorted(set(responses) - set(s.requests_out))
        missing = sorted(set(s.requests_out) - set(responses))
        raise ProtocolError(f"vertex {s.vid}: responses from unrequested {extra}, missing {missing}")
    short = set()
    for u, amt in responses.items():
        amt = as_fraction(amt)
        req = s.requests_out[u]
        if amt > req:
            raise ProtocolError(f"vertex {s.vid}: budget {amt} from {u} exceeds request {req}")
        if amt < 0:
            raise ProtocolError(f"vertex {s.vid}: negative budget from {u}")
        s.w_cur -= amt
        if amt < req:
            short.add(u)
    s.live_neighbors = [u for u in s.live_neighbors if u not in short]


def close_iteration(s: VertexState) -> list[int]:
    """Advance the iteration counter and apply the threshold test.

    Returns the neighbours to notify when the vertex joins the cover.
    """
    s.iteration += 1
    s.requests_out = {}
    if s.w_cur <= s.threshold:
        s.status = Status.IN_COVER
        return list(s.live_neighbors)
    return []


def apply_cover_notices(s: VertexState, senders: Iterable[int]) -> Status:
    gone = set(senders)
    s.live_neighbors = [u for u in s.live_neighbors if u not in gone]
    if s.status is Status.RUNNING and not s.live_neighbors:
        s.status = Status.NOT_IN_COVER
    return s.status


def finalize_iteration(s: VertexState, cover_notices: Iterable[int] = ()) -> tuple[Status, list[int]]:
    notify = close_iteration(s)
    if s.status is Status.IN_COVER:
        return s.status, notify
    return apply_cover_notices(s, cover_notices), []


def kv_parameter(d: int) -> Q | float:
    """The analysis parameter ``K_v`` for a vertex of degree ``d`` (base-2 logs).

    Exact when ``d <= 16`` or when both logarithms are integers (``d`` a
    power of two with a power-of-two exponent); a float otherwise.
    """
    if d < 1:
        raise ValueError(f"K_v is undefined for degree {d}")
    if d <= 16:
        return Q(d + 1)
    lg = exact_log2(d)
    if lg is not None:
        lglg = exact_log2(lg)
        if lglg is not None:
            return Q(lg, lglg)
    return math.log2(d) / math.log2(math.log2(d))


def exact_log2(x: int) -> int | None:
    if x >= 1 and x & (x - 1) == 0:
        return x.bit_length() - 1
    return None


# ----------------------------------------------------------------- process


class Phase(enum.Enum):
    IDLE = 0
    INIT = 1
    REQUEST = 2
    GRANT = 3
    ABSORB = 4
    DONE = 5


@dataclass(frozen=True)
class IterationRecord:
    """Snapshot of one completed iteration, taken by the vertex itself."""

    iteration: int
    w_start: Q
    d_start: int
    bank_start: Q
    granted_out: Q
    received_in: Q
    w_end: Q
    d_end: int


class VertexProcess:
    """Message-driven runner for one vertex.

    Each phase fires in its own round, in the first round where the
    messages it depends on are present, so neighbours that started at
    different rounds pair up by iteration tag. A neighbour's cover notice
    stands in for a request or budget it will never send.
    """

    def __init__(
        self,
        vid: int,
        weight: Rational,
        neighbors: Sequence[int],
        params: ProtocolParams,
        order_seed: int | None = None,
    ):
        self.vid = vid
        self.params = params
        self.neighbors = tuple(sorted(neighbors))
        self._nbr_set = frozenset(self.neighbors)
        self.state = init_vertex(weight, self.neighbors, params, vid)
        self.phase = Phase.IDLE
        self._rng = None if order_seed is None else random.Random(f"{order_seed}:{vid}")
        self.known_w0: dict[int, Q] = {}
        self._unit: dict[int, Q] = {}
        self.requests_in: dict[int, dict[int, Q]] = {}
        self.budgets_in: dict[int, dict[int, Q]] = {}
        self.noticed: set[int] = set()
        self.history: list[IterationRecord] = []
        self.activated_round: int | None = None
        self.returned_round: int | None = None
        self._open: tuple[Q, int, Q] | None = None

    @property
    def done(self) -> bool:
        return self.phase is Phase.DONE

    @property
    def status(self) -> Status:
        return self.state.status

    def activate(self, rnd: int) -> None:
        if self.phase is not Phase.IDLE:
            raise ProtocolError(f"vertex {self.vid} activated twice")
        self.activated_round = rnd
        if self.state.status is not Status.RUNNING:
            self._finish(rnd)
        elif self.params.variant is Variant.CONGEST:
            self.phase = Phase.INIT
        else:
            self.phase = Phase.REQUEST

    def on_round(self, rnd: int, inbox: Sequence[Message]) -> list[Message]:
        for m in inbox:
            self._receive(m)
        if self.phase is Phase.INIT:
            self.phase = Phase.REQUEST
            return [
                Message(Kind.INITIAL_WEIGHT, self.vid, u, 0, self.state.w0, rnd + 1)
                for u in self.neighbors
            ]
        if self.phase is Phase.REQUEST:
            return self._request(rnd)
        if self.phase is Phase.GRANT:
            return self._grant(rnd)
        if self.phase is Phase.ABSORB:
            return self._absorb(rnd)
        return []

    # -- phases

    def _request(self, rnd: int) -> list[Message]:
        s = self.state
        if apply_cover_notices(s, self.noticed) is not Status.RUNNING:
            self._finish(rnd)
            return []
        out = make_requests(s)
        self._open = (s.w_cur, s.degree_cur, s.bank)
        self.phase = Phase.GRANT
        i = s.iteration
        if isinstance(out, int):
            return [Message(Kind.REQUEST_DEGREE, self.vid, u, i, out, rnd + 1) for u in s.live_neighbors]
        return [Message(Kind.REQUEST, self.vid, u, i, amt, rnd + 1) for u, amt in out.items()]

    def _grant(self, rnd: int) -> list[Message]:
        s = self.state
        i = s.iteration
        got = self.requests_in.get(i, {})
        if any(u not in got and u not in self.noticed for u in s.requests_out):
            return []
        stray = set(got) - set(s.requests_out)
        if stray:
            raise ProtocolError(f"vertex {self.vid}: iteration-{i} requests from non-live {sorted(stray)}")
        order = [u for u in s.live_neighbors if u in got]
        if self._rng is not None:
            self._rng.shuffle(order)
        incoming = [(u, self._request_amount(u, got[u])) for u in order]
        grants = grant_budgets(s, incoming)
        self.phase = Phase.ABSORB
        self.requests_in.pop(i, None)
        return [g.to_message(self.vid, i, rnd + 1, self.params.variant) for g in grants]

    def _absorb(self, rnd: int) -> list[Message]:
        s = self.state
        i = s.iteration
        got = self.budgets_in.get(i, {})
        if any(u not in got and u not in self.noticed for u in s.requests_out):
            return []
        stray = set(got) - set(s.requests_out)
        if stray:
            raise ProtocolError(f"vertex {self.vid}: iteration-{i} budgets from unrequested {sorted(stray)}")
        responses = {u: got.get(u, Q(0)) for u in s.requests_out}
        received = sum(responses.values(), Q(0))
        absorb_budgets(s, responses)
        self.budgets_in.pop(i, None)
        w_start, d_start, bank_start = self._open  # type: ignore[misc]
        self.history.append(
            IterationRecord(i, w_start, d_start, bank_start, s.granted, received, s.w_cur, s.degree_cur)
        )
        notify = close_iteration(s)
        if s.status is Status.IN_COVER:
            self._finish(rnd)
            return [Message(Kind.COVER_NOTICE, self.vid, u, i, None, rnd + 1) for u in notify]
        self.phase = Phase.REQUEST
        return []

    def _finish(self, rnd: int) -> None:
        self.phase = Phase.DONE
        self.returned_round = rnd

    # -- receipt

    def _request_amount(self, u: int, payload: Q | int) -> Q:
        if self.params.variant is Variant.LOCAL:
            return payload  # type: ignore[return-value]
        if u not in self._unit:
            raise ProtocolError(f"vertex {self.vid}: degree request from {u} before its initial weight")
        # same value as params.congest_request(w0, d), with eps' * w0 / 2 cached per sender
        return self._unit[u] / payload

    def _receive(self, m: Message) -> None:
        if m.dst != self.vid or m.src not in self._nbr_set:
            raise ProtocolError(f"vertex {self.vid}: misrouted message {m.to_record()}")
        if self.phase is Phase.DONE:
            return
        k = m.kind
        congest = self.params.variant is Variant.CONGEST
        if k is Kind.COVER_NOTICE:
            self.noticed.add(m.src)
        elif k is Kind.INITIAL_WEIGHT:
            if not congest or m.src in self.known_w0:
                raise ProtocolError(f"vertex {self.vid}: unexpected {k.value} from {m.src}")
            self.known_w0[m.src] = m.payload  # type: ignore[assignment]
            self._unit[m.src] = self.params.quantum(m.payload)  # type: ignore[arg-type]
        elif k in (Kind.REQUEST, Kind.REQUEST_DEGREE):
            if (k is Kind.REQUEST_DEGREE) is not congest:
                raise ProtocolError(f"vertex {self.vid}: {k.value} under {self.params.variant.value}")
            i = self.state.iteration
            if m.iteration < i or (m.iteration == i and self.phase not in (Phase.IDLE, Phase.INIT, Phase.REQUEST, Phase.GRANT)):
                raise ProtocolError(f"vertex {self.vid}: stale iteration-{m.iteration} request from {m.src}")
            box = self.requests_in.setdefault(m.iteration, {})
            if m.src in box:
                raise ProtocolError(f"vertex {self.vid}: duplicate request from {m.src}")
            box[m.src] = m.payload  # type: ignore[assignment]
        else:
            i = self.state.iteration
            if m.iteration != i or self.phase not in (Phase.GRANT, Phase.ABSORB):
                raise ProtocolError(f"vertex {self.vid}: out-of-phase budget {m.to_record()}")
            if m.src not in self.state.requests_out:
                raise ProtocolError(f"vertex {self.vid}: budget from unrequested neighbour {m.src}")
            if (k is Kind.BUDGET_EXACT) is congest:
                raise ProtocolError(f"vertex {self.vid}: {k.value} under {self.params.variant.value}")
            box = self.budgets_in.setdefault(i, {})
            if m.src in box:
                raise ProtocolError(f"vertex {self.vid}: duplicate budget from {m.src}")
            if k is Kind.BUDGET_EXACT:
                amount = m.payload
            elif k is Kind.BUDGET_ACCEPT:
                amount = self.state.requests_out[m.src]
            else:
                amount = m.payload * self._unit[m.src]  # type: ignore[operator]
            box[m.src] = amount  # type: ignore[assignment]
