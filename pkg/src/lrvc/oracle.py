"""Independent checks of a run, rebuilt from the wire trace alone.

The edge payment function is reconstructed by reading every budget
message (decoding CONGEST accept/quantized replies from the degree
requests and initial weights that are also on the wire); nothing is
taken from the vertices' own bookkeeping. On top of it sit the local
ratio checks, an exact branch-and-bound optimum and a sequential
local-ratio reference.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from ._rational import Q, Rational, as_fraction, fmt, weight_width
from .bounds import iteration_cap
from .engine import RunReport, Trace, congest_bit_budget
from .graph import Edge, WeightedGraph
from .messages import BUDGET_KINDS, Kind, Message, payload_bits
from .protocol import Status, Variant, kv_parameter

BRUTE_FORCE_MAX_N = 24


class TraceError(ValueError):
    pass


@dataclass
class EdgePayments:
    payments: dict[Edge, Q]
    by_iteration: dict[Edge, dict[int, Q]] = field(default_factory=dict)

    @classmethod
    def zero(cls, g: WeightedGraph) -> "EdgePayments":
        return cls({e: Q(0) for e in g.edges}, {e: {} for e in g.edges})

    def load(self, v: int, g: WeightedGraph) -> Q:
        """Total payment on edges at ``v``."""
        return sum((self.payments[(min(u, v), max(u, v))] for u in g.adjacency[v]), Q(0))


@dataclass(frozen=True)
class CoverResult:
    cover: frozenset[int]
    weight: Q
    is_valid_cover: bool
    ratio_vs: Q | None = None

    def to_dict(self) -> dict:
        d = {
            "cover": sorted(self.cover),
            "weight": fmt(self.weight),
            "weight_float": float(self.weight),
            "is_valid_cover": self.is_valid_cover,
        }
        if self.ratio_vs is not None:
            d["ratio"] = fmt(self.ratio_vs)
            d["ratio_float"] = float(self.ratio_vs)
        return d


def _edge(g: WeightedGraph, u: int, v: int) -> Edge:
    if not g.has_edge(u, v):
        raise TraceError(f"trace references non-edge {u}-{v}")
    return (min(u, v), max(u, v))


def budget_amounts(g: WeightedGraph, t: Trace) -> list[tuple[Message, Q, Q]]:
    """Each budget message with its decoded amount and the request it answered."""
    eps_p = t.params.epsilon_prime
    congest = t.params.variant is Variant.CONGEST
    unit: dict[int, Q] = {}
    requests: dict[tuple[int, int, int], Q] = {}
    out = []
    for m in t.messages:
        k = m.kind
        if k is Kind.INITIAL_WEIGHT:
            unit[m.src] = eps_p * m.payload / 2  # type: ignore[operator]
        elif k is Kind.REQUEST:
            requests[(m.src, m.dst, m.iteration)] = m.payload  # type: ignore[assignment]
        elif k is Kind.REQUEST_DEGREE:
            requests[(m.src, m.dst, m.iteration)] = unit[m.src] / m.payload  # type: ignore[operator]
        elif k in BUDGET_KINDS:
            _edge(g, m.src, m.dst)
            req = requests.get((m.dst, m.src, m.iteration))
            if req is None:
                raise TraceError(f"budget without a matching request: {m.to_record()}")
            if k is Kind.BUDGET_EXACT:
                amt = m.payload
            elif k is Kind.BUDGET_ACCEPT:
                amt = req
            else:
                if not congest:
                    raise TraceError("quantized budget in a LOCAL trace")
                amt = m.payload * unit[m.src]  # type: ignore[operator]
            out.append((m, amt, req))
    return out


def extract_delta(g: WeightedGraph, t: Trace, decoded: list | None = None) -> EdgePayments:
    """Edge payments: both directions' budgets summed per edge and per iteration."""
    p = EdgePayments.zero(g)
    for m, amt, _ in budget_amounts(g, t) if decoded is None else decoded:
        e = _edge(g, m.src, m.dst)
        p.payments[e] += amt
        per = p.by_iteration[e]
        per[m.iteration] = per.get(m.iteration, Q(0)) + amt
    return p


def check_g_valid(g: WeightedGraph, p: EdgePayments) -> list[int]:
    bad = [e for e, x in p.payments.items() if x < 0]
    if bad:
        raise ValueError(f"negative payments on {bad}")
    return [v for v in range(g.n) if p.load(v, g) > g.weights[v]]


def compute_s_delta(g: WeightedGraph, p: EdgePayments, eps: Rational) -> frozenset[int]:
    """Vertices whose residual ``w - load`` is at most ``eps' * w``."""
    if check_g_valid(g, p):
        raise ValueError("payments are not G-valid")
    eps = as_fraction(eps)
    eps_p = eps / (2 + eps)
    return frozenset(v for v in range(g.n) if g.weights[v] - p.load(v, g) <= eps_p * g.weights[v])


def check_cover(g: WeightedGraph, s: Iterable[int]) -> bool:
    s = set(s)
    return all(u in s or v in s for u, v in g.edges)


def approx_ratio(cover_weight: Rational, opt_weight: Rational) -> Q:
    opt_weight = as_fraction(opt_weight)
    if opt_weight <= 0:
        raise ZeroDivisionError("optimum weight must be positive")
    return as_fraction(cover_weight) / opt_weight


# ------------------------------------------------------------- brute force


def _min_cover_weight(
    g: WeightedGraph, forced_in: frozenset[int], forced_out: frozenset[int]
) -> Q | None:
    """Least weight of a cover containing ``forced_in`` and avoiding ``forced_out``; None if impossible."""
    w = g.weights
    adj = g.adjacency
    best: list[Q | None] = [None]

    def lower_bound(undecided: set[int]) -> Q:
        # disjoint uncovered edges each cost at least their lighter endpoint
        used: set[int] = set()
        lb = Q(0)
        for u in undecided:
            if u in used:
                continue
            for v in adj[u]:
                if v in undecided and v not in used:
                    used.update((u, v))
                    lb += min(w[u], w[v])
                    break
        return lb

    def rec(inn: set[int], out: set[int], cost: Q) -> None:
        undecided = {
            u for u in range(g.n)
            if u not in inn and u not in out and any(v not in inn for v in adj[u])
        }
        if best[0] is not None and cost + lower_bound(undecided) >= best[0]:
            return
        branch, top = None, 0
        for u in sorted(undecided):
            deg = sum(1 for v in adj[u] if v in undecided)
            if deg > top:
                branch, top = u, deg
        if branch is None:
            best[0] = cost
            return
        u = branch
        inn.add(u)
        rec(inn, out, cost + w[u])
        inn.discard(u)
        # u excluded: all its remaining neighbours must join
        nbrs = [v for v in adj[u] if v not in inn]
        if any(v in out for v in nbrs):
            return
        out.add(u)
        inn.update(nbrs)
        rec(inn, out, cost + sum((w[v] for v in nbrs), Q(0)))
        inn.difference_update(nbrs)
        out.discard(u)

    inn = set(forced_in)
    for u in forced_out:
        if u in inn:
            return None
        for v in adj[u]:
            if v in forced_out:
                return None
            inn.add(v)
    rec(inn, set(forced_out), g.weight_of(inn))
    return best[0]


def brute_force_mwvc(g: WeightedGraph) -> CoverResult:
    """Exact minimum weight vertex cover; the lexicographically smallest one among ties.

    The optimum comes from branch and bound; the tie-break then grows the
    sorted vertex tuple one element at a time, taking the smallest vertex
    that still admits an optimal completion.
    """
    if g.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {g.n}")
    none: frozenset[int] = frozenset()
    opt = _min_cover_weight(g, none, none)
    assert opt is not None
    chosen: list[int] = []
    excluded: set[int] = set()
    while not check_cover(g, chosen):
        lo = chosen[-1] + 1 if chosen else 0
        for x in range(lo, g.n):
            skip = excluded | set(range(lo, x))
            if _min_cover_weight(g, frozenset(chosen + [x]), frozenset(skip)) == opt:
                excluded = skip
                chosen.append(x)
                break
        else:  # pragma: no cover
            raise AssertionError("no optimal extension found")
    cover = frozenset(chosen)
    return CoverResult(cover, g.weight_of(cover), True)


def sequential_local_ratio(g: WeightedGraph, eps: Rational) -> tuple[EdgePayments, frozenset[int]]:
    """One pass over the edges in lexicographic order, paying each edge the smaller endpoint slack.

    Slack is residual weight above ``eps' * w``. Afterwards every edge has
    an endpoint at its threshold, so the threshold set is a cover.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps_p = eps / (2 + eps)
    resid = list(g.weights)
    floor = [eps_p * w for w in g.weights]
    p = EdgePayments.zero(g)
    for u, v in g.edges:
        su, sv = resid[u] - floor[u], resid[v] - floor[v]
        if su > 0 and sv > 0:
            amt = min(su, sv)
            resid[u] -= amt
            resid[v] -= amt
            p.payments[(u, v)] = amt
            p.by_iteration[(u, v)] = {0: amt}
    return p, frozenset(v for v in range(g.n) if resid[v] <= floor[v])


# ------------------------------------------------------- per-run invariants


@dataclass(frozen=True)
class IterationView:
    """One vertex-iteration as seen on the wire."""

    iteration: int
    w_start: Q
    d_start: int
    w_end: Q
    full_grants: int


def iteration_views(g: WeightedGraph, t: Trace, decoded: list | None = None) -> dict[int, list[IterationView]]:
    """Per-vertex iteration history rebuilt from messages.

    ``d_start`` counts the requests a vertex sent; ``full_grants`` counts
    neighbours that paid in full, which is the live degree after removals
    and before cover notices.
    """
    sent = defaultdict(lambda: defaultdict(int))
    loss = defaultdict(lambda: defaultdict(Q))
    full = defaultdict(lambda: defaultdict(int))
    for m in t.messages:
        if m.kind in (Kind.REQUEST, Kind.REQUEST_DEGREE):
            sent[m.src][m.iteration] += 1
    for m, amt, req in budget_amounts(g, t) if decoded is None else decoded:
        loss[m.src][m.iteration] += amt
        loss[m.dst][m.iteration] += amt
        if amt == req:
            full[m.dst][m.iteration] += 1
    views: dict[int, list[IterationView]] = {}
    for v in range(g.n):
        w = g.weights[v]
        rows = []
        for i in range(t.lifecycle[v].iterations):
            w_end = w - loss[v][i]
            rows.append(IterationView(i, w, sent[v][i], w_end, full[v][i]))
            w = w_end
        views[v] = rows
    return views


def dichotomy_violations(
    g: WeightedGraph,
    t: Trace,
    views: dict[int, list[IterationView]] | None = None,
    *,
    literal: bool = False,
) -> list[str]:
    """Iterations where neither the degree fell by ``K_v`` nor the weight by ``vault / K_v``.

    The weight step is ``eps' w0 / K_v`` under LOCAL. Under CONGEST the vault
    is halved, so the step that actually holds is ``eps' w0 / (2 K_v)``;
    ``literal=True`` checks the unhalved step for both variants.
    """
    eps_p = t.params.epsilon_prime
    halve = t.params.variant is Variant.CONGEST and not literal
    out = []
    for v, rows in (iteration_views(g, t) if views is None else views).items():
        if not rows:
            continue
        k = Q(kv_parameter(g.degree(v)))
        step = eps_p * g.weights[v] / (2 if halve else 1)
        for r in rows:
            if r.full_grants * k <= r.d_start:
                continue
            if r.w_end * k <= r.w_start * k - step:
                continue
            out.append(
                f"vertex {v} iteration {r.iteration}: d {r.d_start}->{r.full_grants}, "
                f"w {fmt(r.w_start)}->{fmt(r.w_end)}, K={k}"
            )
    return out


def round_bound_violations(g: WeightedGraph, t: Trace) -> list[str]:
    out = []
    for v in range(g.n):
        d = g.degree(v)
        if d == 0:
            continue
        cap = iteration_cap(d, t.params.epsilon)
        got = t.lifecycle[v].iterations
        if got > cap:
            out.append(f"vertex {v} (degree {d}) ran {got} iterations, cap {cap}")
    return out


def congest_violations(g: WeightedGraph, t: Trace) -> list[str]:
    """Bit budget, quantized-count ceiling, and joins after partial answers."""
    if t.params.variant is not Variant.CONGEST:
        return []
    out = []
    b = max((weight_width(w) for w in g.weights), default=1)
    budget = congest_bit_budget(b, g.n)
    t_max = math.floor(2 / t.params.epsilon_prime)
    for m in t.messages:
        bits = payload_bits(m)
        if bits > budget:
            out.append(f"{m.kind.value} {m.src}->{m.dst} uses {bits} bits > {budget}")
        if m.kind is Kind.BUDGET_QUANTIZED:
            if m.payload > t_max:  # type: ignore[operator]
                out.append(f"quantized t={m.payload} exceeds {t_max}")
            lc = t.lifecycle[m.src]
            if lc.status is not Status.IN_COVER or lc.iterations != m.iteration + 1:
                out.append(f"vertex {m.src} answered partially in iteration {m.iteration} but did not join then")
    return out


def engine_consistency_violations(
    g: WeightedGraph, t: Trace, views: dict[int, list[IterationView]] | None = None
) -> list[str]:
    """Compare the vertices' own iteration snapshots with the wire reconstruction."""
    out = []
    if views is None:
        views = iteration_views(g, t)
    for v in range(g.n):
        hist = t.history.get(v, [])
        rows = views[v]
        if len(hist) != len(rows):
            out.append(f"vertex {v}: {len(hist)} snapshots vs {len(rows)} wire iterations")
            continue
        for h, r in zip(hist, rows):
            if h.w_start != r.w_start or h.w_end != r.w_end or h.d_start != r.d_start or h.d_end != r.full_grants:
                out.append(f"vertex {v} iteration {h.iteration}: snapshot disagrees with wire")
            if h.w_end != h.w_start - h.granted_out - h.received_in:
                out.append(f"vertex {v} iteration {h.iteration}: weight not conserved")
            if h.granted_out > h.bank_start:
                out.append(f"vertex {v} iteration {h.iteration}: granted beyond bank")
            if h.w_end < 0:
                out.append(f"vertex {v} iteration {h.iteration}: negative weight")
    return out


@dataclass
class Verification:
    """Every check for one run. ``ok`` is the conjunction of the enabled ones."""

    g_valid_violations: list[int]
    characterization_ok: bool
    cover_ok: bool
    ratio: Q | None
    ratio_ok: bool | None
    opt: CoverResult | None
    dichotomy: list[str]
    dichotomy_literal: list[str]
    round_bound: list[str] | None
    congest: list[str]
    consistency: list[str]
    delta_total: Q

    @property
    def ok(self) -> bool:
        return (
            not self.g_valid_violations
            and self.characterization_ok
            and self.cover_ok
            and self.ratio_ok is not False
            and not self.dichotomy
            and not self.round_bound
            and not self.congest
            and not self.consistency
        )

    def to_dict(self) -> dict:
        d: dict = {
            "ok": self.ok,
            "g_valid": not self.g_valid_violations,
            "g_valid_violations": self.g_valid_violations,
            "characterization": self.characterization_ok,
            "cover_valid": self.cover_ok,
            "delta_total": fmt(self.delta_total),
            "dichotomy_violations": self.dichotomy,
            "dichotomy_literal_violations": self.dichotomy_literal,
            "congest_violations": self.congest,
            "consistency_violations": self.consistency,
        }
        if self.round_bound is not None:
            d["round_bound_violations"] = self.round_bound
        if self.opt is not None:
            d["opt_weight"] = fmt(self.opt.weight)
            d["opt_weight_float"] = float(self.opt.weight)
            d["opt_cover"] = sorted(self.opt.cover)
        if self.ratio is not None:
            d["ratio"] = fmt(self.ratio)
            d["ratio_float"] = float(self.ratio)
            d["ratio_ok"] = self.ratio_ok
        return d


def verify_run(
    g: WeightedGraph,
    t: Trace,
    report: RunReport,
    *,
    optimum: bool | CoverResult = True,
    simultaneous: bool = True,
) -> Verification:
    """Run all oracle checks on a finished simulation.

    ``optimum`` may be False (skip), True (compute when ``n`` allows), or a
    precomputed :class:`CoverResult`. Round bounds are only asserted for
    simultaneous starts.
    """
    eps = t.params.epsilon
    decoded = budget_amounts(g, t)
    views = iteration_views(g, t, decoded)
    p = extract_delta(g, t, decoded)
    bad = check_g_valid(g, p)
    charac = not bad and compute_s_delta(g, p, eps) == report.cover == t.in_cover
    cover_ok = check_cover(g, report.cover)
    opt: CoverResult | None = None
    if isinstance(optimum, CoverResult):
        opt = optimum
    elif optimum and g.n <= BRUTE_FORCE_MAX_N:
        opt = brute_force_mwvc(g)
    ratio = ratio_ok = None
    if opt is not None and opt.weight > 0:
        ratio = approx_ratio(report.cover_weight, opt.weight)
        ratio_ok = ratio <= 2 + eps
    return Verification(
        g_valid_violations=bad,
        characterization_ok=charac,
        cover_ok=cover_ok,
        ratio=ratio,
        ratio_ok=ratio_ok,
        opt=opt,
        dichotomy=dichotomy_violations(g, t, views),
        dichotomy_literal=dichotomy_violations(g, t, views, literal=True),
        round_bound=round_bound_violations(g, t) if simultaneous else None,
        congest=congest_violations(g, t),
        consistency=engine_consistency_violations(g, t, views),
        delta_total=sum(p.payments.values(), Q(0)),
    )
