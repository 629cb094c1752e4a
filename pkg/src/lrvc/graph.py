"""Vertex-weighted undirected graphs: data model, text format, generators.

Graph file format (UTF-8)::

    # comment
    n m
    <vertex> <weight>      # n lines, weight as int, decimal or p/q
    <u> <v>                # m lines, u < v

Weights are held as exact rationals (gmpy2 ``mpq``) so that every later
subtraction and division stays exact.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._rational import Q, Rational, as_fraction, fmt, is_exact

Edge = tuple[int, int]


class GraphFormatError(ValueError):
    """Malformed graph text. Carries the 1-based line number when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class InvalidGraphError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph on vertices ``0..n-1`` with positive weights.

    Build instances with :meth:`from_edges`, which normalises and checks
    the input. The raw constructor performs no checks so that tests can
    assemble broken graphs and feed them to :func:`validate`.
    """

    weights: tuple[Q, ...]
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, weights: Iterable[Rational | str], edges: Iterable[Sequence[int]]) -> "WeightedGraph":
        ws = tuple(as_fraction(w) for w in weights)
        n = len(ws)
        seen: set[Edge] = set()
        for e in edges:
            u, v = e
            if u == v:
                raise InvalidGraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraphError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidGraphError(f"duplicate edge {key}")
            seen.add(key)
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in seen:
            nbrs[u].append(v)
            nbrs[v].append(u)
        g = cls(ws, tuple(sorted(seen)), tuple(tuple(sorted(a)) for a in nbrs))
        problems = validate(g)
        if problems:
            raise InvalidGraphError("; ".join(problems))
        return g

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def weight_of(self, vertices: Iterable[int]) -> Q:
        return sum((self.weights[v] for v in vertices), Q(0))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u] if 0 <= u < self.n else False


def max_degree(g: WeightedGraph) -> int:
    return max((len(a) for a in g.adjacency), default=0)


def validate(g: WeightedGraph) -> list[str]:
    """Return descriptions of every broken invariant; empty means valid."""
    out: list[str] = []
    n = len(g.weights)
    for v, w in enumerate(g.weights):
        if not is_exact(w):
            out.append(f"vertex {v}: weight {w!r} is not an exact rational")
        elif w <= 0:
            out.append(f"vertex {v}: weight {fmt(w)} is not strictly positive")
    if len(g.adjacency) != n:
        out.append(f"adjacency has {len(g.adjacency)} rows for {n} vertices")
        return out
    edge_set = set()
    for u, v in g.edges:
        if u == v:
            out.append(f"self-loop at vertex {u}")
            continue
        if not (0 <= u < n and 0 <= v < n):
            out.append(f"edge ({u}, {v}) out of range")
            continue
        key = (min(u, v), max(u, v))
        if key in edge_set:
            out.append(f"parallel edge {key}")
        edge_set.add(key)
    for u, row in enumerate(g.adjacency):
        if list(row) != sorted(set(row)):
            out.append(f"vertex {u}: neighbor list not sorted/unique")
        for v in row:
            if not 0 <= v < n:
                out.append(f"vertex {u}: neighbor {v} out of range")
                continue
            if u not in g.adjacency[v]:
                out.append(f"asymmetric adjacency: {v} in N({u}) but {u} not in N({v})")
            if (min(u, v), max(u, v)) not in edge_set:
                out.append(f"adjacency lists {u}-{v} which is not an edge")
    for u, v in edge_set:
        if 0 <= u < n and 0 <= v < n and (v not in g.adjacency[u] or u not in g.adjacency[v]):
            out.append(f"edge ({u}, {v}) missing from adjacency")
    return out


# ---------------------------------------------------------------- text format


def parse_graph(text: str) -> WeightedGraph:
    lines = [
        (i, raw.split("#", 1)[0].strip())
        for i, raw in enumerate(text.splitlines(), start=1)
    ]
    lines = [(i, s) for i, s in lines if s]
    if not lines:
        raise GraphFormatError("missing header line 'n m'")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError(f"header must be 'n m', got {header!r}", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"header must hold two integers, got {header!r}", lineno) from None
    if n < 0 or m < 0:
        raise GraphFormatError("negative vertex or edge count", lineno)
    body = lines[1:]
    if len(body) != n + m:
        raise GraphFormatError(
            f"expected {n} weight lines and {m} edge lines, found {len(body)} data lines",
            body[-1][0] if body else lineno,
        )

    weights: list[Q | None] = [None] * n
    for lineno, s in body[:n]:
        parts = s.split()
        if len(parts) != 2:
            raise GraphFormatError(f"weight line must be '<vertex> <weight>', got {s!r}", lineno)
        v = _parse_index(parts[0], n, lineno)
        try:
            w = as_fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise GraphFormatError(f"bad weight {parts[1]!r}", lineno) from None
        if w <= 0:
            raise GraphFormatError(f"vertex {v}: weight must be positive, got {parts[1]}", lineno)
        if weights[v] is not None:
            raise GraphFormatError(f"vertex {v} given two weights", lineno)
        weights[v] = w

    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, s in body[n:]:
        parts = s.split()
        if len(parts) != 2:
            raise GraphFormatError(f"edge line must be '<u> <v>', got {s!r}", lineno)
        u = _parse_index(parts[0], n, lineno)
        v = _parse_index(parts[1], n, lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if u > v:
            raise GraphFormatError(f"edge endpoints must satisfy u < v, got {u} {v}", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge {u} {v}", lineno)
        seen.add((u, v))
        edges.append((u, v))
    return WeightedGraph.from_edges(weights, edges)  # type: ignore[arg-type]


def _parse_index(tok: str, n: int, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise GraphFormatError(f"vertex index {tok!r} is not an integer", lineno) from None
    if not 0 <= v < n:
        raise GraphFormatError(f"vertex index {v} out of range 0..{n - 1}", lineno)
    return v


def emit_graph(g: WeightedGraph) -> str:
    out = [f"{g.n} {g.m}"]
    out += [f"{v} {fmt(w)}" for v, w in enumerate(g.weights)]
    out += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- generators

FAMILIES = (
    "single_edge",
    "path",
    "cycle",
    "star",
    "complete",
    "complete_bipartite",
    "erdos_renyi",
    "random_bounded_degree",
)
WEIGHT_MODES = ("unit", "uniform_integer", "uniform_rational")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a seeded graph.

    ``p`` belongs to erdos_renyi, ``d_max`` to random_bounded_degree and
    ``left`` (size of the first side, default ``n // 2``) to
    complete_bipartite. ``lo``/``hi`` bound uniform_integer weights;
    uniform_rational draws ``a/b`` with ``a, b`` uniform in
    ``1..denominator_bound``.
    """

    family: str
    n: int
    weight_mode: str = "unit"
    seed: int = 0
    p: float | None = None
    d_max: int | None = None
    left: int | None = None
    lo: int = 1
    hi: int = 100
    denominator_bound: int = 8


def generate(spec: GeneratorSpec) -> WeightedGraph:
    rng = random.Random(spec.seed)
    edges = _family_edges(spec, rng)
    weights = _weights(spec, rng)
    return WeightedGraph.from_edges(weights, edges)


def _family_edges(spec: GeneratorSpec, rng: random.Random) -> list[Edge]:
    fam, n = spec.family, spec.n
    if fam not in FAMILIES:
        raise ValueError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")
    if n < 1:
        raise ValueError(f"{fam}: n must be >= 1, got {n}")
    if fam == "single_edge":
        if n != 2:
            raise ValueError(f"single_edge needs n=2, got {n}")
        return [(0, 1)]
    if fam == "path":
        return [(i, i + 1) for i in range(n - 1)]
    if fam == "cycle":
        if n < 3:
            raise ValueError(f"cycle needs n >= 3, got {n}")
        return [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    if fam == "star":
        return [(0, i) for i in range(1, n)]
    if fam == "complete":
        return list(itertools.combinations(range(n), 2))
    if fam == "complete_bipartite":
        a = n // 2 if spec.left is None else spec.left
        if not 0 <= a <= n:
            raise ValueError(f"complete_bipartite: left={a} outside 0..{n}")
        return [(u, v) for u in range(a) for v in range(a, n)]
    if fam == "erdos_renyi":
        if spec.p is None or not 0.0 <= spec.p <= 1.0:
            raise ValueError(f"erdos_renyi needs 0 <= p <= 1, got {spec.p}")
        return [e for e in itertools.combinations(range(n), 2) if rng.random() < spec.p]
    # random_bounded_degree
    if spec.d_max is None or spec.d_max < 0:
        raise ValueError(f"random_bounded_degree needs d_max >= 0, got {spec.d_max}")
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    deg = [0] * n
    chosen = []
    for u, v in pairs:
        if deg[u] < spec.d_max and deg[v] < spec.d_max:
            chosen.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return sorted(chosen)


def _weights(spec: GeneratorSpec, rng: random.Random) -> list[Q]:
    mode, n = spec.weight_mode, spec.n
    if mode == "unit":
        return [Q(1)] * n
    if mode == "uniform_integer":
        if not 1 <= spec.lo <= spec.hi:
            raise ValueError(f"uniform_integer needs 1 <= lo <= hi, got {spec.lo}, {spec.hi}")
        return [Q(rng.randint(spec.lo, spec.hi)) for _ in range(n)]
    if mode == "uniform_rational":
        b = spec.denominator_bound
        if b < 1:
            raise ValueError(f"denominator_bound must be >= 1, got {b}")
        return [Q(rng.randint(1, b), rng.randint(1, b)) for _ in range(n)]
    raise ValueError(f"unknown weight mode {mode!r}; choose from {', '.join(WEIGHT_MODES)}")
