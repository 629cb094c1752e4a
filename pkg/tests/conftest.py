from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from lrvc import Q
from lrvc.engine import RunReport, Trace, run_simulation
from lrvc.graph import GeneratorSpec, WeightedGraph, emit_graph, generate
from lrvc.oracle import CoverResult, brute_force_mwvc
from lrvc.protocol import ProtocolParams, Variant

FIXTURES = Path(__file__).parent / "fixtures"

CORPUS_FAMILIES = (
    ("path", None),
    ("cycle", None),
    ("star", None),
    ("complete", None),
    ("complete_bipartite", None),
    ("erdos_renyi", 0.2),
    ("erdos_renyi", 0.5),
    ("erdos_renyi", 0.8),
)
CORPUS_EPS = (Q(1, 10), Q(1, 2), Q(1), Q(2))
CORPUS_SEEDS = range(10)


def corpus_graphs() -> list[tuple[GeneratorSpec, WeightedGraph]]:
    """Unique seeded graphs, n in 3..12, unit and integer(1,100) weights."""
    seen: set[str] = set()
    out = []
    for seed in CORPUS_SEEDS:
        for fam, p in CORPUS_FAMILIES:
            for n in range(3, 13):
                for mode in ("unit", "uniform_integer"):
                    spec = GeneratorSpec(fam, n, mode, seed, p=p, lo=1, hi=100)
                    g = generate(spec)
                    key = emit_graph(g)
                    if key not in seen:
                        seen.add(key)
                        out.append((spec, g))
    return out


@st.composite
def graphs(draw, max_n=9, integer_weights=False):
    """Arbitrary small weighted graphs for property tests."""
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    weight = st.integers(1, 100) if integer_weights else st.fractions(min_value=Fraction(1, 50), max_value=100)
    weights = draw(st.lists(weight, min_size=n, max_size=n))
    return WeightedGraph.from_edges(weights, edges)


@dataclass
class CorpusRun:
    spec: GeneratorSpec
    g: WeightedGraph
    params: ProtocolParams
    trace: Trace
    report: RunReport
    opt: CoverResult


@dataclass
class Corpus:
    graphs: list[tuple[GeneratorSpec, WeightedGraph]]
    runs: list[CorpusRun]
    seconds: float


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    t0 = time.perf_counter()
    graphs = corpus_graphs()
    runs = []
    for spec, g in graphs:
        opt = brute_force_mwvc(g)
        for eps in CORPUS_EPS:
            for variant in Variant:
                params = ProtocolParams(eps, variant)
                trace, report = run_simulation(g, params)
                runs.append(CorpusRun(spec, g, params, trace, report, opt))
    return Corpus(graphs, runs, time.perf_counter() - t0)


# ------------------------------------------------- acceptance summary lines

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, title = mark.args
    passed = call.excinfo is None
    prev = _CRITERIA.get(num)
    ok = passed and (prev is None or prev[1] == "PASS")
    _CRITERIA[num] = (title, "PASS" if ok else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, verdict = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:>2} {verdict}: {title}")
