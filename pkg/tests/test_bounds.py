from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrvc import Q
from lrvc.bounds import (
    asymptotic_envelope,
    bounds_table,
    feasible_k_Delta,
    feasible_k_n,
    iteration_cap,
    kmw_delta_from_Delta,
    kmw_delta_from_n,
    round_bound,
)


def test_round_bound_degree_one_is_exact():
    assert round_bound(1, 2) == 4
    assert isinstance(round_bound(1, 2), type(Q(1)))
    assert iteration_cap(1, 2) == 5


def test_round_bound_degree_sixteen():
    assert round_bound(16, 2) == pytest.approx(34 + 4 / math.log2(17))
    assert round_bound(16, 2) == pytest.approx(34.98, abs=0.01)


def test_round_bound_degree_256():
    assert round_bound(256, 2) == pytest.approx(16 / 3 + 8 / math.log2(8 / 3))
    assert round_bound(256, 2) == pytest.approx(10.99, abs=0.01)


def test_round_bound_exact_when_logs_are_integers():
    # d = 65536: K = 4, log2 d = 16, log2 K = 2
    assert round_bound(65536, 1) == Q(4 * 3) + 8


def test_round_bound_rejects_bad_input():
    with pytest.raises(ValueError):
        round_bound(0, 1)
    with pytest.raises(ValueError):
        round_bound(3, 0)


def test_envelope_covers_bound_beyond_sixteen():
    for d in [17, 100, 1000, 4096, 10**5, 2**20]:
        for eps in [Q(1, 100), Q(1, 10), Q(1), Q(4)]:
            assert round_bound(d, eps) <= asymptotic_envelope(d, eps)
    with pytest.raises(ValueError):
        asymptotic_envelope(16, 1)


@settings(max_examples=300, deadline=None)
@given(st.integers(17, 2**20), st.fractions(min_value=Fraction(1, 1000), max_value=4))
def test_property_envelope(d, eps):
    assert round_bound(d, eps) <= asymptotic_envelope(d, eps, c=16)


def test_kmw_from_n_examples():
    assert kmw_delta_from_n(64, 2) == Q(5, 2)
    assert kmw_delta_from_n(1000, 1) == Q(497, 2)
    for k in range(1, 8):
        assert kmw_delta_from_n(2 * k**3 + 4 * k, k) == 0


def test_kmw_from_delta_examples():
    assert kmw_delta_from_Delta(16, 3) == Q(5, 2)
    assert kmw_delta_from_Delta(20, 1) == Q(19, 2)
    for k in range(1, 8):
        assert kmw_delta_from_Delta(Q(k * (k + 1), 2), k) == 0


def test_kmw_rejects_bad_k():
    with pytest.raises(ValueError):
        kmw_delta_from_n(10, 0)


def test_feasible_k_n_examples():
    assert feasible_k_n(Q(1, 4), 100) == 3
    assert feasible_k_n(1, Q(3, 2)) == 1
    assert feasible_k_n(Q(1, 100), 1) == 0


def test_feasible_k_delta_examples():
    assert feasible_k_Delta(Q(1, 2), 20) == 4
    assert feasible_k_Delta(1, 1) == 1
    assert feasible_k_Delta(Q(1, 10), 1) == 0


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 400), st.integers(1, 400), st.integers(1, 2000))
def test_property_feasibility_is_the_inequality(eps_num, eps_den, lg):
    eps = Q(eps_num, eps_den)
    k = feasible_k_n(eps, lg)
    assert k == 0 or 2 * k**3 + 4 * k <= 4 * eps * lg
    assert 2 * (k + 1) ** 3 + 4 * (k + 1) > 4 * eps * lg
    k = feasible_k_Delta(eps, lg)
    assert k == 0 or k * (k + 1) <= 2 * eps * lg
    assert (k + 1) * (k + 2) > 2 * eps * lg


def test_bounds_table_rows():
    rows = bounds_table(range(1, 6), Q(1, 4), log2n=100)
    assert [r["feasible_n"] for r in rows] == [True, True, True, False, False]
    (row,) = bounds_table(range(3, 4), Q(1, 4), log2Delta=16)
    assert row["log2_delta_Delta"] == "5/2" and row["log2_delta_Delta_float"] == 2.5
    assert bounds_table(range(0), 1, log2n=5) == []
