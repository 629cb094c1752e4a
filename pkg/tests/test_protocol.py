from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrvc import Q
from lrvc.protocol import (
    ProtocolError,
    ProtocolParams,
    Status,
    Variant,
    absorb_budgets,
    close_iteration,
    finalize_iteration,
    grant_budgets,
    init_vertex,
    kv_parameter,
    make_requests,
)

LOCAL2 = ProtocolParams(Q(2), Variant.LOCAL)
CONGEST2 = ProtocolParams(Q(2), Variant.CONGEST)


def test_params_derive_eps_prime():
    assert LOCAL2.epsilon_prime == Q(1, 2)
    assert ProtocolParams("1/10").epsilon_prime == Q(1, 21)
    assert ProtocolParams(Q(1), "congest").variant is Variant.CONGEST


@pytest.mark.parametrize("eps", [0, -1, "0"])
def test_params_reject_nonpositive_eps(eps):
    with pytest.raises(ValueError):
        ProtocolParams(eps)


def test_params_reject_float_eps():
    with pytest.raises(TypeError):
        ProtocolParams(0.5)


def test_init_local():
    s = init_vertex(1, [7], LOCAL2)
    assert (s.vault, s.bank, s.status) == (Q(1, 2), Q(1, 2), Status.RUNNING)


def test_init_congest_halves_vault():
    assert init_vertex(1, [7], CONGEST2).vault == Q(1, 4)


def test_init_isolated_vertex_is_not_in_cover():
    assert init_vertex(5, [], LOCAL2).status is Status.NOT_IN_COVER


def test_init_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        init_vertex(0, [1], LOCAL2)


def test_requests_single_neighbor():
    assert make_requests(init_vertex(1, [3], LOCAL2)) == {3: Q(1, 2)}


def test_requests_split_evenly():
    req = make_requests(init_vertex(1, [1, 2, 3], LOCAL2))
    assert req == {1: Q(1, 6), 2: Q(1, 6), 3: Q(1, 6)}
    assert sum(req.values()) == Q(1, 2)


def test_congest_request_is_degree():
    s = init_vertex(1, range(1, 8), CONGEST2)
    assert make_requests(s) == 7
    assert s.requests_out[1] == Q(1, 28) == CONGEST2.congest_request(Q(1), 7)


def test_make_requests_requires_running():
    with pytest.raises(ProtocolError):
        make_requests(init_vertex(5, [], LOCAL2))


def test_grant_capped_by_bank():
    s = init_vertex(1, [9], LOCAL2)
    make_requests(s)
    (g,) = grant_budgets(s, [(9, 50)])
    assert (g.amount, g.full) == (Q(1, 2), False)
    assert s.bank == 0 and s.w_cur == Q(1, 2)


def test_grants_sequential_min():
    s = init_vertex(1, [1, 2, 3], LOCAL2)
    make_requests(s)
    grants = grant_budgets(s, [(1, Q(1, 5)), (2, Q(1, 5)), (3, Q(1, 5))])
    assert [g.amount for g in grants] == [Q(1, 5), Q(1, 5), Q(1, 10)]
    assert [g.full for g in grants] == [True, True, False]


def test_congest_quantized_grant():
    s = init_vertex(1, [1], CONGEST2)
    make_requests(s)
    s.bank = Q(3, 10)
    (g,) = grant_budgets(s, [(1, Q(1, 2))])
    assert (g.t, g.amount, g.full) == (1, Q(1, 4), False)
    assert g.to_message(0, 0, 1, Variant.CONGEST).payload == 1


def test_congest_full_grant_is_accept():
    s = init_vertex(1, [1], CONGEST2)
    make_requests(s)
    (g,) = grant_budgets(s, [(1, Q(1, 8))])
    assert g.full and g.to_message(0, 0, 1, Variant.CONGEST).kind.value == "BudgetAccept"


def test_symmetric_k2_absorb_reaches_zero():
    s = init_vertex(1, [1], LOCAL2)
    make_requests(s)
    absorb_budgets(s, {1: Q(1, 2)})
    assert s.w_cur == Q(1, 2)
    grant_budgets(s, [(1, Q(1, 2))])
    assert s.w_cur == 0 and s.live_neighbors == [1]


def test_short_payer_is_dropped():
    s = init_vertex(100, [0], LOCAL2)
    make_requests(s)
    absorb_budgets(s, {0: Q(1, 2)})
    assert s.live_neighbors == []


def test_full_payers_all_kept():
    s = init_vertex(6, [1, 2], LOCAL2)
    req = make_requests(s)
    absorb_budgets(s, dict(req))
    assert s.live_neighbors == [1, 2]


def test_absorb_rejects_mismatch_and_overgrant():
    s = init_vertex(6, [1, 2], LOCAL2)
    make_requests(s)
    with pytest.raises(ProtocolError):
        absorb_budgets(s, {1: Q(0)})
    with pytest.raises(ProtocolError):
        absorb_budgets(s, {1: Q(100), 2: Q(0)})


def test_finalize_joins_cover_and_notifies():
    s = init_vertex(1, [4, 5], LOCAL2)
    s.w_cur = Q(0)
    status, notify = finalize_iteration(s)
    assert status is Status.IN_COVER and notify == [4, 5]
    assert s.iteration == 1


def test_finalize_last_notice_gives_not_in_cover():
    s = init_vertex(100, [0], LOCAL2)
    s.w_cur = Q(99)
    status, notify = finalize_iteration(s, {0})
    assert s.threshold == 50
    assert status is Status.NOT_IN_COVER and notify == []


def test_threshold_is_inclusive():
    s = init_vertex(1, [3], LOCAL2)
    s.w_cur = Q(1, 2)
    assert close_iteration(s) == [3]
    assert s.status is Status.IN_COVER
    s = init_vertex(1, [3], LOCAL2)
    s.w_cur = Q(1, 2) + Q(1, 10**9)
    assert close_iteration(s) == [] and s.status is Status.RUNNING


def test_kv_small_degree():
    assert kv_parameter(16) == 17
    assert kv_parameter(1) == 2


def test_kv_exact_when_logs_are_integers():
    assert kv_parameter(256) == Q(8, 3)
    assert kv_parameter(65536) == 4


def test_kv_float_otherwise():
    k = kv_parameter(17)
    assert isinstance(k, float)
    assert k == pytest.approx(math.log2(17) / math.log2(math.log2(17)))


def test_kv_undefined_for_zero():
    with pytest.raises(ValueError):
        kv_parameter(0)


@settings(max_examples=300, deadline=None)
@given(
    w=st.fractions(min_value=Fraction(1, 100), max_value=100),
    eps=st.sampled_from([Q(1, 10), Q(1, 2), Q(1), Q(2), Q(7, 3)]),
    variant=st.sampled_from(list(Variant)),
    reqs=st.lists(st.fractions(min_value=Fraction(1, 1000), max_value=10), min_size=1, max_size=8),
)
def test_property_grants_respect_bank(w, eps, variant, reqs):
    params = ProtocolParams(eps, variant)
    s = init_vertex(w, range(1, 4), params)
    make_requests(s)
    bank = s.bank
    grants = grant_budgets(s, list(enumerate(reqs)))
    total = sum((g.amount for g in grants), Q(0))
    assert 0 <= total <= bank
    assert s.bank == bank - total and s.w_cur == w - total
    q = params.quantum(Q(w))
    for g, r in zip(grants, reqs):
        assert 0 <= g.amount <= r
        assert g.full == (g.amount == r)
        if variant is Variant.CONGEST and not g.full:
            assert g.amount == g.t * q and g.t <= math.floor(2 / params.epsilon_prime)
    if variant is Variant.LOCAL:
        assert total == min(sum(reqs, Q(0)), bank)
    # once a grant falls short every later one is short too
    shorts = [not g.full for g in grants]
    if True in shorts:
        first = shorts.index(True)
        assert all(shorts[first:]) or variant is Variant.CONGEST
