import math
import random

import pytest

from wlanqnet.enumeration import (MAX_POPULATION, StateWeight,
                                  enumerate_solution, state_weights)
from wlanqnet.qnet import (QnetSpec, normalization_constants,
                           solve_convolution, solve_mva)

from conftest import random_qnet_spec

UNIT = (1.0, 1.0, 1.0)


def test_states_enumerated_once_each():
    spec = QnetSpec(population_w=4, s_ap=1, s_sta=1, tau_rtpd=1, visit_ratios=UNIT)
    states = [sw.state for sw in state_weights(spec)]
    assert len(states) == len(set(states)) == 15  # (W+1)(W+2)/2
    assert all(sum(s) == 4 for s in states)


def test_hand_enumerated_weights():
    spec = QnetSpec(population_w=2, s_ap=1, s_sta=1, tau_rtpd=0, visit_ratios=UNIT)
    weights = {sw.state: sw.weight for sw in state_weights(spec)}
    assert weights[(2, 0, 0)] == 1
    assert weights[(1, 1, 0)] == 1
    assert weights[(0, 2, 0)] == 1
    assert weights[(0, 0, 2)] == 0
    assert weights[(1, 0, 1)] == 0


def test_single_customer_uniform():
    sol = enumerate_solution(QnetSpec(population_w=1, s_ap=1, s_sta=1,
                                      tau_rtpd=1, visit_ratios=UNIT))
    for n in (sol.n_ap, sol.n_sta, sol.n_rtpd):
        assert n == pytest.approx(1 / 3, rel=1e-14)


def test_total_weight_matches_normalization_constant():
    spec = QnetSpec(population_w=3, s_ap=1, s_sta=1, tau_rtpd=1, visit_ratios=UNIT)
    total = math.fsum(sw.weight for sw in state_weights(spec))
    assert total == pytest.approx(49 / 6, rel=1e-14)
    assert total == pytest.approx(normalization_constants(spec)[3], rel=1e-12)


def test_population_bound():
    big = QnetSpec(population_w=MAX_POPULATION + 1, s_ap=1, s_sta=1, tau_rtpd=1)
    with pytest.raises(ValueError, match="enumeration bound"):
        enumerate_solution(big)


def test_solvers_match_enumeration(rng):
    for _ in range(25):
        spec = random_qnet_spec(rng, w_max=20)
        exact = enumerate_solution(spec)
        conv = solve_convolution(spec)
        mva = solve_mva(spec)
        assert conv.t_h == pytest.approx(exact.t_h, rel=1e-10)
        assert mva.t_h == pytest.approx(exact.t_h, rel=1e-10)
        for got, want in ((conv.n_ap, exact.n_ap), (conv.n_sta, exact.n_sta),
                          (conv.n_rtpd, exact.n_rtpd), (mva.n_ap, exact.n_ap)):
            assert got == pytest.approx(want, rel=1e-10, abs=1e-14)
        assert conv.marginal_ap == pytest.approx(exact.marginal_ap,
                                                 rel=1e-10, abs=1e-300)
        assert conv.marginal_rtpd == pytest.approx(exact.marginal_rtpd,
                                                   rel=1e-10, abs=1e-300)


def test_zero_delay_throughput_route():
    # with tau=0 the throughput falls back to two enumerations
    spec = QnetSpec(population_w=6, s_ap=2e-3, s_sta=1e-3, tau_rtpd=0)
    exact = enumerate_solution(spec)
    conv = solve_convolution(spec)
    assert exact.t_h == pytest.approx(conv.t_h, rel=1e-12)
    assert exact.n_rtpd == pytest.approx(0.0, abs=1e-15)


def test_state_weight_is_plain_record():
    sw = StateWeight(state=(1, 2, 3), weight=0.5)
    assert sw.state == (1, 2, 3) and sw.weight == 0.5
