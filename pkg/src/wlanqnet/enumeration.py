"""Exact reference solver: direct enumeration of every network state.

Sums the literal product-form weight over all (n1, n2, n3) with
n1+n2+n3 = W. Quadratic in W and intentionally naive; it exists as ground
truth for the convolution and MVA routes, so clarity beats speed. Populations
are capped to keep the arithmetic honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .qnet import QnetSolution, QnetSpec

MAX_POPULATION = 30


@dataclass(frozen=True)
class StateWeight:
    """One network state and its unnormalized equilibrium weight."""

    state: tuple[int, int, int]
    weight: float


def state_weights(spec: QnetSpec) -> Iterator[StateWeight]:
    """Yield every state (n1, n2, n3), n1+n2+n3 = W, exactly once."""
    w = spec.population_w
    if w > MAX_POPULATION:
        raise ValueError(
            f"population {w} exceeds enumeration bound {MAX_POPULATION}")
    e1, e2, e3 = spec.visit_ratios
    y1, y2, y3 = e1 * spec.s_ap, e2 * spec.s_sta, e3 * spec.tau_rtpd
    # y^k and y^k/k! built incrementally; no large powers or factorials.
    pow1 = [1.0] * (w + 1)
    pow2 = [1.0] * (w + 1)
    isf3 = [1.0] * (w + 1)
    for k in range(1, w + 1):
        pow1[k] = pow1[k - 1] * y1
        pow2[k] = pow2[k - 1] * y2
        isf3[k] = isf3[k - 1] * y3 / k
    for n1 in range(w + 1):
        for n2 in range(w - n1 + 1):
            n3 = w - n1 - n2
            yield StateWeight(state=(n1, n2, n3),
                              weight=pow1[n1] * pow2[n2] * isf3[n3])


def _total_weight(spec: QnetSpec) -> float:
    return math.fsum(sw.weight for sw in state_weights(spec))


def enumerate_solution(spec: QnetSpec) -> QnetSolution:
    """Solve the network by brute-force summation over all states."""
    w = spec.population_w
    if w == 0:
        point = np.ones(1)
        return QnetSolution(t_h=0.0, n_ap=0.0, n_sta=0.0, n_rtpd=0.0,
                            g=np.ones(1), marginal_ap=point,
                            marginal_sta=point, marginal_rtpd=point)

    acc1 = [[] for _ in range(w + 1)]
    acc2 = [[] for _ in range(w + 1)]
    acc3 = [[] for _ in range(w + 1)]
    for sw in state_weights(spec):
        n1, n2, n3 = sw.state
        acc1[n1].append(sw.weight)
        acc2[n2].append(sw.weight)
        acc3[n3].append(sw.weight)
    m1 = np.array([math.fsum(bucket) for bucket in acc1])
    m2 = np.array([math.fsum(bucket) for bucket in acc2])
    m3 = np.array([math.fsum(bucket) for bucket in acc3])
    g_w = math.fsum(m1)
    m1 /= g_w
    m2 /= g_w
    m3 /= g_w
    n = np.arange(w + 1, dtype=float)
    n_ap = float(n @ m1)
    n_sta = float(n @ m2)
    n_rtpd = float(n @ m3)

    e1, e2, e3 = spec.visit_ratios
    if spec.tau_rtpd > 0 and e3 > 0:
        # Little's law at the delay center: each of its customers stays tau.
        t_h = e1 * n_rtpd / (e3 * spec.tau_rtpd)
    else:
        shrunk = QnetSpec(population_w=w - 1, s_ap=spec.s_ap, s_sta=spec.s_sta,
                          tau_rtpd=spec.tau_rtpd, visit_ratios=spec.visit_ratios)
        t_h = e1 * _total_weight(shrunk) / g_w
    return QnetSolution(t_h=t_h, n_ap=n_ap, n_sta=n_sta, n_rtpd=n_rtpd,
                        g=None, marginal_ap=m1, marginal_sta=m2,
                        marginal_rtpd=m3)
