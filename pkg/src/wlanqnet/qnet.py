"""Closed 3-center product-form network: two FCFS queues plus one delay center.

Center 1 is the AP transmit queue, center 2 the STA transmit queue, center 3
the propagation pipe, visited cyclically by a fixed population of W packets
(the TCP receive window). Two independent solution routes are provided: the
normalization-constant convolution (with marginal distributions) and the exact
mean value analysis recursion (means only). The delay center uses the
infinite-server factor y^n/n!, to which a deterministic delay is equivalent in
a product-form network (insensitivity to the service distribution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dcf import DcfServiceModel, build_service_model
from .params import Scenario

DEFAULT_VISIT_RATIOS = (1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class QnetSpec:
    """Population, per-center mean service demands and visit ratios."""

    population_w: int
    s_ap: float      # mean service time, center 1 (s)
    s_sta: float     # mean service time, center 2 (s)
    tau_rtpd: float  # delay-center mean (s)
    visit_ratios: tuple[float, float, float] = DEFAULT_VISIT_RATIOS

    def __post_init__(self):
        if self.population_w < 0:
            raise ValueError("population must be >= 0")
        if self.s_ap <= 0 or self.s_sta <= 0:
            raise ValueError("FCFS service times must be strictly positive")
        if self.tau_rtpd < 0:
            raise ValueError("delay must be nonnegative")
        e = self.visit_ratios
        if len(e) != 3 or any(v < 0 for v in e) or not any(v > 0 for v in e):
            raise ValueError("visit ratios must be nonnegative, not all zero")


@dataclass(frozen=True)
class QnetSolution:
    """Equilibrium throughput, mean occupancies and (optionally) marginals."""

    t_h: float       # AP packet throughput, packets/s
    n_ap: float
    n_sta: float
    n_rtpd: float
    g: np.ndarray | None = None         # normalization constants G(0..W)
    log_g: np.ndarray | None = None     # log G, safe for large populations
    marginal_ap: np.ndarray | None = None
    marginal_sta: np.ndarray | None = None
    marginal_rtpd: np.ndarray | None = None


def _factor_seqs(spec: QnetSpec):
    """Per-center factor sequences as (mantissa, log-offset) pairs.

    A sequence value is mantissa[n] * exp(offset[n]). FCFS factors y^n and
    the delay factor y^n/n! span far more dynamic range than a double for
    large populations, so every downstream combination keeps a per-level
    offset and renormalizes the mantissa level by level.
    """
    w = spec.population_w
    e1, e2, e3 = spec.visit_ratios
    y1, y2, y3 = e1 * spec.s_ap, e2 * spec.s_sta, e3 * spec.tau_rtpd
    if max(y1, y2, y3) <= 0.0:
        raise ValueError("all per-center service demands are zero")
    n = np.arange(w + 1, dtype=float)
    ones = np.ones(w + 1)

    def pow_offsets(y):
        # log of y^n, with y = 0 meaning a point mass at level 0
        if y > 0.0:
            return n * math.log(y)
        c = np.full(w + 1, -np.inf)
        c[0] = 0.0
        return c

    lgamma = np.array([math.lgamma(k + 1) for k in range(w + 1)])
    return ((ones, pow_offsets(y1)), (ones.copy(), pow_offsets(y2)),
            (ones.copy(), pow_offsets(y3) - lgamma))


def _conv_scaled(a, b, upto: int):
    """Truncated convolution of two (mantissa, offset) sequences.

    Each output level is summed in linear space after shifting by its own
    maximum offset, so precision is that of an ordinary positive sum no
    matter how wide the overall range is.
    """
    va, ca = a
    vb, cb = b
    out_v = np.empty(upto + 1)
    out_c = np.empty(upto + 1)
    neg_inf = float("-inf")
    for n in range(upto + 1):
        s = ca[: n + 1] + cb[n::-1]
        m = s.max()
        if m == neg_inf:
            out_v[n] = 0.0
            out_c[n] = neg_inf
            continue
        out_v[n] = float(np.sum(va[: n + 1] * vb[n::-1] * np.exp(s - m)))
        out_c[n] = m
    return out_v, out_c


def _values(seq) -> np.ndarray:
    v, c = seq
    with np.errstate(over="ignore"):
        return v * np.exp(c)


def _log_values(seq) -> np.ndarray:
    v, c = seq
    with np.errstate(divide="ignore"):
        return np.log(v) + c


def normalization_constants(spec: QnetSpec) -> np.ndarray:
    """G(0..W): total unnormalized product-form weight per population size.

    Computed with per-level rescaling; the returned plain-float values can
    still overflow for extreme populations, in which case solve_convolution
    (which only ever uses ratios) remains exact and log_g holds the result.
    """
    w = spec.population_w
    if w == 0:
        return np.ones(1)
    f1, f2, f3 = _factor_seqs(spec)
    return _values(_conv_scaled(_conv_scaled(f1, f2, w), f3, w))


def _ratio(seq, num: int, den: int) -> float:
    v, c = seq
    return float(v[num] / v[den] * math.exp(c[num] - c[den]))


def _marginal(own, comp, g, w: int) -> np.ndarray:
    vo, co = own
    vc, cc = comp
    vg, cg = g
    return vo * vc[::-1] / vg[w] * np.exp(co + cc[::-1] - cg[w])


def solve_convolution(spec: QnetSpec) -> QnetSolution:
    """Full product-form solution via the convolution algorithm."""
    w = spec.population_w
    if w == 0:
        point = np.ones(1)
        return QnetSolution(t_h=0.0, n_ap=0.0, n_sta=0.0, n_rtpd=0.0,
                            g=np.ones(1), log_g=np.zeros(1),
                            marginal_ap=point, marginal_sta=point,
                            marginal_rtpd=point)
    f1, f2, f3 = _factor_seqs(spec)
    g12 = _conv_scaled(f1, f2, w)
    g13 = _conv_scaled(f1, f3, w)
    g23 = _conv_scaled(f2, f3, w)
    g_all = _conv_scaled(g12, f3, w)

    e1 = spec.visit_ratios[0]
    t_h = e1 * _ratio(g_all, w - 1, w)

    marginal_ap = _marginal(f1, g23, g_all, w)
    marginal_sta = _marginal(f2, g13, g_all, w)
    marginal_rtpd = _marginal(f3, g12, g_all, w)

    n = np.arange(w + 1, dtype=float)
    return QnetSolution(
        t_h=t_h,
        n_ap=float(n @ marginal_ap),
        n_sta=float(n @ marginal_sta),
        n_rtpd=float(n @ marginal_rtpd),
        g=_values(g_all),
        log_g=_log_values(g_all),
        marginal_ap=marginal_ap,
        marginal_sta=marginal_sta,
        marginal_rtpd=marginal_rtpd,
    )


def solve_mva(spec: QnetSpec) -> QnetSolution:
    """Exact mean value analysis; independent route to the same means.

    Unit visit ratios are used internally so the recursion throughput is the
    AP packet rate directly; by visit-ratio scaling invariance this matches
    solve_convolution for any spec.visit_ratios.
    """
    w = spec.population_w
    if w == 0:
        return QnetSolution(t_h=0.0, n_ap=0.0, n_sta=0.0, n_rtpd=0.0)
    n1 = n2 = 0.0
    x = 0.0
    for k in range(1, w + 1):
        r1 = spec.s_ap * (1.0 + n1)
        r2 = spec.s_sta * (1.0 + n2)
        x = k / (r1 + r2 + spec.tau_rtpd)
        n1 = x * r1
        n2 = x * r2
    return QnetSolution(t_h=x, n_ap=n1, n_sta=n2, n_rtpd=x * spec.tau_rtpd)


def marginal_distribution(spec: QnetSpec, center: int) -> np.ndarray:
    """Occupancy pmf over {0..W} for one center (1=AP, 2=STA, 3=delay)."""
    if center not in (1, 2, 3):
        raise ValueError(f"center must be 1, 2 or 3, got {center}")
    w = spec.population_w
    if w == 0:
        return np.ones(1)
    f1, f2, f3 = _factor_seqs(spec)
    if center == 1:
        own, comp = f1, _conv_scaled(f2, f3, w)
    elif center == 2:
        own, comp = f2, _conv_scaled(f1, f3, w)
    else:
        own, comp = f3, _conv_scaled(f1, f2, w)
    g_all = _conv_scaled(_conv_scaled(f1, f2, w), f3, w)
    return _marginal(own, comp, g_all, w)


def spec_for_scenario(scn: Scenario, model: DcfServiceModel | None = None) -> QnetSpec:
    """Build the network spec for a scenario from its MAC service model."""
    if model is None:
        model = build_service_model(scn.params, scn.collision_mode, scn.backoff_mode)
    return QnetSpec(population_w=scn.window_w, s_ap=model.s_ap,
                    s_sta=model.s_sta, tau_rtpd=scn.tau_rtpd)


def analyze_scenario(scn: Scenario,
                     model: DcfServiceModel | None = None) -> tuple[DcfServiceModel, QnetSolution]:
    """End-to-end analysis: MAC service model, then the network solution."""
    if model is None:
        model = build_service_model(scn.params, scn.collision_mode, scn.backoff_mode)
    return model, solve_convolution(spec_for_scenario(scn, model))
