"""DCF service-time analysis for the two contenders.

The access point delivers TCP data frames with an RTS/CTS exchange; the
station returns TCP ACKs with basic access. Both are treated as permanently
backlogged for contention purposes, which yields a per-slot attempt
probability (``beta2``) via a renewal fixed point, and from it the mean MAC
service time seen by a packet at either node: backoff slots, collision
overhead, then the successful exchange.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import PhyMacParams


@dataclass(frozen=True)
class DcfServiceModel:
    """Derived MAC quantities for one parameter set (all times in seconds)."""

    ts_ap: float    # AP data-packet success time
    ts_sta: float   # STA TCP-ACK success time
    t_c: float      # channel time lost per collision
    beta2: float    # per-slot attempt probability
    alpha2: float   # P(a given node attempts alone in a slot) = beta2*(1-beta2)
    s_ap: float     # mean AP service time
    s_sta: float    # mean STA service time
    collision_mode: str = "paper-literal"
    backoff_mode: str = "paper"


def ts_ap(p: PhyMacParams) -> float:
    """Channel occupancy of one successful AP data delivery (RTS/CTS mode).

    Four exchange legs, each with preamble and PHY header: RTS and CTS and the
    final MAC ACK at the control rate, the data frame at the data rate,
    separated by three SIFS and terminated by DIFS.
    """
    leg_overhead = p.t_p + p.t_phy
    return (leg_overhead + 8 * p.l_rts / p.r_c + p.t_sifs
            + leg_overhead + 8 * p.l_cts / p.r_c + p.t_sifs
            + leg_overhead
            + 8 * (p.l_mac + p.l_iph + p.l_tcph + p.l_tcp) / p.r_d + p.t_sifs
            + leg_overhead + 8 * p.l_ack / p.r_c + p.t_difs)


def ts_sta(p: PhyMacParams) -> float:
    """Channel occupancy of one successful STA TCP-ACK delivery (basic access)."""
    leg_overhead = p.t_p + p.t_phy
    return (leg_overhead
            + 8 * (p.l_mac + p.l_iph + p.l_tcph + p.l_tcp_ack) / p.r_d
            + p.t_sifs
            + leg_overhead + 8 * p.l_ack / p.r_c + p.t_difs)


def t_collision(p: PhyMacParams, mode: str = "paper-literal") -> float:
    """Channel time lost when both nodes attempt in the same slot.

    ``paper-literal`` charges a frame body of MAC + IP + TCP-ACK + TCP payload
    at the data rate; ``ack-only`` drops the TCP payload so that only the
    TCP-ACK frame (the longer-lasting loser in this setup) is charged.
    """
    body = p.l_mac + p.l_iph + p.l_tcp_ack
    if mode == "paper-literal":
        body += p.l_tcp
    elif mode != "ack-only":
        raise ValueError(f"unknown collision mode: {mode!r}")
    return p.t_p + p.t_phy + 8 * body / p.r_d + p.t_eifs


def mean_backoff(i: int, p: PhyMacParams, mode: str = "paper") -> float:
    """Mean backoff in slots drawn before the i-th transmission attempt.

    ``paper`` doubles the window itself, mean (min(2^i*CWmin, CWmax)+1)/2;
    ``standard`` is the 802.11 rule, mean of uniform {0..CW} with
    CW = min(2^(i-1)*(CWmin+1)-1, CWmax). Both freeze at CWmax.
    """
    if i < 1:
        raise ValueError(f"attempt index must be >= 1, got {i}")
    if mode == "paper":
        w = p.cw_min
        for _ in range(i):
            w *= 2
            if w >= p.cw_max:
                w = p.cw_max
                break
        return (w + 1) / 2
    if mode == "standard":
        w = p.cw_min
        for _ in range(i - 1):
            w = 2 * w + 1
            if w >= p.cw_max:
                w = p.cw_max
                break
        return w / 2
    raise ValueError(f"unknown backoff mode: {mode!r}")


def _cap_attempt(p: PhyMacParams, mode: str) -> int:
    """First attempt index whose contention window has frozen at CWmax."""
    i = 1
    if mode == "paper":
        while (1 << i) * p.cw_min < p.cw_max:
            i += 1
    else:
        while (1 << (i - 1)) * (p.cw_min + 1) < p.cw_max + 1:
            i += 1
    return i


def attempt_rate_map(gamma: float, p: PhyMacParams, mode: str = "paper") -> float:
    """Attempt probability implied by a conditional collision probability.

    Renewal argument: a packet needs 1/(1-gamma) attempts on average and sits
    through sum_i EB^i * gamma^(i-1) backoff slots, so attempts per backoff
    slot are 1 / ((1-gamma) * sum_i EB^i gamma^(i-1)). The geometric tail
    beyond the frozen window is summed in closed form.
    """
    m = _cap_attempt(p, mode)
    head = sum(mean_backoff(i, p, mode) * gamma ** (i - 1) for i in range(1, m + 1))
    denom = (1.0 - gamma) * head + mean_backoff(m, p, mode) * gamma ** m
    return 1.0 / denom


def solve_beta2(p: PhyMacParams, tol: float = 1e-9, backoff_mode: str = "paper") -> float:
    """Per-slot attempt probability of each of two saturated contenders.

    Solves beta = attempt_rate_map(beta) by bisection on (0, 1]: with two
    nodes, each attempt collides exactly when the rival attempts in the same
    slot, so the conditional collision probability equals beta itself.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = lambda b: attempt_rate_map(b, p, backoff_mode)
    if 1.0 - g(1.0) <= 0.0:
        return 1.0  # mean windows below one slot; attempts saturate
    lo, hi = 0.0, 1.0
    width_goal = min(tol * 1e-3, 1e-13)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < width_goal:
            break
    beta = 0.5 * (lo + hi)
    if abs(beta - g(beta)) >= tol:
        raise RuntimeError(
            f"attempt-probability fixed point did not converge (residual "
            f"{abs(beta - g(beta)):.3e} >= tol {tol:.3e})")
    return beta


def alpha2(beta: float) -> float:
    """Probability that a given node attempts in a slot and the rival does not."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    return beta * (1.0 - beta)


def service_time_after_k(k: int, t_success: float, p: PhyMacParams,
                         collision_mode: str = "paper-literal",
                         backoff_mode: str = "paper") -> float:
    """Service time of a packet that collides k times before succeeding.

    k+1 backoff stages (in slots, converted via the slot time), k collision
    penalties, then the successful exchange.
    """
    if k < 0:
        raise ValueError(f"collision count must be >= 0, got {k}")
    slots = sum(mean_backoff(i, p, backoff_mode) for i in range(1, k + 2))
    return p.slot * slots + k * t_collision(p, collision_mode) + t_success


def mean_service_time(t_success: float, alpha2: float, p: PhyMacParams,
                      collision_mode: str = "paper-literal",
                      backoff_mode: str = "paper",
                      tail_eps: float = 1e-12) -> float:
    """Mean MAC service time when each attempt succeeds with probability alpha2.

    Geometric mixture over the collision count k:
    sum_k service_time_after_k(k) * (1-alpha2)^k * alpha2, truncated once the
    remaining tail mass (1-alpha2)^(k+1) drops below tail_eps. The discarded
    remainder is bounded by mean_service_time_tail_bound.
    """
    value, _ = _mean_service_with_bound(t_success, alpha2, p, collision_mode,
                                        backoff_mode, tail_eps)
    return value


def mean_service_time_tail_bound(t_success: float, alpha2: float, p: PhyMacParams,
                                 collision_mode: str = "paper-literal",
                                 backoff_mode: str = "paper",
                                 tail_eps: float = 1e-12) -> float:
    """Upper bound on the series mass discarded by mean_service_time."""
    _, bound = _mean_service_with_bound(t_success, alpha2, p, collision_mode,
                                        backoff_mode, tail_eps)
    return bound


_MAX_SERIES_TERMS = 5_000_000


def _mean_service_with_bound(t_success, alpha2, p, collision_mode, backoff_mode,
                             tail_eps):
    if not 0.0 <= alpha2 <= 1.0:
        raise ValueError(f"alpha2 must lie in [0, 1], got {alpha2}")
    if alpha2 == 0.0:
        raise ValueError("alpha2 = 0 makes the mean service time diverge")
    if tail_eps <= 0:
        raise ValueError("tail_eps must be positive")
    t_c = t_collision(p, collision_mode)
    if alpha2 == 1.0:
        return (p.slot * mean_backoff(1, p, backoff_mode) + t_success, 0.0)

    q = 1.0 - alpha2
    if q >= 1.0:  # alpha2 below float resolution
        raise ValueError("alpha2 = 0 makes the mean service time diverge")
    # smallest K with tail mass q^(K+1) < tail_eps
    k_max = max(0, math.floor(math.log(tail_eps) / math.log(q)))
    if k_max > _MAX_SERIES_TERMS:
        raise ValueError(
            f"alpha2 = {alpha2} needs {k_max} series terms; success "
            "probability too small for a meaningful mean")

    cap_i = _cap_attempt(p, backoff_mode)
    cap = mean_backoff(cap_i, p, backoff_mode)
    total = 0.0
    cum_slots = 0.0
    weight = alpha2       # P(K = k)
    for k in range(k_max + 1):
        i = k + 1
        cum_slots += mean_backoff(i, p, backoff_mode) if i < cap_i else cap
        total += (p.slot * cum_slots + k * t_c + t_success) * weight
        weight *= q
    tail_mass = q ** (k_max + 1)

    # Discarded mass: sum_{j>k_max} (A + B*j) q^j alpha2 with per-term growth
    # bounded by one frozen backoff window plus one collision per extra stage.
    a = t_success + p.slot * (cum_slots + cap)
    b = t_c + p.slot * cap
    bound = tail_mass * (a + b * (k_max + 1) + b * q / alpha2)
    return total, bound


def build_service_model(p: PhyMacParams,
                        collision_mode: str = "paper-literal",
                        backoff_mode: str = "paper",
                        tol: float = 1e-9,
                        tail_eps: float = 1e-12) -> DcfServiceModel:
    """Assemble the full derived-quantity set for one parameter set."""
    beta = solve_beta2(p, tol, backoff_mode)
    # A tagged attempt fails exactly when the rival attempts in the same slot,
    # so the per-attempt success probability feeding the geometric collision
    # count is 1 - beta (beta itself is the conditional collision probability).
    attempt_success = 1.0 - beta
    s_ap = mean_service_time(ts_ap(p), attempt_success, p, collision_mode,
                             backoff_mode, tail_eps)
    s_sta = mean_service_time(ts_sta(p), attempt_success, p, collision_mode,
                              backoff_mode, tail_eps)
    return DcfServiceModel(
        ts_ap=ts_ap(p),
        ts_sta=ts_sta(p),
        t_c=t_collision(p, collision_mode),
        beta2=beta,
        alpha2=alpha2(beta),
        s_ap=s_ap,
        s_sta=s_sta,
        collision_mode=collision_mode,
        backoff_mode=backoff_mode,
    )
