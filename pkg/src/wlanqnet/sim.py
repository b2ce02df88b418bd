"""Event-driven simulation of the closed-loop download.

The channel alternates idle contention periods and busy periods. During an
idle period time advances on a slot grid; every backlogged node holds a
backoff counter (slots remaining until it transmits, measured from the start
of the period) drawn uniformly from {0..CW} per standard 802.11 rules, with
CW doubling on collision and resetting on success. A lone expiry is a success
occupying the full exchange time; a simultaneous expiry is a collision
occupying the longer of the two colliding frames plus EIFS, after which both
nodes redraw. A delivered data packet immediately enqueues a TCP ACK at the
station; a delivered ACK re-enters the AP queue after the round-trip
propagation delay, keeping exactly W packets in circulation.

The simulator always uses standard 802.11 backoff draws regardless of the
analysis backoff convention, so disagreement between the two is a measurable
finding rather than a shared assumption.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dcf import ts_ap, ts_sta
from .params import Scenario


@dataclass(slots=True)
class NodeState:
    """Per-node contention state.

    ``backoff_counter`` is the number of idle slots remaining before this
    node transmits, measured from the start of the current idle period;
    ``None`` while the node has nothing queued. The contention window for a
    draw is min(2^stage * (CWmin+1) - 1, CWmax); the stage resets to 0 on
    success and increments on collision.
    """

    role: str
    queue_len: int
    backoff_counter: int | None = None
    cw_stage: int = 0
    attempting: bool = False


def contention_window(stage: int, cw_min: int, cw_max: int) -> int:
    if stage < 0:
        raise ValueError("stage must be >= 0")
    if stage > 26:  # window frozen long before; avoid giant shifts
        return cw_max
    return min(((cw_min + 1) << stage) - 1, cw_max)


@dataclass(frozen=True)
class ReplicationResult:
    """Observables of one independent simulation run."""

    throughput_pps: float
    n_ap: float
    n_sta: float
    n_flight: float
    collisions: int
    delivered: int
    horizon_s: float
    warmup_s: float
    seed: int


@dataclass(frozen=True)
class SimResult:
    """Replication-averaged observables with Student-t 95% intervals."""

    throughput_pps: float
    throughput_ci: tuple[float, float]
    n_ap: float
    n_ap_ci: tuple[float, float]
    n_sta: float
    n_sta_ci: tuple[float, float]
    n_flight: float
    n_flight_ci: tuple[float, float]
    replications: int
    sim_time: float
    warmup_s: float
    seed: int
    collisions: int
    runs: tuple[ReplicationResult, ...]


def run_replication(scn: Scenario, seed: int, horizon_s: float = 300.0,
                    warmup_s: float | None = None, trace=None) -> ReplicationResult:
    """Simulate one seeded replication and return time-averaged observables."""
    if horizon_s <= 0:
        raise ValueError("horizon must be positive")
    if warmup_s is None:
        warmup_s = 0.1 * horizon_s
    if not 0 <= warmup_s < horizon_s:
        raise ValueError("warmup must lie inside the horizon")

    p = scn.params
    slot = p.slot
    cw_min, cw_max = p.cw_min, p.cw_max
    t_data = ts_ap(p)
    t_ack = ts_sta(p)
    # Colliding emissions: the AP leads with its RTS, the STA with its whole
    # ACK frame; the channel is unusable for the longer of the two, then EIFS.
    rts_air = p.t_p + p.t_phy + 8 * p.l_rts / p.r_c
    ack_air = p.t_p + p.t_phy + 8 * (p.l_mac + p.l_iph + p.l_tcph + p.l_tcp_ack) / p.r_d
    t_coll = max(rts_air, ack_air) + p.t_eifs
    tau = scn.tau_rtpd
    w = scn.window_w

    rng = random.Random(seed)
    randint = rng.randint
    ap = NodeState(role="AP", queue_len=w)
    sta = NodeState(role="STA", queue_len=0)
    ap.backoff_counter = randint(0, cw_min)
    in_flight: deque[float] = deque()

    anchor = 0.0          # slot 0 of the current idle period starts here
    t_mark = 0.0          # integrals are complete up to this instant
    area_ap = area_sta = area_flight = 0.0
    delivered = 0
    collisions = 0
    inf = float("inf")

    def account(t_now: float):
        nonlocal t_mark, area_ap, area_sta, area_flight
        lo = t_mark if t_mark > warmup_s else warmup_s
        hi = t_now if t_now < horizon_s else horizon_s
        if hi > lo:
            span = hi - lo
            area_ap += span * ap.queue_len
            area_sta += span * sta.queue_len
            area_flight += span * len(in_flight)
        t_mark = t_now

    def emit(t_now: float, kind: str, node: str):
        trace.write(f"{t_now:.9f},{kind},{node},{ap.queue_len},"
                    f"{sta.queue_len},{len(in_flight)}\n")

    def drain_arrivals(upto: float):
        # Arrivals landing inside a busy period: enqueue at their true time;
        # the AP joins the next contention period (activation handled later).
        while in_flight and in_flight[0] <= upto:
            t_a = in_flight[0]
            account(t_a)
            in_flight.popleft()
            ap.queue_len += 1
            if trace is not None:
                emit(t_a, "arrival", "AP")

    while True:
        e_ap = ap.backoff_counter
        e_sta = sta.backoff_counter
        if e_ap is not None and e_sta is not None:
            tx_slot = e_ap if e_ap < e_sta else e_sta
        elif e_ap is not None:
            tx_slot = e_ap
        elif e_sta is not None:
            tx_slot = e_sta
        else:
            tx_slot = None
        tx_time = anchor + tx_slot * slot if tx_slot is not None else inf
        arr_time = in_flight[0] if in_flight else inf
        if arr_time > tx_time and tx_time >= horizon_s:
            account(horizon_s)
            break
        if arr_time <= tx_time:
            if arr_time >= horizon_s:
                account(horizon_s)
                break
            # Arrival with the channel idle: it may join mid-period, aligned
            # to the next slot boundary of the running grid.
            account(arr_time)
            in_flight.popleft()
            ap.queue_len += 1
            if ap.backoff_counter is None:
                ap.cw_stage = 0
                if sta.backoff_counter is None:
                    anchor = arr_time
                    start = 0
                else:
                    start = math.ceil((arr_time - anchor) / slot)
                    if start < 0:
                        start = 0
                ap.backoff_counter = start + randint(0, cw_min)
            if trace is not None:
                emit(arr_time, "arrival", "AP")
            continue

        ap_fires = e_ap == tx_slot
        sta_fires = e_sta == tx_slot
        if ap_fires and sta_fires:
            ap.attempting = sta.attempting = True
            collisions += 1
            busy_end = tx_time + t_coll
            drain_arrivals(busy_end)
            anchor = busy_end
            ap.cw_stage += 1
            sta.cw_stage += 1
            ap.backoff_counter = randint(0, contention_window(ap.cw_stage, cw_min, cw_max))
            sta.backoff_counter = randint(0, contention_window(sta.cw_stage, cw_min, cw_max))
            ap.attempting = sta.attempting = False
            if trace is not None:
                emit(tx_time, "collision", "both")
        elif ap_fires:
            ap.attempting = True
            busy_end = tx_time + t_data
            drain_arrivals(busy_end)
            account(busy_end)
            ap.queue_len -= 1
            sta.queue_len += 1  # ACK generated with no delay
            if warmup_s < busy_end <= horizon_s:
                delivered += 1
            anchor = busy_end
            ap.cw_stage = 0
            ap.backoff_counter = randint(0, cw_min) if ap.queue_len > 0 else None
            if sta.backoff_counter is not None:
                sta.backoff_counter -= tx_slot  # keeps its residual countdown
            elif sta.queue_len > 0:
                sta.cw_stage = 0
                sta.backoff_counter = randint(0, cw_min)
            ap.attempting = False
            if trace is not None:
                emit(busy_end, "success", "AP")
        else:
            sta.attempting = True
            busy_end = tx_time + t_ack
            drain_arrivals(busy_end)
            account(busy_end)
            sta.queue_len -= 1
            in_flight.append(busy_end + tau)
            anchor = busy_end
            sta.cw_stage = 0
            sta.backoff_counter = randint(0, cw_min) if sta.queue_len > 0 else None
            if ap.backoff_counter is not None:
                ap.backoff_counter -= tx_slot
            elif ap.queue_len > 0:
                ap.cw_stage = 0
                ap.backoff_counter = randint(0, cw_min)
            sta.attempting = False
            if trace is not None:
                emit(busy_end, "success", "STA")
        assert ap.queue_len + sta.queue_len + len(in_flight) == w

    span = horizon_s - warmup_s
    return ReplicationResult(
        throughput_pps=delivered / span,
        n_ap=area_ap / span,
        n_sta=area_sta / span,
        n_flight=area_flight / span,
        collisions=collisions,
        delivered=delivered,
        horizon_s=horizon_s,
        warmup_s=warmup_s,
        seed=seed,
    )


def replication_seed(base_seed: int, index: int) -> int:
    """Deterministic per-replication seed stream."""
    return (base_seed << 20) + index


def _mean_ci(values: list[float], quantile: float) -> tuple[float, tuple[float, float]]:
    mean = float(np.mean(values))
    half = quantile * float(np.std(values, ddof=1)) / math.sqrt(len(values))
    return mean, (mean - half, mean + half)


def run_sim(scn: Scenario, replications: int, base_seed: int,
            sim_time_s: float = 300.0, warmup_s: float | None = None,
            trace=None) -> SimResult:
    """Run independent replications and aggregate with 95% Student-t CIs.

    An optional trace stream applies to the first replication only.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications for a confidence interval")
    runs = []
    for i in range(replications):
        runs.append(run_replication(scn, replication_seed(base_seed, i),
                                    horizon_s=sim_time_s, warmup_s=warmup_s,
                                    trace=trace if i == 0 else None))
    q = float(stats.t.ppf(0.975, replications - 1))
    x, x_ci = _mean_ci([r.throughput_pps for r in runs], q)
    n1, n1_ci = _mean_ci([r.n_ap for r in runs], q)
    n2, n2_ci = _mean_ci([r.n_sta for r in runs], q)
    n3, n3_ci = _mean_ci([r.n_flight for r in runs], q)
    return SimResult(
        throughput_pps=x, throughput_ci=x_ci,
        n_ap=n1, n_ap_ci=n1_ci,
        n_sta=n2, n_sta_ci=n2_ci,
        n_flight=n3, n_flight_ci=n3_ci,
        replications=replications,
        sim_time=sim_time_s,
        warmup_s=runs[0].warmup_s,
        seed=base_seed,
        collisions=sum(r.collisions for r in runs),
        runs=tuple(runs),
    )
