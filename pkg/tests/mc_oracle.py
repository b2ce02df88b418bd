"""Monte-Carlo sampler of the backoff/collision renewal process.

Independent oracle for dcf.mean_service_time: instead of summing the
geometric mixture analytically, it draws actual uniform backoffs per attempt
and a Bernoulli collision per attempt, so it exercises the backoff means, the
window cap and the geometric weighting all at once.
"""

import math

import numpy as np

from wlanqnet.dcf import t_collision
from wlanqnet.params import PhyMacParams


def _window_for_attempt(p: PhyMacParams, i: int, mode: str) -> tuple[int, int]:
    """Draw bounds (lo, hi) of the backoff at attempt i, inclusive."""
    if mode == "paper":
        return 1, min((1 << i) * p.cw_min, p.cw_max)
    return 0, min((1 << (i - 1)) * (p.cw_min + 1), p.cw_max + 1) - 1


def sample_service_times(p: PhyMacParams, t_success: float, alpha: float,
                         n_samples: int, seed: int,
                         collision_mode: str = "paper-literal",
                         backoff_mode: str = "paper",
                         chunk: int = 2_500_000) -> tuple[float, float]:
    """Return (mean, standard error) over n_samples simulated service times."""
    t_c = t_collision(p, collision_mode)
    rng = np.random.default_rng(seed)
    total_sum = 0.0
    total_sumsq = 0.0
    done = 0
    while done < n_samples:
        size = min(chunk, n_samples - done)
        acc = np.zeros(size)          # slot-weighted backoff so far
        out = np.empty(size)
        alive = np.arange(size)
        attempt = 1
        while alive.size:
            lo, hi = _window_for_attempt(p, attempt, backoff_mode)
            draws = rng.integers(lo, hi + 1, size=alive.size)
            acc[alive] += draws
            collide = rng.random(alive.size) < (1.0 - alpha)
            finished = alive[~collide]
            out[finished] = (p.slot * acc[finished]
                             + (attempt - 1) * t_c + t_success)
            alive = alive[collide]
            attempt += 1
            if attempt > 100_000:
                raise RuntimeError("collision probability too close to 1")
        total_sum += float(out.sum())
        total_sumsq += float((out * out).sum())
        done += size
    mean = total_sum / n_samples
    var = (total_sumsq - n_samples * mean * mean) / (n_samples - 1)
    return mean, math.sqrt(max(var, 0.0) / n_samples)
