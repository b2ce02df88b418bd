import random

import pytest

from wlanqnet.params import PhyMacParams
from wlanqnet.qnet import QnetSpec


def random_phy_params(rng: random.Random) -> PhyMacParams:
    """A random but physically sane parameter set.

    Data payload stays well above the ACK payload and the contention windows
    stay in the usual power-of-two family, mirroring real PHY profiles.
    """
    cw_min = rng.choice([7, 15, 31, 63])
    cw_max = min(cw_min * (2 ** rng.randint(1, 6)) + rng.choice([0, 1]), 4095)
    return PhyMacParams(
        r_d=rng.uniform(1, 54) * 1e6,
        r_c=rng.uniform(1, 24) * 1e6,
        t_p=rng.uniform(16, 200) / 1e6,
        t_phy=rng.uniform(4, 60) / 1e6,
        l_mac=rng.randint(20, 40),
        l_rts=rng.randint(14, 24),
        l_cts=rng.randint(10, 20),
        l_ack=rng.randint(10, 20),
        l_iph=rng.randint(20, 40),
        l_tcph=rng.randint(20, 32),
        l_tcp_ack=rng.randint(1, 40),
        l_tcp=rng.randint(200, 2000),
        slot=rng.uniform(9, 50) / 1e6,
        t_difs=rng.uniform(28, 130) / 1e6,
        t_sifs=rng.uniform(9, 30) / 1e6,
        t_eifs=rng.uniform(90, 400) / 1e6,
        cw_min=cw_min,
        cw_max=cw_max,
    )


def random_qnet_spec(rng: random.Random, w_max: int = 20,
                     allow_zero_tau: bool = True) -> QnetSpec:
    tau = 0.0 if (allow_zero_tau and rng.random() < 0.2) else 10 ** rng.uniform(-4, -0.5)
    return QnetSpec(
        population_w=rng.randint(1, w_max),
        s_ap=10 ** rng.uniform(-4, -1.5),
        s_sta=10 ** rng.uniform(-4, -1.5),
        tau_rtpd=tau,
    )


@pytest.fixture
def rng():
    return random.Random(20260809)
