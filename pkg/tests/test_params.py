import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlanqnet.params import (ConfigError, PhyMacParams, Scenario,
                             dump_scenario, load_scenario, scenario_to_config,
                             validate)

# Reference values in SI units (rates bits/s, times s, sizes bytes).
REFERENCE_DEFAULTS = {
    "r_d": 11e6,
    "r_c": 2e6,
    "t_p": 144e-6,
    "t_phy": 48e-6,
    "l_mac": 34,
    "l_rts": 20,
    "l_cts": 14,
    "l_ack": 14,
    "l_iph": 20,
    "l_tcph": 20,
    "l_tcp_ack": 20,
    "l_tcp": 1460,
    "slot": 20e-6,
    "t_difs": 50e-6,
    "t_sifs": 10e-6,
    "t_eifs": 364e-6,
    "cw_min": 31,
    "cw_max": 1023,
}


def test_defaults_reproduce_reference_row_for_row():
    p = PhyMacParams()
    for field, expected in REFERENCE_DEFAULTS.items():
        assert getattr(p, field) == pytest.approx(expected, rel=0, abs=0), field


def test_defaults_validate_clean():
    assert validate(PhyMacParams()) == []


def test_cw_ordering_is_single_violation():
    violations = validate(PhyMacParams(cw_min=1023, cw_max=31))
    assert len(violations) == 1
    assert "cw_min" in violations[0]


def test_zero_rate_is_single_violation():
    violations = validate(PhyMacParams(r_d=0))
    assert len(violations) == 1
    assert violations[0].startswith("r_d")


def test_every_field_guarded():
    p = PhyMacParams(r_d=0, r_c=0, t_p=0, t_phy=0, l_mac=0, l_rts=0, l_cts=0,
                     l_ack=0, l_iph=0, l_tcph=0, l_tcp_ack=0, l_tcp=0,
                     slot=0, t_difs=0, t_sifs=0, t_eifs=0, cw_min=0, cw_max=0)
    # 16 nonpositive quantities plus the cw_min >= 1 rule
    assert len(validate(p)) == 17


def test_empty_document_requires_tau():
    with pytest.raises(ConfigError, match="missing tau_rtpd"):
        load_scenario("{}")


def test_minimal_document_takes_defaults():
    scn = load_scenario(json.dumps({"tau_rtpd_ms": 10, "window": 70}))
    assert scn.params == PhyMacParams()
    assert scn.tau_rtpd == pytest.approx(0.010, rel=1e-15)
    assert scn.window_w == 70
    assert scn.collision_mode == "paper-literal"
    assert scn.backoff_mode == "paper"


def test_window_defaults_to_70():
    scn = load_scenario(json.dumps({"tau_rtpd_ms": 25}))
    assert scn.window_w == 70


def test_negative_delay_rejected():
    with pytest.raises(ConfigError, match="tau_rtpd_ms"):
        load_scenario(json.dumps({"tau_rtpd_ms": -1, "window": 70}))


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown config keys: rts_mbps"):
        load_scenario(json.dumps({"tau_rtpd_ms": 1, "rts_mbps": 2}))


def test_malformed_document():
    with pytest.raises(ConfigError, match="malformed"):
        load_scenario("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_scenario("[1, 2]")


def test_invalid_window():
    with pytest.raises(ConfigError, match="window"):
        load_scenario(json.dumps({"tau_rtpd_ms": 1, "window": 0}))
    with pytest.raises(ConfigError, match="window"):
        load_scenario(json.dumps({"tau_rtpd_ms": 1, "window": 7.5}))


def test_invalid_params_named():
    doc = {"tau_rtpd_ms": 1, "cwmin": 1023, "cwmax": 31}
    with pytest.raises(ConfigError, match="cw_min"):
        load_scenario(json.dumps(doc))


def test_mode_validation():
    assert load_scenario(json.dumps(
        {"tau_rtpd_ms": 1, "collision_mode": "ack-only",
         "backoff_mode": "standard"})).collision_mode == "ack-only"
    with pytest.raises(ConfigError, match="collision_mode"):
        load_scenario(json.dumps({"tau_rtpd_ms": 1, "collision_mode": "x"}))
    with pytest.raises(ConfigError, match="backoff_mode"):
        load_scenario(json.dumps({"tau_rtpd_ms": 1, "backoff_mode": "x"}))


def test_param_override_in_external_units():
    doc = {"tau_rtpd_ms": 1, "rd_mbps": 5.5, "tp_us": 72, "ltcp_bytes": 1000}
    p = load_scenario(json.dumps(doc)).params
    assert p.r_d == 5.5e6
    assert p.t_p == 72 / 1e6
    assert p.l_tcp == 1000
    assert p.cw_min == 31  # untouched default


def test_roundtrip_default_scenario():
    scn = load_scenario(json.dumps({"tau_rtpd_ms": 10, "window": 70}))
    assert load_scenario(dump_scenario(scn)) == scn


def test_roundtrip_custom_units():
    doc = {"tau_rtpd_ms": 13.37, "window": 3, "rd_mbps": 10.73,
           "tp_us": 143.997, "slot_us": 9, "collision_mode": "ack-only"}
    scn = load_scenario(json.dumps(doc))
    again = load_scenario(dump_scenario(scn))
    assert again == scn
    assert scenario_to_config(again) == scenario_to_config(scn)


@settings(max_examples=200, deadline=None)
@given(
    tau_ms=st.floats(min_value=0, max_value=1e4, allow_nan=False),
    window=st.integers(min_value=1, max_value=10_000),
    rd=st.floats(min_value=1e-3, max_value=1e4, allow_nan=False),
    tp=st.floats(min_value=1e-3, max_value=1e5, allow_nan=False),
    slot_us=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
)
def test_roundtrip_property(tau_ms, window, rd, tp, slot_us):
    doc = {"tau_rtpd_ms": tau_ms, "window": window, "rd_mbps": rd,
           "tp_us": tp, "slot_us": slot_us}
    scn = load_scenario(json.dumps(doc))
    assert load_scenario(dump_scenario(scn)) == scn


def test_scenario_is_hashable_and_immutable():
    scn = Scenario(params=PhyMacParams(), tau_rtpd=0.01, window_w=70)
    hash(scn)
    with pytest.raises(AttributeError):
        scn.window_w = 10
