"""PHY/MAC parameter set and scenario configuration.

Internally everything is SI: seconds for times, bits/s for rates. Frame and
header sizes are kept in bytes (as usually quoted) and converted to bits only
inside the timing formulas. The external config format uses suffixed keys
(``tp_us``, ``rd_mbps``, ``tau_rtpd_ms``, ...) so that no value can be fed in
the wrong unit silently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

COLLISION_MODES = ("paper-literal", "ack-only")
BACKOFF_MODES = ("paper", "standard")

DEFAULT_WINDOW = 70  # packets; the standard study scenario


class ConfigError(ValueError):
    """A scenario document could not be parsed or failed validation."""


@dataclass(frozen=True)
class PhyMacParams:
    """802.11b DCF parameter set (defaults: 11 Mbps data / 2 Mbps control)."""

    r_d: float = 11 * 1e6      # data PHY rate, bits/s
    r_c: float = 2 * 1e6       # control rate, bits/s
    t_p: float = 144 / 1e6     # PLCP preamble time, s
    t_phy: float = 48 / 1e6    # PHY header time, s
    l_mac: int = 34            # MAC header, bytes
    l_rts: int = 20            # RTS frame, bytes
    l_cts: int = 14            # CTS frame, bytes
    l_ack: int = 14            # MAC ACK frame, bytes
    l_iph: int = 20            # IP header, bytes
    l_tcph: int = 20           # TCP header, bytes
    l_tcp_ack: int = 20        # TCP ACK payload, bytes
    l_tcp: int = 1460          # TCP data payload, bytes
    slot: float = 20 / 1e6     # system slot time, s
    t_difs: float = 50 / 1e6   # DIFS, s
    t_sifs: float = 10 / 1e6   # SIFS, s
    t_eifs: float = 364 / 1e6  # EIFS, s
    cw_min: int = 31
    cw_max: int = 1023


def validate(p: PhyMacParams) -> list[str]:
    """Return one message per violated invariant; empty list when valid."""
    violations = []
    for name in ("r_d", "r_c"):
        if getattr(p, name) <= 0:
            violations.append(f"{name}: rate must be strictly positive")
    for name in ("t_p", "t_phy", "slot", "t_difs", "t_sifs", "t_eifs"):
        if getattr(p, name) <= 0:
            violations.append(f"{name}: time must be strictly positive")
    for name in ("l_mac", "l_rts", "l_cts", "l_ack", "l_iph", "l_tcph",
                 "l_tcp_ack", "l_tcp"):
        if getattr(p, name) <= 0:
            violations.append(f"{name}: size must be strictly positive")
    if p.cw_min < 1:
        violations.append("cw_min: must be at least 1")
    if p.cw_min > p.cw_max:
        violations.append("cw_min/cw_max: cw_min must not exceed cw_max")
    return violations


@dataclass(frozen=True)
class Scenario:
    """A complete model input: parameter set, delay, window and mode switches."""

    params: PhyMacParams
    tau_rtpd: float                        # round-trip propagation delay, s
    window_w: int                          # TCP receive window, packets
    collision_mode: str = "paper-literal"  # see dcf.t_collision
    backoff_mode: str = "paper"            # analysis backoff-mean convention


# config key -> (params field, multiplier, divisor, python type);
# SI value = external * mult / div, both constants exactly representable so
# that a dump/load cycle is bit-exact.
_PARAM_KEYS = {
    "rd_mbps": ("r_d", 1e6, 1.0, float),
    "rc_mbps": ("r_c", 1e6, 1.0, float),
    "tp_us": ("t_p", 1.0, 1e6, float),
    "tphy_us": ("t_phy", 1.0, 1e6, float),
    "lmac_bytes": ("l_mac", 1.0, 1.0, int),
    "lrts_bytes": ("l_rts", 1.0, 1.0, int),
    "lcts_bytes": ("l_cts", 1.0, 1.0, int),
    "lack_bytes": ("l_ack", 1.0, 1.0, int),
    "liph_bytes": ("l_iph", 1.0, 1.0, int),
    "ltcph_bytes": ("l_tcph", 1.0, 1.0, int),
    "ltcpack_bytes": ("l_tcp_ack", 1.0, 1.0, int),
    "ltcp_bytes": ("l_tcp", 1.0, 1.0, int),
    "slot_us": ("slot", 1.0, 1e6, float),
    "difs_us": ("t_difs", 1.0, 1e6, float),
    "sifs_us": ("t_sifs", 1.0, 1e6, float),
    "eifs_us": ("t_eifs", 1.0, 1e6, float),
    "cwmin": ("cw_min", 1.0, 1.0, int),
    "cwmax": ("cw_max", 1.0, 1.0, int),
}

_SCENARIO_KEYS = ("tau_rtpd_ms", "window", "collision_mode", "backoff_mode")

KNOWN_KEYS = tuple(_PARAM_KEYS) + _SCENARIO_KEYS


def _coerce_number(key, raw, want):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {raw!r}")
    if want is int:
        if float(raw) != int(raw):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(raw)
    return float(raw)


def _to_si(value, mult, div, want):
    if want is int:
        return value
    out = value
    if mult != 1.0:
        out = out * mult
    if div != 1.0:
        out = out / div
    return out


def _from_si(value, mult, div, want):
    """External-unit value whose reload reproduces ``value`` bit-exactly.

    Double rounding through the scale factors can shift the last ulp, so the
    nearest preimage is searched one ulp at a time. Values that entered
    through a config always have an exact preimage.
    """
    if want is int:
        return value
    out = value
    if div != 1.0:
        out = out * div
    if mult != 1.0:
        out = out / mult
    if _to_si(out, mult, div, want) == value:
        return out
    for _ in range(4):
        out = math.nextafter(out, math.inf if _to_si(out, mult, div, want) < value
                             else -math.inf)
        if _to_si(out, mult, div, want) == value:
            return out
    return out  # value has no exact preimage; nearest representative


def load_scenario(text: str) -> Scenario:
    """Parse a UTF-8 JSON config document into a validated Scenario.

    Absent parameter keys fall back to the defaults; ``tau_rtpd_ms`` is
    required. Unknown keys are rejected.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("malformed config document: top level must be an object")

    unknown = sorted(set(doc) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    if "tau_rtpd_ms" not in doc:
        raise ConfigError("missing tau_rtpd")

    overrides = {}
    for key, (field, mult, div, want) in _PARAM_KEYS.items():
        if key in doc:
            value = _coerce_number(key, doc[key], want)
            overrides[field] = _to_si(value, mult, div, want)
    params = PhyMacParams(**overrides)
    violations = validate(params)
    if violations:
        raise ConfigError("invalid parameters: " + "; ".join(violations))

    tau_ms = _coerce_number("tau_rtpd_ms", doc["tau_rtpd_ms"], float)
    if tau_ms < 0:
        raise ConfigError("tau_rtpd_ms: delay must be nonnegative")
    window = _coerce_number("window", doc.get("window", DEFAULT_WINDOW), int)
    if window < 1:
        raise ConfigError("window: must be a positive packet count")

    collision_mode = doc.get("collision_mode", "paper-literal")
    if collision_mode not in COLLISION_MODES:
        raise ConfigError(
            f"collision_mode: must be one of {COLLISION_MODES}, got {collision_mode!r}")
    backoff_mode = doc.get("backoff_mode", "paper")
    if backoff_mode not in BACKOFF_MODES:
        raise ConfigError(
            f"backoff_mode: must be one of {BACKOFF_MODES}, got {backoff_mode!r}")

    return Scenario(params=params, tau_rtpd=tau_ms / 1e3, window_w=window,
                    collision_mode=collision_mode, backoff_mode=backoff_mode)


def scenario_to_config(scn: Scenario) -> dict:
    """Inverse of load_scenario: full config dict in external units."""
    p = scn.params
    doc = {}
    for key, (field, mult, div, want) in _PARAM_KEYS.items():
        doc[key] = _from_si(getattr(p, field), mult, div, want)
    doc["tau_rtpd_ms"] = _from_si(scn.tau_rtpd, 1.0, 1e3, float)
    doc["window"] = scn.window_w
    doc["collision_mode"] = scn.collision_mode
    doc["backoff_mode"] = scn.backoff_mode
    return doc


def dump_scenario(scn: Scenario) -> str:
    return json.dumps(scenario_to_config(scn), indent=2)


def default_scenario(tau_rtpd: float, window_w: int = DEFAULT_WINDOW) -> Scenario:
    return Scenario(params=PhyMacParams(), tau_rtpd=tau_rtpd, window_w=window_w)
