"""Batch front-end: scenario sweeps, CSV emission and reference comparison.

A sweep evaluates an RTPD x window grid with the analytical solver and/or the
simulator and writes one CSV row per grid point per source. The bundled
reference tables (refdata/) hold the published analysis and simulation values
for the same scenario family; ``--compare`` reports per-point relative
deviations of the artifact against them.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from importlib import resources

from .dcf import build_service_model
from .params import (BACKOFF_MODES, COLLISION_MODES, ConfigError, PhyMacParams,
                     Scenario, load_scenario)
from .qnet import QnetSpec, solve_convolution
from .sim import run_sim

CSV_HEADER = "rtpd_ms,window,source,throughput_pps,n_ap,n_sta,n_flight,ci_low,ci_high"

SOURCES = ("analysis", "sim", "paper")


class GridMismatchError(ValueError):
    """The sweep does not cover the grid of the requested reference table."""


@dataclass(frozen=True)
class SweepRow:
    """One observable set at one grid point from one source."""

    rtpd_ms: float
    window: int
    source: str
    throughput_pps: float
    n_ap: float
    n_sta: float
    n_flight: float
    ci_low: float | None = None   # 95% CI on throughput; blank except for sim
    ci_high: float | None = None


def _fmt(value) -> str:
    return "" if value is None else str(value)


def rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.rtpd_ms), str(r.window), r.source, str(r.throughput_pps),
            str(r.n_ap), str(r.n_sta), str(r.n_flight),
            _fmt(r.ci_low), _fmt(r.ci_high),
        ]))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[SweepRow]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a sweep CSV: bad header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 9:
            raise ValueError(f"bad sweep CSV row: {ln!r}")
        rows.append(SweepRow(
            rtpd_ms=float(parts[0]), window=int(parts[1]), source=parts[2],
            throughput_pps=float(parts[3]), n_ap=float(parts[4]),
            n_sta=float(parts[5]), n_flight=float(parts[6]),
            ci_low=float(parts[7]) if parts[7] else None,
            ci_high=float(parts[8]) if parts[8] else None,
        ))
    return rows


# ---------------------------------------------------------------- reference

REFERENCE_TABLES = {
    "table2": ("table2_ap_buffer.csv", "n_ap", 70),
    "table3": ("table3_in_flight.csv", "n_flight", 70),
    "table4": ("table4_sta_buffer.csv", "n_sta", 70),
    "table5": ("table5_throughput.csv", "throughput_pps", 100),
}


@dataclass(frozen=True)
class ReferenceTable:
    name: str
    observable: str
    window: int
    # rtpd_ms -> (analysis, sim_mean, sim_max, sim_min)
    rows: dict[float, tuple[float, float, float, float]]


def load_reference_table(which: str) -> ReferenceTable:
    if which not in REFERENCE_TABLES:
        raise ValueError(f"unknown reference table {which!r}; "
                         f"choose from {sorted(REFERENCE_TABLES)}")
    fname, observable, window = REFERENCE_TABLES[which]
    text = resources.files("wlanqnet").joinpath("refdata", fname).read_text()
    rows = {}
    for ln in text.splitlines()[1:]:
        if not ln.strip():
            continue
        tau, ana, mean, mx, mn = ln.split(",")
        rows[float(tau)] = (float(ana), float(mean), float(mx), float(mn))
    return ReferenceTable(name=which, observable=observable, window=window,
                          rows=rows)


# -------------------------------------------------------------------- sweep

def run_sweep(base: Scenario, rtpd_ms_list: list[float], window_list: list[int],
              mode: str = "analysis", replications: int = 10, base_seed: int = 1,
              sim_time_s: float = 300.0, trace=None) -> list[SweepRow]:
    """Evaluate the grid in deterministic order and return the rows.

    Analysis rows are seed-independent; sim rows use a per-point seed derived
    from base_seed, so the whole sweep is reproducible. A trace stream, if
    given, captures the first replication of the first grid point.
    """
    if not rtpd_ms_list:
        raise ValueError("empty RTPD grid")
    if not window_list:
        raise ValueError("empty window grid")
    if any(t < 0 for t in rtpd_ms_list):
        raise ValueError("RTPD values must be nonnegative")
    if any(w < 1 for w in window_list):
        raise ValueError("window values must be positive")
    if mode not in ("analysis", "sim", "both"):
        raise ValueError(f"mode must be analysis, sim or both, got {mode!r}")

    model = None
    if mode in ("analysis", "both"):
        model = build_service_model(base.params, base.collision_mode,
                                    base.backoff_mode)
    rows = []
    point = 0
    for rtpd_ms in rtpd_ms_list:
        tau = rtpd_ms / 1e3
        for window in window_list:
            if model is not None:
                sol = solve_convolution(QnetSpec(
                    population_w=window, s_ap=model.s_ap, s_sta=model.s_sta,
                    tau_rtpd=tau))
                rows.append(SweepRow(
                    rtpd_ms=rtpd_ms, window=window, source="analysis",
                    throughput_pps=sol.t_h, n_ap=sol.n_ap, n_sta=sol.n_sta,
                    n_flight=sol.n_rtpd))
            if mode in ("sim", "both"):
                scn = replace(base, tau_rtpd=tau, window_w=window)
                res = run_sim(scn, replications,
                              base_seed * 1_000_003 + point,
                              sim_time_s=sim_time_s,
                              trace=trace if point == 0 else None)
                rows.append(SweepRow(
                    rtpd_ms=rtpd_ms, window=window, source="sim",
                    throughput_pps=res.throughput_pps, n_ap=res.n_ap,
                    n_sta=res.n_sta, n_flight=res.n_flight,
                    ci_low=res.throughput_ci[0], ci_high=res.throughput_ci[1]))
            point += 1
    return rows


# ------------------------------------------------------------------ compare

@dataclass(frozen=True)
class ComparisonRecord:
    rtpd_ms: float
    source: str          # artifact source compared
    artifact: float
    reference: float
    rel_dev: float
    flagged: bool


@dataclass(frozen=True)
class ComparisonReport:
    table: ReferenceTable
    records: tuple[ComparisonRecord, ...]
    threshold: float
    # bundled-data cross-check: in-flight column vs throughput x delay
    little_residuals: tuple[tuple[float, float, float, float], ...]

    def max_deviation(self, source: str) -> float:
        devs = [r.rel_dev for r in self.records if r.source == source]
        return max(devs) if devs else float("nan")

    def mean_deviation(self, source: str) -> float:
        devs = [r.rel_dev for r in self.records if r.source == source]
        return sum(devs) / len(devs) if devs else float("nan")

    def render(self) -> str:
        t = self.table
        out = [f"reference comparison: {t.name} ({t.observable}, window {t.window})",
               f"{'rtpd_ms':>8} {'source':<9} {'artifact':>12} {'reference':>12} "
               f"{'rel_dev':>9}  flag"]
        for r in self.records:
            flag = "EXCEEDS" if r.flagged else ""
            out.append(f"{r.rtpd_ms:8.1f} {r.source:<9} {r.artifact:12.4f} "
                       f"{r.reference:12.4f} {100 * r.rel_dev:8.3f}%  {flag}")
        for source in ("analysis", "sim"):
            if any(r.source == source for r in self.records):
                out.append(f"summary [{source}]: max {100 * self.max_deviation(source):.3f}% "
                           f"mean {100 * self.mean_deviation(source):.3f}% "
                           f"(threshold {100 * self.threshold:.1f}%)")
        out.append("")
        out.append("bundled-table consistency: in-flight vs throughput x delay")
        worst = 0.0
        for tau_ms, n_flight, predicted, resid in self.little_residuals:
            worst = max(worst, resid)
            out.append(f"{tau_ms:8.1f} in_flight={n_flight:<8g} "
                       f"thpt*tau={predicted:<10.4f} residual={100 * resid:.3f}%")
        out.append(f"worst residual {100 * worst:.3f}%")
        return "\n".join(out) + "\n"


def _bundled_little_residuals():
    flight = load_reference_table("table3")
    thpt = load_reference_table("table5")
    out = []
    for tau_ms in sorted(flight.rows):
        n_flight = flight.rows[tau_ms][0]
        predicted = thpt.rows[tau_ms][0] * tau_ms / 1e3
        out.append((tau_ms, n_flight, predicted,
                    abs(n_flight - predicted) / predicted))
    return tuple(out)


def compare_with_paper(rows: list[SweepRow], which: str,
                       threshold: float = 0.10) -> ComparisonReport:
    """Per-point relative deviation of the sweep against a reference table.

    Artifact analysis rows are compared to the reference analysis column and
    artifact sim rows to the reference simulation mean. Every RTPD point of
    the table must be covered by each artifact source present.
    """
    table = load_reference_table(which)
    records = []
    any_source = False
    for source, ref_col in (("analysis", 0), ("sim", 1)):
        got = {r.rtpd_ms: r for r in rows
               if r.source == source and r.window == table.window}
        if not got:
            continue
        any_source = True
        missing = sorted(set(table.rows) - set(got))
        if missing:
            raise GridMismatchError(
                f"{which}: sweep is missing {source} rows at window "
                f"{table.window}, rtpd_ms {missing}")
        for tau_ms in sorted(table.rows):
            reference = table.rows[tau_ms][ref_col]
            artifact = getattr(got[tau_ms], table.observable)
            dev = abs(artifact - reference) / abs(reference)
            records.append(ComparisonRecord(
                rtpd_ms=tau_ms, source=source, artifact=artifact,
                reference=reference, rel_dev=dev, flagged=dev > threshold))
    if not any_source:
        raise GridMismatchError(
            f"{which}: sweep has no rows at window {table.window}")
    return ComparisonReport(table=table, records=tuple(records),
                            threshold=threshold,
                            little_residuals=_bundled_little_residuals())


# ---------------------------------------------------------------------- cli

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wlanqnet",
        description="Sweep TCP-download throughput predictions for a "
                    "single-station WLAN over an RTPD x window grid.")
    ap.add_argument("--config", help="scenario config (JSON)")
    ap.add_argument("--rtpd-ms", help="comma-separated RTPD grid, ms")
    ap.add_argument("--window", help="comma-separated TCP window grid, packets")
    ap.add_argument("--mode", choices=("analysis", "sim", "both"),
                    default="analysis")
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sim-time-s", type=float, default=300.0)
    ap.add_argument("--collision-mode", choices=COLLISION_MODES)
    ap.add_argument("--backoff-mode", choices=BACKOFF_MODES)
    ap.add_argument("--out", required=True, help="output CSV path")
    ap.add_argument("--compare", choices=sorted(REFERENCE_TABLES),
                    help="compare the sweep against a bundled reference table")
    ap.add_argument("--trace", help="event-trace dump for the first "
                                    "replication of the first grid point")
    return ap


def _parse_list(text: str, kind, name: str):
    items = [piece.strip() for piece in text.split(",")]
    items = [piece for piece in items if piece]
    if not items:
        raise ValueError(f"{name}: empty list")
    try:
        return [kind(piece) for piece in items]
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from exc


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        if args.config is not None:
            try:
                text = open(args.config, encoding="utf-8").read()
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return 2
            base = load_scenario(text)
        else:
            base = Scenario(params=PhyMacParams(), tau_rtpd=0.0, window_w=70)
        if args.collision_mode:
            base = replace(base, collision_mode=args.collision_mode)
        if args.backoff_mode:
            base = replace(base, backoff_mode=args.backoff_mode)

        if args.rtpd_ms is not None:
            rtpd_list = _parse_list(args.rtpd_ms, float, "--rtpd-ms")
        elif args.config is not None:
            rtpd_list = [base.tau_rtpd * 1e3]
        else:
            raise ValueError("an RTPD grid is required (--rtpd-ms or --config)")
        window_list = (_parse_list(args.window, int, "--window")
                       if args.window is not None else [base.window_w])
        if any(t < 0 for t in rtpd_list):
            raise ValueError("--rtpd-ms: values must be nonnegative")
        if any(w < 1 for w in window_list):
            raise ValueError("--window: values must be positive")
        if args.mode in ("sim", "both") and args.replications < 2:
            raise ValueError("--replications: need at least 2 for sim runs")
        if args.sim_time_s <= 0:
            raise ValueError("--sim-time-s: must be positive")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    trace_stream = None
    try:
        if args.trace is not None:
            if args.mode == "analysis":
                print("error: --trace requires a sim run", file=sys.stderr)
                return 1
            trace_stream = open(args.trace, "w", encoding="utf-8")
        rows = run_sweep(base, rtpd_list, window_list, mode=args.mode,
                         replications=args.replications, base_seed=args.seed,
                         sim_time_s=args.sim_time_s, trace=trace_stream)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rows_to_csv(rows))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver/simulator failure on valid-looking input
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if trace_stream is not None:
            trace_stream.close()

    print(f"wrote {len(rows)} rows to {args.out}")
    if args.compare:
        try:
            report = compare_with_paper(rows, args.compare)
        except GridMismatchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(report.render(), end="")
    return 0


def entry():
    raise SystemExit(main())
