"""Command-line interface: run, verify, sweep, plot.

Exit codes: 0 ok, 2 input error, 3 numeric failure, 4 verification or
assumption failure.  ``HKDELAY_TOLERANCE`` overrides the default verifier
tolerance; an explicit ``tolerance`` field in the scenario file wins over
both.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    DecayCertificate,
    VerifierReport,
    consensus_constants,
    empirical_decay_rate,
    run_all_checks,
    tolerance_for,
)
from .errors import ConfigurationError, IntegrationError
from .integrator import Trajectory, integrate
from .model import ScenarioConfig, SingleLeaderControlled
from .scenario_io import load_scenario, parse_scenario
from .trajectory_io import read_trajectory, write_trajectory

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

TOLERANCE_ENV = "HKDELAY_TOLERANCE"


def _apply_env_tolerance(scenario: ScenarioConfig) -> ScenarioConfig:
    if scenario.tolerance is not None:
        return scenario
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return scenario
    try:
        value = float(raw)
    except ValueError:
        raise ConfigurationError(f"{TOLERANCE_ENV}: not a number: {raw!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise ConfigurationError(f"{TOLERANCE_ENV}: must be positive finite, got {value!r}")
    return dataclasses.replace(scenario, tolerance=value)


def _format_report(
    scenario_path: str,
    scenario: ScenarioConfig,
    cert: DecayCertificate,
    reports: list[VerifierReport],
    measured_rate: float,
) -> str:
    lines = [
        f"scenario: {scenario_path}",
        f"variant: {cert.variant} N={scenario.n_followers} d={scenario.dim} "
        f"step_h={scenario.step_h:g} horizon_T={scenario.horizon:g}",
        f"tolerance: {tolerance_for(scenario):.6e} "
        "(policy max(10*h^2, 1e-9); window maxima restricted to grid times)",
        "certificate: "
        f"kernel_sup={cert.kernel_sup:.17g} kernel_floor={cert.kernel_floor:.17g} "
        f"state_bound={cert.state_bound:.17g} initial_spread={cert.initial_spread:.17g} "
        f"contraction={cert.contraction:.17g} window_contraction={cert.window_contraction:.17g} "
        f"decay_rate={cert.decay_rate:.17g} delay={cert.delay:.17g}"
        + (f" [{cert.note}]" if cert.note else ""),
    ]
    lines.extend(r.line() for r in reports)
    rate = "nan" if math.isnan(measured_rate) else f"{measured_rate:.6e}"
    lines.append(f"empirical_decay_rate: {rate}")
    applicable = [r for r in reports if r.applicable]
    passed = [r for r in applicable if r.passed]
    verdict = "PASS" if len(passed) == len(applicable) else "FAIL"
    lines.append(f"overall: {verdict} ({len(passed)}/{len(applicable)} applicable checks)")
    return "\n".join(lines) + "\n"


def _verify_one(scenario_path: str, scenario: ScenarioConfig) -> tuple[str, bool, Trajectory, DecayCertificate, list]:
    traj = integrate(scenario)
    cert, reports = run_all_checks(traj)
    rate = empirical_decay_rate(traj, cert)
    text = _format_report(scenario_path, scenario, cert, reports, rate)
    ok = all(r.passed for r in reports if r.applicable) and not any(
        r.status == "FAIL" for r in reports
    )
    # A failed structural assumption leaves envelope checks inapplicable; that
    # still counts as a verification failure.
    gated = any(r.status == "INAPPLICABLE" and "certificate inapplicable" in r.note for r in reports)
    return text, ok and not gated, traj, cert, reports


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    traj = integrate(scenario)
    write_trajectory(traj, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _apply_env_tolerance(load_scenario(args.scenario))
    text, ok, traj, cert, _ = _verify_one(args.scenario, scenario)
    Path(args.output).write_text(text)
    if args.plot:
        from .plotting import plot_diameter_envelope

        plot_diameter_envelope(traj, cert, args.plot)
    return EXIT_OK if ok else EXIT_VERIFY


def _parse_values(raw: str) -> list[float]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if not parts:
        raise ConfigurationError("--values: empty list")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigurationError(f"--values: {exc}") from None


def _sweep_document(doc: dict, param: str, value: float) -> dict:
    out = copy.deepcopy(doc)
    if param == "tau":
        out["delays"] = value
        if "leader_delays" in out or out.get("variant", {}).get("kind") in ("multi_leader", "two_leaders"):
            out["leader_delays"] = value
        if out.get("variant", {}).get("kind") == "single_leader_controlled":
            out["leader_follower_delays"] = value
    elif param == "N":
        followers = out.get("histories", {}).get("followers")
        if not (isinstance(followers, dict) and "random_box" in followers):
            raise ConfigurationError(
                "--param N: sweeping the population needs histories.followers.random_box"
            )
        if not isinstance(out.get("chi", "complete"), str):
            raise ConfigurationError("--param N: sweeping the population needs chi='complete'")
        if not isinstance(out.get("delays"), (int, float)):
            raise ConfigurationError("--param N: sweeping the population needs scalar delays")
        if value != int(value) or int(value) < 2:
            raise ConfigurationError(f"--param N: values must be integers >= 2, got {value:g}")
        out["N"] = int(value)
    elif param == "M":
        if out.get("variant", {}).get("kind") != "single_leader_controlled":
            raise ConfigurationError("--param M: only the controlled-leader variant has a speed limit")
        out["variant"]["speed_limit"] = value
    else:  # pragma: no cover
        raise ConfigurationError(f"--param: unknown parameter {param!r}")
    return out


def cmd_sweep(args) -> int:
    values = _parse_values(args.values)
    path = Path(args.scenario)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read scenario file ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno}") from None
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    certified_rates = []
    empirical_rates = []
    for value in values:
        label = f"{args.param}_{value:g}"
        report_path = out_dir / f"report_{label}.txt"
        try:
            scenario = _apply_env_tolerance(
                parse_scenario(_sweep_document(doc, args.param, value), name=f"{path.stem}:{label}")
            )
            text, ok, traj, cert, reports = _verify_one(str(path), scenario)
            report_path.write_text(text)
            rate = empirical_decay_rate(traj, cert)
            pass_count = sum(1 for r in reports if r.applicable and r.passed)
            rows.append((value, cert.decay_rate, rate, pass_count))
            certified_rates.append(cert.decay_rate)
            empirical_rates.append(rate)
        except (ConfigurationError, IntegrationError) as exc:
            report_path.write_text(f"scenario: {path}\nerror: {exc}\n")
            rows.append((value, math.nan, math.nan, 0))
            certified_rates.append(math.nan)
            empirical_rates.append(math.nan)

    summary = out_dir / "summary.csv"
    with open(summary, "w") as fh:
        fh.write("value,gamma_certified,gamma_empirical,pass_count\n")
        for value, certified, measured, count in rows:
            fh.write(f"{value:.17g},{certified:.17g},{measured:.17g},{count}\n")
    from .plotting import plot_sweep

    plot_sweep(values, certified_rates, empirical_rates, args.param, out_dir / "summary.svg")
    return EXIT_OK


def cmd_plot(args) -> int:
    data = read_trajectory(args.trajectory)
    from .plotting import plot_trajectory

    plot_trajectory(data, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkdelay",
        description="Simulate delayed opinion-formation models and verify their decay guarantees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write the trajectory CSV")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("-o", "--output", required=True, help="output CSV path")
    p_run.set_defaults(fn=cmd_run)

    p_verify = sub.add_parser("verify", help="integrate and run every applicable check")
    p_verify.add_argument("scenario", help="scenario JSON file")
    p_verify.add_argument("-o", "--output", required=True, help="output report path")
    p_verify.add_argument("--plot", help="also render a diameter/envelope figure to this path")
    p_verify.set_defaults(fn=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="re-verify across one swept parameter")
    p_sweep.add_argument("scenario", help="scenario JSON file")
    p_sweep.add_argument("--param", required=True, choices=["tau", "N", "M"])
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("-o", "--output", required=True, help="output directory")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_plot = sub.add_parser("plot", help="render a trajectory CSV as a line chart")
    p_plot.add_argument("trajectory", help="trajectory CSV file")
    p_plot.add_argument("-o", "--output", required=True, help="output figure path (svg)")
    p_plot.set_defaults(fn=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
