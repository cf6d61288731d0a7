"""Batch entry points: validate scenarios, run them (single or as the
2x2 condition suite), export traces/metrics, and launch the live service.

Exit codes: 0 success, 2 scenario validation failure, 3 I/O failure,
4 listen port busy. Machine output goes to files; stdout carries only a
short human-readable summary.
"""

from __future__ import annotations

import socket
import sys
from importlib import resources
from pathlib import Path

import click

from .harness import (
    iter_condition_runs,
    metrics_to_json,
    run as run_scenario,
    write_metrics_json,
    write_trace_csv,
    write_trace_jsonl,
)
from .scene import ConfigError, load_robot_config
from .scenario import Scenario, ScenarioError, load_scenario, validate_against_model

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_PORT_BUSY = 4


def _load_inputs(scenario_path: str, robot: str | None, seed: int | None, dt: float | None):
    try:
        scenario = load_scenario(scenario_path)
    except OSError as exc:
        click.echo(f"cannot read scenario: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ScenarioError as exc:
        click.echo(f"invalid scenario: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        model = load_robot_config(robot)
    except OSError as exc:
        click.echo(f"cannot read robot config: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ConfigError as exc:
        click.echo(f"invalid robot config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if dt is not None:
        overrides["dt"] = dt
    if overrides:
        from dataclasses import replace

        scenario = replace(scenario, **overrides)
    try:
        validate_against_model(scenario, model)
    except ScenarioError as exc:
        click.echo(f"invalid scenario: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    return scenario, model


def _write_outputs(records, metrics, out_dir: Path, formats: str, prefix: str = "") -> list[Path]:
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if formats in ("jsonl", "both"):
            p = out_dir / f"{prefix}trace.jsonl"
            write_trace_jsonl(records, str(p))
            written.append(p)
        if formats in ("csv", "both"):
            p = out_dir / f"{prefix}trace.csv"
            write_trace_csv(records, str(p))
            written.append(p)
        p = out_dir / f"{prefix}metrics.json"
        write_metrics_json(metrics, str(p))
        written.append(p)
    except OSError as exc:
        click.echo(f"cannot write outputs: {exc}", err=True)
        sys.exit(EXIT_IO)
    return written


@click.group()
def main() -> None:
    """Behaviour engine for an expressive, attention-driven arm."""


@main.command()
@click.argument("scenario_path", type=str)
@click.option("--robot", type=str, default=None, help="Robot config JSON (default: bundled UR5e-like).")
def validate(scenario_path: str, robot: str | None) -> None:
    """Validate a scenario file and exit."""
    _load_inputs(scenario_path, robot, None, None)
    click.echo("scenario is valid")


@main.command(name="run")
@click.argument("scenario_path", type=str)
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--dt", type=float, default=None, help="Override the timestep in seconds.")
@click.option("--out", "out_dir", type=str, default="out", help="Output directory.")
@click.option("--format", "formats", type=click.Choice(["jsonl", "csv", "both"]), default="both")
@click.option("--robot", type=str, default=None)
def cmd_run(scenario_path: str, seed: int | None, dt: float | None, out_dir: str, formats: str, robot: str | None) -> None:
    """Run one scenario; write trace.jsonl, trace.csv, metrics.json."""
    scenario, model = _load_inputs(scenario_path, robot, seed, dt)
    records, metrics = run_scenario(scenario, model)
    written = _write_outputs(records, metrics, Path(out_dir), formats)
    click.echo(
        f"ran {len(records)} ticks ({metrics.duration_s:.1f} s simulated); "
        f"person gaze fraction {metrics.person_gaze_fraction:.3f}, "
        f"{metrics.switch_count} target switches"
    )
    for p in written:
        click.echo(f"  wrote {p}")


@main.command()
@click.argument("scenario_path", type=str)
@click.option("--seed", type=int, default=None)
@click.option("--dt", type=float, default=None)
@click.option("--out", "out_dir", type=str, default="out")
@click.option("--format", "formats", type=click.Choice(["jsonl", "csv", "both"]), default="both")
@click.option("--robot", type=str, default=None)
def suite(scenario_path: str, seed: int | None, dt: float | None, out_dir: str, formats: str, robot: str | None) -> None:
    """Run the 2x2 arousal/attention condition suite over one scenario."""
    scenario, model = _load_inputs(scenario_path, robot, seed, dt)
    out = Path(out_dir)
    rows = []
    for name, condition, records, metrics in iter_condition_runs(scenario, model):
        _write_outputs(records, metrics, out, formats, prefix=f"{name}__")
        rows.append((name, condition, metrics))
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = out / "suite_summary.csv"
        with open(summary, "w", encoding="utf-8", newline="\n") as f:
            f.write(
                "preset,arousal,attention,person_gaze_fraction,switch_count,"
                "mean_gaze_error_deg,mean_abs_joint_speed,drift_event_count,duration_s\n"
            )
            for name, condition, m in rows:
                f.write(
                    f"{name},{condition.arousal:g},{condition.attention},"
                    f"{m.person_gaze_fraction:.9f},{m.switch_count},"
                    f"{m.mean_gaze_error_deg:.9f},{m.mean_abs_joint_speed:.9f},"
                    f"{m.drift_event_count},{m.duration_s:.9f}\n"
                )
    except OSError as exc:
        click.echo(f"cannot write outputs: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"suite complete: {len(rows)} presets")
    for name, _, m in rows:
        click.echo(
            f"  {name}: gaze_fraction={m.person_gaze_fraction:.3f} "
            f"joint_speed={m.mean_abs_joint_speed:.4f} switches={m.switch_count}"
        )
    click.echo(f"  wrote {summary}")


@main.command()
@click.option("--out", "out_dir", type=str, default="out")
@click.option("--seed", type=int, default=None)
@click.option("--format", "formats", type=click.Choice(["jsonl", "csv", "both"]), default="both")
def demo(out_dir: str, seed: int | None, formats: str) -> None:
    """Run the bundled two-person demo scenario."""
    path = resources.files("socialarm.data").joinpath("demo_scenario.json")
    with resources.as_file(path) as p:
        scenario, model = _load_inputs(str(p), None, seed, None)
    records, metrics = run_scenario(scenario, model)
    _write_outputs(records, metrics, Path(out_dir), formats)
    click.echo(f"demo: {len(records)} ticks -> {out_dir}")
    click.echo("  " + metrics_to_json(metrics))


@main.command()
@click.option("--addr", type=str, default="127.0.0.1:8731", help="host:port to listen on.")
@click.option("--max-sessions", type=int, default=8)
@click.option("--dt", type=float, default=1.0 / 30.0)
@click.option("--robot", type=str, default=None)
@click.option("--ui", "ui_dir", type=str, default=None, help="Serve a built browser client from this directory.")
def serve(addr: str, max_sessions: int, dt: float, robot: str | None, ui_dir: str | None) -> None:
    """Serve live websocket sessions until interrupted."""
    import uvicorn

    from .service import create_app

    host, _, port_str = addr.partition(":")
    port = int(port_str or "8731")
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError:
        click.echo(f"port {port} on {host} is busy", err=True)
        sys.exit(EXIT_PORT_BUSY)
    finally:
        probe.close()

    try:
        model = load_robot_config(robot)
    except (OSError, ConfigError) as exc:
        click.echo(f"invalid robot config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if ui_dir is not None and not Path(ui_dir).is_dir():
        click.echo(f"--ui directory not found: {ui_dir}", err=True)
        sys.exit(EXIT_IO)
    app = create_app(default_dt=dt, max_sessions=max_sessions, model=model, ui_dir=ui_dir)
    click.echo(f"serving on ws://{host}:{port}/session")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def entrypoint() -> None:  # pragma: no cover - thin wrapper
    main(auto_envvar_prefix="SOCIALARM")


if __name__ == "__main__":  # pragma: no cover
    entrypoint()
