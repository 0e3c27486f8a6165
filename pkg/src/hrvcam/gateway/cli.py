"""Command line entry points: analyze, calibrate, simulate, serve, export.

Exit codes: 0 success, 1 usage error, 2 data error (malformed inputs,
not enough data), 3 runtime failure (port in use, unreadable store).
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from hrvcam.engine import EngineConfig
from hrvcam.hrv import (
    ANALYSIS_CSV_HEADER,
    Baseline,
    DataFormatError,
    NotEnoughDataError,
    StreamingHrvAnalyzer,
    ValidationRange,
    analyze_stream,
    calibrate as calibrate_readings,
    format_analysis_row,
    read_rr_csv,
)
from hrvcam.runner import SimulationRunner, run_scenario
from hrvcam.sim.scenario import ScenarioError, bundled_scenario_path, load_scenario
from hrvcam.store import EventStore, StoreError
from hrvcam.trigger import TriggerConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def _resolve_scenario(arg: str) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    if "/" not in arg and "\\" not in arg and not arg.endswith(".json"):
        return bundled_scenario_path(arg)
    raise ScenarioError(f"scenario file not found: {arg}")


def _engine_config(
    calibration_s: float,
    min_samples: int,
    k: float,
    debounce: int,
    min_capture_interval_s: float,
    retrigger: bool,
    transfer_timeout_s: float,
) -> EngineConfig:
    return EngineConfig(
        calibration_period_ms=int(calibration_s * 1000),
        min_calibration_samples=min_samples,
        k=k,
        trigger=TriggerConfig(
            min_capture_interval_ms=int(min_capture_interval_s * 1000),
            debounce_count=debounce,
            transfer_timeout_ms=int(transfer_timeout_s * 1000),
            retrigger_while_stressed=retrigger,
        ),
    )


@click.group()
def cli():
    """Stress-triggered capture pipeline: analysis, simulation, review."""


@cli.command()
@click.argument("rr_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--baseline", "baseline_path", type=click.Path(exists=True, dir_okay=False),
              help="Baseline JSON for calm/stressed classification.")
@click.option("--window-ms", default=25_000, show_default=True)
@click.option("--min-beats", default=10, show_default=True)
@click.option("--min-rr", default=300.0, show_default=True)
@click.option("--max-rr", default=2000.0, show_default=True)
def analyze(rr_csv, baseline_path, window_ms, min_beats, min_rr, max_rr):
    """Stream windowed RMSSD over a replay file; CSV on stdout."""
    baseline = None
    if baseline_path:
        baseline = Baseline.from_dict(json.loads(Path(baseline_path).read_text("utf-8")))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(ANALYSIS_CSV_HEADER)
    rows = analyze_stream(
        read_rr_csv(rr_csv),
        baseline=baseline,
        window_ms=window_ms,
        min_beats=min_beats,
        validation=ValidationRange(min_rr, max_rr),
    )
    for reading, window_end, label in rows:
        writer.writerow(format_analysis_row(reading, window_end, label))


@cli.command()
@click.argument("rr_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-samples", default=100, show_default=True)
@click.option("--k", default=1.5, show_default=True)
@click.option("--window-ms", default=25_000, show_default=True)
@click.option("--min-beats", default=10, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), help="Write JSON here instead of stdout.")
def calibrate(rr_csv, min_samples, k, window_ms, min_beats, out):
    """Build a personal baseline from a replay file; JSON out."""
    analyzer = StreamingHrvAnalyzer(window_ms=window_ms, min_beats=min_beats)
    readings = []
    for sample in read_rr_csv(rr_csv):
        _, reading = analyzer.offer(sample)
        if reading is not None:
            readings.append(reading)
    baseline = calibrate_readings(readings, min_samples=min_samples, k=k)
    text = json.dumps(baseline.to_dict(), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", "utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@cli.command()
@click.argument("scenario")
@click.option("--store", "store_dir", required=True, type=click.Path(file_okay=False))
@click.option("--calibration-s", default=300.0, show_default=True,
              help="Calibration period in scenario seconds (desk-scale default).")
@click.option("--min-samples", default=100, show_default=True)
@click.option("--k", default=1.5, show_default=True)
@click.option("--debounce", default=1, show_default=True)
@click.option("--min-capture-interval-s", default=60.0, show_default=True)
@click.option("--retrigger/--no-retrigger", default=True, show_default=True,
              help="Level trigger (repeat captures under sustained stress) vs edge trigger.")
@click.option("--transfer-timeout-s", default=10.0, show_default=True)
@click.option("--reveal-delay-ms", default=86_400_000, show_default=True)
def simulate(scenario, store_dir, calibration_s, min_samples, k, debounce,
             min_capture_interval_s, retrigger, transfer_timeout_s, reveal_delay_ms):
    """Run a scenario to completion in virtual time and write the store."""
    sc = load_scenario(_resolve_scenario(scenario))
    config = _engine_config(calibration_s, min_samples, k, debounce,
                            min_capture_interval_s, retrigger, transfer_timeout_s)
    summary = run_scenario(sc, store_dir, config, reveal_delay_ms=reveal_delay_ms)
    click.echo(json.dumps(summary.to_dict(), indent=2, sort_keys=True))


@cli.command()
@click.option("--store", "store_dir", required=True, type=click.Path(file_okay=False))
@click.option("--scenario", "scenario_arg", default=None,
              help="Run this scenario live under the service clock.")
@click.option("--speed", default=60.0, show_default=True,
              help="Virtual seconds per wall second while a scenario runs; "
                   "0 disables the wall-time driver (advance via the API only).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--calibration-s", default=300.0, show_default=True)
@click.option("--min-samples", default=100, show_default=True)
@click.option("--k", default=1.5, show_default=True)
@click.option("--debounce", default=1, show_default=True)
@click.option("--min-capture-interval-s", default=60.0, show_default=True)
@click.option("--retrigger/--no-retrigger", default=True, show_default=True)
@click.option("--transfer-timeout-s", default=10.0, show_default=True)
@click.option("--reveal-delay-ms", default=86_400_000, show_default=True)
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False),
              help="Serve a built review console from this directory.")
def serve(store_dir, scenario_arg, speed, host, port, calibration_s, min_samples, k,
          debounce, min_capture_interval_s, retrigger, transfer_timeout_s,
          reveal_delay_ms, ui_dir):
    """Run the local gateway (loopback by default)."""
    import uvicorn

    from hrvcam.gateway.api import create_app
    from hrvcam.gateway.service import GatewayService, SimDriver

    runner = None
    if scenario_arg:
        sc = load_scenario(_resolve_scenario(scenario_arg))
        config = _engine_config(calibration_s, min_samples, k, debounce,
                                min_capture_interval_s, retrigger, transfer_timeout_s)
        runner = SimulationRunner(sc, store_dir, config, reveal_delay_ms=reveal_delay_ms)
        store = runner.store
    else:
        store = EventStore(store_dir, reveal_delay_ms=reveal_delay_ms)

    service = GatewayService(store, runner)
    driver = None
    if runner is not None:
        service.start_sim()
        if speed > 0:
            driver = SimDriver(service, speed=speed)
            driver.start()

    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        if default_ui.is_dir():
            ui_dir = str(default_ui)
    app = create_app(service, ui_dir=ui_dir)
    click.echo(f"gateway on http://{host}:{port}  (store: {store_dir})")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        if driver is not None:
            driver.stop()


@cli.command()
@click.option("--store", "store_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--from-ms", default=None, type=int)
@click.option("--to-ms", default=None, type=int)
@click.option("--include-unrevealed", is_flag=True, default=False)
@click.option("--include-failed/--no-include-failed", default=True, show_default=True)
@click.option("--now-ms", default=None, type=int,
              help="Clock for reveal decisions (defaults to wall time).")
def export(store_dir, out, from_ms, to_ms, include_unrevealed, include_failed, now_ms):
    """Write a review archive (manifest.json, summary.csv, revealed blobs)."""
    import time

    store = EventStore(store_dir)
    try:
        now = now_ms if now_ms is not None else int(time.time() * 1000)
        path, count = store.export(
            out,
            now=now,
            from_ms=from_ms,
            to_ms=to_ms,
            include_unrevealed=include_unrevealed,
            include_failed=include_failed,
        )
    finally:
        store.close()
    click.echo(json.dumps({"archive_path": str(path), "event_count": count}))


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_RUNTIME
    except (DataFormatError, ScenarioError, NotEnoughDataError, StoreError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_DATA
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
