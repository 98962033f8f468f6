"""Command line: ``crowddtn run`` and ``crowddtn sweep``.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
(including I/O) errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

from . import __version__
from .engine import run
from .metrics import METRIC_COLUMNS, Report, compute_report
from .scenario import ConfigError, ScenarioConfig
from .settings import (
    SweepSpec,
    apply_value,
    load_settings,
    parse_int,
    serialize_settings,
    split_list,
    sweep_from_settings,
)

logger = logging.getLogger("crowddtn")

CONFIG_COLUMNS = (
    "router_kind",
    "audience_count",
    "sim_duration",
    "message_ttl",
    "buffer_capacity",
    "copies_l",
    "aging_interval",
    "generation_interval",
    "rng_seed",
)
CSV_COLUMNS = ("sweep_axis", "sweep_value") + CONFIG_COLUMNS + METRIC_COLUMNS

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class SweepError(RuntimeError):
    pass


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_row(config: ScenarioConfig, report: Report, axis: str = "", axis_value: str = "") -> dict:
    params = config.router_params
    row = {
        "sweep_axis": axis,
        "sweep_value": axis_value,
        "router_kind": config.router_kind.value,
        "audience_count": config.audience_count,
        "sim_duration": config.sim_duration,
        "message_ttl": config.message_ttl,
        "buffer_capacity": config.buffer_capacity,
        "copies_l": params.copies_l,
        "aging_interval": params.aging_interval,
        "generation_interval": config.generation_interval,
        "rng_seed": config.rng_seed,
    }
    row.update(report.metric_row())
    return {k: _cell(v) for k, v in row.items()}


def write_csv(rows: list[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def execute(config: ScenarioConfig):
    """Run one config; returns (report, event log)."""
    log = run(config)
    for warning in log.metadata.get("warnings", []):
        logger.warning(warning)
    return compute_report(log, config.audience_count), log


def run_single(
    config: ScenarioConfig, trace: Optional[str] = None, out: Optional[str] = None
) -> Report:
    """Run once, write the CSV row (to ``out`` or stdout) and optionally the trace."""
    report, log = execute(config)
    if trace is not None:
        try:
            with open(trace, "w", encoding="utf-8", newline="\n") as fh:
                log.write(fh)
        except OSError as exc:
            raise OSError(f"cannot write trace {trace}: {exc.strerror or exc}") from exc
    row = csv_row(config, report)
    if out is None:
        write_csv([row], sys.stdout)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                write_csv([row], fh)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
    return report


def _sweep_job(args):
    config, axis, value = args
    report, _ = execute(config)
    return csv_row(config, report, axis, value)


def sweep_configs(base: ScenarioConfig, spec: SweepSpec) -> list[tuple[ScenarioConfig, str]]:
    jobs = []
    for value in spec.values:
        config = apply_value(base, spec.axis, value)
        for seed in spec.seeds:
            jobs.append((replace(config, rng_seed=seed).validate(), value))
    return jobs


def run_sweep(base: ScenarioConfig, spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Run every (value, seed) pair; rows keep value order, then seed order.

    Writes ``results.csv`` and ``metadata.json`` into ``spec.output_dir``.
    """
    spec.validate()
    work = [(cfg, spec.axis, value) for cfg, value in sweep_configs(base, spec)]
    rows: list[dict] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_job, w) for w in work]
            for w, fut in zip(work, futures):
                try:
                    rows.append(fut.result())
                except Exception as exc:
                    raise SweepError(f"run for {spec.axis}={w[2]} failed: {exc}") from exc
    else:
        for w in work:
            try:
                rows.append(_sweep_job(w))
            except Exception as exc:
                raise SweepError(f"run for {spec.axis}={w[2]} failed: {exc}") from exc

    out_dir = Path(spec.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "results.csv", "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        meta = {
            "version": __version__,
            "axis": spec.axis,
            "values": list(spec.values),
            "seeds": list(spec.seeds),
            "base_settings": serialize_settings(base),
            "runs": [serialize_settings(cfg) for cfg, _, _ in work],
        }
        with open(out_dir / "metadata.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write sweep output in {out_dir}: {exc.strerror or exc}") from exc
    return rows


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowddtn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("settings")
    p_run.add_argument("--trace", help="write the event trace here")
    p_run.add_argument("--out", help="write the CSV row here instead of stdout")

    p_sweep = sub.add_parser("sweep", help="sweep one settings key")
    p_sweep.add_argument("settings")
    p_sweep.add_argument("--axis")
    p_sweep.add_argument("--values", help="comma-separated values")
    p_sweep.add_argument("--seeds", help="comma-separated integer seeds")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        settings = load_settings(_read(args.settings))
        if args.command == "run":
            run_single(settings.config, trace=args.trace, out=args.out)
            return EXIT_OK
        try:
            seeds = [parse_int(s) for s in split_list(args.seeds)] if args.seeds else None
        except ValueError as exc:
            raise ConfigError("--seeds", str(exc)) from None
        spec = sweep_from_settings(
            settings.sweep,
            axis=args.axis,
            values=split_list(args.values) if args.values else None,
            seeds=seeds,
            output_dir=args.out,
            default_seed=settings.config.rng_seed,
        )
        # parse every axis value before any run starts
        sweep_configs(settings.config, spec)
        rows = run_sweep(settings.config, spec, jobs=args.jobs)
        logger.info("wrote %d rows to %s", len(rows), spec.output_dir)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if getattr(exc, "filename", None) == args.settings else EXIT_RUNTIME
    except (OSError, SweepError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
