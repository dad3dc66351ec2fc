"""Command-line entry point ``mdkit``.

Exit codes: 0 success, 2 configuration error, 3 capture format error,
4 no micro-Doppler signature found.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .capture import CaptureFormatError, atomic_write_bytes, read_adc_capture
from .config import ConfigError, load_config, load_layout, load_radar
from .pipeline import SWEEP_PARAMS, run_pipeline, sweep, sweep_csv
from .spectral import rd_map, rd_peak

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPTURE = 3
EXIT_NO_SIGNATURE = 4

logger = logging.getLogger("mdkit")


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a pipeline from a config file")
    run.add_argument("--config", required=True, help="config path or bundled name (table1.cfg)")
    run.add_argument("--pipeline", choices=["simulate", "stmdse", "ftmdse-raw", "proposed"],
                     help="override pipeline.mode")
    run.add_argument("--seed", type=int, help="override scene.seed")
    run.add_argument("--out", type=Path, help="override pipeline.output_dir")

    inspect = sub.add_parser("inspect-capture", help="decode a raw capture and summarize it")
    inspect.add_argument("file", type=Path)
    inspect.add_argument("--layout", required=True, help="config file with a [capture] section")

    sw = sub.add_parser("sweep", help="closed-form spread and alias flags over one parameter")
    sw.add_argument("--config", required=True)
    sw.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    sw.add_argument("--values", required=True, type=_parse_values)
    sw.add_argument("--out", type=Path, help="also write sweep.csv into this directory")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.pipeline:
        config = replace(config, pipeline=args.pipeline.replace("-", "_"))
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    result = run_pipeline(config, output_dir=args.out)
    for name, path in result.files.items():
        print(f"wrote {path}")
    if not result.ok:
        print(result.message, file=sys.stderr)
        return EXIT_NO_SIGNATURE
    return EXIT_OK


def _cmd_inspect(args) -> int:
    layout = load_layout(args.layout)
    params = load_radar(args.layout)
    chirps = read_adc_capture(args.file, layout, params)
    s = chirps.samples
    print(f"file: {args.file}")
    print(f"chirps: {chirps.num_chirps}")
    print(f"samples_per_chirp: {chirps.samples_per_chirp}")
    print(f"rms: {np.sqrt(np.mean(np.abs(s) ** 2)):.6g}")
    print(f"peak_abs: {np.max(np.abs(s)):.6g}")
    if chirps.num_chirps >= 2:
        range_hz, doppler_hz, mag = rd_peak(rd_map(chirps))
        unit = "Hz" if params is not None else "cycles/sample"
        print(f"rd_peak_range: {range_hz:.6g} {unit}")
        print(f"rd_peak_doppler: {doppler_hz:.6g} {unit}")
        if params is not None:
            print(f"rd_peak_range_m: {params.range_from_beat(range_hz):.6g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    text = sweep_csv(sweep(config, args.param, args.values))
    sys.stdout.write(text)
    if args.out is not None:
        atomic_write_bytes(args.out / "sweep.csv", text.encode("ascii"))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "inspect-capture": _cmd_inspect, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CaptureFormatError as exc:
        print(f"capture error: {exc}", file=sys.stderr)
        return EXIT_CAPTURE
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CAPTURE if args.command == "inspect-capture" else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
