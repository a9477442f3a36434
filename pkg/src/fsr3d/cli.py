"""Command line front end.

Subcommands: sample, reconstruct, evaluate, pipeline. Every run that
writes files also writes a JSON manifest carrying the seeds, the
resolved parameter set and SHA-256 digests of the inputs so the run can
be reproduced bit for bit. Progress goes to stderr; stdout stays
machine-parsable.

Exit codes: 0 success, 1 usage error, 2 I/O or file format error,
3 algorithmic abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from .config import FsrConfig, parse_config_file
from .evaluation import append_report, baseline_fill, emit_report, psnr_volume
from .model import DegenerateAreaError
from .reconstruct import reconstruct
from .sampling import apply_mask, build_mask, gen_label_grid, make_schedule, save_labels
from .volume import (
    VolumeError,
    load_mask,
    load_volume,
    quantize,
    save_mask,
    save_raw,
)

VERSION = "0.1.0"

_CONFIG_FLAGS = (
    ("cube_size", int), ("border_width", int), ("fft_size", int),
    ("iterations", int), ("rho_hat", float), ("gamma", float),
    ("delta", float), ("tau", float), ("order_sigma", float),
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; usage problems are 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _add_config_args(parser):
    group = parser.add_argument_group("reconstruction parameters")
    group.add_argument("--config", metavar="FILE",
                       help="key = value parameter file; flags override it")
    for name, typ in _CONFIG_FLAGS:
        group.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None,
                           dest=name, help=f"override {name}")


def _resolve_config(args) -> FsrConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for name, _ in _CONFIG_FLAGS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return FsrConfig.from_mapping(values)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path, payload: dict) -> None:
    payload = {"tool": "fsr3d", "version": VERSION, **payload}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _progress_printer(label: str):
    def cb(done, total):
        if done % 64 == 0 or done == total:
            print(f"{label}: cube {done}/{total}", file=sys.stderr, flush=True)
    return cb


def _require_files(*paths):
    for p in paths:
        if not Path(p).is_file():
            raise VolumeError(f"missing input file {p}")


def cmd_sample(args) -> int:
    schedule = make_schedule(args.density, args.schedule_seed)
    if args.dry_run:
        print(json.dumps({
            "command": "sample",
            "input": str(args.input),
            "density": args.density,
            "mode": args.mode,
            "seed": args.seed,
            "schedule_period": schedule.period,
            "frame_sets": [list(s) for s in schedule.frame_sets],
        }, indent=2))
        return 0

    _require_files(args.input)
    volume = load_volume(args.input)
    frames, height, width = volume.shape
    labels = gen_label_grid(width, height, args.seed)
    mask = build_mask(labels, schedule, frames, args.mode, seed=args.seed,
                      row_group_offsets=args.row_group_offsets)
    sampled, _ = apply_mask(volume, mask)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    sampled_path = out_dir / f"{stem}_sampled.gray8"
    mask_path = out_dir / f"{stem}_mask.gray8"
    labels_path = out_dir / f"{stem}_labels.gray8"
    save_raw(quantize(sampled), sampled_path)
    save_mask(mask, mask_path)
    save_labels(labels, labels_path)
    _write_manifest(out_dir / f"{stem}_sample_manifest.json", {
        "command": "sample",
        "input": {"path": str(args.input), "sha256": _sha256(args.input)},
        "seed": args.seed,
        "schedule_seed": args.schedule_seed,
        "density": args.density,
        "mode": args.mode,
        "row_group_offsets": args.row_group_offsets,
        "schedule": {"density": schedule.density, "period": schedule.period,
                     "frame_sets": [list(s) for s in schedule.frame_sets]},
        "outputs": [str(sampled_path), str(mask_path), str(labels_path)],
    })
    print(f"wrote {sampled_path} {mask_path} {labels_path}")
    return 0


def cmd_reconstruct(args) -> int:
    config = _resolve_config(args)
    if args.dry_run:
        print(json.dumps({
            "command": "reconstruct",
            "input": str(args.input),
            "mask": str(args.mask),
            "output": str(args.output),
            "threads": args.threads,
            "config": config.fingerprint(),
        }, indent=2))
        return 0
    _require_files(args.input, args.mask)
    sampled = load_volume(args.input)
    mask = load_mask(args.mask)
    if sampled.shape != mask.shape:
        raise VolumeError(
            f"sampled volume {sampled.shape} and mask {mask.shape} differ in shape"
        )
    progress = _progress_printer("reconstruct") if args.progress else None
    t0 = time.perf_counter()
    filled = reconstruct(sampled, mask, config, threads=args.threads,
                         progress=progress)
    runtime = time.perf_counter() - t0
    save_raw(quantize(filled), args.output)
    _write_manifest(Path(args.output).with_name(Path(args.output).stem + "_manifest.json"), {
        "command": "reconstruct",
        "inputs": {
            "sampled": {"path": str(args.input), "sha256": _sha256(args.input)},
            "mask": {"path": str(args.mask), "sha256": _sha256(args.mask)},
        },
        "threads": args.threads,
        "config": dataclasses.asdict(config),
        "config_fingerprint": config.fingerprint(),
        "runtime_s": runtime,
        "output": str(args.output),
    })
    print(f"wrote {args.output} ({runtime:.1f} s)")
    return 0


def _format_psnr(value: float) -> str:
    return "INF" if math.isinf(value) else f"{value:.2f}"


def cmd_evaluate(args) -> int:
    _require_files(args.reference, args.test)
    reference = load_volume(args.reference)
    test = load_volume(args.test)
    if reference.shape != test.shape:
        raise VolumeError(
            f"reference {reference.shape} and test {test.shape} differ in shape"
        )
    report = psnr_volume(reference, test, args.spatial_border, args.temporal_border)
    report.sequence = args.sequence or Path(args.reference).stem
    report.density = args.density
    report.mode = args.mode or ""
    print(f"PSNR {_format_psnr(report.psnr_db)} dB  MSE {report.mse:.6g}")
    if args.csv:
        append_report(report, args.csv)
    return 0


def cmd_pipeline(args) -> int:
    config = _resolve_config(args)
    modes = args.mode or ["dynamic"]
    out_dir = Path(args.out_dir)
    csv_path = Path(args.csv) if args.csv else out_dir / "report.csv"
    if args.dry_run:
        print(json.dumps({
            "command": "pipeline",
            "input": str(args.input),
            "density": args.density,
            "modes": modes,
            "seed": args.seed,
            "baseline": args.baseline,
            "threads": args.threads,
            "out_dir": str(out_dir),
            "csv": str(csv_path),
            "config": config.fingerprint(),
        }, indent=2))
        return 0
    _require_files(args.input)
    volume = load_volume(args.input)
    frames, height, width = volume.shape
    stem = Path(args.input).stem
    out_dir.mkdir(parents=True, exist_ok=True)

    schedule = make_schedule(args.density, args.schedule_seed)
    labels = gen_label_grid(width, height, args.seed)
    reports = []
    runtimes = {}
    outputs = []
    for mode in modes:
        mask = build_mask(labels, schedule, frames, mode, seed=args.seed,
                          row_group_offsets=args.row_group_offsets)
        sampled, _ = apply_mask(volume, mask)
        progress = _progress_printer(mode) if args.progress else None
        t0 = time.perf_counter()
        filled = reconstruct(sampled, mask, config, threads=args.threads,
                             progress=progress)
        runtimes[mode] = time.perf_counter() - t0

        sampled_path = out_dir / f"{stem}_{mode}_sampled.gray8"
        mask_path = out_dir / f"{stem}_{mode}_mask.gray8"
        recon_path = out_dir / f"{stem}_{mode}_recon.gray8"
        save_raw(quantize(sampled), sampled_path)
        save_mask(mask, mask_path)
        save_raw(quantize(filled), recon_path)
        outputs += [str(sampled_path), str(mask_path), str(recon_path)]

        # scored on full-precision values; the stored volume is the
        # quantized rendering of the same reconstruction
        report = psnr_volume(volume, filled, args.spatial_border, args.temporal_border)
        report.sequence = stem
        report.density = args.density
        report.mode = mode
        report.config = config.fingerprint()
        reports.append(report)

        if args.baseline:
            base = baseline_fill(sampled, mask)
            base_report = psnr_volume(volume, base, args.spatial_border,
                                      args.temporal_border)
            base_report.sequence = f"{stem}/baseline"
            base_report.density = args.density
            base_report.mode = mode
            base_report.config = config.fingerprint()
            reports.append(base_report)

    emit_report(reports, csv_path)
    _write_manifest(out_dir / f"{stem}_pipeline_manifest.json", {
        "command": "pipeline",
        "input": {"path": str(args.input), "sha256": _sha256(args.input)},
        "seed": args.seed,
        "schedule_seed": args.schedule_seed,
        "density": args.density,
        "modes": modes,
        "row_group_offsets": args.row_group_offsets,
        "baseline": args.baseline,
        "threads": args.threads,
        "config": dataclasses.asdict(config),
        "config_fingerprint": config.fingerprint(),
        "spatial_border": args.spatial_border,
        "temporal_border": args.temporal_border,
        "runtime_s": runtimes,
        "csv": str(csv_path),
        "outputs": outputs,
    })
    for r in reports:
        print(f"{r.sequence} {r.mode}: PSNR {_format_psnr(r.psnr_db)} dB")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsr3d",
                     description="Non-regular video sensor simulation and reconstruction")
    parser.add_argument("--version", action="version", version=f"fsr3d {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="apply a sampling pattern to a volume")
    p.add_argument("--input", required=True, help="raw volume (.gray8 with sidecar)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--density", type=int, choices=(25, 50, 75), default=25)
    p.add_argument("--mode", choices=("static", "dynamic", "random3d"), default="dynamic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule-seed", type=int, default=None)
    p.add_argument("--row-group-offsets", action="store_true")
    p.add_argument("--dry-run", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reconstruct", help="fill the missing pixels of a sampled volume")
    p.add_argument("--input", required=True, help="sampled volume")
    p.add_argument("--mask", required=True, help="sampling mask")
    p.add_argument("--output", required=True)
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="FFT worker threads; results identical for any value")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--dry-run", action="store_true")
    _add_config_args(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="border-excluded PSNR of a volume pair")
    p.add_argument("--reference", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--spatial-border", type=int, default=14)
    p.add_argument("--temporal-border", type=int, default=14)
    p.add_argument("--csv", default=None, help="append the row to this report")
    p.add_argument("--sequence", default=None)
    p.add_argument("--density", type=int, choices=(25, 50, 75), default=None)
    p.add_argument("--mode", choices=("static", "dynamic", "random3d"), default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="sample, reconstruct and evaluate in one go")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--density", type=int, choices=(25, 50, 75), default=25)
    p.add_argument("--mode", choices=("static", "dynamic", "random3d"),
                   action="append", default=None,
                   help="repeatable; every mode adds a CSV row")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule-seed", type=int, default=None)
    p.add_argument("--row-group-offsets", action="store_true")
    p.add_argument("--baseline", action="store_true",
                   help="also score the naive normalized-convolution fill")
    p.add_argument("--spatial-border", type=int, default=14)
    p.add_argument("--temporal-border", type=int, default=14)
    p.add_argument("--csv", default=None, help="report path, default <out-dir>/report.csv")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--progress", action="store_true")
    p.add_argument("--dry-run", action="store_true")
    _add_config_args(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DegenerateAreaError as exc:
        print(f"fsr3d: algorithmic abort: {exc}", file=sys.stderr)
        return 3
    except (VolumeError, OSError) as exc:
        print(f"fsr3d: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fsr3d: usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
