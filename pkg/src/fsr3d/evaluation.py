"""Scoring and reporting.

Quality is the whole-sequence PSNR over the volume interior: one MSE
pooled across every retained sample after cutting a border in all three
dimensions, then converted to decibels against peak 255. A plain
normalized-convolution fill serves as the sanity baseline that any real
reconstruction must beat.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve1d, distance_transform_edt

from .volume import crop_borders

PEAK = 255.0

CSV_COLUMNS = ("sequence", "density", "mode", "psnr_db", "mse", "runtime_s", "config")


@dataclass
class PsnrReport:
    """One scored run. ``psnr_db`` is math.inf when the MSE is zero."""

    psnr_db: float
    mse: float
    sequence: str = ""
    density: int | None = None
    mode: str = ""
    runtime_s: float | None = None
    config: str = ""


def psnr_volume(reference: np.ndarray, test: np.ndarray,
                spatial_border: int = 14, temporal_border: int = 14) -> PsnrReport:
    """Border-excluded whole-sequence PSNR of ``test`` against ``reference``.

    Both volumes are cropped by the given margins, the squared error is
    pooled over everything that remains, and a zero MSE is reported as
    an infinite PSNR.
    """
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ValueError(
            f"reference {reference.shape} and test {test.shape} differ in shape"
        )
    ref_i = crop_borders(reference, spatial_border, temporal_border)
    test_i = crop_borders(test, spatial_border, temporal_border)
    diff = ref_i - test_i
    mse = float(np.mean(diff * diff))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(PEAK * PEAK / mse)
    return PsnrReport(psnr_db=psnr, mse=mse)


def _gauss_kernel_1d(radius: int = 2, sigma: float = 1.5) -> np.ndarray:
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return k / k.sum()


def baseline_fill(sampled: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill missing pixels by local normalized averaging.

    Each missing position takes the Gaussian-weighted mean of the known
    samples in its 5x5x5 neighborhood; positions whose neighborhood is
    entirely unknown fall back to the nearest known sample. Known
    positions pass through unchanged.
    """
    sampled = np.asarray(sampled, dtype=np.float64)
    mask = np.asarray(mask)
    if sampled.shape != mask.shape:
        raise ValueError(f"volume {sampled.shape} and mask {mask.shape} differ in shape")
    known = mask != 0
    if not known.any():
        raise ValueError("mask marks no position as known; nothing to fill from")
    work = np.where(known, sampled, 0.0)

    k = _gauss_kernel_1d()
    num = work.copy()
    den = known.astype(np.float64)
    for axis in range(3):
        num = convolve1d(num, k, axis=axis, mode="constant")
        den = convolve1d(den, k, axis=axis, mode="constant")

    out = work.copy()
    covered = ~known & (den > 0.0)
    out[covered] = num[covered] / den[covered]

    orphan = ~known & ~covered
    if orphan.any():
        idx = distance_transform_edt(~known, return_distances=False,
                                     return_indices=True)
        out[orphan] = work[tuple(i[orphan] for i in idx)]
    return out


def _format_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "INF"
        return repr(value)
    return str(value)


def _row(report: PsnrReport) -> list[str]:
    return [
        report.sequence,
        "" if report.density is None else str(report.density),
        report.mode,
        _format_field(report.psnr_db),
        _format_field(report.mse),
        _format_field(report.runtime_s),
        report.config,
    ]


def emit_report(reports, path) -> None:
    """Write reports as CSV with a fixed column order and one header row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(_row(r))


def append_report(report: PsnrReport, path) -> None:
    """Append one row, writing the header first if the file is new."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            writer.writerow(CSV_COLUMNS)
        writer.writerow(_row(report))


def read_report(path) -> list[PsnrReport]:
    """Parse a CSV written by emit_report back into reports."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(PsnrReport(
                sequence=row["sequence"],
                density=int(row["density"]) if row["density"] else None,
                mode=row["mode"],
                psnr_db=math.inf if row["psnr_db"] == "INF" else float(row["psnr_db"]),
                mse=float(row["mse"]),
                runtime_s=float(row["runtime_s"]) if row["runtime_s"] else None,
                config=row["config"],
            ))
    return out
