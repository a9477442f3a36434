"""Raw grayscale video volume I/O.

Volumes live on disk as headerless 8-bit files (``.gray8``) holding the
frames back to back, each frame row-major. A JSON sidecar next to the
raw file records the geometry (keys ``width``, ``height``, ``frames``).
In memory a volume is a float64 ndarray indexed ``[t, y, x]``; masks and
label grids use the same layout with one byte per sample.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class VolumeError(Exception):
    """Malformed volume file or header."""


@dataclass(frozen=True)
class VolumeHeader:
    """Geometry of a raw volume file.

    ``bit_depth`` is always 8 for luma volumes; mask sidecars mark it
    "binary" on disk but are read back through the same header.
    """

    width: int
    height: int
    frames: int
    bit_depth: int = 8

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.frames <= 0:
            raise VolumeError(
                f"header dimensions must be positive, got "
                f"{self.width}x{self.height}x{self.frames}"
            )

    @property
    def n_samples(self) -> int:
        return self.width * self.height * self.frames

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape (frames, height, width)."""
        return (self.frames, self.height, self.width)

    @classmethod
    def from_shape(cls, shape) -> "VolumeHeader":
        frames, height, width = shape
        return cls(width=int(width), height=int(height), frames=int(frames))


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def read_sidecar(path) -> VolumeHeader:
    """Read the JSON sidecar belonging to a raw file."""
    sc = sidecar_path(path)
    try:
        meta = json.loads(sc.read_text())
    except FileNotFoundError:
        raise VolumeError(f"missing sidecar {sc}") from None
    except json.JSONDecodeError as exc:
        raise VolumeError(f"unparsable sidecar {sc}: {exc}") from None
    try:
        return VolumeHeader(
            width=int(meta["width"]),
            height=int(meta["height"]),
            frames=int(meta["frames"]),
        )
    except KeyError as exc:
        raise VolumeError(f"sidecar {sc} missing key {exc}") from None


def write_sidecar(path, header: VolumeHeader, extra: dict | None = None) -> None:
    meta = {"width": header.width, "height": header.height, "frames": header.frames}
    meta.update(extra or {})
    sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def load_raw(path, header: VolumeHeader | None = None) -> np.ndarray:
    """Read raw bytes into a uint8 array of shape (frames, height, width).

    The header may be given explicitly; otherwise it is read from the
    sidecar. Files longer than the declared geometry are accepted with a
    warning, shorter files are an error.
    """
    if header is None:
        header = read_sidecar(path)
    data = Path(path).read_bytes()
    need = header.n_samples
    if len(data) < need:
        raise VolumeError(
            f"{path}: file holds {len(data)} bytes but header "
            f"{header.width}x{header.height}x{header.frames} needs {need}"
        )
    if len(data) > need:
        warnings.warn(
            f"{path}: ignoring {len(data) - need} trailing bytes",
            RuntimeWarning,
            stacklevel=2,
        )
    arr = np.frombuffer(data[:need], dtype=np.uint8)
    return arr.reshape(header.shape).copy()


def save_raw(samples: np.ndarray, path, extra_sidecar: dict | None = None) -> None:
    """Write a uint8 (frames, height, width) array plus its sidecar."""
    samples = np.asarray(samples)
    if samples.ndim != 3:
        raise VolumeError(f"expected a 3-d array, got shape {samples.shape}")
    if samples.dtype != np.uint8:
        raise VolumeError(f"expected uint8 samples, got {samples.dtype}")
    header = VolumeHeader.from_shape(samples.shape)
    Path(path).write_bytes(np.ascontiguousarray(samples).tobytes())
    write_sidecar(path, header, extra_sidecar)


def quantize(volume: np.ndarray) -> np.ndarray:
    """Map working-precision luma to storage bytes.

    Clamps to [0, 255] and rounds halves away from zero, which on the
    clamped range is floor(x + 0.5).
    """
    clipped = np.clip(np.asarray(volume, dtype=np.float64), 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


def load_volume(path, header: VolumeHeader | None = None) -> np.ndarray:
    """Load a luma volume as float64, shape (frames, height, width)."""
    return load_raw(path, header).astype(np.float64)


def save_volume(volume: np.ndarray, path) -> None:
    """Store a volume as 8-bit raw plus sidecar, quantizing if needed."""
    save_raw(quantize(volume), path)


def load_mask(path, header: VolumeHeader | None = None) -> np.ndarray:
    """Load a sampling mask (uint8, values 0/1)."""
    mask = load_raw(path, header)
    bad = np.logical_and(mask != 0, mask != 1)
    if bad.any():
        raise VolumeError(f"{path}: mask holds values other than 0/1")
    return mask


def save_mask(mask: np.ndarray, path) -> None:
    mask = np.asarray(mask)
    if mask.dtype == np.bool_:
        mask = mask.astype(np.uint8)
    if not np.isin(mask, (0, 1)).all():
        raise VolumeError("mask holds values other than 0/1")
    save_raw(mask.astype(np.uint8), path, extra_sidecar={"bit_depth": "binary"})


def crop_borders(volume: np.ndarray, spatial_border: int, temporal_border: int) -> np.ndarray:
    """Cut a symmetric margin off every face of the volume.

    Requires 2*spatial_border < min(width, height) and
    2*temporal_border < frames so a non-empty interior remains.
    """
    volume = np.asarray(volume)
    if volume.ndim != 3:
        raise VolumeError(f"expected a 3-d array, got shape {volume.shape}")
    if spatial_border < 0 or temporal_border < 0:
        raise VolumeError("borders must be non-negative")
    frames, height, width = volume.shape
    if 2 * spatial_border >= min(width, height) or 2 * temporal_border >= frames:
        raise VolumeError(
            f"border ({spatial_border}, {temporal_border}) consumes the whole "
            f"{width}x{height}x{frames} volume"
        )
    sb, tb = spatial_border, temporal_border
    return volume[tb:frames - tb, sb:height - sb, sb:width - sb].copy()
