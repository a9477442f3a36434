"""Reconstruction parameter set and config file parsing."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

_INT_FIELDS = {"cube_size", "border_width", "fft_size", "iterations"}
_FLOAT_FIELDS = {"rho_hat", "gamma", "delta", "tau", "order_sigma"}


@dataclass(frozen=True)
class FsrConfig:
    """All knobs of the cube-wise reconstruction.

    The defaults are the tuned operating point: 4-cube inside a 32-cube
    transform window, 500 iterations, decay 0.7, compensation 0.5,
    reuse weight 0.5, prior control 16. ``order_sigma`` falls back to
    the cube size and controls only the processing-order filter.
    """

    cube_size: int = 4
    border_width: int = 14
    fft_size: int = 32
    iterations: int = 500
    rho_hat: float = 0.7
    gamma: float = 0.5
    delta: float = 0.5
    tau: float = 16.0
    order_sigma: float | None = None

    def __post_init__(self):
        if self.order_sigma is None:
            object.__setattr__(self, "order_sigma", float(self.cube_size))
        if self.cube_size < 1:
            raise ValueError(f"cube_size must be >= 1, got {self.cube_size}")
        if self.border_width < 0:
            raise ValueError(f"border_width must be >= 0, got {self.border_width}")
        if self.cube_size + 2 * self.border_width != self.fft_size:
            raise ValueError(
                f"cube_size + 2*border_width must equal fft_size, got "
                f"{self.cube_size} + 2*{self.border_width} != {self.fft_size}"
            )
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0.0 < self.rho_hat < 1.0:
            raise ValueError(f"rho_hat must lie in (0, 1), got {self.rho_hat}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.order_sigma > 0.0:
            raise ValueError(f"order_sigma must be positive, got {self.order_sigma}")

    def replace(self, **changes) -> "FsrConfig":
        return dataclasses.replace(self, **changes)

    def fingerprint(self) -> str:
        """Canonical one-line rendering, stable field order."""
        parts = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            parts.append(f"{f.name}={v:g}" if isinstance(v, float) else f"{f.name}={v}")
        return " ".join(parts)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "FsrConfig":
        unknown = set(mapping) - _INT_FIELDS - _FLOAT_FIELDS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)


def parse_config_file(path) -> dict:
    """Parse a key = value config file into typed values.

    Blank lines and '#' comments are skipped. Keys must match the
    config field names; values are cast to the field's type.
    """
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        try:
            if key in _INT_FIELDS:
                values[key] = int(raw)
            elif key in _FLOAT_FIELDS:
                values[key] = float(raw)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if "unknown key" in str(exc):
                raise
            raise ValueError(f"{path}:{lineno}: bad value {raw!r} for {key}") from None
    return values
