"""Whole-volume reconstruction driver.

Walks the missing cubes of a sampled volume in a density-driven order
(most known neighborhood first) and replaces each cube's missing pixels
with the real part of its area model. Later cubes see earlier results
as reusable samples with a reduced weight, so the cube loop is
sequentially dependent and runs in a fixed deterministic order.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .config import FsrConfig
from .model import DegenerateAreaError, build_area, generate_model


def _cube_starts(extent: int, cube: int) -> np.ndarray:
    return np.arange(0, extent, cube)


def _per_cube_sum(volume: np.ndarray, cube: int) -> np.ndarray:
    out = volume
    for axis in range(3):
        out = np.add.reduceat(out, _cube_starts(volume.shape[axis], cube), axis=axis)
    return out


def plan_order(known: np.ndarray, config: FsrConfig) -> list[tuple[int, int, int]]:
    """Order cube origins by how much known data surrounds them.

    The 0/1 mask is blurred with a zero-padded Gaussian (sigma
    ``order_sigma``, truncated at 3 sigma), summed per cube, and cubes
    are sorted by descending sum with ties resolved in ascending
    (t, y, x) raster order. Fully known cubes are dropped. Origins come
    back as (x, y, t) tuples.
    """
    known = np.asarray(known)
    cube = config.cube_size
    blurred = gaussian_filter(known.astype(np.float64), sigma=config.order_sigma,
                              mode="constant", truncate=3.0)
    sums = _per_cube_sum(blurred, cube)
    counts = _per_cube_sum(known.astype(np.int64), cube)

    # voxels per cube, honoring partial cubes at the far faces
    lens = []
    for axis in range(3):
        starts = _cube_starts(known.shape[axis], cube)
        ends = np.append(starts[1:], known.shape[axis])
        lens.append(ends - starts)
    voxels = lens[0][:, None, None] * lens[1][None, :, None] * lens[2][None, None, :]

    has_missing = counts < voxels
    ti, yi, xi = np.nonzero(has_missing)
    order = np.lexsort((xi, yi, ti, -sums[has_missing]))
    return [
        (int(xi[i]) * cube, int(yi[i]) * cube, int(ti[i]) * cube) for i in order
    ]


def reconstruct(sampled: np.ndarray, mask: np.ndarray, config: FsrConfig | None = None,
                threads: int = 1, progress=None, cube_hook=None) -> np.ndarray:
    """Fill every missing position of a sampled volume.

    ``sampled`` and ``mask`` share shape (frames, height, width); mask
    value 1 marks acquired positions, which are passed through
    untouched. Returns the full-precision float64 volume; quantize at
    export time. ``threads`` only widens the FFT worker pool and never
    changes the result. ``progress(done, total)`` and
    ``cube_hook(origin, trace)`` are optional callbacks, the latter
    receiving each cube's per-iteration ModelTrace.
    """
    if config is None:
        config = FsrConfig()
    sampled = np.asarray(sampled, dtype=np.float64)
    mask = np.asarray(mask)
    if sampled.shape != mask.shape:
        raise ValueError(f"volume {sampled.shape} and mask {mask.shape} differ in shape")
    known = mask != 0
    work = np.where(known, sampled, 0.0)
    recon = np.zeros_like(known)

    order = plan_order(known, config)
    workers = threads if threads and threads > 1 else None
    cube = config.cube_size
    b = config.border_width
    T, H, W = work.shape
    for done, (x, y, t) in enumerate(order, start=1):
        area = build_area(work, known, (x, y, t), config, reconstructed=recon)
        try:
            model, trace = generate_model(area, config, return_trace=True,
                                          workers=workers)
        except DegenerateAreaError as exc:
            raise DegenerateAreaError(
                f"cube at (x={x}, y={y}, t={t}) has an empty neighborhood"
            ) from exc
        ct = min(cube, T - t)
        cy = min(cube, H - y)
        cx = min(cube, W - x)
        win = (slice(t, t + ct), slice(y, y + cy), slice(x, x + cx))
        model_cube = model[b:b + ct, b:b + cy, b:b + cx]
        missing = ~known[win] & ~recon[win]
        target = work[win]
        target[missing] = model_cube[missing]
        recon[win] |= missing
        if cube_hook is not None:
            cube_hook((x, y, t), trace)
        if progress is not None:
            progress(done, len(order))
    return work
