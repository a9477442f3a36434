"""Non-regular sensor readout simulation.

Models a 4-way shared pixel sensor: every aligned 2x2 pixel group owns
one readout line per frame, so each group contributes exactly one pixel
at 25% density, two at 50%, three at 75%. The wiring order inside each
group is randomized once (the label grid); a periodic schedule of label
subsets then decides which pixels a frame reads out.

All randomness comes from a counter-based hash (splitmix64 finalizer)
so masks are reproducible bit for bit from the seed alone, independent
of numpy's RNG state or version.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .volume import VolumeError, load_raw, save_raw

_MASK64 = (1 << 64) - 1

# all orderings of the four labels, lexicographic; index into this table
# is what the hash selects per 2x2 group
PERMUTATIONS4 = tuple(itertools.permutations((1, 2, 3, 4)))

# subsets of the four in-group pixel positions, by cardinality, used by
# the fully random mode
_POSITION_SUBSETS = {
    c: tuple(itertools.combinations(range(4), c)) for c in (1, 2, 3)
}

# domain separation tags for the hash streams
_TAG_LABELS = 0x4C41424C
_TAG_SCHEDULE = 0x53434845
_TAG_RANDOM3D = 0x524E4433
_TAG_ROWOFF = 0x524F5746


def _mix64(x: int) -> int:
    """splitmix64 finalizer over python ints."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def hash_counter(seed: int, *counters: int) -> int:
    """Deterministic 64-bit hash of a seed and a counter tuple.

    The chain is h = mix(seed), then h = mix(h ^ c) per counter. Every
    consumer of randomness in this module draws through this function
    with its own tag as the first counter.
    """
    h = _mix64(seed & _MASK64)
    for c in counters:
        h = _mix64(h ^ (c & _MASK64))
    return h


def _mix64_vec(x: np.ndarray) -> np.ndarray:
    # same finalizer on uint64 arrays; unsigned wraparound is intended
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def _hash_counter_vec(seed: int, *counters) -> np.ndarray:
    h = _mix64_vec(np.asarray(np.uint64(seed & _MASK64)))
    for c in counters:
        h = _mix64_vec(h ^ np.asarray(c, dtype=np.uint64))
    return h


class SamplingMode(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    RANDOM3D = "random3d"


@dataclass(frozen=True)
class ReadoutSchedule:
    """Periodic sequence of label subsets, one subset per frame."""

    density: int
    frame_sets: tuple[tuple[int, ...], ...]

    @property
    def period(self) -> int:
        return len(self.frame_sets)

    @property
    def labels_per_frame(self) -> int:
        return self.density * 4 // 100


_CANONICAL_SETS = {
    25: tuple((lbl,) for lbl in (1, 2, 3, 4)),
    50: tuple(itertools.combinations((1, 2, 3, 4), 2)),
    75: tuple(itertools.combinations((1, 2, 3, 4), 3)),
}


def make_schedule(density: int, variant_seed: int | None = None) -> ReadoutSchedule:
    """Build the subset cycle for a density.

    25% cycles the four single labels (period 4), 50% all six label
    pairs (period 6), 75% all four triples (period 4). The canonical
    order is ascending; a variant seed applies a deterministic shuffle
    to the cycle, None keeps the canonical order.
    """
    if density not in _CANONICAL_SETS:
        raise ValueError(f"density must be 25, 50 or 75, got {density}")
    sets = list(_CANONICAL_SETS[density])
    if variant_seed is not None:
        # Fisher-Yates driven by the counter hash
        for i in range(len(sets) - 1, 0, -1):
            j = hash_counter(variant_seed, _TAG_SCHEDULE, i) % (i + 1)
            sets[i], sets[j] = sets[j], sets[i]
    return ReadoutSchedule(density=density, frame_sets=tuple(sets))


def gen_label_grid(width: int, height: int, seed: int) -> np.ndarray:
    """Randomize the readout order of every 2x2 pixel group.

    Returns a (height, width) uint8 grid of labels 1..4 where each
    aligned 2x2 block holds a permutation of {1,2,3,4}, drawn uniformly
    and independently per block from the seed.
    """
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise ValueError(f"dimensions must be positive and even, got {width}x{height}")
    bw, bh = width // 2, height // 2
    block_index = np.arange(bh * bw, dtype=np.uint64)
    h = _hash_counter_vec(seed, _TAG_LABELS, block_index)
    perm_table = np.array(PERMUTATIONS4, dtype=np.uint8)  # (24, 4)
    blocks = perm_table[h % np.uint64(24)]  # (bh*bw, 4) in order tl,tr,bl,br
    blocks = blocks.reshape(bh, bw, 2, 2)
    return blocks.transpose(0, 2, 1, 3).reshape(height, width)


def _row_group_shifts(n_groups: int, period: int, seed: int) -> np.ndarray:
    idx = np.arange(n_groups, dtype=np.uint64)
    h = _hash_counter_vec(seed, _TAG_ROWOFF, idx)
    return (h % np.uint64(period)).astype(np.int64)


def build_mask(
    labels: np.ndarray,
    schedule: ReadoutSchedule,
    frames: int,
    mode: SamplingMode | str,
    seed: int = 0,
    row_group_offsets: bool = False,
) -> np.ndarray:
    """Generate a (frames, height, width) uint8 sampling mask.

    STATIC applies the schedule's first subset to every frame, DYNAMIC
    cycles the subsets, RANDOM3D ignores the label wiring and picks an
    independent uniform position subset per 2x2 block per frame. With
    ``row_group_offsets`` each two-row group advances the cycle by its
    own seeded shift instead of using one global phase.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.shape[0] % 2 or labels.shape[1] % 2:
        raise ValueError(f"label grid must be 2-d with even sides, got {labels.shape}")
    if frames <= 0:
        raise ValueError(f"frames must be positive, got {frames}")
    mode = SamplingMode(mode)
    height, width = labels.shape
    period = schedule.period

    if mode is SamplingMode.RANDOM3D:
        return _random3d_mask(height, width, frames, schedule.labels_per_frame, seed)

    shifts = None
    if row_group_offsets:
        shifts = _row_group_shifts(height // 2, period, seed)

    set_masks = np.stack(
        [np.isin(labels, s) for s in schedule.frame_sets]
    )  # (period, height, width)
    mask = np.empty((frames, height, width), dtype=np.uint8)
    for t in range(frames):
        step = 0 if mode is SamplingMode.STATIC else t % period
        if shifts is None:
            mask[t] = set_masks[step]
        else:
            per_row = np.repeat((step + shifts) % period, 2)  # phase per pixel row
            mask[t] = set_masks[per_row[:, None], np.arange(height)[:, None],
                                np.arange(width)[None, :]]
    return mask


def _random3d_mask(height, width, frames, cardinality, seed):
    subsets = np.array(_POSITION_SUBSETS[cardinality])
    onehot = np.zeros((len(subsets), 4), dtype=np.uint8)
    for i, sub in enumerate(subsets):
        onehot[i, list(sub)] = 1
    bh, bw = height // 2, width // 2
    block_index = np.arange(bh * bw, dtype=np.uint64).reshape(1, bh, bw)
    t_index = np.arange(frames, dtype=np.uint64).reshape(frames, 1, 1)
    h = _hash_counter_vec(seed, _TAG_RANDOM3D, t_index, block_index)
    choice = onehot[h % np.uint64(len(subsets))]  # (frames, bh, bw, 4)
    choice = choice.reshape(frames, bh, bw, 2, 2)
    return choice.transpose(0, 1, 3, 2, 4).reshape(frames, height, width)


def apply_mask(volume: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero out the positions a mask did not acquire.

    Returns the sampled volume (float64) together with the mask so the
    pair can flow into reconstruction as a unit.
    """
    volume = np.asarray(volume, dtype=np.float64)
    mask = np.asarray(mask)
    if volume.shape != mask.shape:
        raise ValueError(f"volume {volume.shape} and mask {mask.shape} differ in shape")
    return volume * (mask != 0), mask


def save_labels(labels: np.ndarray, path) -> None:
    """Serialize a label grid through the raw byte format (one frame)."""
    labels = np.asarray(labels, dtype=np.uint8)
    save_raw(labels[None], path, extra_sidecar={"kind": "labels"})


def load_labels(path) -> np.ndarray:
    grid = load_raw(path)
    if grid.shape[0] != 1:
        raise VolumeError(f"{path}: label grids are single-frame, got {grid.shape[0]} frames")
    labels = grid[0]
    if labels.min() < 1 or labels.max() > 4:
        raise VolumeError(f"{path}: labels must lie in 1..4")
    return labels
