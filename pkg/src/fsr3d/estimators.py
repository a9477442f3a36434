"""Estimator-style wrappers around the sampling and reconstruction steps.

Both classes follow the sklearn transformer protocol (``fit`` /
``transform`` / ``get_params``) so a sensor simulation and its
reconstruction compose in a ``sklearn.pipeline.Pipeline``. Volumes are
3-d float arrays (frames, height, width); missing positions travel
between the two stages as NaN, the same marker imputers use.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .config import FsrConfig
from .reconstruct import reconstruct
from .sampling import build_mask, gen_label_grid, make_schedule


def check_volume(X, allow_nan: bool = False) -> np.ndarray:
    """Validate a (frames, height, width) float volume."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"expected a 3-d volume (frames, height, width), got shape {X.shape}")
    if X.size == 0:
        raise ValueError("volume is empty")
    if not allow_nan and np.isnan(X).any():
        raise ValueError("volume holds NaN values")
    if np.isinf(X).any():
        raise ValueError("volume holds infinite values")
    return X


class NonRegularSampler(TransformerMixin, BaseEstimator):
    """Simulated sensor readout as a transformer.

    ``fit`` wires the label grid for the volume's spatial extent from
    the seed; ``transform`` drops every position the readout schedule
    does not acquire, marking it NaN.

    Parameters
    ----------
    density : int
        Percentage of pixels read out per frame, one of 25, 50, 75.
    mode : str
        "static", "dynamic" or "random3d".
    seed : int
        Drives the label wiring and any per-block randomness.
    schedule_seed : int or None
        Shuffles the subset cycle; None keeps the canonical order.
    row_group_offsets : bool
        Give every two-row group its own seeded schedule phase.
    """

    def __init__(self, density: int = 25, mode: str = "dynamic", seed: int = 0,
                 schedule_seed: int | None = None, row_group_offsets: bool = False):
        self.density = density
        self.mode = mode
        self.seed = seed
        self.schedule_seed = schedule_seed
        self.row_group_offsets = row_group_offsets

    def fit(self, X, y=None):
        X = check_volume(X)
        _, height, width = X.shape
        self.schedule_ = make_schedule(self.density, self.schedule_seed)
        self.labels_ = gen_label_grid(width, height, self.seed)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "labels_")
        X = check_volume(X)
        if X.shape[1:] != self.labels_.shape:
            raise ValueError(
                f"volume spatial extent {X.shape[1:]} does not match fitted "
                f"label grid {self.labels_.shape}"
            )
        mask = build_mask(self.labels_, self.schedule_, X.shape[0], self.mode,
                          seed=self.seed, row_group_offsets=self.row_group_offsets)
        out = X.copy()
        out[mask == 0] = np.nan
        return out


class FrequencySelectiveReconstructor(TransformerMixin, BaseEstimator):
    """Cube-wise spectral reconstruction as a transformer.

    ``transform`` fills every NaN position of the input volume; known
    values pass through bit-exactly. Parameters mirror the
    reconstruction config one to one, plus the FFT worker count.
    """

    def __init__(self, cube_size: int = 4, border_width: int = 14, fft_size: int = 32,
                 iterations: int = 500, rho_hat: float = 0.7, gamma: float = 0.5,
                 delta: float = 0.5, tau: float = 16.0,
                 order_sigma: float | None = None, threads: int = 1):
        self.cube_size = cube_size
        self.border_width = border_width
        self.fft_size = fft_size
        self.iterations = iterations
        self.rho_hat = rho_hat
        self.gamma = gamma
        self.delta = delta
        self.tau = tau
        self.order_sigma = order_sigma
        self.threads = threads

    def fit(self, X, y=None):
        check_volume(X, allow_nan=True)
        self.config_ = FsrConfig(
            cube_size=self.cube_size,
            border_width=self.border_width,
            fft_size=self.fft_size,
            iterations=self.iterations,
            rho_hat=self.rho_hat,
            gamma=self.gamma,
            delta=self.delta,
            tau=self.tau,
            order_sigma=self.order_sigma,
        )
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "config_")
        X = check_volume(X, allow_nan=True)
        known = ~np.isnan(X)
        if known.all():
            return X.copy()
        filled = reconstruct(np.where(known, X, 0.0), known.astype(np.uint8),
                             self.config_, threads=self.threads)
        return filled
