"""Shared synthetic content generators and fixtures.

Clip content is generated with numpy's seeded Generator; that RNG only
shapes test content, never the shipped sampling patterns, which come
from the package's own counter-based hash.
"""

import numpy as np
import pytest
import scipy.ndimage as ndi

from fsr3d import FsrConfig, build_area


def textured_field(height, width, seed, blur=1.5, lo=20, hi=235):
    """Smooth random 2-d texture stretched to [lo, hi]."""
    rng = np.random.default_rng(seed)
    f = ndi.gaussian_filter(rng.standard_normal((height, width)), blur, mode="wrap")
    f = (f - f.min()) / (f.max() - f.min())
    return lo + f * (hi - lo)


def multiscale_field(height, width, seed,
                     octaves=((8, 1.0), (4, 0.6), (2, 0.35), (1, 0.2)),
                     lo=16, hi=240):
    """Texture with energy across several spatial scales."""
    rng = np.random.default_rng(seed)
    f = np.zeros((height, width))
    for blur, amp in octaves:
        f += amp * ndi.gaussian_filter(rng.standard_normal((height, width)), blur,
                                       mode="wrap")
    f = (f - f.min()) / (f.max() - f.min())
    return lo + f * (hi - lo)


def static_block_clip(frames, height, width, seed):
    """Static textured background with one small moving block."""
    bg = textured_field(height, width, seed)
    block = textured_field(12, 12, seed + 1, blur=1.0)
    clip = np.empty((frames, height, width))
    ry, rx = height - 24, width - 24
    for t in range(frames):
        clip[t] = bg
        by, bx = 6 + t % ry, 6 + (2 * t) % rx
        clip[t, by:by + 12, bx:bx + 12] = block
    return np.clip(np.round(clip), 0, 255)


def global_motion_clip(frames, height, width, seed, vy=1, vx=2):
    """Whole scene translating by (vy, vx) pixels per frame."""
    big = textured_field(height + frames * abs(vy), width + frames * abs(vx), seed)
    clip = np.empty((frames, height, width))
    for t in range(frames):
        clip[t] = big[t * vy:t * vy + height, t * vx:t * vx + width]
    return np.clip(np.round(clip), 0, 255)


def moving_texture_clip(frames, height, width, seed, vy=1, vx=1):
    """Multiscale texture translating slowly; spectrally rich training content."""
    big = multiscale_field(height + frames * abs(vy), width + frames * abs(vx), seed)
    clip = np.empty((frames, height, width))
    for t in range(frames):
        clip[t] = big[t * vy:t * vy + height, t * vx:t * vx + width]
    return np.clip(np.round(clip), 0, 255)


def moving_gradient_clip(frames=16, height=64, width=64):
    """Deterministic ramp plus fine texture drifting along x."""
    t = np.arange(frames)[:, None, None]
    y = np.arange(height)[None, :, None]
    x = np.arange(width)[None, None, :]
    ramp = 40.0 + 150.0 * ((x + 2 * t) % width) / width
    texture = 12.0 * np.sin(2 * np.pi * (x + 2 * t) / 5.0) * np.cos(2 * np.pi * y / 7.0)
    return np.clip(np.round(ramp + texture), 0, 255)


def random_area(seed, density, config, recon_frac=0.25):
    """Full-window reconstruction area with random A/R/B categories."""
    size = config.fft_size
    rng = np.random.default_rng(seed)
    vol = rng.uniform(0.0, 255.0, (size, size, size))
    known = rng.random((size, size, size)) < density
    if not known.any():
        known.flat[int(rng.integers(known.size))] = True
    recon = ~known & (rng.random((size, size, size)) < recon_frac)
    full_cfg = FsrConfig(cube_size=size, border_width=0, fft_size=size,
                         iterations=config.iterations, rho_hat=config.rho_hat,
                         gamma=config.gamma, delta=config.delta, tau=config.tau)
    return build_area(vol, known, (0, 0, 0), full_cfg, reconstructed=recon)


@pytest.fixture(scope="session")
def config8():
    """Small transform size where the direct-summation path is fast."""
    return FsrConfig(cube_size=8, border_width=0, fft_size=8, iterations=50)


@pytest.fixture
def default_config():
    return FsrConfig()
