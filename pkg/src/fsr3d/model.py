"""Cube-wise Fourier model generation.

One reconstruction area is a cube plus its border, transformed at size
``fft_size`` per axis. The model grows greedily: each iteration picks
the basis function whose weighted projection onto the current residual
carries the most energy (biased by a density-dependent low-frequency
prior), adds a compensated fraction of that projection to the model and
subtracts its footprint from the weighted residual spectrum.

Two implementations share every selection rule: ``generate_model`` runs
in the frequency domain behind a compiled kernel, and
``generate_model_spatial_oracle`` evaluates the defining sums directly
against an explicit basis matrix. Tests hold them to identical
selection sequences.

Arrays are indexed ``[t, y, x]``; spectra accordingly carry the
temporal frequency on axis 0. Coordinate tuples in the public API are
``(x, y, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from numba import njit

# relative slack under the running maximum inside which selection
# metrics count as tied; ties go to the deterministic rank order below
TIE_REL = 1e-9

CATEGORY_B = 0  # missing
CATEGORY_A = 1  # originally sampled
CATEGORY_R = 2  # previously reconstructed


class DegenerateAreaError(RuntimeError):
    """Raised when an area holds no usable samples (no A or R positions)."""


def centered_index(k: int | np.ndarray, n: int):
    """Map a transform bin to its signed frequency: k for k <= n//2, else k - n."""
    k = np.asarray(k)
    return np.where(k <= n // 2, k, k - n)


def decay_weight(m, n, p, config) -> float:
    """Distance decay of a sample's influence inside the area.

    Decays as rho_hat to the Euclidean distance from the (fractional)
    area center, evaluated at area coordinates (m, n, p).
    """
    size = config.fft_size
    c = (size - 1) / 2.0
    dist = np.sqrt(
        (np.asarray(m) - c) ** 2 + (np.asarray(n) - c) ** 2 + (np.asarray(p) - c) ** 2
    )
    return config.rho_hat ** dist


@lru_cache(maxsize=8)
def _decay_table(size: int, rho_hat: float) -> np.ndarray:
    c = (size - 1) / 2.0
    ax = (np.arange(size) - c) ** 2
    dist = np.sqrt(ax[:, None, None] + ax[None, :, None] + ax[None, None, :])
    table = rho_hat ** dist
    table.setflags(write=False)
    return table


@lru_cache(maxsize=8)
def _prior_base(size: int) -> np.ndarray:
    # radial frequency normalized so the axis-aligned Nyquist bin sits at
    # sqrt(2)/2; the 3-d corner would go negative and is clamped to 0
    k = centered_index(np.arange(size), size).astype(np.float64) / size
    r2 = k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2
    base = np.maximum(0.0, 1.0 - np.sqrt(2.0) * np.sqrt(r2))
    base.setflags(write=False)
    return base


@lru_cache(maxsize=8)
def _tie_rank(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic preference order over spectrum bins.

    Bins are ranked by (|q~|, |l~|, |k~|) of the centered frequencies,
    temporal axis first, with the raw (q, l, k) index as final
    tie-breaker. Returns the rank permutation and its inverse.
    """
    raw = np.arange(size)
    cen = np.abs(centered_index(raw, size))
    shape = (size, size, size)
    q_raw, l_raw, k_raw = np.meshgrid(raw, raw, raw, indexing="ij")
    q_abs, l_abs, k_abs = np.meshgrid(cen, cen, cen, indexing="ij")
    keys = (k_raw.ravel(), l_raw.ravel(), q_raw.ravel(),
            k_abs.ravel(), l_abs.ravel(), q_abs.ravel())
    rank = np.lexsort(keys).astype(np.int64)
    rank_pos = np.empty_like(rank)
    rank_pos[rank] = np.arange(rank.size, dtype=np.int64)
    rank.setflags(write=False)
    rank_pos.setflags(write=False)
    return rank, rank_pos


@dataclass
class ReconstructionArea:
    """Windowed view of the volume around one cube.

    ``s`` holds the observed signal (0 where nothing is known),
    ``category`` marks each position as missing (0), originally sampled
    (1) or previously reconstructed (2), and ``w`` is the per-position
    weight: decay on original samples, decay times the reuse factor on
    reconstructed ones, 0 on missing. ``origin`` is the (x, y, t) of
    the area's first position in volume coordinates, possibly negative
    near volume faces.
    """

    s: np.ndarray
    category: np.ndarray
    w: np.ndarray
    origin: tuple[int, int, int]


def build_area(sampled, known, cube_origin, config, reconstructed=None) -> ReconstructionArea:
    """Window the volume around a cube and attach categories and weights.

    ``sampled`` must already contain reconstructed values at positions
    marked in ``reconstructed``. Positions outside the volume become
    missing with weight 0.
    """
    sampled = np.asarray(sampled, dtype=np.float64)
    known = np.asarray(known, dtype=bool)
    if reconstructed is None:
        reconstructed = np.zeros_like(known)
    else:
        reconstructed = np.asarray(reconstructed, dtype=bool)
    if sampled.shape != known.shape or sampled.shape != reconstructed.shape:
        raise ValueError("volume and mask shapes differ")
    x, y, t = cube_origin
    if x % config.cube_size or y % config.cube_size or t % config.cube_size:
        raise ValueError(f"cube origin {cube_origin} not aligned to cube grid")

    size = config.fft_size
    b = config.border_width
    T, H, W = sampled.shape
    ot, oy, ox = t - b, y - b, x - b
    t0, t1 = max(0, ot), min(T, ot + size)
    y0, y1 = max(0, oy), min(H, oy + size)
    x0, x1 = max(0, ox), min(W, ox + size)

    s = np.zeros((size, size, size))
    category = np.zeros((size, size, size), dtype=np.uint8)
    dest = (slice(t0 - ot, t1 - ot), slice(y0 - oy, y1 - oy), slice(x0 - ox, x1 - ox))
    src = (slice(t0, t1), slice(y0, y1), slice(x0, x1))
    cat_win = np.where(known[src], CATEGORY_A,
                       np.where(reconstructed[src], CATEGORY_R, CATEGORY_B))
    category[dest] = cat_win
    s[dest] = np.where(cat_win != CATEGORY_B, sampled[src], 0.0)

    rho = _decay_table(size, config.rho_hat)
    w = np.where(category == CATEGORY_A, rho,
                 np.where(category == CATEGORY_R, config.delta * rho, 0.0))
    return ReconstructionArea(s=s, category=category, w=w, origin=(ox, oy, ot))


def effective_data(area: ReconstructionArea, config) -> float:
    """Weighted share of usable samples in the area, in [0, 1]."""
    rho = _decay_table(config.fft_size, config.rho_hat)
    return float(area.w.sum() / rho.sum())


@dataclass
class FrequencyPrior:
    wf: np.ndarray
    alpha: float


def frequency_prior(omega: float, config) -> FrequencyPrior:
    """Low-frequency selection bias for a given effective data share.

    The exponent alpha = -ln(omega)/tau vanishes for a fully sampled
    area (flat prior) and grows as samples get scarce, suppressing high
    frequencies. omega must be positive.
    """
    if not omega > 0.0:
        raise ValueError(f"effective data share must be positive, got {omega}")
    if omega > 1.0 + 1e-12:
        raise ValueError(f"effective data share exceeds 1: {omega}")
    alpha = -np.log(min(omega, 1.0)) / config.tau
    base = _prior_base(config.fft_size)
    wf = base ** (2.0 * alpha)  # 0**0 == 1 keeps the clamped bins alive at alpha 0
    return FrequencyPrior(wf=wf, alpha=float(alpha))


@dataclass
class ModelTrace:
    """Per-iteration record of one model generation.

    ``selections`` holds flat C-order indices into the spectrum,
    ``energies[i]`` the weighted residual energy sum(w * |r|^2) after i
    iterations (so it has one more entry than iterations). ``spectrum``
    is the final model spectrum when the frequency path produced the
    trace.
    """

    selections: np.ndarray
    coefficients: np.ndarray
    energies: np.ndarray
    spectrum: np.ndarray | None = field(default=None, repr=False)


@njit(cache=True)
def _mp_iterations(Rw, R, W, wf, rank, n_iter, gamma, G, sel_out, coef_out,
                   energy_out):
    size0, size1, size2 = Rw.shape
    total = size0 * size1 * size2
    Rf = Rw.reshape(total)
    Rr = R.reshape(total)
    Wf = W.reshape(total)
    wff = wf.reshape(total)
    Gf = G.reshape(total)
    W000 = Wf[0]
    metric = np.empty(total, np.float64)

    for it in range(n_iter):
        # one pass gives both the selection metric and, via the cross
        # Parseval sum Re<Rw, R>/total, the weighted residual energy
        # sum(w * |r|^2) of the state entering this iteration
        mx = -1.0
        cross = 0.0
        for i in range(total):
            a = Rf[i]
            b = Rr[i]
            v = (a.real * a.real + a.imag * a.imag) * wff[i]
            metric[i] = v
            if v > mx:
                mx = v
            cross += a.real * b.real + a.imag * b.imag
        energy_out[it] = cross / total
        thresh = mx * (1.0 - TIE_REL)
        win = rank[0]
        for j in range(total):
            if metric[rank[j]] >= thresh:
                win = rank[j]
                break

        c = gamma * Rf[win] / W000
        Gf[win] += total * c
        Rr[win] -= total * c
        u = win // (size1 * size2)
        rem = win - u * size1 * size2
        v_ = rem // size2
        z = rem - v_ * size2

        for k in range(size0):
            ku = k - u
            if ku < 0:
                ku += size0
            for l in range(size1):
                lv = l - v_
                if lv < 0:
                    lv += size1
                bi = (k * size1 + l) * size2
                bw = (ku * size1 + lv) * size2
                # wrapped innermost index splits into two contiguous runs
                for q in range(z):
                    Rf[bi + q] -= c * Wf[bw + q - z + size2]
                for q in range(z, size2):
                    Rf[bi + q] -= c * Wf[bw + q - z]
        sel_out[it] = win
        coef_out[it] = c

    cross = 0.0
    for i in range(total):
        a = Rf[i]
        b = Rr[i]
        cross += a.real * b.real + a.imag * b.imag
    energy_out[n_iter] = cross / total


def generate_model(area: ReconstructionArea, config, return_trace: bool = False,
                   workers: int | None = None):
    """Grow the Fourier model of one area in the frequency domain.

    Returns the real part of the model over the full area (float64,
    fft_size cubed). With ``return_trace`` also returns the
    per-iteration ModelTrace. ``workers`` is handed to the FFTs only;
    results are identical for any worker count.
    """
    size = config.fft_size
    if area.s.shape != (size, size, size):
        raise ValueError(f"area shape {area.s.shape} does not match fft_size {size}")
    omega = effective_data(area, config)
    if omega <= 0.0:
        raise DegenerateAreaError(
            f"area at origin {area.origin} holds no usable samples"
        )
    prior = frequency_prior(omega, config)
    rank, _ = _tie_rank(size)

    W = sfft.fftn(area.w, workers=workers)
    Rw = sfft.fftn(area.s * area.w, workers=workers)
    R = sfft.fftn(area.s, workers=workers)
    G = np.zeros((size, size, size), dtype=np.complex128)
    n = config.iterations
    selections = np.empty(n, dtype=np.int64)
    coefficients = np.empty(n, dtype=np.complex128)
    energies = np.empty(n + 1, dtype=np.float64)
    _mp_iterations(Rw, R, W, prior.wf, rank, n, config.gamma,
                   G, selections, coefficients, energies)
    model = sfft.ifftn(G, workers=workers).real
    if return_trace:
        return model, ModelTrace(selections, coefficients, energies, spectrum=G)
    return model


def _select_winner(metric: np.ndarray, rank_pos: np.ndarray) -> int:
    mx = metric.max()
    candidates = np.flatnonzero(metric >= mx * (1.0 - TIE_REL))
    return int(candidates[np.argmin(rank_pos[candidates])])


def generate_model_spatial_oracle(area: ReconstructionArea, config,
                                  return_trace: bool = False):
    """Reference model generation by direct summation.

    Mirrors generate_model exactly but evaluates projections, literal
    per-basis normalizers and updates against an explicit basis matrix,
    with no transforms anywhere. Quadratic in the area volume, so meant
    for small transform sizes.
    """
    size = config.fft_size
    if size > 16:
        raise ValueError("direct-summation path only supports fft_size <= 16")
    if area.s.shape != (size, size, size):
        raise ValueError(f"area shape {area.s.shape} does not match fft_size {size}")
    omega = effective_data(area, config)
    if omega <= 0.0:
        raise DegenerateAreaError(
            f"area at origin {area.origin} holds no usable samples"
        )
    prior = frequency_prior(omega, config)
    _, rank_pos = _tie_rank(size)
    wf = prior.wf.ravel()
    total = size ** 3

    # basis matrix: rows are basis functions over flattened samples
    e1 = np.exp(2j * np.pi * np.outer(np.arange(size), np.arange(size)) / size)
    phi = (e1[:, None, None, :, None, None]
           * e1[None, :, None, None, :, None]
           * e1[None, None, :, None, None, :]).reshape(total, total)

    w_flat = area.w.ravel()
    proj_mat = phi.conj() * w_flat[None, :]
    denom = (phi.real ** 2 + phi.imag ** 2) @ w_flat

    r = area.s.ravel().astype(np.complex128)
    g = np.zeros(total, dtype=np.complex128)
    n = config.iterations
    selections = np.empty(n, dtype=np.int64)
    coefficients = np.empty(n, dtype=np.complex128)
    energies = np.empty(n + 1, dtype=np.float64)
    energies[0] = float((w_flat * np.abs(r) ** 2).sum())

    for it in range(n):
        proj = proj_mat @ r
        metric = (proj.real ** 2 + proj.imag ** 2) / denom * wf
        win = _select_winner(metric, rank_pos)
        c = config.gamma * proj[win] / denom[win]
        g += c * phi[win]
        r -= c * phi[win]
        selections[it] = win
        coefficients[it] = c
        energies[it + 1] = float((w_flat * np.abs(r) ** 2).sum())

    model = g.reshape(size, size, size).real
    if return_trace:
        return model, ModelTrace(selections, coefficients, energies)
    return model
