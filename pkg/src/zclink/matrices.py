"""Structural block matrices of the oversampled link.

All three constructions are deterministic functions of the dimensions and
pulse shapes; matrices are materialized densely (block sizes stay in the
hundreds at desk scale).
"""

from __future__ import annotations

import math

import numpy as np

from .dims import SystemDims
from .pulses import PulseSpec, SampledWaveform, sample_pulse


def waveform_matrix(dims: SystemDims, v: SampledWaveform) -> np.ndarray:
    """Toeplitz matrix of combined-pulse values, shape (n_tot, n_tot).

    Entry (i, j) equals v((j - i) * T/m_rx): row i is the combined pulse
    shifted so its peak sits on receive sample i.  Requires v's grid to
    cover +-T*n_symbols with the receive interval available by exact index
    lookup.
    """
    n_tot = dims.n_tot
    stride = dims.rx_interval / v.sample_interval
    stride_i = int(round(stride))
    if abs(stride - stride_i) > 1e-9 or stride_i < 1:
        raise ValueError("combined pulse grid does not align with the receive interval")

    max_lag = (n_tot - 1) * stride_i
    lo = v.origin_index - max_lag
    hi = v.origin_index + max_lag
    if lo < 0 or hi >= len(v.samples):
        raise ValueError("combined pulse window too short for the waveform matrix")

    lags = v.samples[lo : hi + 1 : stride_i]  # v(k*T/m_rx), k = -(n_tot-1) .. n_tot-1
    idx = np.arange(n_tot)
    return lags[(n_tot - 1) + (idx[None, :] - idx[:, None])]


def upsampling_matrix(dims: SystemDims) -> np.ndarray:
    """0/1 matrix of shape (n_tot, n_q) that spreads transmit samples onto
    the receive grid: one 1 per column, at row m*(column index)."""
    u = np.zeros((dims.n_tot, dims.n_q))
    cols = np.arange(dims.n_q)
    u[dims.m * cols, cols] = 1.0
    return u


def filter_sample_vector(spec: PulseSpec, dims: SystemDims) -> np.ndarray:
    """Pulse samples on the receive grid over +-T*(n_symbols + 1/m_rx).

    This is the band content of one row of the filter Toeplitz matrix;
    its length is 2*n_tot + 1.
    """
    needed = dims.n_symbols * dims.symbol_duration + dims.rx_interval
    if spec.span * spec.symbol_duration < needed - 1e-9:
        raise ValueError(
            f"pulse span {spec.span}*T_s too short for the block window +-{needed}"
        )
    wave = sample_pulse(spec, needed, dims.rx_interval)
    assert len(wave.samples) == 2 * dims.n_tot + 1
    return wave.samples


def filter_toeplitz(g: np.ndarray, dims: SystemDims, scale: float | None = None) -> np.ndarray:
    """Banded filter matrix of shape (n_tot, 3*n_tot); row r carries
    ``scale * g`` starting at column r.

    ``scale`` defaults to sqrt(T/m_rx), which makes squared norms of
    filtered vectors approximate continuous-time energies.  Used for both
    the receive filter (noise shaping) and the transmit filter (energy
    weighting).
    """
    g = np.asarray(g, dtype=float)
    n_tot = dims.n_tot
    if g.shape != (2 * n_tot + 1,):
        raise ValueError(
            f"filter vector has length {len(g)}, band budget needs {2 * n_tot + 1}"
        )
    if scale is None:
        scale = math.sqrt(dims.rx_interval)
    mat = np.zeros((n_tot, 3 * n_tot))
    band = scale * g
    for r in range(n_tot):
        mat[r, r : r + 2 * n_tot + 1] = band
    return mat


def filter_scale(dims: SystemDims) -> float:
    """Row scale sqrt(T/m_rx) shared by both filter matrices."""
    return math.sqrt(dims.rx_interval)


def transmit_energy_operator(
    tx: PulseSpec, dims: SystemDims, oversampling: int = 16
) -> np.ndarray:
    """Matrix mapping transmit samples to fine-grid signal values scaled so
    the squared norm is the continuous transmit energy.

    Column n holds sqrt(step) * g_tx(t_i - n*T/m_tx) on a grid of step
    T/(oversampling*m_rx) over the block window.  On the receive-grid step
    the same quadratic form (the transmit filter Toeplitz band times the
    upsampler) overestimates the energy of pulses much narrower than the
    grid, so energy budgeting uses this finer version; ``oversampling``
    of 16 keeps the Riemann sum alias-free for roll-offs up to 1 down to
    pulse durations of about a tenth of the symbol interval.
    """
    step = dims.symbol_duration / (oversampling * dims.m_rx)
    tail = dims.symbol_duration * (dims.n_symbols + 1.0 / dims.m_rx)
    block_end = dims.n_symbols * dims.symbol_duration
    n_lo = int(round(tail / step))
    n_hi = int(round((block_end + tail) / step))
    t = (np.arange(n_lo + n_hi + 1) - n_lo) * step
    centers = np.arange(dims.n_q) * dims.tx_interval
    values = tx(t[:, None] - centers[None, :])
    return math.sqrt(step) * np.asarray(values, dtype=float)
