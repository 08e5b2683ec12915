"""Raised-cosine pulse shapes and sampled waveforms.

The transmit filter is a raised cosine normalized to unit peak, the receive
filter a root-raised cosine normalized to unit continuous-time energy.  The
combined pulse (their convolution) has no compact closed form and is computed
by fine-grid numeric convolution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

RAISED_COSINE = "raised-cosine"
ROOT_RAISED_COSINE = "root-raised-cosine"

# Relative half-width of the window around each removable singularity that is
# evaluated by its analytic limit instead of the general formula.
_SINGULARITY_TOL = 1e-10


@dataclass(frozen=True)
class PulseSpec:
    """Shape parameters of one pulse filter.

    ``span`` is the half-width of the truncation window in units of
    ``symbol_duration``; consumers that build block matrices evaluate the
    pulse over the window the block needs and only check that ``span``
    covers it.
    """

    kind: str
    roll_off: float
    symbol_duration: float
    span: float

    def __post_init__(self):
        if self.kind not in (RAISED_COSINE, ROOT_RAISED_COSINE):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if not 0.0 <= self.roll_off <= 1.0:
            raise ValueError(f"roll_off must be in [0, 1], got {self.roll_off}")
        if not self.symbol_duration > 0:
            raise ValueError("symbol_duration must be positive")
        if not self.span > 0:
            raise ValueError("span must be positive")

    @property
    def bandwidth(self) -> float:
        """One-sided occupied bandwidth (1 + roll_off) / symbol_duration."""
        return (1.0 + self.roll_off) / self.symbol_duration

    def __call__(self, t):
        if self.kind == RAISED_COSINE:
            return rc_pulse(t, self)
        return rrc_pulse(t, self)


@dataclass(frozen=True)
class SampledWaveform:
    """A real waveform on a uniform time grid.

    ``origin_index`` is the index of t = 0, so sample k sits at
    ``(k - origin_index) * sample_interval`` seconds.
    """

    samples: np.ndarray
    sample_interval: float
    origin_index: int

    def __post_init__(self):
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not 0 <= self.origin_index < len(self.samples):
            raise ValueError("origin_index outside the sample range")

    def time_of(self, index: int) -> float:
        return (index - self.origin_index) * self.sample_interval

    def value_at(self, t: float) -> float:
        """Exact-grid lookup; t must land on a grid point."""
        pos = t / self.sample_interval + self.origin_index
        idx = int(round(pos))
        if abs(pos - idx) > 1e-6:
            raise ValueError(f"t={t} is not on the sampling grid")
        if not 0 <= idx < len(self.samples):
            raise ValueError(f"t={t} outside the sampled window")
        return float(self.samples[idx])


def rc_pulse(t, spec: PulseSpec):
    """Raised-cosine value at time ``t`` (seconds), unit peak at t = 0.

    The removable singularities at t = +-T/(2*roll_off) are evaluated by
    their analytic limit (pi/4) * sinc(1/(2*roll_off)).  Accepts scalars or
    arrays.
    """
    if spec.kind != RAISED_COSINE:
        raise ValueError("rc_pulse requires a raised-cosine spec")
    ts = spec.symbol_duration
    eps = spec.roll_off
    x = np.asarray(t, dtype=float) / ts

    if eps == 0.0:
        out = np.sinc(x)
        return float(out) if np.isscalar(t) else out

    sing = 1.0 / (2.0 * eps)
    near_sing = np.abs(np.abs(x) - sing) < _SINGULARITY_TOL * max(1.0, sing)
    denom = 1.0 - (2.0 * eps * x) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        general = np.sinc(x) * np.cos(np.pi * eps * x) / denom
    limit = (np.pi / 4.0) * np.sinc(sing)
    out = np.where(near_sing, limit, general)
    return float(out) if np.isscalar(t) else out


def rrc_pulse(t, spec: PulseSpec):
    """Root-raised-cosine value at time ``t``, unit continuous-time energy.

    Singular points at t = 0 and t = +-T/(4*roll_off) use analytic limits.
    With roll_off = 0 the pulse degenerates to sinc(t/T)/sqrt(T).
    """
    if spec.kind != ROOT_RAISED_COSINE:
        raise ValueError("rrc_pulse requires a root-raised-cosine spec")
    ts = spec.symbol_duration
    eps = spec.roll_off
    x = np.asarray(t, dtype=float) / ts
    scale = 1.0 / math.sqrt(ts)

    if eps == 0.0:
        out = scale * np.sinc(x)
        return float(out) if np.isscalar(t) else out

    zero = np.abs(x) < _SINGULARITY_TOL
    sing = 1.0 / (4.0 * eps)
    near_sing = np.abs(np.abs(x) - sing) < _SINGULARITY_TOL * max(1.0, sing)

    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.sin(np.pi * x * (1.0 - eps)) + 4.0 * eps * x * np.cos(np.pi * x * (1.0 + eps))
        den = np.pi * x * (1.0 - (4.0 * eps * x) ** 2)
        general = num / den

    at_zero = 1.0 - eps + 4.0 * eps / np.pi
    at_sing = (eps / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * eps))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * eps))
    )
    out = scale * np.select([zero, near_sing], [at_zero, at_sing], default=general)
    return float(out) if np.isscalar(t) else out


def sample_pulse(spec: PulseSpec, half_width: float, step: float) -> SampledWaveform:
    """Sample a pulse symmetrically over [-half_width, +half_width].

    The fraction of continuous-time energy lost to truncation is logged so
    the ``span`` choice stays observable.
    """
    n_half = int(round(half_width / step))
    if abs(n_half * step - half_width) > 1e-9 * max(1.0, half_width):
        raise ValueError("half_width must be an integer multiple of step")
    t = (np.arange(2 * n_half + 1) - n_half) * step
    samples = np.asarray(spec(t), dtype=float)
    wave = SampledWaveform(samples=samples, sample_interval=step, origin_index=n_half)

    tail = _truncation_energy_fraction(spec, half_width)
    if tail > 1e-4:
        logger.info(
            "pulse truncation at +-%.3g s drops %.2e of the pulse energy", half_width, tail
        )
    else:
        logger.debug(
            "pulse truncation at +-%.3g s drops %.2e of the pulse energy", half_width, tail
        )
    return wave


def _truncation_energy_fraction(spec: PulseSpec, half_width: float) -> float:
    step = spec.symbol_duration / 64.0
    t_in = np.arange(0.0, half_width, step)
    t_out = np.arange(half_width, half_width + 50.0 * spec.symbol_duration, step)
    e_in = float(np.sum(np.asarray(spec(t_in)) ** 2))
    e_out = float(np.sum(np.asarray(spec(t_out)) ** 2))
    total = e_in + e_out
    return e_out / total if total > 0 else 0.0


def combined_pulse(tx: PulseSpec, rx: PulseSpec, grid_step: float, dims) -> SampledWaveform:
    """Convolution of the transmit and receive pulses on a fine grid.

    The result spans +-T*(n_symbols + 1/m_rx) so that every lookup needed by
    the waveform matrix lands inside the window, and ``grid_step`` must
    divide the receive sample interval T/m_rx exactly so the lookups are
    index-exact.
    """
    rx_step = dims.rx_interval
    ratio = rx_step / grid_step
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(
            f"grid_step {grid_step} does not divide the receive interval {rx_step}"
        )

    half_width = dims.symbol_duration * (dims.n_symbols + 1.0 / dims.m_rx)
    # Each factor is sampled over the full output window so the linear
    # convolution is exact on [-half_width, +half_width].
    g_tx = sample_pulse(tx, half_width, grid_step)
    g_rx = sample_pulse(rx, half_width, grid_step)
    full = np.convolve(g_tx.samples, g_rx.samples) * grid_step
    center = g_tx.origin_index + g_rx.origin_index
    n_half = int(round(half_width / grid_step))
    samples = full[center - n_half : center + n_half + 1]
    return SampledWaveform(samples=samples, sample_interval=grid_step, origin_index=n_half)


def default_grid_step(dims, oversampling: int = 64) -> float:
    """Fine-grid step used for the combined pulse: T/(oversampling*m_rx)."""
    return dims.symbol_duration / (oversampling * dims.m_rx)
