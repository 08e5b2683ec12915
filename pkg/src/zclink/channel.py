"""Random flat-fading channels, spatial zero-forcing, noise calibration, and
the 1-bit receive path.

The large-scale matrix combines per-user log-normal shadowing with the
distance term (distance/cell_radius)**path_loss_exponent; zero-forcing then
collapses every user's link to the common real beamforming gain, so the
per-user receive path is the scalar-gain model used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dims import SystemDims
from .precoder import PrecodeContext, noiseless_receive


class SingularChannelError(RuntimeError):
    """Raised when the drawn channel's Gram matrix is not invertible."""


@dataclass(frozen=True)
class ChannelParams:
    n_users: int
    n_tx_antennas: int
    cell_radius_m: float = 1000.0
    distance_m: float = 300.0
    shadow_sigma_db: float = 8.0
    path_loss_exponent: float = 3.0

    def __post_init__(self):
        if self.n_users < 1 or self.n_tx_antennas < self.n_users:
            raise ValueError("need n_tx_antennas >= n_users >= 1")
        if not 0 < self.distance_m <= self.cell_radius_m:
            raise ValueError("need 0 < distance_m <= cell_radius_m")
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be positive")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be nonnegative")


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: h combines fast fading with the per-user
    large-scale gains, h = diag(sqrt(large_scale)) @ fast_fading."""

    h: np.ndarray
    fast_fading: np.ndarray
    large_scale: np.ndarray  # diagonal entries, one per user


@dataclass(frozen=True)
class ZfPrecoder:
    p_zf: np.ndarray
    c_zf: float

    @property
    def beta(self) -> float:
        """Common diagonal gain of channel @ p_zf."""
        return self.c_zf


@dataclass(frozen=True)
class NoiseModel:
    """Noise calibration for one SNR point.

    ``sigma2`` is the per-sample complex variance of the raw noise stream
    at the simulation rate m_rx/T; the unit-energy receive filter then
    delivers that same in-band power to the quantizer.
    """

    n0: float
    sigma2: float
    snr_db: float


def draw_channel(params: ChannelParams, rng: np.random.Generator) -> ChannelRealization:
    """Rayleigh fast fading with log-normal shadowing and the distance term.

    Fast-fading entries are i.i.d. circularly-symmetric complex Gaussian
    with unit variance; shadowing is 0 dB mean with ``shadow_sigma_db``
    standard deviation in dB.
    """
    nu, nt = params.n_users, params.n_tx_antennas
    fast = (rng.standard_normal((nu, nt)) + 1j * rng.standard_normal((nu, nt))) / math.sqrt(2.0)
    shadow = 10.0 ** (params.shadow_sigma_db * rng.standard_normal(nu) / 10.0)
    distance_term = (params.distance_m / params.cell_radius_m) ** params.path_loss_exponent
    large_scale = shadow / distance_term
    h = np.sqrt(large_scale)[:, None] * fast
    return ChannelRealization(h=h, fast_fading=fast, large_scale=large_scale)


def zf_precoder(ch: ChannelRealization, n_users: int | None = None) -> ZfPrecoder:
    """Zero-forcing precoder scaled to the total energy budget.

    p_zf = c_zf * H^H (H H^H)^-1 with c_zf = sqrt(n_users / trace((H H^H)^-1));
    the channel times the precoder is then c_zf * I.
    """
    h = ch.h
    if n_users is None:
        n_users = h.shape[0]
    gram = h @ h.conj().T
    try:
        gram_inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError("channel Gram matrix is singular") from exc
    trace = float(np.trace(gram_inv).real)
    if not np.isfinite(trace) or trace <= 0:
        raise SingularChannelError("channel Gram matrix is numerically singular")
    c_zf = math.sqrt(n_users / trace)
    p_zf = c_zf * (h.conj().T @ gram_inv)
    return ZfPrecoder(p_zf=p_zf, c_zf=c_zf)


def draw_valid_channel(
    params: ChannelParams, rng: np.random.Generator, max_redraws: int = 16
) -> tuple[ChannelRealization, ZfPrecoder, int]:
    """Draw until the zero-forcing inverse exists; returns the redraw count."""
    redraws = 0
    while True:
        ch = draw_channel(params, rng)
        try:
            return ch, zf_precoder(ch), redraws
        except SingularChannelError:
            redraws += 1
            if redraws > max_redraws:
                raise


def noise_from_snr(snr_db: float, e0: float, dims: SystemDims, eps_rx: float) -> NoiseModel:
    """Calibrate the noise density from the configured SNR.

    SNR is total transmit energy over n_q * n0 * (1 + eps_rx); the density
    maps to per-sample complex variance sigma2 = n0 * m_rx / T at the
    simulation rate.
    """
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    n0 = e0 / (dims.n_q * (1.0 + eps_rx) * 10.0 ** (snr_db / 10.0))
    sigma2 = n0 * dims.m_rx / dims.symbol_duration
    return NoiseModel(n0=n0, sigma2=sigma2, snr_db=snr_db)


def receive_quantize(
    p_x: np.ndarray,
    ctx: PrecodeContext,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """1-bit receive path for one real dimension.

    The raw noise stream has 3*n_tot real samples of variance sigma2/2
    (half the complex variance per real dimension), is shaped by the
    receive filter, added to the noiseless receive samples, and quantized
    with sign(0) = +1.
    """
    if ctx.rx_filter is None:
        raise ValueError("PrecodeContext.rx_filter is required for the receive path")
    y = noiseless_receive(p_x, ctx)
    n = rng.standard_normal(3 * ctx.dims.n_tot) * math.sqrt(noise.sigma2 / 2.0)
    y = y + ctx.rx_filter @ n
    return np.where(y >= 0.0, 1, -1).astype(int)
