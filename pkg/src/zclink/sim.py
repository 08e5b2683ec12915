"""Experiment campaigns: margin-vs-bandwidth sweeps, Monte Carlo BER vs SNR,
the QPSK reference chain, and transmit-spectrum estimation.

Every random quantity is drawn from a stream keyed by (seed, domain,
point, trial, user, dimension), so identical configurations reproduce
bit-identical results regardless of execution order.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sp_signal

from .channel import ChannelParams, draw_valid_channel, noise_from_snr, receive_quantize
from .dims import SystemDims
from .matrices import (
    filter_sample_vector,
    filter_toeplitz,
    transmit_energy_operator,
    upsampling_matrix,
    waveform_matrix,
)
from .precoder import PrecodeContext, precode_pattern
from .pulses import RAISED_COSINE, ROOT_RAISED_COSINE, PulseSpec, combined_pulse, default_grid_step
from .refdata import GAMMA_WTXT_GRID
from .zccode import (
    GrayCoder,
    ZcAlphabet,
    ZcCodebook,
    detect,
    encode_pattern,
    fm_detect,
    fm_pattern,
)

logger = logging.getLogger(__name__)

SCHEMES = ("zc", "fm", "qpsk")

# stream-domain tags for reproducible rng splitting
_DOMAIN_CHANNEL = 1
_DOMAIN_BITS = 2
_DOMAIN_NOISE = 3
_DOMAIN_GAMMA = 4
_DOMAIN_PSD = 5


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Deterministic per-task generator from the master seed and a path of
    integers (domain, point, trial, user, dimension, ...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


@dataclass(frozen=True)
class SimConfig:
    """One campaign's parameters; a seed is always required."""

    seed: int
    scheme: str = "zc"
    n_symbols: int = 50
    m_tx: int = 2
    m_rx: int = 2
    symbol_duration: float = 1.0
    rolloff_tx: float = 0.22
    rolloff_rx: float = 0.22
    signaling_ratio: float = 1.0  # pulse duration over symbol interval
    e0: float = 1.0
    channel: ChannelParams = field(default_factory=lambda: ChannelParams(5, 50))
    snr_db_list: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    max_bits: int = 200_000
    error_budget: int = 200
    max_trials: int | None = None
    solver_tol: float = 1e-6
    pilot: int = 1
    chain_corrected: bool = False
    wtxt_grid: tuple[float, ...] = tuple(GAMMA_WTXT_GRID)
    n_sequences: int = 16
    psd_blocks: int = 24
    psd_oversampling: int = 16

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.snr_db_list:
            raise ValueError("at least one SNR point is required")
        if self.max_bits <= 0 or self.error_budget <= 0:
            raise ValueError("bit and error budgets must be positive")
        if self.seed is None:
            raise ValueError("seed is mandatory")
        if not self.wtxt_grid:
            raise ValueError("bandwidth grid must not be empty")

    @property
    def dims(self) -> SystemDims:
        return SystemDims(self.n_symbols, self.m_tx, self.m_rx, self.symbol_duration)

    def pulse_specs(self, signaling_ratio: float | None = None) -> tuple[PulseSpec, PulseSpec]:
        ratio = self.signaling_ratio if signaling_ratio is None else signaling_ratio
        ts = ratio * self.symbol_duration
        span = (self.n_symbols + 1.0) * self.symbol_duration / ts + 1.0
        tx = PulseSpec(RAISED_COSINE, self.rolloff_tx, ts, span=span)
        rx = PulseSpec(ROOT_RAISED_COSINE, self.rolloff_rx, ts, span=span)
        return tx, rx


@dataclass
class BerRecord:
    snr_db: float
    scheme: str
    m_rx: int
    m_tx: int
    bits_sent: int
    bit_errors: int
    ber: float
    solver_erasures: int
    wallclock: float


@dataclass
class GammaRecord:
    wtx_t: float
    scheme: str
    gamma_mean: float
    n_sequences: int


def build_context(cfg: SimConfig, signaling_ratio: float | None = None) -> PrecodeContext:
    """Assemble the immutable matrix bundle for one pulse configuration."""
    dims = cfg.dims
    tx, rx = cfg.pulse_specs(signaling_ratio)
    v = combined_pulse(tx, rx, default_grid_step(dims), dims)
    return PrecodeContext(
        dims=dims,
        waveform=waveform_matrix(dims, v),
        upsampler=upsampling_matrix(dims),
        tx_filter=filter_toeplitz(filter_sample_vector(tx, dims), dims),
        beta=1.0,
        e_tx=cfg.e0 / cfg.channel.n_users,
        rx_filter=filter_toeplitz(filter_sample_vector(rx, dims), dims),
        energy_op=transmit_energy_operator(tx, dims),
    )


def _pattern_for(scheme: str, symbols: np.ndarray, codebook: ZcCodebook) -> np.ndarray:
    if scheme == "zc":
        return encode_pattern(symbols, codebook)
    if scheme == "fm":
        return fm_pattern(symbols, codebook.m_rx, codebook.pilot)
    raise ValueError(f"no sign pattern for scheme {scheme!r}")


def _detect_for(scheme: str, z: np.ndarray, codebook: ZcCodebook, chain_corrected: bool) -> np.ndarray:
    if scheme == "zc":
        return detect(z, codebook, chain_corrected=chain_corrected)
    return fm_detect(z, codebook.m_rx)


def run_gamma_sweep(cfg: SimConfig) -> list[GammaRecord]:
    """Mean optimal margin over random symbol sequences per bandwidth point.

    Single-user temporal-only setting with unit beamforming gain; the same
    symbol sequences (drawn once from the seed) are reused at every
    bandwidth point and for either scheme, so curves for the two schemes
    are directly comparable.
    """
    if cfg.scheme not in ("zc", "fm"):
        raise ValueError("the margin sweep supports the zc and fm schemes")
    codebook = ZcCodebook(ZcAlphabet(cfg.m_rx), pilot=cfg.pilot)
    seq_rng = rng_for(cfg.seed, _DOMAIN_GAMMA)
    sequences = [
        seq_rng.integers(0, cfg.m_rx + 1, cfg.n_symbols) for _ in range(cfg.n_sequences)
    ]
    records = []
    for wtxt in cfg.wtxt_grid:
        ratio = (1.0 + cfg.rolloff_tx) / wtxt
        ctx = build_context(cfg, signaling_ratio=ratio)
        gammas = []
        for symbols in sequences:
            pattern = _pattern_for(cfg.scheme, symbols, codebook)
            block = precode_pattern(pattern, ctx, tol=cfg.solver_tol)
            if block.solve_stats.status == "numerical_failure":
                logger.warning("margin solve failed at wtx_t=%.4g; skipping sequence", wtxt)
                continue
            gammas.append(block.gamma)
        records.append(
            GammaRecord(
                wtx_t=wtxt,
                scheme=cfg.scheme,
                gamma_mean=float(np.mean(gammas)),
                n_sequences=len(gammas),
            )
        )
        logger.info("gamma sweep %s wtx_t=%.4g mean=%.5g", cfg.scheme, wtxt, records[-1].gamma_mean)
    return records


def _block_failed(block, tol: float) -> bool:
    stats = block.solve_stats
    if stats.status == "numerical_failure":
        return True
    return stats.status == "max_iterations" and max(stats.kkt_residuals.values()) > 100 * tol


def run_ber(cfg: SimConfig) -> list[BerRecord]:
    """Uncoded BER over the 1-bit quantized link for the zc or fm scheme.

    Per trial one channel is drawn, every user's two real dimensions are
    temporally precoded against the zero-forcing gain, pushed through the
    noisy 1-bit receive path, detected, and Gray-decoded.  A point stops at
    the bit budget or the error budget, whichever comes first; blocks whose
    solve fails even after the retry are counted as erasures and excluded
    from the bit accounting.
    """
    if cfg.scheme == "qpsk":
        return run_qpsk_reference(cfg)
    dims = cfg.dims
    coder = GrayCoder(cfg.m_rx)
    if cfg.n_symbols % coder.block_symbols != 0:
        raise ValueError("n_symbols must be a multiple of the Gray block size")
    bits_per_dim = coder.block_bits * (cfg.n_symbols // coder.block_symbols)
    codebook = ZcCodebook(ZcAlphabet(cfg.m_rx), pilot=cfg.pilot)
    ctx1 = build_context(cfg)

    records = []
    for snr_db in cfg.snr_db_list:
        start = time.monotonic()
        noise = noise_from_snr(snr_db, cfg.e0, dims, cfg.rolloff_rx)
        snr_key = int(round(snr_db * 1000))
        bits_sent = 0
        bit_errors = 0
        erasures = 0
        trial = 0
        while bits_sent < cfg.max_bits and bit_errors < cfg.error_budget:
            if cfg.max_trials is not None and trial >= cfg.max_trials:
                break
            ch_rng = rng_for(cfg.seed, _DOMAIN_CHANNEL, snr_key, trial)
            _, zf, _ = draw_valid_channel(cfg.channel, ch_rng)
            ctx = ctx1.with_beta(zf.beta)
            for user in range(cfg.channel.n_users):
                for dim_i in (0, 1):
                    bit_rng = rng_for(cfg.seed, _DOMAIN_BITS, snr_key, trial, user, dim_i)
                    bits = bit_rng.integers(0, 2, bits_per_dim)
                    symbols = coder.bits_to_symbols(bits)
                    pattern = _pattern_for(cfg.scheme, symbols, codebook)
                    block = precode_pattern(pattern, ctx, tol=cfg.solver_tol)
                    if _block_failed(block, cfg.solver_tol):
                        erasures += 1
                        continue
                    noise_rng = rng_for(cfg.seed, _DOMAIN_NOISE, snr_key, trial, user, dim_i)
                    z = receive_quantize(block.p_x, ctx, noise, noise_rng)
                    detected = _detect_for(cfg.scheme, z, codebook, cfg.chain_corrected)
                    bits_hat = coder.symbols_to_bits(detected)
                    bit_errors += int(np.sum(bits_hat != bits))
                    bits_sent += bits_per_dim
            trial += 1
        ber = bit_errors / bits_sent if bits_sent else float("nan")
        records.append(
            BerRecord(
                snr_db=snr_db,
                scheme=cfg.scheme,
                m_rx=cfg.m_rx,
                m_tx=cfg.m_tx,
                bits_sent=bits_sent,
                bit_errors=bit_errors,
                ber=ber,
                solver_erasures=erasures,
                wallclock=time.monotonic() - start,
            )
        )
        logger.info(
            "ber %s snr=%.3g dB: %d errors / %d bits = %.3g (%d trials, %d erasures)",
            cfg.scheme, snr_db, bit_errors, bits_sent, ber, trial, erasures,
        )
    return records


def run_qpsk_reference(cfg: SimConfig) -> list[BerRecord]:
    """Conventional QPSK reference over the same zero-forced channel.

    Matched root-raised-cosine filtering at symbol-rate sampling makes the
    discrete model one complex gain per symbol, so the chain reduces to
    scaled symbols plus filtered noise with unquantized minimum-distance
    detection.  Carries 2 bits per symbol interval; the receiver is not
    1-bit quantized.
    """
    dims_q = SystemDims(cfg.n_symbols, 1, 1, cfg.symbol_duration)
    e_tx = cfg.e0 / cfg.channel.n_users
    amp = np.sqrt(e_tx / (2.0 * cfg.n_symbols))  # per-dimension symbol amplitude
    bits_per_user = 2 * cfg.n_symbols

    records = []
    for snr_db in cfg.snr_db_list:
        start = time.monotonic()
        noise = noise_from_snr(snr_db, cfg.e0, dims_q, cfg.rolloff_rx)
        sigma_r = np.sqrt(noise.sigma2 / 2.0)
        snr_key = int(round(snr_db * 1000))
        bits_sent = 0
        bit_errors = 0
        trial = 0
        while bits_sent < cfg.max_bits and bit_errors < cfg.error_budget:
            if cfg.max_trials is not None and trial >= cfg.max_trials:
                break
            ch_rng = rng_for(cfg.seed, _DOMAIN_CHANNEL, snr_key, trial)
            _, zf, _ = draw_valid_channel(cfg.channel, ch_rng)
            for user in range(cfg.channel.n_users):
                bit_rng = rng_for(cfg.seed, _DOMAIN_BITS, snr_key, trial, user)
                bits = bit_rng.integers(0, 2, bits_per_user)
                levels = 1 - 2 * bits.astype(float)  # bit 0 -> +amp, bit 1 -> -amp
                noise_rng = rng_for(cfg.seed, _DOMAIN_NOISE, snr_key, trial, user)
                received = zf.beta * amp * levels + sigma_r * noise_rng.standard_normal(
                    bits_per_user
                )
                bits_hat = (received < 0).astype(int)
                bit_errors += int(np.sum(bits_hat != bits))
                bits_sent += bits_per_user
            trial += 1
        ber = bit_errors / bits_sent if bits_sent else float("nan")
        records.append(
            BerRecord(
                snr_db=snr_db,
                scheme="qpsk",
                m_rx=1,
                m_tx=1,
                bits_sent=bits_sent,
                bit_errors=bit_errors,
                ber=ber,
                solver_erasures=0,
                wallclock=time.monotonic() - start,
            )
        )
        logger.info(
            "ber qpsk snr=%.3g dB: %d errors / %d bits = %.3g",
            snr_db, bit_errors, bits_sent, ber,
        )
    return records


def reconstruct_transmit_signal(p_x: np.ndarray, cfg: SimConfig, oversampling: int) -> tuple[np.ndarray, float]:
    """Continuous transmit signal on a fine grid and its sample rate."""
    dims = cfg.dims
    tx, _ = cfg.pulse_specs()
    op = transmit_energy_operator(tx, dims, oversampling=oversampling)
    step = dims.symbol_duration / (oversampling * dims.m_rx)
    x = (op @ np.asarray(p_x, dtype=float)) / np.sqrt(step)
    return x, 1.0 / step


def estimate_psd(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Welch estimate of the transmit power spectral density.

    Averages periodograms of the reconstructed continuous transmit signal
    over random precoded blocks and normalizes the peak to 0 dB.  Returns
    (frequency * symbol_duration, density in dB).
    """
    codebook = ZcCodebook(ZcAlphabet(cfg.m_rx), pilot=cfg.pilot)
    ctx = build_context(cfg)
    psd_acc = None
    freqs = None
    for blk_i in range(cfg.psd_blocks):
        rng = rng_for(cfg.seed, _DOMAIN_PSD, blk_i)
        symbols = rng.integers(0, cfg.m_rx + 1, cfg.n_symbols)
        pattern = _pattern_for(cfg.scheme if cfg.scheme != "qpsk" else "zc", symbols, codebook)
        block = precode_pattern(pattern, ctx, tol=cfg.solver_tol)
        x, fs = reconstruct_transmit_signal(block.p_x, cfg, cfg.psd_oversampling)
        nper = min(len(x), 2048)
        f, pxx = sp_signal.welch(
            x, fs=fs, window="hann", nperseg=nper, noverlap=nper // 2, detrend=False
        )
        psd_acc = pxx if psd_acc is None else psd_acc + pxx
        freqs = f
    psd = psd_acc / cfg.psd_blocks
    peak = float(np.max(psd))
    psd_db = 10.0 * np.log10(np.maximum(psd, peak * 1e-16) / peak)
    return freqs * cfg.symbol_duration, psd_db
