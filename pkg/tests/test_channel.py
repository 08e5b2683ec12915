import numpy as np
import pytest
from scipy import stats

from zclink import (
    ChannelParams,
    ChannelRealization,
    SingularChannelError,
    SystemDims,
    ZcAlphabet,
    ZcCodebook,
    draw_channel,
    draw_valid_channel,
    encode_pattern,
    noise_from_snr,
    precode,
    receive_quantize,
    zf_precoder,
)
from tests.test_precoder import make_context

PARAMS = ChannelParams(n_users=5, n_tx_antennas=50)


class TestDrawChannel:
    def test_fast_fading_unit_variance(self):
        rng = np.random.default_rng(0)
        ch = draw_channel(ChannelParams(10, 200), rng)
        power = np.mean(np.abs(ch.fast_fading) ** 2)
        assert power == pytest.approx(1.0, abs=0.05)

    def test_no_shadowing_at_cell_edge_is_unit_scale(self):
        params = ChannelParams(2, 4, shadow_sigma_db=0.0, distance_m=1000.0)
        ch = draw_channel(params, np.random.default_rng(1))
        assert np.allclose(ch.large_scale, 1.0)
        assert np.allclose(ch.h, ch.fast_fading)

    def test_shadowing_statistics(self):
        params = ChannelParams(1, 1)
        rng = np.random.default_rng(2)
        shadows_db = []
        for _ in range(20000):
            ch = draw_channel(params, rng)
            distance_term = (params.distance_m / params.cell_radius_m) ** params.path_loss_exponent
            shadows_db.append(10 * np.log10(ch.large_scale[0] * distance_term))
        shadows_db = np.array(shadows_db)
        assert np.mean(shadows_db) == pytest.approx(0.0, abs=0.2)
        assert np.std(shadows_db) == pytest.approx(8.0, abs=0.2)

    def test_distance_term_applied(self):
        params = ChannelParams(1, 1, shadow_sigma_db=0.0)
        ch = draw_channel(params, np.random.default_rng(3))
        assert ch.large_scale[0] == pytest.approx((1000.0 / 300.0) ** 3)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_users=3, n_tx_antennas=2),
            dict(n_users=1, n_tx_antennas=1, distance_m=0.0),
            dict(n_users=1, n_tx_antennas=1, distance_m=2000.0),
            dict(n_users=1, n_tx_antennas=1, path_loss_exponent=0.0),
        ],
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            ChannelParams(**kwargs)


class TestZfPrecoder:
    def test_identity_channel(self):
        h = np.eye(2, dtype=complex)
        zf = zf_precoder(ChannelRealization(h, h, np.ones(2)))
        assert zf.c_zf == pytest.approx(1.0)
        assert np.allclose(zf.p_zf, np.eye(2))
        assert zf.beta == zf.c_zf

    def test_scaled_identity_channel(self):
        # H = 2I: trace((HH^H)^-1) = 2/4 = 0.5, c_zf = sqrt(2/0.5) = 2,
        # P_zf = 2 * (2I)(4I)^-1 = I
        h = 2.0 * np.eye(2, dtype=complex)
        zf = zf_precoder(ChannelRealization(h, h / 2, 4 * np.ones(2)))
        assert zf.c_zf == pytest.approx(2.0)
        assert np.allclose(zf.p_zf, np.eye(2))

    def test_random_channel_diagonalizes(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            ch = draw_channel(PARAMS, rng)
            zf = zf_precoder(ch)
            product = ch.h @ zf.p_zf
            off = product - zf.beta * np.eye(PARAMS.n_users)
            assert np.max(np.abs(off)) <= 1e-9 * zf.beta

    def test_scale_law(self):
        rng = np.random.default_rng(5)
        ch = draw_channel(PARAMS, rng)
        zf1 = zf_precoder(ch)
        scaled = ChannelRealization(3.0 * ch.h, ch.fast_fading, ch.large_scale)
        assert zf_precoder(scaled).c_zf == pytest.approx(3.0 * zf1.c_zf, rel=1e-9)

    def test_singular_channel_raises(self):
        h = np.ones((2, 3), dtype=complex)  # rank one
        with pytest.raises(SingularChannelError):
            zf_precoder(ChannelRealization(h, h, np.ones(2)))

    def test_draw_valid_channel_counts_redraws(self):
        ch, zf, redraws = draw_valid_channel(PARAMS, np.random.default_rng(6))
        assert redraws == 0
        assert zf.beta > 0


class TestNoiseFromSnr:
    DIMS = SystemDims(50, 2, 2)

    def test_formula_inversion(self):
        e0 = self.DIMS.n_q * 1.22
        model = noise_from_snr(0.0, e0, self.DIMS, eps_rx=0.22)
        assert model.n0 == pytest.approx(1.0)

    def test_ten_db_steps(self):
        m0 = noise_from_snr(0.0, 1.0, self.DIMS, 0.22)
        m10 = noise_from_snr(10.0, 1.0, self.DIMS, 0.22)
        assert m10.n0 == pytest.approx(m0.n0 / 10.0)

    def test_density_to_sample_variance(self):
        model = noise_from_snr(3.0, 1.0, self.DIMS, 0.22)
        assert model.sigma2 == pytest.approx(model.n0 * self.DIMS.m_rx / self.DIMS.symbol_duration)

    def test_infinite_snr_rejected(self):
        with pytest.raises(ValueError):
            noise_from_snr(float("inf"), 1.0, self.DIMS, 0.22)

    def test_filtered_noise_power_calibration(self):
        # the receive filter rows deliver the analytic per-sample power
        # sigma2 to the quantizer within one percent
        ctx = make_context(n_symbols=12)
        model = noise_from_snr(5.0, 1.0, ctx.dims, 0.22)
        gram_diag = np.sum(ctx.rx_filter**2, axis=1)
        mid = gram_diag[len(gram_diag) // 2]
        assert mid * model.sigma2 == pytest.approx(model.sigma2, rel=0.01)


class TestReceiveQuantize:
    CTX = make_context(n_symbols=8)
    CODEBOOK = ZcCodebook(ZcAlphabet(2))

    def _block(self, seed=7):
        rng = np.random.default_rng(seed)
        x = rng.integers(0, 3, self.CTX.dims.n_symbols)
        return x, precode(x, self.CTX, self.CODEBOOK)

    def test_noiseless_limit_recovers_pattern(self):
        x, blk = self._block()
        quiet = noise_from_snr(300.0, 1.0, self.CTX.dims, 0.22)  # sigma -> 0
        z = receive_quantize(blk.p_x, self.CTX, quiet, np.random.default_rng(0))
        assert np.array_equal(z, encode_pattern(x, self.CODEBOOK))

    def test_noise_dominated_limit_is_fair_signs(self):
        x, blk = self._block()
        loud = noise_from_snr(-120.0, 1.0, self.CTX.dims, 0.22)
        rng = np.random.default_rng(1)
        total = 0
        n_draws = 2000
        for _ in range(n_draws):
            total += receive_quantize(blk.p_x, self.CTX, loud, rng).sum()
        mean = total / (n_draws * self.CTX.dims.n_tot)
        assert abs(mean) < 0.02

    def test_output_is_signs_and_idempotent(self):
        x, blk = self._block()
        noise = noise_from_snr(5.0, 1.0, self.CTX.dims, 0.22)
        z = receive_quantize(blk.p_x, self.CTX, noise, np.random.default_rng(2))
        assert set(np.unique(z)) <= {-1, 1}
        assert np.array_equal(np.where(z >= 0, 1, -1), z)

    def test_zero_ties_break_positive(self):
        ctx0 = make_context(n_symbols=4, e_tx=0.0)
        quiet = noise_from_snr(300.0, 1.0, ctx0.dims, 0.22)
        z = receive_quantize(np.zeros(ctx0.dims.n_q), ctx0, quiet, np.random.default_rng(3))
        assert np.all(z == 1)

    def test_flip_probability_matches_gaussian_tail(self):
        # single-sample check: empirical flip rate at the solved margin
        # against the analytic tail of the filtered noise
        x, blk = self._block()
        pattern = encode_pattern(x, self.CODEBOOK)
        noise = noise_from_snr(6.0, 1.0, self.CTX.dims, 0.22)
        rng = np.random.default_rng(4)
        flips = 0
        n_draws = 4000
        for _ in range(n_draws):
            z = receive_quantize(blk.p_x, self.CTX, noise, rng)
            flips += int(np.sum(z != pattern))
        empirical = flips / (n_draws * self.CTX.dims.n_tot)

        from zclink.precoder import noiseless_receive

        y = noiseless_receive(blk.p_x, self.CTX)
        row_power = np.sum(self.CTX.rx_filter**2, axis=1)
        sigma = np.sqrt(noise.sigma2 / 2.0 * row_power)
        analytic = float(np.mean(stats.norm.sf(np.abs(y) / sigma)))
        assert empirical == pytest.approx(analytic, rel=0.15)

    def test_requires_rx_filter(self):
        from dataclasses import replace

        ctx = replace(self.CTX, rx_filter=None)
        noise = noise_from_snr(5.0, 1.0, ctx.dims, 0.22)
        with pytest.raises(ValueError):
            receive_quantize(np.zeros(ctx.dims.n_q), ctx, noise, np.random.default_rng(0))

    def test_reproducible_from_seed(self):
        x, blk = self._block()
        noise = noise_from_snr(5.0, 1.0, self.CTX.dims, 0.22)
        z1 = receive_quantize(blk.p_x, self.CTX, noise, np.random.default_rng(99))
        z2 = receive_quantize(blk.p_x, self.CTX, noise, np.random.default_rng(99))
        assert np.array_equal(z1, z2)
