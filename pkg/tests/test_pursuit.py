import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_best, direct_surface
from spikecodec import (
    Code,
    EncoderConfig,
    best_match,
    correlate_all,
    encode_segment,
    encode_stream,
    flatten_codes,
    segment_signal,
    subtract_atom,
)
from spikecodec.errors import ConfigurationError


def planted_segment(bank, config, kernel_index, tau, amplitude):
    x = np.zeros(config.segment_len)
    kernel = bank.kernels[kernel_index]
    x[tau:tau + kernel.effective_len] = amplitude * kernel.samples[:kernel.effective_len]
    return x


class TestCorrelateAll:
    def test_planted_atom_peaks_at_one(self, mini_bank, mini_config):
        # kernel 6 is short enough (93 samples) to sit wholly inside at tau=100
        x = planted_segment(mini_bank, mini_config, 6, 100, 1.0)
        surface = correlate_all(x, mini_bank)
        m, tau = np.unravel_index(np.argmax(surface), surface.shape)
        assert (m, tau) == (6, 100)
        assert abs(surface[6, 100] - 1.0) < 1e-9

    def test_zero_segment_gives_zero_surface(self, mini_bank, mini_config):
        surface = correlate_all(np.zeros(mini_config.segment_len), mini_bank)
        assert np.all(surface == 0.0)

    def test_matches_direct_inner_products(self, mini_bank, rng):
        for _ in range(20):
            x = rng.standard_normal(256)
            fft_surface = correlate_all(x, mini_bank)
            oracle = direct_surface(x, mini_bank)
            assert np.abs(fft_surface - oracle).max() < 1e-9

    def test_invalid_offsets_are_zero(self, mini_bank, rng):
        x = rng.standard_normal(256)
        surface = correlate_all(x, mini_bank)
        for m, kernel in enumerate(mini_bank.kernels):
            assert np.all(surface[m, 256 - kernel.effective_len + 1:] == 0.0)

    def test_fft_size_too_small_rejected(self, mini_bank):
        with pytest.raises(ConfigurationError):
            correlate_all(np.zeros(512), mini_bank)  # 512 + 160 - 1 > 512


class TestBestMatch:
    def test_unique_maximum(self):
        surface = np.zeros((8, 60))
        surface[5, 40] = 0.9
        assert best_match(surface) == (5, 40, 0.9)

    def test_magnitude_tie_breaks_to_smaller_kernel(self):
        surface = np.zeros((4, 20))
        surface[1, 10] = 0.7
        surface[0, 10] = -0.7
        assert best_match(surface) == (0, 10, -0.7)

    def test_tau_tie_breaks_to_smaller_tau(self):
        surface = np.zeros((2, 20))
        surface[1, 3] = 0.5
        surface[1, 15] = -0.5
        assert best_match(surface) == (1, 3, 0.5)

    def test_matches_exhaustive_scan(self, rng):
        for _ in range(25):
            surface = rng.standard_normal((6, 40))
            assert best_match(surface) == brute_force_best(surface)


class TestSubtractAtom:
    def test_exact_single_atom_cancellation(self, mini_bank, mini_config):
        x = planted_segment(mini_bank, mini_config, 2, 0, 0.5)
        residual = subtract_atom(x, Code(2, 0, 0.5), mini_bank)
        assert residual @ residual < 1e-18

    def test_energy_identity(self, mini_bank, rng):
        # direct recomputation oracle: new energy = old - s^2 when s is the
        # inner product with a unit-norm atom
        x = rng.standard_normal(256)
        surface = correlate_all(x, mini_bank)
        m, tau, s = best_match(surface)
        residual = subtract_atom(x, Code(m, tau, s), mini_bank)
        expected = x @ x - s * s
        assert abs((residual @ residual) - expected) < 1e-9 * (x @ x)

    def test_zero_intensity_is_identity(self, mini_bank, rng):
        x = rng.standard_normal(256)
        residual = subtract_atom(x, Code(4, 10, 0.0), mini_bank)
        np.testing.assert_array_equal(residual, x)

    def test_out_of_range_tau_rejected(self, mini_bank):
        eff = mini_bank.kernels[0].effective_len
        with pytest.raises(ValueError):
            subtract_atom(np.zeros(256), Code(0, 256 - eff + 1, 1.0), mini_bank)
        with pytest.raises(ValueError):
            subtract_atom(np.zeros(256), Code(0, -1, 1.0), mini_bank)


class TestEncodeSegment:
    def test_zero_input_emits_nothing(self, mini_bank, mini_config):
        codes, residual = encode_segment(np.zeros(256), mini_bank, mini_config)
        assert codes == []
        assert np.all(residual == 0.0)

    def test_single_atom_recovered_exactly(self, mini_bank, mini_config):
        x = planted_segment(mini_bank, mini_config, 5, 37, 0.8)
        codes, residual = encode_segment(x, mini_bank, mini_config)
        assert codes[0].kernel_index == 5
        assert codes[0].tau == 37
        assert abs(codes[0].intensity - 0.8) < 1e-9
        assert len(codes) <= mini_config.sps

    def test_energy_bookkeeping(self, mini_bank, mini_config, rng):
        for _ in range(10):
            x = rng.standard_normal(256)
            codes, residual = encode_segment(x, mini_bank, mini_config)
            lhs = x @ x
            rhs = sum(c.intensity ** 2 for c in codes) + residual @ residual
            assert abs(lhs - rhs) < 1e-6 * lhs

    def test_residual_energy_strictly_decreasing(self, mini_bank, mini_config, rng):
        x = rng.standard_normal(256)
        energies = [x @ x]
        residual = x
        codes, _ = encode_segment(x, mini_bank, mini_config)
        for code in codes:
            residual = subtract_atom(residual, code, mini_bank)
            energies.append(residual @ residual)
        assert all(b < a for a, b in zip(energies, energies[1:]))

    def test_every_code_is_greedy_optimal(self, mini_bank, mini_config, rng):
        # brute-force time-domain oracle replayed over the emitted codes
        x = rng.standard_normal(256)
        codes, _ = encode_segment(x, mini_bank, mini_config)
        residual = x
        for code in codes:
            oracle = direct_surface(residual, mini_bank)
            m, tau, s = brute_force_best(oracle)
            assert (m, tau) == (code.kernel_index, code.tau)
            assert abs(s - code.intensity) < 1e-9
            residual = subtract_atom(residual, code, mini_bank)

    def test_nonzero_intensities_only(self, mini_bank, mini_config, rng):
        x = rng.standard_normal(256)
        codes, _ = encode_segment(x, mini_bank, mini_config)
        assert all(c.intensity != 0.0 for c in codes)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_energy_identity_property(self, mini_bank, mini_config, seed):
        x = np.random.default_rng(seed).uniform(-1, 1, size=256)
        codes, residual = encode_segment(x, mini_bank, mini_config)
        lhs = x @ x
        rhs = sum(c.intensity ** 2 for c in codes) + residual @ residual
        assert abs(lhs - rhs) <= 1e-6 * max(lhs, 1e-30)


class TestEncodeStream:
    def test_segment_count_arithmetic(self, default_bank, default_config, rng):
        seconds = 0.66
        signal = rng.standard_normal(round(seconds * 16000)) * 0.3
        per_segment = encode_stream(signal, default_bank,
                                    EncoderConfig(sps=4))
        assert len(per_segment) == 16  # ceil(0.66 / 0.0435)
        assert len(flatten_codes(per_segment)) <= 4 * 16

    def test_short_signal_single_padded_segment(self, mini_bank, mini_config):
        per_segment = encode_stream(np.ones(100) * 0.5, mini_bank, mini_config)
        assert len(per_segment) == 1

    def test_silence_emits_no_codes(self, mini_bank, mini_config):
        per_segment = encode_stream(np.zeros(1000), mini_bank, mini_config)
        assert flatten_codes(per_segment) == []

    def test_sample_rate_mismatch_rejected(self, mini_bank):
        config = EncoderConfig(sps=4, sample_rate=8000, segment_len=256,
                               m_count=8, fmin=300.0, fmax=3000.0,
                               max_kernel_len=160, fft_size=512)
        with pytest.raises(ConfigurationError):
            encode_stream(np.ones(512), mini_bank, config)

    def test_empty_signal_rejected(self, mini_bank, mini_config):
        with pytest.raises(ValueError):
            encode_stream(np.array([]), mini_bank, mini_config)

    def test_deterministic(self, mini_bank, mini_config, rng):
        signal = rng.standard_normal(900)
        a = encode_stream(signal, mini_bank, mini_config)
        b = encode_stream(signal, mini_bank, mini_config)
        assert a == b

    def test_workers_match_sequential(self, mini_bank, mini_config, rng):
        signal = rng.standard_normal(2000)
        sequential = encode_stream(signal, mini_bank, mini_config)
        threaded = encode_stream(signal, mini_bank, mini_config, workers=4)
        assert sequential == threaded

    def test_segment_boundaries_and_padding(self):
        segments = segment_signal(np.arange(10, dtype=float), 4, 16000)
        assert len(segments) == 3
        np.testing.assert_array_equal(segments[2].samples, [8.0, 9.0, 0.0, 0.0])
        assert segments[1].start_time == 4 / 16000


class TestReconstructionMonotonicity:
    def test_rmse_non_increasing_as_sps_doubles(self, mini_bank, rng):
        from spikecodec import reconstruct_from_codes
        x = rng.standard_normal(256)
        errors = []
        for sps in (4, 8, 16, 32):
            config = EncoderConfig(sps=sps, sample_rate=16000, segment_len=256,
                                   m_count=8, fmin=300.0, fmax=6000.0,
                                   max_kernel_len=160, fft_size=512)
            codes, _ = encode_segment(x, mini_bank, config)
            rebuilt = reconstruct_from_codes(codes, mini_bank, 256, 256)
            errors.append(np.sqrt(np.mean((x - rebuilt) ** 2)))
        assert all(b <= a for a, b in zip(errors, errors[1:]))
