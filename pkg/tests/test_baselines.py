import numpy as np
import pytest

from spikecodec.baselines import (
    LauscherParams,
    LifState,
    SomCodebook,
    bushy_layer,
    frame_signal,
    lauscher_encode,
    lauscher_thresholds,
    lif_spike_trains,
    lif_step,
    mel_band_edges,
    mel_spectrogram,
    nearest_prototype,
    som_train,
    spectrogram_encode,
)
from spikecodec.config import next_pow2
from spikecodec.kernels import build_bank

RATE = 16000


@pytest.fixture(scope="module")
def lauscher_setup():
    params = LauscherParams()
    bank = build_bank(params.n_channels, RATE, params.fmin, params.fmax,
                      order=params.order, max_len=params.kernel_len,
                      fft_size=next_pow2(params.kernel_len))
    thresholds = lauscher_thresholds(bank, params)
    return params, bank, thresholds


class TestMelSpectrogram:
    def test_tone_energy_concentrates_in_its_band(self):
        # mel-band edge oracle: the winning filter's triangle must span 1 kHz
        t = np.arange(RATE) / RATE
        tone = 0.8 * np.sin(2 * np.pi * 1000 * t)
        feats = mel_spectrogram(tone, RATE)
        winner = int(np.argmax(feats.mean(axis=0)))
        lo, hi = mel_band_edges(40, RATE)[winner]
        assert lo <= 1000.0 <= hi

    def test_silence_is_uniform_floor(self):
        feats = mel_spectrogram(np.zeros(RATE), RATE)
        assert np.allclose(feats, feats[0, 0])

    def test_white_noise_spreads_energy(self, rng):
        # Monte-Carlo oracle: with dense noise no single band should hold
        # more than half of the total linear energy
        noise = rng.standard_normal(RATE) * 0.5
        feats = mel_spectrogram(noise, RATE)
        energies = np.exp(feats).sum(axis=0)
        assert energies.max() / energies.sum() < 0.5

    def test_short_signal_single_padded_frame(self):
        feats = mel_spectrogram(np.ones(50) * 0.1, RATE)
        assert feats.shape == (1, 40)

    def test_frame_count(self):
        # 1 s at 25 ms / 10 ms -> 1 + (16000 - 400) // 160 = 98 frames
        feats = mel_spectrogram(np.ones(RATE) * 0.1, RATE)
        assert feats.shape == (98, 40)


class TestFrameSignal:
    def test_hop_layout(self):
        frames = frame_signal(np.arange(10, dtype=float), 4, 3)
        np.testing.assert_array_equal(frames, [[0, 1, 2, 3], [3, 4, 5, 6], [6, 7, 8, 9]])


class TestSomTrain:
    def test_single_repeated_frame_is_fixed_point(self):
        frames = np.tile([1.0, -2.0, 0.5, 3.0], (50, 1))
        codebook = som_train(frames, grid_shape=(5, 4), epochs=3, seed=1)
        assert np.abs(codebook.prototypes - frames[0]).max() < 1e-3

    def test_two_clusters_claim_disjoint_grid_regions(self, rng):
        a = rng.normal(0.0, 0.05, size=(200, 8))
        b = rng.normal(5.0, 0.05, size=(200, 8))
        frames = np.concatenate([a, b])
        codebook = som_train(frames, grid_shape=(10, 5), epochs=10, seed=3)
        bmu_a = set(nearest_prototype(a, codebook.prototypes).tolist())
        bmu_b = set(nearest_prototype(b, codebook.prototypes).tolist())
        assert bmu_a and bmu_b
        assert not (bmu_a & bmu_b)

    def test_deterministic_given_seed(self, rng):
        frames = rng.standard_normal((120, 6))
        a = som_train(frames, grid_shape=(6, 4), epochs=4, seed=9)
        b = som_train(frames, grid_shape=(6, 4), epochs=4, seed=9)
        assert np.array_equal(a.prototypes, b.prototypes)

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError):
            som_train(np.zeros((0, 4)))


class TestSpectrogramEncode:
    def codebook(self, rng):
        frames = rng.standard_normal((300, 40))
        return som_train(frames, grid_shape=(50, 10), epochs=2, seed=0)

    def test_one_spike_per_frame(self, rng):
        codebook = self.codebook(rng)
        signal = rng.standard_normal(RATE) * 0.4
        stream = spectrogram_encode(signal, codebook)
        n_frames = mel_spectrogram(signal, RATE).shape[0]
        assert len(stream) == n_frames
        assert stream.n_channels == 500

    def test_channels_match_brute_force_nearest(self, rng):
        codebook = self.codebook(rng)
        signal = rng.standard_normal(RATE // 2) * 0.4
        stream = spectrogram_encode(signal, codebook)
        feats = mel_spectrogram(signal, RATE)
        order = np.argsort(stream.times, kind="stable")
        for frame, channel in zip(feats, stream.channels[order]):
            distances = np.linalg.norm(codebook.prototypes - frame, axis=1)
            assert channel == int(np.argmin(distances))

    def test_exact_prototype_frame_fires_its_channel(self, rng):
        codebook = self.codebook(rng)
        idx = nearest_prototype(codebook.prototypes[123][None, :],
                                codebook.prototypes)
        assert idx[0] == 123


class TestLif:
    def test_vectorized_matches_scalar_reference(self, rng):
        drive = rng.uniform(0, 2.0, size=(3, 400))
        thresholds = np.array([0.8, 1.0, 1.2])
        spikes = lif_spike_trains(drive, thresholds, tau=0.005,
                                  refractory=0.001, sample_rate=RATE)
        for c in range(3):
            state = LifState(threshold=thresholds[c], tau=0.005,
                             refractory_remaining=0)
            for t in range(400):
                fired = lif_step(state, drive[c, t], 1.0 / RATE)
                if fired:
                    state.refractory_remaining = round(0.001 * RATE)
                assert fired == bool(spikes[c, t]), (c, t)

    def test_refractory_enforced(self):
        drive = np.full((1, 1000), 10.0)
        spikes = lif_spike_trains(drive, np.array([0.5]), tau=0.005,
                                  refractory=0.001, sample_rate=RATE)
        isi = np.diff(np.nonzero(spikes[0])[0])
        assert isi.min() > round(0.001 * RATE)

    def test_no_drive_no_spikes(self):
        spikes = lif_spike_trains(np.zeros((2, 500)), np.array([0.5, 0.5]),
                                  tau=0.005, refractory=0.001, sample_rate=RATE)
        assert not spikes.any()

    def test_bushy_layer_needs_accumulation(self):
        spikes_in = np.zeros((1, 200), dtype=bool)
        spikes_in[0, ::20] = True
        out_weak = bushy_layer(spikes_in, weight=0.3, tau=0.0005,
                               refractory=0.001, sample_rate=RATE)
        out_strong = bushy_layer(spikes_in, weight=1.5, tau=0.0005,
                                 refractory=0.001, sample_rate=RATE)
        assert not out_weak.any()           # single weak inputs decay away
        assert out_strong.sum() == spikes_in.sum()  # every input fires through


class TestLauscherEncode:
    def test_silence_emits_nothing(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        stream = lauscher_encode(np.zeros(4000), RATE, params, bank=bank,
                                 thresholds=thresholds)
        assert len(stream) == 0
        assert stream.n_channels == 700

    def test_tone_drives_matching_channels(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        t = np.arange(RATE // 2) / RATE
        stream = lauscher_encode(np.sin(2 * np.pi * 1000 * t), RATE, params,
                                 bank=bank, thresholds=thresholds)
        counts = np.bincount(stream.channels, minlength=700)
        cfs = bank.center_freqs
        best = int(np.argmax(counts))
        assert 900 <= cfs[best] <= 1100
        active = np.nonzero(counts)[0]
        assert cfs[active].min() > 700 and cfs[active].max() < 1500

    def test_refractory_respected_on_every_channel(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        t = np.arange(RATE // 2) / RATE
        stream = lauscher_encode(np.sin(2 * np.pi * 1000 * t), RATE, params,
                                 bank=bank, thresholds=thresholds)
        refractory_samples = round(params.refractory * RATE)
        for channel in np.unique(stream.channels):
            times = stream.times[stream.channels == channel]
            if times.size > 1:
                assert np.diff(times).min() > refractory_samples

    def test_amplitude_ladder_monotone_per_channel(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        t = np.arange(RATE // 4) / RATE
        tone = np.sin(2 * np.pi * 1000 * t)
        counts = []
        for amp in (0.25, 0.5, 1.0):
            stream = lauscher_encode(amp * tone, RATE, params, bank=bank,
                                     thresholds=thresholds)
            counts.append(np.bincount(stream.channels, minlength=700))
        assert np.all(counts[1] >= counts[0])
        assert np.all(counts[2] >= counts[1])

    def test_full_scale_center_tone_rate_near_target(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        seconds = 0.5
        t = np.arange(round(seconds * RATE)) / RATE
        stream = lauscher_encode(np.sin(2 * np.pi * 1000 * t), RATE, params,
                                 bank=bank, thresholds=thresholds)
        counts = np.bincount(stream.channels, minlength=700)
        best_rate = counts.max() / seconds
        assert best_rate == pytest.approx(params.target_rate, rel=0.15)

    def test_bushy_variant_runs_and_thins_output(self, lauscher_setup):
        params, bank, thresholds = lauscher_setup
        bushy = LauscherParams(bushy=True, bushy_weight=0.9)
        t = np.arange(RATE // 4) / RATE
        tone = np.sin(2 * np.pi * 1000 * t)
        plain = lauscher_encode(tone, RATE, params, bank=bank, thresholds=thresholds)
        sharpened = lauscher_encode(tone, RATE, bushy, bank=bank, thresholds=thresholds)
        assert len(sharpened) <= len(plain)
