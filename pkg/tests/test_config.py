import json

import pytest

from spikecodec.config import (
    EncoderConfig,
    default_segment_len,
    load_config_file,
    next_pow2,
    resolve_config,
)
from spikecodec.errors import ConfigurationError


class TestDerivedDefaults:
    def test_segment_is_43_5_ms(self):
        assert default_segment_len(16000) == 696
        assert default_segment_len(8000) == 348

    def test_defaults_chain(self):
        config = EncoderConfig()
        assert config.segment_len == 696
        assert config.max_kernel_len == 696          # tied to the segment
        assert config.fft_size == 2048               # next pow2 of 696 + 696 - 1
        assert config.residual_epsilon == pytest.approx(1e-12 * 696)
        assert config.bin_width == 0.010
        assert config.level_quantiles == (0.25, 0.50, 0.90)

    def test_explicit_values_respected(self):
        config = EncoderConfig(segment_len=256, max_kernel_len=128, fft_size=512)
        assert (config.segment_len, config.max_kernel_len, config.fft_size) == (256, 128, 512)

    def test_next_pow2(self):
        assert next_pow2(1) == 1
        assert next_pow2(2) == 2
        assert next_pow2(3) == 4
        assert next_pow2(1391) == 2048
        with pytest.raises(ConfigurationError):
            next_pow2(0)


class TestValidation:
    @pytest.mark.parametrize("kwargs", [
        dict(sps=0),
        dict(m_count=0),
        dict(fmin=0.0),
        dict(fmin=500.0, fmax=100.0),
        dict(fmax=8000.0),                     # at Nyquist
        dict(order=0),
        dict(fft_size=1000),                   # not a power of two
        dict(segment_len=2048, fft_size=2048),  # correlation would wrap
        dict(bin_width=0.0),
        dict(level_quantiles=(0.5, 0.25, 0.9)),
    ])
    def test_bad_values_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            EncoderConfig(**kwargs)

    def test_single_kernel_equal_range_allowed(self):
        config = EncoderConfig(m_count=1, fmin=440.0, fmax=440.0)
        assert config.m_count == 1


class TestResolution:
    def test_precedence_flag_config_default(self):
        config = resolve_config({"sps": 6, "fmin": 200.0}, {"sps": 9, "fmax": None})
        assert config.sps == 9          # override wins
        assert config.fmin == 200.0     # file value survives
        assert config.fmax == 7400.0    # default fills the None override

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigurationError):
            resolve_config({"frequency": 100.0})

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"sps": 64}))
        assert load_config_file(path) == {"sps": 64}
        path.write_text("not json")
        with pytest.raises(ConfigurationError):
            load_config_file(path)
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError):
            load_config_file(path)
