"""spikecodec: sparse spike-train codec for audio.

Pipeline: a dictionary of unit-norm gammatone kernels, greedy matching
pursuit per fixed-length segment, place coding of intensities onto three
channels per kernel, exact code-path / quantized spike-path decoders,
spike-train efficiency metrics, and two baseline encoders for
comparison.  Scikit-learn style estimators wrap the functional core.
"""

from .audio import load_audio, save_wav
from .config import EncoderConfig, default_segment_len, next_pow2
from .errors import (
    CalibrationError,
    ConfigurationError,
    FormatError,
    SpikeCodecError,
)
from .estimators import (
    LauscherEncoder,
    MatchingPursuitEncoder,
    SpectrogramSomEncoder,
    SpikeCountProbe,
)
from .formats import (
    read_codes,
    read_events,
    read_level_table,
    write_codes,
    write_events,
    write_level_table,
)
from .kernels import GammatoneKernel, KernelBank, bank_from_config, build_bank, gammatone_atom
from .metrics import (
    BinnedRaster,
    MetricsReport,
    bin_events,
    channel_entropy,
    compute_report,
    population_entropy_and_gain,
    sparsity,
)
from .place_coding import (
    EventStream,
    LevelTable,
    SpikeEvent,
    calibrate_levels,
    encode_to_events,
    map_code,
)
from .pursuit import (
    Code,
    Segment,
    best_match,
    correlate_all,
    encode_segment,
    encode_stream,
    flatten_codes,
    segment_signal,
    subtract_atom,
)
from .reconstruct import (
    reconstruct_from_codes,
    reconstruct_from_events,
    reconstruction_report,
)

__version__ = "0.1.0"

__all__ = [
    "BinnedRaster",
    "CalibrationError",
    "Code",
    "ConfigurationError",
    "EncoderConfig",
    "EventStream",
    "FormatError",
    "GammatoneKernel",
    "KernelBank",
    "LauscherEncoder",
    "LevelTable",
    "MatchingPursuitEncoder",
    "MetricsReport",
    "Segment",
    "SpikeCodecError",
    "SpikeCountProbe",
    "SpikeEvent",
    "SpectrogramSomEncoder",
    "bank_from_config",
    "best_match",
    "bin_events",
    "build_bank",
    "calibrate_levels",
    "channel_entropy",
    "compute_report",
    "correlate_all",
    "default_segment_len",
    "encode_segment",
    "encode_stream",
    "encode_to_events",
    "flatten_codes",
    "gammatone_atom",
    "load_audio",
    "map_code",
    "next_pow2",
    "population_entropy_and_gain",
    "read_codes",
    "read_events",
    "read_level_table",
    "reconstruct_from_codes",
    "reconstruct_from_events",
    "reconstruction_report",
    "save_wav",
    "segment_signal",
    "sparsity",
    "subtract_atom",
    "write_codes",
    "write_events",
    "write_level_table",
]
