"""Command-line interface.

Subcommands: encode, decode, calibrate, metrics, bench, dump-bank.
Exit status: 0 success, 1 usage error, 2 data/format error.  Option
precedence is CLI flag > --config file > built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import formats, metrics, place_coding, pursuit, reconstruct
from .audio import load_audio, save_wav
from .config import EncoderConfig, load_config_file, resolve_config
from .errors import SpikeCodecError
from .kernels import bank_from_config
from .pursuit import flatten_codes

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that uses exit code 1 for usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("encoder configuration")
    group.add_argument("--config", type=Path, help="JSON config file")
    group.add_argument("--sps", type=int)
    group.add_argument("--sample-rate", type=int, dest="sample_rate")
    group.add_argument("--segment-len", type=int, dest="segment_len")
    group.add_argument("--m-count", type=int, dest="m_count")
    group.add_argument("--fmin", type=float)
    group.add_argument("--fmax", type=float)
    group.add_argument("--order", type=int)
    group.add_argument("--max-kernel-len", type=int, dest="max_kernel_len")
    group.add_argument("--bin-width", type=float, dest="bin_width")


def _config_from_args(args, **extra) -> EncoderConfig:
    file_values = load_config_file(args.config) if args.config else None
    overrides = {
        name: getattr(args, name, None)
        for name in ("sps", "sample_rate", "segment_len", "m_count", "fmin",
                     "fmax", "order", "max_kernel_len", "bin_width")
    }
    overrides.update(extra)
    return resolve_config(file_values, overrides)


def _require_file(path: Path) -> None:
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    if not path.is_file():
        raise FileNotFoundError(f"not a regular file: {path}")


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _wav_files(paths: list[Path]) -> list[Path]:
    """Expand directories into their sorted *.wav members."""
    out: list[Path] = []
    for p in paths:
        if p.is_dir():
            out.extend(sorted(p.glob("*.wav")))
        else:
            _require_file(p)
            out.append(p)
    if not out:
        raise FileNotFoundError(f"no WAV files found in {', '.join(map(str, paths))}")
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _encode_signal(signal, bank, config, workers):
    per_segment = pursuit.encode_stream(signal, bank, config, workers=workers)
    codes = flatten_codes(per_segment)
    duration = config.segment_len * len(per_segment)
    return codes, duration


def cmd_encode(args) -> int:
    _require_file(args.input)
    config = _config_from_args(args)
    bank = bank_from_config(config)
    signal = load_audio(args.input, config.sample_rate)
    codes, duration = _encode_signal(signal, bank, config, args.workers)

    out = Path(args.output) if args.output else args.input.with_suffix("")
    if args.levels:
        _require_file(args.levels)
        table = formats.read_level_table(args.levels)
    else:
        table = place_coding.calibrate_levels(codes, config.m_count,
                                              config.level_quantiles)
        formats.write_level_table(out.with_suffix(".levels"), table)
    stream = place_coding.encode_to_events(codes, table, config, duration)

    formats.write_codes(out.with_suffix(".codes"), codes, config, duration)
    formats.write_events(out.with_suffix(".events"), stream)

    padded = np.zeros(duration)
    padded[:signal.size] = signal
    rebuilt = reconstruct.reconstruct_from_codes(codes, bank, duration, config.segment_len)
    report = reconstruct.reconstruction_report(padded, rebuilt)
    report.update(code_count=len(codes), event_count=len(stream),
                  collisions=stream.collision_count)
    _write_text(out.with_suffix(".report.json"), json.dumps(report, indent=2) + "\n")
    print(json.dumps({"codes": str(out.with_suffix('.codes')),
                      "events": str(out.with_suffix('.events')),
                      **report}))
    return 0


def _sniff_magic(path: Path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(4)


def cmd_decode(args) -> int:
    _require_file(args.input)
    magic = _sniff_magic(args.input)
    out_wav = Path(args.output) if args.output else args.input.with_suffix(".decoded.wav")

    if magic == formats.CODE_MAGIC:
        codes, meta = formats.read_codes(args.input)
        config = _config_from_args(
            args, sps=int(meta["sps"]), sample_rate=int(meta["sample_rate"]),
            segment_len=int(meta["segment_len"]), m_count=int(meta["m_count"]),
            fmin=meta["fmin"], fmax=meta["fmax"], order=int(meta["order"]),
            max_kernel_len=int(meta["max_kernel_len"]),
        )
        bank = bank_from_config(config)
        rebuilt = reconstruct.reconstruct_from_codes(
            codes, bank, int(meta["duration"]), config.segment_len)
        sample_rate = config.sample_rate
    elif magic == formats.EVENT_MAGIC:
        if not args.levels:
            raise SpikeCodecError("decoding an event file requires --levels")
        _require_file(args.levels)
        stream = formats.read_events(args.input)
        table = formats.read_level_table(args.levels)
        config = _config_from_args(args, sample_rate=int(stream.sample_rate),
                                   m_count=table.m_count)
        bank = bank_from_config(config)
        rebuilt = reconstruct.reconstruct_from_events(stream, bank, table)
        sample_rate = stream.sample_rate
    else:
        raise formats.BadMagicError(f"{args.input}: unrecognized magic {magic!r}")

    save_wav(out_wav, rebuilt, sample_rate)
    report: dict = {"output": str(out_wav), "samples": int(rebuilt.size)}
    if args.reference:
        _require_file(args.reference)
        reference = load_audio(args.reference, sample_rate)
        padded = np.zeros(rebuilt.size)
        padded[:min(reference.size, rebuilt.size)] = reference[:rebuilt.size]
        report.update(reconstruct.reconstruction_report(padded, rebuilt))
    report_path = out_wav.with_suffix(".report.json")
    if args.report_format == "csv":
        report_path = out_wav.with_suffix(".report.csv")
        keys = list(report)
        lines = [",".join(keys), ",".join(str(report[k]) for k in keys)]
        _write_text(report_path, "\n".join(lines) + "\n")
    else:
        _write_text(report_path, json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return 0


def cmd_calibrate(args) -> int:
    config = _config_from_args(args)
    bank = bank_from_config(config)
    files = _wav_files(args.inputs)

    def encode_one(path: Path):
        signal = load_audio(path, config.sample_rate)
        codes, _ = _encode_signal(signal, bank, config, None)
        return codes

    workers = args.workers or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_file = list(pool.map(encode_one, files))
    else:
        per_file = [encode_one(p) for p in files]
    pooled = [c for codes in per_file for c in codes]
    table = place_coding.calibrate_levels(pooled, config.m_count, config.level_quantiles)
    formats.write_level_table(args.output, table)
    print(json.dumps({"levels": str(args.output), "files": len(files),
                      "codes": len(pooled)}))
    return 0


def cmd_metrics(args) -> int:
    config = _config_from_args(args)
    lines = []
    for path in args.inputs:
        _require_file(path)
        stream = formats.read_events(path)
        report = metrics.compute_report(stream, bin_width=config.bin_width,
                                        binarize=args.binarize)
        row = {"file": str(path), "bin_width": config.bin_width, **report.to_dict()}
        lines.append(row)
        print(json.dumps(row))
    if args.output:
        _write_text(Path(args.output),
                    "\n".join(json.dumps(row) for row in lines) + "\n")
    if args.csv:
        keys = list(lines[0])
        rows = [",".join(keys)]
        rows += [",".join(str(row[k]) for k in keys) for row in lines]
        _write_text(Path(args.csv), "\n".join(rows) + "\n")
    return 0


def cmd_bench(args) -> int:
    from .estimators import (LauscherEncoder, MatchingPursuitEncoder,
                             SpectrogramSomEncoder)

    config = _config_from_args(args)
    files = _wav_files(args.inputs)
    signals = [load_audio(p, config.sample_rate) for p in files]

    encoders = [
        ("pursuit", MatchingPursuitEncoder(
            sps=config.sps, sample_rate=config.sample_rate, m_count=config.m_count,
            fmin=config.fmin, fmax=config.fmax, order=config.order,
            segment_len=config.segment_len, max_kernel_len=config.max_kernel_len,
            workers=args.workers)),
        ("spectrogram-som", SpectrogramSomEncoder(
            sample_rate=config.sample_rate, epochs=args.som_epochs, seed=args.seed)),
        ("lauscher-lif", LauscherEncoder(sample_rate=config.sample_rate)),
    ]

    rows = []
    for name, encoder in encoders:
        t0 = time.perf_counter()
        encoder.fit(signals)
        streams = encoder.transform(signals)
        elapsed = time.perf_counter() - t0
        reports = [metrics.compute_report(s, bin_width=config.bin_width)
                   for s in streams]
        rows.append({
            "encoder": name,
            "channels": encoder.n_channels_,
            "spikes_per_sample": float(np.mean([len(s) for s in streams])),
            "sparsity_pct": float(np.mean([r.sparsity_pct for r in reports])),
            "entropy_bits": float(np.mean([r.population_entropy for r in reports])),
            "gain_bits": float(np.mean([r.information_gain for r in reports])),
            "encode_time_s": elapsed,
        })

    keys = list(rows[0])
    csv_lines = [",".join(keys)]
    csv_lines += [",".join(str(r[k]) for k in keys) for r in rows]
    _write_text(Path(args.output), "\n".join(csv_lines) + "\n")
    for row in rows:
        print(json.dumps(row))
    return 0


def cmd_dump_bank(args) -> int:
    config = _config_from_args(args)
    bank = bank_from_config(config)
    lines = ["index,center_freq,effective_len," +
             ",".join(f"s{i}" for i in range(bank.max_kernel_len))]
    for k in bank.kernels:
        samples = ",".join(repr(float(v)) for v in k.samples)
        lines.append(f"{k.index},{k.center_freq!r},{k.effective_len},{samples}")
    text = "\n".join(lines) + "\n"
    if args.output:
        _write_text(Path(args.output), text)
        print(json.dumps({"bank": str(args.output), "kernels": bank.m_count}))
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="spikecodec",
                     description="Sparse spike-train codec for audio")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("encode", parents=[], help="WAV -> codes + events")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path,
                   help="output prefix (default: input path without extension)")
    p.add_argument("--levels", type=Path, help="existing level-table CSV")
    p.add_argument("--workers", type=int)
    _add_config_options(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="codes|events -> WAV + report")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--levels", type=Path, help="level table (required for event files)")
    p.add_argument("--reference", type=Path,
                   help="original WAV to score the reconstruction against")
    p.add_argument("--report-format", choices=("json", "csv"), default="json")
    _add_config_options(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("calibrate", help="corpus -> level table")
    p.add_argument("inputs", type=Path, nargs="+", help="WAV files or directories")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--workers", type=int)
    _add_config_options(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("metrics", help="event files -> metrics report")
    p.add_argument("inputs", type=Path, nargs="+")
    p.add_argument("-o", "--output", type=Path, help="write JSON-lines here too")
    p.add_argument("--csv", type=Path, help="write a CSV table here")
    p.add_argument("--binarize", action="store_true",
                   help="clamp bin counts to one for the entropy estimates")
    _add_config_options(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="compare encoders over a corpus")
    p.add_argument("inputs", type=Path, nargs="+", help="WAV files or directories")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--som-epochs", type=int, default=20, dest="som_epochs")
    p.add_argument("--workers", type=int)
    _add_config_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dump-bank", help="kernel dictionary -> CSV")
    p.add_argument("-o", "--output", type=Path)
    _add_config_options(p)
    p.set_defaults(func=cmd_dump_bank)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"spikecodec: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except SpikeCodecError as exc:
        print(f"spikecodec: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except ValueError as exc:
        print(f"spikecodec: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
