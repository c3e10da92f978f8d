"""Command-line pipeline driver.

Verbs:
  seed collect   harvest a physical source into an EFSQ sequence corpus
  seed extract   EFSQ -> EFSD mantissa seed records
  train          fit the inner model, write an EFNN file plus a JSON log
  generate       emit sequences and optionally whitened .bin streams
  whiten         condition stored sequences or seeds into .bin streams
  test           run one battery over stored artifacts (JSON + CSV out)
  report         merge battery reports into one summary + plot CSVs

Every command is reproducible from its config and inputs.  Exit codes:
0 ok, 2 IO/format, 3 training, 4 generation, 5 battery threshold not
met, 6 report schema.  EF_THREADS (or --threads) sizes the worker pool
for per-stream battery runs; results do not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bitstream import BitStream
from .config import PipelineConfig, load_config
from .crypto_eval import crypto_battery, split_blocks
from .errors import (
    ConfigError,
    EntroflowError,
    GeneratorDiverged,
    InsufficientData,
    ParseError,
    ReseedRequired,
    SchemaVersionError,
    TrainingDiverged,
)
from .fileformats import read_seeds, read_sequences, write_seeds, write_sequences
from .floatstats import FloatBatteryConfig, float_battery
from .generator import generate_stream
from .bitstats import nist_battery
from .nnet import load_model, new_inner_network, save_model, train_inner
from .results import REPORT_SCHEMA_VERSION, BatteryReport
from .seedsrc import (
    SEQUENCE_LEN,
    collect_cpu_jitter,
    extract_mantissa_bits,
    load_rf_wav,
    samples_to_sequences,
)
from .whitener import generate_bytes, instantiate

__all__ = ["main", "build_parser"]

STREAM_BYTES = 1 << 20  # one whitened output file


class _Fail(Exception):
    """Terminate the command with a specific exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("EF_THREADS", "1")))


def _require(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise _Fail(2, f"input {p} does not exist")
    return p


def _pipeline_config(args) -> PipelineConfig:
    return load_config(args.config) if getattr(args, "config", None) else PipelineConfig()


def _load_corpus(path) -> list:
    """One .efsq file, or a directory scanned for *.efsq."""
    p = _require(path)
    files = sorted(p.glob("*.efsq")) if p.is_dir() else [p]
    if not files:
        raise _Fail(2, f"{p} holds no .efsq files")
    corpus = []
    for f in files:
        corpus.extend(read_sequences(f))
    return corpus


def _load_streams(path) -> list:
    """One .bin file, or a directory scanned for *.bin."""
    p = _require(path)
    files = sorted(p.glob("*.bin")) if p.is_dir() else [p]
    if not files:
        raise _Fail(2, f"{p} holds no .bin files")
    return [BitStream.from_bytes(f.read_bytes()) for f in files]


def _write_report(report: BatteryReport, base) -> None:
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    base.with_suffix(".json").write_text(report.to_json() + "\n")
    base.with_suffix(".csv").write_text(report.to_csv())
    print(f"wrote {base.with_suffix('.json')} and {base.with_suffix('.csv')}")


# ---------------------------------------------------------------- seed


def _cmd_seed(args) -> int:
    if args.action == "collect":
        n = args.sequences
        if args.source == "rf-wav":
            if not args.wav:
                raise _Fail(2, "rf-wav collection needs --wav")
            block = load_rf_wav(_require(args.wav))
        else:
            block = collect_cpu_jitter(n * SEQUENCE_LEN)
        sequences = samples_to_sequences(block)
        if len(sequences) < n:
            raise _Fail(2, f"source yielded {len(sequences)} sequences, need {n}")
        write_sequences(args.output, sequences[:n])
        print(f"wrote {n} sequences to {args.output}")
        return 0
    corpus = read_sequences(_require(args.input))
    seeds = [extract_mantissa_bits(s) for s in corpus]
    write_seeds(args.output, seeds)
    print(f"wrote {len(seeds)} seed records to {args.output}")
    return 0


# --------------------------------------------------------------- train


def _cmd_train(args) -> int:
    cfg = _pipeline_config(args)
    corpus = _load_corpus(args.corpus)
    if len(corpus) < 10:
        print(f"warning: corpus holds only {len(corpus)} sequences", file=sys.stderr)
    net = new_inner_network(rng_seed=cfg.training.rng_seed)
    log = train_inner(net, corpus, cfg.training)
    save_model(net, args.output)
    log_path = Path(args.log) if args.log else Path(args.output).with_suffix(".log.json")
    log_path.write_text(
        json.dumps(
            {
                "epochs_run": log.epochs_run,
                "epoch_mae": log.epoch_mae,
                "holdout_mae": log.holdout_mae,
                "holdout_within_target": log.holdout_within_target,
            },
            indent=2,
        )
        + "\n"
    )
    print(
        f"wrote {args.output} (holdout MAE {log.holdout_mae:.4f}, "
        f"{log.holdout_within_target:.1%} within target); log at {log_path}"
    )
    return 0


# ------------------------------------------------------ generate/whiten


def _whiten_streams(material: bytes, n_streams: int, n_bytes: int, outdir) -> list:
    """One DRBG instance per stream, personalised by the stream index."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n_streams):
        state = instantiate(material, personalization=struct.pack("<I", i))
        path = outdir / f"stream_{i:03d}.bin"
        path.write_bytes(generate_bytes(state, n_bytes))
        paths.append(path)
    return paths


def _corpus_material(corpus) -> bytes:
    return b"".join(extract_mantissa_bits(s).bits for s in corpus)


def _cmd_generate(args) -> int:
    cfg = _pipeline_config(args)
    inner = load_model(_require(args.model))
    seeds = _load_corpus(args.seeds)
    try:
        corpus = generate_stream(inner, seeds, args.sequences, cfg.generator)
    except (InsufficientData, ReseedRequired) as exc:
        raise _Fail(4, f"generation stopped after 0 of {args.sequences} sequences: {exc}")
    write_sequences(args.output, corpus)
    print(f"wrote {len(corpus)} sequences to {args.output}")
    if args.whiten:
        outdir = args.stream_dir or Path(args.output).parent / "streams"
        paths = _whiten_streams(
            _corpus_material(corpus), args.streams, args.stream_bytes, outdir
        )
        print(f"wrote {len(paths)} whitened streams of {args.stream_bytes} bytes to {outdir}")
    return 0


def _cmd_whiten(args) -> int:
    if (args.corpus is None) == (args.seeds is None):
        raise _Fail(2, "pass exactly one of --corpus or --seeds")
    if args.corpus:
        material = _corpus_material(_load_corpus(args.corpus))
    else:
        material = b"".join(s.bits for s in read_seeds(_require(args.seeds)))
    paths = _whiten_streams(material, args.streams, args.stream_bytes, args.outdir)
    print(f"wrote {len(paths)} whitened streams of {args.stream_bytes} bytes to {args.outdir}")
    return 0


# ---------------------------------------------------------------- test


def _gate(label: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    return ok


def _cmd_test_float(args, cfg: PipelineConfig) -> int:
    corpus = _load_corpus(args.corpus)
    report = float_battery(corpus, cfg=FloatBatteryConfig(alpha=cfg.alpha))
    _write_report(report, args.output)
    ok = True
    for name, row in sorted(report.pass_rates().items()):
        if row["n_run"] == 0:
            continue
        ok &= _gate(
            f"float/{name}",
            row["pass_rate"] >= args.min_pass_rate,
            f"{row['n_pass']}/{row['n_run']} pass (rate {row['pass_rate']:.3f})",
        )
    return 0 if ok else 5


def _nist_parallel(streams, params, n_workers: int) -> BatteryReport:
    """Per-stream battery runs in a pool; reduce is by stream index."""

    def one(stream):
        return nist_battery([stream], params)

    if n_workers == 1:
        parts = [one(s) for s in streams]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(one, streams))
    merged = BatteryReport(battery="nist")
    for i, part in enumerate(parts):
        for row in part.results:
            row.subject = str(i) + row.subject[1:]  # single-stream runs label "0"
            merged.add(row)
    rates = merged.pass_rates()
    merged.summary = {
        "n_streams": len(streams),
        "pass_rates": rates,
        "miss_rates": merged.miss_rates(),
        "not_run": {k: v["n"] - v["n_run"] for k, v in rates.items()},
    }
    return merged


def _cmd_test_nist(args, cfg: PipelineConfig) -> int:
    streams = _load_streams(args.streams)
    report = _nist_parallel(streams, cfg.nist, _threads(args))
    _write_report(report, args.output)
    ok = True
    for name, row in sorted(report.pass_rates().items()):
        not_run = row["n"] - row["n_run"]
        if name.startswith("random_excursions"):
            # reported with not-run accounting; no pass-rate gate per state
            print(
                f"INFO  nist/{name}: {row['n_pass']}/{row['n_run']} pass, "
                f"{not_run}/{row['n']} not run"
            )
            continue
        ok &= _gate(
            f"nist/{name}",
            row["n_run"] > 0 and row["pass_rate"] >= args.min_pass_rate,
            f"{row['n_pass']}/{row['n_run']} pass (rate {row['pass_rate']:.3f}), "
            f"{not_run} not run",
        )
    return 0 if ok else 5


def _cmd_test_crypto(args, cfg: PipelineConfig) -> int:
    streams = _load_streams(args.stream)
    blocks = np.concatenate([split_blocks(s) for s in streams], axis=0)
    report = crypto_battery(blocks, cfg.crypto)
    _write_report(report, args.output)
    s = report.summary
    ok = True
    ok &= _gate(
        "crypto/hd_fail_rate",
        s["hd_fail_rate"] <= args.max_hd_fail,
        f"{s['hd_fail_rate']:.4f} <= {args.max_hd_fail}",
    )
    ok &= _gate(
        "crypto/hd_mean",
        args.hd_mean_low <= s["hd_mean"] <= args.hd_mean_high,
        f"{s['hd_mean']:.2f} in [{args.hd_mean_low}, {args.hd_mean_high}]",
    )
    ok &= _gate(
        "crypto/acf_fail_rate",
        s["acf_fail_rate"] <= args.max_acf_fail,
        f"{s['acf_fail_rate']:.4f} <= {args.max_acf_fail}",
    )
    for direction in ("forward", "backward"):
        ok &= _gate(
            f"crypto/next_bit_fail_rate_{direction}",
            s[f"next_bit_fail_rate_{direction}"] <= args.max_next_bit_fail,
            f"{s[f'next_bit_fail_rate_{direction}']:.4f} <= {args.max_next_bit_fail}",
        )
        ok &= _gate(
            f"crypto/next_bit_acc_mean_{direction}",
            args.acc_low <= s[f"next_bit_acc_mean_{direction}"] <= args.acc_high,
            f"{s[f'next_bit_acc_mean_{direction}']:.4f} in [{args.acc_low}, {args.acc_high}]",
        )
    return 0 if ok else 5


def _cmd_test(args) -> int:
    cfg = _pipeline_config(args)
    handler = {"float": _cmd_test_float, "nist": _cmd_test_nist, "crypto": _cmd_test_crypto}
    return handler[args.battery](args, cfg)


# -------------------------------------------------------------- report


def _report_files(inputs) -> list:
    files = []
    for item in inputs:
        p = _require(item)
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return files


def _merge_reports(files) -> tuple:
    """Load, dedupe byte-identical reports, and group rows by battery."""
    seen = set()
    unique = []
    for f in files:
        try:
            rep = BatteryReport.from_json(Path(f).read_text())
        except SchemaVersionError as exc:
            raise _Fail(6, f"{f}: {exc}")
        key = rep.to_json(indent=None)
        if key not in seen:
            seen.add(key)
            unique.append((str(f), rep))
    combined: dict = {}
    for j, (_, rep) in enumerate(unique):
        slot = combined.setdefault(rep.battery, BatteryReport(battery=rep.battery))
        for row in rep.results:
            row.subject = f"r{j}/{row.subject}"
            slot.add(row)
    return unique, combined


def _table_lines(combined: dict) -> list:
    lines = [f"{'battery':8s} {'test':34s} {'n':>5s} {'run':>5s} {'pass':>5s} {'rate':>6s}"]
    for bat in sorted(combined):
        for name, row in sorted(combined[bat].pass_rates().items()):
            rate = "-" if row["n_run"] == 0 else f"{row['pass_rate']:.3f}"
            lines.append(
                f"{bat:8s} {name:34s} {row['n']:5d} {row['n_run']:5d} {row['n_pass']:5d} {rate:>6s}"
            )
    return lines


def _plot_csvs(corpus, outdir, bins: int, max_lag: int) -> None:
    """Plot-ready CSVs: value histogram, mean ACF, mean periodogram."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    values = np.concatenate([s.values.astype(np.float64) for s in corpus])
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    with (outdir / "histogram.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_low", "bin_high", "count"])
        for i, c in enumerate(counts):
            w.writerow([f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}", int(c)])

    mat = np.stack([s.values.astype(np.float64) for s in corpus])
    mat -= mat.mean(axis=1, keepdims=True)
    denom = (mat * mat).sum(axis=1)
    denom[denom == 0.0] = np.inf
    with (outdir / "acf.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lag", "mean_acf"])
        for k in range(1, max_lag + 1):
            rho = (mat[:, :-k] * mat[:, k:]).sum(axis=1) / denom
            w.writerow([k, f"{rho.mean():.8f}"])

    spec = np.abs(np.fft.rfft(mat, axis=1)) ** 2 / mat.shape[1]
    mean_spec = spec.mean(axis=0)
    with (outdir / "psd.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency", "mean_power"])
        for k, p in enumerate(mean_spec):
            w.writerow([f"{k / mat.shape[1]:.6f}", f"{p:.8f}"])
    print(f"wrote plot CSVs to {outdir}")


def _cmd_report(args) -> int:
    files = _report_files(args.inputs)
    if not files:
        raise _Fail(6, "no report files to merge")
    unique, combined = _merge_reports(files)
    merged = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "n_reports": len(unique),
        "batteries": {
            bat: {
                "n_results": len(rep.results),
                "pass_rates": rep.pass_rates(),
                "miss_rates": rep.miss_rates(),
            }
            for bat, rep in combined.items()
        },
        "sources": [name for name, _ in unique],
    }
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(merged, indent=2, sort_keys=True) + "\n")
    table = "\n".join(_table_lines(combined))
    print(table)
    if args.table:
        Path(args.table).write_text(table + "\n")
    if args.corpus:
        _plot_csvs(_load_corpus(args.corpus), args.csv_dir, args.bins, args.max_lag)
    print(f"wrote {out}")
    return 0


# -------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entroflow", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--config", help="pipeline JSON config", default=None)
    parser.add_argument("--threads", type=int, default=None, help="worker pool size (or EF_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_seed = sub.add_parser("seed", help="collect physical entropy / extract seed records")
    seed_sub = p_seed.add_subparsers(dest="action", required=True)
    p_collect = seed_sub.add_parser("collect", help="harvest a source into an EFSQ corpus")
    p_collect.add_argument("--source", choices=["cpu-jitter", "rf-wav"], default="cpu-jitter")
    p_collect.add_argument("--wav", help="input WAV for --source rf-wav")
    p_collect.add_argument("--sequences", type=int, required=True)
    p_collect.add_argument("-o", "--output", default="sequences.efsq")
    p_collect.set_defaults(func=_cmd_seed)
    p_extract = seed_sub.add_parser("extract", help="EFSQ -> EFSD mantissa seeds")
    p_extract.add_argument("input")
    p_extract.add_argument("-o", "--output", default="seeds.efsd")
    p_extract.set_defaults(func=_cmd_seed)

    p_train = sub.add_parser("train", help="fit the inner model")
    p_train.add_argument("--corpus", required=True, help=".efsq file or directory")
    p_train.add_argument("-o", "--output", default="inner.efnn")
    p_train.add_argument("--log", default=None, help="training log path (JSON)")
    p_train.set_defaults(func=_cmd_train)

    p_gen = sub.add_parser("generate", help="emit sequences (and optional whitened streams)")
    p_gen.add_argument("--model", required=True)
    p_gen.add_argument("--seeds", required=True, help="seed corpus (.efsq)")
    p_gen.add_argument("--sequences", type=int, required=True)
    p_gen.add_argument("-o", "--output", default="generated.efsq")
    p_gen.add_argument("--whiten", action="store_true")
    p_gen.add_argument("--streams", type=int, default=20)
    p_gen.add_argument("--stream-bytes", type=int, default=STREAM_BYTES)
    p_gen.add_argument("--stream-dir", default=None)
    p_gen.set_defaults(func=_cmd_generate)

    p_whiten = sub.add_parser("whiten", help="condition stored artifacts into .bin streams")
    p_whiten.add_argument("--corpus", default=None, help="sequence corpus (.efsq)")
    p_whiten.add_argument("--seeds", default=None, help="seed records (.efsd)")
    p_whiten.add_argument("--streams", type=int, default=20)
    p_whiten.add_argument("--stream-bytes", type=int, default=STREAM_BYTES)
    p_whiten.add_argument("-o", "--outdir", default="streams")
    p_whiten.set_defaults(func=_cmd_whiten)

    p_test = sub.add_parser("test", help="run one battery; exit 5 when gates fail")
    test_sub = p_test.add_subparsers(dest="battery", required=True)
    p_tf = test_sub.add_parser("float", help="per-sequence battery over an .efsq corpus")
    p_tf.add_argument("--corpus", required=True)
    p_tf.add_argument("-o", "--output", default="float_report")
    p_tf.add_argument("--min-pass-rate", type=float, default=0.90)
    p_tf.set_defaults(func=_cmd_test)
    p_tn = test_sub.add_parser("nist", help="bit battery over .bin streams")
    p_tn.add_argument("--streams", required=True, help=".bin file or directory")
    p_tn.add_argument("-o", "--output", default="nist_report")
    p_tn.add_argument("--min-pass-rate", type=float, default=0.90)
    p_tn.set_defaults(func=_cmd_test)
    p_tc = test_sub.add_parser("crypto", help="block battery over .bin streams")
    p_tc.add_argument("--stream", required=True, help=".bin file or directory")
    p_tc.add_argument("-o", "--output", default="crypto_report")
    p_tc.add_argument("--max-hd-fail", type=float, default=0.025)
    p_tc.add_argument("--max-acf-fail", type=float, default=0.06)
    p_tc.add_argument("--max-next-bit-fail", type=float, default=0.01)
    p_tc.add_argument("--hd-mean-low", type=float, default=500.0)
    p_tc.add_argument("--hd-mean-high", type=float, default=524.0)
    p_tc.add_argument("--acc-low", type=float, default=0.49)
    p_tc.add_argument("--acc-high", type=float, default=0.51)
    p_tc.set_defaults(func=_cmd_test)

    p_rep = sub.add_parser("report", help="merge battery reports")
    p_rep.add_argument("inputs", nargs="+", help="report JSON files or directories")
    p_rep.add_argument("-o", "--output", default="merged_report.json")
    p_rep.add_argument("--table", default=None, help="also write the text table here")
    p_rep.add_argument("--corpus", default=None, help=".efsq input for plot CSVs")
    p_rep.add_argument("--csv-dir", default="plots")
    p_rep.add_argument("--bins", type=int, default=50)
    p_rep.add_argument("--max-lag", type=int, default=50)
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as fail:
        print(f"error: {fail}", file=sys.stderr)
        return fail.code
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 3
    except (ReseedRequired, GeneratorDiverged) as exc:
        print(f"error: generation failed: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, ParseError, InsufficientData, EntroflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
