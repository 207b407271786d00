"""Command line interface.

Subcommands: preprocess, train, finetune, vocode, bench, highband.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import trainer
from .config import Config, default_config, load_config
from .data import DatasetManifest
from .dsp import load_wav
from .errors import UniMelGANError
from .evaluate import benchmark_rtf, highband_distance
from .pipeline import preprocess_directory
from .synthesis import copy_synthesis, load_vocoder, vocode_file


def _config_from(args) -> Config:
    cfg = load_config(args.config) if args.config else default_config()
    overrides = {}
    if getattr(args, "target_lufs", None) is not None:
        overrides["target_lufs"] = args.target_lufs
    if getattr(args, "highpass_hz", None) is not None:
        overrides["highpass_hz"] = args.highpass_hz
    if overrides:
        cfg = replace(cfg, preprocess=replace(cfg.preprocess, **overrides))
    return cfg


def _cmd_preprocess(args) -> int:
    cfg = _config_from(args)
    manifest = preprocess_directory(args.in_dir, args.out_dir, cfg)
    print(f"processed {len(manifest.entries)} utterances -> {args.out_dir}/manifest.tsv")
    return 0


def _cmd_train(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    manifest = DatasetManifest.load(args.manifest)
    final = trainer.train(cfg, manifest, args.out_dir, resume=args.resume)
    print(f"final checkpoint: {final}")
    return 0


def _cmd_finetune(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    final = trainer.finetune(args.ckpt, manifest, args.steps, args.out_dir)
    print(f"final checkpoint: {final}")
    return 0


def _cmd_vocode(args) -> int:
    if args.features:
        wav = vocode_file(args.ckpt, args.features, args.out)
    else:
        wav, _ = copy_synthesis(args.ckpt, args.wav, args.out)
    print(f"wrote {len(wav)} samples ({wav.duration:.2f} s) to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    generator, _ = load_vocoder(args.ckpt)
    report = benchmark_rtf(generator, args.seconds, runs=args.runs, warmup=args.warmup)
    text = report.to_json()
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return 0


def _cmd_highband(args) -> int:
    report = highband_distance(load_wav(args.ref), load_wav(args.gen))
    text = report.to_json()
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unimelgan",
        description="GAN vocoder: 100-band log-mel spectrograms to 24 kHz audio",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="resample, filter, loudness-normalize, extract features")
    p.add_argument("--in-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--target-lufs", type=float, default=None, help="default -23")
    p.add_argument("--highpass-hz", type=float, default=None, help="default 50")
    p.set_defaults(run=_cmd_preprocess)

    p = sub.add_parser("train", help="pretrain then adversarially train")
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", default=None, help="checkpoint to continue from")
    p.set_defaults(run=_cmd_train)

    p = sub.add_parser("finetune", help="fine-tune a checkpoint on predicted features")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--manifest", required=True, help="ground-truth waves + predicted features")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(run=_cmd_finetune)

    p = sub.add_parser("vocode", help="synthesize audio from features or a reference wav")
    p.add_argument("--ckpt", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--features", default=None)
    src.add_argument("--wav", default=None, help="copy-synthesis input")
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_vocode)

    p = sub.add_parser("bench", help="measure the real-time factor")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--json", default=None)
    p.set_defaults(run=_cmd_bench)

    p = sub.add_parser("highband", help="6-12 kHz log distance and energy ratio")
    p.add_argument("--ref", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(run=_cmd_highband)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except UniMelGANError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
