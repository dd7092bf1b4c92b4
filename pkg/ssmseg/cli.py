# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Command line interface: ``ssmseg <subcommand> ...``."""

import argparse
import logging
import os
import sys

from ssmseg import api
from ssmseg._version import __version__
from ssmseg.config import PipelineConfig, ThreadCount
from ssmseg.core import api as execution
from ssmseg.core.errors import ConfigError, ParseError, SsmsegError
from ssmseg.pipeline.evaluation import (
    DEFAULT_TOLERANCE_S,
    evaluate,
    read_hypothesis,
    read_reference,
    write_reference,
)
from ssmseg.pipeline.features import compute_mfcc
from ssmseg.pipeline.formats import atomic_write, dumps_json, write_json
from ssmseg.pipeline.refine import context_curve
from ssmseg.pipeline.audio_io import write_wav
from ssmseg.pipeline.synth import load_script, render

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_CONFIG_HELP = {
    "sample_rate": "working sample rate in Hz",
    "segment_len_s": "first-pass segment length in seconds (2-5 recommended)",
    "kernel_half_width": "checkerboard kernel half width in segments",
    "peak_k": "coarse peak threshold in standard deviations above the mean",
    "epsilon": "covariance ridge factor",
    "min_novelty_lambda": "weight of the absolute novelty floor, 0 disables it",
    "context_s": "refinement context around a coarse point in seconds",
    "win_s": "refinement window length in seconds",
    "step_s": "refinement step in seconds",
    "min_gap_s": "minimal distance between refined points in seconds",
    "tau": "newsreader threshold on the BIC against the anchor",
    "label_penalty_lambda": "BIC penalty weight used when labeling",
}


def _add_config_args(parser):
    group = parser.add_argument_group("pipeline configuration")
    group.add_argument(
        "--config", metavar="PATH", help="key = value config file; flags override it"
    )
    for key in PipelineConfig.keys():
        group.add_argument(
            f"--{key.replace('_', '-')}",
            dest=f"cfg_{key}",
            metavar="VALUE",
            default=None,
            help=_CONFIG_HELP.get(key, f"'{key}' config key"),
        )


def resolve_config(args):
    """
    Build the run configuration: defaults < config file < flags.

    Parameters
    ----------
    args : argparse.Namespace
        Parsed arguments of a subcommand with config flags.

    Returns
    -------
    PipelineConfig
    """
    config = PipelineConfig()
    if args.config:
        config = PipelineConfig.from_file(args.config, base=config)
    overrides = {
        key: getattr(args, f"cfg_{key}")
        for key in PipelineConfig.keys()
        if getattr(args, f"cfg_{key}") is not None
    }
    return PipelineConfig.from_dict(overrides, base=config)


def _write_lines(path, lines):
    atomic_write(path, "".join(f"{line}\n" for line in lines))


def cmd_segment(args):
    config = resolve_config(args)
    result = api.segment_audio(args.audio, config)
    write_json(args.out_json, result.to_dict(args.audio))
    if args.out_rttm:
        _write_lines(args.out_rttm, result.rttm_lines())
    if args.out_regions:
        _write_lines(args.out_regions, (f"{a:.3f} {b:.3f}" for a, b in result.newsreader_regions()))
    if args.bic_curve_dir:
        os.makedirs(args.bic_curve_dir, exist_ok=True)
        for i, point in enumerate(result.coarse):
            curve = context_curve(result.features, point, config.refine, config.epsilon)
            name = f"bic_curve_{i:03d}_{point.time_s:.3f}.csv"
            atomic_write(os.path.join(args.bic_curve_dir, name), curve.to_csv())
    return EXIT_OK


def cmd_baseline(args):
    config = resolve_config(args)
    result = api.segment_baseline(args.audio, config, threshold=args.threshold)
    write_json(args.out_json, result.to_dict(args.audio))
    if args.out_rttm:
        _write_lines(args.out_rttm, result.rttm_lines())
    return EXIT_OK


def cmd_ssm_image(args):
    config = resolve_config(args)
    features = compute_mfcc(api.load_audio(args.audio, config), config.mfcc)
    ssm, _, _ = api.first_pass(features, config)
    atomic_write(args.out_pgm, ssm.to_pgm())
    return EXIT_OK


def cmd_mfcc_dump(args):
    config = resolve_config(args)
    features = compute_mfcc(api.load_audio(args.audio, config), config.mfcc)
    atomic_write(args.out_csv, features.to_csv())
    return EXIT_OK


def cmd_novelty_dump(args):
    config = resolve_config(args)
    features = compute_mfcc(api.load_audio(args.audio, config), config.mfcc)
    ssm, novelty, _ = api.first_pass(features, config)
    atomic_write(args.out_csv, novelty.to_csv(ssm.segment_times))
    return EXIT_OK


def cmd_eval(args):
    report = evaluate(
        read_hypothesis(args.hyp_json), read_reference(args.ref), args.tolerance_s
    )
    text = dumps_json(report)
    sys.stdout.write(text)
    if args.out_json:
        atomic_write(args.out_json, text)
    return EXIT_OK


def cmd_synth(args):
    buffer, ref = render(load_script(args.script))
    write_wav(args.out_wav, buffer)
    write_reference(args.out_ref, ref)
    return EXIT_OK


def build_parser():
    """
    Build the argument parser of all subcommands.

    Returns
    -------
    argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="ssmseg",
        description="Two-pass broadcast news segmentation with BIC self-similarity matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker count, 0 = one per CPU (SSMSEG_THREADS)"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("segment", help="detect change points and label newsreader segments")
    p.add_argument("audio", help="input WAV file")
    p.add_argument("-o", "--out-json", required=True, help="segmentation report")
    p.add_argument("--out-rttm", help="RTTM file of the labeled segments")
    p.add_argument("--out-regions", help="text file of merged newsreader regions")
    p.add_argument("--bic-curve-dir", help="directory for per-point sliding BIC CSV files")
    _add_config_args(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("baseline", help="single-pass thresholded sliding-window BIC detector")
    p.add_argument("audio", help="input WAV file")
    p.add_argument("-o", "--out-json", required=True, help="segmentation report")
    p.add_argument("--out-rttm", help="RTTM file of the labeled segments")
    p.add_argument("--threshold", type=float, default=0.0, help="minimal BIC of a peak")
    _add_config_args(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("ssm-image", help="render the self-similarity matrix as a PGM image")
    p.add_argument("audio", help="input WAV file")
    p.add_argument("out_pgm", help="output PGM file")
    _add_config_args(p)
    p.set_defaults(func=cmd_ssm_image)

    p = sub.add_parser("mfcc-dump", help="write MFCC vectors as CSV")
    p.add_argument("audio", help="input WAV file")
    p.add_argument("out_csv", help="output CSV file")
    _add_config_args(p)
    p.set_defaults(func=cmd_mfcc_dump)

    p = sub.add_parser("novelty-dump", help="write the first-pass novelty curve as CSV")
    p.add_argument("audio", help="input WAV file")
    p.add_argument("out_csv", help="output CSV file")
    _add_config_args(p)
    p.set_defaults(func=cmd_novelty_dump)

    p = sub.add_parser("eval", help="score a segmentation report against a reference")
    p.add_argument("hyp_json", help="segmentation report")
    p.add_argument("ref", help="reference annotation file")
    p.add_argument(
        "--tolerance-s", type=float, default=DEFAULT_TOLERANCE_S, help="boundary matching tolerance"
    )
    p.add_argument("--out-json", help="also write the report to this file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthesis script to WAV and reference files")
    p.add_argument("script", help="synthesis script")
    p.add_argument("out_wav", help="output WAV file")
    p.add_argument("out_ref", help="output reference annotation file")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    """
    Run the command line interface.

    Parameters
    ----------
    argv : list of str, optional
        Arguments without the program name; ``sys.argv[1:]`` if it isn't provided.

    Returns
    -------
    int
        0 on success, 1 on runtime errors, 2 on usage, config or parse errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.verbose:
        logging.getLogger("ssmseg").setLevel(logging.INFO)
    if args.threads is not None:
        ThreadCount.put(args.threads)
    try:
        return args.func(args)
    except (ConfigError, ParseError) as err:
        sys.stderr.write(f"ssmseg: error: {err}\n")
        return EXIT_USAGE
    except (SsmsegError, OSError, ValueError, ArithmeticError) as err:
        sys.stderr.write(f"ssmseg: error: {err}\n")
        return EXIT_RUNTIME
    finally:
        execution.shutdown()
