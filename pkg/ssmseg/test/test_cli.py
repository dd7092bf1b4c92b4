# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import json
import os
import re

import numpy as np
import pytest

from ssmseg.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from ssmseg.config import Backend, PipelineConfig, ThreadCount
from ssmseg.core import api as execution
from ssmseg.pipeline.formats import atomic_write, parse_pgm
from .utils import assert_equal

SCRIPT = """
[global]
seed = 11

[source A]
resonances = 300:100:1.0, 1200:150:0.6

[source B]
resonances = 2500:200:1.0, 4500:300:0.5
am_rate = 5

[schedule]
schedule = A:40, B:40
"""

RTTM_LINE = re.compile(
    r"^SPEAKER news 1 \d+\.\d{3} \d+\.\d{3} <NA> <NA> (newsreader|other) <NA> <NA>$"
)


@pytest.fixture(autouse=True)
def sequential():
    execution.shutdown()
    ThreadCount.put(1)
    Backend.reset()
    yield
    execution.shutdown()
    ThreadCount.reset()
    Backend.reset()


@pytest.fixture(scope="module")
def news(tmp_path_factory):
    directory = tmp_path_factory.mktemp("news")
    script = directory / "news.ini"
    script.write_text(SCRIPT)
    wav, ref = directory / "news.wav", directory / "news.ref"
    assert_equal(main(["--threads", "1", "synth", str(script), str(wav), str(ref)]), EXIT_OK)
    return wav, ref


def test_synth_outputs(news):
    wav, ref = news
    assert_equal(wav.read_bytes()[:4], b"RIFF")
    times = [line for line in ref.read_text().splitlines() if line and line[0].isdigit()]
    assert_equal([float(t) for t in times], [40.0])


def test_segment_report(news, tmp_path):
    wav, _ = news
    out, rttm = tmp_path / "news.json", tmp_path / "news.rttm"
    code = main(["segment", str(wav), "-o", str(out), "--out-rttm", str(rttm), "--tau", "5"])
    assert_equal(code, EXIT_OK)
    report = json.loads(out.read_text())
    assert_equal(list(report), ["audio", "duration_s", "change_points", "segments", "config"])
    assert_equal(report["audio"], str(wav))
    assert_equal(report["duration_s"], 80.0)
    assert_equal(report["config"]["tau"], 5.0)
    assert_equal(PipelineConfig.from_dict(report["config"]), PipelineConfig(tau=5.0))
    assert all(p["stage"] in ("coarse", "refined") for p in report["change_points"])
    segments = report["segments"]
    assert_equal(segments[0]["start_s"], 0.0)
    assert_equal(segments[-1]["end_s"], 80.0)
    assert all(a["end_s"] == b["start_s"] for a, b in zip(segments, segments[1:]))
    lines = rttm.read_text().splitlines()
    assert_equal(len(lines), len(segments))
    assert all(RTTM_LINE.match(line) for line in lines)


def test_segment_config_file_and_flag_precedence(news, tmp_path):
    wav, _ = news
    cfg = tmp_path / "run.cfg"
    cfg.write_text("peak_k = 1.5\nmin_gap_s = 3\n")
    out = tmp_path / "out.json"
    code = main(["segment", str(wav), "-o", str(out), "--config", str(cfg), "--peak-k", "2.5"])
    assert_equal(code, EXIT_OK)
    config = json.loads(out.read_text())["config"]
    assert_equal((config["peak_k"], config["min_gap_s"]), (2.5, 3.0))


def test_bic_curve_dump(news, tmp_path):
    wav, _ = news
    out, curves = tmp_path / "out.json", tmp_path / "curves"
    assert_equal(main(["segment", str(wav), "-o", str(out), "--bic-curve-dir", str(curves)]), 0)
    coarse = [p for p in json.loads(out.read_text())["change_points"] if p["stage"] == "coarse"]
    files = sorted(os.listdir(curves))
    assert_equal(len(files), len(coarse))
    for name in files:
        assert name.startswith("bic_curve_")
        assert_equal((curves / name).read_text().splitlines()[0], "candidate_time_s,bic")


def test_eval_prints_report(news, tmp_path, capsys):
    wav, ref = news
    out = tmp_path / "out.json"
    assert_equal(main(["segment", str(wav), "-o", str(out)]), EXIT_OK)
    capsys.readouterr()
    assert_equal(main(["eval", str(out), str(ref), "--tolerance-s", "1.0"]), EXIT_OK)
    report = json.loads(capsys.readouterr().out)
    assert_equal(report["ref_count"], 2)
    assert_equal(report["delta"], report["hyp_count"] - 2)
    assert_equal(report["boundaries"]["tolerance_s"], 1.0)


def test_baseline(news, tmp_path):
    wav, _ = news
    out = tmp_path / "base.json"
    assert_equal(main(["baseline", str(wav), "-o", str(out), "--threshold", "1000"]), EXIT_OK)
    report = json.loads(out.read_text())
    assert all(p["stage"] == "refined" for p in report["change_points"])


def test_ssm_image(news, tmp_path):
    wav, _ = news
    out = tmp_path / "ssm.pgm"
    assert_equal(main(["ssm-image", str(wav), str(out)]), EXIT_OK)
    payload = out.read_bytes()
    # 80 s of audio gives 16 segments of 5 s, the last one 2 frames short
    assert payload.startswith(b"P5\n16 16\n255\n")
    assert_equal(len(payload), len(b"P5\n16 16\n255\n") + 16 * 16)
    pixels = parse_pgm(payload).astype(float)
    block = np.arange(16) >= 8
    same = block[:, None] == block[None, :]
    assert pixels[same].mean() < pixels[~same].mean()


def test_mfcc_and_novelty_dumps(news, tmp_path):
    wav, _ = news
    mfcc, novelty = tmp_path / "mfcc.csv", tmp_path / "novelty.csv"
    assert_equal(main(["mfcc-dump", str(wav), str(mfcc)]), EXIT_OK)
    assert_equal(main(["novelty-dump", str(wav), str(novelty)]), EXIT_OK)
    rows = mfcc.read_text().splitlines()
    assert_equal(rows[0].split(",")[:2], ["time_s", "c0"])
    assert_equal(len(rows[1].split(",")), 14)
    assert len(rows) > 7900
    rows = novelty.read_text().splitlines()
    assert_equal(rows[0], "segment_index,time_s,score")
    assert_equal(len(rows), 17)


def test_missing_audio_is_a_runtime_error(tmp_path, capsys):
    missing = tmp_path / "nope.wav"
    assert_equal(main(["segment", str(missing), "-o", str(tmp_path / "o.json")]), EXIT_RUNTIME)
    assert str(missing) in capsys.readouterr().err
    assert not (tmp_path / "o.json").exists()


@pytest.mark.parametrize(
    "args",
    [
        ["--peak-k", "abc"],
        ["--kernel-half-width", "0"],
        ["--win-s", "-1"],
    ],
)
def test_bad_config_is_a_usage_error(news, tmp_path, args):
    wav, _ = news
    assert_equal(main(["segment", str(wav), "-o", str(tmp_path / "o.json"), *args]), EXIT_USAGE)


def test_unknown_config_file_key(news, tmp_path):
    wav, _ = news
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("peak = 3\n")
    code = main(["segment", str(wav), "-o", str(tmp_path / "o.json"), "--config", str(cfg)])
    assert_equal(code, EXIT_USAGE)


def test_eval_unsorted_hypothesis_is_a_usage_error(tmp_path, capsys):
    hyp, ref = tmp_path / "hyp.json", tmp_path / "ref.txt"
    points = [{"time_s": t, "stage": "refined", "score": 1.0} for t in (60.0, 30.0)]
    hyp.write_text(json.dumps({"duration_s": 90.0, "change_points": points, "segments": []}))
    ref.write_text("30.0\n60.0\n")
    assert_equal(main(["eval", str(hyp), str(ref)]), EXIT_USAGE)
    assert "strictly increasing" in capsys.readouterr().err


def test_missing_config_file_is_a_usage_error(news, tmp_path, capsys):
    wav, _ = news
    missing = tmp_path / "nope.cfg"
    out = tmp_path / "o.json"
    code = main(["segment", str(wav), "-o", str(out), "--config", str(missing)])
    assert_equal(code, EXIT_USAGE)
    assert str(missing) in capsys.readouterr().err
    assert not out.exists()


def test_eval_parse_failure(tmp_path):
    hyp, ref = tmp_path / "hyp.json", tmp_path / "ref.txt"
    hyp.write_text(json.dumps({"duration_s": 10.0, "change_points": [], "segments": []}))
    ref.write_text("abc\n")
    assert_equal(main(["eval", str(hyp), str(ref)]), EXIT_USAGE)


def test_bad_script(tmp_path):
    script = tmp_path / "bad.ini"
    script.write_text("[schedule]\nschedule = Q:3\n")
    code = main(["synth", str(script), str(tmp_path / "x.wav"), str(tmp_path / "x.ref")])
    assert_equal(code, EXIT_RUNTIME)


def test_argparse_exit_codes(capsys):
    assert_equal(main(["frobnicate"]), EXIT_USAGE)
    assert_equal(main(["--version"]), EXIT_OK)
    assert "ssmseg" in capsys.readouterr().out


def test_atomic_write_replaces_without_leftovers(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    atomic_write(path, "new\n")
    assert_equal(path.read_text(), "new\n")
    assert_equal(os.listdir(tmp_path), ["out.txt"])
