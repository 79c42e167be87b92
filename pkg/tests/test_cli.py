import csv

import numpy as np
import pytest

from rwvideo.cli import main
from rwvideo.codec_pipeline import SidecarFile
from rwvideo.io import read_logo, read_sequence, write_logo, write_sequence
from rwvideo.metrics import balanced_logo

from conftest import corpus


@pytest.fixture
def workspace(tmp_path):
    seq = corpus("moving-rect", n=6, w=48, h=48, speed=2)
    write_sequence(seq, tmp_path / "orig")
    write_logo(balanced_logo(16, 16), tmp_path / "logo.pbm")
    return tmp_path, seq


def test_embed_extract(workspace, capsys):
    tmp, seq = workspace
    assert main(["embed", "--in", str(tmp / "orig"), "--logo", str(tmp / "logo.pbm"),
                 "--out", str(tmp / "wm"), "--sidecar", str(tmp / "s.bin")]) == 0
    assert "psnr_db=" in capsys.readouterr().out
    assert read_sequence(tmp / "wm") != seq
    assert main(["extract", "--in", str(tmp / "wm"), "--sidecar", str(tmp / "s.bin"),
                 "--out", str(tmp / "rest"), "--logo-out", str(tmp / "out.pbm")]) == 0
    assert read_sequence(tmp / "rest") == seq
    assert (tmp / "out.pbm").read_bytes() == (tmp / "logo.pbm").read_bytes()


def test_verify_constant(tmp_path, capsys):
    write_sequence(corpus("constant", n=18, w=64, h=64), tmp_path / "c")
    write_logo(balanced_logo(16, 16), tmp_path / "l.pbm")
    assert main(["verify", "--orig", str(tmp_path / "c"), "--logo", str(tmp_path / "l.pbm")]) == 0
    out = capsys.readouterr().out
    value = float(out.split("psnr_db=")[1].split()[0])
    assert value >= 48.13
    assert "frames=exact logo=exact" in out


def test_verify_raw_input(tmp_path):
    write_sequence(corpus("h-ramp", n=4, w=32, h=32), tmp_path / "v.raw")
    write_logo(balanced_logo(8, 8), tmp_path / "l.pbm")
    assert main(["verify", "--orig", str(tmp_path / "v.raw"), "--dims", "32x32",
                 "--frames", "4", "--logo", str(tmp_path / "l.pbm")]) == 0


def test_extract_header_mismatch(workspace):
    tmp, _ = workspace
    main(["embed", "--in", str(tmp / "orig"), "--logo", str(tmp / "logo.pbm"),
          "--out", str(tmp / "wm"), "--sidecar", str(tmp / "s.bin")])
    sc = SidecarFile.read(tmp / "s.bin")
    sc.width = 50
    sc.write(tmp / "bad.bin")
    assert main(["extract", "--in", str(tmp / "wm"), "--sidecar", str(tmp / "bad.bin"),
                 "--out", str(tmp / "rest"), "--logo-out", str(tmp / "o.pbm")]) == 3


def test_capacity_exit_status(tmp_path):
    write_sequence(corpus("noise", n=3, w=24, h=24), tmp_path / "n")
    write_logo(balanced_logo(8, 8), tmp_path / "l.pbm")
    assert main(["embed", "--in", str(tmp_path / "n"), "--logo", str(tmp_path / "l.pbm"),
                 "--out", str(tmp_path / "wm"), "--sidecar", str(tmp_path / "s.bin")]) == 2


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["embed", "--in", "x"]) == 1
    assert main(["sweep", "--in", "x", "--csv", "y", "--sizes", "3by3"]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_input_is_usage_error(tmp_path):
    assert main(["metrics", "--a", str(tmp_path / "none"), "--b", str(tmp_path / "none")]) == 1


def test_metrics(workspace, capsys):
    tmp, seq = workspace
    b = seq.copy()
    b.data[0, 0, 0] += 1
    write_sequence(b, tmp / "b")
    assert main(["metrics", "--a", str(tmp / "orig"), "--b", str(tmp / "orig")]) == 0
    assert "psnr_db=inf" in capsys.readouterr().out
    assert main(["metrics", "--a", str(tmp / "orig"), "--b", str(tmp / "b")]) == 0
    expected = 10 * np.log10(255**2 * 6 * 48 * 48)
    assert float(capsys.readouterr().out.split("=")[1]) == pytest.approx(expected, abs=1e-4)


def test_sweep_csv(workspace):
    tmp, _ = workspace
    assert main(["sweep", "--in", str(tmp / "orig"), "--sizes", "8x8,16x16,64x64",
                 "--csv", str(tmp / "s.csv")]) == 0
    with open(tmp / "s.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["logo_w"], r["logo_h"]) for r in rows] == [("8", "8"), ("16", "16"), ("64", "64")]
    assert rows[0]["status"] == "ok" and rows[2]["status"].startswith("failed")


def test_gen_corpus(tmp_path):
    assert main(["gen-corpus", "--kind", "noise", "--dims", "16x8", "--frames", "3",
                 "--seed", "5", "--out", str(tmp_path / "g")]) == 0
    assert read_sequence(tmp_path / "g") == corpus("noise", n=3, w=16, h=8, seed=5)
    assert main(["gen-corpus", "--kind", "moving-rect", "--dims", "8x8", "--frames", "3",
                 "--size", "20", "--out", str(tmp_path / "r")]) == 1


def test_tampered_video_fails_verify_style_check(workspace):
    tmp, seq = workspace
    main(["embed", "--in", str(tmp / "orig"), "--logo", str(tmp / "logo.pbm"),
          "--out", str(tmp / "wm"), "--sidecar", str(tmp / "s.bin")])
    wm = read_sequence(tmp / "wm")
    wm.data[2, 3, 4] ^= 1
    write_sequence(wm, tmp / "wm")
    status = main(["extract", "--in", str(tmp / "wm"), "--sidecar", str(tmp / "s.bin"),
                   "--out", str(tmp / "rest"), "--logo-out", str(tmp / "o.pbm")])
    assert status == 3 or read_sequence(tmp / "rest") != seq or read_logo(tmp / "o.pbm") != read_logo(tmp / "logo.pbm")
