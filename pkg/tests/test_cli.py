import json

import numpy as np
import pytest
import yaml

from ipftrack.cli import main
from ipftrack.imageio import frame_name, list_frames, read_mask, write_pgm

CONFIG = {
    "cameras": [{"focal": 130, "resolution": [96, 72], "eye": [2.5, 2.5, 0.5],
                 "target": [0, 0, -0.1]}],
    "tracker": {"M": 4, "tracked": ["l_hip_x", "r_hip_x"], "seed": 1},
    "origin_search": {"position_range": 0.05, "angle_range": 5},
    "synthetic": {"duration": 0.3, "fps": 20, "motions": [
        {"dof": "l_hip_x", "amplitude": 20, "period": 2.0},
        {"dof": "r_hip_x", "amplitude": 20, "period": 2.0, "phase": 180}]},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(yaml.safe_dump(CONFIG))
    return p


def test_full_pipeline(tmp_path, cfg_path, capsys):
    syn, trk, ovl = tmp_path / "syn", tmp_path / "trk", tmp_path / "ovl"
    assert main(["synth", "--config", str(cfg_path), "--out", str(syn)]) == 0
    assert len(list_frames(syn / "cam0")) == 6
    assert main(["track", "--config", str(cfg_path), "--frames", str(syn), "--out", str(trk),
                 "--truth", str(syn / "ground_truth.csv")]) == 0
    summary = json.loads((trk / "summary.json").read_text())
    assert summary["tracked_dof_mae"] <= 5.0
    assert (trk / "errors.csv").exists()
    assert main(["eval", "--config", str(cfg_path), "--report", str(trk / "track.csv"),
                 "--truth", str(syn / "ground_truth.csv"), "--out", str(tmp_path / "ev")]) == 0
    assert json.loads((tmp_path / "ev" / "summary.json").read_text()) == summary
    assert main(["overlay", "--config", str(cfg_path), "--report", str(trk / "track.csv"),
                 "--frames", str(syn), "--out", str(ovl)]) == 0
    assert len(list(ovl.glob("overlay_*.pgm"))) == 6
    assert "tracked-DOF MAE" in capsys.readouterr().out


def test_track_from_raw_frames(tmp_path, cfg_path):
    syn = tmp_path / "syn"
    assert main(["synth", "--config", str(cfg_path), "--out", str(syn)]) == 0
    raw = tmp_path / "raw"
    raw.mkdir()
    bg = np.full((72, 96), 40, np.uint8)
    write_pgm(tmp_path / "bg.pgm", bg)
    for k, p in enumerate(list_frames(syn / "cam0")):
        img = bg.copy()
        img[read_mask(p)] = 200
        write_pgm(raw / frame_name(k), img)
    out = tmp_path / "trk"
    assert main(["track", "--config", str(cfg_path), "--frames", str(raw),
                 "--background", str(tmp_path / "bg.pgm"), "--out", str(out)]) == 0
    assert main(["track", "--config", str(cfg_path), "--frames", str(syn), "--out",
                 str(tmp_path / "t2")]) == 0
    assert (out / "track.csv").read_bytes() == (tmp_path / "t2" / "track.csv").read_bytes()


def test_seed_flag_changes_output(tmp_path, cfg_path):
    syn = tmp_path / "syn"
    main(["synth", "--config", str(cfg_path), "--out", str(syn)])
    for name, seed in (("a", "1"), ("b", "1"), ("c", "2")):
        main(["track", "--config", str(cfg_path), "--frames", str(syn), "--seed", seed,
              "--out", str(tmp_path / name)])
    read = lambda n: (tmp_path / n / "track.csv").read_bytes()
    assert read("a") == read("b") != read("c")


def test_errors_exit_nonzero(tmp_path, cfg_path, capsys):
    code = main(["track", "--config", str(cfg_path), "--frames", str(tmp_path / "missing"),
                 "--out", str(tmp_path / "o")])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("ipftrack track: error:") and "\n" not in err
    bad = tmp_path / "bad.yaml"
    bad.write_text("tracker: {q: 4}\n")
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "s")]) == 1


def test_fast_synthetic_motion_is_rejected(tmp_path):
    cfg = dict(CONFIG, synthetic={"duration": 1, "fps": 20, "motions": [
        {"dof": "l_hip_x", "amplitude": 40, "period": 1.0}]})
    p = tmp_path / "fast.yaml"
    p.write_text(yaml.safe_dump(cfg))
    assert main(["synth", "--config", str(p), "--out", str(tmp_path / "s")]) == 1
