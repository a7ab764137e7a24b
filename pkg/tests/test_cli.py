import json
import subprocess
import sys

import numpy as np
import pytest

from relrep.cli import main
from relrep.io import parse_csv, parse_vec, read_id_list, write_space

from conftest import gaussian_space


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    s = gaussian_space(120, 8, seed=4)
    write_space("space.vec", s.ids, s.matrix)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_compare_with_itself(workdir):
    assert run("compare", "--source", "space.vec", "--target", "space.vec", "--k", 10,
               "--out", "r.json") == 0
    rep = json.loads((workdir / "r.json").read_text())
    assert rep["jaccard_mean"] == 1.0 and rep["k"] == 10 and rep["n_shared"] == 120
    for f in ("jaccard_std", "mrr_mean", "mrr_std", "cosine_mean", "cosine_std"):
        assert f in rep
    assert (workdir / "r.json.manifest.json").exists()


def test_invariance_pipeline(workdir):
    assert run("transform", "--in", "space.vec", "--seed", 3, "--scale", 2.5,
               "--translate", 4.0, "--out", "t.vec") == 0
    spec = json.loads((workdir / "t.vec.transform.json").read_text())
    assert spec["scale"] == 2.5 and spec["seed"] == 3
    assert run("anchors", "--strategy", "uniform", "--m", 20, "--seed", 1, "--in", "space.vec",
               "--out", "a.txt") == 0
    assert len(read_id_list("a.txt")) == 20
    assert run("compare", "--source", "space.vec", "--target", "t.vec", "--k", 10, "--relative",
               "--anchors-source", "a.txt", "--anchors-target", "a.txt", "--out", "r.json") == 0
    rep = json.loads((workdir / "r.json").read_text())
    assert rep["jaccard_mean"] == 1.0 and rep["mrr_mean"] == 1.0
    assert rep["cosine_mean"] >= 1 - 1e-9


def test_project_then_compare_projected_files(workdir):
    run("transform", "--in", "space.vec", "--seed", 5, "--scale", 0.3, "--out", "t.vec")
    run("anchors", "--strategy", "fps", "--m", 16, "--in", "space.vec", "--out", "a.txt")
    assert run("project", "--in", "space.vec", "--anchors", "a.txt", "--out", "p1.vec") == 0
    assert run("project", "--in", "t.vec", "--anchors", "a.txt", "--out", "p2.csv") == 0
    p1, p2 = parse_vec("p1.vec"), parse_csv("p2.csv")
    assert p1.dim == 16
    np.testing.assert_allclose(p1.matrix, p2.matrix, atol=1e-12)
    header = (workdir / "p2.csv").read_text().splitlines()[0].split(",")
    assert header[1:] == read_id_list("a.txt")
    assert run("compare", "--source", "p1.vec", "--target", "p2.csv", "--k", 5, "--no-center",
               "--out", "r.json") == 0
    assert json.loads((workdir / "r.json").read_text())["mrr_mean"] == 1.0


def test_project_quantized_and_center(workdir):
    run("anchors", "--strategy", "kmeans", "--m", 8, "--in", "space.vec", "--out", "a.txt")
    assert run("project", "--in", "space.vec", "--anchors", "a.txt", "--center",
               "--quantize-threshold", 0.5, "--out", "q.vec") == 0
    assert parse_vec("q.vec").n == 120


def test_topk_without_frequencies_is_usage_error(workdir, capsys):
    assert run("anchors", "--strategy", "topk", "--m", 3, "--in", "space.vec",
               "--out", "a.txt") == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and json.loads(err[0])["error"] == "usage"
    assert not (workdir / "a.txt").exists()


def test_topk_with_frequencies(workdir):
    ids = parse_vec("space.vec").ids
    (workdir / "f.csv").write_text("".join(f"{s},{1000 - i}\n" for i, s in enumerate(ids)))
    assert run("anchors", "--strategy", "topk", "--m", 3, "--skip", 2, "--freq", "f.csv",
               "--in", "space.vec", "--out", "a.txt") == 0
    assert read_id_list("a.txt") == list(ids[2:5])


def test_mismatched_anchor_files(workdir, capsys):
    (workdir / "a.txt").write_text("s00000\ns00001\n")
    (workdir / "b.txt").write_text("s00001\ns00000\n")
    assert run("compare", "--source", "space.vec", "--target", "space.vec", "--relative",
               "--anchors-source", "a.txt", "--anchors-target", "b.txt", "--out", "r.json") == 1
    assert "same ids" in json.loads(capsys.readouterr().err)["message"]
    assert not (workdir / "r.json").exists()


def test_missing_file_and_unknown_flag(workdir, capsys):
    assert run("compare", "--source", "nope.vec", "--target", "space.vec", "--out", "r.json") == 1
    assert run("compare", "--bogus") == 2
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 2 and all(json.loads(ln)["error"] for ln in lines)


def test_proxy_command(workdir):
    run("transform", "--in", "space.vec", "--seed", 2, "--out", "t.vec")
    run("anchors", "--strategy", "uniform", "--m", 10, "--in", "space.vec", "--out", "a.txt")
    assert run("proxy", "--space", "t.vec", "--reference", "space.vec", "--anchors", "a.txt",
               "--out", "p.json") == 0
    assert json.loads((workdir / "p.json").read_text())["proxy"] == pytest.approx(1.0, abs=1e-10)


def test_blobs_command(workdir):
    assert run("blobs", "--classes", 3, "--per-class", 4, "--d", 5, "--separation", 6.0,
               "--seed", 1, "--out", "b.vec") == 0
    assert parse_vec("b.vec").n == 12
    assert (workdir / "b.vec.labels.csv").read_text().splitlines()[1] == "x00,0"


def test_stitch_command(workdir):
    cfg = {"classification": {"n_classes": 3, "per_class": 30, "d": 8, "m": 12},
           "reconstruction": {"n_classes": 3, "per_class": 30, "d": 8, "m": 12},
           "anchor_sweep": {"n_classes": 3, "per_class": 30, "d": 8, "ms": [4, 8]},
           "proxy": {"n_models": 6, "per_class": 30}}
    (workdir / "cfg.json").write_text(json.dumps(cfg))
    assert run("stitch", "--config", "cfg.json", "--out", "out") == 0
    for name in ("classification", "reconstruction", "anchor_sweep", "proxy", "runs"):
        assert any(p.stem == name for p in (workdir / "out").iterdir())
    rows = (workdir / "out" / "runs.csv").read_text().splitlines()
    assert rows[0] == "experiment,run,metric,value" and len(rows) > 10
    assert (workdir / "out" / "manifest.json").exists()


def test_byte_determinism(workdir):
    for out in ("o1", "o2"):
        run("transform", "--in", "space.vec", "--seed", 8, "--scale", 1.7, "--out", f"{out}.vec")
        run("anchors", "--strategy", "kmeans", "--m", 7, "--seed", 3, "--in", f"{out}.vec",
            "--out", f"{out}.txt")
    for ext in (".vec", ".txt", ".vec.transform.json"):
        assert (workdir / f"o1{ext}").read_bytes() == (workdir / f"o2{ext}").read_bytes()


def test_module_entry_point_exit_status(workdir):
    r = subprocess.run([sys.executable, "-m", "relrep", "anchors", "--strategy", "fps",
                        "--m", "999", "--in", "space.vec", "--out", "a.txt"],
                       capture_output=True, text=True)
    assert r.returncode == 1
    assert "insufficient samples" in json.loads(r.stderr)["message"]
