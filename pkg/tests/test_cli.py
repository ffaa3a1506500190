import json

import numpy as np
import pytest
from PIL import Image

from ortholearn import synthetic
from ortholearn.cli import main
from ortholearn.clouds import serialize_pcd
from ortholearn.learner import PerceptualMemory


@pytest.fixture(scope="module")
def cloud_file(tmp_path_factory):
    root = tmp_path_factory.mktemp("clouds")
    rng = np.random.default_rng(0)
    cloud = synthetic.brick(rng)
    path = root / "brick.pcd"
    path.write_bytes(serialize_pcd(cloud))
    return path


@pytest.fixture(scope="module")
def dataset_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    synthetic.write_synthetic_dataset(root, views_per_category=6, seed=1,
                                      categories=["brick", "can", "plate"])
    return root


def test_project_writes_six_pngs(cloud_file, tmp_path, capsys):
    assert main(["project", str(cloud_file), "--out", str(tmp_path),
                 "--resolution", "64"]) == 0
    written = sorted(p.name for p in tmp_path.glob("*.png"))
    assert len(written) == 6
    assert written == sorted(
        f"brick_{v}_{k}.png" for v in ("front", "side", "top")
        for k in ("depth", "color"))


def test_entropy_structured_output(cloud_file, capsys):
    assert main(["entropy", str(cloud_file), "--resolution", "64"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 4
    assert out[0].startswith("front: ")
    assert out[1].startswith("side: ")
    assert out[2].startswith("top: ")
    assert out[3].startswith("selected: ")
    assert out[3].split(": ")[1] in ("front", "side", "top")


def test_convert_writes_png_and_range(tmp_path, capsys):
    src = tmp_path / "input.png"
    rng = np.random.default_rng(5)
    Image.fromarray(rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)).save(src)
    out = tmp_path / "converted"
    assert main(["convert", str(src), "--space", "YUV", "--out", str(out)]) == 0
    assert (tmp_path / "converted.png").exists()
    ranges = (tmp_path / "converted.range.txt").read_text()
    assert "space = YUV" in ranges
    assert "channel_0" in ranges


def test_embed_emits_blob_and_header(cloud_file, tmp_path, capsys):
    out = tmp_path / "feat"
    assert main(["embed", str(cloud_file), "--out", str(out)]) == 0
    header = json.loads((tmp_path / "feat.json").read_text())
    blob = (tmp_path / "feat.bin").read_bytes()
    assert header["dtype"] == "<f4"
    assert len(blob) == 4 * header["length"]
    assert header["length"] == header["shape_length"] + header["color_length"]
    assert header["spaces"] == ["RGB", "HSV", "YCbCr", "YUV"]
    vec = np.frombuffer(blob, dtype="<f4")
    assert np.isfinite(vec).all()


def test_embed_missing_file_reports_error(tmp_path, capsys):
    missing = tmp_path / "missing.pcd"
    code = main(["embed", str(missing), "--out", str(tmp_path / "x")])
    assert code == 1
    err = capsys.readouterr().err
    assert "missing.pcd" in err
    assert err.startswith("error:")


def test_simulate_deterministic_output(dataset_root, tmp_path, capsys):
    args = ["simulate", "--dataset", str(dataset_root), "--seed", "7",
            "--runs", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    first = capsys.readouterr().out
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    second = capsys.readouterr().out
    assert first == second
    for name in ("run_00.jsonl", "run_01.jsonl", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["mean"]["NLC"] == 3.0


def test_memory_export_import(dataset_root, tmp_path, capsys):
    out = tmp_path / "memory.bin"
    assert main(["memory", "export", "--dataset", str(dataset_root),
                 "--out", str(out), "--limit", "2"]) == 0
    capsys.readouterr()
    memory = PerceptualMemory.load(out)
    assert memory.counts() == {"brick": 2, "can": 2, "plate": 2}
    assert main(["memory", "import", str(out)]) == 0
    text = capsys.readouterr().out
    assert "categories: 3" in text
    assert "brick: 2" in text


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


@pytest.mark.parametrize("space", ["RGB", "HED", "HSV", "LAB", "YCbCr", "YIQ",
                                   "YUV", "GRAY"])
def test_convert_all_spaces(space, tmp_path, capsys):
    src = tmp_path / "in.png"
    rng = np.random.default_rng(11)
    Image.fromarray(rng.integers(0, 256, size=(8, 8, 3)).astype(np.uint8)).save(src)
    out = tmp_path / f"out_{space}"
    assert main(["convert", str(src), "--space", space, "--out", str(out)]) == 0
    png = np.asarray(Image.open(out.with_suffix(".png")))
    assert png.shape == (8, 8, 3)
    assert f"space = {space}" in out.with_suffix(".range.txt").read_text()


def test_convert_unknown_space_fails(tmp_path, capsys):
    src = tmp_path / "in.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(src)
    code = main(["convert", str(src), "--space", "CMYK", "--out",
                 str(tmp_path / "x")])
    assert code == 1
    assert "InvalidColorspace" in capsys.readouterr().err
