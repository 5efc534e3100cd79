import csv
import subprocess
import sys

import numpy as np
import pytest

from tvpath.cli import MANIFEST_COLUMNS, main, match_stems, parse_size, read_config, UsageError
from tvpath.imageio import read_image, write_image
from tvpath.samples import synthetic_image


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def images(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for i in range(3):
        write_image(src / f"img{i}.png", synthetic_image(16, 16, seed=i))
    return src


def test_smooth_single_file(tmp_path, images):
    out = tmp_path / "out"
    assert main(["smooth", str(images / "img0.png"), "--out", str(out), "--level", "0.6"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["img0_s0.6.png", "manifest.csv"]
    (row,) = rows(out / "manifest.csv")
    assert row["status"] == "ok" and float(row["achieved_sparsity"]) >= 0.6
    assert row["kappa"] == "5" and row["beta"] == "1" and float(row["alpha"]) > 0
    assert len(row["sha256"]) == 64
    assert read_image(out / "img0_s0.6.png").shape == (16, 16)


def test_smooth_directory(tmp_path, images):
    out = tmp_path / "out"
    assert main(["smooth", str(images), "--out", str(out), "--level", "0.3"]) == 0
    assert len(list(out.glob("*_s0.3.png"))) == 3
    assert [r["file"] for r in rows(out / "manifest.csv")] == ["img0.png", "img1.png", "img2.png"]
    with open(out / "manifest.csv") as fh:
        assert fh.readline().strip() == ",".join(MANIFEST_COLUMNS)


def test_default_level_follows_image_size(tmp_path, images):
    out = tmp_path / "out"
    assert main(["smooth", str(images / "img1.png"), "--out", str(out)]) == 0
    assert (out / "img1_s0.6.png").exists()


def test_multiple_levels_and_colour(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    write_image(src / "c.png", synthetic_image(12, 12, seed=3, channels=3))
    out = tmp_path / "out"
    argv = ["smooth", str(src), "--out", str(out), "--level", "0.4", "--level", "0.2"]
    assert main(argv) == 0
    (row,) = rows(out / "manifest.csv")
    assert row["levels"] == "0.2;0.4"
    assert all(float(v) >= lv for v, lv in zip(row["achieved_sparsity"].split(";"), (0.2, 0.4)))
    assert read_image(out / "c_s0.4.png").shape == (12, 12, 3)
    assert main(["smooth", str(src), "--out", str(tmp_path / "g"), "--color", "gray",
                 "--level", "0.4"]) == 0
    assert read_image(tmp_path / "g" / "c_s0.4.png").shape == (12, 12)


def test_path_command(tmp_path, images):
    out = tmp_path / "out"
    assert main(["path", str(images / "img2.png"), "--out", str(out)]) == 0
    meta = rows(out / "img2_path.csv")
    assert sorted(r["output"] for r in meta) == sorted(p.name for p in out.glob("img2_s*.png"))
    assert [r["requested_level"] for r in meta][:4] == ["0.2", "0.4", "0.6", "0.8"]
    got = [float(r["achieved_sparsity"]) for r in meta]
    assert got == sorted(got)
    (row,) = rows(out / "manifest.csv")
    # quantised inputs contain flat neighbours, which may keep level 1.0 out of reach
    if row["status"] == "ok":
        assert len(meta) == 5 and got[-1] == 1.0
    else:
        assert row["status"] == "truncated" and meta[-1]["terminal"] == "true"


def test_path_on_constant_image(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    write_image(src / "flat.png", np.full((8, 8), 0.5))
    out = tmp_path / "out"
    assert main(["path", str(src), "--out", str(out), "--max-iters", "3000"]) == 0
    (row,) = rows(out / "manifest.csv")
    assert row["status"] == "truncated" and row["achieved_sparsity"] == "0.000000"
    assert [p.name for p in out.glob("*.png")] == ["flat_s0.png"]
    meta = rows(out / "flat_path.csv")
    assert len(meta) == 1 and meta[0]["terminal"] == "true"


def test_repeated_runs_are_byte_identical(tmp_path, images):
    outs = []
    for name, extra in (("a", []), ("b", []), ("c", ["--workers", "2"])):
        out = tmp_path / name
        assert main(["smooth", str(images), "--out", str(out), "--level", "0.5",
                     "--report", str(tmp_path / f"{name}.txt")] + extra) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1] == outs[2]
    assert "timestamp=" in (tmp_path / "a.txt").read_text()
    assert b"timestamp" not in outs[0]["manifest.csv"]


def test_bad_and_unsupported_files(tmp_path, images, capsys):
    (images / "broken.png").write_bytes(b"not an image")
    (images / "notes.txt").write_text("hello")
    out = tmp_path / "out"
    assert main(["smooth", str(images), "--out", str(out), "--level", "0.3"]) == 1
    status = {r["file"]: r["status"] for r in rows(out / "manifest.csv")}
    assert status == {"broken.png": "error", "img0.png": "ok", "img1.png": "ok",
                      "img2.png": "ok", "notes.txt": "skipped"}
    assert "broken.png" in capsys.readouterr().err


def test_all_files_failing(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "a.png").write_bytes(b"junk")
    assert main(["smooth", str(src), "--out", str(tmp_path / "out")]) == 1


@pytest.mark.parametrize("argv", [
    ["smooth", "{in}", "--out", "{in}"],
    ["smooth", "{in}", "--out", "{out}", "--level", "1.5"],
    ["smooth", "{in}", "--out", "{out}", "--level", "0"],
    ["smooth", "{in}", "--out", "{out}", "--kappa", "-1"],
    ["smooth", "{in}", "--out", "{out}", "--workers", "0"],
    ["smooth", "{missing}", "--out", "{out}"],
    ["bench", "--size", "0"],
    ["bench", "--size", "8x"],
])
def test_invalid_arguments(tmp_path, images, argv, capsys):
    subs = {"in": str(images), "out": str(tmp_path / "out"), "missing": str(tmp_path / "nope")}
    assert main([a.format(**subs) for a in argv]) == 2


def test_argparse_errors_exit_with_two():
    with pytest.raises(SystemExit) as exc:
        main(["smooth"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["smooth", "x", "--out", "y", "--color", "purple"])
    assert exc.value.code == 2


def test_config_precedence(tmp_path, images):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# overrides\nkappa = 4\nbeta=0.5\nlevel = 0.3\n")
    out = tmp_path / "a"
    assert main(["smooth", str(images / "img0.png"), "--out", str(out), "--config", str(cfg)]) == 0
    (row,) = rows(out / "manifest.csv")
    assert (row["kappa"], row["beta"], row["levels"]) == ("4", "0.5", "0.3")
    out = tmp_path / "b"
    assert main(["smooth", str(images / "img0.png"), "--out", str(out), "--config", str(cfg),
                 "--kappa", "6", "--level", "0.2"]) == 0
    (row,) = rows(out / "manifest.csv")
    assert (row["kappa"], row["beta"], row["levels"]) == ("6", "0.5", "0.2")


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = gray\n")
    with pytest.raises(UsageError):
        read_config(bad)
    bad.write_text("kappa\n")
    with pytest.raises(UsageError):
        read_config(bad)
    bad.write_text("kappa = fast\n")
    with pytest.raises(UsageError):
        read_config(bad)


def test_parse_size():
    assert parse_size("84") == (84, 84)
    assert parse_size("8x12") == (8, 12)
    with pytest.raises(UsageError):
        parse_size("-3")


def test_bench_command(capsys):
    assert main(["bench", "--size", "8", "--iters", "100", "--projections", "2"]) == 0
    out = capsys.readouterr().out
    assert "equivalent=true" in out and "graph_dense_ratio=" in out
    assert "numpy=" in out and "timestamp=" in out


def test_spectrum_command(tmp_path, images, capsys):
    smooth = tmp_path / "smooth"
    assert main(["smooth", str(images), "--out", str(smooth), "--level", "0.6"]) == 0
    (smooth / "manifest.csv").unlink()
    rep = tmp_path / "spectrum.txt"
    assert main(["spectrum", str(images), str(smooth), "--out", str(tmp_path / "s"),
                 "--report", str(rep)]) == 0
    values = dict(line.split("=", 1) for line in rep.read_text().splitlines())
    assert values["pairs"] == "3" and values["radius"] == "6"
    assert float(values["residual_high_energy"]) > 0
    assert (tmp_path / "s" / "spectrum.png").exists()


def test_spectrum_of_identical_directories(tmp_path, images, capsys):
    assert main(["spectrum", str(images), str(images), "--out", str(tmp_path)]) == 0
    values = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    assert float(values["residual_high_energy"]) == 0.0
    assert not read_image(tmp_path / "spectrum.png").any()


def test_spectrum_errors(tmp_path, images, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["spectrum", str(empty), str(images)]) == 2
    other = tmp_path / "other"
    other.mkdir()
    write_image(other / "zzz.png", np.zeros((16, 16)))
    assert main(["spectrum", str(images), str(other)]) == 2
    err = capsys.readouterr().err
    assert "img0.png" in err and "zzz.png" in err
    assert main(["spectrum", str(images), str(images), "--radius", "0"]) == 2


def test_match_stems(tmp_path):
    from pathlib import Path
    a = [Path("x.png"), Path("y.png")]
    b = [Path("x_s0.6.png"), Path("y.png")]
    assert match_stems(a, b) == [(a[0], b[0]), (a[1], b[1])]
    with pytest.raises(UsageError):
        match_stems(a, [Path("x_s0.2.png"), Path("x_s0.4.png"), Path("y.png")])


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tvpath.cli", "bench", "--size", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "size must be positive" in proc.stderr
