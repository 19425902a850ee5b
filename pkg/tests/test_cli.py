import hashlib
import json
from pathlib import Path

import pytest

from airsynth.cli import run


def _dir_digest(root: Path) -> dict:
    return {str(p.relative_to(root)): hashlib.md5(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_ds") / "ds"
    code = run(["generate", "--out", str(out), "--total", "24",
                "--seed", "7", "--width", "640", "--height", "360",
                "--workers", "2"])
    assert code == 0
    return out


def test_generate_creates_layout(generated):
    assert (generated / "meta" / "manifest.json").exists()
    assert (generated / "meta" / "summary.json").exists()
    n = len(list((generated / "images").glob("*/*.png")))
    assert n == 24
    assert len(list((generated / "labels").glob("*/*.txt"))) == 24
    assert len(list((generated / "masks").glob("*/*.png"))) == 24


def test_generate_deterministic_across_runs(generated, tmp_path):
    out2 = tmp_path / "again"
    code = run(["generate", "--out", str(out2), "--total", "24",
                "--seed", "7", "--width", "640", "--height", "360",
                "--workers", "1"])
    assert code == 0
    assert _dir_digest(out2) == _generated_digest(generated)


def _generated_digest(root: Path) -> dict:
    # ignore files later tests may have added on top of the generation output
    return {k: v for k, v in _dir_digest(root).items() if k != "meta/stats.json"}


def test_generate_different_seed_differs(generated, tmp_path):
    out2 = tmp_path / "seeded"
    code = run(["generate", "--out", str(out2), "--total", "24",
                "--seed", "8", "--width", "640", "--height", "360"])
    assert code == 0
    assert _dir_digest(out2) != _dir_digest(generated)


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    out = tmp_path / "cfg_ds"
    cfg.write_text(json.dumps({"total": 999, "seed": 3, "width": 640,
                               "height": 360, "out": str(out)}))
    code = run(["generate", "--config", str(cfg), "--total", "12"])
    assert code == 0
    assert len(list((out / "images").glob("*/*.png"))) == 12


def test_config_errors_exit_2(tmp_path):
    assert run(["generate", "--total", "10"]) == 2  # missing out
    assert run(["generate", "--out", str(tmp_path / "x"), "--total", "0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["generate", "--config", str(bad), "--out", "x"]) == 2
    assert run(["generate", "--config", str(tmp_path / "none.json"),
                "--out", "x"]) == 2


def test_stats_reports_and_writes_json(generated, capsys):
    code = run(["stats", "--out", str(generated)])
    assert code == 0
    out = capsys.readouterr().out
    assert "24 images" in out
    assert "Subset composition" in out
    stats = json.loads((generated / "meta" / "stats.json").read_text())
    assert stats["total_images"] == 24
    summary = json.loads((generated / "meta" / "summary.json").read_text())
    assert stats["counts"] == summary["counts"]


def test_stats_missing_dir_exit_3(tmp_path):
    assert run(["stats", "--out", str(tmp_path / "nope")]) == 3


def test_validate_clean_dataset(generated, capsys):
    code = run(["validate", "--out", str(generated)])
    assert code == 0
    assert "validation OK" in capsys.readouterr().out


def test_validate_flags_corrupt_label(generated, capsys):
    lbl = sorted((generated / "labels").glob("*/*.txt"))[0]
    original = lbl.read_text()
    try:
        lbl.write_text("0 2.0 0.5 0.5 0.5\n")  # box centered outside the image
        code = run(["validate", "--out", str(generated)])
        assert code == 4
        err = capsys.readouterr().err
        assert lbl.name in err and "FAIL" in err
    finally:
        lbl.write_text(original)


def test_validate_flags_missing_image(generated, capsys):
    img = sorted((generated / "images").glob("*/*.png"))[0]
    data = img.read_bytes()
    try:
        img.unlink()
        code = run(["validate", "--out", str(generated)])
        assert code == 4
        assert "manifest" in capsys.readouterr().err
    finally:
        img.write_bytes(data)


def test_preview_nondestructive(generated):
    before = _dir_digest(generated)
    code = run(["preview", "--out", str(generated), "--preview-count", "4"])
    assert code == 0
    previews = list((generated / "preview").glob("*.png"))
    assert len(previews) == 4
    after = {k: v for k, v in _dir_digest(generated).items()
             if not k.startswith("preview/")}
    assert after == before
    for p in previews:
        p.unlink()
    (generated / "preview").rmdir()


def test_env_worker_override(generated, tmp_path, monkeypatch):
    monkeypatch.setenv("AIRSYNTH_WORKERS", "3")
    out2 = tmp_path / "envw"
    code = run(["generate", "--out", str(out2), "--total", "24",
                "--seed", "7", "--width", "640", "--height", "360"])
    assert code == 0
    assert _dir_digest(out2) == _generated_digest(generated)
