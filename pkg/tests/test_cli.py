import hashlib
import json
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

from inspath.cli import main

SCENES = Path("scenes").resolve()


def write_cfg(tmp_path, doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def find_run_dir(out: Path) -> Path:
    runs = sorted(out.glob("run-*"))
    assert runs, f"no run directory under {out}"
    return runs[-1]


def test_run_on_bundled_scene(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"s": 3, "ground_z": -5.0})
    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "inclined_plane.json"),
                 "--out", str(tmp_path / "runs")])
    assert code == 0
    out = capsys.readouterr().out
    assert "Number of points" in out
    assert "Sampling time [sec]" in out
    assert "Object profile points" in out
    assert "Final targets generated" in out
    assert (find_run_dir(tmp_path / "runs") / "plan.json").exists()


def test_missing_config_exits_2(tmp_path):
    code = main(["run", "--config", str(tmp_path / "absent.json"),
                 "--scene", str(SCENES / "flat_plane.json"), "--out", str(tmp_path)])
    assert code == 2


def test_bad_config_value_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"voxel": -0.5})
    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "flat_plane.json"),
                 "--out", str(tmp_path)])
    assert code == 2


def test_nonexistent_cluster_selection_exits_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"s": 2, "ground_z": -5.0})
    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "flat_plane.json"),
                 "--out", str(tmp_path / "runs"), "--select", "5"])
    assert code == 3
    assert "cluster" in capsys.readouterr().err


def test_interactive_with_headless_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"cluster_selection": "interactive"})
    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "flat_plane.json"),
                 "--out", str(tmp_path / "runs"), "--headless"])
    assert code == 2


def test_select_largest_equals_interactive_resume(tmp_path):
    from inspath import pipeline

    cfg = write_cfg(tmp_path, {"s": 3, "ground_z": -5.0})
    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "two_blobs.json"),
                 "--out", str(tmp_path / "a"), "--select", "largest"])
    assert code == 0
    headless_plan = (find_run_dir(tmp_path / "a") / "plan.json").read_bytes()

    code = main(["run", "--config", str(cfg), "--scene", str(SCENES / "two_blobs.json"),
                 "--out", str(tmp_path / "b"), "--select", "interactive"])
    assert code == 0
    run_dir = find_run_dir(tmp_path / "b")
    rec = pipeline.load_record(run_dir)
    assert rec.state == "awaiting_selection"
    largest = pipeline.RunStore(run_dir).load_clusters().largest()
    pipeline.resume(rec, [largest])
    assert (run_dir / "plan.json").read_bytes() == headless_plan


def hash_tree(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def test_render_deterministic_under_seed(tmp_path):
    for sub in ("r1", "r2"):
        code = main(["render", "--scene", str(SCENES / "strobe_plane.json"),
                     "--out", str(tmp_path / sub), "--frames", "3", "--seed", "9"])
        assert code == 0
    assert hash_tree(tmp_path / "r1") == hash_tree(tmp_path / "r2")
    code = main(["render", "--scene", str(SCENES / "strobe_plane.json"),
                 "--out", str(tmp_path / "r3"), "--frames", "3", "--seed", "10"])
    assert code == 0
    assert hash_tree(tmp_path / "r1") != hash_tree(tmp_path / "r3")


def test_render_then_run_from_replay(tmp_path):
    code = main(["render", "--scene", str(SCENES / "inclined_plane.json"),
                 "--out", str(tmp_path / "rep"), "--frames", "3", "--seed", "4"])
    assert code == 0
    cfg = write_cfg(tmp_path, {"s": 3, "ground_z": -5.0})
    code = main(["run", "--config", str(cfg), "--frames", str(tmp_path / "rep"),
                 "--out", str(tmp_path / "runs")])
    assert code == 0


def test_render_rejects_bad_noise_json(tmp_path):
    code = main(["render", "--scene", str(SCENES / "flat_plane.json"),
                 "--out", str(tmp_path / "x"), "--frames", "1", "--noise", "{bad"])
    assert code == 2


def test_render_missing_scene_exits_3(tmp_path):
    code = main(["render", "--scene", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x"), "--frames", "1"])
    assert code == 3


def prepare_run_dir(tmp_path) -> Path:
    cfg = write_cfg(tmp_path, {"s": 2, "ground_z": -5.0})
    main(["run", "--config", str(cfg), "--scene", str(SCENES / "two_blobs.json"),
          "--out", str(tmp_path / "runs")])
    return find_run_dir(tmp_path / "runs")


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_smoke(tmp_path):
    run_dir = prepare_run_dir(tmp_path)
    port = free_port()
    rec_id = json.loads((run_dir / "record.json").read_text())["run_id"]
    proc = subprocess.Popen(
        [sys.executable, "-m", "inspath.cli", "serve", "--run", str(run_dir),
         "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        deadline = time.time() + 15
        doc = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/api/session/{rec_id}", timeout=1) as r:
                    doc = json.loads(r.read())
                break
            except Exception:
                time.sleep(0.2)
        assert doc is not None, "server never came up"
        assert doc["state"] == "planned"
        with urllib.request.urlopen(
                f"http://127.0.0.1:{port}/api/session/{rec_id}/plan", timeout=2) as r:
            plan = r.read()
        assert plan == (run_dir / "plan.json").read_bytes()
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_serve_busy_port_exits_6(tmp_path):
    run_dir = prepare_run_dir(tmp_path)
    with socket.socket() as blocker:
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        result = subprocess.run(
            [sys.executable, "-m", "inspath.cli", "serve", "--run", str(run_dir),
             "--port", str(port)],
            capture_output=True, timeout=60)
    assert result.returncode == 6


def test_serve_missing_run_dir_exits_3(tmp_path):
    code = main(["serve", "--run", str(tmp_path / "nothing"), "--port", "1"])
    assert code == 3
