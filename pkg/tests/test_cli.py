import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from distset import cli
from distset.config import ConfigError, parse_config
from distset.diagnostics import file_sha256

DISK_CFG = """
[run]
preset = disk
kernel = barker
seed = 3

[chain]
n_iter = 1500
burn_in = 500
"""


# ------------------------------------------------------------ config

def test_config_defaults_from_preset():
    cfg = parse_config(text="[run]\npreset = mixed-effects-desk\n", env={})
    assert cfg.model == "mixed-effects" and cfg.kernel == "barker" and cfg.seed == 0


def test_config_overrides(monkeypatch):
    env = {"DISTSET_SEED": "7", "DISTSET_OUT": "/tmp/x"}
    cfg = parse_config(text=DISK_CFG, env=env)
    assert cfg.seed == 7 and cfg.out == "/tmp/x"
    cfg = parse_config(text=DISK_CFG, env=env, seed=9, out="/tmp/y")
    assert cfg.seed == 9 and cfg.out == "/tmp/y" and cfg.chain.seed == 9


@pytest.mark.parametrize("text,msg", [
    ("[run]\npreset = nope\n", "unknown preset"),
    ("[run]\npreset = disk\n[model]\nnormalizer = magic\n", "normalizer"),
    ("[run]\npreset = disk\n[model]\nbogus = 1\n", "no parameter"),
    ("[run]\npreset = monotone\nkernel = barker\n", "gradient"),
    ("[run]\npreset = disk\n[chain]\nn_iter = 10\nburn_in = 20\n", "chain"),
    ("[run]\npreset = disk\n[data]\nwidth = 3\n", "no parameters"),
    ("[run]\npreset = disk\n[extra]\na = 1\n", "sections"),
    ("[run]\nseed = 1\n", "preset or model"),
])
def test_config_validation(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text=text, env={})


# ------------------------------------------------------------ run

def write_cfg(tmp_path, text=DISK_CFG):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


def test_run_writes_files_and_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path)
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("trace.csv", "summary.csv", "derived.csv", "manifest.json"):
        assert (tmp_path / "a" / name).exists()
    assert file_sha256(tmp_path / "a" / "trace.csv") == file_sha256(tmp_path / "b" / "trace.csv")
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["seed"] == 3 and man["config"]["preset"] == "disk"


def test_run_invalid_preset_exit_2(tmp_path, capsys):
    assert cli.main(["run", "--preset", "nope", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2 and err["error"] == "config"
    assert json.loads((tmp_path / "error.json").read_text())["exit_code"] == 2


def test_run_sampler_failure_exit_3(tmp_path, monkeypatch):
    from distset.samplers import SamplerError

    def boom(*a, **k):
        raise SamplerError("initial point has zero posterior density")
    monkeypatch.setattr(cli, "run_chains", boom)
    assert cli.main(["run", "--config", write_cfg(tmp_path), "--out", str(tmp_path / "o")]) == 3
    assert json.loads((tmp_path / "o" / "error.json").read_text())["error"] == "sampler"


def test_run_multiple_chains(tmp_path):
    text = DISK_CFG + "n_chains = 2\n"
    assert cli.main(["run", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path / "m")]) == 0
    man = json.loads((tmp_path / "m" / "manifest.json").read_text())
    assert len(man["chains"]) == 2 and man["n_draws"] == 2000


def test_run_from_csv(tmp_path):
    rng = np.random.default_rng(0)
    y = rng.normal(size=(40, 2)) * 2.0
    p = tmp_path / "pts.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b"])
        w.writerows(y.tolist())
    text = f"[run]\nmodel = mixed-effects\nkernel = rwmh\n[chain]\nn_iter = 400\nburn_in = 200\n" \
           f"[model]\nnormalizer = none\n[data]\npath = {p}\nrole.y = a, b\n"
    assert cli.main(["run", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path / "c")]) == 0


# ------------------------------------------------------------ predict

@pytest.fixture
def disk_run(tmp_path):
    assert cli.main(["run", "--config", write_cfg(tmp_path), "--out", str(tmp_path / "run")]) == 0
    return tmp_path / "run" / "manifest.json"


def read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_predict_from_manifest(disk_run, tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["predict", "--manifest", str(disk_run), "--n-draws", "300", "--out", str(out), "--seed", "2"]) == 0
    header, rows = read_rows(out)
    assert header == ["draw_index", "y0", "y1", "dist", "u"]
    assert [int(r[0]) for r in rows] == list(range(300))
    arr = np.array(rows, dtype=float)
    assert np.all(arr[:, 3] > 0)
    out2 = tmp_path / "p2.csv"
    cli.main(["predict", "--manifest", str(disk_run), "--n-draws", "300", "--out", str(out2), "--seed", "2"])
    assert file_sha256(out) == file_sha256(out2)


def test_predict_zero_draws(disk_run, tmp_path):
    out = tmp_path / "z.csv"
    assert cli.main(["predict", "--manifest", str(disk_run), "--n-draws", "0", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert header[0] == "draw_index" and rows == []


def test_predict_missing_manifest(tmp_path):
    assert cli.main(["predict", "--manifest", str(tmp_path / "none.json"), "--n-draws", "5"]) == 2


def test_predict_l1_demo_shell(tmp_path):
    out = tmp_path / "l1.csv"
    assert cli.main(["predict", "--preset", "l1-ball-demo", "--n-draws", "2000", "--out", str(out)]) == 0
    arr = np.array(read_rows(out)[1], dtype=float)
    y, dist, u = arr[:, 1:3], arr[:, 3], arr[:, 4]
    l1 = np.abs(y - [1.0, 2.0]).sum(axis=1)
    assert np.all(l1 > 2.0) and np.all(dist <= np.sqrt(0.1 * u))
    assert np.mean(dist < 3 * np.sqrt(0.1)) >= 0.95


# ------------------------------------------------------------ check / generate / entry point

def test_check_fault_injection_fails_with_name(capsys):
    code = cli.main(["check", "--suite", "steiner-quadrature", "--inject-fault", "steiner-coefficient"])
    captured = capsys.readouterr()
    assert code != 0 and "steiner-quadrature" in captured.err
    assert cli.main(["check", "--suite", "steiner-quadrature"]) == 0


def test_generate_writes_npz(tmp_path):
    out = tmp_path / "d.npz"
    assert cli.main(["generate", "--preset", "transfer-alpha-8.0", "--seed", "1", "--out", str(out)]) == 0
    from distset.models import load_dataset
    assert load_dataset(out).meta["alpha"] == 8.0


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "distset.cli", "run", "--preset", "nope", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 2 and json.loads(r.stderr.strip())["exit_code"] == 2
