from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from gfde.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

CAPUTO = '[kernel]\nvariant = "caputo"\nalpha = 0.5\n'
TORUS = '[model]\nbackend = "torus"\nd = 1\nM = {M}\nk = 1\n'
HEIS = '[model]\nbackend = "heisenberg"\nm_max = 4\nlambda_min = 0.5\nlambda_max = 4.0\nn_lambda = 6\n'


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _run(tmp_path, cmd, text, out="out", extra=()):
    out_dir = tmp_path / out
    code = main([cmd, "--config", _write(tmp_path, text), "--out", str(out_dir), *extra])
    return code, out_dir


def relax_cfg(lam=1.0, N=16):
    return CAPUTO + f"[grid]\nT = 1.0\nN = {N}\n[relax]\nlambda = {lam}\n"


def test_relax_rows_and_determinism(tmp_path):
    code, out = _run(tmp_path, "relax", relax_cfg())
    assert code == 0
    text = (out / "relax.csv").read_bytes()
    lines = text.decode().splitlines()
    assert lines[0] == "t,w" and lines[1] == "0,1" and len(lines) == 18
    assert b"\r" not in text
    code, out2 = _run(tmp_path, "relax", relax_cfg(), out="again")
    assert (out2 / "relax.csv").read_bytes() == text


def test_relax_rejects_negative_lambda(tmp_path, capsys):
    code, _ = _run(tmp_path, "relax", relax_cfg(lam=-1.0))
    assert code == 2
    assert "lambda" in capsys.readouterr().err


def test_invalid_config_keys(tmp_path, capsys):
    assert _run(tmp_path, "relax", relax_cfg() + "[bogus]\nx = 1\n")[0] == 2
    assert _run(tmp_path, "relax", relax_cfg(N=0))[0] == 2
    assert "grid.N" in capsys.readouterr().err
    assert _run(tmp_path, "relax", "[kernel\n")[0] == 2


def solve_cfg(model, initial, extra=""):
    return (CAPUTO + "[grid]\nT = 1.0\nN = 32\n" + model + "[problem]\ns = 1.0\n[coeffs]\na = 1.0\nb = 0.0\n"
            + "[initial]\n" + initial + extra)


def test_solve_cosine_snapshot(tmp_path):
    code, out = _run(tmp_path, "solve", solve_cfg(TORUS.format(M=16), 'kind = "cosine"\nfrequencies = [[1]]\n'))
    assert code == 0
    rows = (out / "field_t32.csv").read_text().splitlines()
    assert len(rows) == 16
    meta = json.loads((out / "meta.json").read_text())
    assert meta["snapshots"] == [32]
    with open(out / "modes.csv") as fh:
        reader = csv.reader(fh)
        assert next(reader) == ["mode_id", "t", "re", "im"]
        assert sum(1 for _ in reader) == 16 * 33


def test_solve_heisenberg_snapshot_is_capability_error(tmp_path, capsys):
    text = solve_cfg(HEIS, 'kind = "constant"\nvalue = 1.0\n', "[output]\nsnapshots = [32]\n")
    code, _ = _run(tmp_path, "solve", text)
    assert code == 4
    assert "synthesis unsupported for this backend" in capsys.readouterr().err
    code, out = _run(tmp_path, "solve", solve_cfg(HEIS, 'kind = "constant"\nvalue = 1.0\n'), out="ok")
    assert code == 0 and (out / "modes.csv").exists()


def test_solve_zero_data(tmp_path):
    code, out = _run(tmp_path, "solve", solve_cfg(TORUS.format(M=8), 'kind = "zero"\n'))
    assert code == 0
    data = np.loadtxt(out / "modes.csv", delimiter=",", skiprows=1)
    assert np.all(data[:, 2:] == 0)


def test_solve_inadmissible_coefficients(tmp_path):
    text = solve_cfg(TORUS.format(M=8), 'kind = "zero"\n').replace("a = 1.0", "a = 0.0")
    assert _run(tmp_path, "solve", text)[0] == 4


def test_verify_default_suite(tmp_path):
    code = main(["verify", "--config", str(CONFIGS / "verify_default.toml"), "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["ok"] and all(c["verdict"] in ("pass", "vacuous") for c in doc["checks"])
    assert (tmp_path / "report.txt").read_text().endswith("OVERALL: PASS\n")


def verify_cfg(b, checks='["MI", "I"]'):
    return (CAPUTO + "[grid]\nT = 1.0\nN = 32\n" + TORUS.format(M=8) + "[problem]\ns = 1.0\n"
            + f"[coeffs]\na = 1.0\nb = {b}\n[initial]\nkind = \"random\"\nseed = 1\n"
            + '[source]\nkind = "constant"\nvalue = 1.0\n' + f"[verify]\nchecks = {checks}\n")


def test_verify_config_errors(tmp_path, capsys):
    assert _run(tmp_path, "verify", verify_cfg(0.0))[0] == 2
    assert "b0" in capsys.readouterr().err
    assert _run(tmp_path, "verify", verify_cfg(0.5, "[]"))[0] == 2
    assert _run(tmp_path, "verify", verify_cfg(0.5, '["XX"]'))[0] == 2
    assert _run(tmp_path, "verify", verify_cfg(0.5))[0] == 0


def test_verify_failure_exit_code(tmp_path):
    # an impossible tolerance makes the discrete derivative checks fail, which is exit 1, not 2
    text = verify_cfg(0.5) + "[tolerances]\ndiscrete = -0.9\n"
    assert _run(tmp_path, "verify", text)[0] == 1


def admissible_cfg(body):
    return f"[kernel]\n{body}\n"


def test_admissible(tmp_path):
    code, out = _run(tmp_path, "admissible", admissible_cfg('variant = "caputo"\nalpha = 0.5'))
    assert code == 0
    code, out = _run(tmp_path, "admissible", admissible_cfg('variant = "exponential"\nalpha = 0.5'), out="e")
    assert code == 1
    rep = json.loads((out / "admissibility.json").read_text())
    assert rep["conditions"]["4"] == "fail"
    assert _run(tmp_path, "admissible", admissible_cfg('variant = "caputo"\nalpha = 1.5'))[0] == 2


def test_threads_flag_is_deterministic(tmp_path):
    cfg = str(CONFIGS / "solve_cosine.toml")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "0"]) == 0
    for name in ("modes.csv", "field_t256.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "gfde.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "gfde" in res.stdout
    res = subprocess.run([sys.executable, "-m", "gfde.cli", "relax"], capture_output=True, text=True)
    assert res.returncode == 2
