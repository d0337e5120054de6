import csv
import io as _io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from twirlkit import cli, io
from twirlkit.qubit import TwirlVerdict, Rule, fig1_m_set, fig1_n_set
from twirlkit.linalg import haar_unitary


def write(tmp_path, name, obj):
    path = tmp_path / name
    io.save_json(obj, path)
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def rows(text):
    return list(csv.reader(_io.StringIO(text)))


@pytest.fixture
def m_file(tmp_path):
    return write(tmp_path, "m.json", io.singles_to_json(fig1_m_set()))


@pytest.fixture
def pair_file(tmp_path):
    return write(tmp_path, "pair.json", io.singles_to_json(fig1_m_set()[:2], [0.75, 0.25]))


@pytest.fixture
def n_file(tmp_path):
    return write(tmp_path, "n.json", io.singles_to_json(fig1_n_set()))


def test_classify_m_set(m_file, capsys):
    code, out = run(["classify", "--input", m_file], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["verdict"]["converges"] and data["verdict"]["rule_fired"] == "MultiOp-TraceNonzero"
    assert data["oracle"]["converges"] and data["agree"]
    assert "phi" in data["verdict"]["angles"]


def test_classify_n_set(n_file, capsys):
    code, out = run(["classify", "--input", n_file], capsys)
    assert code == 0 and json.loads(out.out)["verdict"]["converges"] is False


def test_classify_lifted_input(tmp_path, capsys):
    path = write(tmp_path, "m4.json", io.singles_to_json([np.kron(u, u) for u in fig1_m_set()]))
    code, out = run(["classify", "--input", path], capsys)
    assert code == 0 and json.loads(out.out)["verdict"]["converges"]


def test_classify_unfactorable_input(tmp_path, capsys):
    path = write(tmp_path, "x.json", io.singles_to_json([haar_unitary(4, 0)]))
    code, out = run(["classify", "--input", path], capsys)
    assert code == 1 and "error" in out.err


def test_classify_bad_probabilities(tmp_path, capsys):
    path = write(tmp_path, "bad.json", io.singles_to_json(fig1_m_set(), [0.5, 0.5, 0.5]))
    code, out = run(["classify", "--input", path], capsys)
    assert code == 1 and "sum" in out.err


def test_classify_non_unitary(tmp_path, capsys):
    path = write(tmp_path, "nu.json", io.singles_to_json([2 * np.eye(2), fig1_m_set()[0]]))
    code, _ = run(["classify", "--input", path], capsys)
    assert code == 1


def test_classify_malformed(tmp_path, capsys):
    path = tmp_path / "junk.json"
    path.write_text("{nope")
    code, out = run(["classify", "--input", str(path)], capsys)
    assert code == 1 and "malformed" in out.err


def test_classify_missing_file(tmp_path, capsys):
    code, _ = run(["classify", "--input", str(tmp_path / "none.json")], capsys)
    assert code == 1


def test_classify_disagreement_exit_code(m_file, capsys, monkeypatch):
    monkeypatch.setattr(cli, "classify_multi", lambda us: TwirlVerdict(False, Rule.NONE))
    code, _ = run(["classify", "--input", m_file], capsys)
    assert code == 2


def test_simulate_pair(pair_file, capsys):
    code, out = run(["simulate", "--input", pair_file, "--n-max", "100"], capsys)
    assert code == 0
    table = rows(out.out)
    assert table[0] == ["n", "distance"] and len(table) == 102
    dist = np.array([float(r[1]) for r in table[1:]])
    assert np.all(dist > 0)
    assert np.all(np.diff(dist[25:]) < 0)


def test_simulate_n_set(n_file, capsys):
    code, out = run(["simulate", "--input", n_file, "--n-max", "50"], capsys)
    dist = np.array([float(r[1]) for r in rows(out.out)[1:]])
    assert code == 0 and dist.min() > 0.1


def test_simulate_short_and_json(pair_file, capsys, tmp_path):
    code, out = run(["simulate", "--input", pair_file, "--n-max", "1"], capsys)
    assert code == 0 and len(rows(out.out)) == 3
    dest = tmp_path / "t.json"
    code, _ = run(["simulate", "--input", pair_file, "--format", "json", "--out", str(dest)], capsys)
    data = json.loads(dest.read_text())
    assert code == 0 and len(data["distance"]) == 101 and data["fit_r2"] > 0.99


def test_simulate_construction(capsys):
    code, out = run(["simulate", "--d", "3", "--n-max", "5"], capsys)
    assert code == 0 and len(rows(out.out)) == 7


def test_simulate_needs_input(capsys):
    code, _ = run(["simulate"], capsys)
    assert code == 1
    code, _ = run(["simulate", "--d", "3", "--n-max", "0"], capsys)
    assert code == 1


def test_attractors(pair_file, capsys):
    code, out = run(["attractors", "--input", pair_file], capsys)
    data = json.loads(out.out)
    assert code == 0 and data["fixed_point_dim"] == 2 and data["converges_to_twirl"]
    code, out = run(["attractors", "--input", pair_file, "--format", "csv"], capsys)
    assert rows(out.out)[1][2] == "2"


def test_optimize_probabilities(pair_file, capsys):
    code, out = run(["optimize", "--input", pair_file, "--restarts", "3", "--verbose"], capsys)
    data = json.loads(out.out)
    assert code == 0 and 0.409 <= data["best_probs"][0] <= 0.509
    assert len(data["history"]) > 3


def test_optimize_construction(tmp_path, capsys):
    path = write(tmp_path, "spec.json", {"d": 3, "variant": "two_op"})
    code, out = run(["optimize", "--input", path, "--restarts", "1", "--format", "csv"], capsys)
    names = [r[0] for r in rows(out.out)]
    assert code == 0 and "alpha_re" in names and "p2" in names


def reproduce(capsys, *extra):
    code, out = run(["reproduce", *extra], capsys)
    assert code == 0
    table = rows(out.out)
    assert table[0] == ["series", "n", "distance"]
    series = {}
    for name, n, x in table[1:]:
        series.setdefault(name, []).append(float(x))
    return out.out, series


def test_reproduce_fig1(capsys):
    text, s = reproduce(capsys, "fig1", "--restarts", "3")
    assert list(s) == ["M1M2@0.75", "M1M2@optimized", "M1M2M3@optimized", "N-set"]
    assert all(len(v) == 101 for v in s.values())
    at = {k: v[100] for k, v in s.items()}
    assert at["M1M2M3@optimized"] <= at["M1M2@optimized"] <= at["M1M2@0.75"]
    assert min(s["N-set"]) > 0.1
    again, _ = reproduce(capsys, "fig1", "--restarts", "3")
    assert again == text


def test_reproduce_fig2(capsys):
    _, s = reproduce(capsys, "fig2", "--restarts", "1", "--n-max", "60")
    assert list(s) == ["random", "h,uv", "uvhuv,uv"]
    for v in s.values():
        assert v[60] < 1e-3 * v[0]


def test_reproduce_fig2_json(capsys):
    code, out = run(["reproduce", "fig2", "--d", "3", "--restarts", "1", "--format", "json"], capsys)
    data = json.loads(out.out)
    assert code == 0 and data["d"] == 3 and data["fixed_space_distance"] < 1e-8


def test_tolerance_override_env():
    env = dict(os.environ, TWIRLKIT_TOL_OVERRIDE=json.dumps({"angle": 1e-7}))
    out = subprocess.run([sys.executable, "-c", "from twirlkit import config; print(config.TOL.angle)"],
                         env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == 1e-7


def test_module_entry_point(m_file):
    out = subprocess.run([sys.executable, "-m", "twirlkit.cli", "classify", "--input", m_file],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["agree"]
