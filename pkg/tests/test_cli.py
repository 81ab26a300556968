import csv
import io
import json

import pytest

from eulerpadic.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "--t", "1", "--p", "2", "--M", "2")
    assert code == 0 and json.loads(out)["residue"] == "2"


@pytest.mark.parametrize("argv", [
    ["eval", "--t", "1", "--p", "4", "--M", "2"],
    ["eval", "--t", "1", "--p", "2", "--M", "0"],
    ["pade-verify", "--k", "0"],
    ["pade-verify", "--nmax", "0"],
    ["nonsense"],
    ["primes-scan", "--m", "3", "--x-max", "100", "--checks", "bogus"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_malformed_instance(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"k": 1, "m": 3}')
    code, _, err = run(capsys, "certify", "--instance", str(bad))
    assert code == 2 and "missing field" in err


def test_pade_verify(capsys):
    code, out, _ = run(capsys, "pade-verify", "--k", "2", "--nmax", "3", "--bounds")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["checks"] > 0


def test_pade_verify_sampled_is_seeded(capsys):
    a = run(capsys, "--seed", "5", "pade-verify", "--samples", "10")[1]
    b = run(capsys, "--seed", "5", "pade-verify", "--samples", "10")[1]
    assert a == b and json.loads(a)["grid_points"] == 10


def test_certify_bundled_sample(capsys):
    code, out, _ = run(capsys, "certify")
    rep = json.loads(out)
    assert code == 0 and rep["certificate"]["p"] == 2 and rep["recheck"]


def test_certify_no_certificate(tmp_path, capsys):
    f = tmp_path / "i.json"
    f.write_text(json.dumps({"k": 1, "m": 4, "lambdas": [-1, 1], "alphas": [2], "residues": [1]}))
    code, out, _ = run(capsys, "certify", "--instance", str(f), "--prime-limit", "4")
    assert code == 1 and json.loads(out)["certificate"] is None


def test_primes_scan_csv(capsys):
    code, out, err = run(capsys, "primes-scan", "--m", "4", "--x-max", "20000", "--grid-step", "5000", "--x-min", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows
    gated = [r for r in rows if r["hypothesis_ok"] == "False"]
    assert gated and all(r["margin"] == "" for r in gated)
    assert all(float(r["margin"]) > 0 for r in rows if r["hypothesis_ok"] == "True")
    assert json.loads(err)["violations"] == 0


def test_primes_scan_json(capsys):
    code, out, _ = run(capsys, "primes-scan", "--m", "3", "--x-max", "5000", "--format", "json")
    assert code == 0 and json.loads(out)["violations"] == 0


def test_config_defaults(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nmax": 1, "k": 1}))
    code, out, _ = run(capsys, "--config", str(cfg), "pade-verify")
    assert code == 0 and json.loads(out)["grid_points"] == 5 * 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "o.json"
    assert run(capsys, "--output", str(target), "eval", "--t", "3", "--p", "5", "--M", "3")[0] == 0
    assert json.loads(target.read_text())["p"] == 5


def test_bounds_eval(capsys):
    code, out, _ = run(capsys, "bounds-eval", "--example", "1,3", "--lower", str(10**12), "--logH", "1e5")
    rep = json.loads(out)
    assert code == 0 and rep["n_N1"] == "10525"


def test_contradiction(capsys):
    code, out, _ = run(capsys, "contradiction")
    assert code == 0 and json.loads(out)["turnover"] == 3


def test_theorem_pipelines(tmp_path, capsys):
    code, out, _ = run(capsys, "theorem3", "--example", "1,3", "--lower", str(10**12), "--logH", "200")
    assert code == 0 and json.loads(out)["status"] == "ok"
    f = tmp_path / "k2.json"
    f.write_text(json.dumps({"k": 2, "m": 3, "lambdas": [1, 2, 3], "alphas": [1, 2], "residues": [1, 2]}))
    code, out, _ = run(capsys, "theorem5", "--instance", str(f), "--logH", "1000", "--epsilon", "0.5", "--s", "1866")
    assert code == 0 and json.loads(out)["certificate"]["p"] == 7
