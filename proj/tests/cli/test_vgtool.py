"""End-to-end checks of the vgtool front end: schemas, determinism, exit codes."""

import json
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest

VGTOOL = os.environ["VGTOOL"]
SCHEMAS = Path(os.environ["VG_SCHEMA_DIR"])


def run(*args, env=None, check_code=0):
    proc = subprocess.run([VGTOOL, *map(str, args)], capture_output=True, env=env, timeout=600)
    if check_code is not None:
        assert proc.returncode == check_code, proc.stderr.decode()
    return proc


def validate(name, text):
    doc = json.loads(text)
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.validate(doc, schema)
    return doc


P = ["--r", "3", "--theta", "1", "--sigma", "1", "--mu", "0"]


def test_describe_mean_variance():
    doc = validate("describe", run("describe", *P).stdout)
    assert doc["mean"] == pytest.approx(3.0, abs=1e-12)
    assert doc["variance"] == pytest.approx(9.0, abs=1e-12)
    assert len(doc["cumulants"]) == 6


def test_quantile_table_median():
    out = run("quantile", "--p", "0.5", "--r", "5", "--theta", "1", "--sigma", "1", "--mu", "0").stdout.decode()
    lines = out.strip().splitlines()
    assert lines[0] == "p,quantile"
    assert float(lines[1].split(",")[1]) == pytest.approx(4.246, abs=5e-3)


@pytest.mark.parametrize("fn", ["pdf", "cdf"])
def test_tables_csv_and_json(fn):
    csv = run(fn, *P, "--from", "-2", "--to", "8", "--points", "11").stdout.decode().strip().splitlines()
    assert csv[0] == "x,value"
    assert len(csv) == 12
    values = [float(line.split(",")[1]) for line in csv[1:]]
    if fn == "cdf":
        assert values == sorted(values)
    doc = validate("table", run(fn, *P, "--from", "-2", "--to", "8", "--points", "11", "--format", "json").stdout)
    assert [row["value"] for row in doc["rows"]] == pytest.approx(values, rel=1e-15)


def test_quantile_json():
    validate("quantile", run("quantile", "--p", "0.1", "--p", "0.9", *P, "--format", "json").stdout)


@pytest.mark.parametrize("method", ["ng", "gd", "np", "ul"])
def test_sample_deterministic(method):
    args = ["sample", "--n", "200", "--method", method, "--r", "4", "--theta", "0.7", "--sigma", "1.2", "--seed", "9"]
    a = run(*args).stdout
    assert a == run(*args).stdout
    assert a != run(*args[:-1], "10").stdout
    validate("sample", run(*args, "--format", "json").stdout)


def test_seed_from_environment():
    args = ["sample", "--n", "50", *P]
    env = dict(os.environ, VG_SEED="77")
    assert run(*args, env=env).stdout == run(*args, "--seed", "77").stdout


def test_simulate_layout_and_schema():
    args = ["simulate", "--sigma", "0.2", "--nu", "0.3", "--theta", "-0.1", "--t", "2", "--steps", "4", "--paths", "3",
            "--seed", "4"]
    rows = run(*args).stdout.decode().strip().splitlines()
    assert rows[0] == "path_id,time,value"
    assert len(rows) == 1 + 3 * 5
    assert rows[1] == "0,0,0"
    assert rows[5].startswith("0,2,")
    assert run(*args).stdout == run(*args).stdout
    validate("simulate", run(*args, "--construction", "gamma-difference", "--format", "json").stdout)


def test_price_methods_agree():
    common = ["--s0", "100", "--k", "95", "--rate", "0.03", "--t", "0.5", "--sigma", "0.25", "--nu", "0.3",
              "--theta", "-0.2"]
    quad = validate("price", run("price", "--method", "quad", *common).stdout)
    cf = validate("price", run("price", "--method", "cf", *common).stdout)
    assert abs(quad["price"] - cf["price"]) < 1e-4


def test_fit_roundtrip_ecm(tmp_path):
    sample = run("sample", "--n", "10000", "--method", "ng", "--r", "4", "--theta", "1", "--sigma", "1", "--mu", "0",
                 "--seed", "31").stdout.decode()
    data = tmp_path / "synthetic.csv"
    data.write_text("# synthetic VG(4, 1, 1, 0)\n" + sample)
    doc = validate("fit", run("fit", "--method", "ecm", "--input", data).stdout)
    p = doc["params"]
    assert p["r"] == pytest.approx(4.0, rel=0.1)
    assert p["theta"] == pytest.approx(1.0, rel=0.1)
    assert p["sigma"] == pytest.approx(1.0, rel=0.1)
    assert abs(p["mu"]) < 0.1 * 12 ** 0.5
    trace = doc["loglik_trace"]
    assert all(b >= a - 1e-10 * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))


def test_fit_mom_symmetric_and_comments(tmp_path):
    sample = run("sample", "--n", "2000", "--r", "2", "--sigma", "1", "--seed", "3").stdout.decode().splitlines()
    data = tmp_path / "d.csv"
    data.write_text("\n".join(["# header comment", sample[0], "# mid comment", *sample[1:], ""]) + "\n")
    doc = validate("fit", run("fit", "--method", "mom", "--symmetric", "--input", data).stdout)
    assert doc["symmetric"] is True
    assert doc["params"]["theta"] == 0.0


def test_usage_errors_exit_2(tmp_path):
    assert run(check_code=2).returncode == 2
    assert run("describe", "--r", "-1", "--sigma", "1", check_code=2).stderr
    assert run("quantile", "--p", "1.5", *P, check_code=2).returncode == 2
    assert run("fit", "--method", "mle", "--input", tmp_path / "missing.csv", check_code=2).returncode == 2
    assert run("fit", "--method", "mle", "--symmetric", "--input", "-", check_code=2).returncode == 2
    assert run("sample", "--method", "ul", "--r", "3", "--sigma", "1", check_code=2).returncode == 2
    assert run("sample", "--n", "5", *P, env=dict(os.environ, VG_SEED="abc"), check_code=2).returncode == 2


def test_computation_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("value\n1.0\nnot-a-number\n")
    proc = run("fit", "--method", "mle", "--input", bad, check_code=1)
    assert b"not a number" in proc.stderr
    short = tmp_path / "short.csv"
    short.write_text("1\n2\n3\n")
    run("fit", "--method", "ecm", "--input", short, check_code=1)


def test_output_file(tmp_path):
    out = tmp_path / "o.json"
    run("-o", out, "describe", *P)
    validate("describe", out.read_bytes())


def test_selftest_subset_json():
    doc = validate("selftest", run("selftest", "--criteria", "1", "--criteria", "10", "--format", "json").stdout)
    assert doc["pass"] is True
    assert [c["id"] for c in doc["criteria"]] == [1, 10]
