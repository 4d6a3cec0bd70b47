from __future__ import annotations

import json
from fractions import Fraction
import shutil
import subprocess
import sys

import pytest

from hermhecke.cli import main
from hermhecke.fourier import FourierExpansion, eisenstein_q_expansion
from hermhecke.field import make_field
from hermhecke.hecke import enumerate_right_cosets, t_key
from hermhecke.serialize import cosets_from_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    assert code == 0, err
    return json.loads(out)


def test_cosets_degree_two(capsys):
    data = run_json(capsys, "hecke", "cosets", "--m", "1", "--n", "2", "--key", "1,1,3,3")
    assert len(data["reps"]) == 112 and data["q"] == 3
    cs = cosets_from_json(data)
    assert cs.row_keys == enumerate_right_cosets(make_field(1), t_key(2, 3)).row_keys


def test_scope_error_exit_code(capsys):
    code, out, err = run(capsys, "hecke", "cosets", "--m", "5", "--n", "1", "--key", "1,6")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "scope_error"
    code, _, _ = run(capsys, "eigen", "--form", _write_e4(capsys, 11), "--p", "3")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["hecke", "cosets", "--m", "1", "--n", "1"],
    ["hecke", "cosets", "--m", "0", "--n", "1", "--key", "1,3"],
    ["hecke", "cosets", "--m", "1", "--n", "1", "--key", "2,3"],
    ["field", "--m", "4"],
    ["nosuchcommand"],
    ["--cap", "-3", "field", "--m", "1"],
    ["forms", "eisenstein", "--k", "3"],
])
def test_usage_and_domain_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == ""
    assert "error" in json.loads(err)


def test_missing_file_is_a_domain_error(capsys, tmp_path):
    code, _, err = run(capsys, "certify", "--form", str(tmp_path / "none.json"),
                       "--m", "11", "--k", "4", "--p", "2")
    assert code == 1


def test_consistency_failure_exit_3(capsys, tmp_path):
    # a coset file missing one representative is not a full double coset
    data = run_json(capsys, "hecke", "cosets", "--m", "11", "--n", "1", "--key", "1,2")
    data["reps"] = data["reps"][:-1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "forms", "act", "--form", _write_e4(capsys, 11, tmp_path),
                       "--coset", str(bad))
    assert code == 3
    assert json.loads(err)["error"] == "consistency_failure"


def _write_e4(capsys, m, where=None):
    import tempfile
    from pathlib import Path

    where = Path(tempfile.mkdtemp()) if where is None else where
    path = where / f"e4_{m}.json"
    assert main(["forms", "eisenstein", "--k", "4", "--terms", "30", "--m", str(m), "--out", str(path)]) == 0
    capsys.readouterr()
    return str(path)


def test_certify_e4(capsys, tmp_path):
    form = _write_e4(capsys, 11, tmp_path)
    data = run_json(capsys, "certify", "--form", form, "--m", "11", "--k", "4", "--p", "2")
    assert data["conclusion"] is True
    assert all(h["pass"] for h in data["hypotheses"])
    code, out, _ = run(capsys, "certify", "--form", form, "--m", "11", "--k", "6", "--p", "2")
    assert code == 0 and "conclusion: False" in out


def test_form_json_round_trip(capsys, tmp_path):
    form = _write_e4(capsys, 11, tmp_path)
    f = FourierExpansion.from_json(json.loads(open(form).read()))
    assert f == eisenstein_q_expansion(4, 30, make_field(11))
    assert FourierExpansion.from_json(f.to_json()) == f


def test_act_then_eigen(capsys, tmp_path):
    form = _write_e4(capsys, 11, tmp_path)
    data = run_json(capsys, "eigen", "--form", form, "--p", "2")
    assert data["lambda"] == "9/8"
    coset = tmp_path / "c.json"
    run_json(capsys, "hecke", "cosets", "--m", "11", "--n", "1", "--key", "1,2", "--out", str(coset))
    g = run_json(capsys, "forms", "act", "--form", form, "--coset", str(coset))
    assert FourierExpansion.from_json(g).constant_term() == Fraction(9, 8)


def test_product_and_phi(capsys, tmp_path):
    c = tmp_path / "c.json"
    run_json(capsys, "hecke", "cosets", "--m", "1", "--n", "2", "--key", "1,1,3,3", "--out", str(c))
    data = run_json(capsys, "hecke", "phi", "--k", "0", "--in", str(c))
    assert data["scalar"] == "28"
    c1 = tmp_path / "c1.json"
    run_json(capsys, "hecke", "cosets", "--m", "1", "--n", "1", "--key", "1,3", "--out", str(c1))
    prod = run_json(capsys, "hecke", "product", "--lhs", str(c1), "--rhs", str(c1))
    terms = {tuple(t["key"]): t["c"] for t in prod["terms"]}
    assert terms == {(1, 9): "1", (3, 3): "4"}


def test_output_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["--seed", "7", "hecke", "cosets", "--m", "11", "--n", "2",
                     "--key", "1,1,2,2", "--out", str(path)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 7


def test_seed_defaults_to_zero(capsys):
    assert run_json(capsys, "field", "--m", "5")["seed"] == 0


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 42\njson = true\n")
    code, out, _ = run(capsys, "--config", str(cfg), "field", "--m", "11")
    assert code == 0 and json.loads(out)["seed"] == 42
    # explicit flags win over the file
    code, out, _ = run(capsys, "--config", str(cfg), "field", "--m", "11", "--seed", "3")
    assert json.loads(out)["seed"] == 3
    cfg.write_text("colour = blue\n")
    assert run(capsys, "--config", str(cfg), "field", "--m", "11")[0] == 1
    cfg.write_text("seed = many\n")
    assert run(capsys, "--config", str(cfg), "field", "--m", "11")[0] == 1


def test_cap_overflow_is_reported(capsys):
    code, _, err = run(capsys, "--cap", "10", "hecke", "cosets", "--m", "1", "--n", "2", "--key", "1,1,3,3")
    assert code != 0 and json.loads(err)["error"]


def test_classgroup_and_find_prime(capsys):
    data = run_json(capsys, "classgroup", "--m", "5", "--avoid-p", "5")
    assert data["h"] == 2 and data["N"] % 5
    assert run_json(capsys, "find-prime", "--m", "5", "--modulus", "4")["p"] == 13


def test_cusp_test_command(capsys, tmp_path):
    form = _write_e4(capsys, 11, tmp_path)
    data = run_json(capsys, "forms", "cusp-test", "--m", "11", "--form", form)
    assert data["direct"] is False and data["cusp"] is False and data["agree"] is True


@pytest.mark.skipif(shutil.which("hermhecke") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["hermhecke", "--json", "find-prime", "--m", "11"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0 and json.loads(out.stdout)["p"] == 2
    out = subprocess.run([sys.executable, "-m", "hermhecke.cli", "field", "--m", "-1"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 1
