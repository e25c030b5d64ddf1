import json

import numpy as np
import pytest

from banach_interp.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", "--space", "lp:2:1", "--vector", "[3, -4]")
    assert code == 0
    obj = json.loads(out)
    assert obj["norm"] == pytest.approx(7.0)
    assert obj["dual_norm"] == pytest.approx(4.0)


def test_norm_complex_vector(capsys):
    vec = json.dumps({"re": [3, 0], "im": [0, 4]})
    code, out, _ = run(capsys, "norm", "--space", "lp:2:2", "--vector", vec)
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(5.0)


def test_tensor_norm(capsys):
    code, out, _ = run(capsys, "tensor-norm", "--kind", "proj", "--E", "lp:2:1", "--F", "lp:2:1", "--matrix", "[[1, -2], [0.5, 1]]")
    assert code == 0
    obj = json.loads(out)
    assert obj["upper"] == pytest.approx(4.5, abs=1e-8)
    assert obj["lower"] == pytest.approx(4.5, abs=1e-8)
    assert "witnesses" not in obj


def test_interp_with_closed_form(capsys):
    code, out, _ = run(capsys, "interp", "--pair", "lp:2:1", "lp:2:inf", "--theta", "0.5", "--vector", "[1, 2]")
    assert code == 0
    obj = json.loads(out)
    ref = obj["closed_form_norm"]
    assert ref == pytest.approx(np.sqrt(5))
    assert obj["lower"] <= ref * (1 + 1e-6) and ref <= obj["upper"] * (1 + 1e-6)


def test_interp_from_file(capsys, tmp_path):
    f = tmp_path / "in.json"
    f.write_text(json.dumps({"pair": ["lp:2:2", "lp:2:4"], "theta": 0.5, "vector": [1, 1]}))
    code, out, _ = run(capsys, "interp", "--input", str(f))
    assert code == 0 and json.loads(out)["closed_form_space"]["p"] == pytest.approx(8 / 3)


def test_interp_needs_arguments(capsys):
    with pytest.raises(SystemExit):
        main(["interp", "--theta", "0.5"])


def test_constants(capsys):
    code, out, _ = run(capsys, "constants", "--space", "lp:3:2")
    assert code == 0
    obj = json.loads(out)
    assert obj["kind"] == "type2" and obj["value_lower"] == 1.0
    code, out, _ = run(capsys, "constants", "--space", "lp:2:4", "--kind", "m2")
    assert code == 0 and json.loads(out)["value_lower"] == 1.0


def test_factorize_spectral(capsys, tmp_path):
    t = np.exp(2j * np.pi * np.arange(64) / 64)
    Phi = (5 / 4 + np.cos(np.angle(t)))[:, None, None] * np.ones((1, 1, 1))
    f = tmp_path / "phi.json"
    f.write_text(json.dumps({"samples": Phi.tolist()}))
    code, out, _ = run(capsys, "factorize", "--spectral", "--input", str(f))
    assert code == 0
    obj = json.loads(out)
    assert obj["outer"] and obj["info"]["residual"] <= 1e-8


def test_factorize_analytic(capsys):
    code, out, _ = run(capsys, "factorize", "--thm23", "--alpha", "schatten:2", "--beta", "schatten:2", "--epsilon", "0.1")
    assert code == 0
    obj = json.loads(out)
    assert obj["ok"] and obj["residual"] <= 1e-7


def test_factorize_rejects_unknown_norm():
    with pytest.raises(SystemExit):
        main(["factorize", "--thm23", "--alpha", "bogus:1"])


def test_verify_small_run(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "seed": 3,
                "trials": 2,
                "thetas": [0.5],
                "params": {"families": [{"E": ["lp:2:2", "lp:2:2"], "F": ["lp:2:2", "lp:2:2"], "trials": 2}]},
            }
        )
    )
    out, csv_path = tmp_path / "r.json", tmp_path / "m.csv"
    code, text, _ = run(capsys, "verify", "thm31-case1", "--config", str(cfg), "--out", str(out), "--csv", str(csv_path))
    assert code == 0 and text.strip().endswith("PASSED")
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["config"]["seed"] == 3
    assert csv_path.read_text().splitlines()[0] == "trial,theta,lhs,rhs,constant,margin,status"


def test_verify_trials_cap(capsys):
    code, text, _ = run(capsys, "verify", "logconvex-bm", "--trials", "0")
    assert code == 0 and "PASSED" in text


def test_errors_give_exit_status_two(capsys):
    code, _, err = run(capsys, "norm", "--space", "lp:2:0.5", "--vector", "[1, 2]")
    assert code == 2 and err.startswith("error:")
    code, _, err = run(capsys, "norm", "--space", "nonsense", "--vector", "[1]")
    assert code == 2


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["frobnicate"])
