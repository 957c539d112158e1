import json

import pytest

from coronalab.cli import main

NORMS = """{
  "n": 2,
  "weight": {"kind": "power", "a": 0.5},
  "p": 2,
  "functions": ["1", "z1", "z1*z2"]
}
"""

AP = """{
  "n": 2,
  "weight": {"kind": "power", "a": -1.0},
  "p": [1.5, 2, 3],
  "depths": [1, 2],
  "count": 2,
  "cap_depth": 20
}
"""


def _run(tmp_path, cmd, text, out="out", seed=None):
    cfg = tmp_path / f"{cmd}.json"
    cfg.write_text(text)
    args = [cmd, "--config", str(cfg), "--out", str(tmp_path / out)]
    if seed is not None:
        args += ["--seed", str(seed)]
    return main(args)


@pytest.mark.parametrize("cmd,text", [("norms", NORMS), ("ap-check", AP)], ids=["norms", "ap-check"])
def test_rerun_is_byte_identical(tmp_path, cmd, text):
    assert _run(tmp_path, cmd, text, "a", seed=5) == 0
    assert _run(tmp_path, cmd, text, "b", seed=5) == 0
    a = (tmp_path / "a" / f"{cmd}.csv").read_bytes()
    assert a == (tmp_path / "b" / f"{cmd}.csv").read_bytes()
    summary = json.loads((tmp_path / "a" / f"{cmd}.json").read_text())
    for key in ("config_hash", "constants_version", "runtime", "max_residual", "fitted_exponents", "constants"):
        assert key in summary


def test_json_syntax_error_names_the_line(tmp_path, capsys):
    assert _run(tmp_path, "norms", '{\n  "n": 2,\n  oops\n}\n') == 2
    assert ".json:3:" in capsys.readouterr().err


def test_bad_value_names_the_line(tmp_path, capsys):
    text = NORMS.replace('"p": 2', '"p": -2')
    assert _run(tmp_path, "norms", text) == 2
    assert ".json:4:" in capsys.readouterr().err


def test_invalid_weight_is_a_config_error(tmp_path, capsys):
    text = NORMS.replace('"power"', '"bogus"')
    assert _run(tmp_path, "norms", text) == 2
    assert "weight" in capsys.readouterr().err


def test_invariant_violation_exit_code(tmp_path, capsys):
    # a Morrey index outside (0, n/p) violates the norm's precondition
    text = '{"n": 2, "N": 2, "p": 2, "s": 1.5}'
    assert _run(tmp_path, "growth-fit", text) == 3
    assert "invariant" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["norms", "--config", str(tmp_path / "nope.json")]) == 2
