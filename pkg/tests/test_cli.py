"""Model-file loading, the command-line commands, exit codes, and report
determinism on the bundled example models."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from flatkit import build_system, load_model, model_output, prolonged_model
from flatkit.cli import main
from flatkit.errors import ModelFileError

MODELS = Path(__file__).resolve().parent.parent / "models"


def run_cli(capsys, *argv: str) -> tuple[int, dict, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out) if out else {}, err


def write_model(tmp_path: Path, name: str, payload: dict) -> str:
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(payload))
    return str(path)


STALL_MODEL = {
    "name": "stall",
    "states": ["z1", "z2", "z3"],
    "inputs": ["u1", "u2"],
    "drift": ["0", "0", "0"],
    "g1": ["1", "0", "0"],
    "g2": ["0", "1", "0"],
}


# --- model files ------------------------------------------------------------------


def test_bundled_models_load_and_build():
    for name in ("vtol", "example1", "example3"):
        model = load_model(MODELS / f"{name}.json")
        sys_ = build_system(model, seed=1)
        assert sys_.n == len(model.states)
        assert model_output(model, sys_) is not None


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("drift"), "missing keys"),
        (lambda d: d.update(drift=["0", "0"]), "components"),
        (lambda d: d.update(inputs=["u1"]), "two distinct inputs"),
        (lambda d: d.update(extra=1), "unknown keys"),
        (lambda d: d.update(g1=["1", "0", "bad("]), "g1 component"),
        (lambda d: d.update(states=["z1", "z1", "z2"]), "unique"),
        (lambda d: d.update(flat_output=["z1"]), "two expressions"),
    ],
)
def test_model_validation_errors(tmp_path, mutate, message):
    data = {k: list(v) if isinstance(v, list) else v for k, v in STALL_MODEL.items()}
    mutate(data)
    path = write_model(tmp_path, "bad", data)
    with pytest.raises(ModelFileError, match=message):
        load_model(path)


def test_dependent_inputs_rejected(tmp_path):
    data = dict(STALL_MODEL, g2=["2", "0", "0"])
    path = write_model(tmp_path, "dependent", data)
    with pytest.raises(ModelFileError, match="rank"):
        build_system(load_model(path))


def test_prolonged_model_zero_orders_is_semantically_identical():
    model = load_model(MODELS / "example1.json")
    zero = prolonged_model(model, 0, 0)
    assert zero.states == model.states
    assert zero.inputs == model.inputs
    base = build_system(model, seed=3)
    rebuilt = build_system(zero, seed=3)
    for ours, theirs in ((rebuilt.f, base.f), (rebuilt.g1, base.g1), (rebuilt.g2, base.g2)):
        assert [c.render() for c in ours.components] == [
            c.render() for c in theirs.components
        ]


# --- analyze ----------------------------------------------------------------------


def test_analyze_refined_vtol(capsys):
    code, report, _ = run_cli(capsys, "analyze", str(MODELS / "vtol.json"))
    assert code == 0
    (entry,) = report["schedule"]
    assert len(entry["branches"]) == 2
    assert all(b["status"] == "reached-tangent-space" for b in entry["branches"])
    assert report["result"]["passed"] is True
    assert report["result"]["output"] == ["-eps*sin(theta) + x", "eps*cos(theta) + z"]
    assert report["result"]["prolongation"] == 0


def test_analyze_basic_vtol_is_negative(capsys):
    code, report, _ = run_cli(
        capsys, "analyze", str(MODELS / "vtol.json"), "--algorithm", "1"
    )
    assert code == 3
    (branch,) = report["schedule"][0]["branches"]
    assert branch["status"] == "reached-tangent-space"
    # the characteristic distribution collapses: the annihilator is the
    # whole cotangent space and no pair can be formed
    assert len(branch["annihilator"]) == 6
    (leaf,) = report["schedule"][0]["candidates"]
    assert leaf["pairs"] == []
    assert report["result"]["passed"] is False


def test_analyze_example3(capsys):
    code, report, _ = run_cli(capsys, "analyze", str(MODELS / "example3.json"))
    assert code == 0
    assert report["result"]["output"] == ["z1", "z3"]
    assert report["result"]["branch"] == []


def test_analyze_prolongation_schedule_exhausts(capsys):
    code, report, _ = run_cli(
        capsys, "analyze", str(MODELS / "example1.json"), "--max-prolong", "2"
    )
    assert code == 3
    assert [e["prolongation"] for e in report["schedule"]] == [0, 1, 2]
    for entry in report["schedule"]:
        (leaf,) = entry["candidates"]
        assert leaf["shortfall"] == 2
        assert len(leaf["basis"]) == 2


def test_analyze_stall_is_internal_diagnostic(tmp_path, capsys):
    path = write_model(tmp_path, "stall", dict(STALL_MODEL))
    code, report, err = run_cli(capsys, "analyze", path)
    assert code == 2
    assert report["schedule"][0]["branches"][0]["status"] == "stalled"
    assert "stalled" in err


def test_analyze_writes_json_copy(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, report, _ = run_cli(
        capsys, "analyze", str(MODELS / "example3.json"), "--json", str(out)
    )
    assert code == 0
    assert json.loads(out.read_text()) == report


def test_analyze_report_determinism(tmp_path, capsys):
    args = ("analyze", str(MODELS / "vtol.json"), "--seed", "5")
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert main([*args, "--json", str(first)]) == 0
    assert main([*args, "--json", str(second)]) == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["seed"] == 5


# --- verify -----------------------------------------------------------------------


def test_verify_example1_flat_but_not_triangular(capsys):
    code, report, _ = run_cli(
        capsys, "verify", str(MODELS / "example1.json"), "--output", "x1", "x2"
    )
    assert code == 0
    assert report["indices"] == {"K": [1, 1], "R": [4, 4], "d": 3}
    assert report["rank_check"]["passed"] is True
    assert report["sfe"]["passed"] is False
    ranks = [q["rank"] for q in report["sfe"]["q_sequence"]]
    assert ranks == [2, 3, 4, 5]
    assert [q["integrable"] for q in report["sfe"]["q_sequence"]] == [
        True,
        False,
        True,
        True,
    ]


def test_verify_example3_passes_everything(capsys):
    code, report, _ = run_cli(
        capsys, "verify", str(MODELS / "example3.json"), "--output", "z1", "z3"
    )
    assert code == 0
    assert report["rank_check"]["passed"] is True
    assert report["sfe"]["passed"] is True


def test_verify_rejected_candidate(capsys):
    code, report, _ = run_cli(
        capsys,
        "verify",
        str(MODELS / "vtol.json"),
        "--output",
        "theta",
        "x*cos(theta)/sin(theta) + z",
    )
    assert code == 3
    assert report["rank_check"]["passed"] is False
    assert report["rank_check"]["spans_states"] is False
    assert report["indices"]["K"] == [2, 2]


def test_verify_unbounded_degree_is_negative_verdict(tmp_path, capsys):
    model = {
        "name": "decoupled",
        "states": ["x1", "x2", "x3"],
        "inputs": ["u1", "u2"],
        "drift": ["x1", "0", "0"],
        "g1": ["0", "1", "0"],
        "g2": ["0", "0", "1"],
    }
    path = write_model(tmp_path, "decoupled", model)
    code, report, _ = run_cli(capsys, "verify", path, "--output", "x1", "x2")
    assert code == 3
    assert report["error"] is not None
    assert report["rank_check"] is None


# --- prolong ----------------------------------------------------------------------


def test_prolong_roundtrip_example1(tmp_path, capsys):
    out = tmp_path / "example1_p11.json"
    code, report, _ = run_cli(
        capsys,
        "prolong",
        str(MODELS / "example1.json"),
        "--orders",
        "1",
        "1",
        "--out",
        str(out),
    )
    assert code == 0
    assert report["states"] == 7
    code, report, _ = run_cli(capsys, "verify", str(out), "--output", "x1", "x2")
    assert code == 0
    assert report["indices"] == {"K": [2, 2], "R": [5, 5], "d": 3}
    assert report["sfe"]["passed"] is True


def test_prolong_vtol_two_levels(tmp_path, capsys):
    out = tmp_path / "vtol_p22.json"
    code, report, _ = run_cli(
        capsys,
        "prolong",
        str(MODELS / "vtol.json"),
        "--orders",
        "2",
        "2",
        "--out",
        str(out),
    )
    assert code == 0
    assert report["states"] == 10
    code, report, _ = run_cli(
        capsys,
        "verify",
        str(out),
        "--output",
        "x - eps*sin(theta)",
        "z + eps*cos(theta)",
    )
    assert code == 0
    assert report["indices"] == {"K": [4, 4], "R": [6, 6], "d": 2}


# --- error handling ---------------------------------------------------------------


def test_missing_model_is_input_error(capsys):
    code, _, err = run_cli(capsys, "analyze", "no-such-file.json")
    assert code == 1
    assert "error" in err


def test_invalid_json_is_input_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, "verify", str(path), "--output", "a", "b")
    assert code == 1
    assert "invalid JSON" in err


def test_unknown_output_symbol_is_input_error(capsys):
    code, _, err = run_cli(
        capsys, "verify", str(MODELS / "example3.json"), "--output", "z1", "w9"
    )
    assert code == 1
    assert "output expression" in err


def test_negative_orders_are_input_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        "prolong",
        str(MODELS / "example1.json"),
        "--orders",
        "-1",
        "0",
        "--out",
        str(tmp_path / "x.json"),
    )
    assert code == 1
    assert "non-negative" in err


def test_usage_errors_exit_with_input_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(MODELS / "vtol.json"), "--algorithm", "7"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "flatkit.cli", "analyze", str(MODELS / "example3.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["output"] == ["z1", "z3"]
