"""Command-line interface: exit codes, stdout formats, file artifacts."""

import json

import pytest

from anyonforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- model ----------------------------------------------------------------

def test_model_fusion_table(capsys):
    code, out, _ = run(capsys, "model", "--k", "3")
    assert code == 0
    assert "1 x 1 = 0 + 1" in out  # spin labels, not doubled charges


def test_model_json(capsys):
    code, out, _ = run(capsys, "model", "--k", "3", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["charges"]) == 4
    assert data["k"] == 3


def test_model_rejects_bad_level(capsys):
    assert run(capsys, "model", "--k", "1")[0] == 1
    assert run(capsys, "model")[0] == 1


def test_help_exits_cleanly(capsys):
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "synth", "--help")[0] == 0


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 1


# --- check ------------------------------------------------------------------

def test_check_clean(capsys):
    code, out, _ = run(capsys, "check", "--k", "2")
    assert code == 0
    assert "pass" in out.lower()


def test_check_detects_corruption(capsys):
    code, _, _ = run(capsys, "check", "--k", "2", "--debug-corrupt")
    assert code == 2


# --- basis ------------------------------------------------------------------

def test_basis_dimension(capsys):
    spins = ",".join(["1/2"] * 6)
    code, out, _ = run(capsys, "basis", "--k", "3", "--leaves", spins,
                       "--total", "0", "--format", "json")
    assert code == 0
    assert json.loads(out)["dim"] == 5
    code, out, _ = run(capsys, "basis", "--k", "2", "--leaves", spins,
                       "--total", "0", "--format", "json")
    assert json.loads(out)["dim"] == 4


def test_basis_requires_leaves(capsys):
    assert run(capsys, "basis", "--k", "3")[0] == 1


# --- synth / verify -----------------------------------------------------------

def test_synth_writes_artifacts(capsys, tmp_path):
    out = tmp_path / "b1.json"
    code, _, _ = run(capsys, "synth", "--k", "3", "--target", "B1",
                     "--max-length", "4", "--out", str(out))
    assert code == 3  # terminated without reaching tolerance
    assert out.exists()
    curve = out.with_suffix(".csv")
    assert curve.exists()
    assert curve.read_text().splitlines()[0] == (
        "length,best_distance,nodes_explored,seconds")
    payload = json.loads(out.read_text())
    assert payload["target"] == "B1"
    assert payload["k"] == 3


def test_synth_csv_format_prints_curve(capsys):
    code, out, _ = run(capsys, "synth", "--k", "3", "--target", "B3",
                       "--max-length", "2", "--format", "csv")
    assert code == 3
    assert out.splitlines()[0] == "length,best_distance,nodes_explored,seconds"


def test_synth_unknown_target(capsys, tmp_path):
    code, _, _ = run(capsys, "synth", "--k", "3", "--target",
                     str(tmp_path / "missing.json"))
    assert code == 1


def test_verify_accepts_fresh_file(capsys, tmp_path):
    out = tmp_path / "p.json"
    run(capsys, "synth", "--k", "2", "--target", "P", "--max-length", "4",
        "--out", str(out))
    assert run(capsys, "verify", str(out))[0] == 0


def test_verify_rejects_tampering(capsys, tmp_path):
    out = tmp_path / "p.json"
    run(capsys, "synth", "--k", "2", "--target", "P", "--max-length", "4",
        "--out", str(out))
    payload = json.loads(out.read_text())
    payload["distance"] = payload["distance"] * 0.5
    out.write_text(json.dumps(payload))
    assert run(capsys, "verify", str(out))[0] == 2


def test_synth_deterministic_across_workers(capsys, tmp_path):
    one, two = tmp_path / "one.json", tmp_path / "two.json"
    run(capsys, "synth", "--k", "3", "--target", "B1", "--max-length", "6",
        "--workers", "1", "--out", str(one))
    run(capsys, "synth", "--k", "3", "--target", "B1", "--max-length", "6",
        "--workers", "2", "--out", str(two))
    assert one.read_bytes() == two.read_bytes()


# --- assemble ------------------------------------------------------------------

def test_assemble_cz_roundtrip(capsys, tmp_path):
    component = tmp_path / "p.json"
    run(capsys, "synth", "--k", "3", "--target", "P", "--max-length", "8",
        "--out", str(component))
    report = tmp_path / "cz.json"
    code, out, _ = run(capsys, "assemble", "--gate", "cz", str(component),
                       "--out", str(report))
    assert code == 0
    payload = json.loads(report.read_text())
    assert payload["gate"] == "cz"
    assert payload["bound_satisfied"] is True
    braid_export = tmp_path / "cz.braid.json"
    assert braid_export.exists()
    assert json.loads(braid_export.read_text())["gate"] == "cz"


def test_assemble_needs_all_components(capsys, tmp_path):
    component = tmp_path / "p.json"
    run(capsys, "synth", "--k", "3", "--target", "P", "--max-length", "4",
        "--out", str(component))
    code, _, _ = run(capsys, "assemble", "--gate", "ccz", str(component))
    assert code == 1


def test_convert_needs_direction(capsys, tmp_path):
    component = tmp_path / "e.json"
    run(capsys, "synth", "--k", "3", "--target", "E", "--max-length", "4",
        "--out", str(component))
    code, _, _ = run(capsys, "assemble", "--gate", "convert", str(component))
    assert code == 1
    code, _, _ = run(capsys, "assemble", "--gate", "convert", "--direction",
                     "merge", str(component))
    assert code == 0


def test_assemble_rejects_mixed_levels(capsys, tmp_path):
    p2 = tmp_path / "p2.json"
    p3 = tmp_path / "b1.json"
    run(capsys, "synth", "--k", "2", "--target", "P", "--max-length", "2",
        "--out", str(p2))
    run(capsys, "synth", "--k", "3", "--target", "B1", "--max-length", "2",
        "--out", str(p3))
    code, _, _ = run(capsys, "assemble", "--gate", "cz", str(p2), str(p3))
    assert code == 1
