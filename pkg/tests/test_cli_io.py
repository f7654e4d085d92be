from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from bkskit import catalog
from bkskit.cli import EXIT_INVALID, EXIT_NOT_KS, EXIT_OK, EXIT_USAGE, main
from bkskit.io import (
    DocumentError,
    dump_json,
    fingerprint,
    instance_from_document,
    instance_to_document,
    load_instance,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(out: str) -> dict:
    return json.loads(out)["payload"]


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _triangle_doc(**extra):
    doc = {
        "format_version": 1,
        "name": "tiny",
        "dimension": 3,
        "coordinates": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "bases": [[0, 1, 2]],
    }
    doc.update(extra)
    return doc


def test_validate_catalog_set(capsys):
    code, out, _ = run(capsys, "validate", "P-24")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["passed"]
    assert rep["vectors"] == 24 and rep["bases"] == 24
    code, out, _ = run(capsys, "validate", "S-35", "--ks")
    assert code == EXIT_OK and json.loads(out)["bases"] == 32 and json.loads(out)["ks_set"]


def test_validate_non_orthogonal_basis(capsys, tmp_path):
    doc = _triangle_doc(coordinates=[["1", "0", "0"], ["1", "1", "0"], ["0", "0", "1"]])
    code, out, _ = run(capsys, "validate", _write(tmp_path, "bad.json", doc))
    assert code == EXIT_INVALID
    failed = [c for c in json.loads(out)["checks"] if not c["passed"]]
    assert any("v1" in c["detail"] and "v2" in c["detail"] for c in failed)


def test_import_edge_list_disagreeing_with_coordinates(capsys, tmp_path):
    doc = _triangle_doc(orthogonality=[[0, 1], [0, 2]])
    code, out, _ = run(capsys, "import", _write(tmp_path, "edges.json", doc))
    assert code == EXIT_INVALID
    assert not json.loads(out)["passed"]


def test_unparseable_document(capsys, tmp_path):
    code, _, _ = run(capsys, "validate", _write(tmp_path, "v9.json", {"format_version": 9}))
    assert code == EXIT_INVALID
    with pytest.raises(DocumentError):
        instance_from_document({"format_version": 9})


def test_not_a_ks_set(capsys, tmp_path):
    code, out, err = run(capsys, "optimal", _write(tmp_path, "tiny.json", _triangle_doc()), "--quiet")
    assert code == EXIT_NOT_KS
    assert json.loads(out)["error"] == "not a KS set"
    assert "not a KS set" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["optimal"],
        ["optimal", "NOPE-1"],
        ["optimal", "Pen-40"],
        ["optimal", "CEG-18", "--two-phase"],
        ["optimal", "CEG-18", "--jobs", "0"],
        ["game", "CEG-18", "--sa", "1,2"],
        ["game", "CEG-18", "--sa", "x", "--sb", "2"],
        ["frobnicate"],
        ["import", "/nonexistent/file.json"],
    ],
)
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == EXIT_USAGE
    capsys.readouterr()


def test_unknown_name_suggests_alternatives(capsys):
    code, _, err = run(capsys, "validate", "CEG18")
    assert code == EXIT_USAGE
    assert "CEG-18" in err


def test_optimal_report_document(capsys):
    code, out, err = run(capsys, "optimal", "CEG-18")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["tool"] == "bkskit"
    assert doc["instance"]["fingerprint"] == fingerprint(catalog.get("CEG-18").instance)
    p = doc["payload"]
    assert p["optimal_size"] == [5, 6]
    assert p["expected"]["matches"]
    assert p["call_budget"]["worst_case_pairs"] > 0
    events = [json.loads(line) for line in err.splitlines()]
    assert events and all(e["event"] == "layer" for e in events)
    assert all(isinstance(v, str) for v in doc["timing"].values())


def test_quiet_suppresses_progress(capsys):
    _, _, err = run(capsys, "optimal", "P-24", "--quiet")
    assert err == ""


def test_replay_check(capsys, tmp_path):
    report = tmp_path / "k20.json"
    code, _, _ = run(capsys, "optimal", "K-20", "--quiet", "-o", str(report))
    assert code == EXIT_OK
    code, out, _ = run(capsys, "optimal", "K-20", "--quiet", "--check", str(report))
    assert code == EXIT_OK and json.loads(out)["replay"]["identical_payload"]
    doc = json.loads(report.read_text())
    doc["payload"]["omega"] = 1
    report.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "optimal", "K-20", "--quiet", "--check", str(report))
    assert code == EXIT_INVALID


def test_census_command(capsys):
    code, out, _ = run(capsys, "census", "K-20", "--essential", "--quiet")
    p = payload(out)
    assert code == EXIT_OK
    assert p["capable_total"] == 465 and p["essential_total"] == 36
    assert p["expected"]["capable_total"]["matches"]


def test_census_iso_and_list(capsys):
    code, out, _ = run(capsys, "census", "CEG-18", "--iso", "--list", "--essential", "--quiet")
    p = payload(out)
    assert p["iso_essential_by_size"] == {"5": 1, "6": 1}
    assert len(p["essential_sets"]) == 15
    assert p["automorphism_group"]["order"] > 1


def test_game_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "game", "P-24", "--sa", "1,4,5", "--sb", "9,15,22")
    p = payload(out)
    assert code == EXIT_OK
    assert p["bks"] and p["bks_by_solver"] and p["quantum_perfect"]
    assert p["classical_value"] == "8/9"

    code, out, _ = run(capsys, "game", "CEG-18", "--sa", "1,2,3", "--sb", "4,5,6")
    p = payload(out)
    assert p["classical_value"] == "1" and not p["bks"] and not p["bks_by_solver"]
    assert p["notes"]

    exported = tmp_path / "game.json"
    code, out, _ = run(capsys, "game", "S-29", "--sa", "5,6,9,10,13,14", "--sb", "1,2,3,4,7,8,11,12,16",
                       "--export-game", str(exported))
    p = payload(out)
    assert p["bks"] and p["bks_by_solver"]
    game = json.loads(exported.read_text())
    assert len(game["table"]) == 54


def test_export_import_round_trip(capsys, tmp_path):
    path = tmp_path / "p33.json"
    code, out, _ = run(capsys, "export", "P-33", "-o", str(path))
    assert code == EXIT_OK
    fp = json.loads(out)["fingerprint"]
    again = tmp_path / "p33b.json"
    code, out, _ = run(capsys, "import", str(path), "-o", str(again))
    assert code == EXIT_OK and json.loads(out)["fingerprint"] == fp
    assert path.read_text() == again.read_text()


@pytest.mark.parametrize("name", ["CEG-18", "Pen-40", "S-35"])
def test_document_round_trip_is_identity(name):
    inst = catalog.get(name).instance
    doc = json.loads(dump_json(instance_to_document(inst, include_edges=True)))
    back, rep = instance_from_document(doc)
    assert rep.passed
    assert json.loads(dump_json(instance_to_document(back, include_edges=True))) == doc
    assert fingerprint(back) == fingerprint(inst)


def test_load_instance_from_file(tmp_path):
    path = _write(tmp_path, "tiny.json", _triangle_doc())
    inst, rep, doc = load_instance(path)
    assert rep.passed and inst.n_bases == 1 and doc["name"] == "tiny"


def test_exact_strings_in_reports(capsys):
    _, out, _ = run(capsys, "game", "CEG-18", "--sa", "2,10,13,18,23", "--sb", "2,3,11,12,23,24")
    p = payload(out)
    assert isinstance(p["classical_value"], str) and "/" in p["classical_value"]
    assert p["normalization"] == ["1"]


def test_cnf_command(capsys):
    code, out, _ = run(capsys, "cnf", "P-24")
    assert code == EXIT_OK and out.startswith("p cnf 24 ")
    code, out, _ = run(capsys, "cnf", "P-24", "--sa", "1,4,5", "--sb", "9,15,22")
    assert out.startswith("p cnf 24 ")
    code, out, _ = run(capsys, "cnf", "CEG-18", "--capable", "2,10,13,18,23")
    assert code == EXIT_OK and out.startswith("p cnf 18 ")


def test_list_command(capsys):
    code, out, _ = run(capsys, "list")
    doc = json.loads(out)
    assert code == EXIT_OK and len(doc["sets"]) == 16 and doc["aliases"]["S-7"] == "S-34"


def test_deep_run_writes_checkpoint(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("BKS_CACHE_DIR", str(tmp_path))
    code, out, _ = run(capsys, "optimal", "K-20", "--deep", "--quiet")
    assert code == EXIT_OK
    assert any(p.suffix == ".npz" for p in tmp_path.iterdir())
    code, again, _ = run(capsys, "optimal", "K-20", "--deep", "--quiet")
    assert payload(again)["optimal_size"] == payload(out)["optimal_size"]


@pytest.mark.skipif(shutil.which("bkskit") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["bkskit", "validate", "CEG-18"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["passed"]
