"""End-to-end command line checks driven through main(argv) in process."""

import json

import pytest

from ctxcheck import (
    builtin_example,
    dump_document,
    find_global_section,
    sections_to_document,
    theory_to_document,
    without_declarations,
)
from ctxcheck.cli import EXIT_CONTEXTUAL, EXIT_ERROR, EXIT_OK, main


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(dump_document(doc))
    return str(path)


def _theory_file(tmp_path, name="specker-triangle", strip=False):
    theory = builtin_example(name).theory
    if strip:
        theory = without_declarations(theory)
    return _write(tmp_path, f"{name}.json", theory_to_document(theory)), theory


def test_check_exit_codes_and_json(tmp_path, capsys):
    path, _ = _theory_file(tmp_path)
    assert main(["check", path]) == EXIT_CONTEXTUAL
    out = capsys.readouterr().out
    assert "CONTEXTUAL" in out

    assert main(["check", "--json", path]) == EXIT_CONTEXTUAL
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "contextual"
    assert payload["certificate"]
    assert payload["margin"] == "1/2"

    feasible, _ = _theory_file(tmp_path, "spekkens-preparation", strip=True)
    assert main(["check", "--json", feasible]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "non-contextual"
    assert payload["sections"]


def test_check_possibilistic_mode(tmp_path, capsys):
    path, _ = _theory_file(tmp_path, "mermin")
    assert main(["check", "--mode", "possibilistic", path]) == EXIT_CONTEXTUAL
    assert "possibilistic" in capsys.readouterr().out


def test_check_rejects_missing_and_malformed_files(tmp_path, capsys):
    assert main(["check", str(tmp_path / "absent.json")]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["check", str(bad)]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_check_rejects_signalling_scenario(tmp_path, capsys):
    # x's marginal is 0 in one context and 1 in the other
    doc = {
        "labels": {"x": ["0", "1"], "y": ["0", "1"], "z": ["0", "1"]},
        "cover": [["x", "y"], ["x", "z"]],
        "states": {
            "s": {
                "x,y": {"0,0": "1"},
                "x,z": {"1,0": "1"},
            }
        },
    }
    path = _write(tmp_path, "signalling.json", doc)
    assert main(["check", path]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_verify_command(tmp_path, capsys):
    path, theory = _theory_file(tmp_path, "spekkens-preparation", strip=True)
    sections = find_global_section(theory)
    good = _write(tmp_path, "sections.json", sections_to_document(theory, sections))
    assert main(["verify", path, good]) == EXIT_OK

    capsys.readouterr()
    # swapping two states' sections keeps them normalized but breaks marginals
    doc = sections_to_document(theory, sections)
    doc["sections"]["a"], doc["sections"]["b"] = doc["sections"]["b"], doc["sections"]["a"]
    bad = _write(tmp_path, "bad-sections.json", doc)
    assert main(["verify", path, bad]) == EXIT_CONTEXTUAL
    assert capsys.readouterr().out.strip()


def test_quotient_and_minimalize(tmp_path, capsys):
    path, _ = _theory_file(tmp_path)
    assert main(["minimalize", path]) == EXIT_OK
    captured = capsys.readouterr()
    assert "identity" in captured.err
    json.loads(captured.out)

    assert main(["quotient", path]) == EXIT_OK
    captured = capsys.readouterr()
    json.loads(captured.out)


def test_canonical_rep_and_analyze(tmp_path, capsys):
    feasible, _ = _theory_file(tmp_path, "spekkens-preparation", strip=True)
    assert main(["canonical-rep", feasible]) == EXIT_OK
    rep_doc = json.loads(capsys.readouterr().out)
    rep_path = _write(tmp_path, "rep.json", rep_doc)

    assert main(["analyze-rep", rep_path]) == EXIT_OK
    assert "realizes" in capsys.readouterr().out

    assert main(["analyze-rep", "--json", rep_path]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["flags"]["realizes"] is True

    contextual, _ = _theory_file(tmp_path)
    assert main(["canonical-rep", contextual]) == EXIT_CONTEXTUAL
    assert capsys.readouterr().err.strip()


def test_induce_round_trip(tmp_path, capsys):
    feasible, _ = _theory_file(tmp_path, "spekkens-preparation", strip=True)
    assert main(["canonical-rep", feasible]) == EXIT_OK
    rep_path = _write(tmp_path, "rep.json", json.loads(capsys.readouterr().out))
    assert main(["induce", rep_path]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert set(bundle) == {"scenario", "sections"}
    scenario_path = _write(tmp_path, "induced.json", bundle["scenario"])
    assert main(["check", scenario_path]) == EXIT_OK


def test_example_command(tmp_path, capsys):
    assert main(["example", "bell"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["cover"]

    assert main(["example", "random", "--seed", "5"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["example", "random", "--seed", "5"]) == EXIT_OK
    assert capsys.readouterr().out == first

    with pytest.raises(SystemExit):
        main(["example", "nonesuch"])


def test_check_quantum_document_via_stdin(tmp_path, capsys, monkeypatch):
    import io

    doc = {
        "labels": {"x": ["0", "1"]},
        "cover": [["x"]],
        "states": {"s": {"x": {"0": "1/3", "1": "2/3"}}},
    }
    monkeypatch.setattr("sys.stdin", io.StringIO(dump_document(doc)))
    assert main(["check", "-"]) == EXIT_OK
    assert "NON-CONTEXTUAL" in capsys.readouterr().out
