import json

import pytest

import main_application
from main_application import EXIT_FAILED, EXIT_INTERRUPTED, EXIT_INVALID, EXIT_OK, run

P1_ROWS = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-4, 0, 2, 2]]
P1_INDEX_5 = [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-10, 0, 5, 5]]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in ("LATTICE_LOG_LEVEL", "LATTICE_WORKERS", "LATTICE_STRIP_RULE", "LATTICE_CATALOG_PATH"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("LATTICE_REPORT_DIR", str(tmp_path / "reports"))


@pytest.fixture
def write_input(tmp_path):
    def _write(payload, name="input.json"):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)
    return _write


def _run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_snf(capsys, write_input):
    path = write_input({"matrix": [["2", "4", "4"], ["-6", "6", "12"], ["10", "-4", "-16"]]})
    code, out = _run_json(capsys, ["snf", "--in", path])
    assert code == EXIT_OK
    assert out["divisors"] == ["2", "6", "12"]
    assert out["rank"] == "3"
    assert out["success"] is True
    assert out["schema_version"] == "1"


def test_polytope_check(capsys, write_input):
    path = write_input({"d": 3, "vertices": [[0, 0, 0], [1, 0, 2], [0, 1, 2], [1, 1, 2]]})
    code, out = _run_json(capsys, ["polytope", "check", "--in", path])
    assert code == EXIT_OK
    assert out["q_gorenstein"] == {"alpha": ["0", "0", "1"], "index": "2"}
    assert out["canonical"] is False
    assert out["witness"] == ["0", "0", "1"]


def test_polytope_k_emptiness(capsys, write_input):
    path = write_input({"d": 2, "vertices": [[0, 0], [0, 4], [4, 0]]})
    code, out = _run_json(capsys, ["polytope", "check", "--k", "2", "--in", path])
    assert code == EXIT_OK
    assert out["k_empty"] is False
    assert out["k_witness"] in (["0", "2"], ["2", "0"], ["2", "2"])


def test_lattice_points_of_rational_triangle(capsys, write_input):
    path = write_input({"d": "2", "vertices": [["0", "0"], ["5/2", "0"], ["0", "5/2"]]})
    code, out = _run_json(capsys, ["polytope", "lattice-points", "--in", path])
    assert code == EXIT_OK
    assert out["count"] == "6"
    assert ["1", "1"] in out["points"]


def test_floats_are_rejected(capsys, write_input):
    path = write_input({"d": 2, "vertices": [[0.5, 0], [1, 0], [0, 1]]})
    code, out = _run_json(capsys, ["polytope", "lattice-points", "--in", path])
    assert code == EXIT_INVALID
    assert out["success"] is False
    assert "vertices" in out["error"]


def test_kempty_commands(capsys, write_input):
    code, out = _run_json(capsys, ["kempty", "strips", "--k", "3"])
    assert code == EXIT_OK
    assert [s["f"] for s in out["strips"]] == ["0/1", "1/3", "1/2", "2/3"]
    assert out["strips"][1]["upper_strict"] is True

    code, out = _run_json(capsys, ["kempty", "sporadic", "--k", "3"])
    assert code == EXIT_OK
    assert (out["count"], out["bound"], out["strip_rule"]) == ("7", "23", "apex")

    path = write_input({"k": 2, "vertices": [[0, 0], [0, 1], [5, 3]]})
    code, out = _run_json(capsys, ["kempty", "standard-form", "--in", path])
    assert code == EXIT_OK
    assert {k: out["standard_form"][k] for k in "axy"} == {"a": "1", "x": "5", "y": "2"}

    path = write_input({"k": 2, "first": [[0, 0], [0, 1], [5, 3]], "second": [[5, 8], [0, 0], [0, 1]]})
    code, out = _run_json(capsys, ["kempty", "equivalent", "--in", path])
    assert code == EXIT_OK
    assert out["equivalent"] is True


def test_kempty_rejects_bad_k(capsys):
    code, out = _run_json(capsys, ["kempty", "strips", "--k", "0"])
    assert code == EXIT_INVALID
    assert "positive" in out["error"]


def test_standard_form_of_non_empty_triangle(capsys, write_input):
    path = write_input({"k": 2, "vertices": [[0, 0], [0, 4], [4, 0]]})
    code, out = _run_json(capsys, ["kempty", "standard-form", "--in", path])
    assert code == EXIT_INVALID
    assert out["command"] == "kempty standard-form"


def test_matrix_check(capsys, write_input):
    code, out = _run_json(capsys, ["matrix", "check", "--in", write_input({"rows": P1_ROWS})])
    assert code == EXIT_OK
    assert (out["canonical"], out["case"], out["iota"], out["zeta"]) == (True, "zeta1", "2", "1")


def test_matrix_check_from_blocks(capsys, write_input):
    payload = {
        "r": 2,
        "blocks": [
            {"l": [3, 1], "d": [[1, 0], [-4, 0]]},
            {"l": [3], "d": [[0], [2]]},
            {"l": [2], "d": [[-1], [2]]},
        ],
    }
    code, out = _run_json(capsys, ["matrix", "check", "--in", write_input(payload)])
    assert code == EXIT_OK
    assert out["canonical"] is True


def test_matrix_verdict_lists_witnesses(capsys, write_input):
    code, out = _run_json(capsys, ["matrix", "verdict", "--in", write_input({"rows": P1_INDEX_5})])
    assert code == EXIT_OK
    assert out["canonical"] is False
    assert ["-1", "-1", "0", "-1"] in [w["point"] for w in out["witnesses"]]
    assert out["matrix"]["rows"][3] == ["-10", "0", "5", "5"]


def test_matrix_outside_normal_forms(capsys, write_input):
    path = write_input({"rows": [[-3, -1, 3, 0], [-3, -1, 0, 2], [1, 0, 0, -1], [-4, 0, 2, 3]]})
    code, out = _run_json(capsys, ["matrix", "check", "--in", path])
    assert code == EXIT_INVALID
    assert "normal-form" in out["error"]


def test_invalid_matrix(capsys, write_input):
    path = write_input({"rows": [[-6, -1, 3, 0], [-6, -1, 0, 2], [2, 0, 0, -1], [-8, 0, 2, 2]]})
    code, out = _run_json(capsys, ["matrix", "classgroup", "--in", path])
    assert code == EXIT_INVALID
    assert "not primitive" in out["error"]


def test_matrix_needs_one_form(capsys, write_input):
    code, out = _run_json(capsys, ["matrix", "check", "--in", write_input({})])
    assert code == EXIT_INVALID
    assert "exactly one" in out["error"]


def test_classgroup(capsys, write_input):
    code, out = _run_json(capsys, ["matrix", "classgroup", "--in", write_input({"rows": P1_ROWS})])
    assert code == EXIT_OK
    assert out["class_group"] == "Z/2Z"
    assert out["relations"] == ["T01^3T02 + T11^3 + T21^2"]
    assert out["canonical_class_order"] == "2"


def test_catalog_commands(capsys):
    code, out = _run_json(capsys, ["catalog", "list", "--kind", "toric"])
    assert code == EXIT_OK
    assert out["count"] == "5"

    code, out = _run_json(capsys, ["catalog", "show", "56a"])
    assert code == EXIT_OK
    assert out["id"] == "P_13"
    assert "matrix" in out

    code, out = _run_json(capsys, ["catalog", "show", "toric_iv", "--params", '{"m": 2}'])
    assert code == EXIT_OK
    assert ["2", "5", "2"] in out["polytope"]["vertices"]


@pytest.mark.parametrize(
    "argv",
    [
        ["catalog", "show", "P_26", "--params", '{"d": [1], "dprime": [2, 2]}'],
        ["catalog", "show", "P_26", "--params", "[1]"],
        ["catalog", "show", "P_26", "--params", "{"],
        ["catalog", "show", "P_99"],
    ],
)
def test_catalog_show_errors(capsys, argv):
    code, out = _run_json(capsys, argv)
    assert code == EXIT_INVALID
    assert out["success"] is False


def test_verify_toric_suite(capsys):
    code, out = _run_json(capsys, ["verify-paper", "--suite", "toric"])
    assert code == EXIT_OK
    assert out["passed"] is True
    assert "timings" not in out
    assert list(out["suites"]) == ["toric"]


def test_verify_kempty_suite_small(capsys):
    code, out = _run_json(capsys, ["verify-paper", "--suite", "kempty", "--max-k", "3"])
    assert code == EXIT_OK
    assert out["suites"]["kempty"]["sporadic_counts"] == {"1": "0", "2": "2", "3": "7"}


def test_output_is_deterministic(capsys):
    run(["verify-paper", "--suite", "toric"])
    first = capsys.readouterr().out
    run(["verify-paper", "--suite", "toric"])
    assert capsys.readouterr().out == first


def test_saved_report(capsys, tmp_path):
    code = run(["verify-paper", "--suite", "toric", "--save-report"])
    capsys.readouterr()
    assert code == EXIT_OK
    (report,) = (tmp_path / "reports").glob("verification_report_*.json")
    data = json.loads(report.read_text())
    assert data["command"] == "verify-paper"
    assert data["success"] is True
    assert "toric" in data["result"]["timings"]


def test_text_report_and_out_file(capsys, tmp_path, write_input):
    out_path = tmp_path / "result.txt"
    code = run(["matrix", "check", "--report", "text", "--out", str(out_path), "--in", write_input({"rows": P1_ROWS})])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    assert captured.out == ""
    assert "🔧 matrix check" in captured.err
    assert "canonical: true" in out_path.read_text()


def test_stdin_input(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"matrix": [[0, 0], [0, 0]]})))
    code, out = _run_json(capsys, ["snf"])
    assert code == EXIT_OK
    assert out["rank"] == "0"


@pytest.mark.parametrize("text", ["not json", '{"matrix": []}', '{"matrix": [[1, 2], [3]]}'])
def test_snf_rejects_bad_input(capsys, write_input, text):
    code, out = _run_json(capsys, ["snf", "--in", write_input(text)])
    assert code == EXIT_INVALID
    assert out["command"] == "snf"


def test_missing_input_file(capsys, tmp_path):
    code, out = _run_json(capsys, ["snf", "--in", str(tmp_path / "absent.json")])
    assert code == EXIT_INVALID
    assert "not found" in out["error"]


def test_argument_errors():
    assert run(["kempty", "strips"]) == EXIT_INVALID
    assert run(["frobnicate"]) == EXIT_INVALID
    assert run(["--help"]) == EXIT_OK


def test_invalid_environment(capsys, monkeypatch):
    monkeypatch.setenv("LATTICE_WORKERS", "0")
    code, out = _run_json(capsys, ["kempty", "strips", "--k", "2"])
    assert code == EXIT_INVALID
    assert "LATTICE_WORKERS" in out["error"]


def test_strip_rule_flag(capsys):
    code, out = _run_json(capsys, ["kempty", "sporadic", "--k", "2", "--strip-rule", "kfold"])
    assert code == EXIT_OK
    assert out["strip_rule"] == "kfold"
    assert int(out["count"]) >= 0


def test_failed_verification_exit_code(capsys, monkeypatch):
    def failing(self, inputs):
        return {"suite": "toric", "passed": False, "suites": {}, "summary": "", "timings": {}}

    monkeypatch.setattr(main_application.VerificationCrew, "kickoff", failing)
    code, out = _run_json(capsys, ["verify-paper", "--suite", "toric"])
    assert code == EXIT_FAILED
    assert out["success"] is False


def test_main_exit_codes(monkeypatch, capsys):
    def interrupted(argv=None):
        raise KeyboardInterrupt

    def broken(argv=None):
        raise RuntimeError("boom")

    monkeypatch.setattr(main_application, "run", interrupted)
    with pytest.raises(SystemExit) as exc:
        main_application.main()
    assert exc.value.code == EXIT_INTERRUPTED
    assert "interrupted" in capsys.readouterr().err

    monkeypatch.setattr(main_application, "run", broken)
    with pytest.raises(SystemExit) as exc:
        main_application.main()
    assert exc.value.code == EXIT_FAILED
    assert "boom" in capsys.readouterr().err
