import json

import pytest

from conftest import DATA
from modalfilt.cli import main, run

E1 = str(DATA / "e1.json")
GAMMA = str(DATA / "e1_gamma.txt")


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out), err


def test_eval(capsys):
    code, report, _ = invoke(capsys, "eval", E1, "<a>p2")
    assert code == 0 and report["truth_set"] == ["z"]


def test_strict_filter_fails(capsys):
    code, report, _ = invoke(capsys, "filter", E1, "--gamma", GAMMA,
                             "--logic", "K+<>^3p-><>p", "--strategy", "strict")
    assert code == 1
    assert report["reason"] == "no strict filtration exists among 1024 candidates"


def test_sat_k5(capsys):
    code, report, _ = invoke(capsys, "sat", "!(<a>p0 -> [a]<a>p0)", "--logics", "a:K5",
                             "--max-states", "5")
    assert code == 1 and report["verdict"] == "NO_MODEL_UP_TO" and report["n_max"] == 5


def test_sat_model_serialisation(capsys):
    code, report, _ = invoke(capsys, "sat", "<a>p0 & <a>!p0", "--logics", "a:K",
                             "--max-states", "3")
    assert code == 0
    assert report["model"]["witness"] == "w1" and report["model"]["n_max"] == 3
    assert set(report["model"]) == {"states", "relations", "valuation", "witness", "n_max"}


def test_valid_exit_codes(capsys):
    assert invoke(capsys, "valid", "p0 -> [a]<a^->p0", "--logics", "a:K",
                  "--max-states", "3")[0] == 0
    assert invoke(capsys, "valid", "<a>p0 -> p0", "--logics", "a:K", "--max-states", "3")[0] == 1


def test_user_logic_warning(capsys):
    code, _, err = invoke(capsys, "valid", "p0 -> <a>p0", "--logics", "a:K+p-><>p@reflexive",
                          "--max-states", "2")
    assert code == 0 and "warning" in err


def test_filter_writes_certificate_and_check_accepts_it(capsys, tmp_path):
    code, report, _ = invoke(capsys, "filter", E1, "--gamma", GAMMA, "--logic", "Km(3)",
                             "--out", str(tmp_path))
    assert code == 0 and report["blocks"] == 5
    sidecar = json.loads((tmp_path / "certificate.json").read_text())
    assert sidecar["strategy"] == "gabbay(3)" and sidecar["verified"]["ok"]
    assert set(sidecar) == {"delta", "map", "strategy", "verified"}
    code, report, _ = invoke(capsys, "check-filtration", E1, str(tmp_path / "quotient.json"),
                             str(tmp_path / "certificate.json"), "--gamma", GAMMA)
    assert code == 0 and report["filtration"] and report["definable"]


def test_check_filtration_rejects_bad_quotient(capsys, tmp_path):
    quotient = {"states": ["[x]", "[y]", "[z]", "[u]"],
                "relations": {"a": [["[x]", "[y]"], ["[y]", "[z]"], ["[z]", "[u]"], ["[x]", "[u]"]]},
                "valuation": {"p0": ["[x]"], "p1": ["[y]"], "p2": ["[u]"]}}
    mapping = {"x": "[x]", "y": "[y]", "y'": "[y]", "z": "[z]", "u": "[u]"}
    (tmp_path / "q.json").write_text(json.dumps(quotient))
    (tmp_path / "map.json").write_text(json.dumps(mapping))
    code, report, _ = invoke(capsys, "check-filtration", E1, str(tmp_path / "q.json"),
                             str(tmp_path / "map.json"), "--gamma", GAMMA)
    assert code == 1 and not report["report"]["upper_bound"]


def test_gamma_is_sub_closed_and_reported(capsys, tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("<a>p2\n")
    code, report, _ = invoke(capsys, "filter", E1, "--gamma", str(g), "--logic", "K")
    assert code == 0 and report["gamma_added"] == ["p2"]


def test_fuse_filter_trace(capsys, tmp_path):
    m = {"states": ["s", "t"], "relations": {"a": [["s", "t"], ["t", "t"]], "b": [["s", "s"], ["t", "t"]]},
         "valuation": {"p0": ["t"]}}
    (tmp_path / "m.json").write_text(json.dumps(m))
    (tmp_path / "g.txt").write_text("<a>p0\n<b>p0\n")
    code, report, _ = invoke(capsys, "fuse-filter", str(tmp_path / "m.json"), "--gamma",
                             str(tmp_path / "g.txt"), "--logics", "a:K5,b:S4", "--trace")
    assert code == 0 and report["certificate"]["verified"]["ok"]
    assert report["trace"][0]["fresh_variables"]


def test_algebra_counter_assignment(capsys, tmp_path):
    q = {"states": ["[x]", "[y]", "[z]", "[u]"],
         "relations": {"a": [["[x]", "[y]"], ["[y]", "[z]"], ["[z]", "[u]"]]}, "valuation": {}}
    (tmp_path / "q.json").write_text(json.dumps(q))
    code, report, _ = invoke(capsys, "algebra", str(tmp_path / "q.json"), "--axioms",
                             str(DATA / "km3.txt"))
    assert code == 1 and report["counter_assignment"] == {"p0": ["[u]"]}


def test_algebra_cap(capsys):
    code, report, _ = invoke(capsys, "algebra", E1, "--axioms", str(DATA / "km3.txt"), "--cap", "2")
    assert code == 3 and report["error"]["kind"] == "budget"


def test_bisim(capsys):
    code, report, _ = invoke(capsys, "bisim", E1, "--vars", "p0,p1,p2")
    assert code == 0 and len(report["blocks"]) == 5 and report["depth"] == 1


@pytest.mark.parametrize("argv", [
    ["eval"], ["nonsense"], ["eval", E1, "<a"], ["eval", "/no/such/file.json", "p0"],
    ["sat", "p0", "--logics", "a:Nope", "--max-states", "2"],
    ["filter", E1, "--gamma", GAMMA, "--logic", "T"],
])
def test_errors_are_json_with_exit_2(capsys, argv):
    code, report, err = invoke(capsys, *argv)
    assert code == 2 and "error" in report and err


def test_budget_exit_code(capsys):
    code, report, _ = invoke(capsys, "sat", "<a>p0 & !<a>true", "--logics", "a:K",
                             "--max-states", "4", "--budget", "100")
    assert code == 3 and report["coverage"]["covered_up_to"] == 2


def test_output_is_deterministic():
    argv = ["filter", E1, "--gamma", GAMMA, "--logic", "Km(3)", "--seed", "7"]
    first = run(argv)
    assert first[0] == 0
    assert json.dumps(first) == json.dumps(run(argv))
