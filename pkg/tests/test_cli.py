import json
import subprocess
import sys

import pytest

from crdeg.cli import main, run_command
from crdeg.io import ProblemError, dump_problem, load_problem, parse_problem

from conftest import fixture_path


def run(capsys, *argv):
    code = main([*argv])
    out, err = capsys.readouterr()
    return code, out, err


def result(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)["result"]


@pytest.mark.parametrize("name,k0,s", [
    ("id", 1, 0), ("scaling", 1, 0), ("hr", 1, 0), ("balls", 1, 1),
    ("blackhole_z2", 2, 1), ("blackhole_z", 1, 2), ("eps_1deg", 1, 1),
])
def test_degeneracy_command(capsys, name, k0, s):
    r = result(capsys, "degeneracy", str(fixture_path(name)))
    assert (r["k0"], r["s"]) == (k0, s)
    assert r["dim_X0"] <= r["s"]


def test_check_command(capsys):
    r = result(capsys, "check", str(fixture_path("eps_1deg")))
    assert r["maps_into"]["verdict"] and r["transversal"]["verdict"]
    assert r["levi_pullback"]["verdict"] and r["levi_pullback"]["immersive"]
    assert r["target"]["epsilon"] == [1, -1]
    assert r["source"]["reality"] is False


def test_constancy_command(capsys):
    r = result(capsys, "constancy", str(fixture_path("nonconstant")))
    assert r["verdict"] == "non_constant" and r["witness"]


def test_finite_type_command(capsys):
    r = result(capsys, "finite-type", str(fixture_path("quadric")))
    assert r["verdict"] == "FINITE_TYPE" and r["level"] == 2
    assert r["zero_point_check"]["is_zero"] and r["zero_point_check"]["rank"] == 2
    r = result(capsys, "finite-type", str(fixture_path("leviflat")))
    assert r["verdict"] == "NOT_FINITE_TYPE"


def test_segre_command(capsys):
    r = result(capsys, "segre", str(fixture_path("quadric")), "--levels", "3")
    assert [x["level"] for x in r["segre_maps"]] == [0, 1, 2, 3]
    assert all(x["vanishing"] for x in r["segre_maps"])


def test_holvf_command(capsys):
    assert result(capsys, "holvf", str(fixture_path("balls")))["dim_X0"] == 1


def test_identity_commands(capsys):
    r = result(capsys, "basic-identity", str(fixture_path("scaling")))
    assert r["residual_zero"] and r["det"] == "2+4*i"
    r = result(capsys, "basic-identity-1deg", str(fixture_path("eps_1deg")))
    assert r["residual_zero"] and r["D"] == "-1"


def test_jets_command(capsys):
    r = result(capsys, "jets", str(fixture_path("scaling")), str(fixture_path("scaling_b")))
    assert r["verdict"] == "jets_differ" and r["first_difference"]["degree"] == 1
    r = result(capsys, "jets", str(fixture_path("eps_1deg")), str(fixture_path("eps_1deg")))
    assert r["verdict"] == "determined"


def test_wrong_entry_point_exit_code(capsys):
    code, _, err = run(capsys, "basic-identity", str(fixture_path("blackhole_z2")))
    assert code == 3 and "basic_identity_1deg" in err


def test_map_required(capsys):
    code, _, err = run(capsys, "degeneracy", str(fixture_path("quadric")))
    assert code == 2 and "map required" in err


def test_jets_needs_two_files(capsys):
    code, _, err = run(capsys, "jets", str(fixture_path("id")))
    assert code == 2


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"order": 4,\n "source": }')
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "line 2" in err


def test_normality_rejection_names_generator(tmp_path, capsys):
    data = json.loads(fixture_path("quadric").read_text())
    data["source"]["Q"][0].append({"e": [1, 0, 0], "c": "1"})
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(data))
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "component 0" in err and "Q(z,0,tau)" in err


def test_schema_violation(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"order": 4, "source": {"n": 1, "d": 1, "Q": [[{"e": [0, 0, 1], "x": 1}]]}}))
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "schema" in err


def test_block_order_mismatch():
    data = json.loads(fixture_path("id").read_text())
    data["source"]["order"] = 5
    with pytest.raises(ProblemError, match="differs"):
        load_problem(data)


def test_order_override_on_truncated_data():
    with pytest.raises(ProblemError):
        parse_problem(fixture_path("hr"), order=10)
    assert parse_problem(fixture_path("hr"), order=6).order == 6


def test_reports_are_byte_identical(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "degeneracy", str(fixture_path("blackhole_z2")), "--json")
        outs.append(out)
    assert outs[0] == outs[1]


def test_text_output(capsys):
    code, out, _ = run(capsys, "degeneracy", str(fixture_path("balls")))
    assert code == 0 and out.startswith("crdeg 0.1.0  degeneracy")
    assert "s: 1" in out


def test_dump_roundtrip():
    prob = parse_problem(fixture_path("balls"))
    again = load_problem(dump_problem(prob.source, prob.target, prob.map))
    a = run_command("degeneracy", prob)["result"]
    b = run_command("degeneracy", again)["result"]
    assert a == b


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "crdeg.cli", "degeneracy",
                          str(fixture_path("id")), "--json"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["schema"] == "crdeg/1"
