import json
import subprocess
import sys

import pytest

from wigwitness import __version__
from wigwitness.cli import main, parse_range
from wigwitness.errors import SpecError
from wigwitness.witness import CSV_COLUMNS


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_witness_single_photon(capsys):
    code, out = run(capsys, "witness", "fock:1", "loss:0.8")
    data = json.loads(out.out)
    assert code == 0 and data["verdict"] == "quantum-non-Gaussian" and data["loss"] == 0.8


def test_witness_vacuum_inconclusive(capsys):
    code, out = run(capsys, "witness", "fock:0", "loss:0.0")
    data = json.loads(out.out)
    assert code == 1 and data["delta"] == 0 and data["verdict"] == "inconclusive"


def test_witness_pac_with_displacement(capsys):
    code, out = run(capsys, "witness", "pac:0.6", "loss:0.8", "disp:auto")
    data = json.loads(out.out)
    assert code == 0 and data["map_used"].startswith("disp:-")
    code_plain, _ = run(capsys, "witness", "pac:0.6", "loss:0.8")
    assert code_plain == 1


def test_witness_squeezing_maps(capsys):
    code, out = run(capsys, "witness", "pss:0.3", "loss:0.7", "sq:auto")
    assert code == 0 and json.loads(out.out)["map_used"].startswith("sq:-")
    code, out = run(capsys, "witness", "pss:0.3", "loss:0.7", "sq:-0.2")
    assert json.loads(out.out)["map_used"] == "sq:-0.2"


@pytest.mark.parametrize("argv", [
    ["witness", "cat:1"],
    ["witness", "fock:1", "loss:2"],
    ["witness", "fock:1", "loss:0.1", "rot:1"],
    ["witness", "pac:-1"],
    ["witness", "json:/nonexistent/state.json"],
    ["sweep", "fig99"],
])
def test_errors_exit_two(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 2 and out.err


def test_decision_tolerance_flag(capsys):
    code, _ = run(capsys, "witness", "fock:1", "loss:0.8", "--tol-decision", "1.0")
    assert code == 1


def test_parse_range():
    assert parse_range("0.1:0.5:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert parse_range("0.05:1.5:0.05")[-1] == 1.5
    with pytest.raises(SpecError):
        parse_range("1:0:0.1")


def _csv(path):
    lines = path.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return header, body


def test_sweep_fig2_left(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    assert main(["sweep", "fig2-left", "--out", str(out)]) == 0
    header, body = _csv(out)
    assert any(h.startswith("# command:") for h in header)
    assert any(__version__ in h for h in header)
    assert any("decision_tol" in h for h in header)
    assert body[0] == ",".join(CSV_COLUMNS)
    assert len(body) == 1 + 3 * 201
    params = [row.split(",")[0] for row in body[1:]]
    assert params[0] == "m=1" and params[-1] == "m=3"
    assert len(set(tuple(r.split(",")[:2]) for r in body[1:])) == len(body) - 1


def test_sweep_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["sweep", "fig4-left", "--out", str(path)]) == 0
    assert a.read_bytes().replace(str(a).encode(), b"X") == b.read_bytes().replace(str(b).encode(), b"X")


def test_sweep_fig9(tmp_path):
    out = tmp_path / "fig9.csv"
    assert main(["sweep", "fig9", "--out", str(out)]) == 0
    _, body = _csv(out)
    assert len(body) == 1 + 2 * 30


def test_sweep_custom(tmp_path):
    out = tmp_path / "custom.csv"
    assert main(["sweep", "custom", "--family", "pss", "--r", "0.1:0.5:0.1", "--criterion", "2",
                 "--out", str(out)]) == 0
    _, body = _csv(out)
    assert len(body) == 6
    assert body[1].startswith("r=0.1,")


def test_oracle_hull_empty(capsys):
    code, out = run(capsys, "oracle", "hull", "--samples", "0")
    assert code == 0 and json.loads(out.out)["checks_run"] == 0


def test_oracle_hull_small(capsys):
    code, out = run(capsys, "oracle", "hull", "--samples", "200", "--seed", "7")
    data = json.loads(out.out)
    assert code == 0 and data["checks_run"] == 200 * 11 and not data["failures"]


def test_oracle_closed_forms(capsys):
    code, out = run(capsys, "oracle", "closed-forms")
    data = json.loads(out.out)
    assert code == 0 and all(v <= 1e-6 for v in data["per_check"].values())


def test_state_dump_round_trip(tmp_path, capsys):
    path = tmp_path / "state.json"
    assert main(["state", "dump", "fock:1", "loss:0.3", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["dim"] == 2 and len(data["mat"]) == 4
    code, out = run(capsys, "witness", f"json:{path}")
    assert code == 0 and json.loads(out.out)["mean_photon"] == pytest.approx(0.7)


def test_gaussian_mixture_input(tmp_path, capsys):
    path = tmp_path / "mix.json"
    path.write_text(json.dumps({"weights": [0.5, 0.5], "alphas": [[0, 0], [1, 0]], "xis": [[0.3, 0], [0, 0]]}))
    code, out = run(capsys, "witness", f"json:{path}")
    assert code == 1 and json.loads(out.out)["delta"] >= 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wigwitness", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
