import csv
import io
import json
import subprocess
import sys

import pytest

from juntalab import boolfn as bf
from juntalab.cli import ConfigError, main, parse_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_distances_example(capsys):
    data = run_json(capsys, "distances", "--n", "4", "--k", "1", "--d", "1", "--m", "2")
    assert data["tv"] == "1/3"
    assert data["schema_version"] == "1" and data["seed"] == 0 and data["command"] == "distances"


def test_qft_check(capsys):
    data = run_json(capsys, "qft", "--n", "6", "--check")
    assert data["unitarity_residual"] < 1e-9


def test_adversary(capsys):
    data = run_json(capsys, "adversary", "--n", "8", "--k", "2", "--d", "2")
    assert data["feasibility_residual"] < 1e-9
    assert data["min_eigenvalue"] >= -1e-9
    assert {"n", "k", "d", "W", "min_eigenvalue"} <= set(data)


def test_fourier_instance(capsys):
    data = run_json(capsys, "fourier", "--instance", "parity:3", "--k", "2")
    assert data["distance_to_k_junta"] == "1/2"


def test_fourier_truth_table(tmp_path, capsys):
    path = tmp_path / "and.tt"
    bf.write_truth_table(bf.and_function(2), path)
    data = run_json(capsys, "fourier", "--truth-table", str(path))
    assert data["n"] == 2


@pytest.mark.parametrize("argv", [
    ("qggt", "--n", "5", "--k", "1", "--d", "2", "--side", "large", "--mode", "random-unitary", "--seed", "3"),
    ("ggt-classical", "--n", "16", "--k", "2", "--d", "2", "--seeds", "20", "--seed", "4"),
    ("junta", "--instance", "random-junta:5:2", "--k", "2", "--eps", "0.1", "--seed", "7"),
])
def test_byte_identical_reruns(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0 and first == second


def test_qggt_fields(capsys):
    data = run_json(capsys, "qggt", "--n", "4", "--k", "1", "--d", "1")
    for key in ("n", "k", "d", "side", "mode", "C1", "C", "a", "acceptance_probability", "decision", "queries"):
        assert key in data
    assert data["decision"] == "small"


def test_ggt_classical_fields(capsys):
    data = run_json(capsys, "ggt-classical", "--n", "16", "--k", "2", "--d", "2", "--seeds", "10")
    for key in ("tester", "n", "k", "d", "seeds", "error_rate", "queries"):
        assert key in data
    assert set(data["queries"]) == {"mean", "max"}


def test_worker_count_does_not_change_output(capsys):
    base = ("ggt-classical", "--n", "16", "--k", "2", "--d", "1", "--seeds", "12", "--tester", "sampling")
    a = run(capsys, *base, "--workers", "1")
    b = run(capsys, *base, "--workers", "2")
    assert a == b


def test_csv_output(capsys):
    code, out, _ = run(capsys, "junta", "--instance", "parity:3", "--k", "2", "--eps", "0.1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10 and rows[0]["kind"] == "first"


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "qft", "--n", "3", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["n"] == 3


def test_config_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('n = 4\nk = 1\nd = 1\nm = 2\nseed = 9\n')
    data = run_json(capsys, "distances", "--config", str(cfg))
    assert data["tv"] == "1/3" and data["seed"] == 9
    # flags win over the file
    data = run_json(capsys, "distances", "--config", str(cfg), "--m", "0")
    assert data["tv"] == "0"


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("colour = 3\n")
    assert run(capsys, "qft", "--n", "3", "--config", str(cfg))[0] == 2
    cfg.write_text("n = [\n")
    assert run(capsys, "qft", "--config", str(cfg))[0] == 2


def test_invalid_parameters_exit_2(capsys):
    assert run(capsys, "distances", "--n", "3", "--k", "2", "--d", "2", "--m", "1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["qft"])
    assert exc.value.code == 2


def test_acceptance_exit_codes(capsys):
    code, out, _ = run(capsys, "acceptance-suite", "--only", "2")
    assert code == 0 and json.loads(out)["all_passed"]
    code, out, _ = run(capsys, "acceptance-suite", "--only", "8")
    data = json.loads(out)
    assert code == 1 and not data["all_passed"]
    assert [c["key"] for c in data["criteria"] if not c["passed"]] == ["8c"]


def test_instance_descriptors():
    assert parse_instance("parity:4:1,3") == bf.parity(4, 0b101)
    assert parse_instance("constant:3") == bf.constant(3)
    assert parse_instance("and:2") == bf.and_function(2)
    assert parse_instance("addressing:1,2").n == 3
    assert parse_instance("random:4", seed=2) == parse_instance("random:4", seed=2)
    f = parse_instance("random-junta:6:2", seed=1)
    assert bf.popcount(bf.relevant_variables(f)) <= 2
    with pytest.raises(ConfigError):
        parse_instance("mystery:3")


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "juntalab.cli", "qft", "--n", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["n"] == 2
