import csv
import json

import pytest

from cqed_teleport import __main__ as cli
from cqed_teleport._types import ResultSet
from cqed_teleport.exceptions import ResultWriteError, TeleportValueError
from cqed_teleport.factory import ExperimentFactory
from cqed_teleport.handlers import ExperimentHandler
from cqed_teleport.scenario import ScenarioConfig
from cqed_teleport.write_file import emit_results, format_cell

TELEPORT_HEADER = ["scenario", "trial", "seed", "outcome", "fidelity", "duration_us"]


def _read_csv(path):
    with path.open(newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def _write_config(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _exit_code(argv):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(argv)
    return excinfo.value.code


def test_every_experiment_is_registered():
    assert set(ExperimentHandler._registry) == {
        "teleport",
        "rabi",
        "dispersive-check",
        "tomo",
    }
    assert cli.discover_experiments() == sorted(ExperimentHandler._registry)


def test_factory_rejects_unknown_experiment():
    with pytest.raises(TeleportValueError):
        ExperimentFactory.create_client("nope", ScenarioConfig())


def test_teleport_writes_one_row_per_trial(tmp_path):
    output = tmp_path / "results.csv"
    cli.main(["teleport", "--seed", "7", "--trials", "3", "-o", str(output)])

    rows = _read_csv(output)
    assert rows[0] == TELEPORT_HEADER
    assert [row[1:3] for row in rows[1:]] == [["0", "7"], ["1", "8"], ["2", "9"]]
    assert all(float(row[4]) == pytest.approx(1.0) for row in rows[1:])


def test_identical_runs_give_identical_bytes(tmp_path):
    config = _write_config(
        tmp_path / "scenario.json",
        {"name": "repeat", "protocol": {"c0": "random", "trials": 5, "seed": 11}},
    )
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["teleport", "--config", str(config), "-o", str(first)])
    cli.main(["teleport", "--config", str(config), "-o", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_json_output_to_stdout(capsys):
    cli.main(["teleport", "--seed", "1", "--trials", "2", "--format", "json"])
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 2
    assert list(records[0]) == TELEPORT_HEADER


def test_sweep_adds_parameter_columns(tmp_path):
    config = _write_config(
        tmp_path / "sweep.json",
        {"sweep": {"parameter": "device.g", "values": [5.8, 17.0, 50.0, 100.0]}},
    )
    output = tmp_path / "sweep.csv"
    cli.main(["sweep", "teleport", "--config", str(config), "-o", str(output)])

    rows = _read_csv(output)
    assert rows[0] == TELEPORT_HEADER + ["sweep_index", "device.g"]
    assert [row[-2:] for row in rows[1:]] == [
        ["0", "5.8"],
        ["1", "17"],
        ["2", "50"],
        ["3", "100"],
    ]


def test_rabi_recovers_drive_strength(tmp_path):
    config = _write_config(
        tmp_path / "rabi.json", {"output": {"snapshot_series": True}}
    )
    output = tmp_path / "rabi.csv"
    cli.main(["rabi", "--config", str(config), "-o", str(output)])

    header, row = _read_csv(output)
    values = dict(zip(header, row))
    assert float(values["fitted_mhz"]) == pytest.approx(50.0, rel=1e-3)
    series = _read_csv(tmp_path / "rabi_series.csv")
    assert series[0] == ["time_us", "p_up", "fit"]
    assert len(series) > 10


def test_rabi_on_qubit_2_recovers_its_weaker_drive(tmp_path):
    config = _write_config(tmp_path / "rabi.json", {"rabi": {"qubit": 1}})
    output = tmp_path / "rabi.csv"
    cli.main(["rabi", "--config", str(config), "-o", str(output)])

    header, row = _read_csv(output)
    values = dict(zip(header, row))
    assert values["qubit"] == "2"
    assert float(values["target_mhz"]) < 50.0
    assert float(values["fitted_mhz"]) == pytest.approx(
        float(values["target_mhz"]), rel=1e-3
    )


def test_rabi_without_drive_exits_with_run_error(tmp_path):
    config = _write_config(
        tmp_path / "undriven.json", {"device": {"rabi_frequency": 0}}
    )
    assert _exit_code(["rabi", "--config", str(config)]) == 3


def test_dispersive_check_stays_within_bound(tmp_path):
    output = tmp_path / "dispersive.csv"
    cli.main(["dispersive-check", "-o", str(output)])

    header, *rows = _read_csv(output)
    assert len(rows) == 3
    for row in rows:
        values = dict(zip(header, row))
        assert float(values["relative_error"]) <= float(values["bound"])


def test_tomography_of_the_channel(tmp_path):
    output = tmp_path / "tomo.csv"
    cli.main(["tomo", "--seed", "2", "-o", str(output)])

    header, row = _read_csv(output)
    values = dict(zip(header, row))
    assert float(values["fidelity"]) >= 0.98
    assert float(values["concurrence"]) >= 0.9


def test_missing_config_exits_with_config_error(tmp_path):
    assert _exit_code(["teleport", "--config", str(tmp_path / "none.json")]) == 2


def test_trials_without_seed_is_a_config_error():
    assert _exit_code(["teleport", "--trials", "3"]) == 2


def test_sweep_needs_a_sweep_section():
    assert _exit_code(["sweep", "teleport"]) == 2


def test_logfile_needs_verbosity(tmp_path):
    assert _exit_code(["teleport", "-l", str(tmp_path / "run.log")]) == 2


def test_failed_trial_exits_with_run_error(tmp_path):
    config = _write_config(
        tmp_path / "uncoupled.json",
        {"device": {"coupled": [True, False]}, "protocol": {"mode": "physical"}},
    )
    assert _exit_code(["teleport", "--config", str(config)]) == 3


def test_unwritable_output_exits_with_write_error(tmp_path):
    output = tmp_path / "missing" / "results.csv"
    assert _exit_code(["teleport", "-o", str(output)]) == 4


def test_empty_json_result_is_an_array(tmp_path):
    output = tmp_path / "empty.json"
    emit_results(ResultSet(columns=TELEPORT_HEADER), "json", output)
    assert json.loads(output.read_text(encoding="utf-8")) == []


def test_write_error_is_wrapped(tmp_path):
    with pytest.raises(ResultWriteError):
        emit_results(ResultSet(columns=["a"]), "csv", tmp_path)


def test_floats_use_twelve_significant_digits():
    assert format_cell(0.1 + 0.2) == "0.3"
    assert format_cell(1 / 3) == "0.333333333333"
    assert format_cell(7) == "7"
