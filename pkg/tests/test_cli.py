import csv
import io
import json

import pytest

from mavcodesign.catalog import builtin_platforms
from mavcodesign.cli import CliConfig, UsageError, run

CONSTRAINTS = {"payload_max_kg": 1.0, "battery_energy_j": 6e5, "current_limit_a": 60, "nominal_voltage_v": 22.2}
GRID = "mass_kg=0.1:1:3,power_w=10:100:2,response_s=0.1:1:3"


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def constraints_file(tmp_path):
    path = tmp_path / "constraints.json"
    path.write_text(json.dumps(CONSTRAINTS))
    return str(path)


def test_platforms_lists_four(capsys):
    code, out, _ = cli(capsys, "platforms")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5
    assert all(line.rstrip().endswith("ok") for line in lines[1:])


def test_mission_table_rows(capsys):
    code, out, _ = cli(capsys, "mission", "--length", "1000", "--sdr", "4", "--format", "csv")
    assert code == 0
    rows = {r["platform"]: r for r in csv.DictReader(io.StringIO(out))}
    assert float(rows["Jetson TX2"]["time_mass_only_s"]) == pytest.approx(341.9, abs=0.1)
    assert float(rows["i7-4790K"]["mission_time_s"]) == pytest.approx(686, rel=0.015)
    assert float(rows["Jetson Xavier"]["energy_j"]) == pytest.approx(407e3, rel=0.03)


def test_csv_is_full_precision(capsys):
    _, out, _ = cli(capsys, "mission", "--format", "csv")
    cell = next(csv.DictReader(io.StringIO(out)))["v_max"]
    assert len(cell.split(".")[1]) > 6


def test_global_options_after_subcommand(capsys):
    a = cli(capsys, "--format", "json", "mission")
    b = cli(capsys, "mission", "--format", "json")
    assert a == b and a[0] == 0
    assert len(json.loads(a[1])) == 4


def test_output_is_byte_identical(capsys):
    first = cli(capsys, "mission", "--format", "csv")
    second = cli(capsys, "mission", "--format", "csv")
    assert first == second


def test_vmax(capsys):
    code, out, _ = cli(capsys, "vmax", "--platform", "Jetson TX2", "--scheduling", "seq", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)
    assert row["response_s"] == pytest.approx(2 * 0.717)
    code, out, _ = cli(capsys, "vmax", "--platform", "Jetson TX2", "--format", "json")
    assert json.loads(out)[0]["v_max"] == pytest.approx(5.068, abs=1e-3)


def test_unknown_platform_is_usage_error(capsys):
    code, _, err = cli(capsys, "vmax", "--platform", "nosuch")
    assert code == 1
    assert "nosuch" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = cli(capsys, "mission", "--bogus")
    assert code == 1
    assert "usage" in err


def test_cannot_hover_is_domain_error(capsys, tmp_path):
    doc = {"platforms": [{"name": "anvil", "sa_latency_s": 0.2, "sa_throughput_hz": 5, "tdp_w": 20, "mass_kg": 2.0}]}
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(doc))
    code, _, err = cli(capsys, "--catalog", str(path), "vmax", "--platform", "anvil")
    assert code == 2
    assert "domain error" in err


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, _ = cli(capsys, "simulate", "--mission", str(tmp_path / "nope.json"), "--platform", "Jetson TX2")
    assert code == 1


def test_cig_paths(capsys):
    code, out, _ = cli(capsys, "cig", "--paths")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 9
    assert all(line.startswith(("[Performance]", "[Mass]", "[Power]")) for line in lines)


def test_cig_graph_file(capsys, tmp_path):
    from mavcodesign.cig import build_default_mav_graph

    path = tmp_path / "g.json"
    path.write_text(build_default_mav_graph().without_edge("Acceleration", "Power").dumps())
    code, out, _ = cli(capsys, "cig", "--paths", "--graph", str(path))
    assert code == 0 and len(out.strip().splitlines()) == 8


def test_simulate(capsys, tmp_path):
    mission = {"segments": [{"length_m": 100, "sdr": 2, "environment": "Outdoor", "min_gap_m": None, "replans": 1},
                            {"length_m": 50, "sdr": 4, "environment": "Indoor", "min_gap_m": 0.82, "replans": 2}]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mission))
    out_dir = tmp_path / "out"
    code, _, _ = cli(capsys, "simulate", "--mission", str(path), "--platform", "Jetson TX2",
                     "--knob", "dynamic:Outdoor=0.8,Indoor=0.15", "--out", str(out_dir))
    assert code == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert any(f.endswith(".csv") for f in files)
    summary = json.loads(next(p for p in out_dir.iterdir() if p.suffix == ".json").read_text())
    assert summary["status"] == "Completed"
    assert summary["distance_m"] == pytest.approx(150)


def test_simulate_no_path_reports_failure(capsys, tmp_path):
    mission = {"segments": [{"length_m": 50, "sdr": 4, "environment": "Indoor", "min_gap_m": 0.82, "replans": 1}]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mission))
    code, out, _ = cli(capsys, "simulate", "--mission", str(path), "--platform", "Jetson TX2",
                       "--knob", "static:0.8", "--format", "json")
    assert code == 0
    assert "NoPath" in out


def test_dse_csv_and_slice(capsys, constraints_file):
    code, out, _ = cli(capsys, "dse", "--grid", GRID, "--constraints", constraints_file)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["mass_kg", "power_w", "response_s"]
    assert len(rows) == 1 + 3 * 2 * 3
    code, out, _ = cli(capsys, "dse", "--grid", GRID, "--constraints", constraints_file, "--slice", "power_w=10")
    assert code == 0
    assert out.splitlines()[0] == "axis1,axis2,grad1,grad2,defined"
    assert len(out.strip().splitlines()) == 1 + 3 * 3


def test_dse_bad_grid(capsys, constraints_file):
    code, _, _ = cli(capsys, "dse", "--grid", "mass_kg=1:2", "--constraints", constraints_file)
    assert code in (1, 2)
    code, _, _ = cli(capsys, "dse", "--grid", GRID, "--constraints", constraints_file, "--slice", "colour=3")
    assert code in (1, 2)


@pytest.mark.parametrize("scenario", ["knob", "offload"])
def test_casestudy_passes(capsys, scenario):
    code, out, _ = cli(capsys, "casestudy", scenario)
    assert code == 0
    assert "FAIL" not in out
    assert out.count("PASS") >= 4


def test_cli_config_validates_format():
    with pytest.raises(UsageError):
        CliConfig(fmt="xml")


def test_env_catalog_used(capsys, tmp_path, monkeypatch):
    p = builtin_platforms()[-1]
    doc = {"platforms": [{"name": "solo", "sa_latency_s": p.sa_latency_s, "sa_throughput_hz": p.sa_throughput_hz,
                          "tdp_w": p.tdp_w, "mass_kg": p.mass_kg}]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    monkeypatch.setenv("MAVCODESIGN_CATALOG", str(path))
    code, out, _ = cli(capsys, "platforms", "--format", "csv")
    assert code == 0 and "solo" in out and "TX2" not in out
