"""Config parsing, artifact layout, exit codes, and sweep behavior."""

import dataclasses
import math
import subprocess
import sys

import pytest

from toruswave.calibration import calibrate, load_constants, save_constants
from toruswave.cli import (
    CHECK_IDS,
    CONSTANTS_ENV,
    ConfigError,
    build_scenario,
    load_config,
    main,
    parse_config,
    run_scenario,
    sweep,
)
from toruswave.estimates import BootstrapParams, epsilon_budgets, h_threshold
from toruswave.fields import GridSpec


@pytest.fixture(scope="module")
def constants_file(tmp_path_factory):
    """Saved 8-cube calibration so scenario tests skip the on-the-fly path."""
    constants = calibrate(GridSpec(8), 3, seed=2024, n_fields=12)
    path = tmp_path_factory.mktemp("calibration") / "constants8.txt"
    save_constants(constants, path)
    return path


BASE_LINES = {
    "format": "format = toruswave-scenario-1",
    "name": "name = cli-test",
    "grid.n": "grid.n = 8",
    "params.omega": "params.omega = 0.5",
    "params.k_eos": "params.k_eos = 0.66666666666666663",
    "source.preset": "source.preset = uniform",
    "source.amplitude": "source.amplitude = 0.001",
    "initial.preset": "initial.preset = single-mode",
    "initial.mode": "initial.mode = 2,2,1",
    "initial.e_m0": "initial.e_m0 = 0.05",
    "solver.dt": "solver.dt = 0.05",
    "solver.t_end": "solver.t_end = 4",
    "solver.sample_every": "solver.sample_every = 4",
}


def make_cfg(tmp_path, constants_file=None, drop=(), **overrides):
    """Write a small forced scenario, overriding or dropping schema lines."""
    lines = dict(BASE_LINES)
    for key, value in overrides.items():
        lines[key] = f"{key} = {value}"
    for key in drop:
        lines.pop(key, None)
    if constants_file is not None:
        lines["constants.path"] = f"constants.path = {constants_file}"
    path = tmp_path / "scenario.cfg"
    path.write_text("\n".join(lines.values()) + "\n")
    return path


def read_echo(out_dir):
    entries = {}
    for line in (out_dir / "resolved.cfg").read_text().splitlines():
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


class TestParseConfig:
    def test_round_trips_known_keys(self):
        entries = parse_config("format = toruswave-scenario-1\ngrid.n = 8\n")
        assert entries == {"format": "toruswave-scenario-1", "grid.n": "8"}

    def test_skips_blanks_and_comments(self):
        entries = parse_config("\n# a comment\nname = x\n\n")
        assert entries == {"name": "x"}

    def test_lists_every_unknown_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("bogus.key = 1\nname = x\nanother = 2\n")
        assert "'bogus.key'" in str(err.value)
        assert "'another'" in str(err.value)
        assert "line 1" in str(err.value)
        assert "line 3" in str(err.value)

    def test_rejects_duplicates(self):
        with pytest.raises(ConfigError, match="duplicate key 'name'"):
            parse_config("name = a\nname = b\n")

    def test_rejects_lines_without_equals(self):
        with pytest.raises(ConfigError, match="expected 'key = value'"):
            parse_config("just some words\n")


class TestLoadConfig:
    def test_bundled_scenarios_resolve(self):
        assert load_config("flagship")["name"] == "flagship"
        assert load_config("zero")["name"] == "zero"

    def test_missing_reference_raises(self):
        with pytest.raises(ConfigError, match="no bundled scenario"):
            load_config("does-not-exist")


class TestBuildScenario:
    def test_wrong_format_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, format="something-else")
        with pytest.raises(ConfigError, match="format"):
            build_scenario(load_config(str(cfg)))

    def test_zero_mode_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, **{"initial.mode": "0,0,0"})
        with pytest.raises(ConfigError, match="zero mode"):
            build_scenario(load_config(str(cfg)))

    def test_negative_e_m0_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, **{"initial.e_m0": "-0.05"})
        with pytest.raises(ConfigError, match="must be positive"):
            build_scenario(load_config(str(cfg)))

    def test_e_m0_on_zero_preset_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(
            tmp_path, constants_file, drop=("initial.mode",),
            **{"initial.preset": "zero", "initial.e_m0": "0.05"},
        )
        with pytest.raises(ConfigError, match="nothing to scale"):
            build_scenario(load_config(str(cfg)))

    def test_exponents_require_kappa_and_mu_without_k_eos(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, drop=("params.k_eos",))
        with pytest.raises(ConfigError, match="params.kappa"):
            build_scenario(load_config(str(cfg)))

    def test_malformed_budget_fraction_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, **{"source.amplitude": "budget:lots"})
        with pytest.raises(ConfigError, match="budget:F"):
            build_scenario(load_config(str(cfg)))

    def test_auto_bootstrap_values(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        scenario = build_scenario(load_config(str(cfg)))
        constants = load_constants(constants_file)
        bp = scenario.bootstrap
        e0 = bp.e_m0
        assert e0 == pytest.approx(0.05, rel=1e-12)
        assert bp.t1 == pytest.approx(2.0)
        assert bp.eps_prime == pytest.approx(0.5 * h_threshold(0.5, bp.t1))
        assert bp.delta == pytest.approx(e0 / 0.5)
        assert bp.delta_prime == pytest.approx(
            constants.c_sobolev * math.sqrt(2.0) * e0
        )

    def test_budget_amplitude_is_fraction_of_min_budget(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, **{"source.amplitude": "budget:0.5"})
        scenario = build_scenario(load_config(str(cfg)))
        eps1, eps2 = epsilon_budgets(scenario.bootstrap, scenario.params.omega)
        assert scenario.source.amplitude == pytest.approx(
            0.5 * min(eps1, eps2), rel=1e-15
        )
        assert scenario.source.amplitude > 0.0

    def test_explicit_bootstrap_values_win(self, tmp_path, constants_file):
        cfg = make_cfg(
            tmp_path, constants_file,
            **{"bootstrap.t1": "1.5", "bootstrap.c_delta": "2.25"},
        )
        scenario = build_scenario(load_config(str(cfg)))
        assert scenario.bootstrap.t1 == 1.5
        assert scenario.bootstrap.c_delta == 2.25


class TestRunScenario:
    def test_zero_scenario_all_artifacts_and_exit_0(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert run_scenario("zero", out) == 0
        for artifact in (
            "timeseries.csv", "report.txt", "report.csv", "resolved.cfg", "constants.txt",
        ):
            assert (out / artifact).is_file()
        lines = (out / "timeseries.csv").read_text().splitlines()
        assert lines[0] == "# toruswave-timeseries-1"
        assert lines[1].split(",") == [
            "t", "Em", "Em_sq", "E_std_sq", "u_Hm", "ut_Hm", "F_Hm",
            "u_mean", "F_mean", "u_min", "bootstrap_ok",
        ]
        for row in lines[2:]:
            cells = row.split(",")
            assert all(float(c) == 0.0 for c in cells[1:10])
            assert cells[10] == "1"
        assert "all_passed = true" in capsys.readouterr().out

    def test_unknown_key_exits_3_and_names_it(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("format = toruswave-scenario-1\nshiny.knob = 7\n")
        assert run_scenario(str(cfg), tmp_path / "out") == 3
        assert "'shiny.knob'" in capsys.readouterr().err

    def test_resolved_echo_reruns_bit_identically(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        first = tmp_path / "first"
        again = tmp_path / "again"
        assert run_scenario(str(cfg), first) == 0
        assert run_scenario(str(first / "resolved.cfg"), again) == 0
        assert (first / "timeseries.csv").read_bytes() == (
            again / "timeseries.csv"
        ).read_bytes()

    def test_overrides_land_in_echo(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file, **{"source.preset": "band"})
        out = tmp_path / "out"
        assert run_scenario(str(cfg), out, seed=9, dt=0.025, grid_n=8) == 0
        echo = read_echo(out)
        assert echo["source.seed"] == "9"
        assert echo["solver.dt"] == "0.025000000000000001"
        assert echo["grid.n"] == "8"

    def test_breakdown_exits_2(self, tmp_path, constants_file):
        cfg = make_cfg(
            tmp_path, constants_file,
            drop=("params.k_eos", "initial.mode", "initial.e_m0"),
            **{
                "params.kappa": "0.25",
                "params.mu": "-0.5",
                "source.amplitude": "0.01",
                "initial.preset": "coefficients",
                "initial.u0_coeffs": "0,0,0,-0.9,0",
                "initial.u1_coeffs": "0,0,0,-0.5,0",
                "bootstrap.c_delta": "2.0",
                "bootstrap.delta_prime": "0.9",
                "solver.t_end": "10",
            },
        )
        out = tmp_path / "out"
        assert run_scenario(str(cfg), out) == 2
        assert "breakdown = t = " in (out / "report.txt").read_text()

    def test_failing_check_exits_1(self, tmp_path, constants_file):
        # forcing far beyond the budget, nothing breaks but the bound is lost
        cfg = make_cfg(
            tmp_path, constants_file,
            drop=("params.k_eos",),
            **{
                "params.kappa": "0.3",
                "params.mu": "1.0",
                "source.amplitude": "50",
                "solver.dt": "0.01",
                "solver.t_end": "2",
                "solver.sample_every": "10",
            },
        )
        out = tmp_path / "out"
        assert run_scenario(str(cfg), out) == 1
        assert "bootstrap: FAIL" in (out / "report.txt").read_text()

    def test_env_var_supplies_constants(self, tmp_path, constants_file, monkeypatch):
        base = load_constants(constants_file)
        tagged = dataclasses.replace(base, c_algebra=0.123456789)
        tagged_path = tmp_path / "tagged.txt"
        save_constants(tagged, tagged_path)
        monkeypatch.setenv(CONSTANTS_ENV, str(tagged_path))
        cfg = make_cfg(tmp_path)  # no constants.path of its own
        out = tmp_path / "out"
        assert run_scenario(str(cfg), out) == 0
        assert load_constants(out / "constants.txt").c_algebra == 0.123456789

    def test_mismatched_constants_grid_exits_3(self, tmp_path, constants_file, capsys):
        cfg = make_cfg(tmp_path, constants_file, **{"grid.n": "16"})
        assert run_scenario(str(cfg), tmp_path / "out") == 3
        assert "calibrated for n = 8" in capsys.readouterr().err


class TestSweep:
    def test_two_axes_ordered_product(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        out = tmp_path / "sweep"
        code = sweep(
            str(cfg),
            ["params.omega=0.4,0.5", "initial.e_m0=0.05,0.1"],
            out, jobs=1,
        )
        assert code == 0
        lines = (out / "summary.csv").read_text().splitlines()
        assert lines[0] == "# toruswave-sweep-1"
        header = lines[1].split(",")
        assert header[:6] == [
            "point", "params.omega", "initial.e_m0",
            "exit_code", "all_passed", "t_max_empirical",
        ]
        assert header[6:] == list(CHECK_IDS)
        rows = [line.split(",") for line in lines[2:]]
        assert [r[0] for r in rows] == [f"point-{i:03d}" for i in range(4)]
        assert [(r[1], r[2]) for r in rows] == [
            ("0.4", "0.05"), ("0.4", "0.1"), ("0.5", "0.05"), ("0.5", "0.1"),
        ]
        assert all(r[3] == "0" and r[4] == "true" for r in rows)
        for i in range(4):
            assert (out / f"point-{i:03d}" / "timeseries.csv").is_file()

    def test_parallel_matches_serial(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        axes = ["initial.e_m0=0.05,0.1"]
        assert sweep(str(cfg), axes, serial, jobs=1) == 0
        assert sweep(str(cfg), axes, parallel, jobs=2) == 0
        assert (serial / "summary.csv").read_bytes() == (
            parallel / "summary.csv"
        ).read_bytes()

    def test_single_point_matches_plain_run(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        run_out = tmp_path / "run"
        sweep_out = tmp_path / "sweep"
        assert run_scenario(str(cfg), run_out) == 0
        assert sweep(str(cfg), ["params.omega=0.5"], sweep_out, jobs=1) == 0
        assert (run_out / "timeseries.csv").read_bytes() == (
            sweep_out / "point-000" / "timeseries.csv"
        ).read_bytes()

    def test_invalid_axis_exits_3(self, tmp_path, constants_file, capsys):
        cfg = make_cfg(tmp_path, constants_file)
        assert sweep(str(cfg), ["solver.dt=0.1"], tmp_path / "out") == 3
        assert "not sweepable" in capsys.readouterr().err

    def test_three_axes_rejected(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        axes = ["params.omega=0.5", "initial.e_m0=0.05", "source.amplitude=0"]
        assert sweep(str(cfg), axes, tmp_path / "out") == 3

    def test_continues_past_failing_points(self, tmp_path, constants_file):
        cfg = make_cfg(tmp_path, constants_file)
        out = tmp_path / "sweep"
        code = sweep(str(cfg), ["source.amplitude=0.001,50"], out, jobs=1)
        assert code == 1
        lines = (out / "summary.csv").read_text().splitlines()
        rows = [line.split(",") for line in lines[2:]]
        assert len(rows) == 2
        assert rows[0][2] == "0"
        assert rows[1][2] == "1"
        assert (out / "point-001" / "report.txt").is_file()


class TestMainEntry:
    def test_run_subcommand(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "zero", "--out", str(out)]) == 0
        assert (out / "report.txt").is_file()

    def test_module_invocation(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "toruswave", "run", "zero",
             "--out", str(tmp_path / "out")],
            capture_output=True, text=True, timeout=300,
        )
        assert result.returncode == 0
        assert "all_passed = true" in result.stdout

    def test_sweep_requires_axis(self, capsys):
        with pytest.raises(SystemExit):
            main(["sweep", "zero"])
