"""
Tests for the command-line front end.

Tests include:
- Argument parsing and exit codes
- One run per mode with its artifacts and manifest
- Byte-identical reruns
"""

import json
import math

import pytest
from rich.console import Console

from cavity_bragg import __version__
from cavity_bragg.cli import build_parser, main, run, scenario_from_args
from cavity_bragg.constants import EXIT_BUDGET_EXCEEDED, EXIT_OK, EXIT_VALIDATION_ERROR


def run_dir_for(output_dir, mode):
    """The single run directory a mode produced under output_dir."""
    directories = sorted(output_dir.glob(f"{mode}_*"))
    assert len(directories) == 1
    return directories[0]


def invoke(output_dir, *args):
    return main([*args, "--output-dir", str(output_dir), "--quiet"])


class TestParser:
    """Test suite for argument parsing."""

    def test_scenario_from_args(self):
        args = build_parser().parse_args(
            ["sweep", "--state", "sf2", "--atoms", "18", "--sites", "2", "--spacings", "1/2,1/4",
             "--seed", "3"])
        scenario = scenario_from_args(args)
        assert scenario.mode == "sweep"
        assert scenario.spacings == ["1/2", "1/4"]
        assert scenario.seed == 3
        assert scenario.steps > 2

    def test_list_arguments(self):
        args = build_parser().parse_args(
            ["spectrum", "--state", "sf1", "--alphas", "3, 2+1j", "--spacing", "1/10"])
        assert args.alphas == ["3", "2+1j"]

    def test_missing_state_is_a_usage_error(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["spectrum"])
        assert info.value.code == 2

    def test_unknown_mode(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["bogus", "--state", "mott"])

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_spacing_range(self):
        args = build_parser().parse_args(
            ["sweep", "--state", "sf2", "--atoms", "6", "--sites", "2", "--spacings", "0.1:0.5:5"])
        assert args.spacings == ["0.1", "0.2", "0.3", "0.4", "0.5"]

    def test_spacing_range_mixed_with_fractions(self):
        args = build_parser().parse_args(
            ["sweep", "--state", "sf2", "--atoms", "6", "--sites", "2",
             "--spacings", "1/4, 1/10:1/5:3"])
        assert args.spacings == ["1/4", "0.1", "0.15", "0.2"]
        assert scenario_from_args(args).spacings == ["1/4", "0.1", "0.15", "0.2"]

    @pytest.mark.edge_cases
    @pytest.mark.parametrize("text", ["0.1:0.5", "0.5:0.1:3", "0.1:0.5:1", "0.1:x:3", "0:0.5:3"])
    def test_invalid_spacing_range(self, text):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(
                ["sweep", "--state", "sf2", "--atoms", "6", "--sites", "2", "--spacings", text])
        assert info.value.code == 2


@pytest.mark.edge_cases
class TestExitCodes:
    """Test suite for exit codes."""

    def test_success(self, output_dir):
        assert invoke(output_dir, "spectrum", "--state", "mott", "--occupations", "9,9") == EXIT_OK

    def test_validation_error(self, output_dir):
        assert invoke(output_dir, "spectrum", "--state", "sf2", "--atoms", "20") == EXIT_VALIDATION_ERROR

    def test_runtime_domain_error(self, output_dir):
        status = invoke(output_dir, "collapse", "--state", "sf1", "--alphas", "1,2,3", "--spacing", "1/10")
        assert status == EXIT_VALIDATION_ERROR

    def test_budget_exceeded(self, output_dir):
        status = invoke(output_dir, "spectrum", "--state", "sf2", "--atoms", "20", "--sites", "10",
                        "--spacing", "0.1414", "--max-configurations", "1000")
        assert status == EXIT_BUDGET_EXCEEDED


@pytest.mark.end_to_end
class TestModes:
    """One run per mode."""

    def test_spectrum(self, output_dir):
        invoke(output_dir, "spectrum", "--state", "mott", "--occupations", "9,9")
        run_dir = run_dir_for(output_dir, "spectrum")
        assert (run_dir / "spectrum.csv").read_text() == "omega,probability\n18,1\n"
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["artifacts"] == ["spectrum.csv"]
        assert manifest["version"] == __version__
        assert manifest["scenario"]["occupations"] == [9, 9]
        assert manifest["results"]["mean"] == 18.0

    def test_sweep(self, output_dir):
        invoke(output_dir, "sweep", "--state", "sf2", "--atoms", "6", "--sites", "2",
               "--spacings", "1/2,1/4")
        lines = (run_dir_for(output_dir, "sweep") / "sweep.csv").read_text().splitlines()
        assert lines[0] == "d,omega,probability"
        assert lines[1] == "1/2,6,1"
        assert all(line.startswith("1/4,") for line in lines[2:])
        assert len(lines) == 2 + 4

    def test_sweep_over_a_range(self, output_dir):
        status = invoke(output_dir, "sweep", "--state", "sf1", "--alphas", "1,1", "--spacings",
                        "0.1:0.5:5", "--method", "sampled", "--count", "500")
        assert status == EXIT_OK
        manifest = json.loads((run_dir_for(output_dir, "sweep") / "manifest.json").read_text())
        assert list(manifest["results"]["spectra"]) == ["0.1", "0.2", "0.3", "0.4", "0.5"]
        assert manifest["results"]["spectra"]["0.3"]["total_mass"] == pytest.approx(1.0)

    def test_intensity_exact(self, output_dir):
        invoke(output_dir, "intensity", "--state", "mott", "--occupations", "9,9",
               "--t-max", "1.0", "--steps", "11")
        lines = (run_dir_for(output_dir, "intensity") / "intensity.csv").read_text().splitlines()
        assert lines[0] == "t,intensity"
        assert len(lines) == 12
        t, value = map(float, lines[5].split(","))
        assert value == pytest.approx(math.sin(18 * t) ** 2, abs=1e-12)
        manifest = json.loads((run_dir_for(output_dir, "intensity") / "manifest.json").read_text())
        assert manifest["results"]["revives_at_pi"] is True

    def test_intensity_analytic(self, output_dir):
        status = invoke(output_dir, "intensity", "--state", "sf1", "--mean-n", "40", "--sites", "40",
                        "--spacing", "1/10", "--method", "analytic", "--steps", "11")
        assert status == EXIT_OK
        manifest = json.loads((run_dir_for(output_dir, "intensity") / "manifest.json").read_text())
        assert manifest["results"]["closed_form"] is True

    def test_photon_stats(self, output_dir):
        invoke(output_dir, "photon-stats", "--state", "sf2", "--atoms", "6", "--sites", "2",
               "--spacing", "1/4", "--photons", "3", "--steps", "11")
        lines = (run_dir_for(output_dir, "photon-stats") / "photon_statistics.csv").read_text().splitlines()
        assert lines[0] == "t,n_minus_k,probability"
        assert len(lines) == 1 + 11 * 4

    def test_coherent_photon_input(self, output_dir):
        status = invoke(output_dir, "photon-stats", "--state", "mott", "--occupations", "2,1",
                        "--spacing", "1/4", "--photon-mean", "2.0", "--steps", "5")
        assert status == EXIT_OK
        manifest = json.loads((run_dir_for(output_dir, "photon-stats") / "manifest.json").read_text())
        assert manifest["results"]["mean_photons"] == pytest.approx(2.0, rel=1e-6)

    def test_collapse(self, output_dir):
        invoke(output_dir, "collapse", "--state", "sf1", "--alphas", "3,3")
        prediction = json.loads((run_dir_for(output_dir, "collapse") / "collapse.json").read_text())
        assert prediction["collapse_rate"] == pytest.approx(2 * math.sqrt(18))
        assert prediction["revival_time"] == pytest.approx(math.pi)

    def test_analytic_law(self, output_dir):
        invoke(output_dir, "laws", "--state", "sf1", "--mean-n", "40", "--sites", "40",
               "--law", "rayleigh_walk")
        lines = (run_dir_for(output_dir, "laws") / "rayleigh_walk_law.csv").read_text().splitlines()
        assert lines[:3] == ["# kind=continuous", "# law=rayleigh_walk", "x,density"]

    def test_random_walk_law_matches_mean_square_frequency(self, output_dir):
        invoke(output_dir, "laws", "--state", "sf2", "--atoms", "18", "--sites", "10",
               "--spacing", "0.14142135623730951", "--law", "rayleigh_walk")
        manifest = json.loads((run_dir_for(output_dir, "laws") / "manifest.json").read_text())
        assert manifest["results"]["params"]["mean_N"] == 18.0
        assert manifest["results"]["params"]["second_moment"] == pytest.approx(19.32, abs=0.01)

    def test_p_class_law(self, output_dir):
        invoke(output_dir, "laws", "--state", "sf2", "--atoms", "12", "--sites", "10",
               "--spacing", "1/10", "--law", "p_class")
        run_dir = run_dir_for(output_dir, "laws")
        assert (run_dir / "p_class_law.csv").exists()
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert 0.0 <= manifest["results"]["kolmogorov_to_rayleigh"] <= 1.0

    def test_qfunction(self, output_dir):
        invoke(output_dir, "qfunction", "--state", "sf1", "--alphas", "2,2", "--spacing", "1/4",
               "--photons", "2")
        run_dir = run_dir_for(output_dir, "qfunction")
        assert (run_dir / "qfunction.csv").read_text().startswith("re,im,q\n")
        diagnostics = json.loads((run_dir / "cat_state.json").read_text())
        assert diagnostics["q_max_abs_error"] < 1e-3

    def test_json_output(self, output_dir, capsys):
        status = main(["collapse", "--state", "mott", "--occupations", "9,9",
                       "--output-dir", str(output_dir), "--json"])
        assert status == EXIT_OK
        assert '"run_name"' in capsys.readouterr().out


@pytest.mark.end_to_end
class TestReproducibility:
    """Reruns of the same scenario produce identical artifacts."""

    def test_sampled_spectrum_rerun_is_byte_identical(self, output_dir):
        args = ("spectrum", "--state", "sf2", "--atoms", "18", "--sites", "10", "--spacing", "0.1414",
                "--method", "sampled", "--count", "2000", "--seed", "7", "--workers", "2")
        invoke(output_dir, *args)
        first = (run_dir_for(output_dir, "spectrum") / "spectrum.csv").read_bytes()
        invoke(output_dir, *args)
        second = (run_dir_for(output_dir, "spectrum") / "spectrum.csv").read_bytes()
        assert first == second

    def test_run_accepts_scenario_directly(self, make_scenario, tmp_path):
        scenario = make_scenario(mode="collapse")
        assert run(scenario, tmp_path, Console(quiet=True)) == EXIT_OK
        assert (tmp_path / scenario.run_name() / "collapse.json").exists()
