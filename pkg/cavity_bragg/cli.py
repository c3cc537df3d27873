"""Command-line front end: parse a scenario, run it, write artifacts and a manifest."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError
from rich.console import Console

from . import __version__
from .artifacts import RunArtifactManager, resolve_output_dir
from .constants import (
    ERROR_BUDGET_HINT, EXIT_BUDGET_EXCEEDED, EXIT_OK, EXIT_VALIDATION_ERROR, MANIFEST_FILENAME,
)
from .display import (
    create_collapse_panel, create_run_panel, create_spectrum_table, create_summary_table,
)
from .dynamics import closed_form_lattice_intensity, predict_collapse_revival, reflected_intensity
from .errors import BudgetExceeded, CavityBraggError, DomainError
from .lattice_stats import (
    describe_law, even_odd_difference_law, gaussian_total_law, kolmogorov_distance,
    p_class_law, rayleigh_walk_law,
)
from .scenario import Scenario
from .serialization import write_csv
from .spectral import mean_square_frequency, sampled_spectrum, spectrum, spectrum_sweep
from .states import parse_spacing
from .twowell_exact import cat_state_diagnostics, coherent_input_photon_statistics, photon_statistics

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _compute_spectrum(scenario: Scenario):
    state, geometry = scenario.build_state(), scenario.geometry()
    if scenario.method == "sampled":
        return geometry, sampled_spectrum(state, geometry, count=scenario.count, seed=scenario.seed,
                                          binning=scenario.binning(), workers=scenario.workers)
    return geometry, spectrum(state, geometry, epsilon=scenario.epsilon, binning=scenario.binning(),
                              max_configurations=scenario.max_configurations,
                              workers=scenario.workers)


def _spectrum_summary(result) -> Dict[str, Any]:
    return {"mean": result.mean(), "std": result.std(), "lines": int(result.omegas.size),
            "total_mass": result.total_mass, "exact_mass": result.exact_mass}


def run_spectrum(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    _, result = _compute_spectrum(scenario)
    manager.save("spectrum.csv", result)
    console.print(create_spectrum_table(result))
    return _spectrum_summary(result)


def run_sweep(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    results = spectrum_sweep(scenario.build_state(), scenario.spacings, scenario.binning(),
                             scenario.epsilon, scenario.max_configurations, scenario.workers,
                             method=scenario.method, count=scenario.count, seed=scenario.seed)
    rows: List[tuple] = []
    summaries = {}
    for spacing, (_, result) in zip(scenario.spacings, results):
        rows.extend((spacing, omega, probability)
                    for omega, probability in zip(result.omegas, result.probabilities))
        summaries[spacing] = _spectrum_summary(result)
    manager.register(write_csv(manager.path_for("sweep.csv"), ["d", "omega", "probability"], rows))
    console.print(create_summary_table({d: s["mean"] for d, s in summaries.items()},
                                       title="MEAN FREQUENCY VS SPACING"))
    return {"spectra": summaries}


def run_intensity(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    times = scenario.times()
    if scenario.method == "analytic":
        series = closed_form_lattice_intensity(scenario.mean_atoms, scenario.num_sites, times)
        summary = {"closed_form": True}
    else:
        _, result = _compute_spectrum(scenario)
        series = reflected_intensity(result, times)
        summary = {"mean_frequency": result.mean(), "frequency_std": result.std(),
                   "revives_at_pi": result.has_integer_lines()}
    manager.save("intensity.csv", series)
    summary["final_intensity"] = float(series.values[-1])
    console.print(create_summary_table(summary, title="REFLECTED INTENSITY"))
    return summary


def run_photon_stats(scenario: Scenario, manager: RunArtifactManager,
                     console: Console) -> Dict[str, Any]:
    state, geometry, times = scenario.build_state(), scenario.geometry(), scenario.times()
    if scenario.photons is not None:
        stats = photon_statistics(state, geometry, scenario.photons, times, scenario.epsilon,
                                  scenario.max_configurations, scenario.workers)
    else:
        stats = coherent_input_photon_statistics(state, geometry, scenario.photon_mean, times,
                                                 scenario.epsilon, scenario.max_configurations,
                                                 scenario.workers)
    manager.save("photon_statistics.csv", stats)
    summary = {"mean_photons": stats.mean_photons, "truncated_mass": stats.truncated_mass}
    console.print(create_summary_table(summary, title="PHOTON STATISTICS"))
    return summary


def run_collapse(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    prediction = predict_collapse_revival(scenario.build_state(), scenario.geometry())
    manager.save("collapse.json", prediction, fmt="json")
    console.print(create_collapse_panel(prediction))
    return prediction.to_dict()


def run_laws(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    mean_N = scenario.mean_atoms
    if scenario.law == "p_class":
        geometry = scenario.geometry()
        result = p_class_law(scenario.state, mean_N, geometry.num_sites, geometry.root_order,
                             geometry.root_numerator,
                             method="sampled" if scenario.method == "sampled" else "exact",
                             count=scenario.count, seed=scenario.seed, workers=scenario.workers,
                             max_configurations=scenario.max_configurations)
        manager.save("p_class_law.csv", result)
        summary = {"mean": result.mean(), "std": result.std(),
                   "kolmogorov_to_rayleigh": kolmogorov_distance(result, rayleigh_walk_law(mean_N))}
    else:
        if scenario.law == "gaussian_total":
            law = gaussian_total_law(mean_N)
        elif scenario.law == "even_odd_difference":
            law = even_odd_difference_law(scenario.state,
                                          scenario.atoms if scenario.state == "sf2" else mean_N)
        else:
            law = rayleigh_walk_law(mean_N, mean_square_frequency(scenario.build_state(),
                                                                  scenario.geometry()))
        manager.save(f"{scenario.law}_law.csv", law)
        summary = describe_law(law)
    console.print(create_summary_table({k: v for k, v in summary.items() if k != "params"},
                                       title=f"LAW: {scenario.law}"))
    return summary


def run_qfunction(scenario: Scenario, manager: RunArtifactManager, console: Console) -> Dict[str, Any]:
    diagnostics = cat_state_diagnostics(scenario.build_state(), scenario.geometry(), scenario.photons)
    manager.save("qfunction.csv", diagnostics)
    manager.save("cat_state.json", diagnostics, fmt="json")
    summary = diagnostics.to_dict()
    console.print(create_summary_table({"q_max_abs_error": diagnostics.max_abs_error,
                                        "unconditional_purity": diagnostics.unconditional_purity},
                                       title="CAT STATE"))
    return summary


MODE_RUNNERS: Dict[str, Callable[[Scenario, RunArtifactManager, Console], Dict[str, Any]]] = {
    "spectrum": run_spectrum,
    "sweep": run_sweep,
    "intensity": run_intensity,
    "photon-stats": run_photon_stats,
    "collapse": run_collapse,
    "laws": run_laws,
    "qfunction": run_qfunction,
}


def run(scenario: Scenario, output_dir: Optional[Path] = None,
        console: Optional[Console] = None) -> int:
    """Run a validated scenario and return the process exit code."""
    console = console or Console(stderr=True)
    try:
        manager = RunArtifactManager(scenario.run_name(), output_dir)
        results = MODE_RUNNERS[scenario.mode](scenario, manager, console)
        manager.write_manifest(scenario.model_dump(mode='json'), __version__, results)
    except BudgetExceeded as e:
        logger.error(f"{e}: {ERROR_BUDGET_HINT}")
        return EXIT_BUDGET_EXCEEDED
    except CavityBraggError as e:
        logger.error(f"Invalid scenario: {e}")
        return EXIT_VALIDATION_ERROR
    console.print(create_run_panel(manager.run_dir, manager.artifacts, manager.elapsed))
    return EXIT_OK


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _spacing_list(text: str) -> List[str]:
    """Comma-separated spacings; an entry start:stop:count expands to an evenly spaced range."""
    spacings: List[str] = []
    for item in _str_list(text):
        if ":" not in item:
            spacings.append(item)
            continue
        try:
            start, stop, count = item.split(":")
            low, high, points = float(parse_spacing(start)), float(parse_spacing(stop)), int(count)
        except (ValueError, DomainError):
            raise argparse.ArgumentTypeError(f"expected start:stop:count, got '{item}'")
        if points < 2 or not 0 < low < high:
            raise argparse.ArgumentTypeError(
                f"range '{item}' needs 0 < start < stop and count >= 2")
        spacings.extend(f"{value:.12g}" for value in np.linspace(low, high, points))
    return spacings


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", choices=["mott", "sf1", "sf2"], required=True,
                        help="Atomic state: Mott insulator, coherent or number-conserving superfluid")
    common.add_argument("--occupations", type=_int_list, help="Mott occupations, e.g. 9,9")
    common.add_argument("--mean-n", type=float, help="Total mean atom number (sf1)")
    common.add_argument("--alphas", type=_str_list, help="Coherent amplitudes per site, e.g. 3,3")
    common.add_argument("--atoms", type=int, help="Atom number (sf2)")
    common.add_argument("--sites", type=int, help="Number of lattice sites M")
    common.add_argument("--spacing", default="1/2",
                        help="Lattice spacing in units of lambda: 'q/r' or a decimal")
    common.add_argument("--photons", type=int, help="Fock photon number n_tot")
    common.add_argument("--photon-mean", type=float, help="Coherent +k photon mean")
    common.add_argument("--t-max", type=float, help="End of the time grid (units 1/g)")
    common.add_argument("--steps", type=int, help="Number of time points")
    common.add_argument("--method", choices=["exact", "sampled", "analytic"], default="exact",
                        help="Exact enumeration, Monte-Carlo sampling or analytic law")
    common.add_argument("--count", type=int, help="Monte-Carlo sample count")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--epsilon", type=float, help="Truncated probability mass bound")
    common.add_argument("--bin-width", type=float, help="Histogram bin width (units of g)")
    common.add_argument("--max-configurations", type=int, help="Enumeration budget")
    common.add_argument("--output-dir", type=Path, default=None,
                        help="Output directory (default: $CAVITY_BRAGG_OUTPUT_DIR or ./results)")
    common.add_argument("--workers", type=int, help="Worker threads")
    common.add_argument("--json", action="store_true", help="Print the run manifest as JSON")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings only")

    parser = argparse.ArgumentParser(prog="cavity-bragg",
                                     description="Bragg scattering of quantized cavity light off lattice atoms")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="mode", required=True)
    subparsers.add_parser("spectrum", parents=[common], help="Spectrum of the mode-coupling operator")
    sweep = subparsers.add_parser("sweep", parents=[common], help="Spectra for several spacings")
    sweep.add_argument("--spacings", type=_spacing_list, required=True,
                       help="e.g. 1/2,1/4,1/10 or a range start:stop:count such as 0.05:0.5:46")
    subparsers.add_parser("intensity", parents=[common], help="Reflected intensity vs time")
    subparsers.add_parser("photon-stats", parents=[common], help="Reflected photon number law (M = 2)")
    subparsers.add_parser("collapse", parents=[common], help="Collapse and revival prediction")
    laws = subparsers.add_parser("laws", parents=[common], help="Large-lattice analytic laws")
    laws.add_argument("--law", required=True,
                      choices=["gaussian_total", "even_odd_difference", "p_class", "rayleigh_walk"])
    subparsers.add_parser("qfunction", parents=[common], help="Atomic Q-function of the cat state")
    return parser


SCENARIO_FIELDS = ("state", "occupations", "mean_n", "alphas", "atoms", "sites", "spacing",
                   "spacings", "photons", "photon_mean", "t_max", "steps", "method", "count",
                   "seed", "epsilon", "bin_width", "max_configurations", "workers", "law")


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    fields = {name: getattr(args, name) for name in SCENARIO_FIELDS
              if getattr(args, name, None) is not None}
    return Scenario(mode=args.mode, **fields)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point with command line arguments."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        scenario = scenario_from_args(args)
    except ValidationError as e:
        logger.error(f"Invalid scenario: {e}")
        return EXIT_VALIDATION_ERROR

    console = Console(stderr=True, quiet=args.quiet or args.json)
    status = run(scenario, args.output_dir, console)
    if status == EXIT_OK and args.json:
        manifest = resolve_output_dir(args.output_dir) / scenario.run_name() / MANIFEST_FILENAME
        Console().print_json(manifest.read_text(encoding='utf-8'))
    return status


if __name__ == "__main__":
    sys.exit(main())
