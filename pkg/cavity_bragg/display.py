"""Display utilities for cavity-bragg console summaries."""

from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.panel import Panel
from rich.table import Table

from .interfaces import CollapseRevivalPrediction, Spectrum


def create_spectrum_table(spectrum: Spectrum, title: str = "SPECTRUM",
                          max_rows: int = 15) -> Table:
    """Create a Rich table with the most probable spectral lines.

    Args:
        spectrum: Spectrum to display
        title: Table title
        max_rows: Number of lines shown, by decreasing probability

    Returns:
        Rich Table object
    """
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("omega/g", style="bold", justify="right")
    table.add_column("Probability", style="cyan", justify="right")

    order = spectrum.probabilities.argsort()[::-1][:max_rows]
    for index in sorted(order, key=lambda i: spectrum.omegas[i]):
        table.add_row(f"{spectrum.omegas[index]:.6g}", f"{spectrum.probabilities[index]:.6g}")
    if spectrum.omegas.size > max_rows:
        table.caption = f"{max_rows} of {spectrum.omegas.size} lines"
    return table


def create_collapse_panel(prediction: CollapseRevivalPrediction) -> Panel:
    """Create a Rich panel for a collapse/revival prediction."""
    text = f"Regime: {prediction.regime} ({prediction.spacing_class}, {prediction.state_kind})\n"
    text += f"Collapse rate: {prediction.collapse_rate:.6g} g\n"
    if prediction.collapse_time is not None:
        text += f"Collapse time: {prediction.collapse_time:.6g} / g\n"
    if prediction.revival_time is not None:
        text += f"Revival time: {prediction.revival_time:.6g} / g\n"
    else:
        text += "Revival: none (incommensurate spectrum)\n"
    for key, value in prediction.notes.items():
        text += f"{key}: {value}\n"
    return Panel(text.rstrip(), title="Collapse / Revival", border_style="blue")


def create_summary_table(summary: Dict[str, Any], title: str = "RESULTS") -> Table:
    """Key/value table of scalar results."""
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", style="cyan", justify="right")
    for key, value in summary.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    return table


def create_run_panel(run_dir: Path, artifacts: List[Path],
                     elapsed_time: Optional[float] = None) -> Panel:
    """Create a Rich panel listing the artifacts of a run."""
    text = f"Run directory: {run_dir}\n"
    if elapsed_time:
        text += f"Elapsed: {elapsed_time:.2f}s\n"
    for path in artifacts:
        text += f"  {path.name}\n"
    return Panel(text.rstrip(), title="Artifacts", border_style="green")
