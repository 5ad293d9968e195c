# this_file: fracsis/src/fracsis/cli.py
"""Command-line interface for fracsis."""

from __future__ import annotations

import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import fire
from loguru import logger
from rich.console import Console
from rich.table import Table

from fracsis.common.config import ExperimentKind, load_config
from fracsis.common.errors import ConfigurationError, FracsisError, NumericalError, ParameterError
from fracsis.common.types import ConvergenceReport, StationaryField, SweepRow, TrajectoryRecord
from fracsis.control import summarize_trajectory
from fracsis.harness import ProfilesResult, resolve_output_dir, run_experiment

console = Console()

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def configure_logging(quiet: bool = False, verbose: bool = False) -> None:
    logger.remove()
    level = "WARNING" if quiet else "DEBUG" if verbose else "INFO"
    logger.add(sys.stderr, level=level)


def exit_code_for(error: Exception) -> int:
    """2 for configuration and parameter problems, 3 for numerical failures, 1 otherwise."""
    if isinstance(error, ConfigurationError | ParameterError):
        return EXIT_CONFIG
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return 1


class FracsisCLI:
    """Fractional SIS optimal control: HJB solves, trajectories and convergence studies."""

    def __init__(self, out: str | None = None, quiet: bool = False, verbose: bool = False):
        """Set global options.

        Args:
            out: Output directory for all artifacts (overrides run.out).
            quiet: Only log warnings and errors; hide progress bars.
            verbose: Log debug messages.
        """
        self._out = Path(out) if out else None
        self._quiet = quiet
        configure_logging(quiet=quiet, verbose=verbose)

    def solve(self, config: str):
        """Solve the HJB equation and write value/control profiles at run.snapshot_times."""
        self._execute(config, ExperimentKind.PROFILES, self._show_profiles)

    def trajectory(self, config: str):
        """Synthesize controlled and uncontrolled trajectories from run.initial_states."""
        self._execute(config, ExperimentKind.TRAJECTORIES, self._show_trajectories)

    def converge(self, config: str):
        """Grid-refinement study of u(·, T) against the stationary solution."""
        self._execute(config, ExperimentKind.CONVERGE, self._show_convergence)

    def sweep(self, config: str):
        """Sup-norms of u and Du at the final time over run.alphas × run.domains."""
        self._execute(config, ExperimentKind.SWEEP, self._show_sweep)

    def stationary(self, config: str):
        """Export the stationary solution (and the horizon study if run.horizons is set)."""
        self._execute(config, ExperimentKind.STATIONARY, self._show_stationary)

    def version(self):
        """Show version information."""
        from fracsis import __version__

        console.print(f"fracsis version {__version__}")

    def _execute(self, config: str, kind: ExperimentKind, show: Callable[[Any, Path], None]) -> None:
        try:
            cfg = load_config(config, kind=kind)
            out = resolve_output_dir(cfg, self._out)
            result = run_experiment(cfg, out, show_progress=not self._quiet)
        except FracsisError as e:
            console.print(f"[red]Error: {e.message}[/red]")
            logger.debug(f"details: {e.details}")
            sys.exit(exit_code_for(e))
        show(result, out)

    def _show_profiles(self, result: ProfilesResult, out: Path) -> None:
        grid = result.field.grid
        table = Table(title="Value profiles")
        table.add_column("t", style="cyan")
        table.add_column("max U", style="green")
        table.add_column("kink at", style="yellow")
        for level, values in sorted(result.field.snapshots.items()):
            kink = result.kinks.get(level)
            where = f"{kink.position:.3f} (x{kink.spike_ratio:.1f})" if kink and kink.present() else "-"
            table.add_row(f"{level * grid.dt:g}", f"{values.max():.6g}", where)
        console.print(table)
        console.print(f"Max CFL ratio: {result.field.cfl.max_ratio:.3f}")
        console.print(f"[green]{len(result.files)} files written to {out}[/green]")

    def _show_trajectories(self, records: list[TrajectoryRecord], out: Path) -> None:
        table = Table(title="Trajectory scenarios")
        table.add_column("Label", style="cyan")
        table.add_column("Final state", style="green")
        table.add_column("Total cost", style="yellow")
        table.add_column("max |ξ|", style="blue")
        table.add_column("Clamps")
        for summary in map(summarize_trajectory, records):
            table.add_row(
                summary.label,
                f"{summary.final_state:.5f}",
                f"{summary.total_cost:.5f}",
                f"{summary.max_control:.4f}",
                str(summary.clamp_events),
            )
        console.print(table)
        console.print(f"[green]Trajectories written to {out}[/green]")

    def _show_convergence(self, report: ConvergenceReport, out: Path) -> None:
        table = Table(title=f"Convergence (alpha={report.alpha:g}, rho={report.rho:g})")
        columns = (
            ("dx", "cyan"),
            ("L∞", "green"),
            ("L²", "yellow"),
            ("L² squared", "magenta"),
            ("n_t", None),
            ("CFL", None),
        )
        for name, style in columns:
            table.add_column(name, style=style)
        for level in report.levels:
            table.add_row(
                f"{level.dx:g}",
                f"{level.l_inf:.5f}",
                f"{level.l_2:.5f}",
                f"{level.l_2_squared:.5f}",
                str(level.n_t),
                f"{level.max_cfl:.3f}",
            )
        console.print(table)
        console.print(
            f"Orders: L∞ {report.order_l_inf:.2f}, L² {report.order_l_2:.2f}, "
            f"L² squared {report.order_l_2_squared:.2f}"
        )
        console.print(f"[green]Report written to {out / 'report.csv'}[/green]")

    def _show_sweep(self, rows: list[SweepRow], out: Path) -> None:
        table = Table(title="Asymptotic sweep")
        table.add_column("alpha", style="cyan")
        table.add_column("x_max = T", style="cyan")
        table.add_column("sup |U|", style="green")
        table.add_column("sup |DU|", style="yellow")
        for row in rows:
            table.add_row(f"{row.alpha:g}", f"{row.domain:g}", f"{row.u_norm:.5f}", f"{row.du_norm:.5f}")
        console.print(table)
        console.print(f"[green]Sweep written to {out / 'sweep.csv'}[/green]")

    def _show_stationary(self, oracle: StationaryField, out: Path) -> None:
        console.print(f"v̄({oracle.x_nodes[-1]:g}) = {oracle.values[-1]:.6f}, phi(0) = {oracle.phi0:g}")
        console.print(f"[green]Stationary solution written to {out}[/green]")


def main():
    """Main entry point for the CLI."""
    fire.Fire(FracsisCLI)
