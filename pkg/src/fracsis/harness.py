# this_file: fracsis/src/fracsis/harness.py
"""Batch runners: convergence study, α-sweep, trajectory scenarios, profiles and
stationary exports.

Every runner takes a validated ExperimentConfig and an output directory, writes
its CSV/JSON artifacts there and returns the in-memory results.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TypeVar

import numpy as np
from loguru import logger
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from fracsis.common.config import ExperimentConfig, ExperimentKind, nodes_for
from fracsis.common.errors import CflExceededError, ConfigurationError
from fracsis.common.types import (
    ConvergenceLevel,
    ConvergenceReport,
    ErrorNorms,
    ExitCostSpec,
    ExitCostVariant,
    Grid1D,
    KinkDiagnostic,
    ModelParams,
    ScenarioSummary,
    StationaryField,
    SweepRow,
    TrajectoryRecord,
    ValueField,
)
from fracsis.common.utils import (
    create_progress_bar,
    ensure_directory,
    format_tag,
    get_default_output_dir,
    write_csv,
    write_gnuplot_script,
    write_model_json,
    write_models_json,
)
from fracsis.control import euler_trajectory, export_trajectory, feedback, summarize_trajectory
from fracsis.costs import exit_cost_eval, exit_cost_on_grid
from fracsis.hjb import build_grid, export_snapshots, kink_locator, merged_gradient, solve
from fracsis.model import drift, validate_params
from fracsis.stationary import (
    closed_form_alpha1,
    compare_fields,
    export_stationary,
    stationary_closed_loop,
    stationary_integrand,
    stationary_value,
)

# dt/dx² of the reference run (x_max = 4, T = 5, 200 × 4000 nodes)
DIFFUSIVE_RATIO = 0.00125 / 0.02**2
MAX_DOUBLINGS = 4

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")


def resolve_output_dir(cfg: ExperimentConfig, override: Path | str | None = None) -> Path:
    """``--out`` beats ``run.out``; otherwise a per-kind folder in the user data dir."""
    if override is not None:
        return ensure_directory(override)
    if cfg.run.out is not None:
        return ensure_directory(cfg.run.out)
    return ensure_directory(get_default_output_dir() / cfg.run.kind.value)


def _map(
    func: Callable[[ItemT], ResultT], items: Sequence[ItemT], workers: int, description: str, show_progress: bool
) -> list[ResultT]:
    """Apply ``func`` to every item, in order, with an optional thread pool."""
    results: list[ResultT] = []
    with create_progress_bar(disable=not show_progress) as progress:
        task = progress.add_task(description, total=len(items))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for result in pool.map(func, items):
                    results.append(result)
                    progress.advance(task)
        else:
            for item in items:
                results.append(func(item))
                progress.advance(task)
    return results


def estimate_speed(p: ModelParams, x_nodes: np.ndarray, spec: ExitCostSpec) -> float:
    """A-priori bound on |−b_α + p| from the drift and the initial and stationary slopes."""
    phi = np.asarray(exit_cost_eval(spec, x_nodes), dtype=float)
    slope = max(float(np.max(np.abs(np.gradient(phi, x_nodes)))), float(np.max(stationary_integrand(p, x_nodes))))
    return float(np.max(np.abs(drift(p, x_nodes)))) + slope


def choose_time_steps(
    p: ModelParams, spec: ExitCostSpec, x_max: float, t_max: float, n_x: int, cfl_limit: float = 1.0
) -> int:
    """N_t keeping Δt/Δx² at its reference value, doubled until the estimated CFL fits."""
    dx = x_max / n_x
    n_t = max(1, math.ceil(t_max / (DIFFUSIVE_RATIO * dx * dx)))
    speed = estimate_speed(p, np.arange(n_x + 1) * dx, spec)
    while t_max / n_t / dx * speed > cfl_limit:
        n_t *= 2
    return n_t


def solve_with_refinement(
    p: ModelParams,
    grid: Grid1D,
    spec: ExitCostSpec,
    *,
    cfl_limit: float = 1.0,
) -> ValueField:
    """Solve under a strict CFL limit, doubling N_t when the monitor trips."""
    n_t = grid.n_t
    for attempt in Retrying(
        retry=retry_if_exception_type(CflExceededError),
        stop=stop_after_attempt(MAX_DOUBLINGS + 1),
        reraise=True,
    ):
        with attempt:
            if attempt.retry_state.attempt_number > 1:
                n_t *= 2
                logger.warning(f"CFL limit exceeded on n_x={grid.n_x}; retrying with n_t={n_t}")
            level_grid = build_grid(grid.x_max, grid.t_max, grid.n_x, n_t)
            field = solve(p, level_grid, spec, cfl_limit=cfl_limit, strict_cfl=True)
    return field


def fit_order(dx: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(dx)."""
    if len(dx) < 2 or min(errors) <= 0.0:
        return math.nan
    slope, _ = np.polyfit(np.log(dx), np.log(errors), 1)
    return float(slope)


def run_convergence_study(
    cfg: ExperimentConfig, out_dir: Path | str | None = None, show_progress: bool = False
) -> ConvergenceReport:
    """Marched u(·, T) against the stationary oracle under grid refinement."""
    cfg.validate_run(ExperimentKind.CONVERGE)
    p = cfg.model.params()
    spec = cfg.cost.spec()
    x_max, t_max = cfg.grid.x_max, cfg.grid.t_max
    levels = list(cfg.run.levels)

    def one_level(dx: float) -> ConvergenceLevel:
        n_x = nodes_for(x_max, dx)
        n_t = choose_time_steps(p, spec, x_max, t_max, n_x, cfg.run.cfl_limit)
        field = solve_with_refinement(p, build_grid(x_max, t_max, n_x, n_t), spec, cfl_limit=cfg.run.cfl_limit)
        oracle = stationary_value(p, field.phi0, field.grid.x_nodes)
        norms = compare_fields(field.current, oracle.values, field.grid.dx)
        logger.info(f"dx={dx:g}: L∞={norms.l_inf:.3e} L²={norms.l_2:.3e} (n_t={field.grid.n_t})")
        return ConvergenceLevel(
            dx=dx,
            n_x=n_x,
            n_t=field.grid.n_t,
            l_inf=norms.l_inf,
            l_2=norms.l_2,
            l_2_squared=norms.l_2_squared,
            max_cfl=field.cfl.max_ratio,
        )

    rows = _map(one_level, levels, cfg.run.workers, "Convergence levels", show_progress)
    dxs = [r.dx for r in rows]
    report = ConvergenceReport(
        alpha=p.alpha,
        rho=p.rho,
        levels=rows,
        order_l_inf=fit_order(dxs, [r.l_inf for r in rows]),
        order_l_2=fit_order(dxs, [r.l_2 for r in rows]),
        order_l_2_squared=fit_order(dxs, [r.l_2_squared for r in rows]),
    )

    out = resolve_output_dir(cfg, out_dir)
    write_csv(
        out / "report.csv",
        ("dx", "linf", "l2", "l2_squared"),
        (dxs, [r.l_inf for r in rows], [r.l_2 for r in rows], [r.l_2_squared for r in rows]),
    )
    write_model_json(out / "report.json", report)
    if cfg.run.plot:
        write_gnuplot_script(out / "plot.gp", "Error vs dx", [("report.csv", "linf")], xlabel="dx")
    return report


def run_alpha_sweep(
    cfg: ExperimentConfig, out_dir: Path | str | None = None, show_progress: bool = False
) -> list[SweepRow]:
    """Final-time sup-norms of U and of its merged gradient for each (α, x_max = T)."""
    cfg.validate_run(ExperimentKind.SWEEP)
    base = cfg.model.params()
    spec = cfg.cost.spec()
    dx = cfg.grid.x_max / cfg.grid.n_x
    cells = [(alpha, domain) for alpha in cfg.run.alphas for domain in cfg.run.domains]

    def one_cell(cell: tuple[float, float]) -> SweepRow:
        alpha, domain = cell
        p = validate_params(base.model_copy(update={"alpha": alpha}))
        n_x = nodes_for(domain, dx)
        n_t = choose_time_steps(p, spec, domain, domain, n_x, cfg.run.cfl_limit)
        field = solve_with_refinement(p, build_grid(domain, domain, n_x, n_t), spec, cfl_limit=cfg.run.cfl_limit)
        return SweepRow(
            alpha=alpha,
            domain=domain,
            u_norm=float(np.max(np.abs(field.current))),
            du_norm=float(np.max(np.abs(merged_gradient(field.current, field.grid.dx)))),
        )

    rows = _map(one_cell, cells, cfg.run.workers, "Sweep cells", show_progress)
    out = resolve_output_dir(cfg, out_dir)
    write_csv(
        out / "sweep.csv",
        ("alpha", "domain", "u_norm", "du_norm"),
        ([r.alpha for r in rows], [r.domain for r in rows], [r.u_norm for r in rows], [r.du_norm for r in rows]),
    )
    return rows


def run_trajectory_scenarios(cfg: ExperimentConfig, out_dir: Path | str | None = None) -> list[TrajectoryRecord]:
    """Controlled, uncontrolled and stationary-feedback runs from every initial state."""
    cfg.validate_run(ExperimentKind.TRAJECTORIES)
    p = cfg.model.params()
    spec = cfg.cost.spec()
    grid = cfg.grid.build()
    field = solve(p, grid, spec, keep_history=True, cfl_limit=cfg.run.cfl_limit)
    out = resolve_output_dir(cfg, out_dir)

    records: list[TrajectoryRecord] = []
    for x0 in cfg.run.initial_states:
        records.append(euler_trajectory(p, field, x0, spec, pairing=cfg.run.pairing))
        records.append(euler_trajectory(p, field, x0, spec, controlled=False))
        records.append(stationary_closed_loop(p, x0, grid.t_max, grid.dt, spec))

    for traj in records:
        export_trajectory(traj, out)
    summaries: list[ScenarioSummary] = [summarize_trajectory(traj) for traj in records]
    write_models_json(out / "scenarios.json", summaries)
    if cfg.run.plot:
        write_gnuplot_script(
            out / "plot.gp", "Trajectories", [(f"{t.label}.csv", t.label) for t in records], xlabel="t"
        )
    return records


@dataclasses.dataclass
class ProfilesResult:
    field: ValueField
    kinks: dict[int, KinkDiagnostic] = dataclasses.field(default_factory=dict)
    files: list[Path] = dataclasses.field(default_factory=list)


def run_profiles(cfg: ExperimentConfig, out_dir: Path | str | None = None) -> ProfilesResult:
    """Value and feedback snapshots, plus a kink diagnostic for the kinked cost."""
    cfg.validate_run(ExperimentKind.PROFILES)
    p = cfg.model.params()
    spec = cfg.cost.spec()
    grid = cfg.grid.build()
    field = solve(p, grid, spec, cfg.run.snapshot_times, cfl_limit=cfg.run.cfl_limit)
    out = resolve_output_dir(cfg, out_dir)
    result = ProfilesResult(field=field, files=export_snapshots(field, out))

    for level, values in sorted(field.snapshots.items()):
        tag = format_tag(level * grid.dt)
        xi = feedback(values, grid, level)
        result.files.append(write_csv(out / f"xi_t{tag}.csv", ("x", "xi"), (xi.x_nodes, xi.values)))
        if spec.variant is ExitCostVariant.KINKED:
            result.kinks[level] = kink_locator(values, grid.dx)

    if result.kinks:
        levels = sorted(result.kinks)
        result.files.append(
            write_csv(
                out / "kink.csv",
                ("t", "position", "magnitude", "spike_ratio"),
                (
                    [lv * grid.dt for lv in levels],
                    [result.kinks[lv].position for lv in levels],
                    [result.kinks[lv].magnitude for lv in levels],
                    [result.kinks[lv].spike_ratio for lv in levels],
                ),
            )
        )
    if cfg.run.plot:
        plots = [(path.name, path.stem) for path in result.files if path.name.startswith("u_t")]
        write_gnuplot_script(out / "plot.gp", "Value profiles", plots)
    return result


def horizon_study(
    p: ModelParams,
    spec: ExitCostSpec,
    radius: float,
    horizons: Sequence[float],
    x_max: float,
    n_x: int,
    cfl_limit: float = 1.0,
) -> list[tuple[float, ErrorNorms]]:
    """Distance between u(·, T) and v̄ on [0, radius] for each horizon T."""
    if radius > x_max:
        msg = f"radius {radius:g} exceeds x_max {x_max:g}"
        raise ConfigurationError(msg, details={"radius": radius, "x_max": x_max})
    results = []
    for horizon in horizons:
        n_t = choose_time_steps(p, spec, x_max, horizon, n_x, cfl_limit)
        field = solve_with_refinement(p, build_grid(x_max, horizon, n_x, n_t), spec, cfl_limit=cfl_limit)
        x = field.grid.x_nodes
        inside = x <= radius + 1e-12
        oracle = stationary_value(p, field.phi0, x)
        norms = compare_fields(field.current[inside], oracle.values[inside], field.grid.dx)
        logger.info(f"T={horizon:g}: max error on [0, {radius:g}] = {norms.l_inf:.3e}")
        results.append((float(horizon), norms))
    return results


def run_stationary(cfg: ExperimentConfig, out_dir: Path | str | None = None) -> StationaryField:
    """Export v̄ on the grid; adds the α = 1 closed form and the horizon study when set."""
    cfg.validate_run(ExperimentKind.STATIONARY)
    p = cfg.model.params()
    spec = cfg.cost.spec()
    grid = cfg.grid.build()
    phi0 = float(exit_cost_on_grid(spec, grid)[0])
    oracle = stationary_value(p, phi0, grid.x_nodes)
    out = resolve_output_dir(cfg, out_dir)
    export_stationary(oracle, out / "v_bar.csv")
    if p.alpha == 1.0:
        closed = closed_form_alpha1(p, phi0, grid.x_nodes)
        write_csv(out / "v_closed.csv", ("x", "v_closed"), (grid.x_nodes, closed))
    if cfg.run.horizons:
        study = horizon_study(p, spec, cfg.run.radius, cfg.run.horizons, grid.x_max, grid.n_x, cfg.run.cfl_limit)
        write_csv(
            out / "horizon.csv",
            ("t", "linf", "l2"),
            ([t for t, _ in study], [n.l_inf for _, n in study], [n.l_2 for _, n in study]),
        )
    return oracle


def run_experiment(cfg: ExperimentConfig, out_dir: Path | str | None = None, show_progress: bool = False) -> object:
    """Dispatch on ``run.kind``."""
    kind = cfg.run.kind
    if kind is ExperimentKind.CONVERGE:
        return run_convergence_study(cfg, out_dir, show_progress)
    if kind is ExperimentKind.SWEEP:
        return run_alpha_sweep(cfg, out_dir, show_progress)
    if kind is ExperimentKind.TRAJECTORIES:
        return run_trajectory_scenarios(cfg, out_dir)
    if kind is ExperimentKind.STATIONARY:
        return run_stationary(cfg, out_dir)
    return run_profiles(cfg, out_dir)
