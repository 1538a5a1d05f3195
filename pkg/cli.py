"""Command-line front end.

Exit codes: 0 ok, 2 configuration, 3 spectrum, 4 integration, 5 comparison or analysis.
"""
import functools
import logging
import os
from typing import Optional

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from dce.cavity import solve_spectrum
from dce.fitting import compare as compare_growth
from dce.fitting import fit_quadratic
from dce.msa import predict
from dce.simulation import prepare, simulate
from dce.sweep import grid_profile, load_sweep_csv, run_sweep
from error_handler import CasimirError, ConfigError, exit_code_for
from shared.config import load_run_config, load_sweep_plan
from shared.schema import IntegratorConfig, RunConfig
from utils.emit import (HISTORY_HEADER, SPECTRUM_HEADER, TRAJECTORY_HEADER, history_rows, prediction_summary,
                        read_json, simulation_summary, spectrum_rows, trajectory_rows, write_csv, write_json)

load_dotenv()

app = typer.Typer(help="Dynamical Casimir effect in a cavity bounded by two driven SQUIDs.",
                  add_completion=False, no_args_is_help=True)
console = Console()
logger = logging.getLogger('dce')

ConfigOption = typer.Option(..., '--config', '-c', help="INI run config or sweep plan")
OutOption = typer.Option(None, '--out', '-o', help="Output directory (default: [output] directory)")
ModesOption = typer.Option(None, '--modes', '-n', help="Override integrator n_modes")
SeedlessOption = typer.Option(False, '--seedless', help="No effect: every computation is deterministic")


@app.callback()
def main():
    logging.basicConfig(
        level=os.getenv('DCE_LOG_LEVEL', 'INFO').upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )


def handle_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except CasimirError as e:
            console.print(f"[bold red]{type(e).__name__}[/]: {e}")
            raise typer.Exit(code=exit_code_for(e))
    return wrapper


def _with_modes(run: RunConfig, modes: Optional[int]) -> RunConfig:
    if modes is None:
        return run
    try:
        integrator = IntegratorConfig(**{**run.integrator.model_dump(), 'n_modes': modes})
    except ValueError as e:
        raise ConfigError(f"--modes: {e}") from e
    return run.model_copy(update={'integrator': integrator})


def _out_dir(run: RunConfig, out: Optional[str]) -> str:
    directory = out or run.output.directory
    os.makedirs(directory, exist_ok=True)
    return directory


@app.command()
@handle_errors
def spectrum(config: str = ConfigOption, out: Optional[str] = OutOption, modes: Optional[int] = ModesOption):
    """Solve the static spectrum: k_n, φ_n, M_n and consecutive gaps."""
    run = _with_modes(load_run_config(config), modes)
    table = solve_spectrum(run.cavity, run.integrator.n_modes)
    rows = spectrum_rows(table)

    view = Table(title=f"Spectrum b0L={run.cavity.b0L:g}, b0R={run.cavity.b0R:g}, χ0={run.cavity.chi0:g}")
    for column in SPECTRUM_HEADER:
        view.add_column(column, justify='right')
    for row in rows:
        view.add_row(*('' if v is None else f"{v:.10g}" for v in row))
    console.print(view)

    path = os.path.join(_out_dir(run, out), 'spectrum.csv')
    write_csv(path, SPECTRUM_HEADER, rows)
    console.print(f"wrote {path}")


@app.command('simulate')
@handle_errors
def simulate_command(config: str = ConfigOption, out: Optional[str] = OutOption,
                     modes: Optional[int] = ModesOption, seedless: bool = SeedlessOption):
    """Integrate the mode equations and extract particle numbers."""
    run = _with_modes(load_run_config(config), modes)
    simulation = simulate(run)
    directory = _out_dir(run, out)

    write_csv(os.path.join(directory, 'history.csv'), HISTORY_HEADER,
              history_rows(simulation.times, simulation.history))
    summary = simulation_summary(simulation)
    quadratic = fit_quadratic(simulation.times, simulation.history[:, 0])
    summary['quadratic_fit'] = {'coefficient': quadratic.coefficient, 'r_squared': quadratic.r_squared}
    write_json(os.path.join(directory, 'summary.json'), summary)
    if run.output.trajectory:
        write_csv(os.path.join(directory, 'trajectory.csv'), TRAJECTORY_HEADER,
                  trajectory_rows(simulation.trajectory))

    view = Table(title=f"Particle numbers at t={simulation.result.t_eval:g}")
    view.add_column('n', justify='right')
    view.add_column('k', justify='right')
    view.add_column('N', justify='right')
    for n, (k, N) in enumerate(zip(simulation.table.k, simulation.result.N), start=1):
        view.add_row(str(n), f"{k:.6f}", f"{N:.6e}")
    console.print(view)
    console.print(f"Wronskian deviation {simulation.wronskian_deviation:.2e}, "
                  f"unitarity deviation {simulation.result.unitarity_deviation:.2e}")


@app.command()
@handle_errors
def msa(config: str = ConfigOption, out: Optional[str] = OutOption, modes: Optional[int] = ModesOption):
    """Classify resonances and evaluate multiple-scale growth rates."""
    run = _with_modes(load_run_config(config), modes)
    table, drive, coupling = prepare(run)
    prediction = predict(table, coupling, drive)
    summary = prediction_summary(prediction)
    write_json(os.path.join(_out_dir(run, out), 'msa.json'), summary)

    console.print(f"regime [bold]{prediction.regime}[/], rate {prediction.rate:.6g}"
                  + (" (oscillatory)" if prediction.oscillatory else ""))
    for condition in prediction.report.conditions:
        console.print(f"  {condition.side}: {condition.kind} {condition.modes} at {condition.target:.10g}")


@app.command()
@handle_errors
def sweep(config: str = ConfigOption, out: Optional[str] = OutOption,
          workers: Optional[int] = typer.Option(None, '--workers', '-w', help="Parallel workers (DCE_WORKERS wins)"),
          max_points: Optional[int] = typer.Option(None, '--max-points', help="Stop after this many new points"),
          seedless: bool = SeedlessOption):
    """Run a parameter sweep; reruns resume from the points already stored."""
    plan = load_sweep_plan(config)
    directory = out or plan.base.output.directory
    result = run_sweep(plan, directory, workers=workers, max_points=max_points)
    failed = sum(1 for r in result.records if r['status'] != 'ok')
    console.print(f"{len(result.records)} of {len(result.values())} points stored in {directory} "
                  f"({failed} failed) in {result.elapsed:.1f}s")


@app.command('compare')
@handle_errors
def compare_command(simulation: str = typer.Argument(..., help="summary.json written by simulate"),
                    prediction: str = typer.Argument(..., help="msa.json written by msa"),
                    mode: int = typer.Option(1, '--mode', '-m'),
                    out: Optional[str] = OutOption):
    """Set the fitted exponential growth against 2× the MSA rate."""
    try:
        summary, msa_summary = read_json(simulation), read_json(prediction)
        history = summary['history']
        rate = msa_summary['rate']
        if msa_summary['regime'] == 'general':
            rate = msa_summary['mode_rates'].get(str(mode), 0.0)
        t_F = summary['drive']['t_F']
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"cannot read comparison inputs: {e}") from e
    result = compare_growth(rate, history['t'], history['N'], mode, t_F)
    report = {
        'mode': mode,
        'predicted_exponent': result.predicted_exponent,
        'fitted_exponent': result.fitted_exponent,
        'relative_deviation': result.relative_deviation,
        'r_squared': result.fitted.r_squared if result.fitted else None,
        'window': result.fitted.window if result.fitted else None,
        'consistent': result.consistent,
    }
    if out:
        write_json(os.path.join(out, 'compare.json'), report)
    console.print_json(data=report)


@app.command()
@handle_errors
def profile(csv_path: str = typer.Argument(..., help="sweep.csv written by sweep"),
            axis: str = typer.Option(..., '--axis', '-a', help="Axis to cut along"),
            out: Optional[str] = OutOption):
    """Normalized peak profile and FWHM of a sweep along one axis."""
    names, axes, grid = load_sweep_csv(csv_path)
    result = grid_profile(names, axes, grid, axis)
    if out:
        write_csv(os.path.join(out, f'profile_{axis}.csv'), [axis, 'normalized'],
                  zip(result.coordinates, result.values))
    console.print(f"peak at {axis}={result.peak:.10g}, FWHM {result.fwhm:.6g} "
                  f"(relative {result.relative_width:.4g})")


@app.command()
def serve(host: str = typer.Option('0.0.0.0', '--host'), port: int = typer.Option(5000, '--port')):
    """Serve the HTTP API."""
    import uvicorn
    uvicorn.run('app:app', host=host, port=port)


if __name__ == '__main__':
    app()
