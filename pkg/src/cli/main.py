import logging
import sys
from functools import wraps
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError

import src.cli.commands as commands
import src.groups.utils as group_utils
import src.utils as io_utils
from src.cli.classes import ExperimentKind, ExperimentSpec, Method, RunOptions, Tuning
from src.cli.utils import parse_floats, parse_ints
from src.constants import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_NOT_CONVERGED
from src.errors import ConvergenceError, SoglassoError
from src.groups.classes import GroupKind
from src.penalty.classes import PenaltyParams
from src.simulate.classes import ObservationKind, ObservationModel

logger = logging.getLogger(__name__)

app = typer.Typer(
    help="sparse overlapping group lasso: fitting, cross validation and simulation experiments",
    no_args_is_help=True,
    add_completion=False,
)


def _echo_error(message: str) -> None:
    typer.echo(f"error: {message}", err=True)


def exit_codes(command: Callable) -> Callable:
    """
    map package errors onto the documented exit codes
    """

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConvergenceError as e:
            _echo_error(str(e))
            raise typer.Exit(EXIT_NOT_CONVERGED)
        except (SoglassoError, ValidationError, FileNotFoundError, ValueError) as e:
            _echo_error(str(e))
            raise typer.Exit(EXIT_INPUT_ERROR)

    return wrapper


@app.callback()
def main(
    ctx: typer.Context,
    seed: int = typer.Option(0, "--seed", min=0, help="seed of every random draw"),
    jobs: int = typer.Option(1, "--jobs", help="number of joblib workers"),
    reproducible: bool = typer.Option(
        False, "--reproducible", help="no timestamps, timings or progress bars, so reruns are byte-identical"
    ),
    out: Optional[Path] = typer.Option(None, "--out", help="output file, or output directory for fit"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="log progress at INFO level"),
):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = RunOptions(seed=seed, jobs=jobs, reproducible=reproducible, out=out, verbose=verbose)


def _write_table(table: pd.DataFrame, options: RunOptions) -> None:
    if options.out is None:
        typer.echo(io_utils.format_results(table, reproducible=options.reproducible), nl=False)
    else:
        io_utils.write_results(table, options.out, reproducible=options.reproducible)


@app.command()
@exit_codes
def fit(
    ctx: typer.Context,
    design: Path = typer.Argument(..., help="n x p design CSV"),
    labels: Path = typer.Argument(..., help="labels, one value per line"),
    groups: Path = typer.Argument(..., help="group file, one group per line"),
    config: Path = typer.Argument(..., help="flat key = value config file"),
    header: bool = typer.Option(False, "--header", help="the design CSV has a header line"),
):
    """
    fit one model. writes model.csv (x_hat, one value per line), x_raw.csv, support.txt,
    active_groups.txt and objective_trace.csv to the --out directory
    """
    options: RunOptions = ctx.obj
    result, _ = commands.run_fit(design, labels, groups, config, header=header)

    out_dir = io_utils.make_dir(options.out if options.out is not None else Path("."))
    io_utils.write_vector(result.x_hat, out_dir / "model.csv")
    io_utils.write_vector(result.x_raw, out_dir / "x_raw.csv")
    (out_dir / "support.txt").write_text("".join(f"{i}\n" for i in result.support))
    (out_dir / "active_groups.txt").write_text("".join(f"{g}\n" for g in result.active_groups))
    trace = pd.DataFrame({"iteration": np.arange(len(result.objective_trace)), "objective": result.objective_trace})
    io_utils.write_results(trace, out_dir / "objective_trace.csv", reproducible=options.reproducible)

    typer.echo(
        f"iterations={result.iterations} converged={result.converged} "
        f"support_size={len(result.support)} active_groups={len(result.active_groups)}",
        err=True,
    )
    if result.debias_rank_deficient:
        typer.echo("debias system was rank deficient; the minimum-norm refit was used", err=True)
    if not result.converged:
        raise typer.Exit(EXIT_NOT_CONVERGED)


@app.command()
@exit_codes
def cv(
    ctx: typer.Context,
    design: Path = typer.Argument(..., help="n x p design CSV"),
    labels: Path = typer.Argument(..., help="labels, one value per line"),
    groups: Path = typer.Argument(..., help="group file, one group per line"),
    config: Path = typer.Argument(..., help="config file; comma-separated values become grid axes"),
    header: bool = typer.Option(False, "--header", help="the design CSV has a header line"),
):
    """
    cross validate a grid of configurations and write the per-configuration table
    """
    options: RunOptions = ctx.obj
    best, table = commands.run_cv(
        design, labels, groups, config, seed=options.seed, jobs=options.jobs, header=header
    )
    _write_table(table, options)
    typer.echo(f"best: eta1={best.eta1:.6g} eta2={best.eta2:.6g} lambda1={best.params.lambda1:.6g}", err=True)


def _observation_model(model: ObservationKind, beta: float, sigma_noise: float) -> ObservationModel:
    return ObservationModel(kind=model, beta=beta, sigma_noise=sigma_noise)


@app.command()
@exit_codes
def phase(
    ctx: typer.Context,
    n: str = typer.Option("50,100,200,400", "--n", help="comma-separated, strictly increasing sample sizes"),
    num_groups: int = typer.Option(25, "--num-groups", help="number of groups K"),
    group_size: int = typer.Option(4, "--group-size", help="group size L"),
    group_shift: Optional[int] = typer.Option(None, "--group-shift", help="offset between groups; defaults to the size (disjoint)"),
    k: int = typer.Option(3, "--k", help="active groups"),
    l: int = typer.Option(2, "--l", help="nonzeros per active group"),
    model: ObservationKind = typer.Option(ObservationKind.SIGN.value, "--model"),
    beta: float = typer.Option(1.0, "--beta", help="logistic slope"),
    sigma_noise: float = typer.Option(0.0, "--sigma-noise", help="noise level of the linear model"),
    rho: List[float] = typer.Option([0.0], "--rho", help="AR(1) correlation; repeat for several levels"),
    methods: List[Method] = typer.Option([method.value for method in Method], "--method", help="repeat to select several"),
    trials: int = typer.Option(20, "--trials"),
    tuning: Tuning = typer.Option(Tuning.FIXED.value, "--tuning"),
    eta1_scale: float = typer.Option(1.0, "--eta1-scale", help="fixed tuning uses eta1 = scale * sqrt(n log p)"),
    eps: float = typer.Option(0.1, "--eps", help="target error of the predicted sample sizes"),
):
    """
    recovery curves: squared estimation error against n for each method
    """
    options: RunOptions = ctx.obj
    spec = ExperimentSpec(
        kind=ExperimentKind.PHASE,
        n_grid=parse_ints(n),
        num_groups=num_groups,
        group_size=group_size,
        group_shift=group_shift,
        k=k,
        l=l,
        model=_observation_model(model, beta, sigma_noise),
        rho_grid=tuple(rho),
        methods=tuple(dict.fromkeys(methods)),
        trials=trials,
        tuning=tuning,
        eta1_scale=eta1_scale,
        seed=options.seed,
    )
    results, summary, violations = commands.run_phase(
        spec, jobs=options.jobs, reproducible=options.reproducible, eps=eps
    )
    _write_table(results, options)
    if options.out is not None:
        io_utils.write_results(
            summary, options.out.with_suffix(".summary.csv"), reproducible=options.reproducible
        )

    typer.echo(summary.to_string(index=False, float_format=lambda value: f"{value:.4g}"), err=True)
    typer.echo(f"{violations} monotonicity violations", err=True)
    if violations:
        raise typer.Exit(EXIT_CHECK_FAILED)


@app.command("toy-regression")
@exit_codes
def toy_regression(
    ctx: typer.Context,
    alpha: str = typer.Option("0.2,0.4,0.6,0.8,1.0", "--alpha", help="comma-separated fractions of retained coefficients"),
    n: int = typer.Option(100, "--n", help="measurements per task"),
    tasks: int = typer.Option(1, "--tasks"),
    num_groups: int = typer.Option(25, "--num-groups"),
    group_size: int = typer.Option(6, "--group-size"),
    group_shift: int = typer.Option(4, "--group-shift"),
    k: int = typer.Option(5, "--k", help="active groups"),
    sigma_noise: float = typer.Option(0.1, "--sigma-noise"),
    methods: List[Method] = typer.Option([method.value for method in Method], "--method", help="repeat to select several"),
    trials: int = typer.Option(25, "--trials"),
):
    """
    regression on an overlapping chain of groups with clairvoyant tuning; mean MSE per alpha
    """
    options: RunOptions = ctx.obj
    spec = ExperimentSpec(
        kind=ExperimentKind.TOY_REGRESSION,
        n_grid=(n,),
        num_groups=num_groups,
        group_size=group_size,
        group_shift=group_shift,
        tasks=tasks,
        k=k,
        alpha_grid=parse_floats(alpha),
        model=_observation_model(ObservationKind.LINEAR, 1.0, sigma_noise),
        methods=tuple(dict.fromkeys(methods)),
        trials=trials,
        seed=options.seed,
    )
    typer.echo(f"p={spec.p} per task, {spec.p * spec.tasks} in total", err=True)
    summary = commands.run_toy_regression(spec, jobs=options.jobs, reproducible=options.reproducible)
    _write_table(summary, options)


@app.command()
@exit_codes
def width(
    ctx: typer.Context,
    K: str = typer.Option("5,10", "--K", help="numbers of disjoint groups"),
    L: str = typer.Option("4,5", "--L", help="group sizes"),
    k: str = typer.Option("1,2", "--k"),
    l: str = typer.Option("1,2", "--l"),
    trials: int = typer.Option(2000, "--trials"),
    chisq_K: str = typer.Option("1,2,10,100", "--chisq-K"),
    chisq_d: str = typer.Option("1,5,20", "--chisq-d"),
    chisq_trials: int = typer.Option(1000, "--chisq-trials"),
    relaxation_trials: int = typer.Option(200, "--relaxation-trials"),
    exhaustive: bool = typer.Option(False, "--exhaustive", help="enumerate supports instead of sorting"),
):
    """
    Monte Carlo checks of the mean-width, chi-square and relaxation bounds
    """
    options: RunOptions = ctx.obj
    table, failures = commands.run_width(
        seed=options.seed,
        jobs=options.jobs,
        reproducible=options.reproducible,
        K_grid=parse_ints(K),
        L_grid=parse_ints(L),
        k_grid=parse_ints(k),
        l_grid=parse_ints(l),
        trials=trials,
        chisq_K_grid=parse_ints(chisq_K),
        chisq_d_grid=parse_ints(chisq_d),
        chisq_trials=chisq_trials,
        relaxation_trials=relaxation_trials,
        exhaustive=exhaustive,
    )
    _write_table(table, options)
    typer.echo(f"{failures} violations", err=True)
    if failures:
        raise typer.Exit(EXIT_CHECK_FAILED)


@app.command("penalty-table")
@exit_codes
def penalty_table(ctx: typer.Context):
    """
    recompute the reference penalty tables and print expected against computed values
    """
    options: RunOptions = ctx.obj
    table, failures = commands.penalty_table()
    typer.echo(table.to_string(index=False, float_format=lambda value: f"{value:.6f}"))
    if options.out is not None:
        io_utils.write_results(table, options.out, reproducible=options.reproducible)

    typer.echo(f"{failures} cells outside tolerance", err=True)
    if failures:
        raise typer.Exit(EXIT_CHECK_FAILED)


@app.command()
@exit_codes
def penalty(
    vector: Path = typer.Argument(..., help="coefficient vector, one value per line"),
    groups: Path = typer.Argument(..., help="group file"),
    lambda1: float = typer.Option(1.0, "--lambda1"),
    l_target: int = typer.Option(1, "--l-target"),
):
    """
    evaluate the penalty h(x) of a vector
    """
    report = commands.run_penalty(vector, groups, PenaltyParams(lambda1=lambda1, l_target=l_target))
    typer.echo(f"objective={report['objective']:.10g}")
    typer.echo(f"residual={report['residual']:.3e}")
    typer.echo(f"group_l0={report['group_l0']}")
    typer.echo(f"active_groups={' '.join(str(g) for g in report['active_groups'])}")


def _triple(text: str) -> tuple:
    values = parse_ints(text)
    if len(values) != 3:
        raise typer.BadParameter(f"expected three comma-separated integers, got '{text}'")
    return values


@app.command("gen-groups")
@exit_codes
def gen_groups(
    ctx: typer.Context,
    kind: GroupKind = typer.Argument(..., help="chain, grid, disjoint or singleton"),
    num_groups: int = typer.Option(1, "--num-groups"),
    size: int = typer.Option(1, "--size"),
    shift: Optional[int] = typer.Option(None, "--shift", help="chain offset; defaults to the size"),
    p: Optional[int] = typer.Option(None, "--p", help="dimension for singleton groups"),
    shape: str = typer.Option("1,1,1", "--shape", help="grid extent, x,y,z"),
    block: str = typer.Option("5,5,1", "--block", help="grid block extent, x,y,z"),
    grid_shift: str = typer.Option("2,2,1", "--grid-shift", help="grid block offset, x,y,z"),
):
    """
    write a standard group layout in the group file format
    """
    options: RunOptions = ctx.obj
    groups, dimension = commands.generate_groups(
        kind,
        num_groups=num_groups,
        size=size,
        shift=shift,
        p=p,
        shape=_triple(shape),
        block=_triple(block),
        grid_shift=_triple(grid_shift),
    )
    if options.out is None:
        typer.echo("".join(" ".join(str(i) for i in group) + "\n" for group in groups), nl=False)
    else:
        group_utils.write_group_file(groups, io_utils.setup(options.out))
    typer.echo(f"p={dimension} K={len(groups)}", err=True)


if __name__ == "__main__":
    app()
