from math import sqrt

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

import src.cli.commands as commands
import src.groups.utils as group_utils
import src.utils as io_utils
from src.cli.classes import ExperimentKind, ExperimentSpec, Method
from src.cli.main import app
from src.cli.utils import build_solver_grid
from src.errors import InputFileError, SoglassoError
from src.simulate.classes import ObservationKind, ObservationModel
from src.solver.classes import LossKind
from src.solver.commands import stack_multitask

runner = CliRunner()


def _write_problem(tmp_path, labels=None):
    rng = np.random.default_rng(3)
    Phi = rng.standard_normal((40, 4))
    if labels is None:
        labels = np.where(Phi @ np.array([0.8, 0.6, 0.0, 0.0]) >= 0, 1.0, -1.0)

    files = {name: tmp_path / name for name in ("design.csv", "labels.csv", "groups.txt", "config.txt")}
    np.savetxt(files["design.csv"], Phi, delimiter=",", fmt="%.8f")
    np.savetxt(files["labels.csv"], labels, fmt="%g")
    files["groups.txt"].write_text("0 1\n2 3\n")
    files["config.txt"].write_text("loss.kind = linear-classification\nsolver.eta1 = 1\nsolver.eta2 = 1\n")
    return files


def _args(files, config=None):
    return [
        str(files["design.csv"]),
        str(files["labels.csv"]),
        str(files["groups.txt"]),
        str(config if config is not None else files["config.txt"]),
    ]


def test_penalty_table():
    result = runner.invoke(app, ["penalty-table"])

    assert result.exit_code == 0, result.output
    assert "0 cells outside tolerance" in result.output
    assert "26.602" in result.output


def test_gen_groups_chain():
    result = runner.invoke(app, ["gen-groups", "chain", "--num-groups", "3", "--size", "6", "--shift", "4"])

    assert result.exit_code == 0, result.output
    assert "0 1 2 3 4 5\n4 5 6 7 8 9\n8 9 10 11 12 13\n" in result.output
    assert "p=14 K=3" in result.output


def test_gen_groups_grid_to_file(tmp_path):
    outfile = tmp_path / "grid.txt"
    result = runner.invoke(app, ["--out", str(outfile), "gen-groups", "grid", "--shape", "9,8,2"])

    assert result.exit_code == 0, result.output
    assert "p=144 K=18" in result.output
    assert len([line for line in outfile.read_text().splitlines() if line.strip()]) == 18


def test_penalty_command(tmp_path, bridge_vector):
    vector = tmp_path / "x.csv"
    np.savetxt(vector, bridge_vector, fmt="%g")
    groups = tmp_path / "groups.txt"
    groups.write_text("0 1 2 3\n2 3 4 5 6\n6 7 8 9\n")

    result = runner.invoke(app, ["penalty", str(vector), str(groups), "--lambda1", "1"])

    assert result.exit_code == 0, result.output
    report = dict(line.split("=", 1) for line in result.output.splitlines() if "=" in line)
    assert float(report["objective"]) == pytest.approx(sqrt(3.0) + 3.0, abs=1e-3)
    assert report["group_l0"] == "1"
    assert report["active_groups"] == "1"


def test_fit_writes_outputs(tmp_path):
    files = _write_problem(tmp_path)
    out_dir = tmp_path / "fit"

    result = runner.invoke(app, ["--out", str(out_dir), "fit", *_args(files)])

    assert result.exit_code == 0, result.output
    model = io_utils.read_vector(out_dir / "model.csv")
    assert model.shape == (4,)
    assert len((out_dir / "model.csv").read_text().splitlines()) == 4
    for name in ("x_raw.csv", "support.txt", "active_groups.txt", "objective_trace.csv"):
        assert (out_dir / name).exists()

    trace = io_utils.read_results(out_dir / "objective_trace.csv")
    assert list(trace.columns) == ["iteration", "objective"]
    assert "converged=True" in result.output


def test_fit_rejects_zero_labels(tmp_path):
    labels = np.ones(40)
    labels[5] = 0.0
    files = _write_problem(tmp_path, labels=labels)

    result = runner.invoke(app, ["--out", str(tmp_path / "fit"), "fit", *_args(files)])

    assert result.exit_code == 3
    assert "labels must be ±1" in result.output


def test_fit_needs_the_group_file(tmp_path):
    files = _write_problem(tmp_path)
    files["groups.txt"].unlink()

    result = runner.invoke(app, ["--out", str(tmp_path / "fit"), "fit", *_args(files)])

    assert result.exit_code == 3
    assert "group file does not exist" in result.output


def test_fit_dimension_mismatch(tmp_path):
    files = _write_problem(tmp_path)
    np.savetxt(files["labels.csv"], np.ones(39), fmt="%g")

    result = runner.invoke(app, ["--out", str(tmp_path / "fit"), "fit", *_args(files)])

    assert result.exit_code == 3
    assert "expected dimension 40 but found 39" in result.output


def test_fit_needs_a_single_configuration(tmp_path):
    files = _write_problem(tmp_path)
    files["config.txt"].write_text("solver.eta1 = 1, 2\n")

    result = runner.invoke(app, ["--out", str(tmp_path / "fit"), "fit", *_args(files)])
    assert result.exit_code == 3


def test_cv_writes_table(tmp_path):
    files = _write_problem(tmp_path)
    config = tmp_path / "grid.txt"
    config.write_text(
        "loss.kind = linear-classification\nsolver.eta1 = 0.5, 2\nsolver.eta2 = 1\ncv.folds = 2\n"
    )
    outfile = tmp_path / "cv.csv"

    result = runner.invoke(app, ["--reproducible", "--out", str(outfile), "cv", *_args(files, config)])

    assert result.exit_code == 0, result.output
    lines = outfile.read_text().splitlines()
    assert lines[0] == "# schema=v1"
    assert not lines[1].startswith("#")

    table = io_utils.read_results(outfile)
    assert len(table) == 2
    assert {"eta1", "mean_error", "folds_used"} <= set(table.columns)
    assert "best: eta1=" in result.output


def test_width_is_reproducible(tmp_path):
    args = [
        "width", "--K", "3", "--L", "2", "--k", "1", "--l", "1", "--trials", "200",
        "--chisq-K", "2", "--chisq-d", "1", "--chisq-trials", "1000", "--relaxation-trials", "5",
    ]
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"

    for outfile in (first, second):
        result = runner.invoke(app, ["--seed", "4", "--reproducible", "--out", str(outfile), *args])
        assert result.exit_code == 0, result.output
        assert "0 violations" in result.output

    assert first.read_bytes() == second.read_bytes()
    table = io_utils.read_results(first)
    assert set(table["check"]) == {"width", "ordering", "chisq", "relaxation"}
    # the K = k, L = l boundary row is always present
    assert ((table["check"] == "width") & (table["K"] == 1) & (table["L"] == 1)).any()


def test_phase_is_reproducible(tmp_path):
    args = [
        "phase", "--n", "20,40", "--num-groups", "3", "--group-size", "2", "--k", "1", "--l", "1",
        "--trials", "2", "--method", "lasso", "--method", "soglasso",
    ]
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"

    for outfile in (first, second):
        result = runner.invoke(app, ["--seed", "9", "--reproducible", "--out", str(outfile), *args])
        # 1 flags a noisy rise in the mean curve, which two trials can't rule out
        assert result.exit_code in (0, 1), result.output

    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "first.summary.csv").exists()

    results = io_utils.read_results(first)
    assert list(results.columns[:5]) == ["method", "n", "trial", "sq_error", "seconds"]
    assert len(results) == 2 * 2 * 2
    assert (results["seconds"] == 0.0).all()


def test_phase_rejects_decreasing_grid():
    result = runner.invoke(app, ["phase", "--n", "40,20", "--trials", "1"])
    assert result.exit_code == 3


def test_toy_regression_prints_table():
    result = runner.invoke(
        app,
        [
            "--reproducible", "toy-regression", "--alpha", "0.5,1", "--n", "20", "--num-groups", "3",
            "--group-size", "3", "--group-shift", "2", "--k", "1", "--trials", "2",
            "--method", "lasso", "--method", "soglasso",
        ],
    )

    assert result.exit_code == 0, result.output
    assert "# schema=v1\nmethod,alpha,mean_mse,std_error,l,trials\n" in result.output
    assert "p=7 per task" in result.output


def test_config_unknown_key(tmp_path):
    config = tmp_path / "config.txt"
    config.write_text("solver.eta1 = 1\n# comment\nsolver.eat2 = 2\n")

    with pytest.raises(InputFileError, match="unknown key") as error:
        build_solver_grid(config)
    assert error.value.line == 3


def test_config_grid_in_file_order(tmp_path):
    config = tmp_path / "config.txt"
    config.write_text("solver.eta1 = 1, 2\npenalty.lambda1 = 0.5, 1, 2\n")

    loss, grid, folds = build_solver_grid(config)

    assert loss.kind == LossKind.SQUARED
    assert folds == 4
    assert [(c.eta1, c.params.lambda1) for c in grid] == [
        (1.0, 0.5), (1.0, 1.0), (1.0, 2.0), (2.0, 0.5), (2.0, 1.0), (2.0, 2.0)
    ]


@pytest.mark.parametrize(
    "text, line",
    [
        ("solver.eta1 = -1\n", 1),
        ("solver.eta2 = 1\nsolver.eta1 = 1\nsolver.eta1 = 2\n", 3),
        ("solver.eta1 = 1\ncv.folds = 2, 3\n", 2),
        ("solver.eta1 = 1\nsolver.eta2\n", 2),
        ("solver.eta1 = 1,\n", 1),
    ],
)
def test_config_errors_name_the_line(tmp_path, text, line):
    config = tmp_path / "config.txt"
    config.write_text(text)

    with pytest.raises(InputFileError) as error:
        build_solver_grid(config)
    assert error.value.line == line


def test_config_needs_eta1(tmp_path):
    config = tmp_path / "config.txt"
    config.write_text("solver.eta2 = 1\n")

    with pytest.raises(InputFileError, match="solver.eta1 is required"):
        build_solver_grid(config)


def _mean_error(summary: pd.DataFrame, method: Method, **where) -> pd.Series:
    rows = summary[summary["method"] == method.value]
    for column, value in where.items():
        rows = rows[rows[column] == value]
    return rows.iloc[0]


@pytest.mark.slow
def test_recovery_scaling():
    spec = ExperimentSpec(
        kind=ExperimentKind.PHASE,
        n_grid=(50, 100, 200, 400),
        num_groups=25,
        group_size=4,
        k=3,
        l=2,
        model=ObservationModel(kind=ObservationKind.SIGN),
        methods=(Method.SOGLASSO,),
        trials=20,
    )
    _, summary, violations = commands.run_phase(spec, jobs=2, reproducible=True)

    assert violations == 0
    assert _mean_error(summary, Method.SOGLASSO, n=400)["mean_sq_error"] < 0.1


@pytest.mark.slow
def test_conditioning_degrades_recovery():
    spec = ExperimentSpec(
        kind=ExperimentKind.PHASE,
        n_grid=(200,),
        num_groups=25,
        group_size=4,
        k=3,
        l=2,
        model=ObservationModel(kind=ObservationKind.SIGN),
        rho_grid=(0.0, 0.8, 0.95),
        methods=(Method.SOGLASSO,),
        trials=20,
    )
    _, summary, _ = commands.run_phase(spec, jobs=2, reproducible=True)

    curve = summary.sort_values("kappa")
    means, errors = curve["mean_sq_error"].to_numpy(), curve["std_error"].to_numpy()
    assert curve["kappa"].is_monotonic_increasing
    for i in range(1, len(means)):
        assert means[i] >= means[i - 1] - 2.0 * max(errors[i], errors[i - 1])


def test_toy_glasso_groups_rows():
    chain = group_utils.build_layout(group_utils.chain_groups(3, 4, 2), 8)
    rows = commands.toy_base_layout(Method.GLASSO, chain)
    Phis = [np.eye(8)] * 2
    empty = [np.zeros(8)] * 2

    stacked_rows = stack_multitask(Phis, empty, rows)[2]
    assert [list(group) for group in stacked_rows.groups] == [[j, 8 + j] for j in range(8)]
    assert commands.toy_base_layout(Method.SOGLASSO, chain) is chain

    # a single task leaves one coordinate per row, the lasso layout
    single = stack_multitask(Phis[:1], empty[:1], rows)[2]
    assert single.groups == commands.method_layout(Method.LASSO, chain, 4).groups


@pytest.mark.slow
def test_toy_regression_ordering():
    spec = ExperimentSpec(
        kind=ExperimentKind.TOY_REGRESSION,
        n_grid=(100,),
        tasks=2,
        num_groups=25,
        group_size=6,
        group_shift=4,
        k=5,
        alpha_grid=(0.2, 1.0),
        model=ObservationModel(kind=ObservationKind.LINEAR, sigma_noise=0.1),
        trials=25,
    )
    summary = commands.run_toy_regression(spec, jobs=2, reproducible=True)

    def at(method: Method, alpha: float) -> pd.Series:
        return _mean_error(summary, method, alpha=alpha)

    assert at(Method.SOGLASSO, 0.2)["mean_mse"] < at(Method.OGLASSO, 0.2)["mean_mse"]
    assert at(Method.SOGLASSO, 0.2)["mean_mse"] < at(Method.GLASSO, 0.2)["mean_mse"]

    dense_so, dense_o = at(Method.SOGLASSO, 1.0), at(Method.OGLASSO, 1.0)
    assert abs(dense_so["mean_mse"] - dense_o["mean_mse"]) <= 2.0 * max(dense_so["std_error"], dense_o["std_error"])
    assert at(Method.LASSO, 1.0)["mean_mse"] == max(at(m, 1.0)["mean_mse"] for m in Method)


@pytest.mark.slow
def test_width_default_grid():
    table, failures = commands.run_width(seed=0, jobs=2, reproducible=True)

    assert failures == 0
    assert not (table["status"] == "skipped").any()


def test_runners_check_experiment_kind():
    phase = ExperimentSpec(kind=ExperimentKind.PHASE, trials=1)
    toy = ExperimentSpec(kind=ExperimentKind.TOY_REGRESSION, alpha_grid=(1.0,), trials=1)

    with pytest.raises(SoglassoError, match="toy-regression"):
        commands.run_phase(toy)
    with pytest.raises(SoglassoError, match="phase"):
        commands.run_toy_regression(phase)
