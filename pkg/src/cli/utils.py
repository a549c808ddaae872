import logging
from itertools import product
from pathlib import Path
from typing import Dict, List, Tuple, Union

from pydantic import ValidationError

from src.errors import InputFileError
from src.penalty.classes import PenaltyParams
from src.solver.classes import Loss, SolverConfig

logger = logging.getLogger(__name__)

CONFIG_KEYS = (
    "loss.kind",
    "penalty.lambda1",
    "penalty.l_target",
    "solver.eta1",
    "solver.eta2",
    "solver.max_iters",
    "solver.rel_tol",
    "solver.step_rule",
    "solver.step_size",
    "solver.backtracking_factor",
    "solver.acceleration",
    "solver.debias",
    "solver.seed",
    "cv.folds",
)

# keys that describe the whole run and can't be a grid axis
SCALAR_KEYS = ("loss.kind", "cv.folds")


def read_config(infile: Union[str, Path]) -> Dict[str, Tuple[List[str], int]]:
    """
    read a flat `key = value` config file. a comma-separated value lists several values
    for one key

    :param infile: path to the config file
    :return: for each key in file order, its values and the line it was set on
    """
    infile = Path(infile)
    if not infile.exists():
        raise InputFileError(infile, "config file does not exist")

    entries = dict()
    with open(infile, "r") as handle:
        for line_number, line in enumerate(handle, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            if "=" not in content:
                raise InputFileError(infile, f"expected 'key = value', got '{content}'", line=line_number)

            key, value = (part.strip() for part in content.split("=", 1))
            if key not in CONFIG_KEYS:
                raise InputFileError(infile, f"unknown key '{key}'", line=line_number)
            if key in entries:
                raise InputFileError(infile, f"key '{key}' is set twice", line=line_number)

            values = [token.strip() for token in value.split(",")]
            if any(token == "" for token in values):
                raise InputFileError(infile, f"empty value for '{key}'", line=line_number)
            if key in SCALAR_KEYS and len(values) > 1:
                raise InputFileError(infile, f"'{key}' takes a single value", line=line_number)

            entries[key] = (values, line_number)

    return entries


def _solver_config(infile: Path, setting: Dict[str, str], lines: Dict[str, int]) -> SolverConfig:
    penalty = {key.split(".", 1)[1]: value for key, value in setting.items() if key.startswith("penalty.")}
    solver = {key.split(".", 1)[1]: value for key, value in setting.items() if key.startswith("solver.")}

    if "eta1" not in solver:
        raise InputFileError(infile, "solver.eta1 is required")

    try:
        return SolverConfig(params=PenaltyParams(**penalty), **solver)
    except ValidationError as e:
        # point at the first offending key
        field = str(e.errors()[0]["loc"][0]) if e.errors() and e.errors()[0]["loc"] else ""
        line = next((number for key, number in lines.items() if key.endswith(f".{field}")), None)
        raise InputFileError(infile, f"invalid value: {e.errors()[0]['msg']}", line=line)


def build_solver_grid(infile: Union[str, Path]) -> Tuple[Loss, List[SolverConfig], int]:
    """
    turn a config file into the loss, the solver configurations and the number of folds.
    keys with several values become grid axes and the grid is their Cartesian product, in
    file order

    :param infile: path to the config file
    :return: the loss, the configurations and cv.folds (4 when unset)
    """
    infile = Path(infile)
    entries = read_config(infile)
    lines = {key: line for key, (_, line) in entries.items()}

    try:
        loss = Loss(kind=entries["loss.kind"][0][0]) if "loss.kind" in entries else Loss()
        folds = int(entries["cv.folds"][0][0]) if "cv.folds" in entries else 4
    except (ValidationError, ValueError) as e:
        raise InputFileError(infile, f"invalid loss or fold count ({e})")

    axes = [(key, values) for key, (values, _) in entries.items() if key not in SCALAR_KEYS]
    keys = [key for key, _ in axes]

    grid = list()
    for combination in product(*(values for _, values in axes)):
        grid.append(_solver_config(infile, dict(zip(keys, combination)), lines))

    logger.info(f"config {infile} expands to {len(grid)} solver configuration(s)")
    return loss, grid, folds


def parse_floats(text: str) -> Tuple[float, ...]:
    """
    comma-separated numbers, e.g. "0.2,0.4,1"
    """
    return tuple(float(token) for token in text.split(",") if token.strip())


def parse_ints(text: str) -> Tuple[int, ...]:
    return tuple(int(token) for token in text.split(",") if token.strip())
