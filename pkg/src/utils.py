import csv
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from src.constants import SCHEMA_VERSION
from src.errors import InputFileError

logger = logging.getLogger(__name__)


def detect_delimiter(infile: Path) -> str:
    """
    find the column/field delimiter in a given file. single-column files have no
    delimiter to detect and fall back to a comma

    :param infile: file to detect the column/field delimiter for
    :return: the column/field delimiter as a string
    """
    with open(infile, "r") as handle:
        first_line = ""
        for line in handle:
            if line.strip() and not line.lstrip().startswith("#"):
                first_line = line
                break

    try:
        delimiter = str(csv.Sniffer().sniff(first_line, delimiters=",\t; ").delimiter)
    except csv.Error:
        delimiter = ","

    return delimiter


def make_dir(parent_dir: Union[str, Path], dir_name: str = "") -> Path:
    """
    make a directory under a given parent directory if it doesn't exist

    :param parent_dir: the parent directory to create a child directory under
    :param dir_name: the name of the child directory
    :return: path of the directory that was (attempted to be) created
    """
    target = Path(parent_dir) / dir_name
    if not target.exists():
        logger.info(f"making directory {target}")
        os.makedirs(target)
    else:
        logger.debug(f"directory {target} already exists")

    return target


def setup(output: Union[str, Path]) -> Path:
    """
    make sure the directory an output file is written to exists

    :param output: where the final output should be written to
    :return: the output path
    """
    output = Path(output)
    if output.parent != Path(""):
        make_dir(output.parent)

    return output


def _first_bad_row(frame: pd.DataFrame) -> Optional[int]:
    for column in frame.columns:
        if frame[column].dtype == object:
            parsed = pd.to_numeric(frame[column], errors="coerce")
            bad = parsed.isna() & frame[column].notna()
            if bad.any():
                return int(np.flatnonzero(bad.to_numpy())[0])
    return None


def read_matrix(infile: Union[str, Path], header: bool = False) -> np.ndarray:
    """
    read a plain numeric CSV where rows are samples and columns are coordinates

    :param infile: path to the CSV
    :param header: whether the first line is a header to skip
    :return: the matrix as a 2-d float array
    """
    infile = Path(infile)
    if not infile.exists():
        raise InputFileError(infile, "file does not exist")

    if infile.stat().st_size == 0:
        return np.zeros((0, 0))

    delimiter = detect_delimiter(infile)
    try:
        frame = pd.read_csv(
            infile,
            sep=delimiter,
            header=0 if header else None,
            comment="#",
            skipinitialspace=True,
        )
    except pd.errors.ParserError as e:
        raise InputFileError(infile, f"malformed CSV ({e})")
    except pd.errors.EmptyDataError:
        return np.zeros((0, 0))

    bad_row = _first_bad_row(frame)
    if bad_row is not None:
        raise InputFileError(infile, "non-numeric value", line=bad_row + 1 + int(header))

    return frame.to_numpy(dtype=float)


def read_vector(infile: Union[str, Path], header: bool = False) -> np.ndarray:
    """
    read a vector stored one value per line (or as a single CSV row)

    :param infile: path to the file
    :param header: whether the first line is a header to skip
    :return: the vector as a 1-d float array
    """
    matrix = read_matrix(infile, header=header)
    if matrix.ndim == 2 and min(matrix.shape) > 1:
        raise InputFileError(infile, f"expected a vector but found a {matrix.shape[0]}x{matrix.shape[1]} matrix")

    return matrix.ravel()


def write_vector(values: np.ndarray, outfile: Union[str, Path]) -> Path:
    """
    write a vector one value per line

    :param values: the vector to write
    :param outfile: where to write it
    :return: the output path
    """
    outfile = setup(outfile)
    with open(outfile, "w") as handle:
        handle.write("\n".join(repr(float(value)) for value in values))
        handle.write("\n")

    return outfile


def format_results(
    results: pd.DataFrame,
    reproducible: bool = False,
    comments: Optional[List[str]] = None,
) -> str:
    """
    a results table as CSV text preceded by the versioned schema header. a timestamp line is
    added unless the run is marked reproducible

    :param results: the table to format
    :param reproducible: suppress the timestamp line so reruns are byte-identical
    :param comments: additional `# key=value` lines written after the header
    :return: the CSV text
    """
    header = [f"# schema={SCHEMA_VERSION}"]
    if not reproducible:
        header.append(f"# generated={datetime.now(timezone.utc).isoformat()}")
    header.extend(f"# {comment}" for comment in comments or [])

    return "\n".join(header) + "\n" + results.to_csv(index=False, float_format="%.10g")


def write_results(
    results: pd.DataFrame,
    outfile: Union[str, Path],
    reproducible: bool = False,
    comments: Optional[List[str]] = None,
) -> Path:
    """
    write a results table in the format of format_results

    :param results: the table to write
    :param outfile: where to write it
    :param reproducible: suppress the timestamp line so reruns are byte-identical
    :param comments: additional `# key=value` lines written after the header
    :return: the output path
    """
    outfile = setup(outfile)
    with open(outfile, "w", newline="") as handle:
        handle.write(format_results(results, reproducible=reproducible, comments=comments))

    logger.info(f"wrote {len(results)} rows to {outfile}")
    return outfile


def read_results(infile: Union[str, Path]) -> pd.DataFrame:
    """
    read a results table written by write_results

    :param infile: path to the CSV
    :return: the table without its comment lines
    """
    return pd.read_csv(infile, comment="#")
