import logging
from itertools import product
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from src.errors import DimensionError, InputFileError, LayoutError
from src.groups.classes import DuplicationMap, GroupLayout, check_groups

logger = logging.getLogger(__name__)


def build_layout(groups: Iterable[Iterable[int]], p: int) -> GroupLayout:
    """
    validate a group collection and build a GroupLayout from it. group order is preserved

    :param groups: index-sets over coordinates 0..p-1
    :param p: the ambient dimension
    :return: the layout with K, L and R computed from the groups
    """
    groups = tuple(tuple(int(index) for index in group) for group in groups)
    check_groups(groups, int(p))

    return GroupLayout(groups=groups, p=int(p))


def build_duplication(layout: GroupLayout) -> DuplicationMap:
    """
    lay out one expanded coordinate per (group, coordinate) pair so that overlapping groups
    become disjoint in the expanded space

    :param layout: the group layout
    :return: the duplication map. group ranges are contiguous and follow group order
    """
    slots = list()
    group_ranges = list()
    start = 0
    for group_id, group in enumerate(layout.groups):
        slots.extend((group_id, coordinate) for coordinate in group)
        group_ranges.append((start, start + len(group)))
        start += len(group)

    return DuplicationMap(
        p=layout.p,
        expanded_dim=start,
        slots=tuple(slots),
        group_ranges=tuple(group_ranges),
    )


def expand_design(Phi: np.ndarray, dup: DuplicationMap) -> np.ndarray:
    """
    copy the columns of a design so that every expanded coordinate gets its own column

    :param Phi: n x p design matrix
    :param dup: the duplication map
    :return: n x expanded_dim matrix, independent of Phi
    """
    Phi = np.asarray(Phi, dtype=float)
    if Phi.ndim != 2 or Phi.shape[1] != dup.p:
        found = Phi.shape[1] if Phi.ndim == 2 else Phi.size
        raise DimensionError("design columns", dup.p, found)

    # fancy indexing returns a copy
    return Phi[:, dup.original_index]


def collapse(w: np.ndarray, dup: DuplicationMap) -> np.ndarray:
    """
    recombine duplicates: coordinate i of the output is the sum of every expanded slot mapping to i

    :param w: vector in the expanded space
    :param dup: the duplication map
    :return: vector of length p
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (dup.expanded_dim,):
        raise DimensionError("expanded vector length", dup.expanded_dim, w.size)

    return np.bincount(dup.original_index, weights=w, minlength=dup.p)


def expand_coeffs(x: np.ndarray, dup: DuplicationMap) -> np.ndarray:
    """
    embed a vector into the expanded space by putting each coordinate's value in the first
    group that contains it. collapse(expand_coeffs(x)) == x

    :param x: vector of length p
    :param dup: the duplication map
    :return: vector in the expanded space
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (dup.p,):
        raise DimensionError("coefficient vector length", dup.p, x.size)

    _, first_slot = np.unique(dup.original_index, return_index=True)
    w = np.zeros(dup.expanded_dim)
    w[first_slot] = x

    return w


def group_norms(w: np.ndarray, dup: DuplicationMap, ord: int = 2) -> np.ndarray:
    """
    per-group norms of an expanded vector

    :param w: vector in the expanded space
    :param dup: the duplication map
    :param ord: 1 or 2
    :return: one norm per group
    """
    if ord == 2:
        return np.sqrt(np.add.reduceat(w * w, dup.group_starts))
    if ord == 1:
        return np.add.reduceat(np.abs(w), dup.group_starts)

    raise ValueError(f"unsupported norm order {ord}")


def membership_matrix(layout: GroupLayout) -> sparse.csr_matrix:
    """
    coordinate/group incidence matrix. R is its largest row sum

    :param layout: the group layout
    :return: p x K sparse 0/1 matrix
    """
    rows = [coordinate for group in layout.groups for coordinate in group]
    cols = [group_id for group_id, group in enumerate(layout.groups) for _ in group]

    return sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(layout.p, layout.K)
    )


def read_group_file(infile: Union[str, Path]) -> List[List[int]]:
    """
    read a group file: one group per line, whitespace-separated 0-based coordinate indices.
    blank lines and `#` comments are ignored

    :param infile: path to the group file
    :return: the groups, in file order
    """
    infile = Path(infile)
    if not infile.exists():
        raise InputFileError(infile, "group file does not exist")

    groups = list()
    with open(infile, "r") as handle:
        for line_number, line in enumerate(handle, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            try:
                groups.append([int(token) for token in content.split()])
            except ValueError:
                raise InputFileError(infile, f"expected integer indices, got '{content}'", line=line_number)

    if not groups:
        raise InputFileError(infile, "no groups found")

    return groups


def write_group_file(groups: Sequence[Sequence[int]], outfile: Union[str, Path]) -> Path:
    """
    write groups in the group file format

    :param groups: the groups to write
    :param outfile: where to write them
    :return: the output path
    """
    outfile = Path(outfile)
    with open(outfile, "w") as handle:
        for group in groups:
            handle.write(" ".join(str(index) for index in group) + "\n")

    return outfile


def infer_dimension(groups: Sequence[Sequence[int]]) -> int:
    """
    the smallest ambient dimension compatible with a group collection
    """
    return max(max(group) for group in groups if len(group) > 0) + 1


def chain_groups(num_groups: int, size: int, shift: int) -> List[List[int]]:
    """
    overlapping chain of groups: group g covers g*shift .. g*shift + size - 1, so neighbours
    share size - shift coordinates

    :param num_groups: how many groups to make
    :param size: group size
    :param shift: offset between consecutive groups
    :return: the groups. they span p = shift * (num_groups - 1) + size coordinates
    """
    if num_groups < 1 or size < 1 or shift < 1:
        raise LayoutError("chain groups need num_groups, size and shift to be at least 1")
    if shift > size:
        raise LayoutError(f"shift {shift} larger than size {size} would leave coordinates uncovered")

    return [list(range(g * shift, g * shift + size)) for g in range(num_groups)]


def disjoint_groups(num_groups: int, size: int) -> List[List[int]]:
    """
    contiguous non-overlapping blocks of equal size
    """
    return chain_groups(num_groups, size, size)


def singleton_groups(p: int) -> List[List[int]]:
    """
    one group per coordinate, the layout under which the penalty is a scaled l1 norm
    """
    return [[i] for i in range(p)]


def partition_groups(p: int, size: int) -> List[List[int]]:
    """
    contiguous non-overlapping blocks of at most `size` coordinates covering 0..p-1
    """
    return [list(range(start, min(start + size, p))) for start in range(0, p, size)]


def _block_starts(extent: int, block: int, shift: int) -> List[int]:
    if block >= extent:
        return [0]

    starts = list(range(0, extent - block + 1, shift))
    if starts[-1] + block < extent:
        starts.append(extent - block)

    return starts


def grid_groups(
    shape: Tuple[int, int, int],
    block: Tuple[int, int, int] = (5, 5, 1),
    shift: Tuple[int, int, int] = (2, 2, 1),
) -> List[List[int]]:
    """
    overlapping blocks of voxels on a 3-d grid. coordinates are the C-order flattening of the
    grid. blocks stay inside the grid, with a final block flush against the far edge whenever
    the shift doesn't land on it

    :param shape: grid extent along each axis
    :param block: block extent along each axis
    :param shift: offset between neighbouring blocks along each axis
    :return: the groups
    """
    if any(value < 1 for value in (*shape, *block, *shift)):
        raise LayoutError("grid shape, block and shift entries must be at least 1")
    if any(step > size for size, step in zip(block, shift)):
        raise LayoutError(f"shift {shift} larger than block {block} would leave voxels uncovered")

    axis_starts = [
        _block_starts(extent, size, step) for extent, size, step in zip(shape, block, shift)
    ]

    groups = list()
    for corner in product(*axis_starts):
        ranges = [
            range(start, min(start + size, extent))
            for start, size, extent in zip(corner, block, shape)
        ]
        voxels = [np.ravel_multi_index(voxel, shape) for voxel in product(*ranges)]
        groups.append(sorted(int(v) for v in voxels))

    logger.info(f"made {len(groups)} grid groups over {int(np.prod(shape))} voxels")
    return groups
