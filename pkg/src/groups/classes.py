from enum import Enum
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, model_validator

from src.errors import LayoutError


class GroupKind(Enum):
    """
    the group generators available from the command line
    """

    CHAIN = "chain"
    GRID = "grid"
    DISJOINT = "disjoint"
    SINGLETON = "singleton"


def check_groups(groups: Sequence[Sequence[int]], p: int) -> None:
    """
    validate a group collection against the ambient dimension

    :param groups: index-sets over coordinates 0..p-1
    :param p: the ambient dimension
    :return: None. raises LayoutError on the first problem found
    """
    if p < 1:
        raise LayoutError(f"ambient dimension must be at least 1, got {p}")
    if len(groups) == 0:
        raise LayoutError("at least one group is required")

    covered = np.zeros(p, dtype=bool)
    for group_id, group in enumerate(groups):
        if len(group) == 0:
            raise LayoutError(f"group {group_id} is empty")
        if len(set(group)) != len(group):
            raise LayoutError(f"group {group_id} contains duplicate indices")
        for index in group:
            if index < 0 or index >= p:
                raise LayoutError(f"group {group_id} contains index {index} outside 0..{p - 1}")
        covered[list(group)] = True

    if not covered.all():
        uncovered = int(np.flatnonzero(~covered)[0])
        raise LayoutError(f"coordinate {uncovered} is not covered by any group")


class GroupLayout(BaseModel):
    """
    a collection of possibly overlapping groups covering every coordinate 0..p-1.
    K, L and R are always derived from the groups
    """

    model_config = ConfigDict(frozen=True)

    groups: Tuple[Tuple[int, ...], ...]
    p: int

    @model_validator(mode="after")
    def _check(self) -> "GroupLayout":
        check_groups(self.groups, self.p)
        return self

    @computed_field
    @cached_property
    def K(self) -> int:
        return len(self.groups)

    @computed_field
    @cached_property
    def L(self) -> int:
        return max(len(group) for group in self.groups)

    @computed_field
    @cached_property
    def R(self) -> int:
        return int(self.membership_counts.max())

    @cached_property
    def membership_counts(self) -> np.ndarray:
        counts = np.zeros(self.p, dtype=int)
        for group in self.groups:
            counts[list(group)] += 1
        return counts

    @property
    def is_disjoint(self) -> bool:
        return self.R == 1


class DuplicationMap(BaseModel):
    """
    the covariate duplication embedding. every (group, coordinate) pair owns exactly one
    expanded coordinate and each group owns a contiguous range of them, in group order
    """

    model_config = ConfigDict(frozen=True)

    p: int
    expanded_dim: int
    slots: Tuple[Tuple[int, int], ...]
    group_ranges: Tuple[Tuple[int, int], ...]

    @cached_property
    def original_index(self) -> np.ndarray:
        return np.array([coordinate for _, coordinate in self.slots], dtype=int)

    @cached_property
    def group_index(self) -> np.ndarray:
        return np.array([group for group, _ in self.slots], dtype=int)

    @cached_property
    def group_starts(self) -> np.ndarray:
        return np.array([start for start, _ in self.group_ranges], dtype=int)

    @cached_property
    def group_sizes(self) -> np.ndarray:
        return np.array([stop - start for start, stop in self.group_ranges], dtype=int)

    @cached_property
    def counts(self) -> np.ndarray:
        # number of expanded copies of each original coordinate
        return np.bincount(self.original_index, minlength=self.p)

    @property
    def num_groups(self) -> int:
        return len(self.group_ranges)
