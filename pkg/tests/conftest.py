import numpy as np
import pytest

import src.groups.utils as group_utils


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def overlap_layout():
    # coordinate 1 is shared
    return group_utils.build_layout([[0, 1], [1, 2]], 3)


@pytest.fixture
def disjoint_layout():
    return group_utils.build_layout(group_utils.disjoint_groups(2, 5), 10)


@pytest.fixture
def three_group_layout():
    return group_utils.build_layout([[0, 1, 2, 3], [2, 3, 4, 5, 6], [6, 7, 8, 9]], 10)


@pytest.fixture
def bridge_vector():
    x = np.zeros(10)
    x[[2, 4, 6]] = 1.0
    return x


@pytest.fixture
def chain_layout():
    return group_utils.build_layout(group_utils.chain_groups(6, 4, 3), 19)


def random_layout(rng: np.random.Generator, p: int, num_groups: int, max_size: int):
    """
    random overlapping groups that cover every coordinate
    """
    groups = [
        sorted(rng.choice(p, size=int(rng.integers(1, max_size + 1)), replace=False).tolist())
        for _ in range(num_groups)
    ]
    covered = {i for group in groups for i in group}
    groups.extend([i] for i in range(p) if i not in covered)

    return group_utils.build_layout(groups, p)
