import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import src.groups.utils as group_utils
from src.errors import DimensionError, InputFileError, LayoutError
from tests.conftest import random_layout


def test_layout_counts(overlap_layout):
    assert (overlap_layout.K, overlap_layout.L, overlap_layout.R) == (2, 2, 2)
    assert not overlap_layout.is_disjoint

    singletons = group_utils.build_layout([[0], [1], [2]], 3)
    assert (singletons.K, singletons.L, singletons.R) == (3, 1, 1)
    assert singletons.is_disjoint


def test_layout_keeps_group_order():
    layout = group_utils.build_layout([[2, 3], [0, 1, 2]], 4)
    assert layout.groups == ((2, 3), (0, 1, 2))
    assert layout.L == 3


def test_uncovered_coordinate_is_named():
    with pytest.raises(LayoutError, match="coordinate 2"):
        group_utils.build_layout([[0, 1]], 3)


@pytest.mark.parametrize(
    "groups, p",
    [
        ([[0, 3]], 3),
        ([[0, -1], [1, 2]], 3),
        ([[0, 0, 1], [2]], 3),
        ([[0, 1, 2], []], 3),
        ([], 3),
    ],
)
def test_invalid_layouts(groups, p):
    with pytest.raises(LayoutError):
        group_utils.build_layout(groups, p)


def test_duplication_slots(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    assert dup.expanded_dim == 4
    assert dup.slots == ((0, 0), (0, 1), (1, 1), (1, 2))
    assert dup.group_ranges == ((0, 2), (2, 4))
    assert_array_equal(dup.counts, [1, 2, 1])


def test_duplication_sizes(disjoint_layout):
    dup = group_utils.build_duplication(disjoint_layout)
    assert dup.expanded_dim == disjoint_layout.p == 10

    chain = group_utils.build_layout(group_utils.chain_groups(7, 3, 2), 15)
    assert group_utils.build_duplication(chain).expanded_dim == 7 * 3


def test_expand_design(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    expanded = group_utils.expand_design(np.eye(3), dup)

    assert expanded.shape == (3, 4)
    assert_array_equal(expanded[:, 1], expanded[:, 2])
    assert_array_equal(expanded[:, [0, 1, 3]], np.eye(3))


def test_expand_design_copies(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    Phi = np.ones((2, 3))
    expanded = group_utils.expand_design(Phi, dup)
    expanded[0, 0] = 5.0

    assert Phi[0, 0] == 1.0


def test_expand_design_empty(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    assert group_utils.expand_design(np.zeros((0, 3)), dup).shape == (0, 4)


def test_expand_design_dimension_mismatch(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    with pytest.raises(DimensionError):
        group_utils.expand_design(np.zeros((2, 4)), dup)


def test_collapse(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    assert_array_equal(group_utils.collapse(np.array([1.0, 2.0, 3.0, 0.0]), dup), [1.0, 5.0, 0.0])
    assert_array_equal(group_utils.collapse(np.zeros(4), dup), np.zeros(3))

    with pytest.raises(DimensionError):
        group_utils.collapse(np.zeros(3), dup)


def test_collapse_inverts_disjoint_expansion(rng):
    layout = group_utils.build_layout([[3, 0], [2, 4, 1]], 5)
    dup = group_utils.build_duplication(layout)
    x = rng.standard_normal(5)

    w = group_utils.expand_coeffs(x, dup)
    assert_array_equal(w, x[[3, 0, 2, 4, 1]])
    assert_array_equal(group_utils.collapse(w, dup), x)


def test_expand_coeffs_roundtrip(rng, chain_layout):
    dup = group_utils.build_duplication(chain_layout)
    x = rng.standard_normal(chain_layout.p)
    assert_allclose(group_utils.collapse(group_utils.expand_coeffs(x, dup), dup), x)


def test_adjoint_consistency(rng):
    for _ in range(20):
        layout = random_layout(rng, p=12, num_groups=5, max_size=6)
        dup = group_utils.build_duplication(layout)
        Phi = rng.standard_normal((7, layout.p))
        w = rng.standard_normal(dup.expanded_dim)

        left = group_utils.expand_design(Phi, dup) @ w
        right = Phi @ group_utils.collapse(w, dup)
        assert_allclose(left, right, rtol=1e-12, atol=1e-12)


def test_R_is_largest_membership_count(rng):
    for _ in range(20):
        layout = random_layout(rng, p=15, num_groups=8, max_size=5)
        membership = group_utils.membership_matrix(layout)

        assert membership.shape == (layout.p, layout.K)
        assert layout.R == int(membership.sum(axis=1).max())


def test_group_norms(overlap_layout):
    dup = group_utils.build_duplication(overlap_layout)
    w = np.array([3.0, -4.0, 0.0, -2.0])

    assert_allclose(group_utils.group_norms(w, dup), [5.0, 2.0])
    assert_allclose(group_utils.group_norms(w, dup, ord=1), [7.0, 2.0])
    with pytest.raises(ValueError):
        group_utils.group_norms(w, dup, ord=3)


def test_group_file_roundtrip(tmp_path):
    groups = [[0, 1, 2], [2, 3], [4]]
    outfile = group_utils.write_group_file(groups, tmp_path / "groups.txt")
    assert group_utils.read_group_file(outfile) == groups


def test_group_file_comments_and_blanks(tmp_path):
    infile = tmp_path / "groups.txt"
    infile.write_text("# chain\n0 1\n\n1   2  # shared coordinate 1\n")
    assert group_utils.read_group_file(infile) == [[0, 1], [1, 2]]


def test_group_file_errors(tmp_path):
    with pytest.raises(InputFileError, match="does not exist"):
        group_utils.read_group_file(tmp_path / "missing.txt")

    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 two\n")
    with pytest.raises(InputFileError) as error:
        group_utils.read_group_file(bad)
    assert error.value.line == 2

    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    with pytest.raises(InputFileError, match="no groups"):
        group_utils.read_group_file(empty)


def test_chain_groups():
    groups = group_utils.chain_groups(3, 6, 4)
    assert groups == [list(range(0, 6)), list(range(4, 10)), list(range(8, 14))]
    assert group_utils.infer_dimension(groups) == 4 * 2 + 6

    layout = group_utils.build_layout(group_utils.chain_groups(100, 6, 4), 402)
    assert (layout.K, layout.L, layout.R) == (100, 6, 2)

    with pytest.raises(LayoutError):
        group_utils.chain_groups(3, 4, 5)


def test_partition_and_singletons():
    assert group_utils.partition_groups(7, 3) == [[0, 1, 2], [3, 4, 5], [6]]
    assert group_utils.singleton_groups(3) == [[0], [1], [2]]
    assert group_utils.disjoint_groups(2, 2) == [[0, 1], [2, 3]]


def test_grid_groups_cover_the_grid():
    shape = (9, 8, 2)
    groups = group_utils.grid_groups(shape, block=(5, 5, 1), shift=(2, 2, 1))
    layout = group_utils.build_layout(groups, int(np.prod(shape)))

    # x starts 0, 2, 4; y starts 0, 2 and the flush block at 3; z starts 0, 1
    assert layout.K == 3 * 3 * 2
    assert layout.L == 25
    assert all(len(group) == 25 for group in groups)


def test_grid_groups_small_grid():
    groups = group_utils.grid_groups((3, 3, 1), block=(5, 5, 1), shift=(2, 2, 1))
    assert groups == [list(range(9))]

    with pytest.raises(LayoutError):
        group_utils.grid_groups((6, 6, 1), block=(2, 2, 1), shift=(3, 3, 1))
