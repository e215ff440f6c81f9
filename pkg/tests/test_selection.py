import numpy as np
import pytest

from rgsolve import (
    ConvergedSignal,
    DenseMatrix,
    SelectionConfig,
    UsageError,
    column_losses,
    gbk_set,
    make_partition,
    max_distance_set,
    relaxed_greedy_set,
    row_losses,
)

DIAG = DenseMatrix([[1.0, 0.0], [0.0, 2.0]])


def random_case(seed, m=25, n=10):
    rng = np.random.default_rng(seed)
    a = DenseMatrix(rng.standard_normal((m, n)))
    r = rng.standard_normal(m)
    return a, r


def test_row_losses_hand():
    prof = row_losses(DIAG, np.array([1.0, 4.0]))
    np.testing.assert_allclose(prof.losses, [1.0, 4.0])
    np.testing.assert_allclose(prof.weights, [0.2, 0.8])
    assert abs(prof.weighted_mean - 3.4) < 1e-14
    assert prof.max_loss == 4.0


def test_row_losses_zero_residual():
    prof = row_losses(DIAG, np.zeros(2))
    np.testing.assert_array_equal(prof.losses, [0.0, 0.0])
    assert prof.max_loss == 0.0


def test_row_losses_symmetric():
    prof = row_losses(DenseMatrix(np.eye(2)), np.array([2.0, 2.0]))
    np.testing.assert_allclose(prof.losses, [4.0, 4.0])
    assert prof.weighted_mean == 4.0


def test_row_losses_rejects_zero_row():
    a = DenseMatrix([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(UsageError, match="zero row"):
        row_losses(a, np.array([1.0, 1.0]))


def test_column_losses_hand():
    prof = column_losses(DIAG, np.array([1.0, 4.0]))
    np.testing.assert_allclose(prof.losses, [1.0, 16.0])
    assert abs(prof.weighted_mean - 13.0) < 1e-12
    assert prof.max_loss == 16.0


def test_column_losses_orthogonal_residual():
    # residual orthogonal to both columns
    a = DenseMatrix([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    prof = column_losses(a, np.array([0.0, 0.0, 3.0]))
    np.testing.assert_array_equal(prof.losses, [0.0, 0.0])


def test_column_losses_identity():
    prof = column_losses(DenseMatrix(np.eye(2)), np.array([1.0, 4.0]))
    np.testing.assert_allclose(prof.losses, [1.0, 16.0])


def test_loss_sum_identities_random():
    for seed in range(20):
        a, r = random_case(seed)
        row = row_losses(a, r)
        col = column_losses(a, r)
        r_sq = float(r @ r)
        y = a.matvec_transpose(r)
        y_sq = float(y @ y)
        assert abs(float(row.losses @ a.row_sqnorms) - r_sq) <= 1e-10 * r_sq
        assert abs(float(col.losses @ a.col_sqnorms) - y_sq) <= 1e-10 * y_sq
        assert abs(row.weights.sum() - 1.0) <= 1e-12
        assert abs(col.weights.sum() - 1.0) <= 1e-12
        assert row.max_loss >= row.weighted_mean
        assert col.max_loss >= col.weighted_mean


def test_relaxed_greedy_hand_cases():
    prof = row_losses(DIAG, np.array([1.0, 4.0]))
    # threshold 0.5*4 + 0.5*3.4 = 3.7 selects only the larger loss
    np.testing.assert_array_equal(relaxed_greedy_set(prof, 0.5), [1])
    # theta=0 thresholds at the weighted mean 3.4
    np.testing.assert_array_equal(relaxed_greedy_set(prof, 0.0), [1])


def test_relaxed_greedy_symmetric_ties():
    prof = row_losses(DenseMatrix(np.eye(2)), np.array([2.0, 2.0]))
    for theta in (0.0, 0.3, 1.0):
        np.testing.assert_array_equal(relaxed_greedy_set(prof, theta), [0, 1])


def test_relaxed_greedy_converged_signal():
    prof = row_losses(DIAG, np.zeros(2))
    with pytest.raises(ConvergedSignal):
        relaxed_greedy_set(prof, 0.5)


def test_relaxed_greedy_properties_random():
    thetas = np.linspace(0.0, 1.0, 9)
    for seed in range(30):
        a, r = random_case(seed)
        prof = row_losses(a, r)
        argmax = np.flatnonzero(prof.losses == prof.max_loss)
        previous = None
        for theta in thetas:
            sel = relaxed_greedy_set(prof, theta)
            assert sel.size > 0
            assert np.isin(argmax, sel).all()
            if previous is not None:  # larger theta never enlarges the set
                assert set(sel).issubset(set(previous))
            previous = sel
        np.testing.assert_array_equal(relaxed_greedy_set(prof, 1.0), argmax)


def test_gbk_set_hand():
    prof = row_losses(DIAG, np.array([1.0, 4.0]))
    np.testing.assert_array_equal(gbk_set(prof, 0.5), [1])
    np.testing.assert_array_equal(gbk_set(prof, 0.25), [0, 1])
    ties = row_losses(DenseMatrix(np.eye(2)), np.array([2.0, 2.0]))
    np.testing.assert_array_equal(gbk_set(ties, 1.0), [0, 1])


def test_gbk_set_bounds():
    for seed in range(10):
        a, r = random_case(seed)
        sel = gbk_set(row_losses(a, r), 0.5)
        assert sel.size > 0 and sel.min() >= 0 and sel.max() < a.m


def test_max_distance_hand():
    y = DIAG.matvec_transpose(np.array([1.0, 4.0]))  # distances 1 and 4
    np.testing.assert_array_equal(max_distance_set(DIAG, y, 0.1), [1])
    eye = DenseMatrix(np.eye(2))
    np.testing.assert_array_equal(max_distance_set(eye, np.array([4.0, 4.0]), 0.0), [0, 1])
    np.testing.assert_array_equal(max_distance_set(eye, np.array([3.95, 4.0]), 0.1), [0, 1])


def test_max_distance_contains_argmax():
    for seed in range(10):
        a, r = random_case(seed)
        y = a.matvec_transpose(r)
        dist = np.abs(y) / np.sqrt(a.col_sqnorms)
        sel = max_distance_set(a, y, 0.05)
        assert int(np.argmax(dist)) in sel


def test_max_distance_converged_signal():
    with pytest.raises(ConvergedSignal):
        max_distance_set(DIAG, np.zeros(2), 0.1)


def test_make_partition_cases():
    blocks = make_partition(5, 2)
    assert [list(b) for b in blocks] == [[0, 1], [2, 3], [4]]
    assert [list(b) for b in make_partition(4, 4)] == [[0, 1, 2, 3]]
    assert [list(b) for b in make_partition(3, 5)] == [[0, 1, 2]]


def test_make_partition_covers_everything():
    for count, size in ((10, 3), (12, 4), (7, 1)):
        blocks = make_partition(count, size)
        joined = np.concatenate(blocks)
        np.testing.assert_array_equal(np.sort(joined), np.arange(count))
        assert len(np.unique(joined)) == count


def test_selection_config_validation():
    with pytest.raises(UsageError):
        SelectionConfig(theta1=1.5)
    with pytest.raises(UsageError):
        SelectionConfig(eta1=0.0)
    with pytest.raises(UsageError):
        SelectionConfig(eta2=-1.0)
    with pytest.raises(UsageError):
        SelectionConfig(block_size=0)


def test_zero_set_uses_relative_tolerance():
    a = DenseMatrix(np.eye(3))
    r = np.array([1.0, 1e-20, 0.0])
    prof = row_losses(a, r)
    np.testing.assert_array_equal(prof.zero_set, [1, 2])
    assert 0 not in prof.zero_set
