"""Greedy peel decomposition, mean-subtraction split, greedy column classes."""

import math

import numpy as np
import pytest

from blockydecomp.core import is_blocky
from blockydecomp.partition import (
    greedy_l1_decompose,
    greedy_partition,
    subtract_average,
)


# ---------------------------------------------------------------------------
# greedy_l1_decompose


def test_l1_trace_single_entry():
    s = greedy_l1_decompose([[2]])
    assert len(s.terms) == 2
    assert all(sign == 1 for sign, _ in s.terms)
    assert all(b.rectangles == (((0,), (0,)),) for _, b in s.terms)
    assert s.evaluate().tolist() == [[2]]


def test_l1_trace_upper_triangle():
    s = greedy_l1_decompose([[1, 1], [0, 1]])
    assert len(s.terms) == 2
    first, second = s.terms
    assert first[0] == 1 and first[1].rectangles == (((0,), (0,)), ((1,), (1,)))
    assert second[0] == 1 and second[1].rectangles == (((0,), (1,)),)
    assert s.evaluate().tolist() == [[1, 1], [0, 1]]


def test_l1_trace_mixed_signs():
    s = greedy_l1_decompose([[1, -1]])
    assert len(s.terms) == 2
    assert sorted(sign for sign, _ in s.terms) == [-1, 1]
    assert s.evaluate().tolist() == [[1, -1]]


def test_l1_zero_matrix():
    s = greedy_l1_decompose(np.zeros((2, 3), dtype=int))
    assert s.terms == ()
    assert s.evaluate().tolist() == [[0, 0, 0], [0, 0, 0]]


def test_l1_random_exactness_and_term_bound():
    rng = np.random.default_rng(30)
    for _ in range(25):
        arr = rng.integers(-4, 5, size=(rng.integers(1, 6), rng.integers(1, 7)))
        s = greedy_l1_decompose(arr)
        assert np.array_equal(s.evaluate(), arr)
        l1 = int(np.abs(arr).sum(axis=1).max()) if arr.size else 0
        assert len(s.terms) <= 2 * l1
        for sign, b in s.terms:
            assert sign in (-1, 1)
            assert is_blocky(b.to_dense())


# ---------------------------------------------------------------------------
# subtract_average


def test_average_split_two_unit_vectors():
    split = subtract_average([(1.0, 0.0), (0.0, 1.0)], gamma_budget=1.0)
    assert split.average.tolist() == [0.5, 0.5]
    assert split.norm_of_average == pytest.approx(math.sqrt(0.5))
    assert split.kept == (0, 1)
    assert split.bound == pytest.approx(0.5)
    assert split.drops.tolist() == pytest.approx([0.5, 0.5])


def test_average_split_identical_vectors():
    v = np.array([0.6, -0.8])
    split = subtract_average(np.tile(v, (5, 1)), gamma_budget=1.0)
    assert split.kept == (0, 1, 2, 3, 4)
    assert np.allclose(split.average, v)
    assert split.bound == pytest.approx(5 / 2)


def test_average_split_norm_budget():
    with pytest.raises(ValueError):
        subtract_average([(2.0, 0.0)], gamma_budget=1.0)


def test_average_split_zero_budget_zero_vectors():
    split = subtract_average(np.zeros((3, 2)), gamma_budget=0.0)
    assert split.kept == (0, 1, 2)
    assert split.bound == 0.0


def test_average_split_membership_and_mean_identity():
    rng = np.random.default_rng(31)
    for _ in range(25):
        r, d = int(rng.integers(1, 9)), int(rng.integers(1, 6))
        vecs = rng.normal(size=(r, d))
        gamma = float(np.linalg.norm(vecs, axis=1).max()) * 1.25 + 1e-9
        split = subtract_average(vecs, gamma_budget=gamma)
        avg = vecs.mean(axis=0)
        c_sq = float(avg @ avg)
        kept = []
        for i in range(r):
            diff_sq = float(np.sum((vecs[i] - avg) ** 2))
            if diff_sq <= float(vecs[i] @ vecs[i]) - c_sq / 2 + 1e-12:
                kept.append(i)
        assert split.kept == tuple(kept)
        # Mean identity: total squared-norm drop equals r * ||avg||^2.
        assert float(split.drops.sum()) == pytest.approx(r * c_sq, abs=1e-9)
        assert len(split.kept) >= split.bound - 1e-9 * r


# ---------------------------------------------------------------------------
# greedy_partition


def test_partition_two_block_example():
    part = greedy_partition([[1, 1, 0], [0, 0, 2]])
    assert [(c.columns, c.row, c.value) for c in part.classes] == [
        ((0, 1), 0, 1),
        ((2,), 1, 2),
    ]


def test_partition_tie_prefers_smaller_magnitude():
    part = greedy_partition([[1, 1, 2, 2]])
    assert [(c.columns, c.value) for c in part.classes] == [((0, 1), 1), ((2, 3), 2)]


def test_partition_tie_prefers_negative():
    part = greedy_partition([[-1, -1, 1, 1]])
    assert part.classes[0].value == -1 and part.classes[0].columns == (0, 1)


def test_partition_all_ones_single_class():
    part = greedy_partition(np.ones((3, 3), dtype=int))
    assert len(part) == 1
    assert part.classes[0].columns == (0, 1, 2)


def test_partition_identity_singletons():
    part = greedy_partition(np.eye(3, dtype=int))
    assert [(c.columns, c.row) for c in part.classes] == [((0,), 0), ((1,), 1), ((2,), 2)]


def test_partition_zero_column_rejected():
    with pytest.raises(ValueError):
        greedy_partition([[1, 0], [1, 0]])


def test_partition_is_partition_and_constant():
    rng = np.random.default_rng(32)
    for _ in range(20):
        m, n = int(rng.integers(1, 6)), int(rng.integers(1, 12))
        arr = rng.integers(-2, 3, size=(m, n))
        arr[rng.integers(0, m), arr.any(axis=0) == False] = 1  # noqa: E712
        part = greedy_partition(arr)
        seen = sorted(y for c in part.classes for y in c.columns)
        assert seen == list(range(n))
        for c in part.classes:
            assert c.value != 0
            assert all(arr[c.row, y] == c.value for y in c.columns)
        sizes = [len(c.columns) for c in part.classes]
        assert sizes == sorted(sizes, reverse=True)


def test_partition_harmonic_density_bounds():
    # Independent recount: for every (row, value, delta) the number of
    # delta-dense classes obeys (ln n + 1) / delta, and the probability sum
    # obeys ln n + 1.  The guarantee rests on class sizes being maximal at
    # creation time, so it must hold for every greedy output.
    rng = np.random.default_rng(33)
    for _ in range(15):
        m, n = int(rng.integers(1, 7)), int(rng.integers(2, 40))
        arr = rng.integers(-3, 4, size=(m, n))
        arr[0, ~arr.any(axis=0)] = 1
        part = greedy_partition(arr)
        ceiling = math.log(n) + 1
        values = sorted(int(v) for v in np.unique(arr) if v != 0)
        for x in range(m):
            for b in values:
                total = 0.0
                for c in part.classes:
                    frac = sum(1 for y in c.columns if arr[x, y] == b) / len(c.columns)
                    total += frac
                assert total == pytest.approx(part.probability_sum(x, b))
                assert total <= ceiling + 1e-9
                for delta in (0.5, 0.25, 0.1, 0.05):
                    count = sum(
                        1
                        for c in part.classes
                        if sum(1 for y in c.columns if arr[x, y] == b) / len(c.columns)
                        >= delta
                    )
                    assert count == part.dense_class_count(x, b, delta)
                    assert count <= ceiling / delta + 1e-9


def test_density_table_keys():
    part = greedy_partition([[1, -1], [1, 1]])
    rows = part.density_table(deltas=(0.5,))
    assert {r["value"] for r in rows} == {-1, 1}
    assert all(set(r) == {"row", "value", "delta", "count", "ceiling"} for r in rows)
