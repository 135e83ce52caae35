"""Greedy row-sum decomposition, average subtraction, greedy column partition.

Three self-contained combinatorial tools used by the pipeline:

* ``greedy_l1_decompose`` writes any integer matrix as a signed sum of
  blocky matrices with at most 2 * (max row l1 norm) terms.
* ``subtract_average`` locates the vectors whose squared norm drops by at
  least half the squared mean norm when the mean is subtracted.
* ``greedy_partition`` repeatedly extracts the largest column class that
  is constant (and nonzero) in some row, yielding the harmonic density
  guarantee used downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BlockyMatrix, SignedBlockySum, _freeze, as_int_array, as_real_array

__all__ = [
    "PartitionClass",
    "GreedyPartition",
    "AverageSplit",
    "greedy_l1_decompose",
    "subtract_average",
    "greedy_partition",
]


def greedy_l1_decompose(matrix) -> SignedBlockySum:
    """Signed blocky sum evaluating exactly to the input.

    The positive and negative parts are peeled separately, one unit per
    round: every row with a surviving nonzero entry donates one unit in its
    smallest nonzero column, and rows are grouped by chosen column into
    single-column rectangles (disjoint by construction, hence blocky).
    Round count per part equals that part's max row sum, so the total term
    count is at most 2 * max_x sum_y |A(x,y)|.
    """
    arr = as_int_array(matrix)
    m, n = arr.shape
    terms: list[tuple[int, BlockyMatrix]] = []
    for sign, part in ((1, np.clip(arr, 0, None)), (-1, np.clip(-arr, 0, None))):
        work = part.copy()
        while work.any():
            chosen: dict[int, list[int]] = {}
            for x in range(m):
                nz = np.flatnonzero(work[x])
                if nz.size:
                    y = int(nz[0])
                    chosen.setdefault(y, []).append(x)
                    work[x, y] -= 1
            rects = tuple(
                (tuple(rows), (y,)) for y, rows in sorted(chosen.items())
            )
            terms.append((sign, BlockyMatrix(shape=(m, n), rectangles=rects)))
    return SignedBlockySum(shape=(m, n), terms=tuple(terms))


@dataclass(frozen=True, eq=False)
class AverageSplit:
    """Vectors surviving the mean-subtraction norm test.

    ``kept`` indexes vectors with ||v - avg||^2 <= ||v||^2 - c^2/2 where
    c = ||avg||; ``drops`` is the per-vector squared-norm decrease and
    ``bound`` the guaranteed lower bound on len(kept).
    """

    average: np.ndarray
    norm_of_average: float
    kept: tuple[int, ...]
    drops: np.ndarray
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "average", _freeze(np.asarray(self.average)))
        object.__setattr__(self, "drops", _freeze(np.asarray(self.drops)))


def subtract_average(vectors, gamma_budget: float) -> AverageSplit:
    """Mean-subtraction split of row vectors with norms within gamma_budget.

    The mean identity sum ||v_i - avg||^2 = sum ||v_i||^2 - r*c^2 forces at
    least c^2 * r / (2*gamma^2) vectors to pass the membership test; that
    bound is asserted (with 1e-9*r slack for roundoff).
    """
    vecs = np.asarray(vectors, dtype=np.float64)
    if vecs.ndim != 2 or vecs.shape[0] < 1:
        raise ValueError("vectors must form a nonempty 2-d array (one vector per row)")
    gamma = float(gamma_budget)
    r = vecs.shape[0]
    norms_sq = np.einsum("ij,ij->i", vecs, vecs)
    if norms_sq.max() > (gamma + 1e-9) ** 2:
        raise ValueError(
            f"vector norm {math.sqrt(norms_sq.max()):.12g} exceeds the budget {gamma:.12g}"
        )
    avg = vecs.mean(axis=0)
    c_sq = float(avg @ avg)
    diff = vecs - avg
    diff_sq = np.einsum("ij,ij->i", diff, diff)
    drops = norms_sq - diff_sq
    kept = tuple(int(i) for i in np.flatnonzero(diff_sq <= norms_sq - c_sq / 2 + 1e-12))
    bound = 0.0 if gamma == 0 else c_sq * r / (2 * gamma * gamma)
    if len(kept) < bound - 1e-9 * r:
        raise AssertionError(
            f"mean-subtraction bound violated: kept {len(kept)} < {bound:.12g}"
        )
    return AverageSplit(
        average=avg,
        norm_of_average=math.sqrt(c_sq),
        kept=kept,
        drops=drops,
        bound=bound,
    )


@dataclass(frozen=True)
class PartitionClass:
    columns: tuple[int, ...]
    row: int
    value: int


@dataclass(frozen=True, eq=False)
class GreedyPartition:
    """Ordered classes covering every column exactly once.

    Each class is constant equal to its (nonzero) defining value in its
    defining row; sizes are non-increasing in creation order.  The source
    matrix is kept for density queries.
    """

    classes: tuple[PartitionClass, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(as_int_array(self.matrix)))

    def __len__(self) -> int:
        return len(self.classes)

    def class_probability(self, index: int, x: int, b: int) -> float:
        """Fraction of class ``index`` columns where row x equals b."""
        cls = self.classes[index]
        vals = self.matrix[x, list(cls.columns)]
        return int(np.count_nonzero(vals == b)) / len(cls.columns)

    def probability_sum(self, x: int, b: int) -> float:
        """Sum over classes of the row-x probability of value b."""
        return sum(self.class_probability(i, x, b) for i in range(len(self.classes)))

    def dense_class_count(self, x: int, b: int, delta: float) -> int:
        """Number of classes where row x equals b on at least a delta fraction."""
        return sum(
            1 for i in range(len(self.classes)) if self.class_probability(i, x, b) >= delta
        )

    def density_table(self, deltas=(0.5, 0.25, 0.1, 0.05)) -> list[dict]:
        """Dense-class counts and their harmonic ceilings for each (x, b, delta)."""
        n = self.matrix.shape[1]
        ceiling = math.log(n) + 1
        out = []
        values = sorted(int(v) for v in np.unique(self.matrix) if v != 0)
        for x in range(self.matrix.shape[0]):
            for b in values:
                for delta in deltas:
                    out.append(
                        {
                            "row": x,
                            "value": b,
                            "delta": delta,
                            "count": self.dense_class_count(x, b, delta),
                            "ceiling": ceiling / delta,
                        }
                    )
        return out


def greedy_partition(matrix) -> GreedyPartition:
    """Partition all columns by repeatedly taking the largest constant class.

    Each step scans every (row, nonzero value) pair, counts its matching
    columns among the remainder, and extracts the largest class; ties prefer
    the smallest row, then the smallest |value|, negative before positive.
    Requires every column to have a nonzero entry.
    """
    arr = as_int_array(matrix)
    m, n = arr.shape
    zero_cols = np.flatnonzero(~arr.any(axis=0))
    if zero_cols.size:
        raise ValueError(f"all-zero column {int(zero_cols[0])}: caller must strip zero columns")
    remaining = np.arange(n)
    classes: list[PartitionClass] = []
    while remaining.size:
        sub = arr[:, remaining]
        best = None  # (count, row, |b|, sign-rank, b)
        for x in range(m):
            vals, counts = np.unique(sub[x][sub[x] != 0], return_counts=True)
            for b, c in zip(vals.tolist(), counts.tolist()):
                key = (-c, x, abs(b), 0 if b < 0 else 1)
                if best is None or key < best[0]:
                    best = (key, x, b)
        _, x, b = best
        mask = sub[x] == b
        members = remaining[mask]
        classes.append(
            PartitionClass(columns=tuple(int(y) for y in members), row=x, value=int(b))
        )
        remaining = remaining[~mask]
    sizes = [len(c.columns) for c in classes]
    if any(sizes[i] < sizes[i + 1] for i in range(len(sizes) - 1)):
        raise AssertionError("greedy class sizes must be non-increasing")
    return GreedyPartition(classes=tuple(classes), matrix=arr)
