"""Exact mistake-tree dimensions and the two column-stabilization procedures.

The dimension of a sign matrix is computed by the classical recursion: a
row splits the columns into its -1 class and its +1 class, and the
dimension is the best value of 1 + min(dim of either class), memoized on
column subsets.  The weighted variant replaces the sign split by a
threshold split at gap ``alpha``: the low side holds columns with value
<= w - alpha/2, the high side those with value >= w + alpha/2.

Both stabilizers shrink a column set until every row is near-constant on
it, with counted (not estimated) violation rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import _freeze, as_int_array, as_real_array

__all__ = [
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "MistakeLeaf",
    "MistakeNode",
    "WeightedMistakeTree",
    "StabilizationResult",
    "ldim",
    "ldim_witness",
    "ldim_alpha",
    "ldim_alpha_witness",
    "majority_stabilize",
    "bucket_stabilize",
]

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """The exact recursion would exceed its node-expansion budget."""


@dataclass(frozen=True)
class MistakeLeaf:
    column: int


@dataclass(frozen=True)
class MistakeNode:
    row: int
    threshold: float
    above: "MistakeNode | MistakeLeaf"  # columns with value >= threshold + alpha/2
    below: "MistakeNode | MistakeLeaf"  # columns with value <= threshold - alpha/2


@dataclass(frozen=True)
class WeightedMistakeTree:
    depth: int
    alpha: float
    root: MistakeNode | MistakeLeaf

    def nodes(self) -> list[dict]:
        """Flatten to a node list (ids are preorder; children by id)."""
        out: list[dict] = []

        def visit(node) -> int:
            idx = len(out)
            if isinstance(node, MistakeLeaf):
                out.append({"id": idx, "kind": "leaf", "column": node.column})
                return idx
            out.append({"id": idx, "kind": "split", "row": node.row, "threshold": node.threshold})
            out[idx]["above"] = visit(node.above)
            out[idx]["below"] = visit(node.below)
            return idx

        visit(self.root)
        return out


def _sign_array(matrix) -> np.ndarray:
    arr = as_int_array(matrix)
    bad = (arr != 1) & (arr != -1)
    if bad.any():
        x, y = np.argwhere(bad)[0]
        raise ValueError(f"sign matrix required; entry ({x},{y}) is {arr[x, y]}")
    return arr


class _SplitEngine:
    """Bitmask recursion shared by the exact dimension computations.

    Duplicate rows and duplicate columns are collapsed first (neither
    changes the dimension), column subsets become Python-int bitmasks,
    and every useful threshold split of a row is precomputed as a
    (low_mask, high_mask) pair.  Only maximal pairs are kept: the split
    at w = v + alpha/2 for each distinct row value v dominates the one
    at w = v' - alpha/2, so dropping the dominated family cannot change
    the recursion's max.  Search is depth-capped by log2(#columns) --
    distinct columns witness distinct leaves -- and branch-and-bound
    prunes candidates whose smaller side is already too small.
    """

    def __init__(self, values: np.ndarray, alpha: float, budget: int):
        arr = np.asarray(values, dtype=np.float64)
        m, n = arr.shape
        groups: dict[bytes, list[int]] = {}
        for y in range(n):
            groups.setdefault(arr[:, y].tobytes(), []).append(y)
        self.col_groups = sorted(groups.values(), key=lambda g: g[0])
        vals = arr[:, [g[0] for g in self.col_groups]]
        k = vals.shape[1]
        self.full_mask = (1 << k) - 1
        self.alpha = float(alpha)
        self.budget = int(budget)
        self.expansions = 0
        self.memo: dict[int, int] = {}

        row_seen: set[bytes] = set()
        self.split_pairs: list[tuple[int, int, int, float]] = []  # (low, high, row, w)
        for x in range(m):
            key = vals[x].tobytes()
            if key in row_seen:
                continue
            row_seen.add(key)
            v = vals[x]
            order = np.argsort(v, kind="stable")
            sv = v[order]
            prefix = []
            acc = 0
            for idx in order:
                acc |= 1 << int(idx)
                prefix.append(acc)
            i = 0
            while i < k:
                j = i
                while j + 1 < k and sv[j + 1] == sv[i]:
                    j += 1
                cut = int(np.searchsorted(sv, sv[i] + self.alpha, side="left"))
                if cut < k:
                    low = prefix[j]
                    high = self.full_mask ^ prefix[cut - 1]
                    self.split_pairs.append((low, high, x, float(sv[i] + self.alpha / 2)))
                i = j + 1
        seen_pairs: set[tuple[int, int]] = set()
        self.dim_pairs: list[tuple[int, int]] = []
        for low, high, _, _ in self.split_pairs:
            if (low, high) not in seen_pairs:
                seen_pairs.add((low, high))
                self.dim_pairs.append((low, high))

    def dim(self, mask: int) -> int:
        cached = self.memo.get(mask)
        if cached is not None:
            return cached
        self.expansions += 1
        if self.expansions > self.budget:
            raise BudgetExceeded(
                f"exact dimension recursion exceeded its budget of {self.budget} node visits"
            )
        best = 0
        ncols = mask.bit_count()
        if ncols >= 2:
            cap = ncols.bit_length() - 1
            cands = []
            for low, high in self.dim_pairs:
                lo = low & mask
                if not lo:
                    continue
                hi = high & mask
                if not hi:
                    continue
                a = lo.bit_count()
                b = hi.bit_count()
                cands.append((a, lo, hi) if a <= b else (b, hi, lo))
            cands.sort(key=lambda t: -t[0])
            for mn, small, large in cands:
                if 1 + (mn.bit_length() - 1) <= best:
                    break
                d1 = self.dim(small)
                if 1 + d1 <= best:
                    continue
                d2 = self.dim(large)
                value = 1 + (d1 if d1 < d2 else d2)
                if value > best:
                    best = value
                    if best >= cap:
                        break
        self.memo[mask] = best
        return best

    def witness(self, mask: int, depth: int):
        if depth == 0:
            bit = (mask & -mask).bit_length() - 1
            return MistakeLeaf(column=self.col_groups[bit][0])
        for low, high, row, w in self.split_pairs:
            lo = low & mask
            hi = high & mask
            if lo and hi and self.dim(hi) >= depth - 1 and self.dim(lo) >= depth - 1:
                return MistakeNode(
                    row=row,
                    threshold=w,
                    above=self.witness(hi, depth - 1),
                    below=self.witness(lo, depth - 1),
                )
        raise AssertionError("no qualifying split found rebuilding a witness tree")


def ldim(matrix, budget: int = DEFAULT_BUDGET) -> int:
    """Exact mistake-tree dimension of a sign matrix."""
    arr = _sign_array(matrix)
    eng = _SplitEngine(arr.astype(np.float64), alpha=2.0, budget=budget)
    return eng.dim(eng.full_mask)


def ldim_witness(matrix, budget: int = DEFAULT_BUDGET) -> tuple[int, WeightedMistakeTree]:
    arr = _sign_array(matrix)
    eng = _SplitEngine(arr.astype(np.float64), alpha=2.0, budget=budget)
    d = eng.dim(eng.full_mask)
    return d, WeightedMistakeTree(depth=d, alpha=2.0, root=eng.witness(eng.full_mask, d))


def ldim_alpha(matrix, alpha: float, budget: int = DEFAULT_BUDGET) -> int:
    """Exact threshold-split dimension at gap ``alpha`` of a real matrix."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    arr = as_real_array(matrix)
    eng = _SplitEngine(arr, alpha=alpha, budget=budget)
    return eng.dim(eng.full_mask)


def ldim_alpha_witness(
    matrix, alpha: float, budget: int = DEFAULT_BUDGET
) -> tuple[int, WeightedMistakeTree]:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    arr = as_real_array(matrix)
    eng = _SplitEngine(arr, alpha=alpha, budget=budget)
    d = eng.dim(eng.full_mask)
    return d, WeightedMistakeTree(depth=d, alpha=float(alpha), root=eng.witness(eng.full_mask, d))


@dataclass(frozen=True, eq=False)
class StabilizationResult:
    """Column subset plus a per-row summary function with counted error rates.

    ``row_values`` holds the majority sign (ints) or the grid value g (floats)
    per row; ``violation_rates`` the measured per-row disagreement rate on the
    returned columns; ``size_bound`` the guaranteed lower bound on ``len(columns)``
    implied by the number of shrink steps taken (``certified`` is False when a
    budget fallback decided some step, in which case the bound is not claimed).
    """

    kind: str
    columns: tuple[int, ...]
    row_values: np.ndarray
    violation_rates: np.ndarray
    eps: float
    alpha: float | None
    steps: int
    size_bound: float
    certified: bool

    def __post_init__(self):
        object.__setattr__(self, "row_values", _freeze(np.asarray(self.row_values)))
        object.__setattr__(self, "violation_rates", _freeze(np.asarray(self.violation_rates)))


def majority_stabilize(matrix, eps: float, budget: int = DEFAULT_BUDGET) -> StabilizationResult:
    """Shrink columns of a sign matrix until every row is eps-close to its majority.

    While some row disagrees with its majority sign on more than an eps
    fraction of the surviving columns, both of that row's column classes are
    nonempty; restricting to the class of smaller dimension (ties keep the
    minus class) strictly decreases the dimension, so there are at most
    dim-many restrictions and the kept set has size >= eps^steps * n.
    """
    arr = _sign_array(matrix)
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie strictly between 0 and 1/2")
    m, n = arr.shape
    cols = np.arange(n)
    steps = 0
    while True:
        sub = arr[:, cols]
        size = cols.size
        sums = sub.sum(axis=1)
        sigma = np.where(sums >= 0, 1, -1).astype(np.int64)
        rates = np.count_nonzero(sub != sigma[:, None], axis=1) / size
        violating = np.flatnonzero(rates > eps)
        if violating.size == 0:
            break
        x = int(violating[0])
        minus = cols[sub[x] == -1]
        plus = cols[sub[x] == 1]
        d_minus = ldim(arr[:, minus], budget=budget)
        d_plus = ldim(arr[:, plus], budget=budget)
        cols = minus if d_minus <= d_plus else plus
        steps += 1
        if steps > n:
            raise AssertionError("majority stabilization failed to terminate")
    return StabilizationResult(
        kind="majority",
        columns=tuple(int(y) for y in cols),
        row_values=sigma,
        violation_rates=rates,
        eps=float(eps),
        alpha=None,
        steps=steps,
        size_bound=n * eps**steps,
        certified=True,
    )


def bucket_stabilize(
    matrix, alpha: float, eps: float, budget: int = DEFAULT_BUDGET
) -> StabilizationResult:
    """Shrink columns of a real matrix until every row is near one grid value.

    The grid has step alpha over [-M, M] with M the input's max absolute
    entry (kept fixed through all shrink steps).  A row accepts grid value g
    when the fraction of surviving columns with |A(x,y) - g| >= 2*alpha is at
    most eps; the returned g(x) uses the smallest accepting grid index.  When
    some row accepts nothing, its fullest bucket and a disjoint bucket at
    distance >= 2 are compared by exact dimension and the smaller side is
    kept (ties keep the fullest bucket; on budget exhaustion the larger side
    is kept and the result is marked uncertified).  eps = 0 is allowed and
    demands full capture; the size bound is then vacuous after any shrink.
    """
    arr = as_real_array(matrix)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    m, n = arr.shape
    big_m = float(np.abs(arr).max())
    n_buckets = math.ceil(2 * big_m / alpha)
    while -big_m + n_buckets * alpha < big_m:  # guard against float shortfall
        n_buckets += 1
    grid = -big_m + alpha * np.arange(n_buckets + 1, dtype=np.float64)
    window = 2 * alpha
    cols = np.arange(n)
    steps = 0
    certified = True
    while True:
        sub = arr[:, cols]
        size = cols.size
        g = np.empty(m, dtype=np.float64)
        bad_row = -1
        for x in range(m):
            vals = sub[x]
            accepted = None
            for center in grid:
                outside = int(np.count_nonzero(np.abs(vals - center) >= window))
                if outside / size <= eps:
                    accepted = float(center)
                    break
            if accepted is None:
                bad_row = x
                break
            g[x] = accepted
        if bad_row < 0:
            break
        vals = sub[bad_row]
        counts = [
            int(np.count_nonzero((vals >= grid[i - 1]) & (vals <= grid[i])))
            for i in range(1, n_buckets + 1)
        ]
        i_star = int(np.argmax(counts)) + 1  # first maximum = smallest index
        j_star = None
        for threshold in (max(eps * size / n_buckets, 1.0), 1.0):
            for j in range(1, n_buckets + 1):
                if abs(j - i_star) >= 2 and counts[j - 1] >= threshold:
                    j_star = j
                    break
            if j_star is not None:
                break
        if j_star is None:
            raise AssertionError("no far bucket found for a non-accepting row")
        side_i = cols[(vals >= grid[i_star - 1]) & (vals <= grid[i_star])]
        side_j = cols[(vals >= grid[j_star - 1]) & (vals <= grid[j_star])]
        try:
            d_i = ldim_alpha(arr[:, side_i], alpha, budget=budget)
            d_j = ldim_alpha(arr[:, side_j], alpha, budget=budget)
            cols = side_i if d_i <= d_j else side_j
        except BudgetExceeded:
            certified = False
            cols = side_i if side_i.size >= side_j.size else side_j
        steps += 1
        if steps > n:
            raise AssertionError("bucket stabilization failed to terminate")
    sub = arr[:, cols]
    size = cols.size
    rates = np.array(
        [np.count_nonzero(np.abs(sub[x] - g[x]) >= window) / size for x in range(m)]
    )
    divisor = max(n_buckets, 1)
    return StabilizationResult(
        kind="bucket",
        columns=tuple(int(y) for y in cols),
        row_values=g,
        violation_rates=rates,
        eps=float(eps),
        alpha=float(alpha),
        steps=steps,
        size_bound=n * (eps / divisor) ** steps if steps else float(n),
        certified=certified,
    )
