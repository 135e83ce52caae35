"""Norm-decrement decomposition driver and the exact block-complexity oracle.

``norm_decrement_step`` performs one level of the construction: given a real
matrix with a norm-``gamma`` factorization certificate whose entries are all
eps-close to integers, it splits off a signed blocky sum accounting for the
integer part of a structured piece A', and returns a residual factorization
(same U, new right factor) whose columns all lost at least 1/8 in squared
norm.  ``decompose`` iterates the step until the residual rounds to zero and
verifies the reassembled integer matrix exactly.  ``exact_block_complexity``
is the desk-scale brute-force oracle the test battery measures both against.

The step's inner loop, on the columns where the rounded matrix is nonzero:
greedy-partition those columns by the rounded values, stabilize each class
onto one near-integer grid value per row (window 1/4, so columns surviving
a class share a single integer per row), average the surviving right-factor
columns, and keep the columns whose vectors move markedly closer to that
average.  Rows paired with the class's defining nonzero integer keep an
inner product of at least 1/2 with the average, which is what makes the
squared column norms of the residual drop by the fixed 1/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AlmostIntegerCertificate,
    BlockyMatrix,
    SignedBlockySum,
    _freeze,
    as_int_array,
    as_real_array,
    round_half_down,
)
from .factorize import GammaFactorization, gamma2_upper, verify_factorization
from .littlestone import DEFAULT_BUDGET, bucket_stabilize
from .partition import greedy_l1_decompose, greedy_partition, subtract_average

__all__ = [
    "RoundingDriftError",
    "ReconstructionError",
    "DecrementStep",
    "PipelineReport",
    "norm_decrement_step",
    "decompose",
    "exact_block_complexity",
    "random_lower_bound_experiment",
]


class RoundingDriftError(RuntimeError):
    """A value scheduled for rounding drifted outside the safe quarter-window."""


class ReconstructionError(RuntimeError):
    """The assembled signed blocky sum failed to reproduce its target exactly."""


@dataclass(frozen=True, eq=False)
class DecrementStep:
    """One level of the decomposition.

    ``a_prime`` is the structured part (classwise-constant on the captured
    columns, untouched on columns where the rounding is zero);
    ``residual_factorization`` certifies A - a_prime with the same left factor
    and strictly shorter right-factor columns; ``blocky_part`` evaluates
    exactly to the rounding of ``a_prime``; ``eps_out`` measures how far
    ``a_prime`` sits from integrality (at most twice the incoming eps, plus
    roundoff).  ``diagnostics`` records per-round class sizes; ``certified``
    is False when any stabilization took a budget fallback.
    """

    a_prime: np.ndarray
    residual_factorization: GammaFactorization
    blocky_part: SignedBlockySum
    eps_out: AlmostIntegerCertificate
    diagnostics: tuple
    certified: bool

    def __post_init__(self):
        object.__setattr__(self, "a_prime", _freeze(np.asarray(self.a_prime)))


def _nearest_int_dist(values: np.ndarray) -> np.ndarray:
    return np.abs(values - np.round(values))


def norm_decrement_step(
    matrix,
    fac: GammaFactorization,
    eps: float,
    tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
) -> DecrementStep:
    """Split one blocky layer off an eps-almost-integer matrix.

    Requires the certificate to reproduce the matrix within ``tol``, eps < 1/4,
    and a nonzero rounding.  Aborts with RoundingDriftError if any grid value
    chosen for rounding is farther than 1/4 + eps (plus slack) from an integer,
    which signals that the almost-integer certificate no longer holds.
    """
    A = as_real_array(matrix)
    m, n = A.shape
    if fac.shape != (m, n):
        raise ValueError(f"factorization shape {fac.shape} does not match matrix {A.shape}")
    if not (0 <= eps < 0.25):
        raise ValueError(f"eps must lie in [0, 1/4), got {eps}")
    resid = float(np.abs(A - fac.product()).max(initial=0.0))
    if resid > tol:
        raise ValueError(f"factorization residual {resid:.3e} exceeds tol {tol:.3e}")
    A_Z = round_half_down(A)
    if not A_Z.any():
        raise ValueError("rounded matrix is zero; nothing to decrement")
    measured_eps = float(np.abs(A - A_Z).max())
    if measured_eps > eps + 1e-12:
        raise ValueError(
            f"matrix is only {measured_eps:.3e}-almost-integer, above certified eps {eps:.3e}"
        )
    U, V = fac.U, fac.V
    gamma = fac.gamma
    eps1 = max(eps, 2.0**-30) / (10 * gamma)

    a_prime = A.copy()
    v_prime = np.zeros_like(V)  # zero residual columns where A_Z is zero
    active = np.flatnonzero(A_Z.any(axis=0))
    cell_values: list[np.ndarray] = []  # integer column per captured class cell
    cell_members: list[np.ndarray] = []
    rounds = []
    certified = True
    while active.size:
        part = greedy_partition(A_Z[:, active])
        round_cells = []
        captured_here: list[np.ndarray] = []
        for cls in part.classes:
            S = active[list(cls.columns)]
            stab = bucket_stabilize(A[:, S], alpha=0.125, eps=eps1, budget=budget)
            certified = certified and stab.certified
            S1 = S[list(stab.columns)]
            g = stab.row_values
            drift = float(_nearest_int_dist(g).max())
            if drift > 0.25 + eps + 1e-9:
                raise RoundingDriftError(
                    f"grid value at distance {drift:.6f} from the integers "
                    f"(allowed {0.25 + eps:.6f}); eps certificate violated"
                )
            g_int = round_half_down(g)
            v_hat = V[:, S1].mean(axis=1)
            anchor = abs(float(U[cls.row] @ v_hat))
            if anchor < 0.5 - 1e-9:
                raise RoundingDriftError(
                    f"class anchor inner product {anchor:.6f} fell below 1/2; "
                    "eps certificate violated"
                )
            split = subtract_average(V[:, S1].T, gamma)
            S2 = S1[list(split.kept)]
            a_prime[:, S2] = (U @ split.average)[:, None]
            v_prime[:, S2] = V[:, S2] - split.average[:, None]
            cell_values.append(g_int)
            cell_members.append(S2)
            captured_here.append(S2)
            round_cells.append(
                {"size": int(S.size), "stabilized": int(S1.size), "kept": int(S2.size)}
            )
        captured = np.concatenate(captured_here)
        rounds.append(
            {
                "classes": round_cells,
                "captured": int(captured.size),
                "remaining": int(active.size - captured.size),
            }
        )
        active = np.setdiff1d(active, captured, assume_unique=True)

    res_cols_sq = np.einsum("ij,ij->j", v_prime, v_prime)
    worst = float(res_cols_sq.max(initial=0.0))
    if worst > gamma * gamma - 0.125 + 1e-9:
        raise AssertionError(
            f"residual column norm^2 {worst:.9f} exceeds gamma^2 - 1/8 = "
            f"{gamma * gamma - 0.125:.9f}"
        )
    gamma_next = math.sqrt(worst) * (1 + 5e-16)
    resid_target = A - a_prime
    res_fac = GammaFactorization(
        U=U,
        V=v_prime,
        gamma=gamma_next,
        residual=float(np.abs(resid_target - U @ v_prime).max(initial=0.0)),
    )

    # Blocky accounting happens on the compressed cell matrix (one column per
    # captured class), then rectangles are expanded back to member columns;
    # cells partition the captured columns, so blockiness is preserved.
    blocky_part = SignedBlockySum(shape=(m, n), terms=())
    if cell_values:
        G = np.stack(cell_values, axis=1)
        small = greedy_l1_decompose(G)
        terms = []
        for sign, term in small.terms:
            rects = []
            for rows, cells in term.rectangles:
                members = np.concatenate([cell_members[c] for c in cells])
                rects.append((rows, tuple(int(y) for y in np.sort(members))))
            terms.append((sign, BlockyMatrix(shape=(m, n), rectangles=tuple(rects))))
        blocky_part = SignedBlockySum(shape=(m, n), terms=tuple(terms))
    if not np.array_equal(blocky_part.evaluate(), round_half_down(a_prime)):
        raise ReconstructionError("blocky layer does not match the rounded structured part")

    eps_out = float(_nearest_int_dist(a_prime).max(initial=0.0))
    if eps_out > 2 * eps + 1e-9:
        raise AssertionError(
            f"structured part drifted to {eps_out:.3e} from integrality, "
            f"above twice the incoming eps {eps:.3e}"
        )
    return DecrementStep(
        a_prime=a_prime,
        residual_factorization=res_fac,
        blocky_part=blocky_part,
        eps_out=AlmostIntegerCertificate(eps=eps_out),
        diagnostics=tuple(rounds),
        certified=certified,
    )


@dataclass(frozen=True, eq=False)
class PipelineReport:
    """Per-level summaries plus the trajectories the term-count bound rides on.

    ``bound_fit`` is total terms divided by ln(min(m, n))^2, the shape of the
    proved asymptotic bound; it is None for single-row/column inputs where
    that denominator vanishes.
    """

    levels: tuple
    total_terms: int
    gamma_squared_trajectory: tuple
    eps_trajectory: tuple
    bound_fit: float | None

    def to_json_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "totalTerms": self.total_terms,
            "gammaSquaredTrajectory": list(self.gamma_squared_trajectory),
            "epsTrajectory": list(self.eps_trajectory),
            "boundFit": self.bound_fit,
        }


def decompose(
    matrix,
    fac: GammaFactorization | None = None,
    tol: float = 1e-9,
    restarts: int = 16,
    max_iter: int = 400,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    force: bool = False,
) -> tuple[SignedBlockySum, PipelineReport]:
    """Full signed blocky decomposition of an integer matrix, verified exactly.

    Uses the supplied factorization certificate (or computes one) and peels
    norm-decrement levels until the working product rounds to zero.  The
    returned sum is checked entry-for-entry against the input; a mismatch
    raises ReconstructionError with a witness entry.  A certificate whose
    residual exceeds ``tol`` is refused unless ``force`` is set.
    """
    A = as_int_array(matrix)
    m, n = A.shape
    if fac is None:
        fac = gamma2_upper(A, restarts=restarts, max_iter=max_iter, tol=tol, seed=seed)
    report = verify_factorization(A.astype(np.float64), fac, tol)
    if not report.ok and not force:
        raise ValueError(
            f"factorization does not certify the input at tol {tol:.3e} "
            f"(row norm {report.max_row_norm:.9f}, column norm {report.max_col_norm:.9f} "
            f"vs gamma {fac.gamma:.9f}, residual {report.residual:.3e}); "
            "pass force=True to proceed anyway"
        )

    U = fac.U
    A_cur = U @ fac.V
    if not np.array_equal(round_half_down(A_cur), A):
        raise ValueError("certificate product does not round to the input matrix")
    gamma = fac.gamma
    gamma0_sq = gamma * gamma
    level_cap = math.ceil(8 * gamma0_sq) if gamma0_sq > 0 else 0
    eps_cur = float(np.abs(A_cur - round_half_down(A_cur)).max(initial=0.0))
    fac_cur = fac

    total = SignedBlockySum(shape=(m, n), terms=())
    levels = []
    gamma_sq_traj = [gamma * gamma]
    eps_traj = [eps_cur]
    level = 0
    while round_half_down(A_cur).any():
        if level >= level_cap:
            raise AssertionError(
                f"level count exceeded the cap {level_cap} implied by gamma0^2 = {gamma0_sq:.6f}"
            )
        step = norm_decrement_step(A_cur, fac_cur, eps_cur, tol=tol, budget=budget)
        remainder = A_cur - step.a_prime
        lhs = round_half_down(A_cur)
        additive = np.array_equal(
            lhs, round_half_down(step.a_prime) + round_half_down(remainder)
        )
        if not additive:
            raise ReconstructionError(
                f"rounding additivity failed at level {level}: drift outside the safe window"
            )
        total = total.extended(step.blocky_part)

        fac_next = step.residual_factorization
        A_next = U @ fac_next.V
        if not np.array_equal(round_half_down(A_next), round_half_down(remainder)):
            raise ReconstructionError(
                f"recomputed residual product rounds differently at level {level}"
            )
        eps_next = float(_nearest_int_dist(A_next).max(initial=0.0))
        if eps_next > 3 * eps_cur + 1e-9:
            raise AssertionError(
                f"eps drift {eps_next:.3e} above 3x incoming {eps_cur:.3e} at level {level}"
            )
        g_prev_sq = fac_cur.gamma**2
        g_next_sq = fac_next.gamma**2
        if g_next_sq > g_prev_sq - 0.125 + 1e-9:
            raise AssertionError(
                f"gamma^2 decrement below 1/8 at level {level}: {g_prev_sq:.6f} -> {g_next_sq:.6f}"
            )
        levels.append(
            {
                "level": level,
                "terms": len(step.blocky_part),
                "rounds": len(step.diagnostics),
                "epsIn": eps_cur,
                "epsOut": step.eps_out.eps,
                "gammaSquaredBefore": g_prev_sq,
                "gammaSquaredAfter": g_next_sq,
                "additivity": bool(additive),
                "certified": bool(step.certified),
                "roundDetails": list(step.diagnostics),
            }
        )
        gamma_sq_traj.append(g_next_sq)
        eps_traj.append(eps_next)
        A_cur, fac_cur, eps_cur = A_next, fac_next, eps_next
        level += 1

    rebuilt = total.evaluate()
    if not np.array_equal(rebuilt, A):
        bad = np.argwhere(rebuilt != A)[0]
        x, y = int(bad[0]), int(bad[1])
        raise ReconstructionError(
            f"reconstruction mismatch at ({x}, {y}): expected {int(A[x, y])}, got {int(rebuilt[x, y])}"
        )
    min_side = min(m, n)
    denom = math.log(min_side) ** 2 if min_side >= 2 else 0.0
    bound_fit = (len(total) / denom) if denom > 0 else None
    report = PipelineReport(
        levels=tuple(levels),
        total_terms=len(total),
        gamma_squared_trajectory=tuple(gamma_sq_traj),
        eps_trajectory=tuple(eps_traj),
        bound_fit=bound_fit,
    )
    return total, report


# ---------------------------------------------------------------------------
# Brute-force oracle


_BLOCKY_LIBRARY: dict[tuple[int, int], np.ndarray] = {}


def _blocky_library(m: int, n: int) -> np.ndarray:
    """All boolean m×n blocky matrices as an int8 array (count, m, n)."""
    key = (m, n)
    cached = _BLOCKY_LIBRARY.get(key)
    if cached is not None:
        return cached
    count = 1 << (m * n)
    codes = np.arange(count, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(m * n, dtype=np.uint32)[None, :]) & 1
    cand = bits.astype(np.int8).reshape(count, m, n)
    ok = np.ones(count, dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(n):
                for l in range(k + 1, n):
                    quad = (
                        cand[:, i, k].astype(np.int16)
                        + cand[:, i, l]
                        + cand[:, j, k]
                        + cand[:, j, l]
                    )
                    ok &= quad != 3
    lib = cand[ok]
    lib = lib[1:]  # drop the zero matrix; it contributes nothing to a sum
    _BLOCKY_LIBRARY[key] = lib
    return lib


def exact_block_complexity(matrix, l_max: int = 6) -> int | None:
    """Minimum number of signed blocky terms summing to the matrix, or None.

    Exhaustive: enumerates every blocky matrix of the given shape and runs
    iterative-deepening search over signed sums, memoizing failed residuals.
    Restricted to m*n <= 16 and l_max <= 6 by precondition.  None means the
    complexity exceeds l_max.
    """
    A = as_int_array(matrix)
    m, n = A.shape
    if m * n > 16:
        raise ValueError(f"oracle limited to m*n <= 16 entries, got {m}x{n}")
    if not (0 <= l_max <= 6):
        raise ValueError(f"l_max must lie in [0, 6], got {l_max}")
    if not A.any():
        return 0
    lib = _blocky_library(m, n)
    signed = np.concatenate([lib, -lib], axis=0).astype(np.int8)
    one_sums = {s.tobytes() for s in signed}
    pair_sums: set[bytes] | None = None
    if (2 * lib.shape[0]) ** 2 <= 2_000_000:
        sums = signed[:, None, :, :] + signed[None, :, :, :]
        pair_sums = {s.tobytes() for s in sums.reshape(-1, m, n)}

    ub = len(greedy_l1_decompose(A))
    top = min(l_max, ub)
    fails: set[tuple[bytes, int]] = set()

    def reachable(R: np.ndarray, k: int) -> bool:
        if not R.any():
            return True
        if k <= 0 or np.abs(R).max() > k:
            return False
        key = (R.tobytes(), k)
        if key in fails:
            return False
        raw = R.astype(np.int8).tobytes()
        if k == 1:
            hit = raw in one_sums
        elif k == 2:
            # "at most two terms": one exact term also qualifies
            if pair_sums is not None:
                hit = raw in one_sums or raw in pair_sums
            else:
                hit = raw in one_sums or any(
                    (R - B).astype(np.int8).tobytes() in one_sums for B in signed
                )
        else:
            hit = any(reachable(R - B, k - 1) for B in signed)
        if not hit:
            fails.add(key)
        return hit

    # reachable() is exact, and the greedy witness guarantees a hit by k = ub,
    # so falling through means the complexity genuinely exceeds l_max.
    for k in range(1, top + 1):
        if reachable(A, k):
            return k
    return None


def random_lower_bound_experiment(n: int, trials: int, seed: int = 0, mode: str | None = None) -> dict:
    """Distribution of block complexity over uniform random boolean matrices.

    Exact mode (n <= 4) uses the brute-force oracle; pipeline mode reports
    decomposition term counts, which are only upper bounds.  The reference
    value n / (4 log2(2n)) is the proved high-probability lower bound for
    random boolean matrices; the report is observational.
    """
    if mode is None:
        mode = "exact" if n <= 4 else "pipeline-upper"
    if mode == "exact" and n > 4:
        raise ValueError("exact mode requires n <= 4")
    values = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        A = rng.integers(0, 2, size=(n, n))
        if mode == "exact":
            v = exact_block_complexity(A)
            if v is None:
                v = len(greedy_l1_decompose(A))
        else:
            s, _ = decompose(A, seed=seed)
            v = len(s)
        values.append(int(v))
    values_arr = np.array(values)
    hist = {int(k): int(c) for k, c in zip(*np.unique(values_arr, return_counts=True))}
    return {
        "n": n,
        "trials": trials,
        "mode": mode,
        "histogram": hist,
        "min": int(values_arr.min()),
        "median": float(np.median(values_arr)),
        "max": int(values_arr.max()),
        "reference": n / (4 * math.log2(2 * n)),
    }
