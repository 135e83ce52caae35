"""Norm-bounded factorizations: certificates, solver, and lower bounds.

A factorization certificate writes A = U @ V with every row of U of unit
Euclidean norm (or less) and every column of V of norm at most ``gamma``;
the least achievable gamma is the factorization norm of A.  This module

* checks such certificates (``verify_factorization``),
* searches for good ones numerically (``gamma2_upper``),
* derives unconditional lower bounds from the max entry and from exact
  mistake-tree dimensions (``gamma2_lower``), and
* builds exact certificates for signed blocky sums
  (``factorization_from_blocky_sum``).

The solver ascends a concave reweighting of the trace norm: for row/column
weight vectors u, v on the probability simplex, the trace norm of
diag(sqrt(u)) @ A @ diag(sqrt(v)) is a lower bound on the factorization
norm, the maximizing weights make it tight, and each SVD of the weighted
matrix yields both a supergradient (for a multiplicative-weights step) and
a concrete factorization whose measured gamma upper-bounds the norm.  Plain
alternating least squares over (U, V) turned out to stall at non-optimal
balanced factorizations on invertible inputs, so the weight ascent drives
the search and least squares is kept for the final residual polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SignedBlockySum, _freeze, as_real_array
from .littlestone import BudgetExceeded, DEFAULT_BUDGET, ldim, ldim_alpha

__all__ = [
    "GammaFactorization",
    "VerificationReport",
    "NormBracket",
    "verify_factorization",
    "gamma2_upper",
    "gamma2_lower",
    "gamma2_bracket",
    "factorization_from_blocky_sum",
    "LOWER_BOUND_ALPHA_GRID",
]

LOWER_BOUND_ALPHA_GRID = (0.125, 0.25, 0.5, 1.0)


@dataclass(frozen=True, eq=False)
class GammaFactorization:
    """A = U @ V with unit-capped row norms in U and gamma-capped column norms in V.

    ``residual`` is the measured max-entry deviation ``‖A - U@V‖_max`` against
    the matrix the factorization was produced for.  The inner dimension is
    ``U.shape[1]``; solver outputs keep it at most ``rows + cols``, while exact
    blocky-sum certificates may use one inner coordinate per rectangle and can
    exceed that, so the cap is not enforced here.
    """

    U: np.ndarray
    V: np.ndarray
    gamma: float
    residual: float

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        if U.ndim != 2 or V.ndim != 2 or U.shape[1] != V.shape[0]:
            raise ValueError("U and V must be 2-d with matching inner dimension")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be a finite nonnegative real")
        if not (self.residual >= 0 and math.isfinite(self.residual)):
            raise ValueError("residual must be a finite nonnegative real")
        slack = 1e-6 * max(1.0, self.gamma)
        if U.size and _max_row_norm(U) > 1 + slack:
            raise ValueError("a row of U exceeds unit norm")
        if V.size and _max_col_norm(V) > self.gamma + slack:
            raise ValueError("a column of V exceeds the gamma cap")
        object.__setattr__(self, "U", _freeze(U))
        object.__setattr__(self, "V", _freeze(V))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "residual", float(self.residual))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.U.shape[0], self.V.shape[1])

    @property
    def inner_dim(self) -> int:
        return self.U.shape[1]

    def product(self) -> np.ndarray:
        return self.U @ self.V

    def certifies(self, tol: float = 1e-9) -> bool:
        return self.residual <= tol


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    max_row_norm: float
    max_col_norm: float
    residual: float
    gamma: float
    tol: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class NormBracket:
    """Certified two-sided estimate: lower ≤ factorization norm ≤ upper."""

    lower: float
    upper: float
    lower_witness: str
    upper_witness: GammaFactorization

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError("lower bound must be nonnegative")
        if self.lower > self.upper + 1e-6 * max(1.0, self.upper):
            raise ValueError(
                f"inconsistent bracket: lower {self.lower:.9g} > upper {self.upper:.9g}"
            )


def _max_row_norm(U: np.ndarray) -> float:
    if U.shape[0] == 0:
        return 0.0
    return float(np.sqrt(np.einsum("ij,ij->i", U, U).max(initial=0.0)))


def _max_col_norm(V: np.ndarray) -> float:
    if V.shape[1] == 0:
        return 0.0
    return float(np.sqrt(np.einsum("ij,ij->j", V, V).max(initial=0.0)))


def verify_factorization(matrix, fac: GammaFactorization, tol: float = 1e-9) -> VerificationReport:
    """Check a certificate against a matrix; the report carries the measured maxima."""
    A = as_real_array(matrix)
    if fac.shape != A.shape:
        raise ValueError(f"factorization shape {fac.shape} does not match matrix {A.shape}")
    row_norm = _max_row_norm(fac.U)
    col_norm = _max_col_norm(fac.V)
    resid = float(np.abs(A - fac.product()).max(initial=0.0))
    ok = row_norm <= 1 + tol and col_norm <= fac.gamma + tol and resid <= tol
    return VerificationReport(
        ok=ok,
        max_row_norm=row_norm,
        max_col_norm=col_norm,
        residual=resid,
        gamma=fac.gamma,
        tol=float(tol),
    )


def _ascend_weights(A: np.ndarray, u0: np.ndarray, v0: np.ndarray, max_iter: int):
    """Multiplicative-weights ascent; returns (best_cert, best_L, best_R).

    Each iteration SVDs the weighted matrix; the balanced factors L, R give
    supergradient coordinates (squared row norms of L, squared column norms
    of R) and a certificate maxrow(L)*maxcol(R).  Stops on a small gap
    between certificate and trace-norm value, or after 60 stale iterations.
    """
    eta = 0.35
    u, v = u0.copy(), v0.copy()
    best_cert = math.inf
    best_L = best_R = None
    stale = 0
    for _ in range(max_iter):
        su, sv = np.sqrt(u), np.sqrt(v)
        W = su[:, None] * A * sv[None, :]
        P, sig, Qt = np.linalg.svd(W, full_matrices=False)
        f_val = float(sig.sum())
        s_half = np.sqrt(sig)
        L = (P * s_half[None, :]) / su[:, None]
        R = (s_half[:, None] * Qt) / sv[None, :]
        gu = np.einsum("ij,ij->i", L, L)
        gv = np.einsum("ij,ij->j", R, R)
        cert = math.sqrt(float(gu.max()) * float(gv.max()))
        if cert < best_cert - 1e-12:
            best_cert, best_L, best_R = cert, L, R
            stale = 0
        else:
            stale += 1
        if cert - f_val <= 1e-7 * max(1.0, f_val) or stale >= 60:
            break
        u = u * np.exp(eta * gu / gu.max())
        u = np.maximum(u, 1e-250)
        u /= u.sum()
        v = v * np.exp(eta * gv / gv.max())
        v = np.maximum(v, 1e-250)
        v /= v.sum()
    return best_cert, best_L, best_R


def gamma2_upper(
    matrix,
    restarts: int = 16,
    max_iter: int = 400,
    tol: float = 1e-9,
    seed: int = 0,
    inner_dim: int | None = None,
) -> GammaFactorization:
    """Numerical upper bound on the factorization norm, as a checked certificate.

    Runs the weight ascent from a uniform start plus ``restarts`` seeded random
    starts, keeps the first factorization achieving the smallest measured gamma
    (1e-12 slack), then polishes the residual with up to three alternating
    exact least-squares solves and rescales so rows of U are unit-capped.
    The inner dimension defaults to min(rows, cols) of the nonzero core and can
    be padded up to rows + cols via ``inner_dim``.  A result whose residual
    still exceeds ``tol`` is returned as-is (non-certifying); callers decide.
    """
    A_full = as_real_array(matrix)
    m, n = A_full.shape
    rows_keep = np.flatnonzero(np.abs(A_full).sum(axis=1))
    cols_keep = np.flatnonzero(np.abs(A_full).sum(axis=0))
    if rows_keep.size == 0 or cols_keep.size == 0:
        t = 0 if inner_dim is None else min(int(inner_dim), m + n)
        return GammaFactorization(
            U=np.zeros((m, t)), V=np.zeros((t, n)), gamma=0.0, residual=0.0
        )
    A = A_full[np.ix_(rows_keep, cols_keep)]
    ms, ns = A.shape
    t = min(ms, ns)

    best_gamma = math.inf
    best_L = best_R = None
    for r in range(restarts + 1):
        if r == 0:
            u0 = np.full(ms, 1.0 / ms)
            v0 = np.full(ns, 1.0 / ns)
        else:
            rng = np.random.default_rng([seed, r])
            u0 = rng.exponential(size=ms)
            u0 /= u0.sum()
            v0 = rng.exponential(size=ns)
            v0 /= v0.sum()
        cert, L, R = _ascend_weights(A, u0, v0, max_iter)
        if cert < best_gamma - 1e-12:
            best_gamma, best_L, best_R = cert, L, R

    # Residual polish: alternating exact least squares keeps the factors near
    # the optimum found above while driving ‖A - LR‖_max to roundoff.
    L, R = best_L, best_R
    candidates = [(float(np.abs(A - L @ R).max()), _max_row_norm(L) * _max_col_norm(R), L, R)]
    for _ in range(3):
        R = np.linalg.lstsq(L, A, rcond=None)[0]
        L = np.linalg.lstsq(R.T, A.T, rcond=None)[0].T
        resid = float(np.abs(A - L @ R).max())
        candidates.append((resid, _max_row_norm(L) * _max_col_norm(R), L, R))
        if resid <= tol:
            break
    # Prefer a certifying candidate of minimal gamma; with none, minimal residual.
    certifying = [c for c in candidates if c[0] <= tol]
    pool = certifying if certifying else candidates
    resid, gamma, L, R = min(pool, key=lambda c: (c[1], c[0]))

    s = _max_row_norm(L)
    if s > 0:
        L = L / s
        R = R * s
    # Re-embed into the original frame; padded rows/columns are zero.
    U_out = np.zeros((m, t))
    V_out = np.zeros((t, n))
    U_out[rows_keep] = L
    V_out[:, cols_keep] = R
    if inner_dim is not None:
        want = min(int(inner_dim), m + n)
        if want < t:
            raise ValueError(f"inner_dim {inner_dim} below the solver dimension {t}")
        if want > t:
            U_out = np.hstack([U_out, np.zeros((m, want - t))])
            V_out = np.vstack([V_out, np.zeros((want - t, n))])
    # Outward-rounded measurement: the certificate claim is "norm ≤ gamma",
    # so roundoff in the norm computation must never undercut the true value.
    gamma = _max_row_norm(U_out) * _max_col_norm(V_out) * (1 + 5e-16)
    resid = float(np.abs(A_full - U_out @ V_out).max())
    return GammaFactorization(U=U_out, V=V_out, gamma=gamma, residual=resid)


def gamma2_lower(matrix, budget: int = DEFAULT_BUDGET) -> tuple[float, str]:
    """Best available lower bound on the factorization norm, with its source tag.

    Combines the max-entry bound, sqrt of the exact mistake-tree dimension for
    sign matrices, and the weighted-dimension bound
    alpha*sqrt(d_alpha)/(2(maxEntry+1)) - 1 over a fixed alpha grid.  Exact
    recursions that blow the node budget are skipped (the cheaper bounds are
    kept), so the function always returns.
    """
    A = as_real_array(matrix)
    best = float(np.abs(A).max(initial=0.0))
    tag = "max-entry"
    if A.size == 0 or not A.any():
        return best, tag
    M = best
    if np.all(np.abs(A) == 1):
        try:
            d = ldim(A, budget=budget)
            cand = math.sqrt(d)
            if cand > best:
                best, tag = cand, "sqrt-Littlestone"
        except BudgetExceeded:
            pass
    for alpha in LOWER_BOUND_ALPHA_GRID:
        try:
            d = ldim_alpha(A, alpha, budget=budget)
        except BudgetExceeded:
            continue
        cand = alpha * math.sqrt(d) / (2 * (M + 1)) - 1
        if cand > best:
            best, tag = cand, "weighted-Littlestone"
    return best, tag


def gamma2_bracket(
    matrix,
    restarts: int = 16,
    max_iter: int = 400,
    tol: float = 1e-9,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> NormBracket:
    """Two-sided estimate: exact lower bounds plus a solver certificate."""
    upper = gamma2_upper(matrix, restarts=restarts, max_iter=max_iter, tol=tol, seed=seed)
    lower, witness = gamma2_lower(matrix, budget=budget)
    return NormBracket(
        lower=lower, upper=upper.gamma, lower_witness=witness, upper_witness=upper
    )


def factorization_from_blocky_sum(decomp: SignedBlockySum) -> GammaFactorization:
    """Exact certificate for the dense value of a signed blocky sum.

    Each rectangle (S, T) of term i contributes one inner coordinate carrying
    sign_i * indicator(S) x indicator(T); scaling rows by 1/sqrt(terms) and
    columns by sqrt(terms) caps row norms at 1 and column norms at the term
    count, so gamma ≤ len(decomp).  With zero terms this is the empty
    certificate of the zero matrix.
    """
    m, n = decomp.shape
    L = len(decomp.terms)
    if L == 0:
        return GammaFactorization(U=np.zeros((m, 0)), V=np.zeros((0, n)), gamma=0.0, residual=0.0)
    cols_U: list[np.ndarray] = []
    rows_V: list[np.ndarray] = []
    r = 1.0 / math.sqrt(L)
    c = math.sqrt(L)
    for sign, term in decomp.terms:
        for rows, cols in term.rectangles:
            ucol = np.zeros(m)
            ucol[list(rows)] = r
            vrow = np.zeros(n)
            vrow[list(cols)] = sign * c
            cols_U.append(ucol)
            rows_V.append(vrow)
    U = np.column_stack(cols_U)
    V = np.vstack(rows_V)
    target = decomp.evaluate().astype(np.float64)
    resid = float(np.abs(target - U @ V).max(initial=0.0))
    return GammaFactorization(U=U, V=V, gamma=float(L), residual=resid)
