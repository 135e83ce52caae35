"""Peeling pipeline end-to-end, exhaustive complexity oracle, experiment."""

import itertools
import math

import numpy as np
import pytest

from blockydecomp.core import BlockyMatrix, SignedBlockySum, is_blocky
from blockydecomp.factorize import GammaFactorization, factorization_from_blocky_sum
from blockydecomp.partition import greedy_l1_decompose
from blockydecomp.pipeline import (
    decompose,
    exact_block_complexity,
    norm_decrement_step,
    random_lower_bound_experiment,
)


def _exact_ones_fac(m: int, n: int) -> GammaFactorization:
    return GammaFactorization(
        U=np.ones((m, 1)), V=np.ones((1, n)), gamma=1.0, residual=0.0
    )


# ---------------------------------------------------------------------------
# Single decrement step


def test_step_all_ones_frozen_trace():
    A = np.ones((2, 2))
    step = norm_decrement_step(A, _exact_ones_fac(2, 2), eps=0.0)
    assert np.array_equal(step.a_prime, A)
    assert len(step.blocky_part) == 1
    assert np.array_equal(step.blocky_part.evaluate(), np.ones((2, 2), dtype=int))
    assert step.eps_out.eps == 0.0
    assert step.residual_factorization.gamma == 0.0
    assert not step.residual_factorization.V.any()
    assert step.certified
    assert step.diagnostics[0]["captured"] == 2 and step.diagnostics[0]["remaining"] == 0


def test_step_residual_certifies_remainder():
    A = np.ones((2, 3))
    step = norm_decrement_step(A, _exact_ones_fac(2, 3), eps=0.0)
    res = step.residual_factorization
    remainder = A - step.a_prime
    assert np.abs(remainder - res.product()).max() <= 1e-12
    assert res.gamma**2 <= 1.0 - 0.125 + 1e-9


def test_step_validation():
    A = np.ones((2, 2))
    fac = _exact_ones_fac(2, 2)
    with pytest.raises(ValueError):
        norm_decrement_step(A, fac, eps=0.25)
    with pytest.raises(ValueError):
        norm_decrement_step(A + 1.0, fac, eps=0.0)  # residual 1 above tol
    with pytest.raises(ValueError):
        norm_decrement_step(np.ones((3, 3)), fac, eps=0.0)  # shape mismatch
    zero_fac = GammaFactorization(
        U=np.zeros((2, 1)), V=np.zeros((1, 2)), gamma=0.0, residual=0.0
    )
    with pytest.raises(ValueError):
        norm_decrement_step(np.zeros((2, 2)), zero_fac, eps=0.0)  # rounds to zero


def test_step_rejects_understated_eps():
    A = np.full((2, 2), 0.8)
    fac = GammaFactorization(
        U=np.ones((2, 1)), V=np.full((1, 2), 0.8), gamma=0.8, residual=0.0
    )
    with pytest.raises(ValueError):
        norm_decrement_step(A, fac, eps=0.1)  # true distance to the grid is 0.2


# ---------------------------------------------------------------------------
# Full decomposition


def test_decompose_corner_matrix():
    A = [[1, 0], [1, 1]]
    s, rep = decompose(A)
    assert np.array_equal(s.evaluate(), A)
    assert rep.total_terms == 2 and len(rep.levels) == 1
    assert rep.gamma_squared_trajectory[0] == pytest.approx(4 / 3, rel=1e-5)
    assert rep.gamma_squared_trajectory[-1] == pytest.approx(0.0, abs=1e-9)
    assert rep.bound_fit == pytest.approx(2 / math.log(2) ** 2)


def test_decompose_identity_single_term():
    A = np.eye(4, dtype=int)
    s, rep = decompose(A)
    assert np.array_equal(s.evaluate(), A)
    assert rep.total_terms == 1


def test_decompose_single_blocky_with_exact_certificate():
    b = BlockyMatrix(shape=(3, 4), rectangles=(((0, 1), (0, 1)), ((2,), (3,))))
    s_in = SignedBlockySum(shape=(3, 4), terms=((1, b),))
    A = s_in.evaluate()
    s, rep = decompose(A, fac=factorization_from_blocky_sum(s_in))
    assert rep.total_terms == 1
    assert np.array_equal(s.evaluate(), A)


def test_decompose_zero_matrix():
    s, rep = decompose(np.zeros((3, 2), dtype=int))
    assert rep.total_terms == 0 and rep.levels == ()
    assert np.array_equal(s.evaluate(), np.zeros((3, 2), dtype=int))
    assert rep.gamma_squared_trajectory == (0.0,)


def test_decompose_refuses_bad_certificate():
    fac = GammaFactorization(U=[[1.0]], V=[[1.0]], gamma=1.0, residual=0.0)
    with pytest.raises(ValueError):
        decompose([[2]], fac=fac)
    with pytest.raises(ValueError):
        decompose([[2]], fac=fac, force=True)  # product rounds to 1, not 2


def test_decompose_random_exactness_and_invariants():
    rng = np.random.default_rng(50)
    for _ in range(6):
        A = rng.integers(-2, 3, size=(4, 5))
        s, rep = decompose(A, restarts=8, seed=3)
        assert np.array_equal(s.evaluate(), A)
        for sign, b in s.terms:
            assert sign in (-1, 1) and is_blocky(b.to_dense())
        gsq = rep.gamma_squared_trajectory
        assert all(gsq[i + 1] <= gsq[i] - 0.125 + 1e-9 for i in range(len(gsq) - 1))
        assert len(rep.levels) <= math.ceil(8 * gsq[0])
        eps = rep.eps_trajectory
        assert all(eps[i + 1] <= 3 * eps[i] + 1e-9 for i in range(len(eps) - 1))
        assert all(lv["additivity"] for lv in rep.levels)
        assert rep.total_terms == sum(lv["terms"] for lv in rep.levels) == len(s)


def test_report_json_shape():
    _, rep = decompose([[1, 0], [1, 1]])
    d = rep.to_json_dict()
    assert set(d) == {
        "levels",
        "totalTerms",
        "gammaSquaredTrajectory",
        "epsTrajectory",
        "boundFit",
    }
    assert d["totalTerms"] == rep.total_terms


def test_bound_fit_none_for_single_row():
    s, rep = decompose([[1, 1, 0]])
    assert rep.bound_fit is None
    assert np.array_equal(s.evaluate(), [[1, 1, 0]])


# ---------------------------------------------------------------------------
# Exhaustive complexity oracle, cross-checked by an even dumber search


def _brute_complexity_2x2(A: np.ndarray) -> int | None:
    if not A.any():
        return 0
    blockys = []
    for bits in range(1, 16):
        B = np.array([[bits & 1, (bits >> 1) & 1], [(bits >> 2) & 1, (bits >> 3) & 1]])
        if B.sum() != 3:  # the only non-blocky booleans on a 2x2 grid
            blockys.append(B)
    signed = [s * B for B in blockys for s in (1, -1)]
    for k in (1, 2, 3):
        for combo in itertools.product(signed, repeat=k):
            if np.array_equal(sum(combo), A):
                return k
    return None


def test_oracle_matches_brute_on_all_2x2_booleans():
    for bits in range(16):
        A = np.array([[bits & 1, (bits >> 1) & 1], [(bits >> 2) & 1, (bits >> 3) & 1]])
        assert exact_block_complexity(A) == _brute_complexity_2x2(A), A


def test_oracle_anchors():
    assert exact_block_complexity(np.zeros((2, 2), dtype=int)) == 0
    assert exact_block_complexity([[1, 1], [1, 1]]) == 1
    assert exact_block_complexity([[1, 1], [1, 0]]) == 2
    assert exact_block_complexity([[1, 1], [1, 0]], l_max=1) is None
    assert exact_block_complexity([[2]]) == 2
    assert exact_block_complexity([[-1]]) == 1


def test_oracle_validation():
    with pytest.raises(ValueError):
        exact_block_complexity(np.ones((3, 6), dtype=int))
    with pytest.raises(ValueError):
        exact_block_complexity([[1]], l_max=7)


def test_oracle_lower_bounds_other_term_counts():
    rng = np.random.default_rng(51)
    for _ in range(10):
        A = rng.integers(0, 2, size=(3, 4))
        v = exact_block_complexity(A)
        assert v is not None
        assert v <= len(greedy_l1_decompose(A))
        s, _ = decompose(A, restarts=6, seed=4)
        assert v <= len(s)


# ---------------------------------------------------------------------------
# Random-matrix experiment


def test_experiment_deterministic_and_shaped():
    r1 = random_lower_bound_experiment(3, 12, seed=9)
    r2 = random_lower_bound_experiment(3, 12, seed=9)
    assert r1 == r2
    assert set(r1) == {"n", "trials", "mode", "histogram", "min", "median", "max", "reference"}
    assert r1["mode"] == "exact"
    assert sum(r1["histogram"].values()) == 12
    assert r1["min"] <= r1["median"] <= r1["max"]
    assert r1["reference"] == pytest.approx(3 / (4 * math.log2(6)))


def test_experiment_one_by_one():
    r = random_lower_bound_experiment(1, 8, seed=2)
    assert set(r["histogram"]) <= {0, 1}


def test_experiment_pipeline_mode_and_validation():
    r = random_lower_bound_experiment(2, 4, seed=3, mode="pipeline-upper")
    assert r["mode"] == "pipeline-upper" and r["min"] >= 0
    with pytest.raises(ValueError):
        random_lower_bound_experiment(5, 2, mode="exact")
