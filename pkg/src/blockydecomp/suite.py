"""The ten-point verification battery, shared by pytest and the CLI.

Each criterion is a standalone function taking a RunConfig and a shared
SuiteContext (which lazily caches the two expensive corpora: decompositions
of all 512 boolean 3x3 matrices and of 50 generated blocky-sum instances).
Results carry pass/fail, a human-readable detail line, elapsed seconds, and
machine-readable rows for plot tables.  ``run_suite`` executes a selection
in order and optionally writes results plus tab-separated data tables.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .core import is_blocky, round_half_down
from .factorize import gamma2_upper, verify_factorization
from .generators import GeneratorSpec, generate
from .littlestone import bucket_stabilize, ldim, ldim_alpha, majority_stabilize
from .partition import greedy_l1_decompose, greedy_partition, subtract_average
from .pipeline import decompose, exact_block_complexity, random_lower_bound_experiment

__all__ = ["CriterionResult", "SuiteContext", "run_suite", "CRITERIA"]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float
    data: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} criterion {self.number} ({self.name}): {self.detail} "
            f"[{self.seconds:.1f}s / limit {self.limit:.0f}s]"
        )


class SuiteContext:
    """Lazy caches for corpora reused across criteria 6-10."""

    def __init__(self, config: RunConfig | None = None):
        self.config = config or RunConfig()
        self._boolean3: list[dict] | None = None
        self._blocky50: list[dict] | None = None

    def boolean3x3(self) -> list[dict]:
        if self._boolean3 is None:
            cfg = self.config
            out = []
            for code in range(512):
                A = np.array([(code >> k) & 1 for k in range(9)], dtype=np.int64).reshape(3, 3)
                s, rep = decompose(
                    A,
                    tol=cfg.tol,
                    restarts=cfg.restarts,
                    max_iter=cfg.max_iter,
                    seed=cfg.seed,
                    budget=cfg.littlestone_budget,
                )
                out.append({"code": code, "matrix": A, "sum": s, "report": rep})
            self._boolean3 = out
        return self._boolean3

    def blocky_instances(self) -> list[dict]:
        if self._blocky50 is None:
            cfg = self.config
            out = []
            for i in range(50):
                rng = np.random.default_rng([cfg.seed, 6, i])
                n = int(rng.integers(4, 65))
                m = int(rng.integers(4, 65))
                l0 = int(rng.integers(1, 5))
                inst = generate(
                    GeneratorSpec(kind="random-blocky-sum", n=n, m=m, term_count=l0), seed=i
                )
                s, rep = decompose(
                    inst.matrix,
                    fac=inst.certificate,
                    tol=cfg.tol,
                    seed=cfg.seed,
                    budget=cfg.littlestone_budget,
                )
                out.append({"id": i, "instance": inst, "sum": s, "report": rep})
            self._blocky50 = out
        return self._blocky50


def criterion_1(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Pinned norm values: the 2/sqrt(3) witness and the exact-1 anchors."""
    t0 = time.perf_counter()
    kw = dict(restarts=config.restarts, max_iter=config.max_iter, tol=config.tol, seed=config.seed)
    g_l = gamma2_upper([[1, 0], [1, 1]], **kw).gamma
    g_i = gamma2_upper(np.eye(3), **kw).gamma
    g_j = gamma2_upper(np.ones((3, 3)), **kw).gamma
    ok = (
        1.15470 <= g_l <= 1.15570
        and 1.0 <= g_i <= 1.0 + 1e-6
        and 1.0 <= g_j <= 1.0 + 1e-6
    )
    dt = time.perf_counter() - t0
    detail = f"[[1,0],[1,1]] -> {g_l:.6f} (window [1.15470, 1.15570]); identity -> {g_i:.9f}; all-ones -> {g_j:.9f}"
    return CriterionResult(1, "norm value reproduction", ok and dt < 1.0, detail, dt, 1.0,
                           {"gammas": {"lower-triangular": g_l, "identity": g_i, "all-ones": g_j}})


def criterion_2(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Dimension-vs-norm inequalities on 200 random sign matrices."""
    t0 = time.perf_counter()
    worst_sqrt = -math.inf
    worst_alpha = -math.inf
    bad = 0
    for t in range(200):
        rng = np.random.default_rng([config.seed, 2, t])
        m = int(rng.integers(2, 7))
        n = int(rng.integers(2, 11))
        A = rng.choice([-1.0, 1.0], size=(m, n))
        gamma = gamma2_upper(A, restarts=config.restarts, max_iter=config.max_iter,
                             tol=config.tol, seed=config.seed).gamma
        d = ldim(A, budget=config.littlestone_budget)
        worst_sqrt = max(worst_sqrt, math.sqrt(d) - gamma)
        if math.sqrt(d) > gamma + 1e-6:
            bad += 1
        for alpha in (0.125, 0.25, 0.5, 1.0):
            da = ldim_alpha(A, alpha, budget=config.littlestone_budget)
            cap = (2 * (1.0 + 1) * (gamma + 1) / alpha) ** 2 + 1e-6
            worst_alpha = max(worst_alpha, da - cap)
            if da > cap:
                bad += 1
    dt = time.perf_counter() - t0
    detail = (
        f"200 sign matrices <= 6x10: {bad} violations; worst sqrt(dim)-gamma slack "
        f"{worst_sqrt:.3e}; worst weighted-dim margin {worst_alpha:.1f}"
    )
    return CriterionResult(2, "lower/upper consistency", bad == 0 and dt < 120, detail, dt, 120)


def criterion_3(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Stabilizer postconditions, counted exactly, on 100+100 seeded trials."""
    t0 = time.perf_counter()
    bad = []
    for t in range(100):
        rng = np.random.default_rng([config.seed, 31, t])
        A = rng.choice([-1, 1], size=(5, 32)).astype(np.int64)
        res = majority_stabilize(A, 0.25, budget=config.littlestone_budget)
        cols = list(res.columns)
        rates = (A[:, cols] != res.row_values[:, None]).mean(axis=1)
        d = ldim(A, budget=config.littlestone_budget)
        if not (rates <= 0.25).all():
            bad.append(("majority-rate", t))
        if res.steps > d or len(cols) < (0.25**d) * 32:
            bad.append(("majority-size", t))
    for t in range(100):
        rng = np.random.default_rng([config.seed, 32, t])
        A = rng.uniform(-2.0, 2.0, size=(4, 64))
        res = bucket_stabilize(A, alpha=0.125, eps=0.1, budget=config.littlestone_budget)
        cols = list(res.columns)
        rates = (np.abs(A[:, cols] - res.row_values[:, None]) >= 0.25).mean(axis=1)
        if not (rates <= 0.1).all():
            bad.append(("bucket-rate", t))
        if not res.certified:
            bad.append(("bucket-uncertified", t))
        else:
            d = ldim_alpha(A, 0.125, budget=config.littlestone_budget)
            if res.steps > d or len(cols) < res.size_bound - 1e-12:
                bad.append(("bucket-size", t))
    dt = time.perf_counter() - t0
    detail = f"100 majority (5x32, eps=0.25) + 100 bucket (4x64, alpha=1/8, eps=0.1) trials: {len(bad)} violations"
    if bad:
        detail += f"; first: {bad[0]}"
    return CriterionResult(3, "stabilizer postconditions", not bad and dt < 120, detail, dt, 120)


def criterion_4(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Greedy-partition harmonic bound and delta-density cap on 100 matrices."""
    t0 = time.perf_counter()
    deltas = (0.5, 0.25, 0.1, 0.05)
    bad = 0
    rows = []
    for t in range(100):
        rng = np.random.default_rng([config.seed, 4, t])
        m = int(rng.integers(1, 17))
        n = int(rng.integers(1, 257))
        A = rng.integers(-3, 4, size=(m, n))
        A = A[:, A.any(axis=0)]
        if A.shape[1] == 0:
            continue
        gp = greedy_partition(A)
        size = A.shape[1]
        ceiling = math.log(size) + 1
        worst_slack = -math.inf
        worst_count_margin = -math.inf
        probs = {}  # (x, b) -> per-class probability array
        for idx, cls in enumerate(gp.classes):
            vals = A[:, list(cls.columns)]
            for b in range(-3, 4):
                if b == 0:
                    continue
                p = (vals == b).mean(axis=1)
                for x in range(A.shape[0]):
                    if p[x] > 0:
                        probs.setdefault((x, b), np.zeros(len(gp.classes)))[idx] = p[x]
        for (x, b), arr in probs.items():
            s = float(arr.sum())
            worst_slack = max(worst_slack, s - ceiling)
            if s > ceiling + 1e-9:
                bad += 1
            for delta in deltas:
                cnt = int((arr >= delta).sum())
                cap = ceiling / delta
                worst_count_margin = max(worst_count_margin, cnt - cap)
                if cnt > cap + 1e-9:
                    bad += 1
        rows.append((t, size, worst_slack, worst_count_margin))
    dt = time.perf_counter() - t0
    detail = f"100 integer matrices <= 16x256: {bad} violations; worst harmonic slack {max(r[2] for r in rows):.3e}"
    return CriterionResult(4, "greedy partition guarantee", bad == 0 and dt < 60, detail, dt, 60,
                           {"density_rows": rows})


def criterion_5(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Mean identity and kept-fraction bound over 1000 vector families."""
    t0 = time.perf_counter()
    bad = 0
    for t in range(1000):
        rng = np.random.default_rng([config.seed, 5, t])
        r = int(rng.integers(1, 65))
        dim = int(rng.integers(1, 33))
        vecs = rng.normal(size=(r, dim)) * float(rng.uniform(0.2, 3.0))
        norms = np.sqrt(np.einsum("ij,ij->i", vecs, vecs))
        gamma = float(norms.max()) * float(rng.uniform(1.0, 1.5))
        split = subtract_average(vecs, gamma)
        c_sq = split.norm_of_average**2
        lhs = float(split.drops.sum())
        rhs = r * c_sq
        scale = max(1.0, abs(rhs), float((norms**2).sum()))
        if abs(lhs - rhs) > 1e-9 * scale:
            bad += 1
        if len(split.kept) < c_sq * r / (2 * gamma * gamma) - 1e-9 * r:
            bad += 1
    dt = time.perf_counter() - t0
    detail = f"1000 families (r<=64, dim<=32): {bad} violations of the mean identity / kept bound"
    return CriterionResult(5, "subtract-average guarantee", bad == 0 and dt < 30, detail, dt, 30)


def criterion_6(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Per-level norm decrement and eps control on 50 certified blocky sums."""
    t0 = time.perf_counter()
    bad = 0
    levels_total = 0
    for item in ctx.blocky_instances():
        inst = item["instance"]
        rep_v = verify_factorization(
            np.asarray(inst.matrix, dtype=np.float64), inst.certificate, config.tol
        )
        if not rep_v.ok:
            bad += 1
        for lv in item["report"].levels:
            levels_total += 1
            if lv["gammaSquaredAfter"] > lv["gammaSquaredBefore"] - 0.125 + 1e-9:
                bad += 1
            if lv["epsOut"] > 2 * lv["epsIn"] + 1e-9:
                bad += 1
    dt = time.perf_counter() - t0
    detail = f"50 blocky-sum instances, {levels_total} levels: {bad} decrement/eps violations"
    return CriterionResult(6, "norm decrement per level", bad == 0 and dt < 300, detail, dt, 300)


def criterion_7(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Exact reconstruction everywhere, with level counts inside the cap."""
    t0 = time.perf_counter()
    bad = 0
    rows = []
    for item in ctx.boolean3x3():
        A, s, rep = item["matrix"], item["sum"], item["report"]
        if not np.array_equal(s.evaluate(), A):
            bad += 1
        g0 = rep.gamma_squared_trajectory[0]
        cap = math.ceil(8 * g0)
        if len(rep.levels) > cap:
            bad += 1
        rows.append(("boolean3x3", item["code"], 3, 3, g0, len(rep.levels), len(s), rep.bound_fit))
    for item in ctx.blocky_instances():
        A = np.asarray(item["instance"].matrix)
        s, rep = item["sum"], item["report"]
        if not np.array_equal(s.evaluate(), A):
            bad += 1
        g0 = rep.gamma_squared_trajectory[0]
        if len(rep.levels) > math.ceil(8 * g0):
            bad += 1
        rows.append(
            ("blocky-sum", item["id"], A.shape[0], A.shape[1], g0, len(rep.levels), len(s), rep.bound_fit)
        )
    dt = time.perf_counter() - t0
    detail = f"512 boolean 3x3 + 50 blocky sums reconstructed exactly: {bad} failures"
    return CriterionResult(7, "end-to-end exactness", bad == 0 and dt < 900, detail, dt, 900,
                           {"term_rows": rows})


def criterion_8(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Brute-force oracle sandwiched under both constructive term counts."""
    t0 = time.perf_counter()
    bad = 0
    blocky_checked = 0
    for item in ctx.boolean3x3():
        A, s = item["matrix"], item["sum"]
        oc = exact_block_complexity(A, config.oracle_depth)
        if oc is None or oc > len(s) or oc > len(greedy_l1_decompose(A)):
            bad += 1
        check = is_blocky(A)
        if A.any() and check.blocky:
            blocky_checked += 1
            if oc != 1:
                bad += 1
    padded = np.zeros((3, 3), dtype=np.int64)
    padded[:2, :2] = [[1, 0], [1, 1]]
    if exact_block_complexity(padded, config.oracle_depth) != 2:
        bad += 1
    dt = time.perf_counter() - t0
    detail = (
        f"512 oracle values <= both term counts; {blocky_checked} nonzero blocky matrices all "
        f"at complexity 1; padded witness at 2; {bad} violations"
    )
    return CriterionResult(8, "oracle sandwich", bad == 0 and dt < 600, detail, dt, 600)


def criterion_9(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Rounding additivity flags recorded at every level of every run."""
    t0 = time.perf_counter()
    levels = 0
    failures = 0
    for item in ctx.boolean3x3() + ctx.blocky_instances():
        for lv in item["report"].levels:
            levels += 1
            if not lv["additivity"]:
                failures += 1
    dt = time.perf_counter() - t0
    detail = f"{levels} pipeline levels checked: {failures} additivity failures"
    return CriterionResult(9, "rounding additivity", failures == 0, detail, dt, 900)


def criterion_10(config: RunConfig, ctx: SuiteContext) -> CriterionResult:
    """Observational complexity histogram for random 3x3 boolean matrices."""
    t0 = time.perf_counter()
    rep = random_lower_bound_experiment(3, 100, seed=config.seed)
    floor_ref = math.floor(rep["reference"])
    ok = rep["min"] >= floor_ref
    dt = time.perf_counter() - t0
    detail = (
        f"n=3, 100 trials: histogram {rep['histogram']}, min {rep['min']} >= "
        f"floor({rep['reference']:.3f}) = {floor_ref}"
    )
    return CriterionResult(10, "random lower-bound report", ok and dt < 300, detail, dt, 300,
                           {"experiment": rep})


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def _write_tables(results: list[CriterionResult], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = [
        {
            "number": r.number,
            "name": r.name,
            "passed": r.passed,
            "seconds": round(r.seconds, 3),
            "detail": r.detail,
        }
        for r in results
    ]
    (out_dir / "results.json").write_text(json.dumps(summary, indent=2) + "\n")
    for r in results:
        if "term_rows" in r.data:
            with open(out_dir / "terms_vs_size.tsv", "w") as fh:
                fh.write("kind\tid\tm\tn\tgamma0_squared\tlevels\tterms\tbound_fit\n")
                for row in r.data["term_rows"]:
                    fh.write("\t".join(str(v) for v in row) + "\n")
        if "density_rows" in r.data:
            with open(out_dir / "density_margins.tsv", "w") as fh:
                fh.write("trial\tcolumns\tworst_harmonic_slack\tworst_count_margin\n")
                for row in r.data["density_rows"]:
                    fh.write("\t".join(str(v) for v in row) + "\n")
        if "experiment" in r.data:
            (out_dir / "random_complexity.json").write_text(
                json.dumps(r.data["experiment"], indent=2) + "\n"
            )


def run_suite(
    config: RunConfig | None = None,
    selection: list[int] | None = None,
    out_dir: str | Path | None = None,
    echo=print,
) -> tuple[int, list[CriterionResult]]:
    """Run the battery (or a selection); returns (exit_code, results)."""
    config = config or RunConfig()
    ctx = SuiteContext(config)
    chosen = selection if selection is not None else sorted(CRITERIA)
    results = []
    for k in chosen:
        if k not in CRITERIA:
            raise ValueError(f"unknown criterion {k}; valid: {sorted(CRITERIA)}")
        res = CRITERIA[k](config, ctx)
        results.append(res)
        if echo:
            echo(res.line)
    if out_dir is not None:
        _write_tables(results, Path(out_dir))
    failing = [r for r in results if not r.passed]
    if failing and echo:
        echo("failing criteria: " + ", ".join(f"{r.number} ({r.name})" for r in failing))
    return (1 if failing else 0), results
