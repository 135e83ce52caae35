"""Run configuration shared by the CLI and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

from .littlestone import DEFAULT_BUDGET


@dataclass(frozen=True)
class RunConfig:
    """Knobs threaded through every randomized or budgeted code path.

    ``littlestone_budget`` caps exact dimension-recursion node expansions;
    ``oracle_depth`` caps the brute-force complexity search.  Output paths
    are carried by the CLI flags, not here.
    """

    seed: int = 0
    tol: float = 1e-9
    restarts: int = 16
    max_iter: int = 400
    littlestone_budget: int = DEFAULT_BUDGET
    oracle_depth: int = 6

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be nonnegative, got {self.restarts}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.littlestone_budget < 1 or self.oracle_depth < 1:
            raise ValueError("budgets must be positive")
