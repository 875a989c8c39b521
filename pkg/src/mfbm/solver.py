"""Damped fixed-point iteration shared by the classical and quantum solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._validation import DomainError

INIT_MODES = ("zero", "local-field", "random")


@dataclass(frozen=True)
class SolverConfig:
    """Controls for the damped iteration m <- (1 - damping) m + damping G(m).

    ``init`` is ``"zero"``, ``"local-field"``, ``"random"`` (drawn from
    ``seed``) or an explicit array of magnetizations. ``restarts`` adds that
    many seeded random starts; the converged point of least divergence wins.
    """

    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10000
    init: object = "local-field"
    seed: int | None = None
    restarts: int = 0

    def __post_init__(self):
        if not (0.0 < self.damping <= 1.0):
            raise DomainError(f"damping must be in (0, 1], got {self.damping!r}")
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise DomainError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if int(self.restarts) != self.restarts or self.restarts < 0:
            raise DomainError(f"restarts must be a non-negative integer, got {self.restarts!r}")
        if isinstance(self.init, str):
            if self.init not in INIT_MODES:
                raise DomainError(f"init must be one of {INIT_MODES} or an array, got {self.init!r}")
        else:
            arr = np.array(self.init, dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, "init", arr)

    def with_init(self, init, seed=None) -> "SolverConfig":
        return replace(self, init=init, seed=seed, restarts=0)

    def restart_seeds(self) -> list[int]:
        base = 0 if self.seed is None else int(self.seed)
        return [base + k + 1 for k in range(self.restarts)]


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    iterations: int
    residual: float
    objective: float = float("nan")
    step: float = float("nan")

    def with_objective(self, value: float) -> "SolveReport":
        return replace(self, objective=float(value))


def damped_fixed_point(update, residual, x0, cfg: SolverConfig, callback=None):
    """Iterate ``x <- (1 - a) x + a update(x)``.

    Stops once both the sup-norm change and ``residual(x)`` are within
    ``cfg.tol``. Running out of iterations is reported, not raised.
    ``callback(iteration, x)`` sees every iterate.
    """
    lam = cfg.damping
    x = np.array(x0, dtype=np.float64)
    step = float("inf")
    for it in range(1, cfg.max_iter + 1):
        new = (1.0 - lam) * x + lam * update(x)
        step = float(np.max(np.abs(new - x)))
        x = new
        if callback is not None:
            callback(it, x.copy())
        if not np.all(np.isfinite(x)):
            break
        if step <= cfg.tol:
            res = residual(x)
            if res <= cfg.tol:
                return x, SolveReport(True, it, res, step=step)
    res = residual(x) if np.all(np.isfinite(x)) else float("inf")
    return x, SolveReport(False, it, res, step=step)


def pick_best(candidates):
    """Choose among ``(point, report)`` pairs in seed order.

    Converged candidates beat unconverged ones; then least objective, with
    ties going to the earlier candidate.
    """
    best = None
    for k, (point, report) in enumerate(candidates):
        obj = report.objective if math.isfinite(report.objective) else float("inf")
        key = (not report.converged, obj, k)
        if best is None or key < best[0]:
            best = (key, point, report)
    return best[1], best[2]
