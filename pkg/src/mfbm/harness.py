"""Exact vs mean-field comparison runs, sweeps and their serialization."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import DomainError
from .cbm import CbmParams, kl_divergence
from .cbm_meanfield import e_project_classical, m_project_classical
from .modelfile import ModelFile
from .qbm import density_matrix, product_state, quantum_relative_entropy
from .qbm_meanfield import e_project_quantum, m_project_quantum
from .solver import SolveReport, SolverConfig

THREADS_ENV = "MFBM_THREADS"

COLUMNS = (
    "kind", "site", "spin", "exact", "meanfield", "abs_error", "m_projection",
    "converged", "iterations", "residual", "divergence_e", "divergence_m",
)


@dataclass
class ComparisonReport:
    """Per-site exact and mean-field magnetizations for one model.

    Quantum reports have one row per (site, spin); ``spin`` is ``None`` for
    classical rows. ``abs_error`` is |exact - meanfield|. ``divergence_e``
    is D(product || model) at the e-projection and ``divergence_m`` is
    D(model || product) at the m-projection.
    """

    kind: str
    n: int
    sites: list
    spins: list
    exact: np.ndarray
    meanfield: np.ndarray
    m_projection: np.ndarray
    solver: SolveReport
    divergence_e: float
    divergence_m: float
    wall_time: float = 0.0
    scale: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.exact - self.meanfield)

    def rows(self):
        for k in range(len(self.sites)):
            yield {
                "kind": self.kind,
                "site": self.sites[k],
                "spin": self.spins[k],
                "exact": float(self.exact[k]),
                "meanfield": float(self.meanfield[k]),
                "abs_error": float(self.abs_error[k]),
                "m_projection": float(self.m_projection[k]),
                "converged": self.solver.converged,
                "iterations": self.solver.iterations,
                "residual": float(self.solver.residual),
                "divergence_e": float(self.divergence_e),
                "divergence_m": float(self.divergence_m),
            }


def run_compare(model: ModelFile, cfg: SolverConfig | None = None) -> ComparisonReport:
    """Exact moments, both projections and both divergences for ``model``."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    p = model.params
    if model.kind == "classical":
        e_coords, report = e_project_classical(p, cfg)
        m_coords = m_project_classical(p)
        div_m = kl_divergence(p, CbmParams.product(m_coords.hbar))
        sites = list(range(1, p.n + 1))
        spins = [None] * p.n
        exact, mf, mp = m_coords.values, e_coords.values, m_coords.values
    elif model.kind == "quantum":
        e_coords, report = e_project_quantum(p, cfg)
        m_coords = m_project_quantum(p)
        div_m = quantum_relative_entropy(density_matrix(p), product_state(m_coords))
        sites = [i + 1 for i in range(p.n) for _ in range(3)]
        spins = [s + 1 for _ in range(p.n) for s in range(3)]
        exact, mf, mp = m_coords.values.ravel(), e_coords.values.ravel(), m_coords.values.ravel()
    else:
        raise DomainError(f"unknown model kind {model.kind!r}")
    return ComparisonReport(
        kind=model.kind,
        n=p.n,
        sites=sites,
        spins=spins,
        exact=np.array(exact),
        meanfield=np.array(mf),
        m_projection=np.array(mp),
        solver=report,
        divergence_e=report.objective,
        divergence_m=div_m,
        wall_time=time.perf_counter() - t0,
    )


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_sweep(model: ModelFile, grid, cfg: SolverConfig | None = None) -> list[ComparisonReport]:
    """One comparison per grid value, with w and v of ``model`` scaled by it.

    Grid points may run concurrently (``MFBM_THREADS``); output follows the
    grid order.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise DomainError("sweep grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"sweep grid must be strictly ascending, got {grid}")

    def one(g):
        rep = run_compare(model.scaled(g), cfg)
        rep.scale = g
        return rep

    workers = min(thread_count(), len(grid))
    if workers == 1:
        return [one(g) for g in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


# -- serialization -----------------------------------------------------------

def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def reports_to_csv(reports, timing: bool = False) -> str:
    """CSV with one row per site (per site and spin for quantum).

    Sweep reports add a leading ``scale`` column; ``timing`` appends the
    wall time, which makes the output non-reproducible.
    """
    reports = list(reports)
    sweep = any(r.scale is not None for r in reports)
    header = (["scale"] if sweep else []) + list(COLUMNS) + (["wall_time"] if timing else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in reports:
        for row in r.rows():
            cells = ([_cell(r.scale)] if sweep else []) + [_cell(row[c]) for c in COLUMNS]
            if timing:
                cells.append(_cell(r.wall_time))
            writer.writerow(cells)
    return buf.getvalue()


def report_to_dict(r: ComparisonReport, timing: bool = False) -> dict:
    out = {
        "kind": r.kind,
        "n": r.n,
        "solver": {
            "converged": r.solver.converged,
            "iterations": r.solver.iterations,
            "residual": r.solver.residual,
        },
        "divergence_e": r.divergence_e,
        "divergence_m": r.divergence_m,
        "rows": [
            {k: v for k, v in row.items() if k not in ("kind", "converged", "iterations", "residual", "divergence_e", "divergence_m")}
            for row in r.rows()
        ],
    }
    if r.scale is not None:
        out["scale"] = r.scale
    if timing:
        out["wall_time"] = r.wall_time
    return out


def reports_to_doc(reports, timing: bool = False) -> str:
    """Single JSON document ``{"reports": [...]}``."""
    doc = {"reports": [report_to_dict(r, timing) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
