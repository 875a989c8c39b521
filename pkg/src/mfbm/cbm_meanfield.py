"""Naive mean field for third-order classical Boltzmann machines.

The e-projection onto product distributions is a critical point of
m -> D(p_m || p), whose stationarity condition is

    atanh(m_i) = h_i + sum_{j != i} w_ij m_j + sum_{j<k; j,k != i} v_ijk m_j m_k

The triple sum runs over unordered pairs {j, k}, each counted once, which
is exactly the derivative of the cubic term of the divergence.
"""

from __future__ import annotations

import numpy as np

from .cbm import (
    CbmParams,
    ProductCoords,
    clamped_atanh,
    exact_moments_classical,
    kl_divergence,
)
from ._validation import DomainError
from .solver import SolverConfig, damped_fixed_point, pick_best


def local_field(p: CbmParams, mbar: np.ndarray) -> np.ndarray:
    """Effective field h_i + sum_j w_ij m_j + sum_{j<k} v_ijk m_j m_k."""
    f = p.h + p.W @ mbar
    if p.n >= 3 and np.any(p.v):
        f = f + 0.5 * np.einsum("ijk,j,k->i", p.V, mbar, mbar)
    return f


def _as_mbar(p: CbmParams, mbar) -> np.ndarray:
    if isinstance(mbar, ProductCoords):
        mbar = mbar.mbar
    mbar = np.asarray(mbar, dtype=np.float64)
    if mbar.shape != (p.n,):
        raise DomainError(f"magnetizations must have shape ({p.n},), got {mbar.shape}")
    return mbar


def mf_residual_classical(p: CbmParams, mbar) -> np.ndarray:
    """Stationarity residual atanh(m_i) - field_i(m); zero at a mean-field solution."""
    m = _as_mbar(p, mbar)
    if isinstance(mbar, ProductCoords):
        hb = mbar.hbar
    else:
        hb = clamped_atanh(m)
    return hb - local_field(p, m)


def _initial(p: CbmParams, cfg: SolverConfig) -> np.ndarray:
    if isinstance(cfg.init, np.ndarray):
        m0 = _as_mbar(p, cfg.init)
        if np.any(np.abs(m0) >= 1.0):
            raise DomainError("initial magnetizations must lie inside (-1, 1)")
        return m0.copy()
    if cfg.init == "zero":
        return np.zeros(p.n)
    if cfg.init == "local-field":
        return np.tanh(p.h)
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-1.0, 1.0, p.n) * 0.99


def solve_naive_mf_classical(p: CbmParams, cfg: SolverConfig | None = None, callback=None):
    """Damped iteration of m_i <- tanh(field_i(m)) from the configured start.

    Returns ``(ProductCoords in the m chart, SolveReport)``. ``cfg.restarts``
    is ignored here; see :func:`e_project_classical`.
    """
    cfg = cfg or SolverConfig()
    m0 = _initial(p, cfg)

    def residual(m):
        if np.any(np.abs(m) >= 1.0):
            return float("inf")
        return float(np.max(np.abs(clamped_atanh(m) - local_field(p, m))))

    m, report = damped_fixed_point(lambda m: np.tanh(local_field(p, m)), residual, m0, cfg, callback)
    m = np.clip(m, -np.nextafter(1.0, 0.0), np.nextafter(1.0, 0.0))
    return ProductCoords("m", m), report


def _product_kl(c: ProductCoords, p: CbmParams) -> float:
    return kl_divergence(CbmParams.product(c.hbar), p)


def e_project_classical(p: CbmParams, cfg: SolverConfig | None = None):
    """Product distribution at a critical point of D(p_m || p).

    Runs the solver from the configured start plus ``cfg.restarts`` seeded
    random starts and keeps the converged point with least exact
    divergence, which is stored in ``report.objective``.
    """
    cfg = cfg or SolverConfig()
    starts = [cfg.with_init(cfg.init, cfg.seed)]
    starts += [cfg.with_init("random", s) for s in cfg.restart_seeds()]
    candidates = []
    for start in starts:
        c, report = solve_naive_mf_classical(p, start)
        candidates.append((c, report.with_objective(_product_kl(c, p))))
    return pick_best(candidates)


def m_project_classical(p: CbmParams) -> ProductCoords:
    """Product distribution matching the exact first moments of ``p``."""
    m = exact_moments_classical(p).m
    if np.any(np.abs(m) >= 1.0):
        raise DomainError("exact magnetization reached +-1 in double precision")
    return ProductCoords("m", m)
