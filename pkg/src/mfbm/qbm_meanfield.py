"""Naive mean field for third-order quantum Boltzmann machines.

The e-projection minimizes Tr[tau (log tau - log rho)] over product states
tau. Writing tau in Bloch-vector coordinates m, its stationarity condition
is the pair of equations

    hbar_is = h_is + sum_{j != i} sum_t w_ijst m_jt
              + sum_{j<k; j,k != i} sum_{t,u} v_ijkstu m_jt m_ku
    m_is    = hbar_is tanh(|hbar_i|) / |hbar_i|

which the solver iterates in the m chart.
"""

from __future__ import annotations

import numpy as np

from ._validation import DomainError
from .qbm import (
    QbmParams,
    QProductCoords,
    density_matrix,
    exact_moments_quantum,
    log_partition_quantum,
    product_log_partition,
    product_state,
    qmean_to_product,
    qproduct_to_mean,
    quantum_relative_entropy,
)
from .solver import SolverConfig, damped_fixed_point, pick_best


def _mbar(p: QbmParams, c) -> QProductCoords:
    if not isinstance(c, QProductCoords):
        c = QProductCoords("m", c)
    c = c.to_mean()
    if c.n != p.n:
        raise DomainError(f"size mismatch: {c.n} vs {p.n}")
    return c


def _field(p: QbmParams, m: np.ndarray) -> np.ndarray:
    f = p.h + np.einsum("ijst,jt->is", p.W, m)
    if p.n >= 3 and np.any(p.v):
        f = f + 0.5 * np.einsum("ijkstu,jt,ku->is", p.V, m, m)
    return f


def q_effective_field(p: QbmParams, mbar) -> QProductCoords:
    """Natural coordinates of the product state induced by magnetizations ``mbar``."""
    return QProductCoords("h", _field(p, _mbar(p, mbar).values))


def q_residual(p: QbmParams, mbar) -> np.ndarray:
    """hbar(m) - effective field(m); zero exactly at a mean-field solution."""
    c = _mbar(p, mbar)
    return qmean_to_product(c).values - _field(p, c.values)


def _initial(p: QbmParams, cfg: SolverConfig) -> np.ndarray:
    if isinstance(cfg.init, np.ndarray):
        return _mbar(p, cfg.init).values.copy()
    if cfg.init == "zero":
        return np.zeros((p.n, 3))
    if cfg.init == "local-field":
        return qproduct_to_mean(QProductCoords("h", p.h)).values
    rng = np.random.default_rng(cfg.seed)
    direction = rng.normal(size=(p.n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * rng.uniform(0.0, 0.99, size=(p.n, 1))


def _update(p: QbmParams, m: np.ndarray) -> np.ndarray:
    return qproduct_to_mean(QProductCoords("h", _field(p, m))).values


def solve_naive_mf_quantum(p: QbmParams, cfg: SolverConfig | None = None, callback=None):
    """Damped iteration of the quantum mean-field map from the configured start."""
    cfg = cfg or SolverConfig()
    m0 = _initial(p, cfg)

    def residual(m):
        if np.any(np.linalg.norm(m, axis=1) >= 1.0):
            return float("inf")
        return float(np.max(np.abs(q_residual(p, m))))

    m, report = damped_fixed_point(
        lambda x: _update(p, x.reshape(p.n, 3)).ravel(),
        lambda x: residual(x.reshape(p.n, 3)),
        m0.ravel(),
        cfg,
        None if callback is None else (lambda it, x: callback(it, x.reshape(p.n, 3))),
    )
    return QProductCoords("m", m.reshape(p.n, 3)), report


def kl_product_to_qbm(c: QProductCoords, p: QbmParams, psi: float | None = None) -> float:
    """Closed form of Tr[tau (log tau - log rho)] for a product state tau.

    Uses factorization of product-state expectations over distinct sites;
    needs the exact log-partition of ``p`` (computed when not given).
    """
    c = _mbar(p, c)
    m = c.values
    hb = qmean_to_product(c).values
    if psi is None:
        psi = log_partition_quantum(p)
    pair = np.einsum("ijst,is,jt->", p.W, m, m) / 2.0
    triple = np.einsum("ijkstu,is,jt,ku->", p.V, m, m, m) / 6.0 if p.n >= 3 else 0.0
    return float(
        np.sum(hb * m) - product_log_partition(hb) - np.sum(p.h * m) - pair - triple + psi
    )


def e_project_quantum(p: QbmParams, cfg: SolverConfig | None = None):
    """Product state at a critical point of Tr[tau (log tau - log rho)].

    Same restart policy as the classical e-projection; the exact divergence
    of each candidate is stored in ``report.objective``.
    """
    cfg = cfg or SolverConfig()
    rho = density_matrix(p)
    starts = [cfg.with_init(cfg.init, cfg.seed)]
    starts += [cfg.with_init("random", s) for s in cfg.restart_seeds()]
    candidates = []
    for start in starts:
        c, report = solve_naive_mf_quantum(p, start)
        d = quantum_relative_entropy(product_state(c), rho)
        candidates.append((c, report.with_objective(d)))
    return pick_best(candidates)


def m_project_quantum(p: QbmParams) -> QProductCoords:
    """Product state whose Bloch vectors equal the exact Tr[rho s_is]."""
    return QProductCoords("m", exact_moments_quantum(p).m)
