"""Exact third-order classical Boltzmann machines by enumeration.

A model on n spins x_i in {-1, +1} has the distribution

    p(x) = exp(sum_i h_i x_i + sum_{i<j} w_ij x_i x_j
               + sum_{i<j<k} v_ijk x_i x_j x_k - psi)

Couplings are stored only on strictly increasing site tuples, in the order
of ``itertools.combinations(range(n), r)``. Configurations are enumerated
with site 0 as the most significant bit and bit 0 meaning x = +1, which
matches the quantum computational basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp, xlogy

from ._indexing import canonical_key, dense_pairs, dense_triples, site_tuples, tuple_position
from ._validation import (
    CLASSICAL_SITE_CAP,
    MEAN_CLAMP,
    DomainError,
    NumericalError,
    check_finite_array,
    check_site_count,
)

_BLOCK = 1 << 15


@dataclass(frozen=True, eq=False)
class CbmParams:
    """Natural coordinates (h, w, v) of a third-order classical model."""

    n: int
    h: np.ndarray
    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        n = check_site_count(self.n, CLASSICAL_SITE_CAP)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", check_finite_array(self.h, (n,), "h"))
        object.__setattr__(self, "w", check_finite_array(self.w, (len(site_tuples(n, 2)),), "w"))
        object.__setattr__(self, "v", check_finite_array(self.v, (len(site_tuples(n, 3)),), "v"))

    @classmethod
    def zeros(cls, n: int) -> "CbmParams":
        n = check_site_count(n, CLASSICAL_SITE_CAP)
        return cls(n, np.zeros(n), np.zeros(len(site_tuples(n, 2))), np.zeros(len(site_tuples(n, 3))))

    @classmethod
    def from_terms(cls, n: int, h=None, w=None, v=None) -> "CbmParams":
        """Build from sparse terms; ``w`` and ``v`` map 0-based site tuples to values.

        Tuples may be given in any order; each unordered tuple may appear once.
        """
        n = check_site_count(n, CLASSICAL_SITE_CAP)
        hh = np.zeros(n) if h is None else h
        arrays = []
        for order, terms in ((2, w), (3, v)):
            arr = np.zeros(len(site_tuples(n, order)))
            pos = tuple_position(n, order)
            seen = set()
            for sites, value in (terms or {}).items():
                if len(sites) != order:
                    raise DomainError(f"expected {order} sites, got {sites}")
                key, _ = canonical_key(sites)
                if key not in pos:
                    raise DomainError(f"sites {sites} out of range for n={n}")
                if key in seen:
                    raise DomainError(f"duplicate term for sites {key}")
                seen.add(key)
                arr[pos[key]] = value
            arrays.append(arr)
        return cls(n, hh, *arrays)

    @classmethod
    def product(cls, hbar) -> "CbmParams":
        """Member of the product family with natural coordinates ``hbar``."""
        hbar = np.asarray(hbar, dtype=float)
        p = cls.zeros(hbar.shape[0])
        return cls(p.n, hbar, p.w, p.v)

    @cached_property
    def W(self) -> np.ndarray:
        """Dense symmetric pair couplings with zero diagonal."""
        return dense_pairs(self.n, self.w)

    @cached_property
    def V(self) -> np.ndarray:
        """Dense fully symmetric triple couplings, zero on repeated indices."""
        return dense_triples(self.n, self.v)

    def coupling(self, i: int, j: int) -> float:
        return float(self.W[i, j])

    def triple(self, i: int, j: int, k: int) -> float:
        return float(self.V[i, j, k])

    def replace(self, h=None, w=None, v=None) -> "CbmParams":
        return CbmParams(
            self.n,
            self.h if h is None else h,
            self.w if w is None else w,
            self.v if v is None else v,
        )

    def __eq__(self, other):
        if not isinstance(other, CbmParams):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None


@dataclass(frozen=True)
class CbmMoments:
    """Expectation coordinates: E[x_i], E[x_i x_j] (pairs), E[x_i x_j x_k] (triples)."""

    m: np.ndarray
    mu: np.ndarray
    iota: np.ndarray


@dataclass(frozen=True, eq=False)
class ProductCoords:
    """A point of the product family in one chart.

    ``chart`` is ``"h"`` for natural coordinates or ``"m"`` for
    magnetizations. The magnetization chart also keeps ``gap = 1 - |m|``,
    which stays accurate when m rounds to +-1 in double precision; it is
    derived from ``values`` when not supplied.
    """

    chart: str
    values: np.ndarray
    gap: np.ndarray | None = None

    def __post_init__(self):
        if self.chart not in ("h", "m"):
            raise DomainError(f"chart must be 'h' or 'm', got {self.chart!r}")
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError(f"coordinates must be a nonempty vector, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("coordinates contain non-finite entries")
        gap = None
        if self.chart == "m":
            if self.gap is None:
                if np.any(np.abs(vals) >= 1.0):
                    raise DomainError("magnetizations must lie strictly inside (-1, 1)")
                # raw magnetizations: clamp |m| <= 1 - 1e-12
                gap = np.maximum(1.0 - np.abs(vals), MEAN_CLAMP)
            else:
                gap = np.array(self.gap, dtype=np.float64)
            if gap.shape != vals.shape:
                raise DomainError(f"gap shape {gap.shape} does not match {vals.shape}")
            if np.any(np.abs(vals) > 1.0) or not np.all(gap > 0.0):
                raise DomainError("magnetizations must lie strictly inside (-1, 1)")
            gap.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "gap", gap)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_mean(self) -> "ProductCoords":
        return self if self.chart == "m" else product_to_mean(self)

    def to_natural(self) -> "ProductCoords":
        return self if self.chart == "h" else mean_to_product(self)

    @property
    def mbar(self) -> np.ndarray:
        return self.to_mean().values

    @property
    def hbar(self) -> np.ndarray:
        return self.to_natural().values


def tanh_gap(r: np.ndarray) -> np.ndarray:
    """1 - tanh(|r|) without cancellation, floored at the smallest normal float."""
    a = np.abs(np.asarray(r, dtype=np.float64))
    with np.errstate(over="ignore"):
        g = 2.0 / (1.0 + np.exp(2.0 * a))
    return np.maximum(g, np.finfo(np.float64).tiny)


def atanh_abs(absm: np.ndarray, gap: np.ndarray | None = None) -> np.ndarray:
    """tanh^{-1}(|m|) for |m| < 1.

    Without ``gap`` the complement is taken from ``absm`` and clamped so
    that |m| <= 1 - 1e-12; |m| >= 1 is a domain error.
    """
    absm = np.asarray(absm, dtype=np.float64)
    if gap is None:
        if np.any(~np.isfinite(absm)) or np.any(absm >= 1.0):
            raise DomainError("inverse tanh requires |m| < 1")
        gap = np.maximum(1.0 - absm, MEAN_CLAMP)
        absm = np.minimum(absm, 1.0 - MEAN_CLAMP)
    else:
        gap = np.maximum(np.asarray(gap, dtype=np.float64), np.finfo(np.float64).tiny)
    near = absm >= 0.5
    out = np.empty_like(absm)
    # 0.5 log((1+m)/(1-m)) with 1-m taken from the stored complement
    out[near] = 0.5 * (np.log(2.0 - gap[near]) - np.log(gap[near]))
    out[~near] = 0.5 * np.log1p(2.0 * absm[~near] / (1.0 - absm[~near]))
    return out


def clamped_atanh(m: np.ndarray) -> np.ndarray:
    """Inverse tanh with the boundary clamp, for raw magnetizations."""
    m = np.asarray(m, dtype=np.float64)
    return np.sign(m) * atanh_abs(np.abs(m))


# -- enumeration -------------------------------------------------------------

def spin_block(n: int, start: int, stop: int) -> np.ndarray:
    """Configurations ``start..stop-1`` as a float array of +-1 spins."""
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return 1.0 - 2.0 * ((idx >> shifts) & 1)


def spin_configs(n: int) -> np.ndarray:
    """All 2**n configurations in basis order."""
    n = check_site_count(n, CLASSICAL_SITE_CAP)
    return spin_block(n, 0, 1 << n)


def _energy(p: CbmParams, x: np.ndarray) -> np.ndarray:
    e = x @ p.h
    for (i, j), wij in zip(site_tuples(p.n, 2), p.w):
        if wij != 0.0:
            e += wij * x[:, i] * x[:, j]
    for (i, j, k), vijk in zip(site_tuples(p.n, 3), p.v):
        if vijk != 0.0:
            e += vijk * x[:, i] * x[:, j] * x[:, k]
    return e


def _blocks(n: int):
    total = 1 << n
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        yield start, stop, spin_block(n, start, stop)


def energies(p: CbmParams) -> np.ndarray:
    """Unnormalized log-weights of every configuration, in basis order."""
    return np.concatenate([_energy(p, x) for _, _, x in _blocks(p.n)])


def log_partition_classical(p: CbmParams) -> float:
    """psi(h, w, v) by stabilized summation over all configurations."""
    return float(logsumexp(energies(p)))


def log_prob_table(p: CbmParams) -> np.ndarray:
    e = energies(p)
    return e - logsumexp(e)


def prob(p: CbmParams, x) -> float:
    """Probability of one configuration ``x`` (a length-n sequence of +-1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise DomainError(f"configuration must have length {p.n}, got shape {x.shape}")
    if not np.all(np.abs(x) == 1.0):
        raise DomainError("configuration entries must be -1 or +1")
    return float(np.exp(_energy(p, x[None, :])[0] - log_partition_classical(p)))


def exact_moments_classical(p: CbmParams) -> CbmMoments:
    """All first, second and third moments by enumeration."""
    n = p.n
    logp = log_prob_table(p)
    m = np.zeros(n)
    mu = np.zeros((n, n))
    io = np.zeros((n, n, n))
    for start, stop, x in _blocks(n):
        q = np.exp(logp[start:stop])
        m += q @ x
        qx = x * q[:, None]
        mu += qx.T @ x
        if n >= 3:
            io += np.einsum("bi,bj,bk->ijk", qx, x, x, optimize=True)
    pairs = site_tuples(n, 2)
    triples = site_tuples(n, 3)
    mu_c = np.array([mu[i, j] for i, j in pairs])
    io_c = np.array([io[i, j, k] for i, j, k in triples])
    return CbmMoments(np.clip(m, -1, 1), np.clip(mu_c, -1, 1), np.clip(io_c, -1, 1))


def neg_entropy(p: CbmParams) -> float:
    """sum_x p(x) log p(x), cross-checked against the Legendre form."""
    logp = log_prob_table(p)
    direct = float(np.exp(logp) @ logp)
    mom = exact_moments_classical(p)
    legendre = float(p.v @ mom.iota + p.w @ mom.mu + p.h @ mom.m - log_partition_classical(p))
    if abs(direct - legendre) > 1e-10 * max(1.0, abs(direct)):
        raise NumericalError(f"negative entropy mismatch: {direct!r} vs {legendre!r}")
    return direct


def kl_divergence(q: CbmParams, p: CbmParams) -> float:
    """D(q || p) = sum_x q(x) log(q(x) / p(x))."""
    if q.n != p.n:
        raise DomainError(f"size mismatch: {q.n} vs {p.n}")
    lq = log_prob_table(q)
    lp = log_prob_table(p)
    return float(np.exp(lq) @ (lq - lp))


# -- product family ----------------------------------------------------------

def _require_chart(c: ProductCoords, chart: str):
    if not isinstance(c, ProductCoords):
        raise DomainError(f"expected ProductCoords, got {type(c).__name__}")
    if c.chart != chart:
        raise DomainError(f"expected coordinates in the {chart!r} chart, got {c.chart!r}")


def product_to_mean(c: ProductCoords) -> ProductCoords:
    """m_i = tanh(h_i)."""
    _require_chart(c, "h")
    return ProductCoords("m", np.tanh(c.values), tanh_gap(c.values))


def mean_to_product(c: ProductCoords) -> ProductCoords:
    """h_i = 0.5 log((1 + m_i) / (1 - m_i))."""
    _require_chart(c, "m")
    return ProductCoords("h", np.sign(c.values) * atanh_abs(np.abs(c.values), c.gap))


def product_log_partition(hbar) -> float:
    hbar = np.asarray(hbar, dtype=float)
    return float(np.sum(np.logaddexp(hbar, -hbar)))


def product_entropy(c: ProductCoords) -> float:
    """Negative entropy of the product distribution with magnetizations m."""
    c = c.to_mean()
    m, half_gap = c.values, 0.5 * c.gap
    up = np.where(m >= 0, 1.0 - half_gap, half_gap)
    down = np.where(m >= 0, half_gap, 1.0 - half_gap)
    return float(np.sum(xlogy(up, up) + xlogy(down, down)))


def product_moments(mbar) -> CbmMoments:
    """Moments of a product distribution: they factorize over sites."""
    m = np.asarray(mbar, dtype=float)
    n = m.shape[0]
    mu = np.array([m[i] * m[j] for i, j in site_tuples(n, 2)])
    io = np.array([m[i] * m[j] * m[k] for i, j, k in site_tuples(n, 3)])
    return CbmMoments(m.copy(), mu, io)


def kl_product_to_cbm(c: ProductCoords, p: CbmParams, psi: float | None = None) -> float:
    """D(p_hbar || p) in closed form from magnetizations and the exact psi of p."""
    mbar = c.mbar
    if mbar.shape[0] != p.n:
        raise DomainError(f"size mismatch: {mbar.shape[0]} vs {p.n}")
    mom = product_moments(mbar)
    if psi is None:
        psi = log_partition_classical(p)
    return float(
        psi + product_entropy(c) - p.v @ mom.iota - p.w @ mom.mu - p.h @ mom.m
    )
