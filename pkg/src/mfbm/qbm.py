"""Exact third-order quantum Boltzmann machines on dense density matrices.

    rho = exp(sum h_is s_is + sum_{i<j} w_ijst s_is s_jt
              + sum_{i<j<k} v_ijkstu s_is s_jt s_ku - psi)

where s_is is sigma_s at site i. Pair and triple couplings are stored on
strictly increasing site tuples with trailing spin axes of length 3
(axis index 0, 1, 2 for sigma_1, sigma_2, sigma_3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from ._indexing import canonical_key, dense_pairs, dense_triples, site_tuples, tuple_position
from ._validation import (
    QUANTUM_SITE_CAP,
    MEAN_CLAMP,
    DomainError,
    NumericalError,
    check_finite_array,
    check_site_count,
)
from .cbm import CbmParams, atanh_abs, tanh_gap
from .tensor_ops import (
    PAULIS,
    embed_operator,
    herm_eigh,
    herm_expm,
    herm_logm,
    hermitian_part,
    reduced_density,
    trace_product,
)

_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True, eq=False)
class QbmParams:
    """Natural coordinates (h, w, v) of a third-order quantum model."""

    n: int
    h: np.ndarray
    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        n = check_site_count(self.n, QUANTUM_SITE_CAP)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", check_finite_array(self.h, (n, 3), "h"))
        object.__setattr__(self, "w", check_finite_array(self.w, (len(site_tuples(n, 2)), 3, 3), "w"))
        object.__setattr__(self, "v", check_finite_array(self.v, (len(site_tuples(n, 3)), 3, 3, 3), "v"))

    @classmethod
    def zeros(cls, n: int) -> "QbmParams":
        n = check_site_count(n, QUANTUM_SITE_CAP)
        return cls(
            n,
            np.zeros((n, 3)),
            np.zeros((len(site_tuples(n, 2)), 3, 3)),
            np.zeros((len(site_tuples(n, 3)), 3, 3, 3)),
        )

    @classmethod
    def from_terms(cls, n: int, h=None, w=None, v=None) -> "QbmParams":
        """Build from sparse terms keyed by ``(sites, spins)``.

        Sites are 0-based, spins are Pauli labels 1..3, e.g.
        ``w={((0, 2), (3, 1)): 0.4}``. Site tuples may be unsorted; the spin
        labels move with their sites.
        """
        p = cls.zeros(n)
        out = {"h": np.zeros((p.n, 3)), "w": np.zeros_like(p.w), "v": np.zeros_like(p.v)}
        for name, order, terms in (("h", 1, h), ("w", 2, w), ("v", 3, v)):
            pos = tuple_position(p.n, order)
            seen = set()
            for (sites, spins), value in (terms or {}).items():
                sites = (sites,) if np.isscalar(sites) else tuple(sites)
                spins = (spins,) if np.isscalar(spins) else tuple(spins)
                if len(sites) != order or len(spins) != order:
                    raise DomainError(f"{name} term needs {order} sites and spins, got {sites}, {spins}")
                if any(s not in (1, 2, 3) for s in spins):
                    raise DomainError(f"spin labels must be 1, 2 or 3, got {spins}")
                key, sp = canonical_key(sites, spins)
                if key not in pos:
                    raise DomainError(f"sites {sites} out of range for n={p.n}")
                full = (key, sp)
                if full in seen:
                    raise DomainError(f"duplicate {name} term for {key} {sp}")
                seen.add(full)
                idx = tuple(s - 1 for s in sp)
                if order == 1:
                    out["h"][key[0], idx[0]] = value
                else:
                    out[name][(pos[key],) + idx] = value
        return cls(p.n, out["h"], out["w"], out["v"])

    @classmethod
    def from_classical(cls, p: CbmParams) -> "QbmParams":
        """Diagonal model with every coupling on sigma_3 only."""
        q = cls.zeros(p.n)
        h, w, v = q.h.copy(), q.w.copy(), q.v.copy()
        h[:, 2] = p.h
        w[:, 2, 2] = p.w
        v[:, 2, 2, 2] = p.v
        return cls(p.n, h, w, v)

    @property
    def is_diagonal(self) -> bool:
        mask_h = np.ones(3, bool)
        mask_h[2] = False
        off_w = self.w.copy()
        off_w[:, 2, 2] = 0
        off_v = self.v.copy()
        off_v[:, 2, 2, 2] = 0
        return not (np.any(self.h[:, mask_h]) or np.any(off_w) or np.any(off_v))

    def to_classical(self) -> CbmParams:
        if not self.is_diagonal:
            raise DomainError("model has off-diagonal Pauli terms")
        return CbmParams(self.n, self.h[:, 2], self.w[:, 2, 2], self.v[:, 2, 2, 2])

    @cached_property
    def W(self) -> np.ndarray:
        """Dense pair couplings, ``W[j, i, t, s] == W[i, j, s, t]``."""
        return dense_pairs(self.n, self.w)

    @cached_property
    def V(self) -> np.ndarray:
        """Dense triple couplings, symmetric under joint site/spin permutation."""
        return dense_triples(self.n, self.v)

    def replace(self, h=None, w=None, v=None) -> "QbmParams":
        return QbmParams(
            self.n,
            self.h if h is None else h,
            self.w if w is None else w,
            self.v if v is None else v,
        )

    def __eq__(self, other):
        if not isinstance(other, QbmParams):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None


@dataclass(frozen=True)
class QbmMoments:
    """Tr[rho s_is], Tr[rho s_is s_jt] (pairs), Tr[rho s_is s_jt s_ku] (triples)."""

    m: np.ndarray
    mu: np.ndarray
    iota: np.ndarray


class DensityMatrix:
    """Strictly positive, unit-trace Hermitian operator.

    ``log_op`` may carry an exactly known logarithm (for Gibbs states it is
    H - psi I); otherwise it is computed on demand.
    """

    def __init__(self, op, log_op=None):
        op = hermitian_part(op, "density matrix")
        tr = np.trace(op).real
        if abs(tr - 1.0) > 1e-10:
            raise DomainError(f"density matrix must have unit trace, got {tr!r}")
        lam = np.linalg.eigvalsh(op)
        if log_op is None and lam[0] <= 0.0:
            raise DomainError(f"density matrix must be strictly positive, smallest eigenvalue {lam[0]!r}")
        self.op = op
        self.op.setflags(write=False)
        self._log = None if log_op is None else hermitian_part(log_op, "log density")
        self.eigenvalues = lam

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def logm(self) -> np.ndarray:
        if self._log is None:
            self._log = herm_logm(self.op)
        return self._log


def _local_operator(coeffs: np.ndarray) -> np.ndarray:
    """sum over spin labels of coeffs[s, t, ...] sigma_s x sigma_t x ..."""
    k = coeffs.ndim
    if k == 1:
        return np.einsum("s,sab->ab", coeffs, PAULIS)
    if k == 2:
        return np.einsum("st,sab,tcd->acbd", coeffs, PAULIS, PAULIS).reshape(4, 4)
    return np.einsum("stu,sab,tcd,uef->acebdf", coeffs, PAULIS, PAULIS, PAULIS).reshape(8, 8)


def qbm_hamiltonian(p: QbmParams) -> np.ndarray:
    """H = sum h s + sum w s s + sum v s s s on (C^2)^{otimes n}."""
    dim = 2**p.n
    H = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(p.n):
        if np.any(p.h[i]):
            H += embed_operator(_local_operator(p.h[i]), (i,), p.n)
    for k, sites in enumerate(site_tuples(p.n, 2)):
        if np.any(p.w[k]):
            H += embed_operator(_local_operator(p.w[k]), sites, p.n)
    for k, sites in enumerate(site_tuples(p.n, 3)):
        if np.any(p.v[k]):
            H += embed_operator(_local_operator(p.v[k]), sites, p.n)
    return hermitian_part(H, "Hamiltonian")


def log_partition_quantum(p: QbmParams) -> float:
    """psi = log Tr exp(H) from the spectrum of H."""
    return float(logsumexp(np.linalg.eigvalsh(qbm_hamiltonian(p))))


def density_matrix(p: QbmParams) -> DensityMatrix:
    """Gibbs state exp(H - psi I)."""
    H = qbm_hamiltonian(p)
    lam, vecs = herm_eigh(H)
    psi = logsumexp(lam)
    rho = (vecs * np.exp(lam - psi)) @ vecs.conj().T
    return DensityMatrix(rho, log_op=H - psi * np.eye(H.shape[0]))


def _as_density(x) -> DensityMatrix:
    return x if isinstance(x, DensityMatrix) else DensityMatrix(x)


def exact_moments_quantum(p: QbmParams) -> QbmMoments:
    """All expectation coordinates from reduced density matrices of rho."""
    rho = density_matrix(p).op
    n = p.n
    m = np.zeros((n, 3))
    for i in range(n):
        r1 = reduced_density(rho, (i,), n)
        for s in range(3):
            m[i, s] = trace_product(r1, PAULIS[s])
    pairs = site_tuples(n, 2)
    mu = np.zeros((len(pairs), 3, 3))
    for k, sites in enumerate(pairs):
        r2 = reduced_density(rho, sites, n)
        for s in range(3):
            for t in range(3):
                mu[k, s, t] = trace_product(r2, np.kron(PAULIS[s], PAULIS[t]))
    triples = site_tuples(n, 3)
    iota = np.zeros((len(triples), 3, 3, 3))
    for k, sites in enumerate(triples):
        r3 = reduced_density(rho, sites, n)
        for s in range(3):
            for t in range(3):
                st = np.kron(PAULIS[s], PAULIS[t])
                for u in range(3):
                    iota[k, s, t, u] = trace_product(r3, np.kron(st, PAULIS[u]))
    return QbmMoments(np.clip(m, -1, 1), np.clip(mu, -1, 1), np.clip(iota, -1, 1))


def quantum_relative_entropy(rho, sigma) -> float:
    """Tr[rho (log rho - log sigma)].

    The reversed orientation Tr[sigma (log sigma - log rho)] is obtained by
    swapping the arguments.
    """
    rho, sigma = _as_density(rho), _as_density(sigma)
    if rho.dim != sigma.dim:
        raise DomainError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    return trace_product(rho.op, rho.logm() - sigma.logm())


# -- product states ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QProductCoords:
    """A product state in the ``"h"`` (natural) or ``"m"`` (Bloch vector) chart.

    ``values`` has shape (n, 3). The ``"m"`` chart keeps the per-site
    complement ``gap = 1 - |m_i|``; without it, |m_i| is clamped to
    1 - 1e-12.
    """

    chart: str
    values: np.ndarray
    gap: np.ndarray | None = None

    def __post_init__(self):
        if self.chart not in ("h", "m"):
            raise DomainError(f"chart must be 'h' or 'm', got {self.chart!r}")
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != 3 or vals.shape[0] == 0:
            raise DomainError(f"coordinates must have shape (n, 3), got {vals.shape}")
        check_site_count(vals.shape[0], QUANTUM_SITE_CAP)
        if not np.all(np.isfinite(vals)):
            raise DomainError("coordinates contain non-finite entries")
        gap = None
        if self.chart == "m":
            norms = np.linalg.norm(vals, axis=1)
            if self.gap is None:
                if np.any(norms >= 1.0):
                    raise DomainError("Bloch vectors must have norm < 1")
                gap = np.maximum(1.0 - norms, MEAN_CLAMP)
            else:
                gap = np.array(self.gap, dtype=np.float64)
                if gap.shape != norms.shape:
                    raise DomainError(f"gap shape {gap.shape} does not match {norms.shape}")
                if np.any(norms > 1.0 + 1e-15) or not np.all(gap > 0.0):
                    raise DomainError("Bloch vectors must have norm < 1")
            gap.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "gap", gap)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_mean(self) -> "QProductCoords":
        return self if self.chart == "m" else qproduct_to_mean(self)

    def to_natural(self) -> "QProductCoords":
        return self if self.chart == "h" else qmean_to_product(self)

    @property
    def mbar(self) -> np.ndarray:
        return self.to_mean().values

    @property
    def hbar(self) -> np.ndarray:
        return self.to_natural().values


def _require_chart(c, chart):
    if not isinstance(c, QProductCoords):
        raise DomainError(f"expected QProductCoords, got {type(c).__name__}")
    if c.chart != chart:
        raise DomainError(f"expected coordinates in the {chart!r} chart, got {c.chart!r}")


def qproduct_to_mean(c: QProductCoords) -> QProductCoords:
    """m_is = h_is tanh(|h_i|) / |h_i|, with the series branch near 0."""
    _require_chart(c, "h")
    h = c.values
    r = np.linalg.norm(h, axis=1)
    ratio = np.empty_like(r)
    small = r < _SERIES_CUTOFF
    ratio[small] = 1.0 - r[small] ** 2 / 3.0
    ratio[~small] = np.tanh(r[~small]) / r[~small]
    return QProductCoords("m", h * ratio[:, None], tanh_gap(r))


def qmean_to_product(c: QProductCoords) -> QProductCoords:
    """h_is = m_is atanh(|m_i|) / |m_i|, with the series branch near 0."""
    _require_chart(c, "m")
    m = c.values
    rho = np.linalg.norm(m, axis=1)
    ratio = np.empty_like(rho)
    small = rho < _SERIES_CUTOFF
    ratio[small] = 1.0 + rho[small] ** 2 / 3.0
    big = ~small
    ratio[big] = atanh_abs(np.minimum(rho[big], 1.0), c.gap[big]) / rho[big]
    return QProductCoords("h", m * ratio[:, None])


def site_log_partition(hbar) -> np.ndarray:
    """psi_i = log(exp|h_i| + exp(-|h_i|)) per site."""
    r = np.linalg.norm(np.asarray(hbar, dtype=float), axis=1)
    return np.logaddexp(r, -r)


def product_log_partition(hbar) -> float:
    return float(np.sum(site_log_partition(hbar)))


def product_state(c: QProductCoords, verify: bool = True) -> DensityMatrix:
    """Tensor product of single-site states exp(h_i . sigma - psi_i).

    With ``verify`` the result is compared against exp of the global
    exponent sum h_is s_is - psi I.
    """
    hbar = c.hbar
    mbar = c.mbar
    n = hbar.shape[0]
    factors = [0.5 * (np.eye(2) + np.einsum("s,sab->ab", mbar[i], PAULIS)) for i in range(n)]
    tau = factors[0]
    for f in factors[1:]:
        tau = np.kron(tau, f)
    psi = product_log_partition(hbar)
    log_tau = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i in range(n):
        log_tau += embed_operator(_local_operator(hbar[i]), (i,), n)
    log_tau -= psi * np.eye(2**n)
    if verify:
        glob = herm_expm(log_tau)
        err = np.max(np.abs(glob - tau))
        if err > 1e-10:
            raise NumericalError(f"product state forms disagree by {err:.3e}")
    return DensityMatrix(tau, log_op=log_tau)
