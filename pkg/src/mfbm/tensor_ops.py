"""Dense Hermitian kernels on n spin-1/2 sites.

Sites are tensor factors of (C^2)^{otimes n} with site 1 leftmost. The
computational basis is ordered lexicographically with the sigma_3
eigenvalue +1 before -1, so basis index 0 is the all-up state.

Matrix functions go through a full Hermitian eigendecomposition. Inputs
with a Hermiticity defect up to ``HERMITIAN_TOL`` are symmetrized first.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from ._validation import (
    HERMITIAN_TOL,
    QUANTUM_SITE_CAP,
    DomainError,
    check_pauli_index,
    check_site_count,
    check_square,
)

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
for _p in _PAULI:
    _p.setflags(write=False)

#: Stacked Pauli matrices, ``PAULIS[s - 1]`` is sigma_s.
PAULIS = np.stack(_PAULI)
PAULIS.setflags(write=False)


def pauli(s: int) -> np.ndarray:
    """Return the 2x2 Pauli matrix sigma_s for s in {1, 2, 3}."""
    return _PAULI[check_pauli_index(s) - 1].copy()


def site_operator(n: int, i: int, s: int) -> np.ndarray:
    """Return sigma_s acting on site ``i`` (1-based) of an n-site register."""
    n = check_site_count(n, QUANTUM_SITE_CAP)
    s = check_pauli_index(s)
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= n:
        raise DomainError(f"site index must be in 1..{n}, got {i!r}")
    factors = [np.eye(2)] * (i - 1) + [_PAULI[s - 1]] + [np.eye(2)] * (n - i)
    return reduce(np.kron, factors).astype(np.complex128)


def embed_operator(local: np.ndarray, sites, n: int) -> np.ndarray:
    """Embed an operator on ``len(sites)`` qubits at the given 0-based sites.

    ``sites`` must be strictly increasing; the tensor order of ``local``
    follows ``sites``.
    """
    sites = [int(x) for x in sites]
    k = len(sites)
    if any(b <= a for a, b in zip(sites, sites[1:])) or not sites:
        raise DomainError(f"sites must be strictly increasing, got {sites}")
    if sites[0] < 0 or sites[-1] >= n:
        raise DomainError(f"sites {sites} out of range for n={n}")
    if local.shape != (2**k, 2**k):
        raise DomainError(f"local operator shape {local.shape} does not match {k} sites")
    rest = [x for x in range(n) if x not in sites]
    full = np.kron(local, np.eye(2 ** (n - k))).reshape((2,) * (2 * n))
    order = sites + rest
    perm = [order.index(p) for p in range(n)]
    full = full.transpose(perm + [n + x for x in perm])
    return full.reshape(2**n, 2**n)


def hermitian_part(a: np.ndarray, name: str = "operator") -> np.ndarray:
    """Return (A + A^dagger)/2, rejecting matrices that are not Hermitian."""
    a = check_square(np.asarray(a, dtype=np.complex128), name)
    defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if defect > HERMITIAN_TOL:
        raise DomainError(f"{name} is not Hermitian (defect {defect:.3e})")
    return 0.5 * (a + a.conj().T)


def herm_eigh(a: np.ndarray):
    """Eigendecomposition of a (symmetrized) Hermitian matrix."""
    return np.linalg.eigh(hermitian_part(a))


def herm_expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix."""
    lam, vecs = herm_eigh(a)
    out = (vecs * np.exp(lam)) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def herm_logm(p: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a Hermitian positive definite matrix."""
    lam, vecs = herm_eigh(p)
    if lam[0] <= 1e-300:
        raise DomainError(f"matrix logarithm needs positive eigenvalues, smallest is {lam[0]!r}")
    out = (vecs * np.log(lam)) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def trace_product(a: np.ndarray, b: np.ndarray) -> float:
    """Re Tr(AB) for Hermitian A, B; the imaginary residue must vanish."""
    a = check_square(np.asarray(a), "A")
    b = check_square(np.asarray(b), "B")
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    tr = np.einsum("ij,ji->", a, b)
    if abs(tr.imag) > 1e-10 * max(1.0, abs(tr.real)):
        raise DomainError(f"trace of product has imaginary part {tr.imag:.3e}; inputs not Hermitian")
    return float(tr.real)


def reduced_density(rho: np.ndarray, sites, n: int) -> np.ndarray:
    """Partial trace of ``rho`` keeping the 0-based ``sites`` (ascending)."""
    sites = [int(x) for x in sites]
    t = np.asarray(rho).reshape((2,) * (2 * n))
    rows = list(range(n))
    cols = [n + x if x in sites else x for x in range(n)]
    out = sites + [n + x for x in sites]
    k = len(sites)
    return np.einsum(t, rows + cols, out).reshape(2**k, 2**k)


def pauli_string(spins) -> np.ndarray:
    """Kronecker product sigma_{s1} x sigma_{s2} x ... for spins in {1,2,3}."""
    return reduce(np.kron, [_PAULI[check_pauli_index(s) - 1] for s in spins])
