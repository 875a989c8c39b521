"""Input validation helpers and exception types shared across the package."""

from __future__ import annotations

import numpy as np

#: Largest classical site count handled by exhaustive enumeration.
CLASSICAL_SITE_CAP = 20
#: Largest quantum site count (dense 2**n x 2**n operators).
QUANTUM_SITE_CAP = 10
#: Magnetizations are pulled inside the open interval by this margin.
MEAN_CLAMP = 1e-12
#: Hermiticity defects at or below this are symmetrized away.
HERMITIAN_TOL = 1e-10


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SiteCapError(DomainError):
    """Site count exceeds what dense enumeration can handle."""


class NumericalError(ArithmeticError):
    """An internal consistency check failed beyond floating-point noise."""


def check_site_count(n, cap: int, what: str = "site count") -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"{what} must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"{what} must be >= 1, got {n}")
    if n > cap:
        raise SiteCapError(f"{what} {n} exceeds the cap of {cap}")
    return n


def check_finite_array(x, shape: tuple, name: str) -> np.ndarray:
    """Return ``x`` as a read-only float64 array of the given shape."""
    arr = np.array(x, dtype=np.float64)
    if arr.shape != shape:
        raise DomainError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def check_pauli_index(s) -> int:
    if isinstance(s, bool) or not isinstance(s, (int, np.integer)) or s not in (1, 2, 3):
        raise DomainError(f"Pauli index must be 1, 2 or 3, got {s!r}")
    return int(s)


def check_square(a: np.ndarray, name: str = "operator") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {a.shape}")
    return a
