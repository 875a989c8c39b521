"""Canonical (strictly increasing) site tuples and their dense expansions."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from ._validation import DomainError


@lru_cache(maxsize=None)
def site_tuples(n: int, order: int) -> tuple:
    """All strictly increasing 0-based site tuples of the given order."""
    return tuple(combinations(range(n), order))


@lru_cache(maxsize=None)
def tuple_position(n: int, order: int) -> dict:
    return {t: k for k, t in enumerate(site_tuples(n, order))}


def canonical_key(sites, spins=None):
    """Sort a site tuple, carrying spin labels along with their sites.

    Repeated sites are rejected.
    """
    sites = tuple(int(x) for x in sites)
    if len(set(sites)) != len(sites):
        raise DomainError(f"repeated site index in {sites}")
    order = sorted(range(len(sites)), key=lambda a: sites[a])
    key = tuple(sites[a] for a in order)
    if spins is None:
        return key, None
    return key, tuple(spins[a] for a in order)


def dense_pairs(n: int, w: np.ndarray) -> np.ndarray:
    """Expand pair storage of shape (P, *extra) into a symmetric (n, n, *extra) array.

    For spin-carrying storage (extra = (3, 3)) the transposed entry swaps spin
    axes too, so ``out[j, i, t, s] == out[i, j, s, t]``.
    """
    extra = w.shape[1:]
    out = np.zeros((n, n) + extra)
    for k, (i, j) in enumerate(site_tuples(n, 2)):
        out[i, j] = w[k]
        out[j, i] = w[k].T if extra else w[k]
    return out


def dense_triples(n: int, v: np.ndarray) -> np.ndarray:
    """Expand triple storage into an array symmetric under simultaneous permutation."""
    extra = v.shape[1:]
    out = np.zeros((n, n, n) + extra)
    for k, t in enumerate(site_tuples(n, 3)):
        for perm in permutations(range(3)):
            idx = tuple(t[a] for a in perm)
            out[idx] = np.transpose(v[k], perm) if extra else v[k]
    return out
