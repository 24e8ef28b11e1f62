"""Reference methods: forward greedy selection, classic PCA and exhaustive search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .linalg import _as_data, pca_basis, spectral_summary

BRUTE_FORCE_LIMIT = 10**6


def greedy_support(X, k: int, a: int):
    """Grow a support one column at a time, maximising captured variance.

    While the support has fewer than ``a`` columns, candidates are scored
    with ``|support| + 1`` components. Ties go to the lowest index.

    Returns
    -------
    support : tuple
    trace : list of float
        Captured variance after each addition.
    """
    X = _as_data(X)
    if not 1 <= k <= X.p:
        raise ValueError(f"k must be in [1, {X.p}]")
    if a < 1:
        raise ValueError("a must be >= 1")
    chosen: list = []
    trace = []
    for _ in range(k):
        a_eff = min(len(chosen) + 1, a)
        best_val, best_i = -math.inf, None
        taken = set(chosen)
        for i in range(X.p):
            if i in taken:
                continue
            v = spectral_summary(X, chosen + [i], a_eff, with_basis=False).pi
            if v > best_val:
                best_val, best_i = v, i
        chosen.append(best_i)
        trace.append(best_val)
    return tuple(sorted(chosen)), trace


@dataclass
class PCAResult:
    basis: np.ndarray  # n x a left singular vectors
    residual: np.ndarray  # X - basis basis^T X
    eigenvalues: np.ndarray
    explained: np.ndarray  # cumulative variance for 1..a components


def classic_pca(X, a: int) -> PCAResult:
    """Rank-``a`` PCA of the full matrix and its residual."""
    X = _as_data(X)
    if a < 0 or a > min(X.n, X.p):
        raise ValueError(f"a must be in [0, {min(X.n, X.p)}]")
    if a == 0:
        return PCAResult(np.zeros((X.n, 0)), np.array(X.values), np.zeros(0), np.zeros(0))
    eig, U = pca_basis(X, a)
    resid = X.values - U @ (U.T @ X.values)
    return PCAResult(U, resid, eig, np.cumsum(eig))


def brute_force(X, k: int, a: int, limit: int = BRUTE_FORCE_LIMIT):
    """Exhaustive optimum over all supports of size ``k``.

    Returns ``(support, value, residual)``; among equal values the
    lexicographically smallest support is kept.
    """
    X = _as_data(X)
    if math.comb(X.p, k) > limit:
        raise TooLarge(f"C({X.p}, {k}) = {math.comb(X.p, k)} supports exceeds the limit {limit}")
    best = None
    for s in itertools.combinations(range(X.p), k):
        summ = spectral_summary(X, s, a, with_basis=False)
        if best is None or summ.pi > best[1] + 1e-12 * abs(best[1]):
            best = (s, summ.pi, summ.eta)
    return best
