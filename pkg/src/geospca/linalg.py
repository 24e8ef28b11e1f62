"""Dense spectral kernel: centering, sub-matrix spectra and loadings.

Every solver in the package talks to the data only through the quantities
defined here. For a support ``s`` (a sorted tuple of column indices) and a
component count ``a``:

* ``mu``  -- total squared norm of the selected columns,
* ``pi``  -- variance captured by the best rank-``a`` projection of those
  columns (sum of the ``a`` largest eigenvalues of their Gram matrix),
* ``eta`` -- what that projection leaves behind, ``mu - pi``.

The p x p covariance is never formed; spectra are taken from whichever of
the |s| x |s| or n x n Gram matrices is smaller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptySupport, NonFiniteInput

Support = tuple  # sorted tuple of distinct column indices


def as_support(indices: Iterable[int], p: Optional[int] = None) -> tuple:
    """Normalise ``indices`` to a sorted tuple, validating range and uniqueness."""
    s = tuple(sorted(int(i) for i in indices))
    if len(set(s)) != len(s):
        raise ValueError(f"support has repeated indices: {s}")
    if s and s[0] < 0:
        raise ValueError(f"negative index in support: {s}")
    if p is not None and s and s[-1] >= p:
        raise ValueError(f"index {s[-1]} out of range for p={p}")
    return s


@dataclass(frozen=True)
class DataMatrix:
    """An n x p data matrix with cached squared column norms.

    Build it with :func:`center` or :meth:`from_array`; the arrays are
    marked read-only so instances can be shared freely.
    """

    values: np.ndarray
    col_sq_norms: np.ndarray
    centered: bool

    @classmethod
    def from_array(cls, raw, center: bool = True) -> "DataMatrix":
        X = np.array(raw, dtype=float, order="F", ndmin=2, copy=True)
        if X.ndim != 2:
            raise ValueError("data matrix must be two-dimensional")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"data matrix must be non-empty, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput("data matrix contains NaN or Inf entries")
        if center:
            X -= X.mean(axis=0)
        norms = np.einsum("ij,ij->j", X, X)
        X.setflags(write=False)
        norms.setflags(write=False)
        return cls(X, norms, bool(center))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def frobenius_sq(self) -> float:
        return float(self.col_sq_norms.sum())

    def columns(self, s: Sequence[int]) -> np.ndarray:
        return self.values[:, list(s)]


def center(raw) -> DataMatrix:
    """Subtract column means and cache squared column norms."""
    return DataMatrix.from_array(raw, center=True)


def _as_data(X) -> DataMatrix:
    return X if isinstance(X, DataMatrix) else DataMatrix.from_array(X, center=False)


@dataclass(frozen=True)
class SpectralSummary:
    a: int
    top_eigenvalues: np.ndarray
    left_basis: Optional[np.ndarray]
    pi: float
    mu: float
    eta: float
    # right singular vectors restricted to the support rows, |s| x a
    right_basis: Optional[np.ndarray] = None


def _orthonormalize(M: np.ndarray) -> np.ndarray:
    """QR with signs fixed so that nearly-orthonormal input is barely moved."""
    if M.shape[1] == 0:
        return M
    q, r = np.linalg.qr(M)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _complete(B: np.ndarray, ncols: int) -> np.ndarray:
    """Extend orthonormal columns ``B`` (m x r) to ``min(ncols, m)`` columns.

    Completion directions come from the canonical basis so the result is
    deterministic. Columns beyond ``m`` are zero.
    """
    m, r = B.shape
    target = min(ncols, m)
    out = np.zeros((m, ncols))
    out[:, :r] = B
    if target > r:
        # canonical directions with the largest residual norm, 1 - ||B[i]||^2;
        # only as many as needed are materialised, never an m x m identity
        order = np.argsort(np.einsum("ij,ij->i", B, B), kind="stable")
        need = target - r
        take = need
        while True:
            idx = order[:take]
            cand = np.zeros((m, idx.size))
            cand[idx, np.arange(idx.size)] = 1.0
            cand -= B @ (B.T @ cand)
            rr = np.linalg.qr(cand, mode="r")
            keep = np.abs(np.diag(rr)) > 1e-8
            if keep.sum() >= need or take >= m:
                break
            take = min(m, 2 * take)
        extra = cand[:, np.flatnonzero(keep)[:need]]
        full = _orthonormalize(np.hstack([B, extra]))
        out[:, :target] = full
        out[:, :r] = B
    return out


def _gram_spectrum(Xs: np.ndarray):
    """Eigen-decomposition of the smaller Gram matrix of ``Xs``.

    Returns ``(eigenvalues descending, eigenvectors, side)`` where ``side``
    is ``"right"`` when the |s| x |s| Gram was used.
    """
    n, k = Xs.shape
    if k <= n:
        G = Xs.T @ Xs
        side = "right"
    else:
        G = Xs @ Xs.T
        side = "left"
    w, V = np.linalg.eigh(G)
    w = w[::-1]
    V = V[:, ::-1]
    np.maximum(w, 0.0, out=w)
    return w, V, side


def spectral_summary(X, s: Sequence[int], a: int, with_basis: bool = True) -> SpectralSummary:
    """Top-``a`` spectrum of the columns ``s`` of ``X``.

    Parameters
    ----------
    X : DataMatrix
    s : sequence of int
        Column indices; need not be sorted.
    a : int
        Number of components. When ``a`` exceeds the rank the eigenvalues
        are zero-padded and the left basis is completed orthonormally.
    with_basis : bool
        Skip the basis computation when only ``pi``/``eta`` are needed.
    """
    X = _as_data(X)
    if a < 1:
        raise ValueError("a must be >= 1")
    s = list(s)
    if len(s) == 0:
        raise EmptySupport("cannot summarise an empty support")
    Xs = X.values[:, s]
    mu = float(X.col_sq_norms[s].sum())
    w, V, side = _gram_spectrum(Xs)
    top = np.zeros(a)
    m = min(a, w.size)
    top[:m] = w[:m]
    pi_raw = float(top.sum())
    eta = max(mu - pi_raw, 0.0)
    pi = mu - eta

    U = right = None
    if with_basis:
        n, k = Xs.shape
        scale = w[0] if w.size else 0.0
        nz = int(np.count_nonzero(w[:m] > 1e-12 * max(scale, np.finfo(float).tiny)))
        sig = np.sqrt(w[:nz])
        if side == "right":
            right_nz = V[:, :nz]
            left_nz = (Xs @ right_nz) / sig if nz else np.zeros((n, 0))
        else:
            left_nz = V[:, :nz]
            right_nz = (Xs.T @ left_nz) / sig if nz else np.zeros((k, 0))
        left_nz = _orthonormalize(left_nz)
        right_nz = _orthonormalize(right_nz)
        U = _complete(left_nz, a)
        right = _complete(right_nz, a)
    return SpectralSummary(a, top, U, pi, mu, eta, right)


def variance_objective(X, s: Sequence[int], a: int) -> float:
    """Variance captured by ``a`` orthogonal components supported on ``s``."""
    return spectral_summary(X, s, a, with_basis=False).pi


def residual(X, s: Sequence[int], a: int) -> float:
    """Energy of the columns ``s`` left outside their best rank-``a`` subspace."""
    return spectral_summary(X, s, a, with_basis=False).eta


def loadings_from_left_basis(X, s: Sequence[int], summary: SpectralSummary) -> np.ndarray:
    """Embed the component loadings for support ``s`` into a p x a matrix.

    Rows outside ``s`` are zero. Columns attached to zero eigenvalues are
    still orthonormal when |s| >= a and zero otherwise.
    """
    X = _as_data(X)
    s = list(s)
    if summary.right_basis is None:
        summary = spectral_summary(X, s, summary.a, with_basis=True)
    W = np.zeros((X.p, summary.a))
    W[s, :] = summary.right_basis
    return W


def pca_basis(X, a: int):
    """Top-``a`` eigenvalues and left singular vectors of the whole matrix."""
    X = _as_data(X)
    summ = spectral_summary(X, range(X.p), a)
    return summ.top_eigenvalues, summ.left_basis


def pca_residual_norms(X, a: int) -> np.ndarray:
    """Squared column norms of ``X - U U^T X`` for the rank-``a`` PCA basis ``U``.

    Computed from the projections ``U^T X`` so the residual matrix itself is
    never stored.
    """
    X = _as_data(X)
    if a <= 0:
        return np.array(X.col_sq_norms)
    _, U = pca_basis(X, a)
    proj = U.T @ X.values
    r = X.col_sq_norms - np.einsum("ij,ij->j", proj, proj)
    return np.maximum(r, 0.0)
