"""Cut generation and the residual-threshold schedule for a common support.

For a threshold ``eta`` the relaxed problem picks the ``k`` columns of
largest total squared norm among supports whose residual (the energy left
outside their best rank-``a`` subspace) is at most ``eta``. The residual
constraint is enforced lazily: the best surviving support is checked and,
if it violates the threshold, a no-good cut removes it.

:func:`solve` then lowers ``eta`` step by step, each time just below the
residual of the last accepted support, keeps the support with the largest
captured variance, and certifies optimality when that variance reaches the
cut master's value.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import CutBudgetExceeded, Infeasible
from .linalg import DataMatrix, _as_data, loadings_from_left_basis, pca_residual_norms, spectral_summary
from .master import CommonMaster, Cut, CutPool

OPTIMAL = "Optimal"
UPPER_BOUNDED = "UpperBounded"


@dataclass
class EngineConfig:
    """Settings for :func:`solve`.

    ``eta0`` and ``delta`` default to ``||X||_F^2`` and ``1e-6 * ||X||_F^2``.
    ``patience`` is the number of consecutive outer iterations without an
    improvement of the incumbent before stopping.
    """

    a: int
    k: int
    eta0: Optional[float] = None
    delta: Optional[float] = None
    patience: int = 25
    max_cuts: int = 10_000
    tolerance: float = 1e-9
    max_ties: int = 32

    def __post_init__(self):
        if self.a < 1 or self.k < 1:
            raise ValueError("a and k must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.eta0 is not None and self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")


@dataclass
class IterationRecord:
    t: int
    eta: float
    psi: float
    f: float
    cuts: int
    support: tuple


@dataclass
class SolveReport:
    support: tuple
    loadings: np.ndarray
    psi: float
    f_value: float
    eta_star: float
    trace: List[IterationRecord]
    cuts_generated: int
    certificate: str
    upper_bound: float
    apriori_bound: Optional[float]
    stop_reason: str
    runtime: Dict[str, float] = field(default_factory=dict)

    @property
    def gap_bound(self) -> float:
        """Absolute gap to the optimum implied by the certificate or by ``eta_star``."""
        if self.certificate == OPTIMAL:
            return 0.0
        return min(self.eta_star, self.upper_bound - self.f_value)

    @property
    def gap_ratio(self) -> float:
        return self.gap_bound / self.f_value if self.f_value > 0 else 0.0


def _is_feasible(eta_s: float, mu: float, eta: float, tol: float) -> bool:
    return eta_s <= eta + tol * max(abs(eta), mu)


def separate(X, s, a: int, eta: float, tolerance: float = 1e-9) -> Optional[Cut]:
    """Return a cut forbidding ``s`` if its residual exceeds ``eta``, else None."""
    summ = spectral_summary(X, s, a, with_basis=False)
    if _is_feasible(summ.eta, summ.mu, eta, tolerance):
        return None
    return Cut(tuple(s))


class _Evaluator:
    """Caches (pi, eta, mu) per support and remembers the best pi seen."""

    def __init__(self, X: DataMatrix, a: int):
        self.X = X
        self.a = a
        self.cache: Dict[tuple, Tuple[float, float, float]] = {}
        self.best: Optional[Tuple[float, tuple]] = None
        self.seconds = 0.0

    def __call__(self, s: tuple):
        hit = self.cache.get(s)
        if hit is None:
            t0 = time.perf_counter()
            summ = spectral_summary(self.X, s, self.a, with_basis=False)
            self.seconds += time.perf_counter() - t0
            hit = self.cache[s] = (summ.pi, summ.eta, summ.mu)
            if self.best is None or hit[0] > self.best[0]:
                self.best = (hit[0], s)
        return hit


def _cut_loop(master: CommonMaster, evaluate: _Evaluator, eta: float, tol: float,
              max_cuts: int, max_ties: int) -> Tuple[tuple, float]:
    """Cut master solutions until one satisfies the residual threshold.

    Among master solutions of equal value the one with the smallest
    residual is preferred.
    """
    pool = master.pool
    while True:
        ties = master.ties(max_ties)
        scored = []
        for s, v in ties:
            pi, eta_s, mu = evaluate(s)
            scored.append((eta_s, mu, s, v))
        feasible = [r for r in scored if _is_feasible(r[0], r[1], eta, tol)]
        if feasible:
            best = min(feasible, key=lambda r: r[0])
            return best[2], best[3]
        for _, _, s, _ in scored:
            if len(pool) >= max_cuts:
                raise CutBudgetExceeded(f"cut budget of {max_cuts} exhausted")
            pool.add(s)


def generate_cuts(X, cfg: EngineConfig, eta: float, pool: Optional[CutPool] = None):
    """Solve the relaxed support problem at a fixed residual threshold.

    Parameters
    ----------
    X : DataMatrix
    cfg : EngineConfig
        Only ``a``, ``k``, ``tolerance``, ``max_cuts`` and ``max_ties`` are used.
    eta : float
        Residual threshold.
    pool : CutPool, optional
        Cuts from earlier thresholds; extended in place.

    Returns
    -------
    support : tuple
    pool : CutPool
    """
    X = _as_data(X)
    pool = CutPool() if pool is None else pool
    master = CommonMaster(X.col_sq_norms, cfg.k, pool)
    s, _ = _cut_loop(master, _Evaluator(X, cfg.a), eta, cfg.tolerance, cfg.max_cuts, cfg.max_ties)
    return s, pool


def solve(X, cfg: EngineConfig, callback: Optional[Callable[[IterationRecord], None]] = None,
          apriori: bool = True) -> SolveReport:
    """Sparse PCA with a common support of ``cfg.k`` columns and ``cfg.a`` components.

    The residual threshold starts at ``eta0`` and after every accepted
    support drops to that support's residual minus ``delta``. Cuts carry
    over between thresholds. The run stops after ``patience`` iterations
    without improvement, when the threshold goes negative, or when the cut
    budget or the candidate set is exhausted.

    The reported support is the best one evaluated during the run (cut
    supports included). The certificate is ``"Optimal"`` when its variance
    reaches the current master value; otherwise that value is an upper
    bound on the optimum.
    """
    t_start = time.perf_counter()
    X = _as_data(X)
    if cfg.k > X.p:
        raise ValueError(f"k={cfg.k} exceeds the number of columns p={X.p}")
    fro = X.frobenius_sq
    scale = fro if fro > 0 else 1.0
    eta_t = cfg.eta0 if cfg.eta0 is not None else scale
    delta = cfg.delta if cfg.delta is not None else 1e-6 * scale

    pool = CutPool()
    master = CommonMaster(X.col_sq_norms, cfg.k, pool)
    evaluate = _Evaluator(X, cfg.a)
    trace: List[IterationRecord] = []
    f_star = -math.inf
    eta_star = math.inf
    stale = 0
    stop = None
    t = 0
    while True:
        try:
            s, psi_t = _cut_loop(master, evaluate, eta_t, cfg.tolerance, cfg.max_cuts, cfg.max_ties)
        except CutBudgetExceeded:
            stop = "cut_budget"
            break
        except Infeasible:
            stop = "infeasible"
            break
        pi_t, eta_s, _ = evaluate(s)
        rec = IterationRecord(t, eta_t, psi_t, pi_t, len(pool), s)
        trace.append(rec)
        if callback is not None:
            callback(rec)
        if pi_t > f_star:
            f_star, eta_star, stale = pi_t, eta_t, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                stop = "patience"
                break
        eta_next = eta_s - delta
        if eta_next < 0:
            stop = "eta_exhausted"
            break
        eta_t = eta_next
        t += 1

    t0 = time.perf_counter()
    try:
        psi_theta = master.solve()[1]
    except Infeasible:
        psi_theta = -math.inf
    master_seconds = time.perf_counter() - t0

    if evaluate.best is None:
        raise Infeasible("no support could be evaluated")
    f_value, support = evaluate.best
    summ = spectral_summary(X, support, cfg.a)
    loadings = loadings_from_left_basis(X, support, summ)
    psi = summ.mu
    if f_value >= psi_theta - cfg.tolerance * abs(psi_theta) or psi_theta == -math.inf:
        certificate, upper = OPTIMAL, f_value
    else:
        certificate, upper = UPPER_BOUNDED, psi_theta

    bound = None
    if apriori:
        bound = apriori_bound(X, cfg.a, cfg.k)
    total = time.perf_counter() - t_start
    return SolveReport(
        support=support,
        loadings=loadings,
        psi=psi,
        f_value=f_value,
        eta_star=eta_star,
        trace=trace,
        cuts_generated=len(pool),
        certificate=certificate,
        upper_bound=upper,
        apriori_bound=bound,
        stop_reason=stop,
        runtime={
            "total_s": total,
            "separation_s": evaluate.seconds,
            "master_s": max(total - evaluate.seconds, 0.0),
            "final_master_s": master_seconds,
        },
    )


def apriori_bound(X, a: int, k: int) -> float:
    """Sum of the ``k`` largest squared column norms of the rank-``a`` PCA residual.

    Bounds the residual of an optimal support before any solve.
    """
    r = np.sort(pca_residual_norms(X, a))[::-1]
    return float(math.fsum(r[:k]))


def gap_bounds(X, cfg: EngineConfig, report: SolveReport):
    """``(eta_bound, apriori_bound, gap_ratio)`` for a finished run.

    ``eta_bound`` is the threshold of the best accepted support; it bounds
    the gap whenever it is at least the residual of an optimal support.
    ``gap_ratio`` is ``eta_bound / f_value``.
    """
    bound = report.apriori_bound if report.apriori_bound is not None else apriori_bound(X, cfg.a, cfg.k)
    ratio = report.eta_star / report.f_value if report.f_value > 0 else math.inf
    return report.eta_star, bound, ratio


def worstcase_matrix(p: int, spread: float = 0.5) -> DataMatrix:
    """A p x p instance that forces a cut for every pair except the optimal one.

    Meant for ``k=2, a=1``. Row 0 holds ``1, 1`` in columns 0 and 1 and
    ``1 - 5/24`` elsewhere. Column ``j >= 2`` additionally carries
    ``+spread`` in row ``j`` and ``-spread`` in row ``j + 1`` (row 1 for the
    last column). Columns 0 and 1 coincide, so their pair has zero residual
    and variance 2, while every other pair has squared norm above 2,
    variance below 2 and a positive residual. The matrix is not centered.
    """
    if p < 4:
        raise ValueError("p must be at least 4")
    alpha = 5.0 / 24.0
    X = np.zeros((p, p))
    X[0, 0] = X[0, 1] = 1.0
    X[0, 2:] = 1.0 - alpha
    for j in range(2, p):
        X[j, j] = spread
        X[j + 1 if j + 1 < p else 1, j] = -spread
    return DataMatrix.from_array(X, center=False)
