"""Disjoint-block and pattern-structured supports.

Blocks: ``b`` groups of components, group ``l`` using ``k_l`` columns and
``a_l`` components, supports pairwise disjoint. The block master is
re-solved with block-scoped cuts until every group's residual is within
its threshold.

Patterns: the support is a union of at most ``b`` catalog patterns.
Patterns whose own residual exceeds the threshold are dropped up front,
after which a single pattern-master solve suffices in the disjoint case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from .errors import CutBudgetExceeded, EmptyPatternSet, ParseError
from .io import atomic_write_text
from .linalg import _as_data, loadings_from_left_basis, spectral_summary
from .master import BlockSpec, CutPool, PatternSet, solve_block_master, solve_pattern_master

OPTIMAL = "Optimal"
GAP_BOUNDED = "GapBounded"
HEURISTIC = "Heuristic"


def _group(X, s, a):
    """(pi, eta, mu, loadings) for one group; an empty support contributes nothing."""
    if not s:
        return 0.0, 0.0, 0.0, np.zeros((X.p, a))
    summ = spectral_summary(X, s, a)
    return summ.pi, summ.eta, summ.mu, loadings_from_left_basis(X, s, summ)


@dataclass
class BlockSolveReport:
    supports: List[tuple]
    loadings: List[np.ndarray]
    psi: List[float]
    pi: List[float]
    eta: List[float]
    f_value: float
    psi_total: float
    cuts_per_block: List[int]
    certificate: str
    upper_bound: float
    gap_bound: float
    iterations: int


def solve_disjoint_blocks(X, spec: BlockSpec, max_cuts: int = 10_000, tolerance: float = 1e-9,
                          node_limit: int = 10**7) -> BlockSolveReport:
    """Disjoint supports for ``spec.b`` groups of components via block-scoped cuts.

    Each round solves the block master, then cuts every block whose
    support has residual above ``spec.eta[l]``. The first master value is
    an upper bound on the optimum; if the final variance reaches it the
    result is certified optimal, otherwise the gap is bounded by
    ``sum(spec.eta)`` whenever every threshold is at least the residual of
    the corresponding optimal block.
    """
    X = _as_data(X)
    w = X.col_sq_norms
    pool = CutPool()
    first_value = None
    rounds = 0
    while True:
        rounds += 1
        supports, value = solve_block_master(w, spec, pool, node_limit=node_limit)
        if first_value is None:
            first_value = value
        violated = []
        for l, s in enumerate(supports):
            if not s:
                continue
            summ = spectral_summary(X, s, spec.a[l], with_basis=False)
            if summ.eta > spec.eta[l] + tolerance * max(abs(spec.eta[l]), summ.mu):
                violated.append(l)
        if not violated:
            break
        for l in violated:
            if len(pool) >= max_cuts:
                raise CutBudgetExceeded(f"cut budget of {max_cuts} exhausted")
            pool.add(supports[l], block=l)

    groups = [_group(X, s, spec.a[l]) for l, s in enumerate(supports)]
    pis = [g[0] for g in groups]
    f_value = math.fsum(pis)
    if f_value >= first_value * (1 - tolerance):
        certificate, upper = OPTIMAL, f_value
    else:
        certificate, upper = GAP_BOUNDED, first_value
    cuts = [0] * spec.b
    for c in pool:
        cuts[c.block] += 1
    return BlockSolveReport(
        supports=supports,
        loadings=[g[3] for g in groups],
        psi=[g[2] for g in groups],
        pi=pis,
        eta=[g[1] for g in groups],
        f_value=f_value,
        psi_total=value,
        cuts_per_block=cuts,
        certificate=certificate,
        upper_bound=upper,
        gap_bound=0.0 if certificate == OPTIMAL else min(math.fsum(spec.eta), upper - f_value),
        iterations=rounds,
    )


SHAPES = ("rectangle", "triangle", "octagon")


@dataclass(frozen=True)
class GridPatternSpec:
    """Shapes to place on a ``width`` x ``height`` pixel grid.

    Sizes are pixel counts. Pixels are flattened row-major.
    """

    width: int
    height: int
    shapes: tuple = SHAPES
    min_size: int = 1
    max_size: Optional[int] = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        unknown = set(self.shapes) - set(SHAPES)
        if unknown:
            raise ValueError(f"unknown shapes: {sorted(unknown)}")


def _shape_cells(shape: str, m_h: int, m_w: int):
    """Cells (row, col) of a shape inside its bounding box."""
    if shape == "rectangle":
        return [(r, c) for r in range(m_h) for c in range(m_w)]
    if shape == "triangle":
        # lower-left half of the square, diagonal included
        return [(r, c) for r in range(m_h) for c in range(r + 1)]
    corners = {(0, 0), (0, m_w - 1), (m_h - 1, 0), (m_h - 1, m_w - 1)}
    return [(r, c) for r in range(m_h) for c in range(m_w) if (r, c) not in corners]


def generate_patterns(spec: GridPatternSpec) -> PatternSet:
    """Every in-grid placement of every shape whose pixel count is in range.

    Rectangles take any height and width; triangles and octagons are
    square, octagons needing a side of at least 3. Identical pixel sets
    are kept once, in order of first appearance.
    """
    W, H = spec.width, spec.height
    hi = spec.max_size if spec.max_size is not None else W * H
    boxes = []
    for shape in spec.shapes:
        if shape == "rectangle":
            boxes += [(shape, h, w) for h in range(1, H + 1) for w in range(1, W + 1)]
        else:
            lo_side = 3 if shape == "octagon" else 1
            boxes += [(shape, m, m) for m in range(lo_side, min(W, H) + 1)]
    seen = set()
    patterns = []
    for shape, bh, bw in boxes:
        cells = _shape_cells(shape, bh, bw)
        if not spec.min_size <= len(cells) <= hi:
            continue
        for r0 in range(H - bh + 1):
            for c0 in range(W - bw + 1):
                pat = tuple(sorted((r0 + r) * W + (c0 + c) for r, c in cells))
                if pat not in seen:
                    seen.add(pat)
                    patterns.append(pat)
    if not patterns:
        raise EmptyPatternSet(f"no shape of size {spec.min_size}..{hi} fits a {W}x{H} grid")
    return PatternSet(tuple(patterns), grid=(W, H))


def prefilter_patterns(X, pats: PatternSet, a: int, eta_tau: float) -> PatternSet:
    """Flag patterns whose residual with ``a`` components is at most ``eta_tau``."""
    X = _as_data(X)
    if len(pats) == 0:
        raise EmptyPatternSet("no patterns to filter")
    etas = tuple(spectral_summary(X, pat, a, with_basis=False).eta if pat else 0.0
                 for pat in pats.patterns)
    return replace(pats, admissible=tuple(e <= eta_tau for e in etas), pattern_eta=etas)


@dataclass
class StructuredReport:
    selected: tuple
    supports: List[tuple]
    union: tuple
    pi: List[float]
    eta: List[float]
    loadings: List[np.ndarray]
    f_value: float
    psi: float
    bound_status: str
    gap_bound: Optional[float]
    union_eta: Optional[float] = None


def solve_structured(X, pats: PatternSet, a: int, b: int, eta_tau: float,
                     disjoint: bool = True) -> StructuredReport:
    """Pick at most ``b`` admissible patterns and build components on them.

    With ``disjoint=True`` each selected pattern carries its own ``a``
    components and the gap is bounded by ``b * eta_tau``. Otherwise the
    union of the selected patterns carries a single group of ``a``
    components; admissibility of the parts says nothing about the union's
    residual, so that residual is reported and no bound is claimed.
    """
    X = _as_data(X)
    if pats.admissible is None:
        pats = prefilter_patterns(X, pats, a, eta_tau)
    sel, union, value = solve_pattern_master(X.col_sq_norms, replace(pats, budget=b, disjoint=disjoint))
    if disjoint:
        supports = [tuple(sorted(pats.patterns[j])) for j in sel]
        groups = [_group(X, s, a) for s in supports]
        return StructuredReport(
            selected=sel, supports=supports, union=union,
            pi=[g[0] for g in groups], eta=[g[1] for g in groups],
            loadings=[g[3] for g in groups],
            f_value=math.fsum(g[0] for g in groups), psi=value,
            bound_status=GAP_BOUNDED, gap_bound=b * eta_tau,
        )
    pi, eta, _, W = _group(X, union, a)
    return StructuredReport(
        selected=sel, supports=[union] if union else [], union=union,
        pi=[pi] if union else [], eta=[eta] if union else [], loadings=[W] if union else [],
        f_value=pi, psi=value, bound_status=HEURISTIC, gap_bound=None, union_eta=eta,
    )


def format_patterns(pats: PatternSet) -> str:
    w, h = pats.grid if pats.grid is not None else (0, 0)
    lines = [f"# grid {w}x{h}"]
    lines += [" ".join(str(i) for i in sorted(pat)) for pat in pats.patterns]
    return "\n".join(lines) + "\n"


def write_patterns(path, pats: PatternSet) -> None:
    """One pattern per line, sorted indices separated by spaces, after a ``# grid WxH`` header."""
    atomic_write_text(path, format_patterns(pats))


def read_patterns(path) -> PatternSet:
    grid = None
    patterns = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].split()
                if len(body) == 2 and body[0] == "grid":
                    try:
                        w, h = (int(x) for x in body[1].lower().split("x"))
                    except ValueError:
                        raise ParseError(f"bad grid header {line!r}", line=lineno) from None
                    grid = (w, h) if w and h else None
                continue
            try:
                patterns.append(tuple(sorted(int(tok) for tok in line.split())))
            except ValueError:
                raise ParseError(f"non-integer index in {line!r}", line=lineno) from None
    return PatternSet(tuple(patterns), grid=grid)
