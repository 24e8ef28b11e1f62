"""Exact solvers for the binary support-selection master problems.

All three masters maximise a sum of nonnegative column weights, so they
are solved combinatorially rather than through a MIP:

* :class:`CommonMaster` walks k-subsets in nonincreasing weight order
  (best-first over a unique-parent successor tree) and skips those
  excluded by the cut pool. It keeps its frontier between calls, so the
  cut-generation loop pays for each cut once instead of re-enumerating.
* :func:`solve_block_master` is a depth-first branch-and-bound assigning
  columns to disjoint blocks.
* :func:`solve_pattern_master` is a branch-and-bound over catalog patterns.

Ties are broken towards the lexicographically smallest sorted index lists.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import Infeasible, NodeLimitExceeded

TIE_RTOL = 1e-12
DEFAULT_NODE_LIMIT = 10**7


@dataclass(frozen=True)
class Cut:
    """No-good cut: at most ``len(forbidden) - 1`` of these columns may be chosen.

    ``block=None`` applies the cut to every block.
    """

    forbidden: tuple
    block: Optional[int] = None

    def __post_init__(self):
        f = tuple(sorted(int(i) for i in self.forbidden))
        if not f:
            raise ValueError("a cut must forbid at least one index")
        if len(set(f)) != len(f):
            raise ValueError(f"cut has repeated indices: {f}")
        object.__setattr__(self, "forbidden", f)


class CutPool:
    """Append-only collection of cuts with fast superset tests."""

    def __init__(self, cuts: Iterable = ()):
        self._cuts: List[Cut] = []
        # (block, size) -> set of frozensets
        self._by_size: Dict[Tuple[Optional[int], int], set] = {}
        # (block, element) -> list of frozensets containing element
        self._by_elem: Dict[Tuple[Optional[int], int], list] = {}
        for c in cuts:
            if isinstance(c, Cut):
                self.add(c.forbidden, c.block)
            else:
                self.add(c)

    def __len__(self):
        return len(self._cuts)

    def __iter__(self):
        return iter(self._cuts)

    def __repr__(self):
        return f"CutPool({len(self)} cuts)"

    def add(self, forbidden, block: Optional[int] = None) -> bool:
        """Append a cut; returns False if it was already present."""
        cut = Cut(tuple(forbidden), block)
        fs = frozenset(cut.forbidden)
        bucket = self._by_size.setdefault((block, len(fs)), set())
        if fs in bucket:
            return False
        bucket.add(fs)
        for e in fs:
            self._by_elem.setdefault((block, e), []).append(fs)
        self._cuts.append(cut)
        return True

    def block_cuts(self, block: Optional[int]) -> frozenset:
        """Forbidden sets that apply to ``block`` (including global cuts)."""
        out = set()
        for (b, _), sets in self._by_size.items():
            if b is None or b == block:
                out |= sets
        return frozenset(out)

    def excludes(self, support: Sequence[int], block: Optional[int] = None) -> bool:
        """True when ``support`` contains some forbidden set of ``block``."""
        s = frozenset(support)
        scopes = (None,) if block is None else (None, block)
        for b in scopes:
            for (bb, size), sets in self._by_size.items():
                if bb != b or size > len(s):
                    continue
                if size == len(s):
                    if s in sets:
                        return True
                elif any(f <= s for f in sets):
                    return True
        return False

    def completes_cut(self, partial: set, new: int, block: Optional[int]) -> bool:
        """True when adding ``new`` to ``partial`` makes it contain a cut."""
        scopes = (None,) if block is None else (None, block)
        for b in scopes:
            for f in self._by_elem.get((b, new), ()):
                if all(e == new or e in partial for e in f):
                    return True
        return False


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ValueError("weights must be a vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    return w


def _same_value(x: float, y: float) -> bool:
    return abs(x - y) <= TIE_RTOL * max(abs(x), abs(y), 1e-300)


def _better(value, key, best_value, best_key) -> bool:
    """Larger value wins; equal values fall back to the smaller key."""
    if _same_value(value, best_value):
        return key < best_key
    return value > best_value


class CommonMaster:
    """Best-first enumeration of k-subsets that survive a cut pool.

    The pool is held by reference: cuts appended to it are honoured by the
    next query. Because cuts are only ever added, candidates skipped once
    stay skipped and the enumeration never restarts.

    Examples
    --------
    >>> m = CommonMaster([5, 4, 3, 2], 2)
    >>> m.solve()
    ((0, 1), 9.0)
    >>> m.pool.add((0, 1))
    True
    >>> m.solve()
    ((0, 2), 8.0)
    """

    def __init__(self, weights, k: int, pool: Optional[CutPool] = None, block: Optional[int] = None):
        self.weights = _check_weights(weights)
        self.p = self.weights.size
        self.k = int(k)
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        self.pool = CutPool() if pool is None else pool
        self.block = block
        self._order = np.argsort(-self.weights, kind="stable")
        self._ws = self.weights[self._order].tolist()
        self._orig = self._order.tolist()
        self._heap: list = []
        self._buffer: List[Tuple[tuple, float]] = []
        self.popped = 0
        if self.k <= self.p:
            start = tuple(range(self.k))
            self._push(start, self.k - 1)

    def _push(self, combo, m):
        value = math.fsum(self._ws[c] for c in combo)
        key = tuple(sorted(self._orig[c] for c in combo))
        heapq.heappush(self._heap, (-value, key, combo, m))

    def _pop(self) -> bool:
        if not self._heap:
            return False
        negv, key, c, m = heapq.heappop(self._heap)
        self.popped += 1
        k = self.k
        if k:
            limit = c[m + 1] if m + 1 < k else self.p
            if c[m] + 1 < limit:
                self._push(c[:m] + (c[m] + 1,) + c[m + 1:], m)
            if m >= 1 and c[m] > m:
                self._push(c[: m - 1] + (m,) + c[m:], m - 1)
        self._buffer.append((key, -negv))
        return True

    def candidates(self):
        """Yield ``(support, value)`` for surviving subsets, best first.

        Entries found to be cut are dropped for good.
        """
        i = 0
        while True:
            while i < len(self._buffer) and self.pool.excludes(self._buffer[i][0], self.block):
                del self._buffer[i]
            if i < len(self._buffer):
                yield self._buffer[i]
                i += 1
            elif not self._pop():
                return

    def solve(self) -> Tuple[tuple, float]:
        for cand in self.candidates():
            return cand
        raise Infeasible(f"every {self.k}-subset of {self.p} columns is cut")

    def ties(self, limit: int = 32) -> List[Tuple[tuple, float]]:
        """Up to ``limit`` surviving candidates sharing the optimal value."""
        out = []
        for s, v in self.candidates():
            if out and not _same_value(v, out[0][1]):
                break
            out.append((s, v))
            if len(out) >= limit:
                break
        if not out:
            raise Infeasible(f"every {self.k}-subset of {self.p} columns is cut")
        return out


def solve_common_master(weights, k: int, pool: Optional[CutPool] = None) -> Tuple[tuple, float]:
    """Best k-subset by total weight that contains no forbidden set.

    Raises :class:`Infeasible` when every k-subset is cut.
    """
    return CommonMaster(weights, k, pool).solve()


@dataclass(frozen=True)
class BlockSpec:
    """Cardinalities, component counts and residual thresholds per block."""

    k: tuple
    a: tuple = None
    eta: tuple = None

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        b = len(k)
        a = tuple(int(x) for x in (self.a if self.a is not None else (1,) * b))
        eta = tuple(float(x) for x in (self.eta if self.eta is not None else (math.inf,) * b))
        if not (len(a) == len(eta) == b) or b == 0:
            raise ValueError("k, a and eta must have the same positive length")
        if any(x < 1 for x in k) or any(x < 1 for x in a):
            raise ValueError("block cardinalities and component counts must be positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "eta", eta)

    @property
    def b(self) -> int:
        return len(self.k)


def solve_block_master(weights, spec, pool: Optional[CutPool] = None,
                       node_limit: int = DEFAULT_NODE_LIMIT) -> Tuple[List[tuple], float]:
    """Disjoint block supports of sizes ``spec.k`` maximising total weight.

    ``spec`` is a :class:`BlockSpec` or a sequence of cardinalities. Cuts
    whose ``block`` is set only restrict that block. Returns the list of
    supports and the objective value.
    """
    w = _check_weights(weights)
    ks = spec.k if isinstance(spec, BlockSpec) else tuple(int(x) for x in spec)
    pool = CutPool() if pool is None else pool
    p, b = w.size, len(ks)
    if sum(ks) > p:
        raise Infeasible(f"blocks need {sum(ks)} columns but only {p} exist")

    order = np.argsort(-w, kind="stable").tolist()
    ws = [float(w[j]) for j in order]
    prefix = [0.0]
    for x in ws:
        prefix.append(prefix[-1] + x)

    # blocks with the same size and the same cuts are interchangeable
    cls_of = {}
    classes = []
    for i in range(b):
        sig = (ks[i], pool.block_cuts(i))
        if sig not in cls_of:
            cls_of[sig] = len(classes)
            classes.append([])
        classes[cls_of[sig]].append(i)
    prev_twin = [None] * b
    for members in classes:
        for a_, b_ in zip(members, members[1:]):
            prev_twin[b_] = a_

    blocks = [set() for _ in range(b)]
    best = {"value": -math.inf, "key": None}
    nodes = 0

    def canonical():
        out = [None] * b
        for members in classes:
            sets = sorted((tuple(sorted(blocks[i])) for i in members),
                          key=lambda t: (len(t) == 0, t))
            for i, t in zip(members, sets):
                out[i] = t
        return tuple(out)

    def dfs(pos, cur, remaining):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise NodeLimitExceeded(f"block master exceeded {node_limit} nodes")
        if remaining == 0:
            key = canonical()
            value = math.fsum(w[j] for t in key for j in t)
            if best["key"] is None or _better(value, key, best["value"], best["key"]):
                best["value"], best["key"] = value, key
            return
        if p - pos < remaining:
            return
        ub = cur + prefix[pos + remaining] - prefix[pos]
        if best["key"] is not None and ub < best["value"] and not _same_value(ub, best["value"]):
            return
        j = order[pos]
        for i in range(b):
            if len(blocks[i]) >= ks[i]:
                continue
            if not blocks[i] and prev_twin[i] is not None and not blocks[prev_twin[i]]:
                continue
            if pool.completes_cut(blocks[i], j, i):
                continue
            blocks[i].add(j)
            dfs(pos + 1, cur + ws[pos], remaining - 1)
            blocks[i].discard(j)
        dfs(pos + 1, cur, remaining)

    dfs(0, 0.0, sum(ks))
    if best["key"] is None:
        raise Infeasible("cuts exclude every disjoint block assignment")
    return [tuple(t) for t in best["key"]], best["value"]


@dataclass(frozen=True)
class PatternSet:
    """Catalog of candidate supports for the structured problem.

    ``admissible`` and ``pattern_eta`` are filled in by pattern
    prefiltering; ``None`` means every pattern is admissible.
    """

    patterns: tuple
    budget: int = 1
    disjoint: bool = True
    admissible: Optional[tuple] = None
    pattern_eta: Optional[tuple] = None
    grid: Optional[tuple] = None  # (width, height) when generated from a grid

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(tuple(int(i) for i in pat) for pat in self.patterns))
        if self.admissible is not None and len(self.admissible) != len(self.patterns):
            raise ValueError("admissible flags must match the number of patterns")

    def __len__(self):
        return len(self.patterns)

    def is_admissible(self, j: int) -> bool:
        return True if self.admissible is None else bool(self.admissible[j])


def solve_pattern_master(weights, pats: PatternSet,
                         node_limit: int = DEFAULT_NODE_LIMIT) -> Tuple[tuple, tuple, float]:
    """Choose at most ``pats.budget`` admissible patterns covering the most weight.

    Returns ``(selected pattern indices, covered support, value)``. An empty
    selection is a valid answer. Raises :class:`Infeasible` only for a
    pattern listing the same index twice.
    """
    w = _check_weights(weights)
    for j, pat in enumerate(pats.patterns):
        if len(set(pat)) != len(pat):
            raise Infeasible(f"pattern {j} lists an index more than once: {pat}")
        if pat and (min(pat) < 0 or max(pat) >= w.size):
            raise ValueError(f"pattern {j} has an index outside [0, {w.size})")
    budget = int(pats.budget)
    cand = [j for j in range(len(pats)) if pats.is_admissible(j) and pats.patterns[j]]
    cand.sort(key=lambda j: (-math.fsum(w[i] for i in pats.patterns[j]), j))
    sets = {j: frozenset(pats.patterns[j]) for j in cand}

    covered: set = set()
    chosen: list = []
    best = {"value": 0.0, "key": ()}
    nodes = 0

    def residual(j):
        return sum(w[i] for i in sets[j] if i not in covered)

    def dfs(pos, value):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise NodeLimitExceeded(f"pattern master exceeded {node_limit} nodes")
        exact = math.fsum(w[i] for i in covered)
        key = tuple(sorted(chosen))
        if _better(exact, key, best["value"], best["key"]):
            best["value"], best["key"] = exact, key
        r = budget - len(chosen)
        if r <= 0 or pos >= len(cand):
            return
        gains = []
        for j in cand[pos:]:
            if pats.disjoint and not sets[j].isdisjoint(covered):
                continue
            gains.append(residual(j))
        if not gains:
            return
        gains.sort(reverse=True)
        ub = value + sum(gains[:r])
        if ub < best["value"] and not _same_value(ub, best["value"]):
            return
        for idx in range(pos, len(cand)):
            j = cand[idx]
            if pats.disjoint and not sets[j].isdisjoint(covered):
                continue
            added = sets[j] - covered
            gain = sum(w[i] for i in added)
            covered.update(added)
            chosen.append(j)
            dfs(idx + 1, value + gain)
            chosen.pop()
            covered.difference_update(added)

    if budget > 0:
        dfs(0, 0.0)
    sel = best["key"]
    union = tuple(sorted(set().union(*(sets[j] for j in sel)))) if sel else ()
    return sel, union, best["value"]
