import itertools

import numpy as np
import pytest

from geospca import (
    BlockSpec,
    DataMatrix,
    EmptyPatternSet,
    EngineConfig,
    GridPatternSpec,
    Infeasible,
    PatternSet,
    ParseError,
    center,
    generate_cuts,
    generate_patterns,
    prefilter_patterns,
    read_patterns,
    solve_disjoint_blocks,
    solve_structured,
    write_patterns,
)

from oracles import svd_pi_eta


def two_block_matrix():
    X = np.zeros((6, 5))
    X[:3, :2] = np.outer([1, 2, 3], [1, 2])
    X[3:, 2:] = np.outer([1, -1, 2], [1, 1, 3])
    return DataMatrix.from_array(X, center=False)


def test_blocks_recover_planted_blocks():
    X = two_block_matrix()
    rep = solve_disjoint_blocks(X, BlockSpec((2, 3), (1, 1), (0.0, 0.0)))
    assert rep.supports == [(0, 1), (2, 3, 4)]
    assert rep.cuts_per_block == [0, 0]
    assert rep.certificate == "Optimal"
    assert rep.f_value == pytest.approx(X.frobenius_sq)


def test_blocks_loose_thresholds_single_round(rng):
    X = center(rng.standard_normal((7, 9)))
    big = X.frobenius_sq
    rep = solve_disjoint_blocks(X, BlockSpec((2, 3), (1, 2), (big, big)))
    assert rep.iterations == 1 and sum(rep.cuts_per_block) == 0
    top = set(np.argsort(-X.col_sq_norms)[:5].tolist())
    assert set(rep.supports[0]) | set(rep.supports[1]) == top


def test_blocks_report_invariants(rng):
    solved = 0
    for _ in range(10):
        X = center(rng.standard_normal((6, 8)))
        spec = BlockSpec((2, 2), (1, 1), (0.6 * X.frobenius_sq / 8,) * 2)
        try:
            rep = solve_disjoint_blocks(X, spec)
        except Infeasible:
            continue
        solved += 1
        assert set(rep.supports[0]).isdisjoint(rep.supports[1])
        assert rep.f_value == pytest.approx(sum(rep.pi))
        for s, e, eta in zip(rep.supports, rep.eta, spec.eta):
            assert e <= eta * (1 + 1e-9) + 1e-12
            W = rep.loadings[rep.supports.index(s)]
            assert np.all(W[[i for i in range(8) if i not in s]] == 0)
    assert solved > 0


def test_single_block_reduces_to_common(rng):
    for _ in range(10):
        X = center(rng.standard_normal((6, 9)))
        etas = sorted(svd_pi_eta(X.values, s, 1)[1] for s in itertools.combinations(range(9), 3))
        eta = etas[len(etas) // 3]
        s, _ = generate_cuts(X, EngineConfig(a=1, k=3), eta)
        rep = solve_disjoint_blocks(X, BlockSpec((3,), (1,), (eta,)))
        assert rep.supports == [s]


def test_grid_pattern_counts():
    rect = ("rectangle",)
    assert len(generate_patterns(GridPatternSpec(2, 2, rect, 2, 2))) == 4
    assert len(generate_patterns(GridPatternSpec(3, 3, rect, 3, 3))) == 6
    octs = generate_patterns(GridPatternSpec(4, 4, ("octagon",), 5, 5))
    assert len(octs) == 4 and all(len(p) == 5 for p in octs.patterns)
    assert octs.patterns[0] == (1, 4, 5, 6, 9)


def test_triangle_shape():
    tri = generate_patterns(GridPatternSpec(2, 2, ("triangle",), 3, 3))
    # lower-left half of the 2x2 square, diagonal included
    assert tri.patterns == ((0, 2, 3),)


def test_patterns_in_grid_and_unique():
    pats = generate_patterns(GridPatternSpec(5, 4, min_size=3, max_size=8))
    assert len(set(pats.patterns)) == len(pats)
    assert all(0 <= i < 20 and 3 <= len(p) <= 8 for p in pats.patterns for i in p)


def test_no_shape_fits():
    with pytest.raises(EmptyPatternSet):
        generate_patterns(GridPatternSpec(2, 2, ("octagon",)))
    with pytest.raises(ValueError):
        GridPatternSpec(2, 2, ("circle",))


def test_prefilter_fixture(fixture_matrix):
    pats = generate_patterns(GridPatternSpec(4, 1, ("rectangle",), 2, 2))
    assert pats.patterns == ((0, 1), (1, 2), (2, 3))
    out = prefilter_patterns(fixture_matrix, pats, 1, 0.1)
    assert out.pattern_eta[0] == pytest.approx(0.125)
    for j, pat in enumerate(pats.patterns):
        eta = svd_pi_eta(fixture_matrix.values, pat, 1)[1]
        assert out.admissible[j] == (eta <= 0.1)
    assert out.admissible == (False, False, True)


def test_prefilter_low_rank_and_negative(rng):
    X = center(rng.standard_normal((8, 1)) @ rng.standard_normal((1, 9)))
    pats = generate_patterns(GridPatternSpec(3, 3, ("rectangle",), 2, 4))
    assert all(prefilter_patterns(X, pats, 1, 1e-9 * X.frobenius_sq).admissible)
    neg = prefilter_patterns(X, pats, 1, -1.0)
    assert not any(neg.admissible)
    assert solve_structured(X, neg, 1, 2, -1.0).selected == ()


def test_structured_disjoint_blocks():
    X = two_block_matrix()
    pats = PatternSet(((0, 1), (2, 3, 4), (1, 2)))
    rep = solve_structured(X, pats, 1, 2, 1e-9)
    assert rep.selected == (0, 1)
    Xv = X.values
    tops = [np.linalg.eigvalsh(Xv[:, list(s)].T @ Xv[:, list(s)])[-1] for s in ((0, 1), (2, 3, 4))]
    assert rep.f_value == pytest.approx(sum(tops))
    assert rep.bound_status == "GapBounded" and rep.gap_bound == pytest.approx(2e-9)


def test_structured_trivial_cases(rng):
    X = center(rng.standard_normal((5, 4)))
    pats = PatternSet(((0, 1), (2, 3)))
    assert solve_structured(X, pats, 1, 0, 10.0).f_value == 0.0
    one = PatternSet(((0, 1), (2, 3)), admissible=(True, False), pattern_eta=(0.0, 1.0))
    assert solve_structured(X, one, 1, 3, 10.0).selected == (0,)


def test_structured_never_selects_inadmissible(rng):
    for _ in range(10):
        X = center(rng.standard_normal((6, 9)))
        pats = generate_patterns(GridPatternSpec(3, 3, ("rectangle",), 2, 3))
        tau = float(np.median(prefilter_patterns(X, pats, 1, 0).pattern_eta))
        for disjoint in (True, False):
            rep = solve_structured(X, pats, 1, 2, tau, disjoint=disjoint)
            etas = prefilter_patterns(X, pats, 1, tau).pattern_eta
            assert all(etas[j] <= tau for j in rep.selected)
            if disjoint:
                assert len(rep.union) == sum(len(s) for s in rep.supports)
            else:
                assert rep.bound_status == "Heuristic" and rep.gap_bound is None
                if rep.union:
                    assert rep.union_eta == pytest.approx(svd_pi_eta(X.values, rep.union, 1)[1], abs=1e-9)


def test_pattern_catalog_roundtrip(tmp_path):
    pats = generate_patterns(GridPatternSpec(3, 2, ("rectangle",), 2, 2))
    path = tmp_path / "cat.txt"
    write_patterns(path, pats)
    assert path.read_text().splitlines()[0] == "# grid 3x2"
    back = read_patterns(path)
    assert back.patterns == pats.patterns and back.grid == (3, 2)
    (tmp_path / "bad.txt").write_text("# grid 2x2\n0 1\n2 x\n")
    with pytest.raises(ParseError) as err:
        read_patterns(tmp_path / "bad.txt")
    assert err.value.line == 3
