import itertools
import math

import numpy as np
import pytest

from geospca import (
    OPTIMAL,
    CutBudgetExceeded,
    EngineConfig,
    apriori_bound,
    center,
    gap_bounds,
    generate_cuts,
    separate,
    solve,
    spectral_summary,
    worstcase_matrix,
)
from geospca.linalg import pca_residual_norms

from oracles import brute_common, svd_pi_eta


def low_rank(rng, n, p, r):
    return center(rng.standard_normal((n, r)) @ rng.standard_normal((r, p)))


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(a=0, k=2)
    with pytest.raises(ValueError):
        EngineConfig(a=1, k=2, delta=0)
    with pytest.raises(ValueError):
        EngineConfig(a=1, k=2, patience=0)


def test_separate_fixture(fixture_matrix):
    cut = separate(fixture_matrix, (0, 1), 1, 0.1)
    assert cut is not None and cut.forbidden == (0, 1)
    assert separate(fixture_matrix, (0, 1), 1, 0.2) is None


def test_separate_low_rank(rng):
    X = low_rank(rng, 8, 6, 2)
    assert separate(X, (0, 2, 4), 2, 0.0) is None


def test_generate_cuts_loose_threshold(rng):
    X = center(rng.standard_normal((6, 7)))
    s, pool = generate_cuts(X, EngineConfig(a=1, k=3), X.frobenius_sq)
    assert len(pool) == 0
    assert s == tuple(sorted(np.argsort(-X.col_sq_norms)[:3]))


def test_generate_cuts_fixture(fixture_matrix):
    s, pool = generate_cuts(fixture_matrix, EngineConfig(a=1, k=2), 0.01)
    assert s == (2, 3)
    assert (0, 1) in [c.forbidden for c in pool]
    assert fixture_matrix.col_sq_norms[[2, 3]].sum() == 2.0


def test_generate_cuts_reuses_pool(fixture_matrix):
    cfg = EngineConfig(a=1, k=2)
    _, pool = generate_cuts(fixture_matrix, cfg, 0.01)
    before = len(pool)
    s, pool2 = generate_cuts(fixture_matrix, cfg, 0.005, pool)
    assert pool2 is pool and len(pool) == before and s == (2, 3)


def test_cut_budget(fixture_matrix):
    with pytest.raises(CutBudgetExceeded):
        generate_cuts(fixture_matrix, EngineConfig(a=1, k=2, max_cuts=0), 0.01)


@pytest.mark.parametrize("p", [6, 8, 10])
def test_worstcase(p):
    X = worstcase_matrix(p)
    s, pool = generate_cuts(X, EngineConfig(a=1, k=2), 1e-5)
    assert s == (0, 1)
    assert len(pool) == math.comb(p, 2) - 1


def test_worstcase_shape():
    X = worstcase_matrix(4)
    np.testing.assert_allclose(X.values[0], [1, 1, 19 / 24, 19 / 24])
    norms = worstcase_matrix(5).col_sq_norms
    np.testing.assert_allclose(norms[:2], 1.0)
    assert np.all(norms[2:] > 1.0)


def test_solve_low_rank_first_iteration(rng):
    X = low_rank(rng, 10, 12, 2)
    rep = solve(X, EngineConfig(a=2, k=4))
    assert rep.certificate == OPTIMAL and rep.cuts_generated == 0
    assert rep.support == tuple(sorted(np.argsort(-X.col_sq_norms)[:4]))
    assert rep.f_value == pytest.approx(rep.psi)
    assert rep.apriori_bound == pytest.approx(0.0, abs=1e-9 * X.frobenius_sq)


def test_solve_fixture(fixture_matrix):
    rep = solve(fixture_matrix, EngineConfig(a=1, k=2, delta=0.01, patience=3))
    assert rep.f_value == pytest.approx(2.0)
    assert rep.support in {(0, 1), (2, 3)}
    assert rep.certificate == OPTIMAL


def test_solve_matches_brute_force():
    r = np.random.default_rng(99)
    hits = 0
    for _ in range(15):
        X = center(r.standard_normal((8, 10)))
        rep = solve(X, EngineConfig(a=2, k=3, delta=1e-6 * X.frobenius_sq, patience=20))
        V = brute_common(X.values, 3, 2)[0]
        hits += abs(rep.f_value - V) <= 1e-7 * V
        if rep.certificate == OPTIMAL:
            assert rep.f_value == pytest.approx(V, rel=1e-7)
    assert hits >= 14


def test_schedule_invariants():
    r = np.random.default_rng(5)
    for _ in range(10):
        X = center(r.standard_normal((6, 8)))
        rep = solve(X, EngineConfig(a=1, k=3, delta=1e-3 * X.frobenius_sq))
        etas = [rec.eta for rec in rep.trace]
        assert all(b < a for a, b in zip(etas, etas[1:]))
        for rec in rep.trace:
            summ = spectral_summary(X, rec.support, 1, with_basis=False)
            assert summ.eta <= rec.eta * (1 + 1e-9) + 1e-12
            assert rec.f == pytest.approx(summ.pi)
        # cuts only accumulate
        cuts = [rec.cuts for rec in rep.trace]
        assert cuts == sorted(cuts)


def test_finite_discovery():
    r = np.random.default_rng(11)
    for _ in range(5):
        X = center(r.standard_normal((5, 7)))
        etas = sorted({round(svd_pi_eta(X.values, s, 1)[1], 12)
                       for s in itertools.combinations(range(7), 2)})
        gaps = [b - a for a, b in zip(etas, etas[1:]) if b - a > 0]
        delta = 0.5 * min(gaps)
        rep = solve(X, EngineConfig(a=1, k=2, delta=delta, patience=10**6))
        V, _, eta_opt = brute_common(X.values, 2, 1)
        assert rep.f_value == pytest.approx(V, rel=1e-9)
        assert len(rep.trace) <= math.ceil((X.frobenius_sq - eta_opt) / delta) + 1


def test_callback_receives_trace(fixture_matrix):
    seen = []
    rep = solve(fixture_matrix, EngineConfig(a=1, k=2, delta=0.01), callback=seen.append)
    assert seen == rep.trace


def test_gap_bounds_fixture(fixture_matrix):
    cfg = EngineConfig(a=1, k=2)
    rep = solve(fixture_matrix, cfg)
    eta_bound, apriori, ratio = gap_bounds(fixture_matrix, cfg, rep)
    # explicit PCA residual of the whole matrix
    U = np.linalg.svd(fixture_matrix.values)[0][:, :1]
    E = fixture_matrix.values - U @ (U.T @ fixture_matrix.values)
    expect = np.sort((E**2).sum(axis=0))[::-1][:2].sum()
    assert apriori == pytest.approx(expect)
    V, _, eta_opt = brute_common(fixture_matrix.values, 2, 1)
    assert apriori >= eta_opt - 1e-12
    assert ratio == pytest.approx(eta_bound / rep.f_value)


def test_apriori_zero_for_low_rank(rng):
    X = low_rank(rng, 9, 11, 3)
    assert apriori_bound(X, 3, 4) == pytest.approx(0.0, abs=1e-9 * X.frobenius_sq)
    assert np.all(pca_residual_norms(X, 3) <= 1e-9 * X.frobenius_sq)


def test_k_larger_than_p(fixture_matrix):
    with pytest.raises(ValueError):
        solve(fixture_matrix, EngineConfig(a=1, k=5))


def test_memory_stays_linear_in_data():
    import tracemalloc

    from geospca import synth

    X = synth(0, 50, 20000, 5, 0.1)
    tracemalloc.start()
    try:
        # a small cut budget keeps the pool, which grows with cuts x k, out of the picture
        rep = solve(X, EngineConfig(a=5, k=30, max_cuts=200))
        peak = tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()
    assert rep.certificate in ("Optimal", "UpperBounded")
    # a 20000 x 20000 covariance alone would be 3.2 GB
    assert peak < 4 * X.values.nbytes
