"""Optimality bounds and the behaviour of the cut loop.

A four-column matrix where the two heaviest columns are nearly collinear
shows both regimes of a fixed residual threshold: above the pair's
residual it is accepted at once, below it the pair is cut and a lighter
pair wins. A cyclic worst-case construction then forces a cut of every
pair but one.
"""

import math

from geospca import DataMatrix, EngineConfig, apriori_bound, gap_bounds, generate_cuts, solve, worstcase_matrix

X = DataMatrix.from_array([[-0.25, 0.25, 1.0, 1.0], [1.0, 1.0, 0.0, 0.0]], center=False)
cfg = EngineConfig(a=1, k=2)

for eta in (0.2, 0.1):
    s, pool = generate_cuts(X, cfg, eta)
    print(f"threshold {eta}: support {s}, cuts {[c.forbidden for c in pool]}")

rep = solve(X, cfg)
eta_bound, prior, ratio = gap_bounds(X, cfg, rep)
print(f"\nsolve: {rep.support} f={rep.f_value} certificate={rep.certificate}")
print(f"gap bounds: threshold {eta_bound:.4f} ({ratio:.2%} of f), a-priori {prior:.4f}")

# the a-priori bound needs only a rank-a PCA of the full matrix
print(f"a-priori bound for k=2, a=1: {apriori_bound(X, 1, 2):.6f}")

print("\nworst case, k=2, a=1, threshold 1e-5:")
for p in (6, 8, 10, 12):
    s, pool = generate_cuts(worstcase_matrix(p), cfg, 1e-5)
    print(f"  p={p:<3d} cuts={len(pool):<4d} (all pairs but one: {math.comb(p, 2) - 1})  support={s}")
