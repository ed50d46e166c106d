"""Leverage scores of a coherent matrix, and what one row weight does to them.

Run:  python demos/01_leverage_scores.py
"""

import numpy as np

from levweight import GenSpec, coherence, gen_coherent_lowrank, leverage_of, rank_one_update

n1, n2, k = 200, 120, 4
A = gen_coherent_lowrank(GenSpec(n1, n2, k, seed=0))

# heavy-tailed factors concentrate the column space on a few rows
p = leverage_of(A, k, with_cross=True)
top = np.argsort(p.scores)[::-1][:5]
print(f"sum of scores = {p.scores.sum():.6f} (k = {k})")
print(f"coherence     = {coherence(p):.2f} (1 is perfectly flat, {n1 // k} is the worst case)")
print("top rows      :", ", ".join(f"{i}:{p.scores[i]:.3f}" for i in top))

# shrinking the heaviest row by sqrt(1 - gamma) moves its mass to the rows
# it shares the subspace with; the closed form matches a fresh SVD
i, gamma = int(top[0]), 0.6
q = rank_one_update(p, i, gamma)
w = np.ones(n1)
w[i] = np.sqrt(1 - gamma)
fresh = leverage_of(w[:, None] * A, k)
print(f"\nrow {i}: {p.scores[i]:.4f} -> {q.scores[i]:.4f}")
print(f"closed form vs SVD, max abs diff = {np.abs(q.scores - fresh.scores).max():.1e}")
print(f"coherence after one step         = {coherence(q):.2f}")
