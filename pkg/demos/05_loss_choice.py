"""Why the weighting descends on the l1 hinge loss rather than l2 or l-inf.

Two rows share the top leverage score.  Shrinking either one pushes mass
into the other, so no single-row step lowers the l-inf loss, while the l1
step still makes progress.  On a larger matrix the l1 steps also bring
the l2 and l-inf losses down fastest.

Run:  python demos/05_loss_choice.py
"""

import math

import numpy as np

from levweight import (
    GenSpec,
    LeverageProfile,
    coordinate_descent_exact,
    gen_coherent_lowrank,
    hinge_loss,
    line_search_step,
    rank_one_update,
    target_scores_uniform,
)

# 10 x 2 orthonormal block: rows 0 and 1 have leverage 1/2, the rest 1/8
a, b = math.sqrt(0.3), math.sqrt(0.2)
x, y = math.sqrt(0.4 / 8), math.sqrt(0.6 / 8)
U = np.vstack([[[a, b], [a, -b]], np.column_stack([np.full(8, x), y * np.array([1, -1] * 4)])])
p = LeverageProfile(2, (U**2).sum(axis=1), U @ U.T)
t = target_scores_uniform(10, 2)

print("l-inf steps per row:", [line_search_step(p, i, math.inf, t) for i in range(10)])
g = line_search_step(p, 0, 1, t)
q = rank_one_update(p, 0, g)
print(f"l1 step on row 0   : gamma {g:.3f}, l1 loss {hinge_loss(p, t):.3f} -> {hinge_loss(q, t):.3f}")

M = gen_coherent_lowrank(GenSpec(100, 100, 5, seed=0))
print("\nstep rule  l1 loss after 200 steps  l2     l-inf")
for q_, name in ((1, "l1"), (2, "l2"), (math.inf, "l-inf")):
    _, trace = coordinate_descent_exact(M, 5, step_q=q_, max_steps=200)
    last = trace.records[-1]
    print(f"{name:<10} {last['l1_loss']:<23.3f} {last['l2_loss']:<6.3f} {last['linf_loss']:.3f}")
