"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Oracles are independent of the code under test wherever possible: leverage
profiles are recomputed from a fresh numpy SVD of the explicitly weighted
matrix, and closed forms are evaluated directly from their definitions.
"""

import csv
import math
import time

import numpy as np
import pytest

from levweight.completion import (
    AdmmConfig,
    admm_unweighted_complete,
    admm_weighted_complete,
    lambda_grid,
    relative_error,
)
from levweight.datagen import GenSpec, gen_coherent_lowrank, sample_uniform
from levweight.experiments import default_spec, run_experiment
from levweight.leverage import (
    EstimationParams,
    LeverageProfile,
    estimate_leverage,
    leverage_of,
    rank_one_update,
)
from levweight.linalg import SparseObservation
from levweight.weighting import (
    gamma_exact,
    gamma_large,
    gamma_medium,
    hinge_loss,
    line_search_step,
    medium_upper_bound,
    coordinate_descent_exact,
    target_scores_uniform,
)

from conftest import example_one_bases, low_rank, orthonormal, svd_leverage

INF = math.inf

# frozen calibration: sampling rate for the estimation criterion, chosen on
# seeds 100-119 and checked here on the held-out seeds 0-19
ESTIMATION_P = 0.999
# frozen calibration: headline completion thresholds
COMPLETION_TYPE2_MAX = 0.05
COMPLETION_GAP = 5.0
COMPLETION_EXPONENTS = (-3, -2)


def report(capsys, n, ok, detail=""):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def _weight_row(a, i, gamma):
    out = np.array(a, dtype=float)
    out[i] *= math.sqrt(1.0 - gamma)
    return out


# -- 1 ----------------------------------------------------------------------

def test_criterion_01_rank_one_update_oracle(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        n1, n2 = int(rng.integers(2, 21)), int(rng.integers(2, 13))
        k = int(rng.integers(1, min(5, n1, n2) + 1))
        a = low_rank(rng, n1, n2, k)
        i = int(rng.integers(n1))
        gamma = float(rng.uniform(0.01, 0.99))
        q = rank_one_update(leverage_of(a, k, with_cross=True), i, gamma)
        oracle = svd_leverage(_weight_row(a, i, gamma), k)
        worst = max(worst, np.abs(q.cross - oracle).max(), np.abs(q.scores - np.diag(oracle)).max())
    dt = time.perf_counter() - t0
    report(capsys, 1, worst <= 1e-8 and dt < 10, f"max abs diff {worst:.2e}, {dt:.1f}s")


# -- 2 ----------------------------------------------------------------------

def test_criterion_02_leverage_identities(capsys):
    rng = np.random.default_rng(202)
    sum_err = cross_err = cons_err = 0.0
    for _ in range(100):
        n1, n2 = int(rng.integers(3, 40)), int(rng.integers(3, 25))
        k = int(rng.integers(1, min(n1, n2) + 1))
        a = rng.standard_normal((n1, n2))
        p = leverage_of(a, k, with_cross=True)
        sum_err = max(sum_err, abs(p.scores.sum() - k))
        cross_err = max(cross_err, np.abs(p.scores - (p.cross**2).sum(axis=1)).max())
        # weighting keeps the sum at k, both by rank-one update and by explicit scaling
        q = rank_one_update(p, int(rng.integers(n1)), float(rng.uniform(0.05, 0.95)))
        w = rng.uniform(0.1, 1.0, n1)
        cons_err = max(cons_err, abs(q.scores.sum() - k), abs(leverage_of(w[:, None] * a, k).scores.sum() - k))
    ok = max(sum_err, cross_err, cons_err) <= 1e-8
    report(capsys, 2, ok, f"sum {sum_err:.1e}, cross {cross_err:.1e}, conservation {cons_err:.1e}")


# -- 3 ----------------------------------------------------------------------

def test_criterion_03_step_sizes(capsys):
    rng = np.random.default_rng(303)
    # exact step: fresh SVD of the weighted matrix lands on the target
    exact_err = 0.0
    for _ in range(100):
        a = low_rank(rng, 30, 12, 4)
        mu = np.diag(svd_leverage(a, 4))
        i = int(np.argmax(mu))
        target = float(rng.uniform(0.05, 1.0)) * mu[i]
        g = gamma_exact(mu[i], target)
        exact_err = max(exact_err, abs(svd_leverage(_weight_row(a, i, g), 4)[i, i] - target))

    n1, n2, k, rho = 100, 60, 3, 20.0
    upper = medium_upper_bound(n1, k, rho)
    medium_rows = large_rows = medium_bad = large_bad = 0
    instances = 0
    for seed in range(60):
        a = gen_coherent_lowrank(GenSpec(n1, n2, k, seed=seed))
        mu = np.diag(svd_leverage(a, k))
        in_medium = np.flatnonzero((mu >= 1 / rho) & (mu <= 1 - 1 / rho))
        if in_medium.size:
            instances += 1
        for i in in_medium:
            g = gamma_medium(mu[i], n1, k)
            new = svd_leverage(_weight_row(a, i, g), k)[i, i] if g > 0 else mu[i]
            medium_rows += 1
            medium_bad += not (k / n1 < new < upper)
        # large step: the domain 1 - 1/r < mu, mu - 1/(2r) >= 1/r is nonempty
        # for mu > 0.6; take r midway through 1.5/mu <= r < 1/(1 - mu)
        for i in np.flatnonzero((mu > 0.6) & (mu < 1 - 1e-9)):
            r = 0.5 * (1.5 / mu[i] + 1.0 / (1.0 - mu[i]))
            g = gamma_large(mu[i], r)
            new = svd_leverage(_weight_row(a, i, g), k)[i, i]
            large_rows += 1
            large_bad += not (new >= 1 / r - 1e-12 and new < mu[i])
    ok = exact_err <= 1e-10 and instances >= 50 and medium_bad == 0 and large_bad == 0 and large_rows > 0
    report(
        capsys, 3, ok,
        f"exact err {exact_err:.1e}; medium {medium_rows} rows on {instances} instances, {medium_bad} outside "
        f"({k / n1:.3f}, {upper:.4f}); large {large_rows} rows, {large_bad} failures",
    )


# -- 4 ----------------------------------------------------------------------

def test_criterion_04_monotone_descent(capsys):
    worst_increase = worst_mismatch = 0.0
    non_strict = 0
    steps = 0
    for seed in range(20):
        a = gen_coherent_lowrank(GenSpec(80, 50, 4, seed=seed))
        targets = target_scores_uniform(80, 4)
        events = []

        def on_step(t, i, gamma, before, after):
            c = before.cross
            mu = before.scores
            j = np.arange(c.shape[0]) != i
            delta = gamma * c[i, j] ** 2 / (1 - gamma * mu[i])
            gap = targets.values[j] - mu[j]
            J = (c[i, j] != 0) & (gap > 0)
            closed = np.minimum(delta[J], gap[J]).sum()
            drop = hinge_loss(before, targets, 1) - hinge_loss(after, targets, 1)
            events.append((closed, drop, bool(J.any())))

        _, trace = coordinate_descent_exact(a, 4, targets, step_q=1, max_steps=40, on_step=on_step)
        worst_increase = max(worst_increase, np.max(np.diff(trace.column("l1_loss")), initial=0.0))
        for closed, drop, nonempty in events:
            worst_mismatch = max(worst_mismatch, abs(closed - drop))
            non_strict += nonempty and not drop > 0
        steps += len(events)
    ok = worst_increase <= 1e-12 and worst_mismatch <= 1e-10 and non_strict == 0 and steps > 0
    report(capsys, 4, ok, f"{steps} steps, max increase {worst_increase:.1e}, "
                          f"closed-form mismatch {worst_mismatch:.1e}, non-strict {non_strict}")


# -- 5 ----------------------------------------------------------------------

def test_criterion_05_estimation_accuracy(capsys):
    t0 = time.perf_counter()
    rho = 10.0
    errs = []
    for seed in range(20):
        L0 = gen_coherent_lowrank(GenSpec(400, 240, 5, seed=seed))
        obs = SparseObservation.from_dense(L0, sample_uniform(400, 240, ESTIMATION_P, seed=seed + 7000))
        est = estimate_leverage(obs, EstimationParams(5, rho, seed=seed))
        errs.append(np.abs(est.scores - leverage_of(L0, 5).scores).max())
    frac = float(np.mean(np.array(errs) <= 1 / (2 * rho)))
    dt = time.perf_counter() - t0
    report(capsys, 5, frac >= 0.9 and dt < 120,
           f"p={ESTIMATION_P}: {frac:.0%} of seeds within 1/(2 rho), median err {np.median(errs):.3f}, {dt:.0f}s")


# -- 6 ----------------------------------------------------------------------

def test_criterion_06_weighting_trace(tmp_path, capsys):
    rep = run_experiment(default_spec("fig3-weighting-trace", out_dir=str(tmp_path)))
    by_p = {row["p"]: row for row in rep.summary}
    drops = all(by_p[p]["median_true_l1_loss"] < by_p[p]["median_initial_true_l1_loss"] for p in (0.1, 0.3, 1.0))
    order = by_p[1.0]["median_true_l1_loss"] <= by_p[0.1]["median_true_l1_loss"]
    detail = ", ".join(
        f"p={p}: {by_p[p]['median_initial_true_l1_loss']:.2f} -> {by_p[p]['median_true_l1_loss']:.2f}"
        for p in (0.1, 0.3, 1.0)
    )
    report(capsys, 6, drops and order, detail)


# -- 7 ----------------------------------------------------------------------

def test_criterion_07_rounds(tmp_path, capsys):
    rep = run_experiment(default_spec("fig4-rounds", seeds=tuple(range(5)), out_dir=str(tmp_path)))
    by_round = {row["round"]: row["median_true_coherence"] for row in rep.summary}
    report(capsys, 7, by_round[2] <= by_round[1],
           f"median final coherence round 1 {by_round[1]:.2f}, round 2 {by_round[2]:.2f}")


# -- 8 ----------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_08_noise_free_completion(tmp_path, capsys):
    t0 = time.perf_counter()
    spec = default_spec("fig7-noisy-completion", seeds=tuple(range(5)),
                        lambda_exponents=COMPLETION_EXPONENTS, out_dir=str(tmp_path))
    rep = run_experiment(spec)
    med = {row["method"]: row["median_error"] for row in rep.summary}
    dt = time.perf_counter() - t0
    ok = med["type2"] <= COMPLETION_TYPE2_MAX and med["unweighted"] >= COMPLETION_GAP * med["type2"] and dt < 600
    report(capsys, 8, ok, f"median error unweighted {med['unweighted']:.3f}, type1 {med['type1']:.3f}, "
                          f"type2 {med['type2']:.4f}, {dt:.0f}s")
    # per-seed CSV rows: best Type 2 error strictly below best unweighted error
    for path in rep.run_files:
        rows = list(csv.DictReader(open(path)))
        best = {m: min(float(r["error"]) for r in rows if r["method"] == m) for m in ("unweighted", "type2")}
        assert best["type2"] < best["unweighted"], path.name


# -- 9 ----------------------------------------------------------------------

def test_criterion_09_admm_sanity(capsys):
    rng = np.random.default_rng(909)
    a = 10 * orthonormal(rng, 60, 2) @ orthonormal(rng, 40, 2).T
    obs = SparseObservation.from_dense(a, rng.random(a.shape) < 0.5)
    errs = [
        relative_error(admm_weighted_complete(obs, cfg=AdmmConfig(lam=lam, primal_tol=1e-8, max_iters=2000)).recovered, a)
        for lam in lambda_grid(obs, range(-5, 0))
    ]
    cfg = AdmmConfig(lam=float(lambda_grid(obs, (-2,))[0]), max_iters=200)
    diff = np.abs(admm_weighted_complete(obs, cfg=cfg).recovered - admm_unweighted_complete(obs, cfg).recovered).max()
    report(capsys, 9, min(errs) <= 1e-3 and diff <= 1e-12, f"best error {min(errs):.1e}, identity-vs-direct {diff:.1e}")


# -- 10 ---------------------------------------------------------------------

def _linf_stuck(bases, targets):
    """Brute force on a fine grid: no single-row step lowers the l-inf loss."""
    k = bases.shape[1]
    current = hinge_loss(np.diag(svd_leverage(bases, k)), targets, INF)
    for i in range(bases.shape[0]):
        for g in np.linspace(0.001, 0.999, 999):
            if hinge_loss(np.diag(svd_leverage(_weight_row(bases, i, g), k)), targets, INF) < current - 1e-12:
                return False
    return True


def test_criterion_10_loss_comparison(tmp_path, capsys):
    notes = []
    ok = True
    for a2 in (0.25, 0.3):
        b = example_one_bases(a2)
        p = LeverageProfile(2, (b**2).sum(axis=1), b @ b.T)
        targets = target_scores_uniform(10, 2)
        inf_steps = [line_search_step(p, i, INF, targets) for i in range(10)]
        stuck = all(g == 0.0 for g in inf_steps) and _linf_stuck(b, targets)
        g1 = line_search_step(p, 0, 1, targets)
        after = np.diag(svd_leverage(_weight_row(b, 0, g1), 2))
        progress = g1 > 0 and hinge_loss(after, targets, 1) < hinge_loss(p, targets, 1)
        ok &= stuck and progress
        notes.append(f"a^2={a2}: l-inf stuck {stuck}, l1 step {g1:.3f}")

    rep = run_experiment(default_spec("appB-loss-compare", seeds=(0, 1, 2), out_dir=str(tmp_path)))
    s = {row["step_size"]: row for row in rep.summary}
    half = {name: s[name]["median_steps_to_half_l1"] for name in s}
    ordering = half["l1"] <= half["l2"] and half["l1"] <= half["linf"]
    fastest = all(s["l1"][f"median_{c}"] <= min(s["l2"][f"median_{c}"], s["linf"][f"median_{c}"])
                  for c in ("l1_loss", "l2_loss", "linf_loss"))
    ok &= ordering and fastest
    notes.append(f"steps to half l1 loss {half}; l1 lowest final losses {fastest}")
    report(capsys, 10, bool(ok), "; ".join(notes))


# -- 11 ---------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_11_weighted_rpca(tmp_path, capsys):
    t0 = time.perf_counter()
    rep = run_experiment(default_spec("fig8-rpca-error", seeds=tuple(range(5)), out_dir=str(tmp_path)))
    med = {(row["p"], row["method"]): row["median_error"] for row in rep.summary}
    dt = time.perf_counter() - t0
    ordered = all(med[(p, "unweighted")] >= med[(p, "type1")] >= med[(p, "type2")] for p in (0.05, 0.1, 0.2))
    easy = med[(0.05, "type2")] <= 0.05
    detail = "; ".join(
        f"p={p}: " + " >= ".join(f"{med[(p, m)]:.2e}" for m in ("unweighted", "type1", "type2"))
        for p in (0.05, 0.1, 0.2)
    )
    report(capsys, 11, ordered and easy and dt < 600, f"{detail}; {dt:.0f}s")
