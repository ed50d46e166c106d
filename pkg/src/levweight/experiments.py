"""Synthetic experiment harness.

Each scenario generates seeded data, runs the methods it compares and
writes tidy CSV: one file per seed plus a summary holding medians across
seeds.  File names carry the scenario, the seed (or ``summary``) and a
short hash of the configuration, so reruns with the same settings
overwrite identical files.

Seeds: ``L0`` uses ``seed``; the sampling mask ``seed + 1000``; additive
noise ``seed + 2000``; sparse corruption ``seed + 3000``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .completion import (
    AdmmConfig,
    admm_weighted_complete,
    lambda_grid,
    relative_error,
    weighting_completion,
)
from .datagen import GenSpec, add_gaussian_noise, gen_coherent_lowrank, gen_sparse_corruption, sample_uniform
from .errors import InvalidInputError
from .linalg import SparseObservation
from .rpca import RpcaConfig, rpca, weighted_rpca
from .weighting import WeightingConfig, coordinate_descent, coordinate_descent_exact

__all__ = [
    "SCENARIOS",
    "ExperimentSpec",
    "ExperimentReport",
    "default_spec",
    "run_experiment",
    "summarize",
    "config_hash",
]

SCENARIOS = (
    "fig3-weighting-trace",
    "fig4-rounds",
    "fig7-noisy-completion",
    "fig5/6-rpca-trace",
    "fig8-rpca-error",
    "appB-loss-compare",
)

MASK_OFFSET, NOISE_OFFSET, CORRUPT_OFFSET = 1000, 2000, 3000


@dataclass(frozen=True)
class ExperimentSpec:
    """One scenario over a grid of sampling rates / noise levels and seeds.

    ``rho_scale`` sets the weighting accuracy to ``rho_scale * sqrt(p)`` for
    the completion scenarios and to ``rho_scale`` for the RPCA ones.
    ``lambda_exponents`` selects the completion lambda grid
    ``10**e * ||P_Omega(M)||_F / sqrt(|Omega|)``; the trace scenarios use
    only its first value.
    """

    scenario: str
    n1: int = 400
    n2: int = 200
    k: int = 8
    p_grid: tuple = (0.2,)
    sigma_grid: tuple = (0.0,)
    s_grid: tuple = (1000.0,)
    seeds: tuple = (0,)
    lambda_exponents: tuple = (-3, -2, -1, 0, 1, 2)
    rounds: int = 2
    rho_scale: float = 20.0
    max_steps: Optional[int] = None
    admm_max_iters: int = 500
    admm_tol: float = 1e-4
    loss_steps: int = 200
    out_dir: str = "results"
    svg: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise InvalidInputError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        for name in ("p_grid", "sigma_grid", "s_grid", "seeds", "lambda_exponents"):
            value = tuple(getattr(self, name))
            if not value:
                raise InvalidInputError(f"{name} must not be empty")
            object.__setattr__(self, name, value)
        if not all(0 < p <= 1 for p in self.p_grid):
            raise InvalidInputError("sampling rates must lie in (0, 1]")
        if self.rounds < 1:
            raise InvalidInputError("rounds must be at least 1")
        GenSpec(self.n1, self.n2, self.k)


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    config_hash: str
    run_files: list = field(default_factory=list)
    summary_file: Optional[Path] = None
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    figure: Optional[Path] = None


_DEFAULTS = {
    "fig3-weighting-trace": dict(n1=400, n2=200, k=8, p_grid=(0.1, 0.3, 1.0)),
    "fig4-rounds": dict(n1=400, n2=200, k=8, p_grid=(0.2,)),
    "fig7-noisy-completion": dict(n1=400, n2=200, k=8, p_grid=(0.2,), sigma_grid=(0.0,)),
    "fig5/6-rpca-trace": dict(n1=300, n2=200, k=5, p_grid=(0.05, 0.1, 0.2), s_grid=(1000.0,)),
    "fig8-rpca-error": dict(n1=300, n2=200, k=5, p_grid=(0.05, 0.1, 0.2), s_grid=(1000.0,)),
    "appB-loss-compare": dict(n1=100, n2=100, k=5),
}


def default_spec(scenario: str, **overrides) -> ExperimentSpec:
    """Desk-scale defaults for ``scenario``, updated with ``overrides``."""
    if scenario not in _DEFAULTS:
        raise InvalidInputError(f"unknown scenario {scenario!r}")
    return ExperimentSpec(scenario=scenario, **{**_DEFAULTS[scenario], **overrides})


def config_hash(spec: ExperimentSpec) -> str:
    """Short digest of every setting except the output location."""
    payload = asdict(spec)
    payload.pop("out_dir")
    payload.pop("svg")
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:10]


def _slug(scenario: str) -> str:
    return scenario.replace("/", "-")


# --------------------------------------------------------------------------
# scenario runners; each returns the tidy rows of one seed

def _observe(spec, seed, p, sigma=0.0):
    L0 = gen_coherent_lowrank(GenSpec(spec.n1, spec.n2, spec.k, seed=seed))
    M = L0 if sigma == 0 else add_gaussian_noise(L0, 0.5, sigma, 1.0, seed=seed + NOISE_OFFSET)
    mask = sample_uniform(spec.n1, spec.n2, p, seed=seed + MASK_OFFSET)
    return L0, SparseObservation.from_dense(M, mask)


def _completion_wcfg(spec, p, seed):
    return WeightingConfig(accuracy_rho=spec.rho_scale * math.sqrt(p), max_steps=spec.max_steps, seed=seed)


def _acfg(spec, lam):
    return AdmmConfig(lam=float(lam), max_iters=spec.admm_max_iters, primal_tol=spec.admm_tol)


def _trace_rows(trace, **keys):
    return [{**keys, **rec} for rec in trace.records]


def _run_fig3(spec, seed):
    rows = []
    for p in spec.p_grid:
        L0, obs = _observe(spec, seed, p)
        _, trace = coordinate_descent(obs, spec.k, _completion_wcfg(spec, p, seed), reference=L0)
        rows += _trace_rows(trace, seed=seed, p=p)
    return rows


def _run_fig4(spec, seed):
    rows = []
    for p in spec.p_grid:
        L0, obs = _observe(spec, seed, p)
        lam = lambda_grid(obs, spec.lambda_exponents[:1])[0]
        result, diags = weighting_completion(
            obs, spec.k, spec.rounds, _completion_wcfg(spec, p, seed), _acfg(spec, lam), reference=L0
        )
        for d in diags:
            rows += _trace_rows(d.row_trace, seed=seed, p=p, round=d.round, lam=lam,
                                error=relative_error(d.result.recovered, L0))
    return rows


def _run_fig7(spec, seed):
    rows = []
    for sigma in spec.sigma_grid:
        for p in spec.p_grid:
            L0, obs = _observe(spec, seed, p, sigma)
            wcfg = _completion_wcfg(spec, p, seed)
            for lam in lambda_grid(obs, spec.lambda_exponents):
                base = dict(seed=seed, sigma=sigma, p=p, lam=lam)
                res = admm_weighted_complete(obs, None, None, _acfg(spec, lam))
                rows.append({**base, "method": "unweighted", "error": relative_error(res.recovered, L0),
                             "iterations": res.iterations})
                _, diags = weighting_completion(obs, spec.k, spec.rounds, wcfg, _acfg(spec, lam))
                for d in diags:
                    rows.append({**base, "method": f"type{d.round}",
                                 "error": relative_error(d.result.recovered, L0),
                                 "iterations": d.result.iterations})
    return rows


def _rpca_data(spec, seed, p, s):
    L0 = gen_coherent_lowrank(GenSpec(spec.n1, spec.n2, spec.k, seed=seed))
    S0 = gen_sparse_corruption(spec.n1, spec.n2, p, s, seed=seed + CORRUPT_OFFSET)
    return L0, L0 + S0


def _run_fig56(spec, seed):
    rows = []
    wcfg = WeightingConfig(accuracy_rho=spec.rho_scale, max_steps=spec.max_steps)
    for s in spec.s_grid:
        for p in spec.p_grid:
            L0, D = _rpca_data(spec, seed, p, s)
            _, trace = coordinate_descent(D, spec.k, wcfg, reference=L0)
            rows += _trace_rows(trace, seed=seed, p=p, s=s)
    return rows


def _run_fig8(spec, seed):
    rows = []
    wcfg = WeightingConfig(accuracy_rho=spec.rho_scale, max_steps=spec.max_steps)
    cfg = RpcaConfig()
    for s in spec.s_grid:
        for p in spec.p_grid:
            L0, D = _rpca_data(spec, seed, p, s)
            base = dict(seed=seed, p=p, s=s)
            res = rpca(D, cfg)
            rows.append({**base, "method": "unweighted", "error": relative_error(res.low_rank, L0),
                         "iterations": res.iterations})
            for variant in ("type1", "type2"):
                res = weighted_rpca(D, spec.k, variant, wcfg, cfg)
                rows.append({**base, "method": variant, "error": relative_error(res.low_rank, L0),
                             "iterations": res.iterations})
    return rows


def _run_appb(spec, seed):
    rows = []
    M = gen_coherent_lowrank(GenSpec(spec.n1, spec.n2, spec.k, seed=seed))
    for q, name in ((1, "l1"), (2, "l2"), (math.inf, "linf")):
        _, trace = coordinate_descent_exact(M, spec.k, step_q=q, max_steps=spec.loss_steps)
        rows += _trace_rows(trace, seed=seed, step_size=name)
    return rows


_RUNNERS = {
    "fig3-weighting-trace": _run_fig3,
    "fig4-rounds": _run_fig4,
    "fig7-noisy-completion": _run_fig7,
    "fig5/6-rpca-trace": _run_fig56,
    "fig8-rpca-error": _run_fig8,
    "appB-loss-compare": _run_appb,
}


# --------------------------------------------------------------------------
# summaries

def _group(rows, keys):
    out = {}
    for r in rows:
        out.setdefault(tuple(r[k] for k in keys), []).append(r)
    return out


def _final_per_run(rows, run_keys):
    """Last trace record of every (run_keys) group."""
    return [group[-1] for group in _group(rows, run_keys).values()]


def _median_table(rows, keys, values):
    table = []
    for key, group in _group(rows, keys).items():
        entry = dict(zip(keys, key))
        for v in values:
            entry[f"median_{v}"] = float(np.median([g[v] for g in group]))
        entry["n_seeds"] = len({g["seed"] for g in group})
        table.append(entry)
    return table


def _steps_to(trace_rows, column, threshold):
    for r in trace_rows:
        if r[column] <= threshold:
            return r["step"]
    return math.inf


def summarize(scenario: str, rows: list) -> list:
    """Medians across seeds of the quantity each scenario reports."""
    if scenario == "fig3-weighting-trace":
        finals = _final_per_run(rows, ("seed", "p"))
        for f in finals:
            first = next(r for r in rows if r["seed"] == f["seed"] and r["p"] == f["p"])
            f["initial_true_l1_loss"] = first["true_l1_loss"]
            f["initial_true_coherence"] = first["true_coherence"]
        return _median_table(finals, ("p",), ("initial_true_l1_loss", "true_l1_loss",
                                              "initial_true_coherence", "true_coherence", "step"))
    if scenario == "fig5/6-rpca-trace":
        finals = _final_per_run(rows, ("seed", "p", "s"))
        for f in finals:
            first = next(r for r in rows if (r["seed"], r["p"], r["s"]) == (f["seed"], f["p"], f["s"]))
            f["initial_true_coherence"] = first["true_coherence"]
        return _median_table(finals, ("s", "p"), ("initial_true_coherence", "true_coherence", "true_l1_loss"))
    if scenario == "fig4-rounds":
        finals = _final_per_run(rows, ("seed", "p", "round"))
        return _median_table(finals, ("p", "round"), ("true_coherence", "true_l1_loss", "error"))
    if scenario == "fig7-noisy-completion":
        best = [min(g, key=lambda r: r["error"])
                for g in _group(rows, ("seed", "sigma", "p", "method")).values()]
        return _median_table(best, ("sigma", "p", "method"), ("error", "lam"))
    if scenario == "fig8-rpca-error":
        return _median_table(rows, ("s", "p", "method"), ("error",))
    if scenario == "appB-loss-compare":
        finals = []
        for (seed, name), group in _group(rows, ("seed", "step_size")).items():
            start = group[0]["l1_loss"]
            finals.append(dict(seed=seed, step_size=name, l1_loss=group[-1]["l1_loss"],
                               l2_loss=group[-1]["l2_loss"], linf_loss=group[-1]["linf_loss"],
                               steps_to_half_l1=_steps_to(group, "l1_loss", 0.5 * start)))
        return _median_table(finals, ("step_size",), ("l1_loss", "l2_loss", "linf_loss", "steps_to_half_l1"))
    raise InvalidInputError(f"unknown scenario {scenario!r}")


# --------------------------------------------------------------------------
# output

def _write_rows(path: Path, rows: list) -> None:
    fields = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})


_PLOTS = {
    "fig3-weighting-trace": ("step", "true_coherence", ("p",)),
    "fig4-rounds": ("step", "true_coherence", ("round",)),
    "fig5/6-rpca-trace": ("step", "true_coherence", ("s", "p")),
    "fig7-noisy-completion": ("p", "median_error", ("method",)),
    "fig8-rpca-error": ("p", "median_error", ("method",)),
    "appB-loss-compare": ("step", "l1_loss", ("step_size",)),
}


def _plot(spec, rows, summary, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x, y, by = _PLOTS[spec.scenario]
    data = summary if y.startswith("median_") else rows
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key, group in _group(data, by).items():
        if y.startswith("median_"):
            xs, ys = [g[x] for g in group], [g[y] for g in group]
        else:
            # median across seeds at each x
            per_x = _group(group, (x,))
            xs = sorted(k[0] for k in per_x)
            ys = [float(np.median([g[y] for g in per_x[(v,)]])) for v in xs]
        ax.plot(xs, ys, marker="." if len(xs) < 20 else None,
                label=", ".join(f"{b}={k}" for b, k in zip(by, key)))
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(spec.scenario)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run every seed of ``spec``, write per-seed CSVs and the median summary."""
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(spec)
    slug = _slug(spec.scenario)
    report = ExperimentReport(spec, digest)
    runner = _RUNNERS[spec.scenario]
    for seed in spec.seeds:
        rows = runner(spec, seed)
        path = out / f"{slug}_seed{seed}_{digest}.csv"
        _write_rows(path, rows)
        report.run_files.append(path)
        report.rows += rows
    report.summary = summarize(spec.scenario, report.rows)
    report.summary_file = out / f"{slug}_summary_{digest}.csv"
    _write_rows(report.summary_file, report.summary)
    if spec.svg:
        report.figure = out / f"{slug}_summary_{digest}.svg"
        _plot(spec, report.rows, report.summary, report.figure)
    return report
