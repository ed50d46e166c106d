"""Command-line front end.

Subcommands:

    gen         synthetic L0, sampled observation, optional noise / corruption
    weigh       row and column weights by coordinate descent
    complete    weighted nuclear-norm completion (given weights or --rounds)
    rpca        plain or weighted robust PCA
    experiment  run a harness scenario

Global flags (before the subcommand): ``--seed``, ``--threads``, ``--out``
and ``--config``.  The config file holds ``key = value`` lines whose keys
are flag names (dashes or underscores); command-line flags win over it.
On failure one JSON line ``{"error": ..., "message": ...}`` goes to stderr
and the exit status is 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .completion import (
    AdmmConfig,
    admm_weighted_complete,
    lambda_grid,
    relative_error,
    weighting_completion,
)
from .datagen import GenSpec, add_gaussian_noise, gen_coherent_lowrank, gen_sparse_corruption, sample_uniform
from .errors import InvalidInputError, LevWeightError
from .experiments import SCENARIOS, default_spec, run_experiment
from .linalg import SparseObservation, read_dense_csv, read_observation, write_dense_csv, write_observation
from .rpca import RpcaConfig, rpca, weighted_rpca
from .weighting import DiagonalWeights, WeightingConfig, coordinate_descent

__all__ = ["main", "build_parser", "read_config", "read_weights", "write_weights"]


# --------------------------------------------------------------------------
# helpers

def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _ints(text: str) -> tuple:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _steps(text: str):
    return None if text in ("", "none", "None") else int(text)


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def read_matrix_or_observation(path):
    """``.mtx`` files load as observations, anything else as dense CSV."""
    path = Path(path)
    if path.suffix.lower() == ".mtx":
        return read_observation(path)
    return read_dense_csv(path)


def write_weights(path, w: DiagonalWeights) -> None:
    with open(path, "w") as fh:
        fh.write("index,weight,abandoned\n")
        for i, (v, a) in enumerate(zip(w.values, w.abandoned)):
            fh.write(f"{i},{float(v)!r},{int(a)}\n")


def read_weights(path) -> DiagonalWeights:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3 or not np.array_equal(data[:, 0], np.arange(len(data))):
        raise InvalidInputError(f"{path} is not a weights file")
    return DiagonalWeights(data[:, 1], data[:, 2].astype(bool))


def _write_trace(path, values) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,residual\n")
        for i, v in enumerate(values, 1):
            fh.write(f"{i},{float(v)!r}\n")


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True, default=float))


def _wcfg(args) -> WeightingConfig:
    return WeightingConfig(
        accuracy_rho=args.rho, max_steps=args.steps, seed=args.seed, trim_mode=args.trim_mode
    )


def _lambda(args, obs) -> float:
    if args.lam is not None:
        return args.lam
    return float(lambda_grid(obs, (args.lam_exponent,))[0])


# --------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> dict:
    out = Path(args.out)
    spec = GenSpec(args.n1, args.n2, args.k, seed=args.seed)
    L0 = gen_coherent_lowrank(spec)
    M = L0
    if args.noise_sigma > 0:
        M = add_gaussian_noise(L0, args.noise_fraction, args.noise_sigma, args.noise_mean, seed=args.seed + 2000)
    mask = sample_uniform(args.n1, args.n2, args.p, seed=args.seed + 1000)
    obs = SparseObservation.from_dense(M, mask)
    files = {"L0": "L0.csv", "observation": "observation.mtx"}
    write_dense_csv(out / files["L0"], L0, header=f"L0 seed={args.seed}")
    write_observation(out / files["observation"], obs, comment=f"seed={args.seed} p={args.p}")
    if args.corrupt_p > 0:
        S0 = gen_sparse_corruption(args.n1, args.n2, args.corrupt_p, args.corrupt_s, seed=args.seed + 3000)
        files.update(S0="S0.csv", D="D.csv")
        write_dense_csv(out / files["S0"], S0, header=f"S0 seed={args.seed}")
        write_dense_csv(out / files["D"], L0 + S0, header=f"D = L0 + S0 seed={args.seed}")
    manifest = dict(
        spec=spec.as_dict(), seed=args.seed, p=args.p, observed=obs.nnz,
        noise=dict(fraction=args.noise_fraction, sigma=args.noise_sigma, mean=args.noise_mean),
        corruption=dict(p=args.corrupt_p, s=args.corrupt_s), files=files,
        rng="numpy.random.PCG64", numpy=np.__version__,
    )
    _write_json(out / "manifest.json", manifest)
    return {"command": "gen", "files": files, "observed": obs.nnz}


def cmd_weigh(args) -> dict:
    out = Path(args.out)
    data = read_matrix_or_observation(args.input)
    cfg = _wcfg(args)
    R, row_trace = coordinate_descent(data, args.k, cfg)
    C, col_trace = coordinate_descent(data.T, args.k, cfg)
    write_weights(out / "row_weights.csv", R)
    write_weights(out / "col_weights.csv", C)
    row_trace.to_csv(out / "row_trace.csv")
    col_trace.to_csv(out / "col_trace.csv")
    return {
        "command": "weigh",
        "row_steps": row_trace.steps,
        "col_steps": col_trace.steps,
        "identity": bool(R.is_identity() and C.is_identity()),
    }


def cmd_complete(args) -> dict:
    out = Path(args.out)
    obs = read_observation(args.input)
    acfg = AdmmConfig(
        lam=_lambda(args, obs), admm_penalty=args.admm_penalty, max_iters=args.max_iters,
        primal_tol=args.tol, seed=args.seed,
    )
    summary = {"command": "complete", "lam": acfg.lam}
    if args.rounds is not None:
        if args.row_weights or args.col_weights:
            raise InvalidInputError("--rounds cannot be combined with explicit weights")
        result, diags = weighting_completion(obs, args.k, args.rounds, _wcfg(args), acfg)
        with open(out / "rounds.csv", "w") as fh:
            fh.write("round,coherence,l1_loss,iterations,converged\n")
            for d in diags:
                fh.write(f"{d.round},{float(d.coherence)!r},{float(d.l1_loss)!r},{d.result.iterations},{int(d.result.converged)}\n")
        summary["rounds"] = args.rounds
    else:
        R = read_weights(args.row_weights) if args.row_weights else None
        C = read_weights(args.col_weights) if args.col_weights else None
        result = admm_weighted_complete(obs, R, C, acfg)
    write_dense_csv(out / "L.csv", result.recovered)
    _write_trace(out / "residual_trace.csv", result.residual_trace)
    summary.update(iterations=result.iterations, converged=result.converged)
    if args.reference:
        summary["relative_error"] = relative_error(result.recovered, read_dense_csv(args.reference))
    _write_json(out / "summary.json", summary)
    return summary


def cmd_rpca(args) -> dict:
    out = Path(args.out)
    D = read_dense_csv(args.input)
    cfg = RpcaConfig(lambda_rpca=args.lambda_rpca, max_iters=args.max_iters, tol=args.tol)
    if args.variant == "none":
        result = rpca(D, cfg)
    else:
        if args.k is None:
            raise InvalidInputError("--k is required for weighted variants")
        result = weighted_rpca(D, args.k, args.variant, _wcfg(args), cfg)
    write_dense_csv(out / "L.csv", result.low_rank)
    write_dense_csv(out / "S.csv", result.sparse)
    summary = {"command": "rpca", "variant": args.variant, "iterations": result.iterations,
               "converged": result.converged}
    if args.reference:
        summary["relative_error"] = relative_error(result.low_rank, read_dense_csv(args.reference))
    _write_json(out / "summary.json", summary)
    return summary


def cmd_experiment(args) -> dict:
    seeds = args.seeds if args.seeds is not None else (args.seed,)
    overrides = dict(seeds=seeds, out_dir=str(args.out), svg=args.svg)
    for name in ("n1", "n2", "k", "p_grid", "sigma_grid", "s_grid", "lambda_exponents", "rounds",
                 "rho_scale", "admm_max_iters", "admm_tol"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.steps is not None:
        overrides["max_steps"] = args.steps
    report = run_experiment(default_spec(args.scenario, **overrides))
    return {
        "command": "experiment",
        "scenario": args.scenario,
        "config_hash": report.config_hash,
        "summary_file": str(report.summary_file),
        "run_files": [str(p) for p in report.run_files],
        "summary": report.summary,
    }


# --------------------------------------------------------------------------
# parser

def _add_weighting(p, rho_default=20.0):
    p.add_argument("--rho", type=float, default=rho_default, help="estimation accuracy rho (> 1)")
    p.add_argument("--steps", type=_steps, default=None, help="max coordinate-descent steps (default k^2)")
    p.add_argument("--trim-mode", choices=("subsample", "zero-out"), default="subsample")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levweight", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--config", default=None, help="key = value file mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic data")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, default=1.0, help="sampling rate")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-fraction", type=float, default=0.5)
    p.add_argument("--noise-mean", type=float, default=1.0)
    p.add_argument("--corrupt-p", type=float, default=0.0)
    p.add_argument("--corrupt-s", type=float, default=1000.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("weigh", help="row/column weights by coordinate descent")
    p.add_argument("--input", required=True, help=".mtx observation or dense .csv")
    p.add_argument("--k", type=int, required=True)
    _add_weighting(p)
    p.set_defaults(func=cmd_weigh)

    p = sub.add_parser("complete", help="weighted nuclear-norm completion")
    p.add_argument("--input", required=True, help=".mtx observation")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None, help="weighting/completion rounds")
    p.add_argument("--row-weights", default=None)
    p.add_argument("--col-weights", default=None)
    p.add_argument("--lam", type=float, default=None, help="nuclear-norm weight")
    p.add_argument("--lam-exponent", type=float, default=-3.0,
                   help="if --lam is absent: 10**e * ||P(M)||_F / sqrt(|Omega|)")
    p.add_argument("--admm-penalty", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--reference", default=None, help="dense CSV of the true matrix")
    _add_weighting(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("rpca", help="plain or weighted robust PCA")
    p.add_argument("--input", required=True, help="dense CSV D")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--variant", choices=("none", "type1", "type2"), default="none")
    p.add_argument("--lambda-rpca", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--reference", default=None, help="dense CSV of the true low-rank part")
    _add_weighting(p)
    p.set_defaults(func=cmd_rpca)

    p = sub.add_parser("experiment", help="run a harness scenario")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--seeds", type=_ints, default=None, help="comma separated (default: --seed)")
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p", dest="p_grid", type=_floats, default=None, help="comma separated rates")
    p.add_argument("--sigma", dest="sigma_grid", type=_floats, default=None)
    p.add_argument("--s", dest="s_grid", type=_floats, default=None)
    p.add_argument("--lambda-exponents", type=_ints, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--rho-scale", type=float, default=None)
    p.add_argument("--steps", type=_steps, default=None)
    p.add_argument("--admm-max-iters", type=int, default=None)
    p.add_argument("--admm-tol", type=float, default=None)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults (flags still win)."""
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known_args, _ = pre.parse_known_args(argv)
    if known_args.config is None:
        return parser.parse_args(argv)
    values = read_config(known_args.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    targets = [parser] + ([subparsers.choices[command]] if command else [])
    known = {}
    for t in targets:
        for a in t._actions:
            if a.dest in ("help", "version", "config", "command"):
                continue
            for name in [a.dest] + [o.lstrip("-").replace("-", "_") for o in a.option_strings]:
                known[name] = (t, a)
    for key, raw in values.items():
        if key not in known:
            raise InvalidInputError(f"unknown config key {key!r}")
        target, action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = action.type(raw) if action.type else raw
        target.set_defaults(**{action.dest: value})
        action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command in ("complete",) and args.rounds is not None and args.k is None:
            raise InvalidInputError("--k is required with --rounds")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        if args.threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=args.threads):
                summary = args.func(args)
        else:
            summary = args.func(args)
        summary["seed"] = args.seed
        _emit(summary)
        return 0
    except (LevWeightError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
