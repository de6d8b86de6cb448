"""Command-line interface.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .basis import BasisSet
from .errors import NumericalError
from .experiment import ExperimentConfig, emit_outputs, grid_search_lambda, run_experiment
from .hankel import check_identifiability
from .linalg import SolveOptions
from .predictor import (InitialCondition, NoiseSpec, PredictionConfig, SystemParams, add_noise,
                        check_equivalence, identify_parameters, predict_data_driven,
                        simulate_trajectory)
from .trajectory import Trajectory, read_trajectory, write_trajectory

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _load_json(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        d = json.load(fh)
    if not isinstance(d, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return d


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _basis_and_ell(args, cfg: dict) -> tuple[BasisSet, int]:
    texts = args.basis if args.basis else cfg.get("basis", [])
    basis = BasisSet.parse(texts)
    ell = args.ell if args.ell is not None else cfg.get("ell", max(basis.lag, 1))
    return basis, int(ell)


def _init(cfg: dict) -> InitialCondition:
    try:
        ini = cfg["init"]
        return InitialCondition(ini["u"], ini["y"])
    except KeyError as exc:
        raise ValueError(f"config needs init.u and init.y ({exc} missing)") from exc


def _solve_opts(args, cfg: dict) -> SolveOptions:
    opts = SolveOptions.from_dict(cfg.get("solve", {}))
    if args.mode is not None:
        opts = replace(opts, mode=args.mode)
    if args.lam is not None:
        opts = replace(opts, lam=args.lam)
    if args.tol is not None:
        opts = replace(opts, tol=args.tol)
    return opts


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    sysd = cfg.get("system")
    if sysd is None:
        raise ValueError("simulate needs a config with a 'system' block")
    params = SystemParams.from_dict(sysd)
    basis = BasisSet.parse(sysd.get("basis", []))
    if "input" in cfg:
        u = np.asarray(cfg["input"], dtype=float)
    else:
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        n = int(cfg.get("length", 80))
        u = float(cfg.get("input_scale", 1.0)) * np.random.default_rng([seed, 1]).standard_normal(n)
    y_start = cfg.get("y_start", [1.0] * params.ell)
    noise = None
    if cfg.get("mu", 0):
        noise = NoiseSpec(float(cfg["mu"]), args.seed if args.seed is not None else int(cfg.get("seed", 0)))
    traj = simulate_trajectory(params, basis, y_start, u, noise)
    write_trajectory(traj, args.out or sys.stdout)
    return EXIT_OK


def cmd_noise(args) -> int:
    traj = read_trajectory(args.data)
    noisy = add_noise(traj.y, NoiseSpec(args.mu, args.seed if args.seed is not None else 0))
    write_trajectory(Trajectory(traj.u, noisy), args.out or sys.stdout)
    return EXIT_OK


def cmd_rank(args) -> int:
    cfg = _load_json(args.config)
    basis, ell = _basis_and_ell(args, cfg)
    l = args.L if args.L is not None else int(cfg.get("L", ell + 1))
    report = check_identifiability(read_trajectory(args.data), l, basis, ell, args.tol)
    _emit_json({"L": l, "ell": ell, "basis": basis.to_strings(), **report.to_dict()}, args.out)
    return EXIT_OK


def cmd_identify(args) -> int:
    cfg = _load_json(args.config)
    basis, ell = _basis_and_ell(args, cfg)
    theta = identify_parameters(read_trajectory(args.data), ell, basis)
    _emit_json({**theta.to_dict(), "basis": basis.to_strings()}, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _load_json(args.config)
    basis, _ = _basis_and_ell(args, cfg)
    init = _init(cfg)
    u_f = np.asarray(cfg.get("u_future", []), dtype=float)
    if u_f.size == 0:
        raise ValueError("config needs a nonempty u_future")
    pcfg = PredictionConfig(_solve_opts(args, cfg), u_f.size)
    y = predict_data_driven(read_trajectory(args.data), basis, init, u_f, pcfg)
    lines = ["step,u,y"] + [f"{i},{float(u)!r},{float(v)!r}" for i, (u, v) in enumerate(zip(u_f, y), 1)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_equiv(args) -> int:
    cfg = _load_json(args.config)
    basis, _ = _basis_and_ell(args, cfg)
    if "u_next" not in cfg:
        raise ValueError("config needs u_next")
    tol = args.tol if args.tol is not None else float(cfg.get("tol", 1e-6))
    report = check_equivalence(read_trajectory(args.data), basis, _init(cfg), float(cfg["u_next"]), tol)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not args.out:
        raise ValueError("experiment needs --out <dir>")
    cfg = ExperimentConfig.from_dict(_load_json(args.config))
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    solve = _solve_opts(args, {"solve": cfg.solve.to_dict()})
    grid = (args.lam,) if args.lam is not None else cfg.lambda_grid
    cfg = replace(cfg, solve=solve, lambda_grid=grid)
    if cfg.solve.mode == "min-norm":
        summary = run_experiment(cfg)
    else:
        _, summary = grid_search_lambda(cfg)
    emit_outputs(summary, args.out)
    print(f"trials={len(summary.trials)} diverged={summary.n_diverged} "
          f"lambda={summary.chosen_lambda} median_rmse={summary.median_rmse:.6g} "
          f"mean_error={summary.mean_error:.6g} -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help="output file (or directory for 'experiment'); stdout if omitted")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--lambda", dest="lam", type=float, help="regularization weight")
    common.add_argument("--mode", choices=["min-norm", "ridge", "lasso"], help="least-squares solve")
    common.add_argument("--tol", type=float, help="tolerance (rank, equivalence or solver, per command)")
    common.add_argument("-v", "--verbose", action="store_true")

    with_basis = argparse.ArgumentParser(add_help=False)
    with_basis.add_argument("--basis", action="append", help="basis expression, repeatable (e.g. 'sin(y[-1])')")
    with_basis.add_argument("--ell", type=int, help="system lag")

    p = argparse.ArgumentParser(prog="ddpredict", description="Data-driven simulation of nonlinear systems")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate a system from a config")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("noise", parents=[common], help="add seeded Gaussian noise to the outputs of a CSV")
    s.add_argument("data")
    s.add_argument("--mu", type=float, required=True)
    s.set_defaults(func=cmd_noise)

    s = sub.add_parser("rank", parents=[common, with_basis], help="extended Hankel rank check")
    s.add_argument("data")
    s.add_argument("--L", type=int, help="number of Hankel rows per block (default ell + 1)")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("identify", parents=[common, with_basis], help="model-based parameter estimate")
    s.add_argument("data")
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("predict", parents=[common, with_basis], help="iterative data-driven prediction")
    s.add_argument("data")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("equiv", parents=[common, with_basis], help="data-driven vs model-based one-step check")
    s.add_argument("data")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("experiment", parents=[common], help="Monte Carlo experiment")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
