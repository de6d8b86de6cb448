"""Seeded Monte Carlo harness for data-driven trajectory prediction.

One noise-free reference trajectory supplies the initial window, the future
input and the exact future. Every trial draws a fresh input, simulates noisy
data and predicts the future with :func:`predict_data_driven`. Trial ``d``
(1-based) uses seed ``base_seed + d``; the reference uses ``base_seed``.

The lambda grid search picks the value whose mean prediction is closest to
the exact future. It needs the exact future, so it is an evaluation device,
not a tuner for real data.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .basis import BasisSet
from .errors import MaxIterationsWarning, NumericalError
from .linalg import SolveOptions
from .predictor import (DEFAULT_BOUND, InitialCondition, NoiseSpec, PredictionConfig, SystemParams,
                        predict_data_driven, simulate_trajectory)
from .trajectory import Trajectory

log = logging.getLogger(__name__)

SYSTEM_BASIS = ("sin(y[-1])", "y[-2]^2")
SIX_FUNCTIONS = ("y[-1]^2", "y[-1]^3", "y[-1]^4", "cos(y[-1])", "sin(y[-1])", "exp(y[-1])")
# the six functions applied to both past outputs, so the candidate set contains the true terms
DEFAULT_FIT_BASIS = SIX_FUNCTIONS + tuple(f.replace("[-1]", "[-2]") for f in SIX_FUNCTIONS)
DEFAULT_GRID = tuple(float(x) for x in np.logspace(-6, 0, 13))
NOISE_MODELS = ("equation", "output")


def example_system() -> tuple[SystemParams, BasisSet]:
    """y(t) = sin(y(t-1)) - 0.1 y(t-2)^2 + u(t)."""
    return SystemParams([0, 0, 0, 0, 1], [1.0, -0.1], 2), BasisSet.parse(SYSTEM_BASIS)


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemParams = field(default_factory=lambda: example_system()[0])
    system_basis: BasisSet = field(default_factory=lambda: example_system()[1])
    fit_basis: BasisSet = field(default_factory=lambda: BasisSet.parse(DEFAULT_FIT_BASIS))
    ell: int = 2
    t_true: int = 80
    t_data: int = 68
    trials: int = 100
    mu: float = 0.1
    horizon: int = 10
    solve: SolveOptions = field(default_factory=lambda: SolveOptions("ridge"))
    lambda_grid: tuple[float, ...] = DEFAULT_GRID
    base_seed: int = 0
    input_scale: float = 1.0
    y_start: tuple[float, ...] = (1.0, 1.0)
    noise_model: str = "equation"
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        object.__setattr__(self, "y_start", tuple(float(x) for x in self.y_start))
        if self.t_true < self.t_data + self.ell + self.horizon:
            raise ValueError("t_true must be >= t_data + ell + horizon")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.solve.mode != "min-norm" and not self.lambda_grid:
            raise ValueError("lambda_grid must be nonempty for regularized solves")
        if any(not (math.isfinite(x) and x >= 0) for x in self.lambda_grid):
            raise ValueError("lambda_grid entries must be finite and nonnegative")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {NOISE_MODELS}")
        if self.fit_basis.lag > self.ell:
            raise ValueError("fit_basis references lags beyond ell")
        if len(self.system_basis) != self.system.theta_nl.size:
            raise ValueError("system basis and theta_nl differ in length")
        if len(self.y_start) != self.system.ell:
            raise ValueError(f"y_start needs {self.system.ell} values")
        if not 0 <= self.base_seed < 2**63:
            raise ValueError("base_seed out of range")

    def to_dict(self) -> dict:
        return {
            "system": {**self.system.to_dict(), "basis": self.system_basis.to_strings()},
            "fit_basis": self.fit_basis.to_strings(),
            "ell": self.ell,
            "t_true": self.t_true,
            "t_data": self.t_data,
            "trials": self.trials,
            "mu": self.mu,
            "horizon": self.horizon,
            "solve": self.solve.to_dict(),
            "lambda_grid": list(self.lambda_grid),
            "base_seed": self.base_seed,
            "input_dist": {"kind": "standard-normal", "scale": self.input_scale},
            "y_start": list(self.y_start),
            "noise_model": self.noise_model,
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kw = {}
        if "system" in d:
            sysd = d["system"]
            kw["system"] = SystemParams.from_dict(sysd)
            kw["system_basis"] = BasisSet.parse(sysd.get("basis", []))
        if "fit_basis" in d:
            kw["fit_basis"] = BasisSet.parse(d["fit_basis"])
        if "solve" in d:
            kw["solve"] = SolveOptions.from_dict(d["solve"])
        if "input_dist" in d:
            dist = d["input_dist"]
            if dist.get("kind", "standard-normal") != "standard-normal":
                raise ValueError(f"unsupported input distribution {dist.get('kind')!r}")
            kw["input_scale"] = float(dist.get("scale", 1.0))
        for key in ("ell", "t_true", "t_data", "trials", "horizon", "base_seed"):
            if key in d:
                kw[key] = int(d[key])
        for key in ("mu", "bound"):
            if key in d:
                kw[key] = float(d[key])
        for key in ("lambda_grid", "y_start"):
            if key in d:
                kw[key] = tuple(d[key])
        if "noise_model" in d:
            kw["noise_model"] = d["noise_model"]
        unknown = set(d) - set(cls().to_dict())
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Reference:
    trajectory: Trajectory
    init: InitialCondition
    u_future: np.ndarray
    y_future: np.ndarray


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial_index: int
    predicted: np.ndarray | None
    rmse_vs_true: float
    warnings: tuple[str, ...] = ()
    error: str | None = None

    @property
    def diverged(self) -> bool:
        return self.predicted is None


@dataclass(frozen=True, eq=False)
class ExperimentSummary:
    true_future: np.ndarray
    trials: tuple[TrialResult, ...]
    config: ExperimentConfig
    chosen_lambda: float | None = None
    grid_scores: tuple[tuple[float, float], ...] = ()

    @property
    def ok_trials(self) -> list[TrialResult]:
        return [t for t in self.trials if not t.diverged]

    @property
    def predictions(self) -> np.ndarray:
        ok = self.ok_trials
        if not ok:
            return np.empty((0, self.true_future.size))
        return np.vstack([t.predicted for t in ok])

    @property
    def n_diverged(self) -> int:
        return sum(t.diverged for t in self.trials)

    @property
    def mean(self) -> np.ndarray:
        p = self.predictions
        return p.mean(axis=0) if len(p) else np.full(self.true_future.size, np.nan)

    @property
    def std(self) -> np.ndarray:
        p = self.predictions
        return p.std(axis=0) if len(p) else np.full(self.true_future.size, np.nan)

    @property
    def median(self) -> np.ndarray:
        p = self.predictions
        return np.median(p, axis=0) if len(p) else np.full(self.true_future.size, np.nan)

    @property
    def rmse(self) -> np.ndarray:
        return np.array([t.rmse_vs_true for t in self.ok_trials])

    @property
    def median_rmse(self) -> float:
        r = self.rmse
        return float(np.median(r)) if r.size else math.inf

    @property
    def mean_error(self) -> float:
        """Distance between the mean prediction and the exact future."""
        if not self.ok_trials:
            return math.inf
        return float(np.linalg.norm(self.mean - self.true_future))


def _input(seed: int, n: int, scale: float) -> np.ndarray:
    return scale * np.random.default_rng([seed, 1]).standard_normal(n)


def make_reference(cfg: ExperimentConfig) -> Reference:
    u = _input(cfg.base_seed, cfg.t_true, cfg.input_scale)
    traj = simulate_trajectory(cfg.system, cfg.system_basis, cfg.y_start, u, bound=cfg.bound)
    a, b = cfg.t_data, cfg.t_data + cfg.ell
    init = InitialCondition(traj.u[a:b], traj.y[a:b])
    return Reference(traj, init, traj.u[b:b + cfg.horizon].copy(), traj.y[b:b + cfg.horizon].copy())


def trial_data(cfg: ExperimentConfig, d: int) -> Trajectory:
    """Noisy data for trial ``d``; raises :class:`NumericalError` if the simulation blows up."""
    seed = cfg.base_seed + d
    u = _input(seed, cfg.t_data, cfg.input_scale)
    noise = NoiseSpec(cfg.mu, seed)
    if cfg.noise_model == "equation":
        return simulate_trajectory(cfg.system, cfg.system_basis, cfg.y_start, u, noise, bound=cfg.bound)
    clean = simulate_trajectory(cfg.system, cfg.system_basis, cfg.y_start, u, bound=cfg.bound)
    return Trajectory(u, clean.y + (cfg.mu * noise.draws(u.size) if cfg.mu else 0.0))


def _prepare(cfg: ExperimentConfig):
    data = {}
    for d in range(1, cfg.trials + 1):
        try:
            data[d] = trial_data(cfg, d)
        except NumericalError as exc:
            data[d] = exc
    return data


def run_trial(cfg: ExperimentConfig, ref: Reference, d: int, data=None) -> TrialResult:
    if data is None:
        try:
            data = trial_data(cfg, d)
        except NumericalError as exc:
            data = exc
    if isinstance(data, Exception):
        return TrialResult(d, None, math.nan, error=f"data: {data}")
    pcfg = PredictionConfig(cfg.solve, cfg.horizon)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MaxIterationsWarning)
        try:
            pred = predict_data_driven(data, cfg.fit_basis, ref.init, ref.u_future, pcfg, bound=cfg.bound)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            return TrialResult(d, None, math.nan, error=str(exc))
    flags = tuple(sorted({str(w.message) for w in caught if issubclass(w.category, MaxIterationsWarning)}))
    rmse = float(np.sqrt(np.mean((pred - ref.y_future) ** 2)))
    return TrialResult(d, pred, rmse, warnings=flags)


def _run(cfg: ExperimentConfig, ref: Reference, data: dict) -> ExperimentSummary:
    results = [run_trial(cfg, ref, d, data[d]) for d in sorted(data)]
    summary = ExperimentSummary(ref.y_future, tuple(results), cfg)
    if summary.n_diverged:
        log.info("%d of %d trials diverged", summary.n_diverged, cfg.trials)
    return summary


def run_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    return _run(cfg, make_reference(cfg), _prepare(cfg))


def grid_search_lambda(cfg: ExperimentConfig) -> tuple[float, ExperimentSummary]:
    """Pick the grid value whose mean prediction is closest to the exact future.

    Every grid point sees identical data. Ties go to the smaller lambda.
    """
    if not cfg.lambda_grid:
        raise ValueError("lambda_grid is empty")
    if cfg.solve.mode not in ("ridge", "lasso"):
        raise ValueError("grid search needs a ridge or lasso solve")
    ref, data = make_reference(cfg), _prepare(cfg)
    best = None
    scores = []
    for lam in sorted(set(cfg.lambda_grid)):
        s = _run(replace(cfg, solve=replace(cfg.solve, lam=lam)), ref, data)
        scores.append((lam, s.mean_error))
        log.info("lambda=%g  mean-trajectory error=%.6g", lam, s.mean_error)
        if best is None or s.mean_error < best[1].mean_error:
            best = (lam, s)
    lam, s = best
    return lam, replace(s, chosen_lambda=lam, grid_scores=tuple(scores))


def _f(x: float) -> str:
    return repr(float(x))


def emit_outputs(summary: ExperimentSummary, out_dir) -> list[Path]:
    """Write summary.csv, trials.csv, config.json and metrics.json into ``out_dir``."""
    out = Path(out_dir)
    paths = [out / "summary.csv", out / "trials.csv", out / "config.json", out / "metrics.json"]
    try:
        out.mkdir(parents=True, exist_ok=True)
        with paths[0].open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "true", "mean", "std", "median"])
            for i, row in enumerate(zip(summary.true_future, summary.mean, summary.std, summary.median), 1):
                w.writerow([i, *map(_f, row)])
        with paths[1].open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", "step", "value"])
            for t in summary.ok_trials:
                for i, v in enumerate(t.predicted, 1):
                    w.writerow([t.trial_index, i, _f(v)])
        paths[2].write_text(json.dumps(summary.config.to_dict(), indent=2) + "\n")
        metrics = {
            "chosen_lambda": summary.chosen_lambda,
            "grid_scores": [{"lambda": lam, "mean_error": err} for lam, err in summary.grid_scores],
            "n_trials": len(summary.trials),
            "n_diverged": summary.n_diverged,
            "median_rmse": summary.median_rmse if summary.ok_trials else None,
            "mean_error": summary.mean_error if summary.ok_trials else None,
            "trials": [
                {"trial": t.trial_index, "rmse": None if t.diverged else t.rmse_vs_true,
                 "diverged": t.diverged, "warnings": list(t.warnings), "error": t.error}
                for t in summary.trials
            ],
        }
        paths[3].write_text(json.dumps(metrics, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write experiment outputs to {out}: {exc}") from exc
    return paths
