"""Ground-truth simulation, data-driven and model-based one-step predictors.

The data-driven predictor works on the block data matrix
``h_d = [H_l(u); H_l(y); H_1(sigma^l u); H_1(phi)]``: the future-output row is
projected once onto the rows of ``h_d`` (truncated LQ), then for every step a
least-squares combination ``g`` of the data columns matching the current
initial window is found and ``y_hat = y_bar @ g``.

The model-based estimator regresses the output row on the regressor rows
through the same LQ factorization, ``theta = L21 L11^-1``. With a minimum-norm
solve and full-row-rank data the two give the same one-step prediction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .basis import BasisSet
from .errors import NonFiniteError, RankDeficientError
from .hankel import build_prediction_blocks, lag_windows, transformed_series
from .linalg import SolveOptions, lq_factor, make_solver, numerical_rank
from .trajectory import Trajectory

DEFAULT_BOUND = 1e12


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Coefficients of y(t) = theta_lin @ [x_y; x_u] + theta_nl @ phi(x_y, x_u).

    ``theta_lin`` is ordered (y(t-l), ..., y(t-1), u(t-l), ..., u(t-1), u(t)).
    """

    theta_lin: np.ndarray
    theta_nl: np.ndarray
    ell: int

    def __post_init__(self):
        lin = np.array(self.theta_lin, dtype=float).reshape(-1)
        nl = np.array(self.theta_nl, dtype=float).reshape(-1)
        if self.ell < 1:
            raise ValueError("lag must be >= 1")
        if lin.size != 2 * self.ell + 1:
            raise ValueError(f"theta_lin needs {2 * self.ell + 1} entries for ell={self.ell}, got {lin.size}")
        if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(nl))):
            raise NonFiniteError("parameters must be finite")
        object.__setattr__(self, "theta_lin", lin)
        object.__setattr__(self, "theta_nl", nl)

    def __eq__(self, other):
        if not isinstance(other, SystemParams):
            return NotImplemented
        return (self.ell == other.ell and np.array_equal(self.theta_lin, other.theta_lin)
                and np.array_equal(self.theta_nl, other.theta_nl))

    __hash__ = None

    @property
    def y_coeffs(self) -> np.ndarray:
        return self.theta_lin[: self.ell]

    @property
    def u_coeffs(self) -> np.ndarray:
        return self.theta_lin[self.ell:]

    def regressor_coeffs(self) -> np.ndarray:
        """Coefficients in the order of the one-step regressor [u_past; y_past; u_now; phi]."""
        u = self.u_coeffs
        return np.concatenate([u[:-1], self.y_coeffs, u[-1:], self.theta_nl])

    def to_dict(self) -> dict:
        return {"ell": self.ell, "theta_lin": self.theta_lin.tolist(), "theta_nl": self.theta_nl.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        return cls(np.asarray(d["theta_lin"], float), np.asarray(d.get("theta_nl", []), float), int(d["ell"]))


@dataclass(frozen=True, eq=False)
class InitialCondition:
    """Last ``ell`` input/output samples before the prediction starts, most recent last."""

    u_past: np.ndarray
    y_past: np.ndarray

    def __post_init__(self):
        u = np.array(self.u_past, dtype=float).reshape(-1)
        y = np.array(self.y_past, dtype=float).reshape(-1)
        if u.size != y.size or u.size < 1:
            raise ValueError(f"initial condition needs equal nonzero lengths, got {u.size} and {y.size}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise NonFiniteError("initial condition must be finite")
        object.__setattr__(self, "u_past", u)
        object.__setattr__(self, "y_past", y)

    @property
    def ell(self) -> int:
        return self.u_past.size

    def roll(self, u: float, y: float) -> "InitialCondition":
        return InitialCondition(np.append(self.u_past[1:], u), np.append(self.y_past[1:], y))


@dataclass(frozen=True)
class PredictionConfig:
    solve: SolveOptions = field(default_factory=SolveOptions)
    horizon: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class NoiseSpec:
    mu: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"noise level must be >= 0, got {self.mu}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def draws(self, n: int) -> np.ndarray:
        return np.random.default_rng(self.seed).standard_normal(n)


def regressor(init: InitialCondition, u_now: float, basis: BasisSet) -> np.ndarray:
    """One-step regressor [u_past; y_past; u_now; phi(y_past, [u_past; u_now])]."""
    x_u = np.append(init.u_past, u_now)
    phi = basis.evaluate(init.y_past, x_u) if len(basis) else np.empty(0)
    return np.concatenate([init.u_past, init.y_past, [u_now], phi])


def _check_basis(basis: BasisSet, ell: int):
    if basis.lag > ell:
        raise ValueError(f"basis references lag {basis.lag} but the system lag is {ell}")


def _checked(y: float, bound: float, step: int) -> float:
    if not np.isfinite(y) or abs(y) > bound:
        raise NonFiniteError(f"predicted output {y!r} at step {step} exceeds bound {bound:g}")
    return float(y)


def _rollout(params: SystemParams, basis: BasisSet, init: InitialCondition, u,
             noise=None, bound: float = DEFAULT_BOUND) -> np.ndarray:
    if init.ell != params.ell:
        raise ValueError(f"initial condition has lag {init.ell}, parameters have {params.ell}")
    if len(basis) != params.theta_nl.size:
        raise ValueError(f"{params.theta_nl.size} nonlinear coefficients for {len(basis)} basis functions")
    _check_basis(basis, params.ell)
    u = np.asarray(u, dtype=float).reshape(-1)
    coeffs = params.regressor_coeffs()
    out = np.empty(u.size)
    for i, u_now in enumerate(u):
        y = float(coeffs @ regressor(init, u_now, basis))
        if noise is not None:
            y += noise[i]
        out[i] = _checked(y, bound, i + 1)
        init = init.roll(u_now, out[i])
    return out


def simulate_true(params: SystemParams, basis: BasisSet, init: InitialCondition, u,
                  bound: float = DEFAULT_BOUND) -> np.ndarray:
    return _rollout(params, basis, init, u, bound=bound)


def predict_model_based(params: SystemParams, basis: BasisSet, init: InitialCondition, u_f,
                        bound: float = DEFAULT_BOUND) -> np.ndarray:
    return _rollout(params, basis, init, u_f, bound=bound)


def add_noise(y, noise: NoiseSpec) -> np.ndarray:
    """Additive output noise y + mu * r with r i.i.d. standard normal."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if noise.mu == 0:
        return y.copy()
    return y + noise.mu * noise.draws(y.size)


def simulate_trajectory(params: SystemParams, basis: BasisSet, y0, u,
                        noise: NoiseSpec | None = None, bound: float = DEFAULT_BOUND) -> Trajectory:
    """Full trajectory y(1..T) from the first ``ell`` outputs ``y0`` and inputs u(1..T).

    With ``noise`` the perturbation enters the recursion: each noisy sample
    is f evaluated at the noisy past outputs plus mu * r(t). The ``ell``
    starting samples get mu * r(t) added directly.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    ell = params.ell
    if y0.size != ell:
        raise ValueError(f"need {ell} starting outputs, got {y0.size}")
    if u.size < ell:
        raise ValueError(f"need at least {ell} inputs, got {u.size}")
    r = np.zeros(u.size)
    if noise is not None and noise.mu > 0:
        r = noise.mu * noise.draws(u.size)
    start = y0 + r[:ell]
    rest = _rollout(params, basis, InitialCondition(u[:ell], start), u[ell:], noise=r[ell:], bound=bound)
    return Trajectory(u, np.concatenate([start, rest]))


def identify_parameters(traj: Trajectory, ell: int, basis: BasisSet,
                        rank_tol: float = 1e-12) -> SystemParams:
    """Model-based parameter estimate from the LQ of the regression matrix.

    The matrix stacks x_u(t) (ell+1 rows), x_y(t) (ell rows), phi (K rows)
    and the output row y(t) for t = ell+1..T; with the LQ split after the
    regressor rows, ``theta = L21 L11^-1``.
    """
    _check_basis(basis, ell)
    k = len(basis)
    split = 2 * ell + 1 + k
    if len(traj) - ell < split + 1:
        raise ValueError(f"need at least {split + 1 + ell} samples for ell={ell}, K={k}; got {len(traj)}")
    x_y, x_u = lag_windows(traj, ell)
    s = np.vstack([x_u, x_y, transformed_series(traj, basis, ell), traj.y[ell:][None, :]])
    f = lq_factor(s, split)
    if numerical_rank(f.l11, rank_tol) < split:
        raise RankDeficientError(
            "regressor rows are linearly dependent; the data is not sufficiently exciting for this basis"
        )
    theta = solve_triangular(f.l11, f.l21.T, trans="T", lower=True).reshape(-1)
    u_part, y_part, nl = theta[: ell + 1], theta[ell + 1: split - k], theta[split - k:]
    return SystemParams(np.concatenate([y_part, u_part]), nl, ell)


def predict_data_driven(traj: Trajectory, basis: BasisSet, init: InitialCondition, u_f,
                        cfg: PredictionConfig | None = None,
                        bound: float = DEFAULT_BOUND) -> np.ndarray:
    u_f = np.asarray(u_f, dtype=float).reshape(-1)
    cfg = cfg or PredictionConfig(horizon=u_f.size)
    if u_f.size != cfg.horizon:
        raise ValueError(f"future input has {u_f.size} samples, horizon is {cfg.horizon}")
    ell = init.ell
    _check_basis(basis, ell)
    blocks = build_prediction_blocks(traj, ell, basis).projected()
    y_bar = blocks.y_projected
    solver = make_solver(blocks.h_d, cfg.solve)
    out = np.empty(u_f.size)
    for i, u_now in enumerate(u_f):
        v = regressor(init, u_now, basis)
        g = solver(v)
        out[i] = _checked(float(y_bar @ g), bound, i + 1)
        init = init.roll(u_now, out[i])
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    y_dd: float
    y_mb: float
    tol: float

    @property
    def abs_diff(self) -> float:
        return abs(self.y_dd - self.y_mb)

    @property
    def equivalent(self) -> bool:
        return self.abs_diff <= self.tol * max(1.0, abs(self.y_mb))

    def to_dict(self) -> dict:
        return {"y_dd": self.y_dd, "y_mb": self.y_mb, "abs_diff": self.abs_diff,
                "tol": self.tol, "equivalent": self.equivalent}


def check_equivalence(traj: Trajectory, basis: BasisSet, init: InitialCondition, u_next: float,
                      tol: float = 1e-6) -> EquivalenceReport:
    """One unregularized data-driven step against ``theta_hat @ v_ini``."""
    theta = identify_parameters(traj, init.ell, basis)
    y_mb = float(theta.regressor_coeffs() @ regressor(init, u_next, basis))
    y_dd = float(predict_data_driven(traj, basis, init, [u_next])[0])
    return EquivalenceReport(y_dd=y_dd, y_mb=y_mb, tol=tol)
