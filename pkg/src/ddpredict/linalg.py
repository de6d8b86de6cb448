"""Dense linear-algebra kernel.

Block LQ factorization with truncation, row-space projection, and the
least-squares solvers (minimum norm, ridge, lasso) used by the predictor.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import MaxIterationsWarning, NonFiniteError

MODES = ("min-norm", "ridge", "lasso")


@dataclass(frozen=True)
class SolveOptions:
    mode: str = "min-norm"
    lam: float = 0.0
    max_iters: int = 10_000
    tol: float = 1e-8
    accelerated: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown solve mode {self.mode!r}, expected one of {MODES}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and nonnegative, got {self.lam}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def effective_mode(self) -> str:
        # lambda = 0 always means an unregularized solve
        return "min-norm" if self.lam == 0 else self.mode

    def to_dict(self) -> dict:
        return {"mode": self.mode, "lambda": self.lam, "max_iters": self.max_iters, "tol": self.tol,
                "accelerated": self.accelerated}

    @classmethod
    def from_dict(cls, d: dict) -> "SolveOptions":
        return cls(
            mode=d.get("mode", "min-norm"),
            lam=float(d.get("lambda", 0.0)),
            max_iters=int(d.get("max_iters", 10_000)),
            tol=float(d.get("tol", 1e-8)),
            accelerated=bool(d.get("accelerated", False)),
        )


@dataclass(frozen=True)
class LqFactors:
    """Two-block LQ factors of a wide matrix ``A = [A1; A2]``.

    ``A1 = l11 @ q1`` and ``A2 = l21 @ q1 + l22 @ q2``; the rows of
    ``[q1; q2]`` are orthonormal.
    """

    l11: np.ndarray
    l21: np.ndarray
    l22: np.ndarray
    q1: np.ndarray
    q2: np.ndarray

    @property
    def split(self) -> int:
        return self.l11.shape[0]

    def reconstruct(self) -> np.ndarray:
        return np.vstack([self.l11 @ self.q1, self.l21 @ self.q1 + self.l22 @ self.q2])


def _as_matrix(a, name="a") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a nonempty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return a


def _as_vector(b, n, name="b") -> np.ndarray:
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != n:
        raise ValueError(f"{name} has length {b.shape[0]}, expected {n}")
    if not np.all(np.isfinite(b)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return b


def lq(a) -> tuple[np.ndarray, np.ndarray]:
    """Full LQ of a wide or square matrix via Householder QR of ``a.T``.

    Returns ``(l, q)`` with ``l`` lower triangular (nonnegative diagonal) and
    ``q`` having orthonormal rows, ``a = l @ q``.
    """
    a = _as_matrix(a)
    if a.shape[1] < a.shape[0]:
        raise ValueError(f"LQ needs cols >= rows, got shape {a.shape}")
    q, r = np.linalg.qr(a.T, mode="reduced")
    l, q = r.T, q.T
    d = np.sign(np.diag(l))
    d[d == 0] = 1.0
    l = l * d
    q = q * d[:, None]
    if not (np.all(np.isfinite(l)) and np.all(np.isfinite(q))):
        raise NonFiniteError("LQ factorization produced non-finite values")
    return l, q


def lq_factor(a, split: int) -> LqFactors:
    a = _as_matrix(a)
    rows = a.shape[0]
    if not 1 <= split < rows:
        raise ValueError(f"split must satisfy 1 <= split < {rows}, got {split}")
    l, q = lq(a)
    return LqFactors(
        l11=l[:split, :split],
        l21=l[split:, :split],
        l22=l[split:, split:],
        q1=q[:split],
        q2=q[split:],
    )


def truncate_lq(f: LqFactors) -> np.ndarray:
    """Low-rank approximation ``[l11 q1; l21 q1]`` (drops the ``l22 q2`` term)."""
    return np.vstack([f.l11 @ f.q1, f.l21 @ f.q1])


def project_onto_rows(data, extra_row) -> np.ndarray:
    """Project ``extra_row`` onto the row space of ``data`` through the LQ of ``[data; extra_row]``.

    For rank-deficient ``data`` the first block of ``q`` spans more than the
    row space, so the result is only a true projection for full row rank.
    """
    data = _as_matrix(data, "data")
    extra = _as_vector(extra_row, data.shape[1], "extra_row")
    if data.shape[1] < data.shape[0] + 1:
        raise ValueError(
            f"data needs at least rows+1 columns for a strict projection, got shape {data.shape}"
        )
    f = lq_factor(np.vstack([data, extra]), split=data.shape[0])
    return (f.l21 @ f.q1).reshape(-1)


def default_rank_tol(shape) -> float:
    return max(shape) * np.finfo(float).eps


def numerical_rank(a, tol: float | None = None) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    a = _as_matrix(a)
    if tol is None:
        tol = default_rank_tol(a.shape)
    if not 0 < tol < 1:
        raise ValueError(f"relative rank tolerance must lie in (0, 1), got {tol}")
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def _svd_min_norm_operator(a: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    r = int(np.count_nonzero(s > default_rank_tol(a.shape) * s[0])) if s[0] > 0 else 0
    u, s, vt = u[:, :r], s[:r], vt[:r]
    return lambda b: vt.T @ ((u.T @ b) / s)


def min_norm_operator(a) -> Callable[[np.ndarray], np.ndarray]:
    """Precompute ``b -> argmin ||g|| s.t. g minimizes ||a g - b||``.

    Full-row-rank wide matrices go through the LQ factor (``g = q.T l^-1 b``);
    everything else falls back to a truncated SVD.
    """
    a = _as_matrix(a)
    rows, cols = a.shape
    if rows <= cols:
        l, q = lq(a)
        if numerical_rank(l) == rows:
            return lambda b: q.T @ solve_triangular(l, b, lower=True)
    return _svd_min_norm_operator(a)


def solve_min_norm(a, b) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_vector(b, a.shape[0])
    return min_norm_operator(a)(b)


def ridge_operator(a, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """Precompute the minimizer of ``0.5||a g - b||^2 + lam ||g||^2`` as a map of ``b``.

    Uses the dual form ``g = a.T (a a.T + 2 lam I)^-1 b``, which is identical to
    the primal normal equations and stays well conditioned for wide ``a``.
    """
    a = _as_matrix(a)
    if not lam > 0:
        raise ValueError(f"ridge needs lambda > 0, got {lam}")
    rows, cols = a.shape
    if rows <= cols:
        c = cho_factor(a @ a.T + 2.0 * lam * np.eye(rows))
        return lambda b: a.T @ cho_solve(c, b)
    c = cho_factor(a.T @ a + 2.0 * lam * np.eye(cols))
    return lambda b: cho_solve(c, a.T @ b)


def solve_ridge(a, b, lam: float) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_vector(b, a.shape[0])
    return ridge_operator(a, lam)(b)


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_objective(a, b, g, lam) -> float:
    r = a @ g - b
    return 0.5 * float(r @ r) + lam * float(np.abs(g).sum())


def solve_lasso(a, b, lam: float, opts: SolveOptions | None = None, g0=None,
                callback: Callable[[np.ndarray], None] | None = None) -> np.ndarray:
    """Proximal gradient for ``0.5||a g - b||^2 + lam ||g||_1`` with step ``1 / ||a.T a||_2``.

    Plain ISTA by default. ``opts.accelerated`` switches to the monotone
    accelerated variant (MFISTA), which keeps the objective non-increasing
    but needs far fewer iterations on wide, underdetermined problems.

    Stops once a proximal step moves by less than ``opts.tol * max(1, ||g||)``.
    If ``opts.max_iters`` is hit first the last iterate is returned and a
    :class:`MaxIterationsWarning` is emitted. ``callback`` sees every iterate.
    """
    a = _as_matrix(a)
    b = _as_vector(b, a.shape[0])
    if not lam > 0:
        raise ValueError(f"lasso needs lambda > 0, got {lam}")
    opts = opts or SolveOptions(mode="lasso", lam=lam)
    lip = np.linalg.norm(a, 2) ** 2
    g = np.zeros(a.shape[1]) if g0 is None else np.array(g0, dtype=float)
    if lip == 0:
        return np.zeros(a.shape[1])
    step = 1.0 / lip
    atb = a.T @ b
    ata = a.T @ a

    def prox_step(x):
        return soft_threshold(x - step * (ata @ x - atb), step * lam)

    if not opts.accelerated:
        for _ in range(opts.max_iters):
            g_new = prox_step(g)
            delta = np.linalg.norm(g_new - g)
            g = g_new
            if callback is not None:
                callback(g)
            if delta <= opts.tol * max(1.0, np.linalg.norm(g)):
                return g
    else:
        y, t = g.copy(), 1.0
        obj = lasso_objective(a, b, g, lam)
        for _ in range(opts.max_iters):
            z = prox_step(y)
            obj_z = lasso_objective(a, b, z, lam)
            g_prev = g
            if obj_z <= obj:
                g, obj = z, obj_z
            if callback is not None:
                callback(g)
            if np.linalg.norm(z - y) <= opts.tol * max(1.0, np.linalg.norm(g)):
                return g
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = g + (t / t_next) * (z - g) + ((t - 1.0) / t_next) * (g - g_prev)
            t = t_next
    warnings.warn(
        f"lasso did not reach tol={opts.tol} in {opts.max_iters} iterations",
        MaxIterationsWarning,
        stacklevel=2,
    )
    return g


def make_solver(a, opts: SolveOptions) -> Callable[[np.ndarray], np.ndarray]:
    """Solver for ``a g ~ b`` with one matrix and many right-hand sides."""
    a = _as_matrix(a)
    mode = opts.effective_mode
    if mode == "min-norm":
        return min_norm_operator(a)
    if mode == "ridge":
        return ridge_operator(a, opts.lam)
    return lambda b: solve_lasso(a, b, opts.lam, opts)


def solve(a, b, opts: SolveOptions) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_vector(b, a.shape[0])
    return make_solver(a, opts)(b)
