"""Hankel and extended Hankel matrices, prediction blocks, rank checks.

Time is 1-based in docstrings (w(1)..w(T)) and 0-based in code.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSet
from .linalg import numerical_rank, project_onto_rows
from .trajectory import Trajectory


def hankel(w, l: int) -> np.ndarray:
    """``l x (T - l + 1)`` Hankel matrix with entry (i, j) = w(i + j - 1)."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if l < 1:
        raise ValueError(f"number of rows must be >= 1, got {l}")
    if w.size < l:
        raise ValueError(f"series of length {w.size} is too short for {l} Hankel rows")
    return np.lib.stride_tricks.sliding_window_view(w, l).T.copy()


def lag_windows(traj: Trajectory, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressor windows for t = ell+1..T, one column per t.

    Returns ``x_y`` (ell x (T-ell)) holding y(t-ell..t-1) and ``x_u``
    ((ell+1) x (T-ell)) holding u(t-ell..t).
    """
    n = len(traj) - ell
    if n < 1:
        raise ValueError(f"trajectory of length {len(traj)} has no samples beyond lag {ell}")
    x_y = np.array([traj.y[i:i + n] for i in range(ell)]).reshape(ell, n)
    x_u = np.array([traj.u[i:i + n] for i in range(ell + 1)])
    return x_y, x_u


def transformed_series(traj: Trajectory, basis: BasisSet, ell: int | None = None) -> np.ndarray:
    """``K x (T - ell)`` array, row k is s_k(t) = phi^k(x_y(t), x_u(t)) for t = ell+1..T."""
    ell = basis.lag if ell is None else ell
    if basis.lag > ell:
        raise ValueError(f"basis references lag {basis.lag} beyond ell={ell}")
    x_y, x_u = lag_windows(traj, ell)
    if not len(basis):
        return np.empty((0, x_u.shape[1]))
    return basis.evaluate(x_y, x_u)


def extended_hankel(traj: Trajectory, l: int, basis: BasisSet, ell: int | None = None) -> np.ndarray:
    """Stack ``[H_l(u); H_l(y); H_l(s_1); ...; H_l(s_K)]``.

    Each transformed series s_k starts at its first computable sample
    t = ell+1, so column j of H_l(s_k) holds s_k(ell+j..ell+j+l-1). All
    blocks keep the common column count T - ell - l + 1. ``ell`` defaults to
    the basis lag.
    """
    ell = basis.lag if ell is None else ell
    ncols = len(traj) - ell - l + 1
    if ncols < 1:
        raise ValueError(
            f"trajectory of length {len(traj)} too short for l={l} with lag {ell}"
        )
    s = transformed_series(traj, basis, ell)
    blocks = [hankel(traj.u, l)[:, :ncols], hankel(traj.y, l)[:, :ncols]]
    blocks += [hankel(row, l) for row in s]
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class PredictionBlocks:
    """Data matrix ``h_d`` and the future-output row for one-step prediction.

    Column j covers the window [j, j+ell]: rows are u(j..j+ell-1),
    y(j..j+ell-1), u(j+ell), phi(x_y, x_u) and ``y_future`` holds y(j+ell).
    """

    h_d: np.ndarray
    y_future: np.ndarray
    ell: int
    k: int
    y_projected: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.h_d.shape[1]

    @property
    def row_layout(self) -> tuple[tuple[str, int], ...]:
        return (("u-past", self.ell), ("y-past", self.ell), ("u-current", 1), ("phi", self.k))

    def projected(self) -> "PredictionBlocks":
        return replace(self, y_projected=project_onto_rows(self.h_d, self.y_future))


def build_prediction_blocks(traj: Trajectory, ell: int, basis: BasisSet) -> PredictionBlocks:
    if ell < 1:
        raise ValueError(f"lag must be >= 1, got {ell}")
    k = len(basis)
    m = len(traj) - ell
    need = 2 * ell + 2 + k
    if m < need:
        raise ValueError(
            f"need at least {need + ell} samples for ell={ell}, K={k}; got {len(traj)}"
        )
    phi = transformed_series(traj, basis, ell)
    h_d = np.vstack([
        hankel(traj.u, ell)[:, :m],
        hankel(traj.y, ell)[:, :m],
        traj.u[ell:][None, :],
        phi,
    ])
    return PredictionBlocks(h_d=h_d, y_future=traj.y[ell:].copy(), ell=ell, k=k)


@dataclass(frozen=True)
class IdentifiabilityReport:
    observed_rank: int
    expected_rank: int
    rows: int
    cols: int

    @property
    def satisfied(self) -> bool:
        return self.observed_rank == self.expected_rank

    def to_dict(self) -> dict:
        return {"observed_rank": self.observed_rank, "expected_rank": self.expected_rank,
                "rows": self.rows, "cols": self.cols, "satisfied": self.satisfied}


def check_identifiability(traj: Trajectory, l: int, basis: BasisSet, ell: int,
                          tol: float | None = None) -> IdentifiabilityReport:
    """Compare the numerical rank of the extended Hankel matrix with (1+K)l + ell."""
    if l < ell + 1:
        raise ValueError(f"need l >= ell + 1, got l={l}, ell={ell}")
    h = extended_hankel(traj, l, basis, ell)
    return IdentifiabilityReport(
        observed_rank=numerical_rank(h, tol),
        expected_rank=(1 + len(basis)) * l + ell,
        rows=h.shape[0],
        cols=h.shape[1],
    )
