from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonFiniteError


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Paired SISO input/output samples, u(1..T) and y(1..T)."""

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if u.shape != y.shape:
            raise ValueError(f"u and y differ in length ({u.size} vs {y.size})")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise NonFiniteError("trajectory contains non-finite samples")
        u.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.u.size

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return np.array_equal(self.u, other.u) and np.array_equal(self.y, other.y)

    def __getitem__(self, s: slice) -> "Trajectory":
        return Trajectory(self.u[s], self.y[s])


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(traj: Trajectory, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "u", "y"])
    for t, (u, y) in enumerate(zip(traj.u, traj.y), start=1):
        w.writerow([t, _fmt(u), _fmt(y)])


def write_trajectory(traj: Trajectory, dest) -> None:
    """Write ``t,u,y`` CSV to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(traj, dest)
        return
    path = Path(dest)
    try:
        with path.open("w", newline="") as fh:
            _write_rows(traj, fh)
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "u", "y"]:
            raise ValueError(f"{path}: expected header 't,u,y', got {reader.fieldnames}")
        u, y = [], []
        for i, row in enumerate(reader, start=1):
            try:
                t = int(row["t"])
                u.append(float(row["u"]))
                y.append(float(row["y"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed row {i}: {row}") from exc
            if t != i:
                raise ValueError(f"{path}: row {i} has t={t}; samples must be 1-based and consecutive")
    return Trajectory(u, y)
