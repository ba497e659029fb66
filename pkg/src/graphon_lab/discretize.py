"""Semi-discretisation of graphon models and the piecewise-constant lift.

Labels are partitioned into half-open cells ``[(i-1)/n, i/n)`` with the last
cell closed.  Cell averages are approximated with an m-point midpoint rule per
axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .kernel import TimeKernel, piecewise_label_kernel


@dataclass(frozen=True)
class AdjacencyMatrix:
    """N x N sampled weights, all in [0, 1]."""

    n: int
    weights: np.ndarray
    sample_time: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape != (self.n, self.n) or self.n < 1:
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_array(cls, w, sample_time: float = 0.0) -> "AdjacencyMatrix":
        w = np.asarray(w, dtype=float)
        return cls(w.shape[0], w, sample_time)


@dataclass(frozen=True)
class State:
    """Positions of N agents in R^d."""

    n: int
    dim: int
    positions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if p.shape != (self.n, self.dim):
            raise ValueError(f"positions must be {self.n}x{self.dim}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", p)

    @classmethod
    def from_array(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        return cls(x.shape[0], x.shape[1], x)


def cell_nodes(n: int, m: int) -> np.ndarray:
    """Midpoint nodes, shape (n, m): node s of cell k is (k + (s + 1/2)/m) / n."""
    k = np.arange(n)[:, None]
    s = (np.arange(m)[None, :] + 0.5) / m
    return (k + s) / n


def _cell_average(kernel: TimeKernel, t: float, n: int, m: int) -> np.ndarray:
    p = cell_nodes(n, m).ravel()
    if kernel.factor is not None:
        u = np.clip(np.asarray(kernel.factor(float(t), p), dtype=float), 0.0, 1.0)
        ubar = u.reshape(n, m).mean(axis=1)
        return np.outer(ubar, ubar)
    raw = np.asarray(kernel.evaluator(float(t), p[:, None], p[None, :]), dtype=float)
    raw = np.clip(raw, 0.0, 1.0)
    if raw.ndim < 2:
        raw = raw.reshape((1,) * (2 - raw.ndim) + raw.shape)
    ri, rj = raw.shape
    if ri == 1 and rj == 1:
        return np.full((n, n), raw[0, 0])
    if ri == 1:
        row = raw.reshape(n, m).mean(axis=1)
        return np.broadcast_to(row[None, :], (n, n)).copy()
    if rj == 1:
        col = raw.reshape(n, m).mean(axis=1)
        return np.broadcast_to(col[:, None], (n, n)).copy()
    blocks = raw.reshape(n, m, n, m)
    out = blocks.mean(axis=(1, 3))
    # constant cells come back exactly (the mean of m^2 equal floats may not)
    lo = blocks.min(axis=(1, 3))
    flat = lo == blocks.max(axis=(1, 3))
    out[flat] = lo[flat]
    return out


def sample_adjacency(kernel: TimeKernel, t: float, n: int, quadrature_order: int = 4,
                     force_unit_diagonal: bool = False) -> AdjacencyMatrix:
    """Cell-average the kernel at time ``t`` on an n x n grid.

    Parameters
    ----------
    kernel : TimeKernel
    t : float
    n : int
        Number of agents.
    quadrature_order : int
        Midpoints per cell and axis.
    force_unit_diagonal : bool
        Set a_ii = 1 after sampling (needed by the diagonal-dependent form of
        the scrambling coefficient).
    """
    if n < 1 or quadrature_order < 1:
        raise ValueError("n and quadrature_order must be positive")
    w = np.clip(_cell_average(kernel, t, int(n), int(quadrature_order)), 0.0, 1.0)
    if force_unit_diagonal:
        np.fill_diagonal(w, 1.0)
    return AdjacencyMatrix(int(n), w, float(t))


def sample_state(profile: Callable[[np.ndarray], np.ndarray], n: int, quadrature_order: int = 16) -> State:
    """Cell averages of a label profile ``i -> x0(i)``.

    ``profile`` receives an array of labels and returns either one value per
    label or an array of shape (labels, d).
    """
    p = cell_nodes(int(n), int(quadrature_order))
    vals = np.asarray(profile(p.ravel()), dtype=float)
    if vals.ndim == 0:
        vals = np.full(p.size, float(vals))
    if vals.ndim == 1:
        vals = vals[:, None]
    x = vals.reshape(n, quadrature_order, -1).mean(axis=1)
    return State(int(n), x.shape[1], x)


def lift_piecewise(matrix: AdjacencyMatrix) -> TimeKernel:
    """Stationary piecewise-constant graphon with value ``weights[i_cell, j_cell]``."""
    w = np.array(matrix.weights, dtype=float, copy=True)
    w.setflags(write=False)
    return TimeKernel(piecewise_label_kernel(w), is_symmetric=bool(np.array_equal(w, w.T)),
                      is_balanced=bool(np.allclose(w.sum(0), w.sum(1), atol=1e-12)),
                      is_stationary=True, piecewise_constant=True, name="lifted")


def sin2_profile(i):
    """x0(i) = sin^2(4i)."""
    return np.sin(4.0 * np.asarray(i)) ** 2


def write_matrix_csv(path, a: AdjacencyMatrix) -> None:
    np.savetxt(path, a.weights, delimiter=",", fmt="%.17g")


def read_matrix_csv(path, sample_time: float = 0.0) -> AdjacencyMatrix:
    w = np.loadtxt(path, delimiter=",", ndmin=2)
    return AdjacencyMatrix.from_array(w, sample_time)


def write_state_csv(path, x: State) -> None:
    np.savetxt(path, x.positions, delimiter=",", fmt="%.17g")


def read_state_csv(path) -> State:
    x = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    return State.from_array(x)
