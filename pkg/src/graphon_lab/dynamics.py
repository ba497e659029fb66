"""Fixed-step RK4 integration of the semi-discretised graphon dynamics.

The system is

    dx_i/dt = (1/N) sum_j a_ij(t) phi(|x_i - x_j|) (x_j - x_i),

with the adjacency matrix resampled from the kernel at every stage time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import core
from .discretize import AdjacencyMatrix, State, sample_adjacency
from .kernel import NonlinKernel, TimeKernel


class IntegrationError(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, time: float, message: str = "non-finite state"):
        super().__init__(f"{message} at t = {time!r}")
        self.time = time


@dataclass(frozen=True)
class SolverConfig:
    """Integrator settings.

    Attributes
    ----------
    dt : float
        Maximum step size.  Steps inside a switching segment are shrunk
        uniformly so that segments are covered exactly.
    t_end : float
    record_stride : int
        Record every ``record_stride`` steps (plus the initial and final time).
    align_to_switches : bool
        Snap step boundaries to the kernel's switching instants.
    quadrature_order : int
        Midpoints per cell used when sampling the kernel.
    track_scrambling : bool
        Accumulate the time integral of the scrambling coefficient (Simpson
        rule on the RK stage samples).
    tolerance_factor : float
        Constant C of the integrator tolerance C * dt^4 * t.
    """

    dt: float
    t_end: float
    record_stride: int = 1
    align_to_switches: bool = True
    quadrature_order: int = 4
    track_scrambling: bool = False
    tolerance_factor: float = 10.0

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")

    def tolerance(self, t):
        """Integrator error allowance 10 dt^4 t used by the invariant checks."""
        return self.tolerance_factor * self.dt ** 4 * np.asarray(t, dtype=float)


# state functionals


def _pos(x) -> np.ndarray:
    p = x.positions if isinstance(x, State) else np.asarray(x, dtype=float)
    return p[:, None] if p.ndim == 1 else p


def _check_weights(v, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,) or np.any(v <= 0):
        raise ValueError("weights must be a strictly positive vector of length N")
    if abs(v.mean() - 1.0) > 1e-9:
        raise ValueError("weights must satisfy (1/N) sum v_i = 1")
    return v


def diameter(x) -> float:
    """Largest pairwise Euclidean distance."""
    p = _pos(x)
    if p.shape[0] < 2:
        return 0.0
    return float(core.pairwise_dist(p).max())


def std_dev(x) -> float:
    """sqrt((1/(2N^2)) sum_ij |x_i - x_j|^2), i.e. the L2 distance to the barycenter."""
    p = _pos(x)
    c = p - p.mean(axis=0)
    return float(math.sqrt(max(np.mean(np.sum(c * c, axis=1)), 0.0)))


def weighted_std_dev(x, v) -> float:
    """sqrt((1/(2N^2)) sum_ij v_i v_j |x_i - x_j|^2) for normalised weights v."""
    p = _pos(x)
    v = _check_weights(v, p.shape[0])
    if np.all(v == 1.0):
        return std_dev(p)
    n = p.shape[0]
    # sum_ij v_i v_j |x_i - x_j|^2 = 2 (sum v)(sum v |x|^2) - 2 |sum v x|^2
    sv = v.sum()
    c = p - (v @ p) / sv
    q = sv * float(v @ np.sum(c * c, axis=1))
    return float(math.sqrt(max(q, 0.0) / n ** 2))


def barycenter(x) -> np.ndarray:
    return _pos(x).mean(axis=0)


def weighted_barycenter(x, v) -> np.ndarray:
    p = _pos(x)
    v = _check_weights(v, p.shape[0])
    if np.all(v == 1.0):
        return barycenter(p)
    return (v @ p) / p.shape[0]


def linf_norm(x) -> float:
    """max_i |x_i|."""
    p = _pos(x)
    return float(np.sqrt(np.max(np.sum(p * p, axis=1))))


def effective_weights(a, phi: NonlinKernel, x) -> np.ndarray:
    """a_ij * phi(|x_i - x_j|)."""
    w = a.weights if isinstance(a, AdjacencyMatrix) else np.asarray(a, dtype=float)
    if phi.is_constant:
        return w * phi.c_phi if phi.c_phi != 1.0 else w
    return w * phi(core.pairwise_dist(_pos(x)))


def drift(a, phi: NonlinKernel, x) -> np.ndarray:
    """Velocity (1/N) sum_j a_ij phi(|x_i - x_j|)(x_j - x_i), shape (N, d)."""
    p = _pos(x)
    w = a.weights if isinstance(a, AdjacencyMatrix) else np.asarray(a, dtype=float)
    if w.shape != (p.shape[0], p.shape[0]):
        raise ValueError(f"adjacency {w.shape} does not match {p.shape[0]} agents")
    return core.laplacian_drift(effective_weights(w, phi, p), p)


def scrambling_value(w) -> float:
    from .spectral import scrambling
    return scrambling(w)


@dataclass
class Trajectory:
    """Recorded solution.

    Attributes
    ----------
    times : ndarray, shape (K,)
    positions : ndarray, shape (K, N, d)
    diagnostics : dict of ndarray
        ``diameter``, ``std_dev``, ``linf_norm``, ``barycenter`` (K x d) and,
        when weights were given, ``weighted_std_dev`` and
        ``weighted_barycenter``.  ``eta_integral`` holds the running integral
        of the scrambling coefficient when it was tracked.
    """

    times: np.ndarray
    positions: np.ndarray
    diagnostics: dict
    config: Optional[SolverConfig] = None
    kernel_name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def dim(self) -> int:
        return self.positions.shape[2]

    @property
    def states(self) -> list:
        n, d = self.n, self.dim
        return [State(n, d, p) for p in self.positions]

    def tolerance(self) -> np.ndarray:
        if self.config is None:
            return np.zeros_like(self.times)
        return self.config.tolerance(self.times)

    def write_csv(self, path) -> None:
        """Long format ``t,agent,coord,value``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "agent", "coord", "value"])
            for t, p in zip(self.times, self.positions):
                ts = f"{t:.17g}"
                for i in range(p.shape[0]):
                    for k in range(p.shape[1]):
                        w.writerow([ts, i, k, f"{p[i, k]:.17g}"])

    def write_diagnostics_csv(self, path) -> None:
        d = self.diagnostics
        wsd = d.get("weighted_std_dev")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "diameter", "std_dev", "weighted_std_dev", "linf_norm"]
                       + [f"bary_{k}" for k in range(self.dim)])
            for k, t in enumerate(self.times):
                row = [t, d["diameter"][k], d["std_dev"][k], wsd[k] if wsd is not None else float("nan"),
                       d["linf_norm"][k], *d["barycenter"][k]]
                w.writerow([f"{float(v):.17g}" for v in row])


class _Sampler:
    """Caches adjacency samples according to the kernel's time structure."""

    def __init__(self, kernel: TimeKernel, n: int, order: int):
        self.kernel, self.n, self.order = kernel, n, order
        self.cache: dict = {}

        self.eta_cache: dict = {}

    def key(self, t: float):
        k = self.kernel
        if k.is_stationary:
            return ("s",)
        if k.piecewise_constant:
            return ("p", k.piece_key(t))
        return ("t", t)

    def __call__(self, t: float) -> np.ndarray:
        key = self.key(t)
        hit = self.cache.get(key)
        if hit is None:
            hit = sample_adjacency(self.kernel, t, self.n, self.order).weights
            if key[0] == "t" and len(self.cache) > 4:
                self.cache.clear()
            self.cache[key] = hit
        return hit

    def eta(self, t: float) -> float:
        key = self.key(t)
        hit = self.eta_cache.get(key)
        if hit is None:
            hit = scrambling_value(self(t))
            if key[0] == "t" and len(self.eta_cache) > 4:
                self.eta_cache.clear()
            self.eta_cache[key] = hit
        return hit


def _aligned(kernel: TimeKernel, cfg: SolverConfig) -> bool:
    return bool(cfg.align_to_switches and not kernel.is_stationary
                and (kernel.switch_times or kernel.period is not None))


def step_grid(kernel: TimeKernel, cfg: SolverConfig) -> list:
    """Segments ``(b0, b1, m)``: m equal steps covering ``[b0, b1]``."""
    if _aligned(kernel, cfg):
        cuts = [0.0] + kernel.breakpoints(0.0, cfg.t_end) + [float(cfg.t_end)]
    else:
        cuts = [0.0, float(cfg.t_end)]
    segs = []
    for b0, b1 in zip(cuts, cuts[1:]):
        m = max(1, math.ceil((b1 - b0) / cfg.dt - 1e-9))
        segs.append((b0, b1, m))
    return segs


def _edge(b: float) -> float:
    return 1e-10 * max(1.0, abs(b))


def integrate(kernel: TimeKernel, phi: NonlinKernel, x0, cfg: SolverConfig, weights=None) -> Trajectory:
    """Integrate from ``x0`` over ``[0, cfg.t_end]`` with classical RK4.

    Parameters
    ----------
    kernel : TimeKernel
    phi : NonlinKernel
    x0 : State or array
    cfg : SolverConfig
    weights : array, optional
        Normalised positive weights (e.g. a Perron vector) for the weighted
        deviation and barycenter diagnostics.

    Raises
    ------
    IntegrationError
        If the state becomes non-finite.
    """
    x = np.array(_pos(x0), dtype=float, copy=True)
    if not np.all(np.isfinite(x)):
        raise IntegrationError(0.0, "non-finite initial state")
    n, d = x.shape
    if weights is not None:
        weights = _check_weights(weights, n)
    sampler = _Sampler(kernel, n, cfg.quadrature_order)
    aligned = _aligned(kernel, cfg)

    def f(t, y):
        # overflow surfaces as a non-finite state and is reported below
        with np.errstate(over="ignore", invalid="ignore"):
            return drift(sampler(t), phi, y)

    times, states, etas = [0.0], [x.copy()], [0.0]
    eta_int = 0.0
    step = 0
    t = 0.0
    segs = step_grid(kernel, cfg)
    for si, (b0, b1, m) in enumerate(segs):
        h = (b1 - b0) / m
        for k in range(m):
            t = b0 + k * h
            t_end_step = b1 if k == m - 1 else b0 + (k + 1) * h
            ts = t + _edge(t) if (k == 0 and aligned) else t
            te = t_end_step - _edge(t_end_step) if (k == m - 1 and aligned) else t_end_step
            tm = t + 0.5 * h
            k1 = f(ts, x)
            k2 = f(tm, x + 0.5 * h * k1)
            k3 = f(tm, x + 0.5 * h * k2)
            k4 = f(te, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if cfg.track_scrambling:
                eta_int += (h / 6.0) * (sampler.eta(ts) + 4.0 * sampler.eta(tm) + sampler.eta(te))
            step += 1
            if not np.all(np.isfinite(x)):
                raise IntegrationError(t_end_step)
            last = si == len(segs) - 1 and k == m - 1
            if step % cfg.record_stride == 0 or last:
                times.append(t_end_step)
                states.append(x.copy())
                etas.append(eta_int)
        t = b1

    pos = np.stack(states)
    diag = {
        "diameter": np.array([diameter(p) for p in pos]),
        "std_dev": np.array([std_dev(p) for p in pos]),
        "linf_norm": np.array([linf_norm(p) for p in pos]),
        "barycenter": np.array([barycenter(p) for p in pos]),
    }
    if weights is not None:
        diag["weighted_std_dev"] = np.array([weighted_std_dev(p, weights) for p in pos])
        diag["weighted_barycenter"] = np.array([weighted_barycenter(p, weights) for p in pos])
    if cfg.track_scrambling:
        diag["eta_integral"] = np.array(etas)
    meta = {"steps": step, "backend": getattr(core, "BACKEND", "?"), "n": n, "dim": d}
    if weights is not None:
        meta["weights"] = weights
    return Trajectory(np.array(times), pos, diag, cfg, kernel.name, meta)
