"""Time-dependent interaction kernels a(t, i, j) and communication kernels phi(r).

Every evaluator is vectorised: ``evaluator(t, i, j)`` receives a scalar time and
label arrays that broadcast against each other, and may return an array of any
shape that broadcasts to ``np.broadcast(i, j).shape``.  Returning a smaller shape
(for instance ``(1, m)`` when the weight does not depend on ``i``) lets the
sampler skip redundant work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

Evaluator = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

BUILTIN_NAMES = ("leader", "balanced_cycle", "symmetric_switch", "half_connected", "complete", "two_block")


@dataclass(frozen=True)
class TimeKernel:
    """Interaction kernel a(t, i, j) with structural metadata.

    Attributes
    ----------
    evaluator : callable
        Vectorised ``(t, i, j) -> weight``.  Values are clipped to [0, 1] by
        :meth:`__call__`.
    is_symmetric, is_balanced, is_stationary : bool
        Structural flags.  A symmetric kernel is always balanced.
    period : float or None
        Time period of the signal, if any.
    switch_times : tuple of float
        Breakpoints inside one period (or on the whole time axis when
        ``period`` is None).  The first entry is 0.
    piecewise_constant : bool
        True when the kernel is constant between consecutive breakpoints.
    factor : callable or None
        Optional ``(t, x) -> u`` with ``a(t, i, j) = u(i) u(j)``.  Sampling
        uses it to average the rank-one product without forming the full grid.
    """

    evaluator: Evaluator
    is_symmetric: bool = False
    is_balanced: bool = False
    is_stationary: bool = False
    period: Optional[float] = None
    switch_times: tuple = ()
    piecewise_constant: bool = False
    name: str = "custom"
    factor: Optional[Callable] = None

    def __post_init__(self):
        if self.is_symmetric and not self.is_balanced:
            object.__setattr__(self, "is_balanced", True)
        if self.period is not None and not self.period > 0:
            raise ValueError("period must be positive")
        st = tuple(float(s) for s in self.switch_times)
        if any(b <= a for a, b in zip(st, st[1:])):
            raise ValueError("switch_times must be strictly increasing")
        if st and st[0] != 0.0:
            raise ValueError("switch_times must start at 0")
        object.__setattr__(self, "switch_times", st)

    def __call__(self, t, i, j):
        i = np.asarray(i, dtype=float)
        j = np.asarray(j, dtype=float)
        out = np.asarray(self.evaluator(float(t), i, j), dtype=float)
        return np.clip(np.broadcast_to(out, np.broadcast(i, j).shape), 0.0, 1.0)

    @property
    def dwell_time(self) -> Optional[float]:
        """Minimum gap between consecutive switching instants, or None."""
        if not self.switch_times:
            return None
        pts = list(self.switch_times)
        if self.period is not None:
            pts.append(self.switch_times[0] + self.period)
        if len(pts) < 2:
            return self.period
        return float(min(b - a for a, b in zip(pts, pts[1:])))

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        """Switching instants strictly inside ``(t0, t1)``, sorted."""
        if not self.switch_times and self.period is None:
            return []
        base = list(self.switch_times) or [0.0]
        if self.period is None:
            return [s for s in base if t0 < s < t1]
        P = self.period
        out = []
        k = math.floor(t0 / P)
        while k * P < t1:
            for s in base:
                b = k * P + s
                if t0 < b < t1:
                    out.append(b)
            k += 1
        return sorted(set(out))

    def piece_key(self, t: float):
        """Hashable identifier of the constant piece containing ``t``.

        Only meaningful for piecewise-constant kernels; pieces are half-open
        ``[s_k, s_{k+1})``.
        """
        if self.is_stationary:
            return 0
        base = self.switch_times or (0.0,)
        if self.period is None:
            return int(np.searchsorted(base, t, side="right"))
        tt = t % self.period
        return int(np.searchsorted(base, tt, side="right"))


@dataclass(frozen=True)
class NonlinKernel:
    """Communication kernel phi(r) > 0 with its supremum ``c_phi``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    c_phi: float
    description: str = ""
    is_constant: bool = False

    def __post_init__(self):
        if not self.c_phi > 0:
            raise ValueError("c_phi must be positive")

    def __call__(self, r):
        return self.evaluator(np.asarray(r, dtype=float))


def constant_phi(c: float = 1.0) -> NonlinKernel:
    """phi(r) = c for every r."""
    if not c > 0:
        raise ValueError("constant phi must be positive")
    return NonlinKernel(lambda r: np.full(np.shape(r), c, dtype=float), c_phi=float(c), description=f"constant:{c!r}", is_constant=True)


def cucker_smale_phi() -> NonlinKernel:
    """phi(r) = 1 / (1 + r)^2, decreasing, so c_phi = phi(0) = 1."""
    return NonlinKernel(lambda r: 1.0 / (1.0 + r) ** 2, c_phi=1.0, description="cucker_smale")


def gamma_R(phi: NonlinKernel, R: float, resolution: int = 10_000) -> float:
    """Minimum of phi over [0, 2R].

    Evaluated on a uniform grid and then refined by golden-section search in
    the bracket around the grid minimum.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if phi.is_constant:
        return float(phi.c_phi)
    r = np.linspace(0.0, 2.0 * R, int(resolution))
    vals = np.asarray(phi(r), dtype=float)
    k = int(np.argmin(vals))
    best = float(vals[k])
    lo = r[max(k - 1, 0)]
    hi = r[min(k + 1, len(r) - 1)]
    f = lambda s: float(phi(np.array(s)))
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if b - a < 1e-14 * max(1.0, R):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return min(best, fc, fd, f(lo), f(hi))


# built-in kernels


def _leader(T: float, n: int) -> TimeKernel:
    cut = (n - 1) * T / n

    def ev(t, i, j):
        tt = t % T
        if tt >= cut:
            return np.zeros((1,) * np.ndim(j))
        lo, hi = tt / T, (tt + 1.0) / T
        centre = tt / T + 1.0 / (2 * n)
        w = 1.0 - 2.0 * n * np.abs(j - centre)
        w = np.where((j >= lo) & (j <= hi), w, 0.0)
        return np.maximum(w, 0.0)

    return TimeKernel(ev, period=T, switch_times=(0.0, cut), name="leader")


def _xi(s):
    s = s - np.floor(s)
    return np.where(s <= 0.25, 1.0 - 4.0 * s, 0.0)


def _balanced_cycle() -> TimeKernel:
    return TimeKernel(lambda t, i, j: _xi(i - j), is_balanced=True, is_stationary=True, name="balanced_cycle")


def _symmetric_switch(T: float, n: int) -> TimeKernel:
    cut = (n - 1) * T / n

    def inside(t, x):
        tt = t % T
        lo = tt / T
        hi = lo + 1.0 / n
        if tt < cut:
            return ((x >= lo) & (x <= hi)).astype(float)
        return ((x >= lo) | (x <= hi - 1.0)).astype(float)

    def ev(t, i, j):
        return inside(t, i) * inside(t, j)

    return TimeKernel(ev, is_symmetric=True, period=T, switch_times=(0.0, cut), name="symmetric_switch",
                      factor=inside)


def _half_band(i, j):
    return ((i <= 0.5) & (j >= i / 2) & (j <= 2 * i)) | ((i >= 0.5) & (j >= 0.5))


def _half_connected() -> TimeKernel:
    # symmetric closure of the band + block formula
    ev = lambda t, i, j: (_half_band(i, j) | _half_band(j, i)).astype(float)
    return TimeKernel(ev, is_symmetric=True, is_stationary=True, name="half_connected")


def _complete() -> TimeKernel:
    return TimeKernel(lambda t, i, j: np.ones((1,) * max(np.ndim(i), np.ndim(j))),
                      is_symmetric=True, is_stationary=True, name="complete")


def _two_block() -> TimeKernel:
    ev = lambda t, i, j: ((i < 0.5) == (j < 0.5)).astype(float)
    return TimeKernel(ev, is_symmetric=True, is_stationary=True, name="two_block")


def zero_kernel() -> TimeKernel:
    """a = 0 everywhere."""
    return TimeKernel(lambda t, i, j: np.zeros((1,) * max(np.ndim(i), np.ndim(j))),
                      is_symmetric=True, is_stationary=True, name="zero")


def builtin_kernel(name: str, T: float = 10.0, n: int = 10) -> TimeKernel:
    """Return one of the built-in kernels.

    Parameters
    ----------
    name : str
        One of ``leader``, ``balanced_cycle``, ``symmetric_switch``,
        ``half_connected``, ``complete``, ``two_block``.
    T : float
        Period of the time-dependent kernels.
    n : int
        Number of leader/switch phases per period.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if name == "leader":
        return _leader(float(T), n)
    if name == "symmetric_switch":
        return _symmetric_switch(float(T), n)
    table = {
        "balanced_cycle": _balanced_cycle,
        "half_connected": _half_connected,
        "complete": _complete,
        "two_block": _two_block,
        "zero": zero_kernel,
    }
    if name not in table:
        raise ValueError(f"unknown kernel {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")
    return table[name]()


def piecewise_label_kernel(weights: np.ndarray) -> Evaluator:
    """Evaluator of the piecewise-constant graphon attached to an N x N matrix."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]

    def ev(t, i, j):
        ii = np.minimum(np.floor(np.asarray(i) * n).astype(np.intp), n - 1)
        jj = np.minimum(np.floor(np.asarray(j) * n).astype(np.intp), n - 1)
        return w[np.clip(ii, 0, n - 1), np.clip(jj, 0, n - 1)]

    return ev


def switching_kernel(phases: Sequence[np.ndarray], durations: Sequence[float], periodic: bool = True,
                     name: str = "switching") -> TimeKernel:
    """Piecewise-constant signal cycling through label-piecewise-constant matrices.

    Phase ``k`` is active on ``[s_k, s_k + durations[k])``.  With
    ``periodic=False`` the last phase stays active forever.
    """
    if len(phases) != len(durations) or not phases:
        raise ValueError("phases and durations must be non-empty and of equal length")
    if any(not d > 0 for d in durations):
        raise ValueError("durations must be positive")
    mats = [np.clip(np.asarray(p, dtype=float), 0.0, 1.0) for p in phases]
    evs = [piecewise_label_kernel(m) for m in mats]
    starts = np.concatenate([[0.0], np.cumsum(durations)[:-1]])
    total = float(np.sum(durations))
    sym = all(np.array_equal(m, m.T) for m in mats)
    bal = all(np.allclose(m.sum(0), m.sum(1), atol=1e-12) for m in mats)
    if len(mats) == 1:
        return TimeKernel(evs[0], is_symmetric=sym, is_balanced=bal, is_stationary=True,
                          piecewise_constant=True, name=name)

    def ev(t, i, j):
        tt = t % total if periodic else t
        k = int(np.searchsorted(starts, tt, side="right")) - 1
        return evs[min(max(k, 0), len(evs) - 1)](t, i, j)

    return TimeKernel(ev, is_symmetric=sym, is_balanced=bal, period=total if periodic else None,
                      switch_times=tuple(starts), piecewise_constant=True, name=name)


def load_grid_kernel(path, block_duration: float = 1.0, periodic: bool = True) -> TimeKernel:
    """Read a kernel from a plain-text grid file.

    The header is ``N <int> T_SAMPLES <int>``, followed by ``T_SAMPLES`` blocks
    of N x N whitespace-separated weights.  Each block is held for
    ``block_duration`` time units.
    """
    text = Path(path).read_text()
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty grid file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "N" or head[2] != "T_SAMPLES":
        raise ValueError(f"{path}: header must be 'N <int> T_SAMPLES <int>', got {lines[0]!r}")
    n, ts = int(head[1]), int(head[3])
    if n < 1 or ts < 1:
        raise ValueError(f"{path}: N and T_SAMPLES must be positive")
    vals = np.array(" ".join(lines[1:]).split(), dtype=float)
    if vals.size != ts * n * n:
        raise ValueError(f"{path}: expected {ts * n * n} weights, found {vals.size}")
    if np.any(vals < 0) or np.any(vals > 1):
        raise ValueError(f"{path}: weights must lie in [0, 1]")
    blocks = list(vals.reshape(ts, n, n))
    return switching_kernel(blocks, [block_duration] * ts, periodic=periodic, name=f"file:{Path(path).name}")
