"""Connectivity functionals of sampled interaction matrices.

Scrambling coefficient, graph-Laplacians, algebraic connectivity (plain and
Perron-weighted), strongly connected components, Perron weights, and the
time-window persistence functionals built on them.

All inner products use the (1/N)-weighted convention, so the Laplacian is
L = (1/N)(D - A) with D_ii = sum_j a_ij.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import core
from .discretize import AdjacencyMatrix, sample_adjacency
from .kernel import NonlinKernel, TimeKernel

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _w(a) -> np.ndarray:
    if isinstance(a, AdjacencyMatrix):
        return a.weights
    w = np.asarray(a, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    return w


@dataclass(frozen=True)
class LaplacianMatrix:
    """Scaled Laplacian entries ``(1/N)(D - A)``; rows sum to zero."""

    n: int
    entries: np.ndarray

    @classmethod
    def from_array(cls, m) -> "LaplacianMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m.shape[0], m)


def _lap(L) -> np.ndarray:
    return L.entries if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=float)


# scrambling


def scrambling(a) -> float:
    """Scrambling coefficient min_{i,j} (1/N) sum_k min(a_ik, a_jk).

    Identical rows are collapsed first; a duplicated row contributes its
    self-overlap, evaluated by the same reduction as distinct pairs, so the
    result does not depend on which rows happen to coincide.
    """
    w = np.ascontiguousarray(_w(a), dtype=float)
    n = w.shape[0]
    if n == 1:
        return float(w[0, 0])
    if np.all(w == w[0]):
        return float(core.self_overlap(w[0], n))
    uniq, counts = np.unique(w, axis=0, return_counts=True)
    best = math.inf
    for r in uniq[counts > 1]:
        best = min(best, float(core.self_overlap(r, n)))
    return float(core.pair_overlap_min(np.ascontiguousarray(uniq), float(n), best))


def scrambling_offdiag_form(a) -> float:
    """Equivalent form for unit-diagonal matrices.

    min_{i != j} (1/N) (sum_{k not in {i,j}} min(a_ik, a_jk) + a_ij + a_ji).
    Equals :func:`scrambling` (up to rounding) whenever every a_ii = 1.
    """
    w = _w(a)
    n = w.shape[0]
    if n == 1:
        return float(w[0, 0])
    best = math.inf
    for i in range(n - 1):
        m = np.minimum(w[i][None, :], w[i + 1:])
        s = m.sum(axis=1) - m[:, i] - m[np.arange(m.shape[0]), np.arange(i + 1, n)]
        s = s + w[i, i + 1:] + w[i + 1:, i]
        best = min(best, float(s.min()) / n)
    return best


def stochastic_reparam(a) -> np.ndarray:
    """Diagonal replaced by N - sum_{k != i} a_ik; off-diagonals unchanged.

    Every row of the result sums to N.  The diagonal may exceed 1.
    """
    w = np.array(_w(a), dtype=float, copy=True)
    n = w.shape[0]
    off = w.sum(axis=1) - np.diag(w)
    np.fill_diagonal(w, n - off)
    return w


# Laplacians


def graph_laplacian(a) -> LaplacianMatrix:
    """L = (1/N)(D - A)."""
    w = _w(a)
    n = w.shape[0]
    L = -w / n
    L[np.diag_indices(n)] += w.sum(axis=1) / n
    return LaplacianMatrix(n, L)


def nonlinear_laplacian(a, phi: NonlinKernel, x) -> LaplacianMatrix:
    """Laplacian of the effective weights a_ij phi(|x_i - x_j|)."""
    from .dynamics import effective_weights

    return graph_laplacian(effective_weights(_w(a), phi, x))


def _householder_deflate(s: np.ndarray) -> np.ndarray:
    """Restriction of a symmetric matrix to the mean-zero subspace.

    H is the reflection sending e_1 to 1/sqrt(N); the trailing block of H S H
    is S expressed in an orthonormal basis of the complement of the constants.
    """
    n = s.shape[0]
    u = -np.full(n, 1.0 / math.sqrt(n))
    u[0] += 1.0
    beta = float(u @ u)
    if beta == 0.0:
        return s[1:, 1:].copy()
    su = s @ u
    # H S H = S - (2/b)(u su^T + su u^T) + (4/b^2)(u^T S u) u u^T
    m = s - (2.0 / beta) * (np.outer(u, su) + np.outer(su, u)) + (4.0 / beta ** 2) * float(u @ su) * np.outer(u, u)
    b = m[1:, 1:]
    return 0.5 * (b + b.T)


def projected_spectrum(L) -> np.ndarray:
    """Eigenvalues of the symmetrised Laplacian on the mean-zero subspace, ascending."""
    m = _lap(L)
    n = m.shape[0]
    if n < 2:
        return np.zeros(0)
    s = 0.5 * (m + m.T)
    b = _householder_deflate(s)
    scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
    ev = core.jacobi_eigenvalues(np.ascontiguousarray(b), JACOBI_TOL * scale, JACOBI_MAX_SWEEPS)
    return np.sort(np.asarray(ev))


def lambda2(L) -> float:
    """Algebraic connectivity: infimum of <L y, y> / <y, y> over mean-zero y.

    Only the symmetric part of L enters the quadratic form.  Returns 0 for a
    single agent (no mean-zero directions).

    Raises
    ------
    RuntimeError
        If the Jacobi iteration does not converge in 100 sweeps.
    """
    ev = projected_spectrum(L)
    return float(ev[0]) if ev.size else 0.0


def lambda2_weighted(L, v) -> float:
    """lambda2 of the row-rescaled matrix (L_v)_ij = v_i L_ij."""
    m = _lap(L)
    vals = v.values if isinstance(v, PerronVector) else np.asarray(v, dtype=float)
    if np.all(vals == 1.0):
        return lambda2(m)
    return lambda2(vals[:, None] * m)


def in_degree(a) -> np.ndarray:
    """d_i = (1/N) sum_j a_ij."""
    return _w(a).mean(axis=1)


# strongly connected components


@dataclass(frozen=True)
class SccDecomposition:
    component_of: np.ndarray
    components: list
    is_disjoint_union: bool
    delta: float

    @property
    def n_components(self) -> int:
        return len(self.components)


def _tarjan(adj: list) -> list:
    """Iterative Tarjan; returns components as lists of vertices."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list = []
    comps: list = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            nbrs = adj[v]
            if pos < len(nbrs):
                work[-1] = (v, pos + 1)
                w = nbrs[pos]
                if index[w] == -1:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def scc_decompose(a, threshold: float = 1e-12) -> SccDecomposition:
    """Strongly connected components of the digraph i -> j iff a_ij > threshold.

    Components are returned sorted by their smallest member.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    w = _w(a)
    n = w.shape[0]
    mask = w > threshold
    adj = [list(np.flatnonzero(mask[i])) for i in range(n)]
    comps = sorted((sorted(int(v) for v in c) for c in _tarjan(adj)), key=lambda c: c[0])
    comp_of = np.empty(n, dtype=int)
    for k, c in enumerate(comps):
        comp_of[c] = k
    cross = mask & (comp_of[:, None] != comp_of[None, :])
    delta = math.inf
    for c in comps:
        sub = w[np.ix_(c, c)]
        delta = min(delta, float(sub.mean(axis=1).min()))
    return SccDecomposition(comp_of, comps, not bool(cross.any()), float(delta))


# Perron weights


@dataclass(frozen=True)
class PerronVector:
    values: np.ndarray
    residual: float
    method: str = "fixed_point"
    iterations: int = 0


def _nullspace_gepp(m: np.ndarray) -> np.ndarray:
    """Null vector of a rank-deficient matrix by Gaussian elimination.

    Partial pivoting reduces m to upper-triangular U; the column with the
    smallest pivot is the free variable (set to 1) and the remaining
    triangular system is back-substituted.
    """
    u = np.array(m, dtype=float, copy=True)
    n = u.shape[0]
    for c in range(n - 1):
        p = c + int(np.argmax(np.abs(u[c:, c])))
        if p != c:
            u[[c, p]] = u[[p, c]]
        if u[c, c] == 0.0:
            continue
        f = u[c + 1:, c] / u[c, c]
        u[c + 1:, c:] -= f[:, None] * u[c, c:]
        u[c + 1:, c] = 0.0
    k = int(np.argmin(np.abs(np.diag(u))))
    keep = [i for i in range(n) if i != k]
    r = u[np.ix_(keep, keep)]
    rhs = -u[keep, k]
    x = np.zeros(n - 1)
    for i in range(n - 2, -1, -1):
        x[i] = (rhs[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    v = np.empty(n)
    v[k] = 1.0
    v[keep] = x
    return v


def perron_residual(a, v) -> float:
    """||L^T v||_inf for the scaled Laplacian of ``a``."""
    L = graph_laplacian(a).entries
    return float(np.max(np.abs(L.T @ np.asarray(v, dtype=float))))


def perron_vector(a, dec: Optional[SccDecomposition] = None, tol: float = 1e-12,
                  max_iter: int = 100_000) -> PerronVector:
    """Positive left null vector of the Laplacian, normalised per component.

    On each component the fixed point of v_i <- sum_j a_ji v_j / sum_j a_ij
    is computed with the component mean fixed to 1; if the iteration has not
    converged after ``max_iter`` passes, a dense elimination solve of L^T v = 0
    is used instead.

    Raises
    ------
    ValueError
        If the components are not a disjoint union, a row has zero in-degree,
        or the solution is not strictly positive.
    """
    w = _w(a)
    n = w.shape[0]
    if dec is None:
        dec = scc_decompose(w)
    if not dec.is_disjoint_union:
        raise ValueError("Perron weights need a disjoint union of strongly connected components")
    v = np.empty(n)
    method = "fixed_point"
    total_it = 0
    for comp in dec.components:
        idx = np.asarray(comp)
        sub = np.ascontiguousarray(w[np.ix_(idx, idx)])
        if np.any(sub.sum(axis=1) <= 0):
            raise ValueError(f"zero in-degree inside component {comp}")
        vc, ok, it = core.perron_iterate(sub, tol, max_iter)
        total_it += int(it)
        if not ok:
            lt = graph_laplacian(sub).entries.T
            vc = _nullspace_gepp(lt)
            method = "elimination"
        vc = np.asarray(vc, dtype=float)
        vc = vc / vc.mean()
        if not np.all(vc > 0):
            raise ValueError("Perron vector is not strictly positive; connectivity is numerically broken")
        v[idx] = vc
    return PerronVector(v, perron_residual(w, v), method, total_it)


# time windows and persistence


def _cells(kernel: TimeKernel, t0: float, t1: float, extra=(), step: Optional[float] = None) -> np.ndarray:
    pts = {float(t0), float(t1)}
    pts.update(float(b) for b in kernel.breakpoints(t0, t1))
    pts.update(float(e) for e in extra if t0 <= e <= t1)
    if step is not None and not kernel.is_stationary and not kernel.piecewise_constant:
        k = max(1, int(math.ceil((t1 - t0) / step - 1e-9)))
        pts.update(float(t0 + (t1 - t0) * j / k) for j in range(k + 1))
    edges = np.array(sorted(pts))
    keep = np.concatenate([[True], np.diff(edges) > 1e-12 * max(1.0, abs(t1))])
    return edges[keep]


class _MatrixCache:
    def __init__(self, kernel: TimeKernel, n: int, order: int):
        self.kernel, self.n, self.order = kernel, n, order
        self.memo: dict = {}

    def __call__(self, t: float) -> np.ndarray:
        k = self.kernel
        if k.is_stationary:
            key = 0
        elif k.piecewise_constant:
            key = ("p", k.piece_key(t))
        else:
            return sample_adjacency(k, t, self.n, self.order).weights
        if key not in self.memo:
            self.memo[key] = sample_adjacency(k, t, self.n, self.order).weights
        return self.memo[key]


def window_average_adjacency(kernel: TimeKernel, t: float, tau: float, n: int, time_quadrature: int = 8,
                             quadrature_order: int = 4) -> np.ndarray:
    """(1/tau) * integral of A(s) over [t, t + tau].

    One evaluation per piece for piecewise-constant or stationary kernels.
    Kernels that move continuously in time use the composite midpoint rule
    on cells of width at most ``tau / (20 * time_quadrature)``, split at the
    breakpoints; this is the same grid :func:`persistence_check` uses with
    its default window spacing.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if time_quadrature < 1:
        raise ValueError("time_quadrature must be positive")
    mats = _MatrixCache(kernel, n, quadrature_order)
    if kernel.is_stationary:
        return mats(t).copy()
    edges = _cells(kernel, t, t + tau, step=tau / (20.0 * time_quadrature))
    acc = np.zeros((n, n))
    for a, b in zip(edges, edges[1:]):
        acc += (b - a) * mats(0.5 * (a + b))
    return acc / tau


def window_average_laplacian(kernel: TimeKernel, t: float, tau: float, n: int, time_quadrature: int = 8,
                             quadrature_order: int = 4) -> LaplacianMatrix:
    """(1/tau) * integral of L^a(s) over [t, t + tau] (linear in A)."""
    return graph_laplacian(window_average_adjacency(kernel, t, tau, n, time_quadrature, quadrature_order))


PERSISTENCE_MODES = ("scrambling", "lambda2_of_average", "average_of_lambda2", "in_degree", "weighted_lambda2")


@dataclass
class PersistenceResult:
    """Window-functional minimum over a grid of window start times."""

    mode: str
    tau: float
    mu_estimate: float
    starts: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def satisfied_at_level(self, mu: float) -> bool:
        return bool(self.mu_estimate >= mu)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "tau": float(self.tau), "mu_estimate": float(self.mu_estimate)}


def _functional(mode: str, w: np.ndarray):
    if mode == "scrambling":
        return scrambling(w)
    if mode == "average_of_lambda2":
        return lambda2(graph_laplacian(w))
    if mode == "in_degree":
        return in_degree(w)
    if mode == "weighted_lambda2":
        dec = scc_decompose(w)
        if not dec.is_disjoint_union:
            raise ValueError("weighted_lambda2 persistence needs a disjoint union of components at every time")
        return lambda2_weighted(graph_laplacian(w), perron_vector(w, dec))
    if mode == "lambda2_of_average":
        return w
    raise ValueError(f"unknown persistence mode {mode!r}")


def persistence_check(kernel: TimeKernel, n: int, tau: float, mode: str, horizon: Optional[float] = None,
                      grid_step: Optional[float] = None, time_quadrature: int = 8,
                      quadrature_order: int = 4) -> PersistenceResult:
    """Estimate the persistence level mu of a window functional.

    Window start times are ``k * grid_step`` with ``t + tau <= horizon``; the
    estimate is the minimum window value (and, for ``in_degree``, the minimum
    over agents).  The default horizon covers one period plus one window for
    periodic kernels and a single window for stationary ones.

    Parameters
    ----------
    mode : str
        ``scrambling``, ``lambda2_of_average``, ``average_of_lambda2``,
        ``in_degree`` or ``weighted_lambda2``.
    grid_step : float, optional
        Spacing of window starts (default tau / 20).
    time_quadrature : int
        Midpoint cells per grid step for kernels that vary smoothly in time.
    """
    if mode not in PERSISTENCE_MODES:
        raise ValueError(f"unknown persistence mode {mode!r}")
    if not tau > 0:
        raise ValueError("tau must be positive")
    if horizon is None:
        horizon = tau + (kernel.period or 0.0) if not kernel.is_stationary else tau
    if tau > horizon * (1 + 1e-12):
        raise ValueError("tau must not exceed the horizon")
    g = tau / 20.0 if grid_step is None else float(grid_step)
    if not g > 0:
        raise ValueError("grid_step must be positive")
    mats = _MatrixCache(kernel, n, quadrature_order)
    if kernel.is_stationary:
        val = _functional(mode, mats(0.0))
        mu = _reduce(mode, val)
        return PersistenceResult(mode, tau, mu, np.array([0.0]), np.array([mu]))

    kmax = int(math.floor((horizon - tau) / g + 1e-9))
    starts = np.array([k * g for k in range(kmax + 1)])
    extra = list(starts) + list(starts + tau)
    edges = _cells(kernel, 0.0, float(starts[-1] + tau), extra, step=g / time_quadrature)
    mids = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    memo: dict = {}
    vals = []
    for m in mids:
        key = ("p", kernel.piece_key(m)) if kernel.piecewise_constant else None
        if key is not None and key in memo:
            vals.append(memo[key])
            continue
        v = _functional(mode, mats(m))
        if key is not None:
            memo[key] = v
        vals.append(v)
    vals = np.array(vals, dtype=float)
    shape = (1,) * (vals.ndim - 1)
    prefix = np.concatenate([np.zeros((1,) + vals.shape[1:]),
                             np.cumsum(widths.reshape((-1,) + shape) * vals, axis=0)])
    pos = {float(e): i for i, e in enumerate(edges)}

    def locate(x):
        if x in pos:
            return pos[x]
        return int(np.argmin(np.abs(edges - x)))

    wvals = []
    for s in starts:
        i0, i1 = locate(float(s)), locate(float(s + tau))
        avg = (prefix[i1] - prefix[i0]) / tau
        wvals.append(_reduce(mode, avg))
    wvals = np.array(wvals)
    return PersistenceResult(mode, tau, float(wvals.min()), starts, wvals)


def _reduce(mode: str, avg) -> float:
    if mode == "lambda2_of_average":
        return lambda2(graph_laplacian(np.asarray(avg)))
    if mode == "in_degree":
        return float(np.min(avg))
    return float(avg)


def leader_scrambling_bound(T: float, n: int, tau: float) -> float:
    """Closed-form lower bound (n tau - T) / (2 tau n^2) on the windowed scrambling
    of the leader kernel, valid for T/n <= tau <= T."""
    return (n * tau - T) / (2.0 * tau * n ** 2)


def dwell_check(mu: float, nu: float, tau_d: float) -> bool:
    """Literal dwell-time inequality (2 / (mu nu^2)) log(1/nu) < tau_d."""
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    lhs = 0.0 if nu == 1.0 else (math.inf if mu <= 0 else 2.0 / (mu * nu * nu) * math.log(1.0 / nu))
    return bool(lhs < tau_d)


@dataclass
class PsiCheck:
    min_ratio: float
    max_ratio: float
    passed: bool
    tolerance: float
    ratios: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


def psi_tau_operator(kernel: TimeKernel, phi: NonlinKernel, traj, t: float, tau: float,
                     quadrature_order: int = 4, stride: int = 1):
    """Assemble Psi_tau(t) = (1 + c_phi) tau I - (1/tau) int_t^{t+tau} (t + tau - s) L(s, x(s)) ds.

    The integral uses the trapezoid rule over the recorded states in
    ``[t, t + tau]`` (every ``stride``-th one).  Returns the matrix.
    """
    times = np.asarray(traj.times)
    eps = 1e-9 * max(1.0, abs(t) + tau)
    idx = np.flatnonzero((times >= t - eps) & (times <= t + tau + eps))
    if idx.size < 2 or abs(times[idx[0]] - t) > eps or abs(times[idx[-1]] - (t + tau)) > eps:
        raise ValueError(f"trajectory does not cover [{t}, {t + tau}] with recorded samples")
    if stride > 1:
        sel = idx[::stride]
        if sel[-1] != idx[-1]:
            raise ValueError("stride must divide the number of intervals")
        idx = sel
    n = traj.positions.shape[1]
    ts = times[idx]
    laps = [nonlinear_laplacian(sample_adjacency(kernel, s, n, quadrature_order), phi, traj.positions[j]).entries
            for j, s in zip(idx, ts)]
    acc = np.zeros((n, n))
    for k in range(len(idx) - 1):
        h = ts[k + 1] - ts[k]
        acc += 0.5 * h * ((t + tau - ts[k]) * laps[k] + (t + tau - ts[k + 1]) * laps[k + 1])
    return (1.0 + phi.c_phi) * tau * np.eye(n) - acc / tau


def psi_tau_bounds_check(kernel: TimeKernel, phi: NonlinKernel, traj, t: float, tau: float,
                         samples: int = 50, seed: int = 0, quadrature_order: int = 4) -> PsiCheck:
    """Check tau <= <Psi y, y>/<y, y> <= (1 + c_phi) tau on random mean-zero y.

    The tolerance is 1e-6 plus an error estimate of the time quadrature (the
    gap between the trapezoid rule on all samples and on every other sample).

    Raises
    ------
    ValueError
        For kernels not flagged symmetric.
    """
    if not kernel.is_symmetric:
        raise ValueError("the Psi_tau bounds are stated for symmetric kernels only")
    psi = psi_tau_operator(kernel, phi, traj, t, tau, quadrature_order)
    err = 0.0
    try:
        coarse = psi_tau_operator(kernel, phi, traj, t, tau, quadrature_order, stride=2)
        err = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * ((psi - coarse) + (psi - coarse).T)))))
    except ValueError:
        pass
    tol = 1e-6 + err
    rng = np.random.default_rng(seed)
    n = psi.shape[0]
    ratios = []
    for _ in range(int(samples)):
        y = rng.standard_normal(n)
        y -= y.mean()
        ratios.append(float(y @ psi @ y) / float(y @ y))
    ratios = np.array(ratios)
    lo, hi = tau - tol, (1.0 + phi.c_phi) * tau + tol
    ok = bool(np.all(ratios >= lo) and np.all(ratios <= hi))
    return PsiCheck(float(ratios.min()), float(ratios.max()), ok, tol, ratios)


# reports


@dataclass
class SpectralReport:
    eta: float
    lambda2: float
    lambda2_weighted: Optional[float]
    delta: float
    n_components: int
    perron: Optional[list]
    residual: Optional[float]
    persistence: Optional[dict] = None
    components: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "lambda2": self.lambda2,
            "lambda2_weighted": self.lambda2_weighted,
            "delta": self.delta,
            "n_components": self.n_components,
            "perron": self.perron,
            "residual": self.residual,
            "persistence": self.persistence,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def spectral_report(a, persistence: Optional[PersistenceResult] = None, threshold: float = 1e-12) -> SpectralReport:
    """Collect eta, lambda2, SCC data and (when defined) Perron weights of one matrix."""
    w = _w(a)
    L = graph_laplacian(w)
    dec = scc_decompose(w, threshold)
    perron = resid = l2w = None
    if dec.is_disjoint_union:
        try:
            pv = perron_vector(w, dec)
            perron = [float(x) for x in pv.values]
            resid = pv.residual
            l2w = lambda2_weighted(L, pv)
        except ValueError:
            pass
    return SpectralReport(
        eta=scrambling(w), lambda2=lambda2(L), lambda2_weighted=l2w, delta=dec.delta,
        n_components=dec.n_components, perron=perron, residual=resid,
        persistence=persistence.to_dict() if persistence is not None else None,
        components=dec.components,
    )
