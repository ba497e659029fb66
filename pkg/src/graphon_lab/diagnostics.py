"""Pathwise checks of consensus envelopes and empirical decay diagnostics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import nnls

from .dynamics import Trajectory, std_dev
from .kernel import TimeKernel, gamma_R as _gamma_R
from .spectral import dwell_check

THEOREMS = ("diameter_contraction", "linf_persistent_scrambling", "l2_symmetric", "l2_balanced", "l2_strong")
ALIASES = {"diameter": "diameter_contraction", "linf": "linf_persistent_scrambling"}
ENVELOPE_ABS_TOL = 1e-9


@dataclass
class EnvelopeReport:
    """Result of comparing an observed quantity against a theorem envelope.

    ``passed`` holds iff ``margin >= -max(tolerance)`` where the margin is the
    smallest ``envelope - observed`` over the recorded times, measured
    relative to the per-time tolerance ``1e-9 + integrator_tolerance``.
    """

    theorem: str
    margin: float
    passed: bool
    parameters: dict
    times: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)
    tolerance: np.ndarray = field(repr=False)
    integrator_tolerance: np.ndarray = field(repr=False)
    warnings: list = field(default_factory=list)

    @property
    def worst_excess(self) -> float:
        """max over times of (observed - envelope - tolerance); <= 0 when passed."""
        return float(np.max(self.observed - self.envelope - self.tolerance))

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "margin": float(self.margin),
            "pass": bool(self.passed),
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "max_integrator_tolerance": float(np.max(self.integrator_tolerance)),
            "warnings": list(self.warnings),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "observed", "envelope"])
            for t, o, e in zip(self.times, self.observed, self.envelope):
                w.writerow([f"{float(t):.17g}", f"{float(o):.17g}", f"{float(e):.17g}"])


def l2_distance(positions: np.ndarray, point) -> np.ndarray:
    """sqrt((1/N) sum_i |x_i - p|^2) for every recorded state."""
    d = positions - np.asarray(point, dtype=float)[None, None, :]
    return np.sqrt(np.mean(np.sum(d * d, axis=2), axis=1))


def linf_distance(positions: np.ndarray, point) -> np.ndarray:
    """max_i |x_i - p| for every recorded state."""
    d = positions - np.asarray(point, dtype=float)[None, None, :]
    return np.sqrt(np.max(np.sum(d * d, axis=2), axis=1))


def symmetric_constants(gamma_r: float, mu: float, tau: float, c_phi: float) -> dict:
    """Constants of the L2 envelope for symmetric topologies.

    With ``c = 1 + c_phi``::

        epsilon = gamma_r * mu / (2 sqrt(c))
        lambda  = 1/sqrt(tau) + 1/(2 sqrt(tau) epsilon) - sqrt(c tau)   (floored above 0)
        alpha   = (lambda + sqrt(c tau)) / (lambda + sqrt(tau))
        gamma   = gamma_r / (4 sqrt(c tau) (lambda + sqrt(c tau)))

    Returns ``epsilon``, ``lambda``, ``alpha``, ``gamma`` and ``rate = gamma * mu``.
    """
    sq = math.sqrt((1.0 + c_phi) * tau)
    eps = gamma_r * mu / (2.0 * math.sqrt(1.0 + c_phi))
    lam = 1.0 / math.sqrt(tau) + 1.0 / (2.0 * math.sqrt(tau) * eps) - sq
    lam = max(lam, 1e-12)
    alpha = (lam + sq) / (lam + math.sqrt(tau))
    gamma = gamma_r / (4.0 * sq * (lam + sq))
    return {"epsilon": eps, "lambda": lam, "alpha": alpha, "gamma": gamma, "rate": gamma * mu}


def _need(params: dict, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise ValueError(f"missing envelope constants: {', '.join(missing)}")


def _resolve_gamma(params: dict, traj: Trajectory) -> float:
    if params.get("gamma_R") is not None:
        return float(params["gamma_R"])
    phi = params.get("phi")
    if phi is None:
        raise ValueError("missing envelope constants: gamma_R (or phi)")
    R = float(traj.diagnostics["linf_norm"][0]) or 1.0
    return _gamma_R(phi, R)


def envelope_check(traj: Trajectory, theorem: str, params: dict) -> EnvelopeReport:
    """Compare a trajectory against the decay envelope of ``theorem``.

    Parameters
    ----------
    traj : Trajectory
    theorem : str
        ``diameter_contraction``, ``linf_persistent_scrambling``,
        ``l2_symmetric``, ``l2_balanced`` or ``l2_strong``.
    params : dict
        Constants the theorem needs: ``gamma_R`` (or ``phi``), ``mu``,
        ``tau``, ``c_phi``, ``nu``, ``tau_d``.  Optional ``x_inf`` (consensus
        point for the L-infinity check), ``kernel`` (for topology warnings).

    Observed quantities: the diameter; max_i |x_i - x_inf|; the L2 distance
    to the initial barycenter for the symmetric and balanced cases; and the
    standard deviation X(t) for the strongly connected case.
    """
    theorem = ALIASES.get(theorem, theorem)
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    t = np.asarray(traj.times, dtype=float)
    pos = traj.positions
    d = traj.diagnostics
    kernel: Optional[TimeKernel] = params.get("kernel")
    warnings = []
    used: dict = {}
    bary0 = pos[0].mean(axis=0)

    if theorem == "diameter_contraction":
        if "eta_integral" not in d:
            raise ValueError("trajectory lacks eta_integral; integrate with track_scrambling=True")
        g = _resolve_gamma(params, traj)
        used = {"gamma_R": g}
        observed = d["diameter"]
        envelope = d["diameter"][0] * np.exp(-g * d["eta_integral"])
    elif theorem == "linf_persistent_scrambling":
        _need(params, "mu", "tau")
        g = _resolve_gamma(params, traj)
        mu, tau = float(params["mu"]), float(params["tau"])
        x_inf = params.get("x_inf")
        if x_inf is None:
            x_inf = consensus_estimate(traj, "tail_extrapolation")
        alpha = math.exp(g * mu * tau)
        used = {"gamma_R": g, "mu": mu, "tau": tau, "alpha": alpha, "gamma": g}
        observed = linf_distance(pos, x_inf)
        envelope = alpha * d["diameter"][0] * np.exp(-g * mu * t)
    elif theorem == "l2_balanced":
        _need(params, "mu", "tau")
        mu, tau = float(params["mu"]), float(params["tau"])
        alpha = math.exp(mu * tau)
        used = {"mu": mu, "tau": tau, "alpha": alpha}
        if kernel is not None and not kernel.is_balanced:
            warnings.append("l2_balanced applied to a kernel not flagged balanced")
        observed = l2_distance(pos, bary0)
        envelope = alpha * observed[0] * np.exp(-mu * t)
    elif theorem == "l2_symmetric":
        _need(params, "mu", "tau", "c_phi")
        g = _resolve_gamma(params, traj)
        mu, tau, c = float(params["mu"]), float(params["tau"]), float(params["c_phi"])
        k = symmetric_constants(g, mu, tau, c)
        used = {"gamma_R": g, "mu": mu, "tau": tau, "c_phi": c, "alpha": k["alpha"], "gamma": k["gamma"]}
        if kernel is not None and not kernel.is_symmetric:
            warnings.append("l2_symmetric applied to a kernel not flagged symmetric")
        observed = l2_distance(pos, bary0)
        envelope = k["alpha"] * observed[0] * np.exp(-k["rate"] * t)
    else:
        _need(params, "mu", "tau", "nu", "tau_d")
        mu, tau, nu, tau_d = (float(params[k]) for k in ("mu", "tau", "nu", "tau_d"))
        alpha = math.exp(mu * nu * nu * tau) / (nu * nu)
        rate = mu * nu * nu - (2.0 / tau_d) * math.log(1.0 / nu)
        used = {"mu": mu, "tau": tau, "nu": nu, "tau_d": tau_d, "alpha": alpha, "rate": rate}
        if not dwell_check(mu, nu, tau_d):
            warnings.append("dwell-time condition violated; the envelope is not guaranteed")
        if kernel is not None and not (kernel.piecewise_constant or kernel.is_stationary):
            warnings.append("l2_strong applied to a kernel that is not piecewise constant")
        observed = np.array([std_dev(p) for p in pos])
        envelope = alpha * observed[0] * np.exp(-rate * t)

    integ = traj.tolerance()
    tol = ENVELOPE_ABS_TOL + integ
    gap = envelope - observed
    margin = float(np.min(gap))
    passed = bool(np.all(gap >= -tol))
    return EnvelopeReport(theorem, margin, passed, used, t, np.asarray(observed), np.asarray(envelope),
                          tol, integ, warnings)


# consensus point


def in_convex_hull(point, pts, tol: float = 1e-9) -> bool:
    """Exact membership test via non-negative least squares on the simplex."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    c = np.asarray(point, dtype=float).ravel()
    scale = max(1.0, float(np.max(np.abs(pts))))
    m = np.vstack([pts.T / scale, np.full((1, pts.shape[0]), 1.0)])
    rhs = np.concatenate([c / scale, [1.0]])
    _, res = nnls(m, rhs)
    return bool(res <= tol)


def _aitken(b: np.ndarray) -> np.ndarray:
    """Aitken delta-squared on three equally spaced samples per coordinate."""
    b0, b1, b2 = b
    d1, d2 = b1 - b0, b2 - b1
    den = d2 - d1
    out = b2.copy()
    ok = (np.abs(den) > 1e-14 * np.maximum(1.0, np.abs(b2))) & (d1 * d2 > 0) & (np.abs(d2) < np.abs(d1))
    out[ok] = b2[ok] - d2[ok] ** 2 / den[ok]
    return out


def consensus_estimate(traj: Trajectory, strategy: str = "tail_extrapolation", weights=None) -> np.ndarray:
    """Estimate the consensus point x_inf.

    Parameters
    ----------
    strategy : str
        ``final_state_mean`` (barycenter of the last state),
        ``weighted_barycenter`` (needs Perron ``weights``), or
        ``tail_extrapolation`` (Aitken extrapolation of the barycenters over
        the last 10% of samples, falling back to the final barycenter when
        the sequence is not geometrically convergent or the extrapolated
        point leaves the hull of the final state).
    """
    pos = traj.positions
    if pos.shape[0] == 0:
        raise ValueError("empty trajectory")
    last = pos[-1]
    if strategy == "final_state_mean":
        return last.mean(axis=0)
    if strategy == "weighted_barycenter":
        v = weights if weights is not None else traj.meta.get("weights")
        if v is None:
            raise ValueError("weighted_barycenter needs a Perron vector")
        v = np.asarray(v, dtype=float)
        return (v @ last) / v.sum()
    if strategy != "tail_extrapolation":
        raise ValueError(f"unknown strategy {strategy!r}")
    bary = pos.mean(axis=1)
    fallback = last.mean(axis=0)
    k = pos.shape[0]
    m = max(1, int(math.ceil(0.1 * k)) // 2)
    if k < 3 or 2 * m >= k:
        return fallback
    cand = _aitken(bary[[k - 1 - 2 * m, k - 1 - m, k - 1]])
    if not np.all(np.isfinite(cand)):
        return fallback
    lo, hi = last.min(axis=0), last.max(axis=0)
    if np.any(cand < lo) or np.any(cand > hi):
        return fallback
    if last.shape[1] > 1 and not in_convex_hull(cand, last):
        return fallback
    return cand


# rate fitting


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    r_squared: float
    non_positive: bool = False

    def to_dict(self) -> dict:
        return {"rate": self.rate, "intercept": self.intercept, "r_squared": self.r_squared,
                "non_positive": self.non_positive}


def decay_rate_fit(times, values, tail_fraction: float = 0.5) -> DecayFit:
    """Least-squares line through (t, log value) over the trailing samples.

    ``rate`` is the negated slope.  Non-positive values in the tail give
    ``rate = 0`` with ``non_positive = True``.

    Raises
    ------
    ValueError
        If fewer than 3 samples fall in the tail.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise ValueError("times and values must have the same length")
    k = int(math.ceil(tail_fraction * len(t)))
    if k < 3:
        raise ValueError(f"need at least 3 tail samples, got {k}")
    t, v = t[-k:], v[-k:]
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return DecayFit(0.0, float("nan"), float("nan"), True)
    y = np.log(v)
    tc = t - t.mean()
    slope = float(tc @ (y - y.mean()) / (tc @ tc))
    intercept = float(y.mean() - slope * t.mean())
    resid = y - (intercept + slope * t)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return DecayFit(-slope, intercept, r2, False)


# L2 / L-infinity equivalence


@dataclass(frozen=True)
class EquivalenceObservation:
    l2_decayed: bool
    linf_decayed: bool
    consistent_with_equivalence: bool
    l2_ratio: float
    linf_ratio: float

    def to_dict(self) -> dict:
        return {
            "l2_decayed": self.l2_decayed,
            "linf_decayed": self.linf_decayed,
            "consistent_with_equivalence": self.consistent_with_equivalence,
            "l2_ratio": self.l2_ratio,
            "linf_ratio": self.linf_ratio,
        }


def _ratio(final: float, initial: float) -> float:
    if initial == 0.0:
        return 0.0
    return final / initial


def equivalence_observation(traj: Trajectory, x_inf, threshold: float = 1e-3) -> EquivalenceObservation:
    """Whether the L2 and L-infinity distances to ``x_inf`` have decayed.

    "Decayed" means final distance < threshold * initial distance; a zero
    initial distance counts as decayed.
    """
    l2 = l2_distance(traj.positions, x_inf)
    li = linf_distance(traj.positions, x_inf)
    r2, ri = _ratio(l2[-1], l2[0]), _ratio(li[-1], li[0])
    a, b = bool(r2 < threshold), bool(ri < threshold)
    return EquivalenceObservation(a, b, a == b, float(r2), float(ri))
