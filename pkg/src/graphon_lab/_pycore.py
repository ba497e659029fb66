"""Pure numpy implementations of the hot kernels.

Signatures and results match the compiled ``_core`` module; the compiled
versions are faster but not more accurate.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "numpy"


def pairwise_dist(x):
    """Euclidean distance matrix of the rows of ``x`` (N x d)."""
    x = np.ascontiguousarray(x, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def laplacian_drift(w, x):
    """Return v_i = (1/N) sum_j w_ij (x_j - x_i).

    Written in difference form so that a consensus state gives exactly zero.
    """
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    diff = x[None, :, :] - x[:, None, :]
    return np.einsum("ij,ijk->ik", w, diff) / n


def pair_overlap_min(rows, n_total, best=math.inf):
    """Minimum over pairs p < q of (1/n_total) sum_k min(rows[p,k], rows[q,k]).

    Returns ``best`` if it is smaller than every pair value (or if there are
    fewer than two rows).
    """
    r = np.ascontiguousarray(rows, dtype=float)
    m = r.shape[0]
    for p in range(m - 1):
        if best <= 0.0:
            break
        s = np.minimum(r[p][None, :], r[p + 1:]).sum(axis=1)
        v = float(s.min()) / n_total
        if v < best:
            best = v
    return best


def self_overlap(row, n_total):
    """Pair value of a row with itself, via the same reduction as the pair loop."""
    r = np.ascontiguousarray(row, dtype=float)[None, :]
    return float(np.minimum(r, r).sum(axis=1)[0]) / n_total


def jacobi_eigenvalues(m, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Converged when every off-diagonal magnitude is below ``tol``.

    Raises
    ------
    RuntimeError
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    if n <= 1:
        return np.diag(a).copy()
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps + 1):
        if np.max(np.abs(a[iu])) < tol:
            return np.diag(a).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta**2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                gp = a[:, p].copy()
                gq = a[:, q].copy()
                newp = gp - s * (gq + gp * tau)
                newq = gq + s * (gp - gq * tau)
                a[:, p] = newp
                a[:, q] = newq
                a[p, :] = newp
                a[q, :] = newq
                a[p, p] = gp[p] - t * apq
                a[q, q] = gq[q] + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")


def perron_iterate(a, tol=1e-12, max_iter=100_000):
    """Fixed-point iteration v_i <- sum_j a_ji v_j / sum_j a_ij, mean-normalised.

    Returns ``(v, converged, iterations)``.
    """
    a = np.asarray(a, dtype=float)
    deg = a.sum(axis=1)
    v = np.ones(a.shape[0])
    for it in range(1, max_iter + 1):
        f = (a.T @ v) / deg
        if np.max(np.abs(v - f)) < tol:
            return f / f.mean(), True, it
        v = f / f.mean()
    return v, False, max_iter
