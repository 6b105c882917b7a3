"""Eigenvalue branches along one-parameter permittivity paths."""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .._validation import check_count
from ..eigensolve import clusters_by_gap
from ..exceptions import InvalidArgumentError, TrackingError
from .spectrum import DEFAULT_TOLERANCES, DEGENERATE_TOL, compute_spectrum

#: A matched value may deviate from its prediction by this fraction of the local gap.
SAFETY = 0.4


def linear_path(eps0, eta):
    """``t -> (eps0 + t eta, eta)``."""

    def path(t):
        return (eps0 + float(t) * eta if t != 0 else eps0), eta

    return path


def local_slopes(spectrum, eta, indices, degenerate_tol=DEGENERATE_TOL):
    """Discrete one-sided slopes of the eigenvalues at ``indices``.

    At an eigenvalue that is multiple to solver precision the derivative is
    not defined; the slopes are the eigenvalues of the discrete Rellich-Nagy
    matrix ``U^T (tau P' - sigma M') U``, and the basis is rotated to its
    eigenvectors so that each vector carries its own slope.  Eigenvalues that
    are merely close keep their own derivative ``u^T (tau P' - sigma M') u``.
    """
    pencil = spectrum.pencil
    dmass = pencil.mass_derivative(eta)
    dpen = pencil.penalty_derivative(eta)
    slopes = np.empty(len(spectrum.values))
    vectors = spectrum.vectors.copy()
    for c in clusters_by_gap(spectrum.values, degenerate_tol):
        U = vectors[:, c]
        lam = float(np.mean(spectrum.values[c]))
        R = U.T @ (pencil.tau * (dpen @ U) - lam * (dmass @ U))
        w, Q = np.linalg.eigh(0.5 * (R + R.T))
        slopes[c] = w
        vectors[:, c] = U @ Q
    return slopes[list(indices)], vectors


@dataclass(frozen=True)
class BranchCurves:
    """``values[i, b]`` and ``slopes[i, b]`` of branch ``b`` at ``ts[i]``."""

    ts: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    max_mismatch: float

    @property
    def n_branches(self):
        return self.values.shape[1]

    def rows(self):
        """``(t, branch_id, value)`` triples in grid then branch order."""
        for i, t in enumerate(self.ts):
            for b in range(self.n_branches):
                yield float(t), b, float(self.values[i, b])


def track_branches(path, ts, mesh, rule, tau, n_branches, k=None, tols=DEFAULT_TOLERANCES, safety=SAFETY):
    """Follow the ``n_branches`` lowest eigenvalues along ``path`` over the grid ``ts``.

    Values at consecutive grid points are matched by minimum-cost assignment
    on the slope-predicted values, with a penalty on slope changes that
    disambiguates members of a cluster.

    Raises
    ------
    TrackingError
        If a matched value misses its prediction by more than ``safety`` times
        its distance to the other candidates; the grid should be refined.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or len(ts) < 2 or np.any(np.diff(ts) <= 0):
        raise InvalidArgumentError("ts must be a strictly increasing grid with at least two points")
    n_branches = check_count(n_branches, "n_branches")
    k = n_branches + 3 if k is None else check_count(k, "k")
    if k < n_branches:
        raise InvalidArgumentError("k must be at least n_branches")

    values = np.empty((len(ts), n_branches))
    slopes = np.empty((len(ts), n_branches))
    worst = 0.0
    for i, t in enumerate(ts):
        eps_t, deps_t = path(t)
        spec = compute_spectrum(mesh, rule, eps_t, tau, k, tols, classify_modes=False)
        cand = spec.values
        d, _ = local_slopes(spec, deps_t, range(k))
        if i == 0:
            values[0] = cand[:n_branches]
            slopes[0] = d[:n_branches]
            continue
        dt = t - ts[i - 1]
        pred = values[i - 1] + slopes[i - 1] * dt
        cost = np.abs(pred[:, None] - cand[None, :]) + dt * np.abs(slopes[i - 1][:, None] - d[None, :])
        rows, cols = linear_sum_assignment(cost)
        order = np.argsort(rows)
        cols = cols[order]
        values[i] = cand[cols]
        slopes[i] = d[cols]
        ids = np.empty(k, dtype=int)
        for cid, c in enumerate(clusters_by_gap(cand, DEGENERATE_TOL)):
            ids[c] = cid
        for b, j in enumerate(cols):
            others = [m for m in range(k) if ids[m] != ids[j]]
            gap = np.min(np.abs(cand[others] - cand[j])) if others else np.inf
            miss = abs(pred[b] - cand[j])
            if gap > 0:
                worst = max(worst, miss / gap)
            if miss > safety * gap:
                raise TrackingError(
                    f"branch {b} at t={t:.6g}: prediction miss {miss:.3g} exceeds {safety} x local gap {gap:.3g}; refine the grid"
                )
    return BranchCurves(ts=ts, values=values, slopes=slopes, max_mismatch=worst)
