"""Splitting multiple Maxwell eigenvalues by small diagonal perturbations."""
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from ..exceptions import InvalidArgumentError, NoSplitFoundError, NotAdmissibleError
from ..material import (
    audit_admissibility,
    centered_bump,
    corner_offset_bumps,
    make_diagonal_direction,
    make_splitting_direction,
    w1inf_distance,
)
from .spectrum import DEFAULT_TOLERANCES, MAXWELL, compute_spectrum, maxwell_clusters, maxwell_first_tau
from .tracking import local_slopes

MIXTURE_WEIGHTS = (1.0, 0.5, 0.25)


def splitting_candidates(extent):
    """Deterministic dictionary of unit diagonal directions ``(name, eta)``.

    Single-entry directions ``xi e_hh`` with the centered bump, then with
    each corner-offset bump, then diagonal mixtures with unequal weights
    on the same bumps.
    """
    bumps = [("center", centered_bump(extent))] + [(f"corner{i}", b) for i, b in enumerate(corner_offset_bumps(extent))]
    for bname, bump in bumps:
        for h in (1, 2, 3):
            yield f"e{h}{h}-{bname}", make_splitting_direction(h, bump, extent)
    for bname, bump in bumps:
        for w in sorted(set(permutations(MIXTURE_WEIGHTS)), reverse=True):
            tag = "-".join(f"{v:g}" for v in w)
            yield f"diag({tag})-{bname}", make_diagonal_direction(w, bump, extent)


@dataclass
class SplitResult:
    """A verified split: direction, step, and the separated sub-eigenvalues."""

    name: str
    eta: object = field(repr=False)
    t: float
    eps: object = field(repr=False)
    values: np.ndarray
    gaps: np.ndarray
    neighbor_gaps: tuple
    predicted_values: np.ndarray
    prediction_error: float
    spectrum: object = field(repr=False)

    def to_dict(self):
        return {
            "direction": self.name,
            "t": self.t,
            "values": self.values.tolist(),
            "gaps": self.gaps.tolist(),
            "neighbor_gaps": list(self.neighbor_gaps),
            "predicted_values": self.predicted_values.tolist(),
            "prediction_error": self.prediction_error,
        }


def _separation(values, cluster, lam, gap_min):
    sub = values[cluster]
    gaps = np.diff(sub)
    lo = sub[0] - values[cluster[0] - 1] if cluster[0] > 0 else np.inf
    hi = values[cluster[-1] + 1] - sub[-1] if cluster[-1] + 1 < len(values) else np.inf
    ok = bool(np.all(gaps > gap_min * abs(lam)) and lo > gap_min * abs(lam) and hi > gap_min * abs(lam))
    return ok, sub, gaps, (float(lo), float(hi))


def split_cluster(eps, cluster, spectrum, mesh, rule, T=0.1, tols=DEFAULT_TOLERANCES, max_solves=60, candidates=None):
    """Find a direction ``eta`` and step ``t in (0, T)`` that make a cluster simple.

    For every candidate the discrete Rellich-Nagy slopes predict the
    sub-eigenvalues ``lam + t g_i`` to first order.  The step is chosen so
    that the predicted gaps are a few times ``gap_min * lam`` while the
    cluster stays clear of its neighbors, then the prediction is verified
    by a fresh solve.  The step is doubled (up to ``T``) when the realized
    gaps fall short.

    Parameters
    ----------
    eps : MatrixField
    cluster : sequence of int
        Spectrum indices of a Maxwell cluster, at least two.
    spectrum : Spectrum
        Classified spectrum at ``eps``, with at least one entry above the cluster.

    Raises
    ------
    InvalidArgumentError
        If the cluster is simple, not Maxwell-labeled, or at zero.
    NoSplitFoundError
        If no candidate splits the cluster within the solve budget.
    """
    cluster = sorted(int(i) for i in cluster)
    if len(cluster) < 2:
        raise InvalidArgumentError("a cluster of multiplicity at least 2 is required")
    if cluster != list(range(cluster[0], cluster[-1] + 1)):
        raise InvalidArgumentError("cluster indices must be consecutive")
    if spectrum.labels is not None and any(spectrum.labels[j] != MAXWELL for j in cluster):
        raise InvalidArgumentError("cluster must be Maxwell-labeled")
    lam = float(np.mean(spectrum.values[cluster]))
    if lam == 0:
        raise InvalidArgumentError("cluster value must be nonzero")
    if not T > 0:
        raise InvalidArgumentError("T must be positive")
    k = len(spectrum.values)
    values0 = spectrum.values
    lo_nb = values0[cluster[0] - 1] if cluster[0] > 0 else -np.inf
    hi_nb = values0[cluster[-1] + 1] if cluster[-1] + 1 < k else np.inf
    room = min(lam - lo_nb, hi_nb - lam)
    candidates = splitting_candidates(mesh.extent) if candidates is None else candidates

    solves = 0
    best = None
    for name, eta in candidates:
        g, _ = local_slopes(spectrum, eta, cluster)
        g = np.sort(g)
        dispersion = float(np.min(np.diff(g)))
        if dispersion <= 1e-8 * abs(lam):
            if best is None:
                best = {"direction": name, "gap": 0.0, "t": 0.0}
            continue
        spread = float(np.max(np.abs(g - np.mean(g))))
        t = 4.0 * tols.gap_min * abs(lam) / dispersion
        # keep first-order motion within a quarter of the room to the neighbors
        t = min(t, 0.25 * room / max(spread, 1e-300), 0.5 * T)
        while t < T and solves < max_solves:
            eps_t = eps + t * eta
            spec_t = compute_spectrum(mesh, rule, eps_t, spectrum.tau, k, tols)
            solves += 1
            ok, sub, gaps, nb = _separation(spec_t.values, cluster, lam, tols.gap_min)
            achieved = float(np.min(gaps)) / abs(lam)
            if best is None or achieved > best["gap"]:
                best = {"direction": name, "gap": achieved, "t": t}
            if ok and all(spec_t.labels[j] == MAXWELL for j in cluster):
                pred = lam + t * g
                pred_gaps = np.diff(pred)
                err = float(np.max(np.abs(gaps - pred_gaps) / pred_gaps))
                return SplitResult(
                    name=name,
                    eta=eta,
                    t=t,
                    eps=eps_t,
                    values=sub,
                    gaps=gaps,
                    neighbor_gaps=nb,
                    predicted_values=pred,
                    prediction_error=err,
                    spectrum=spec_t,
                )
            t *= 2.0
        if solves >= max_solves:
            break
    raise NoSplitFoundError(f"no split found for cluster {cluster} at {lam:.6g}", best=best)


@dataclass
class GenericityResult:
    """Outcome of the iterated splitting search."""

    eps: object = field(repr=False)
    tau: float
    steps: list
    total_step: float
    distance: float
    gaps: np.ndarray
    complete: bool
    index_reached: int
    spectrum: object = field(repr=False)

    def to_dict(self):
        return {
            "tau": self.tau,
            "steps": [s.to_dict() for s in self.steps],
            "total_step": self.total_step,
            "distance": self.distance,
            "gaps": self.gaps.tolist(),
            "complete": self.complete,
            "index_reached": self.index_reached,
        }


def _maxwell_window(mesh, rule, eps, tau, n, tols):
    k = 2 * n + 4
    spec = compute_spectrum(mesh, rule, eps, tau, k, tols)
    while len(spec.indices(MAXWELL)) <= n:
        k = 2 * k
        spec = compute_spectrum(mesh, rule, eps, tau, k, tols)
    return spec


def _first_gaps(spec, n):
    idx = spec.indices(MAXWELL)[: n + 1]
    v = spec.values[idx]
    return np.diff(v) / np.maximum(np.abs(v[1:]), 1.0)


def genericity_search(eps, mesh, rule, n, delta, tau=None, tols=DEFAULT_TOLERANCES, budget=8):
    """Perturb ``eps`` within distance ``delta`` until its first ``n`` Maxwell eigenvalues are simple.

    The lowest remaining multiple cluster is split at step ``k`` with a step
    no larger than ``delta / 2^(k+1)``; the directions have unit W^{1,inf}
    norm, so the total distance stays below ``delta``.  With ``tau=None`` the
    penalty is chosen so that the gradient family lies above the window.

    Returns a partial result (``complete`` False) when the budget runs out.
    """
    if not 0 < delta:
        raise InvalidArgumentError("delta must be positive")
    coercivity = audit_admissibility(eps, mesh, rule)
    if delta >= coercivity.c_eps:
        raise NotAdmissibleError(
            f"delta={delta} does not keep the ball admissible (coercivity {coercivity.c_eps:.6g})",
            point=coercivity.argmin_point,
            min_eigenvalue=coercivity.c_eps,
        )
    if tau is None:
        spec = _maxwell_window(mesh, rule, eps, 1.0, n, tols)
        lam_n = spec.values[spec.indices(MAXWELL)[n - 1]]
        tau = maxwell_first_tau(mesh, rule, eps, lam_n, margin=2.0, tols=tols)
    spec = _maxwell_window(mesh, rule, eps, tau, n, tols)

    current, steps, total = eps, [], 0.0
    for step in range(budget + 1):
        clusters = [c for c in maxwell_clusters(spec, n, tols.gap_min) if len(c) > 1]
        if not clusters:
            return GenericityResult(
                eps=current,
                tau=tau,
                steps=steps,
                total_step=total,
                distance=w1inf_distance(current, eps, mesh, rule) if steps else 0.0,
                gaps=_first_gaps(spec, n),
                complete=True,
                index_reached=n,
                spectrum=spec,
            )
        if step == budget:
            break
        res = split_cluster(current, clusters[0], spec, mesh, rule, T=delta / 2.0 ** (step + 1), tols=tols)
        steps.append(res)
        total += res.t
        current = res.eps
        spec = _maxwell_window(mesh, rule, current, tau, n, tols)

    reached = spec.indices(MAXWELL).index(clusters[0][0])
    return GenericityResult(
        eps=current,
        tau=tau,
        steps=steps,
        total_step=total,
        distance=w1inf_distance(current, eps, mesh, rule),
        gaps=_first_gaps(spec, n),
        complete=False,
        index_reached=reached,
        spectrum=spec,
    )
