"""Eigenvalue derivatives along permittivity directions and finite-difference checks."""
from dataclasses import dataclass, field

import numpy as np

from ..assembly import evaluate_at_quadrature, div_of_product, quadrature_weights
from ..exceptions import InvalidArgumentError
from .symmetric import (
    ClusterPartition,
    branch_slopes,
    partition_symmetric_function,
    rellich_nagy_matrix,
    symmetric_function_derivative,
)

#: Base steps of the Richardson check and the agreement it requires.
FD_STEPS = (1e-2, 1e-3)
FD_AGREEMENT = 0.01


def discrete_eigenvalue_derivative(pencil, sigma, u, eta, dmass=None, dpenalty=None):
    """Exact first-order change of a simple discrete eigenvalue along ``eta``.

    ``sigma' = u^T (tau P'[eta] - sigma M'[eta]) u`` for M-normalized ``u``.
    Pre-assembled derivative matrices may be passed to avoid reassembly.
    """
    u = np.asarray(u, dtype=float)
    if dmass is None:
        dmass = pencil.mass_derivative(eta)
    if dpenalty is None:
        dpenalty = pencil.penalty_derivative(eta)
    norm = float(u @ (pencil.M @ u))
    return float(u @ (pencil.tau * (dpenalty @ u) - sigma * (dmass @ u))) / norm


def continuum_eigenvalue_derivative(pencil, lam, u, eta, dmass=None):
    """``-lam * int eta u . u / ||u||_eps^2``, which drops the penalty contribution."""
    u = np.asarray(u, dtype=float)
    if dmass is None:
        dmass = pencil.mass_derivative(eta)
    return -lam * float(u @ (dmass @ u)) / float(u @ (pencil.M @ u))


def penalty_gap_bound(pencil, u, eta):
    """``2 tau r_u ||div(eta u)|| / ||u||_eps^2``: bound on discrete minus formula derivative."""
    u = np.asarray(u, dtype=float)
    nodal = pencil.expand(u)
    values, grads = evaluate_at_quadrature(pencil.mesh, pencil.rule, nodal)
    pts = pencil.mesh.quadrature_points(pencil.rule)
    w = quadrature_weights(pencil.mesh, pencil.rule)
    div_eta = div_of_product(eta, pts, values, grads)
    norm_div_eta = np.sqrt(np.sum(w[None, :] * div_eta ** 2))
    m = float(u @ (pencil.M @ u))
    r_u = np.sqrt(max(float(u @ (pencil.P @ u)), 0.0) / m)
    return 2.0 * pencil.tau * r_u * norm_div_eta / np.sqrt(m)


# -- finite differences -----------------------------------------------------------


def central_difference(f, t):
    """``(f(t) - f(-t)) / (2t)`` elementwise."""
    return (np.asarray(f(t)) - np.asarray(f(-t))) / (2.0 * t)


def richardson_derivative(f, t):
    """Central difference extrapolated from steps ``t`` and ``t/2``; error O(t^4)."""
    d1 = central_difference(f, t)
    d2 = central_difference(f, t / 2.0)
    return (4.0 * d2 - d1) / 3.0


def one_sided_slopes(f, h):
    """Left and right difference quotients of ``f`` at 0."""
    f0 = np.asarray(f(0.0))
    left = (f0 - np.asarray(f(-h))) / h
    right = (np.asarray(f(h)) - f0) / h
    return left, right


@dataclass(frozen=True)
class FDCheck:
    """Finite-difference derivative with its step-size consistency check.

    ``estimate`` is the Richardson value at the smallest base step;
    ``estimates`` holds one per base step; ``agree`` is True when they
    coincide to ``FD_AGREEMENT`` relative (entries with both estimates below
    ``floor`` are compared absolutely).
    """

    estimate: np.ndarray
    estimates: tuple
    steps: tuple
    agree: bool
    spread: np.ndarray


def checked_derivative(f, steps=FD_STEPS, agreement=FD_AGREEMENT, floor=1e-8):
    """Richardson derivatives at every base step and their agreement."""
    cache = {}

    def g(t):
        key = float(t)
        if key not in cache:
            cache[key] = np.asarray(f(key), dtype=float)
        return cache[key]

    ests = tuple(richardson_derivative(g, t) for t in steps)
    ref = ests[-1]
    spread = np.max([np.abs(e - ref) for e in ests], axis=0) / np.maximum(np.abs(ref), floor)
    return FDCheck(
        estimate=ref,
        estimates=ests,
        steps=tuple(steps),
        agree=bool(np.all(spread <= agreement)),
        spread=spread,
    )


# -- reports ----------------------------------------------------------------------


@dataclass
class SensitivityReport:
    """Symmetric-function values and derivatives, cluster slopes, FD comparisons."""

    rows: list = field(default_factory=list)
    clusters: list = field(default_factory=list)

    def add_symmetric(self, F, s, value, derivative, fd=None):
        rel = None if fd is None else abs(derivative - fd) / max(abs(fd), np.finfo(float).tiny)
        self.rows.append({"F": list(F), "s": int(s), "value": value, "derivative": derivative, "fd": fd, "rel_err": rel})

    def add_cluster(self, F, lam, matrix, fd_slopes=None):
        matrix = np.asarray(matrix)
        if not np.array_equal(matrix, matrix.T):
            raise InvalidArgumentError("Rellich-Nagy matrix must be symmetric")
        slopes = branch_slopes(matrix)
        entry = {"F": list(F), "lambda": lam, "matrix": matrix.tolist(), "slopes": slopes.tolist()}
        if fd_slopes is not None:
            fd_slopes = np.sort(np.asarray(fd_slopes, dtype=float))
            entry["fd_slopes"] = fd_slopes.tolist()
            entry["fd_errors"] = (np.abs(slopes - fd_slopes) / np.maximum(np.abs(fd_slopes), 1e-300)).tolist()
        self.clusters.append(entry)

    def to_dict(self):
        return {
            "values": [r["value"] for r in self.rows],
            "rows": self.rows,
            "slopes": [c["slopes"] for c in self.clusters],
            "fd_errors": [c.get("fd_errors") for c in self.clusters],
            "clusters": self.clusters,
        }


def partition_from_spectrum(spectrum, indices):
    """Blocks of ``indices`` following the spectrum's cluster structure."""
    indices = sorted(int(i) for i in indices)
    chosen = set(indices)
    blocks = []
    for c in spectrum.clusters:
        b = tuple(j for j in c if j in chosen)
        if b:
            blocks.append(b)
    values = [float(np.mean(spectrum.values[list(b)])) for b in blocks]
    return ClusterPartition(blocks=tuple(blocks), values=tuple(values))


def cluster_sensitivity(spectrum, indices, eta, max_s=None, report=None):
    """Symmetric-function derivatives and Rellich-Nagy slopes for one eigenvalue group.

    ``indices`` are spectrum positions forming the index set ``F``; they are
    split into blocks with the spectrum's cluster structure.
    """
    pencil = spectrum.pencil
    partition = partition_from_spectrum(spectrum, indices)
    dmass = pencil.mass_derivative(eta)
    bases = [spectrum.vectors[:, list(b)] for b in partition.blocks]
    report = report if report is not None else SensitivityReport()
    max_s = len(partition) if max_s is None else max_s
    for s in range(1, max_s + 1):
        report.add_symmetric(
            partition.indices,
            s,
            partition_symmetric_function(partition, s),
            symmetric_function_derivative(partition, bases, dmass, s, mass=pencil.M),
        )
    for lam, basis, block in zip(partition.values, bases, partition.blocks):
        report.add_cluster(block, lam, rellich_nagy_matrix(lam, basis, dmass, mass=pencil.M))
    return report
