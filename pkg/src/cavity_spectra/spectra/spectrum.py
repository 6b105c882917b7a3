"""Penalized spectra, cluster structure, and Maxwell/gradient classification."""
from dataclasses import dataclass, field, replace

import numpy as np

from .._validation import check_count, check_positive
from ..assembly import assemble_pencil
from ..eigensolve import clusters_by_gap, fix_signs, solve_dirichlet_scalar, solve_gsym
from ..exceptions import CoverageError, InvalidArgumentError, NeedsTauShiftError

MAXWELL = "maxwell"
GRADIENT = "gradient"
AMBIGUOUS = "ambiguous"

TAU_SHIFT = 0.7

#: Relative gap under which eigenvalues count as exactly multiple.
DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the spectral operations.

    ``r_max`` is the divergence-residual threshold under which a mode counts
    as Maxwell.  When None it is ``r_max_fraction * sqrt(rho_1)``, a fraction
    of the smallest residual any gradient mode ``grad f`` can have.
    """

    solver_tol: float = 1e-8
    cluster_tol: float = 1e-3
    r_max: float = None
    r_max_fraction: float = 0.3
    match_tol: float = 0.02
    gap_min: float = 1e-3
    dense_threshold: int = 1000

    def __post_init__(self):
        for name in ("solver_tol", "cluster_tol", "r_max_fraction", "match_tol", "gap_min"):
            check_positive(getattr(self, name), name)
        if self.r_max is not None:
            check_positive(self.r_max, "r_max")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Spectrum:
    """Smallest eigenpairs of the penalized pencil with classification metadata.

    ``vectors`` are M-orthonormal.  Inside every eigenvalue that is multiple to
    solver precision they are rotated so that their divergence residuals are
    extremal, which makes labels independent of the basis the solver
    happened to return.  ``clusters`` groups entries by the coarser
    ``cluster_tol``.
    """

    values: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    div_residuals: np.ndarray
    clusters: tuple
    tau: float
    pencil: object = field(repr=False)
    labels: tuple = None
    dirichlet_values: np.ndarray = None
    r_max: float = None

    def __len__(self):
        return len(self.values)

    def cluster_of(self, j):
        for c in self.clusters:
            if j in c:
                return c
        raise IndexError(j)

    def indices(self, label):
        if self.labels is None:
            raise InvalidArgumentError("spectrum is not classified")
        return [j for j, lab in enumerate(self.labels) if lab == label]

    def cluster_ids(self):
        out = np.empty(len(self.values), dtype=int)
        for cid, c in enumerate(self.clusters):
            out[list(c)] = cid
        return out

    def to_dict(self):
        return {
            "tau": self.tau,
            "values": [float(v) for v in self.values],
            "labels": list(self.labels) if self.labels is not None else None,
            "residuals": [float(v) for v in self.residuals],
            "div_residuals": [float(v) for v in self.div_residuals],
            "clusters": [list(c) for c in self.clusters],
            "r_max": self.r_max,
            "dirichlet_values": None if self.dirichlet_values is None else [float(v) for v in self.dirichlet_values],
        }


def div_residuals(pencil, vectors):
    """``||div(eps u)|| / ||u||_eps`` for every column, from the assembled forms."""
    num = np.einsum("ij,ij->j", vectors, pencil.P @ vectors)
    den = np.einsum("ij,ij->j", vectors, pencil.M @ vectors)
    return np.sqrt(np.maximum(num, 0.0) / den)


def _rotate_degenerate(pencil, values, vectors):
    vectors = vectors.copy()
    for c in clusters_by_gap(values, DEGENERATE_TOL):
        if len(c) < 2:
            continue
        B = vectors[:, c]
        G = B.T @ (pencil.P @ B)
        _, Q = np.linalg.eigh(0.5 * (G + G.T))
        vectors[:, c] = B @ Q
    return fix_signs(vectors)


def pencil_eigenvalues(mesh, rule, eps, tau, k, tols=DEFAULT_TOLERANCES):
    """Sorted eigenvalues only; the cheap path used by finite differences."""
    pencil = assemble_pencil(mesh, rule, eps, tau)
    sol = solve_gsym(pencil.A, pencil.M, k, tol=tols.solver_tol, dense_threshold=tols.dense_threshold)
    return sol.values


def compute_spectrum(mesh, rule, eps, tau=1.0, k=12, tols=DEFAULT_TOLERANCES, classify_modes=True, resolve=True, pencil=None):
    """The ``k`` smallest penalized eigenpairs with residuals, clusters and labels.

    With ``resolve`` ambiguous labels are settled, where possible, by a
    second run at a shifted penalty parameter.
    """
    tau = check_positive(tau, "tau")
    k = check_count(k, "k")
    if pencil is None:
        pencil = assemble_pencil(mesh, rule, eps, tau)
    sol = solve_gsym(pencil.A, pencil.M, k, tol=tols.solver_tol, dense_threshold=tols.dense_threshold)
    clusters = tuple(tuple(c) for c in clusters_by_gap(sol.values, tols.cluster_tol))
    vectors = _rotate_degenerate(pencil, sol.values, sol.vectors)
    spec = Spectrum(
        values=sol.values,
        vectors=vectors,
        residuals=sol.residuals,
        div_residuals=div_residuals(pencil, vectors),
        clusters=clusters,
        tau=tau,
        pencil=pencil,
    )
    if classify_modes:
        rho = dirichlet_values_covering(mesh, rule, eps, tau, spec.values[-1], tols)
        spec = classify(spec, rho, tau, tols)
        if resolve:
            spec = resolve_ambiguous(spec, mesh, rule, eps, tols)
    return spec


def dirichlet_values_covering(mesh, rule, eps, tau, sigma_max, tols=DEFAULT_TOLERANCES):
    """Enough scalar Dirichlet eigenvalues that ``tau * rho`` passes ``sigma_max``."""
    n_scalar = int(np.prod([n - 1 for n in mesh.subdivisions]))
    if n_scalar == 0:
        raise CoverageError("mesh has no interior nodes for the Dirichlet problem")
    target = sigma_max * (1.0 + tols.match_tol)
    k = min(8, n_scalar)
    while True:
        rho = solve_dirichlet_scalar(mesh, rule, eps, k, tol=tols.solver_tol, dense_threshold=tols.dense_threshold).values
        if tau * rho[-1] > target or k == n_scalar:
            return rho
        k = min(2 * k, n_scalar)


def classify(spectrum, dirichlet_values, tau, tols=DEFAULT_TOLERANCES):
    """Label every entry maxwell, gradient, or ambiguous.

    * maxwell: divergence residual at most ``r_max`` and no Dirichlet match;
    * gradient: residual above ``r_max`` and ``|sigma - tau rho| <= match_tol sigma``
      for some Dirichlet eigenvalue ``rho``;
    * ambiguous: both criteria or neither fire.
    """
    rho = np.sort(np.asarray(dirichlet_values, dtype=float))
    if len(rho) == 0:
        raise CoverageError("no Dirichlet eigenvalues supplied")
    n_scalar = None
    pencil = spectrum.pencil
    if pencil is not None:
        n_scalar = int(np.prod([n - 1 for n in pencil.mesh.subdivisions]))
    exhaustive = n_scalar is not None and len(rho) >= n_scalar
    if not exhaustive and tau * rho[-1] < spectrum.values[-1] * (1.0 - tols.match_tol):
        raise CoverageError(
            f"Dirichlet list reaches tau*rho={tau * rho[-1]:.6g}, below the spectral window top {spectrum.values[-1]:.6g}"
        )
    r_max = tols.r_max if tols.r_max is not None else tols.r_max_fraction * np.sqrt(rho[0])
    labels = []
    for sigma, r in zip(spectrum.values, spectrum.div_residuals):
        match = bool(np.any(np.abs(sigma - tau * rho) <= tols.match_tol * abs(sigma)))
        small = r <= r_max
        if small and not match:
            labels.append(MAXWELL)
        elif match and not small:
            labels.append(GRADIENT)
        else:
            labels.append(AMBIGUOUS)
    return replace(spectrum, labels=tuple(labels), dirichlet_values=rho, r_max=float(r_max))


def resolve_ambiguous(spectrum, mesh, rule, eps, tols=DEFAULT_TOLERANCES, shift=TAU_SHIFT):
    """Relabel ambiguous entries using a re-run at ``tau * shift``.

    Maxwell eigenvalues do not depend on tau while gradient ones scale with
    it.  An ambiguous entry with small residual whose value reappears with
    small residual in the shifted run is Maxwell; one with large residual
    whose scaled value ``shift * sigma`` reappears with large residual is
    gradient.  Anything else stays ambiguous.
    """
    if spectrum.labels is None or AMBIGUOUS not in spectrum.labels:
        return spectrum
    other = compute_spectrum(mesh, rule, eps, spectrum.tau * shift, len(spectrum.values) + 4, tols, resolve=False)
    small = other.div_residuals <= spectrum.r_max
    low, high = other.values[small], other.values[~small]
    labels = list(spectrum.labels)
    for j, lab in enumerate(labels):
        if lab != AMBIGUOUS:
            continue
        sigma = spectrum.values[j]
        if spectrum.div_residuals[j] <= spectrum.r_max:
            if len(low) and np.min(np.abs(low - sigma)) <= tols.match_tol * sigma:
                labels[j] = MAXWELL
        elif len(high) and np.min(np.abs(high - shift * sigma)) <= tols.match_tol * shift * sigma:
            labels[j] = GRADIENT
    return replace(spectrum, labels=tuple(labels))


def maxwell_eigenvalues(spectrum):
    """The Maxwell-labeled subsequence of the spectrum."""
    if spectrum.labels is None:
        raise InvalidArgumentError("spectrum is not classified")
    if AMBIGUOUS in spectrum.labels:
        raise NeedsTauShiftError("spectrum has ambiguous entries; re-run with a shifted tau")
    return spectrum.values[[j for j, lab in enumerate(spectrum.labels) if lab == MAXWELL]]


def maxwell_first_tau(mesh, rule, eps, lam_max, margin=1.5, tols=DEFAULT_TOLERANCES):
    """Penalty parameter pushing the gradient family above ``lam_max``."""
    rho1 = solve_dirichlet_scalar(mesh, rule, eps, 1, tol=tols.solver_tol, dense_threshold=tols.dense_threshold).values[0]
    return margin * lam_max / rho1


def maxwell_clusters(spectrum, n, rel_gap):
    """Cluster the first ``n`` Maxwell-labeled entries by relative gap.

    Returns lists of spectrum indices.  Raises if fewer than ``n`` Maxwell
    entries are available.
    """
    idx = spectrum.indices(MAXWELL)
    if len(idx) < n:
        raise CoverageError(f"only {len(idx)} Maxwell eigenvalues in the window, need {n}")
    # include the (n+1)-th if present so a cluster straddling n is seen whole
    idx = idx[: n + 1] if len(idx) > n else idx[:n]
    groups = clusters_by_gap(spectrum.values[idx], rel_gap)
    out = []
    for g in groups:
        members = [idx[i] for i in g]
        if idx.index(members[0]) < n:
            out.append(members)
    return out
