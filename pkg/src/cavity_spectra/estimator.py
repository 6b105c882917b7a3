"""Estimator-style front end: fit a permittivity, transform directions into derivatives."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_positive
from .exceptions import InvalidArgumentError
from .geometry import build_box_mesh, gauss_rule
from .material import MatrixField, audit_admissibility
from .spectra import (
    MAXWELL,
    Tolerances,
    compute_spectrum,
    discrete_eigenvalue_derivative,
    maxwell_eigenvalues,
)


class CavityEigensolver(BaseEstimator):
    """Penalized Maxwell eigensolver on a box with an estimator interface.

    ``fit(eps)`` computes the spectrum for a permittivity field;
    ``transform(directions)`` returns the eigenvalue derivatives along each
    direction, one row per direction.

    Parameters
    ----------
    extent : tuple of float
    subdivisions : int or tuple of int
    quad_degree : int
    tau : float
        Penalty parameter.
    n_eigs : int
        Number of penalized eigenpairs.
    cluster_tol, r_max, match_tol, gap_min, solver_tol : float
        See :class:`~cavity_spectra.spectra.Tolerances`; ``r_max=None``
        selects the mesh-calibrated default.

    Attributes
    ----------
    spectrum_ : Spectrum
    eigenvalues_ : ndarray
        All penalized eigenvalues.
    labels_ : tuple of str
    maxwell_eigenvalues_ : ndarray
    mesh_, rule_ : the discretization used
    """

    def __init__(
        self,
        extent=(np.pi, np.pi, np.pi),
        subdivisions=8,
        quad_degree=5,
        tau=1.0,
        n_eigs=12,
        cluster_tol=1e-3,
        r_max=None,
        match_tol=0.02,
        gap_min=1e-3,
        solver_tol=1e-8,
    ):
        self.extent = extent
        self.subdivisions = subdivisions
        self.quad_degree = quad_degree
        self.tau = tau
        self.n_eigs = n_eigs
        self.cluster_tol = cluster_tol
        self.r_max = r_max
        self.match_tol = match_tol
        self.gap_min = gap_min
        self.solver_tol = solver_tol

    def _tolerances(self):
        return Tolerances(
            solver_tol=self.solver_tol,
            cluster_tol=self.cluster_tol,
            r_max=self.r_max,
            match_tol=self.match_tol,
            gap_min=self.gap_min,
        )

    def fit(self, X, y=None):
        """Compute the spectrum for the permittivity field ``X``."""
        if not isinstance(X, MatrixField):
            raise InvalidArgumentError("X must be a permittivity field (MatrixField)")
        check_positive(self.tau, "tau")
        check_count(self.n_eigs, "n_eigs")
        self.mesh_ = build_box_mesh(self.extent, self.subdivisions)
        self.rule_ = gauss_rule(self.quad_degree)
        self.coercivity_ = audit_admissibility(X, self.mesh_, self.rule_)
        self.eps_ = X
        self.spectrum_ = compute_spectrum(self.mesh_, self.rule_, X, self.tau, self.n_eigs, self._tolerances())
        self.eigenvalues_ = self.spectrum_.values
        self.labels_ = self.spectrum_.labels
        self.maxwell_eigenvalues_ = maxwell_eigenvalues(self.spectrum_)
        return self

    def transform(self, X):
        """Derivatives of every fitted eigenvalue along each direction field.

        Parameters
        ----------
        X : MatrixField or sequence of MatrixField

        Returns
        -------
        ndarray, shape (n_directions, n_eigs)
            Exact derivatives of the discrete eigenvalues.  At a multiple
            eigenvalue the entry is the diagonal of the cluster's derivative
            matrix in the fitted basis.
        """
        check_is_fitted(self, "spectrum_")
        directions = [X] if isinstance(X, MatrixField) else list(X)
        if not all(isinstance(d, MatrixField) for d in directions):
            raise InvalidArgumentError("directions must be MatrixField instances")
        spec = self.spectrum_
        out = np.empty((len(directions), len(spec.values)))
        for i, eta in enumerate(directions):
            dmass = spec.pencil.mass_derivative(eta)
            dpen = spec.pencil.penalty_derivative(eta)
            for j, sigma in enumerate(spec.values):
                out[i, j] = discrete_eigenvalue_derivative(spec.pencil, sigma, spec.vectors[:, j], eta, dmass, dpen)
        return out

    def predict(self, X):
        """Maxwell eigenvalues of the fitted field perturbed by ``t * eta`` to first order.

        ``X`` is a pair ``(eta, t)``; returns ``lambda + t * dlambda[eta]``
        for the Maxwell-labeled entries.
        """
        check_is_fitted(self, "spectrum_")
        eta, t = X
        d = self.transform(eta)[0]
        idx = self.spectrum_.indices(MAXWELL)
        return self.eigenvalues_[idx] + float(t) * d[idx]
