"""Spectral analysis of the penalized Maxwell pencil."""
from .lipschitz import lipschitz_ratio, positive_direction, random_smooth_direction
from .sensitivity import (
    FDCheck,
    SensitivityReport,
    central_difference,
    checked_derivative,
    cluster_sensitivity,
    discrete_eigenvalue_derivative,
    one_sided_slopes,
    continuum_eigenvalue_derivative,
    partition_from_spectrum,
    penalty_gap_bound,
    richardson_derivative,
)
from .splitting import GenericityResult, SplitResult, genericity_search, split_cluster, splitting_candidates
from .spectrum import (
    AMBIGUOUS,
    DEFAULT_TOLERANCES,
    GRADIENT,
    MAXWELL,
    Spectrum,
    Tolerances,
    classify,
    compute_spectrum,
    dirichlet_values_covering,
    maxwell_clusters,
    maxwell_eigenvalues,
    maxwell_first_tau,
    pencil_eigenvalues,
    resolve_ambiguous,
)
from .symmetric import (
    ClusterPartition,
    branch_slopes,
    derivative_coefficients,
    partition_symmetric_function,
    rellich_nagy_matrix,
    symmetric_function,
    symmetric_function_derivative,
)
from .tracking import BranchCurves, linear_path, local_slopes, track_branches

__all__ = [name for name in dir() if not name.startswith("_")]
