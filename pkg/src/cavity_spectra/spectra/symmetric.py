"""Elementary symmetric functions of eigenvalue clusters and their differentials.

A multiple eigenvalue is in general not differentiable along a path of
permittivities, but the elementary symmetric functions of a full group of
eigenvalues are.  Their differential only involves the eigenvectors through
the quadratic forms ``int eta E . E``.
"""
from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

from ..eigensolve import clusters_by_gap
from ..exceptions import InvalidArgumentError


def symmetric_function(values, s):
    """Elementary symmetric function of degree ``s``: sum over s-subsets of products."""
    values = np.asarray(values, dtype=float).ravel()
    if not isinstance(s, (int, np.integer)) or isinstance(s, bool):
        raise InvalidArgumentError(f"s must be an integer, got {s!r}")
    if not 1 <= s <= len(values):
        raise InvalidArgumentError(f"s must lie in [1, {len(values)}], got {s}")
    e = np.zeros(s + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1]
    return float(e[s])


@dataclass(frozen=True)
class ClusterPartition:
    """Index set ``F`` split into blocks ``F_k`` of equal eigenvalues.

    ``blocks`` holds the indices of each block and ``values`` their common
    eigenvalue.
    """

    blocks: tuple
    values: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        values = tuple(float(v) for v in self.values)
        if len(blocks) != len(values):
            raise InvalidArgumentError("one common value per block is required")
        if any(len(b) == 0 for b in blocks):
            raise InvalidArgumentError("blocks must be non-empty")
        flat = [i for b in blocks for i in b]
        if len(set(flat)) != len(flat):
            raise InvalidArgumentError("blocks must be disjoint")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "values", values)

    @property
    def indices(self):
        return tuple(sorted(i for b in self.blocks for i in b))

    @property
    def sizes(self):
        return tuple(len(b) for b in self.blocks)

    def __len__(self):
        return sum(self.sizes)

    @classmethod
    def from_values(cls, values, indices=None, rel_tol=1e-3):
        """Group sorted ``values`` (at ``indices``) into blocks of near-equal entries.

        The common value of a block is its mean.
        """
        values = np.asarray(values, dtype=float)
        if indices is None:
            indices = np.arange(len(values))
        indices = np.asarray(indices)
        order = np.argsort(values, kind="stable")
        values, indices = values[order], indices[order]
        groups = clusters_by_gap(values, rel_tol)
        return cls(
            blocks=tuple(tuple(int(indices[i]) for i in g) for g in groups),
            values=tuple(float(np.mean(values[g])) for g in groups),
        )

    def expanded_values(self):
        return np.repeat(self.values, self.sizes)


def _compositions(sizes, s):
    """All ``(s_1, .., s_n)`` with ``0 <= s_k <= sizes[k]`` summing to ``s``."""
    for combo in product(*(range(m + 1) for m in sizes)):
        if sum(combo) == s:
            yield combo


def partition_symmetric_function(partition, s):
    """``Lambda_{F,s}`` using block multiplicities; equals ``symmetric_function`` of the expanded values."""
    if not 1 <= s <= len(partition):
        raise InvalidArgumentError(f"s must lie in [1, {len(partition)}], got {s}")
    total = 0.0
    for combo in _compositions(partition.sizes, s):
        term = 1.0
        for m, sk, lam in zip(partition.sizes, combo, partition.values):
            term *= comb(m, sk) * lam ** sk
        total += term
    return total


def derivative_coefficients(partition, s):
    """Weights ``c_k`` with ``d Lambda_{F,s} = sum_k c_k * d(sum of block k)/lambda_k``.

    ``c_k = sum over compositions of binom(|F_k|-1, s_k-1) lambda_k^{s_k}
    prod_{j != k} binom(|F_j|, s_j) lambda_j^{s_j}``.
    """
    if not 1 <= s <= len(partition):
        raise InvalidArgumentError(f"s must lie in [1, {len(partition)}], got {s}")
    sizes, lams = partition.sizes, partition.values
    c = np.zeros(len(sizes))
    for combo in _compositions(sizes, s):
        for k in range(len(sizes)):
            if combo[k] == 0:
                continue
            term = comb(sizes[k] - 1, combo[k] - 1) * lams[k] ** combo[k]
            for j in range(len(sizes)):
                if j != k:
                    term *= comb(sizes[j], combo[j]) * lams[j] ** combo[j]
            c[k] += term
    return c


def check_orthonormal(basis, mass, tol=1e-8):
    """Raise unless ``basis`` has M-Gram matrix within ``tol`` of the identity."""
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    G = basis.T @ (mass @ basis)
    err = float(np.abs(G - np.eye(G.shape[0])).max())
    if err > tol:
        raise InvalidArgumentError(f"basis is not M-orthonormal (gram error {err:.3g})")
    return basis


def _eta_forms(basis, dmass):
    return np.einsum("ij,ij->j", basis, dmass @ basis)


def symmetric_function_derivative(partition, bases, dmass, s, mass=None, tol=1e-8):
    """Differential of ``Lambda_{F,s}`` along ``eta``.

    Parameters
    ----------
    partition : ClusterPartition
    bases : sequence of arrays
        One ``(n, |F_k|)`` M-orthonormal eigenvector block per partition block.
    dmass : sparse matrix
        Matrix of ``int eta phi . phi`` on the same degrees of freedom.
    s : int
    mass : sparse matrix, optional
        If given, the bases are checked for M-orthonormality to ``tol``.

    Returns
    -------
    float
        ``-sum_k c_k sum_{l in F_k} int eta E_l . E_l``.
    """
    if len(bases) != len(partition.blocks):
        raise InvalidArgumentError("one basis per partition block is required")
    sums = []
    for basis, block in zip(bases, partition.blocks):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.shape[1] != len(block):
            raise InvalidArgumentError(f"block of size {len(block)} got {basis.shape[1]} basis vectors")
        if mass is not None:
            check_orthonormal(basis, mass, tol)
        sums.append(float(np.sum(_eta_forms(basis, dmass))))
    c = derivative_coefficients(partition, s)
    return float(-np.dot(c, sums))


def rellich_nagy_matrix(lam, basis, dmass, mass=None, tol=1e-8):
    """Symmetric matrix ``-lam * int eta E_i . E_j`` over a cluster basis."""
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    if mass is not None:
        check_orthonormal(basis, mass, tol)
    R = -lam * (basis.T @ (dmass @ basis))
    return 0.5 * (R + R.T)


def branch_slopes(matrix):
    """Sorted eigenvalues of a Rellich-Nagy matrix: the one-sided branch slopes."""
    return np.linalg.eigvalsh(matrix)
