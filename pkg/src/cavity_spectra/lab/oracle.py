"""Closed-form eigenvalues of a box with constant isotropic permittivity ``alpha I``."""
from itertools import product

import numpy as np


def _wavenumbers(extent, mmax, min_index):
    a = np.asarray(extent, dtype=float)
    for m in product(range(min_index, mmax + 1), repeat=3):
        yield m, float(np.sum((np.asarray(m) * np.pi / a) ** 2))


def box_maxwell_eigenvalues(extent, count, alpha=1.0, mmax=12):
    """Smallest ``count`` Maxwell eigenvalues with multiplicity.

    Modes have indices ``m_i >= 0`` with at most one zero; exactly one zero
    gives one polarization, none gives two.  ``lambda = |k|^2 / alpha``.
    """
    vals = []
    for m, k2 in _wavenumbers(extent, mmax, 0):
        zeros = sum(v == 0 for v in m)
        if zeros == 1:
            vals.append(k2)
        elif zeros == 0:
            vals.extend([k2, k2])
    return np.sort(vals)[:count] / alpha


def box_dirichlet_eigenvalues(extent, count, alpha=1.0, mmax=12):
    """Smallest ``count`` eigenvalues of ``-div(alpha grad f)`` with ``f = 0`` on the boundary."""
    vals = [k2 for _, k2 in _wavenumbers(extent, mmax, 1)]
    return alpha * np.sort(vals)[:count]
