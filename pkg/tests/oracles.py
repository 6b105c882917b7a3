"""Independent reference computations used only by the tests."""
from itertools import combinations, product

import numpy as np


def dense_gsym_oracle(A, M):
    """All eigenvalues of ``A u = s M u`` via ``M^{-1/2} A M^{-1/2}`` (no Cholesky, no LAPACK gvx)."""
    w, Q = np.linalg.eigh(M)
    Mih = (Q / np.sqrt(w)) @ Q.T
    C = Mih @ A @ Mih
    return np.sort(np.linalg.eigvalsh(0.5 * (C + C.T)))


def random_spd_pencil(rng, n):
    X = rng.standard_normal((n, n))
    A = X @ X.T  # positive semi-definite
    Y = rng.standard_normal((n, n))
    M = Y @ Y.T + n * np.eye(n)
    return A, M


def subset_symmetric_function(values, s):
    return float(sum(np.prod(c) for c in combinations(values, s)))


def box_modes(extent, lam_max):
    """Maxwell eigenvalues of a box with eps = I by brute-force polarization count.

    For each wave vector with at least two nonzero indices, count the
    independent amplitudes ``a`` with ``a . k = 0`` whose field
    ``(a1 cos sin sin, a2 sin cos sin, a3 sin sin cos)`` is nonzero.
    """
    ext = np.asarray(extent, dtype=float)
    out = []
    mmax = int(np.ceil(np.sqrt(lam_max) * ext.max() / np.pi)) + 1
    for m in product(range(mmax + 1), repeat=3):
        k = np.asarray(m) * np.pi / ext
        lam = float(k @ k)
        if lam == 0 or lam > lam_max:
            continue
        # component i is nonzero only if the other two indices are nonzero
        allowed = [i for i in range(3) if all(m[j] != 0 for j in range(3) if j != i)]
        if not allowed:
            continue
        # dimension of {a supported on allowed : a . k = 0}
        kk = k[allowed]
        dim = len(allowed) - (1 if np.any(kk != 0) else 0)
        out.extend([lam] * dim)
    return np.sort(out)


def box_dirichlet(extent, lam_max):
    ext = np.asarray(extent, dtype=float)
    mmax = int(np.ceil(np.sqrt(lam_max) * ext.max() / np.pi)) + 1
    vals = []
    for m in product(range(1, mmax + 1), repeat=3):
        lam = float(np.sum((np.asarray(m) * np.pi / ext) ** 2))
        if lam <= lam_max:
            vals.append(lam)
    return np.sort(vals)


def fd_jacobian(f, x, h=1e-6):
    """Central-difference jacobian of a (N,3)->(N,...) point function; last axis is the direction."""
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-1)
