"""Empirical local Lipschitz ratios of eigenvalues with respect to the permittivity."""
import numpy as np

from ..exceptions import InvalidArgumentError
from ..material import AnalyticField, ConstantField, w1inf_distance
from .spectrum import DEFAULT_TOLERANCES, pencil_eigenvalues


def lipschitz_ratio(eps1, eps2, j, mesh, rule, tau=1.0, tols=DEFAULT_TOLERANCES, distance=None):
    """``|sigma_j[eps1] - sigma_j[eps2]| / ||eps1 - eps2||_{W^{1,inf}}`` with 1-based ``j``."""
    if not isinstance(j, (int, np.integer)) or j < 1:
        raise InvalidArgumentError(f"j must be a positive integer, got {j!r}")
    if distance is None:
        distance = w1inf_distance(eps1, eps2, mesh, rule)
    if not distance > 0:
        raise InvalidArgumentError("the two permittivities coincide (zero distance)")
    s1 = pencil_eigenvalues(mesh, rule, eps1, tau, j, tols)[j - 1]
    s2 = pencil_eigenvalues(mesh, rule, eps2, tau, j, tols)[j - 1]
    return abs(s1 - s2) / distance


def random_smooth_direction(rng, extent, max_wavenumber=2):
    """Smooth symmetric field ``A + B cos(k . x + phi)`` scaled to W^{1,inf} norm at most 1.

    ``A`` and ``B`` have entries uniform in [-1, 1]; ``k`` has integer
    entries in ``[0, max_wavenumber]`` per axis, scaled by ``pi / extent``.
    """
    A = rng.uniform(-1.0, 1.0, (3, 3))
    B = rng.uniform(-1.0, 1.0, (3, 3))
    A, B = 0.5 * (A + A.T), 0.5 * (B + B.T)
    k = rng.integers(0, max_wavenumber + 1, 3) * np.pi / np.asarray(extent, dtype=float)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    a, b = np.abs(A).max(), np.abs(B).max()
    scale = max(a + b, b * np.abs(k).max())
    A, B = A / scale, B / scale

    def value(x):
        c = np.cos(x @ k + phi)
        return A[None] + c[:, None, None] * B[None]

    def jacobian(x):
        s = -np.sin(x @ k + phi)
        return s[:, None, None, None] * B[None, :, :, None] * k[None, None, None, :]

    field = AnalyticField(value, jacobian, name="random-smooth")
    field.norm_estimate = 1.0
    return field


def positive_direction(rng, spread=0.3):
    """Constant direction ``(I + spread R) / ||.||`` with R symmetric, entries in [-1, 1].

    It is positive definite for ``spread < 1/3``, so every eigenvalue moves
    strictly along it and difference quotients stay away from zero.
    """
    R = rng.uniform(-1.0, 1.0, (3, 3))
    m = np.eye(3) + spread * 0.5 * (R + R.T)
    return ConstantField(m / np.abs(m).max())
