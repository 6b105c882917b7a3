"""Symmetric matrix fields: permittivities and perturbation directions.

Every field is evaluated on arrays of points with trailing dimension 3 and
returns ``value`` with trailing shape (3, 3) and ``jacobian`` with trailing
shape (3, 3, 3), where ``jacobian[..., i, j, k]`` is the derivative of entry
``(i, j)`` along ``x_k``.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_points
from .exceptions import InvalidArgumentError, NotAdmissibleError

_COMPONENTS = ("xx", "xy", "xz", "yy", "yz", "zz")
_COMPONENT_INDEX = {"xx": (0, 0), "xy": (0, 1), "xz": (0, 2), "yy": (1, 1), "yz": (1, 2), "zz": (2, 2)}


def _symmetrize(a):
    # (a + a^T) / 2 is exactly symmetric in IEEE arithmetic since + commutes
    return 0.5 * (a + np.swapaxes(a, -2, -1))


def _symmetrize_jacobian(j):
    return 0.5 * (j + np.swapaxes(j, -3, -2))


class MatrixField:
    """Base class for symmetric 3 x 3 matrix fields.

    Subclasses implement ``_value`` and ``_jacobian`` on an (N, 3) array.
    Fields support ``+``, ``-`` and scalar ``*`` and stay immutable.
    """

    kind = "analytic-matrix"
    #: False for fields outside W^{1,inf}; their jacobian is only the
    #: cellwise part and they are excluded from derivative checks.
    in_w1inf = True
    norm_estimate = None

    def value(self, x):
        x = check_points(x)
        flat = x.reshape(-1, 3)
        return self._value(flat).reshape(x.shape[:-1] + (3, 3))

    def jacobian(self, x):
        x = check_points(x)
        flat = x.reshape(-1, 3)
        return self._jacobian(flat).reshape(x.shape[:-1] + (3, 3, 3))

    def divergence(self, x):
        return matrix_divergence(self, x)

    def _value(self, x):
        raise NotImplementedError

    def _jacobian(self, x):
        raise NotImplementedError

    def __add__(self, other):
        if not isinstance(other, MatrixField):
            return NotImplemented
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        if not isinstance(other, MatrixField):
            return NotImplemented
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __mul__(self, scalar):
        if isinstance(scalar, MatrixField):
            return NotImplemented
        return LinearCombination([(float(scalar), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return LinearCombination([(-1.0, self)])


class ConstantField(MatrixField):
    kind = "constant"

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise InvalidArgumentError(f"constant field needs a 3x3 matrix, got shape {m.shape}")
        self.matrix = _symmetrize(m)
        self.matrix.setflags(write=False)

    def _value(self, x):
        return np.broadcast_to(self.matrix, (len(x), 3, 3)).copy()

    def _jacobian(self, x):
        return np.zeros((len(x), 3, 3, 3))

    def __repr__(self):
        return f"ConstantField({self.matrix.tolist()})"


def identity():
    return ConstantField(np.eye(3))


def diagonal(values):
    return ConstantField(np.diag(np.asarray(values, dtype=float)))


class ScalarField(MatrixField):
    """Isotropic field ``s(x) * I`` from a scalar function and its gradient."""

    kind = "scalar-isotropic"

    def __init__(self, func, grad):
        self.func = func
        self.grad = grad

    def _value(self, x):
        s = np.broadcast_to(np.asarray(self.func(x), dtype=float), (len(x),))
        return s[:, None, None] * np.eye(3)[None]

    def _jacobian(self, x):
        g = np.broadcast_to(np.asarray(self.grad(x), dtype=float), (len(x), 3))
        return np.eye(3)[None, :, :, None] * g[:, None, None, :]


class AnalyticField(MatrixField):
    """Field given by callables for its value and jacobian.

    The callables receive an (N, 3) array and return (N, 3, 3) and
    (N, 3, 3, 3) arrays.  Outputs are symmetrized in (i, j).
    """

    def __init__(self, value, jacobian, name=None):
        self._value_fn = value
        self._jacobian_fn = jacobian
        self.name = name

    def _value(self, x):
        return _symmetrize(np.asarray(self._value_fn(x), dtype=float))

    def _jacobian(self, x):
        return _symmetrize_jacobian(np.asarray(self._jacobian_fn(x), dtype=float))

    def __repr__(self):
        return f"AnalyticField({self.name or '<callable>'})"


class ExpressionField(MatrixField):
    """Closed-form field from per-component expressions in ``x, y, z``.

    Parameters
    ----------
    expressions : dict
        Keys among ``xx, xy, xz, yy, yz, zz``.  Missing diagonal entries
        default to ``"1"`` and missing off-diagonal ones to ``"0"``.
        Derivatives are taken symbolically.
    """

    def __init__(self, expressions):
        import sympy

        unknown = set(expressions) - set(_COMPONENTS)
        if unknown:
            raise InvalidArgumentError(f"unknown permittivity components: {sorted(unknown)}")
        sx, sy, sz = sympy.symbols("x y z", real=True)
        self.expressions = {}
        entries, derivs = {}, {}
        for comp in _COMPONENTS:
            default = "1" if comp[0] == comp[1] else "0"
            text = str(expressions.get(comp, default))
            try:
                expr = sympy.sympify(text, locals={"x": sx, "y": sy, "z": sz, "pi": sympy.pi})
            except (sympy.SympifyError, SyntaxError, TypeError) as exc:
                raise InvalidArgumentError(f"cannot parse expression {comp}={text!r}: {exc}") from exc
            extra = expr.free_symbols - {sx, sy, sz}
            if extra:
                raise InvalidArgumentError(f"expression {comp}={text!r} uses unknown symbols {extra}")
            self.expressions[comp] = text
            entries[comp] = sympy.lambdify((sx, sy, sz), expr, "numpy")
            derivs[comp] = [sympy.lambdify((sx, sy, sz), sympy.diff(expr, s), "numpy") for s in (sx, sy, sz)]
        self._entries = entries
        self._derivs = derivs
        self.kind = "constant" if all(
            not sympy.sympify(self.expressions[c], locals={"x": sx, "y": sy, "z": sz}).free_symbols
            for c in _COMPONENTS
        ) else "analytic-matrix"

    @staticmethod
    def _eval(fn, x):
        return np.broadcast_to(np.asarray(fn(x[:, 0], x[:, 1], x[:, 2]), dtype=float), (len(x),))

    def _value(self, x):
        out = np.empty((len(x), 3, 3))
        for comp, (i, j) in _COMPONENT_INDEX.items():
            out[:, i, j] = out[:, j, i] = self._eval(self._entries[comp], x)
        return out

    def _jacobian(self, x):
        out = np.empty((len(x), 3, 3, 3))
        for comp, (i, j) in _COMPONENT_INDEX.items():
            for k in range(3):
                out[:, i, j, k] = out[:, j, i, k] = self._eval(self._derivs[comp][k], x)
        return out

    def __repr__(self):
        return f"ExpressionField({self.expressions})"


class PerCellField(MatrixField):
    """Piecewise-constant field, one symmetric matrix per mesh cell.

    Not in W^{1,inf}: the jacobian is reported as zero (the cellwise part) and
    ``in_w1inf`` is False.
    """

    kind = "per-cell-constant"
    in_w1inf = False

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n_cells, 3, 3):
            raise InvalidArgumentError(f"expected shape {(mesh.n_cells, 3, 3)}, got {values.shape}")
        self.mesh = mesh
        self.values = _symmetrize(values)

    def _cell_of(self, x):
        n = np.asarray(self.mesh.subdivisions)
        idx = np.clip(np.floor(x / self.mesh.h).astype(int), 0, n - 1)
        return idx[:, 0] + n[0] * (idx[:, 1] + n[1] * idx[:, 2])

    def _value(self, x):
        return self.values[self._cell_of(x)]

    def _jacobian(self, x):
        return np.zeros((len(x), 3, 3, 3))


class LinearCombination(MatrixField):
    def __init__(self, terms):
        flat = []
        for coef, f in terms:
            if isinstance(f, LinearCombination):
                flat.extend((coef * c, g) for c, g in f.terms)
            else:
                flat.append((float(coef), f))
        self.terms = tuple(flat)
        kinds = {f.kind for _, f in flat}
        if "per-cell-constant" in kinds:
            self.kind = "per-cell-constant"
        elif kinds == {"constant"}:
            self.kind = "constant"
        elif kinds <= {"constant", "scalar-isotropic"}:
            self.kind = "scalar-isotropic"
        else:
            self.kind = "analytic-matrix"
        self.in_w1inf = all(f.in_w1inf for _, f in flat)

    def _value(self, x):
        return sum(c * f._value(x) for c, f in self.terms)

    def _jacobian(self, x):
        return sum(c * f._jacobian(x) for c, f in self.terms)

    def __repr__(self):
        return " + ".join(f"{c:g}*{f!r}" for c, f in self.terms)


def matrix_divergence(field, x):
    """Vector whose k-th entry is the divergence of the k-th column of ``field``."""
    jac = field.jacobian(x)
    return np.einsum("...iki->...k", jac)


# -- bumps and splitting directions -------------------------------------------


class CosineBump:
    """Tensor C^1 bump ``prod_k cos^2(pi s_k / 2)`` with ``s = (x - center) / radius``.

    Supported in the closed box ``|x_k - center_k| <= radius_k``.
    """

    def __init__(self, center, radius, amplitude=1.0):
        self.center = np.asarray(center, dtype=float).reshape(3)
        self.radius = np.broadcast_to(np.asarray(radius, dtype=float), (3,)).copy()
        if np.any(self.radius <= 0):
            raise InvalidArgumentError("bump radius must be > 0")
        self.amplitude = float(amplitude)

    def _parts(self, x):
        s = (x - self.center) / self.radius
        inside = np.abs(s) < 1.0
        c = np.where(inside, np.cos(0.5 * np.pi * s) ** 2, 0.0)
        dc = np.where(inside, -0.5 * np.pi * np.sin(np.pi * s), 0.0) / self.radius
        return c, dc

    def value(self, x):
        c, _ = self._parts(np.atleast_2d(x))
        return self.amplitude * np.prod(c, axis=1)

    def gradient(self, x):
        c, dc = self._parts(np.atleast_2d(x))
        g = np.empty_like(c)
        for k in range(3):
            others = [m for m in range(3) if m != k]
            g[:, k] = dc[:, k] * c[:, others[0]] * c[:, others[1]]
        return self.amplitude * g

    def w1inf_norm(self):
        """Exact ``max(sup|xi|, max_k sup|d_k xi|)``."""
        return abs(self.amplitude) * max(1.0, np.pi / (2.0 * self.radius.min()))

    def inside(self, extent):
        """True if the support stays a positive distance away from the box boundary."""
        lo = self.center - self.radius
        hi = self.center + self.radius
        return bool(np.all(lo > 0) and np.all(hi < np.asarray(extent)))

    def __repr__(self):
        return f"CosineBump(center={self.center.tolist()}, radius={self.radius.tolist()}, amplitude={self.amplitude})"


def centered_bump(extent, fraction=0.95):
    extent = np.asarray(extent, dtype=float)
    return CosineBump(extent / 2.0, fraction * extent / 2.0)


class DiagonalBumpField(MatrixField):
    """``bump(x) * diag(weights)``."""

    def __init__(self, bump, weights):
        self.bump = bump
        self.weights = np.asarray(weights, dtype=float).reshape(3)

    def _value(self, x):
        return self.bump.value(x)[:, None, None] * np.diag(self.weights)[None]

    def _jacobian(self, x):
        g = self.bump.gradient(x)
        return np.diag(self.weights)[None, :, :, None] * g[:, None, None, :]

    def __repr__(self):
        return f"DiagonalBumpField({self.bump!r}, weights={self.weights.tolist()})"


def make_diagonal_direction(weights, bump, extent=None):
    """Unit W^{1,inf} direction ``bump * diag(weights) / ||.||``."""
    weights = np.asarray(weights, dtype=float).reshape(3)
    if extent is not None and not bump.inside(extent):
        raise InvalidArgumentError("bump support must stay inside the domain")
    norm = np.abs(weights).max() * bump.w1inf_norm()
    if norm == 0:
        raise InvalidArgumentError("direction is identically zero")
    field = DiagonalBumpField(bump, weights / norm)
    field.norm_estimate = 1.0
    return field


def make_splitting_direction(h, bump, extent=None):
    """Direction with a single nonzero entry ``(h, h)`` equal to the normalized bump.

    ``h`` is the 1-based axis index.
    """
    if h not in (1, 2, 3):
        raise InvalidArgumentError(f"axis index h must be 1, 2 or 3, got {h!r}")
    weights = np.zeros(3)
    weights[h - 1] = 1.0
    return make_diagonal_direction(weights, bump, extent=extent)


def random_constant_direction(rng):
    """Constant symmetric matrix with entries uniform in [-1, 1], scaled to max entry 1."""
    a = rng.uniform(-1.0, 1.0, size=(3, 3))
    a = _symmetrize(a)
    return ConstantField(a / np.abs(a).max())


# -- audits ---------------------------------------------------------------------


@dataclass(frozen=True)
class CoercivityEstimate:
    c_eps: float
    argmin_point: tuple
    n_samples: int


def sample_points(mesh, rule, oversample=4):
    """Quadrature points plus a uniform grid on the closed box.

    The grid carries about ``oversample`` times as many points as the
    quadrature rule does in total.
    """
    qp = mesh.quadrature_points(rule).reshape(-1, 3)
    n1 = len(rule.points_1d)
    per_axis = [int(np.ceil(oversample ** (1.0 / 3.0) * n1 * n)) + 1 for n in mesh.subdivisions]
    axes = [np.linspace(0.0, L, m) for L, m in zip(mesh.extent, per_axis)]
    g = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return np.concatenate([qp, g], axis=0)


def _chunks(n, size=20000):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def audit_admissibility(eps, mesh, rule, oversample=4):
    """Estimate the coercivity constant as the minimum sampled matrix eigenvalue.

    Raises
    ------
    NotAdmissibleError
        If some sample has a non-positive smallest eigenvalue.
    """
    pts = sample_points(mesh, rule, oversample)
    best, where = np.inf, None
    for sl in _chunks(len(pts)):
        lam = np.linalg.eigvalsh(eps.value(pts[sl]))[:, 0]
        i = int(np.argmin(lam))
        if lam[i] < best:
            best, where = float(lam[i]), pts[sl][i]
    if not best > 0:
        raise NotAdmissibleError(
            f"permittivity not coercive: smallest eigenvalue {best:.6g} at {tuple(where)}",
            point=where,
            min_eigenvalue=best,
        )
    return CoercivityEstimate(c_eps=best, argmin_point=tuple(float(v) for v in where), n_samples=len(pts))


def w1inf_distance(eps1, eps2, mesh, rule, oversample=4):
    """Sampled ``max_{ij} max(sup|d_ij|, max_k sup|d_k d_ij|)`` of ``eps1 - eps2``."""
    pts = sample_points(mesh, rule, oversample)
    out = 0.0
    for sl in _chunks(len(pts)):
        p = pts[sl]
        dv = np.abs(eps1.value(p) - eps2.value(p)).max()
        dj = np.abs(eps1.jacobian(p) - eps2.jacobian(p)).max()
        out = max(out, float(dv), float(dj))
    return out


def w1inf_norm(field, mesh, rule, oversample=4):
    return w1inf_distance(field, ConstantField(np.zeros((3, 3))), mesh, rule, oversample)


def linf_norm(field, mesh, rule, oversample=4):
    pts = sample_points(mesh, rule, oversample)
    return max(float(np.abs(field.value(pts[sl])).max()) for sl in _chunks(len(pts)))


def corner_offset_bumps(extent):
    """Three bumps centered off the box center, used as extra splitting candidates."""
    extent = np.asarray(extent, dtype=float)
    out = []
    for frac in ((0.35, 0.4, 0.45), (0.6, 0.35, 0.55), (0.45, 0.62, 0.38)):
        c = extent * np.asarray(frac)
        r = 0.9 * np.minimum(c, extent - c)
        out.append(CosineBump(c, r))
    return out


PRESET_PERMITTIVITIES = {
    "eps-identity": "identity matrix",
    "eps-scaled-identity": "alpha * I (parameter alpha, default 2)",
    "eps-diag": "constant diagonal (parameter diag, default [1.0, 1.3, 1.6])",
    "eps-sine": "I + amplitude*sin(x) e_11 (parameter amplitude, default 0.5)",
}


def permittivity_from_spec(spec):
    """Build a field from a config entry (preset name or expression table)."""
    if "expressions" in spec:
        return ExpressionField(spec["expressions"])
    preset = spec.get("preset")
    if preset == "eps-identity":
        return identity()
    if preset == "eps-scaled-identity":
        return ConstantField(float(spec.get("alpha", 2.0)) * np.eye(3))
    if preset == "eps-diag":
        return diagonal(spec.get("diag", [1.0, 1.3, 1.6]))
    if preset == "eps-sine":
        amp = float(spec.get("amplitude", 0.5))
        return ExpressionField({"xx": f"1 + {amp!r}*sin(x)"})
    raise InvalidArgumentError(f"unknown permittivity preset {preset!r}")

