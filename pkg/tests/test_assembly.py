import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from cavity_spectra.assembly import (
    assemble_curlcurl,
    assemble_mass,
    assemble_pencil,
    assemble_penalty,
    assemble_penalty_derivative,
    assemble_scalar_pencil,
    div_of_product,
    evaluate_at_quadrature,
    interpolate,
    read_coo,
    write_coo,
)
from cavity_spectra.exceptions import InvalidArgumentError
from cavity_spectra.geometry import build_box_mesh
from cavity_spectra.material import (
    ConstantField,
    ExpressionField,
    centered_bump,
    diagonal,
    identity,
    make_diagonal_direction,
)

from conftest import CUBE

BOX = (1.0, 1.5, 2.0)
VOLUME = 3.0


@pytest.fixture(scope="module")
def small():
    return build_box_mesh(BOX, (2, 3, 3))


def nodal_vector(mesh, func):
    return interpolate(mesh, func).ravel()


def quad(mesh, rule, u, v, A):
    return float(nodal_vector(mesh, u) @ (A @ nodal_vector(mesh, v)))


def test_matrices_exactly_symmetric(small, rule):
    eps = ExpressionField({"xx": "2 + x*y", "xy": "0.1*z", "zz": "1.5 + 0.2*sin(y)"})
    for A in (assemble_curlcurl(small, rule), assemble_penalty(small, rule, eps), assemble_mass(small, rule, eps)):
        assert (A != A.T).nnz == 0


def test_mass_of_constant_field(small, rule):
    M = assemble_mass(small, rule, diagonal([2.0, 3.0, 5.0]))
    for i, alpha in enumerate((2.0, 3.0, 5.0)):
        e = np.zeros(3)
        e[i] = 1.0
        f = lambda x, e=e: np.tile(e, (len(x), 1))  # noqa: E731
        assert quad(small, rule, f, f, M) == pytest.approx(alpha * VOLUME, rel=1e-13)


def test_curl_of_gradient_field_vanishes(small, rule):
    K = assemble_curlcurl(small, rule)
    # grad(x y + y z + x z), interpolated exactly by trilinears
    g = lambda x: np.stack([x[:, 1] + x[:, 2], x[:, 0] + x[:, 2], x[:, 0] + x[:, 1]], 1)  # noqa: E731
    assert abs(quad(small, rule, g, g, K)) < 1e-12


def test_curlcurl_of_rotation_field(small, rule):
    K = assemble_curlcurl(small, rule)
    r = lambda x: np.stack([-x[:, 1], x[:, 0], 0 * x[:, 0]], 1)  # noqa: E731, curl = (0, 0, 2)
    assert quad(small, rule, r, r, K) == pytest.approx(4 * VOLUME, rel=1e-13)


def test_penalty_of_linear_field(small, rule):
    u = lambda x: np.stack([x[:, 0], 0 * x[:, 0], 0 * x[:, 0]], 1)  # noqa: E731
    P = assemble_penalty(small, rule, identity())
    assert quad(small, rule, u, u, P) == pytest.approx(VOLUME, rel=1e-13)
    # div(eps u) with eps = (1 + y) I and u = x e_x is 1 + y
    P2 = assemble_penalty(small, rule, ExpressionField({"xx": "1+y", "yy": "1+y", "zz": "1+y"}))
    exact = 1.0 * 2.0 * ((2.5**3 - 1.0) / 3.0)
    assert quad(small, rule, u, u, P2) == pytest.approx(exact, rel=1e-12)


def test_div_of_product_matches_closed_form(small, rule):
    eps = ExpressionField({"xx": "1 + x", "xy": "y", "zz": "2"})
    u = interpolate(small, lambda x: np.stack([x[:, 0] * x[:, 1], x[:, 2], x[:, 0]], 1))
    vals, grads = evaluate_at_quadrature(small, rule, u)
    pts = small.quadrature_points(rule)
    d = div_of_product(eps, pts, vals, grads)
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    # eps u = ((1+x) x y + y z, y x y + z, 2x)
    exact = (1 + 2 * x) * y + (2 * x * y)
    np.testing.assert_allclose(d, exact, atol=1e-12)


@given(st.floats(0.2, 5.0))
def test_scaling_identity(alpha):
    mesh = build_box_mesh(BOX, 2)
    from cavity_spectra.geometry import gauss_rule

    rule = gauss_rule(3)
    base = assemble_pencil(mesh, rule, identity(), 1.0)
    scaled = assemble_pencil(mesh, rule, ConstantField(alpha * np.eye(3)), 1.0)
    assert abs(scaled.M - alpha * base.M).max() <= 1e-13 * alpha
    assert abs(scaled.P - alpha**2 * base.P).max() <= 1e-12 * alpha**2
    assert (scaled.K != base.K).nnz == 0


def test_penalty_derivative_is_exact_central_difference(small, rule):
    eps = ExpressionField({"xx": "2 + x*y", "yz": "0.1*z", "zz": "1.5"})
    eta = make_diagonal_direction([1.0, 0.5, 0.25], centered_bump(BOX), extent=BOX)
    dP = assemble_penalty_derivative(small, rule, eps, eta)
    t = 0.3
    # the penalty form is quadratic in eps, so the central difference is exact
    fd = (assemble_penalty(small, rule, eps + t * eta) - assemble_penalty(small, rule, eps - t * eta)) / (2 * t)
    assert abs(dP - fd).max() < 1e-11 * abs(dP).max()
    dM = assemble_mass(small, rule, eta)
    fdM = (assemble_mass(small, rule, eps + t * eta) - assemble_mass(small, rule, eps - t * eta)) / (2 * t)
    assert abs(dM - fdM).max() < 1e-12


def test_pencil_reduction_and_maps(small, rule):
    p = assemble_pencil(small, rule, identity(), 2.0)
    assert p.K.shape == (p.dim, p.dim)
    assert abs(p.A - (p.K + 2.0 * p.P)).max() == 0
    assert abs(p.T - (p.A + p.M)).max() == 0
    dm = p.dof_map
    assert np.all(dm[p.free_dofs] == np.arange(p.dim))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(p.dim)
    np.testing.assert_array_equal(p.restrict(p.expand(v)), v)
    with pytest.raises(InvalidArgumentError):
        assemble_pencil(small, rule, identity(), 0.0)


def test_mass_positive_definite_after_reduction(small, rule):
    p = assemble_pencil(small, rule, identity(), 1.0)
    assert np.linalg.eigvalsh(p.M.toarray()).min() > 0


def test_scalar_pencil_sizes(small, rule):
    s = assemble_scalar_pencil(small, rule, identity())
    n_int = 1 * 2 * 2
    assert s.K.shape == (n_int, n_int)
    assert (s.K != s.K.T).nnz == 0


def test_coo_roundtrip(tmp_path, small, rule):
    A = assemble_penalty(small, rule, ExpressionField({"xx": "1 + x/3"}))
    path = tmp_path / "p.coo"
    write_coo(A, path)
    B = read_coo(path)
    assert (A != B).nnz == 0
    header = path.read_text().splitlines()[0].split()
    assert [int(t) for t in header] == [A.shape[0], A.shape[1], sp.coo_matrix(A).nnz]


def test_assembly_bitwise_deterministic(rule):
    mesh = build_box_mesh(CUBE, 3)
    eps = ExpressionField({"xx": "1 + 0.3*sin(x)", "xy": "0.1*cos(y)"})
    a = assemble_pencil(mesh, rule, eps, 1.0)
    b = assemble_pencil(mesh, rule, eps, 1.0)
    for X, Y in ((a.K, b.K), (a.P, b.P), (a.M, b.M)):
        assert np.array_equal(X.data, Y.data) and np.array_equal(X.indices, Y.indices)
