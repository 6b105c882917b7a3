import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavity_spectra.exceptions import InvalidArgumentError
from cavity_spectra.geometry import (
    FACES,
    BoxDomain,
    Mesh,
    build_box_mesh,
    constrained_components,
    gauss_rule,
    reference_shape_functions,
    tangential_constraints,
)

from conftest import CUBE


def test_counts_unit_cube_2():
    m = build_box_mesh((1, 1, 1), 2)
    assert m.n_nodes == 27
    assert m.n_cells == 8
    assert len(m.boundary_nodes) == 26


def test_counts_anisotropic_subdivisions():
    m = build_box_mesh((1, 2, 3), (1, 2, 3))
    assert m.n_nodes == 2 * 3 * 4
    assert m.n_cells == 6
    np.testing.assert_allclose(m.h, [1, 1, 1])


def test_node_numbering_x_fastest():
    m = build_box_mesh((1, 1, 1), (2, 3, 4))
    i, j, k = 1, 2, 3
    nid = i + 3 * (j + 4 * k)
    np.testing.assert_array_equal(m.node_indices[nid], [i, j, k])
    np.testing.assert_allclose(m.nodes[nid], [0.5, 2 / 3, 0.75])


def test_cells_are_positively_oriented():
    m = build_box_mesh(CUBE, 3)
    J = m.cell_jacobians()
    assert np.all(np.linalg.det(J) > 0)
    np.testing.assert_allclose(np.linalg.det(J[:, 0]), m.cell_jacobian_determinant)


def test_boundary_faces_from_indices():
    m = build_box_mesh((1, 1, 1), 2)
    corner = m.node_id(0, 0, 0)
    assert m.node_faces(corner) == {"x0", "y0", "z0"}
    center = m.node_id(1, 1, 1)
    assert m.node_faces(center) == frozenset()
    face_mid = m.node_id(2, 1, 1)
    assert m.node_faces(face_mid) == {"x1"}


def test_tangential_constraints_by_face_type():
    m = build_box_mesh((1, 1, 1), 2)
    tc = tangential_constraints(m)
    assert tc[m.node_id(2, 1, 1)] == {"y", "z"}  # face normal to x
    assert tc[m.node_id(1, 0, 1)] == {"x", "z"}  # face normal to y
    assert tc[m.node_id(0, 0, 1)] == {"x", "y", "z"}  # edge
    assert tc[m.node_id(0, 0, 0)] == {"x", "y", "z"}  # corner
    assert tc[m.node_id(1, 1, 1)] == frozenset()


def test_constrained_count_matches_formula():
    n = 5
    m = build_box_mesh(CUBE, n)
    free = (~constrained_components(m)).sum()
    # component x is free on nodes with j, k interior
    assert free == 3 * (n + 1) * (n - 1) ** 2


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6))
def test_boundary_node_count(nx, ny, nz):
    m = build_box_mesh((1.0, 2.0, 0.5), (nx, ny, nz))
    interior = max(nx - 1, 0) * max(ny - 1, 0) * max(nz - 1, 0)
    assert len(m.boundary_nodes) == m.n_nodes - interior


@pytest.mark.parametrize("degree", [1, 3, 5, 7, 9])
def test_gauss_rule_exact_on_tensor_monomials(degree):
    rule = gauss_rule(degree)
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            r = degree - p - q
            f = rule.points[:, 0] ** p * rule.points[:, 1] ** q * rule.points[:, 2] ** r
            exact = np.prod([(1 - (-1) ** (e + 1)) / (e + 1) for e in (p, q, r)])
            assert abs(rule.weights @ f - exact) < 1e-13


@given(st.integers(1, 19))
def test_gauss_weights_sum_to_reference_volume(degree):
    rule = gauss_rule(degree)
    assert abs(rule.weights.sum() - rule.reference_volume) < 1e-12
    assert len(rule) == ((degree + 2) // 2) ** 3


def test_gauss_degree_bounds():
    with pytest.raises(InvalidArgumentError):
        gauss_rule(0)
    with pytest.raises(InvalidArgumentError):
        gauss_rule(20)


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_shape_functions_partition_of_unity(xi):
    N, dN = reference_shape_functions(np.asarray(xi))
    assert abs(N.sum() - 1) < 1e-14
    np.testing.assert_allclose(dN.sum(axis=1), 0, atol=1e-14)


def test_shape_gradients_match_finite_differences():
    xi = np.array([[0.3, -0.2, 0.7]])
    _, dN = reference_shape_functions(xi)
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (reference_shape_functions(xi + e)[0] - reference_shape_functions(xi - e)[0]) / (2 * h)
        np.testing.assert_allclose(dN[0, :, k], fd[0], atol=1e-9)


def test_quadrature_points_integrate_volume(rule):
    m = build_box_mesh((1.0, 2.0, 3.0), (2, 3, 4))
    total = m.n_cells * rule.weights.sum() * m.cell_jacobian_determinant
    assert abs(total - 6.0) < 1e-12
    pts = m.quadrature_points(rule)
    assert pts.shape == (m.n_cells, len(rule), 3)
    assert pts.min() > 0 and np.all(pts.max(axis=(0, 1)) < [1, 2, 3])


def test_invalid_extent_and_subdivisions():
    with pytest.raises(InvalidArgumentError):
        build_box_mesh((1, 0, 1), 2)
    with pytest.raises(InvalidArgumentError):
        build_box_mesh((1, 1, 1), 0)
    with pytest.raises(InvalidArgumentError):
        BoxDomain((1, 1))


def test_mesh_json_roundtrip():
    m = build_box_mesh((1, 2, 3), (2, 3, 4))
    m2 = Mesh.from_json(m.to_json())
    assert m2.subdivisions == m.subdivisions
    assert json.loads(m2.to_json()) == json.loads(m.to_json())
    np.testing.assert_array_equal(m2.cells, m.cells)


def test_face_order_normal_axes():
    assert [f[0] for f in FACES] == ["x", "x", "y", "y", "z", "z"]
