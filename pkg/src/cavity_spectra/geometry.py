"""Structured hexahedral meshes of axis-aligned boxes and tensor Gauss rules.

Node ``(i, j, k)`` of an ``nx x ny x nz`` grid has global index
``i + (nx + 1) * (j + (ny + 1) * k)``.  Boundary membership is decided from
these integer indices, never from coordinates.
"""
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_count, check_extent, check_subdivisions
from .exceptions import InvalidArgumentError

#: Face names, ordered so that face ``f`` has normal along axis ``f // 2``.
FACES = ("x0", "x1", "y0", "y1", "z0", "z1")

AXES = ("x", "y", "z")

# Reference-cell corner signs in the usual hexahedron ordering.
_CORNERS = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``(0, a) x (0, b) x (0, c)``."""

    extent: tuple

    def __post_init__(self):
        object.__setattr__(self, "extent", check_extent(self.extent))

    @property
    def volume(self):
        a, b, c = self.extent
        return a * b * c

    @property
    def center(self):
        return np.asarray(self.extent) / 2.0


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss rule on the reference cell ``[-1, 1]^3``."""

    points: np.ndarray
    weights: np.ndarray
    degree: int
    points_1d: np.ndarray = field(repr=False)
    weights_1d: np.ndarray = field(repr=False)

    @property
    def reference_volume(self):
        return 8.0

    def __len__(self):
        return len(self.weights)


MAX_GAUSS_DEGREE = 19


def gauss_rule(degree=5):
    """Tensor-product Gauss-Legendre rule exact for tensor polynomials of ``degree``.

    Each direction uses ``ceil((degree + 1) / 2)`` points, so degree 3 gives
    the 2 x 2 x 2 rule and degree 5 the 3 x 3 x 3 rule.
    """
    degree = check_count(degree, "degree")
    if degree > MAX_GAUSS_DEGREE:
        raise InvalidArgumentError(f"degree must be <= {MAX_GAUSS_DEGREE}, got {degree}")
    n = (degree + 2) // 2
    x1, w1 = np.polynomial.legendre.leggauss(n)
    gx, gy, gz = np.meshgrid(x1, x1, x1, indexing="ij")
    wx, wy, wz = np.meshgrid(w1, w1, w1, indexing="ij")
    # x fastest, matching the node numbering
    pts = np.stack([gx.ravel("F"), gy.ravel("F"), gz.ravel("F")], axis=1)
    wts = (wx * wy * wz).ravel("F")
    for arr in (pts, wts, x1, w1):
        arr.setflags(write=False)
    return QuadratureRule(points=pts, weights=wts, degree=degree, points_1d=x1, weights_1d=w1)


def reference_shape_functions(xi):
    """Trilinear shape values and reference gradients at points ``xi`` (Q, 3).

    Returns ``N`` with shape (Q, 8) and ``dN`` with shape (Q, 8, 3).
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    lin = 1.0 + xi[:, None, :] * _CORNERS[None, :, :]  # (Q, 8, 3)
    N = np.prod(lin, axis=2) / 8.0
    dN = np.empty(lin.shape)
    for k in range(3):
        others = [m for m in range(3) if m != k]
        dN[:, :, k] = _CORNERS[None, :, k] * lin[:, :, others[0]] * lin[:, :, others[1]] / 8.0
    return N, dN


class Mesh:
    """Uniform tensor hexahedral mesh of a :class:`BoxDomain`.

    Parameters
    ----------
    domain : BoxDomain
    subdivisions : tuple of int
        Cells per axis ``(nx, ny, nz)``.
    """

    def __init__(self, domain, subdivisions):
        self.domain = domain
        self.subdivisions = check_subdivisions(subdivisions)

    @property
    def extent(self):
        return self.domain.extent

    @property
    def h(self):
        return np.asarray(self.extent) / np.asarray(self.subdivisions)

    @property
    def n_nodes(self):
        nx, ny, nz = self.subdivisions
        return (nx + 1) * (ny + 1) * (nz + 1)

    @property
    def n_cells(self):
        nx, ny, nz = self.subdivisions
        return nx * ny * nz

    @cached_property
    def node_indices(self):
        """Integer grid index ``(i, j, k)`` of every node, shape (n_nodes, 3)."""
        nx, ny, nz = self.subdivisions
        i, j, k = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), np.arange(nz + 1), indexing="ij")
        out = np.stack([i.ravel("F"), j.ravel("F"), k.ravel("F")], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def nodes(self):
        out = self.node_indices * self.h[None, :]
        out.setflags(write=False)
        return out

    def node_id(self, i, j, k):
        nx, ny, _ = self.subdivisions
        return i + (nx + 1) * (j + (ny + 1) * k)

    @cached_property
    def cell_indices(self):
        nx, ny, nz = self.subdivisions
        i, j, k = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
        out = np.stack([i.ravel("F"), j.ravel("F"), k.ravel("F")], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def cells(self):
        """Connectivity, shape (n_cells, 8), in reference-corner order."""
        ci = self.cell_indices
        offsets = ((_CORNERS + 1) / 2).astype(int)
        idx = ci[:, None, :] + offsets[None, :, :]
        out = self.node_id(idx[..., 0], idx[..., 1], idx[..., 2])
        out.setflags(write=False)
        return out

    @cached_property
    def boundary_faces(self):
        """Boolean array (n_nodes, 6): node lies on face ``FACES[f]``."""
        idx = self.node_indices
        out = np.zeros((self.n_nodes, 6), dtype=bool)
        for axis, n in enumerate(self.subdivisions):
            out[:, 2 * axis] = idx[:, axis] == 0
            out[:, 2 * axis + 1] = idx[:, axis] == n
        out.setflags(write=False)
        return out

    def node_faces(self, node):
        """Set of face names incident to ``node``."""
        return frozenset(FACES[f] for f in np.flatnonzero(self.boundary_faces[node]))

    @property
    def boundary_nodes(self):
        return np.flatnonzero(self.boundary_faces.any(axis=1))

    def cell_jacobians(self, xi=None):
        """Jacobian matrices of the reference-to-physical map, shape (n_cells, Q, 3, 3)."""
        if xi is None:
            xi = np.zeros((1, 3))
        _, dN = reference_shape_functions(xi)
        X = self.nodes[self.cells]  # (C, 8, 3)
        return np.einsum("cai,qak->cqik", X, dN)

    def quadrature_points(self, rule):
        """Physical coordinates of every quadrature point, shape (n_cells, Q, 3)."""
        N, _ = reference_shape_functions(rule.points)
        return np.einsum("qa,cai->cqi", N, self.nodes[self.cells])

    @property
    def cell_jacobian_determinant(self):
        return float(np.prod(self.h) / 8.0)

    def to_json(self):
        return json.dumps({"extent": list(self.extent), "subdivisions": list(self.subdivisions)})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return build_box_mesh(data["extent"], data["subdivisions"])

    def __repr__(self):
        return f"Mesh(extent={self.extent}, subdivisions={self.subdivisions})"


def build_box_mesh(extent, subdivisions):
    """Uniform hexahedral mesh of ``(0, a) x (0, b) x (0, c)``."""
    return Mesh(BoxDomain(extent), subdivisions)


def tangential_constraints(mesh):
    """Map every node to the set of vector components fixed by ``nu x E = 0``.

    On a face normal to axis ``k`` the two other components are tangential.
    Edge and corner nodes take the union over incident faces.
    """
    mask = constrained_components(mesh)
    return {node: frozenset(AXES[c] for c in np.flatnonzero(mask[node])) for node in range(mesh.n_nodes)}


def constrained_components(mesh):
    """Boolean array (n_nodes, 3) marking constrained (node, component) pairs."""
    on_axis = mesh.boundary_faces[:, 0::2] | mesh.boundary_faces[:, 1::2]  # (n, 3)
    mask = np.zeros((mesh.n_nodes, 3), dtype=bool)
    for axis in range(3):
        for comp in range(3):
            if comp != axis:
                mask[:, comp] |= on_axis[:, axis]
    return mask
