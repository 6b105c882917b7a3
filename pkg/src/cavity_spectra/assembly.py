"""Assembly of the penalized Maxwell pencil on trilinear vector nodal elements.

Global degree of freedom ``3 * node + component``.  Cells are merged in index
order and every assembled matrix is mirrored from its upper triangle, so the
results are exactly symmetric and independent of thread count.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._validation import check_positive
from .geometry import constrained_components, reference_shape_functions
from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class _ReferenceData:
    N: np.ndarray  # (Q, 8)
    G: np.ndarray  # physical gradients (Q, 8, 3)
    wJ: np.ndarray  # weights times jacobian determinant (Q,)
    points: np.ndarray  # physical quadrature points (C, Q, 3)


def _reference_data(mesh, rule):
    N, dN = reference_shape_functions(rule.points)
    G = dN * (2.0 / mesh.h)[None, None, :]
    wJ = rule.weights * mesh.cell_jacobian_determinant
    return _ReferenceData(N=N, G=G, wJ=wJ, points=mesh.quadrature_points(rule))


def _vector_dofs(mesh):
    return (3 * mesh.cells[:, :, None] + np.arange(3)[None, None, :]).reshape(mesh.n_cells, 24)


def _scatter(local, dofs, n):
    """Sum cell matrices (C, m, m) into an exactly symmetric CSR matrix."""
    C, m, _ = local.shape
    local = 0.5 * (local + np.swapaxes(local, 1, 2))
    rows = np.repeat(dofs, m, axis=1).ravel()
    cols = np.tile(dofs, (1, m)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    upper = sp.triu(A, k=0, format="csr")
    strict = sp.triu(A, k=1, format="csr")
    out = (upper + strict.T).tocsr()
    out.sort_indices()
    return out


def _curl_basis(G):
    """curl(N_a e_i) = grad N_a x e_i, shape (Q, 8, 3, 3) = (q, a, i, component)."""
    Q = G.shape[0]
    C = np.zeros((Q, 8, 3, 3))
    gx, gy, gz = G[..., 0], G[..., 1], G[..., 2]
    # e_x: (0, gz, -gy); e_y: (-gz, 0, gx); e_z: (gy, -gx, 0)
    C[:, :, 0, 1], C[:, :, 0, 2] = gz, -gy
    C[:, :, 1, 0], C[:, :, 1, 2] = -gz, gx
    C[:, :, 2, 0], C[:, :, 2, 1] = gy, -gx
    return C


def _eval_tensor(eps, points):
    return eps.value(points.reshape(-1, 3)).reshape(points.shape[:2] + (3, 3))


def _eval_divergence(eps, points):
    jac = eps.jacobian(points.reshape(-1, 3)).reshape(points.shape[:2] + (3, 3, 3))
    return np.einsum("cqiki->cqk", jac)


def _div_basis(ref, eps):
    """div(eps N_a e_j) = sum_i eps_ij d_i N_a + (div eps)_j N_a, shape (C, Q, 8, 3)."""
    if not hasattr(eps, "jacobian"):
        raise InvalidArgumentError("penalty assembly needs a field with a jacobian")
    E = _eval_tensor(eps, ref.points)
    dE = _eval_divergence(eps, ref.points)
    return np.einsum("cqij,qai->cqaj", E, ref.G) + dE[:, :, None, :] * ref.N[None, :, :, None]


def assemble_curlcurl(mesh, rule):
    """Matrix of ``int curl phi_u . curl phi_v`` over all vector DOFs (no constraints)."""
    ref = _reference_data(mesh, rule)
    C = _curl_basis(ref.G)
    Kloc = np.einsum("q,qaik,qbjk->aibj", ref.wJ, C, C).reshape(24, 24)
    local = np.broadcast_to(Kloc, (mesh.n_cells, 24, 24))
    return _scatter(local, _vector_dofs(mesh), 3 * mesh.n_nodes)


def assemble_penalty(mesh, rule, eps):
    """Matrix of ``int div(eps phi_u) div(eps phi_v)`` (no constraints)."""
    ref = _reference_data(mesh, rule)
    B = _div_basis(ref, eps).reshape(mesh.n_cells, -1, 24)
    local = np.einsum("q,cqa,cqb->cab", ref.wJ, B, B)
    return _scatter(local, _vector_dofs(mesh), 3 * mesh.n_nodes)


def assemble_penalty_derivative(mesh, rule, eps, eta):
    """Matrix of ``int div(eps phi_u) div(eta phi_v) + div(eta phi_u) div(eps phi_v)``.

    This is the derivative of the penalty matrix at ``eps`` along ``eta``.
    """
    ref = _reference_data(mesh, rule)
    Be = _div_basis(ref, eps).reshape(mesh.n_cells, -1, 24)
    Bn = _div_basis(ref, eta).reshape(mesh.n_cells, -1, 24)
    half = np.einsum("q,cqa,cqb->cab", ref.wJ, Be, Bn)
    local = half + np.swapaxes(half, 1, 2)
    return _scatter(local, _vector_dofs(mesh), 3 * mesh.n_nodes)


def assemble_mass(mesh, rule, eps):
    """Matrix of ``int eps phi_u . phi_v`` (no constraints).

    Linear in ``eps``, so it also gives the mass derivative along a direction.
    """
    ref = _reference_data(mesh, rule)
    E = _eval_tensor(eps, ref.points)
    local = np.einsum("q,qa,qb,cqij->caibj", ref.wJ, ref.N, ref.N, E).reshape(mesh.n_cells, 24, 24)
    return _scatter(local, _vector_dofs(mesh), 3 * mesh.n_nodes)


@dataclass(frozen=True, eq=False)
class OperatorPencil:
    """Reduced matrices of the penalized problem ``(K + tau P) u = sigma M u``.

    ``K + tau P + M`` is the matrix of the full form ``T_eps``; ``M`` is the
    matrix of the eps-inner product.
    """

    K: sp.csr_matrix
    P: sp.csr_matrix
    M: sp.csr_matrix
    tau: float
    free_dofs: np.ndarray
    mesh: object = field(repr=False)
    rule: object = field(repr=False)
    eps: object = field(repr=False)

    @property
    def A(self):
        return (self.K + self.tau * self.P).tocsr()

    @property
    def T(self):
        return (self.K + self.tau * self.P + self.M).tocsr()

    @property
    def dim(self):
        return len(self.free_dofs)

    @property
    def dof_map(self):
        """Array over global DOFs: reduced index, or -1 where constrained."""
        out = -np.ones(3 * self.mesh.n_nodes, dtype=int)
        out[self.free_dofs] = np.arange(self.dim)
        return out

    def reduce(self, matrix):
        return matrix[self.free_dofs][:, self.free_dofs].tocsr()

    def restrict(self, full):
        """Reduced coefficient vector(s) from nodal values shaped (n_nodes, 3) or (3 n_nodes, ...)."""
        full = np.asarray(full)
        if full.ndim >= 2 and full.shape[:2] == (self.mesh.n_nodes, 3):
            full = full.reshape((3 * self.mesh.n_nodes,) + full.shape[2:])
        return full[self.free_dofs]

    def expand(self, reduced):
        """Nodal values (n_nodes, 3) from a reduced vector, zeros on constrained DOFs."""
        out = np.zeros(3 * self.mesh.n_nodes)
        out[self.free_dofs] = reduced
        return out.reshape(self.mesh.n_nodes, 3)

    def mass_derivative(self, eta):
        return self.reduce(assemble_mass(self.mesh, self.rule, eta))

    def penalty_derivative(self, eta):
        return self.reduce(assemble_penalty_derivative(self.mesh, self.rule, self.eps, eta))


def free_vector_dofs(mesh):
    return np.flatnonzero(~constrained_components(mesh).ravel())


def assemble_pencil(mesh, rule, eps, tau=1.0):
    """Assemble K, P, M and eliminate the tangential boundary components."""
    tau = check_positive(tau, "tau")
    free = free_vector_dofs(mesh)
    sub = lambda A: A[free][:, free].tocsr()  # noqa: E731
    return OperatorPencil(
        K=sub(assemble_curlcurl(mesh, rule)),
        P=sub(assemble_penalty(mesh, rule, eps)),
        M=sub(assemble_mass(mesh, rule, eps)),
        tau=tau,
        free_dofs=free,
        mesh=mesh,
        rule=rule,
        eps=eps,
    )


@dataclass(frozen=True, eq=False)
class ScalarPencil:
    """Dirichlet pencil ``K_s f = rho M_s f`` for ``-div(eps grad f) = rho f``."""

    K: sp.csr_matrix
    M: sp.csr_matrix
    free_nodes: np.ndarray


def assemble_scalar_pencil(mesh, rule, eps):
    ref = _reference_data(mesh, rule)
    E = _eval_tensor(eps, ref.points)
    Sloc = np.einsum("q,qai,cqij,qbj->cab", ref.wJ, ref.G, E, ref.G)
    Mloc = np.broadcast_to(np.einsum("q,qa,qb->ab", ref.wJ, ref.N, ref.N), (mesh.n_cells, 8, 8))
    n = mesh.n_nodes
    S = _scatter(Sloc, mesh.cells, n)
    Ms = _scatter(Mloc, mesh.cells, n)
    interior = np.flatnonzero(~mesh.boundary_faces.any(axis=1))
    return ScalarPencil(K=S[interior][:, interior].tocsr(), M=Ms[interior][:, interior].tocsr(), free_nodes=interior)


# -- field evaluation ---------------------------------------------------------


def interpolate(mesh, func):
    """Nodal interpolant (n_nodes, 3) of a vector function ``func(points) -> (N, 3)``."""
    return np.asarray(func(mesh.nodes), dtype=float).reshape(mesh.n_nodes, 3)


def evaluate_at_quadrature(mesh, rule, nodal):
    """Values (C, Q, 3) and gradients (C, Q, 3, 3) of a nodal vector field.

    ``grad[..., i, k]`` is the derivative of component ``i`` along ``x_k``.
    """
    ref = _reference_data(mesh, rule)
    U = np.asarray(nodal)[mesh.cells]  # (C, 8, 3)
    values = np.einsum("qa,cai->cqi", ref.N, U)
    grads = np.einsum("qak,cai->cqik", ref.G, U)
    return values, grads


def quadrature_weights(mesh, rule):
    return rule.weights * mesh.cell_jacobian_determinant


def div_of_product(eps, points, values, grads):
    """``div(eps v) = tr(eps Dv) + div(eps) . v`` at quadrature points."""
    E = _eval_tensor(eps, points)
    dE = _eval_divergence(eps, points)
    return np.einsum("cqij,cqji->cq", E, grads) + np.einsum("cqk,cqk->cq", dE, values)


# -- COO text export ----------------------------------------------------------


def write_coo(matrix, path):
    """Write ``rows cols nnz`` then ``i j value`` lines with 17 significant digits."""
    A = sp.coo_matrix(matrix)
    order = np.lexsort((A.col, A.row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for r, c, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_coo(path):
    with open(path, encoding="ascii") as fh:
        rows, cols, nnz = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    return sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(rows, cols)).tocsr()
