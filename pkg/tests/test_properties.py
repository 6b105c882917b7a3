"""Property checks of structural invariants across modules."""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from threadpoolctl import threadpool_limits

from cavity_spectra.assembly import assemble_curlcurl, assemble_mass, assemble_pencil, interpolate
from cavity_spectra.eigensolve import solve_gsym
from cavity_spectra.exceptions import InvalidArgumentError
from cavity_spectra.geometry import FACES, build_box_mesh, gauss_rule, tangential_constraints
from cavity_spectra.lab.runner import run
from cavity_spectra.material import (
    AnalyticField,
    ConstantField,
    ExpressionField,
    PerCellField,
    ScalarField,
    audit_admissibility,
    centered_bump,
    identity,
    make_diagonal_direction,
    w1inf_distance,
)
from cavity_spectra.spectra import (
    MAXWELL,
    ClusterPartition,
    SensitivityReport,
    compute_spectrum,
    maxwell_eigenvalues,
    random_smooth_direction,
)
from cavity_spectra.spectra.spectrum import _rotate_degenerate

from conftest import CUBE
from oracles import random_spd_pencil


def all_field_kinds(mesh):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3))
    return [
        ConstantField(a),
        ScalarField(lambda x: 1 + x[:, 0] ** 2, lambda x: np.stack([2 * x[:, 0], 0 * x[:, 0], 0 * x[:, 0]], 1)),
        ExpressionField({"xx": "1 + x*y", "xy": "sin(z)", "yz": "0.3*x", "zz": "2"}),
        AnalyticField(lambda x: np.einsum("n,ij->nij", x[:, 0], a), lambda x: np.zeros((len(x), 3, 3, 3))),
        PerCellField(mesh, rng.standard_normal((mesh.n_cells, 3, 3))),
        make_diagonal_direction([1, 0.5, 0.25], centered_bump(CUBE), extent=CUBE),
        identity() + 0.3 * random_smooth_direction(rng, CUBE),
    ]


def test_fields_exactly_symmetric(cube4):
    x = np.random.default_rng(1).uniform(0, np.pi, (100, 3))
    for f in all_field_kinds(cube4):
        v = f.value(x)
        assert np.array_equal(v, np.swapaxes(v, -1, -2)), repr(f)
        j = f.jacobian(x)
        assert np.array_equal(j, np.swapaxes(j, 1, 2)), repr(f)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.floats(0.0, 0.4), st.floats(0.0, 0.4))
def test_coercivity_continuity(seed, s1, s2):
    mesh = build_box_mesh(CUBE, 2)
    rule = gauss_rule(3)
    rng = np.random.default_rng(seed)
    e1 = identity() + s1 * random_smooth_direction(rng, CUBE)
    e2 = identity() + s2 * random_smooth_direction(rng, CUBE)
    c1 = audit_admissibility(e1, mesh, rule).c_eps
    c2 = audit_admissibility(e2, mesh, rule).c_eps
    assert abs(c1 - c2) <= 3 * w1inf_distance(e1, e2, mesh, rule) + 1e-10


def test_semidefiniteness_and_coercivity_transfer(cube4, rule):
    eps = ExpressionField({"xx": "1.2 + 0.3*sin(x)", "xy": "0.1*cos(y)", "zz": "1.5"})
    c = audit_admissibility(eps, cube4, rule).c_eps
    p = assemble_pencil(cube4, rule, eps, 1.0)
    MI = assemble_pencil(cube4, rule, identity(), 1.0).M
    V = np.random.default_rng(2).standard_normal((p.dim, 100))
    for A in (p.K, p.P):
        assert np.einsum("ij,ij->j", V, A @ V).min() >= -1e-12
    q = np.einsum("ij,ij->j", V, p.M @ V)
    qI = np.einsum("ij,ij->j", V, MI @ V)
    # the sampled minimum may overshoot the true infimum slightly
    assert np.all(q >= 0.99 * c * qI)


def test_curl_form_converges_at_second_order(rule):
    exact = np.pi**3 / 2  # curl (sin y, 0, 0) = (0, 0, -cos y)
    errs = []
    for n in (4, 8, 16):
        m = build_box_mesh(CUBE, n)
        u = interpolate(m, lambda x: np.stack([np.sin(x[:, 1]), 0 * x[:, 0], 0 * x[:, 0]], 1)).ravel()
        errs.append(abs(u @ (assemble_curlcurl(m, rule) @ u) - exact))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


@pytest.mark.parametrize("seed", range(10))
def test_shift_consistency(seed):
    rng = np.random.default_rng(seed)
    A, M = random_spd_pencil(rng, 30)
    a = solve_gsym(A, M, 10).values
    b = solve_gsym(A + M, M, 10).values
    np.testing.assert_allclose(b, a + 1, atol=1e-12 * (1 + a.max()))


@given(st.integers(0, 10**6))
def test_solution_invariants(seed):
    rng = np.random.default_rng(seed)
    A, M = random_spd_pencil(rng, 12)
    sol = solve_gsym(A, M, 6, tol=1e-8)
    assert np.all(np.diff(sol.values) >= 0)
    assert sol.residuals.max() <= 1e-8 and sol.gram_error <= 1e-8


def test_thread_count_agreement(cube6, rule):
    p = assemble_pencil(cube6, rule, identity(), 1.0)
    with threadpool_limits(limits=1):
        a = solve_gsym(p.A, p.M, 6, dense_threshold=10).values
    b = solve_gsym(p.A, p.M, 6, dense_threshold=10).values
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_node_faces_match_exact_planes():
    m = build_box_mesh((1.0, 0.7, 2.3), (3, 4, 5))
    for node in range(m.n_nodes):
        x = m.nodes[node]
        expect = set()
        for axis, name in enumerate("xyz"):
            if x[axis] == 0.0:
                expect.add(f"{name}0")
            if x[axis] == m.extent[axis]:
                expect.add(f"{name}1")
        assert m.node_faces(node) == expect


def test_constraints_depend_only_on_incident_faces():
    seen = {}
    for n in (1, 2, 3):
        m = build_box_mesh(CUBE, (n, n + 1, 2))
        tc = tangential_constraints(m)
        for node in range(m.n_nodes):
            key = m.node_faces(node)
            assert seen.setdefault(key, tc[node]) == tc[node]
    assert len(FACES) == 6


def test_kernel_trivial_on_cube(cube6, rule):
    spec = compute_spectrum(cube6, rule, identity(), 2.0, 6)
    assert maxwell_eigenvalues(spec)[0] >= 1.0


def test_labels_stable_under_sign_and_rotation(cube6, rule):
    spec = compute_spectrum(cube6, rule, identity(), 1.0, 8)
    rng = np.random.default_rng(3)
    V = spec.vectors * rng.choice([-1.0, 1.0], spec.vectors.shape[1])
    for c in spec.clusters:
        if len(c) > 1:
            Q, _ = np.linalg.qr(rng.standard_normal((len(c), len(c))))
            V[:, list(c)] = V[:, list(c)] @ Q
    W = _rotate_degenerate(spec.pencil, spec.values, V)
    r = np.sqrt(np.clip(np.einsum("ij,ij->j", W, spec.pencil.P @ W), 0, None))
    np.testing.assert_allclose(np.sort(r), np.sort(spec.div_residuals), atol=1e-6)


def test_cluster_blocks_within_tolerance():
    vals = np.sort(np.random.default_rng(4).choice([1.0, 2.0, 3.0], 12) * (1 + 1e-5 * np.arange(12)))
    p = ClusterPartition.from_values(vals, rel_tol=1e-3)
    assert sorted(p.indices) == list(range(12))
    for b in p.blocks:
        v = vals[list(b)]
        assert v.max() - v.min() <= 1e-3 * max(1.0, v.max()) * len(b)


def test_serialized_field_names(cube4, rule):
    spec = compute_spectrum(cube4, rule, identity(), 2.0, 4)
    assert {"values", "labels", "residuals", "clusters"} <= set(spec.to_dict())
    rep = SensitivityReport()
    rep.add_cluster([0, 1], 2.0, np.array([[1.0, 0.2], [0.2, -1.0]]), fd_slopes=[-1.02, 1.02])
    assert {"values", "slopes", "fd_errors"} <= set(rep.to_dict())
    json.dumps(rep.to_dict())
    with pytest.raises(InvalidArgumentError):
        rep.add_cluster([0, 1], 2.0, np.array([[1.0, 0.2], [0.3, -1.0]]))


def test_report_reproducible_from_embedded_config(tmp_path):
    config = {
        "kind": "spectrum",
        "domain": {"extent": [1.0, 1.2, 1.4]},
        "mesh": {"subdivisions": [2, 3, 3]},
        "permittivity": {"expressions": {"xx": "1 + 0.2*x"}},
        "tau": 1.5,
        "k": 5,
    }
    first = run(config, out_dir=str(tmp_path / "a"))
    embedded = json.loads((tmp_path / "a" / "report.json").read_text())["config"]
    second = run(embedded, out_dir=str(tmp_path / "b"))
    assert second.data["config_hash"] == first.data["config_hash"]
    for name in first.files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
