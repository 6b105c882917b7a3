"""Experiment runners composing the numerical modules; each returns result tables."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ConfigError, InvalidArgumentError
from ..geometry import build_box_mesh, gauss_rule
from ..material import (
    ConstantField,
    ScalarField,
    audit_admissibility,
    centered_bump,
    corner_offset_bumps,
    identity,
    make_diagonal_direction,
    make_splitting_direction,
    permittivity_from_spec,
    random_constant_direction,
    w1inf_distance,
)
from ..spectra import (
    GRADIENT,
    MAXWELL,
    Tolerances,
    checked_derivative,
    compute_spectrum,
    discrete_eigenvalue_derivative,
    genericity_search,
    linear_path,
    lipschitz_ratio,
    maxwell_clusters,
    continuum_eigenvalue_derivative,
    partition_from_spectrum,
    pencil_eigenvalues,
    positive_direction,
    random_smooth_direction,
    split_cluster,
    symmetric_function,
    track_branches,
)
from ..spectra.sensitivity import symmetric_function_derivative
from ..spectra.splitting import splitting_candidates
from ..spectra.symmetric import partition_symmetric_function
from .oracle import box_dirichlet_eigenvalues, box_maxwell_eigenvalues

SPECTRUM_HEADER = ("index", "sigma", "label", "div_residual", "cluster_id")
BRANCHES_HEADER = ("t", "branch_id", "value")
SENSITIVITY_HEADER = ("F", "s", "value", "derivative", "fd", "rel_err")


@dataclass
class Outcome:
    """Tables (name -> (header, rows)), JSON results, and optional branch curves."""

    results: dict
    tables: dict = field(default_factory=dict)
    curves: object = None


@dataclass(frozen=True)
class Setup:
    mesh: object
    rule: object
    eps: object
    tau: float
    k: int
    tols: Tolerances
    rng: np.random.Generator
    params: dict


def make_setup(config):
    mesh = build_box_mesh(config["domain"]["extent"], config["mesh"]["subdivisions"])
    rule = gauss_rule(config["quadrature_degree"])
    eps = permittivity_from_spec(config["permittivity"])
    tols = Tolerances(**config["tolerances"])
    return Setup(
        mesh=mesh,
        rule=rule,
        eps=eps,
        tau=float(config["tau"]),
        k=int(config["k"]),
        tols=tols,
        rng=np.random.default_rng(config["seed"]),
        params=config["params"],
    )


def _bump(mesh, name):
    if name == "center":
        return centered_bump(mesh.extent)
    return corner_offset_bumps(mesh.extent)[int(name[-1])]


def build_directions(spec, mesh, rng):
    """Direction fields ``(name, eta)`` from one direction entry of a config."""
    kind = spec["type"]
    if kind == "identity":
        return [("identity", identity())]
    if kind == "constant":
        return [("constant", ConstantField(spec["matrix"]))]
    if kind == "random-constant":
        return [(f"random{i}", random_constant_direction(rng)) for i in range(spec.get("count", 1))]
    bump_name = spec.get("bump", "center")
    bump = _bump(mesh, bump_name)
    if kind == "diagonal-bump":
        w = spec.get("weights", [1.0, 0.5, 0.25])
        return [(f"diag({','.join(repr(float(v)) for v in w)})-{bump_name}", make_diagonal_direction(w, bump, mesh.extent))]
    if kind == "splitting":
        h = spec.get("h", 1)
        return [(f"e{h}{h}-{bump_name}", make_splitting_direction(h, bump, mesh.extent))]
    if kind == "scalar-bump":
        return [(f"scalar-{bump_name}", _scalar_bump_direction(bump))]
    raise ConfigError(f"unknown direction type {kind!r}", pointer="/params/direction/type")


def _scalar_bump_direction(bump):
    norm = bump.w1inf_norm()
    f = ScalarField(lambda x: bump.value(x) / norm, lambda x: bump.gradient(x) / norm)
    f.norm_estimate = 1.0
    return f


def spectrum_rows(spec):
    ids = spec.cluster_ids()
    return [(j, spec.values[j], spec.labels[j], spec.div_residuals[j], int(ids[j])) for j in range(len(spec.values))]


# -- experiments -------------------------------------------------------------------


def run_spectrum(setup):
    audit = audit_admissibility(setup.eps, setup.mesh, setup.rule)
    spec = compute_spectrum(setup.mesh, setup.rule, setup.eps, setup.tau, setup.k, setup.tols)
    return Outcome(
        results={"spectrum": spec.to_dict(), "coercivity": audit.c_eps},
        tables={"spectrum.csv": (SPECTRUM_HEADER, spectrum_rows(spec))},
    )


def _isotropic_scale(eps):
    if eps.kind != "constant":
        return None
    m = eps.value(np.zeros((1, 3)))[0]
    if np.allclose(m, m[0, 0] * np.eye(3), rtol=0, atol=0):
        return float(m[0, 0])
    return None


def run_validate(setup):
    """Compare with the closed-form box eigenvalues (constant ``alpha I`` only)."""
    alpha = _isotropic_scale(setup.eps)
    if alpha is None:
        raise ConfigError("validate needs a constant isotropic permittivity", pointer="/permittivity")
    spec = compute_spectrum(setup.mesh, setup.rule, setup.eps, setup.tau, setup.k, setup.tols)
    out = Outcome(
        results={"spectrum": spec.to_dict()},
        tables={"spectrum.csv": (SPECTRUM_HEADER, spectrum_rows(spec))},
    )
    rows = []
    for family, idx, oracle in (
        (MAXWELL, spec.indices(MAXWELL), box_maxwell_eigenvalues),
        (GRADIENT, spec.indices(GRADIENT), lambda e, c, a: setup.tau * box_dirichlet_eigenvalues(e, c, a)),
    ):
        expected = oracle(setup.mesh.extent, len(idx), alpha)
        for n, (j, ex) in enumerate(zip(idx, expected)):
            got = spec.values[j]
            rows.append((family, n, j, got, ex, abs(got - ex) / ex))
    out.tables["validation.csv"] = (("family", "rank", "index", "computed", "expected", "rel_err"), rows)
    out.results["validation"] = {
        "max_rel_err": max((r[-1] for r in rows), default=0.0),
        "n_maxwell": len(spec.indices(MAXWELL)),
        "n_gradient": len(spec.indices(GRADIENT)),
    }
    return out


def _directions(setup, default=({"type": "identity"},)):
    specs = setup.params.get("directions") or ([setup.params["direction"]] if "direction" in setup.params else list(default))
    out = []
    for s in specs:
        out.extend(build_directions(s, setup.mesh, setup.rng))
    return out


def run_derivative_check(setup):
    """Symmetric-function derivatives of the first ``n`` Maxwell clusters against FD."""
    n = setup.params.get("n", 5)
    steps = tuple(setup.params.get("fd_steps", (1e-2, 1e-3)))
    spec = compute_spectrum(setup.mesh, setup.rule, setup.eps, setup.tau, setup.k, setup.tols)
    clusters = maxwell_clusters(spec, n, setup.tols.cluster_tol)
    kmax = max(c[-1] for c in clusters) + 1
    rows, details = [], []
    for name, eta in _directions(setup):
        dmass = spec.pencil.mass_derivative(eta)
        dpen = spec.pencil.penalty_derivative(eta)

        def values_at(t, eta=eta):
            return pencil_eigenvalues(setup.mesh, setup.rule, setup.eps + t * eta, setup.tau, kmax, setup.tols)

        cache = {}

        def sym(t, F, s):
            if t not in cache:
                cache[t] = values_at(t)
            return symmetric_function(cache[t][F], s)

        for F in clusters:
            part = partition_from_spectrum(spec, F)
            bases = [spec.vectors[:, list(b)] for b in part.blocks]
            for s in range(1, len(F) + 1):
                d = symmetric_function_derivative(part, bases, dmass, s, mass=spec.pencil.M)
                fd = checked_derivative(lambda t: sym(t, F, s), steps=steps)
                est = float(fd.estimate)
                rel = abs(d - est) / max(abs(est), np.finfo(float).tiny)
                rows.append((F, s, partition_symmetric_function(part, s), d, est, rel))
                details.append({"direction": name, "F": F, "s": s, "fd_agree": fd.agree, "fd_spread": float(fd.spread)})
            if len(F) == 1:
                j = F[0]
                details[-1]["discrete"] = discrete_eigenvalue_derivative(
                    spec.pencil, spec.values[j], spec.vectors[:, j], eta, dmass, dpen
                )
                details[-1]["formula"] = continuum_eigenvalue_derivative(spec.pencil, spec.values[j], spec.vectors[:, j], eta, dmass)
    return Outcome(
        results={"spectrum": spec.to_dict(), "checks": details, "max_rel_err": max(r[-1] for r in rows)},
        tables={"spectrum.csv": (SPECTRUM_HEADER, spectrum_rows(spec)), "sensitivity.csv": (SENSITIVITY_HEADER, rows)},
    )


def run_branches(setup):
    (name, eta), *_ = _directions(setup, default=({"type": "diagonal-bump"},))
    ts = setup.params.get("t_grid", list(np.linspace(-0.02, 0.02, 9)))
    n = setup.params.get("n", 3)
    curves = track_branches(linear_path(setup.eps, eta), ts, setup.mesh, setup.rule, setup.tau, n, tols=setup.tols)
    return Outcome(
        results={"direction": name, "n_branches": n, "max_mismatch": curves.max_mismatch},
        tables={"branches.csv": (BRANCHES_HEADER, list(curves.rows()))},
        curves=curves,
    )


def _scalar_candidates(extent):
    for bname in ("center", "corner0", "corner1", "corner2"):
        bump = centered_bump(extent) if bname == "center" else corner_offset_bumps(extent)[int(bname[-1])]
        yield f"scalar-{bname}", _scalar_bump_direction(bump)


def run_split(setup):
    spec = compute_spectrum(setup.mesh, setup.rule, setup.eps, setup.tau, setup.k, setup.tols)
    cluster = setup.params.get("cluster")
    if cluster is None:
        multiple = [c for c in spec.clusters if len(c) > 1 and all(spec.labels[j] == MAXWELL for j in c)]
        if not multiple:
            raise InvalidArgumentError("spectrum has no multiple Maxwell cluster to split")
        cluster = list(multiple[0])
    if setup.params.get("candidates", "diagonal") == "scalar":
        cands = _scalar_candidates(setup.mesh.extent)
    else:
        cands = splitting_candidates(setup.mesh.extent)
    res = split_cluster(setup.eps, cluster, spec, setup.mesh, setup.rule, T=setup.params.get("T", 0.1), tols=setup.tols, candidates=cands)
    return Outcome(
        results={"split": res.to_dict(), "cluster": cluster, "before": spec.to_dict()},
        tables={"spectrum.csv": (SPECTRUM_HEADER, spectrum_rows(res.spectrum))},
    )


def run_genericity(setup):
    res = genericity_search(
        setup.eps,
        setup.mesh,
        setup.rule,
        setup.params.get("n", 5),
        setup.params.get("delta", 0.1),
        tau=None if setup.params.get("auto_tau", True) else setup.tau,
        tols=setup.tols,
        budget=setup.params.get("budget", 8),
    )
    return Outcome(
        results={"genericity": res.to_dict()},
        tables={"spectrum.csv": (SPECTRUM_HEADER, spectrum_rows(res.spectrum))},
    )


def run_lipschitz(setup):
    """Random pairs near ``eps`` and nested pairs along fixed positive directions."""
    p = setup.params
    js = p.get("j", [1])
    radius = p.get("radius", 0.1)
    rows = []
    for pair in range(p.get("n_pairs", 50)):
        e1 = setup.eps + float(setup.rng.uniform(0, radius)) * random_smooth_direction(setup.rng, setup.mesh.extent)
        e2 = setup.eps + float(setup.rng.uniform(0, radius)) * random_smooth_direction(setup.rng, setup.mesh.extent)
        d = w1inf_distance(e1, e2, setup.mesh, setup.rule)
        for j in js:
            r = lipschitz_ratio(e1, e2, j, setup.mesh, setup.rule, setup.tau, setup.tols, distance=d)
            rows.append(("random", pair, j, d, r))
    spreads = []
    for i in range(p.get("n_directions", 3)):
        eta = positive_direction(setup.rng)
        ratios = {j: [] for j in js}
        for s in p.get("nested_distances", [1e-1, 1e-2, 1e-3, 1e-4]):
            e2 = setup.eps + s * eta
            d = w1inf_distance(setup.eps, e2, setup.mesh, setup.rule)
            for j in js:
                r = lipschitz_ratio(setup.eps, e2, j, setup.mesh, setup.rule, setup.tau, setup.tols, distance=d)
                ratios[j].append(r)
                rows.append((f"nested{i}", s, j, d, r))
        for j in js:
            spreads.append(max(ratios[j]) / min(ratios[j]))
    finite = all(np.isfinite(r[-1]) for r in rows)
    return Outcome(
        results={"all_finite": finite, "max_nested_spread": max(spreads) if spreads else None},
        tables={"lipschitz.csv": (("set", "pair", "j", "distance", "ratio"), rows)},
    )


RUNNERS = {
    "validate": run_validate,
    "spectrum": run_spectrum,
    "derivative-check": run_derivative_check,
    "branches": run_branches,
    "split": run_split,
    "genericity": run_genericity,
    "lipschitz": run_lipschitz,
}
