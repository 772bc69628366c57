"""Randomized verification suites behind the `verify` CLI command.

Each suite returns (ok, report) where the report is a JSON-serializable dict
holding every measured residual, so failures are reproducible from the seed
recorded in it.
"""

from __future__ import annotations

import numpy as np

from . import fields as FL
from . import su2
from . import variational as V
from .config import RunConfig
from .fields import FramedField
from .harmonics import HarmonicBasis, QuadratureGrid, build_basis, hopf_grid


def _workspace(cfg: RunConfig) -> tuple[HarmonicBasis, QuadratureGrid]:
    return build_basis(cfg.basis_degree), hopf_grid(cfg.grid_levels)


def _bump_field(basis, grid, t: float) -> FramedField:
    """normalize(sigma_1 + t * w * sigma_2) where w is the first coordinate."""
    coeffs = FL.hopf_left(basis, grid).coeffs.copy()
    coeffs[1][basis.block_slice(1)] += t * FL._project_linear(basis, np.array([1.0, 0.0, 0.0, 0.0]))
    raw = grid.basis_values(basis) @ coeffs.T
    return FL.nodal_normalize_project(basis, grid, raw, provenance={"kind": "bump", "t": t})


def verify_identities(cfg: RunConfig) -> tuple[bool, dict]:
    """Translation-energy identity E_eta = 4 pi^2 + 2 E_v - E_mu, integrated and
    pointwise, at the Hopf field, seeded random unit fields, and a scaled family."""
    basis, grid = _workspace(cfg)
    tol_hopf = cfg.tol("identity_hopf")
    tol_rel = cfg.tol("identity_rel")
    tol_pw = cfg.tol("pointwise_identity")
    rows = []

    def record(name, F, seed=None):
        rep = V.energy_identity_report(F)
        pw = float(np.max(np.abs(V.pointwise_translation_identity_residual(F))))
        rel = abs(rep.identity_residual) / (1.0 + rep.E_eta)
        rows.append(
            {
                "case": name,
                "seed": seed,
                "E_vertical": rep.E_vertical,
                "E_eta": rep.E_eta,
                "E_mu": rep.E_mu,
                "identity_residual": rep.identity_residual,
                "relative_residual": rel,
                "pointwise_max": pw,
            }
        )
        return rel, pw, rep

    ok = True
    rel, pw, rep = record("hopf", FL.hopf_left(basis, grid))
    ok &= abs(rep.identity_residual) < tol_hopf and pw < tol_pw

    for i in range(20):
        seed = cfg.seed + i
        F = FL.random_unit(basis, grid, 3, seed=seed)
        rel, pw, _ = record("random_unit", F, seed=seed)
        ok &= rel < tol_rel and pw < tol_pw

    for t in (0.1, 0.2, 0.3):
        rel, pw, _ = record(f"bump_t={t}", _bump_field(basis, grid, t))
        ok &= rel < tol_rel and pw < tol_pw

    report = {
        "suite": "identities",
        "seed": cfg.seed,
        "tolerances": {"hopf": tol_hopf, "relative": tol_rel, "pointwise": tol_pw},
        "rows": rows,
        "ok": bool(ok),
    }
    return bool(ok), report


def verify_inequalities(cfg: RunConfig, samples: int = 100_000) -> tuple[bool, dict]:
    """Nonnegativity of the Lie-derivative gaps over random sample points.

    The nonlinear gap 2|L_F g|^2 - 4 (div F)^2 is scanned over 20 seeded unit
    fields; the linear gap is scanned for variations orthogonal to the Hopf
    field; the Hopf field itself must sit exactly on the equality case.
    """
    basis, grid = _workspace(cfg)
    floor = cfg.tol("inequality_floor")
    rng = np.random.default_rng(cfg.seed)
    n_fields = 20
    per_field = max(1, int(np.ceil(samples / n_fields)))

    sigma = FL.hopf_left(basis, grid)
    hopf_gap = float(np.max(np.abs(FL.inequality_gap("nonlinear", sigma))))

    nonlinear_min = np.inf
    linear_min = np.inf
    worst = {"nonlinear_seed": None, "linear_seed": None}
    total_samples = 0
    for i in range(n_fields):
        seed = cfg.seed + 100 + i
        points = su2.random_unit_quaternions(per_field, rng)
        total_samples += per_field
        F = FL.random_unit(basis, grid, 3, seed=seed)
        g = FL.inequality_gap("nonlinear", F, points=points)
        if g.min() < nonlinear_min:
            nonlinear_min, worst["nonlinear_seed"] = float(g.min()), seed
        A = FL.random_variation(basis, grid, 3, seed=seed + 1000).to_framed()
        g = FL.inequality_gap("linear", sigma, A=A, points=points)
        if g.min() < linear_min:
            linear_min, worst["linear_seed"] = float(g.min()), seed + 1000

    ok = nonlinear_min >= floor and linear_min >= floor and hopf_gap <= 1e-10
    report = {
        "suite": "inequalities",
        "seed": cfg.seed,
        "samples": total_samples,
        "floor": floor,
        "hopf_equality_gap_max": hopf_gap,
        "nonlinear_min_gap": nonlinear_min,
        "linear_min_gap": linear_min,
        "worst_seeds": worst,
        "ok": bool(ok),
    }
    return bool(ok), report


def verify_hessians(cfg: RunConfig) -> tuple[bool, dict]:
    """Agreement of the Jacobi-operator and Lie-derivative forms of the second
    variation, membership of the explicit 0 / 1 / 4 eigenfamilies, and the
    finite-difference tie-in to the energy itself."""
    basis, grid = _workspace(cfg)
    tol_rel = cfg.tol("hessian_rel")
    tol_eig = cfg.tol("eigen_membership")
    tol_sd = cfg.tol("second_difference_rel")
    rng = np.random.default_rng(cfg.seed)

    pair_worst = 0.0
    for i in range(50):
        a = FL.random_variation(basis, grid, 3, seed=cfg.seed + 200 + i)
        b = FL.random_variation(basis, grid, 3, seed=cfg.seed + 300 + i)
        vj, vb = V.hessian(a, b)
        pair_worst = max(pair_worst, abs(vj - vb) / max(1.0, abs(vj)))
    pairs_ok = pair_worst < tol_rel

    # eigen-membership rows: constants -> 0, conformal-gradient horizontals -> 1,
    # conformal lifts -> 4 (eigenvalue read off the quadratic form).
    rows = []

    def membership(name, var, lam):
        vj, vb = V.hessian(var, var)
        mass = var.l2_norm_sq()
        err = abs(vj - lam * mass) / max(1e-30, mass)
        rows.append({"family": name, "eigenvalue": lam, "rayleigh": vj / mass, "error": err})
        return err < tol_eig and abs(vj - vb) / max(1.0, abs(vj), abs(vb)) < tol_rel

    const = FL.VariationField(basis=basis, grid=grid, coeffs=np.zeros(basis.total_dim, complex))
    const.coeffs[0] = 0.7 - 0.4j
    members_ok = membership("constants", const, 0.0)
    members_ok &= membership("conformal_gradient", FL.conformal_gradient_horizontal(basis, grid, rng.normal(size=4)), 1.0)
    members_ok &= membership("conformal_lift", FL.conformal_lift(basis, grid, rng.normal(size=3)), 4.0)

    sd_rows = []
    sd_ok = True
    for name, var, lam in (
        ("constants", const, 0.0),
        ("conformal_gradient", FL.conformal_gradient_horizontal(basis, grid, rng.normal(size=4)), 1.0),
        ("conformal_lift", FL.conformal_lift(basis, grid, rng.normal(size=3)), 4.0),
    ):
        sd = V.energy_second_difference(var)
        target = lam * var.l2_norm_sq()
        err = abs(sd - target) / max(var.l2_norm_sq(), abs(target))
        sd_rows.append({"family": name, "second_difference": sd, "target": target, "error": err})
        sd_ok &= err < tol_sd

    ok = pairs_ok and members_ok and sd_ok
    report = {
        "suite": "hessians",
        "seed": cfg.seed,
        "pair_agreement_worst": pair_worst,
        "membership_rows": rows,
        "second_difference_rows": sd_rows,
        "ok": bool(ok),
    }
    return bool(ok), report


def verify_rigidity(cfg: RunConfig) -> tuple[bool, dict]:
    """Shear-parameter diagnostics: every Hopf field is a shear-free geodesic
    congruence with constant parameter +/- i and vanishing equation residuals;
    the classifier must also tell left from right on both canonical families."""
    basis, grid = _workspace(cfg)
    tol = cfg.tol("rigidity")
    rng = np.random.default_rng(cfg.seed)
    rows = []
    ok = True

    cases = [("left", (1.0, 0.0, 0.0)), ("left", tuple(rng.normal(size=3))), ("right", (1.0, 0.0, 0.0)), ("right", tuple(rng.normal(size=3)))]
    for side, axis in cases:
        F = FL.hopf_left(basis, grid, axis) if side == "left" else FL.hopf_right(basis, grid, axis)
        rep = V.rigidity_diagnostics(F)
        cls = V.classify_hopf(F, tol=cfg.tol("classify"))
        sign_err = min(abs(rep.phi_mean - 1j), abs(rep.phi_mean + 1j))
        good = (
            rep.applicable
            and sign_err < 1e-8
            and rep.phi_abs_minus_one_max < tol
            and rep.transport_residual_max < tol
            and rep.holomorphic_residual_max < tol
            and rep.laplacian_residual_max < tol
            and cls.is_hopf
            and cls.side == side
        )
        ok &= good
        rows.append(
            {
                "case": f"hopf_{side}",
                "axis": [float(a) for a in np.asarray(axis) / np.linalg.norm(axis)],
                "classified_side": cls.side,
                "phi_mean": [rep.phi_mean.real, rep.phi_mean.imag],
                "transport_residual_max": rep.transport_residual_max,
                "holomorphic_residual_max": rep.holomorphic_residual_max,
                "laplacian_residual_max": rep.laplacian_residual_max,
                "ok": bool(good),
            }
        )

    # a nodally renormalized perturbation is not geodesic: diagnostics must
    # flag themselves non-applicable but still report numbers
    pert = FL.perturbed_hopf(basis, grid, amplitude=0.05, seed=cfg.seed)
    rep = V.rigidity_diagnostics(pert)
    rows.append(
        {
            "case": "perturbed_non_example",
            "applicable": rep.applicable,
            "geodesity_max": rep.geodesity_max,
            "transport_residual_max": rep.transport_residual_max,
        }
    )
    ok &= not rep.applicable

    report = {"suite": "rigidity", "seed": cfg.seed, "rows": rows, "ok": bool(ok)}
    return bool(ok), report


SUITES = {
    "identities": verify_identities,
    "inequalities": verify_inequalities,
    "hessians": verify_hessians,
    "rigidity": verify_rigidity,
}
