"""Energy functionals, energy identities, Hessians, gradient flow and
classification of minimizers.

The vertical energy convention is E = (1/2) integral |grad F|^2, which puts
the left- and right-invariant unit fields at exactly 2 pi^2 (half the
squared-gradient mass of any unit Killing field of the round 3-sphere).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fields as FL
from . import su2
from .fields import FramedField, VariationField, require_unit
from .harmonics import HarmonicBasis, QuadratureGrid, sphere_volume
from .polynomials import PolyBag, QuaternionPoly

SPHERE_VOL = sphere_volume()
MIN_ENERGY = SPHERE_VOL  # conjectured-and-verified floor 2 pi^2 used in exit checks


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------


def dirichlet_energy(F: FramedField) -> float:
    """(1/2) integral |grad F|^2, exact from coefficients (no unit assumption)."""
    total = 0.0
    for d in FL.covariant_derivatives(F):
        total += float(np.sum(d.coeffs**2))
    return 0.5 * total


def l2_mass(F: FramedField) -> float:
    """integral |F|^2, exact from coefficients."""
    return float(np.sum(F.coeffs**2))


def normalized_vertical_energy(F: FramedField) -> float:
    """Vertical energy of the pointwise-normalized field F/|F|.

    The chain rule turns exact coefficient derivatives of F into nodal
    derivatives of F/|F|, so no projection of the normalized field is needed.
    Quadrature is the only approximation; it is exact whenever F is already
    unit at the nodes to machine precision.
    """
    vals = F.nodal_values()
    r2 = np.sum(vals**2, axis=1)
    if np.min(r2) < FL.MIN_FIELD_NORM**2:
        raise ValueError("field vanishes at a grid node")
    r = np.sqrt(r2)
    density = np.zeros(vals.shape[0])
    for d in FL.covariant_derivatives(F):
        dv = d.nodal_values()
        radial = np.sum(dv * vals, axis=1) / r2
        g = dv / r[:, None] - (vals / r[:, None]) * radial[:, None]
        density += np.sum(g * g, axis=1)
    return 0.5 * float(F.grid.integrate(density))


def vertical_energy(F: FramedField) -> float:
    """Vertical energy of a unit field; the Hopf fields give exactly 2 pi^2."""
    require_unit(F, "vertical_energy")
    return normalized_vertical_energy(F)


def _adjoint_columns() -> list[list[PolyBag]]:
    """Quadratic polynomials R[k][l](x) = <x e_l conj(x), e_k> (cached)."""
    global _AD_COLUMNS
    try:
        return _AD_COLUMNS
    except NameError:
        pass
    X = QuaternionPoly.point()
    cols = []
    for e in su2.IMAG_UNITS:
        q = X * QuaternionPoly.constant(e) * X.conj()
        cols.append([q.comp[1], q.comp[2], q.comp[3]])
    _AD_COLUMNS = [[cols[l][k] for l in range(3)] for k in range(3)]
    return _AD_COLUMNS


def right_translation_coefficients(F: FramedField) -> tuple[np.ndarray, HarmonicBasis]:
    """Exact coefficients (3, T_ext) of the algebra components of x -> F(x) x^{-1}.

    Each component is a polynomial of degree at most max_degree + 2, expanded
    in an extended basis via exact monomial Gram data; the projection tail is
    checked to vanish.
    """
    ext = F.basis.extension(2)
    ad = _adjoint_columns()
    f_bags = F.as_polybags()
    out = np.zeros((3, ext.total_dim))
    for k in range(3):
        bag = PolyBag()
        for l in range(3):
            bag = bag + f_bags[l] * ad[k][l]
        out[k] = ext.project_polybag(bag)
        tail = bag.sphere_inner(bag) - float(out[k] @ out[k])
        if abs(tail) > 1e-8 * max(1.0, bag.sphere_inner(bag)):
            raise RuntimeError(f"right-translation component left the extended basis: {tail:.3e}")
    return out, ext


def map_energy(kind: str, F: FramedField) -> float:
    """Energy (1/2) integral |d(phi)|^2 of the algebra-valued map mu o F or eta o F.

    mu o F has the frame coefficients themselves as components, so its energy
    is exact in the base basis; eta o F is expanded exactly in an extended
    basis first.  A Hopf field makes mu o F constant (energy 0) and eta o F
    the Hopf map (energy 8 pi^2).
    """
    require_unit(F, "map_energy")
    return _map_energy_any(kind, F)


def _map_energy_any(kind: str, F: FramedField) -> float:
    if kind == "mu":
        total = 0.0
        for l in range(3):
            for j in (1, 2, 3):
                total += float(np.sum(FL.apply_scalar_derivative(F.basis, j, F.coeffs[l]) ** 2))
        return 0.5 * total
    if kind == "eta":
        gamma, ext = right_translation_coefficients(F)
        total = 0.0
        for k in range(3):
            for j in (1, 2, 3):
                total += float(np.sum(FL.apply_scalar_derivative(ext, j, gamma[k]) ** 2))
        return 0.5 * total
    raise ValueError("kind must be 'eta' or 'mu'")


def map_differential_density(kind: str, F: FramedField) -> np.ndarray:
    """Nodal |d(map)|^2 for the algebra-valued map; for the Hopf field and
    kind='eta' this is the squared differential of the Hopf map (identically 8)."""
    if kind == "mu":
        basis, coeffs, grid = F.basis, F.coeffs, F.grid
    elif kind == "eta":
        coeffs, basis = right_translation_coefficients(F)
        grid = F.grid
    else:
        raise ValueError("kind must be 'eta' or 'mu'")
    bv = grid.basis_values(basis)
    density = np.zeros(grid.num_nodes)
    for k in range(3):
        for j in (1, 2, 3):
            density += (bv @ FL.apply_scalar_derivative(basis, j, coeffs[k])) ** 2
    return density


def pointwise_translation_identity_residual(F: FramedField) -> np.ndarray:
    """Nodal residual of |d(eta F)|^2 - 4|F|^2 - 2|grad F|^2 + |d(mu F)|^2,
    an identity for every field on the group."""
    vals = F.nodal_values()
    grad_sq = np.zeros(vals.shape[0])
    for d in FL.covariant_derivatives(F):
        grad_sq += np.sum(d.nodal_values() ** 2, axis=1)
    return (
        map_differential_density("eta", F)
        - 4.0 * np.sum(vals**2, axis=1)
        - 2.0 * grad_sq
        + map_differential_density("mu", F)
    )


@dataclass
class EnergyReport:
    """Energies of a unit field together with the translation-energy identity
    residual E_eta - (4 pi^2 + 2 E_vertical - E_mu)."""

    E_vertical: float
    E_eta: float
    E_mu: float
    identity_residual: float

    def to_dict(self) -> dict:
        return {
            "E_vertical": self.E_vertical,
            "E_eta": self.E_eta,
            "E_mu": self.E_mu,
            "identity_residual": self.identity_residual,
        }


def energy_identity_report(F: FramedField) -> EnergyReport:
    require_unit(F, "energy_identity_report")
    e_v = dirichlet_energy(F)
    e_eta = _map_energy_any("eta", F)
    e_mu = _map_energy_any("mu", F)
    return EnergyReport(
        E_vertical=e_v,
        E_eta=e_eta,
        E_mu=e_mu,
        identity_residual=e_eta - (2.0 * SPHERE_VOL + 2.0 * e_v - e_mu),
    )


# ---------------------------------------------------------------------------
# Hessians
# ---------------------------------------------------------------------------


def hessian(a: VariationField, b: VariationField, check_tol: float = 1e-8) -> tuple[float, float]:
    """Second variation of the vertical energy at the Hopf field, two ways.

    value_jacobi pairs the Jacobi operator with b in coefficients;
    value_bochner integrates (1/2)<L_a g, L_b g> - (div a)(div b) nodally.
    The two must agree; both are returned so callers can assert it.
    """
    jac = FL.apply_vertical_jacobi(a, check=False)
    value_jacobi = jac_inner = float(np.real(np.sum(jac.coeffs * np.conj(b.coeffs))))

    fa, fb = a.to_framed(), b.to_framed()
    La = FL.lie_derivative_metric(fa)
    Lb = FL.lie_derivative_metric(fb)
    diva = FL.divergence(fa)
    divb = FL.divergence(fb)
    integrand = 0.5 * np.einsum("mjk,mjk->m", La.values, Lb.values) - diva * divb
    value_bochner = float(fa.grid.integrate(integrand))
    del jac_inner
    return value_jacobi, value_bochner


def bochner_yano_sides(F: FramedField) -> tuple[float, float]:
    """integral(|grad X|^2 - 2|X|^2) and integral((1/2)|L_X g|^2 - (div X)^2),
    equal for every field on the round 3-sphere."""
    lhs = 2.0 * dirichlet_energy(F) - 2.0 * l2_mass(F)
    L = FL.lie_derivative_metric(F)
    div = FL.divergence(F)
    rhs = float(F.grid.integrate(0.5 * L.frobenius_sq() - div**2))
    return lhs, rhs


def energy_second_difference(a: VariationField, h: float = 1e-3) -> float:
    """Central second difference of t -> E(normalize(sigma_1 + t a)) at t = 0.

    For an eigenvector of the vertical Jacobi operator with eigenvalue lam
    this approximates lam * integral |a|^2.
    """
    basis, grid = a.basis, a.grid
    base = FL.hopf_left(basis, grid)
    af = a.to_framed()

    def energy_at(t: float) -> float:
        path = base.copy_with(base.coeffs + t * af.coeffs)
        return normalized_vertical_energy(path)

    return (energy_at(h) - 2.0 * energy_at(0.0) + energy_at(-h)) / h**2


# ---------------------------------------------------------------------------
# Euler-Lagrange residual and gradient flow
# ---------------------------------------------------------------------------


def harmonic_section_residual(F: FramedField) -> tuple[np.ndarray, float]:
    """Nodal residual rough(F) - |grad F|^2 F and its L^2 norm.

    Vanishes exactly at unit fields that are critical for the vertical
    energy.  The radial multiplier is computed as <rough F, F>/|F|^2, which
    equals |grad F|^2 pointwise for unit fields and keeps the residual
    exactly tangent to the constraint even when F carries a small projection
    error.
    """
    vals = F.nodal_values()
    norms_sq = np.sum(vals**2, axis=1)
    rough = FL.rough_laplacian(F).nodal_values()
    radial = np.sum(rough * vals, axis=1) / norms_sq
    residual = rough - radial[:, None] * vals
    norm = float(np.sqrt(F.grid.integrate(np.sum(residual**2, axis=1))))
    return residual, norm


@dataclass
class FlowTrace:
    """Per-iteration record of the projected gradient descent."""

    rows: list = field(default_factory=list)  # dicts: iter, energy, residual, step, unit_violation
    status: str = "running"  # converged | max_iters | step_collapse

    def append(self, iteration: int, energy: float, residual: float, step: float, unit_violation: float):
        self.rows.append(
            {
                "iter": iteration,
                "energy": energy,
                "residual": residual,
                "step": step,
                "unit_violation": unit_violation,
            }
        )

    @property
    def final_energy(self) -> float:
        return self.rows[-1]["energy"]

    def energies(self) -> list[float]:
        return [r["energy"] for r in self.rows]


@dataclass
class FlowResult:
    trace: FlowTrace
    final_field: FramedField
    classification: "HopfClassification"


def gradient_flow(
    F0: FramedField,
    step: float = 0.05,
    tol: float = 1e-7,
    max_iters: int = 5000,
    classify_tol: float = 1e-3,
) -> FlowResult:
    """Projected gradient descent of the vertical energy over unit fields.

    Each step moves against the Euler-Lagrange residual, renormalizes at the
    nodes and reprojects.  Backtracking halves the step whenever the energy
    would increase, so accepted energies are non-increasing; the run stops
    when the residual norm drops below tol.
    """
    require_unit(F0, "gradient_flow")
    trace = FlowTrace()
    current = F0
    energy = normalized_vertical_energy(current)
    residual, res_norm = harmonic_section_residual(current)
    trace.append(0, energy, res_norm, 0.0, current.unit_deviation or 0.0)
    # stability bound for the linearized descent: the Jacobi spectrum at
    # basis degree N tops out at N(N+2) + 2N, so steps beyond ~2 over that
    # amplify the highest modes below the energy-noise floor where
    # backtracking is blind.
    n = F0.basis.max_degree
    tau_cap = min(step, 1.9 / (n * (n + 2) + 2 * n + 2))
    tau = tau_cap
    iteration = 0
    while res_norm > tol and iteration < max_iters:
        iteration += 1
        tau = min(tau_cap, 2.0 * tau)
        accepted = False
        while tau >= 1e-12:
            candidate_nodal = current.nodal_values() - tau * residual
            try:
                candidate = FL.nodal_normalize_project(
                    current.basis, current.grid, candidate_nodal, provenance=dict(F0.provenance)
                )
            except ValueError:
                tau *= 0.5
                continue
            cand_energy = normalized_vertical_energy(candidate)
            if cand_energy <= energy + 8.0 * np.finfo(float).eps * max(1.0, abs(energy)):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            trace.status = "step_collapse"
            break
        current, energy = candidate, cand_energy
        residual, res_norm = harmonic_section_residual(current)
        trace.append(iteration, energy, res_norm, tau, current.unit_deviation or 0.0)
    if trace.status == "running":
        trace.status = "converged" if res_norm <= tol else "max_iters"
    return FlowResult(trace=trace, final_field=current, classification=classify_hopf(current, tol=classify_tol))


# ---------------------------------------------------------------------------
# classification and rigidity diagnostics
# ---------------------------------------------------------------------------


@dataclass
class HopfClassification:
    is_hopf: bool
    side: str  # "left" | "right" | "none"
    axis: np.ndarray | None
    l2_distance: float
    killing_residual: float
    geodesity_residual: float
    shear_residual: float

    def to_dict(self) -> dict:
        return {
            "is_hopf": self.is_hopf,
            "side": self.side,
            "axis": None if self.axis is None else [float(v) for v in self.axis],
            "l2_distance": self.l2_distance,
            "killing_residual": self.killing_residual,
            "geodesity_residual": self.geodesity_residual,
            "shear_residual": self.shear_residual,
        }


def classify_hopf(F: FramedField, tol: float = 1e-4) -> HopfClassification:
    """Decide whether F is (numerically) a left- or right-invariant unit field.

    Candidate axes come from averaging the left and right translations of F
    over the sphere; the reported distance is the L^2 distance to the nearest
    candidate, normalized by the square root of the sphere volume.
    """
    require_unit(F, "classify_hopf")
    basis, grid = F.basis, F.grid
    # left candidate: average of the frame components (exact, degree-0 coefficients)
    mean_mu = F.coeffs[:, 0] * np.sqrt(SPHERE_VOL) / SPHERE_VOL
    # right candidate: average of the right translation eta(F)
    vals = F.nodal_values()
    eta_nodal = np.empty_like(vals)
    for l in range(3):
        ad_l = su2.quat_mul(su2.quat_mul(grid.nodes, su2.IMAG_UNITS[l]), su2.quat_conj(grid.nodes))[:, 1:]
        if l == 0:
            eta_nodal = vals[:, [0]] * ad_l
        else:
            eta_nodal += vals[:, [l]] * ad_l
    mean_eta = grid.integrate(eta_nodal) / SPHERE_VOL

    candidates: list[tuple[str, np.ndarray, float]] = []
    for side, mean in (("left", mean_mu), ("right", mean_eta)):
        nrm = float(np.linalg.norm(mean))
        if nrm < 1e-12:
            continue
        axis = mean / nrm
        cand = FL.hopf_left(basis, grid, axis) if side == "left" else FL.hopf_right(basis, grid, axis)
        dist = float(np.linalg.norm(F.coeffs - cand.coeffs)) / np.sqrt(SPHERE_VOL)
        candidates.append((side, axis, dist))

    sr = FL.shear_parameters(F)
    L = FL.lie_derivative_metric(F)
    killing = float(np.sqrt(grid.integrate(L.frobenius_sq()) / SPHERE_VOL))
    geodesity = float(np.sqrt(grid.integrate(sr.geodesity**2) / SPHERE_VOL))
    shear = float(np.sqrt(grid.integrate(sr.shear_magnitude**2) / SPHERE_VOL))

    if not candidates:
        return HopfClassification(False, "none", None, np.inf, killing, geodesity, shear)
    side, axis, dist = min(candidates, key=lambda c: c[2])
    is_hopf = dist < tol and killing < tol and geodesity < tol and shear < tol
    return HopfClassification(is_hopf, side, axis, dist, killing, geodesity, shear)


@dataclass
class RigidityReport:
    """Nodal residuals of the shear-parameter equations for a geodesic unit field.

    For a Hopf field the shear parameter is the constant +/- i and every
    residual vanishes: the transport equation sigma.Phi + c + Phi^2, the
    holomorphicity equation conj(Z).Phi, and the Laplacian of Phi.
    """

    applicable: bool
    geodesity_max: float
    phi_mean: complex
    phi_abs_minus_one_max: float
    transport_residual_max: float  # sigma.Phi + c + Phi^2
    holomorphic_residual_max: float  # conj(Z).Phi
    laplacian_residual_max: float  # Delta Phi
    projection_truncation: float

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "geodesity_max": self.geodesity_max,
            "phi_mean_real": float(self.phi_mean.real),
            "phi_mean_imag": float(self.phi_mean.imag),
            "phi_abs_minus_one_max": self.phi_abs_minus_one_max,
            "transport_residual_max": self.transport_residual_max,
            "holomorphic_residual_max": self.holomorphic_residual_max,
            "laplacian_residual_max": self.laplacian_residual_max,
            "projection_truncation": self.projection_truncation,
        }


def rigidity_diagnostics(F: FramedField, curvature: float = 1.0, geodesity_tol: float = 1e-8) -> RigidityReport:
    require_unit(F, "rigidity_diagnostics")
    basis, grid = F.basis, F.grid
    sr = FL.shear_parameters(F)
    geod_max = float(np.max(sr.geodesity))
    applicable = geod_max < geodesity_tol

    mu_c = grid.project(basis, sr.shear_param.real)
    nu_c = grid.project(basis, sr.shear_param.imag)
    bv = grid.basis_values(basis)
    reproj = (bv @ mu_c + 1j * (bv @ nu_c)) - sr.shear_param
    truncation = float(np.max(np.abs(reproj)))

    dphi = [
        bv @ FL.apply_scalar_derivative(basis, j, mu_c) + 1j * (bv @ FL.apply_scalar_derivative(basis, j, nu_c))
        for j in (1, 2, 3)
    ]
    dphi = np.stack(dphi, axis=1)  # (M, 3)
    vals = F.nodal_values()
    f_unit = vals / np.linalg.norm(vals, axis=1, keepdims=True)
    along_f = np.einsum("mj,mj->m", f_unit, dphi.real) + 1j * np.einsum("mj,mj->m", f_unit, dphi.imag)
    zbar = sr.alpha - 1j * sr.beta
    along_zbar = np.einsum("mj,mj->m", zbar.real, dphi.real) - np.einsum("mj,mj->m", zbar.imag, dphi.imag) + 1j * (
        np.einsum("mj,mj->m", zbar.real, dphi.imag) + np.einsum("mj,mj->m", zbar.imag, dphi.real)
    )
    lap_phi = bv @ FL.scalar_laplacian(basis, mu_c) + 1j * (bv @ FL.scalar_laplacian(basis, nu_c))

    transport = along_f + curvature + sr.shear_param**2
    return RigidityReport(
        applicable=applicable,
        geodesity_max=geod_max,
        phi_mean=complex(np.mean(sr.shear_param)),
        phi_abs_minus_one_max=float(np.max(np.abs(np.abs(sr.shear_param) - 1.0))),
        transport_residual_max=float(np.max(np.abs(transport))),
        holomorphic_residual_max=float(np.max(np.abs(along_zbar))),
        laplacian_residual_max=float(np.max(np.abs(lap_phi))),
        projection_truncation=truncation,
    )


def isometry_pullback(F: FramedField, u, v) -> FramedField:
    """Pull back F by the isometry x -> u x v of unit quaternions u, v.

    The result is exactly representable in the same basis (isometries preserve
    harmonic degree); the projection tail is a roundoff check for callers.
    """
    u = su2.normalize(np.asarray(u, dtype=float))
    v = su2.normalize(np.asarray(v, dtype=float))
    grid = F.grid
    moved = su2.quat_mul(su2.quat_mul(u, grid.nodes), v)
    fvals = F.values_at(moved)  # frame components at u x v
    ambient = np.zeros((grid.num_nodes, 4))
    for l, e in enumerate(su2.IMAG_UNITS):
        ambient += fvals[:, [l]] * su2.quat_mul(moved, e)
    pulled = su2.quat_mul(su2.quat_mul(su2.quat_conj(u), ambient), su2.quat_conj(v))
    frame_comps = np.stack(
        [np.sum(pulled * su2.quat_mul(grid.nodes, e), axis=1) for e in su2.IMAG_UNITS], axis=1
    )
    coeffs = np.stack([grid.project(F.basis, frame_comps[:, l]) for l in range(3)])
    out = F.copy_with(coeffs, provenance={"kind": "isometry_pullback", **F.provenance})
    if F.is_unit:
        out.unit_deviation = float(np.max(np.abs(1.0 - np.sum(out.nodal_values() ** 2, axis=1))))
    return out
