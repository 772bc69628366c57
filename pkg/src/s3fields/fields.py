"""Frame-based calculus for vector fields on S^3.

A vector field is stored by its three scalar coefficient functions in the
left-invariant frame (sigma_1, sigma_2, sigma_3), each expanded in the
harmonic basis.  Scalar derivatives are exact block-matrix operations;
products and normalizations are evaluated nodally on a quadrature grid and
projected back when a coefficient representation is needed, with the
truncation measured rather than silently accepted.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from . import su2
from .harmonics import HarmonicBasis, QuadratureGrid
from .polynomials import PolyBag, QuaternionPoly

EPS = ops.epsilon_symbol()
UNIT_FLAG_TOL = 1e-3  # max nodal |1-|F|^2| accepted by generators
MIN_FIELD_NORM = 1e-8


def frame_derivatives(basis: HarmonicBasis) -> list[ops.DegreeBlockOperator]:
    """The three frame-derivative operators, cached on the basis."""
    hit = basis._aux.get("frame_derivatives")
    if hit is None:
        hit = [ops.assemble_derivative(j, basis) for j in (1, 2, 3)]
        basis._aux["frame_derivatives"] = hit
    return hit


def apply_scalar_derivative(basis: HarmonicBasis, j: int, coeffs: np.ndarray) -> np.ndarray:
    return frame_derivatives(basis)[j - 1].apply(coeffs, basis)


def scalar_laplacian(basis: HarmonicBasis, coeffs: np.ndarray) -> np.ndarray:
    out = np.array(coeffs, copy=True)
    for n in range(basis.max_degree + 1):
        out[basis.block_slice(n)] *= n * (n + 2)
    return out


@dataclass
class FramedField:
    """Vector field sum_l f_l sigma_l with harmonic-basis coefficient rows."""

    basis: HarmonicBasis
    grid: QuadratureGrid
    coeffs: np.ndarray  # (3, total_dim)
    unit_deviation: float | None = None  # max nodal |1-|F|^2|; None = not unit
    provenance: dict = field(default_factory=dict)
    _nodal: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (3, self.basis.total_dim):
            raise ValueError("coefficient array must have shape (3, total_dim)")

    @property
    def is_unit(self) -> bool:
        return self.unit_deviation is not None

    def nodal_values(self) -> np.ndarray:
        """(M, 3) frame components at the grid nodes (cached)."""
        if self._nodal is None:
            self._nodal = self.grid.basis_values(self.basis) @ self.coeffs.T
        return self._nodal

    def values_at(self, points: np.ndarray) -> np.ndarray:
        return self.basis.evaluate_matrix(points) @ self.coeffs.T

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def as_polybags(self) -> list[PolyBag]:
        return [self.basis.coeffs_to_polybag(c) for c in self.coeffs]

    def copy_with(self, coeffs: np.ndarray, unit_deviation=None, provenance=None) -> "FramedField":
        return FramedField(
            basis=self.basis,
            grid=self.grid,
            coeffs=coeffs,
            unit_deviation=unit_deviation,
            provenance=provenance if provenance is not None else dict(self.provenance),
        )

    def to_json_dict(self) -> dict:
        return {
            "basis_degree": self.basis.max_degree,
            "grid_levels": list(self.grid.levels),
            "coefficients": [c.tolist() for c in self.coeffs],
            "unit_deviation": self.unit_deviation,
            "provenance": self.provenance,
        }

    def save(self, path: str):
        payload = json.dumps(self.to_json_dict(), indent=1)
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".json.tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)

    @staticmethod
    def from_json_dict(data: dict, basis: HarmonicBasis, grid: QuadratureGrid) -> "FramedField":
        if int(data["basis_degree"]) != basis.max_degree:
            raise ValueError("stored field has a different basis degree")
        if tuple(data["grid_levels"]) != tuple(grid.levels):
            raise ValueError("stored field has different grid levels")
        return FramedField(
            basis=basis,
            grid=grid,
            coeffs=np.array(data["coefficients"], dtype=float),
            unit_deviation=data.get("unit_deviation"),
            provenance=data.get("provenance", {}),
        )

    @staticmethod
    def load(path: str, basis: HarmonicBasis, grid: QuadratureGrid) -> "FramedField":
        with open(path) as fh:
            return FramedField.from_json_dict(json.load(fh), basis, grid)


@dataclass
class VariationField:
    """Field pointwise orthogonal to sigma_1, as one complex scalar f2 + i f3."""

    basis: HarmonicBasis
    grid: QuadratureGrid
    coeffs: np.ndarray  # (total_dim,) complex

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.basis.total_dim,):
            raise ValueError("coefficient vector must have length total_dim")

    def to_framed(self) -> FramedField:
        zero = np.zeros(self.basis.total_dim)
        return FramedField(
            basis=self.basis,
            grid=self.grid,
            coeffs=np.stack([zero, self.coeffs.real, self.coeffs.imag]),
        )

    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def inner(self, other: "VariationField") -> float:
        """Real L^2 inner product Re integral(f conj(g))."""
        return float(np.real(np.sum(self.coeffs * np.conj(other.coeffs))))


def require_unit(F: FramedField, what: str = "operation"):
    if not F.is_unit:
        raise ValueError(f"{what} requires a unit-flagged field")


def covariant_derivative(j: int, F: FramedField) -> FramedField:
    """Covariant derivative along sigma_j, exact in the coefficient basis.

    Uses grad_{sigma_j} sigma_k = eps_{jkl} sigma_l, so the result has
    components grad_j f_l + sum_k eps_{jkl} f_k with no truncation.
    """
    if j not in (1, 2, 3):
        raise ValueError("frame index must be 1, 2 or 3")
    dj = frame_derivatives(F.basis)[j - 1]
    out = np.empty_like(F.coeffs)
    for l in range(3):
        out[l] = dj.apply(F.coeffs[l], F.basis)
        for k in range(3):
            if EPS[j - 1, k, l]:
                out[l] += EPS[j - 1, k, l] * F.coeffs[k]
    return F.copy_with(out, unit_deviation=None)


def covariant_derivatives(F: FramedField) -> list[FramedField]:
    return [covariant_derivative(j, F) for j in (1, 2, 3)]


def rough_laplacian(F: FramedField) -> FramedField:
    """Trace Laplacian -sum_j grad_j grad_j (the frame legs are autoparallel)."""
    acc = np.zeros_like(F.coeffs)
    for j in (1, 2, 3):
        acc -= covariant_derivative(j, covariant_derivative(j, F)).coeffs
    return F.copy_with(acc, unit_deviation=None)


def energy_density(F: FramedField, derivs: list[FramedField] | None = None) -> np.ndarray:
    """Nodal |grad F|^2 = sum_j |grad_j F|^2 for a unit-flagged field."""
    require_unit(F, "energy_density")
    if derivs is None:
        derivs = covariant_derivatives(F)
    return sum(np.sum(d.nodal_values() ** 2, axis=1) for d in derivs)


@dataclass
class FrameTensor:
    """Nodal symmetric 3x3 tensors with entries L(sigma_j, sigma_k)."""

    values: np.ndarray  # (M, 3, 3)

    def trace(self) -> np.ndarray:
        return np.einsum("mjj->m", self.values)

    def frobenius_sq(self) -> np.ndarray:
        return np.einsum("mjk,mjk->m", self.values, self.values)


def lie_derivative_metric(F: FramedField, derivs: list[FramedField] | None = None) -> FrameTensor:
    """Lie derivative of the round metric: L(Y, Z) = <grad_Y F, Z> + <Y, grad_Z F>."""
    if derivs is None:
        derivs = covariant_derivatives(F)
    C = np.stack([d.nodal_values() for d in derivs], axis=1)  # (M, j, comp)
    return FrameTensor(values=C + np.swapaxes(C, 1, 2))


def divergence_coeffs(F: FramedField) -> np.ndarray:
    """Coefficients of div F = sum_j grad_j f_j (exact)."""
    acc = np.zeros(F.basis.total_dim)
    for j in (1, 2, 3):
        acc += apply_scalar_derivative(F.basis, j, F.coeffs[j - 1])
    return acc


def divergence(F: FramedField) -> np.ndarray:
    """Nodal divergence."""
    return F.grid.basis_values(F.basis) @ divergence_coeffs(F)


def _values_at(F: FramedField, points: np.ndarray | None) -> np.ndarray:
    return F.nodal_values() if points is None else F.values_at(points)


def horizontal_frame(f_nodal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair (alpha, beta) completing F at each node.

    alpha is the normalized sigma_2 component orthogonal to F, falling back to
    sigma_3 where |<F, sigma_2>| > 0.9; beta = F x alpha.
    """
    M = f_nodal.shape[0]
    ref = np.tile(np.array([0.0, 1.0, 0.0]), (M, 1))
    fallback = np.abs(f_nodal[:, 1]) > 0.9
    ref[fallback] = np.array([0.0, 0.0, 1.0])
    alpha = ref - np.sum(ref * f_nodal, axis=1, keepdims=True) * f_nodal
    alpha /= np.linalg.norm(alpha, axis=1, keepdims=True)
    beta = np.cross(f_nodal, alpha)
    return alpha, beta


@dataclass
class ShearReport:
    """Pointwise decomposition of grad F on the orthogonal complement of F.

    shear_param is the complex-linear part Phi of Z -> grad_Z F in the frame
    Z = alpha + i beta (independent of the frame phase); shear_magnitude is
    the Frobenius norm of the trace-free symmetric horizontal part of the Lie
    derivative tensor, and geodesity is |grad_F F|.
    """

    shear_param: np.ndarray  # (M,) complex
    geodesity: np.ndarray  # (M,)
    shear_magnitude: np.ndarray  # (M,)
    alpha: np.ndarray
    beta: np.ndarray


def shear_parameters(F: FramedField, points: np.ndarray | None = None) -> ShearReport:
    require_unit(F, "shear_parameters")
    vals = _values_at(F, points)
    norms = np.linalg.norm(vals, axis=1, keepdims=True)
    if np.min(norms) < MIN_FIELD_NORM:
        raise ValueError("field vanishes at a sample point; no horizontal frame")
    f_unit = vals / norms
    alpha, beta = horizontal_frame(f_unit)
    derivs = covariant_derivatives(F)
    C = np.stack([_values_at(d, points) for d in derivs], axis=1)  # (M, j, comp)
    d_alpha = np.einsum("mj,mjc->mc", alpha, C)
    d_beta = np.einsum("mj,mjc->mc", beta, C)
    d_f = np.einsum("mj,mjc->mc", f_unit, C)
    Z = alpha + 1j * beta
    P = d_alpha + 1j * d_beta
    phi = 0.5 * np.einsum("mc,mc->m", P, np.conj(Z))
    L = C + np.swapaxes(C, 1, 2)
    Laa = np.einsum("mj,mjk,mk->m", alpha, L, alpha)
    Lbb = np.einsum("mj,mjk,mk->m", beta, L, beta)
    Lab = np.einsum("mj,mjk,mk->m", alpha, L, beta)
    shear = np.sqrt(0.5 * (Laa - Lbb) ** 2 + 2.0 * Lab**2)
    return ShearReport(
        shear_param=phi,
        geodesity=np.linalg.norm(d_f, axis=1),
        shear_magnitude=shear,
        alpha=alpha,
        beta=beta,
    )


def inequality_gap(
    kind: str,
    F: FramedField,
    A: FramedField | None = None,
    points: np.ndarray | None = None,
    geodesity_tol: float = 1e-8,
    orthogonality_tol: float = 1e-8,
) -> np.ndarray:
    """Pointwise gap 2 |L g|^2 - 4 (div)^2 of the Lie-derivative inequalities.

    kind='nonlinear' evaluates the gap for the unit field F itself; it is
    nonnegative with equality exactly at shear-free geodesic congruences.
    kind='linear' evaluates it for a field A pointwise orthogonal to F and
    requires F to have geodesic integral curves.
    """
    require_unit(F, "inequality_gap")
    if kind == "nonlinear":
        target = F
    elif kind == "linear":
        if A is None:
            raise ValueError("linear gap needs the orthogonal field A")
        geo = np.max(shear_parameters(F, points).geodesity)
        if geo > geodesity_tol:
            raise ValueError(f"linear gap requires geodesic F: max |grad_F F| = {geo:.3e}")
        ortho = np.max(np.abs(np.sum(_values_at(F, points) * _values_at(A, points), axis=1)))
        if ortho > orthogonality_tol:
            raise ValueError(f"A is not orthogonal to F: max |<A,F>| = {ortho:.3e}")
        target = A
    else:
        raise ValueError("kind must be 'linear' or 'nonlinear'")
    derivs = covariant_derivatives(target)
    C = np.stack([_values_at(d, points) for d in derivs], axis=1)
    L = C + np.swapaxes(C, 1, 2)
    lsq = np.einsum("mjk,mjk->m", L, L)
    div = np.einsum("mjj->m", C)
    return 2.0 * lsq - 4.0 * div**2


def lie_gap_decomposition(F: FramedField, A: FramedField) -> dict:
    """The sum-of-squares form of the linear gap for geodesic unit F at nodes:
    4 sum_i L(F, a_i)^2 + 2 sum_{i != j} L(a_i, a_j)^2 + sum_{i<j} (L(a_i,a_i)-L(a_j,a_j))^2
    in an orthonormal frame (a_1, a_2, F)."""
    vals = F.nodal_values()
    f_unit = vals / np.linalg.norm(vals, axis=1, keepdims=True)
    a1, a2 = horizontal_frame(f_unit)
    derivs = covariant_derivatives(A)
    C = np.stack([d.nodal_values() for d in derivs], axis=1)
    L = C + np.swapaxes(C, 1, 2)

    def entry(u, v):
        return np.einsum("mj,mjk,mk->m", u, L, v)

    t_mixed = 4.0 * (entry(f_unit, a1) ** 2 + entry(f_unit, a2) ** 2)
    t_off = 4.0 * entry(a1, a2) ** 2  #ates both (i,j) orderings
    t_diag = (entry(a1, a1) - entry(a2, a2)) ** 2
    return {
        "mixed": t_mixed,
        "off_diagonal": t_off,
        "diagonal_difference": t_diag,
        "total": t_mixed + t_off + t_diag,
    }


def apply_vertical_jacobi(v: VariationField, check: bool = True, check_tol: float = 1e-8) -> VariationField:
    """Second-variation operator of the vertical energy at the Hopf field.

    Acts on f = f2 + i f3 as Delta f - 2i grad_sigma f per degree block.  When
    check is set, the result is compared against the independent nodal form
    rough(alpha) - |grad sigma|^2 alpha - 2 <grad sigma, grad alpha> sigma; a
    disagreement signals a calculus bug and raises.
    """
    basis = v.basis
    out = scalar_laplacian(basis, v.coeffs) - 2j * apply_scalar_derivative(basis, 1, v.coeffs)
    result = VariationField(basis=basis, grid=v.grid, coeffs=out)
    if check:
        alpha = v.to_framed()
        rough = rough_laplacian(alpha)
        # <grad sigma, grad alpha> = grad_3 f2 - grad_2 f3 for sigma = sigma_1
        s = apply_scalar_derivative(basis, 3, alpha.coeffs[1]) - apply_scalar_derivative(basis, 2, alpha.coeffs[2])
        direct = rough.coeffs - 2.0 * alpha.coeffs
        direct[0] -= 2.0 * s
        scale = max(1.0, float(np.max(np.abs(out))))
        err = max(
            float(np.max(np.abs(direct[0]))),
            float(np.max(np.abs(direct[1] - out.real))),
            float(np.max(np.abs(direct[2] - out.imag))),
        )
        if err > check_tol * scale:
            raise RuntimeError(f"vertical Jacobi cross-check failed: {err:.3e} (scale {scale:.3e})")
    return result


# ---------------------------------------------------------------------------
# field generators
# ---------------------------------------------------------------------------


def _unit_axis(axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < MIN_FIELD_NORM:
        raise ValueError("degenerate axis")
    return axis / n


def hopf_left(basis: HarmonicBasis, grid: QuadratureGrid, axis=(1.0, 0.0, 0.0)) -> FramedField:
    """Left-invariant unit field x -> x u; axis (1,0,0) gives sigma_1 exactly."""
    axis = _unit_axis(axis)
    coeffs = np.zeros((3, basis.total_dim))
    coeffs[:, 0] = axis * np.sqrt(2.0 * np.pi**2)  # degree-0 element is 1/sqrt(vol)
    return FramedField(
        basis=basis,
        grid=grid,
        coeffs=coeffs,
        unit_deviation=0.0,
        provenance={"kind": "hopf_left", "axis": axis.tolist()},
    )


def hopf_right(basis: HarmonicBasis, grid: QuadratureGrid, axis=(1.0, 0.0, 0.0)) -> FramedField:
    """Right-invariant unit field x -> u x; frame components are quadratics."""
    axis = _unit_axis(axis)
    if basis.max_degree < 2:
        raise ValueError("right-invariant fields need basis degree >= 2")
    U = QuaternionPoly.constant((0.0, *axis))
    X = QuaternionPoly.point()
    Y = U * X
    coeffs = np.empty((3, basis.total_dim))
    for l, e in enumerate(su2.IMAG_UNITS):
        f_l = Y.dot(X * QuaternionPoly.constant(e))
        coeffs[l] = basis.project_polybag(f_l)
        tail = f_l.sphere_inner(f_l) - float(coeffs[l] @ coeffs[l])
        if abs(tail) > 1e-10:
            raise RuntimeError(f"right-invariant component leaked outside the basis: {tail:.3e}")
    return FramedField(
        basis=basis,
        grid=grid,
        coeffs=coeffs,
        unit_deviation=0.0,
        provenance={"kind": "hopf_right", "axis": axis.tolist()},
    )


def conformal_gradient_horizontal(basis: HarmonicBasis, grid: QuadratureGrid, a) -> VariationField:
    """Horizontal part of the conformal gradient field of x -> <a, x>.

    The frame components are f_l = <a, x e_l>, linear polynomials; dropping
    the sigma_1 component leaves the variation (0, f2, f3).
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (4,) or np.linalg.norm(a) < MIN_FIELD_NORM:
        raise ValueError("need a nonzero ambient 4-vector")
    coeffs = np.zeros(basis.total_dim, dtype=complex)
    f2 = su2.RIGHT_MULT[1].T @ a  # monomial coefficients of <a, x e_2>
    f3 = su2.RIGHT_MULT[2].T @ a
    coeffs[basis.block_slice(1)] = _project_linear(basis, f2) + 1j * _project_linear(basis, f3)
    return VariationField(basis=basis, grid=grid, coeffs=coeffs)


def _project_linear(basis: HarmonicBasis, mono_coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of a degree-1 polynomial on the degree-1 basis block."""
    bag = PolyBag()
    bag.add_piece(1, mono_coeffs)
    return basis.project_polybag(bag)[basis.block_slice(1)]


def conformal_lift(basis: HarmonicBasis, grid: QuadratureGrid, b) -> VariationField:
    """Horizontal lift through the Hopf map of a conformal gradient field on S^2.

    For an algebra vector b the lift has frame components
    f_l = -1/2 <b x i, x e_l> (l = 2, 3), quadratic polynomials.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (3,) or np.linalg.norm(b) < MIN_FIELD_NORM:
        raise ValueError("need a nonzero algebra 3-vector")
    if basis.max_degree < 2:
        raise ValueError("conformal lifts need basis degree >= 2")
    B = QuaternionPoly.constant((0.0, *b))
    X = QuaternionPoly.point()
    core = B * X * QuaternionPoly.constant(su2.QI)
    comps = []
    for e in (su2.QJ, su2.QK):
        bag = core.dot(X * QuaternionPoly.constant(e)) * (-0.5)
        comps.append(basis.project_polybag(bag))
    return VariationField(basis=basis, grid=grid, coeffs=comps[0] + 1j * comps[1])


def nodal_normalize_project(
    basis: HarmonicBasis,
    grid: QuadratureGrid,
    nodal: np.ndarray,
    provenance: dict | None = None,
) -> FramedField:
    """Normalize frame components at the nodes, project, and measure the
    resulting unit-constraint violation."""
    norms = np.linalg.norm(nodal, axis=1, keepdims=True)
    if np.min(norms) < MIN_FIELD_NORM:
        raise ValueError("field vanishes at a grid node; cannot normalize")
    unit = nodal / norms
    coeffs = np.stack([grid.project(basis, unit[:, l]) for l in range(3)])
    F = FramedField(basis=basis, grid=grid, coeffs=coeffs, provenance=provenance or {})
    dev = float(np.max(np.abs(1.0 - np.sum(F.nodal_values() ** 2, axis=1))))
    F.unit_deviation = dev
    return F


def _random_framed_coeffs(basis: HarmonicBasis, max_degree: int, rng: np.random.Generator) -> np.ndarray:
    """Random coefficients up to max_degree with mild per-degree decay."""
    coeffs = np.zeros((3, basis.total_dim))
    for n in range(min(max_degree, basis.max_degree) + 1):
        sl = basis.block_slice(n)
        scale = 1.0 / (1.0 + n * (n + 2))
        coeffs[:, sl] = scale * rng.normal(size=(3, sl.stop - sl.start))
    return coeffs


def random_unit(
    basis: HarmonicBasis,
    grid: QuadratureGrid,
    max_degree: int,
    seed: int,
    amplitude: float = 0.6,
) -> FramedField:
    """Seeded random unit field: a random Hopf base plus a polynomial
    perturbation, nodally normalized then projected.

    The amplitude is halved (deterministically) until the raw field is
    bounded away from zero, so normalization stays well-conditioned; the
    measured post-projection deviation is stored on the field.
    """
    rng = np.random.default_rng(seed)
    axis = _unit_axis(rng.normal(size=3))
    base = hopf_left(basis, grid, axis).nodal_values()
    pert_coeffs = _random_framed_coeffs(basis, max_degree, rng)
    pert = grid.basis_values(basis) @ pert_coeffs.T
    pert *= 1.0 / max(1.0, np.max(np.linalg.norm(pert, axis=1)))
    amp = amplitude
    for _ in range(60):
        raw = base + amp * pert
        if np.min(np.linalg.norm(raw, axis=1)) <= 0.25:
            amp *= 0.5
            continue
        F = nodal_normalize_project(
            basis,
            grid,
            raw,
            provenance={"kind": "random_unit", "seed": int(seed), "max_degree": int(max_degree), "amplitude": amp},
        )
        if F.unit_deviation <= UNIT_FLAG_TOL:
            return F
        amp *= 0.6  # normalized field too rough for the basis; flatten it
    raise RuntimeError("random unit field generation failed to reach the unit tolerance")


def random_variation(basis: HarmonicBasis, grid: QuadratureGrid, max_degree: int, seed: int) -> VariationField:
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(basis.total_dim, dtype=complex)
    for n in range(min(max_degree, basis.max_degree) + 1):
        sl = basis.block_slice(n)
        scale = 1.0 / (1.0 + n * (n + 2))
        coeffs[sl] = scale * (rng.normal(size=sl.stop - sl.start) + 1j * rng.normal(size=sl.stop - sl.start))
    return VariationField(basis=basis, grid=grid, coeffs=coeffs)


def perturbed_hopf(
    basis: HarmonicBasis,
    grid: QuadratureGrid,
    amplitude: float,
    seed: int,
    max_degree: int = 2,
) -> FramedField:
    """normalize(sigma_1 + amplitude * random polynomial field), projected."""
    rng = np.random.default_rng(seed)
    base = hopf_left(basis, grid).nodal_values()
    pert_coeffs = _random_framed_coeffs(basis, max_degree, rng)
    pert = grid.basis_values(basis) @ pert_coeffs.T
    pert *= 1.0 / max(1e-12, np.max(np.linalg.norm(pert, axis=1)))
    return nodal_normalize_project(
        basis,
        grid,
        base + amplitude * pert,
        provenance={"kind": "perturbed_hopf", "seed": int(seed), "amplitude": amplitude, "max_degree": max_degree},
    )


def generate_field(kind: str, basis: HarmonicBasis, grid: QuadratureGrid, **params):
    """Dispatcher over the named generators."""
    table = {
        "hopf_left": lambda: hopf_left(basis, grid, params.get("axis", (1.0, 0.0, 0.0))),
        "hopf_right": lambda: hopf_right(basis, grid, params.get("axis", (1.0, 0.0, 0.0))),
        "conformal_gradient_horizontal": lambda: conformal_gradient_horizontal(basis, grid, params["a"]),
        "conformal_lift": lambda: conformal_lift(basis, grid, params["b"]),
        "random_unit": lambda: random_unit(
            basis, grid, params.get("max_degree", 3), params["seed"], params.get("amplitude", 0.6)
        ),
        "random_variation": lambda: random_variation(basis, grid, params.get("max_degree", 3), params["seed"]),
        "perturbed_hopf": lambda: perturbed_hopf(
            basis, grid, params.get("amplitude", 0.3), params["seed"], params.get("max_degree", 2)
        ),
    }
    if kind not in table:
        raise ValueError(f"unknown field kind: {kind}")
    return table[kind]()
