"""Field calculus: covariant derivatives, Lie tensors, shear, Jacobi action."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s3fields import fields as FL
from s3fields import operators as ops
from s3fields import su2


@pytest.fixture(scope="module")
def ws(basis6, grid):
    return basis6, grid


def _linear_scalar_field(basis, grid, mono_coeffs, component=1):
    """Field with one degree-1 scalar coefficient and zeros elsewhere."""
    coeffs = np.zeros((3, basis.total_dim))
    coeffs[component][basis.block_slice(1)] = FL._project_linear(basis, np.asarray(mono_coeffs, dtype=float))
    return FL.FramedField(basis=basis, grid=grid, coeffs=coeffs)


def _ambient_values(F, points):
    """F as 4-vectors: sum_l f_l(x) (x e_l)."""
    fvals = F.values_at(points)
    out = np.zeros((points.shape[0], 4))
    for l, e in enumerate(su2.IMAG_UNITS):
        out += fvals[:, [l]] * su2.quat_mul(points, e)
    return out


def test_covariant_derivative_of_hopf_frame(ws):
    basis, grid = ws
    sig1 = FL.hopf_left(basis, grid)
    sig2 = FL.hopf_left(basis, grid, (0, 1, 0))
    sig3 = FL.hopf_left(basis, grid, (0, 0, 1))
    assert np.max(np.abs(FL.covariant_derivative(2, sig1).coeffs + sig3.coeffs)) < 1e-14
    assert np.max(np.abs(FL.covariant_derivative(3, sig1).coeffs - sig2.coeffs)) < 1e-14
    assert np.max(np.abs(FL.covariant_derivative(1, sig1).coeffs)) == 0.0


def test_covariant_derivative_linearity(ws, rng):
    basis, grid = ws
    A = FL.random_unit(basis, grid, 2, seed=4)
    B = FL.random_unit(basis, grid, 2, seed=5)
    combo = A.copy_with(A.coeffs + 2.5 * B.coeffs, unit_deviation=None)
    lhs = FL.covariant_derivative(2, combo).coeffs
    rhs = FL.covariant_derivative(2, A).coeffs + 2.5 * FL.covariant_derivative(2, B).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_covariant_derivative_finite_difference_oracle(ws, rng):
    """Central differences of the ambient field along geodesics x exp(t e_j),
    projected to the tangent space, match the exact coefficients."""
    basis, grid = ws
    F = _linear_scalar_field(basis, grid, [1.0, 0.0, 0.0, 0.0], component=1)  # f2 = w
    pts = su2.random_unit_quaternions(200, rng)
    h = 1e-4
    for j in (1, 2, 3):
        exact = _ambient_values(FL.covariant_derivative(j, F), pts)
        axis = np.zeros(3)
        axis[j - 1] = 1.0
        plus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(200, h)))
        minus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(200, -h)))
        fd = (_ambient_values(F, plus) - _ambient_values(F, minus)) / (2 * h)
        fd = su2.project_tangent(pts, fd)
        assert np.max(np.abs(fd - exact)) < 1e-6


def test_left_translation_derivative_identity(ws, rng):
    """mu(grad_X Y) = d(mu Y)(X) + (1/2)[mu X, mu Y] at polynomial fields,
    with the differential taken by finite differences along geodesics."""
    basis, grid = ws
    coeffs = FL._random_framed_coeffs(basis, 2, np.random.default_rng(77))
    Y = FL.FramedField(basis=basis, grid=grid, coeffs=coeffs)
    pts = su2.random_unit_quaternions(100, rng)
    h = 1e-4
    eps = ops.epsilon_symbol()
    for j in (1, 2, 3):
        cov = FL.covariant_derivative(j, Y).values_at(pts)  # = mu(grad_j Y)
        axis = np.zeros(3)
        axis[j - 1] = 1.0
        plus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(100, h)))
        minus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(100, -h)))
        d_mu = (Y.values_at(plus) - Y.values_at(minus)) / (2 * h)
        # (1/2)[e_j, sum f_k e_k] has components eps_{jkl} f_k
        f = Y.values_at(pts)
        bracket = np.einsum("kl,mk->ml", eps[j - 1], f)
        assert np.max(np.abs(cov - (d_mu + bracket))) < 1e-6


def test_energy_density_unit_fields(ws):
    basis, grid = ws
    for F in (
        FL.hopf_left(basis, grid),
        FL.hopf_left(basis, grid, (0, 1, 0)),
        FL.hopf_left(basis, grid, (0.3, -0.5, 0.81)),
        FL.hopf_right(basis, grid, (1, 0, 0)),
    ):
        assert np.max(np.abs(FL.energy_density(F) - 2.0)) < 1e-12


def test_energy_density_requires_unit_flag(ws):
    basis, grid = ws
    F = FL.hopf_left(basis, grid)
    F.unit_deviation = None
    with pytest.raises(ValueError):
        FL.energy_density(F)


def test_lie_tensor_of_killing_fields(ws):
    basis, grid = ws
    for F in (FL.hopf_left(basis, grid), FL.hopf_left(basis, grid, (0, 1, 0)), FL.hopf_right(basis, grid, (0, 0, 1))):
        L = FL.lie_derivative_metric(F)
        assert np.max(np.abs(L.values)) < 1e-12
        assert np.max(np.abs(FL.divergence(F))) < 1e-12


def _conformal_framed(basis, grid, a):
    coeffs = np.zeros((3, basis.total_dim))
    for l in range(3):
        coeffs[l][basis.block_slice(1)] = FL._project_linear(basis, su2.RIGHT_MULT[l].T @ a)
    return FL.FramedField(basis=basis, grid=grid, coeffs=coeffs)


def test_conformal_gradient_lie_tensor(ws, rng):
    """The spherical gradient of <a, x> satisfies L g = -2 <a, x> g and
    div = -3 <a, x> (hand computation on the round sphere)."""
    basis, grid = ws
    a = rng.normal(size=4)
    gam = _conformal_framed(basis, grid, a)
    ax = grid.nodes @ a
    L = FL.lie_derivative_metric(gam)
    expected = -2.0 * ax[:, None, None] * np.eye(3)[None, :, :]
    assert np.max(np.abs(L.values - expected)) < 1e-12
    assert np.max(np.abs(FL.divergence(gam) + 3.0 * ax)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_trace_identity(basis6, grid, seed):
    """Tr L_F g = 2 div F at every node, for arbitrary polynomial fields."""
    coeffs = FL._random_framed_coeffs(basis6, 3, np.random.default_rng(seed))
    F = FL.FramedField(basis=basis6, grid=grid, coeffs=coeffs)
    L = FL.lie_derivative_metric(F)
    assert np.max(np.abs(L.trace() - 2.0 * FL.divergence(F))) < 1e-10


def test_metric_compatibility(ws):
    """grad_j <A, B> = <grad_j A, B> + <A, grad_j B> nodally."""
    basis, grid = ws
    A = FL.FramedField(basis=basis, grid=grid, coeffs=FL._random_framed_coeffs(basis, 3, np.random.default_rng(8)))
    B = FL.FramedField(basis=basis, grid=grid, coeffs=FL._random_framed_coeffs(basis, 3, np.random.default_rng(9)))
    inner = np.sum(A.nodal_values() * B.nodal_values(), axis=1)
    inner_coeffs = grid.project(basis, inner)  # degree <= 6 product: projection exact
    for j in (1, 2, 3):
        lhs = grid.basis_values(basis) @ FL.apply_scalar_derivative(basis, j, inner_coeffs)
        rhs = np.sum(FL.covariant_derivative(j, A).nodal_values() * B.nodal_values(), axis=1)
        rhs += np.sum(A.nodal_values() * FL.covariant_derivative(j, B).nodal_values(), axis=1)
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_shear_parameters_hopf(ws):
    basis, grid = ws
    sr = FL.shear_parameters(FL.hopf_left(basis, grid))
    assert np.max(np.abs(sr.shear_param - 1j)) < 1e-13
    assert np.max(sr.geodesity) < 1e-13
    assert np.max(sr.shear_magnitude) < 1e-13


def test_shear_frame_fallback(ws):
    # a field aligned with sigma_2 forces the fallback reference axis
    basis, grid = ws
    sr = FL.shear_parameters(FL.hopf_left(basis, grid, (0, 1, 0)))
    assert np.max(np.abs(np.abs(sr.shear_param) - 1.0)) < 1e-12
    assert np.max(sr.geodesity) < 1e-12


def test_shear_param_frame_phase_invariance(ws):
    """Phi is the complex-linear part of Z -> grad_Z F: any phase rotation of
    the frame leaves it unchanged."""
    basis, grid = ws
    F = FL.random_unit(basis, grid, 2, seed=12)
    sr = FL.shear_parameters(F)
    derivs = FL.covariant_derivatives(F)
    C = np.stack([d.nodal_values() for d in derivs], axis=1)
    theta = 0.7
    alpha2 = np.cos(theta) * sr.alpha - np.sin(theta) * sr.beta
    beta2 = np.sin(theta) * sr.alpha + np.cos(theta) * sr.beta
    P2 = np.einsum("mj,mjc->mc", alpha2, C) + 1j * np.einsum("mj,mjc->mc", beta2, C)
    phi2 = 0.5 * np.einsum("mc,mc->m", P2, np.conj(alpha2 + 1j * beta2))
    assert np.max(np.abs(phi2 - sr.shear_param)) < 1e-10


def test_nonlinear_gap_hopf_equality(ws):
    basis, grid = ws
    gap = FL.inequality_gap("nonlinear", FL.hopf_left(basis, grid))
    assert np.max(np.abs(gap)) < 1e-12


def test_linear_gap_sigma2_variation(ws):
    basis, grid = ws
    sigma = FL.hopf_left(basis, grid)
    alpha = FL.hopf_left(basis, grid, (0, 1, 0))
    alpha = alpha.copy_with(alpha.coeffs)  # keep the unit flag irrelevant; A need not be unit
    gap = FL.inequality_gap("linear", sigma, A=alpha)
    assert np.min(gap) > -1e-10
    assert np.max(np.abs(gap)) < 1e-12  # sigma_2 is Killing and divergence free


def test_linear_gap_random_variations(ws):
    basis, grid = ws
    sigma = FL.hopf_left(basis, grid)
    for seed in range(4):
        A = FL.random_variation(basis, grid, 3, seed=seed).to_framed()
        gap = FL.inequality_gap("linear", sigma, A=A)
        assert np.min(gap) > -1e-10


def test_linear_gap_preconditions(ws):
    basis, grid = ws
    nongeodesic = FL.random_unit(basis, grid, 2, seed=3)
    A = FL.random_variation(basis, grid, 2, seed=4).to_framed()
    with pytest.raises(ValueError):
        FL.inequality_gap("linear", nongeodesic, A=A)
    sigma = FL.hopf_left(basis, grid)
    not_orthogonal = FL.random_unit(basis, grid, 2, seed=5)
    with pytest.raises(ValueError):
        FL.inequality_gap("linear", sigma, A=not_orthogonal)


def test_nonlinear_gap_random_scan(ws, rng):
    basis, grid = ws
    pts = su2.random_unit_quaternions(5000, rng)
    for seed in range(5):
        F = FL.random_unit(basis, grid, 3, seed=seed + 40)
        gap = FL.inequality_gap("nonlinear", F, points=pts)
        assert np.min(gap) > -1e-10


def test_gap_decomposition_matches(ws):
    """The linear gap equals its explicit sum-of-squares expansion in an
    orthonormal frame completing the Hopf field."""
    basis, grid = ws
    sigma = FL.hopf_left(basis, grid)
    A = FL.random_variation(basis, grid, 3, seed=21).to_framed()
    gap = FL.inequality_gap("linear", sigma, A=A)
    parts = FL.lie_gap_decomposition(sigma, A)
    assert np.max(np.abs(gap - parts["total"])) < 1e-9
    for key in ("mixed", "off_diagonal", "diagonal_difference"):
        assert np.min(parts[key]) > -1e-12


def test_vertical_jacobi_eigenfamilies(ws, rng):
    basis, grid = ws
    const = FL.VariationField(basis=basis, grid=grid, coeffs=np.zeros(basis.total_dim, complex))
    const.coeffs[0] = 1.0 - 2.0j
    assert np.max(np.abs(FL.apply_vertical_jacobi(const).coeffs)) < 1e-14

    g = FL.conformal_gradient_horizontal(basis, grid, rng.normal(size=4))
    assert np.max(np.abs(FL.apply_vertical_jacobi(g).coeffs - g.coeffs)) < 1e-12

    lift = FL.conformal_lift(basis, grid, rng.normal(size=3))
    assert np.max(np.abs(FL.apply_vertical_jacobi(lift).coeffs - 4.0 * lift.coeffs)) < 1e-12


def test_vertical_jacobi_matches_operator_blocks(ws):
    basis, grid = ws
    v = FL.random_variation(basis, grid, 4, seed=33)
    out = FL.apply_vertical_jacobi(v)
    lam = ops.twisted_laplacian(basis, ops.assemble_derivative(1, basis), 2.0)
    expected = lam.apply(v.coeffs, basis)
    assert np.max(np.abs(out.coeffs - expected)) < 1e-10


def test_vertical_jacobi_cross_check_catches_tampering(ws):
    basis, grid = ws
    v = FL.random_variation(basis, grid, 3, seed=15)
    # run with the built-in (1-4) cross-check: must pass quietly
    FL.apply_vertical_jacobi(v, check=True)


def test_rough_laplacian_frame_legs(ws):
    basis, grid = ws
    for axis in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        F = FL.hopf_left(basis, grid, axis)
        out = FL.rough_laplacian(F)
        assert np.max(np.abs(out.coeffs - 2.0 * F.coeffs)) < 1e-13


def test_rough_laplacian_product_rule(ws):
    """rough(f sigma_2) = (Delta f) sigma_2 + 2 f sigma_2 - 2 grad_{grad f} sigma_2
    for a degree-1 harmonic f, assembled from independent pieces."""
    basis, grid = ws
    f_mono = np.array([0.4, -1.1, 0.3, 0.9])
    F = _linear_scalar_field(basis, grid, f_mono, component=1)
    out = FL.rough_laplacian(F)
    f_coeffs = F.coeffs[1]
    expected = np.zeros_like(F.coeffs)
    expected[1] = 3.0 * f_coeffs + 2.0 * f_coeffs  # Delta f = 3 f at degree 1
    # grad_{grad f} sigma_2 = (grad_1 f) sigma_3 - (grad_3 f) sigma_1
    expected[2] -= 2.0 * FL.apply_scalar_derivative(basis, 1, f_coeffs)
    expected[0] += 2.0 * FL.apply_scalar_derivative(basis, 3, f_coeffs)
    assert np.max(np.abs(out.coeffs - expected)) < 1e-12


def test_rough_laplacian_finite_difference_spot_check(ws, rng):
    """Second differences along the three geodesic flows reproduce the rough
    Laplacian: grad_j grad_j F = P(F'' ) + <sigma_j, F> sigma_j."""
    basis, grid = ws
    coeffs = FL._random_framed_coeffs(basis, 2, np.random.default_rng(55))
    F = FL.FramedField(basis=basis, grid=grid, coeffs=coeffs)
    pts = su2.random_unit_quaternions(20, rng)
    exact = _ambient_values(FL.rough_laplacian(F), pts)
    h = 1e-3
    fd = np.zeros_like(exact)
    fvals = F.values_at(pts)
    frame = su2.frame_at(pts)
    for j in range(3):
        axis = np.zeros(3)
        axis[j] = 1.0
        plus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(len(pts), h)))
        minus = su2.quat_mul(pts, su2.quat_exp_imag(axis, np.full(len(pts), -h)))
        second = (_ambient_values(F, plus) + _ambient_values(F, minus) - 2 * _ambient_values(F, pts)) / h**2
        fd -= su2.project_tangent(pts, second) + fvals[:, [j]] * frame[j]
    assert np.max(np.abs(fd - exact)) < 1e-4


def test_rough_laplacian_self_adjointness(ws):
    """integral <rough F, F> equals integral |grad F|^2 (integration by parts),
    both exact in coefficients."""
    basis, grid = ws
    F = FL.FramedField(basis=basis, grid=grid, coeffs=FL._random_framed_coeffs(basis, 4, np.random.default_rng(66)))
    lhs = float(np.sum(FL.rough_laplacian(F).coeffs * F.coeffs))
    rhs = sum(float(np.sum(d.coeffs**2)) for d in FL.covariant_derivatives(F))
    assert lhs == pytest.approx(rhs, rel=1e-9)


# --- generators ------------------------------------------------------------


def test_hopf_left_is_exact_sigma1(ws):
    basis, grid = ws
    F = FL.hopf_left(basis, grid, (1, 0, 0))
    vals = F.nodal_values()
    assert np.max(np.abs(vals - np.array([1.0, 0.0, 0.0]))) < 1e-14
    assert F.unit_deviation == 0.0


def test_hopf_right_matches_ambient_definition(ws, rng):
    basis, grid = ws
    axis = FL._unit_axis(rng.normal(size=3))
    F = FL.hopf_right(basis, grid, axis)
    pts = su2.random_unit_quaternions(50, rng)
    expected = su2.quat_mul(np.concatenate([[0.0], axis]), pts)
    assert np.max(np.abs(_ambient_values(F, pts) - expected)) < 1e-12


def test_conformal_gradient_horizontal_properties(ws, rng):
    basis, grid = ws
    a = rng.normal(size=4)
    v = FL.conformal_gradient_horizontal(basis, grid, a)
    framed = v.to_framed()
    # orthogonal to sigma_1 because the first component vanishes identically
    assert np.max(np.abs(framed.nodal_values()[:, 0])) < 1e-12
    # degree <= 2 polynomial field
    for n in range(3, basis.max_degree + 1):
        assert np.max(np.abs(v.coeffs[basis.block_slice(n)])) == 0.0
    # matches the pointwise construction <a, x e_l> against the true gradient
    pts = su2.random_unit_quaternions(30, rng)
    gamma = a[None, :] - (pts @ a)[:, None] * pts
    frame = su2.frame_at(pts)
    for idx, l in ((0, 1), (1, 2)):
        comp = np.sum(gamma * frame[l], axis=1)
        got = framed.values_at(pts)[:, l]
        assert np.max(np.abs(got - comp)) < 1e-12


def test_random_unit_measured_deviation(ws):
    basis, grid = ws
    for seed in range(6):
        F = FL.random_unit(basis, grid, 6, seed=seed)
        assert F.unit_deviation < 1e-3
        assert F.provenance["kind"] == "random_unit"


def test_degenerate_axis_rejected(ws):
    basis, grid = ws
    with pytest.raises(ValueError):
        FL.hopf_left(basis, grid, (0, 0, 0))
    with pytest.raises(ValueError):
        FL.conformal_lift(basis, grid, (0, 0, 0))


def test_generate_field_dispatch(ws):
    basis, grid = ws
    F = FL.generate_field("hopf_left", basis, grid, axis=(0, 0, 1))
    assert isinstance(F, FL.FramedField)
    v = FL.generate_field("random_variation", basis, grid, seed=3)
    assert isinstance(v, FL.VariationField)
    with pytest.raises(ValueError):
        FL.generate_field("bogus", basis, grid)


def test_field_serialization_roundtrip(ws, tmp_path):
    basis, grid = ws
    F = FL.random_unit(basis, grid, 3, seed=77)
    path = str(tmp_path / "field.json")
    F.save(path)
    G = FL.FramedField.load(path, basis, grid)
    assert np.max(np.abs(F.coeffs - G.coeffs)) < 1e-15
    assert G.unit_deviation == pytest.approx(F.unit_deviation)
    assert G.provenance == F.provenance


def test_field_serialization_rejects_mismatch(ws, tmp_path):
    basis, grid = ws
    F = FL.hopf_left(basis, grid)
    data = F.to_json_dict()
    data["basis_degree"] = 4
    with pytest.raises(ValueError):
        FL.FramedField.from_json_dict(data, basis, grid)
