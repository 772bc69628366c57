"""Operator assembly, the Hermitian eigensolver, and the three spectra."""

import numpy as np
import pytest

from s3fields import operators as ops
from s3fields.harmonics import build_basis, laplace_eigenvalue


@pytest.fixture(scope="module")
def d_ops(basis6):
    return [ops.assemble_derivative(j, basis6) for j in (1, 2, 3)]


def test_degree_zero_block_is_zero(d_ops):
    for d in d_ops:
        assert np.max(np.abs(d.blocks[0])) == 0.0


def test_derivative_blocks_antisymmetric(d_ops):
    for d in d_ops:
        for n in range(7):
            blk = d.blocks[n]
            assert np.max(np.abs(blk + blk.T)) < 1e-10


def test_no_leakage_between_degrees(basis6):
    for j in (1, 2, 3):
        assert ops.derivative_leakage(j, basis6) < 1e-10


def test_i_d1_spectrum_per_block(d_ops):
    """i grad_sigma has eigenvalues -n, -n+2, ..., n with complex multiplicity n+1."""
    d1 = d_ops[0]
    for n in range(7):
        vals = np.linalg.eigvalsh(1j * d1.blocks[n])
        clusters = ops._cluster(vals)
        assert [round(m) for m, _ in clusters] == list(range(-n, n + 1, 2))
        assert all(c == n + 1 for _, c in clusters)
        assert max(abs(m - round(m)) for m, _ in clusters) < 1e-10


def test_i_d1_degree_one_block(d_ops):
    vals = np.sort(np.linalg.eigvalsh(1j * d_ops[0].blocks[1]))
    assert np.allclose(vals, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)


def test_laplacian_from_frame_derivatives(basis6, d_ops):
    """-sum_j grad_j^2 must act as n(n+2) on each degree block."""
    for n in range(7):
        acc = -sum(d.blocks[n] @ d.blocks[n] for d in d_ops)
        assert np.max(np.abs(acc - laplace_eigenvalue(n) * np.eye((n + 1) ** 2))) < 1e-9


def test_vertical_operator_hermitian(basis6, d_ops):
    lam = ops.twisted_laplacian(basis6, d_ops[0], 2.0)
    for n in range(7):
        blk = lam.blocks[n]
        assert np.max(np.abs(blk - blk.conj().T)) < 1e-12


def test_vertical_operator_low_blocks(basis6, d_ops):
    lam = ops.twisted_laplacian(basis6, d_ops[0], 2.0)
    v0 = np.linalg.eigvalsh(lam.blocks[0])
    assert np.allclose(v0, [0.0], atol=1e-13)
    v1 = np.sort(np.linalg.eigvalsh(lam.blocks[1]))
    assert np.allclose(v1, [1.0, 1.0, 5.0, 5.0], atol=1e-12)


def test_operator_identity_twist4_equals_2lam_minus_delta(basis6, d_ops):
    lam2 = ops.twisted_laplacian(basis6, d_ops[0], 2.0)
    lam4 = ops.twisted_laplacian(basis6, d_ops[0], 4.0)
    for n in range(7):
        delta = laplace_eigenvalue(n) * np.eye((n + 1) ** 2)
        assert np.max(np.abs(lam4.blocks[n] - (2.0 * lam2.blocks[n] - delta))) < 1e-12


# --- hermitian_eigen -------------------------------------------------------


def test_hermitian_eigen_diagonal():
    vals, vecs = ops.hermitian_eigen(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(vals, [-1.0, 2.0, 3.0])
    # eigenvectors of a diagonal matrix are coordinate axes (up to sign)
    assert np.allclose(np.sort(np.abs(vecs), axis=0)[-1], 1.0)
    assert np.allclose(np.abs(np.linalg.det(vecs)), 1.0)


def test_hermitian_eigen_swap():
    vals, _ = ops.hermitian_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(vals, [-1.0, 1.0])


def _char_poly_roots_by_bisection(M, n_scan=4000, tol=1e-11):
    """Independent oracle: bisect sign changes of det(M - t I) computed by LU."""
    bound = np.linalg.norm(M, np.inf) + 1.0
    ts = np.linspace(-bound, bound, n_scan)
    dets = np.array([np.linalg.det(M - t * np.eye(M.shape[0])).real for t in ts])
    roots = []
    for i in range(n_scan - 1):
        if dets[i] == 0.0:
            roots.append(ts[i])
        elif dets[i] * dets[i + 1] < 0:
            lo, hi = ts[i], ts[i + 1]
            flo = dets[i]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = np.linalg.det(M - mid * np.eye(M.shape[0])).real
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return np.array(roots)


def test_hermitian_eigen_against_characteristic_polynomial(rng):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    M = 0.5 * (A + A.conj().T)
    vals, _ = ops.hermitian_eigen(M)
    roots = _char_poly_roots_by_bisection(M)
    assert len(roots) == 6
    assert np.max(np.abs(np.sort(roots) - vals)) < 1e-9


def test_hermitian_eigen_rejects_non_hermitian(rng):
    M = rng.normal(size=(4, 4))
    M[0, 1] += 1.0  # make it clearly non-symmetric
    M[1, 0] -= 1.0
    with pytest.raises(ValueError):
        ops.hermitian_eigen(M)


# --- closed forms ----------------------------------------------------------


def test_closed_form_vertical_distinct_head():
    entries = ops.closed_form_spectrum("vertical", 6)
    distinct = sorted(set(e.eigenvalue for e in entries))
    assert distinct[:8] == [0.0, 1.0, 4.0, 5.0, 8.0, 9.0, 12.0, 13.0]
    # the sequence splices the progressions 4k and 4k+1
    for v in distinct:
        assert v % 4 in (0.0, 1.0)


def test_closed_form_hopf_negative_entry():
    entries = ops.closed_form_spectrum("hopf_map", 4)
    negative = [e for e in entries if e.eigenvalue < 0]
    assert len(negative) == 1
    assert negative[0].eigenvalue == -1.0
    assert negative[0].multiplicity == 4
    assert negative[0].label == (1, -1)


def test_closed_form_identity_lowest_rows():
    entries = ops.closed_form_spectrum("identity", 5)
    lowest = sorted(entries, key=lambda e: e.eigenvalue)[:2]
    assert (lowest[0].eigenvalue, lowest[0].multiplicity) == (-1.0, 4)
    assert (lowest[1].eigenvalue, lowest[1].multiplicity) == (0.0, 6)


def test_closed_form_unknown_kind():
    with pytest.raises(ValueError):
        ops.closed_form_spectrum("nope", 3)


# --- numeric spectra -------------------------------------------------------


def test_vertical_spectrum_matches_closed_form():
    basis = build_basis(4)
    rows = ops.vertical_jacobi_spectrum(basis)
    assert all(r.abs_error < 1e-8 for r in rows)
    assert all(r.mult_real_numeric == 2 * (r.n + 1) for r in rows)
    labels = {(r.n, r.k) for r in rows}
    expected = {(n, k) for n in range(5) for k in range(-n, n + 1, 2)}
    assert labels == expected


def test_vertical_kernel_is_constants():
    basis = build_basis(4)
    rows = [r for r in ops.vertical_jacobi_spectrum(basis) if r.eigenvalue_closed_form == 0.0]
    assert len(rows) == 1 and rows[0].n == 0 and rows[0].k == 0
    assert rows[0].mult_real_numeric == 2


def test_hopf_map_spectrum():
    basis = build_basis(4)
    rows = ops.hopf_map_jacobi_spectrum(basis)
    negative = [r for r in rows if r.eigenvalue_closed_form < 0]
    assert [(r.n, r.k) for r in negative] == [(1, -1)]
    assert negative[0].mult_real_numeric == 4
    assert negative[0].abs_error < 1e-8
    kernel = [r for r in rows if r.eigenvalue_closed_form == 0.0]
    assert sorted((r.n, r.k) for r in kernel) == [(0, 0), (2, -2)]
    assert sum(r.mult_real_numeric for r in kernel) == 8


def test_field_operator_constant_block(basis6):
    op = ops.rough_laplacian_field_operator(basis6)
    # constants: rough = 2 I on the three frame coefficients, so the Jacobi
    # block (rough - 2) vanishes identically
    assert np.max(np.abs(op.blocks[0] - 2.0 * np.eye(3))) < 1e-13


def test_field_operator_blocks_symmetric(basis6):
    op = ops.rough_laplacian_field_operator(basis6)
    for n in range(7):
        blk = op.blocks[n]
        assert np.max(np.abs(blk - blk.T)) < 1e-10


def test_identity_block_closed_form_dimensions():
    for n in range(7):
        total = sum(e.multiplicity for e in ops.identity_block_closed_form(n))
        assert total == 3 * (n + 1) ** 2


def test_identity_spectrum_rows():
    basis = build_basis(5)
    rows = ops.identity_jacobi_spectrum(basis)
    by_value = {r.eigenvalue_closed_form: r for r in rows}
    assert by_value[-1.0].mult_real_numeric == 4
    assert by_value[0.0].mult_real_numeric == 6
    assert all(r.abs_error < 1e-7 for r in rows)
    assert all(r.mult_real_closed == r.mult_real_numeric for r in rows)
    # resolved rows at degree 5: gradient series k <= 4, curl series k <= 3
    grads = sorted(r.n for r in rows if r.k == 0)
    curls = sorted(r.n for r in rows if r.k == 1)
    assert grads == [0, 1, 2, 3, 4]
    assert curls == [0, 1, 2, 3]


def test_identity_kernel_split_between_degrees():
    """The 6-dimensional kernel sits in the constant block (left-invariant
    fields) and the degree-2 block (right-invariant fields)."""
    basis = build_basis(3)
    op = ops.rough_laplacian_field_operator(basis)
    for n, expected in ((0, 3), (1, 0), (2, 3), (3, 0)):
        jac = op.blocks[n] - 2.0 * np.eye(op.blocks[n].shape[0])
        vals = np.linalg.eigvalsh(jac)
        assert np.sum(np.abs(vals) < 1e-8) == expected


def test_spectrum_report_dispatch(basis6):
    with pytest.raises(ValueError):
        ops.spectrum_report("bogus", basis6)
