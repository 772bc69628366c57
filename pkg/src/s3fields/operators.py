"""Degree-block operators on the harmonic basis and their spectra.

The frame derivatives along the left-invariant frame preserve each harmonic
degree exactly (they differentiate along rotation generators, which commute
with the Laplacian), so every operator here is an exact block matrix per
degree, not a truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polynomials as poly
from . import su2
from .harmonics import HarmonicBasis, block_dimension, laplace_eigenvalue

EIG_CLUSTER_TOL = 1e-7
HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumEntry:
    eigenvalue: float
    multiplicity: int  # real-dimension convention
    label: tuple | None = None


@dataclass
class DegreeBlockOperator:
    """One square matrix per harmonic degree n, acting on that coefficient block."""

    kind: str
    max_degree: int
    blocks: list[np.ndarray]

    def apply(self, coeffs: np.ndarray, basis: HarmonicBasis) -> np.ndarray:
        out = np.zeros_like(coeffs, dtype=np.result_type(coeffs, self.blocks[0]))
        for n in range(self.max_degree + 1):
            sl = basis.block_slice(n)
            out[sl] = self.blocks[n] @ coeffs[sl]
        return out


def assemble_derivative(j: int, basis: HarmonicBasis) -> DegreeBlockOperator:
    """Matrix of f -> grad f . sigma_j per degree block, computed exactly.

    For a polynomial f the derivative along sigma_j(x) = x e_j is the ambient
    directional derivative Df(x)[A_j x], a degree-preserving polynomial
    operation; projection back onto the block uses exact Gram data.
    """
    if j not in (1, 2, 3):
        raise ValueError("frame index must be 1, 2 or 3")
    A = su2.RIGHT_MULT[j - 1]
    blocks = []
    for n in range(basis.max_degree + 1):
        B = basis.blocks[n]
        T = poly.linear_field_derivative(A, n)
        gram = poly.gram_matrix(n, n)
        # entry (i, k) = <b_i, X_j b_k>
        blocks.append(B @ gram @ (T @ B.T))
    return DegreeBlockOperator(kind=f"frame_derivative_{j}", max_degree=basis.max_degree, blocks=blocks)


def laplacian_blocks(basis: HarmonicBasis) -> DegreeBlockOperator:
    blocks = [laplace_eigenvalue(n) * np.eye(block_dimension(n)) for n in range(basis.max_degree + 1)]
    return DegreeBlockOperator(kind="laplacian", max_degree=basis.max_degree, blocks=blocks)


def derivative_leakage(j: int, basis: HarmonicBasis) -> float:
    """Max L^2 mass of grad(b).sigma_j outside the degree block of b (should be ~0)."""
    A = su2.RIGHT_MULT[j - 1]
    worst = 0.0
    for n in range(basis.max_degree + 1):
        B = basis.blocks[n]
        T = poly.linear_field_derivative(A, n)
        gram = poly.gram_matrix(n, n)
        derivs = (T @ B.T).T  # (dim, monomials)
        total = np.einsum("im,mk,ik->i", derivs, gram, derivs)
        inblock = B @ gram @ derivs.T
        captured = np.sum(inblock**2, axis=0)
        worst = max(worst, float(np.max(np.abs(total - captured))))
    return worst


def twisted_laplacian(basis: HarmonicBasis, d1: DegreeBlockOperator, twist: float) -> DegreeBlockOperator:
    """Hermitian blocks of Delta - i * twist * grad_sigma (twist=2: vertical
    Jacobi operator on complex functions; twist=4: Hopf-map Jacobi operator)."""
    blocks = []
    for n in range(basis.max_degree + 1):
        blocks.append(laplace_eigenvalue(n) * np.eye(block_dimension(n), dtype=complex) - 1j * twist * d1.blocks[n])
    kind = {2.0: "vertical_jacobi", 4.0: "hopf_map_jacobi"}.get(float(twist), f"twisted_laplacian_{twist}")
    return DegreeBlockOperator(kind=kind, max_degree=basis.max_degree, blocks=blocks)


def lambda_matrix(basis: HarmonicBasis, d1: DegreeBlockOperator | None = None) -> DegreeBlockOperator:
    """The vertical Jacobi operator as Delta - 2i grad_sigma on complex functions."""
    if d1 is None:
        d1 = assemble_derivative(1, basis)
    return twisted_laplacian(basis, d1, 2.0)


def hermitian_eigen(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Rejects inputs that are not Hermitian to within HERMITICITY_TOL (relative)
    and verifies the residual of every returned pair.
    """
    M = np.asarray(M)
    scale = max(1.0, float(np.linalg.norm(M)))
    herm_err = float(np.linalg.norm(M - M.conj().T))
    if herm_err > HERMITICITY_TOL * scale:
        raise ValueError(f"matrix is not Hermitian: ||M - M*|| = {herm_err:.3e}")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.conj().T))
    res = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
    if np.max(res) > 1e-10 * scale:
        raise RuntimeError(f"eigenpair residual too large: {np.max(res):.3e}")
    ortho = np.linalg.norm(vecs.conj().T @ vecs - np.eye(M.shape[0]))
    if ortho > 1e-10 * max(1.0, M.shape[0]):
        raise RuntimeError(f"eigenvectors not orthonormal: {ortho:.3e}")
    return vals, vecs


def _cluster(values: np.ndarray, tol: float = EIG_CLUSTER_TOL) -> list[tuple[float, int]]:
    """Group sorted eigenvalues into (mean, count) clusters within tol."""
    out: list[tuple[float, int]] = []
    for v in np.sort(values):
        if out and abs(v - out[-1][0]) <= tol:
            mean, cnt = out[-1]
            out[-1] = ((mean * cnt + v) / (cnt + 1), cnt + 1)
        else:
            out.append((float(v), 1))
    return out


def closed_form_spectrum(kind: str, max_degree: int) -> list[SpectrumEntry]:
    """Known spectra, labelled, in the real-multiplicity convention.

    vertical:  n(n+2) + 2k,  k = -n, -n+2, ..., n, multiplicity 2(n+1)
    hopf_map:  n(n+2) + 4k, same k range and multiplicities
    identity:  k^2 + 4k - 1 with multiplicity (k+2)^2 (gradient family), and
               k^2 + 4k with multiplicity 2(k+1)(k+3) (curl family), k >= 0
    """
    entries: list[SpectrumEntry] = []
    if kind in ("vertical", "hopf_map"):
        step = 2 if kind == "vertical" else 4
        for n in range(max_degree + 1):
            for k in range(-n, n + 1, 2):
                entries.append(SpectrumEntry(laplace_eigenvalue(n) + step * k, 2 * (n + 1), (n, k)))
    elif kind == "identity":
        for k in range(max_degree + 1):
            entries.append(SpectrumEntry(float(k * k + 4 * k - 1), (k + 2) ** 2, (k, "gradient")))
            entries.append(SpectrumEntry(float(k * k + 4 * k), 2 * (k + 1) * (k + 3), (k, "curl")))
    else:
        raise ValueError(f"unknown spectrum kind: {kind}")
    return sorted(entries, key=lambda e: (e.eigenvalue, str(e.label)))


def identity_block_closed_form(n: int) -> list[SpectrumEntry]:
    """Closed-form spectrum of the degree-n block of the identity-map Jacobi
    operator on frame coefficients (real multiplicities).

    Gradient fields of degree-(n) scalars contribute n^2+2n-4 with
    multiplicity (n+1)^2; the two curl families contribute n^2+4n with
    multiplicity (n+1)(n+3) and n^2-4 with multiplicity (n-1)(n+1).
    """
    out = [SpectrumEntry(float(n * n + 4 * n), (n + 1) * (n + 3), (n, "curl"))]
    if n >= 1:
        out.append(SpectrumEntry(float(n * n + 2 * n - 4), (n + 1) ** 2, (n - 1, "gradient")))
    if n >= 2:
        out.append(SpectrumEntry(float(n * n - 4), (n - 1) * (n + 1), (n - 2, "curl")))
    return sorted(out, key=lambda e: e.eigenvalue)


@dataclass
class SpectrumComparison:
    """One closed-form eigenvalue matched against the numerics."""

    kind: str
    n: int
    k: int
    eigenvalue_closed_form: float
    eigenvalue_numeric: float
    mult_real_closed: int
    mult_real_numeric: int
    abs_error: float

    @property
    def matches(self) -> bool:
        return self.mult_real_closed == self.mult_real_numeric

    def row(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "eigenvalue_closed_form": self.eigenvalue_closed_form,
            "eigenvalue_numeric": self.eigenvalue_numeric,
            "mult_real_closed": self.mult_real_closed,
            "mult_real_numeric": self.mult_real_numeric,
            "abs_error": self.abs_error,
        }


def _twisted_spectrum(basis: HarmonicBasis, twist: int, kind: str) -> list[SpectrumComparison]:
    d1 = assemble_derivative(1, basis)
    op = twisted_laplacian(basis, d1, float(twist))
    rows = []
    for n in range(basis.max_degree + 1):
        vals, _ = hermitian_eigen(op.blocks[n])
        for mean, cnt in _cluster(vals):
            k = round((mean - laplace_eigenvalue(n)) / twist)
            closed = laplace_eigenvalue(n) + twist * k
            if abs(mean - closed) > 1e-6 or abs(k) > n or (n + k) % 2:
                raise RuntimeError(
                    f"{kind}: eigenvalue {mean:.12g} in degree-{n} block matches no closed form"
                )
            rows.append(
                SpectrumComparison(
                    kind=kind,
                    n=n,
                    k=k,
                    eigenvalue_closed_form=closed,
                    eigenvalue_numeric=mean,
                    mult_real_closed=2 * (n + 1),
                    mult_real_numeric=2 * cnt,  # complex multiplicity doubled
                    abs_error=abs(mean - closed),
                )
            )
    return rows


def vertical_jacobi_spectrum(basis: HarmonicBasis) -> list[SpectrumComparison]:
    return _twisted_spectrum(basis, 2, "vertical")


def hopf_map_jacobi_spectrum(basis: HarmonicBasis) -> list[SpectrumComparison]:
    return _twisted_spectrum(basis, 4, "hopf_map")


_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_i, _k, _j] = -1.0


def epsilon_symbol() -> np.ndarray:
    """Totally antisymmetric symbol with epsilon[0,1,2] = 1."""
    return _EPS.copy()


def rough_laplacian_field_operator(basis: HarmonicBasis) -> DegreeBlockOperator:
    """Rough Laplacian on frame-coefficient triples, block per polynomial degree.

    On f = (f1, f2, f3) representing sum_k f_k sigma_k the component on sigma_l
    is Delta f_l + 2 f_l - 2 sum_{j,k} eps_{jkl} grad_j f_k, using that each
    frame leg satisfies rough-Laplacian eigenvalue 2 (it is Killing).
    """
    derivs = [assemble_derivative(j, basis) for j in (1, 2, 3)]
    blocks = []
    for n in range(basis.max_degree + 1):
        dim = block_dimension(n)
        blk = np.zeros((3 * dim, 3 * dim))
        for l in range(3):
            blk[l * dim : (l + 1) * dim, l * dim : (l + 1) * dim] = (laplace_eigenvalue(n) + 2.0) * np.eye(dim)
            for k in range(3):
                acc = np.zeros((dim, dim))
                for j in range(3):
                    if _EPS[j, k, l]:
                        acc += _EPS[j, k, l] * derivs[j].blocks[n]
                if np.any(acc):
                    blk[l * dim : (l + 1) * dim, k * dim : (k + 1) * dim] -= 2.0 * acc
        blocks.append(blk)
    return DegreeBlockOperator(kind="field_rough_laplacian", max_degree=basis.max_degree, blocks=blocks)


def identity_jacobi_spectrum(basis: HarmonicBasis) -> list[SpectrumComparison]:
    """Spectrum of (rough Laplacian - 2) on vector fields, degree block by block,
    matched against the closed forms and aggregated over the k-series.

    A series entry is reported as fully resolved only when every polynomial
    degree carrying part of its eigenspace lies within the basis; rows use
    n = series index and k = 0 (gradient family) or k = 1 (curl family).
    """
    op = rough_laplacian_field_operator(basis)
    found: dict[tuple[int, str], tuple[float, int, float]] = {}
    for n in range(basis.max_degree + 1):
        jac = op.blocks[n] - 2.0 * np.eye(op.blocks[n].shape[0])
        vals, _ = hermitian_eigen(jac)
        expected = identity_block_closed_form(n)
        for mean, cnt in _cluster(vals):
            best = min(expected, key=lambda e: abs(e.eigenvalue - mean))
            if abs(best.eigenvalue - mean) > 1e-5:
                raise RuntimeError(
                    f"identity: eigenvalue {mean:.12g} in degree-{n} block matches no closed form"
                )
            key = best.label
            ev, c, err = found.get(key, (0.0, 0, 0.0))
            found[key] = (
                (ev * c + mean * cnt) / (c + cnt),
                c + cnt,
                max(err, abs(mean - best.eigenvalue)),
            )
    rows = []
    for k in range(basis.max_degree + 1):
        for series, mult, code in (
            ("gradient", (k + 2) ** 2, 0),
            ("curl", 2 * (k + 1) * (k + 3), 1),
        ):
            resolved = (k + 1 <= basis.max_degree) if series == "gradient" else (k + 2 <= basis.max_degree)
            if not resolved:
                continue
            closed = float(k * k + 4 * k - 1) if series == "gradient" else float(k * k + 4 * k)
            ev, cnt, err = found.get((k, series), (np.nan, 0, np.nan))
            rows.append(
                SpectrumComparison(
                    kind="identity",
                    n=k,
                    k=code,
                    eigenvalue_closed_form=closed,
                    eigenvalue_numeric=ev,
                    mult_real_closed=mult,
                    mult_real_numeric=cnt,
                    abs_error=err if cnt else np.nan,
                )
            )
    return sorted(rows, key=lambda r: r.eigenvalue_closed_form)


def spectrum_report(kind: str, basis: HarmonicBasis) -> list[SpectrumComparison]:
    if kind == "vertical":
        return vertical_jacobi_spectrum(basis)
    if kind == "hopf_map":
        return hopf_map_jacobi_spectrum(basis)
    if kind == "identity":
        return identity_jacobi_spectrum(basis)
    raise ValueError(f"unknown spectrum kind: {kind}")
