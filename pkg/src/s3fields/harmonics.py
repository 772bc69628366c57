"""Orthonormal hyperspherical harmonics on S^3 and a product quadrature grid.

Degree-n harmonics are harmonic homogeneous polynomials on R^4 restricted to
the sphere; each degree carries an (n+1)^2-dimensional block, orthonormalized
against the exact monomial-integral inner product so the basis itself is free
of quadrature error.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import polynomials as poly
from .polynomials import PI2, PolyBag

MAX_DEGREE = 12
CACHE_VERSION = 1


def block_dimension(n: int) -> int:
    return (n + 1) ** 2


def laplace_eigenvalue(n: int) -> float:
    return float(n * (n + 2))


def _harmonic_nullspace(n: int) -> np.ndarray:
    """Rows span the harmonic homogeneous polynomials of degree n (monomial coeffs)."""
    m = poly.num_monomials(n)
    if n < 2:
        return np.eye(m)
    lap = poly.laplacian_matrix(n)
    _, s, vh = np.linalg.svd(lap)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null = vh[rank:]
    expected = block_dimension(n)
    if null.shape[0] != expected:
        raise RuntimeError(f"harmonic nullspace at degree {n}: got {null.shape[0]}, want {expected}")
    return null


def _orthonormalize(vectors: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt in the inner product given by gram, with one
    re-orthogonalization sweep."""
    basis = vectors.astype(float).copy()
    for sweep in range(2):
        for i in range(basis.shape[0]):
            v = basis[i]
            for j in range(i):
                v = v - (basis[j] @ gram @ v) * basis[j]
            nrm2 = v @ gram @ v
            if nrm2 <= 0:
                raise RuntimeError("Gram-Schmidt breakdown: degenerate vector")
            basis[i] = v / np.sqrt(nrm2)
    return basis


@dataclass
class HarmonicBasis:
    """Orthonormal harmonic basis up to max_degree, one coefficient table per degree."""

    max_degree: int
    blocks: list[np.ndarray]  # blocks[n]: (dim_n, num_monomials(n))
    _extensions: dict = field(default_factory=dict, repr=False)
    _aux: dict = field(default_factory=dict, repr=False)  # operator caches

    @property
    def total_dim(self) -> int:
        return sum(b.shape[0] for b in self.blocks)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.shape[0]
        return out

    def block_slice(self, n: int) -> slice:
        off = self.offsets()
        return slice(off[n], off[n] + self.blocks[n].shape[0])

    def evaluate_block(self, n: int, points: np.ndarray) -> np.ndarray:
        return poly.evaluate_monomials(n, points) @ self.blocks[n].T

    def evaluate_matrix(self, points: np.ndarray) -> np.ndarray:
        """(M, total_dim) matrix of basis values at the given points."""
        return np.hstack([self.evaluate_block(n, points) for n in range(self.max_degree + 1)])

    def evaluate(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        return self.evaluate_matrix(points) @ coeffs

    def basis_polynomial(self, n: int, i: int) -> PolyBag:
        bag = PolyBag()
        bag.add_piece(n, self.blocks[n][i])
        return bag

    def coeffs_to_polybag(self, coeffs: np.ndarray) -> PolyBag:
        bag = PolyBag()
        off = self.offsets()
        for n, b in enumerate(self.blocks):
            c = coeffs[off[n] : off[n] + b.shape[0]]
            if np.any(c):
                bag.add_piece(n, b.T @ c)
        return bag

    def project_polybag(self, bag: PolyBag) -> np.ndarray:
        """Exact L^2 projection of a polynomial onto the basis (no quadrature)."""
        out = np.zeros(self.total_dim)
        off = self.offsets()
        for n, b in enumerate(self.blocks):
            for d, c in bag.pieces.items():
                if (d + n) % 2:
                    continue
                out[off[n] : off[n] + b.shape[0]] += b @ (poly.gram_matrix(n, d) @ c)
        return out

    def gram(self) -> np.ndarray:
        """Exact Gram matrix of the basis (identity up to roundoff)."""
        out = np.zeros((self.total_dim, self.total_dim))
        off = self.offsets()
        for n, bn in enumerate(self.blocks):
            for m in range(n, self.max_degree + 1):
                if (n + m) % 2:
                    continue
                bm = self.blocks[m]
                g = bn @ poly.gram_matrix(n, m) @ bm.T
                out[off[n] : off[n] + bn.shape[0], off[m] : off[m] + bm.shape[0]] = g
                if m != n:
                    out[off[m] : off[m] + bm.shape[0], off[n] : off[n] + bn.shape[0]] = g.T
        return out

    def extension(self, extra: int) -> "HarmonicBasis":
        """This basis extended by `extra` degrees (cached)."""
        if extra <= 0:
            return self
        hit = self._extensions.get(extra)
        if hit is None:
            hit = build_basis(self.max_degree + extra)
            self._extensions[extra] = hit
        return hit

    def save(self, path: str):
        payload = {f"block_{n}": b for n, b in enumerate(self.blocks)}
        _atomic_savez(
            path,
            kind="basis",
            version=CACHE_VERSION,
            max_degree=self.max_degree,
            **payload,
        )

    @staticmethod
    def load(path: str, max_degree: int | None = None) -> "HarmonicBasis":
        with np.load(path) as data:
            _check_cache(data, "basis")
            n_max = int(data["max_degree"])
            if max_degree is not None and n_max != max_degree:
                raise CacheMismatchError(f"cached basis degree {n_max} != requested {max_degree}")
            blocks = [data[f"block_{n}"] for n in range(n_max + 1)]
        return HarmonicBasis(max_degree=n_max, blocks=blocks)


class CacheMismatchError(RuntimeError):
    pass


def _check_cache(data, kind: str):
    if str(data["kind"]) != kind:
        raise CacheMismatchError(f"cache holds {data['kind']!r}, expected {kind!r}")
    if int(data["version"]) != CACHE_VERSION:
        raise CacheMismatchError(f"cache version {int(data['version'])} != {CACHE_VERSION}")


def _atomic_savez(path: str, **arrays):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:  # a handle keeps numpy from appending .npz
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def build_basis(max_degree: int) -> HarmonicBasis:
    """Orthonormal harmonic basis on S^3 for all degrees <= max_degree.

    Monomial-exact Gram data keeps the construction stable up to the declared
    cap; beyond it double-precision Gram-Schmidt is not trusted.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if max_degree > MAX_DEGREE:
        raise ValueError(f"max_degree {max_degree} exceeds supported cap {MAX_DEGREE}")
    blocks = []
    for n in range(max_degree + 1):
        null = _harmonic_nullspace(n)
        gram = poly.gram_matrix(n, n)
        basis = _orthonormalize(null, gram)
        ortho_err = np.max(np.abs(basis @ gram @ basis.T - np.eye(basis.shape[0])))
        if ortho_err > 1e-10:
            raise RuntimeError(f"orthonormalization failed at degree {n}: {ortho_err:.2e}")
        blocks.append(basis)
    return HarmonicBasis(max_degree=max_degree, blocks=blocks)


@dataclass
class QuadratureGrid:
    """Product quadrature on S^3 in Hopf coordinates.

    Coordinates z1 = cos(eta) e^{i xi1}, z2 = sin(eta) e^{i xi2} with volume
    element sin(eta) cos(eta) d eta d xi1 d xi2; the substitution t = cos(2 eta)
    turns the eta integral into Gauss-Legendre on [-1, 1] with weight 1/4.
    Nodes are ordered t-major, then xi1, then xi2.
    """

    levels: tuple[int, int, int]
    nodes: np.ndarray  # (M, 4) unit quaternions
    weights: np.ndarray  # (M,)
    exactness_degree: int
    _eval_cache: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))

    def basis_values(self, basis: HarmonicBasis) -> np.ndarray:
        key = (id(basis), basis.max_degree)
        hit = self._eval_cache.get(key)
        if hit is None:
            hit = basis.evaluate_matrix(self.nodes)
            self._eval_cache[key] = hit
        return hit

    def project(self, basis: HarmonicBasis, values: np.ndarray) -> np.ndarray:
        """Basis coefficients of nodal values, assuming sufficient exactness.

        Exact on polynomials of degree d when exactness_degree >= d + max_degree.
        """
        if self.exactness_degree < 2 * basis.max_degree:
            raise ValueError(
                f"grid exactness {self.exactness_degree} < 2*max_degree "
                f"{2 * basis.max_degree}: projection would be inconsistent"
            )
        bv = self.basis_values(basis)
        return (bv * self.weights[:, None]).T @ values

    def save(self, path: str):
        _atomic_savez(
            path,
            kind="grid",
            version=CACHE_VERSION,
            levels=np.array(self.levels),
            nodes=self.nodes,
            weights=self.weights,
            exactness_degree=self.exactness_degree,
        )

    @staticmethod
    def load(path: str, levels: tuple[int, int, int] | None = None) -> "QuadratureGrid":
        with np.load(path) as data:
            _check_cache(data, "grid")
            lv = tuple(int(v) for v in data["levels"])
            if levels is not None and lv != tuple(levels):
                raise CacheMismatchError(f"cached grid levels {lv} != requested {tuple(levels)}")
            return QuadratureGrid(
                levels=lv,
                nodes=data["nodes"],
                weights=data["weights"],
                exactness_degree=int(data["exactness_degree"]),
            )


def hopf_grid(levels: tuple[int, int, int]) -> QuadratureGrid:
    """Gauss-Legendre x trapezoid x trapezoid grid; weights sum to 2 pi^2."""
    lt, l1, l2 = levels
    if lt < 1 or l1 < 1 or l2 < 1:
        raise ValueError("all quadrature levels must be >= 1")
    t_nodes, t_weights = np.polynomial.legendre.leggauss(lt)
    xi1 = 2.0 * np.pi * np.arange(l1) / l1
    xi2 = 2.0 * np.pi * np.arange(l2) / l2
    w_angle = (2.0 * np.pi / l1) * (2.0 * np.pi / l2)

    ct = np.sqrt((1.0 + t_nodes) / 2.0)  # cos(eta)
    st = np.sqrt((1.0 - t_nodes) / 2.0)  # sin(eta)
    T, X1, X2 = np.meshgrid(np.arange(lt), xi1, xi2, indexing="ij")
    cos_eta = ct[T.ravel()]
    sin_eta = st[T.ravel()]
    a1, a2 = X1.ravel(), X2.ravel()
    # z1 = w + ix = cos(eta) e^{i xi1};  z2 = z + iy = sin(eta) e^{i xi2}
    nodes = np.stack(
        [
            cos_eta * np.cos(a1),
            cos_eta * np.sin(a1),
            sin_eta * np.sin(a2),
            sin_eta * np.cos(a2),
        ],
        axis=-1,
    )
    weights = 0.25 * w_angle * t_weights[T.ravel()]
    exactness = min(4 * lt - 2, l1 - 1, l2 - 1)
    return QuadratureGrid(
        levels=(lt, l1, l2),
        nodes=nodes,
        weights=weights,
        exactness_degree=exactness,
    )


def sphere_volume() -> float:
    return 2.0 * PI2
