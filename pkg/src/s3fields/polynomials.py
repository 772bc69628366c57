"""Exact algebra for homogeneous polynomials on R^4 and their integrals over S^3.

Polynomials are stored as coefficient vectors over a fixed monomial ordering
per degree.  Integrals over the unit 3-sphere are computed from the Gamma
formula, kept as exact rationals times pi^2, so Gram matrices carry no
quadrature error.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

NVARS = 4
PI2 = math.pi**2


@lru_cache(maxsize=None)
def monomials(degree: int) -> tuple[tuple[int, int, int, int], ...]:
    """All exponent 4-tuples of the given total degree, fixed lexicographic order."""
    if degree < 0:
        return ()
    out = []
    for a0 in range(degree, -1, -1):
        for a1 in range(degree - a0, -1, -1):
            for a2 in range(degree - a0 - a1, -1, -1):
                out.append((a0, a1, a2, degree - a0 - a1 - a2))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(degree: int) -> dict:
    return {m: i for i, m in enumerate(monomials(degree))}


def num_monomials(degree: int) -> int:
    return len(monomials(degree))


@lru_cache(maxsize=None)
def _half_gamma_rational(n: int) -> tuple[Fraction, int]:
    """Gamma((n+1)/2) as (rational, number of sqrt(pi) factors) for integer n >= 0."""
    if n % 2 == 0:
        m = n // 2  # Gamma(m + 1/2) = (2m)! / (4^m m!) * sqrt(pi)
        return Fraction(math.factorial(2 * m), 4**m * math.factorial(m)), 1
    return Fraction(math.factorial((n + 1) // 2 - 1)), 0


@lru_cache(maxsize=None)
def monomial_integral_over_pi2(alpha: tuple[int, int, int, int]) -> Fraction:
    """Integral of x^alpha over S^3 divided by pi^2, as an exact rational.

    Vanishes unless every exponent is even; otherwise equals
    2 * prod_i Gamma((alpha_i+1)/2) / Gamma((|alpha|+4)/2) with the pi^2
    from the four half-integer Gamma factors divided out.
    """
    if any(a % 2 for a in alpha):
        return Fraction(0)
    num = Fraction(2)
    for a in alpha:
        r, _ = _half_gamma_rational(a)
        num *= r
    total = sum(alpha)
    denom = Fraction(math.factorial(total // 2 + 1))  # Gamma(|alpha|/2 + 2)
    return num / denom


def monomial_integral(alpha) -> float:
    """Integral of x0^a0 x1^a1 x2^a2 x3^a3 over the unit S^3 in R^4."""
    frac = monomial_integral_over_pi2(tuple(int(a) for a in alpha))
    if frac == 0:
        return 0.0
    return (frac.numerator / frac.denominator) * PI2


@lru_cache(maxsize=None)
def gram_matrix(deg_a: int, deg_b: int) -> np.ndarray:
    """Matrix of S^3 integrals of products of degree-a and degree-b monomials."""
    ma, mb = monomials(deg_a), monomials(deg_b)
    out = np.zeros((len(ma), len(mb)))
    if (deg_a + deg_b) % 2:
        return out
    for i, p in enumerate(ma):
        for j, q in enumerate(mb):
            out[i, j] = monomial_integral(tuple(p[t] + q[t] for t in range(NVARS)))
    return out


@lru_cache(maxsize=None)
def product_index(deg_a: int, deg_b: int) -> np.ndarray:
    """Index table: (i, j) -> position of monomial_i * monomial_j in degree a+b."""
    idx = monomial_index(deg_a + deg_b)
    ma, mb = monomials(deg_a), monomials(deg_b)
    table = np.empty((len(ma), len(mb)), dtype=np.int64)
    for i, p in enumerate(ma):
        for j, q in enumerate(mb):
            table[i, j] = idx[(p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3])]
    return table


def poly_multiply(a: np.ndarray, deg_a: int, b: np.ndarray, deg_b: int) -> np.ndarray:
    """Coefficients of the product of two homogeneous polynomials."""
    table = product_index(deg_a, deg_b)
    out = np.zeros(num_monomials(deg_a + deg_b))
    np.add.at(out, table.ravel(), np.outer(a, b).ravel())
    return out


@lru_cache(maxsize=None)
def laplacian_matrix(degree: int) -> np.ndarray:
    """Ambient R^4 Laplacian as a map from degree-n to degree-(n-2) coefficients."""
    if degree < 2:
        return np.zeros((0, num_monomials(degree)))
    src = monomials(degree)
    idx = monomial_index(degree - 2)
    out = np.zeros((num_monomials(degree - 2), num_monomials(degree)))
    for j, a in enumerate(src):
        for mu in range(NVARS):
            if a[mu] >= 2:
                b = list(a)
                b[mu] -= 2
                out[idx[tuple(b)], j] += a[mu] * (a[mu] - 1)
    return out


_LINDERIV_CACHE: dict = {}


def linear_field_derivative(A: np.ndarray, degree: int) -> np.ndarray:
    """Matrix of f -> (Ax).grad f on degree-n coefficients (degree preserving)."""
    key = (A.tobytes(), degree)
    hit = _LINDERIV_CACHE.get(key)
    if hit is not None:
        return hit
    src = monomials(degree)
    idx = monomial_index(degree)
    out = np.zeros((len(src), len(src)))
    for j, a in enumerate(src):
        for mu in range(NVARS):  # (Ax)_mu d/dx_mu
            if a[mu] == 0:
                continue
            for nu in range(NVARS):
                if A[mu, nu] == 0.0:
                    continue
                b = list(a)
                b[mu] -= 1
                b[nu] += 1
                out[idx[tuple(b)], j] += A[mu, nu] * a[mu]
    _LINDERIV_CACHE[key] = out
    return out


def evaluate_monomials(degree: int, points: np.ndarray) -> np.ndarray:
    """Values of all degree-n monomials at points of shape (M, 4)."""
    expo = np.array(monomials(degree))  # (m, 4)
    # power table per variable, reused across monomials
    maxp = degree
    powers = np.ones((maxp + 1, points.shape[0], NVARS))
    for p in range(1, maxp + 1):
        powers[p] = powers[p - 1] * points
    vals = np.ones((points.shape[0], expo.shape[0]))
    for v in range(NVARS):
        vals *= powers[expo[:, v], :, v].T
    return vals


class PolyBag:
    """A polynomial on R^4 stored as homogeneous pieces keyed by degree."""

    def __init__(self, pieces: dict[int, np.ndarray] | None = None):
        self.pieces: dict[int, np.ndarray] = {}
        if pieces:
            for d, c in pieces.items():
                self.add_piece(d, c)

    def add_piece(self, degree: int, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (num_monomials(degree),):
            raise ValueError("coefficient length does not match degree")
        if degree in self.pieces:
            self.pieces[degree] = self.pieces[degree] + coeffs
        else:
            self.pieces[degree] = coeffs.copy()

    def __add__(self, other: "PolyBag") -> "PolyBag":
        out = PolyBag(self.pieces)
        for d, c in other.pieces.items():
            out.add_piece(d, c)
        return out

    def __mul__(self, other):
        out = PolyBag()
        if isinstance(other, PolyBag):
            for da, ca in self.pieces.items():
                for db, cb in other.pieces.items():
                    out.add_piece(da + db, poly_multiply(ca, da, cb, db))
            return out
        for d, c in self.pieces.items():
            out.add_piece(d, c * float(other))
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other: "PolyBag") -> "PolyBag":
        return self + (-other)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        out = np.zeros(points.shape[0])
        for d, c in self.pieces.items():
            out += evaluate_monomials(d, points) @ c
        return out

    def sphere_inner(self, other: "PolyBag") -> float:
        """Exact L^2(S^3) inner product."""
        total = 0.0
        for da, ca in self.pieces.items():
            for db, cb in other.pieces.items():
                if (da + db) % 2:
                    continue
                total += ca @ gram_matrix(da, db) @ cb
        return total

    @staticmethod
    def coordinate(mu: int) -> "PolyBag":
        c = np.zeros(NVARS)
        c[mu] = 1.0
        out = PolyBag()
        out.add_piece(1, c)
        return out

    @staticmethod
    def constant(value: float) -> "PolyBag":
        out = PolyBag()
        out.add_piece(0, np.array([float(value)]))
        return out


class QuaternionPoly:
    """Quaternion with polynomial components, multiplied by Hamilton's rules."""

    def __init__(self, w: PolyBag, x: PolyBag, y: PolyBag, z: PolyBag):
        self.comp = (w, x, y, z)

    @staticmethod
    def point() -> "QuaternionPoly":
        """The identity map x -> x as a quaternion-valued polynomial."""
        return QuaternionPoly(*(PolyBag.coordinate(mu) for mu in range(NVARS)))

    @staticmethod
    def constant(q) -> "QuaternionPoly":
        return QuaternionPoly(*(PolyBag.constant(qi) for qi in q))

    def conj(self) -> "QuaternionPoly":
        w, x, y, z = self.comp
        return QuaternionPoly(w, -x, -y, -z)

    def __mul__(self, other: "QuaternionPoly") -> "QuaternionPoly":
        a0, a1, a2, a3 = self.comp
        b0, b1, b2, b3 = other.comp
        return QuaternionPoly(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def scale(self, s: float) -> "QuaternionPoly":
        return QuaternionPoly(*(c * s for c in self.comp))

    def dot(self, other: "QuaternionPoly") -> PolyBag:
        out = PolyBag()
        for a, b in zip(self.comp, other.comp):
            out = out + a * b
        return out
