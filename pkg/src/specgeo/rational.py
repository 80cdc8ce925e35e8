"""Rational matrix functions of ``z``, Laurent polynomials and frequency grids.

Transfer functions use the ``z`` convention throughout: a realization
``(A, B, C, D)`` represents ``G(z) = C (zI - A)^{-1} B + D``.  Scalar filters
given as polynomials in ``z^{-1}`` (the usual DSP form) are lifted to a
biproper realization by :meth:`StateSpace.from_tf`.

Para-Hermitian conjugates ``G*(z) = G^T(1/z)`` are never built as
realizations.  Spectra are carried either by a factor ``W`` (evaluated as
``W W^H`` frequency by frequency) or, in the scalar case, as ratios of
symmetric Laurent polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    GridMismatchError,
    InvalidInputError,
    NotPositiveDefiniteError,
    PoleOnCircleError,
    SingularFeedthroughError,
    SingularResolventError,
)

__all__ = [
    "StateSpace",
    "FrequencyGrid",
    "SampledSpectrum",
    "LaurentPolynomial",
    "ScalarRationalSpectrum",
    "evaluate",
    "sample",
    "series",
    "add",
    "inverse",
    "poles",
    "zeros",
    "laurent_multiply",
    "laurent_add",
    "laurent_eval",
    "laurent_roots",
    "DEFAULT_GRID",
]

DEFAULT_GRID = 4096

# |eig(A)| within this distance of 1 counts as a pole on the unit circle
CIRCLE_TOL = 1e-9
# chunk size for batched resolvent solves (memory bound for large grids)
_CHUNK = 4096


def _as_matrix(x, name) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Realization ``(A, B, C, D)`` of a real rational matrix function.

    Empty ``A`` (zero states) gives a constant system.  Arrays are stored
    read-only; operations always return new instances.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = _as_matrix(self.D, "D")
        p, m = D.shape
        A = np.array(self.A, dtype=float)
        n = A.shape[0] if A.size else 0
        A = np.zeros((0, 0)) if n == 0 else _as_matrix(A, "A")
        B = np.array(self.B, dtype=float)
        B = np.zeros((n, m)) if B.size == 0 else _as_matrix(B, "B")
        C = np.array(self.C, dtype=float)
        C = np.zeros((p, n)) if C.size == 0 else _as_matrix(C, "C")
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape != (n, m):
            raise DimensionError(f"B has shape {B.shape}, expected {(n, m)}")
        if C.shape != (p, n):
            raise DimensionError(f"C has shape {C.shape}, expected {(p, n)}")
        for name, arr in (("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "D", D)

    @classmethod
    def constant(cls, D) -> "StateSpace":
        D = _as_matrix(D, "D")
        p, m = D.shape
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D)

    @classmethod
    def identity(cls, n: int) -> "StateSpace":
        return cls.constant(np.eye(n))

    @classmethod
    def from_tf(cls, num, den) -> "StateSpace":
        """Scalar ``num(z^{-1}) / den(z^{-1})`` in controllable canonical form.

        Both arguments list coefficients of ``1, z^{-1}, z^{-2}, ...``.
        """
        b = np.atleast_1d(np.asarray(num, dtype=float))
        a = np.atleast_1d(np.asarray(den, dtype=float))
        if a.size == 0 or a[0] == 0:
            raise InvalidInputError("denominator must have a nonzero constant term")
        b = b / a[0]
        a = a / a[0]
        n = max(b.size, a.size) - 1
        b = np.pad(b, (0, n + 1 - b.size))
        a = np.pad(a, (0, n + 1 - a.size))
        if n == 0:
            return cls.constant([[b[0]]])
        A = np.zeros((n, n))
        A[0, :] = -a[1:]
        A[1:, :-1] = np.eye(n - 1)
        B = np.zeros((n, 1))
        B[0, 0] = 1.0
        C = (b[1:] - a[1:] * b[0]).reshape(1, n)
        return cls(A, B, C, [[b[0]]])

    @property
    def nstates(self) -> int:
        return self.A.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    def is_stable(self, margin: float = CIRCLE_TOL) -> bool:
        """True when every eigenvalue of ``A`` has modulus below ``1 - margin``."""
        if self.nstates == 0:
            return True
        return bool(np.max(np.abs(np.linalg.eigvals(self.A))) < 1.0 - margin)

    def __call__(self, z):
        return evaluate(self, z)

    def __matmul__(self, other: "StateSpace") -> "StateSpace":
        return series(self, other)

    def __add__(self, other: "StateSpace") -> "StateSpace":
        return add(self, other)

    def scaled(self, left=1.0, right=None) -> "StateSpace":
        """Return ``left @ G @ right`` for constant matrices (or scalars)."""
        L = np.atleast_2d(np.asarray(left, dtype=float))
        if L.shape == (1, 1) and self.shape[0] != 1:
            L = L[0, 0] * np.eye(self.shape[0])
        R = np.eye(self.shape[1]) if right is None else np.atleast_2d(np.asarray(right, dtype=float))
        if R.shape == (1, 1) and self.shape[1] != 1:
            R = R[0, 0] * np.eye(self.shape[1])
        return StateSpace(self.A, self.B @ R, L @ self.C, L @ self.D @ R)

    def to_dict(self) -> dict:
        return {
            "a": self.A.tolist(),
            "b": self.B.tolist(),
            "c": self.C.tolist(),
            "d": self.D.tolist(),
        }

    def __repr__(self):
        return f"StateSpace(nstates={self.nstates}, shape={self.shape})"


def evaluate(G: StateSpace, z: complex) -> np.ndarray:
    """Evaluate ``C (zI - A)^{-1} B + D`` at a single complex point.

    Raises
    ------
    SingularResolventError
        If ``z`` is within ``1e-12`` of an eigenvalue of ``A``.
    """
    z = complex(z)
    if G.nstates == 0:
        return G.D.astype(complex)
    eig = np.linalg.eigvals(G.A)
    if np.min(np.abs(eig - z)) <= 1e-12:
        raise SingularResolventError(f"z = {z} is an eigenvalue of A")
    X = np.linalg.solve(z * np.eye(G.nstates) - G.A, G.B.astype(complex))
    return G.C @ X + G.D


def _check_no_circle_poles(G: StateSpace, tol: float = CIRCLE_TOL):
    if G.nstates == 0:
        return
    eig = np.linalg.eigvals(G.A)
    bad = eig[np.abs(np.abs(eig) - 1.0) <= tol]
    if bad.size:
        raise PoleOnCircleError(f"poles on the unit circle: {bad}")


def _freqresp(G: StateSpace, z: np.ndarray) -> np.ndarray:
    """Batched evaluation at points ``z`` (shape (N,)) -> (N, p, m)."""
    N = z.shape[0]
    p, m = G.shape
    out = np.empty((N, p, m), dtype=complex)
    if G.nstates == 0:
        out[:] = G.D
        return out
    n = G.nstates
    lam, V = np.linalg.eig(G.A)
    if np.linalg.cond(V) < 1e4:
        # well-conditioned modal form: G(z) = (C V) diag(1/(z - lam)) (V^{-1} B) + D
        CV = G.C @ V
        VB = np.linalg.solve(V, G.B)
        for start in range(0, N, _CHUNK):
            zz = z[start:start + _CHUNK]
            R = 1.0 / (zz[:, None] - lam[None, :])
            out[start:start + zz.shape[0]] = np.einsum("pk,nk,km->npm", CV, R, VB) + G.D
        return out
    eye = np.eye(n)
    B = np.broadcast_to(G.B.astype(complex), (min(N, _CHUNK), n, m))
    for start in range(0, N, _CHUNK):
        zz = z[start:start + _CHUNK]
        M = zz[:, None, None] * eye - G.A
        X = np.linalg.solve(M, B[: zz.shape[0]])
        out[start:start + zz.shape[0]] = G.C @ X + G.D
    return out


def sample(G: StateSpace, grid: "FrequencyGrid") -> np.ndarray:
    """Values ``G(e^{j theta_k})`` on every grid point, shape ``(N, p, m)``.

    Raises
    ------
    PoleOnCircleError
        If an eigenvalue of ``A`` lies within ``1e-9`` of the unit circle.
    """
    _check_no_circle_poles(G)
    return _freqresp(G, grid.z)


def series(G1: StateSpace, G2: StateSpace) -> StateSpace:
    """Realization of the product ``G1(z) G2(z)``."""
    if G1.shape[1] != G2.shape[0]:
        raise DimensionError(f"cannot multiply {G1.shape} by {G2.shape}")
    n1, n2 = G1.nstates, G2.nstates
    A = np.block([
        [G1.A, G1.B @ G2.C],
        [np.zeros((n2, n1)), G2.A],
    ]) if n1 + n2 else np.zeros((0, 0))
    B = np.vstack([G1.B @ G2.D, G2.B])
    C = np.hstack([G1.C, G1.D @ G2.C])
    return StateSpace(A, B, C, G1.D @ G2.D)


def add(G1: StateSpace, G2: StateSpace) -> StateSpace:
    """Realization of the sum ``G1(z) + G2(z)``."""
    if G1.shape != G2.shape:
        raise DimensionError(f"cannot add {G1.shape} and {G2.shape}")
    n1, n2 = G1.nstates, G2.nstates
    A = np.block([
        [G1.A, np.zeros((n1, n2))],
        [np.zeros((n2, n1)), G2.A],
    ]) if n1 + n2 else np.zeros((0, 0))
    return StateSpace(A, np.vstack([G1.B, G2.B]), np.hstack([G1.C, G2.C]), G1.D + G2.D)


def _inv_feedthrough(D: np.ndarray) -> np.ndarray:
    if D.shape[0] != D.shape[1]:
        raise SingularFeedthroughError(f"D is not square: {D.shape}")
    if np.linalg.cond(D) >= 1e12:
        raise SingularFeedthroughError("D is singular or badly conditioned")
    return np.linalg.inv(D)


def inverse(G: StateSpace) -> StateSpace:
    """Realization ``(A - B D^{-1} C, B D^{-1}, -D^{-1} C, D^{-1})`` of ``G^{-1}``."""
    Di = _inv_feedthrough(G.D)
    return StateSpace(G.A - G.B @ Di @ G.C, G.B @ Di, -Di @ G.C, Di)


def poles(G: StateSpace) -> np.ndarray:
    """Eigenvalues of ``A`` (with multiplicity)."""
    if G.nstates == 0:
        return np.zeros(0, dtype=complex)
    return np.linalg.eigvals(G.A).astype(complex)


def zeros(G: StateSpace) -> np.ndarray:
    """Eigenvalues of ``A - B D^{-1} C``; requires an invertible ``D``."""
    Di = _inv_feedthrough(G.D)
    if G.nstates == 0:
        return np.zeros(0, dtype=complex)
    return np.linalg.eigvals(G.A - G.B @ Di @ G.C).astype(complex)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid ``theta_k = -pi + 2 pi k / N`` on ``[-pi, pi)``.

    Means over the grid are trapezoid quadratures of ``dtheta / 2pi``
    integrals on the periodic interval; sups over the grid are lower bounds
    with an ``O(1/N)`` (smooth peaks: ``O(1/N^2)``) bias.
    """

    N: int = DEFAULT_GRID

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError(f"grid size must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def theta(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.N) / self.N

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    def mean(self, values: np.ndarray) -> float:
        """Quadrature of ``int f dtheta/2pi`` from samples along axis 0."""
        return np.mean(values, axis=0)


@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    """Hermitian positive semi-definite matrices on a frequency grid."""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)
    # tangent vectors are Hermitian but indefinite
    psd: bool = field(default=True, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None, None]
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise DimensionError(f"values must have shape (N, n, n), got {vals.shape}")
        if vals.shape[0] != self.grid.N:
            raise DimensionError(f"{vals.shape[0]} values for a grid of {self.grid.N}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("spectrum has non-finite values")
        scale = np.max(np.abs(vals), axis=(1, 2))
        asym = np.max(np.abs(vals - np.conj(np.swapaxes(vals, 1, 2))), axis=(1, 2))
        if np.any(asym > 1e-12 * np.maximum(scale, np.finfo(float).tiny)):
            raise InvalidInputError("spectrum values are not Hermitian")
        vals = 0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2)))
        if self.psd:
            eig = np.linalg.eigvalsh(vals)
            if np.any(eig[:, 0] < -1e-10 * np.maximum(eig[:, -1], 0.0)) or np.any(eig[:, -1] < 0):
                raise NotPositiveDefiniteError("spectrum is not positive semi-definite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_factor(cls, W: StateSpace, grid: FrequencyGrid) -> "SampledSpectrum":
        Wv = sample(W, grid)
        return cls(grid, Wv @ np.conj(np.swapaxes(Wv, 1, 2)))

    @classmethod
    def from_function(cls, f, grid: FrequencyGrid) -> "SampledSpectrum":
        """Sample a scalar or matrix function of ``theta``."""
        return cls(grid, np.asarray([f(t) for t in grid.theta]))

    def scaled(self, c: float) -> "SampledSpectrum":
        return SampledSpectrum(self.grid, c * self.values, self.psd and c >= 0)

    def __sub__(self, other: "SampledSpectrum") -> "SampledSpectrum":
        if other.grid != self.grid:
            raise GridMismatchError("spectra live on different grids")
        return SampledSpectrum(self.grid, self.values - other.values, psd=False)

    def inverse(self) -> "SampledSpectrum":
        return SampledSpectrum(self.grid, np.linalg.inv(self.values))

    def congruence(self, T: StateSpace) -> "SampledSpectrum":
        """Frequency-wise ``T Phi T^H`` (filtering by ``T``)."""
        Tv = sample(T, self.grid)
        return SampledSpectrum(self.grid, Tv @ self.values @ np.conj(np.swapaxes(Tv, 1, 2)))

    def trace_integral(self) -> float:
        return float(np.real(np.mean(np.trace(self.values, axis1=1, axis2=2))))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.values)))


@dataclass(frozen=True, eq=False)
class LaurentPolynomial:
    """Real Laurent polynomial ``sum_{k=-d}^{d} c_k z^k``.

    ``coeffs`` stores ``c_{-d}, ..., c_0, ..., c_d`` (odd length).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size % 2 == 0:
            raise DimensionError("Laurent coefficients need odd length 2d+1")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("Laurent coefficients must be finite")
        # drop outer zero pairs so that degree reflects the true support
        while c.size > 1 and c[0] == 0 and c[-1] == 0:
            c = c[1:-1]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_z_inverse(cls, b) -> "LaurentPolynomial":
        """Embed ``b_0 + b_1 z^{-1} + ... + b_q z^{-q}``."""
        b = np.atleast_1d(np.asarray(b, dtype=float))
        q = b.size - 1
        return cls(np.concatenate([b[::-1], np.zeros(q)]))

    @classmethod
    def autocorrelation(cls, b) -> "LaurentPolynomial":
        """``b(z) b*(z)`` for a real polynomial ``b`` in ``z^{-1}``."""
        b = np.atleast_1d(np.asarray(b, dtype=float))
        r = np.correlate(b, b, mode="full")
        return cls(r)

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def symmetric(self) -> bool:
        c = self.coeffs
        return bool(np.allclose(c, c[::-1], rtol=1e-12, atol=1e-14 * np.max(np.abs(c), initial=0.0)))

    def __add__(self, other):
        return laurent_add(self, other)

    def __mul__(self, other):
        if isinstance(other, LaurentPolynomial):
            return laurent_multiply(self, other)
        return LaurentPolynomial(float(other) * self.coeffs)

    __rmul__ = __mul__

    def __call__(self, theta):
        return laurent_eval(self, theta)

    def __repr__(self):
        return f"LaurentPolynomial(degree={self.degree}, coeffs={self.coeffs.tolist()})"


def laurent_multiply(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    return LaurentPolynomial(np.convolve(p.coeffs, q.coeffs))


def laurent_add(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    d = max(p.degree, q.degree)
    out = np.zeros(2 * d + 1)
    out[d - p.degree: d + p.degree + 1] += p.coeffs
    out[d - q.degree: d + q.degree + 1] += q.coeffs
    return LaurentPolynomial(out)


def laurent_eval(p: LaurentPolynomial, theta):
    """Evaluate at ``z = e^{j theta}``; real output for symmetric ``p``."""
    theta = np.asarray(theta, dtype=float)
    d = p.degree
    # Horner in z on z^d p(z), then divide by z^d
    z = np.exp(1j * theta)
    acc = np.zeros_like(z)
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    val = acc * np.exp(-1j * d * theta)
    if p.symmetric:
        return val.real
    return val


def laurent_roots(p: LaurentPolynomial) -> np.ndarray:
    """Roots of ``z^d p(z)`` viewed as an ordinary polynomial.

    Zero coefficients at either end are monomial factors and are stripped,
    so no spurious roots at the origin are reported.
    """
    c = p.coeffs
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise InvalidInputError("the zero polynomial has no well-defined roots")
    c = c[nz[0]: nz[-1] + 1]
    if c.size == 1:
        return np.zeros(0, dtype=complex)
    # ascending powers of z -> numpy wants descending
    return np.roots(c[::-1]).astype(complex)


@dataclass(frozen=True, eq=False)
class ScalarRationalSpectrum:
    """Ratio ``num / den`` of symmetric Laurent polynomials, positive on the circle."""

    num: LaurentPolynomial
    den: LaurentPolynomial
    check_grid: int = field(default=1024, repr=False)

    def __post_init__(self):
        num, den = self.num, self.den
        if not isinstance(num, LaurentPolynomial):
            num = LaurentPolynomial(num)
        if not isinstance(den, LaurentPolynomial):
            den = LaurentPolynomial(den)
        if not (num.symmetric and den.symmetric):
            raise InvalidInputError("numerator and denominator must be symmetric")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if self.check_grid:
            theta = FrequencyGrid(self.check_grid).theta
            if np.min(num(theta)) <= 0 or np.min(den(theta)) <= 0:
                raise NotPositiveDefiniteError("spectrum is not positive on the unit circle")

    def __call__(self, theta):
        return self.num(theta) / self.den(theta)

    def sample(self, grid: FrequencyGrid) -> SampledSpectrum:
        return SampledSpectrum(grid, self(grid.theta))

    def scaled(self, c: float) -> "ScalarRationalSpectrum":
        return ScalarRationalSpectrum(c * self.num, self.den)

    def to_dict(self) -> dict:
        return {"num": self.num.coeffs.tolist(), "den": self.den.coeffs.tolist()}
