"""Minimum-phase spectral factorization.

Two routes are provided:

* matrix spectra ``Phi = W0 W0*`` given by any stable factor ``W0``: the
  innovations (Kalman predictor) Riccati recursion started from the
  stationary state covariance;
* scalar spectra ``num/den`` of symmetric Laurent polynomials: root
  flipping, keeping the root of each reciprocal pair inside the disk.

The factor is unique up to a constant orthogonal right multiplier.  It is
canonicalized with a symmetric positive square root of the innovation
covariance (matrix case) and a positive gain with ``w(1) > 0`` (scalar case).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryRootError,
    ConvergenceError,
    DimensionError,
    NotPositiveDefiniteError,
    SingularFeedthroughError,
    UnstableSystemError,
    UnsupportedRankError,
)
from .norms import solve_stein
from .rational import (
    CIRCLE_TOL,
    FrequencyGrid,
    LaurentPolynomial,
    SampledSpectrum,
    ScalarRationalSpectrum,
    StateSpace,
    laurent_roots,
    poles,
    sample,
    zeros,
)

__all__ = [
    "ScalarFactor",
    "FactoredSpectrum",
    "MinimumPhaseReport",
    "factor_laurent",
    "minimum_phase_factor_scalar",
    "minimum_phase_factor_matrix",
    "minimum_phase_factor",
    "is_minimum_phase",
    "verify_factorization",
    "riccati_iterates",
]

RICCATI_TOL = 1e-12
RICCATI_MAX_ITER = 100_000
_NEGLIGIBLE = 1e-13


@dataclass(frozen=True, eq=False)
class ScalarFactor:
    """Scalar filter ``num(z^{-1}) / den(z^{-1})`` with monic ``den``."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.atleast_1d(np.array(self.num, dtype=float))
        den = np.atleast_1d(np.array(self.den, dtype=float))
        num = num / den[0]
        den = den / den[0]
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def to_statespace(self) -> StateSpace:
        return StateSpace.from_tf(self.num, self.den)

    def response(self, theta) -> np.ndarray:
        """Complex frequency response at ``z = e^{j theta}``."""
        zinv = np.exp(-1j * np.asarray(theta, dtype=float))
        return np.polyval(self.num[::-1], zinv) / np.polyval(self.den[::-1], zinv)

    def spectrum(self) -> ScalarRationalSpectrum:
        return ScalarRationalSpectrum(
            LaurentPolynomial.autocorrelation(self.num),
            LaurentPolynomial.autocorrelation(self.den),
        )

    def poles(self) -> np.ndarray:
        return _z_inverse_roots(self.den)

    def zeros(self) -> np.ndarray:
        return _z_inverse_roots(self.num)


def _z_inverse_roots(c) -> np.ndarray:
    """Roots in ``z`` of ``c_0 + c_1 z^{-1} + ... + c_q z^{-q}`` (nonzero roots only)."""
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    # z^q c(z^{-1}) = c_0 z^q + ... + c_q: already descending in z
    return np.roots(c).astype(complex)


@dataclass(frozen=True, eq=False)
class FactoredSpectrum:
    """Spectrum ``Phi = W W*`` with its minimum-phase factor ``W``.

    ``scalar`` keeps the polynomial form of scalar factors; ``W`` is always
    available as a biproper realization.
    """

    W: StateSpace
    scalar: ScalarFactor | None = field(default=None)

    @classmethod
    def from_scalar(cls, factor: ScalarFactor) -> "FactoredSpectrum":
        return cls(factor.to_statespace(), factor)

    @property
    def rank(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def factor_values(self, grid: FrequencyGrid) -> np.ndarray:
        if self.scalar is not None:
            return self.scalar.response(grid.theta)[:, None, None]
        return sample(self.W, grid)

    def sample(self, grid: FrequencyGrid) -> SampledSpectrum:
        Wv = self.factor_values(grid)
        return SampledSpectrum(grid, Wv @ np.conj(np.swapaxes(Wv, 1, 2)))

    def spectrum(self) -> ScalarRationalSpectrum:
        if self.scalar is None:
            raise DimensionError("Laurent form only exists for scalar factors")
        return self.scalar.spectrum()

    def scaled(self, c: float) -> "FactoredSpectrum":
        """Factor of ``c * Phi`` for ``c > 0``."""
        s = np.sqrt(c)
        if self.scalar is not None:
            return FactoredSpectrum.from_scalar(ScalarFactor(s * self.scalar.num, self.scalar.den))
        return FactoredSpectrum(self.W.scaled(s))


def _polish_roots(coeffs_desc: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    """A few guarded Newton steps on each root of a polynomial."""
    dcoeffs = np.polyder(coeffs_desc)
    out = roots.copy()
    for i, r in enumerate(out):
        f = np.polyval(coeffs_desc, r)
        for _ in range(steps):
            df = np.polyval(dcoeffs, r)
            if df == 0:
                break
            r_new = r - f / df
            f_new = np.polyval(coeffs_desc, r_new)
            if not abs(f_new) < abs(f):
                break
            r, f = r_new, f_new
        out[i] = r
    return out


def factor_laurent(p: LaurentPolynomial, tol: float = CIRCLE_TOL, what: str = "zero") -> np.ndarray:
    """Factor a positive symmetric Laurent polynomial as ``b(z) b*(z)``.

    Parameters
    ----------
    p : LaurentPolynomial
        Symmetric, positive on the unit circle.
    tol : float
        Roots with ``| |r| - 1 | <= tol`` are treated as lying on the circle.
    what : str
        Used in error messages ("zero" or "pole").

    Returns
    -------
    numpy.ndarray
        Coefficients of ``b`` in powers of ``z^{-1}``; all roots of ``b`` lie
        strictly inside the unit disk and ``b_0 > 0``.

    Raises
    ------
    BoundaryRootError
        If a root is within ``tol`` of the unit circle.
    """
    c = p.coeffs
    # an outer pair far below the bulk encodes a root pair near 0 and infinity;
    # it would wreck the companion eigenvalues, and dropping it is a
    # relative perturbation below _NEGLIGIBLE
    scale = np.max(np.abs(c))
    while c.size > 1 and max(abs(c[0]), abs(c[-1])) <= _NEGLIGIBLE * scale:
        c = c[1:-1]
    if c.size != p.coeffs.size:
        p = LaurentPolynomial(c)
    d = p.degree
    if d == 0:
        if c[0] <= 0:
            raise NotPositiveDefiniteError("constant Laurent polynomial is not positive")
        return np.array([np.sqrt(c[0])])
    roots = laurent_roots(p)
    desc = c[::-1]
    order = np.argsort(np.abs(roots))
    inner = _polish_roots(desc, roots[order[:d]])
    outer = roots[order[d:]]
    on_circle = np.concatenate([inner, outer])
    on_circle = on_circle[np.abs(np.abs(on_circle) - 1.0) <= tol]
    if on_circle.size or np.any(np.abs(inner) >= 1.0):
        bad = on_circle if on_circle.size else inner[np.abs(inner) >= 1.0]
        raise BoundaryRootError(f"spectral {what} on the unit circle: {bad}", bad)
    monic = np.real(np.poly(inner))
    # least-squares gain over all coefficients of b b*
    r = np.correlate(monic, monic, mode="full")
    g2 = float(np.dot(r, c) / np.dot(r, r))
    if g2 <= 0:
        raise NotPositiveDefiniteError("Laurent polynomial is not positive on the circle")
    return _refine_factor(np.sqrt(g2) * monic, c[d:])


def _refine_factor(b: np.ndarray, target: np.ndarray, steps: int = 6) -> np.ndarray:
    """Newton steps on the coefficients of ``b`` for ``sum_j b_j b_{j+k} = target_k``.

    Root finding resolves a root of multiplicity ``m`` only to about
    ``eps^{1/m}``; the coefficient map is well conditioned at any
    minimum-phase ``b``, so a couple of steps recover full accuracy.
    """
    d = b.size - 1
    start = b

    def residual(x):
        return np.correlate(x, x, mode="full")[d:] - target

    res = residual(b)
    err = np.linalg.norm(res)
    idx = np.arange(d + 1)
    for _ in range(steps):
        if err <= 1e-15 * np.linalg.norm(target):
            break
        # J[k, i] = d r_k / d b_i = b_{i-k} + b_{i+k}
        J = np.zeros((d + 1, d + 1))
        for k in range(d + 1):
            lo = idx - k
            J[k, idx[lo >= 0]] += b[lo[lo >= 0]]
            hi = idx + k
            J[k, idx[hi <= d]] += b[hi[hi <= d]]
        try:
            step = np.linalg.solve(J, res)
        except np.linalg.LinAlgError:
            break
        cand = b - step
        cand_res = residual(cand)
        cand_err = np.linalg.norm(cand_res)
        if not cand_err < err:
            break
        b, res, err = cand, cand_res, cand_err
    if d and np.max(np.abs(np.roots(b))) >= 1.0:
        return start
    return b


def minimum_phase_factor_scalar(phi: ScalarRationalSpectrum, tol: float = CIRCLE_TOL) -> FactoredSpectrum:
    """Minimum-phase factor ``w = b/a`` of a scalar rational spectrum by root flipping.

    ``|w(e^{j theta})|^2 = phi(theta)``; poles strictly and zeros strictly
    inside the unit disk; ``w(1) > 0``.
    """
    b = factor_laurent(phi.num, tol, "zero")
    a = factor_laurent(phi.den, tol, "pole")
    return FactoredSpectrum.from_scalar(ScalarFactor(b, a))


def riccati_iterates(W0: StateSpace, max_iter: int = RICCATI_MAX_ITER):
    """Yield the Riccati iterates ``P_0, P_1, ...`` for the factor ``W0``.

    The recursion is the error-covariance update of the Kalman predictor for
    ``x+ = A x + B e, y = C x + D e`` with unit-variance white ``e``.  It
    starts from the stationary state covariance ``P_0 = A P_0 A^T + B B^T``
    (no measurements yet) and decreases monotonically to the stabilizing
    solution.  Starting from ``P_0 = 0`` instead would stall at the
    non-minimum-phase solution whenever ``W0`` is square with zeros outside
    the disk.
    """
    A, B, C, D = W0.A, W0.B, W0.C, W0.D
    BB, BD, DD = B @ B.T, B @ D.T, D @ D.T
    P = solve_stein(A, BB)
    yield P
    for _ in range(max_iter):
        S = A @ P @ C.T + BD
        Lam = C @ P @ C.T + DD
        if np.linalg.cond(Lam) < 1e12:
            gain = np.linalg.solve(Lam, S.T).T
        else:
            # D D^T can be singular (strictly proper W0) before P fills in
            gain = S @ np.linalg.pinv(Lam, rcond=1e-12, hermitian=True)
        P = A @ P @ A.T + BB - gain @ S.T
        P = 0.5 * (P + P.T)
        yield P


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def minimum_phase_factor_matrix(
    W0: StateSpace, tol: float = RICCATI_TOL, max_iter: int = RICCATI_MAX_ITER
) -> FactoredSpectrum:
    """Minimum-phase factor of ``Phi = W0 W0*`` via the innovations Riccati recursion.

    Parameters
    ----------
    W0 : StateSpace
        Stable ``p x m`` factor (``m >= p``; need not be square, biproper or
        minimum-phase).
    tol : float
        Stop when ``||P_{k+1} - P_k||_F <= tol (1 + ||P_{k+1}||_F)``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    FactoredSpectrum
        ``W = (A, K L, C, L)`` with ``L`` the symmetric square root of the
        innovation covariance ``CPC^T + DD^T`` and ``K`` the predictor gain.

    Raises
    ------
    UnstableSystemError, ConvergenceError, UnsupportedRankError
    """
    if not W0.is_stable():
        raise UnstableSystemError("factor must have all poles strictly inside the unit disk")
    A, B, C, D = W0.A, W0.B, W0.C, W0.D
    if W0.nstates == 0:
        Lam = D @ D.T
    else:
        prev = None
        converged = False
        for k, P in enumerate(riccati_iterates(W0, max_iter)):
            if prev is not None:
                step = np.linalg.norm(P - prev)
                if step <= tol * (1.0 + np.linalg.norm(P)):
                    converged = True
                    break
            prev = P
        if not converged:
            raise ConvergenceError(f"Riccati iteration did not converge in {max_iter} steps")
        Lam = C @ P @ C.T + D @ D.T
    Lam = 0.5 * (Lam + Lam.T)
    ev = np.linalg.eigvalsh(Lam)
    if ev[-1] <= 0 or ev[0] <= 1e-12 * ev[-1]:
        raise UnsupportedRankError("spectrum does not have full normal rank")
    L = _psd_sqrt(Lam)
    if W0.nstates == 0:
        return FactoredSpectrum(StateSpace.constant(L))
    K = np.linalg.solve(Lam, (A @ P @ C.T + B @ D.T).T).T
    return FactoredSpectrum(StateSpace(A, K @ L, C, L))


def minimum_phase_factor(x, tol: float | None = None) -> FactoredSpectrum:
    """Dispatch on the spectrum representation.

    ``StateSpace`` inputs are read as a (not necessarily canonical) factor
    ``W0`` of ``Phi = W0 W0*``.
    """
    if isinstance(x, FactoredSpectrum):
        return x
    if isinstance(x, ScalarRationalSpectrum):
        return minimum_phase_factor_scalar(x, CIRCLE_TOL if tol is None else tol)
    if isinstance(x, StateSpace):
        return minimum_phase_factor_matrix(x, RICCATI_TOL if tol is None else tol)
    raise TypeError(f"cannot factorize {type(x).__name__}")


@dataclass(frozen=True)
class MinimumPhaseReport:
    """Outcome of :func:`is_minimum_phase`; truthy when minimum-phase."""

    ok: bool
    poles: np.ndarray
    zeros: np.ndarray
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_minimum_phase(W, margin: float = CIRCLE_TOL) -> MinimumPhaseReport:
    """Poles strictly inside ``|p| < 1 - margin``, zeros in ``|z| <= 1 + margin``.

    A singular feedthrough (zeros at infinity) is reported as not
    minimum-phase.
    """
    if isinstance(W, FactoredSpectrum):
        W = W.scalar if W.scalar is not None else W.W
    if isinstance(W, ScalarFactor):
        p, z = W.poles(), W.zeros()
        if W.num[0] == 0:
            return MinimumPhaseReport(False, p, z, "zero at infinity (strictly proper)")
    else:
        p = poles(W)
        try:
            z = zeros(W)
        except SingularFeedthroughError:
            return MinimumPhaseReport(False, p, np.zeros(0, complex), "singular feedthrough")
    if p.size and np.max(np.abs(p)) >= 1.0 - margin:
        return MinimumPhaseReport(False, p, z, "pole outside the open unit disk")
    if z.size and np.max(np.abs(z)) > 1.0 + margin:
        return MinimumPhaseReport(False, p, z, "zero outside the closed unit disk")
    return MinimumPhaseReport(True, p, z)


def verify_factorization(W, reference: SampledSpectrum) -> float:
    """Max over the grid of ``||W W^H - Phi||_F / ||Phi||_F``."""
    if isinstance(W, ScalarFactor):
        W = FactoredSpectrum.from_scalar(W)
    if isinstance(W, FactoredSpectrum):
        Wv = W.factor_values(reference.grid)
    else:
        Wv = sample(W, reference.grid)
    if Wv.shape[1] != reference.n:
        raise DimensionError(f"factor has {Wv.shape[1]} outputs, spectrum is {reference.n}x{reference.n}")
    diff = Wv @ np.conj(np.swapaxes(Wv, 1, 2)) - reference.values
    num = np.linalg.norm(diff, axis=(1, 2))
    den = np.linalg.norm(reference.values, axis=(1, 2))
    return float(np.max(num / den))
