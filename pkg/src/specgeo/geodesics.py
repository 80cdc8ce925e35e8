"""Geodesic paths between spectral densities.

Two minimal Thompson geodesics are exposed and never substituted for each
other:

* :func:`finsler_geodesic` -- the projective straight line
  ``chi(tau) = c2(tau) Phi2 + c1(tau) Phi1``.  It stays rational for every
  real ``tau``, so scalar spectra come back already factored;
* :func:`riemannian_geodesic` -- the frequency-wise matrix geometric path
  ``Phi1^{1/2} (Phi1^{-1/2} Phi2 Phi1^{-1/2})^tau Phi1^{1/2}``, which is
  generally not rational and is returned sampled.

:func:`hilbert_geodesic` is the trace-normalized Riemannian path between
normalized spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryRootError,
    DimensionError,
    InvalidInputError,
    NotNormalizedError,
    NotPositiveDefiniteError,
)
from .factorization import (
    FactoredSpectrum,
    ScalarFactor,
    factor_laurent,
    minimum_phase_factor,
    minimum_phase_factor_matrix,
)
from .metrics import Spectrum, as_sampled, gains
from .norms import h2_norm_sq
from .rational import (
    FrequencyGrid,
    LaurentPolynomial,
    SampledSpectrum,
    ScalarRationalSpectrum,
    StateSpace,
)

__all__ = [
    "GeodesicSpec",
    "finsler_geodesic",
    "riemannian_geodesic",
    "hilbert_geodesic",
    "normalize_spectrum",
    "trace_integral",
]

DEGENERATE_TOL = 1e-10
# below this positivity margin, re-factorizing an extrapolated point may fail
REFACTOR_MARGIN = 1e-10
# gains along geodesics are computed tighter than the norm default so that
# metric speed and the positivity bound hold to ~1e-10
GEODESIC_HINF_TOL = 1e-11


@dataclass(frozen=True)
class GeodesicSpec:
    """Endpoints of a Finsler geodesic and the gains that shape it.

    ``alpha = m(Phi2, Phi1) = 1 / M(Phi1, Phi2)`` and
    ``beta = M(Phi2, Phi1)``.  With the rational route the outer ends of the
    certified H-infinity brackets are used (``alpha`` rounded down, ``beta``
    up), which keeps every point of the path positive.
    """

    phi1: Spectrum
    phi2: Spectrum
    alpha: float
    beta: float
    path: str = "rational"
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        if not (0 < self.alpha and math.isfinite(self.beta)):
            raise InvalidInputError("geodesic endpoints lie in different parts of the cone")
        if self.alpha > self.beta * (1 + DEGENERATE_TOL):
            raise InvalidInputError(f"need alpha <= beta, got {self.alpha} > {self.beta}")

    @classmethod
    def from_spectra(cls, phi1: Spectrum, phi2: Spectrum, path: str = "rational",
                     grid: FrequencyGrid | None = None,
                     tol: float = GEODESIC_HINF_TOL) -> "GeodesicSpec":
        g = gains(phi1, phi2, path, grid, tol)
        if math.isinf(g.M12) or math.isinf(g.M21):
            raise InvalidInputError("spectra are at infinite distance; no finite geodesic")
        alpha = 1.0 / g.interval12[1]
        beta = g.interval21[1]
        # overlapping brackets cannot rule out alpha == beta: take the
        # proportional branch rather than dividing by a bracket-width gap
        if 1.0 / g.interval12[0] >= g.interval21[0] * (1 - DEGENERATE_TOL):
            alpha = beta = math.sqrt(g.M21 / g.M12)
        return cls(phi1, phi2, alpha, beta, g.path, grid)

    @property
    def degenerate(self) -> bool:
        return abs(self.beta - self.alpha) <= DEGENERATE_TOL * self.beta

    def coefficients(self, tau: float) -> tuple[float, float]:
        """``(c1, c2)`` such that ``chi(tau) = c1 Phi1 + c2 Phi2``."""
        a, b = self.alpha, self.beta
        if self.degenerate:
            return a ** tau, 0.0
        c2 = (b ** tau - a ** tau) / (b - a)
        c1 = (b * a ** tau - a * b ** tau) / (b - a)
        return c1, c2


    def positivity_margin(self, tau: float) -> float:
        """Guaranteed lower bound of ``chi(tau)`` relative to the terms that form it.

        ``chi(tau) >= min(alpha^tau, beta^tau) Phi1`` while the combination
        ``c1 Phi1 + c2 Phi2`` is built from terms of size up to
        ``(|c1| + |c2| beta) Phi1``; the ratio bounds the relative size of
        the smallest value, and so how well its factor is conditioned.
        """
        c1, c2 = self.coefficients(tau)
        a, b = self.alpha, self.beta
        return min(a ** tau, b ** tau) / (abs(c1) + abs(c2) * b)


def _scalar_parts(x):
    """``(num, den, den_factor)`` Laurent form of a scalar spectrum, else None."""
    if isinstance(x, ScalarRationalSpectrum):
        return x.num, x.den, factor_laurent(x.den, what="pole")
    if isinstance(x, FactoredSpectrum) and x.scalar is not None:
        f = x.scalar
        return (LaurentPolynomial.autocorrelation(f.num),
                LaurentPolynomial.autocorrelation(f.den), f.den)
    return None


def finsler_geodesic(spec: GeodesicSpec, tau: float, grid: FrequencyGrid | None = None):
    """Point ``chi(tau)`` of the projective-line Thompson geodesic.

    Parameters
    ----------
    spec : GeodesicSpec
    tau : float
        Any real number; ``tau`` outside ``[0, 1]`` extrapolates.
    grid : FrequencyGrid, optional
        Used only when the result has to be sampled.

    Returns
    -------
    FactoredSpectrum or SampledSpectrum
        Scalar rational endpoints give a factored rational spectrum for every
        ``tau``.  Matrix endpoints give a factored spectrum for
        ``0 <= tau <= 1`` (innovations factorization of the stacked factor
        ``[sqrt(c2) W2, sqrt(c1) W1]``) and a sampled one otherwise, since a
        negative coefficient cannot be absorbed into a stacked factor.

    Raises
    ------
    BoundaryRootError
        If the scalar combination cannot be re-factorized.  The message
        carries :meth:`GeodesicSpec.positivity_margin`; failures are expected
        only when it is below ``REFACTOR_MARGIN``.
    """
    tau = float(tau)
    if not math.isfinite(tau):
        raise InvalidInputError("tau must be finite")
    c1, c2 = spec.coefficients(tau)
    x1, x2 = spec.phi1, spec.phi2
    grid = grid or spec.grid

    if spec.degenerate and not isinstance(x1, SampledSpectrum):
        return minimum_phase_factor(x1).scaled(c1)

    p1, p2 = _scalar_parts(x1), _scalar_parts(x2)
    if p1 is not None and p2 is not None:
        n1, d1, a1 = p1
        n2, d2, a2 = p2
        num = c2 * (n2 * d1) + c1 * (n1 * d2)
        try:
            b = factor_laurent(num, what="zero")
        except BoundaryRootError as exc:
            margin = spec.positivity_margin(tau)
            note = ("below the double-precision factorization limit" if margin < REFACTOR_MARGIN
                    else "contradicting the positivity bound")
            raise BoundaryRootError(f"{exc}; positivity margin {margin:.2e} {note}", exc.roots) from exc
        return FactoredSpectrum.from_scalar(ScalarFactor(b, np.convolve(a1, a2)))

    rational = not any(isinstance(x, SampledSpectrum) for x in (x1, x2))
    if rational and 0.0 <= tau <= 1.0:
        W1 = minimum_phase_factor(x1).W
        W2 = minimum_phase_factor(x2).W
        if W1.shape != W2.shape:
            raise DimensionError("endpoint spectra have different sizes")
        n1 = W1.nstates
        A = np.block([
            [W2.A, np.zeros((W2.nstates, n1))],
            [np.zeros((n1, W2.nstates)), W1.A],
        ])
        B = np.block([
            [math.sqrt(c2) * W2.B, np.zeros((W2.nstates, W1.shape[1]))],
            [np.zeros((n1, W2.shape[1])), math.sqrt(max(c1, 0.0)) * W1.B],
        ])
        C = np.hstack([W2.C, W1.C])
        D = np.hstack([math.sqrt(c2) * W2.D, math.sqrt(max(c1, 0.0)) * W1.D])
        return minimum_phase_factor_matrix(StateSpace(A, B, C, D))

    if grid is None:
        grid = next((x.grid for x in (x1, x2) if isinstance(x, SampledSpectrum)), None)
    S1, S2 = as_sampled(x1, grid), as_sampled(x2, grid)
    vals = c2 * S2.values + c1 * S1.values
    return SampledSpectrum(S1.grid, vals)


def _sampled_pair(x1, x2, grid):
    if grid is None:
        grid = next((x.grid for x in (x1, x2) if isinstance(x, SampledSpectrum)), None)
    S1, S2 = as_sampled(x1, grid), as_sampled(x2, grid)
    if S1.grid != S2.grid or S1.n != S2.n:
        raise DimensionError("spectra must share grid and size")
    return S1, S2


def _geometric_path(S1: SampledSpectrum, S2: SampledSpectrum, tau: float) -> np.ndarray:
    P1, P2 = S1.values, S2.values
    if S1.n == 1:
        a, b = P1[:, 0, 0].real, P2[:, 0, 0].real
        if np.any(a <= 0) or np.any(b <= 0):
            raise NotPositiveDefiniteError("spectra must be positive at every frequency")
        return (a ** (1.0 - tau) * b ** tau)[:, None, None]
    try:
        L = np.linalg.cholesky(P1)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("first spectrum is not positive definite") from exc
    X = np.linalg.solve(L, P2)
    M = np.linalg.solve(L, np.conj(np.swapaxes(X, 1, 2)))
    M = 0.5 * (M + np.conj(np.swapaxes(M, 1, 2)))
    w, V = np.linalg.eigh(M)
    if np.any(w <= 0):
        raise NotPositiveDefiniteError("second spectrum is not positive definite")
    Mt = (V * w[:, None, :] ** tau) @ np.conj(np.swapaxes(V, 1, 2))
    out = L @ Mt @ np.conj(np.swapaxes(L, 1, 2))
    return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))


def riemannian_geodesic(x1: Spectrum, x2: Spectrum, tau: float,
                        grid: FrequencyGrid | None = None) -> SampledSpectrum:
    """Frequency-wise geometric path ``W1 (W1^{-1} Phi2 W1^{-*})^tau W1^*``.

    Any frequency-wise square root of ``Phi1`` gives the same path; a
    Cholesky factor is used.  Defined for every real ``tau``.
    """
    S1, S2 = _sampled_pair(x1, x2, grid)
    return SampledSpectrum(S1.grid, _geometric_path(S1, S2, float(tau)))


def trace_integral(x: Spectrum, grid: FrequencyGrid | None = None) -> float:
    """``int tr Phi dtheta/2pi``: exact (Stein equation) for factored spectra."""
    if isinstance(x, SampledSpectrum):
        return x.trace_integral()
    if isinstance(x, StateSpace):
        return h2_norm_sq(x)
    return h2_norm_sq(minimum_phase_factor(x).W)


def normalize_spectrum(x: Spectrum, grid: FrequencyGrid | None = None):
    """Scale a spectrum to unit trace integral, keeping its representation."""
    c = trace_integral(x, grid)
    if c <= 0:
        raise NotPositiveDefiniteError("spectrum has zero power")
    if isinstance(x, StateSpace):
        return x.scaled(1.0 / math.sqrt(c))
    return x.scaled(1.0 / c)


def hilbert_geodesic(x1: Spectrum, x2: Spectrum, tau: float,
                     grid: FrequencyGrid | None = None, tol: float = 1e-8) -> SampledSpectrum:
    """Riemannian path between normalized spectra, renormalized to unit trace integral.

    Raises
    ------
    NotNormalizedError
        If either endpoint's trace integral differs from one by more than ``tol``.
    """
    for name, x in (("first", x1), ("second", x2)):
        c = trace_integral(x, grid)
        if abs(c - 1.0) > tol:
            raise NotNormalizedError(f"{name} spectrum has trace integral {c}, expected 1")
    S1, S2 = _sampled_pair(x1, x2, grid)
    vals = _geometric_path(S1, S2, float(tau))
    c = float(np.real(np.mean(np.trace(vals, axis1=1, axis2=2))))
    return SampledSpectrum(S1.grid, vals / c)
