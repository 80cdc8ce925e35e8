"""Conal gains and distances between spectral densities.

For spectra ``Phi1, Phi2`` the gain ``M(Phi1, Phi2)`` is the smallest
``lambda`` with ``Phi1 <= lambda Phi2`` at every frequency.  Two routes
compute it:

``"rational"``
    factorize both spectra and take ``||W2^{-1} W1||_inf^2``;
``"grid"``
    maximum over a uniform frequency grid of the largest generalized
    eigenvalue of ``(Phi1(theta), Phi2(theta))``.

Thompson distance is ``log max(M12, M21)``, Hilbert distance is
``log(M12 M21)``; both are ``+inf`` across parts of the cone.

Spectra can be given as a :class:`~specgeo.rational.StateSpace` factor
(``Phi = G G*``), a :class:`~specgeo.rational.ScalarRationalSpectrum`, a
:class:`~specgeo.factorization.FactoredSpectrum` or a
:class:`~specgeo.rational.SampledSpectrum` (grid route only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    BoundaryRootError,
    ConvergenceError,
    DimensionError,
    GridMismatchError,
    InvalidInputError,
    NotPositiveDefiniteError,
    SingularFeedthroughError,
)
from .factorization import FactoredSpectrum, ScalarFactor, minimum_phase_factor
from .norms import HINF_TOL, h2_norm_sq, hinf_norm
from .rational import (
    CIRCLE_TOL,
    FrequencyGrid,
    LaurentPolynomial,
    SampledSpectrum,
    ScalarRationalSpectrum,
    StateSpace,
    inverse,
    poles,
    series,
    zeros,
)

__all__ = [
    "DistanceResult",
    "Spectrum",
    "as_sampled",
    "filtered",
    "gain_M",
    "gain_m",
    "gains",
    "thompson_distance",
    "hilbert_distance",
    "thompson_distance_sampled",
    "hilbert_distance_sampled",
    "riemannian_distance",
    "frobenius_divergence",
    "finsler_norm_thompson",
    "hilbert_seminorm",
    "curve_length",
]

Spectrum = Union[StateSpace, ScalarRationalSpectrum, FactoredSpectrum, SampledSpectrum]

PATHS = ("rational", "grid")
# generalized eigenvalues below this fraction of the largest one mean rank loss
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class DistanceResult:
    """A distance together with the two directed gains it was built from.

    ``M12 = M(Phi1, Phi2)`` and ``M21 = M(Phi2, Phi1)``.  ``peak12`` and
    ``peak21`` are the frequencies where the gains are attained.
    """

    value: float
    M12: float
    M21: float
    path: str
    metric: str = "thompson"
    peak12: float | None = None
    peak21: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else float(x)

        return {
            "metric": self.metric,
            "value": num(self.value),
            "M12": num(self.M12),
            "M21": num(self.M21),
            "path": self.path,
            "peak12": num(self.peak12),
            "peak21": num(self.peak21),
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class _Gains:
    M12: float
    M21: float
    path: str
    peak12: float | None
    peak21: float | None
    # certified brackets (rational route); equal to the value on a grid
    interval12: tuple[float, float]
    interval21: tuple[float, float]
    diagnostics: dict


def _n_of(x) -> int:
    if isinstance(x, ScalarRationalSpectrum):
        return 1
    if isinstance(x, FactoredSpectrum):
        return x.n
    if isinstance(x, StateSpace):
        return x.shape[0]
    if isinstance(x, SampledSpectrum):
        return x.n
    raise TypeError(f"unsupported spectrum type {type(x).__name__}")


def as_sampled(x: Spectrum, grid: FrequencyGrid | None = None) -> SampledSpectrum:
    """Sample any spectrum representation on ``grid``."""
    if isinstance(x, SampledSpectrum):
        if grid is not None and x.grid != grid:
            raise GridMismatchError(f"spectrum sampled on N={x.grid.N}, requested N={grid.N}")
        return x
    grid = grid or FrequencyGrid()
    if isinstance(x, ScalarRationalSpectrum):
        return x.sample(grid)
    if isinstance(x, FactoredSpectrum):
        return x.sample(grid)
    if isinstance(x, StateSpace):
        return SampledSpectrum.from_factor(x, grid)
    raise TypeError(f"unsupported spectrum type {type(x).__name__}")


def filtered(x: Spectrum, T) -> Spectrum:
    """``T Phi T*`` in the representation of ``x``.

    ``T`` is a :class:`StateSpace` or, for scalar spectra, a
    :class:`ScalarFactor`.
    """
    if isinstance(x, SampledSpectrum):
        Ts = T.to_statespace() if isinstance(T, ScalarFactor) else T
        return x.congruence(Ts)
    if isinstance(x, ScalarRationalSpectrum):
        if not isinstance(T, ScalarFactor):
            raise TypeError("scalar rational spectra are filtered by a ScalarFactor")
        return ScalarRationalSpectrum(
            x.num * LaurentPolynomial.autocorrelation(T.num),
            x.den * LaurentPolynomial.autocorrelation(T.den),
        )
    Ts = T.to_statespace() if isinstance(T, ScalarFactor) else T
    W = x.W if isinstance(x, FactoredSpectrum) else x
    return series(Ts, W)


def _whitened_eigs(P1: np.ndarray, P2: np.ndarray) -> np.ndarray:
    """Frequency-wise eigenvalues of ``P2^{-1/2} P1 P2^{-1/2}``, ascending, shape (N, n).

    ``P1`` need only be Hermitian; ``P2`` must be positive definite.
    """
    if P1.shape != P2.shape:
        raise DimensionError(f"spectra have shapes {P1.shape} and {P2.shape}")
    if P1.shape[1] == 1:
        d = P2[:, 0, 0].real
        if np.any(d <= 0):
            raise NotPositiveDefiniteError("reference spectrum is not positive definite")
        return (P1[:, 0, 0].real / d)[:, None]
    try:
        L = np.linalg.cholesky(P2)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("reference spectrum is not positive definite") from exc
    X = np.linalg.solve(L, P1)
    Y = np.linalg.solve(L, np.conj(np.swapaxes(X, 1, 2)))
    Y = 0.5 * (Y + np.conj(np.swapaxes(Y, 1, 2)))
    return np.linalg.eigvalsh(Y)


def _check_full_rank(S: SampledSpectrum, name: str):
    ev = np.linalg.eigvalsh(S.values)
    # relative to the largest eigenvalue over the whole grid, so scalar
    # spectra vanishing at a grid point are caught too
    if np.min(ev[:, 0]) <= _RANK_TOL * np.max(ev[:, -1]):
        raise NotPositiveDefiniteError(f"{name} is rank deficient on the grid")


def _grid_gains(x1, x2, grid: FrequencyGrid | None, diagnostics=None) -> _Gains:
    if isinstance(x1, SampledSpectrum) and grid is None:
        grid = x1.grid
    elif isinstance(x2, SampledSpectrum) and grid is None:
        grid = x2.grid
    S1, S2 = as_sampled(x1, grid), as_sampled(x2, grid)
    if S1.grid != S2.grid:
        raise GridMismatchError("spectra are sampled on different grids")
    _check_full_rank(S1, "first spectrum")
    _check_full_rank(S2, "second spectrum")
    lam = _whitened_eigs(S1.values, S2.values)
    theta = S1.grid.theta
    k_hi = int(np.argmax(lam[:, -1]))
    k_lo = int(np.argmin(lam[:, 0]))
    M12 = float(lam[k_hi, -1])
    M21 = float(1.0 / lam[k_lo, 0])
    return _Gains(
        M12, M21, "grid", float(theta[k_hi]), float(theta[k_lo]),
        (M12, M12), (M21, M21), dict(diagnostics or {}, grid=S1.grid.N),
    )


def _ratio_systems(F1: FactoredSpectrum, F2: FactoredSpectrum):
    """Realizations of ``W2^{-1} W1`` and ``W1^{-1} W2``."""
    if F1.scalar is not None and F2.scalar is not None:
        b1, a1 = F1.scalar.num, F1.scalar.den
        b2, a2 = F2.scalar.num, F2.scalar.den
        num, den = np.convolve(b1, a2), np.convolve(a1, b2)
        return StateSpace.from_tf(num, den), StateSpace.from_tf(den, num)
    return series(inverse(F2.W), F1.W), series(inverse(F1.W), F2.W)


def _on_circle(p: np.ndarray) -> list:
    return [complex(r) for r in p if abs(abs(r) - 1.0) <= CIRCLE_TOL]


def _boundary_zeros(x) -> list:
    """Zeros on the unit circle of a square biproper factor given as input."""
    W = x.W if isinstance(x, FactoredSpectrum) else x
    if not isinstance(W, StateSpace) or W.shape[0] != W.shape[1] or W.nstates == 0:
        return []
    if np.linalg.cond(W.D) >= 1e12:
        return []
    return _on_circle(zeros(W))


def _raw_factor(x) -> StateSpace:
    return x.W if isinstance(x, FactoredSpectrum) else x


def _one_sided_gains(x1, x2, z1: list, z2: list, tol: float) -> _Gains:
    """Gains when exactly one spectrum vanishes on the circle.

    The gain towards the vanishing spectrum is infinite.  The other one only
    inverts the factor of the regular spectrum, so the vanishing spectrum's
    own stable factor can be used as given.
    """
    if z2:
        W1 = minimum_phase_factor(x1).W
        r = hinf_norm(series(inverse(W1), _raw_factor(x2)), tol)
        iv = (r.certified_interval[0] ** 2, r.certified_interval[1] ** 2)
        return _Gains(math.inf, r.value ** 2, "rational", None, r.peak_frequency,
                      (math.inf, math.inf), iv, {"boundary_zeros_phi2": [str(z) for z in z2]})
    W2 = minimum_phase_factor(x2).W
    r = hinf_norm(series(inverse(W2), _raw_factor(x1)), tol)
    iv = (r.certified_interval[0] ** 2, r.certified_interval[1] ** 2)
    return _Gains(r.value ** 2, math.inf, "rational", r.peak_frequency, None,
                  iv, (math.inf, math.inf), {"boundary_zeros_phi1": [str(z) for z in z1]})


def _rational_gains(x1, x2, tol: float, grid: FrequencyGrid | None) -> _Gains:
    if isinstance(x1, SampledSpectrum) or isinstance(x2, SampledSpectrum):
        return _grid_gains(x1, x2, grid, {"fallback": "sampled input has no rational factor"})
    if _n_of(x1) != _n_of(x2):
        raise DimensionError("spectra have different dimensions")
    z1, z2 = _boundary_zeros(x1), _boundary_zeros(x2)
    if z1 and z2:
        return _grid_gains(x1, x2, grid, {"fallback": "both spectra vanish on the unit circle"})
    if z1 or z2:
        return _one_sided_gains(x1, x2, z1, z2, tol)
    try:
        F1 = minimum_phase_factor(x1)
        F2 = minimum_phase_factor(x2)
        R12, R21 = _ratio_systems(F1, F2)
    except (BoundaryRootError, ConvergenceError, SingularFeedthroughError) as exc:
        return _grid_gains(x1, x2, grid, {"fallback": f"factorization failed: {exc}"})
    diag = {}
    bad12 = _on_circle(poles(R12))
    bad21 = _on_circle(poles(R21))
    if bad12 or bad21:
        diag["boundary_poles"] = [str(r) for r in bad12]
        diag["boundary_zeros"] = [str(r) for r in bad21]
    if bad12:
        M12, peak12, int12 = math.inf, None, (math.inf, math.inf)
    else:
        r = hinf_norm(R12, tol)
        M12, peak12 = r.value ** 2, r.peak_frequency
        int12 = (r.certified_interval[0] ** 2, r.certified_interval[1] ** 2)
    if bad21:
        M21, peak21, int21 = math.inf, None, (math.inf, math.inf)
    else:
        r = hinf_norm(R21, tol)
        M21, peak21 = r.value ** 2, r.peak_frequency
        int21 = (r.certified_interval[0] ** 2, r.certified_interval[1] ** 2)
    return _Gains(M12, M21, "rational", peak12, peak21, int12, int21, diag)


def _fingerprint(x) -> bytes:
    """Byte key of an input, used only to fix an evaluation order."""
    if isinstance(x, StateSpace):
        parts = [x.A, x.B, x.C, x.D]
    elif isinstance(x, ScalarRationalSpectrum):
        parts = [x.num.coeffs, x.den.coeffs]
    elif isinstance(x, FactoredSpectrum):
        parts = [x.W.A, x.W.B, x.W.C, x.W.D]
        if x.scalar is not None:
            parts += [x.scalar.num, x.scalar.den]
    elif isinstance(x, SampledSpectrum):
        parts = [x.values]
    else:
        return repr(x).encode()
    tag = type(x).__name__.encode()
    return tag + b"".join(np.ascontiguousarray(a, dtype=complex).tobytes() for a in parts)


_SWAPPED_KEYS = {
    "boundary_zeros_phi1": "boundary_zeros_phi2",
    "boundary_zeros_phi2": "boundary_zeros_phi1",
    "boundary_poles": "boundary_zeros",
    "boundary_zeros": "boundary_poles",
}


def _swapped(g: _Gains) -> _Gains:
    diag = {_SWAPPED_KEYS.get(k, k): v for k, v in g.diagnostics.items()}
    return _Gains(g.M21, g.M12, g.path, g.peak21, g.peak12, g.interval21, g.interval12, diag)


def gains(x1: Spectrum, x2: Spectrum, path: str = "rational",
          grid: FrequencyGrid | None = None, tol: float = HINF_TOL) -> _Gains:
    """Both directed gains ``M(Phi1, Phi2)`` and ``M(Phi2, Phi1)``.

    The pair is always evaluated in one fixed order and swapped back, so
    exchanging the arguments exchanges ``M12`` and ``M21`` bit for bit.
    """
    if path not in PATHS:
        raise InvalidInputError(f"path must be one of {PATHS}, got {path!r}")
    flip = _fingerprint(x2) < _fingerprint(x1)
    if flip:
        x1, x2 = x2, x1
    if path == "grid":
        g = _grid_gains(x1, x2, grid)
    else:
        g = _rational_gains(x1, x2, tol, grid)
    return _swapped(g) if flip else g


def gain_M(x1: Spectrum, x2: Spectrum, path: str = "rational",
           grid: FrequencyGrid | None = None, tol: float = HINF_TOL) -> float:
    """``M(Phi1, Phi2) = inf{lambda : Phi1 <= lambda Phi2}`` (possibly ``inf``)."""
    return gains(x1, x2, path, grid, tol).M12


def gain_m(x1: Spectrum, x2: Spectrum, path: str = "rational",
           grid: FrequencyGrid | None = None, tol: float = HINF_TOL) -> float:
    """``m(Phi1, Phi2) = sup{mu : mu Phi2 <= Phi1} = 1 / M(Phi2, Phi1)``."""
    return 1.0 / gains(x1, x2, path, grid, tol).M21


def _result(g: _Gains, metric: str) -> DistanceResult:
    if math.isinf(g.M12) or math.isinf(g.M21):
        value = math.inf
    elif metric == "thompson":
        value = max(math.log(g.M12), math.log(g.M21))
    else:
        value = math.log(g.M12) + math.log(g.M21)
    # grid round-off can push log(M12 M21) a hair below zero for proportional spectra
    value = max(value, 0.0)
    return DistanceResult(value, g.M12, g.M21, g.path, metric, g.peak12, g.peak21, g.diagnostics)


def thompson_distance(x1: Spectrum, x2: Spectrum, path: str = "rational",
                      grid: FrequencyGrid | None = None, tol: float = HINF_TOL) -> DistanceResult:
    """Thompson (part) metric ``log max{M(Phi1,Phi2), M(Phi2,Phi1)}``."""
    return _result(gains(x1, x2, path, grid, tol), "thompson")


def hilbert_distance(x1: Spectrum, x2: Spectrum, path: str = "rational",
                     grid: FrequencyGrid | None = None, tol: float = HINF_TOL) -> DistanceResult:
    """Hilbert (projective) metric ``log M(Phi1,Phi2) M(Phi2,Phi1)``."""
    return _result(gains(x1, x2, path, grid, tol), "hilbert")


def thompson_distance_sampled(S1: SampledSpectrum, S2: SampledSpectrum) -> DistanceResult:
    """Thompson distance between two sampled (possibly non-rational) spectra."""
    if S1.grid != S2.grid:
        raise GridMismatchError("spectra are sampled on different grids")
    return _result(_grid_gains(S1, S2, S1.grid), "thompson")


def hilbert_distance_sampled(S1: SampledSpectrum, S2: SampledSpectrum) -> DistanceResult:
    if S1.grid != S2.grid:
        raise GridMismatchError("spectra are sampled on different grids")
    return _result(_grid_gains(S1, S2, S1.grid), "hilbert")


def riemannian_distance(x1: Spectrum, x2: Spectrum, grid: FrequencyGrid | None = None) -> float:
    """Filtering-invariant Riemannian distance.

    Square root of the grid mean (periodic trapezoid rule) of
    ``||log Phi1^{-1/2} Phi2 Phi1^{-1/2}||_F^2``; the Frobenius norm of the
    Hermitian logarithm is evaluated through its eigenvalues.
    """
    if grid is None:
        grid = next((x.grid for x in (x1, x2) if isinstance(x, SampledSpectrum)), None)
    S1, S2 = as_sampled(x1, grid), as_sampled(x2, grid)
    if S1.grid != S2.grid:
        raise GridMismatchError("spectra are sampled on different grids")
    lam = _whitened_eigs(S2.values, S1.values)
    if np.any(lam <= 0):
        raise NotPositiveDefiniteError("spectrum is not positive definite at every frequency")
    return float(np.sqrt(np.mean(np.sum(np.log(lam) ** 2, axis=1))))


def frobenius_divergence(x1: Spectrum, x2: Spectrum, path: str = "rational",
                         grid: FrequencyGrid | None = None) -> float:
    """``||W2^{-1} W1||_2^2 + ||W1^{-1} W2||_2^2 - 2n`` (H2 norms).

    When no rational factorization is available the equivalent quadrature
    of ``tr(Phi2^{-1} Phi1) + tr(Phi1^{-1} Phi2) - 2n`` on the grid is used.
    """
    n = _n_of(x1)
    if path == "rational" and not any(isinstance(x, SampledSpectrum) for x in (x1, x2)):
        try:
            F1 = minimum_phase_factor(x1)
            F2 = minimum_phase_factor(x2)
            R12, R21 = _ratio_systems(F1, F2)
            if not (_on_circle(poles(R12)) or _on_circle(poles(R21))):
                return max(h2_norm_sq(R12) + h2_norm_sq(R21) - 2 * n, 0.0)
        except (BoundaryRootError, ConvergenceError, SingularFeedthroughError):
            pass
    if grid is None:
        grid = next((x.grid for x in (x1, x2) if isinstance(x, SampledSpectrum)), None)
    S1, S2 = as_sampled(x1, grid), as_sampled(x2, grid)
    lam = _whitened_eigs(S1.values, S2.values)
    return max(float(np.mean(np.sum(lam + 1.0 / lam, axis=1))) - 2 * n, 0.0)


def _tangent_eigs(v, x: SampledSpectrum) -> np.ndarray:
    vals = v.values if isinstance(v, SampledSpectrum) else np.asarray(v, dtype=complex)
    if vals.ndim == 1:
        vals = vals[:, None, None]
    if isinstance(v, SampledSpectrum) and v.grid != x.grid:
        raise GridMismatchError("tangent vector and base point use different grids")
    if vals.shape != x.values.shape:
        raise DimensionError(f"tangent shape {vals.shape} does not match base {x.values.shape}")
    return _whitened_eigs(vals, x.values)


def finsler_norm_thompson(v, x: SampledSpectrum) -> float:
    """``inf{a > 0 : -a x <= v <= a x}``: max spectral radius of ``x^{-1/2} v x^{-1/2}``."""
    return float(np.max(np.abs(_tangent_eigs(v, x))))


def hilbert_seminorm(v, x: SampledSpectrum) -> float:
    """``M(v, x) - m(v, x)``: spread of the whitened tangent over all frequencies."""
    lam = _tangent_eigs(v, x)
    return float(np.max(lam[:, -1]) - np.min(lam[:, 0]))


def curve_length(path: Sequence[SampledSpectrum], t: Sequence[float], norm: str = "thompson") -> float:
    """Length of a discretized curve with forward differences.

    ``sum_i ||(g_{i+1} - g_i) / dt_i||_{g_i} dt_i`` with the Thompson norm
    or the Hilbert seminorm as tangent norm.
    """
    if norm not in ("thompson", "hilbert"):
        raise InvalidInputError(f"unknown tangent norm {norm!r}")
    t = np.asarray(t, dtype=float)
    if len(path) != t.size or t.size < 3:
        raise InvalidInputError("need matching parameters and at least three path points")
    if np.any(np.diff(t) <= 0):
        raise InvalidInputError("curve parameters must be strictly increasing")
    tangent_norm = finsler_norm_thompson if norm == "thompson" else hilbert_seminorm
    total = 0.0
    for i in range(t.size - 1):
        dt = t[i + 1] - t[i]
        v = (path[i + 1].values - path[i].values) / dt
        total += tangent_norm(v, path[i]) * dt
    return total
