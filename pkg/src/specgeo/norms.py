"""H-infinity, L-infinity and H2 norms of rational matrix functions.

The H-infinity norm of a stable system is computed by bisection on ``gamma``
with a unit-circle eigenvalue test on the discrete-time bounded-real pencil;
crossing frequencies found by the test are probed to push the lower bound up
(Boyd--Balakrishnan refinement), which makes the iteration converge in a
handful of steps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, UnstableSystemError
from .rational import CIRCLE_TOL, FrequencyGrid, StateSpace, _freqresp, sample

__all__ = [
    "NormResult",
    "linf_norm_grid",
    "hinf_norm",
    "h2_norm_sq",
    "solve_stein",
    "unit_circle_crossings",
]

HINF_TOL = 1e-8
# | |lambda| - 1 | below this counts as an eigenvalue on the unit circle
UNIT_EIG_TOL = 1e-8
_PROBE_GRID = 512
# eigenvalues this close to the circle are probed even when not counted as crossings
_NEAR_CIRCLE = 1e-3
_MAX_ITER = 200


@dataclass(frozen=True)
class NormResult:
    value: float
    peak_frequency: float
    method: str
    certified_interval: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "peak_frequency": self.peak_frequency,
            "method": self.method,
            "certified_interval": list(self.certified_interval),
        }


def _wrap(theta: float) -> float:
    """Map an angle into ``[-pi, pi)``."""
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


def _sigma_max(values: np.ndarray) -> np.ndarray:
    if values.shape[1] == 1 or values.shape[2] == 1:
        return np.sqrt(np.sum(np.abs(values) ** 2, axis=(1, 2)))
    return np.linalg.svd(values, compute_uv=False)[:, 0]


def linf_norm_grid(G, grid: FrequencyGrid | None = None) -> NormResult:
    """Max of ``sigma_max(G(e^{j theta_k}))`` over a uniform grid.

    ``G`` may be a :class:`StateSpace` or an ``(N, p, m)`` array of samples
    on ``grid``.  The value is a lower bound of the L-infinity norm.
    """
    grid = grid or FrequencyGrid()
    values = sample(G, grid) if isinstance(G, StateSpace) else np.asarray(G)
    s = _sigma_max(values)
    k = int(np.argmax(s))
    v = float(s[k])
    return NormResult(v, float(grid.theta[k]), "grid", (v, np.inf))


def _pencil(G: StateSpace, gamma: float):
    """Pencil ``(M, N)`` whose unit-circle eigenvalues ``e^{j theta}`` are the
    frequencies where ``gamma`` is a singular value of ``G(e^{j theta})``.

    Unknowns are stacked as ``(x, xi, u)``: state, adjoint state and input.
    """
    A, B, C, D = G.A, G.B, G.C, G.D
    n, m = G.nstates, G.shape[1]
    I, Z = np.eye(n), np.zeros
    M = np.block([
        [A, Z((n, n)), B],
        [Z((n, n)), I, Z((n, m))],
        [D.T @ C, B.T, D.T @ D - gamma ** 2 * np.eye(m)],
    ])
    N = np.block([
        [I, Z((n, n)), Z((n, m))],
        [C.T @ C, A.T, C.T @ D],
        [Z((m, n)), Z((m, n)), Z((m, m))],
    ])
    return M, N


def _pencil_eigs(G: StateSpace, gamma: float) -> np.ndarray:
    M, N = _pencil(G, gamma)
    alpha, beta = scipy.linalg.eig(M, N, right=False, homogeneous_eigvals=True)
    a, b = np.abs(alpha), np.abs(beta)
    finite = b > 1e-14 * np.maximum(a, 1.0)
    return alpha[finite] / beta[finite]


def unit_circle_crossings(G: StateSpace, gamma: float, tol: float = UNIT_EIG_TOL) -> np.ndarray:
    """Angles of the unit-modulus eigenvalues of the bounded-real pencil at ``gamma``."""
    lam = _pencil_eigs(G, gamma)
    on_circle = np.abs(np.abs(lam) - 1.0) <= tol
    return np.sort(np.angle(lam[on_circle]))


def hinf_norm(G: StateSpace, tol: float = HINF_TOL, max_iter: int = _MAX_ITER) -> NormResult:
    """H-infinity norm of a stable discrete-time system.

    Parameters
    ----------
    G : StateSpace
        All poles strictly inside the unit disk.
    tol : float
        Relative width of the returned interval:
        ``hi - lo <= tol * max(1, lo)``.

    Returns
    -------
    NormResult
        ``value`` is the lower end of ``certified_interval = (lo, hi)``:
        ``lo`` is an attained value of ``sigma_max``, ``hi`` a level with no
        pencil crossings (or whose crossings enclose no arc above it).

    Raises
    ------
    UnstableSystemError
    ConvergenceError
        If ``gamma`` keeps landing on ``sigma_max(D)`` where the pencil
        degenerates.
    """
    if not G.is_stable(CIRCLE_TOL):
        raise UnstableSystemError("H-infinity norm requires poles strictly inside the unit disk")
    sD = float(np.linalg.norm(G.D, 2)) if G.D.size else 0.0
    if G.nstates == 0:
        return NormResult(sD, -np.pi, "bisection", (sD, sD))

    def probe(thetas):
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        s = _sigma_max(_freqresp(G, np.exp(1j * thetas)))
        k = int(np.argmax(s))
        return float(s[k]), _wrap(thetas[k])

    # initial lower bound: coarse grid, angles of the poles, and G(infinity)
    eig = np.linalg.eigvals(G.A)
    thetas = np.concatenate([FrequencyGrid(_PROBE_GRID).theta, np.angle(eig), [0.0, np.pi]])
    lo, peak = probe(thetas)
    if sD > lo:
        lo = sD
    if lo == 0.0:
        lo_scale = 1.0
    else:
        lo_scale = lo

    def crossings(gamma):
        """Level actually tested, crossing angles, angles of near-circle eigenvalues."""
        for _ in range(4):
            if gamma ** 2 - sD ** 2 > 10 * tol * gamma ** 2:
                lam = _pencil_eigs(G, gamma)
                dist = np.abs(np.abs(lam) - 1.0)
                cross = np.sort(np.angle(lam[dist <= UNIT_EIG_TOL]))
                return gamma, cross, np.angle(lam[dist <= _NEAR_CIRCLE])
            gamma = gamma + 10 * tol * max(1.0, gamma)
        raise ConvergenceError("bisection level stuck at sigma_max(D)")

    def missed_peak(gamma, near):
        # near a sharp peak the two crossings almost coalesce and can drift off
        # the circle numerically; probing the near-circle angles catches that
        if near.size == 0:
            return None
        near = np.sort(near)
        val, th = probe(np.concatenate([near, 0.5 * (near[:-1] + near[1:])]))
        return (val, th) if val >= gamma else None

    def local_max(cross):
        # true crossings bracket an arc where sigma >= gamma; search each arc
        edges = np.concatenate([cross, [cross[0] + 2 * np.pi]])
        best = (-np.inf, 0.0)
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a <= 0:
                continue
            res = minimize_scalar(lambda t: -probe(t)[0], bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, b - a)})
            best = max(best, (-float(res.fun), _wrap(res.x)))
        return best

    hi = 2.0 * lo_scale
    for _ in range(200):
        hi, cross, near = crossings(hi)
        if cross.size == 0:
            found = missed_peak(hi, near)
            if found is None:
                break
            lo, peak = max((lo, peak), found)
            hi *= 2.0
            continue
        val, th = probe(cross)
        if val > lo:
            lo, peak = val, th
        hi *= 2.0
    else:
        raise ConvergenceError("could not find an upper bound")

    # the probes usually land on the peak, so first try to close the gap
    # just above the current lower bound; fall back to bisection otherwise
    try_close = True
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, lo):
            break
        if try_close:
            gamma = min(lo + 0.5 * tol * max(1.0, lo), 0.5 * (lo + hi))
            try_close = False
        else:
            gamma = 0.5 * (lo + hi)
        gamma, cross, near = crossings(gamma)
        if gamma >= hi:
            break
        if cross.size == 0:
            found = missed_peak(gamma, near)
            if found is None:
                hi = gamma
            else:
                lo, peak = found
                try_close = True
            continue
        # probe the crossings and the midpoints between consecutive ones
        mids = 0.5 * (cross[:-1] + cross[1:])
        wrap_mid = 0.5 * (cross[-1] + cross[0] + 2 * np.pi)
        val, th = probe(np.concatenate([cross, mids, [wrap_mid]]))
        if val < gamma:
            val, th = max((val, th), local_max(cross))
        if val > lo:
            lo, peak = val, th
            try_close = True
        if val < gamma:
            # sigma stays below gamma between every pair of crossings, so they
            # are eigenvalue noise at a flat peak rather than level crossings
            hi = gamma
    else:
        raise ConvergenceError("H-infinity bisection did not converge")
    return NormResult(lo, peak, "bisection", (lo, hi))


def solve_stein(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Solve ``P = A P A^T + Q`` (``A`` Schur stable)."""
    if A.size == 0:
        return np.zeros((0, 0))
    P = scipy.linalg.solve_discrete_lyapunov(A, Q)
    return 0.5 * (P + P.T)


def h2_norm_sq(G: StateSpace) -> float:
    """Squared H2 norm ``tr(C P C^T) + tr(D D^T)`` with ``P = A P A^T + B B^T``."""
    if not G.is_stable(CIRCLE_TOL):
        raise UnstableSystemError("H2 norm requires poles strictly inside the unit disk")
    P = solve_stein(G.A, G.B @ G.B.T)
    return float(np.trace(G.C @ P @ G.C.T) + np.trace(G.D @ G.D.T))
