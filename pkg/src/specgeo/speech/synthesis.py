"""Per-frame spectral interpolation and source-filter synthesis."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from ..errors import InvalidInputError
from ..factorization import FactoredSpectrum
from ..geodesics import GeodesicSpec, finsler_geodesic
from .analysis import ArModel, AudioSignal, MorphConfig

__all__ = ["morph_frame", "synthesize"]


def morph_frame(modelA: ArModel, modelB: ArModel, tau: float) -> FactoredSpectrum:
    """Point ``tau`` of the Finsler geodesic between two AR spectra.

    The result is a scalar minimum-phase factor ``b(z)/(a_A(z) a_B(z))``
    with ``deg b <= p_A + p_B``.
    """
    spec = GeodesicSpec.from_spectra(modelA.factor(), modelB.factor())
    return finsler_geodesic(spec, tau)


def _padded_filters(factors: Sequence[FactoredSpectrum]):
    polys = []
    for f in factors:
        if f.scalar is None:
            raise InvalidInputError("synthesis needs scalar factors")
        polys.append((f.scalar.num, f.scalar.den))
    width = max(max(b.size, a.size) for b, a in polys)
    pad = lambda c: np.concatenate([c, np.zeros(width - c.size)])
    return [(pad(b), pad(a)) for b, a in polys], width


def synthesize(factors: Sequence[FactoredSpectrum], pitches: Sequence[float | None],
               config: MorphConfig, sample_rate: float,
               rng: np.random.Generator | None = None) -> AudioSignal:
    """Drive each frame's filter for one hop with a pulse train or white noise.

    Parameters
    ----------
    factors : sequence of FactoredSpectrum
        Scalar factors, one per frame.
    pitches : sequence of float or None
        Pitch in Hz per frame; ``None`` marks an unvoiced frame.
    config : MorphConfig
        Hop length, seed and output level.
    sample_rate : float
    rng : numpy.random.Generator, optional
        Noise source; defaults to one seeded with ``config.seed``.

    Notes
    -----
    Pulses are spaced ``round(fs / pitch)`` samples apart and the spacing is
    measured from the last emitted pulse, so the pulse phase runs across
    frame boundaries.  The filter state is carried across frames as well;
    all filters are zero-padded to a common length so the state vector has
    a fixed size.
    """
    if len(factors) != len(pitches):
        raise InvalidInputError("need one pitch per frame")
    if len(factors) == 0:
        return AudioSignal(np.zeros(0), sample_rate)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    H = config.hop_length(sample_rate)
    filters, width = _padded_filters(factors)
    state = np.zeros(width - 1)
    out = np.empty(H * len(factors))
    last_pulse = None
    for k, ((b, a), pitch) in enumerate(zip(filters, pitches)):
        start, end = k * H, (k + 1) * H
        if pitch is None:
            exc = rng.standard_normal(H)
            last_pulse = None
        else:
            period = max(1, int(round(sample_rate / pitch)))
            exc = np.zeros(H)
            nxt = start if last_pulse is None else max(last_pulse + period, start)
            while nxt < end:
                exc[nxt - start] = 1.0
                last_pulse = nxt
                nxt += period
        if width > 1:
            out[start:end], state = lfilter(b, a, exc, zi=state)
        else:
            out[start:end] = b[0] / a[0] * exc
    if config.output_rms is not None:
        rms = float(np.sqrt(np.mean(out ** 2)))
        if rms > 0:
            out *= config.output_rms / rms
    return AudioSignal(out, sample_rate)
