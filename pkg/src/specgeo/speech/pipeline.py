"""End-to-end morphing of two recordings."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateFrameError, InvalidInputError
from ..factorization import FactoredSpectrum
from .analysis import (
    ArModel,
    AudioSignal,
    MorphConfig,
    autocorrelation,
    deemphasis,
    estimate_pitch,
    frame_signal,
    interpolate_pitch,
    levinson_durbin,
    preemphasis,
)
from .synthesis import morph_frame, synthesize

__all__ = ["FrameAnalysis", "MorphFrames", "analyze", "morph_frames", "morph"]

# stand-in model for leading silent frames: flat and far below any real frame
_SILENT_GAIN = 1e-6


@dataclass(frozen=True)
class FrameAnalysis:
    models: list[ArModel]
    pitches: list[float | None]
    degenerate: list[bool]


@dataclass(frozen=True)
class MorphFrames:
    factors: list[FactoredSpectrum]
    pitches: list[float | None]
    analysis_a: FrameAnalysis
    analysis_b: FrameAnalysis


def analyze(x: AudioSignal, config: MorphConfig) -> FrameAnalysis:
    """Per-frame AR models and pitch of the pre-emphasized signal.

    Frames whose autocorrelation is not positive definite (silence, clipping
    artefacts) reuse the previous frame's model.
    """
    y = preemphasis(x, config.preemphasis)
    raw = frame_signal(y, config)
    window = np.hamming(raw.shape[1])
    models, pitches, flags = [], [], []
    prev = None
    for frame in raw:
        try:
            model = levinson_durbin(autocorrelation(frame * window, config.order))
            flags.append(False)
        except DegenerateFrameError:
            model = prev if prev is not None else ArModel(np.r_[1.0, np.zeros(config.order)], _SILENT_GAIN)
            flags.append(True)
        prev = model
        models.append(model)
        pitches.append(estimate_pitch(frame, model, x.sample_rate, config.fmin, config.fmax,
                                      config.voicing_threshold))
    return FrameAnalysis(models, pitches, flags)


def morph_frames(a: AudioSignal, b: AudioSignal, config: MorphConfig) -> MorphFrames:
    """Analysis of both signals and the interpolated factor and pitch per frame.

    Frames are paired by index and the longer signal is truncated.
    """
    if a.sample_rate != b.sample_rate:
        raise InvalidInputError(f"sample rates differ: {a.sample_rate} vs {b.sample_rate}")
    fa, fb = analyze(a, config), analyze(b, config)
    K = min(len(fa.models), len(fb.models))
    factors = [morph_frame(fa.models[k], fb.models[k], config.tau) for k in range(K)]
    pitches = [interpolate_pitch(fa.pitches[k], fb.pitches[k], config.tau, config.pitch_mode)
               for k in range(K)]
    return MorphFrames(factors, pitches, fa, fb)


def morph(a: AudioSignal, b: AudioSignal, config: MorphConfig | None = None) -> AudioSignal:
    """Morph signal ``a`` towards ``b`` at ``config.tau`` and return the synthesized audio."""
    config = config or MorphConfig()
    frames = morph_frames(a, b, config)
    y = synthesize(frames.factors, frames.pitches, config, a.sample_rate,
                   np.random.default_rng(config.seed))
    out = deemphasis(y, config.preemphasis)
    if config.output_rms is not None:
        rms = float(np.sqrt(np.mean(out.samples ** 2)))
        if rms > 0:
            out = out.with_samples(out.samples * (config.output_rms / rms))
    return out
