"""Speech morphing along Finsler geodesics of LPC spectra."""
from .analysis import (
    ArModel,
    AudioSignal,
    MorphConfig,
    ar_spectrum,
    autocorrelation,
    deemphasis,
    estimate_pitch,
    frame_and_window,
    frame_signal,
    interpolate_pitch,
    levinson_durbin,
    preemphasis,
)
from .pipeline import FrameAnalysis, MorphFrames, analyze, morph, morph_frames
from .synthesis import morph_frame, synthesize
from .wavio import read_config, read_wav, write_wav

__all__ = [
    "ArModel",
    "AudioSignal",
    "MorphConfig",
    "FrameAnalysis",
    "MorphFrames",
    "ar_spectrum",
    "autocorrelation",
    "deemphasis",
    "estimate_pitch",
    "frame_and_window",
    "frame_signal",
    "interpolate_pitch",
    "levinson_durbin",
    "preemphasis",
    "analyze",
    "morph",
    "morph_frame",
    "morph_frames",
    "synthesize",
    "read_config",
    "read_wav",
    "write_wav",
]
