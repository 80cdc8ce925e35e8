"""LPC analysis: emphasis filters, framing, autocorrelation, Levinson-Durbin, pitch."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.signal import lfilter

from ..errors import DegenerateFrameError, InvalidInputError
from ..factorization import FactoredSpectrum, ScalarFactor
from ..rational import LaurentPolynomial, ScalarRationalSpectrum

__all__ = [
    "AudioSignal",
    "ArModel",
    "MorphConfig",
    "preemphasis",
    "deemphasis",
    "frame_signal",
    "frame_and_window",
    "autocorrelation",
    "levinson_durbin",
    "ar_spectrum",
    "estimate_pitch",
    "interpolate_pitch",
]


@dataclass(frozen=True, eq=False)
class AudioSignal:
    """Mono signal with samples in ``[-1, 1]`` full scale."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).ravel()
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("audio samples must be finite")
        if not self.sample_rate > 0:
            raise InvalidInputError("sample rate must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples) -> "AudioSignal":
        return AudioSignal(samples, self.sample_rate)


@dataclass(frozen=True, eq=False)
class ArModel:
    """All-pole model ``gain / a(z^{-1})`` with ``a[0] = 1``."""

    a: np.ndarray
    gain: float

    def __post_init__(self):
        a = np.atleast_1d(np.array(self.a, dtype=float))
        if a[0] != 1.0:
            raise InvalidInputError("AR polynomial must be monic (a[0] = 1)")
        if not self.gain > 0:
            raise InvalidInputError("AR gain must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def order(self) -> int:
        return self.a.size - 1

    def factor(self) -> FactoredSpectrum:
        return FactoredSpectrum.from_scalar(ScalarFactor([self.gain], self.a))

    def max_root_modulus(self) -> float:
        if self.order == 0:
            return 0.0
        return float(np.max(np.abs(np.roots(self.a))))


_PITCH_MODES = ("linear", "geometric")


@dataclass(frozen=True)
class MorphConfig:
    """Analysis and synthesis settings for :func:`specgeo.speech.morph`.

    ``pitch_mode`` selects linear or geometric interpolation of the two
    pitches.  ``output_rms = None`` disables the final loudness
    normalization.
    """

    frame_ms: float = 25.0
    hop_ms: float = 10.0
    order: int = 14
    preemphasis: float = 0.97
    tau: float = 0.5
    pitch_mode: str = "linear"
    grid: int = 4096
    seed: int = 0
    voicing_threshold: float = 0.3
    fmin: float = 50.0
    fmax: float = 400.0
    output_rms: float | None = 0.1

    def __post_init__(self):
        if not (0 < self.hop_ms <= self.frame_ms):
            raise InvalidInputError("need 0 < hop_ms <= frame_ms")
        if self.order < 1:
            raise InvalidInputError("AR order must be at least 1")
        if self.pitch_mode not in _PITCH_MODES:
            raise InvalidInputError(f"pitch_mode must be one of {_PITCH_MODES}")
        if not math.isfinite(self.tau):
            raise InvalidInputError("tau must be finite")
        if not (0 < self.fmin < self.fmax):
            raise InvalidInputError("need 0 < fmin < fmax")

    def frame_length(self, fs: float) -> int:
        return int(round(self.frame_ms * fs / 1000.0))

    def hop_length(self, fs: float) -> int:
        return max(1, int(round(self.hop_ms * fs / 1000.0)))

    @classmethod
    def from_mapping(cls, values: dict) -> "MorphConfig":
        """Build from string or typed values, e.g. a parsed key=value file."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise InvalidInputError(f"unknown config key {key!r}")
            default = known[key].default
            if key == "output_rms" and (raw is None or str(raw).lower() == "none"):
                kwargs[key] = None
                continue
            try:
                if isinstance(default, str):
                    kwargs[key] = str(raw)
                elif isinstance(default, int) and not isinstance(default, bool):
                    kwargs[key] = int(raw)
                else:
                    kwargs[key] = float(raw)
            except ValueError as exc:
                raise InvalidInputError(f"bad value for {key}: {raw!r}") from exc
        return cls(**kwargs)


def _as_array(x) -> tuple[np.ndarray, float | None]:
    if isinstance(x, AudioSignal):
        return x.samples, x.sample_rate
    return np.asarray(x, dtype=float), None


def _wrap_like(x, y):
    return AudioSignal(y, x.sample_rate) if isinstance(x, AudioSignal) else y


def preemphasis(x, mu: float = 0.97):
    """``y[t] = x[t] - mu x[t-1]`` with zero initial state."""
    s, _ = _as_array(x)
    return _wrap_like(x, lfilter([1.0, -mu], [1.0], s))


def deemphasis(y, mu: float = 0.97):
    """Inverse of :func:`preemphasis`: the all-pole filter ``1 / (1 - mu z^{-1})``."""
    s, _ = _as_array(y)
    return _wrap_like(y, lfilter([1.0], [1.0, -mu], s))


def frame_signal(x: AudioSignal, config: MorphConfig) -> np.ndarray:
    """Unwindowed frames, shape ``(K, L)``, at hop stride."""
    fs = x.sample_rate
    L, H = config.frame_length(fs), config.hop_length(fs)
    n = len(x)
    if L < 2 or n < L:
        raise InvalidInputError(f"signal of {n} samples is shorter than one {L}-sample frame")
    K = (n - L) // H + 1
    idx = np.arange(L)[None, :] + H * np.arange(K)[:, None]
    return x.samples[idx]


def frame_and_window(x: AudioSignal, config: MorphConfig) -> np.ndarray:
    """Frames multiplied by the symmetric Hamming window ``0.54 - 0.46 cos(2 pi t/(L-1))``."""
    frames = frame_signal(x, config)
    return frames * np.hamming(frames.shape[1])[None, :]


def autocorrelation(frame, p: int) -> np.ndarray:
    """Biased, unnormalized lags ``r_k = sum_t x[t] x[t+k]`` for ``k = 0..p``."""
    x = np.asarray(frame, dtype=float)
    if not 0 <= p < x.size:
        raise InvalidInputError(f"lag count {p} must be below frame length {x.size}")
    full = np.correlate(x, x, mode="full")
    return full[x.size - 1: x.size + p]


def levinson_durbin(r) -> ArModel:
    """Solve the Yule-Walker equations by order recursion.

    Parameters
    ----------
    r : array_like
        Autocorrelation lags ``r_0 .. r_p``.

    Returns
    -------
    ArModel
        ``a`` with ``a[0] = 1`` and ``gain = sqrt(r_0 prod(1 - k_i^2))``.

    Raises
    ------
    DegenerateFrameError
        If ``r_0 <= 0`` or a reflection coefficient reaches modulus one, i.e.
        the Toeplitz matrix is not positive definite.
    """
    r = np.asarray(r, dtype=float)
    p = r.size - 1
    if not r[0] > 0:
        raise DegenerateFrameError("zero-energy frame")
    a = np.zeros(p + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, p + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        k = -acc / err
        if not abs(k) < 1.0:
            raise DegenerateFrameError(f"reflection coefficient {k} at order {i}")
        a[1:i] = a[1:i] + k * a[i - 1:0:-1]
        a[i] = k
        err *= 1.0 - k * k
        if not err > 0:
            raise DegenerateFrameError("prediction error vanished")
    return ArModel(a, math.sqrt(err))


def ar_spectrum(model: ArModel) -> ScalarRationalSpectrum:
    """``gain^2 / |a(e^{j theta})|^2`` as a ratio of symmetric Laurent polynomials."""
    return ScalarRationalSpectrum(
        LaurentPolynomial([model.gain ** 2]),
        LaurentPolynomial.autocorrelation(model.a),
    )


def estimate_pitch(frame, model: ArModel, fs: float, fmin: float = 50.0,
                   fmax: float = 400.0, threshold: float = 0.3) -> float | None:
    """Pitch in Hz from the autocorrelation of the LPC residual, or ``None`` if unvoiced.

    The frame is inverse filtered by ``a(z)`` and the start-up samples
    without full history are dropped; the residual autocorrelation
    peak is searched over lags ``fs/fmax .. fs/fmin``.  A normalized peak
    below ``threshold`` marks the frame unvoiced.
    """
    x = np.asarray(frame, dtype=float)
    # the first `order` outputs predict from samples before the frame
    e = lfilter(model.a, [1.0], x)[model.order:]
    lo = max(1, int(math.floor(fs / fmax)))
    hi = min(int(math.ceil(fs / fmin)), e.size - 1)
    if hi < lo:
        return None
    r = autocorrelation(e, hi)
    if not r[0] > 0:
        return None
    k = lo + int(np.argmax(r[lo:hi + 1]))
    if r[k] / r[0] < threshold:
        return None
    return fs / k


def interpolate_pitch(pA: float | None, pB: float | None, tau: float,
                      mode: str = "linear") -> float | None:
    """Pitch at ``tau``; ``None`` stands for an unvoiced frame.

    If only one endpoint is voiced, the endpoint nearer to ``tau`` decides
    both voicing and pitch.
    """
    if pA is None or pB is None:
        return pA if tau < 0.5 else pB
    if pA <= 0 or pB <= 0:
        raise InvalidInputError("pitches must be positive")
    if mode == "linear":
        return (1.0 - tau) * pA + tau * pB
    if mode == "geometric":
        return pA ** (1.0 - tau) * pB ** tau
    raise InvalidInputError(f"unknown pitch interpolation mode {mode!r}")
