"""16-bit PCM WAV files and key=value config files."""
from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from .analysis import AudioSignal, MorphConfig

__all__ = ["read_wav", "write_wav", "read_config"]

_FULL_SCALE = 32768.0


def read_wav(path) -> AudioSignal:
    """Read 16-bit PCM; multi-channel files are averaged down to mono."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getsampwidth() != 2:
                raise InvalidInputError(f"{path}: only 16-bit PCM is supported")
            nch, fs = w.getnchannels(), w.getframerate()
            raw = w.readframes(w.getnframes())
    except wave.Error as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    data = np.frombuffer(raw, dtype="<i2").astype(float) / _FULL_SCALE
    if nch > 1:
        data = data.reshape(-1, nch).mean(axis=1)
    return AudioSignal(data, fs)


def write_wav(path, signal: AudioSignal) -> None:
    """Write mono 16-bit PCM, clipping to full scale."""
    pcm = np.clip(np.round(signal.samples * _FULL_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(round(signal.sample_rate)))
        w.writeframes(pcm.tobytes())


def read_config(path, **overrides) -> MorphConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`MorphConfig`."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val
    values.update({k: v for k, v in overrides.items() if v is not None})
    return MorphConfig.from_mapping(values)
