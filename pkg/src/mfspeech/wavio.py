"""Mono 24 kHz WAV reading and writing (16-bit PCM or 32-bit float)."""

import numpy as np
from scipy.io import wavfile

from .errors import ConfigInvalid

PCM16_SCALE = 32768.0


def read_wav(path, sample_rate=24000):
    """Return ``(samples, pcm16)``; samples are float64 in [-1, 1)."""
    rate, data = wavfile.read(path)
    if rate != sample_rate:
        raise ConfigInvalid(f"{path}: sample rate {rate} Hz, expected {sample_rate} Hz (no resampling)")
    if data.ndim != 1:
        raise ConfigInvalid(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        return data.astype(np.float64) / PCM16_SCALE, True
    if data.dtype == np.float32:
        return data.astype(np.float64), False
    raise ConfigInvalid(f"{path}: unsupported sample format {data.dtype}")


def write_wav(path, samples, sample_rate=24000, pcm16=False):
    samples = np.asarray(samples, dtype=np.float64)
    if pcm16:
        data = np.clip(np.round(samples * PCM16_SCALE), -32768, 32767).astype(np.int16)
    else:
        data = samples.astype(np.float32)
    wavfile.write(path, sample_rate, data)
