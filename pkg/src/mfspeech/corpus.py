"""Synthetic test corpus: voiced harmonic sources in white or babble-like noise."""

from dataclasses import dataclass

import numpy as np

SNRS_DB = (-5.0, 0.0, 5.0)
NOISE_TYPES = ("white", "babble")


@dataclass
class Clip:
    name: str
    clean: np.ndarray
    noise: np.ndarray
    snr_db: float
    noise_type: str

    @property
    def noisy(self):
        return self.clean + self.noise


def harmonic_source(rng, duration_s, sample_rate=24000, f0_range=(100.0, 220.0), fmax=5000.0,
                    syllable_rate=4.0, voiced_fraction=0.7):
    """Harmonic signal with a gliding fundamental, spectral tilt and on/off syllable envelope."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    f0_base = rng.uniform(*f0_range)
    # slow pitch contour: a drift plus a few Hz of vibrato
    drift = 1.0 + 0.08 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * t + rng.uniform(0, 2 * np.pi))
    vibrato = 1.0 + 0.01 * np.sin(2 * np.pi * rng.uniform(4.0, 6.0) * t)
    f0 = f0_base * drift * vibrato
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    x = np.zeros(n)
    k_max = int(fmax // f0_base)
    for k in range(1, k_max + 1):
        amp = 1.0 / k ** 0.9 * rng.uniform(0.6, 1.0)
        x += amp * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    # syllables: raised-cosine gated segments separated by pauses
    env = np.zeros(n)
    period = int(sample_rate / syllable_rate)
    on = int(period * voiced_fraction)
    ramp = min(on // 4, int(0.02 * sample_rate))
    shape = np.ones(on)
    if ramp > 0:
        r = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
        shape[:ramp] = r
        shape[-ramp:] = r[::-1]
    start = int(rng.uniform(0, period - on))
    while start + on <= n:
        env[start : start + on] = shape * rng.uniform(0.5, 1.0)
        start += period + int(rng.uniform(-0.2, 0.2) * period)
    return x * env


def babble_noise(rng, duration_s, sample_rate=24000, talkers=6):
    n = int(round(duration_s * sample_rate))
    out = np.zeros(n)
    for _ in range(talkers):
        out += harmonic_source(rng, duration_s, sample_rate, f0_range=(90.0, 260.0),
                               syllable_rate=rng.uniform(3.0, 5.0), voiced_fraction=0.8)
    # unvoiced breath component
    out += 0.05 * np.std(out) * rng.standard_normal(n)
    return out


def mix_at_snr(clean, noise, snr_db):
    p_s = np.mean(clean**2)
    p_n = np.mean(noise**2)
    return noise * np.sqrt(p_s / (p_n * 10 ** (snr_db / 10)))


def make_clip(seed, duration_s=5.0, snr_db=0.0, noise_type="white", sample_rate=24000, level=0.1):
    rng = np.random.default_rng(seed)
    clean = harmonic_source(rng, duration_s, sample_rate)
    clean *= level / np.sqrt(np.mean(clean**2))
    if noise_type == "white":
        noise = rng.standard_normal(len(clean))
    elif noise_type == "babble":
        noise = babble_noise(rng, duration_s, sample_rate)
    else:
        raise ValueError(f"unknown noise type {noise_type!r}")
    noise = mix_at_snr(clean, noise, snr_db)
    return Clip(f"syn{seed:03d}_{noise_type}_{snr_db:+.0f}dB", clean, noise, snr_db, noise_type)


def synthetic_corpus(n_clips=10, duration_s=5.0, snrs=SNRS_DB, noise_types=NOISE_TYPES, seed=1234):
    """``n_clips`` clean sources, each mixed at every SNR; noise type alternates per clip."""
    clips = []
    for i in range(n_clips):
        noise_type = noise_types[i % len(noise_types)]
        for snr in snrs:
            clips.append(make_clip(seed + i, duration_s, snr, noise_type))
    return clips
