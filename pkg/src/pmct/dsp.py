"""Signal-processing kernels: RIR convolution, SNR noise mixing, log-mels.

Reverberation is full linear convolution with the impulse response followed
by a window starting at the direct-path delay, so the output stays aligned
sample-for-sample with the dry input and has the same length. Noise mixing
scales the noise to hit an exact target SNR measured against the full signal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import oaconvolve

from .audio_io import AudioBuffer, FeatureMatrix
from .errors import (
    EmptyImpulseError,
    EmptyInputError,
    NonFiniteError,
    SilentNoiseError,
    SilentSignalWarning,
    TooShortError,
)

# Kernels at or below this tap count use direct time-domain convolution;
# longer RIRs go through FFT overlap-add.
DIRECT_CONV_MAX_TAPS = 128


@dataclass
class ImpulseResponse:
    """RIR taps h(0..M-1) with the direct-path index cached at construction."""

    taps: np.ndarray
    id: str = ""
    direct_path_index: int = field(init=False)

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size == 0:
            raise EmptyImpulseError(f"impulse response {self.id!r} has no taps")
        if not np.all(np.isfinite(self.taps)):
            raise NonFiniteError(f"impulse response {self.id!r} has NaN/Inf taps")
        if not np.any(self.taps):
            raise EmptyImpulseError(f"impulse response {self.id!r} is all zeros")
        # argmax of |h|, ties broken toward the earliest tap
        self.direct_path_index = int(np.argmax(np.abs(self.taps)))

    def __len__(self) -> int:
        return int(self.taps.size)


def direct_path_delay(h: ImpulseResponse) -> int:
    """Sample index of the RIR's strongest (direct-path) tap."""
    return h.direct_path_index


def apply_rir(x: AudioBuffer, h: ImpulseResponse, method: str = "auto") -> AudioBuffer:
    """Convolve with an RIR and remove the direct-path delay.

    The full linear convolution c = h * x is windowed to c[d : d+L] where d
    is the direct-path delay and L = len(x), so the reverberated output lines
    up with the dry signal and can be patch-mixed against it.

    ``method`` selects the convolution path: "direct" (time domain), "fft"
    (overlap-add), or "auto" (direct for short kernels, fft otherwise). Both
    paths agree to within 1e-6 absolute.
    """
    if len(x) == 0:
        raise EmptyInputError(f"signal {x.id!r} is empty")
    if method == "auto":
        method = "direct" if len(h) <= DIRECT_CONV_MAX_TAPS else "fft"
    if method == "direct":
        full = np.convolve(x.samples, h.taps, mode="full")
    elif method == "fft":
        full = oaconvolve(x.samples, h.taps, mode="full")
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    d = h.direct_path_index
    out = full[d:d + len(x)]
    return AudioBuffer(samples=out, sample_rate=x.sample_rate, id=x.id)


def _align_noise(noise: np.ndarray, length: int, rng: np.random.Generator) -> np.ndarray:
    """Crop (random offset) or tile the noise to exactly ``length`` samples.

    Longer noise consumes one integer draw for the crop offset; shorter or
    equal-length noise is tiled end-to-end and cut at ``length`` without
    consuming randomness.
    """
    n = noise.size
    if n > length:
        offset = int(rng.integers(0, n - length + 1))
        return noise[offset:offset + length]
    reps = math.ceil(length / n)
    return np.tile(noise, reps)[:length]


def noise_component(y: AudioBuffer, noise: AudioBuffer, snr_db: float,
                    rng: np.random.Generator) -> np.ndarray | None:
    """The scaled noise term that mixing would add to ``y``, or None.

    Powers are mean squared amplitudes over the full aligned segments; the
    noise gain is sqrt(P_y / (P_n * 10^(snr/10))). A silent input signal
    yields None with a SilentSignalWarning, before any random draw is
    consumed; a silent noise segment raises SilentNoiseError.
    """
    if len(y) == 0 or len(noise) == 0:
        raise EmptyInputError("empty signal or noise")
    if not math.isfinite(snr_db):
        raise NonFiniteError(f"snr_db is not finite: {snr_db}")

    p_y = float(np.mean(np.square(y.samples)))
    if p_y == 0.0:
        warnings.warn(f"signal {y.id!r} is silent; skipping noise addition",
                      SilentSignalWarning)
        return None

    seg = _align_noise(noise.samples, len(y), rng)
    p_n = float(np.mean(np.square(seg)))
    if p_n == 0.0:
        raise SilentNoiseError(f"noise {noise.id!r} segment has zero power")

    gain = math.sqrt(p_y / (p_n * 10.0 ** (snr_db / 10.0)))
    return gain * seg


def mix_noise_at_snr(y: AudioBuffer, noise: AudioBuffer, snr_db: float,
                     rng: np.random.Generator) -> AudioBuffer:
    """Add noise scaled so the mixture hits ``snr_db`` exactly.

    See noise_component for the gain definition and the silent-signal and
    silent-noise edge cases.
    """
    component = noise_component(y, noise, snr_db, rng)
    if component is None:
        return AudioBuffer(samples=y.samples.copy(), sample_rate=y.sample_rate, id=y.id)
    return AudioBuffer(samples=y.samples + component, sample_rate=y.sample_rate, id=y.id)


def hz_to_mel(f):
    """HTK mel scale: 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass
class MelConfig:
    """Framing and filterbank parameters for the log-mel frontend."""

    frame_length_ms: int = 25
    frame_shift_ms: int = 10
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float | None = None  # defaults to Nyquist

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_length_ms * sample_rate / 1000.0))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_shift_ms * sample_rate / 1000.0))


def mel_center_frequencies(config: MelConfig, sample_rate: int) -> np.ndarray:
    """Center frequency (Hz) of each triangular mel filter."""
    f_max = config.f_max if config.f_max is not None else sample_rate / 2.0
    mels = np.linspace(hz_to_mel(config.f_min), hz_to_mel(f_max), config.n_mels + 2)
    return mel_to_hz(mels)[1:-1]


def mel_filterbank(config: MelConfig, sample_rate: int, n_fft: int) -> np.ndarray:
    """(n_mels, n_fft//2 + 1) matrix of peak-1 triangular mel weights."""
    f_max = config.f_max if config.f_max is not None else sample_rate / 2.0
    mels = np.linspace(hz_to_mel(config.f_min), hz_to_mel(f_max), config.n_mels + 2)
    edges = mel_to_hz(mels)
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)
    fb = np.zeros((config.n_mels, bin_freqs.size))
    for i in range(config.n_mels):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        fb[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def log_mel_features(x: AudioBuffer, config: MelConfig | None = None) -> FeatureMatrix:
    """Frame, window, and project a waveform onto log mel filter energies.

    Frames use a periodic Hann window; triangular mel weights are applied to
    the magnitude spectrum and floored at 1e-10 before the natural log.
    T = 1 + floor((L - frame_len) / hop).
    """
    if config is None:
        config = MelConfig()
    frame_len = config.frame_samples(x.sample_rate)
    hop = config.hop_samples(x.sample_rate)
    if len(x) < frame_len:
        raise TooShortError(
            f"signal {x.id!r} has {len(x)} samples, shorter than one {frame_len}-sample frame"
        )
    n_frames = 1 + (len(x) - frame_len) // hop
    n_fft = 1 << (frame_len - 1).bit_length()

    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame_len) / frame_len)
    starts = np.arange(n_frames) * hop
    frames = x.samples[starts[:, None] + np.arange(frame_len)] * window
    magnitude = np.abs(np.fft.rfft(frames, n=n_fft, axis=1))

    fb = mel_filterbank(config, x.sample_rate, n_fft)
    energies = magnitude @ fb.T
    logmel = np.log(np.maximum(energies, 1e-10))
    return FeatureMatrix(frames=logmel.astype(np.float32),
                         frame_shift_ms=config.frame_shift_ms,
                         frame_length_ms=config.frame_length_ms, id=x.id)
