"""WAV reading/writing and the toolkit's binary feature format.

Only RIFF/WAVE files encoded as 16-bit signed PCM or IEEE float32 are
accepted; everything else is rejected rather than guessed at. Multichannel
audio is averaged down to mono. 16-bit samples are scaled by 1/32768 so the
full negative range maps into [-1, 1).
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClippingWarning,
    MalformedHeaderError,
    SampleRateMismatchError,
    UnsupportedFormatError,
)

OPERATING_RATE = 16000

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

FEATURE_MAGIC = b"PMCTFEAT"
FEATURE_VERSION = 1


@dataclass
class AudioBuffer:
    """Mono waveform with its sample rate and an opaque utterance id.

    Samples are kept as float64 internally; values loaded from PCM16 or
    float32 files are exactly representable, so round-trips stay bit-exact.
    """

    samples: np.ndarray
    sample_rate: int
    id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")

    def validate(self) -> "AudioBuffer":
        """Check the invariants required of any buffer entering augmentation."""
        if self.samples.size == 0:
            raise ValueError(f"buffer {self.id!r} is empty")
        if self.sample_rate <= 0:
            raise ValueError(f"buffer {self.id!r} has nonpositive sample rate")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError(f"buffer {self.id!r} contains NaN/Inf samples")
        return self

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass
class FeatureMatrix:
    """T x F matrix of log-mel features plus the framing that produced it."""

    frames: np.ndarray
    frame_shift_ms: int
    frame_length_ms: int
    id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ValueError("FeatureMatrix frames must be two-dimensional")

    def validate(self) -> "FeatureMatrix":
        t, f = self.frames.shape
        if t < 1 or f < 1:
            raise ValueError(f"feature matrix {self.id!r} has empty shape {self.frames.shape}")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError(f"feature matrix {self.id!r} contains NaN/Inf")
        return self

    @property
    def shape(self):
        return self.frames.shape


def _read_fmt_chunk(body: bytes):
    if len(body) < 16:
        raise UnsupportedFormatError("fmt chunk too short")
    fmt_tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack_from("<HHIIHH", body, 0)
    if fmt_tag == WAVE_FORMAT_EXTENSIBLE:
        # Sub-format GUID starts with the u16 format code it wraps.
        if len(body) < 26:
            raise UnsupportedFormatError("extensible fmt chunk too short")
        fmt_tag = struct.unpack_from("<H", body, 24)[0]
    return fmt_tag, channels, rate, bits


def load_wav(path, expected_rate: int | None = None, id: str | None = None) -> AudioBuffer:
    """Load a PCM16 or float32 RIFF/WAVE file as a mono AudioBuffer.

    Multichannel files are averaged to mono frame by frame. When
    ``expected_rate`` is given, a differing header rate raises
    SampleRateMismatchError instead of silently passing through.

    Raises:
        FileNotFoundError: missing file.
        UnsupportedFormatError: compressed codecs or unsupported bit depths.
        MalformedHeaderError: not a parsable RIFF/WAVE container.
        SampleRateMismatchError: strict-rate check failed.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = _read_fmt_chunk(body)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise MalformedHeaderError(f"{path}: missing fmt or data chunk")
    fmt_tag, channels, rate, bits = fmt
    if channels < 1:
        raise MalformedHeaderError(f"{path}: zero channels")
    if expected_rate is not None and rate != expected_rate:
        raise SampleRateMismatchError(f"{path}: rate {rate} != required {expected_rate}")

    if fmt_tag == WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif fmt_tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 4], dtype="<f4")
        if raw.size and not np.all(np.isfinite(raw)):
            raise UnsupportedFormatError(f"{path}: float payload contains NaN/Inf")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"{path}: format tag {fmt_tag}, {bits}-bit not supported (PCM16 or float32 only)"
        )

    if channels > 1:
        usable = samples.size - samples.size % channels
        samples = samples[:usable].reshape(-1, channels).mean(axis=1)

    if id is None:
        id = str(path)
    return AudioBuffer(samples=samples, sample_rate=int(rate), id=id)


def save_wav(buffer: AudioBuffer, path, encoding: str = "float32") -> int:
    """Write a mono WAV file; returns the number of hard-clipped samples.

    ``encoding`` is ``"pcm16"`` or ``"float32"``. PCM16 hard-clips samples
    outside [-1, 1] and counts them (a warning is emitted when any clip);
    float32 output reloads bit-identically.
    """
    samples = np.asarray(buffer.samples, dtype=np.float64)
    clipped = 0
    if encoding == "pcm16":
        clipped = int(np.count_nonzero((samples < -1.0) | (samples > 1.0)))
        q = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
        payload = q.tobytes()
        bits, fmt_tag = 16, WAVE_FORMAT_PCM
        if clipped:
            warnings.warn(f"{path}: clipped {clipped} sample(s) for PCM16", ClippingWarning)
    elif encoding == "float32":
        payload = samples.astype("<f4").tobytes()
        bits, fmt_tag = 32, WAVE_FORMAT_IEEE_FLOAT
    else:
        raise ValueError(f"unknown encoding {encoding!r}")

    block_align = bits // 8
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, fmt_tag, 1, buffer.sample_rate,
                    buffer.sample_rate * block_align, block_align, bits),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return clipped


def write_features(m: FeatureMatrix, path) -> None:
    """Serialize a FeatureMatrix to the PMCTFEAT binary format (bit-exact)."""
    m.validate()
    t, f = m.frames.shape
    header = FEATURE_MAGIC + struct.pack(
        "<IIIII", FEATURE_VERSION, t, f, m.frame_shift_ms, m.frame_length_ms
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(m.frames, dtype="<f4").tobytes())


def read_features(path, id: str | None = None) -> FeatureMatrix:
    """Read a PMCTFEAT file written by write_features."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 28 or data[:8] != FEATURE_MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic or truncated header")
    version, t, f, shift_ms, length_ms = struct.unpack_from("<IIIII", data, 8)
    if version != FEATURE_VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {version}")
    expected = 28 + 4 * t * f
    if len(data) != expected:
        raise MalformedHeaderError(f"{path}: expected {expected} bytes, got {len(data)}")
    frames = np.frombuffer(data, dtype="<f4", count=t * f, offset=28).reshape(t, f)
    if id is None:
        id = str(path)
    return FeatureMatrix(frames=frames.copy(), frame_shift_ms=shift_ms,
                         frame_length_ms=length_ms, id=id)
