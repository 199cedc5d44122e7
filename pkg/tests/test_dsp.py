"""Convolution, alignment, SNR mixing, and log-mel frontend tests.

The convolution reference here is a plain shift-and-add loop over the taps,
written independently of the library path, so both the direct and the FFT
implementations are checked against third arithmetic.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmct.audio_io import AudioBuffer
from pmct.dsp import (
    ImpulseResponse,
    MelConfig,
    apply_rir,
    direct_path_delay,
    hz_to_mel,
    log_mel_features,
    mel_filterbank,
    mel_to_hz,
    mix_noise_at_snr,
    noise_component,
)
from pmct.errors import (
    EmptyImpulseError,
    EmptyInputError,
    NonFiniteError,
    SilentNoiseError,
    SilentSignalWarning,
    TooShortError,
)


def conv_full_oracle(x, h):
    """Reference full convolution: shift-and-add, one pass per tap."""
    out = np.zeros(len(x) + len(h) - 1)
    for m, tap in enumerate(h):
        out[m:m + len(x)] += tap * x
    return out


def rng_state(rng):
    # full state dict, including the 32-bit buffer fields
    return rng.bit_generator.state


# ---------------------------------------------------------------- impulse


def test_impulse_response_direct_path_index():
    h = ImpulseResponse([0.1, -0.9, 0.3], id="h")
    assert direct_path_delay(h) == 1
    # ties resolve to the earliest tap
    tie = ImpulseResponse([0.5, -0.5, 0.2])
    assert tie.direct_path_index == 0


def test_impulse_response_rejections():
    with pytest.raises(EmptyImpulseError):
        ImpulseResponse(np.array([]))
    with pytest.raises(EmptyImpulseError):
        ImpulseResponse(np.zeros(8))
    with pytest.raises(NonFiniteError):
        ImpulseResponse([1.0, np.nan])


# ------------------------------------------------------------- convolution


def test_apply_rir_matches_oracle_direct_and_fft():
    rng = np.random.default_rng(11)
    for n, m in [(50, 3), (128, 64), (400, 200), (1000, 333)]:
        x = AudioBuffer(rng.normal(size=n), 16000, "x")
        taps = rng.normal(size=m)
        h = ImpulseResponse(taps)
        d = h.direct_path_index
        expected = conv_full_oracle(x.samples, taps)[d:d + n]
        for method in ("direct", "fft"):
            got = apply_rir(x, h, method=method)
            assert np.max(np.abs(got.samples - expected)) < 1e-6
            assert len(got) == n


def test_apply_rir_auto_dispatch_agrees():
    rng = np.random.default_rng(12)
    x = AudioBuffer(rng.normal(size=3000), 16000, "x")
    short = ImpulseResponse(rng.normal(size=128))
    long = ImpulseResponse(rng.normal(size=129))
    # short kernels hit the direct path, long ones the fft path
    assert np.array_equal(apply_rir(x, short).samples, apply_rir(x, short, "direct").samples)
    assert np.array_equal(apply_rir(x, long).samples, apply_rir(x, long, "fft").samples)
    with pytest.raises(ValueError):
        apply_rir(x, short, method="dft")


def test_apply_rir_single_tap_alignment():
    rng = np.random.default_rng(13)
    x = AudioBuffer(rng.normal(size=2000), 16000, "x")
    for delay in (0, 7, 511):
        taps = np.zeros(delay + 1)
        taps[delay] = 0.8
        got = apply_rir(x, ImpulseResponse(taps))
        assert np.max(np.abs(got.samples - 0.8 * x.samples)) <= 1e-9


def test_apply_rir_empty_signal():
    with pytest.raises(EmptyInputError):
        apply_rir(AudioBuffer(np.array([]), 16000), ImpulseResponse([1.0]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.integers(1, 60), st.integers(0, 2 ** 31 - 1))
def test_apply_rir_oracle_property(n, m, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    taps = rng.normal(size=m)
    if not np.any(taps):
        taps[0] = 1.0
    h = ImpulseResponse(taps)
    expected = conv_full_oracle(x, taps)[h.direct_path_index:h.direct_path_index + n]
    got = apply_rir(AudioBuffer(x, 16000), h, method="fft")
    assert np.max(np.abs(got.samples - expected)) < 1e-6


# -------------------------------------------------------------- snr mixing


def measured_snr_db(signal, mixture):
    noise = mixture - signal
    return 10.0 * math.log10(np.mean(signal ** 2) / np.mean(noise ** 2))


def test_mix_noise_hits_target_snr():
    rng = np.random.default_rng(20)
    y = AudioBuffer(rng.normal(size=4000), 16000, "y")
    noise = AudioBuffer(rng.normal(size=9000), 16000, "n")
    for target in (0.0, 5.5, 17.25, 30.0):
        mixed = mix_noise_at_snr(y, noise, target, np.random.default_rng(5))
        assert abs(measured_snr_db(y.samples, mixed.samples) - target) < 1e-6
        assert len(mixed) == len(y)


def test_noise_longer_uses_one_crop_draw():
    y = AudioBuffer(np.ones(100), 16000, "y")
    noise = AudioBuffer(np.arange(1, 251, dtype=float), 16000, "n")
    rng_a = np.random.default_rng(7)
    rng_b = np.random.default_rng(7)
    noise_component(y, noise, 10.0, rng_a)
    rng_b.integers(0, 151)  # the single offset draw
    assert rng_state(rng_a) == rng_state(rng_b)


def test_noise_shorter_tiles_without_draws():
    y = AudioBuffer(np.ones(100), 16000, "y")
    noise = AudioBuffer(np.array([0.5, -0.25, 0.125]), 16000, "n")
    rng_a = np.random.default_rng(8)
    state_before = rng_state(rng_a)
    comp = noise_component(y, noise, 0.0, rng_a)
    assert rng_state(rng_a) == state_before
    # tiling repeats the clip end to end, then cuts at the signal length
    base = np.tile(noise.samples, 34)[:100]
    assert np.allclose(comp, comp[0] / base[0] * base)


def test_equal_length_noise_is_identity_alignment():
    rng = np.random.default_rng(9)
    y = AudioBuffer(rng.normal(size=64), 16000, "y")
    noise = AudioBuffer(rng.normal(size=64), 16000, "n")
    comp = noise_component(y, noise, 0.0, np.random.default_rng(0))
    # at 0 dB the scaled noise has the same power as the signal
    assert abs(np.mean(comp ** 2) - np.mean(y.samples ** 2)) < 1e-12
    ratio = comp / noise.samples
    assert np.allclose(ratio, ratio[0])


def test_silent_signal_warns_and_skips_before_any_draw():
    y = AudioBuffer(np.zeros(50), 16000, "quiet")
    noise = AudioBuffer(np.arange(1, 201, dtype=float), 16000, "n")
    rng = np.random.default_rng(10)
    state_before = rng_state(rng)
    with pytest.warns(SilentSignalWarning):
        comp = noise_component(y, noise, 12.0, rng)
    assert comp is None
    assert rng_state(rng) == state_before
    with pytest.warns(SilentSignalWarning):
        out = mix_noise_at_snr(y, noise, 12.0, np.random.default_rng(10))
    assert np.array_equal(out.samples, y.samples)


def test_silent_noise_segment_raises():
    y = AudioBuffer(np.ones(10), 16000, "y")
    noise = AudioBuffer(np.zeros(10), 16000, "z")
    with pytest.raises(SilentNoiseError):
        noise_component(y, noise, 10.0, np.random.default_rng(0))


def test_mix_rejects_empty_and_nonfinite_snr():
    y = AudioBuffer(np.ones(10), 16000)
    with pytest.raises(EmptyInputError):
        noise_component(AudioBuffer(np.array([]), 16000), y, 0.0, np.random.default_rng(0))
    with pytest.raises(NonFiniteError):
        noise_component(y, y, float("nan"), np.random.default_rng(0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 30), st.integers(0, 2 ** 31 - 1), st.integers(32, 300),
       st.integers(16, 500))
def test_mix_snr_property(target, seed, n_sig, n_noise):
    rng = np.random.default_rng(seed)
    y = AudioBuffer(rng.normal(size=n_sig) + 0.1, 16000, "y")
    noise = AudioBuffer(rng.normal(size=n_noise) + 0.05, 16000, "n")
    mixed = mix_noise_at_snr(y, noise, target, np.random.default_rng(seed))
    assert abs(measured_snr_db(y.samples, mixed.samples) - target) < 1e-6


# ----------------------------------------------------------------- log-mel


def test_mel_scale_known_points():
    assert abs(float(hz_to_mel(700.0)) - 781.172838748031) < 1e-9
    assert abs(float(hz_to_mel(1000.0)) - 999.985537139624) < 1e-9
    assert float(hz_to_mel(0.0)) == 0.0
    for f in (0.0, 120.0, 700.0, 4000.0, 7999.0):
        assert abs(float(mel_to_hz(hz_to_mel(f))) - f) < 1e-8


def test_mel_filterbank_shape_and_peaks():
    cfg = MelConfig()
    fb = mel_filterbank(cfg, 16000, 512)
    assert fb.shape == (80, 257)
    assert np.all(fb >= 0.0)
    # peak-1 triangles: no bin weight can exceed 1, and wide (high) triangles
    # sample close to their apex; narrow low ones may miss it between bins
    assert np.all(fb <= 1.0 + 1e-12)
    assert np.all(fb.max(axis=1) > 0.0)
    assert np.all(fb[40:].max(axis=1) > 0.8)


def test_log_mel_shapes_and_flooring():
    cfg = MelConfig()
    one_second = AudioBuffer(np.random.default_rng(0).normal(size=16000), 16000, "u")
    feats = log_mel_features(one_second, cfg)
    assert feats.shape == (98, 80)
    assert feats.frames.dtype == np.float32
    assert feats.frame_shift_ms == 10 and feats.frame_length_ms == 25

    silence = AudioBuffer(np.zeros(800), 16000, "s")
    floored = log_mel_features(silence, cfg)
    assert np.allclose(floored.frames, np.float32(np.log(1e-10)))


def test_log_mel_frame_count_formula():
    cfg = MelConfig()
    for n in (400, 401, 559, 560, 561, 16000, 16159, 16160):
        feats = log_mel_features(AudioBuffer(np.ones(n), 16000, "t"), cfg)
        assert feats.shape[0] == 1 + (n - 400) // 160


def test_log_mel_too_short():
    with pytest.raises(TooShortError):
        log_mel_features(AudioBuffer(np.ones(399), 16000, "tiny"), MelConfig())


def test_log_mel_deterministic():
    x = AudioBuffer(np.sin(np.arange(8000) * 0.01), 16000, "d")
    a = log_mel_features(x)
    b = log_mel_features(x)
    assert np.array_equal(a.frames, b.frames)
