"""Shared fixtures: a small synthetic corpus on disk for pipeline and CLI tests."""

import json

import numpy as np
import pytest

from pmct.audio_io import AudioBuffer, save_wav


def make_tone(freq_hz, length, rate=16000, amp=0.1):
    t = np.arange(length) / rate
    return amp * np.sin(2.0 * np.pi * freq_hz * t)


def build_corpus(root, n_utts=5, n_rirs=3, n_noises=4, rate=16000, seed=1234):
    """Write a self-contained manifest + pools + audio tree under root.

    Returns a dict of the paths a CLI run needs.
    """
    rng = np.random.default_rng(seed)
    (root / "audio").mkdir(parents=True)
    (root / "rirs").mkdir()
    (root / "noises").mkdir()

    manifest = root / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for i in range(n_utts):
            length = rate + (rate // 10) * i
            sig = make_tone(220.0 * (i + 1), length, rate)
            save_wav(AudioBuffer(sig, rate, f"u{i}"), root / "audio" / f"u{i}.wav",
                     encoding="float32")
            fh.write(json.dumps({"id": f"u{i}", "audio_path": f"audio/u{i}.wav"}) + "\n")

    rir_list = root / "rirs.tsv"
    with open(rir_list, "w", encoding="utf-8") as fh:
        for j in range(n_rirs):
            delay = 11 * j
            taps = np.zeros(160 + delay)
            taps[delay] = 1.0
            tail = len(taps) - delay - 1
            if tail > 0:
                taps[delay + 1:] = 0.25 * rng.normal(size=tail) * np.exp(-np.arange(tail) / 40.0)
            save_wav(AudioBuffer(taps, rate, f"r{j}"), root / "rirs" / f"r{j}.wav",
                     encoding="float32")
            fh.write(f"r{j}\trirs/r{j}.wav\n")

    noise_list = root / "noises.tsv"
    with open(noise_list, "w", encoding="utf-8") as fh:
        for j in range(n_noises):
            length = rate // 2 + 3000 * j
            sig = 0.05 * rng.normal(size=length)
            save_wav(AudioBuffer(sig, rate, f"n{j}"), root / "noises" / f"n{j}.wav",
                     encoding="float32")
            fh.write(f"n{j}\tnoises/n{j}.wav\n")

    return {
        "root": root,
        "manifest": manifest,
        "rir_list": rir_list,
        "noise_list": noise_list,
    }


@pytest.fixture
def corpus(tmp_path):
    return build_corpus(tmp_path / "corpus")
