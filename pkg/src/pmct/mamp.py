"""Patch-based multi-condition augmentation.

The patched augmenter builds a distorted copy of the utterance (RIR
convolution plus noise at a sampled SNR), splits clean and distorted signals
into equal patches, and splices a new signal that takes each patch from the
clean version with probability pi, else from the distorted one. Splices are
hard cuts; no cross-fading.

Normative random-draw order, so independent implementations can agree
bit-exactly given the same generator:

  patched:  SNR draw (skipped when a pre-drawn value is passed in),
            noise crop offset (only when the noise clip is longer than the
            utterance), per-utterance pi draw (only in "rand" mode), then one
            uniform per patch in patch order (clean iff u < pi).
  plain:    reverb decision, noise decision (each consumes a draw only when
            its probability is strictly inside (0, 1)), then SNR draw and
            noise offset exactly as above, only when the noise branch is
            taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .audio_io import AudioBuffer
from .dsp import ImpulseResponse, apply_rir, mix_noise_at_snr

CLEAN = "C"
DISTORTED = "D"


@dataclass
class MampConfig:
    """Hyperparameters of the patched augmenter.

    ``pi_clean`` is the per-patch clean probability, or the string "rand" to
    draw a fresh per-utterance probability from U(0, 1).
    """

    pi_clean: Union[float, str] = 0.5
    patch_len_s: float = 1.0
    snr_range_db: tuple[float, float] = (0.0, 30.0)

    def __post_init__(self):
        if isinstance(self.pi_clean, str):
            if self.pi_clean != "rand":
                raise ValueError(f"pi_clean must be a probability or 'rand', got {self.pi_clean!r}")
        elif not 0.0 <= float(self.pi_clean) <= 1.0:
            raise ValueError(f"pi_clean out of [0, 1]: {self.pi_clean}")
        if self.patch_len_s <= 0:
            raise ValueError(f"patch_len_s must be positive, got {self.patch_len_s}")
        lo, hi = self.snr_range_db
        if not lo <= hi:
            raise ValueError(f"snr range reversed: {self.snr_range_db}")


@dataclass
class MctConfig:
    """Hyperparameters of the plain multi-condition augmenter."""

    p_reverb: float = 0.5
    p_noise: float = 0.5
    snr_range_db: tuple[float, float] = (0.0, 30.0)

    def __post_init__(self):
        for name in ("p_reverb", "p_noise"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {p}")
        lo, hi = self.snr_range_db
        if not lo <= hi:
            raise ValueError(f"snr range reversed: {self.snr_range_db}")


@dataclass
class PatchPlan:
    """Contiguous patch boundaries plus the clean/distorted source labels.

    Doubles as the per-utterance provenance record: after augmentation it
    carries the effective clean probability and the SNR that was applied.
    """

    boundaries: list[tuple[int, int]]
    sources: list[str] | None = None
    pi_effective: float | None = None
    snr_db: float | None = None

    def validate(self) -> "PatchPlan":
        if not self.boundaries:
            raise ValueError("patch plan has no patches")
        pos = 0
        first_len = self.boundaries[0][1]
        for i, (start, length) in enumerate(self.boundaries):
            if start != pos or length < 1:
                raise ValueError(f"patch {i} is not contiguous: start={start}, expected {pos}")
            if i < len(self.boundaries) - 1 and length != first_len:
                raise ValueError(f"non-final patch {i} has length {length} != {first_len}")
            pos += length
        if self.boundaries[-1][1] > first_len:
            raise ValueError("final patch longer than the first")
        if self.sources is not None and len(self.sources) != len(self.boundaries):
            raise ValueError("sources length does not match patch count")
        return self

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.boundaries)


def extract_patch_plan(length: int, patch_len_samples: int) -> PatchPlan:
    """Split ``length`` samples into ceil(length / patch_len) patches.

    All patches except the last have exactly ``patch_len_samples`` samples;
    the last gets the remainder (never longer than the first). A signal
    shorter than one patch yields a single patch covering it entirely.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if patch_len_samples < 1:
        raise ValueError(f"patch_len_samples must be >= 1, got {patch_len_samples}")
    n_patches = math.ceil(length / patch_len_samples)
    boundaries = [(p * patch_len_samples, patch_len_samples) for p in range(n_patches - 1)]
    last_start = (n_patches - 1) * patch_len_samples
    boundaries.append((last_start, length - last_start))
    return PatchPlan(boundaries=boundaries)


def assign_sources(plan: PatchPlan, pi: float, rng: np.random.Generator) -> PatchPlan:
    """Label each patch clean with probability ``pi``, else distorted.

    One uniform is drawn per patch in patch order; a patch is clean iff
    u < pi, which makes raising pi monotone (it can only flip labels from
    distorted to clean under the same draws).
    """
    if not 0.0 <= pi <= 1.0:
        raise ValueError(f"pi out of [0, 1]: {pi}")
    sources = [CLEAN if rng.random() < pi else DISTORTED for _ in plan.boundaries]
    return replace(plan, sources=sources, pi_effective=pi)


def splice_patches(x: AudioBuffer, y: AudioBuffer, plan: PatchPlan) -> AudioBuffer:
    """Assemble the output: clean patches copied from x, distorted from y."""
    if plan.sources is None:
        raise ValueError("patch plan has no source labels")
    if len(x) != len(y) or plan.total_length != len(x):
        raise ValueError("signal lengths and patch plan disagree")
    z = x.samples.copy()
    for (start, length), source in zip(plan.boundaries, plan.sources):
        if source == DISTORTED:
            z[start:start + length] = y.samples[start:start + length]
    return AudioBuffer(samples=z, sample_rate=x.sample_rate, id=x.id)


def _bernoulli(rng: np.random.Generator, p: float) -> bool:
    # Degenerate probabilities short-circuit without consuming a draw, so an
    # all-on plain run shares its stream prefix with the patched pipeline.
    if p <= 0.0:
        return False
    if p >= 1.0:
        return True
    return bool(rng.random() < p)


def augment_pmct(x: AudioBuffer, h: ImpulseResponse, noise: AudioBuffer,
                 cfg: MampConfig, rng: np.random.Generator,
                 snr_db: float | None = None) -> tuple[AudioBuffer, PatchPlan]:
    """Patched multi-condition augmentation of one utterance.

    Builds the distorted signal y (reverberation already delay-aligned, then
    noise at the target SNR) and splices patches of x and y per the sampled
    plan. Pass ``snr_db`` to reuse an SNR drawn upstream; otherwise one is
    drawn from cfg.snr_range_db. Returns the augmented signal and the patch
    plan with provenance fields filled in.
    """
    x.validate()
    noise.validate()
    if snr_db is None:
        snr_db = float(rng.uniform(*cfg.snr_range_db))
    y = mix_noise_at_snr(apply_rir(x, h), noise, snr_db, rng)

    pi = float(rng.random()) if cfg.pi_clean == "rand" else float(cfg.pi_clean)
    patch_samples = int(round(cfg.patch_len_s * x.sample_rate))
    if patch_samples < 1:
        raise ValueError(f"patch_len_s {cfg.patch_len_s} is under one sample at {x.sample_rate} Hz")
    plan = assign_sources(extract_patch_plan(len(x), patch_samples), pi, rng)
    plan.snr_db = snr_db
    z = splice_patches(x, y, plan)
    return z, plan


@dataclass
class MctOutcome:
    """Which branches a plain multi-condition run actually took."""

    reverb_applied: bool
    noise_applied: bool
    snr_db: float | None = None


def augment_mct(x: AudioBuffer, h: ImpulseResponse, noise: AudioBuffer,
                cfg: MctConfig, rng: np.random.Generator,
                snr_db: float | None = None) -> tuple[AudioBuffer, MctOutcome]:
    """Plain multi-condition augmentation: maybe reverb, maybe noise.

    The two decisions are independent; SNR and noise offset are only drawn
    when the noise branch is taken. With both probabilities at 1 the output
    equals the modification stage of the patched augmenter bit-for-bit under
    the same generator state. Returns the signal and the branch outcome for
    provenance.
    """
    x.validate()
    noise.validate()
    out = x
    reverb = _bernoulli(rng, cfg.p_reverb)
    if reverb:
        out = apply_rir(out, h)
    add_noise = _bernoulli(rng, cfg.p_noise)
    if add_noise:
        if snr_db is None:
            snr_db = float(rng.uniform(*cfg.snr_range_db))
        out = mix_noise_at_snr(out, noise, snr_db, rng)
    if out is x:
        out = AudioBuffer(samples=x.samples.copy(), sample_rate=x.sample_rate, id=x.id)
    return out, MctOutcome(reverb_applied=reverb, noise_applied=add_noise,
                           snr_db=snr_db if add_noise else None)
