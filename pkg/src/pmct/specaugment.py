"""Adaptive SpecAugment masking with High/Mid/Low policy scaling.

The adaptive variant scales the number of time masks with the utterance
length. Mid and Low policies are derived from the base (High) policy by
dividing all four masking parameters by 2 and 4: integer parameters floor,
ratio parameters divide exactly. Time warping is out of scope.

Draw order per mask (normative): width first, then start. The start is
always drawn, even for zero-width masks, so replaying the documented
sequence reproduces the generator state exactly. Frequency masks come
before time masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .audio_io import FeatureMatrix

LEVELS = ("high", "mid", "low")
MASK_VALUES = ("zero", "mean")


@dataclass
class SpecAugmentPolicy:
    """Masking parameters: counts/widths for frequency, ratios for time.

    ``time_mask_ratio`` controls the adaptive multiplicity
    (floor(ratio * T) masks) and ``time_mask_max_ratio`` the maximum width of
    a single time mask as a fraction of T. ``mask_value`` is "zero" or "mean"
    (per-utterance mean of the feature matrix).
    """

    n_freq_masks: int
    freq_mask_max: int
    time_mask_ratio: float
    time_mask_max_ratio: float
    mask_value: str = "zero"

    def __post_init__(self):
        if self.n_freq_masks < 0 or self.freq_mask_max < 0:
            raise ValueError("mask counts/widths must be >= 0")
        for name in ("time_mask_ratio", "time_mask_max_ratio"):
            r = getattr(self, name)
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {r}")
        if self.mask_value not in MASK_VALUES:
            raise ValueError(f"mask_value must be one of {MASK_VALUES}, got {self.mask_value!r}")


def derive_policy(base: SpecAugmentPolicy, level: str) -> SpecAugmentPolicy:
    """Scale a base policy down: high = unchanged, mid = /2, low = /4."""
    level = level.lower()
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    divisor = {"high": 1, "mid": 2, "low": 4}[level]
    if divisor == 1:
        return replace(base)
    return replace(
        base,
        n_freq_masks=base.n_freq_masks // divisor,
        freq_mask_max=base.freq_mask_max // divisor,
        time_mask_ratio=base.time_mask_ratio / divisor,
        time_mask_max_ratio=base.time_mask_max_ratio / divisor,
    )


def apply_specaugment(m: FeatureMatrix, policy: SpecAugmentPolicy,
                      rng: np.random.Generator) -> FeatureMatrix:
    """Mask random frequency bands and time chunks of a feature matrix.

    Frequency masks: ``n_freq_masks`` masks of width U{0..freq_mask_max}
    (capped at F) starting uniformly so the mask fits. Time masks:
    floor(time_mask_ratio * T) masks of width U{0..floor(time_mask_max_ratio
    * T)}. Cells outside every mask are returned unchanged.
    """
    m.validate()
    t_dim, f_dim = m.frames.shape
    out = m.frames.copy()
    fill = np.float32(0.0) if policy.mask_value == "zero" else np.float32(m.frames.mean())

    f_width_max = min(policy.freq_mask_max, f_dim)
    for _ in range(policy.n_freq_masks):
        width = int(rng.integers(0, f_width_max + 1))
        start = int(rng.integers(0, f_dim - width + 1))
        out[:, start:start + width] = fill

    n_time_masks = math.floor(policy.time_mask_ratio * t_dim)
    t_width_max = min(math.floor(policy.time_mask_max_ratio * t_dim), t_dim)
    for _ in range(n_time_masks):
        width = int(rng.integers(0, t_width_max + 1))
        start = int(rng.integers(0, t_dim - width + 1))
        out[start:start + width, :] = fill

    return FeatureMatrix(frames=out, frame_shift_ms=m.frame_shift_ms,
                         frame_length_ms=m.frame_length_ms, id=m.id)
