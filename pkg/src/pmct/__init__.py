"""Deterministic audio augmentation for robust ASR training data.

Core pieces: patched multi-condition augmentation (clean/distorted patch
mixing over reverberated, noise-added speech), the plain multi-condition
baseline, adaptive SpecAugment masking, deterministic per-utterance seeding,
and the attention eigenvalue-skewness metric.
"""

__version__ = "0.1.0"

from .audio_io import AudioBuffer, FeatureMatrix, load_wav, read_features, save_wav, write_features
from .attention import (
    AttentionTensorSet,
    SkewnessReport,
    eigen_spectrum,
    eq2_score,
    read_attention,
    relative_drop,
    skewness,
    write_attention,
)
from .config import RunConfig, build_run_config
from .corpus import (
    ManifestEntry,
    ResourcePool,
    SeedScheme,
    derive_seed,
    load_manifest,
    load_pool,
    make_rng,
    sample_resources,
)
from .dsp import (
    ImpulseResponse,
    MelConfig,
    apply_rir,
    direct_path_delay,
    log_mel_features,
    mix_noise_at_snr,
    noise_component,
)
from .mamp import (
    CLEAN,
    DISTORTED,
    MampConfig,
    MctConfig,
    MctOutcome,
    PatchPlan,
    assign_sources,
    augment_mct,
    augment_pmct,
    extract_patch_plan,
    splice_patches,
)
from .specaugment import SpecAugmentPolicy, apply_specaugment, derive_policy

__all__ = [
    "AudioBuffer",
    "FeatureMatrix",
    "load_wav",
    "save_wav",
    "read_features",
    "write_features",
    "ImpulseResponse",
    "MelConfig",
    "direct_path_delay",
    "apply_rir",
    "mix_noise_at_snr",
    "noise_component",
    "log_mel_features",
    "MampConfig",
    "MctConfig",
    "MctOutcome",
    "PatchPlan",
    "CLEAN",
    "DISTORTED",
    "extract_patch_plan",
    "assign_sources",
    "splice_patches",
    "augment_pmct",
    "augment_mct",
    "SpecAugmentPolicy",
    "derive_policy",
    "apply_specaugment",
    "ManifestEntry",
    "ResourcePool",
    "SeedScheme",
    "load_manifest",
    "load_pool",
    "derive_seed",
    "make_rng",
    "sample_resources",
    "AttentionTensorSet",
    "SkewnessReport",
    "eigen_spectrum",
    "skewness",
    "eq2_score",
    "relative_drop",
    "read_attention",
    "write_attention",
    "RunConfig",
    "build_run_config",
    "__version__",
]
