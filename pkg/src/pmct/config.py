"""Run configuration: flat key=value files layered under CLI flags.

Values are resolved in precedence order: CLI flags, then the PMCT_SEED
environment variable (for the seed only), then the user config file, then
the packaged defaults in data/default.cfg.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dsp import MelConfig
from .errors import ConfigError
from .mamp import MampConfig, MctConfig
from .specaugment import LEVELS, SpecAugmentPolicy

MODES = ("pmct", "mct", "clean")
OUTPUT_KINDS = ("wav", "features", "both")
SPECAUGMENT_CHOICES = ("off",) + LEVELS

PROVENANCE_FILENAME = "provenance.jsonl"


def parse_flat_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse "key = value" lines; blank lines and #-comment lines ignored."""
    values: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source} line {line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config_file(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_flat_config(fh.read(), source=str(path))


def packaged_defaults() -> dict[str, str]:
    text = resources.files("pmct").joinpath("data/default.cfg").read_text(encoding="utf-8")
    return parse_flat_config(text, source="data/default.cfg")


@dataclass
class RunConfig:
    """Everything one augmentation run needs, validated up front."""

    mode: str = "pmct"
    mamp: MampConfig = field(default_factory=MampConfig)
    mct: MctConfig = field(default_factory=MctConfig)
    specaugment_level: str = "off"
    base_policy: SpecAugmentPolicy | None = None
    mel: MelConfig = field(default_factory=MelConfig)
    manifest: str | None = None
    rir_list: str | None = None
    noise_list: str | None = None
    root: str | None = None
    out: str | None = None
    seed: int = 0
    epoch: int = 0
    output_kind: str = "wav"
    encoding: str = "float32"
    workers: int = 1
    fail_fast: bool = False

    def validate(self, require_io: bool = True, require_pools: bool = True) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.output_kind not in OUTPUT_KINDS:
            raise ConfigError(f"output_kind must be one of {OUTPUT_KINDS}, got {self.output_kind!r}")
        if self.encoding not in ("float32", "pcm16"):
            raise ConfigError(f"encoding must be float32 or pcm16, got {self.encoding!r}")
        if self.specaugment_level not in SPECAUGMENT_CHOICES:
            raise ConfigError(
                f"specaugment must be one of {SPECAUGMENT_CHOICES}, got {self.specaugment_level!r}"
            )
        if self.specaugment_level != "off" and self.base_policy is None:
            raise ConfigError("specaugment enabled but no base policy configured")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.epoch < 0:
            raise ConfigError(f"epoch must be >= 0, got {self.epoch}")
        if require_io:
            if not self.manifest:
                raise ConfigError("no manifest given")
            if not Path(self.manifest).is_file():
                raise ConfigError(f"manifest not found: {self.manifest}")
            if not self.out:
                raise ConfigError("no output directory given")
            if self.root is not None and not Path(self.root).is_dir():
                raise ConfigError(f"root is not a directory: {self.root}")
            if require_pools and self.mode in ("pmct", "mct"):
                for name, value in (("rir-list", self.rir_list), ("noise-list", self.noise_list)):
                    if not value:
                        raise ConfigError(f"mode {self.mode} requires --{name}")
                    if not Path(value).is_file():
                        raise ConfigError(f"{name} not found: {value}")
        return self


def _get(values: dict[str, str], key: str, convert, context: str):
    try:
        return convert(values[key])
    except KeyError:
        raise ConfigError(f"missing config key {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r} in {context}: {values[key]!r}") from exc


def _to_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(raw)


def _to_pi(raw: str):
    return raw if raw == "rand" else float(raw)


def build_run_config(flag_values: dict, config_path: str | None = None,
                     env: dict | None = None) -> RunConfig:
    """Merge packaged defaults, a config file, env, and CLI flags.

    ``flag_values`` maps config keys to already-typed values (None meaning
    the flag was not given).
    """
    env = os.environ if env is None else env
    values = packaged_defaults()
    if config_path is not None:
        if not Path(config_path).is_file():
            raise ConfigError(f"config file not found: {config_path}")
        values.update(load_config_file(config_path))

    if flag_values.get("seed") is None and "PMCT_SEED" in env:
        try:
            values["seed"] = str(int(env["PMCT_SEED"]))
        except ValueError:
            raise ConfigError(f"PMCT_SEED is not an integer: {env['PMCT_SEED']!r}") from None

    for key, value in flag_values.items():
        if value is not None:
            values[key] = str(value)

    ctx = config_path or "defaults"
    try:
        mamp = MampConfig(
            pi_clean=_get(values, "pi", _to_pi, ctx),
            patch_len_s=_get(values, "patch_len", float, ctx),
            snr_range_db=(_get(values, "snr_lo", float, ctx), _get(values, "snr_hi", float, ctx)),
        )
        mct = MctConfig(
            p_reverb=_get(values, "p_reverb", float, ctx),
            p_noise=_get(values, "p_noise", float, ctx),
            snr_range_db=(_get(values, "snr_lo", float, ctx), _get(values, "snr_hi", float, ctx)),
        )
        policy = SpecAugmentPolicy(
            n_freq_masks=_get(values, "sa_n_freq_masks", int, ctx),
            freq_mask_max=_get(values, "sa_freq_mask_max", int, ctx),
            time_mask_ratio=_get(values, "sa_time_mask_ratio", float, ctx),
            time_mask_max_ratio=_get(values, "sa_time_mask_max_ratio", float, ctx),
            mask_value=_get(values, "sa_mask_value", str, ctx),
        )
        mel = MelConfig(
            frame_length_ms=_get(values, "frame_length_ms", int, ctx),
            frame_shift_ms=_get(values, "frame_shift_ms", int, ctx),
            n_mels=_get(values, "n_mels", int, ctx),
        )
        cfg = RunConfig(
            mode=_get(values, "mode", str, ctx),
            mamp=mamp,
            mct=mct,
            specaugment_level=_get(values, "specaugment", str, ctx),
            base_policy=policy,
            mel=mel,
            manifest=values.get("manifest"),
            rir_list=values.get("rir_list"),
            noise_list=values.get("noise_list"),
            root=values.get("root"),
            out=values.get("out"),
            seed=_get(values, "seed", int, ctx),
            epoch=_get(values, "epoch", int, ctx),
            output_kind=_get(values, "output_kind", str, ctx),
            encoding=_get(values, "encoding", str, ctx),
            workers=_get(values, "workers", int, ctx),
            fail_fast=_get(values, "fail_fast", _to_bool, ctx),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
