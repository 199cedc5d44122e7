"""Batch orchestration: per-utterance augmentation, output writing, verify.

Every utterance is processed with its own generator derived from
(seed, id, epoch), so the output tree is a pure function of inputs and
configuration, independent of worker count and processing order. Output
files are written atomically (temp + rename); the provenance sidecar is
assembled in manifest order after all workers finish.

Per-utterance stream layout: resource draws (RIR, noise, SNR) come first,
then the augmenter's draws, then SpecAugment mask draws when enabled. In
clean mode (or the features task) the stream starts at the SpecAugment
draws.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio_io import OPERATING_RATE, AudioBuffer, FeatureMatrix, load_wav, save_wav, write_features
from .config import PROVENANCE_FILENAME, RunConfig
from .corpus import (
    ManifestEntry,
    ResourcePool,
    SeedScheme,
    load_manifest,
    load_pool,
    make_rng,
    resolve_path,
    sample_resources,
)
from .dsp import ImpulseResponse, apply_rir, log_mel_features, noise_component
from .errors import MismatchFoundError, PmctError
from .mamp import _bernoulli, augment_mct, augment_pmct
from .specaugment import apply_specaugment, derive_policy

# Per-process cache of loaded resource files; contents are immutable inputs,
# so caching cannot affect determinism.
_AUDIO_CACHE: dict[str, AudioBuffer] = {}


def _load_cached(path: str, entry_id: str) -> AudioBuffer:
    buf = _AUDIO_CACHE.get(path)
    if buf is None:
        buf = load_wav(path, expected_rate=OPERATING_RATE, id=entry_id)
        _AUDIO_CACHE[path] = buf
    return AudioBuffer(samples=buf.samples, sample_rate=buf.sample_rate, id=entry_id)


@dataclass
class WorkContext:
    """Immutable per-run state shared by all workers."""

    cfg: RunConfig
    rir_pool: ResourcePool | None
    noise_pool: ResourcePool | None
    rir_paths: dict[str, str] = field(default_factory=dict)
    noise_paths: dict[str, str] = field(default_factory=dict)
    task: str = "augment"  # "augment" or "features"


@dataclass
class UtteranceResult:
    id: str
    ok: bool
    error: str | None = None
    clipped: int = 0
    record: dict | None = None


def build_context(cfg: RunConfig, task: str = "augment") -> WorkContext:
    rir_pool = noise_pool = None
    rir_paths: dict[str, str] = {}
    noise_paths: dict[str, str] = {}
    if task == "augment" and cfg.mode in ("pmct", "mct"):
        rir_pool = load_pool(cfg.rir_list, "rir").require_nonempty()
        noise_pool = load_pool(cfg.noise_list, "noise").require_nonempty()
        rir_paths = {rid: resolve_path(p, cfg.root) for rid, p in rir_pool.entries}
        noise_paths = {nid: resolve_path(p, cfg.root) for nid, p in noise_pool.entries}
    return WorkContext(cfg=cfg, rir_pool=rir_pool, noise_pool=noise_pool,
                       rir_paths=rir_paths, noise_paths=noise_paths, task=task)


def _empty_record(entry_id: str) -> dict:
    return {"id": entry_id, "rir_id": None, "noise_id": None, "snr_db": None,
            "pi_effective": None, "patch_len": None, "sources": None}


def augment_one(entry: ManifestEntry, ctx: WorkContext,
                ) -> tuple[AudioBuffer, FeatureMatrix | None, dict]:
    """Run the configured pipeline for one utterance, in memory.

    Returns the output signal, the feature matrix when features are
    requested, and the provenance record.
    """
    cfg = ctx.cfg
    x = load_wav(resolve_path(entry.audio_path, cfg.root),
                 expected_rate=OPERATING_RATE, id=entry.id).validate()
    record = _empty_record(entry.id)

    if ctx.task == "features" or cfg.mode == "clean":
        z = x
        rng = make_rng(cfg.seed, entry.id, cfg.epoch)
    else:
        rir_id, noise_id, snr_db, rng = sample_resources(
            entry, ctx.rir_pool, ctx.noise_pool,
            cfg.mamp.snr_range_db if cfg.mode == "pmct" else cfg.mct.snr_range_db,
            SeedScheme(global_seed=cfg.seed), cfg.epoch)
        h = ImpulseResponse(taps=_load_cached(ctx.rir_paths[rir_id], rir_id).samples, id=rir_id)
        noise = _load_cached(ctx.noise_paths[noise_id], noise_id)
        if cfg.mode == "pmct":
            z, plan = augment_pmct(x, h, noise, cfg.mamp, rng, snr_db=snr_db)
            record.update(rir_id=rir_id, noise_id=noise_id, snr_db=snr_db,
                          pi_effective=plan.pi_effective,
                          patch_len=plan.boundaries[0][1], sources=plan.sources)
        else:
            z, outcome = augment_mct(x, h, noise, cfg.mct, rng, snr_db=snr_db)
            record.update(rir_id=rir_id if outcome.reverb_applied else None,
                          noise_id=noise_id if outcome.noise_applied else None,
                          snr_db=outcome.snr_db)

    feats = None
    if ctx.task == "features" or cfg.output_kind in ("features", "both"):
        feats = log_mel_features(z, cfg.mel)
        if cfg.specaugment_level != "off":
            policy = derive_policy(cfg.base_policy, cfg.specaugment_level)
            feats = apply_specaugment(feats, policy, rng)
    return z, feats, record


def _atomic_write(path: Path, write_fn) -> None:
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    write_fn(tmp)
    os.replace(tmp, path)


def write_outputs(z: AudioBuffer, feats: FeatureMatrix | None,
                  ctx: WorkContext, out_dir: Path) -> int:
    """Write <id>.wav / <id>.feat atomically; returns clipped-sample count."""
    clipped = 0
    write_wav = ctx.task == "augment" and ctx.cfg.output_kind in ("wav", "both")
    if write_wav:
        wav_path = out_dir / f"{z.id}.wav"
        tmp = wav_path.with_name(f"{wav_path.name}.tmp{os.getpid()}")
        clipped = save_wav(z, tmp, encoding=ctx.cfg.encoding)
        os.replace(tmp, wav_path)
    if feats is not None:
        feat_path = out_dir / f"{feats.id}.feat"
        _atomic_write(feat_path, lambda p: write_features(feats, p))
    return clipped


_WORKER_CTX: WorkContext | None = None
_WORKER_OUT: Path | None = None


def _init_worker(ctx: WorkContext, out_dir: Path) -> None:
    global _WORKER_CTX, _WORKER_OUT
    _WORKER_CTX = ctx
    _WORKER_OUT = out_dir


def _run_one(entry: ManifestEntry) -> UtteranceResult:
    try:
        z, feats, record = augment_one(entry, _WORKER_CTX)
        clipped = write_outputs(z, feats, _WORKER_CTX, _WORKER_OUT)
        return UtteranceResult(id=entry.id, ok=True, clipped=clipped, record=record)
    except (PmctError, OSError, ValueError) as exc:
        return UtteranceResult(id=entry.id, ok=False, error=f"{type(exc).__name__}: {exc}")


@dataclass
class BatchSummary:
    total: int
    succeeded: int
    failed: int
    clipped: int
    errors: list[tuple[str, str]] = field(default_factory=list)

    def line(self) -> str:
        return (f"processed {self.succeeded}/{self.total} utterance(s), "
                f"{self.failed} failed, {self.clipped} sample(s) clipped")


def run_batch(cfg: RunConfig, task: str = "augment") -> BatchSummary:
    """Process every manifest entry; write outputs and the sidecar.

    The provenance sidecar is written for the augment task only, one JSON
    line per successful utterance in manifest order.
    """
    entries = load_manifest(cfg.manifest)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not entries:
        warnings.warn("manifest is empty; nothing to do")
        return BatchSummary(total=0, succeeded=0, failed=0, clipped=0)

    ctx = build_context(cfg, task=task)
    results: list[UtteranceResult] = []
    if cfg.workers == 1:
        _init_worker(ctx, out_dir)
        for entry in entries:
            result = _run_one(entry)
            results.append(result)
            if not result.ok and cfg.fail_fast:
                break
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                                 initargs=(ctx, out_dir)) as pool:
            for result in pool.map(_run_one, entries):
                results.append(result)
                if not result.ok and cfg.fail_fast:
                    break

    ok_results = [r for r in results if r.ok]
    if task == "augment":
        records = {r.id: r.record for r in ok_results}
        sidecar = out_dir / PROVENANCE_FILENAME
        _atomic_write(sidecar, lambda p: _write_sidecar(p, entries, records))

    return BatchSummary(
        total=len(entries),
        succeeded=len(ok_results),
        failed=len(results) - len(ok_results),
        clipped=sum(r.clipped for r in ok_results),
        errors=[(r.id, r.error) for r in results if not r.ok],
    )


def _write_sidecar(path, entries: list[ManifestEntry], records: dict[str, dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            record = records.get(entry.id)
            if record is not None:
                fh.write(json.dumps(record) + "\n")


@dataclass
class VerifyReport:
    checked: int
    mismatched: list[str]
    max_snr_error_db: float

    @property
    def passed(self) -> bool:
        return not self.mismatched


def _measured_snr(entry: ManifestEntry, ctx: WorkContext, record: dict) -> float | None:
    """Re-derive the modification stage and measure the realized SNR."""
    cfg = ctx.cfg
    if record.get("noise_id") is None or record.get("snr_db") is None:
        return None
    x = load_wav(resolve_path(entry.audio_path, cfg.root),
                 expected_rate=OPERATING_RATE, id=entry.id)
    snr_range = cfg.mamp.snr_range_db if cfg.mode == "pmct" else cfg.mct.snr_range_db
    rir_id, noise_id, snr_db, rng = sample_resources(
        entry, ctx.rir_pool, ctx.noise_pool, snr_range,
        SeedScheme(global_seed=cfg.seed), cfg.epoch)
    h = ImpulseResponse(taps=_load_cached(ctx.rir_paths[rir_id], rir_id).samples, id=rir_id)
    noise = _load_cached(ctx.noise_paths[noise_id], noise_id)

    if cfg.mode == "pmct":
        y0 = apply_rir(x, h)
    else:
        y0 = apply_rir(x, h) if _bernoulli(rng, cfg.mct.p_reverb) else x
        if not _bernoulli(rng, cfg.mct.p_noise):
            return None
    component = noise_component(y0, noise, snr_db, rng)
    if component is None:
        return None
    p_signal = float(np.mean(np.square(y0.samples)))
    p_noise = float(np.mean(np.square(component)))
    return 10.0 * math.log10(p_signal / p_noise)


def verify_run(cfg: RunConfig, scratch_dir) -> VerifyReport:
    """Recompute a finished augment run and compare byte-for-byte.

    Re-runs every utterance found in the provenance sidecar, writing into
    ``scratch_dir``, and compares output files and provenance records with
    what is on disk. Also measures the realized SNR against the recorded
    value. Raises MismatchFoundError when anything differs.
    """
    out_dir = Path(cfg.out)
    sidecar = out_dir / PROVENANCE_FILENAME
    if not sidecar.is_file():
        raise MismatchFoundError([f"missing sidecar {sidecar}"])
    recorded: dict[str, dict] = {}
    with open(sidecar, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                recorded[record["id"]] = record

    entries = [e for e in load_manifest(cfg.manifest) if e.id in recorded]
    ctx = build_context(cfg, task="augment")
    scratch = Path(scratch_dir)
    scratch.mkdir(parents=True, exist_ok=True)
    _init_worker(ctx, scratch)

    mismatched: list[str] = []
    max_snr_err = 0.0
    for entry in entries:
        result = _run_one(entry)
        if not result.ok:
            mismatched.append(entry.id)
            continue
        if result.record != recorded[entry.id]:
            mismatched.append(entry.id)
            continue
        same = True
        suffixes = []
        if cfg.output_kind in ("wav", "both"):
            suffixes.append(".wav")
        if cfg.output_kind in ("features", "both"):
            suffixes.append(".feat")
        for suffix in suffixes:
            original = out_dir / f"{entry.id}{suffix}"
            recomputed = scratch / f"{entry.id}{suffix}"
            if not original.is_file() or original.read_bytes() != recomputed.read_bytes():
                same = False
        if not same:
            mismatched.append(entry.id)
            continue
        if cfg.mode in ("pmct", "mct"):
            measured = _measured_snr(entry, ctx, recorded[entry.id])
            if measured is not None:
                err = abs(measured - recorded[entry.id]["snr_db"])
                max_snr_err = max(max_snr_err, err)
                if err > 1e-6:
                    mismatched.append(entry.id)

    report = VerifyReport(checked=len(entries), mismatched=mismatched,
                          max_snr_error_db=max_snr_err)
    if mismatched:
        raise MismatchFoundError(mismatched)
    return report
