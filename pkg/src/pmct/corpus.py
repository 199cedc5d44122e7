"""Manifest and resource-pool ingestion plus deterministic per-utterance RNG.

Each utterance gets its own generator seeded from a stable 64-bit hash of
(global seed, utterance id, epoch), so augmentation draws are independent of
processing order and vary across epochs while staying reproducible.

Published derivation, for implementations in other languages:
    seed64 = little-endian u64 from the first 8 bytes of
             SHA-256(utf8("<global_seed>:<utterance_id>:<epoch>"))
streams are numpy PCG64 generators seeded with that integer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DuplicateIdError, EmptyPoolError, ManifestParseError


@dataclass
class ManifestEntry:
    """One utterance: unique id, audio path, optional transcript/duration."""

    id: str
    audio_path: str
    transcript: str | None = None
    duration_s: float | None = None


@dataclass
class ResourcePool:
    """A named list of (id, path) resources, either RIRs or noise clips."""

    kind: str  # "rir" or "noise"
    entries: list[tuple[str, str]]

    @property
    def count(self) -> int:
        return len(self.entries)

    def require_nonempty(self) -> "ResourcePool":
        if not self.entries:
            raise EmptyPoolError(f"{self.kind} pool is empty")
        return self


@dataclass
class SeedScheme:
    """Global seed plus the epoch used when deriving per-utterance streams."""

    global_seed: int = 0


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a JSON-lines manifest: one {id, audio_path, ...} object per line.

    Entries come back in file order. Blank lines are skipped; a duplicate id
    or an unparsable line raises with its line number.
    """
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestParseError(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ManifestParseError(line_no, "expected a JSON object")
            if "id" not in obj or "audio_path" not in obj:
                raise ManifestParseError(line_no, "missing required key 'id' or 'audio_path'")
            entry_id = str(obj["id"])
            audio_path = str(obj["audio_path"])
            if not audio_path:
                raise ManifestParseError(line_no, "audio_path is empty")
            if entry_id in seen:
                raise DuplicateIdError(line_no, entry_id)
            seen.add(entry_id)
            duration = obj.get("duration_s")
            entries.append(ManifestEntry(
                id=entry_id,
                audio_path=audio_path,
                transcript=obj.get("transcript"),
                duration_s=float(duration) if duration is not None else None,
            ))
    return entries


def load_pool(path, kind: str) -> ResourcePool:
    """Read a pool list: one "id<TAB>path" per line, blank lines skipped."""
    entries: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ManifestParseError(line_no, "expected 'id<TAB>path'")
            rid, rpath = line.split("\t", 1)
            if not rid or not rpath:
                raise ManifestParseError(line_no, "empty id or path")
            entries.append((rid, rpath))
    return ResourcePool(kind=kind, entries=entries)


def resolve_path(path: str, root: str | None) -> str:
    """Resolve a manifest/pool path against the corpus root when relative."""
    p = Path(path)
    if p.is_absolute() or root is None:
        return str(p)
    return str(Path(root) / p)


def derive_seed(global_seed: int, utterance_id: str, epoch: int) -> int:
    """Stable 64-bit per-utterance seed; see the module docstring."""
    key = f"{global_seed}:{utterance_id}:{epoch}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def make_rng(global_seed: int, utterance_id: str, epoch: int) -> np.random.Generator:
    """Per-utterance PCG64 generator derived from the stable hash."""
    return np.random.Generator(np.random.PCG64(derive_seed(global_seed, utterance_id, epoch)))


def sample_resources(entry: ManifestEntry, rir_pool: ResourcePool, noise_pool: ResourcePool,
                     snr_range_db: tuple[float, float], seed: SeedScheme, epoch: int,
                     ) -> tuple[str, str, float, np.random.Generator]:
    """Draw this utterance's RIR, noise clip, and SNR from its own stream.

    Draw order: RIR index, noise index, SNR. The returned generator is left
    positioned for the augmenter's downstream draws (noise offset, pi, patch
    sources).
    """
    rir_pool.require_nonempty()
    noise_pool.require_nonempty()
    rng = make_rng(seed.global_seed, entry.id, epoch)
    rir_id, _ = rir_pool.entries[int(rng.integers(0, rir_pool.count))]
    noise_id, _ = noise_pool.entries[int(rng.integers(0, noise_pool.count))]
    snr_db = float(rng.uniform(*snr_range_db))
    return rir_id, noise_id, snr_db, rng
