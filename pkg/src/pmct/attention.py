"""Eigenvalue-skewness analysis of self-attention maps.

For each attention map A the spectrum of the covariance matrix A A^T is
reduced to its skewness; averaging over layers, heads, and utterances gives
a single score per model. Comparing two models reports the relative drop
(S_m - S_p) / S_m. Attention tensors are read from files so the analysis
stays model-agnostic.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateVectorError,
    EigenFailureError,
    InconsistentShapeError,
    MalformedHeaderError,
    NonFiniteError,
)

ATTENTION_MAGIC = b"PMCTATTN"
ATTENTION_VERSION = 1
ROW_SUM_TOL = 1e-4
# Eigenvalues of A A^T more negative than this fraction of the largest one
# indicate a real numerical problem rather than round-off.
NEGATIVE_EIG_TOL = 1e-12


@dataclass
class AttentionTensorSet:
    """Per-utterance attention maps, indexed [layer, head] as T x T matrices."""

    utterance_id: str
    maps: np.ndarray  # shape (L, H, T, T)

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=np.float64)
        if self.maps.ndim != 4 or self.maps.shape[2] != self.maps.shape[3]:
            raise ValueError(f"maps must be (L, H, T, T), got {self.maps.shape}")

    def validate(self) -> "AttentionTensorSet":
        l_dim, h_dim, t_dim, _ = self.maps.shape
        if l_dim < 1 or h_dim < 1 or t_dim < 1:
            raise ValueError(f"{self.utterance_id!r}: empty attention tensor {self.maps.shape}")
        if not np.all(np.isfinite(self.maps)):
            raise NonFiniteError(f"{self.utterance_id!r}: attention maps contain NaN/Inf")
        if np.any(self.maps < 0):
            raise ValueError(f"{self.utterance_id!r}: attention rows must be nonnegative")
        row_sums = self.maps.sum(axis=3)
        if np.max(np.abs(row_sums - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"{self.utterance_id!r}: attention rows do not sum to 1")
        return self

    @property
    def n_layers(self) -> int:
        return self.maps.shape[0]

    @property
    def n_heads(self) -> int:
        return self.maps.shape[1]


@dataclass
class SkewnessReport:
    """Aggregated skewness scores for one model over a dataset."""

    per_utterance: dict[str, float]
    dataset_mean: float | None
    per_layer_head: np.ndarray  # (L, H) mean over included utterances
    excluded: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dataset_mean": self.dataset_mean,
            "per_utterance": dict(self.per_utterance),
            "per_layer_head": self.per_layer_head.tolist(),
            "excluded": list(self.excluded),
        }


def eigen_spectrum(a: np.ndarray) -> np.ndarray:
    """Absolute eigenvalues of A A^T, sorted descending.

    A A^T is symmetric PSD, so tiny negative eigenvalues (within
    1e-12 * lambda_max of zero) are round-off and get clamped to 0 before
    the absolute value is taken.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains NaN/Inf")
    try:
        eigvals = np.linalg.eigvalsh(a @ a.T)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(str(exc)) from exc
    lam_max = float(np.max(eigvals)) if eigvals.size else 0.0
    clamp = NEGATIVE_EIG_TOL * max(lam_max, 0.0)
    eigvals = np.where((eigvals < 0) & (eigvals > -clamp), 0.0, eigvals)
    return np.sort(np.abs(eigvals))[::-1]


def skewness(v: np.ndarray) -> float:
    """Fisher-Pearson moment coefficient g1 = m3 / m2^(3/2)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        raise ValueError(f"need at least 2 values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("vector contains NaN/Inf")
    centered = v - v.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        raise DegenerateVectorError("constant vector has undefined skewness")
    m3 = float(np.mean(centered ** 3))
    return m3 / m2 ** 1.5


def utterance_score(tensors: AttentionTensorSet) -> tuple[float, np.ndarray]:
    """Mean skewness over all (layer, head) spectra of one utterance.

    Returns the scalar score and the (L, H) grid of per-map skewness values.
    Raises DegenerateVectorError if any map's spectrum is constant.
    """
    l_dim, h_dim = tensors.n_layers, tensors.n_heads
    grid = np.empty((l_dim, h_dim))
    for l in range(l_dim):
        for h in range(h_dim):
            grid[l, h] = skewness(eigen_spectrum(tensors.maps[l, h]))
    score = math.fsum(grid.ravel().tolist()) / (l_dim * h_dim)
    return score, grid


def eq2_score(collection: list[AttentionTensorSet]) -> SkewnessReport:
    """Dataset-level average skewness across utterances, layers, and heads.

    Utterances whose spectra include a constant vector are excluded with a
    warning; the dataset mean is None if nothing remains. Reductions use
    compensated summation so the result does not depend on utterance order.
    """
    if not collection:
        raise ValueError("empty collection")
    shape = (collection[0].n_layers, collection[0].n_heads)
    for tensors in collection:
        if (tensors.n_layers, tensors.n_heads) != shape:
            raise InconsistentShapeError(
                f"{tensors.utterance_id!r} has {tensors.n_layers}x{tensors.n_heads} "
                f"maps, expected {shape[0]}x{shape[1]}"
            )

    per_utterance: dict[str, float] = {}
    excluded: list[str] = []
    grids: list[np.ndarray] = []
    for tensors in collection:
        tensors.validate()
        try:
            score, grid = utterance_score(tensors)
        except DegenerateVectorError:
            warnings.warn(f"{tensors.utterance_id!r}: degenerate spectrum, excluded from score")
            excluded.append(tensors.utterance_id)
            continue
        per_utterance[tensors.utterance_id] = score
        grids.append(grid)

    if per_utterance:
        dataset_mean = math.fsum(per_utterance.values()) / len(per_utterance)
        per_layer_head = np.apply_along_axis(
            lambda col: math.fsum(col.tolist()) / col.size, 0, np.stack(grids, axis=0)
        )
    else:
        dataset_mean = None
        per_layer_head = np.full(shape, np.nan)
    return SkewnessReport(per_utterance=per_utterance, dataset_mean=dataset_mean,
                          per_layer_head=per_layer_head, excluded=excluded)


def relative_drop(s_m: float, s_p: float) -> float:
    """(S_m - S_p) / S_m; undefined when the reference score is zero."""
    if s_m == 0.0:
        raise ZeroDivisionError("reference skewness is zero; relative drop undefined")
    return (s_m - s_p) / s_m


def write_attention(tensors: AttentionTensorSet, path) -> None:
    """Serialize maps to the PMCTATTN binary format (float32, row-major)."""
    tensors.validate()
    l_dim, h_dim, t_dim, _ = tensors.maps.shape
    with open(path, "wb") as fh:
        fh.write(ATTENTION_MAGIC)
        fh.write(struct.pack("<IIII", ATTENTION_VERSION, l_dim, h_dim, t_dim))
        fh.write(np.ascontiguousarray(tensors.maps, dtype="<f4").tobytes())


def read_attention(path, utterance_id: str | None = None) -> AttentionTensorSet:
    """Read a PMCTATTN file; the utterance id defaults to the filename."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 24 or data[:8] != ATTENTION_MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic or truncated header")
    version, l_dim, h_dim, t_dim = struct.unpack_from("<IIII", data, 8)
    if version != ATTENTION_VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {version}")
    count = l_dim * h_dim * t_dim * t_dim
    if len(data) != 24 + 4 * count:
        raise MalformedHeaderError(f"{path}: expected {24 + 4 * count} bytes, got {len(data)}")
    maps = np.frombuffer(data, dtype="<f4", count=count, offset=24)
    maps = maps.astype(np.float64).reshape(l_dim, h_dim, t_dim, t_dim)
    if utterance_id is None:
        utterance_id = Path(path).name
    return AttentionTensorSet(utterance_id=utterance_id, maps=maps)
