"""Vector primitives and text-embedding providers.

All embeddings are float64 numpy arrays of a fixed dimension (512 by
default).  Item vectors are unit-norm; the blend of image and text
signals re-normalizes after the weighted sum.  The synthetic provider
stands in for a real text encoder: it derives one unit vector per token
from a counter-based generator keyed by a 64-bit hash of (seed, token),
so the same seed and text produce bit-identical vectors on every
platform and run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .catalog import Item

DIMENSION = 512
UNIT_NORM_TOL = 1e-6

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def hash64(seed: int, *parts: str | int) -> int:
    """FNV-1a over the seed and each part, for keying RNG streams."""
    h = _FNV_OFFSET
    for byte in int(seed & _MASK64).to_bytes(8, "little"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    for part in parts:
        data = (
            int(part & _MASK64).to_bytes(8, "little")
            if isinstance(part, int)
            else part.encode("utf-8")
        )
        h = ((h ^ 0xFF) * _FNV_PRIME) & _MASK64  # separator between parts
        for byte in data:
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return vec / norm


def is_unit(vec: np.ndarray, tol: float = UNIT_NORM_TOL) -> bool:
    return abs(float(np.linalg.norm(vec)) - 1.0) <= tol


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class BlendWeights:
    """Weights for the image/text blend; defaults follow the 70/30 fusion."""

    alpha: float = 0.7
    beta: float = 0.3

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError(f"invalid blend weights ({self.alpha}, {self.beta})")


def blend_embedding(
    img: np.ndarray, txt: np.ndarray, weights: BlendWeights = BlendWeights()
) -> np.ndarray:
    """normalize(alpha*img + beta*txt); inputs must be unit vectors."""
    if not is_unit(img) or not is_unit(txt):
        raise ValueError("blend inputs must be unit vectors")
    combined = weights.alpha * img + weights.beta * txt
    try:
        return normalize(combined)
    except ValueError:
        raise ValueError("blend produced a zero vector (antiparallel inputs)") from None


def build_item_description(item: "Item") -> str:
    """Space-joined lowercase description: color, tags, material, category noun."""
    tokens: list[str] = []
    if item.color:
        tokens.append(item.color)
    tokens.extend(item.style_tags)
    if item.material:
        tokens.append(item.material)
    tokens.append(item.category)
    return " ".join(t.lower() for t in tokens if t)


@dataclass
class SyntheticProvider:
    """Deterministic stand-in for a neural text encoder.

    Each token maps to a unit vector drawn from a Philox stream keyed by
    hash64(seed, token); a text embeds to the normalized sum of its token
    vectors.  Token vectors are memoized per provider instance.
    """

    seed: int = 0
    dimension: int = DIMENSION
    _token_cache: dict[str, np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        rng = np.random.Generator(np.random.Philox(key=hash64(self.seed, token)))
        vec = normalize(rng.standard_normal(self.dimension))
        self._token_cache[token] = vec
        return vec

    def embed_text(self, text: str) -> np.ndarray:
        tokens = text.lower().split()
        if not tokens:
            raise ValueError("cannot embed empty text")
        total = np.zeros(self.dimension)
        for token in tokens:
            total += self._token_vector(token)
        return normalize(total)


class FileVectorProvider:
    """Embedding provider backed by a JSON file of precomputed vectors.

    The file maps exact text strings to dense float lists; lookups for
    unknown text raise.  Used to inject real-model vectors (e.g. the
    tag-to-mood fixture) without loading a neural model.
    """

    def __init__(self, path: str | Path):
        payload = json.loads(Path(path).read_text("utf-8"))
        self.dimension = int(payload["dimension"])
        self._vectors = {
            text: np.asarray(values, dtype=float)
            for text, values in payload["vectors"].items()
        }

    def embed_text(self, text: str) -> np.ndarray:
        key = text.lower().strip()
        if key not in self._vectors:
            raise KeyError(f"no precomputed vector for {text!r}")
        return self._vectors[key]
