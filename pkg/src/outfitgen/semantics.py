"""Embedding-geometry scoring: occasion priors, material weight, moods.

Occasions are described by two prose strings (the desired "vibe" and the
forbidden "anti-vibe") embedded once as anchor vectors.  Items score by
differential affinity: affinity to the vibe, hinge-penalized when the
anti-vibe is closer, with a strictness multiplier per occasion and, for
strict occasions, an extra unconditional anti-vibe penalty.

Material weight probes the same geometry with heavy/light context
anchors; a garment's weight is the cosine differential of its material
text against the two.  Layering admits an outer garment when its weight
is within tolerance of the garment it covers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ann import ScoredId
from .catalog import Catalog, Item
from .embedding import cosine


@dataclass
class OccasionProfile:
    name: str
    vibe_text: str
    anti_vibe_text: str
    vibe_vec: np.ndarray
    anti_vec: np.ndarray
    strictness: float  # hinge multiplier on anti-vibe dominance
    unconditional_anti_weight: float = 0.0
    keep_fraction: float = 0.85
    min_floor: int = 3

    def __post_init__(self) -> None:
        if self.strictness < 0:
            raise ValueError("strictness must be >= 0")
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must be in (0, 1]")
        if self.min_floor < 1:
            raise ValueError("min_floor must be >= 1")


@dataclass
class MaterialContext:
    heavy_vec: np.ndarray
    light_vec: np.ndarray
    tau: float = 0.15

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError("tau must be >= 0")


def occasion_score(item_vec: np.ndarray, occasion: OccasionProfile) -> float:
    """cos(e,v) - strictness * max(0, cos(e,a) - cos(e,v)) - uncond * cos(e,a)."""
    to_vibe = cosine(item_vec, occasion.vibe_vec)
    to_anti = cosine(item_vec, occasion.anti_vec)
    score = to_vibe - occasion.strictness * max(0.0, to_anti - to_vibe)
    return score - occasion.unconditional_anti_weight * to_anti


def filter_by_occasion(
    candidates: list[ScoredId], catalog: Catalog, occasion: OccasionProfile
) -> list[ScoredId]:
    """Keep candidates scoring within keep_fraction of the top score.

    When the top score is non-positive the fraction threshold is
    ill-defined, so only the floor applies.  If fewer than min_floor
    survive, the floor's highest-scoring candidates are kept instead.
    Input order is preserved among survivors.
    """
    if not candidates:
        return []
    scores = {
        c.id: occasion_score(catalog.items[c.id].embedding, occasion)
        for c in candidates
    }
    top = max(scores.values())
    if top > 0:
        survivors = [c for c in candidates if scores[c.id] >= occasion.keep_fraction * top]
    else:
        survivors = []
    if len(survivors) < occasion.min_floor:
        ranked = sorted(candidates, key=lambda c: (-scores[c.id], c.id))
        floor_ids = {c.id for c in ranked[: occasion.min_floor]}
        survivors = [c for c in candidates if c.id in floor_ids]
    return survivors


def material_weight(ctx: MaterialContext, material_text: str, provider) -> float:
    """Heavy-minus-light cosine differential of the material text."""
    if not material_text.strip():
        raise ValueError("material text must be nonempty")
    vec = provider.embed_text(material_text)
    return cosine(vec, ctx.heavy_vec) - cosine(vec, ctx.light_vec)


def layer_compatible(w_layer: float, w_top: float, tau: float) -> bool:
    return w_layer >= w_top - tau


def build_material_text(item: Item, weight_keywords: set[str]) -> str:
    """"{material} {category}" plus any weight-relevant tokens from the name."""
    tokens = []
    if item.material:
        tokens.append(item.material)
    tokens.append(item.category)
    for token in item.name.lower().split():
        if token in weight_keywords:
            tokens.append(token)
    return " ".join(tokens)


def annotate_material_weights(
    catalog: Catalog, ctx: MaterialContext, provider, weight_keywords: set[str]
) -> None:
    """Compute and cache each item's material weight (ingestion-time only)."""
    for item in catalog.items.values():
        if item.material_weight is None:
            item.material_weight = material_weight(
                ctx, build_material_text(item, weight_keywords), provider
            )


def mood_score(item: Item, mood: str, provider) -> float:
    """Max per-tag cosine against the mood text."""
    if not item.style_tags:
        raise ValueError("item has no style tags to score")
    if not mood.strip():
        raise ValueError("mood text must be nonempty")
    mood_vec = provider.embed_text(mood)
    return max(cosine(provider.embed_text(tag), mood_vec) for tag in item.style_tags)


def build_occasion_profile(
    name: str,
    vibe_text: str,
    anti_vibe_text: str,
    provider,
    strictness: float,
    unconditional_anti_weight: float = 0.0,
    keep_fraction: float = 0.85,
    min_floor: int = 3,
) -> OccasionProfile:
    return OccasionProfile(
        name=name,
        vibe_text=vibe_text,
        anti_vibe_text=anti_vibe_text,
        vibe_vec=provider.embed_text(vibe_text),
        anti_vec=provider.embed_text(anti_vibe_text),
        strictness=strictness,
        unconditional_anti_weight=unconditional_anti_weight,
        keep_fraction=keep_fraction,
        min_floor=min_floor,
    )
