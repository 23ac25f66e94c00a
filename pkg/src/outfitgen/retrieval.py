"""Slot-specific query construction and candidate retrieval.

The pipeline per slot: build a query from the anchor's color and tags,
a slot hint and the direction's modifier; fetch candidates from the
category sub-index with exclusions; filter by occasion; then rerank by
multiplying distances with color multipliers (preferred beats neutral),
the rotation penalty for recently suggested items, and uniform noise.
Noise placement is fixed as filter-then-rerank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ann import Index, ScoredId, SearchRequest
from .catalog import Catalog, Item
from .scoring import Direction
from .semantics import OccasionProfile, filter_by_occasion, layer_compatible


@dataclass
class SlotQuery:
    slot: str
    text: str
    vector: np.ndarray
    fetch_limit: int = 24

    def __post_init__(self) -> None:
        if self.fetch_limit < 1:
            raise ValueError("fetch_limit must be >= 1")
        if not self.text:
            raise ValueError("query text must be nonempty")


@dataclass
class RerankPolicy:
    preferred_colors: frozenset[str] = frozenset()
    neutral_colors: frozenset[str] = frozenset()
    preferred_multiplier: float = 0.85
    neutral_multiplier: float = 0.90
    noise_low: float = 0.95
    noise_high: float = 1.05
    rng_seed: int = 0
    rotation_ids: frozenset[str] = field(default_factory=frozenset)
    rotation_multiplier: float = 1.0

    def __post_init__(self) -> None:
        for mult in (self.preferred_multiplier, self.neutral_multiplier):
            if not 0 < mult <= 1:
                raise ValueError("color multipliers must be in (0, 1]")
        if self.noise_low > self.noise_high:
            raise ValueError("noise_low must be <= noise_high")


def build_slot_query(
    anchor: Item,
    slot: str,
    direction: Direction,
    provider,
    slot_hints: dict[str, str],
    fetch_limit: int = 24,
) -> SlotQuery:
    """Anchor color + style tags + slot hint + direction modifier."""
    if slot == anchor.category:
        raise ValueError(f"slot {slot!r} equals the anchor's own category")
    parts: list[str] = []
    if anchor.color:
        parts.append(anchor.color)
    parts.extend(anchor.style_tags)
    parts.append(slot_hints.get(slot, slot))
    if direction.enabled:
        parts.append(direction.query_modifier)
    text = " ".join(parts)
    return SlotQuery(slot=slot, text=text, vector=provider.embed_text(text), fetch_limit=fetch_limit)


def rerank_with_color_and_noise(
    results: list[ScoredId],
    catalog: Catalog,
    policy: RerankPolicy,
    rng: np.random.Generator,
) -> list[ScoredId]:
    """Multiply each distance by its color multiplier, the rotation penalty
    when the item was recently suggested, and an independent noise draw;
    re-sort ascending with ties broken by id.  One noise draw is consumed
    per input item in input order, so a fixed generator state reranks
    identically."""
    rescored = []
    for entry in results:
        color = catalog.items[entry.id].color
        if color in policy.preferred_colors:
            mult = policy.preferred_multiplier
        elif color in policy.neutral_colors:
            mult = policy.neutral_multiplier
        else:
            mult = 1.0
        if entry.id in policy.rotation_ids:
            mult *= policy.rotation_multiplier
        noise = float(rng.uniform(policy.noise_low, policy.noise_high))
        rescored.append(ScoredId(entry.id, entry.distance * mult * noise))
    rescored.sort(key=lambda s: (s.distance, s.id))
    return rescored


def retrieve_slot_candidates(
    index: Index,
    catalog: Catalog,
    anchor: Item,
    slot: str,
    direction: Direction,
    occasion: OccasionProfile,
    exclusions: set[str],
    policy: RerankPolicy,
    provider,
    slot_hints: dict[str, str],
    rng: np.random.Generator,
    fetch_limit: int = 24,
    occasion_filtering: bool = True,
    covered_weight: float | None = None,
    tau: float = 0.15,
) -> list[Item]:
    """Full per-slot pipeline; returns candidate Items in final rank order.

    `covered_weight` is the material weight of the garment a layer would
    cover, when that garment is already fixed (the anchor); layer
    candidates lighter than it beyond tau are dropped.
    """
    query = build_slot_query(anchor, slot, direction, provider, slot_hints, fetch_limit)
    barred = frozenset(exclusions) | {anchor.id}
    hits = index.search(
        SearchRequest(query=query.vector, category=slot, exclusions=barred, limit=fetch_limit)
    )
    if occasion_filtering:
        hits = filter_by_occasion(hits, catalog, occasion)
    hits = rerank_with_color_and_noise(hits, catalog, policy, rng)
    items = [catalog.items[h.id] for h in hits]
    if slot == "layer" and covered_weight is not None:
        items = [
            item
            for item in items
            if item.material_weight is None
            or layer_compatible(item.material_weight, covered_weight, tau)
        ]
    return items
