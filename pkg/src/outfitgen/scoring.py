"""Composite outfit objective.

An outfit (anchor plus one item per filled slot) is scored as

    total = similarity + direction_bonus + harmony_bonus
            - color_penalty - formality_penalty
            - occasion_penalty - diversity_penalty

with a hard override: if any non-anchor item repeats the anchor's
non-neutral color, the total is exactly -1 regardless of the parts.
Similarity is slot-weighted cosine against the intent vector (anchor
embedding shifted by taste vectors); the anchor itself is scored only
through the intent vector, never as a slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .catalog import Item
from .embedding import cosine

if TYPE_CHECKING:
    from .personalization import TasteProfile

SLOT_ORDER = ("top", "bottom", "shoes", "layer", "accessory")


@dataclass(frozen=True)
class Direction:
    name: str
    style_tags: frozenset[str]
    color_policy: str  # neutrals | two-tone | contrast
    query_modifier: str
    preferred_colors: frozenset[str] = frozenset()
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.style_tags:
            raise ValueError("direction needs at least one style tag")
        if not self.query_modifier:
            raise ValueError("direction needs a query modifier")
        if self.color_policy not in ("neutrals", "two-tone", "contrast"):
            raise ValueError(f"unknown color policy {self.color_policy!r}")


@dataclass(frozen=True)
class IntentVector:
    vector: np.ndarray
    gamma: float = 0.15
    delta: float = 0.05


@dataclass(frozen=True)
class SlotWeights:
    bottom: float = 0.35
    shoes: float = 0.25
    accessory: float = 0.15
    layer: float = 0.10
    top: float = 0.10
    bottom_shoe_cross: float = 0.05

    def for_slot(self, slot: str) -> float:
        return getattr(self, slot, 0.0)


@dataclass
class ScoringRules:
    """Keyword lists, color tables and penalty coefficients."""

    neutral_colors: frozenset[str]
    color_families: dict[str, str]  # color -> family name
    formality_high: frozenset[str] = frozenset()
    formality_low: frozenset[str] = frozenset()
    statement_tags: frozenset[str] = frozenset()
    color_penalty_rate: float = 0.1
    formality_penalty_rate: float = 0.2
    occasion_penalty: float = 0.15
    diversity_penalty_rate: float = 0.1
    harmony_magnitude: float = 0.05
    direction_scale: float = 0.3
    direction_tag_weight: float = 0.5
    direction_color_weight: float = 0.5

    def is_neutral(self, color: str) -> bool:
        return color in self.neutral_colors

    def family_of(self, color: str) -> str:
        return self.color_families.get(color, color)

    def formality_level(self, item: Item) -> int:
        """Keyword-matched level: 2 formal, 0 athletic/casual, 1 default.

        Conflicting signals (tokens from both lists) fall back to 1.
        Bare plural forms count as matches.
        """
        tokens = set(item.name.lower().split())
        tokens.update(item.style_tags)
        if item.material:
            tokens.add(item.material)
        tokens.add(item.category)
        high = any(t in self.formality_high or t.rstrip("s") in self.formality_high for t in tokens)
        low = any(t in self.formality_low or t.rstrip("s") in self.formality_low for t in tokens)
        if high and not low:
            return 2
        if low and not high:
            return 0
        return 1

    def is_statement(self, item: Item) -> bool:
        return any(tag in self.statement_tags for tag in item.style_tags)


@dataclass
class ScoreBreakdown:
    similarity: float = 0.0
    direction_bonus: float = 0.0
    harmony_bonus: float = 0.0
    color_penalty: float = 0.0
    formality_penalty: float = 0.0
    occasion_penalty: float = 0.0
    diversity_penalty: float = 0.0
    hard_violation: bool = False
    total: float = 0.0

    def as_dict(self) -> dict:
        return {
            "similarity": self.similarity,
            "direction_bonus": self.direction_bonus,
            "harmony_bonus": self.harmony_bonus,
            "color_penalty": self.color_penalty,
            "formality_penalty": self.formality_penalty,
            "occasion_penalty": self.occasion_penalty,
            "diversity_penalty": self.diversity_penalty,
            "hard_violation": self.hard_violation,
            "total": self.total,
        }


def intent_vector(
    anchor: Item, taste: "TasteProfile | None", gamma: float = 0.15, delta: float = 0.05
) -> IntentVector:
    """Anchor embedding shifted by taste EMAs; deliberately not renormalized."""
    vector = anchor.embedding.astype(float).copy()
    if taste is not None:
        vector = vector + gamma * taste.t_like - delta * taste.t_dislike
    return IntentVector(vector=vector, gamma=gamma, delta=delta)


def similarity_score(
    slots: dict[str, Item], intent: IntentVector, weights: SlotWeights = SlotWeights()
) -> float:
    if not slots:
        raise ValueError("cannot score an outfit with no filled slots")
    score = sum(
        weights.for_slot(slot) * cosine(intent.vector, item.embedding)
        for slot, item in slots.items()
    )
    if "bottom" in slots and "shoes" in slots:
        score += weights.bottom_shoe_cross * cosine(
            slots["bottom"].embedding, slots["shoes"].embedding
        )
    return float(score)


def _outfit_items(anchor: Item, slots: dict[str, Item]) -> list[Item]:
    return [anchor] + [slots[s] for s in SLOT_ORDER if s in slots]


def _distinct_loud_families(items: list[Item], rules: ScoringRules) -> set[str]:
    return {
        rules.family_of(i.color) for i in items if i.color and not rules.is_neutral(i.color)
    }


def direction_bonus(
    anchor: Item, slots: dict[str, Item], direction: Direction, rules: ScoringRules
) -> float:
    if not direction.enabled:
        return 0.0
    items = _outfit_items(anchor, slots)
    tagged = sum(1 for i in items if set(i.style_tags) & direction.style_tags)
    tag_fraction = tagged / len(items)

    if direction.color_policy == "neutrals":
        neutral = sum(1 for i in items if rules.is_neutral(i.color))
        adherence = neutral / len(items)
    elif direction.color_policy == "two-tone":
        adherence = 1.0 if len(_distinct_loud_families(items, rules)) <= 2 else 0.0
    else:  # contrast
        adherence = 1.0 if len(_distinct_loud_families(items, rules)) >= 2 else 0.0

    bonus = rules.direction_scale * (
        rules.direction_tag_weight * tag_fraction
        + rules.direction_color_weight * adherence
    )
    return float(np.clip(bonus, 0.0, rules.direction_scale))


def constraint_penalties(
    anchor: Item, slots: dict[str, Item], rules: ScoringRules
) -> ScoreBreakdown:
    """Color/formality/occasion/diversity penalties plus the harmony bonus."""
    items = _outfit_items(anchor, slots)
    breakdown = ScoreBreakdown()

    anchor_color_loud = bool(anchor.color) and not rules.is_neutral(anchor.color)
    breakdown.hard_violation = anchor_color_loud and any(
        item.color == anchor.color for item in items[1:]
    )

    n_loud = sum(1 for i in items if i.color and not rules.is_neutral(i.color))
    breakdown.color_penalty = rules.color_penalty_rate * max(0, n_loud - 2)

    levels = [rules.formality_level(i) for i in items]
    breakdown.formality_penalty = rules.formality_penalty_rate * max(
        0, (max(levels) - min(levels)) - 1
    )

    tag_sets = [i.occasion_tags for i in items if i.occasion_tags]
    if tag_sets and not set.intersection(*tag_sets):
        breakdown.occasion_penalty = rules.occasion_penalty

    n_statement = sum(1 for i in items if rules.is_statement(i))
    breakdown.diversity_penalty = rules.diversity_penalty_rate * max(0, n_statement - 1)

    loud_families = _distinct_loud_families(items, rules)
    if len(loud_families) <= 1:
        breakdown.harmony_bonus = rules.harmony_magnitude
    elif len(loud_families) >= 3:
        breakdown.harmony_bonus = -rules.harmony_magnitude

    return breakdown


def total_score(
    anchor: Item,
    slots: dict[str, Item],
    intent: IntentVector,
    direction: Direction,
    rules: ScoringRules,
    weights: SlotWeights = SlotWeights(),
) -> ScoreBreakdown:
    breakdown = constraint_penalties(anchor, slots, rules)
    breakdown.similarity = similarity_score(slots, intent, weights)
    breakdown.direction_bonus = direction_bonus(anchor, slots, direction, rules)
    if breakdown.hard_violation:
        breakdown.total = -1.0
    else:
        breakdown.total = (
            breakdown.similarity
            + breakdown.direction_bonus
            + breakdown.harmony_bonus
            - breakdown.color_penalty
            - breakdown.formality_penalty
            - breakdown.occasion_penalty
            - breakdown.diversity_penalty
        )
    return breakdown
