"""Combinatorial outfit construction and per-direction selection.

For each of the three directions in fixed order (Classic, Trendy,
Bold): retrieve candidates per slot under a running global exclusion
set, cross the top-k per slot into combination candidates (capped,
best retrieval ranks first), score them all, and keep the maximum.
Selected items join the exclusion set so no item repeats across the
three outfits.  A direction whose required slot cannot be filled
reports a structured gap instead of failing the request.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .ann import Index
from .catalog import Catalog, Item
from .config import Runtime
from .embedding import hash64
from .personalization import RotationQueue, TasteProfile
from .retrieval import RerankPolicy, retrieve_slot_candidates
from .scoring import SLOT_ORDER, ScoreBreakdown, intent_vector, total_score
from .semantics import layer_compatible

SLOT_LAYOUTS: dict[str, tuple[frozenset[str], frozenset[str]]] = {
    "top": (frozenset({"bottom", "shoes"}), frozenset({"layer", "accessory"})),
    "bottom": (frozenset({"top", "shoes"}), frozenset({"layer", "accessory"})),
    "shoes": (frozenset({"top", "bottom"}), frozenset({"layer", "accessory"})),
    "dress": (frozenset({"shoes"}), frozenset({"layer", "accessory"})),
    "layer": (frozenset({"top", "bottom", "shoes"}), frozenset({"accessory"})),
    "accessory": (frozenset({"top", "bottom", "shoes"}), frozenset({"layer"})),
}


class UnfillableSlotError(RuntimeError):
    def __init__(self, slot: str):
        super().__init__(f"unfillable slot: {slot}")
        self.slot = slot


@dataclass
class GenerationRequest:
    anchor_id: str
    occasion: str
    mood: str | None = None
    seed: int = 0
    top_k_per_slot: int = 3
    candidate_cap: int = 8

    def __post_init__(self) -> None:
        if self.top_k_per_slot < 1:
            raise ValueError("top_k_per_slot must be >= 1")
        if self.candidate_cap < 1:
            raise ValueError("candidate_cap must be >= 1")


@dataclass
class OutfitCandidate:
    anchor: Item
    slots: dict[str, Item]
    direction: str
    rank_sum: int
    breakdown: ScoreBreakdown | None = None

    def item_ids(self) -> list[str]:
        return [self.slots[s].id for s in SLOT_ORDER if s in self.slots]

    def combo_key(self) -> str:
        return "|".join(self.item_ids())


@dataclass
class DirectionOutcome:
    direction: str
    outfit: OutfitCandidate | None = None
    gap: str | None = None
    scored_candidates: int = 0


@dataclass
class GenerationResult:
    anchor_id: str
    occasion: str
    seed: int
    outcomes: list[DirectionOutcome] = field(default_factory=list)

    def outfits(self) -> list[OutfitCandidate]:
        return [o.outfit for o in self.outcomes if o.outfit is not None]


def slot_layout(anchor: Item) -> tuple[frozenset[str], frozenset[str]]:
    return SLOT_LAYOUTS[anchor.category]


def generate_candidates(
    per_slot: dict[str, list[Item]],
    request: GenerationRequest,
    required: frozenset[str],
    anchor: Item,
    direction: str,
    layer_check=None,
) -> list[OutfitCandidate]:
    """Cross the top-k per slot into combination candidates.

    Required slots with no candidates raise; optional slots with no
    candidates are omitted.  Combinations failing the layer check are
    dropped before ordering.  The result is ordered by ascending rank
    sum (ties by concatenated item ids) and truncated to the cap.
    """
    for slot in sorted(required):
        if not per_slot.get(slot):
            raise UnfillableSlotError(slot)
    slots_present = [s for s in SLOT_ORDER if per_slot.get(s)]
    shortlists = {s: per_slot[s][: request.top_k_per_slot] for s in slots_present}

    combos: list[OutfitCandidate] = []
    for picks in itertools.product(*(range(len(shortlists[s])) for s in slots_present)):
        slots = {s: shortlists[s][i] for s, i in zip(slots_present, picks)}
        if layer_check is not None and not layer_check(anchor, slots):
            continue
        combos.append(
            OutfitCandidate(
                anchor=anchor, slots=slots, direction=direction, rank_sum=sum(picks)
            )
        )
    combos.sort(key=lambda c: (c.rank_sum, c.combo_key()))
    return combos[: request.candidate_cap]


def _combo_layer_compatible(anchor: Item, slots: dict[str, Item], tau: float) -> bool:
    """Outer layers must not be lighter than the garment they cover."""
    layer = slots.get("layer") or (anchor if anchor.category == "layer" else None)
    covered = slots.get("top") or (anchor if anchor.category in ("top", "dress") else None)
    if layer is None or covered is None:
        return True
    if layer.material_weight is None or covered.material_weight is None:
        return True
    return layer_compatible(layer.material_weight, covered.material_weight, tau)


def generate_three_outfits(
    request: GenerationRequest,
    catalog: Catalog,
    index: Index,
    taste: TasteProfile | None,
    runtime: Runtime,
    rotation: RotationQueue | None = None,
) -> GenerationResult:
    anchor = catalog.items.get(request.anchor_id)
    if anchor is None:
        raise KeyError(f"unknown anchor id {request.anchor_id!r}")
    occasion = runtime.occasions.get(request.occasion)
    if occasion is None:
        raise KeyError(f"unknown occasion {request.occasion!r}")
    config = runtime.config
    intent = intent_vector(anchor, taste, config.gamma, config.delta)
    required, optional = slot_layout(anchor)
    wanted = [s for s in SLOT_ORDER if s in required | optional]

    result = GenerationResult(
        anchor_id=anchor.id, occasion=request.occasion, seed=request.seed
    )
    exclusions: set[str] = {anchor.id}
    rotation_ids = frozenset(rotation.entries) if rotation is not None else frozenset()
    rotation_mult = rotation.penalty_multiplier if rotation is not None else 1.0
    covered_weight = (
        anchor.material_weight
        if config.material_filtering and anchor.category in ("top", "dress")
        else None
    )

    for d_index, direction in enumerate(runtime.directions):
        per_slot: dict[str, list[Item]] = {}
        for slot in wanted:
            rng = np.random.Generator(
                np.random.Philox(key=hash64(request.seed, d_index, slot))
            )
            policy = RerankPolicy(
                preferred_colors=direction.preferred_colors if direction.enabled else frozenset(),
                neutral_colors=config.rules.neutral_colors,
                preferred_multiplier=config.retrieval.preferred_multiplier,
                neutral_multiplier=config.retrieval.neutral_multiplier,
                noise_low=config.retrieval.noise_low,
                noise_high=config.retrieval.noise_high,
                rng_seed=request.seed,
                rotation_ids=rotation_ids,
                rotation_multiplier=rotation_mult,
            )
            per_slot[slot] = retrieve_slot_candidates(
                index,
                catalog,
                anchor,
                slot,
                direction,
                occasion,
                exclusions,
                policy,
                runtime.provider,
                config.retrieval.slot_hints,
                rng,
                fetch_limit=config.retrieval.fetch_limit,
                occasion_filtering=config.occasion_filtering,
                covered_weight=covered_weight if slot == "layer" else None,
                tau=config.tau,
            )
        if (
            config.material_filtering
            and anchor.category == "layer"
            and anchor.material_weight is not None
        ):
            per_slot["top"] = [
                t
                for t in per_slot.get("top", [])
                if t.material_weight is None
                or layer_compatible(anchor.material_weight, t.material_weight, config.tau)
            ]

        layer_check = (
            (lambda a, s: _combo_layer_compatible(a, s, config.tau))
            if config.material_filtering
            else None
        )
        try:
            candidates = generate_candidates(
                per_slot, request, required, anchor, direction.name, layer_check
            )
        except UnfillableSlotError as exc:
            result.outcomes.append(
                DirectionOutcome(direction=direction.name, gap=str(exc))
            )
            continue
        if not candidates:
            result.outcomes.append(
                DirectionOutcome(
                    direction=direction.name, gap="no layer-compatible combination"
                )
            )
            continue

        for candidate in candidates:
            candidate.breakdown = total_score(
                anchor,
                candidate.slots,
                intent,
                direction,
                config.rules,
                config.slot_weights,
            )
        best = min(
            candidates,
            key=lambda c: (-c.breakdown.total, c.rank_sum, c.combo_key()),
        )
        exclusions.update(best.item_ids())
        result.outcomes.append(
            DirectionOutcome(
                direction=direction.name,
                outfit=best,
                scored_candidates=len(candidates),
            )
        )
    return result
