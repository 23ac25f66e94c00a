"""Pre-generated outfit cache with category-based incremental invalidation.

Adding a catalog item of category c evicts cached generations whose
anchor category is in the fixed invalidation map below, so only
affected outfits are regenerated.  Entries are keyed by
(anchor_id, occasion); one entry covers all three directions of a
generation atomically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from .catalog import Catalog, Item

INVALIDATION_MAP: dict[str, frozenset[str]] = {
    "top": frozenset({"bottom", "shoes", "dress"}),
    "bottom": frozenset({"top", "shoes"}),
    "shoes": frozenset({"top", "bottom", "dress"}),
    "layer": frozenset({"top", "bottom", "shoes", "dress"}),
    "accessory": frozenset({"top", "bottom", "shoes", "dress", "layer"}),
    "dress": frozenset({"shoes"}),
}


def anchors_to_invalidate(new_category: str) -> frozenset[str]:
    if new_category not in INVALIDATION_MAP:
        raise KeyError(f"unknown category {new_category!r}")
    return INVALIDATION_MAP[new_category]


@dataclass
class CacheEntry:
    payload: Any
    anchor_category: str
    created_at: float = field(default_factory=time.time)


@dataclass
class OutfitCache:
    entries: dict[tuple[str, str], CacheEntry] = field(default_factory=dict)

    def put(self, anchor_id: str, occasion: str, anchor_category: str, payload: Any) -> None:
        self.entries[(anchor_id, occasion)] = CacheEntry(payload, anchor_category)

    def get(self, anchor_id: str, occasion: str) -> Any | None:
        entry = self.entries.get((anchor_id, occasion))
        return entry.payload if entry else None

    def __len__(self) -> int:
        return len(self.entries)


def invalidate_on_add(
    cache: OutfitCache, catalog: Catalog, new_item: Item
) -> list[tuple[str, str]]:
    """Evict entries whose anchor category the new item invalidates."""
    affected = anchors_to_invalidate(new_item.category)
    evicted = [
        key
        for key, entry in cache.entries.items()
        if entry.anchor_category in affected
    ]
    for key in evicted:
        del cache.entries[key]
    return evicted
