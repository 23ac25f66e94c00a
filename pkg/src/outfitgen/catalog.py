"""Catalog data model and line-delimited ingestion.

Catalog files are UTF-8 JSON Lines: one object per line with the Item
fields (see docs/catalog_schema.json).  Embeddings may be given
directly, derived from image+text embeddings via the blend, or, when
absent entirely, synthesized by the caller-supplied provider from the
item description.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .embedding import (
    BlendWeights,
    blend_embedding,
    build_item_description,
    is_unit,
    normalize,
)

CATEGORIES = ("top", "bottom", "shoes", "dress", "layer", "accessory")


class CatalogError(ValueError):
    """Malformed record or invalid catalog contents."""


@dataclass
class Item:
    id: str
    name: str
    category: str
    color: str
    material: str
    style_tags: list[str]
    occasion_tags: set[str]
    embedding: np.ndarray
    image_embedding: np.ndarray | None = None
    text_embedding: np.ndarray | None = None
    material_weight: float | None = None  # filled once at ingestion

    def validate(self) -> None:
        if not self.id:
            raise CatalogError("field 'id': must be nonempty")
        if self.category not in CATEGORIES:
            raise CatalogError(f"field 'category': unknown category {self.category!r}")
        if not self.style_tags:
            raise CatalogError("field 'style_tags': must be nonempty")
        if self.embedding is None or not is_unit(self.embedding):
            raise CatalogError("field 'embedding': must be unit-norm")


@dataclass
class Catalog:
    items: dict[str, Item] = field(default_factory=dict)
    by_category: dict[str, list[str]] = field(default_factory=dict)

    def add(self, item: Item) -> None:
        if item.id in self.items:
            raise CatalogError(f"duplicate id {item.id!r}")
        self.items[item.id] = item
        self.by_category.setdefault(item.category, []).append(item.id)

    def __len__(self) -> int:
        return len(self.items)

    def ids_in_category(self, category: str) -> list[str]:
        return self.by_category.get(category, [])


def _as_vector(raw, field_name: str, dimension: int) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != dimension:
        raise CatalogError(f"field {field_name!r}: expected {dimension} floats")
    vec = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(vec)):
        raise CatalogError(f"field {field_name!r}: non-finite components")
    return vec


def parse_catalog_line(
    line: str,
    provider=None,
    blend: BlendWeights = BlendWeights(),
    dimension: int = 512,
) -> Item:
    """Parse one JSONL record into a validated Item.

    Embedding resolution order: explicit 'embedding' field; else blend of
    image+text embeddings; else provider over the item description.
    """
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"invalid JSON record: {exc}") from None
    if not isinstance(raw, dict):
        raise CatalogError("record must be a JSON object")

    for key in ("id", "category"):
        if not raw.get(key):
            raise CatalogError(f"field {key!r}: missing")

    style_tags = [str(t).lower().strip() for t in raw.get("style_tags", [])]
    occasion_tags = {str(t).lower().strip() for t in raw.get("occasion_tags", [])}

    image_vec = text_vec = None
    if raw.get("image_embedding") is not None:
        image_vec = _as_vector(raw["image_embedding"], "image_embedding", dimension)
        if not is_unit(image_vec):
            image_vec = normalize(image_vec)
    if raw.get("text_embedding") is not None:
        text_vec = _as_vector(raw["text_embedding"], "text_embedding", dimension)
        if not is_unit(text_vec):
            text_vec = normalize(text_vec)

    item = Item(
        id=str(raw["id"]),
        name=str(raw.get("name", "")),
        category=str(raw["category"]).lower(),
        color=str(raw.get("color", "")).lower().strip(),
        material=str(raw.get("material", "")).lower().strip(),
        style_tags=style_tags,
        occasion_tags=occasion_tags,
        embedding=np.zeros(dimension),  # placeholder until resolved below
        image_embedding=image_vec,
        text_embedding=text_vec,
        material_weight=raw.get("material_weight"),
    )

    if raw.get("embedding") is not None:
        vec = _as_vector(raw["embedding"], "embedding", dimension)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise CatalogError("field 'embedding': zero vector cannot be normalized")
        item.embedding = vec if is_unit(vec) else normalize(vec)
    elif image_vec is not None and text_vec is not None:
        item.embedding = blend_embedding(image_vec, text_vec, blend)
    elif provider is not None:
        item.embedding = provider.embed_text(build_item_description(item))
    else:
        raise CatalogError(
            "field 'embedding': missing and no image+text pair or provider available"
        )

    item.validate()
    return item


def load_catalog(
    path: str | Path,
    provider=None,
    blend: BlendWeights = BlendWeights(),
    dimension: int = 512,
) -> Catalog:
    """Load a JSONL catalog file; any bad line aborts with its line number."""
    catalog = Catalog()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                catalog.add(parse_catalog_line(line, provider, blend, dimension))
            except CatalogError as exc:
                raise CatalogError(f"line {lineno}: {exc}") from None
    return catalog


def item_to_record(item: Item) -> dict:
    record = {
        "id": item.id,
        "name": item.name,
        "category": item.category,
        "color": item.color,
        "material": item.material,
        "style_tags": list(item.style_tags),
        "occasion_tags": sorted(item.occasion_tags),
        "embedding": [float(x) for x in item.embedding],
    }
    if item.image_embedding is not None:
        record["image_embedding"] = [float(x) for x in item.image_embedding]
    if item.text_embedding is not None:
        record["text_embedding"] = [float(x) for x in item.text_embedding]
    if item.material_weight is not None:
        record["material_weight"] = float(item.material_weight)
    return record


def dump_catalog(catalog: Catalog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for item_id in catalog.items:
            handle.write(json.dumps(item_to_record(catalog.items[item_id])) + "\n")


def catalog_from_items(items: Iterable[Item]) -> Catalog:
    catalog = Catalog()
    for item in items:
        catalog.add(item)
    return catalog


def with_reblended_embeddings(catalog: Catalog, blend: BlendWeights) -> Catalog:
    """New catalog with embeddings re-derived from image+text pairs.

    Items lacking either component keep their existing embedding; used by
    the blend-weights ablation.
    """
    rebuilt = Catalog()
    for item in catalog.items.values():
        if item.image_embedding is not None and item.text_embedding is not None:
            new_vec = blend_embedding(item.image_embedding, item.text_embedding, blend)
            rebuilt.add(replace(item, embedding=new_vec))
        else:
            rebuilt.add(replace(item))
    return rebuilt


def category_counts(catalog: Catalog) -> dict[str, int]:
    return {cat: len(catalog.by_category.get(cat, [])) for cat in CATEGORIES}
