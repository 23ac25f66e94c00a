import numpy as np
import pytest

from outfitgen.catalog import Catalog, Item, catalog_from_items
from outfitgen.embedding import SyntheticProvider, normalize


def unit(dim: int = 512, axis: int = 0) -> np.ndarray:
    v = np.zeros(dim)
    v[axis] = 1.0
    return v


def random_unit(rng: np.random.Generator, dim: int = 512) -> np.ndarray:
    return normalize(rng.standard_normal(dim))


def vector_with_cosines(
    v: np.ndarray, a: np.ndarray, cos_v: float, cos_a: float
) -> np.ndarray:
    """Unit vector with prescribed cosines against two orthonormal anchors."""
    assert abs(float(np.dot(v, a))) < 1e-9, "anchors must be orthogonal"
    residual = 1.0 - cos_v**2 - cos_a**2
    assert residual >= -1e-12, "requested cosines are infeasible"
    # slack rides on an axis orthogonal to both anchors
    spare = np.zeros_like(v)
    for axis in range(len(v)):
        candidate = np.zeros_like(v)
        candidate[axis] = 1.0
        if abs(candidate @ v) < 1e-12 and abs(candidate @ a) < 1e-12:
            spare = candidate
            break
    return cos_v * v + cos_a * a + np.sqrt(max(0.0, residual)) * spare


def make_item(
    item_id: str,
    category: str = "top",
    color: str = "gray",
    material: str = "wool",
    tags: list[str] | None = None,
    occasions: set[str] | None = None,
    embedding: np.ndarray | None = None,
    name: str = "",
    material_weight: float | None = None,
    dim: int = 512,
) -> Item:
    if embedding is None:
        embedding = SyntheticProvider(seed=99, dimension=dim).embed_text(
            f"{color} {' '.join(tags or ['plain'])} {material} {category} {item_id}"
        )
    return Item(
        id=item_id,
        name=name or f"{color} {material} {category}",
        category=category,
        color=color,
        material=material,
        style_tags=tags or ["plain"],
        occasion_tags=occasions if occasions is not None else {"casual"},
        embedding=embedding,
        material_weight=material_weight,
    )


def small_catalog(n_per_category: dict[str, int], seed: int = 5) -> Catalog:
    rng = np.random.Generator(np.random.Philox(key=seed))
    items = []
    for category, count in n_per_category.items():
        for i in range(count):
            items.append(
                make_item(
                    f"{category}{i}",
                    category=category,
                    color=["gray", "red", "navy", "teal"][i % 4],
                    embedding=random_unit(rng),
                )
            )
    return catalog_from_items(items)


@pytest.fixture
def provider() -> SyntheticProvider:
    return SyntheticProvider(seed=7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=1234))
