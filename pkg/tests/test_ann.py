import numpy as np
import pytest

from outfitgen.ann import (
    IndexParams,
    SearchRequest,
    brute_force_search,
    build_index,
    load_index,
    save_index,
    search,
)
from outfitgen.catalog import catalog_from_items

from conftest import make_item, random_unit, unit


def vector_catalog(n: int, seed: int, categories=("top", "bottom"), dim: int = 512):
    rng = np.random.Generator(np.random.Philox(key=seed))
    items = []
    for i in range(n):
        items.append(
            make_item(
                f"i{i:04d}",
                category=categories[i % len(categories)],
                embedding=random_unit(rng, dim),
                dim=dim,
            )
        )
    return catalog_from_items(items)


def test_empty_catalog_returns_empty():
    catalog = catalog_from_items([])
    index = build_index(catalog)
    req = SearchRequest(query=unit(), category="top", limit=5)
    assert search(index, req) == []
    assert brute_force_search(catalog, req) == []


def test_single_item_found():
    item = make_item("only", embedding=unit(axis=9))
    index = build_index(catalog_from_items([item]))
    hits = search(index, SearchRequest(query=unit(axis=9), category="top", limit=1))
    assert [h.id for h in hits] == ["only"]
    assert hits[0].distance == pytest.approx(0.0, abs=1e-12)


def test_brute_force_distance_zero_for_exact_match():
    catalog = vector_catalog(10, seed=3)
    target = catalog.items["i0002"]
    hits = brute_force_search(
        catalog, SearchRequest(query=target.embedding, category=target.category, limit=1)
    )
    assert hits[0].id == "i0002"
    assert hits[0].distance == pytest.approx(0.0, abs=1e-9)


def test_brute_force_orthonormal_distance_one():
    item = make_item("a", embedding=unit(axis=0))
    catalog = catalog_from_items([item])
    hits = brute_force_search(
        catalog, SearchRequest(query=unit(axis=1), category="top", limit=1)
    )
    assert hits[0].distance == pytest.approx(1.0)


@pytest.mark.parametrize("n,seed", [(30, 0), (120, 1), (200, 2)])
def test_oracle_equivalence_at_saturated_ef(n, seed):
    catalog = vector_catalog(n, seed=seed)
    params = IndexParams(ef_search=n)
    index = build_index(catalog, params)
    rng = np.random.Generator(np.random.Philox(key=seed + 100))
    for trial in range(8):
        category = ("top", "bottom")[trial % 2]
        pool = catalog.ids_in_category(category)
        exclusions = frozenset(
            pool[i] for i in rng.choice(len(pool), size=min(3, len(pool)), replace=False)
        )
        req = SearchRequest(
            query=random_unit(rng),
            category=category,
            exclusions=exclusions,
            limit=int(rng.integers(1, 25)),
        )
        expected = brute_force_search(catalog, req)
        got = search(index, req)
        assert [h.id for h in got] == [h.id for h in expected]
        for g, e in zip(got, expected):
            assert abs(g.distance - e.distance) < 1e-6


def test_filter_soundness():
    catalog = vector_catalog(60, seed=7)
    index = build_index(catalog)
    rng = np.random.Generator(np.random.Philox(key=11))
    excluded = frozenset(list(catalog.ids_in_category("top"))[:5])
    for _ in range(10):
        req = SearchRequest(
            query=random_unit(rng), category="top", exclusions=excluded, limit=10
        )
        hits = search(index, req)
        for hit in hits:
            assert catalog.items[hit.id].category == "top"
            assert hit.id not in excluded


def test_distances_nondecreasing():
    catalog = vector_catalog(80, seed=8)
    index = build_index(catalog)
    rng = np.random.Generator(np.random.Philox(key=12))
    for _ in range(5):
        hits = search(
            index, SearchRequest(query=random_unit(rng), category="bottom", limit=20)
        )
        distances = [h.distance for h in hits]
        assert distances == sorted(distances)


def test_exclusions_do_not_displace_matches():
    # excluded nodes are traversed but never emitted: the full limit is
    # still reachable when enough non-excluded items exist
    catalog = vector_catalog(100, seed=9, categories=("top",))
    index = build_index(catalog)
    query = random_unit(np.random.Generator(np.random.Philox(key=21)))
    base = search(index, SearchRequest(query=query, category="top", limit=10))
    excluded = frozenset(h.id for h in base[:5])
    hits = search(
        index,
        SearchRequest(query=query, category="top", exclusions=excluded, limit=10),
    )
    assert len(hits) == 10
    assert not set(h.id for h in hits) & excluded


def test_rebuild_is_bit_identical():
    catalog = vector_catalog(150, seed=13)
    a = build_index(catalog, IndexParams(seed=5))
    b = build_index(catalog, IndexParams(seed=5))
    for category in a.graphs:
        ga, gb = a.graphs[category], b.graphs[category]
        assert ga.levels == gb.levels
        assert ga.neighbors == gb.neighbors
        assert ga.entry_point == gb.entry_point


def test_different_seed_changes_graph():
    catalog = vector_catalog(150, seed=13)
    a = build_index(catalog, IndexParams(seed=5))
    b = build_index(catalog, IndexParams(seed=6))
    assert any(
        a.graphs[c].levels != b.graphs[c].levels for c in a.graphs
    )


def test_fewer_matches_than_limit_returns_all():
    catalog = vector_catalog(6, seed=2)
    index = build_index(catalog)
    hits = search(index, SearchRequest(query=unit(), category="top", limit=50))
    assert len(hits) == len(catalog.ids_in_category("top"))


def test_all_excluded_returns_empty():
    catalog = vector_catalog(10, seed=4)
    index = build_index(catalog)
    everything = frozenset(catalog.ids_in_category("top"))
    hits = search(
        index,
        SearchRequest(query=unit(), category="top", exclusions=everything, limit=5),
    )
    assert hits == []


def test_params_validation():
    with pytest.raises(ValueError):
        IndexParams(m=1)
    with pytest.raises(ValueError):
        IndexParams(m=16, ef_construction=8)
    with pytest.raises(ValueError):
        SearchRequest(query=unit(), category="top", limit=0)


class TestPersistence:
    def test_round_trip_preserves_results(self, tmp_path):
        catalog = vector_catalog(90, seed=17)
        index = build_index(catalog, IndexParams(seed=3))
        path = tmp_path / "index.bin"
        save_index(index, path)
        loaded = load_index(path)
        rng = np.random.Generator(np.random.Philox(key=31))
        for _ in range(5):
            req = SearchRequest(query=random_unit(rng), category="top", limit=8)
            assert search(index, req) == search(loaded, req)
        for category in index.graphs:
            assert index.graphs[category].neighbors == loaded.graphs[category].neighbors
            assert index.graphs[category].ids == loaded.graphs[category].ids

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTANINDEX" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            load_index(path)

    def test_header_round_trips_params(self, tmp_path):
        catalog = vector_catalog(20, seed=18)
        params = IndexParams(m=8, ef_construction=32, ef_search=48, seed=77)
        index = build_index(catalog, params)
        path = tmp_path / "index.bin"
        save_index(index, path)
        assert load_index(path).params == params
