from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from outfitgen.ann import ScoredId
from outfitgen.catalog import catalog_from_items
from outfitgen.embedding import FileVectorProvider, cosine, normalize
from outfitgen.semantics import (
    MaterialContext,
    OccasionProfile,
    build_material_text,
    build_occasion_profile,
    filter_by_occasion,
    layer_compatible,
    material_weight,
    mood_score,
    occasion_score,
)

from conftest import make_item, unit, vector_with_cosines

MOOD_FIXTURE = (
    Path(__file__).resolve().parents[1] / "src" / "outfitgen" / "data" / "mood_fixture.json"
)


def profile(strictness=3.0, unconditional=0.0, keep=0.85, floor=3):
    return OccasionProfile(
        name="test",
        vibe_text="v",
        anti_vibe_text="a",
        vibe_vec=unit(axis=0),
        anti_vec=unit(axis=1),
        strictness=strictness,
        unconditional_anti_weight=unconditional,
        keep_fraction=keep,
        min_floor=floor,
    )


class TestOccasionScore:
    def test_equal_cosines_cancel_hinge(self):
        p = profile(strictness=5.0)
        vec = vector_with_cosines(p.vibe_vec, p.anti_vec, 0.4, 0.4)
        assert occasion_score(vec, p) == pytest.approx(0.4, abs=1e-9)

    def test_hinge_penalty(self):
        # 0.5 - 3.0 * (0.7 - 0.5) = -0.1
        p = profile(strictness=3.0)
        vec = vector_with_cosines(p.vibe_vec, p.anti_vec, 0.5, 0.7)
        assert occasion_score(vec, p) == pytest.approx(-0.1, abs=1e-9)

    def test_unconditional_anti_weight(self):
        # independent recomputation: -0.1 - 2.0 * 0.7 = -1.5
        def by_hand(cv, ca, lam, uncond):
            return cv - lam * max(0.0, ca - cv) - uncond * ca

        p = profile(strictness=3.0, unconditional=2.0)
        vec = vector_with_cosines(p.vibe_vec, p.anti_vec, 0.5, 0.7)
        assert by_hand(0.5, 0.7, 3.0, 2.0) == pytest.approx(-1.5)
        assert occasion_score(vec, p) == pytest.approx(-1.5, abs=1e-9)

    @given(
        cos_v=st.floats(-0.7, 0.7),
        cos_a=st.floats(-0.7, 0.7),
    )
    @settings(max_examples=60, deadline=None)
    def test_reduces_to_vibe_cosine_when_relaxed(self, cos_v, cos_a):
        p = profile(strictness=0.0, unconditional=0.0)
        vec = vector_with_cosines(p.vibe_vec, p.anti_vec, cos_v, cos_a)
        assert occasion_score(vec, p) == pytest.approx(cos_v, abs=1e-9)

    @given(
        cos_v=st.floats(-0.5, 0.5),
        lo=st.floats(-0.6, 0.6),
        hi=st.floats(-0.6, 0.6),
    )
    @settings(max_examples=60, deadline=None)
    def test_nonincreasing_in_anti_affinity(self, cos_v, lo, hi):
        lo, hi = min(lo, hi), max(lo, hi)
        p = profile(strictness=2.0, unconditional=0.5)
        low = vector_with_cosines(p.vibe_vec, p.anti_vec, cos_v, lo)
        high = vector_with_cosines(p.vibe_vec, p.anti_vec, cos_v, hi)
        assert occasion_score(high, p) <= occasion_score(low, p) + 1e-9


def scored_catalog(cosine_pairs, p):
    """Candidates named c0.. with prescribed (vibe, anti) cosines."""
    items = []
    results = []
    for i, (cv, ca) in enumerate(cosine_pairs):
        vec = vector_with_cosines(p.vibe_vec, p.anti_vec, cv, ca)
        items.append(make_item(f"c{i}", embedding=vec))
        results.append(ScoredId(f"c{i}", 0.1 + 0.01 * i))
    return catalog_from_items(items), results


class TestOccasionFilter:
    def test_equal_scores_all_kept(self):
        p = profile()
        catalog, results = scored_catalog([(0.5, 0.0)] * 6, p)
        assert filter_by_occasion(results, catalog, p) == results

    def test_floor_engages_below_threshold(self):
        p = profile(keep=0.85, floor=3)
        pairs = [(0.9, 0.0)] + [(0.2, 0.0)] * 9  # one dominant positive
        catalog, results = scored_catalog(pairs, p)
        kept = filter_by_occasion(results, catalog, p)
        assert len(kept) == 3
        assert kept[0].id == "c0"

    def test_two_candidates_always_survive(self):
        p = profile(keep=0.85, floor=3)
        catalog, results = scored_catalog([(0.9, 0.0), (-0.5, 0.8)], p)
        assert len(filter_by_occasion(results, catalog, p)) == 2

    def test_nonpositive_top_keeps_floor_only(self):
        p = profile(keep=0.85, floor=3)
        catalog, results = scored_catalog([(-0.1, 0.5)] * 5, p)
        assert len(filter_by_occasion(results, catalog, p)) == 3

    def test_preserves_input_order(self):
        p = profile(keep=0.5, floor=1)
        pairs = [(0.9, 0.0), (0.8, 0.0), (0.85, 0.0), (0.1, 0.0)]
        catalog, results = scored_catalog(pairs, p)
        kept = filter_by_occasion(results, catalog, p)
        assert [k.id for k in kept] == ["c0", "c1", "c2"]

    def test_empty_input(self):
        p = profile()
        assert filter_by_occasion([], catalog_from_items([]), p) == []

    @given(n=st.integers(1, 12), floor=st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_output_at_least_floor(self, n, floor):
        p = profile(keep=0.99, floor=floor)
        rng = np.random.Generator(np.random.Philox(key=n * 7 + floor))
        pairs = [(float(rng.uniform(-0.6, 0.6)), float(rng.uniform(-0.6, 0.6))) for _ in range(n)]
        catalog, results = scored_catalog(pairs, p)
        kept = filter_by_occasion(results, catalog, p)
        assert len(kept) >= min(floor, n)


class _FixedProvider:
    """Maps exact texts to prescribed vectors."""

    def __init__(self, table):
        self.table = table
        self.dimension = 512

    def embed_text(self, text):
        return self.table[text]


class TestMaterialWeight:
    def test_item_equals_heavy_anchor(self):
        h, light = unit(axis=0), normalize(unit(axis=0) * 0.3 + unit(axis=1))
        ctx = MaterialContext(heavy_vec=h, light_vec=light)
        p = _FixedProvider({"wool coat": h})
        expected = 1.0 - cosine(h, light)
        assert material_weight(ctx, "wool coat", p) == pytest.approx(expected, abs=1e-9)

    def test_equidistant_text_is_zero(self):
        h, light = unit(axis=0), unit(axis=1)
        mid = normalize(h + light)
        ctx = MaterialContext(heavy_vec=h, light_vec=light)
        p = _FixedProvider({"mid": mid})
        assert material_weight(ctx, "mid", p) == pytest.approx(0.0, abs=1e-9)

    def test_synthetic_contexts_order_heavy_above_light(self, provider):
        heavy = provider.embed_text("thick heavy warm winter chunky wool coat padded")
        light = provider.embed_text("thin light airy breathable summer chiffon sheer")
        ctx = MaterialContext(heavy_vec=heavy, light_vec=light)
        w_coat = material_weight(ctx, "thick heavy wool coat", provider)
        w_blouse = material_weight(ctx, "thin light chiffon blouse", provider)
        assert w_coat > w_blouse
        assert w_coat > 0 > w_blouse

    def test_empty_text_rejected(self, provider):
        ctx = MaterialContext(heavy_vec=unit(), light_vec=unit(axis=1))
        with pytest.raises(ValueError):
            material_weight(ctx, "  ", provider)

    def test_material_text_includes_weight_keywords(self):
        item = make_item(
            "x", category="layer", material="wool", name="navy chunky wool coat"
        )
        text = build_material_text(item, {"chunky", "sheer"})
        assert text == "wool layer chunky"


class TestLayerCompatible:
    def test_coat_over_blouse(self):
        assert layer_compatible(0.4, -0.3, 0.15) is True

    def test_tshirt_over_coat(self):
        assert layer_compatible(-0.3, 0.4, 0.15) is False

    @given(x=st.floats(-1, 1))
    @settings(max_examples=30, deadline=None)
    def test_boundary_equality(self, x):
        assert layer_compatible(x, x, 0.0) is True

    @given(
        w_top=st.floats(-1, 1),
        w_low=st.floats(-1, 1),
        bump=st.floats(0, 1),
        tau=st.floats(0, 0.5),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_layer_weight(self, w_top, w_low, bump, tau):
        if layer_compatible(w_low, w_top, tau):
            assert layer_compatible(w_low + bump, w_top, tau)


class TestMoodScore:
    def test_single_tag_is_its_cosine(self, provider):
        item = make_item("x", tags=["sporty"])
        expected = cosine(provider.embed_text("sporty"), provider.embed_text("workout"))
        assert mood_score(item, "workout", provider) == pytest.approx(expected)

    def test_real_model_fixture_value(self):
        provider = FileVectorProvider(MOOD_FIXTURE)
        item = make_item("x", tags=["sporty", "casual", "classic"])
        assert mood_score(item, "workout", provider) == pytest.approx(0.69, abs=1e-9)

    def test_adding_tag_never_decreases(self, provider):
        base = make_item("x", tags=["classic", "chic"])
        extended = make_item("y", tags=["classic", "chic", "sporty"])
        assert mood_score(extended, "workout", provider) >= mood_score(
            base, "workout", provider
        )

    def test_union_is_max_of_parts(self, provider):
        a = make_item("a", tags=["classic", "minimal"])
        b = make_item("b", tags=["sporty", "edgy"])
        both = make_item("c", tags=["classic", "minimal", "sporty", "edgy"])
        assert mood_score(both, "workout", provider) == pytest.approx(
            max(
                mood_score(a, "workout", provider),
                mood_score(b, "workout", provider),
            )
        )

    def test_empty_tags_rejected(self, provider):
        item = make_item("x")
        item.style_tags = []
        with pytest.raises(ValueError):
            mood_score(item, "workout", provider)


def test_build_occasion_profile_embeds_prose(provider):
    p = build_occasion_profile(
        "work", "professional office", "clubbing sequined", provider,
        strictness=3.0, unconditional_anti_weight=2.0, keep_fraction=0.85,
    )
    assert np.array_equal(p.vibe_vec, provider.embed_text("professional office"))
    assert np.array_equal(p.anti_vec, provider.embed_text("clubbing sequined"))
    assert p.min_floor == 3


def test_profile_validation():
    with pytest.raises(ValueError):
        profile(strictness=-1.0)
    with pytest.raises(ValueError):
        profile(keep=0.0)
    with pytest.raises(ValueError):
        MaterialContext(heavy_vec=unit(), light_vec=unit(axis=1), tau=-0.1)
