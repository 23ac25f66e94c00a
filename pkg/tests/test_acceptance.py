"""Acceptance suite: one test per release criterion, run at stated
tolerances and budgets, printing one PASS/FAIL line each.

The ablation criteria share a single seed-42 sweep over the 620-item
synthetic catalog with 50 shared anchors (session fixture).
"""

import math
import time

import numpy as np
import pytest

from outfitgen.ann import IndexParams, SearchRequest, brute_force_search, build_index, search
from outfitgen.cache import INVALIDATION_MAP, OutfitCache, invalidate_on_add
from outfitgen.catalog import catalog_from_items
from outfitgen.config import EngineConfig, prepare_runtime
from outfitgen.embedding import (
    BlendWeights,
    SyntheticProvider,
    blend_embedding,
    hash64,
)
from outfitgen.generator import GenerationRequest, generate_three_outfits
from outfitgen.harness import run_ablation, ablation_report, synth_catalog
from outfitgen.personalization import TasteProfile, update_taste
from outfitgen.scoring import SlotWeights, intent_vector, similarity_score, total_score
from outfitgen.semantics import (
    MaterialContext,
    OccasionProfile,
    annotate_material_weights,
    material_weight,
    occasion_score,
)

from conftest import make_item, random_unit, unit


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def scalar_cos(a, b):
    dot = math.fsum(float(x) * float(y) for x, y in zip(a, b))
    na = math.sqrt(math.fsum(float(x) ** 2 for x in a))
    nb = math.sqrt(math.fsum(float(x) ** 2 for x in b))
    return dot / (na * nb)


@pytest.fixture(scope="session")
def ablation_outputs():
    return run_ablation(seed=42, n_anchors=50, measure_latency=True)


# --- criterion 1: equation conformance -------------------------------------

def test_equation_conformance():
    started = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=314159))
    worst = 0.0

    for _ in range(100):
        img, txt = random_unit(rng, 64), random_unit(rng, 64)
        got = blend_embedding(img, txt, BlendWeights(0.7, 0.3))
        mixed = [0.7 * a + 0.3 * b for a, b in zip(img, txt)]
        norm = math.sqrt(math.fsum(c * c for c in mixed))
        expected = [c / norm for c in mixed]
        worst = max(worst, max(abs(g - e) for g, e in zip(got, expected)))

    for _ in range(100):
        e, v, a = (random_unit(rng, 64) for _ in range(3))
        lam = float(rng.uniform(0, 4))
        uncond = float(rng.choice([0.0, 2.0]))
        profile = OccasionProfile(
            name="x", vibe_text="v", anti_vibe_text="a",
            vibe_vec=v, anti_vec=a, strictness=lam,
            unconditional_anti_weight=uncond,
        )
        cv, ca = scalar_cos(e, v), scalar_cos(e, a)
        expected = cv - lam * max(0.0, ca - cv) - uncond * ca
        worst = max(worst, abs(occasion_score(e, profile) - expected))

    class OneShotProvider:
        def __init__(self, vec):
            self.vec = vec

        def embed_text(self, text):
            return self.vec

    for _ in range(100):
        e, h, light = (random_unit(rng, 64) for _ in range(3))
        ctx = MaterialContext(heavy_vec=h, light_vec=light)
        got = material_weight(ctx, "material text", OneShotProvider(e))
        expected = scalar_cos(e, h) - scalar_cos(e, light)
        worst = max(worst, abs(got - expected))

    for _ in range(100):
        anchor = make_item("a", embedding=random_unit(rng, 64), dim=64)
        taste = TasteProfile(
            t_like=rng.standard_normal(64), t_dislike=rng.standard_normal(64)
        )
        got = intent_vector(anchor, taste).vector
        expected = [
            x + 0.15 * l - 0.05 * d
            for x, l, d in zip(anchor.embedding, taste.t_like, taste.t_dislike)
        ]
        worst = max(worst, max(abs(g - e) for g, e in zip(got, expected)))

    weight_map = {"top": 0.10, "bottom": 0.35, "shoes": 0.25, "layer": 0.10,
                  "accessory": 0.15}
    weights = SlotWeights()
    for _ in range(100):
        vec = rng.standard_normal(64)
        slots = {
            s: make_item(s, category=s, embedding=random_unit(rng, 64), dim=64)
            for s in weight_map
            if rng.random() < 0.8 or s == "bottom"
        }
        from outfitgen.scoring import IntentVector

        got = similarity_score(slots, IntentVector(vector=vec), weights)
        expected = math.fsum(
            weight_map[s] * scalar_cos(vec, i.embedding) for s, i in slots.items()
        )
        if "bottom" in slots and "shoes" in slots:
            expected += 0.05 * scalar_cos(
                slots["bottom"].embedding, slots["shoes"].embedding
            )
        worst = max(worst, abs(got - expected))

    from outfitgen.config import default_directions, default_rules

    rules = default_rules()
    directions = default_directions()
    neutrals = rules.neutral_colors
    colors = ["red", "teal", "gray", "black", "mustard", "plum"]
    tag_pool = [["classic"], ["sporty"], ["sequined"], ["chic"], ["edgy", "metallic"]]
    occ_pool = [{"casual"}, {"work"}, {"going-out"}, set()]
    for _ in range(100):
        anchor = make_item(
            "anchor", color=colors[rng.integers(len(colors))],
            tags=tag_pool[rng.integers(len(tag_pool))],
            occasions=occ_pool[rng.integers(len(occ_pool))],
            embedding=random_unit(rng, 64), dim=64,
            name="plain top",
        )
        slots = {}
        for s in ("bottom", "shoes", "layer", "accessory"):
            if rng.random() < 0.75 or s == "bottom":
                slots[s] = make_item(
                    s, category=s, color=colors[rng.integers(len(colors))],
                    tags=tag_pool[rng.integers(len(tag_pool))],
                    occasions=occ_pool[rng.integers(len(occ_pool))],
                    embedding=random_unit(rng, 64), dim=64,
                    name=f"plain {s}",
                )
        direction = directions[int(rng.integers(3))]
        intent = intent_vector(anchor, None)
        got = total_score(anchor, slots, intent, direction, rules, weights)

        # independent recomputation of every component
        items = [anchor] + list(slots.values())
        sim = math.fsum(
            weight_map[s] * scalar_cos(intent.vector, i.embedding)
            for s, i in slots.items()
        )
        if "bottom" in slots and "shoes" in slots:
            sim += 0.05 * scalar_cos(slots["bottom"].embedding, slots["shoes"].embedding)
        tagged = sum(1 for i in items if set(i.style_tags) & direction.style_tags)
        louds = [i.color for i in items if i.color and i.color not in neutrals]
        families = {rules.color_families.get(c, c) for c in louds}
        if direction.color_policy == "neutrals":
            adherence = sum(1 for i in items if i.color in neutrals) / len(items)
        elif direction.color_policy == "two-tone":
            adherence = 1.0 if len(families) <= 2 else 0.0
        else:
            adherence = 1.0 if len(families) >= 2 else 0.0
        d_bonus = min(0.3, 0.3 * (0.5 * tagged / len(items) + 0.5 * adherence))
        harmony = 0.05 if len(families) <= 1 else (-0.05 if len(families) >= 3 else 0.0)
        color_p = 0.1 * max(0, len(louds) - 2)
        level = {i.id: 1 for i in items}
        for i in items:
            tokens = set(i.name.lower().split()) | set(i.style_tags) | {i.material, i.category}
            hi = any(t in rules.formality_high or t.rstrip("s") in rules.formality_high for t in tokens)
            lo = any(t in rules.formality_low or t.rstrip("s") in rules.formality_low for t in tokens)
            level[i.id] = 2 if hi and not lo else (0 if lo and not hi else 1)
        form_p = 0.2 * max(0, (max(level.values()) - min(level.values())) - 1)
        tag_sets = [i.occasion_tags for i in items if i.occasion_tags]
        occ_p = 0.15 if tag_sets and not set.intersection(*tag_sets) else 0.0
        statements = sum(
            1 for i in items if set(i.style_tags) & rules.statement_tags
        )
        div_p = 0.1 * max(0, statements - 1)
        violation = bool(anchor.color) and anchor.color not in neutrals and any(
            i.color == anchor.color for i in items[1:]
        )
        expected_total = (
            -1.0 if violation
            else sim + d_bonus + harmony - color_p - form_p - occ_p - div_p
        )
        worst = max(worst, abs(got.total - expected_total))

    elapsed = time.perf_counter() - started
    report(
        "equation conformance (blend, occasion, material, intent, similarity, total)",
        worst <= 1e-9 and elapsed < 5.0,
        f"max |diff| {worst:.2e}, {elapsed:.1f}s",
    )


# --- criterion 2: oracle equivalence + recall --------------------------------

def test_oracle_equivalence_and_recall():
    started = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=271828))

    exact_ok = True
    for n in (50, 120, 200):
        items = [
            make_item(f"i{k:04d}", category=("top", "bottom")[k % 2],
                      embedding=random_unit(rng))
            for k in range(n)
        ]
        catalog = catalog_from_items(items)
        index = build_index(catalog, IndexParams(ef_search=n))
        for _ in range(6):
            category = ("top", "bottom")[int(rng.integers(2))]
            pool = catalog.ids_in_category(category)
            excl = frozenset(
                pool[i] for i in rng.choice(len(pool), size=4, replace=False)
            )
            req = SearchRequest(
                query=random_unit(rng), category=category,
                exclusions=excl, limit=int(rng.integers(1, 30)),
            )
            expected = brute_force_search(catalog, req)
            got = search(index, req)
            if [h.id for h in got] != [h.id for h in expected]:
                exact_ok = False
            elif any(abs(g.distance - e.distance) > 1e-6 for g, e in zip(got, expected)):
                exact_ok = False

    big = catalog_from_items(
        [make_item(f"v{k:04d}", embedding=random_unit(rng)) for k in range(1000)]
    )
    index = build_index(big, IndexParams())
    recalls = []
    for _ in range(50):
        req = SearchRequest(query=random_unit(rng), category="top", limit=10)
        truth = {h.id for h in brute_force_search(big, req)}
        got = {h.id for h in search(index, req)}
        recalls.append(len(got & truth) / 10)
    recall = float(np.mean(recalls))

    elapsed = time.perf_counter() - started
    report(
        "oracle equivalence (catalogs <= 200) and recall@10 >= 0.95 at defaults",
        exact_ok and recall >= 0.95 and elapsed < 30.0,
        f"recall {recall:.3f}, {elapsed:.1f}s",
    )


# --- criteria 3-5, 8: the shared seed-42 ablation sweep -----------------------

def test_ablation_directionality(ablation_outputs):
    full = ablation_outputs["full"].metrics
    random_m = ablation_outputs["random"].metrics
    no_dir = ablation_outputs["no_direction"].metrics
    bonuses = [
        o.breakdown.direction_bonus
        for r in ablation_outputs["no_direction"].results
        for o in r.outfits()
    ]
    ok = (
        full.mean_score >= 2 * random_m.mean_score
        and full.violation_rate < random_m.violation_rate
        and no_dir.mean_score < full.mean_score / 2
        and bonuses
        and all(b == 0.0 for b in bonuses)
    )
    report(
        "ablation directionality (seed 42, 620 items, 50 shared anchors)",
        ok,
        f"full {full.mean_score:.3f}/{full.violation_rate:.1%}, "
        f"random {random_m.mean_score:.3f}/{random_m.violation_rate:.1%}, "
        f"no_direction {no_dir.mean_score:.3f}",
    )


def test_structural_invariants(ablation_outputs):
    config = EngineConfig()
    tau = config.tau
    problems = []
    for name, output in ablation_outputs.items():
        for result in output.results:
            seen: set[str] = set()
            for outcome in result.outcomes:
                if outcome.scored_candidates > 8:
                    problems.append(f"{name}: >8 candidates scored")
                outfit = outcome.outfit
                if outfit is None:
                    continue
                ids = set(outfit.item_ids())
                if result.anchor_id in ids or ids & seen:
                    problems.append(f"{name}: exclusion breach for {result.anchor_id}")
                seen |= ids
                b = outfit.breakdown
                if b.hard_violation and b.total != -1.0:
                    problems.append(f"{name}: hard violation not -1")
                if not b.hard_violation:
                    total = (
                        b.similarity + b.direction_bonus + b.harmony_bonus
                        - b.color_penalty - b.formality_penalty
                        - b.occasion_penalty - b.diversity_penalty
                    )
                    if abs(total - b.total) > 1e-9:
                        problems.append(f"{name}: breakdown identity broken")
                # the material filter is embedding-derived, so the two
                # configurations that ignore embeddings or the filter itself
                # (random, no_material) are exempt from the layer invariant
                if name not in ("no_material", "random"):
                    layer = outfit.slots.get("layer") or (
                        outfit.anchor if outfit.anchor.category == "layer" else None
                    )
                    covered = outfit.slots.get("top") or (
                        outfit.anchor
                        if outfit.anchor.category in ("top", "dress")
                        else None
                    )
                    if (
                        layer is not None
                        and covered is not None
                        and layer.material_weight is not None
                        and covered.material_weight is not None
                        and layer.material_weight < covered.material_weight - tau
                    ):
                        problems.append(f"{name}: incompatible layer selected")
    report(
        "structural invariants across the ablation run",
        not problems,
        problems[0] if problems else "disjointness, cap, layer compat, -1, sum identity",
    )


def test_diversity(ablation_outputs):
    full = ablation_outputs["full"].metrics
    no_dir = ablation_outputs["no_direction"].metrics
    ok = (
        4.0 <= full.mean_slot_diversity <= 5.0
        and full.mean_distinct_colors > no_dir.mean_distinct_colors
    )
    report(
        "diversity (slot diversity in [4,5]; full colors > no_direction colors)",
        ok,
        f"slots {full.mean_slot_diversity:.2f}, colors {full.mean_distinct_colors:.2f} "
        f"vs {no_dir.mean_distinct_colors:.2f}",
    )


def test_latency(ablation_outputs):
    full = ablation_outputs["full"].metrics
    ok = 0 < full.latency_mean_ms < 1000.0
    report(
        "latency: generate_three_outfits mean < 1 s on the 620-item catalog",
        ok,
        f"mean {full.latency_mean_ms:.1f} ms, p95 {full.latency_p95_ms:.1f} ms",
    )


# --- criterion 6: invalidation map + soundness --------------------------------

def test_invalidation_map_and_soundness():
    table_ok = INVALIDATION_MAP == {
        "top": frozenset({"bottom", "shoes", "dress"}),
        "bottom": frozenset({"top", "shoes"}),
        "shoes": frozenset({"top", "bottom", "dress"}),
        "layer": frozenset({"top", "bottom", "shoes", "dress"}),
        "accessory": frozenset({"top", "bottom", "shoes", "dress", "layer"}),
        "dress": frozenset({"shoes"}),
    }

    config = EngineConfig()
    provider = SyntheticProvider(seed=config.provider_seed)
    composition = {"top": 14, "bottom": 12, "shoes": 10, "dress": 4, "layer": 12, "accessory": 8}
    catalog = synth_catalog(60, composition, provider, config.blend)
    assert len(catalog) == 60
    runtime = prepare_runtime(config, provider)
    annotate_material_weights(catalog, runtime.material_ctx, provider, set(config.weight_keywords))

    def generate_payload(cat, index, anchor_id):
        request = GenerationRequest(
            anchor_id=anchor_id, occasion="casual", seed=hash64(0, anchor_id, "casual")
        )
        result = generate_three_outfits(request, cat, index, None, runtime)
        return [
            (o.direction, o.gap, o.outfit.item_ids() if o.outfit else None,
             o.outfit.breakdown.total if o.outfit else None)
            for o in result.outcomes
        ]

    index = build_index(catalog, config.ann)
    cache = OutfitCache()
    cached_categories = ("top", "bottom", "shoes", "dress")
    for category in cached_categories:
        for anchor_id in catalog.ids_in_category(category):
            cache.put(anchor_id, "casual", category, generate_payload(catalog, index, anchor_id))

    sound = True
    detail = ""
    for new_category in ("top", "bottom", "shoes", "dress", "layer", "accessory"):
        trial_cache = OutfitCache()
        trial_cache.entries.update(dict(cache.entries))
        new_item = make_item(
            f"fresh-{new_category}", category=new_category,
            tags=["classic", "elegant"], occasions={"casual"},
            embedding=provider.embed_text(f"classic elegant wool coat {new_category}"),
            material_weight=0.2,
        )
        grown = catalog_from_items(list(catalog.items.values()) + [new_item])
        evicted = set(invalidate_on_add(trial_cache, grown, new_item))
        grown_index = build_index(grown, config.ann)
        for key, entry in trial_cache.entries.items():
            regenerated = generate_payload(grown, grown_index, key[0])
            if regenerated != entry.payload:
                sound = False
                detail = f"stale entry {key} after adding {new_category}"
                break
        if not sound:
            break

    report(
        "invalidation map verbatim + invalidate-then-regenerate soundness (60 items)",
        table_ok and sound,
        detail or f"{len(cache)} cached anchors checked against 6 addition categories",
    )


# --- criterion 7: determinism --------------------------------------------------

def test_determinism(tmp_path):
    composition = {"top": 16, "bottom": 12, "shoes": 10, "dress": 4, "layer": 8, "accessory": 6}
    runs = []
    for _ in range(2):
        outputs = run_ablation(
            seed=42, n_anchors=10, composition=composition, measure_latency=False
        )
        _, csv_text = ablation_report({k: v.metrics for k, v in outputs.items()})
        runs.append(csv_text.encode("utf-8"))
    reports_identical = runs[0] == runs[1]

    from fastapi.testclient import TestClient

    from outfitgen.service import build_state, create_app

    config = EngineConfig()
    provider = SyntheticProvider(seed=config.provider_seed)
    catalog = synth_catalog(42, composition, provider, config.blend)
    responses = []
    for _ in range(2):
        state = build_state(catalog, config, provider)
        client = TestClient(create_app(state))
        response = client.get(
            "/outfits", params={"anchor": "top-001", "occasion": "work", "seed": 7}
        )
        responses.append(response.content)
    service_identical = responses[0] == responses[1]

    report(
        "determinism: byte-identical ablation reports and service responses",
        reports_identical and service_identical,
        f"report bytes {len(runs[0])}, response bytes {len(responses[0])}",
    )


# --- criterion 9: taste loop ----------------------------------------------------

def test_taste_loop():
    rng = np.random.Generator(np.random.Philox(key=161803))
    increased = 0
    trials = 100
    for _ in range(trials):
        anchor = make_item("a", embedding=random_unit(rng))
        outfit = [random_unit(rng) for _ in range(int(rng.integers(2, 6)))]
        mean_vec = np.mean(np.stack(outfit), axis=0)
        before = scalar_cos(intent_vector(anchor, TasteProfile()).vector, mean_vec)
        liked = update_taste(TasteProfile(), outfit, liked=True)
        after = scalar_cos(intent_vector(anchor, liked).vector, mean_vec)
        if after > before:
            increased += 1
    report(
        "taste loop: one like strictly raises cos(intent, liked-outfit mean)",
        increased == trials,
        f"{increased}/{trials} fixtures",
    )
