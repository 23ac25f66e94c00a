"""Experiment harness: synthetic catalog, ablations, metrics, reports.

The synthetic catalog draws item attributes from persona-structured
vocabularies chosen so the qualitative orderings the engine relies on
emerge from token overlap alone: occasion anti-vibes share tokens with
party-leaning tags, the heavy/light context strings contain the
material names, and direction tags appear on a majority of items.  See
docs/experiments.md for the full construction.

Eight configurations run over one shared anchor sample: the full
system, six single-component ablations, and a category-constrained
random baseline that never touches the index but is scored by the same
objective.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ann import build_index
from .catalog import Catalog, Item, catalog_from_items, with_reblended_embeddings
from .config import EngineConfig, Runtime, disabled_directions, prepare_runtime
from .embedding import BlendWeights, SyntheticProvider, blend_embedding, hash64
from .generator import (
    DirectionOutcome,
    GenerationRequest,
    GenerationResult,
    OutfitCandidate,
    generate_three_outfits,
    slot_layout,
)
from .scoring import SLOT_ORDER, intent_vector, total_score
from .semantics import annotate_material_weights

ABLATIONS = (
    "full",
    "no_blend",
    "no_occasion",
    "no_material",
    "no_noise",
    "no_direction",
    "no_formality",
    "random",
)

ABLATION_LABELS = {
    "full": "Full system",
    "no_blend": "- Blended embed",
    "no_occasion": "- Occasion filtering",
    "no_material": "- Material compat.",
    "no_noise": "- Distance noise",
    "no_direction": "- Direction reranking",
    "no_formality": "- Formality check",
    "random": "Random retrieval",
}

DEFAULT_COMPOSITION = {
    "top": 200,
    "bottom": 150,
    "shoes": 120,
    "dress": 40,
    "layer": 80,
    "accessory": 30,
}

NEUTRAL_POOL = ["black", "white", "gray", "beige", "navy", "brown"]
LOUD_POOL = ["red", "coral", "teal", "cobalt", "mustard", "emerald", "plum"]
FIT_WORDS = ["fitted", "relaxed", "oversized", "cropped", "longline", "slim", "boxy", "draped"]
TEXTURE_WORDS = ["ribbed", "woven", "brushed", "washed", "matte", "glossy",
                 "textured", "smooth", "crinkled", "waffle"]

_MATERIALS = {
    "top": ["silk", "satin", "linen", "chiffon", "mesh", "wool", "fleece"],
    "bottom": ["denim", "wool", "linen", "corduroy", "satin"],
    "shoes": ["leather", "suede", "satin", "mesh"],
    "dress": ["chiffon", "silk", "satin", "linen", "crepe"],
    "layer": ["wool", "leather", "tweed", "corduroy", "fleece", "denim", "chiffon", "mesh", "satin"],
    "accessory": ["leather", "silk", "satin", "suede"],
}

_HEAVY_MATERIALS = {"wool", "leather", "suede", "denim", "tweed", "corduroy", "fleece"}
_HEAVY_NAME_WORDS = ["chunky", "thick", "padded", "warm"]
_LIGHT_NAME_WORDS = ["sheer", "airy", "light", "flowy"]

_PERSONAS = {
    "classic": {
        "weight": 0.28,
        "tags": ["classic", "minimal", "elegant", "preppy", "tailored"],
        "neutral_prob": 0.85,
        "occasions": ["work", "smart-casual"],
        "nouns": {
            "top": ["blouse", "shirt", "sweater"],
            "bottom": ["trousers", "skirt"],
            "shoes": ["loafers", "heels", "oxfords"],
            "dress": ["dress"],
            "layer": ["blazer", "coat"],
            "accessory": ["belt", "scarf", "bag"],
        },
    },
    "trendy": {
        "weight": 0.22,
        "tags": ["streetwear", "chic", "casual", "modern"],
        "neutral_prob": 0.50,
        "occasions": ["casual", "going-out", "smart-casual"],
        "nouns": {
            "top": ["top", "tee", "shirt"],
            "bottom": ["jeans", "skirt", "pants"],
            "shoes": ["sneakers", "boots", "flats"],
            "dress": ["dress"],
            "layer": ["jacket", "cardigan"],
            "accessory": ["bag", "necklace", "scarf"],
        },
    },
    "bold": {
        "weight": 0.16,
        "tags": ["edgy", "statement", "romantic", "bohemian", "sequined",
                 "metallic", "clubbing"],
        "neutral_prob": 0.30,
        "occasions": ["going-out", "casual"],
        "nouns": {
            "top": ["top", "blouse", "tank"],
            "bottom": ["skirt", "pants", "jeans"],
            "shoes": ["heels", "boots"],
            "dress": ["dress"],
            "layer": ["jacket", "coat"],
            "accessory": ["necklace", "bag", "belt"],
        },
    },
    "sporty": {
        "weight": 0.16,
        "tags": ["sporty", "casual", "relaxed"],
        "neutral_prob": 0.55,
        "occasions": ["casual"],
        "nouns": {
            "top": ["tee", "hoodie", "top"],
            "bottom": ["joggers", "pants"],
            "shoes": ["sneakers"],
            "dress": ["dress"],
            "layer": ["jacket"],
            "accessory": ["bag", "belt"],
        },
    },
    "plain": {
        "weight": 0.18,
        "tags": ["fitted", "relaxed", "vintage", "cozy", "modern"],
        "neutral_prob": 0.60,
        "occasions": ["casual", "smart-casual"],
        "nouns": {
            "top": ["top", "shirt", "sweater"],
            "bottom": ["jeans", "pants", "skirt"],
            "shoes": ["flats", "boots", "sneakers"],
            "dress": ["dress"],
            "layer": ["cardigan", "coat"],
            "accessory": ["scarf", "bag", "belt"],
        },
    },
}


@dataclass
class RunMetrics:
    config: str
    mean_score: float
    violation_rate: float
    mean_distinct_colors: float
    mean_slot_diversity: float
    latency_mean_ms: float
    latency_p95_ms: float
    outfit_count: int
    unfillable: int


@dataclass
class RunOutput:
    metrics: RunMetrics
    results: list[GenerationResult] = field(default_factory=list)


def synth_catalog(
    seed: int,
    composition: dict[str, int] | None = None,
    provider: SyntheticProvider | None = None,
    blend: BlendWeights = BlendWeights(),
) -> Catalog:
    """Deterministic synthetic catalog with persona-structured attributes.

    Items carry both an image-side and a text-side embedding (the text
    side alone sees the material) blended per the given weights, so the
    blend ablation can re-derive embeddings from the stored pair.
    """
    composition = dict(DEFAULT_COMPOSITION if composition is None else composition)
    if provider is None:
        provider = SyntheticProvider(seed=7)
    rng = np.random.Generator(np.random.Philox(key=hash64(seed, "synth-catalog")))
    persona_names = list(_PERSONAS)
    persona_weights = np.array([_PERSONAS[p]["weight"] for p in persona_names])
    persona_weights = persona_weights / persona_weights.sum()

    items: list[Item] = []
    for category in ("top", "bottom", "shoes", "dress", "layer", "accessory"):
        for i in range(composition.get(category, 0)):
            persona = _PERSONAS[persona_names[rng.choice(len(persona_names), p=persona_weights)]]
            if rng.random() < persona["neutral_prob"]:
                color = NEUTRAL_POOL[rng.choice(len(NEUTRAL_POOL))]
            else:
                color = LOUD_POOL[rng.choice(len(LOUD_POOL))]
            material = _MATERIALS[category][rng.choice(len(_MATERIALS[category]))]
            tag_pool = persona["tags"]
            tags = sorted(
                tag_pool[j] for j in rng.choice(len(tag_pool), size=2, replace=False)
            )
            occ_pool = persona["occasions"]
            if rng.random() < 0.10:
                occasions: set[str] = set()  # wildcard item
            else:
                n_occ = int(rng.integers(1, min(len(occ_pool), 2) + 1))
                occasions = {occ_pool[j] for j in rng.choice(len(occ_pool), size=n_occ, replace=False)}

            noun = persona["nouns"][category][rng.choice(len(persona["nouns"][category]))]
            fit = FIT_WORDS[rng.choice(len(FIT_WORDS))]
            texture = TEXTURE_WORDS[rng.choice(len(TEXTURE_WORDS))]
            name_words = [color, fit]
            if rng.random() < 0.30:
                pool = _HEAVY_NAME_WORDS if material in _HEAVY_MATERIALS else _LIGHT_NAME_WORDS
                name_words.append(pool[rng.choice(len(pool))])
            if persona["tags"][0] == "sporty" and rng.random() < 0.5:
                name_words.append("workout" if rng.random() < 0.5 else "gym")
            name_words.append(tags[0])
            name_words.append(material)
            name_words.append(noun)
            name = " ".join(name_words)

            # Color stays out of both embedding sides: a color channel makes
            # anchor-colored items systematically outrank equal-tag items and
            # poison every slot shortlist for loud anchors.  Color still acts
            # through the rerank multipliers and the scoring penalties.  The
            # garment noun and fit word keep same-persona items
            # distinguishable.
            text_desc = " ".join([*tags, texture, material, noun, category])
            image_desc = " ".join([category, *tags, fit, texture, noun])
            text_vec = provider.embed_text(text_desc)
            image_vec = provider.embed_text(image_desc)
            items.append(
                Item(
                    id=f"{category}-{i:03d}",
                    name=name,
                    category=category,
                    color=color,
                    material=material,
                    style_tags=list(tags),
                    occasion_tags=occasions,
                    embedding=blend_embedding(image_vec, text_vec, blend),
                    image_embedding=image_vec,
                    text_embedding=text_vec,
                )
            )
    return catalog_from_items(items)


def sample_anchors(catalog: Catalog, n: int, seed: int) -> list[str]:
    """Mixed anchors, uniform over (nonempty) categories, no repeats."""
    rng = np.random.Generator(np.random.Philox(key=hash64(seed, "anchors")))
    pools = {c: list(ids) for c, ids in catalog.by_category.items() if ids}
    anchors: list[str] = []
    while len(anchors) < n and pools:
        categories = sorted(pools)
        category = categories[rng.choice(len(categories))]
        pool = pools[category]
        pick = int(rng.choice(len(pool)))
        anchors.append(pool.pop(pick))
        if not pool:
            del pools[category]
    return anchors


def config_for_ablation(name: str, base: EngineConfig) -> EngineConfig:
    if name not in ABLATIONS:
        raise KeyError(f"unknown ablation {name!r}")
    config = EngineConfig.from_dict(base.to_dict())
    if name == "no_blend":
        config.blend = BlendWeights(alpha=1.0, beta=0.0)
    elif name == "no_occasion":
        config.occasion_filtering = False
    elif name == "no_material":
        config.material_filtering = False
    elif name == "no_noise":
        config.retrieval.noise_low = 1.0
        config.retrieval.noise_high = 1.0
    elif name == "no_direction":
        config.directions = disabled_directions(config.directions)
    elif name == "no_formality":
        config.rules.formality_penalty_rate = 0.0
    return config


def _random_outfits(
    anchor: Item,
    catalog: Catalog,
    runtime: Runtime,
    seed: int,
) -> GenerationResult:
    """Category-constrained random baseline: uniform per-slot sampling with
    exclusions, scored by the same objective, never consulting the index."""
    rng = np.random.Generator(np.random.Philox(key=hash64(seed, "random", anchor.id)))
    config = runtime.config
    intent = intent_vector(anchor, None, config.gamma, config.delta)
    required, optional = slot_layout(anchor)
    wanted = [s for s in SLOT_ORDER if s in required | optional]
    result = GenerationResult(anchor_id=anchor.id, occasion="", seed=seed)
    exclusions: set[str] = {anchor.id}
    for direction in runtime.directions:
        slots: dict[str, Item] = {}
        missing_required = None
        for slot in wanted:
            pool = [i for i in catalog.ids_in_category(slot) if i not in exclusions]
            if not pool:
                if slot in required:
                    missing_required = slot
                    break
                continue
            slots[slot] = catalog.items[pool[int(rng.choice(len(pool)))]]
        if missing_required is not None:
            result.outcomes.append(
                DirectionOutcome(direction=direction.name, gap=f"unfillable slot: {missing_required}")
            )
            continue
        candidate = OutfitCandidate(
            anchor=anchor, slots=slots, direction=direction.name, rank_sum=0
        )
        candidate.breakdown = total_score(
            anchor, slots, intent, direction, config.rules, config.slot_weights
        )
        exclusions.update(candidate.item_ids())
        result.outcomes.append(
            DirectionOutcome(direction=direction.name, outfit=candidate, scored_candidates=1)
        )
    return result


def diversity_metrics(results: list[GenerationResult]) -> tuple[float, float]:
    """(mean distinct colors per anchor across its outfits,
    mean distinct categories per outfit)."""
    color_counts: list[int] = []
    slot_counts: list[int] = []
    for result in results:
        outfits = result.outfits()
        if not outfits:
            continue
        colors: set[str] = set()
        for outfit in outfits:
            cats = {outfit.anchor.category}
            colors.add(outfit.anchor.color)
            for slot, item in outfit.slots.items():
                colors.add(item.color)
                cats.add(item.category)
            slot_counts.append(len(cats))
        color_counts.append(len(colors))
    mean_colors = float(np.mean(color_counts)) if color_counts else 0.0
    mean_slots = float(np.mean(slot_counts)) if slot_counts else 0.0
    return mean_colors, mean_slots


def run_config(
    name: str,
    base_catalog: Catalog,
    anchors: list[str],
    seed: int,
    base_config: EngineConfig,
    provider: SyntheticProvider | None = None,
    measure_latency: bool = True,
) -> RunOutput:
    config = config_for_ablation(name, base_config)
    if provider is None:
        provider = SyntheticProvider(seed=config.provider_seed, dimension=config.dimension)
    runtime = prepare_runtime(config, provider)

    catalog = base_catalog
    if config.blend != base_config.blend:
        catalog = with_reblended_embeddings(base_catalog, config.blend)
    annotate_material_weights(
        catalog, runtime.material_ctx, provider, set(config.weight_keywords)
    )
    index = build_index(catalog, config.ann) if name != "random" else None

    results: list[GenerationResult] = []
    latencies: list[float] = []
    unfillable = 0
    for anchor_id in anchors:
        request = GenerationRequest(
            anchor_id=anchor_id, occasion="casual", seed=hash64(seed, anchor_id)
        )
        started = time.perf_counter() if measure_latency else 0.0
        if name == "random":
            result = _random_outfits(
                catalog.items[anchor_id], catalog, runtime, request.seed
            )
        else:
            result = generate_three_outfits(request, catalog, index, None, runtime)
        if measure_latency:
            latencies.append((time.perf_counter() - started) * 1000.0)
        unfillable += sum(1 for o in result.outcomes if o.gap is not None)
        results.append(result)

    totals = [
        o.breakdown.total for r in results for o in r.outfits() if o.breakdown is not None
    ]
    mean_colors, mean_slots = diversity_metrics(results)
    metrics = RunMetrics(
        config=name,
        mean_score=float(np.mean(totals)) if totals else 0.0,
        violation_rate=(
            sum(1 for t in totals if t <= -1.0) / len(totals) if totals else 0.0
        ),
        mean_distinct_colors=mean_colors,
        mean_slot_diversity=mean_slots,
        latency_mean_ms=float(np.mean(latencies)) if latencies else 0.0,
        latency_p95_ms=float(np.percentile(latencies, 95)) if latencies else 0.0,
        outfit_count=len(totals),
        unfillable=unfillable,
    )
    return RunOutput(metrics=metrics, results=results)


def run_ablation(
    seed: int = 42,
    n_anchors: int = 50,
    composition: dict[str, int] | None = None,
    base_config: EngineConfig | None = None,
    configs: tuple[str, ...] = ABLATIONS,
    measure_latency: bool = True,
) -> dict[str, RunOutput]:
    """Run the requested configurations over one shared anchor sample."""
    base_config = base_config or EngineConfig()
    provider = SyntheticProvider(seed=base_config.provider_seed, dimension=base_config.dimension)
    catalog = synth_catalog(seed, composition, provider, base_config.blend)
    anchors = sample_anchors(catalog, n_anchors, seed)
    return {
        name: run_config(
            name, catalog, anchors, seed, base_config, provider, measure_latency
        )
        for name in configs
    }


_CSV_COLUMNS = [
    "config", "label", "score", "delta", "violation_pct",
    "distinct_colors", "slot_diversity", "latency_mean_ms", "latency_p95_ms",
    "outfits", "unfillable",
]


def metrics_to_rows(metrics: dict[str, RunMetrics]) -> list[dict[str, str]]:
    full_score = metrics["full"].mean_score if "full" in metrics else None
    rows = []
    for name in ABLATIONS:
        if name not in metrics:
            continue
        m = metrics[name]
        if name == "full" or full_score is None:
            delta = ""
        else:
            delta = f"{m.mean_score - full_score:+.4f}"
        rows.append(
            {
                "config": name,
                "label": ABLATION_LABELS[name],
                "score": f"{m.mean_score:.4f}",
                "delta": delta,
                "violation_pct": f"{100.0 * m.violation_rate:.1f}",
                "distinct_colors": f"{m.mean_distinct_colors:.2f}",
                "slot_diversity": f"{m.mean_slot_diversity:.2f}",
                "latency_mean_ms": f"{m.latency_mean_ms:.1f}",
                "latency_p95_ms": f"{m.latency_p95_ms:.1f}",
                "outfits": str(m.outfit_count),
                "unfillable": str(m.unfillable),
            }
        )
    return rows


def rows_to_csv(rows: list[dict[str, str]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def csv_to_rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def render_report(rows: list[dict[str, str]]) -> str:
    """Fixed-width text table; a pure function of the tabular rows."""
    header = (
        f"{'Configuration':<24}{'Score':>8}{'Delta':>9}{'Viol.%':>8}"
        f"{'Colors':>8}{'Slots':>7}{'Mean ms':>9}{'P95 ms':>8}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        delta = row["delta"] if row["delta"] else "---"
        lines.append(
            f"{row['label']:<24}{row['score']:>8}{delta:>9}{row['violation_pct']:>8}"
            f"{row['distinct_colors']:>8}{row['slot_diversity']:>7}"
            f"{row['latency_mean_ms']:>9}{row['latency_p95_ms']:>8}"
        )
    return "\n".join(lines) + "\n"


def ablation_report(
    metrics: dict[str, RunMetrics], out_dir: str | Path | None = None
) -> tuple[str, str]:
    """Render the report and its machine-readable CSV; optionally write both."""
    rows = metrics_to_rows(metrics)
    csv_text = rows_to_csv(rows)
    report = render_report(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ablation.csv").write_text(csv_text, "utf-8")
        (out / "ablation.txt").write_text(report, "utf-8")
    return report, csv_text
