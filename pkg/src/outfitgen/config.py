"""Engine configuration: registries, prose anchors, and tunables.

Everything the pipeline treats as data lives here with defaults:
occasion vibe/anti-vibe prose and thresholds, heavy/light material
context strings, the three style directions, slot hints, color tables,
formality keywords, slot weights and penalty rates, retrieval and
generation parameters.  Configs serialize to/from JSON so experiment
variants (ablations) and deployments can override any piece; the
canonical-JSON hash stamps every service response for reproducibility.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .ann import IndexParams
from .embedding import BlendWeights, SyntheticProvider
from .scoring import Direction, ScoringRules, SlotWeights
from .semantics import MaterialContext, OccasionProfile, build_occasion_profile

NEUTRAL_COLORS = frozenset(
    {"black", "white", "gray", "beige", "cream", "navy", "tan", "brown",
     "ivory", "charcoal", "khaki"}
)

COLOR_FAMILY_TABLE: dict[str, list[str]] = {
    "neutral": sorted(NEUTRAL_COLORS),
    "warm": ["red", "orange", "coral", "rust", "crimson"],
    "cool": ["blue", "teal", "cobalt", "turquoise", "azure"],
    "earth": ["olive", "mustard", "terracotta", "moss"],
    "jewel": ["emerald", "burgundy", "sapphire", "plum", "fuchsia", "violet"],
    "pastel": ["lavender", "blush", "mint", "peach", "lilac"],
}

FORMALITY_HIGH = frozenset(
    {"blazer", "suit", "oxford", "loafer", "heel", "trouser", "silk", "tailored"}
)
FORMALITY_LOW = frozenset(
    {"sneaker", "hoodie", "jogger", "gym", "athletic", "tee", "workout"}
)
STATEMENT_TAGS = frozenset(
    {"statement", "sequined", "metallic", "neon", "animal print"}
)

WEIGHT_KEYWORDS = frozenset(
    {"heavy", "chunky", "thick", "padded", "quilted", "insulated", "warm",
     "winter", "light", "sheer", "airy", "flowy", "delicate", "summer"}
)

HEAVY_CONTEXT = (
    "thick heavy warm winter chunky wool leather suede denim tweed corduroy "
    "fleece shearling padded quilted knit coat parka layered structured insulated"
)
LIGHT_CONTEXT = (
    "thin light airy breathable summer sheer chiffon linen silk mesh satin "
    "gauze crepe voile flowy delicate cool lightweight drapey blouse"
)

SLOT_HINTS = {
    "top": "top blouse shirt sweater tee",
    "bottom": "bottom skirt jeans trousers pants",
    "shoes": "shoes heels sneakers boots loafers",
    "layer": "layer jacket blazer coat cardigan",
    "accessory": "accessory bag scarf belt necklace",
}


@dataclass
class OccasionSpec:
    vibe_text: str
    anti_vibe_text: str
    strictness: float
    unconditional_anti_weight: float = 0.0
    keep_fraction: float = 0.85
    min_floor: int = 3


def default_occasions() -> dict[str, OccasionSpec]:
    return {
        "work": OccasionSpec(
            vibe_text=(
                "professional office business conservative modest polished refined "
                "tailored structured classic understated formal crisp neat corporate "
                "meeting boardroom composed elegant buttoned smart presentable"
            ),
            anti_vibe_text=(
                "sexy revealing provocative clubbing nightlife party halter tank cami "
                "strappy sequined metallic neon sheer mini crop backless glitter "
                "flashy loud beach swim gym sweatpants ripped"
            ),
            strictness=3.0,
            unconditional_anti_weight=2.0,
            keep_fraction=0.85,
        ),
        "going-out": OccasionSpec(
            vibe_text=(
                "nightlife party evening club fun glamorous sleek bold daring dressy "
                "vibrant playful statement sequined metallic heels chic stylish "
                "confident dancing cocktail night striking"
            ),
            anti_vibe_text=(
                "office corporate boardroom frumpy dowdy gym sweatpants athletic "
                "workout hiking fleece cargo practical plain buttoned conservative "
                "beige sensible orthopedic"
            ),
            strictness=3.0,
            keep_fraction=0.85,
        ),
        "smart-casual": OccasionSpec(
            vibe_text=(
                "smart casual polished relaxed refined effortless neat tailored "
                "versatile weekend brunch blazer chinos loafers clean modern elegant "
                "understated comfortable presentable stylish"
            ),
            anti_vibe_text=(
                "sloppy gym sweatpants athletic workout ripped stained pajama beach "
                "swim neon clubbing sequined revealing crop costume torn scruffy"
            ),
            strictness=3.0,
            keep_fraction=0.75,
        ),
        "casual": OccasionSpec(
            vibe_text=(
                "casual relaxed everyday comfortable easy laid back weekend simple "
                "effortless cozy denim tee sneakers soft practical versatile light "
                "errands coffee walk unfussy"
            ),
            anti_vibe_text=(
                "formal black tie tuxedo gown ballroom corporate boardroom stiff "
                "ceremonial opera gala suit starched rigid buttoned"
            ),
            strictness=1.0,
            keep_fraction=0.70,
        ),
    }


def default_directions() -> list[Direction]:
    return [
        Direction(
            name="Classic",
            style_tags=frozenset({"classic", "minimal", "elegant", "preppy"}),
            color_policy="neutrals",
            query_modifier="classic timeless polished",
            preferred_colors=NEUTRAL_COLORS,
        ),
        Direction(
            name="Trendy",
            style_tags=frozenset({"streetwear", "chic", "statement", "casual"}),
            color_policy="two-tone",
            query_modifier="trendy modern streetwear chic",
            preferred_colors=frozenset({"black", "white", "cobalt", "teal"}),
        ),
        Direction(
            name="Bold",
            style_tags=frozenset({"edgy", "statement", "romantic", "bohemian"}),
            color_policy="contrast",
            query_modifier="bold daring edgy statement",
            preferred_colors=frozenset(
                {"red", "coral", "mustard", "emerald", "plum"}
            ),
        ),
    ]


def default_rules() -> ScoringRules:
    families = {
        color: family
        for family, colors in COLOR_FAMILY_TABLE.items()
        for color in colors
    }
    return ScoringRules(
        neutral_colors=NEUTRAL_COLORS,
        color_families=families,
        formality_high=FORMALITY_HIGH,
        formality_low=FORMALITY_LOW,
        statement_tags=STATEMENT_TAGS,
    )


@dataclass
class RetrievalParams:
    slot_hints: dict[str, str] = field(default_factory=lambda: dict(SLOT_HINTS))
    preferred_multiplier: float = 0.85
    neutral_multiplier: float = 0.90
    noise_low: float = 0.95
    noise_high: float = 1.05
    fetch_limit: int = 24


@dataclass
class EngineConfig:
    dimension: int = 512
    provider_seed: int = 7
    blend: BlendWeights = field(default_factory=BlendWeights)
    occasions: dict[str, OccasionSpec] = field(default_factory=default_occasions)
    heavy_text: str = HEAVY_CONTEXT
    light_text: str = LIGHT_CONTEXT
    tau: float = 0.15
    weight_keywords: frozenset[str] = WEIGHT_KEYWORDS
    directions: list[Direction] = field(default_factory=default_directions)
    retrieval: RetrievalParams = field(default_factory=RetrievalParams)
    rules: ScoringRules = field(default_factory=default_rules)
    slot_weights: SlotWeights = field(default_factory=SlotWeights)
    gamma: float = 0.15
    delta: float = 0.05
    eta: float = 0.2
    rotation_capacity: int = 20
    rotation_multiplier: float = 1.1
    top_k_per_slot: int = 3
    candidate_cap: int = 8
    ann: IndexParams = field(default_factory=IndexParams)
    occasion_filtering: bool = True
    material_filtering: bool = True

    def to_dict(self) -> dict:
        raw = asdict(self)
        raw["weight_keywords"] = sorted(self.weight_keywords)
        raw["directions"] = [
            {
                "name": d.name,
                "style_tags": sorted(d.style_tags),
                "color_policy": d.color_policy,
                "query_modifier": d.query_modifier,
                "preferred_colors": sorted(d.preferred_colors),
                "enabled": d.enabled,
            }
            for d in self.directions
        ]
        raw["rules"] = {
            **raw["rules"],
            "neutral_colors": sorted(self.rules.neutral_colors),
            "formality_high": sorted(self.rules.formality_high),
            "formality_low": sorted(self.rules.formality_low),
            "statement_tags": sorted(self.rules.statement_tags),
        }
        return raw

    @classmethod
    def from_dict(cls, raw: dict) -> "EngineConfig":
        config = cls()
        raw = dict(raw)
        if "blend" in raw:
            config.blend = BlendWeights(**raw.pop("blend"))
        if "occasions" in raw:
            config.occasions = {
                name: OccasionSpec(**spec) for name, spec in raw.pop("occasions").items()
            }
        if "directions" in raw:
            config.directions = [
                Direction(
                    name=d["name"],
                    style_tags=frozenset(d["style_tags"]),
                    color_policy=d["color_policy"],
                    query_modifier=d["query_modifier"],
                    preferred_colors=frozenset(d.get("preferred_colors", [])),
                    enabled=d.get("enabled", True),
                )
                for d in raw.pop("directions")
            ]
        if "retrieval" in raw:
            config.retrieval = RetrievalParams(**raw.pop("retrieval"))
        if "rules" in raw:
            rules = raw.pop("rules")
            config.rules = ScoringRules(
                neutral_colors=frozenset(rules.pop("neutral_colors")),
                color_families=dict(rules.pop("color_families")),
                formality_high=frozenset(rules.pop("formality_high")),
                formality_low=frozenset(rules.pop("formality_low")),
                statement_tags=frozenset(rules.pop("statement_tags")),
                **rules,
            )
        if "slot_weights" in raw:
            config.slot_weights = SlotWeights(**raw.pop("slot_weights"))
        if "ann" in raw:
            config.ann = IndexParams(**raw.pop("ann"))
        if "weight_keywords" in raw:
            config.weight_keywords = frozenset(raw.pop("weight_keywords"))
        for key, value in raw.items():
            if hasattr(config, key):
                setattr(config, key, value)
        return config

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


@dataclass
class Runtime:
    """Config with its prose anchors embedded; ready for generation."""

    config: EngineConfig
    provider: object
    occasions: dict[str, OccasionProfile]
    material_ctx: MaterialContext
    directions: list[Direction]

    @property
    def rules(self) -> ScoringRules:
        return self.config.rules

    @property
    def slot_weights(self) -> SlotWeights:
        return self.config.slot_weights


def prepare_runtime(config: EngineConfig, provider=None) -> Runtime:
    if provider is None:
        provider = SyntheticProvider(seed=config.provider_seed, dimension=config.dimension)
    occasions = {
        name: build_occasion_profile(
            name,
            spec.vibe_text,
            spec.anti_vibe_text,
            provider,
            strictness=spec.strictness,
            unconditional_anti_weight=spec.unconditional_anti_weight,
            keep_fraction=spec.keep_fraction,
            min_floor=spec.min_floor,
        )
        for name, spec in config.occasions.items()
    }
    material_ctx = MaterialContext(
        heavy_vec=provider.embed_text(config.heavy_text),
        light_vec=provider.embed_text(config.light_text),
        tau=config.tau,
    )
    return Runtime(
        config=config,
        provider=provider,
        occasions=occasions,
        material_ctx=material_ctx,
        directions=list(config.directions),
    )


def disabled_directions(directions: list[Direction]) -> list[Direction]:
    """Direction variants with query modifiers, preferred colors and the
    bonus all switched off (the direction-reranking ablation)."""
    return [replace(d, enabled=False) for d in directions]
