"""Outfit generation engine.

Retrieves complementary garments per outfit slot via filtered cosine
ANN search over blended embeddings, then scores combinatorial outfit
candidates with a six-signal objective.
"""

from .ann import IndexParams, ScoredId, SearchRequest, brute_force_search, build_index
from .catalog import Catalog, CatalogError, Item, category_counts, load_catalog
from .config import EngineConfig, prepare_runtime
from .embedding import BlendWeights, SyntheticProvider, blend_embedding, cosine
from .generator import GenerationRequest, generate_three_outfits
from .harness import run_ablation, synth_catalog
from .personalization import RotationQueue, TasteProfile, touch_rotation, update_taste

__version__ = "0.1.0"

__all__ = [
    "BlendWeights",
    "Catalog",
    "CatalogError",
    "EngineConfig",
    "GenerationRequest",
    "IndexParams",
    "Item",
    "RotationQueue",
    "ScoredId",
    "SearchRequest",
    "SyntheticProvider",
    "TasteProfile",
    "blend_embedding",
    "brute_force_search",
    "build_index",
    "category_counts",
    "cosine",
    "generate_three_outfits",
    "load_catalog",
    "prepare_runtime",
    "run_ablation",
    "synth_catalog",
    "touch_rotation",
    "update_taste",
    "__version__",
]
