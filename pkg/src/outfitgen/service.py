"""HTTP facade: ingestion, generation, feedback.

State is a swappable snapshot (catalog + index); ingestion builds the
replacement off to the side and swaps it atomically, so readers always
see one consistent snapshot.  Per-user feedback is serialized under a
user lock and bumps a version counter (no lost updates).  Every
generation response carries the engine configuration hash and the seed
used, making it reproducible offline.

Endpoints (see docs/api.md): POST /catalog/items, GET /items,
GET /outfits, POST /feedback, GET /health, GET /config; the companion
UI is served statically under /ui when built.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .ann import Index, build_index
from .cache import OutfitCache, invalidate_on_add
from .catalog import Catalog, CatalogError, Item, item_to_record, parse_catalog_line
from .config import EngineConfig, Runtime, prepare_runtime
from .embedding import hash64
from .generator import GenerationRequest, GenerationResult, generate_three_outfits
from .personalization import RotationQueue, TasteProfile, touch_rotation, update_taste
from .scoring import intent_vector
from .semantics import annotate_material_weights, mood_score

STATE_FORMAT_VERSION = 1


@dataclass
class UserState:
    profile: TasteProfile
    rotation: RotationQueue
    version: int = 0


@dataclass
class ServiceState:
    catalog: Catalog
    index: Index
    runtime: Runtime
    cache: OutfitCache = field(default_factory=OutfitCache)
    users: dict[str, UserState] = field(default_factory=dict)
    state_path: Path | None = None

    def __post_init__(self) -> None:
        self._snapshot_lock = threading.RLock()
        self._user_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    @property
    def config(self) -> EngineConfig:
        return self.runtime.config

    def user_state(self, user: str) -> UserState:
        if user not in self.users:
            self.users[user] = UserState(
                profile=TasteProfile(eta=self.config.eta),
                rotation=RotationQueue(
                    capacity=self.config.rotation_capacity,
                    penalty_multiplier=self.config.rotation_multiplier,
                ),
            )
        return self.users[user]

    def persist(self) -> None:
        if self.state_path is None:
            return
        payload = {
            "format_version": STATE_FORMAT_VERSION,
            "config": self.config.to_dict(),
            "items": [item_to_record(i) for i in self.catalog.items.values()],
            "users": {
                name: {
                    "t_like": [float(x) for x in u.profile.t_like],
                    "t_dislike": [float(x) for x in u.profile.t_dislike],
                    "rotation": list(u.rotation.entries),
                    "version": u.version,
                }
                for name, u in self.users.items()
            },
            "cache": [
                {
                    "anchor_id": key[0],
                    "occasion": key[1],
                    "anchor_category": entry.anchor_category,
                    "payload": entry.payload,
                }
                for key, entry in self.cache.entries.items()
            ],
        }
        tmp_fd, tmp_name = tempfile.mkstemp(
            dir=str(self.state_path.parent), prefix=".state-"
        )
        with os.fdopen(tmp_fd, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
        os.replace(tmp_name, self.state_path)


def build_state(
    catalog: Catalog,
    config: EngineConfig | None = None,
    provider=None,
    state_path: str | Path | None = None,
) -> ServiceState:
    config = config or EngineConfig()
    runtime = prepare_runtime(config, provider)
    annotate_material_weights(
        catalog, runtime.material_ctx, runtime.provider, set(config.weight_keywords)
    )
    index = build_index(catalog, config.ann)
    return ServiceState(
        catalog=catalog,
        index=index,
        runtime=runtime,
        state_path=Path(state_path) if state_path else None,
    )


def load_state(path: str | Path, provider=None) -> ServiceState:
    raw = json.loads(Path(path).read_text("utf-8"))
    if raw.get("format_version") != STATE_FORMAT_VERSION:
        raise ValueError(f"unsupported state format {raw.get('format_version')!r}")
    config = EngineConfig.from_dict(raw["config"])
    catalog = Catalog()
    for record in raw["items"]:
        catalog.add(parse_catalog_line(json.dumps(record), dimension=config.dimension))
    state = build_state(catalog, config, provider, state_path=path)
    for name, u in raw.get("users", {}).items():
        state.users[name] = UserState(
            profile=TasteProfile(
                t_like=np.asarray(u["t_like"], dtype=float),
                t_dislike=np.asarray(u["t_dislike"], dtype=float),
                eta=config.eta,
            ),
            rotation=RotationQueue(
                capacity=config.rotation_capacity,
                penalty_multiplier=config.rotation_multiplier,
                entries=list(u["rotation"]),
            ),
            version=int(u["version"]),
        )
    for entry in raw.get("cache", []):
        state.cache.put(
            entry["anchor_id"], entry["occasion"], entry["anchor_category"], entry["payload"]
        )
    return state


def _item_summary(item: Item) -> dict:
    return {
        "id": item.id,
        "name": item.name,
        "category": item.category,
        "color": item.color,
        "material": item.material,
        "style_tags": list(item.style_tags),
        "occasion_tags": sorted(item.occasion_tags),
        "material_weight": item.material_weight,
    }


def _result_payload(result: GenerationResult, state: ServiceState) -> dict:
    outfits = []
    for outcome in result.outcomes:
        if outcome.outfit is None:
            outfits.append(
                {
                    "direction": outcome.direction,
                    "items": [],
                    "breakdown": None,
                    "rank_sum": None,
                    "gap": outcome.gap,
                }
            )
            continue
        outfit = outcome.outfit
        outfits.append(
            {
                "direction": outcome.direction,
                "items": [
                    _item_summary(outfit.slots[s])
                    for s in ("top", "bottom", "shoes", "layer", "accessory")
                    if s in outfit.slots
                ],
                "breakdown": outfit.breakdown.as_dict(),
                "rank_sum": outfit.rank_sum,
                "gap": None,
            }
        )
    return {
        "anchor": _item_summary(state.catalog.items[result.anchor_id]),
        "occasion": result.occasion,
        "seed": result.seed,
        "outfits": outfits,
    }


def _annotate_mood(payload: dict, mood: str, state: ServiceState) -> dict:
    annotated = json.loads(json.dumps(payload))
    for outfit in annotated["outfits"]:
        for entry in outfit["items"]:
            item = state.catalog.items.get(entry["id"])
            if item is not None:
                entry["mood_score"] = mood_score(item, mood, state.runtime.provider)
    annotated["mood"] = mood
    return annotated


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message, **extra}}
    )


def create_app(state: ServiceState, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="outfitgen", version="0.1.0")
    config_hash = state.config.config_hash()

    @app.get("/health")
    def health():
        return {"status": "ok", "items": len(state.catalog), "config_hash": config_hash}

    @app.get("/config")
    def get_config():
        return {"config_hash": config_hash, "config": state.config.to_dict()}

    @app.get("/items")
    def list_items():
        return {
            "count": len(state.catalog),
            "items": [_item_summary(i) for i in state.catalog.items.values()],
        }

    @app.post("/catalog/items")
    async def ingest(request: Request):
        body = (await request.body()).decode("utf-8")
        lines = [line for line in body.splitlines() if line.strip()]
        if not lines:
            return {"added": 0, "evicted_cache_entries": 0}
        with state._snapshot_lock:
            parsed: list[Item] = []
            errors: list[dict] = []
            seen: set[str] = set()
            for lineno, line in enumerate(lines, start=1):
                try:
                    item = parse_catalog_line(
                        line,
                        provider=state.runtime.provider,
                        blend=state.config.blend,
                        dimension=state.config.dimension,
                    )
                except CatalogError as exc:
                    errors.append({"line": lineno, "message": str(exc)})
                    continue
                if item.id in state.catalog.items or item.id in seen:
                    return _error(409, "duplicate_id", f"item {item.id!r} already exists")
                seen.add(item.id)
                parsed.append(item)
            if errors:
                return _error(400, "invalid_records", "validation failed", records=errors)

            rebuilt = Catalog()
            for existing in state.catalog.items.values():
                rebuilt.add(existing)
            for item in parsed:
                rebuilt.add(item)
            annotate_material_weights(
                rebuilt,
                state.runtime.material_ctx,
                state.runtime.provider,
                set(state.config.weight_keywords),
            )
            new_index = build_index(rebuilt, state.config.ann)
            evicted: list[tuple[str, str]] = []
            for item in parsed:
                evicted.extend(invalidate_on_add(state.cache, rebuilt, item))
            state.catalog = rebuilt
            state.index = new_index
            state.persist()
        return {"added": len(parsed), "evicted_cache_entries": len(evicted)}

    @app.get("/outfits")
    def outfits(
        anchor: str,
        occasion: str,
        mood: str | None = None,
        user: str | None = None,
        seed: int | None = None,
    ):
        if anchor not in state.catalog.items:
            return _error(404, "unknown_anchor", f"no item {anchor!r}")
        if occasion not in state.runtime.occasions:
            return _error(400, "unknown_occasion", f"no occasion {occasion!r}")

        with state._snapshot_lock:
            catalog, index = state.catalog, state.index
        user_state = state.user_state(user) if user else None
        taste_applies = user_state is not None and (
            not user_state.profile.is_zero() or bool(user_state.rotation.entries)
        )
        default_seed = hash64(0, anchor, occasion)
        effective_seed = default_seed if seed is None else seed

        payload = None
        cached = False
        if not taste_applies and effective_seed == default_seed:
            payload = state.cache.get(anchor, occasion)
            cached = payload is not None
        if payload is None:
            request = GenerationRequest(
                anchor_id=anchor,
                occasion=occasion,
                mood=mood,
                seed=effective_seed,
                top_k_per_slot=state.config.top_k_per_slot,
                candidate_cap=state.config.candidate_cap,
            )
            result = generate_three_outfits(
                request,
                catalog,
                index,
                user_state.profile if user_state else None,
                state.runtime,
                rotation=user_state.rotation if user_state else None,
            )
            payload = _result_payload(result, state)
            if not taste_applies and effective_seed == default_seed:
                anchor_item = catalog.items[anchor]
                state.cache.put(anchor, occasion, anchor_item.category, payload)
                state.persist()

        anchor_item = catalog.items[anchor]
        intent = intent_vector(
            anchor_item,
            user_state.profile if user_state else None,
            state.config.gamma,
            state.config.delta,
        )
        norm = float(np.linalg.norm(intent.vector))
        anchor_cos = float(
            np.dot(intent.vector, anchor_item.embedding) / norm if norm > 0 else 0.0
        )

        response = dict(payload)
        if mood:
            response = _annotate_mood(response, mood, state)
        response["cached"] = cached
        response["config_hash"] = config_hash
        response["intent"] = {"anchor_cosine": anchor_cos, "norm": norm}
        if user:
            suggested = [
                entry["id"] for outfit in payload["outfits"] for entry in outfit["items"]
            ]
            with state._user_locks[user]:
                user_state.rotation = touch_rotation(user_state.rotation, suggested)
                state.persist()
            response["user"] = user
        return response

    @app.post("/feedback")
    async def feedback(request: Request):
        body = await request.json()
        user = body.get("user")
        item_ids = body.get("item_ids") or []
        liked = body.get("liked")
        if not user or not isinstance(item_ids, list) or liked is None:
            return _error(400, "bad_request", "user, item_ids and liked are required")
        embeddings = []
        for item_id in item_ids:
            item = state.catalog.items.get(item_id)
            if item is None:
                return _error(400, "unknown_item", f"no item {item_id!r}")
            embeddings.append(item.embedding)
        if not embeddings:
            return _error(400, "bad_request", "item_ids must be nonempty")
        with state._user_locks[user]:
            user_state = state.user_state(user)
            user_state.profile = update_taste(user_state.profile, embeddings, bool(liked))
            user_state.version += 1
            version = user_state.version
            state.persist()
        return {"user": user, "version": version, "liked": bool(liked)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
