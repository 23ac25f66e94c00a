"""Cosine nearest-neighbor retrieval with category filtering.

Two routes with one contract: an HNSW graph index (the production path)
and an exact linear scan (the testing oracle).  The index is
pre-partitioned into one sub-graph per category so a category-filtered
query always yields `limit` matches when that many exist.  Exclusion
sets are honored at result collection: excluded nodes still participate
in graph traversal but are never emitted.

Graph construction follows the standard hierarchical scheme: levels are
drawn from a seeded exponential distribution (so rebuilds with the same
insertion order are bit-identical), inserts link each node to its
nearest neighbors with a diversity-aware selection heuristic, and
searches descend greedily from the top layer before running a beam
search at layer 0.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from heapq import heappop, heappush
from pathlib import Path

import numpy as np

from .catalog import Catalog
from .embedding import hash64

_MAGIC = b"OGANN\x01"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class IndexParams:
    m: int = 16
    ef_construction: int = 64
    ef_search: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.ef_construction < self.m:
            raise ValueError("ef_construction must be >= m")
        if self.ef_search < 1:
            raise ValueError("ef_search must be >= 1")


@dataclass(frozen=True)
class SearchRequest:
    query: np.ndarray
    category: str
    exclusions: frozenset[str] = frozenset()
    limit: int = 10

    def __post_init__(self) -> None:
        if self.limit < 1:
            raise ValueError("limit must be >= 1")


@dataclass(frozen=True)
class ScoredId:
    id: str
    distance: float


class _HnswGraph:
    """Single-category HNSW graph over unit vectors (cosine distance)."""

    def __init__(self, dimension: int, params: IndexParams, category: str):
        self.dimension = dimension
        self.params = params
        self.category = category
        self.ids: list[str] = []
        self._matrix = np.zeros((64, dimension))
        # neighbors[node][level] -> list of node indices
        self.neighbors: list[list[list[int]]] = []
        self.levels: list[int] = []
        self.entry_point = -1
        self.max_level = -1
        self._level_rng = np.random.Generator(
            np.random.Philox(key=hash64(params.seed, category))
        )
        self._mult = 1.0 / math.log(params.m)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def vectors(self) -> np.ndarray:
        return self._matrix[: len(self.ids)]

    def _draw_level(self) -> int:
        u = float(self._level_rng.uniform(np.finfo(float).tiny, 1.0))
        return int(-math.log(u) * self._mult)

    def _distances(self, query: np.ndarray, nodes: list[int]) -> np.ndarray:
        return 1.0 - self.vectors[nodes] @ query

    def _search_layer(
        self, query: np.ndarray, entry_points: list[int], level: int, ef: int
    ) -> list[tuple[float, int]]:
        """Beam search at one level; returns (distance, node) sorted ascending."""
        visited = set(entry_points)
        dists = self._distances(query, entry_points)
        candidates: list[tuple[float, int]] = []  # min-heap
        best: list[tuple[float, int]] = []  # max-heap via negated distance
        for node, dist in zip(entry_points, dists):
            heappush(candidates, (float(dist), node))
            heappush(best, (-float(dist), node))

        while candidates:
            dist, node = heappop(candidates)
            if len(best) >= ef and dist > -best[0][0]:
                break
            fresh = [n for n in self.neighbors[node][level] if n not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            for neighbor, ndist in zip(fresh, self._distances(query, fresh)):
                ndist = float(ndist)
                if len(best) < ef:
                    heappush(candidates, (ndist, neighbor))
                    heappush(best, (-ndist, neighbor))
                elif ndist < -best[0][0]:
                    heappush(candidates, (ndist, neighbor))
                    heappush(best, (-ndist, neighbor))
                    heappop(best)

        return sorted((-d, n) for d, n in best)

    def _select_neighbors(
        self, candidates: list[tuple[float, int]], m: int
    ) -> list[int]:
        """Diversity-aware selection: keep candidates closer to the query
        than to any already-selected neighbor, then fill from the pruned
        remainder so nodes keep full degree (preserves connectivity)."""
        if len(candidates) <= m:
            return [n for _, n in candidates]
        selected: list[int] = []
        discarded: list[tuple[float, int]] = []
        for dist, node in sorted(candidates):
            if len(selected) >= m:
                break
            if not selected:
                selected.append(node)
                continue
            to_selected = self._distances(self.vectors[node], selected)
            if dist < float(np.min(to_selected)):
                selected.append(node)
            else:
                discarded.append((dist, node))
        for dist, node in discarded:
            if len(selected) >= m:
                break
            selected.append(node)
        return selected

    def insert(self, item_id: str, vector: np.ndarray) -> None:
        node = len(self.ids)
        if node >= self._matrix.shape[0]:
            grown = np.zeros((max(64, self._matrix.shape[0] * 2), self.dimension))
            grown[:node] = self._matrix[:node]
            self._matrix = grown
        level = self._draw_level()
        self.ids.append(item_id)
        self._matrix[node] = vector
        self.levels.append(level)
        self.neighbors.append([[] for _ in range(level + 1)])

        if self.entry_point < 0:
            self.entry_point = node
            self.max_level = level
            return

        entry = [self.entry_point]
        for lc in range(self.max_level, level, -1):
            entry = [self._search_layer(vector, entry, lc, 1)[0][1]]

        for lc in range(min(level, self.max_level), -1, -1):
            candidates = self._search_layer(
                vector, entry, lc, self.params.ef_construction
            )
            m_level = self.params.m * 2 if lc == 0 else self.params.m
            chosen = self._select_neighbors(candidates, m_level)
            self.neighbors[node][lc] = list(chosen)
            for neighbor in chosen:
                links = self.neighbors[neighbor][lc]
                links.append(node)
                if len(links) > m_level:
                    pruned = self._select_neighbors(
                        list(
                            zip(
                                self._distances(self.vectors[neighbor], links),
                                links,
                            )
                        ),
                        m_level,
                    )
                    self.neighbors[neighbor][lc] = pruned
            entry = [n for _, n in candidates]

        if level > self.max_level:
            self.entry_point = node
            self.max_level = level

    def search(self, query: np.ndarray, ef: int) -> list[tuple[float, int]]:
        if not self.ids:
            return []
        entry = [self.entry_point]
        for lc in range(self.max_level, 0, -1):
            entry = [self._search_layer(query, entry, lc, 1)[0][1]]
        return self._search_layer(query, entry, 0, min(ef, len(self.ids)))


class Index:
    """Category-partitioned HNSW index over a catalog's item embeddings."""

    def __init__(self, dimension: int, params: IndexParams):
        self.dimension = dimension
        self.params = params
        self.graphs: dict[str, _HnswGraph] = {}
        self.search_count = 0  # instrumentation for baseline audits

    def insert(self, item_id: str, category: str, vector: np.ndarray) -> None:
        graph = self.graphs.get(category)
        if graph is None:
            graph = _HnswGraph(self.dimension, self.params, category)
            self.graphs[category] = graph
        graph.insert(item_id, vector)

    def search(self, request: SearchRequest) -> list[ScoredId]:
        self.search_count += 1
        graph = self.graphs.get(request.category)
        if graph is None:
            return []
        # Widen the beam by the exclusion count so exclusions are traversed
        # but never crowd matches out of the candidate pool.
        ef = max(self.params.ef_search, request.limit) + len(request.exclusions)
        hits = graph.search(request.query, ef)
        scored = [
            ScoredId(graph.ids[node], dist)
            for dist, node in hits
            if graph.ids[node] not in request.exclusions
        ]
        scored.sort(key=lambda s: (s.distance, s.id))
        return scored[: request.limit]


def build_index(catalog: Catalog, params: IndexParams = IndexParams()) -> Index:
    dimension = 512
    for item in catalog.items.values():
        dimension = len(item.embedding)
        break
    index = Index(dimension, params)
    for category, ids in catalog.by_category.items():
        for item_id in ids:
            index.insert(item_id, category, catalog.items[item_id].embedding)
    return index


def search(index: Index, request: SearchRequest) -> list[ScoredId]:
    return index.search(request)


def brute_force_search(catalog: Catalog, request: SearchRequest) -> list[ScoredId]:
    """Exact linear scan with the same contract as Index.search."""
    ids = [
        item_id
        for item_id in catalog.ids_in_category(request.category)
        if item_id not in request.exclusions
    ]
    if not ids:
        return []
    matrix = np.stack([catalog.items[item_id].embedding for item_id in ids])
    distances = 1.0 - matrix @ request.query
    scored = [ScoredId(item_id, float(d)) for item_id, d in zip(ids, distances)]
    scored.sort(key=lambda s: (s.distance, s.id))
    return scored[: request.limit]


def save_index(index: Index, path: str | Path) -> None:
    """Versioned binary dump: header, then per-category vectors + adjacency."""
    with open(path, "wb") as out:
        out.write(_MAGIC)
        out.write(
            struct.pack(
                "<IIIIIQ",
                _FORMAT_VERSION,
                index.dimension,
                index.params.m,
                index.params.ef_construction,
                index.params.ef_search,
                index.params.seed,
            )
        )
        out.write(struct.pack("<I", len(index.graphs)))
        for category in sorted(index.graphs):
            graph = index.graphs[category]
            _write_str(out, category)
            out.write(struct.pack("<iiI", graph.entry_point, graph.max_level, len(graph)))
            for item_id in graph.ids:
                _write_str(out, item_id)
            out.write(struct.pack(f"<{len(graph)}I", *graph.levels))
            out.write(np.ascontiguousarray(graph.vectors, dtype="<f8").tobytes())
            for node_links in graph.neighbors:
                out.write(struct.pack("<I", len(node_links)))
                for level_links in node_links:
                    out.write(struct.pack("<I", len(level_links)))
                    if level_links:
                        out.write(struct.pack(f"<{len(level_links)}I", *level_links))


def load_index(path: str | Path) -> Index:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[: len(_MAGIC)] != _MAGIC:
        raise ValueError("not an index file (bad magic)")
    offset = len(_MAGIC)
    version, dimension, m, efc, efs, seed = struct.unpack_from("<IIIIIQ", data, offset)
    offset += struct.calcsize("<IIIIIQ")
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported index format version {version}")
    if dimension < 1:
        raise ValueError(f"invalid dimension {dimension}")
    index = Index(dimension, IndexParams(m, efc, efs, seed))
    (n_graphs,) = struct.unpack_from("<I", data, offset)
    offset += 4
    for _ in range(n_graphs):
        category, offset = _read_str(data, offset)
        entry, max_level, count = struct.unpack_from("<iiI", data, offset)
        offset += struct.calcsize("<iiI")
        graph = _HnswGraph(dimension, index.params, category)
        graph.entry_point = entry
        graph.max_level = max_level
        for _ in range(count):
            item_id, offset = _read_str(data, offset)
            graph.ids.append(item_id)
        graph.levels = list(struct.unpack_from(f"<{count}I", data, offset))
        offset += 4 * count
        n_floats = count * dimension
        graph._matrix = (
            np.frombuffer(data, dtype="<f8", count=n_floats, offset=offset)
            .reshape(count, dimension)
            .copy()
        )
        offset += 8 * n_floats
        for _ in range(count):
            (n_levels,) = struct.unpack_from("<I", data, offset)
            offset += 4
            node_links = []
            for _ in range(n_levels):
                (n_links,) = struct.unpack_from("<I", data, offset)
                offset += 4
                node_links.append(
                    list(struct.unpack_from(f"<{n_links}I", data, offset))
                )
                offset += 4 * n_links
            graph.neighbors.append(node_links)
        index.graphs[category] = graph
    return index


def _write_str(out, value: str) -> None:
    raw = value.encode("utf-8")
    out.write(struct.pack("<H", len(raw)))
    out.write(raw)


def _read_str(data: bytes, offset: int) -> tuple[str, int]:
    (length,) = struct.unpack_from("<H", data, offset)
    offset += 2
    return data[offset : offset + length].decode("utf-8"), offset + length
