"""Per-user taste vectors and the rotation novelty queue.

Like/dislike feedback moves an exponential moving average toward the
mean embedding of the rated outfit; the matching vector updates, the
other is untouched.  The rotation queue remembers recently suggested
item ids (FIFO, duplicates move to the back) so retrieval can penalize
their distances and rotate fresh items in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import DIMENSION


@dataclass
class TasteProfile:
    t_like: np.ndarray = field(default_factory=lambda: np.zeros(DIMENSION))
    t_dislike: np.ndarray = field(default_factory=lambda: np.zeros(DIMENSION))
    eta: float = 0.2

    def __post_init__(self) -> None:
        if not 0 < self.eta <= 1:
            raise ValueError("eta must be in (0, 1]")

    def is_zero(self) -> bool:
        return not (np.any(self.t_like) or np.any(self.t_dislike))


def update_taste(
    profile: TasteProfile, embeddings: list[np.ndarray], liked: bool
) -> TasteProfile:
    """EMA step toward the mean outfit embedding; returns a new profile."""
    if not embeddings:
        raise ValueError("feedback requires at least one item embedding")
    mean = np.mean(np.stack(embeddings), axis=0)
    eta = profile.eta
    if liked:
        return TasteProfile(
            t_like=(1 - eta) * profile.t_like + eta * mean,
            t_dislike=profile.t_dislike.copy(),
            eta=eta,
        )
    return TasteProfile(
        t_like=profile.t_like.copy(),
        t_dislike=(1 - eta) * profile.t_dislike + eta * mean,
        eta=eta,
    )


@dataclass
class RotationQueue:
    capacity: int = 20
    penalty_multiplier: float = 1.1
    entries: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.penalty_multiplier < 1:
            raise ValueError("penalty multiplier must be >= 1")


def touch_rotation(queue: RotationQueue, suggested_ids: list[str]) -> RotationQueue:
    """Append suggestions, moving duplicates to the back; evict FIFO."""
    entries = [e for e in queue.entries if e not in suggested_ids]
    entries.extend(suggested_ids)
    if len(entries) > queue.capacity:
        entries = entries[-queue.capacity :]
    return RotationQueue(
        capacity=queue.capacity,
        penalty_multiplier=queue.penalty_multiplier,
        entries=entries,
    )
