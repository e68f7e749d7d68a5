"""Result-list construction: popularity ranking plus randomized promotion.

The promoted list is built by merging a deterministic popularity ranking
with a randomly permuted promotion pool. The first ``k - 1`` slots always
come from the deterministic ranking; each later slot comes from the pool
with probability ``r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Page, RankingConfig, Rule, ranked_order


@dataclass(frozen=True)
class RankedList:
    order: np.ndarray
    promoted: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", np.asarray(self.order))
        object.__setattr__(self, "promoted", np.asarray(self.promoted, dtype=bool))
        if self.order.shape != self.promoted.shape:
            raise ValueError("order and provenance flags must have equal length")

    def __len__(self):
        return len(self.order)

    @property
    def provenance(self) -> list[str]:
        return ["promoted" if p else "deterministic" for p in self.promoted]


def rank_deterministic(pages: Sequence[Page], m: int | None = None) -> RankedList:
    """Rank pages by popularity; older pages win ties, then lower ids."""
    if len(pages) == 0:
        raise ValueError("cannot rank an empty page collection")
    if m is None:
        m = max(max(p.awareness_count for p in pages), 1)
    pop = np.array([p.popularity(m) for p in pages])
    birth = np.array([p.birth_time for p in pages])
    ids = np.array([p.id for p in pages])
    idx = ranked_order(pop, birth, ids)
    return RankedList(ids[idx], np.zeros(len(pages), dtype=bool))


def pool_mask(awareness_count: np.ndarray, config: RankingConfig,
              rng: np.random.Generator) -> np.ndarray:
    """Boolean promotion-pool membership for pages given their aware-user counts."""
    n = len(awareness_count)
    if config.rule is Rule.SELECTIVE:
        return np.asarray(awareness_count) == 0
    if config.rule is Rule.UNIFORM:
        return rng.random(n) < config.r
    raise ValueError("rule 'none' has no promotion pool")


def select_pool(pages: Sequence[Page], config: RankingConfig,
                rng: np.random.Generator) -> set:
    counts = np.array([p.awareness_count for p in pages])
    mask = pool_mask(counts, config, rng)
    return {p.id for p, keep in zip(pages, mask) if keep}


def merge_promoted(deterministic: Iterable, pool: Iterable, k: int, r: float,
                   rng: np.random.Generator) -> RankedList:
    """Merge a deterministic ranking with an already-shuffled promotion pool.

    Slots ``1..k-1`` take the head of ``deterministic``. From slot ``k`` on a
    biased coin picks the pool with probability ``r``; once either list is
    empty the other one fills the remaining slots.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [0, 1], got {r!r}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    det = np.asarray(list(deterministic) if not isinstance(deterministic, np.ndarray) else deterministic)
    pl = np.asarray(list(pool) if not isinstance(pool, np.ndarray) else pool)
    n_d, n_p = len(det), len(pl)
    n = n_d + n_p
    if n_p == 0:
        return RankedList(det.copy(), np.zeros(n, dtype=bool))
    if n_d == 0:
        return RankedList(pl.copy(), np.ones(n, dtype=bool))
    if det.dtype != pl.dtype:
        det, pl = det.astype(object), pl.astype(object)

    head = min(k - 1, n_d)
    rest_d = n_d - head
    slots = n - head
    from_pool = rng.random(slots) < r
    if rest_d == 0:
        from_pool[:] = True
    else:
        taken_p = np.cumsum(from_pool)
        taken_d = np.cumsum(~from_pool)
        hit_p = np.flatnonzero(taken_p == n_p)
        hit_d = np.flatnonzero(taken_d == rest_d)
        end_p = hit_p[0] if len(hit_p) else slots
        end_d = hit_d[0] if len(hit_d) else slots
        # everything after the first exhaustion comes from the other list
        if end_p < end_d:
            from_pool[end_p + 1:] = False
        elif end_d < end_p:
            from_pool[end_d + 1:] = True

    order = np.empty(n, dtype=det.dtype)
    order[:head] = det[:head]
    tail = order[head:]
    tail[from_pool] = pl
    tail[~from_pool] = det[head:]
    promoted = np.zeros(n, dtype=bool)
    promoted[head:] = from_pool
    return RankedList(order, promoted)


def build_ranked_list(popularity: np.ndarray, birth_time: np.ndarray,
                      awareness_count: np.ndarray, config: RankingConfig,
                      rng: np.random.Generator) -> RankedList:
    """Array-level ranking used by the simulator; ids are positional indices."""
    if not config.promotes:
        order = ranked_order(popularity, birth_time)
        return RankedList(order, np.zeros(len(order), dtype=bool))
    in_pool = pool_mask(awareness_count, config, rng)
    rest = np.flatnonzero(~in_pool)
    det = rest[ranked_order(popularity[rest], birth_time[rest], rest)]
    pool = rng.permutation(np.flatnonzero(in_pool))
    return merge_promoted(det, pool, config.k, config.r, rng)


def build_from_pages(pages: Sequence[Page], config: RankingConfig, m: int,
                     rng: np.random.Generator) -> RankedList:
    """Full promotion pipeline over ``Page`` objects."""
    if not config.promotes:
        return rank_deterministic(pages, m)
    pool_ids = select_pool(pages, config, rng)
    det = rank_deterministic([p for p in pages if p.id not in pool_ids], m).order \
        if len(pool_ids) < len(pages) else np.array([], dtype=int)
    pool_pages = [p.id for p in pages if p.id in pool_ids]
    pool = [pool_pages[i] for i in rng.permutation(len(pool_pages))]
    return merge_promoted(det, pool, config.k, config.r, rng)


def sample_promoted_occupants(deterministic: np.ndarray, pool: np.ndarray, k: int, r: float,
                              positions: np.ndarray, rng: np.random.Generator):
    """Occupant of ``positions`` (0-based) in independently merged lists, one per query.

    Equivalent in law to calling :func:`merge_promoted` with a fresh pool
    permutation for every position and reading off that slot, but only the
    coins before each slot are drawn (as a binomial count).
    Returns ``(page_ids, promoted_flags)``.
    """
    positions = np.asarray(positions, dtype=np.int64)
    det = np.asarray(deterministic)
    pl = np.asarray(pool)
    n_d, n_p = len(det), len(pl)
    if n_p == 0:
        return det[positions], np.zeros(len(positions), dtype=bool)
    if n_d == 0:
        return pl[rng.integers(n_p, size=len(positions))], np.ones(len(positions), dtype=bool)
    head = min(k - 1, n_d)
    before = np.maximum(positions - head, 0)
    pool_before = rng.binomial(before, r)
    det_before = before - pool_before
    coin = rng.random(len(positions)) < r
    from_pool = np.where(pool_before >= n_p, False,
                         np.where(det_before >= n_d - head, True, coin))
    from_pool &= positions >= head
    det_index = np.where(pool_before >= n_p, positions - n_p, head + det_before)
    det_index = np.where(positions < head, positions, det_index)
    out = np.empty(len(positions), dtype=det.dtype if det.dtype == pl.dtype else object)
    out[~from_pool] = det[det_index[~from_pool]]
    # a random permutation puts a uniformly drawn pool page in any given slot
    out[from_pool] = pl[rng.integers(n_p, size=int(from_pool.sum()))]
    return out, from_pool
