"""Rank-to-visit model and stochastic allocation of monitored visits."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ranking import RankedList

RANK_EXPONENT = 1.5
TELEPORTATION = 0.15


@lru_cache(maxsize=64)
def _rank_weights(n: int) -> np.ndarray:
    w = np.arange(1, n + 1, dtype=float) ** -RANK_EXPONENT
    w.setflags(write=False)
    return w


def theta(n: int, v: float) -> float:
    """Normalization making the rank visit rates sum to ``v``."""
    return v / _rank_weights(n).sum()


def f2(rank, n: int, v: float):
    """Expected visits per day at ``rank`` (1-based) in a list of ``n`` pages.

    Accepts scalars or arrays; ranks need not be integers, which the analytic
    model uses when plugging in an expected rank.
    """
    rank_arr = np.asarray(rank, dtype=float)
    if np.any(rank_arr < 1) or np.any(rank_arr > n):
        raise ValueError(f"rank must lie in [1, {n}]")
    out = theta(n, v) * rank_arr ** -RANK_EXPONENT
    return float(out) if out.ndim == 0 else out


def rank_visit_rates(n: int, v: float) -> np.ndarray:
    return theta(n, v) * _rank_weights(n)


def draw_visit_count(v: float, rng: np.random.Generator) -> int:
    """Integer number of visits with expectation ``v``."""
    if v < 0:
        raise ValueError(f"v must be nonnegative, got {v!r}")
    base = int(np.floor(v))
    frac = v - base
    if frac > 0 and rng.random() < frac:
        base += 1
    return base


@dataclass(frozen=True)
class VisitAllocation:
    """One tick of monitored visits: the page and the user behind each visit."""

    n: int
    pages: np.ndarray
    users: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.pages, minlength=self.n)

    @property
    def total(self) -> int:
        return len(self.pages)

    def __len__(self):
        return self.total


class RankSampler:
    """Draws rank positions (0-based) with probability proportional to ``f2``."""

    def __init__(self, n: int):
        w = _rank_weights(n)
        self.n = n
        self.cdf = np.cumsum(w / w.sum())
        self.cdf[-1] = 1.0

    def __call__(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if size == 0:
            return np.empty(0, dtype=np.int64)
        return np.searchsorted(self.cdf, rng.random(size), side="right")


def _sampler(n: int, sampler: RankSampler | None) -> RankSampler:
    if sampler is not None and sampler.n == n:
        return sampler
    return _cached_sampler(n)


@lru_cache(maxsize=16)
def _cached_sampler(n: int) -> RankSampler:
    return RankSampler(n)


def allocate_search_visits(ranked: RankedList, v: int, m: int, rng: np.random.Generator,
                           sampler: RankSampler | None = None) -> VisitAllocation:
    """Distribute ``v`` visits over the ranked list and draw a visitor for each.

    Page ids in ``ranked.order`` must be integer indices in ``[0, n)``.
    """
    if v < 0:
        raise ValueError(f"v must be nonnegative, got {v!r}")
    n = len(ranked)
    positions = _sampler(n, sampler)(int(v), rng)
    pages = np.asarray(ranked.order, dtype=np.int64)[positions]
    users = rng.integers(m, size=len(pages))
    return VisitAllocation(n, pages, users)


def surf_probabilities(popularity: np.ndarray, c: float = TELEPORTATION) -> np.ndarray:
    """Landing distribution of a random-surf visit: link-following plus teleportation."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c!r}")
    pop = np.asarray(popularity, dtype=float)
    n = len(pop)
    total = pop.sum()
    proportional = pop / total if total > 0 else np.full(n, 1.0 / n)
    return (1.0 - c) * proportional + c / n


def allocate_mixed_visits(popularity: np.ndarray, ranked: RankedList, x: float, c: float,
                          v: int, m: int, rng: np.random.Generator,
                          sampler: RankSampler | None = None) -> VisitAllocation:
    """Each visit is a random-surf visit with probability ``x``, else a search visit."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    n = len(ranked)
    n_surf = int(rng.binomial(int(v), x)) if x > 0 else 0
    search = allocate_search_visits(ranked, int(v) - n_surf, m, rng, sampler)
    if n_surf == 0:
        return search
    probs = surf_probabilities(popularity, c)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    surf_pages = np.searchsorted(cdf, rng.random(n_surf), side="right")
    surf_users = rng.integers(m, size=n_surf)
    return VisitAllocation(n, np.concatenate([search.pages, surf_pages]),
                           np.concatenate([search.users, surf_users]))
