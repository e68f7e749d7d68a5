"""Day-by-day simulation of a community under a ranking policy.

Each day: pages retire and are replaced by fresh pages of the same quality,
the result list is rebuilt, monitored visits are allocated over it, and the
visitors become aware of the pages they land on.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (CommunityConfig, RankingConfig, Rule, awareness_threshold_count,
                   make_quality_vector, ranked_order)
from .ranking import build_ranked_list, sample_promoted_occupants
from .visits import (RankSampler, VisitAllocation, draw_visit_count, rank_visit_rates,
                     surf_probabilities)

DECILES = 10
CSV_HEADER = ["day", "qpc", "zero_aware", "retired"] + [f"pop_q{i}" for i in range(1, DECILES + 1)]


class MeasurementError(ValueError):
    """A metric is undefined because its sample is empty."""


@dataclass(frozen=True)
class Mixed:
    """Random-surf share ``x`` of visits and teleportation probability ``c``."""

    x: float = 0.0
    c: float = 0.15

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"x must lie in [0, 1], got {self.x!r}")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c!r}")


class SimState:
    """Mutable state of one run. Page slot ``j`` always holds quality ``Q(j)``."""

    def __init__(self, config: CommunityConfig, seed: int = 0, tbp_threshold: float = 0.99,
                 stationary_ages: bool = True, rerandomize: str = "query"):
        if rerandomize not in ("query", "tick"):
            raise ValueError(f"rerandomize must be 'query' or 'tick', got {rerandomize!r}")
        self.rerandomize = rerandomize
        self.config = config
        self.rng = np.random.default_rng(seed)
        n, m = config.n, config.m
        self.quality = make_quality_vector(config)
        self.ids = np.arange(n)
        self.decile = np.arange(n) * DECILES // n
        self.aware = np.zeros((n, m), dtype=bool)
        self.aware_count = np.zeros(n, dtype=np.int64)
        if stationary_ages and math.isfinite(config.l):
            # exponential ages make the initial cohort look like steady-state survivors
            self.birth_time = -np.floor(self.rng.exponential(config.l, size=n)).astype(np.int64)
        else:
            self.birth_time = np.zeros(n, dtype=np.int64)
        self.cross_day = np.full(n, -1, dtype=np.int64)
        self.tbp_threshold = tbp_threshold
        self.cross_count = awareness_threshold_count(m, tbp_threshold)
        self.day = 0
        self.measuring = False
        self.sampler = RankSampler(n)
        self.retire_prob = -math.expm1(-config.lam)

        # measurement accumulators
        self.rows: list[tuple] = []
        self.visits_total = 0
        self.weighted_total = 0.0
        self.exposure = np.zeros(n, dtype=np.int64)
        self.crossings = np.zeros(n, dtype=np.int64)
        self.tbp_sum = np.zeros(n, dtype=np.int64)
        self.awareness_days = np.zeros((n, m + 1), dtype=np.int64)
        self.level_visits = np.zeros((n, m + 1), dtype=np.int64)
        self.rank_visits = np.zeros(n, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def m(self) -> int:
        return self.config.m

    def popularity(self) -> np.ndarray:
        return self.aware_count / self.m * self.quality


def step(state: SimState, ranking: RankingConfig, mixed: Optional[Mixed] = None) -> SimState:
    """Advance ``state`` by one day in place and return it."""
    cfg = state.config
    rng = state.rng
    day = state.day

    retired = np.flatnonzero(rng.random(state.n) < state.retire_prob) if cfg.lam > 0 else \
        np.empty(0, dtype=np.int64)
    if len(retired):
        state.aware[retired] = False
        state.aware_count[retired] = 0
        state.birth_time[retired] = day
        state.cross_day[retired] = -1

    pop = state.popularity()
    v = draw_visit_count(cfg.v, rng)
    alloc, positions = _allocate(state, ranking, mixed, pop, v)

    at_risk = state.cross_day < 0
    start_count = state.aware_count.copy()
    if alloc.total:
        state.aware[alloc.pages, alloc.users] = True
        touched = np.unique(alloc.pages)
        state.aware_count[touched] = state.aware[touched].sum(axis=1)
        crossed = touched[(state.aware_count[touched] >= state.cross_count)
                          & (state.cross_day[touched] < 0)]
        state.cross_day[crossed] = day
    else:
        crossed = np.empty(0, dtype=np.int64)

    if state.measuring:
        _record(state, alloc, positions, len(retired), at_risk, crossed, start_count)
    state.day = day + 1
    return state


def _search_pages(state: SimState, ranking: RankingConfig, pop: np.ndarray, count: int):
    """Pages hit by ``count`` search visits and the rank position of each hit."""
    rng = state.rng
    positions = state.sampler(count, rng)
    if count == 0:
        return positions, positions
    if not ranking.promotes:
        order = ranked_order(pop, state.birth_time)
        return order[positions], positions
    if state.rerandomize == "tick":
        ranked = build_ranked_list(pop, state.birth_time, state.aware_count, ranking, rng)
        return np.asarray(ranked.order)[positions], positions
    order = ranked_order(pop, state.birth_time)
    if ranking.rule is Rule.SELECTIVE:
        in_pool = state.aware_count == 0
        pages, _ = sample_promoted_occupants(order[~in_pool[order]], np.flatnonzero(in_pool),
                                             ranking.k, ranking.r, positions, rng)
        return pages, positions
    return _uniform_occupants(order, ranking, positions, rng), positions


def _uniform_occupants(order: np.ndarray, ranking: RankingConfig, positions: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    """Per-query uniform promotion: every query draws its own pool."""
    count, n = len(positions), len(order)
    # row j: pool membership of the pages in popularity order for query j
    pooled = rng.random((count, n)) < ranking.r
    kept_cum = np.cumsum(~pooled, axis=1)
    pool_cum = np.cumsum(pooled, axis=1)
    n_d = kept_cum[:, -1]
    n_p = n - n_d
    head = np.minimum(ranking.k - 1, n_d)
    before = np.maximum(positions - head, 0)
    pool_before = rng.binomial(before, ranking.r)
    det_before = before - pool_before
    coin = rng.random(count) < ranking.r
    from_pool = np.where(pool_before >= n_p, False, np.where(det_before >= n_d - head, True, coin))
    from_pool &= (positions >= head) & (n_p > 0)
    from_pool |= n_d == 0
    det_index = np.where(pool_before >= n_p, positions - n_p, head + det_before)
    det_index = np.where(positions < head, positions, det_index)
    pool_index = (rng.random(count) * np.maximum(n_p, 1)).astype(np.int64)
    rank_of = np.where(from_pool, pool_index, det_index)
    cum = np.where(from_pool[:, None], pool_cum, kept_cum)
    slot = (cum > rank_of[:, None]).argmax(axis=1)
    return order[slot]


def _allocate(state: SimState, ranking: RankingConfig, mixed: Optional[Mixed],
              pop: np.ndarray, v: int):
    rng = state.rng
    n_surf = int(rng.binomial(v, mixed.x)) if mixed is not None and mixed.x > 0 else 0
    pages, positions = _search_pages(state, ranking, pop, v - n_surf)
    users = rng.integers(state.m, size=len(pages))
    if n_surf:
        cdf = np.cumsum(surf_probabilities(pop, mixed.c))
        cdf[-1] = 1.0
        surf = np.searchsorted(cdf, rng.random(n_surf), side="right")
        pages = np.concatenate([pages, surf])
        users = np.concatenate([users, rng.integers(state.m, size=n_surf)])
    return VisitAllocation(state.n, np.asarray(pages, dtype=np.int64), users), positions


def _record(state: SimState, alloc, positions, n_retired: int, at_risk, crossed,
            start_count) -> None:
    q = state.quality
    visits = alloc.total
    weighted = float(q[alloc.pages].sum()) if visits else 0.0
    state.visits_total += visits
    state.weighted_total += weighted
    state.exposure += at_risk
    if len(crossed):
        state.crossings[crossed] += 1
        state.tbp_sum[crossed] += state.day - state.birth_time[crossed] + 1
    state.awareness_days[state.ids, start_count] += 1
    if visits:
        np.add.at(state.level_visits, (alloc.pages, start_count[alloc.pages]), 1)
    if len(positions):
        state.rank_visits += np.bincount(positions, minlength=state.n)
    pop = state.popularity()
    with np.errstate(invalid="ignore"):
        # fewer than ten pages leaves some deciles empty (nan)
        deciles = np.bincount(state.decile, weights=pop, minlength=DECILES) / \
            np.bincount(state.decile, minlength=DECILES)
    qpc = weighted / visits if visits else math.nan
    state.rows.append((state.day, qpc, int((state.aware_count == 0).sum()), n_retired,
                       visits, weighted, *deciles))


@dataclass
class MetricsSeries:
    """Per-day measurements plus per-slot summaries of one run."""

    community: CommunityConfig
    ranking: RankingConfig
    mixed: Optional[Mixed]
    seed: int
    horizon_days: int
    warmup_days: int
    tbp_threshold: float
    day: np.ndarray
    qpc: np.ndarray
    zero_aware: np.ndarray
    retired: np.ndarray
    visits: np.ndarray
    weighted_quality: np.ndarray
    pop_deciles: np.ndarray
    quality: np.ndarray
    exposure: np.ndarray
    crossings: np.ndarray
    tbp_sum: np.ndarray
    awareness_days: np.ndarray
    level_visits: np.ndarray
    rank_visits: np.ndarray
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.day)

    def to_csv(self, path_or_buf=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i in range(len(self)):
            writer.writerow([int(self.day[i]), _fmt(self.qpc[i]), int(self.zero_aware[i]),
                             int(self.retired[i])] + [_fmt(p) for p in self.pop_deciles[i]])
        text = buf.getvalue()
        if path_or_buf is not None:
            if hasattr(path_or_buf, "write"):
                path_or_buf.write(text)
            else:
                with open(path_or_buf, "w", newline="") as fh:
                    fh.write(text)
        return text


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else f"{x:.6g}"


def _series(state: SimState, ranking, mixed, seed, horizon, warmup) -> MetricsSeries:
    rows = np.array(state.rows, dtype=float).reshape(-1, 6 + DECILES)
    return MetricsSeries(
        community=state.config, ranking=ranking, mixed=mixed, seed=seed,
        horizon_days=horizon, warmup_days=warmup, tbp_threshold=state.tbp_threshold,
        day=rows[:, 0].astype(np.int64), qpc=rows[:, 1], zero_aware=rows[:, 2].astype(np.int64),
        retired=rows[:, 3].astype(np.int64), visits=rows[:, 4].astype(np.int64),
        weighted_quality=rows[:, 5], pop_deciles=rows[:, 6:],
        quality=state.quality.copy(), exposure=state.exposure.copy(),
        crossings=state.crossings.copy(), tbp_sum=state.tbp_sum.copy(),
        awareness_days=state.awareness_days.copy(), level_visits=state.level_visits.copy(),
        rank_visits=state.rank_visits.copy())


def default_warmup(config: CommunityConfig) -> int:
    """Two expected lifetimes; zero for a community without churn."""
    return int(round(2 * config.l)) if math.isfinite(config.l) else 0


def run(config: CommunityConfig, ranking: RankingConfig = RankingConfig(),
        mixed: Optional[Mixed] = None, horizon_days: Optional[int] = None,
        warmup_days: Optional[int] = None, seed: int = 0,
        tbp_threshold: float = 0.99, rerandomize: str = "query") -> MetricsSeries:
    """Simulate ``horizon_days`` days; metrics cover days ``warmup_days`` onward."""
    ranking.check(config)
    if warmup_days is None:
        warmup_days = default_warmup(config)
    if horizon_days is None:
        horizon_days = warmup_days + 1000
    if horizon_days <= warmup_days:
        raise ValueError(f"horizon ({horizon_days}) must exceed warmup ({warmup_days})")
    state = SimState(config, seed, tbp_threshold, rerandomize=rerandomize)
    for day in range(horizon_days):
        state.measuring = day >= warmup_days
        step(state, ranking, mixed)
    return _series(state, ranking, mixed, seed, horizon_days, warmup_days)


# -- metrics ------------------------------------------------------------------

def _qpc_sums(source) -> tuple[float, float]:
    if isinstance(source, MetricsSeries):
        return float(source.weighted_quality.sum()), float(source.visits.sum())
    if isinstance(source, SimState):
        return source.weighted_total, float(source.visits_total)
    raise TypeError(f"cannot measure QPC from {type(source).__name__}")


def measure_qpc(source) -> float:
    """Visit-weighted mean quality over the measurement window."""
    weighted, visits = _qpc_sums(source)
    if visits <= 0:
        raise MeasurementError("no measured visits: QPC is undefined")
    return weighted / visits


def ideal_qpc(config: CommunityConfig) -> float:
    """QPC of the ranking that orders pages by true quality."""
    rates = rank_visit_rates(config.n, 1.0)
    q = make_quality_vector(config)
    return float((rates * q).sum() / rates.sum())


def normalized_qpc(source) -> float:
    cfg = source.community if isinstance(source, MetricsSeries) else source.config
    return measure_qpc(source) / ideal_qpc(cfg)


def _bucket_mask(quality: np.ndarray, bucket) -> np.ndarray:
    if bucket is None:
        return np.ones(len(quality), dtype=bool)
    if np.ndim(bucket) == 0:
        return np.isclose(quality, float(bucket))
    lo, hi = bucket
    return (quality >= lo) & (quality <= hi)


def measure_tbp(source, quality_bucket=None, threshold: float = 0.99,
                censored: bool = False) -> float:
    """Mean days from birth to reaching ``threshold`` of quality, per quality bucket.

    ``quality_bucket`` is a single quality value or a ``(lo, hi)`` range.
    By default this averages over pages that crossed during measurement. With
    ``censored=True`` it returns days at risk per crossing, which also counts
    time spent by pages that never crossed (``inf`` if none did).
    """
    if not math.isclose(threshold, source.tbp_threshold):
        raise ValueError(f"crossings were recorded at threshold {source.tbp_threshold}, "
                         f"not {threshold}")
    mask = _bucket_mask(source.quality, quality_bucket)
    crossings = int(source.crossings[mask].sum())
    if censored:
        exposure = float(source.exposure[mask].sum())
        if exposure == 0:
            raise MeasurementError("no page of this quality was at risk during measurement")
        return exposure / crossings if crossings else math.inf
    if crossings == 0:
        raise MeasurementError("no page in the bucket crossed the threshold: TBP is undefined")
    return float(source.tbp_sum[mask].sum()) / crossings


def pooled_tbp(sources: Sequence[MetricsSeries], quality_bucket=None) -> float:
    """Censored TBP over several runs: total days at risk over total crossings."""
    mask = _bucket_mask(sources[0].quality, quality_bucket)
    exposure = sum(float(s.exposure[mask].sum()) for s in sources)
    crossings = sum(int(s.crossings[mask].sum()) for s in sources)
    if exposure == 0:
        raise MeasurementError("no page of this quality was at risk during measurement")
    return exposure / crossings if crossings else math.inf


def awareness_histogram(source: MetricsSeries, quality_bucket=None,
                        bins: int = 10) -> np.ndarray:
    """Share of measured page-days in each of ``bins`` awareness bins."""
    mask = _bucket_mask(source.quality, quality_bucket)
    days = source.awareness_days[mask].sum(axis=0).astype(float)
    m = len(days) - 1
    levels = np.arange(m + 1) / m
    idx = np.minimum((levels * bins + 1e-9).astype(int), bins - 1)
    hist = np.bincount(idx, weights=days, minlength=bins)
    total = hist.sum()
    if total == 0:
        raise MeasurementError("no measured page-days in the bucket")
    return hist / total


def awareness_levels(source: MetricsSeries, quality_bucket=None) -> np.ndarray:
    """Share of measured page-days at each awareness level ``i / m``."""
    mask = _bucket_mask(source.quality, quality_bucket)
    days = source.awareness_days[mask].sum(axis=0).astype(float)
    return days / days.sum()


def mid_awareness_share(source: MetricsSeries, quality_bucket=None,
                        lo: float = 0.2, hi: float = 0.8) -> float:
    levels = awareness_levels(source, quality_bucket)
    a = np.arange(len(levels)) / (len(levels) - 1)
    return float(levels[(a > lo) & (a < hi)].sum())


def rank_power_law_slope(source: MetricsSeries, max_rank: Optional[int] = None,
                         bins: int = 15) -> float:
    """Slope of log(visits per rank) against log(rank), fitted on log-spaced rank bins.

    Binning keeps sparsely visited deep ranks from flattening the fit.
    """
    counts = source.rank_visits if max_rank is None else source.rank_visits[:max_rank]
    edges = np.unique(np.round(np.logspace(0, math.log10(len(counts) + 1), bins + 1))
                      .astype(np.int64))
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    density = np.add.reduceat(counts, lo - 1)[: len(lo)] / width
    centre = np.exp(np.array([np.log(np.arange(a, b)).mean() for a, b in zip(lo, hi)]))
    keep = density > 0
    if keep.sum() < 2:
        raise MeasurementError("too few visited ranks to fit a slope")
    slope, _ = np.polyfit(np.log(centre[keep]), np.log(density[keep]), 1)
    return float(slope)


def empirical_visit_rates(sources: Sequence[MetricsSeries], min_days: int = 1):
    """Observed visits per page-day at each popularity value ``Q(j) * i / m``.

    Returns ``(popularity, rate, page_days)`` pooled over ``sources``, sorted
    by popularity, for cells with at least ``min_days`` page-days.
    """
    first = sources[0]
    days = sum(s.awareness_days for s in sources).astype(float)
    visits = sum(s.level_visits for s in sources).astype(float)
    m = days.shape[1] - 1
    pop = first.quality[:, None] * (np.arange(m + 1) / m)[None, :]
    keep = days >= min_days
    pop, rate, d = pop[keep], visits[keep] / days[keep], days[keep]
    order = np.argsort(pop, kind="stable")
    return pop[order], rate[order], d[order]


def run_seeds(config: CommunityConfig, ranking: RankingConfig, seeds: Sequence[int],
              **kwargs) -> list[MetricsSeries]:
    return [run(config, ranking, seed=s, **kwargs) for s in seeds]
