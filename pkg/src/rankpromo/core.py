"""Domain types shared by the analytic model and the simulator.

A community is a fixed-size set of pages and users. Page popularity is the
fraction of monitored users aware of the page times the page's quality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

DEFAULT_QUALITY_EXPONENT = 2.1


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""


@dataclass(frozen=True)
class CommunityConfig:
    """Size and activity of one web community.

    ``v`` (monitored visits/day) and ``lam`` (retirement rate) are derived
    from ``v_u, m, u`` and ``l`` and are exposed as properties.
    """

    n: int = 10_000
    u: int = 1_000
    m: int = 100
    v_u: float = 1_000.0
    l: float = 547.5
    quality_exponent: float = DEFAULT_QUALITY_EXPONENT
    q_max: float = 0.4
    time_step: float = 1.0

    def __post_init__(self):
        for name in ("n", "u", "m"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.m > self.u:
            raise ConfigError(f"m must not exceed u (m={self.m}, u={self.u})")
        if not self.v_u >= 0:
            raise ConfigError(f"v_u must be nonnegative, got {self.v_u!r}")
        if not self.l > 0:
            raise ConfigError(f"l must be positive, got {self.l!r}")
        if not 0 < self.q_max <= 1:
            raise ConfigError(f"q_max must lie in (0, 1], got {self.q_max!r}")
        if not self.quality_exponent >= 0:
            raise ConfigError(f"quality_exponent must be nonnegative, got {self.quality_exponent!r}")
        if self.time_step != 1.0:
            raise ConfigError("time_step is fixed at 1 day")

    @property
    def v(self) -> float:
        return self.v_u * self.m / self.u

    @property
    def lam(self) -> float:
        return 1.0 / self.l

    def scaled(self, factor: float) -> "CommunityConfig":
        """Shrink ``n`` and proportionally ``u, m, v_u``; ratios are kept."""
        if factor <= 0:
            raise ConfigError(f"scale factor must be positive, got {factor!r}")
        n = max(1, int(round(self.n * factor)))
        u = max(1, int(round(self.u * factor)))
        m = max(1, int(round(self.m * factor)))
        return replace(self, n=n, u=u, m=min(m, u), v_u=self.v_u * factor)


class Rule(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"
    SELECTIVE = "selective"


@dataclass(frozen=True)
class RankingConfig:
    """Promotion rule, starting point ``k`` and degree of randomization ``r``."""

    rule: Rule = Rule.NONE
    k: int = 1
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be an integer >= 1, got {self.k!r}")
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError(f"r must lie in [0, 1], got {self.r!r}")

    def check(self, community: CommunityConfig) -> None:
        if self.k > community.n:
            raise ConfigError(f"k={self.k} exceeds the number of pages n={community.n}")

    @property
    def promotes(self) -> bool:
        return self.rule is not Rule.NONE


@dataclass
class Page:
    id: int
    quality: float
    birth_time: int = 0
    aware_monitored: set = field(default_factory=set)

    @property
    def awareness_count(self) -> int:
        return len(self.aware_monitored)

    def popularity(self, m: int) -> float:
        return popularity(self, m)


def make_quality_vector(config: CommunityConfig) -> np.ndarray:
    """Descending power-law qualities ``q_max * j**-exponent`` for ranks j = 1..n."""
    ranks = np.arange(1, config.n + 1, dtype=float)
    return np.clip(config.q_max * ranks ** (-config.quality_exponent), 0.0, 1.0)


def popularity(page: Page, m: int) -> float:
    aware = page.awareness_count
    if aware > m:
        raise ValueError(f"page {page.id} has {aware} aware users but m={m}")
    return aware / m * page.quality


def awareness_threshold_count(m: int, threshold: float) -> int:
    """Smallest number of aware monitored users with awareness >= ``threshold``."""
    # tolerate float noise such as 0.99 * 100 = 98.99999999999999
    return min(m, max(1, math.ceil(threshold * m - 1e-9)))


def ranked_order(popularity: np.ndarray, birth_time: np.ndarray,
                 ids: Optional[np.ndarray] = None) -> np.ndarray:
    """Indices sorted by popularity desc, then birth time asc, then id asc."""
    if ids is None:
        ids = np.arange(len(popularity))
    return np.lexsort((ids, birth_time, -np.asarray(popularity)))
