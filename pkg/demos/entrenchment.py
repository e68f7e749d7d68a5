"""Entrenchment and how selective promotion breaks it.

Runs a tenfold-shrunk community under popularity ranking and under
selective promotion, then compares result quality and how long the best
page takes to become popular.
"""
import numpy as np

from rankpromo import CommunityConfig, RankingConfig, Rule, run
from rankpromo.simulator import awareness_histogram, normalized_qpc, pooled_tbp

community = CommunityConfig().scaled(0.1)
print(f"n={community.n} pages, m={community.m} monitored users, "
      f"v={community.v:g} monitored visits/day, lifetime {community.l} days")

rankings = {
    "popularity only": RankingConfig(),
    "selective r=0.1": RankingConfig(Rule.SELECTIVE, k=1, r=0.1),
    "selective r=0.2": RankingConfig(Rule.SELECTIVE, k=1, r=0.2),
}

for name, ranking in rankings.items():
    series = [run(community, ranking, horizon_days=3095, seed=s) for s in range(5)]
    qpc = np.mean([normalized_qpc(s) for s in series])
    tbp = pooled_tbp(series, community.q_max)
    hist = np.mean([awareness_histogram(s, community.q_max) for s in series], axis=0)
    print(f"{name:18s} normalized QPC {qpc:.3f}   days for best page to become popular "
          f"{tbp:8.1f}   share of its life unknown {hist[0]:.2f}")

# Popularity ranking leaves the best page unknown most of its life.
# Promoting unseen pages into random slots gets it discovered in weeks.
