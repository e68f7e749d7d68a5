"""The steady-state model next to the simulator.

Solves for the popularity-to-visits map, prints the awareness distribution of
the best page, and lines analytic quantities up against simulated means.
"""
import warnings

from rankpromo import CommunityConfig, RankingConfig, Rule, analytics
from rankpromo.experiments import ScenarioConfig, compare_analytic_vs_sim

community = CommunityConfig().scaled(0.1)
ranking = RankingConfig(Rule.SELECTIVE, k=1, r=0.1)

F = analytics.solve_visit_function(community, ranking)
print(f"solver converged after {F.iterations} iterations; F(0) = {F.f_zero:.5f}, "
      f"expected zero-awareness pages z = {F.z:.0f}")
for x in (0.001, 0.01, 0.1, 0.4):
    print(f"  popularity {x:<6g} -> {F(x):.3f} visits/day")

dist = analytics.awareness_markov(community.q_max, F, community.lam, community.m)
print("awareness of the best page:", " ".join(f"{p:.3f}" for p in dist.probs))

scenario = ScenarioConfig(community, ranking, seeds=(0, 1, 2), horizon_days=3095,
                          warmup_days=1095)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    rows = compare_analytic_vs_sim(scenario)
print(f"{'quantity':16s} {'analytic':>10s} {'simulated':>10s} {'gap':>6s}")
for name, analytic, mean, se, gap in rows:
    if name in ("awareness_bin0", "awareness_bin9", "tbp_top", "qpc"):
        print(f"{name:16s} {analytic:10.4g} {mean:10.4g} {gap:6.1%}")
