"""A small joke-site community: new items inserted from rank 21 on.

Uses the bundled scenario: 1000 items living 30 days, new items shuffled
into the list starting at rank 21, only the last 15 of 45 days measured.
"""
from dataclasses import replace

import numpy as np

from rankpromo import RankingConfig
from rankpromo.experiments import bundled_scenario, run_many
from rankpromo.simulator import measure_qpc

promoted = bundled_scenario("live_study")
plain = replace(promoted, ranking=RankingConfig())

for name, scenario in (("popularity only", plain), ("promotion from 21", promoted)):
    series = run_many([(scenario, s) for s in scenario.seeds])
    qpc = [measure_qpc(s) for s in series]
    print(f"{name:18s} mean quality of viewed items {np.mean(qpc):.4f} "
          f"(+/- {np.std(qpc, ddof=1) / np.sqrt(len(qpc)):.4f})")
