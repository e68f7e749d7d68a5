"""Randomized rank promotion for popularity-ranked search results.

Analytic steady-state model and day-by-day simulator of a web community
whose search engine ranks pages by popularity, optionally promoting new
pages into random rank positions.
"""
from .analytics import (AnalyticError, AwarenessDistribution, VisitFunction, awareness_closed_form,
                        awareness_markov, awareness_matrix, qpc_analytic, solve_visit_function,
                        tbp_analytic)
from .core import (CommunityConfig, ConfigError, Page, RankingConfig, Rule, make_quality_vector,
                   popularity)
from .experiments import (ScenarioConfig, compare_analytic_vs_sim, load_config, parse_config,
                          run_figure, run_scenario)
from .ranking import RankedList, build_ranked_list, merge_promoted, rank_deterministic
from .simulator import (MeasurementError, MetricsSeries, Mixed, ideal_qpc, measure_qpc,
                        measure_tbp, normalized_qpc, run)
from .visits import f2, surf_probabilities, theta

__version__ = "0.1.0"

__all__ = [
    "AnalyticError", "AwarenessDistribution", "CommunityConfig", "ConfigError",
    "MeasurementError", "MetricsSeries", "Mixed", "Page", "RankedList", "RankingConfig", "Rule",
    "ScenarioConfig", "VisitFunction", "awareness_closed_form", "awareness_markov",
    "awareness_matrix", "build_ranked_list", "compare_analytic_vs_sim", "f2", "ideal_qpc",
    "load_config", "make_quality_vector", "measure_qpc", "measure_tbp", "merge_promoted",
    "normalized_qpc", "parse_config", "popularity", "qpc_analytic", "rank_deterministic", "run",
    "run_figure", "run_scenario", "solve_visit_function", "surf_probabilities", "tbp_analytic",
    "theta",
]
