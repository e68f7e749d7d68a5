"""Scenario configs, parameter sweeps and figure reproductions.

Scenario files are INI-style text with sections ``[community]``,
``[ranking]``, ``[mixed]``, ``[run]`` and ``[sweep]``. Every key is optional;
missing values take the default web-community settings.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import math
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytics
from .core import CommunityConfig, ConfigError, RankingConfig, Rule
from .simulator import (MeasurementError, MetricsSeries, Mixed, awareness_histogram,
                        default_warmup, ideal_qpc, measure_qpc, measure_tbp, pooled_tbp, run)

log = logging.getLogger(__name__)

COMMUNITY_KEYS = {"n": int, "u": int, "m": int, "v_u": float, "l": float,
                  "quality_exponent": float, "q_max": float}
RANKING_KEYS = {"rule": str, "k": int, "r": float}
MIXED_KEYS = {"x": float, "c": float}
RUN_KEYS = {"horizon_days": int, "warmup_days": int, "seeds": str, "scale": float,
            "tbp_threshold": float, "rerandomize": str}
SWEEP_KEYS = {"parameter": str, "values": str}
SECTIONS = {"community": COMMUNITY_KEYS, "ranking": RANKING_KEYS, "mixed": MIXED_KEYS,
            "run": RUN_KEYS, "sweep": SWEEP_KEYS}

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_MEASURE_DAYS = 3000
DESK_SCALE = 0.1
ANALYTIC_R_LIMIT = 0.2


@dataclass(frozen=True)
class ScenarioConfig:
    community: CommunityConfig = CommunityConfig()
    ranking: RankingConfig = RankingConfig()
    mixed: Optional[Mixed] = None
    horizon_days: Optional[int] = None
    warmup_days: Optional[int] = None
    seeds: tuple = (0,)
    sweep: Optional[tuple] = None
    tbp_threshold: float = 0.99
    rerandomize: str = "query"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be a nonempty list")
        self.ranking.check(self.community)
        if self.sweep is not None:
            name, values = self.sweep
            if name not in SWEEPABLE:
                raise ConfigError(f"sweep parameter {name!r} does not exist; "
                                  f"choose one of {sorted(SWEEPABLE)}")
            if not values:
                raise ConfigError("sweep values must be a nonempty list")

    @property
    def warmup(self) -> int:
        return default_warmup(self.community) if self.warmup_days is None else self.warmup_days

    @property
    def horizon(self) -> int:
        return self.warmup + DEFAULT_MEASURE_DAYS if self.horizon_days is None \
            else self.horizon_days

    def with_param(self, name: str, value) -> "ScenarioConfig":
        section = SWEEPABLE[name]
        if section == "community":
            return replace(self, community=replace(self.community, **{name: value}))
        if section == "ranking":
            return replace(self, ranking=RankingConfig(**{**_fields(self.ranking), name: value}))
        mixed = self.mixed or Mixed()
        return replace(self, mixed=replace(mixed, **{name: value}))

    def expand(self) -> list[tuple[str, "ScenarioConfig"]]:
        """One (label, scenario) group per sweep value; each group runs every seed."""
        if self.sweep is None:
            return [("base", self)]
        name, values = self.sweep
        base = replace(self, sweep=None)
        return [(f"{name}={v}", base.with_param(name, v)) for v in values]

    def to_dict(self) -> dict:
        return {
            "community": _fields(self.community),
            "ranking": {**_fields(self.ranking), "rule": self.ranking.rule.value},
            "mixed": None if self.mixed is None else _fields(self.mixed),
            "run": {"horizon_days": self.horizon, "warmup_days": self.warmup,
                    "seeds": list(self.seeds), "tbp_threshold": self.tbp_threshold,
                    "rerandomize": self.rerandomize},
            "sweep": None if self.sweep is None else
            {"parameter": self.sweep[0], "values": list(self.sweep[1])},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        run_d = d.get("run", {})
        sweep = d.get("sweep")
        ranking = dict(d.get("ranking", {}))
        return cls(community=CommunityConfig(**d.get("community", {})),
                   ranking=RankingConfig(**ranking),
                   mixed=None if d.get("mixed") is None else Mixed(**d["mixed"]),
                   horizon_days=run_d.get("horizon_days"), warmup_days=run_d.get("warmup_days"),
                   seeds=tuple(run_d.get("seeds", (0,))),
                   tbp_threshold=run_d.get("tbp_threshold", 0.99),
                   rerandomize=run_d.get("rerandomize", "query"),
                   sweep=None if sweep is None else (sweep["parameter"], tuple(sweep["values"])))


SWEEPABLE = {**{k: "community" for k in COMMUNITY_KEYS}, **{k: "ranking" for k in RANKING_KEYS},
             **{k: "mixed" for k in MIXED_KEYS}}


def _fields(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}


# -- config loading -------------------------------------------------------------

def _convert(section: str, key: str, raw: str, kind):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected {kind.__name__}, got {raw!r}") from None


def _number_list(section: str, key: str, raw: str) -> tuple:
    out = []
    for item in raw.replace("[", "").replace("]", "").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            out.append(int(item))
        except ValueError:
            try:
                out.append(float(item))
            except ValueError:
                out.append(item)
    if not out:
        raise ConfigError(f"[{section}] {key}: empty list")
    return tuple(out)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        keys = SECTIONS[section]
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"{source}: [{section}] unknown key {key!r}")
            values[section][key] = raw

    try:
        community = CommunityConfig(**{k: _convert("community", k, v, COMMUNITY_KEYS[k])
                                       for k, v in values.get("community", {}).items()})
        run_v = values.get("run", {})
        scale = _convert("run", "scale", run_v["scale"], float) if "scale" in run_v else None
        if scale is not None and scale != 1.0:
            community = community.scaled(scale)
        ranking_v = values.get("ranking", {})
        rule = ranking_v.get("rule", "none").strip().lower()
        if rule not in {r.value for r in Rule}:
            raise ConfigError(f"[ranking] rule: expected one of none/uniform/selective, got {rule!r}")
        k = _convert("ranking", "k", ranking_v["k"], int) if "k" in ranking_v else 1
        if k < 1:
            raise ConfigError(f"[ranking] k: must be >= 1, got {k}")
        r = _convert("ranking", "r", ranking_v["r"], float) if "r" in ranking_v else 0.0
        if not 0 <= r <= 1:
            raise ConfigError(f"[ranking] r: must lie in [0, 1], got {r}")
        ranking = RankingConfig(rule, k, r)
        mixed = None
        if "mixed" in values:
            mixed = Mixed(**{k: _convert("mixed", k, v, float) for k, v in values["mixed"].items()})
        seeds = _number_list("run", "seeds", run_v["seeds"]) if "seeds" in run_v else (0,)
        if any(not isinstance(s, int) for s in seeds):
            raise ConfigError(f"[run] seeds: integers required, got {run_v['seeds']!r}")
        sweep = None
        if "sweep" in values:
            sw = values["sweep"]
            if "parameter" not in sw or "values" not in sw:
                raise ConfigError("[sweep] needs both 'parameter' and 'values'")
            sweep = (sw["parameter"].strip(), _number_list("sweep", "values", sw["values"]))
        opt = {}
        for key in ("horizon_days", "warmup_days"):
            if key in run_v:
                opt[key] = _convert("run", key, run_v[key], int)
        if "tbp_threshold" in run_v:
            opt["tbp_threshold"] = _convert("run", "tbp_threshold", run_v["tbp_threshold"], float)
        if "rerandomize" in run_v:
            opt["rerandomize"] = run_v["rerandomize"].strip()
        scenario = ScenarioConfig(community, ranking, mixed, seeds=seeds, sweep=sweep, **opt)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if scenario.horizon <= scenario.warmup:
        raise ConfigError(f"{source}: [run] horizon_days must exceed warmup_days")
    return scenario


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def bundled_scenario(name: str) -> ScenarioConfig:
    """Load one of the scenario files shipped with the package (``default``, ``live_study``)."""
    text = resources.files("rankpromo").joinpath("scenarios", f"{name}.ini").read_text()
    return parse_config(text, f"{name}.ini")


# -- running ------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else ("inf" if math.isinf(x) else f"{x:.6g}")
    return str(x)


def _run_one(args) -> MetricsSeries:
    scenario, seed = args
    return run(scenario.community, scenario.ranking, scenario.mixed,
               horizon_days=scenario.horizon, warmup_days=scenario.warmup, seed=seed,
               tbp_threshold=scenario.tbp_threshold, rerandomize=scenario.rerandomize)


def run_many(jobs_list: Sequence[tuple], jobs: int = 1) -> list[MetricsSeries]:
    """Run independent (scenario, seed) jobs, in parallel when ``jobs > 1``."""
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, jobs_list))
    return [_run_one(j) for j in jobs_list]


def _safe(fn, *args, **kwargs) -> float:
    try:
        return fn(*args, **kwargs)
    except MeasurementError:
        return math.nan


def summarize(series: MetricsSeries) -> dict:
    """Headline metrics of one run."""
    q_top = float(series.quality.max())
    return {
        "seed": series.seed,
        "qpc": measure_qpc(series),
        "qpc_normalized": measure_qpc(series) / ideal_qpc(series.community),
        "tbp_top": _safe(measure_tbp, series, q_top, series.tbp_threshold),
        "tbp_top_censored": _safe(measure_tbp, series, q_top, series.tbp_threshold,
                                  censored=True),
        "zero_aware_mean": float(series.zero_aware.mean()),
        "retired_mean": float(series.retired.mean()),
    }


SUMMARY_HEADER = ["group", "seed", "qpc", "qpc_normalized", "tbp_top", "tbp_top_censored",
                  "zero_aware_mean", "retired_mean"]


def run_scenario(scenario: ScenarioConfig, out_dir=None, jobs: int = 1) -> dict:
    """Run every sweep group and seed; write per-run CSVs, a summary and metadata."""
    groups = scenario.expand()
    work = [(label, sc, seed) for label, sc in groups for seed in scenario.seeds]
    log.info("running %d groups x %d seeds", len(groups), len(scenario.seeds))
    results = run_many([(sc, seed) for _, sc, seed in work], jobs)
    summary_rows = []
    out = {}
    for (label, sc, seed), series in zip(work, results):
        s = summarize(series)
        summary_rows.append([label] + [s[k] for k in SUMMARY_HEADER[1:]])
        out[(label, seed)] = series
        if out_dir is not None:
            stem = f"run_{_slug(label)}_seed{seed}"
            _atomic_write(Path(out_dir) / f"{stem}.csv", series.to_csv())
    if out_dir is not None:
        _atomic_write(Path(out_dir) / "summary.csv", _rows_to_csv(SUMMARY_HEADER, summary_rows))
        _atomic_write(Path(out_dir) / "metadata.json",
                      json.dumps({"kind": "run", "scenario": scenario.to_dict()}, indent=2))
    return out


def _slug(label: str) -> str:
    return label.replace("=", "-").replace(" ", "_").replace("/", "_")


# -- figures ------------------------------------------------------------------

FIGURES = ("tbp_vs_r", "qpc_vs_r", "qpc_k_r", "size", "lifetime", "visits", "users", "mixed",
           "awareness_hist")
R_GRID = (0.0, 0.05, 0.1, 0.15, 0.2)
K_GRID = (1, 2, 5, 10, 20)
KR_R_GRID = (0.0, 0.05, 0.1, 0.2, 0.3, 0.5)
X_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
ROBUST_METHODS = (("nonrandomized", RankingConfig(Rule.NONE)),
                  ("selective_k1", RankingConfig(Rule.SELECTIVE, 1, 0.1)),
                  ("selective_k2", RankingConfig(Rule.SELECTIVE, 2, 0.1)))


@dataclass
class Curve:
    name: str
    header: list
    rows: list = field(default_factory=list)
    configs: list = field(default_factory=list)


def _stats(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if len(arr) == 0:
        return math.nan, math.nan
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.nan
    return float(arr.mean()), se


def _point(scenario: ScenarioConfig, seeds, jobs: int) -> list[MetricsSeries]:
    return run_many([(scenario, s) for s in seeds], jobs)


def _base_scenario(scale: float, seeds, measure_days: int) -> ScenarioConfig:
    community = CommunityConfig().scaled(scale) if scale != 1.0 else CommunityConfig()
    warmup = default_warmup(community)
    return ScenarioConfig(community, seeds=tuple(seeds), warmup_days=warmup,
                          horizon_days=warmup + measure_days)


def _qpc_row(series, normalized=True) -> list:
    vals = [measure_qpc(s) for s in series]
    if normalized:
        ideal = ideal_qpc(series[0].community)
        vals = [v / ideal for v in vals]
    return list(_stats(vals))


def _figure_curves(figure_id: str, base: ScenarioConfig, jobs: int) -> list[Curve]:
    seeds = base.seeds
    with_ranking = lambda sc, rk: replace(sc, ranking=rk)  # noqa: E731

    if figure_id == "tbp_vs_r":
        curves = []
        q_top = base.community.q_max
        for rule in (Rule.UNIFORM, Rule.SELECTIVE):
            c = Curve(f"tbp_vs_r_{rule.value}",
                      ["r", "tbp_mean", "tbp_stderr", "tbp_pooled_censored", "tbp_analytic",
                       "n_seeds"])
            for r in R_GRID:
                rk = RankingConfig(rule if r > 0 else Rule.NONE, 1, r)
                sc = with_ranking(base, rk)
                series = _point(sc, seeds, jobs)
                mean, se = _stats([_safe(measure_tbp, s, q_top) for s in series])
                an = math.nan
                if rk.rule is not Rule.UNIFORM:
                    F = analytics.solve_visit_function(sc.community, rk)
                    an = analytics.tbp_analytic(q_top, F, sc.community.lam, sc.community.m)
                c.rows.append([r, mean, se, pooled_tbp(series, q_top), an, len(series)])
                c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    if figure_id == "qpc_vs_r":
        curves = []
        for rule in (Rule.UNIFORM, Rule.SELECTIVE):
            c = Curve(f"qpc_vs_r_{rule.value}", ["r", "qpc_normalized", "qpc_stderr",
                                                  "qpc_analytic_normalized", "n_seeds"])
            for r in R_GRID:
                rk = RankingConfig(rule if r > 0 else Rule.NONE, 1, r)
                sc = with_ranking(base, rk)
                series = _point(sc, seeds, jobs)
                an = math.nan
                if rk.rule is not Rule.UNIFORM:
                    F = analytics.solve_visit_function(sc.community, rk)
                    an = analytics.qpc_analytic(sc.community, F) / ideal_qpc(sc.community)
                c.rows.append([r] + _qpc_row(series) + [an, len(series)])
                c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    if figure_id == "qpc_k_r":
        curves = []
        for k in K_GRID:
            c = Curve(f"qpc_k_r_k{k}", ["k", "r", "qpc_normalized", "qpc_stderr", "n_seeds"])
            for r in KR_R_GRID:
                rk = RankingConfig(Rule.SELECTIVE if r > 0 else Rule.NONE, k, r)
                sc = with_ranking(base, rk)
                series = _point(sc, seeds, jobs)
                c.rows.append([k, r] + _qpc_row(series) + [len(series)])
                c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    if figure_id in ("size", "lifetime", "visits", "users"):
        axis, points = _robustness_axis(figure_id, base.community)
        curves = []
        for name, rk in ROBUST_METHODS:
            c = Curve(f"{figure_id}_{name}", [axis, "qpc_normalized", "qpc_stderr", "n_seeds"])
            for value, community in points:
                if rk.k > community.n:
                    continue
                warmup = default_warmup(community)
                sc = replace(base, community=community, ranking=rk, warmup_days=warmup,
                             horizon_days=warmup + (base.horizon - base.warmup))
                series = _point(sc, seeds, jobs)
                c.rows.append([value] + _qpc_row(series) + [len(series)])
                c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    if figure_id == "mixed":
        curves = []
        for name, rk in (("nonrandomized", RankingConfig(Rule.NONE)),
                         ("selective_k1", RankingConfig(Rule.SELECTIVE, 1, 0.1))):
            c = Curve(f"mixed_{name}", ["x", "qpc_absolute", "qpc_stderr", "normalized", "n_seeds"])
            for x in X_GRID:
                sc = replace(base, ranking=rk, mixed=Mixed(x, 0.15))
                series = _point(sc, seeds, jobs)
                c.rows.append([x] + _qpc_row(series, normalized=False) + [False, len(series)])
                c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    if figure_id == "awareness_hist":
        curves = []
        q_top = base.community.q_max
        for name, rk in (("nonrandomized", RankingConfig(Rule.NONE)),
                         ("selective_k1_r0.2", RankingConfig(Rule.SELECTIVE, 1, 0.2))):
            sc = with_ranking(base, rk)
            series = _point(sc, seeds, jobs)
            sim = np.mean([awareness_histogram(s, q_top) for s in series], axis=0)
            F = analytics.solve_visit_function(sc.community, rk)
            an = analytics.awareness_histogram(q_top, F, sc.community.lam, sc.community.m)
            c = Curve(f"awareness_hist_{name}", ["bin_low", "bin_high", "analytic", "simulated"])
            for i in range(len(sim)):
                c.rows.append([i / len(sim), (i + 1) / len(sim), an[i], sim[i]])
            c.configs.append(sc.to_dict())
            curves.append(c)
        return curves

    raise ValueError(f"unknown figure id {figure_id!r}; choose one of {', '.join(FIGURES)}")


def _robustness_axis(figure_id: str, base: CommunityConfig):
    """Community variants for the robustness sweeps; dimensionless ratios are kept."""
    s = base.n / 10_000
    pts = []
    if figure_id == "size":
        for n in (1_000, 3_000, 10_000, 30_000):
            n_s = max(10, int(round(n * s)))
            u = max(1, n_s // 10)
            pts.append((n_s, replace(base, n=n_s, u=u, m=max(1, u // 10), v_u=float(u))))
        return "n", pts
    if figure_id == "lifetime":
        for years in (0.25, 0.5, 1.5, 3.0, 6.0):
            pts.append((years * 365.0, replace(base, l=years * 365.0)))
        return "l", pts
    if figure_id == "visits":
        for v_u in (100, 300, 1_000, 3_000, 10_000):
            u = max(1, int(round(v_u * s)))
            pts.append((float(u), replace(base, u=u, m=max(1, u // 10), v_u=float(u))))
        return "v_u", pts
    for u in (100, 300, 1_000, 3_000, 10_000):
        u_s = max(1, int(round(u * s)))
        pts.append((u_s, replace(base, u=u_s, m=max(1, u_s // 10))))
    return "u", pts


def run_figure(figure_id: str, scale: float = DESK_SCALE, out_dir=None,
               seeds: Sequence[int] = DEFAULT_SEEDS, measure_days: int = DEFAULT_MEASURE_DAYS,
               jobs: int = 1) -> list[Curve]:
    """Reproduce one figure's curves at ``scale``; write one CSV per curve plus metadata."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {figure_id!r}; choose one of {', '.join(FIGURES)}")
    base = _base_scenario(scale, seeds, measure_days)
    log.info("figure %s at scale %g (n=%d, %d seeds)", figure_id, scale, base.community.n,
             len(base.seeds))
    curves = _figure_curves(figure_id, base, jobs)
    if out_dir is not None:
        out = Path(out_dir)
        for c in curves:
            _atomic_write(out / f"{c.name}.csv", _rows_to_csv(c.header, c.rows))
            meta = {"kind": "figure", "figure": figure_id, "curve": c.name, "scale": scale,
                    "seeds": list(seeds), "measure_days": measure_days, "points": c.configs}
            _atomic_write(out / f"{c.name}.meta.json", json.dumps(meta, indent=2))
    return curves


# -- analytic vs simulated ----------------------------------------------------

COMPARE_HEADER = ["quantity", "analytic", "sim_mean", "sim_stderr", "rel_gap"]


def compare_analytic_vs_sim(scenario: ScenarioConfig, jobs: int = 1, out=None,
                            series: Optional[Sequence[MetricsSeries]] = None) -> list[list]:
    """Analytic awareness histogram, TBP and QPC next to simulated means over seeds."""
    rk = scenario.ranking
    if rk.rule is Rule.UNIFORM:
        raise ConfigError("analytic comparison needs rule none or selective")
    if rk.promotes and rk.r >= ANALYTIC_R_LIMIT:
        warnings.warn(f"r={rk.r}: the analytic model is meant for small r (< {ANALYTIC_R_LIMIT})",
                      UserWarning, stacklevel=2)
    cfg = scenario.community
    if series is None:
        series = run_many([(scenario, s) for s in scenario.seeds], jobs)
    F = analytics.solve_visit_function(cfg, rk)
    q_top = cfg.q_max
    rows = []

    an_hist = analytics.awareness_histogram(q_top, F, cfg.lam, cfg.m)
    sim_hist = np.array([awareness_histogram(s, q_top) for s in series])
    for i, a in enumerate(an_hist):
        rows.append(_compare_row(f"awareness_bin{i}", a, sim_hist[:, i]))

    an_tbp = analytics.tbp_analytic(q_top, F, cfg.lam, cfg.m, scenario.tbp_threshold)
    sim_tbp = [_safe(measure_tbp, s, q_top, scenario.tbp_threshold) for s in series]
    rows.append(_compare_row("tbp_top", an_tbp, sim_tbp))

    an_qpc = analytics.qpc_analytic(cfg, F)
    rows.append(_compare_row("qpc", an_qpc, [measure_qpc(s) for s in series]))
    if out is not None:
        _atomic_write(Path(out), _rows_to_csv(COMPARE_HEADER, rows))
    return rows


def _compare_row(name: str, analytic: float, sims) -> list:
    mean, se = _stats(sims)
    gap = abs(mean - analytic) / abs(mean) if mean and np.isfinite(mean) else math.nan
    return [name, analytic, mean, se, gap]
