"""Steady-state analysis of awareness, rank and visit rate.

The visit function ``F`` maps popularity to the expected number of monitored
visits per day. It is coupled to the steady-state awareness distribution of
every page, so it is obtained by fixed-point iteration: evaluate the
right-hand side on a grid, fit ``log F`` as a quadratic in ``log x``, repeat.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .core import (CommunityConfig, RankingConfig, Rule, awareness_threshold_count,
                   make_quality_vector)
from .visits import f2, rank_visit_rates

GRID_POINTS = 50
TOLERANCE = 1e-4
MAX_ITERATIONS = 100
ENDPOINT_WEIGHT = 10.0


class AnalyticError(ArithmeticError):
    """An analytic quantity is undefined for the given inputs."""


@dataclass(frozen=True)
class AwarenessDistribution:
    probs: np.ndarray
    quality: float

    @property
    def m(self) -> int:
        return len(self.probs) - 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    def mass(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Probability of awareness in the closed interval ``[lo, hi]``."""
        a = self.levels
        return float(self.probs[(a >= lo) & (a <= hi)].sum())


@dataclass
class VisitFunction:
    """Numeric popularity-to-visit-rate map.

    ``table`` holds sampled values on ``grid``; ``alpha, beta, gamma`` are the
    log-log quadratic fit used to evaluate ``F`` anywhere in ``(0, 1]``;
    ``f_zero`` is the separately stored rate of zero-popularity pages.
    """

    grid: np.ndarray
    table: np.ndarray
    alpha: float
    beta: float
    gamma: float
    f_zero: float
    converged: bool = True
    iterations: int = 0
    z: Optional[float] = None
    phi: Optional[float] = None
    history: list = field(default_factory=list, repr=False)

    def fit_values(self, x) -> np.ndarray:
        lx = np.log(np.asarray(x, dtype=float))
        return np.exp(self.alpha * lx * lx + self.beta * lx + self.gamma)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.full(x_arr.shape, self.f_zero, dtype=float)
        pos = x_arr > 0
        if np.any(pos):
            out[pos] = self.fit_values(x_arr[pos])
        return float(out) if out.ndim == 0 else out

    @classmethod
    def from_table(cls, grid, table, f_zero: float, endpoint_weight: float = ENDPOINT_WEIGHT,
                   **extra) -> "VisitFunction":
        alpha, beta, gamma = fit_loglog_quadratic(grid, table, endpoint_weight)
        return cls(np.asarray(grid, dtype=float), np.asarray(table, dtype=float),
                   alpha, beta, gamma, float(f_zero), **extra)

    @classmethod
    def constant(cls, value: float, grid=None) -> "VisitFunction":
        grid = default_grid(1e-6) if grid is None else np.asarray(grid, dtype=float)
        if value <= 0:
            return cls(grid, np.zeros_like(grid), 0.0, 0.0, -np.inf, 0.0)
        return cls(grid, np.full_like(grid, value), 0.0, 0.0, math.log(value), value)

    def fit_residual(self) -> float:
        """Max relative gap between table and fit on the grid."""
        mask = self.table > 0
        if not np.any(mask):
            return 0.0
        fit = self.fit_values(self.grid[mask])
        return float(np.max(np.abs(fit - self.table[mask]) / self.table[mask]))

    def to_csv(self, path_or_buf) -> None:
        """Write ``x, F_table, F_fit`` rows; the first row is the ``x = 0`` value."""
        if hasattr(path_or_buf, "write"):
            self._write_csv(path_or_buf)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "F_table", "F_fit"])
        writer.writerow([0.0, f"{self.f_zero:.6g}", f"{self.f_zero:.6g}"])
        for x, t, ft in zip(self.grid, self.table, self.fit_values(self.grid)):
            writer.writerow([f"{x:.6g}", f"{t:.6g}", f"{ft:.6g}"])


def default_grid(x_min: float, points: int = GRID_POINTS) -> np.ndarray:
    return np.logspace(math.log10(x_min), 0.0, points)


def fit_loglog_quadratic(x, y, endpoint_weight: float = ENDPOINT_WEIGHT):
    """Weighted least squares fit of ``log y = a (log x)^2 + b log x + c``.

    The first and last grid points get ``endpoint_weight`` so the fit holds
    tightly at the ends of the popularity range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if keep.sum() < 3:
        if not np.any(keep):
            return 0.0, 0.0, -np.inf
        return 0.0, 0.0, float(np.log(y[keep]).mean())
    lx, ly = np.log(x[keep]), np.log(y[keep])
    w = np.ones(len(lx))
    w[0] = w[-1] = endpoint_weight
    a, b, c = np.polyfit(lx, ly, 2, w=w)
    return float(a), float(b), float(c)


def _as_visit_callable(F) -> Callable:
    if callable(F):
        return F
    value = float(F)
    return lambda x: np.full(np.shape(x), value, dtype=float)


def _eval(F, x) -> np.ndarray:
    return np.asarray(_as_visit_callable(F)(np.asarray(x, dtype=float)), dtype=float)


# -- awareness ----------------------------------------------------------------

def _closed_form_rows(F_vals: np.ndarray, lam: float, m: int) -> np.ndarray:
    """Product formula for each row of ``F`` sampled at ``q * a_i``.

    ``F_vals`` has shape (..., m + 1). The terminal entry is the complement mass.
    """
    a = np.arange(m + 1) / m
    out = np.zeros(F_vals.shape, dtype=float)
    lead = lam / (lam + F_vals[..., 0])
    ratios = F_vals[..., :-1] / (lam + F_vals[..., 1:])
    prods = np.concatenate([np.ones(F_vals.shape[:-1] + (1,)), np.cumprod(ratios, axis=-1)],
                           axis=-1)
    out[..., :m] = (lead[..., None] / (1.0 - a[:m])) * prods[..., :m]
    out[..., m] = 1.0 - out[..., :m].sum(axis=-1)
    return out


def _markov_rows(F_vals: np.ndarray, lam: float, m: int) -> np.ndarray:
    """Exact stationary law of the pure-birth chain with uniform resets to zero."""
    a = np.arange(m + 1) / m
    p = F_vals * (1.0 - a)
    out = np.empty(F_vals.shape, dtype=float)
    out[..., 0] = lam / (lam + p[..., 0])
    for i in range(1, m + 1):
        out[..., i] = out[..., i - 1] * p[..., i - 1] / (lam + p[..., i])
    return out / out.sum(axis=-1, keepdims=True)


def _check_inputs(q: float, lam: float, m: int) -> None:
    if not 0 < q <= 1:
        raise ValueError(f"quality must lie in (0, 1], got {q!r}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")


def awareness_closed_form(q: float, F, lam: float, m: int,
                          tol: float = 1e-9) -> AwarenessDistribution:
    """Steady-state fraction of quality-``q`` pages at each awareness level.

    Uses the product formula for levels below 1; the fully-aware level takes
    the remaining mass because the formula is singular there.
    """
    _check_inputs(q, lam, m)
    F_vals = _eval(F, q * np.arange(m + 1) / m)
    if np.any(F_vals < 0):
        raise ValueError("visit function must be nonnegative")
    probs = _closed_form_rows(F_vals, lam, m)
    if probs[-1] < -tol:
        raise AnalyticError(f"complement mass is negative ({probs[-1]:.3g}); "
                            "the visit function is inconsistent with the product formula")
    probs[-1] = max(probs[-1], 0.0)
    return AwarenessDistribution(probs, q)


def awareness_markov(q: float, F, lam: float, m: int) -> AwarenessDistribution:
    """Stationary distribution of the awareness birth/death chain.

    From level ``i`` awareness rises at rate ``F(q a_i)(1 - a_i)`` and the
    page is replaced (back to level 0) at rate ``lam``. Balance equations are
    rate-based, so subdividing the day changes nothing.
    """
    _check_inputs(q, lam, m)
    F_vals = _eval(F, q * np.arange(m + 1) / m)
    if np.any(F_vals < 0):
        raise ValueError("visit function must be nonnegative")
    probs = _markov_rows(F_vals, lam, m)
    assert abs(probs.sum() - 1.0) < 1e-9
    return AwarenessDistribution(probs, q)


def awareness_matrix(qualities: np.ndarray, F, lam: float, m: int,
                     method: str = "markov") -> np.ndarray:
    """Distributions for many qualities at once, shape ``(len(qualities), m + 1)``."""
    q = np.asarray(qualities, dtype=float)
    F_vals = _eval(F, q[:, None] * (np.arange(m + 1) / m)[None, :])
    if method == "closed_form":
        out = _closed_form_rows(F_vals, lam, m)
        if np.any(out[:, -1] < -1e-9):
            raise AnalyticError("complement mass is negative for some quality")
        out[:, -1] = np.maximum(out[:, -1], 0.0)
        return out
    if method == "markov":
        return _markov_rows(F_vals, lam, m)
    raise ValueError(f"unknown awareness method {method!r}")


# -- rank maps ----------------------------------------------------------------

def _tail_mass(dist: np.ndarray) -> np.ndarray:
    """tail[:, t] = sum of dist[:, i] for i > t, for t = 0..m (last column 0)."""
    rev = np.cumsum(dist[:, ::-1], axis=1)[:, ::-1]
    return np.concatenate([rev[:, 1:], np.zeros((dist.shape[0], 1))], axis=1)


def f1_nonrandomized(x, qualities: np.ndarray, dist: np.ndarray):
    """Expected rank of a page with popularity ``x`` under popularity ranking.

    One plus the expected number of pages whose popularity exceeds ``x``;
    ``dist[p]`` is page ``p``'s awareness distribution.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    q = np.asarray(qualities, dtype=float)
    m = dist.shape[1] - 1
    tail = _tail_mass(dist)
    with np.errstate(divide="ignore"):
        t = np.floor(m * x_arr[None, :] / q[:, None] + 1e-12)
    t = np.clip(t, 0, m).astype(int)
    above = np.take_along_axis(tail, t, axis=1)
    out = 1.0 + above.sum(axis=0)
    return float(out[0]) if np.ndim(x) == 0 else out


def f1_selective(f1_value, k: int, r: float, z: float):
    """Expected rank once zero-awareness pages are promoted ahead of the page."""
    f1 = np.asarray(f1_value, dtype=float)
    if r >= 1.0:
        displaced = np.full(f1.shape, float(z))
    else:
        displaced = np.minimum(r * (f1 - k + 1) / (1.0 - r), z)
    out = np.where(f1 < k, f1, f1 + displaced)
    return float(out) if out.ndim == 0 else out


def estimate_z(n_or_qualities, F, lam: float) -> float:
    """Expected number of zero-awareness pages: ``n * lam / (lam + F(0))``."""
    n = n_or_qualities if np.ndim(n_or_qualities) == 0 else len(n_or_qualities)
    f0 = float(_eval(F, 0.0))
    return float(n * lam / (lam + f0))


def f_zero_selective(k: int, r: float, z: float, n: int, v: float) -> float:
    """Expected daily visits of one zero-awareness page under selective promotion.

    Pool pages hold each slot from ``k`` on with probability ``r`` until the
    pool runs out after about ``z / r`` slots. If the deterministic list of
    ``n - z`` pages runs out first, every later slot belongs to the pool.
    The pool always holds at least one page.
    """
    if r <= 0:
        return 0.0
    if z <= 0:
        raise ValueError(f"z must be positive, got {z!r}")
    pool = max(float(z), 1.0)
    rates = rank_visit_rates(n, v)
    head = k - 1
    pool_end = min(n, k + math.ceil(pool / r - 1e-9) - 1)
    if r < 1:
        det_end = head + max(n - pool - head, 0.0) / (1.0 - r)
        if det_end < pool_end:
            cut = max(head, min(n, int(round(det_end))))
            return float((r * rates[head:cut].sum() + rates[cut:].sum()) / pool)
    if pool_end < k:
        return 0.0
    return float(r * rates[head:pool_end].sum() / pool)


def _solve_z(n: int, lam: float, k: int, r: float, v: float) -> float:
    if r <= 0 or v <= 0:
        return float(n)

    def excess(z):
        return z - n * lam / (lam + f_zero_selective(k, r, z, n, v))

    if excess(n) <= 0:
        return float(n)
    return float(brentq(excess, 1e-12, float(n), xtol=1e-12, rtol=1e-12))


# -- the fixed point ----------------------------------------------------------

@dataclass(frozen=True)
class _Community:
    qualities: np.ndarray
    n: int
    m: int
    v: float
    lam: float

    @classmethod
    def of(cls, config: CommunityConfig) -> "_Community":
        return cls(make_quality_vector(config), config.n, config.m, config.v, config.lam)


def _rhs(F: VisitFunction, comm: _Community, ranking: RankingConfig, grid: np.ndarray,
         method: str):
    """Right-hand side of the fixed point: (table on grid, F(0), z)."""
    rule = ranking.rule
    if rule is Rule.SELECTIVE:
        z = _solve_z(comm.n, comm.lam, ranking.k, ranking.r, comm.v)
        f_zero = f_zero_selective(ranking.k, ranking.r, z, comm.n, comm.v) if z > 0 else 0.0
        F = VisitFunction(F.grid, F.table, F.alpha, F.beta, F.gamma, f_zero)
    dist = awareness_matrix(comm.qualities, F, comm.lam, comm.m, method)
    f1 = f1_nonrandomized(grid, comm.qualities, dist)
    if rule is Rule.SELECTIVE:
        rank = f1_selective(f1, ranking.k, ranking.r, z)
    else:
        z = float(dist[:, 0].sum())
        f_zero = f2(min(1.0 + float((1.0 - dist[:, 0]).sum()), comm.n), comm.n, comm.v)
        rank = f1
    table = f2(np.clip(rank, 1.0, comm.n), comm.n, comm.v)
    return np.atleast_1d(table), f_zero, z


def _closed_modes(config: CommunityConfig, mode: str, grid, proportional_weight: float,
                  method: str, tol: float, max_iter: int) -> VisitFunction:
    comm = _Community.of(config)
    if mode == "random":
        table = np.full(grid.shape, comm.v / comm.n)
        return VisitFunction(grid, table, 0.0, 0.0, math.log(comm.v / comm.n), comm.v / comm.n,
                             iterations=0)
    w = proportional_weight
    if not 0 < w < 1:
        raise ValueError("proportional mode needs a weight in (0, 1): with pure proportional "
                         "traffic new pages are never visited and the normalization collapses")
    floor = (1.0 - w) * comm.v / comm.n
    phi = float(comm.qualities.sum())
    history = []
    converged = False
    for it in range(1, max_iter + 1):
        def F(x, phi=phi):
            return comm.v * w * np.asarray(x) / phi + floor
        dist = awareness_matrix(comm.qualities, F, comm.lam, comm.m, method)
        levels = np.arange(comm.m + 1) / comm.m
        new_phi = float((dist * levels[None, :] * comm.qualities[:, None]).sum())
        change = abs(new_phi - phi) / phi
        history.append(change)
        phi = new_phi
        if change < tol:
            converged = True
            break
    table = comm.v * (w * grid / phi + (1.0 - w) / comm.n)
    out = VisitFunction.from_table(grid, table, floor, converged=converged, iterations=it,
                                   phi=phi, history=history)
    return out


def solve_visit_function(config: CommunityConfig, ranking: RankingConfig = RankingConfig(),
                         *, mode: str = "ranking", damping: float = 0.5,
                         tol: float = TOLERANCE, max_iter: int = MAX_ITERATIONS,
                         method: str = "markov", grid: Optional[np.ndarray] = None,
                         endpoint_weight: float = ENDPOINT_WEIGHT,
                         proportional_weight: float = 0.5) -> VisitFunction:
    """Solve ``F(x) = f2(F1(x))`` for the given ranking rule.

    Starts from ``F(x) = x`` and iterates: awareness distributions from the
    current ``F``, expected rank on the grid, visits at that rank, damped
    update of the table, log-log quadratic refit. ``damping=0`` is plain
    iteration. ``mode`` may also be ``"random"`` (every rank equally likely)
    or ``"proportional"`` (traffic proportional to popularity, blended with
    random ranking by ``1 - proportional_weight``).
    """
    ranking = RankingConfig(ranking.rule, ranking.k, ranking.r)
    comm = _Community.of(config)
    if grid is None:
        grid = default_grid(float(comm.qualities.min()) / comm.m)
    grid = np.asarray(grid, dtype=float)
    if mode in ("random", "proportional"):
        return _closed_modes(config, mode, grid, proportional_weight, method, tol, max_iter)
    if mode != "ranking":
        raise ValueError(f"unknown mode {mode!r}")
    if ranking.rule is Rule.UNIFORM:
        raise ValueError("no analytic rank map for uniform promotion; use the simulator")
    ranking.check(config)

    F = VisitFunction(grid, grid.copy(), 0.0, 1.0, 0.0, 0.0, converged=False)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        rhs, f_zero, z = _rhs(F, comm, ranking, grid, method)
        if it == 1:
            table, new_f0 = rhs, f_zero
        else:
            table = damping * F.table + (1.0 - damping) * rhs
            new_f0 = damping * F.f_zero + (1.0 - damping) * f_zero
        scale = np.maximum(np.abs(F.table), 1e-300)
        change = float(np.max(np.abs(table - F.table) / scale))
        if F.f_zero > 0:
            change = max(change, abs(new_f0 - F.f_zero) / F.f_zero)
        history.append(change)
        F = VisitFunction.from_table(grid, table, new_f0, endpoint_weight, converged=False,
                                     iterations=it, z=z, history=history)
        if it > 1 and change < tol:
            converged = True
            break
    F.converged = converged
    if not converged:
        warnings.warn(f"visit function did not converge in {max_iter} iterations "
                      f"(last change {history[-1]:.3g})", RuntimeWarning, stacklevel=2)
    return F


def fixed_point_residual(F: VisitFunction, config: CommunityConfig,
                         ranking: RankingConfig, method: str = "markov") -> float:
    """Max relative gap between ``F`` on its grid and the right-hand side it induces."""
    rhs, _, _ = _rhs(F, _Community.of(config), ranking, F.grid, method)
    return float(np.max(np.abs(rhs - F.table) / F.table))


# -- metrics ------------------------------------------------------------------

def qpc_analytic(config: CommunityConfig, F, method: str = "markov",
                 qualities: Optional[np.ndarray] = None) -> float:
    """Expected visit-weighted quality at steady state."""
    q = make_quality_vector(config) if qualities is None else np.asarray(qualities, dtype=float)
    m = config.m
    levels = np.arange(m + 1) / m
    dist = awareness_matrix(q, F, config.lam, m, method)
    rates = _eval(F, q[:, None] * levels[None, :])
    visits = (dist * rates).sum(axis=1)
    total = visits.sum()
    if total <= 0:
        raise AnalyticError("no visits anywhere: QPC is undefined")
    return float((visits * q).sum() / total)


def tbp_analytic(q: float, F, lam: float, m: int, threshold: float = 0.99) -> float:
    """Expected days for a surviving page to reach ``threshold`` awareness.

    Sum of the expected sojourn times of the pure-birth chain, ignoring death.
    """
    if not q > 0:
        raise ValueError(f"quality must be positive, got {q!r}")
    need = awareness_threshold_count(m, threshold)
    a = np.arange(need) / m
    rates = _eval(F, q * a) * (1.0 - a)
    if np.any(rates <= 0):
        return math.inf
    return float(np.sum(1.0 / rates))


def awareness_histogram(q: float, F, lam: float, m: int, bins: int = 10,
                        method: str = "markov") -> np.ndarray:
    """Awareness mass in ``bins`` equal-width bins over [0, 1]."""
    dist = awareness_closed_form(q, F, lam, m) if method == "closed_form" \
        else awareness_markov(q, F, lam, m)
    idx = np.minimum((dist.levels * bins + 1e-9).astype(int), bins - 1)
    return np.bincount(idx, weights=dist.probs, minlength=bins)
