"""Optimal per-level relativities for bonus-malus premiums.

The premium of a policyholder in class ``k`` at level ``l`` is the a priori
premium times the level's relativity.  The optimal relativity minimizes the
expected squared distance between the premium and the policyholder's
conditional mean loss in steady state; it equals a ratio of premium-weighted
conditional moments of the random effects given the occupied level.

Three families are provided:

* ``optimal_relativity_frequency`` -- frequency-driven chain, frequency
  premium target (relativity predicts the frequency effect).
* ``optimal_relativity_dependent`` -- frequency-driven chain, aggregate-loss
  premium target; claim-size information enters only through the dependence
  between the two effects.
* ``optimal_relativity_severity`` -- severity-aware chain, aggregate-loss
  premium target; the level itself carries claim-size history.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BonusMalusError, LevelMismatchError
from .model import BmsRule, FreqRule, ModelSpec, SeverityRule
from .quadrature import DEFAULT_NODES, build_grid, marginal_grid
from .stationary import _stationary_batch, conditional_stationary_field
from .transition import build_matrix_freq

MASS_FLOOR = 1e-14
DUAL_ROUTE_TOL = 1e-10


@dataclass(frozen=True)
class RelativityTable:
    """Per-level relativities with their stationary distribution and score.

    ``relativities`` holds NaN at levels whose stationary mass is below
    1e-14 (the conditional moment there is undefined, not zero).
    """

    rule: BmsRule
    relativities: np.ndarray
    stationary: np.ndarray
    hmse_raw: float
    hmse_normalized: float
    family: str
    nodes: int

    @property
    def threshold(self) -> float | None:
        return self.rule.threshold if isinstance(self.rule, SeverityRule) else None

    @property
    def undefined_levels(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(~np.isfinite(self.relativities)))

    def scoring_relativities(self) -> np.ndarray:
        """Relativities with undefined levels zeroed for mass-weighted sums."""
        return np.nan_to_num(self.relativities, nan=0.0)


@dataclass(frozen=True)
class BalanceReport:
    """Normal-equation residuals of a relativity table.

    ``level_residuals`` are the premium-weighted conditional residuals of the
    target given each occupied level; ``global_lhs``/``global_rhs`` compare
    the premium collected against the expected loss over the whole portfolio.
    """

    level_residuals: np.ndarray
    global_lhs: float
    global_rhs: float

    @property
    def max_level_residual(self) -> float:
        finite = self.level_residuals[np.isfinite(self.level_residuals)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0

    @property
    def global_gap(self) -> float:
        return abs(self.global_lhs - self.global_rhs)


@dataclass(frozen=True)
class _MomentField:
    """Per-level moment accumulators shared by relativity and score code.

    ``mass[l]``    -- P(L = l)
    ``prem_sq[l]`` -- E[premium_factor^2 ; L = l]
    ``target[l]``  -- E[premium_factor^2 * target ; L = l]
    ``second[l]``  -- E[premium_factor^2 * target^2 ; L = l]

    where the premium factor is the squared a priori rate product and the
    target is the effect product the relativity should track.
    """

    mass: np.ndarray
    prem_sq: np.ndarray
    target: np.ndarray
    second: np.ndarray
    norm: float


def _freq_field(model: ModelSpec, rule: FreqRule, nodes: int) -> _MomentField:
    theta1, w1 = marginal_grid(model.effects, 1, nodes)
    levels = rule.levels
    mass = np.zeros(levels)
    prem = np.zeros(levels)
    target = np.zeros(levels)
    second = np.zeros(levels)
    norm = 0.0
    for cls in model.portfolio.classes:
        uniq, inverse = np.unique(cls.freq_rate * theta1, return_inverse=True)
        pis = _stationary_batch(np.stack([build_matrix_freq(rule, m) for m in uniq]))[inverse]
        lam_sq = cls.freq_rate**2
        mass += cls.weight * (w1 @ pis)
        prem += cls.weight * lam_sq * (w1 @ pis)
        target += cls.weight * lam_sq * ((w1 * theta1) @ pis)
        second += cls.weight * lam_sq * ((w1 * theta1**2) @ pis)
        norm += cls.weight * lam_sq
    return _MomentField(mass, prem, target, second, norm)


@lru_cache(maxsize=16)
def _joint_stationary(model: ModelSpec, rule: BmsRule, nodes: int):
    """Joint grid plus stationary rows per (class, node); cached across calls.

    Threshold scans and score evaluations hit the same (model, rule, nodes)
    keys repeatedly; the linear solves dominate cost and are reused here.
    Callers must treat the returned arrays as read-only.
    """
    grid = build_grid(model.effects, nodes)
    return grid, conditional_stationary_field(model, rule, grid)


@lru_cache(maxsize=128)
def _aggregate_field(model: ModelSpec, rule: BmsRule, nodes: int) -> _MomentField:
    grid, field = _joint_stationary(model, rule, nodes)
    prod = grid.theta1 * grid.theta2
    levels = rule.levels
    mass = np.zeros(levels)
    prem = np.zeros(levels)
    target = np.zeros(levels)
    second = np.zeros(levels)
    norm = 0.0
    for ci, cls in enumerate(model.portfolio.classes):
        lam_sq = (cls.freq_rate * cls.sev_rate) ** 2
        pis = field[ci]
        mass += cls.weight * (grid.weights @ pis)
        prem += cls.weight * lam_sq * (grid.weights @ pis)
        target += cls.weight * lam_sq * ((grid.weights * prod) @ pis)
        second += cls.weight * lam_sq * ((grid.weights * prod**2) @ pis)
        norm += cls.weight * lam_sq
    return _MomentField(mass, prem, target, second, norm)


def _ratio(field: _MomentField) -> np.ndarray:
    defined = field.mass > MASS_FLOOR
    r = np.full(field.mass.shape, np.nan)
    r[defined] = field.target[defined] / field.prem_sq[defined]
    return r


def _dual_route_check(field: _MomentField) -> None:
    # The ratio can be taken directly or through the mass-normalized
    # conditional moments (the level mass cancels); both evaluations must
    # agree, which guards the moment bookkeeping.
    defined = field.mass > MASS_FLOOR
    direct = field.target[defined] / field.prem_sq[defined]
    via_mass = (field.target[defined] / field.mass[defined]) / (
        field.prem_sq[defined] / field.mass[defined]
    )
    scale = np.maximum(np.abs(direct), 1e-300)
    if np.max(np.abs(direct - via_mass) / scale) > DUAL_ROUTE_TOL:
        raise BonusMalusError("conditional-moment routes disagree beyond 1e-10")


def _hmse_from_field(field: _MomentField, relativities: np.ndarray) -> tuple[float, float]:
    r = np.nan_to_num(relativities, nan=0.0)
    raw = float(np.sum(field.second - 2.0 * r * field.target + r**2 * field.prem_sq))
    return raw, raw / field.norm


def optimal_relativity_frequency(
    model: ModelSpec, rule: FreqRule, nodes: int = DEFAULT_NODES
) -> RelativityTable:
    """Optimal relativities targeting next-year claim frequency.

    The table's score is the squared-error of the frequency target (claims
    squared), normalized by the mean squared frequency rate; aggregate-loss
    scores for such a table come from ``hmse_eval``.
    """
    if not isinstance(rule, FreqRule):
        raise LevelMismatchError("frequency relativities require a frequency-driven rule")
    field = _freq_field(model, rule, nodes)
    r = _ratio(field)
    raw, normalized = _hmse_from_field(field, r)
    return RelativityTable(rule, r, field.mass, raw, normalized, "frequency", nodes)


def optimal_relativity_dependent(
    model: ModelSpec, rule: FreqRule, nodes: int = DEFAULT_NODES
) -> RelativityTable:
    """Optimal aggregate-loss relativities under a frequency-driven chain."""
    if not isinstance(rule, FreqRule):
        raise LevelMismatchError("the dependence-adjusted family requires a frequency-driven rule")
    field = _aggregate_field(model, rule, nodes)
    _dual_route_check(field)
    r = _ratio(field)
    raw, normalized = _hmse_from_field(field, r)
    return RelativityTable(rule, r, field.mass, raw, normalized, "aggregate", nodes)


def optimal_relativity_severity(
    model: ModelSpec, rule: SeverityRule, nodes: int = DEFAULT_NODES
) -> RelativityTable:
    """Optimal aggregate-loss relativities under a severity-aware chain."""
    if not isinstance(rule, SeverityRule):
        raise LevelMismatchError("the severity family requires a severity-aware rule")
    field = _aggregate_field(model, rule, nodes)
    _dual_route_check(field)
    r = _ratio(field)
    raw, normalized = _hmse_from_field(field, r)
    return RelativityTable(rule, r, field.mass, raw, normalized, "aggregate", nodes)


def balance_check(model: ModelSpec, table: RelativityTable) -> BalanceReport:
    """Normal-equation residuals of a computed table.

    At the optimum every defined level has zero premium-weighted residual and
    the portfolio-level premium identity holds up to quadrature roundoff.
    """
    if table.family == "frequency":
        field = _freq_field(model, table.rule, table.nodes)
    else:
        field = _aggregate_field(model, table.rule, table.nodes)
    defined = field.mass > MASS_FLOOR
    residuals = np.full(field.mass.shape, np.nan)
    r = table.scoring_relativities()
    residuals[defined] = (field.target[defined] - r[defined] * field.prem_sq[defined]) / field.mass[
        defined
    ]
    global_lhs = float(np.sum(r * field.prem_sq))
    global_rhs = float(np.sum(field.target))
    return BalanceReport(residuals, global_lhs, global_rhs)
