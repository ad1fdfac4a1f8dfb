"""Scoring of relativity tables and search over rules and thresholds.

The score of a table is the steady-state expected squared gap between the
policyholder's conditional mean loss and the charged premium.  It is reported
raw (currency squared) and normalized by the portfolio mean of the squared
a priori premium factor, which makes configurations comparable across
currency scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LevelMismatchError
from .model import FreqRule, ModelSpec, SeverityRule
from .quadrature import DEFAULT_NODES
from .relativity import (
    RelativityTable,
    _joint_stationary,
    optimal_relativity_dependent,
    optimal_relativity_severity,
)


@dataclass(frozen=True)
class HmseReport:
    """Score of one relativity vector under one transition rule."""

    rule: object
    threshold: float | None
    hmse_raw: float
    hmse_normalized: float


@dataclass(frozen=True)
class ScanEntry:
    """One threshold candidate with its optimal table and score."""

    threshold: float
    table: RelativityTable
    report: HmseReport


@dataclass(frozen=True)
class RuleDominanceReport:
    """Best scores over a frequency-rule grid and a severity-rule grid."""

    freq_best_rule: FreqRule
    freq_best: HmseReport
    severity_best_rule: SeverityRule
    severity_best: HmseReport

    @property
    def severity_no_worse(self) -> bool:
        return self.severity_best.hmse_raw <= self.freq_best.hmse_raw + 1e-12 * max(
            self.freq_best.hmse_raw, 1.0
        )


def hmse_eval(
    model: ModelSpec,
    relativities,
    rule,
    nodes: int = DEFAULT_NODES,
) -> HmseReport:
    """Score a relativity vector under a rule by the full double integral.

    ``relativities`` may be a table or a plain vector; its length must match
    the rule's level count.  The integral runs per quadrature node and level,
    independently of the per-level moment route used when tables are built,
    so the two must agree to roundoff.
    """
    if isinstance(relativities, RelativityTable):
        r = relativities.scoring_relativities()
    else:
        r = np.nan_to_num(np.asarray(relativities, dtype=float), nan=0.0)
    if r.shape != (rule.levels,):
        raise LevelMismatchError(
            f"table has {r.shape[0]} levels but the rule has {rule.levels}"
        )
    grid, field = _joint_stationary(model, rule, nodes)
    prod = grid.theta1 * grid.theta2
    gaps = (prod[:, None] - r[None, :]) ** 2  # (nodes, levels)
    raw = 0.0
    norm = 0.0
    for ci, cls in enumerate(model.portfolio.classes):
        lam_sq = (cls.freq_rate * cls.sev_rate) ** 2
        raw += cls.weight * lam_sq * float(grid.weights @ np.sum(gaps * field[ci], axis=1))
        norm += cls.weight * lam_sq
    threshold = rule.threshold if isinstance(rule, SeverityRule) else None
    return HmseReport(rule, threshold, raw, raw / norm)


def threshold_scan(
    model: ModelSpec,
    rule: SeverityRule,
    thresholds,
    nodes: int = DEFAULT_NODES,
) -> list[ScanEntry]:
    """Score the optimal table at each candidate threshold.

    Returns entries sorted by ascending raw score, ties broken by the smaller
    threshold.
    """
    thresholds = [float(t) for t in thresholds]
    if not thresholds:
        raise ValueError("need at least one threshold candidate")
    entries = []
    for phi in thresholds:
        candidate = rule.with_threshold(phi)
        table = optimal_relativity_severity(model, candidate, nodes)
        report = hmse_eval(model, table, candidate, nodes)
        entries.append(ScanEntry(phi, table, report))
    return sorted(entries, key=lambda e: (e.report.hmse_raw, e.threshold))


def rule_dominance_check(
    model: ModelSpec,
    freq_rules,
    severity_rules,
    nodes: int = DEFAULT_NODES,
) -> RuleDominanceReport:
    """Compare the best severity-aware rule against the best frequency rule.

    Every frequency step must appear as an equal-step severity rule in the
    severity grid; the severity minimum then cannot exceed the frequency
    minimum, and the report records both argmins.
    """
    freq_rules = list(freq_rules)
    severity_rules = list(severity_rules)
    if not freq_rules or not severity_rules:
        raise ValueError("both rule grids must be non-empty")
    diagonal = {(r.max_level, r.small_step, r.large_step) for r in severity_rules}
    for fr in freq_rules:
        if (fr.max_level, fr.step, fr.step) not in diagonal:
            raise ValueError(
                f"severity grid must contain the equal-step rule matching {fr}"
            )

    def score_freq(rule: FreqRule) -> HmseReport:
        table = optimal_relativity_dependent(model, rule, nodes)
        return hmse_eval(model, table, rule, nodes)

    def score_sev(rule: SeverityRule) -> HmseReport:
        table = optimal_relativity_severity(model, rule, nodes)
        return hmse_eval(model, table, rule, nodes)

    freq_scored = [(rule, score_freq(rule)) for rule in freq_rules]
    sev_scored = [(rule, score_sev(rule)) for rule in severity_rules]
    best_freq = min(freq_scored, key=lambda pair: pair[1].hmse_raw)
    best_sev = min(sev_scored, key=lambda pair: pair[1].hmse_raw)
    return RuleDominanceReport(best_freq[0], best_freq[1], best_sev[0], best_sev[1])
