"""Oracle-agreement battery: analytic results versus the seeded simulator.

For each configured rule the battery computes the analytic stationary level
distribution, optimal relativities, and score, simulates the same model, and
requires agreement within three standard errors everywhere.  A deliberately
perturbed relativity table must fail, which the negative-control hook makes
testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hmse import hmse_eval
from .model import FreqRule, ModelSpec, SeverityRule
from .relativity import (
    RelativityTable,
    optimal_relativity_dependent,
    optimal_relativity_severity,
)
from .simulate import (
    MIN_LEVEL_VISITS,
    SimConfig,
    SimSummary,
    empirical_relativity,
    hmse_empirical,
    simulate_paths,
)
from .stationary import unconditional_level_distribution

SIGMAS = 3.0


@dataclass(frozen=True)
class OracleCheck:
    """Agreement result for one rule configuration."""

    label: str
    passed: bool
    failures: tuple[str, ...]
    level_gap_sigmas: float
    relativity_gap_sigmas: float
    hmse_gap_sigmas: float
    analytic: RelativityTable
    summary: SimSummary


@dataclass(frozen=True)
class BatteryReport:
    checks: tuple[OracleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            out.append(
                f"[{status}] {c.label}: levels {c.level_gap_sigmas:.2f} sigma, "
                f"relativities {c.relativity_gap_sigmas:.2f} sigma, "
                f"score {c.hmse_gap_sigmas:.2f} sigma"
            )
            out.extend(f"    {msg}" for msg in c.failures)
        return out


def check_rule(
    model: ModelSpec,
    rule,
    n_paths: int = 1_000_000,
    seed: int = 20260809,
    nodes: int = 64,
    burn_in_years: int = 120,
    perturb: dict[int, float] | None = None,
    label: str | None = None,
) -> OracleCheck:
    """Run one analytic-versus-simulation comparison.

    ``perturb`` adds offsets to the analytic relativities before comparison
    (negative control); the check is expected to fail then.
    """
    if n_paths < 100_000:
        raise ValueError("oracle comparisons need at least 1e5 paths")
    if burn_in_years < 100:
        raise ValueError("stationary estimates need at least 100 burn-in years")
    if isinstance(rule, SeverityRule):
        table = optimal_relativity_severity(model, rule, nodes)
    elif isinstance(rule, FreqRule):
        table = optimal_relativity_dependent(model, rule, nodes)
    else:
        raise TypeError(f"unknown rule type {type(rule).__name__}")
    relativities = table.relativities.copy()
    if perturb:
        for lvl, delta in perturb.items():
            relativities[lvl] += delta
    analytic_levels = unconditional_level_distribution(model, rule, nodes)
    analytic_hmse = hmse_eval(model, relativities, rule, nodes).hmse_raw

    summary = simulate_paths(
        SimConfig(model, rule, n_paths, seed, burn_in_years=burn_in_years)
    )
    failures: list[str] = []

    emp_levels = summary.level_distribution
    level_se = np.maximum(summary.level_se, 1e-15)
    level_sigmas = np.abs(emp_levels - analytic_levels) / level_se
    if np.max(level_sigmas) > SIGMAS:
        worst = int(np.argmax(level_sigmas))
        failures.append(
            f"level distribution off at level {worst}: "
            f"analytic {analytic_levels[worst]:.6f} vs simulated {emp_levels[worst]:.6f} "
            f"({level_sigmas.max():.2f} sigma)"
        )

    rel_sigmas = 0.0
    if np.all(summary.counts >= MIN_LEVEL_VISITS):
        emp_r, emp_se = empirical_relativity(summary)
        emp_se = np.maximum(emp_se, 1e-15)
        gaps = np.abs(np.nan_to_num(relativities, nan=0.0) - emp_r) / emp_se
        rel_sigmas = float(np.max(gaps))
        if rel_sigmas > SIGMAS:
            worst = int(np.argmax(gaps))
            failures.append(
                f"relativity off at level {worst}: analytic {relativities[worst]:.6f} "
                f"vs simulated {emp_r[worst]:.6f} ({rel_sigmas:.2f} sigma)"
            )
    else:
        failures.append("some levels under-visited; relativity comparison skipped")

    emp_hmse, emp_hmse_se = hmse_empirical(summary, relativities)
    hmse_sigmas = abs(emp_hmse - analytic_hmse) / max(emp_hmse_se, 1e-300)
    if hmse_sigmas > SIGMAS:
        failures.append(
            f"score off: analytic {analytic_hmse:.6e} vs simulated {emp_hmse:.6e} "
            f"({hmse_sigmas:.2f} sigma)"
        )

    return OracleCheck(
        label or _default_label(rule),
        not failures,
        tuple(failures),
        float(np.max(level_sigmas)),
        rel_sigmas,
        float(hmse_sigmas),
        table,
        summary,
    )


def _default_label(rule) -> str:
    if isinstance(rule, SeverityRule):
        return (
            f"-1/+{rule.small_step}/+{rule.large_step} at threshold {rule.threshold:g}"
        )
    return f"-1/+{rule.step}"


def oracle_agreement_battery(
    model_rules,
    n_paths: int = 1_000_000,
    seed: int = 20260809,
    nodes: int = 64,
) -> BatteryReport:
    """Run agreement checks for a sequence of (model, rule) pairs."""
    checks = []
    for index, (model, rule) in enumerate(model_rules):
        checks.append(
            check_rule(model, rule, n_paths=n_paths, seed=seed + index, nodes=nodes)
        )
    return BatteryReport(tuple(checks))
