"""Bonus-malus system design under a dependent frequency-severity risk model.

The package computes transition matrices and stationary level distributions
for frequency-driven and severity-aware bonus-malus rules, optimal per-level
relativities and their scores, closed-form credibility premiums for the
companion Poisson-Poisson mixture model, and ships a seeded Monte Carlo
simulator used as an independent verification oracle.
"""

from .bayes import (
    MixtureBayesModel,
    MseComparison,
    bayes_agg_premium_freqhist,
    bayes_agg_premium_fullhist,
    bayes_freq_premium,
    mse_comparison_mc,
    posterior_density,
)
from .errors import (
    BonusMalusError,
    BracketingFailureError,
    InconsistentHistoryError,
    InsufficientOccupancyError,
    InvalidRuleError,
    LevelMismatchError,
    ModelValidationError,
    NonFiniteIntegrandError,
    NonUnitEffectMeanError,
    NonUnitWeightsError,
    SingularSystemError,
    UnsupportedEffectsError,
)
from .hmse import (
    HmseReport,
    RuleDominanceReport,
    ScanEntry,
    hmse_eval,
    rule_dominance_check,
    threshold_scan,
)
from .model import (
    ClaimHistory,
    DegenerateEffects,
    FreqRule,
    GammaSeverity,
    LognormalCopulaEffects,
    MixtureExponentialEffects,
    ModelSpec,
    PoissonFrequency,
    PoissonSeverity,
    Portfolio,
    RiskClass,
    SeverityRule,
    poisson_truncation_bound,
    validate_model,
    validate_rule,
)
from .quadrature import (
    QuadratureGrid,
    build_grid,
    expect,
    marginal_grid,
    severity_marginal_quantile,
)
from .relativity import (
    BalanceReport,
    RelativityTable,
    balance_check,
    optimal_relativity_dependent,
    optimal_relativity_frequency,
    optimal_relativity_severity,
)
from .simulate import (
    SimConfig,
    SimSummary,
    empirical_frequency_relativity,
    empirical_relativity,
    hmse_empirical,
    simulate_paths,
)
from .stationary import (
    conditional_stationary_field,
    power_iteration_stationary,
    stationary_distribution,
    unconditional_level_distribution,
)
from .transition import (
    build_matrix,
    build_matrix_freq,
    build_matrix_sev,
    claim_count_pmf,
    exceedance_profile,
    severity_exceedance,
)
from .verify import BatteryReport, OracleCheck, check_rule, oracle_agreement_battery

__version__ = "0.1.0"

__all__ = [
    "BalanceReport",
    "BatteryReport",
    "BonusMalusError",
    "BracketingFailureError",
    "ClaimHistory",
    "DegenerateEffects",
    "FreqRule",
    "GammaSeverity",
    "HmseReport",
    "InconsistentHistoryError",
    "InsufficientOccupancyError",
    "InvalidRuleError",
    "LevelMismatchError",
    "LognormalCopulaEffects",
    "MixtureBayesModel",
    "MixtureExponentialEffects",
    "ModelSpec",
    "ModelValidationError",
    "MseComparison",
    "NonFiniteIntegrandError",
    "NonUnitEffectMeanError",
    "NonUnitWeightsError",
    "OracleCheck",
    "PoissonFrequency",
    "PoissonSeverity",
    "Portfolio",
    "QuadratureGrid",
    "RelativityTable",
    "RiskClass",
    "RuleDominanceReport",
    "ScanEntry",
    "SeverityRule",
    "SimConfig",
    "SimSummary",
    "SingularSystemError",
    "UnsupportedEffectsError",
    "balance_check",
    "bayes_agg_premium_freqhist",
    "bayes_agg_premium_fullhist",
    "bayes_freq_premium",
    "build_grid",
    "build_matrix",
    "build_matrix_freq",
    "build_matrix_sev",
    "check_rule",
    "claim_count_pmf",
    "conditional_stationary_field",
    "empirical_frequency_relativity",
    "empirical_relativity",
    "exceedance_profile",
    "expect",
    "hmse_empirical",
    "hmse_eval",
    "marginal_grid",
    "mse_comparison_mc",
    "optimal_relativity_dependent",
    "optimal_relativity_frequency",
    "optimal_relativity_severity",
    "oracle_agreement_battery",
    "poisson_truncation_bound",
    "posterior_density",
    "power_iteration_stationary",
    "rule_dominance_check",
    "severity_exceedance",
    "severity_marginal_quantile",
    "simulate_paths",
    "stationary_distribution",
    "threshold_scan",
    "unconditional_level_distribution",
    "validate_model",
    "validate_rule",
]
