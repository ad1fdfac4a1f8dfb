"""Shared fixtures: study models and small helper factories."""

from __future__ import annotations

import math

import pytest

from bonusmalus import (
    DegenerateEffects,
    GammaSeverity,
    LognormalCopulaEffects,
    MixtureExponentialEffects,
    ModelSpec,
    Portfolio,
    RiskClass,
    validate_model,
)

SEV_RATE = math.exp(8.8)
GAMMA_SHAPE = 0.67


def study_model(
    corr: float,
    freq_rate: float = 0.5,
    log_var1: float = 0.99,
    log_var2: float = 0.29,
    sev_rate: float = SEV_RATE,
) -> ModelSpec:
    """Single-class lognormal-copula model used throughout the numeric study."""
    return validate_model(
        ModelSpec(
            Portfolio([RiskClass(1.0, freq_rate, sev_rate)]),
            GammaSeverity(1.0 / GAMMA_SHAPE),
            LognormalCopulaEffects(corr, log_var1, log_var2),
        )
    )


def degenerate_model(freq_rate: float = 0.5, sev_rate: float = SEV_RATE) -> ModelSpec:
    return validate_model(
        ModelSpec(
            Portfolio([RiskClass(1.0, freq_rate, sev_rate)]),
            GammaSeverity(1.0 / GAMMA_SHAPE),
            DegenerateEffects(),
        )
    )


@pytest.fixture(scope="session")
def base_model() -> ModelSpec:
    """The study's base parameter block (strongly negative dependence)."""
    return study_model(-0.8)


@pytest.fixture(scope="session")
def mixture_effects() -> MixtureExponentialEffects:
    return MixtureExponentialEffects(0.5, 2.0, 2.0 / 3.0)
