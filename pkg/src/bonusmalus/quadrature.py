"""Deterministic quadrature over the bivariate random effect.

Lognormal-copula effects are integrated with a tensor Gauss-Hermite grid in
the latent bivariate normal space; mixture-exponential effects with a
Gauss-Laguerre grid per mixture branch.  Grids are immutable and reusable
across all analyses of a model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from scipy import stats

from .errors import BracketingFailureError, NonFiniteIntegrandError, UnsupportedEffectsError
from .model import (
    DegenerateEffects,
    GammaSeverity,
    LognormalCopulaEffects,
    MixtureExponentialEffects,
    ModelSpec,
    PoissonSeverity,
    RandomEffectJoint,
    SeverityLaw,
)

DEFAULT_NODES = 32
MIN_NODES = 8


@dataclass(frozen=True)
class QuadratureGrid:
    """Weighted nodes ``(theta1, theta2)`` approximating the joint effect law.

    Weights are strictly positive and sum to one (up to the scheme's own
    truncation error); node means reproduce the unit effect means.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    weights: np.ndarray
    scheme: str
    nodes_per_dim: int

    @property
    def size(self) -> int:
        return self.weights.size


def _hermite_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Nodes/weights for a standard normal: integrate f(z) phi(z) dz.
    x, w = hermgauss(n)
    return math.sqrt(2.0) * x, w / math.sqrt(math.pi)


def _lognormal(log_var: float, z: np.ndarray) -> np.ndarray:
    if log_var == 0.0:
        return np.ones_like(z)
    sigma = math.sqrt(log_var)
    return np.exp(-0.5 * log_var + sigma * z)


def build_grid(effects: RandomEffectJoint, n: int = DEFAULT_NODES) -> QuadratureGrid:
    """Build the joint quadrature grid for a random-effect law.

    ``n`` is the node count per dimension (and per mixture branch) and must be
    at least 8 for the mean-one checks to hold at their stated tolerances.
    """
    if isinstance(effects, DegenerateEffects):
        one = np.array([1.0])
        return QuadratureGrid(one, one.copy(), one.copy(), "degenerate", 1)
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per dimension, got {n}")
    if isinstance(effects, LognormalCopulaEffects):
        z, w = _hermite_nodes(n)
        z1 = np.repeat(z, n)
        z2_orth = np.tile(z, n)
        weights = np.outer(w, w).ravel()
        rho = effects.corr
        z2 = rho * z1 + math.sqrt(max(1.0 - rho * rho, 0.0)) * z2_orth
        theta1 = _lognormal(effects.log_var1, z1)
        theta2 = _lognormal(effects.log_var2, z2)
        return QuadratureGrid(theta1, theta2, weights, "gauss-hermite", n)
    if isinstance(effects, MixtureExponentialEffects):
        t, v = laggauss(n)
        parts = []
        for branch_weight, rate in (
            (effects.weight1, effects.rate1),
            (1.0 - effects.weight1, effects.rate2),
        ):
            if branch_weight == 0.0:
                continue
            nodes = t / rate
            th1 = np.repeat(nodes, n)
            th2 = np.tile(nodes, n)
            wts = branch_weight * np.outer(v, v).ravel()
            parts.append((th1, th2, wts))
        theta1 = np.concatenate([p[0] for p in parts])
        theta2 = np.concatenate([p[1] for p in parts])
        weights = np.concatenate([p[2] for p in parts])
        return QuadratureGrid(theta1, theta2, weights, "gauss-laguerre-mixture", n)
    raise UnsupportedEffectsError(f"no quadrature scheme for {type(effects).__name__}")


def marginal_grid(
    effects: RandomEffectJoint, component: int, n: int = DEFAULT_NODES
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted nodes for one effect marginal (``component`` is 1 or 2)."""
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    if isinstance(effects, DegenerateEffects):
        return np.array([1.0]), np.array([1.0])
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes per dimension, got {n}")
    if isinstance(effects, LognormalCopulaEffects):
        log_var = effects.log_var1 if component == 1 else effects.log_var2
        if log_var == 0.0:
            return np.array([1.0]), np.array([1.0])
        z, w = _hermite_nodes(n)
        return _lognormal(log_var, z), w.copy()
    if isinstance(effects, MixtureExponentialEffects):
        t, v = laggauss(n)
        values, weights = [], []
        for branch_weight, rate in (
            (effects.weight1, effects.rate1),
            (1.0 - effects.weight1, effects.rate2),
        ):
            if branch_weight == 0.0:
                continue
            values.append(t / rate)
            weights.append(branch_weight * v)
        return np.concatenate(values), np.concatenate(weights)
    raise UnsupportedEffectsError(f"no quadrature scheme for {type(effects).__name__}")


def expect(f, grid: QuadratureGrid) -> float:
    """Expectation of ``f(theta1, theta2)`` on a grid.

    ``f`` must accept numpy arrays.  Summation is compensated and in fixed
    node order, so results are deterministic across runs and platforms.
    """
    values = np.asarray(f(grid.theta1, grid.theta2), dtype=float)
    if values.shape != grid.weights.shape:
        values = np.broadcast_to(values, grid.weights.shape)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrandError("integrand is not finite on all quadrature nodes")
    return math.fsum((grid.weights * values).tolist())


def severity_cdf(x, mean, law: SeverityLaw):
    """Conditional claim-size CDF at ``x`` for a given conditional mean."""
    if isinstance(law, GammaSeverity):
        shape = law.shape
        return stats.gamma.cdf(x, shape, scale=np.asarray(mean) / shape)
    if isinstance(law, PoissonSeverity):
        return stats.poisson.cdf(np.floor(x), mean)
    raise UnsupportedEffectsError(f"no claim-size law for {type(law).__name__}")


def severity_marginal_quantile(
    p: float,
    model: ModelSpec,
    n: int = DEFAULT_NODES,
) -> float:
    """Quantile of the portfolio-marginal claim-size distribution.

    Solves ``F(x) = p`` where ``F`` mixes the conditional severity CDF over
    classes (portfolio weights) and over the severity effect marginal.  Root
    found by bisection-backed Brent iteration to relative tolerance 1e-8.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    theta2, w2 = marginal_grid(model.effects, 2, n)
    class_w = model.portfolio.weights
    means = np.outer(model.portfolio.sev_rates, theta2)  # (K, nodes)
    joint_w = np.outer(class_w, w2)

    def cdf(x: float) -> float:
        return float(np.sum(joint_w * severity_cdf(x, means, model.severity)))

    hi = float(np.max(means)) or 1.0
    lo = 0.0
    for _ in range(200):
        if cdf(hi) >= p:
            break
        hi *= 2.0
    else:
        raise BracketingFailureError(f"could not bracket the {p} quantile")

    from scipy.optimize import brentq

    return float(brentq(lambda x: cdf(x) - p, lo, hi, rtol=1e-10, xtol=1e-12, maxiter=200))
