"""Core market model: utility families, user-type distributions,
the full parameter vector, and scenario (de)serialization.

All types are frozen dataclasses; every operation is a pure function,
so instances can be shared freely across threads and parallel sweeps.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from scipy.integrate import IntegrationWarning, quad
from scipy.special import ndtr

from .errors import DomainError, NumericalError, ScenarioError


class Scheme(Enum):
    """Rewarding scheme: who may watch ads, and how slots are priced.

    SAR  - only subscribers may watch ads for data rewards.
    SUR  - everyone may watch ads; one pooled slot price.
    SURD - SUR with subscriber/non-subscriber slots priced separately.
    """

    SAR = "sar"
    SUR = "sur"
    SURD = "surd"


# ---------------------------------------------------------------------------
# Utility families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogUtility:
    """u(z) = ln(1 + z)."""

    variant = "logarithmic"

    def u(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        return math.log1p(z)

    def u_prime(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        return 1.0 / (1.0 + z)

    @property
    def u_prime_zero(self) -> float:
        return 1.0

    def inverse_marginal(self, s: float) -> float:
        if s <= 0:
            raise DomainError(f"marginal utility must be > 0, got {s}")
        return 1.0 / s - 1.0


@dataclass(frozen=True)
class AlphaFairUtility:
    """u(z) = ((z + mu)^(1-alpha) - mu^(1-alpha)) / (1 - alpha).

    alpha in (0, 1), mu >= 0. With mu = 0 the marginal utility blows up
    at z = 0 (u'(0) = +inf), which downstream code treats as an
    extended value.
    """

    alpha: float
    mu: float = 0.0
    variant = "alpha_fair"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ScenarioError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.mu < 0.0:
            raise ScenarioError(f"mu must be >= 0, got {self.mu}")

    def u(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        a, mu = self.alpha, self.mu
        return ((z + mu) ** (1.0 - a) - mu ** (1.0 - a)) / (1.0 - a)

    def u_prime(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        if z + self.mu == 0.0:
            return math.inf
        return (z + self.mu) ** (-self.alpha)

    @property
    def u_prime_zero(self) -> float:
        if self.mu == 0.0:
            return math.inf
        return self.mu ** (-self.alpha)

    def inverse_marginal(self, s: float) -> float:
        if s <= 0:
            raise DomainError(f"marginal utility must be > 0, got {s}")
        if self.mu > 0.0 and s > self.u_prime_zero * (1.0 + 1e-12):
            raise DomainError(
                f"marginal utility {s} exceeds u'(0) = {self.u_prime_zero}"
            )
        return s ** (-1.0 / self.alpha) - self.mu


@dataclass(frozen=True)
class ExpUtility:
    """u(z) = 1 - exp(-gamma * z), gamma > 0."""

    gamma: float
    variant = "exponential"

    def __post_init__(self) -> None:
        if self.gamma <= 0.0:
            raise ScenarioError(f"gamma must be > 0, got {self.gamma}")

    def u(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        return -math.expm1(-self.gamma * z)

    def u_prime(self, z: float) -> float:
        if z < 0:
            raise DomainError(f"utility argument must be >= 0, got {z}")
        return self.gamma * math.exp(-self.gamma * z)

    @property
    def u_prime_zero(self) -> float:
        return self.gamma

    def inverse_marginal(self, s: float) -> float:
        if s <= 0:
            raise DomainError(f"marginal utility must be > 0, got {s}")
        if s > self.gamma * (1.0 + 1e-12):
            raise DomainError(f"marginal utility {s} exceeds u'(0) = {self.gamma}")
        return math.log(self.gamma / s) / self.gamma


UtilityModel = LogUtility | AlphaFairUtility | ExpUtility


def eval_u(model: UtilityModel, z: float) -> float:
    return model.u(z)


def eval_u_prime(model: UtilityModel, z: float) -> float:
    return model.u_prime(z)


def inverse_marginal(model: UtilityModel, s: float) -> float:
    return model.inverse_marginal(s)


# ---------------------------------------------------------------------------
# Type distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformTypes:
    """Uniform user-valuation density on [0, theta_max]."""

    theta_max: float
    variant = "uniform"

    def __post_init__(self) -> None:
        if self.theta_max <= 0.0:
            raise ScenarioError(f"theta_max must be > 0, got {self.theta_max}")

    def pdf(self, theta: float) -> float:
        if 0.0 <= theta <= self.theta_max:
            return 1.0 / self.theta_max
        return 0.0

    def cdf(self, theta: float) -> float:
        if theta <= 0.0:
            return 0.0
        if theta >= self.theta_max:
            return 1.0
        return theta / self.theta_max


@dataclass(frozen=True)
class TruncatedNormalTypes:
    """Normal(mean, sd) truncated to [lo, hi].

    Normalized by parent-CDF differences so the density integrates to 1
    however much mass the parent loses to truncation.
    """

    mean: float
    sd: float
    lo: float = 0.0
    hi: float = 0.0
    variant = "truncated_normal"

    def __post_init__(self) -> None:
        if self.sd <= 0.0:
            raise ScenarioError(f"sd must be > 0, got {self.sd}")
        if self.hi <= self.lo:
            raise ScenarioError(
                f"truncation needs hi > lo, got [{self.lo}, {self.hi}]"
            )
        # ndtr is the standard normal CDF evaluated via erfc: stable in
        # both tails, so the normalizing mass never cancels to zero.
        z_lo = (self.lo - self.mean) / self.sd
        z_hi = (self.hi - self.mean) / self.sd
        mass = float(ndtr(z_hi) - ndtr(z_lo))
        if mass <= 0.0:
            raise ScenarioError(
                "truncation interval carries no parent-normal mass"
            )
        object.__setattr__(self, "_mass", mass)

    @property
    def theta_max(self) -> float:
        return self.hi

    def pdf(self, theta: float) -> float:
        if theta < self.lo or theta > self.hi:
            return 0.0
        z = (theta - self.mean) / self.sd
        phi = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        return phi / (self.sd * self._mass)  # type: ignore[attr-defined]

    def cdf(self, theta: float) -> float:
        if theta <= self.lo:
            return 0.0
        if theta >= self.hi:
            return 1.0
        z_lo = (self.lo - self.mean) / self.sd
        z = (theta - self.mean) / self.sd
        return float(ndtr(z) - ndtr(z_lo)) / self._mass  # type: ignore[attr-defined]


TypeDistribution = UniformTypes | TruncatedNormalTypes


def integrate(
    dist: TypeDistribution,
    f: Callable[[float], float],
    lo: float,
    hi: float,
) -> float:
    """Adaptive quadrature of the weighted integral of f(theta) g(theta).

    Callers pass analytic segment endpoints, so the integrand is smooth
    on [lo, hi]; kinks of the best-response maps sit exactly at the
    segment boundaries.
    """
    if not 0.0 <= lo <= hi <= dist.theta_max * (1.0 + 1e-12):
        raise DomainError(
            f"integration limits [{lo}, {hi}] outside [0, {dist.theta_max}]"
        )
    if lo == hi:
        return 0.0

    def integrand(theta: float) -> float:
        val = f(theta) * dist.pdf(theta)
        if not math.isfinite(val):
            raise NumericalError(f"non-finite integrand at theta={theta}")
        return val

    # near-degenerate segments can leave quad a roundoff-limited
    # estimate; that estimate is still the best available, so the
    # accuracy warning is not actionable here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, _ = quad(integrand, lo, hi, epsrel=1e-9, epsabs=1e-12, limit=200)
    if not math.isfinite(value):
        raise NumericalError(f"non-finite integral on [{lo}, {hi}]")
    return value


def mass(dist: TypeDistribution, lo: float, hi: float) -> float:
    """Probability mass of [lo, hi] via CDF differences (exact, fast)."""
    if hi <= lo:
        return 0.0
    return dist.cdf(hi) - dist.cdf(lo)


# ---------------------------------------------------------------------------
# Market parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketParams:
    """Full parameter vector of one market scenario.

    N     total user mass
    F     monthly subscription fee
    Q     data-plan quota per subscriber
    phi   per-ad watching cost borne by the user
    K     number of advertisers
    A     wear-out coefficient (quadratic effectiveness decay)
    B     initial ad effectiveness
    C     monthly network capacity
    """

    N: float
    F: float
    Q: float
    phi: float
    K: float
    A: float
    B: float
    C: float
    utility: UtilityModel
    dist: TypeDistribution

    def __post_init__(self) -> None:
        for name in ("N", "F", "Q", "phi", "K", "B"):
            if getattr(self, name) <= 0.0:
                raise ScenarioError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.A <= 0.0:
            # A = 0 would put a zero in every slot-demand denominator.
            raise ScenarioError(f"A must be > 0, got {self.A}")

        u = self.utility
        theta_max = self.dist.theta_max
        up0 = u.u_prime_zero
        if math.isinf(up0):
            # The participation-width assumption below is vacuous when
            # marginal utility blows up at zero; only the basic
            # subscription condition remains checkable.
            if theta_max <= self.F / u.u(self.Q):
                raise ScenarioError(
                    "theta_max must exceed F/u(Q) so that some users subscribe"
                )
        else:
            bound = up0 * self.F / (u.u_prime(self.Q) * u.u(self.Q))
            if theta_max <= bound:
                raise ScenarioError(
                    f"theta_max={theta_max} must exceed "
                    f"u'(0)F/(u'(Q)u(Q))={bound:.6g}"
                )

        d0 = self.baseline_demand()
        if self.C < d0 * (1.0 - 1e-12):
            raise ScenarioError(
                f"capacity C={self.C:.6g} below zero-reward demand D(0)={d0:.6g}"
            )

    def baseline_demand(self) -> float:
        """Data demand with no reward: quota times subscriber mass."""
        theta0 = self.F / self.utility.u(self.Q)
        return self.N * self.Q * mass(self.dist, theta0, self.dist.theta_max)

    def stage2_key(self) -> tuple:
        """Hashable key for everything the user/ad side depends on.

        Excludes C (capacity only constrains the stage-I search), so
        capacity sweeps reuse cached stage-II computations.
        """
        return (self.N, self.F, self.Q, self.phi, self.utility, self.dist)


# ---------------------------------------------------------------------------
# Scenario (de)serialization
# ---------------------------------------------------------------------------

_UTILITY_KEYS = {
    "logarithmic": (),
    "alpha_fair": ("alpha", "mu"),
    "exponential": ("gamma",),
}


def _build_utility(section: dict) -> UtilityModel:
    variant = section.get("variant")
    if variant == "logarithmic":
        return LogUtility()
    if variant == "alpha_fair":
        return AlphaFairUtility(alpha=float(section["alpha"]),
                                mu=float(section.get("mu", 0.0)))
    if variant == "exponential":
        return ExpUtility(gamma=float(section["gamma"]))
    raise ScenarioError(f"unknown utility variant: {variant!r}")


def _build_distribution(section: dict) -> TypeDistribution:
    variant = section.get("variant")
    if variant == "uniform":
        return UniformTypes(theta_max=float(section["theta_max"]))
    if variant == "truncated_normal":
        return TruncatedNormalTypes(
            mean=float(section["mean"]),
            sd=float(section["sd"]),
            lo=float(section.get("lo", 0.0)),
            hi=float(section["hi"]),
        )
    raise ScenarioError(f"unknown distribution variant: {variant!r}")


def params_from_dict(doc: dict) -> MarketParams:
    try:
        return MarketParams(
            N=float(doc["N"]),
            F=float(doc["F"]),
            Q=float(doc["Q"]),
            phi=float(doc["phi"]),
            K=float(doc["K"]),
            A=float(doc["A"]),
            B=float(doc["B"]),
            C=float(doc["C"]),
            utility=_build_utility(doc["utility"]),
            dist=_build_distribution(doc["distribution"]),
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario missing required field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario value: {exc}") from exc


def params_to_dict(params: MarketParams) -> dict:
    util: dict = {"variant": params.utility.variant}
    for key in _UTILITY_KEYS[params.utility.variant]:
        util[key] = getattr(params.utility, key)
    dist: dict
    if isinstance(params.dist, UniformTypes):
        dist = {"variant": "uniform", "theta_max": params.dist.theta_max}
    else:
        dist = {
            "variant": "truncated_normal",
            "mean": params.dist.mean,
            "sd": params.dist.sd,
            "lo": params.dist.lo,
            "hi": params.dist.hi,
        }
    return {
        "N": params.N, "F": params.F, "Q": params.Q, "phi": params.phi,
        "K": params.K, "A": params.A, "B": params.B, "C": params.C,
        "utility": util, "distribution": dist,
    }


def load_scenario(path: str) -> MarketParams:
    """Parse and validate a JSON scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"cannot parse scenario file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"scenario file {path} must hold a mapping")
    return params_from_dict(doc)


def save_scenario(params: MarketParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params), fh, indent=2, sort_keys=True)
        fh.write("\n")
