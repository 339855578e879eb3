"""Ad side of the market: watcher aggregates, the advertisers' slot
purchases under the wear-out effect, and the operator's slot price.

An advertiser buying m slots reaches a random watcher sample; showing
the same ad repeatedly to one user loses effectiveness quadratically,
which makes the advertiser payoff quadratic in m with a closed-form
maximizer driven by the first two moments of the per-watcher ad count.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError
from .model import MarketParams, Scheme, integrate, mass
from .users import (
    SarCase,
    SurCase,
    Thresholds,
    classify_sar,
    classify_sur,
    thresholds,
    x_watch_alone,
    x_watch_subscriber,
)


class UserClass(Enum):
    ALL = "all"
    SUBSCRIBERS = "subscribers"
    NON_SUBSCRIBERS = "non_subscribers"


@dataclass(frozen=True)
class AdMarketStats:
    """Watcher mass and per-watcher ad-count moments.

    n_ad = 0 forces ey = ey2 = 0 by convention.
    """

    n_ad: float
    ey: float
    ey2: float
    user_class: UserClass = UserClass.ALL


ZERO_STATS = AdMarketStats(n_ad=0.0, ey=0.0, ey2=0.0)


def _aware(scheme: Scheme) -> bool:
    return scheme is Scheme.SAR


def watch_segments(
    params: MarketParams,
    w: float,
    scheme: Scheme,
    user_class: UserClass = UserClass.ALL,
    thr: Thresholds | None = None,
) -> list[tuple[float, float, bool]]:
    """Analytic watching segments as (lo, hi, watcher_subscribes).

    The segment endpoints are the thresholds themselves; integrals over
    them never scan indicator functions.
    """
    if w <= 0.0:
        return []
    if thr is None:
        thr = thresholds(params, w, _aware(scheme))
    theta_max = params.dist.theta_max
    segments: list[tuple[float, float, bool]] = []
    if scheme is Scheme.SAR:
        case = classify_sar(params, w)
        if case is SarCase.B:
            segments.append((thr.theta1, theta_max, True))
        elif case is SarCase.C:
            assert thr.theta2 is not None
            segments.append((thr.theta2, theta_max, True))
    else:
        case = classify_sur(params, w)
        if case is SurCase.B:
            segments.append((thr.theta1, theta_max, True))
        elif case is SurCase.C:
            assert thr.theta4 is not None
            segments.append((thr.theta3, thr.theta4, False))
            segments.append((thr.theta1, theta_max, True))
        elif case is SurCase.D:
            segments.append((thr.theta3, theta_max, False))
    if user_class is UserClass.SUBSCRIBERS:
        segments = [s for s in segments if s[2]]
    elif user_class is UserClass.NON_SUBSCRIBERS:
        segments = [s for s in segments if not s[2]]
    return [(lo, hi, sub) for lo, hi, sub in segments if hi > lo]


def ad_stats(
    params: MarketParams,
    w: float,
    scheme: Scheme,
    user_class: UserClass = UserClass.ALL,
    thr: Thresholds | None = None,
) -> AdMarketStats:
    """Watcher mass and moments of ads-per-watcher at reward w."""
    if user_class is not UserClass.ALL and scheme is not Scheme.SURD:
        raise DomainError("per-class stats only apply to the differentiated scheme")
    segments = watch_segments(params, w, scheme, user_class, thr)
    if not segments:
        return AdMarketStats(0.0, 0.0, 0.0, user_class)

    total_mass = 0.0
    ex = 0.0
    ex2 = 0.0
    for lo, hi, subscribes in segments:
        xfun = x_watch_subscriber if subscribes else x_watch_alone
        total_mass += mass(params.dist, lo, hi)
        ex += integrate(params.dist, lambda t: xfun(params, t, w), lo, hi)
        ex2 += integrate(params.dist, lambda t: xfun(params, t, w) ** 2, lo, hi)
    if total_mass <= 0.0:
        return AdMarketStats(0.0, 0.0, 0.0, user_class)
    return AdMarketStats(
        n_ad=params.N * total_mass,
        ey=ex / total_mass,
        ey2=ex2 / total_mass,
        user_class=user_class,
    )


def advertiser_best_response(
    stats: AdMarketStats, params: MarketParams, p: float
) -> float:
    """Slots one advertiser buys at price p (vertex of its quadratic payoff)."""
    if stats.n_ad <= 0.0 or p >= params.B or stats.ey2 <= 0.0:
        return 0.0
    return (params.B - p) / (2.0 * params.A) * (stats.ey**2 / stats.ey2) * stats.n_ad


def optimal_price(stats: AdMarketStats, params: MarketParams) -> float:
    """Revenue-maximizing slot price for the given watcher pool.

    With no watchers any positive price yields zero revenue; B/2 is
    returned so outputs stay deterministic.
    """
    if stats.n_ad <= 0.0 or stats.ey <= 0.0:
        return params.B / 2.0
    return max(
        params.B / 2.0,
        params.B - 2.0 * params.A * stats.ey2 / (params.K * stats.ey),
    )


@dataclass(frozen=True)
class AdSideOutcome:
    """Ad revenue at the operator's optimal price(s) for one reward level."""

    revenue: float
    p_star: float | None  # pooled price (aware/unaware schemes)
    p_star_i: float | None  # subscriber-slot price (differentiated)
    p_star_ii: float | None  # non-subscriber-slot price (differentiated)


def _pool_revenue(stats: AdMarketStats, params: MarketParams) -> tuple[float, float]:
    p = optimal_price(stats, params)
    m = advertiser_best_response(stats, params, p)
    return params.K * m * p, p


def ad_side(
    params: MarketParams,
    w: float,
    scheme: Scheme,
    thr: Thresholds | None = None,
) -> AdSideOutcome:
    """Optimal slot pricing and resulting ad revenue at reward w.

    The differentiated scheme prices subscriber and non-subscriber
    slots separately whenever both watcher classes exist (the two
    pricing problems have the same structure as the pooled one); with a
    single watcher class it coincides with the unaware scheme.
    """
    if scheme is Scheme.SURD:
        if thr is None:
            thr = thresholds(params, w, scheme_aware=False)
        case = classify_sur(params, w)
        if case is SurCase.C:
            stats_i = ad_stats(params, w, scheme, UserClass.SUBSCRIBERS, thr)
            stats_ii = ad_stats(params, w, scheme, UserClass.NON_SUBSCRIBERS, thr)
            rev_i, p_i = _pool_revenue(stats_i, params)
            rev_ii, p_ii = _pool_revenue(stats_ii, params)
            return AdSideOutcome(rev_i + rev_ii, None, p_i, p_ii)
        stats = ad_stats(params, w, Scheme.SUR, UserClass.ALL, thr)
        rev, p = _pool_revenue(stats, params)
        return AdSideOutcome(rev, p, None, None)
    stats = ad_stats(params, w, scheme, UserClass.ALL, thr)
    rev, p = _pool_revenue(stats, params)
    return AdSideOutcome(rev, p, None, None)


def ad_revenue(params: MarketParams, w: float, scheme: Scheme) -> float:
    """Ad revenue at reward w under the scheme's optimal slot price(s)."""
    return ad_side(params, w, scheme).revenue


def cpm_revenue(views: float, cpm: float) -> float:
    """Revenue of a block of ad views priced per mille."""
    return views / 1000.0 * cpm
