import numpy as np
import pytest

from datarewards import (
    AdMarketStats,
    LogUtility,
    MarketParams,
    Scheme,
    UniformTypes,
    advertiser_best_response,
    best_response_sar,
    best_response_sur,
)
from datarewards.oracle import (
    DiscretizedMarket,
    oracle_adv_br,
    oracle_user_br,
    user_payoff,
)
from datarewards.users import case_bound_b_sur, case_bound_d, thresholds


def _log_uniform(**over) -> MarketParams:
    kw = dict(
        N=1e7, F=30.0, Q=0.8, phi=0.3, K=23.0, A=0.6, B=5.0, C=1.6e7,
        utility=LogUtility(), dist=UniformTypes(155.0),
    )
    kw.update(over)
    return MarketParams(**kw)


def test_discretized_weights_normalized():
    p = _log_uniform()
    market = DiscretizedMarket.build(p, m=500)
    assert market.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(market.weights >= 0.0)
    assert len(market.theta_grid) == 500


def test_oracle_adv_br_matches_vertex():
    p = _log_uniform()
    stats = AdMarketStats(n_ad=1e6, ey=10.0, ey2=120.0)
    for price in (0.5, 2.0, 4.0):
        closed = advertiser_best_response(stats, p, price)
        assert oracle_adv_br(stats, p, price) == pytest.approx(closed, rel=1e-4)
    assert oracle_adv_br(stats, p, p.B) == 0.0
    assert oracle_adv_br(stats, p, p.B + 1.0) == 0.0


def test_oracle_user_br_respects_aware_constraint():
    p = _log_uniform()
    w = 1.5 * case_bound_d(p)  # strong rewards
    theta = 40.0
    aware, _ = oracle_user_br(p, theta, w, Scheme.SAR)
    unaware, _ = oracle_user_br(p, theta, w, Scheme.SUR)
    if aware.r == 0:
        assert aware.x == 0.0
    # without the constraint this type watches without subscribing
    assert unaware.r == 0 and unaware.x > 0.0


def test_finer_x_grid_shrinks_payoff_gap():
    p = _log_uniform()
    w = 0.7 * case_bound_d(p)
    theta = 120.0
    exact = best_response_sur(p, theta, w)
    exact_payoff = user_payoff(p, theta, exact.r, exact.x, w)
    gaps = []
    for n_x in (51, 501, 5001):
        _, payoff = oracle_user_br(p, theta, w, Scheme.SUR, n_x=n_x)
        gaps.append(exact_payoff - payoff)
    assert all(g >= -1e-9 * abs(exact_payoff) for g in gaps)
    assert gaps[2] <= gaps[0]


def test_oracle_band_edges_match_threshold_roots():
    """The discretized subscribe/not-subscribe flip sits at the analytic cutoff."""
    p = _log_uniform()
    w = 0.5 * (case_bound_b_sur(p) + case_bound_d(p))
    thr = thresholds(p, w, scheme_aware=False)
    grid = np.linspace(0.0, 155.0, 20001)
    rs = np.array([oracle_user_br(p, float(t), w, Scheme.SUR, n_x=801)[0].r
                   for t in grid[::200]])
    coarse = grid[::200]
    # last non-subscriber below theta4, first subscriber above
    below = coarse[(coarse < thr.theta4 * 0.999)]
    above = coarse[(coarse > thr.theta4 * 1.001)]
    rs_below = rs[: len(below)]
    rs_above = rs[len(coarse) - len(above):]
    assert np.all(rs_below == 0)
    assert np.all(rs_above == 1)


def test_oracle_matches_closed_form_on_random_draws():
    p = _log_uniform()
    rng = np.random.default_rng(11)
    for _ in range(40):
        theta = rng.uniform(1.0, 155.0)
        w = rng.uniform(1e-4, 1.5 * case_bound_d(p))
        for scheme, br in (
            (Scheme.SAR, best_response_sar),
            (Scheme.SUR, best_response_sur),
        ):
            mine = br(p, theta, w)
            dec, payoff = oracle_user_br(p, theta, w, scheme, n_x=4001)
            my_payoff = user_payoff(p, theta, mine.r, mine.x, w)
            scale = max(abs(payoff), abs(my_payoff), 1.0)
            assert abs(my_payoff - payoff) <= 1e-6 * scale
            assert dec.r == mine.r or abs(my_payoff - payoff) <= 1e-9 * scale
