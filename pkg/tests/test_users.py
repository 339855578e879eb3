import math

import numpy as np
import pytest

from datarewards import (
    AlphaFairUtility,
    ExpUtility,
    InternalConsistencyError,
    LogUtility,
    MarketParams,
    Scheme,
    SarCase,
    SurCase,
    UniformTypes,
    best_response_sar,
    best_response_sur,
    classify_sar,
    classify_sur,
    solve_theta2,
    solve_theta4,
)
from datarewards.oracle import oracle_user_br, user_payoff
from datarewards.users import (
    case_bound_a,
    case_bound_b_sar,
    case_bound_b_sur,
    case_bound_d,
    theta0,
    theta1,
    theta3,
    thresholds,
)


def _mk(utility, dist, F=30.0, Q=0.8, phi=0.3, N=1e7, C=1.6e7) -> MarketParams:
    return MarketParams(
        N=N, F=F, Q=Q, phi=phi, K=23.0, A=0.6, B=5.0, C=C,
        utility=utility, dist=dist,
    )


@pytest.fixture(scope="module")
def log_uniform() -> MarketParams:
    return _mk(LogUtility(), UniformTypes(155.0))


# ---------------------------------------------------------------------------
# case classification
# ---------------------------------------------------------------------------


def test_zero_reward_is_case_a(log_uniform):
    assert classify_sar(log_uniform, 0.0) is SarCase.A
    assert classify_sur(log_uniform, 0.0) is SurCase.A


def test_sar_case_boundaries_closed_below(log_uniform):
    p = log_uniform
    ab = case_bound_a(p)
    assert ab == pytest.approx(0.3 * 1.8 / 155.0, rel=1e-12)
    assert classify_sar(p, ab) is SarCase.A
    assert classify_sar(p, ab * 1.0001) is SarCase.B
    bc = case_bound_b_sar(p)
    assert bc == pytest.approx((0.3 / 30.0) * 1.8 * math.log(1.8), rel=1e-12)
    assert classify_sar(p, bc) is SarCase.B
    assert classify_sar(p, bc * 1.0001) is SarCase.C


def test_sur_case_boundaries(log_uniform):
    p = log_uniform
    assert classify_sur(p, case_bound_a(p)) is SurCase.A
    b2 = case_bound_b_sur(p)
    assert classify_sur(p, b2) is SurCase.B
    assert classify_sur(p, b2 * 1.0001) is SurCase.C
    q = case_bound_d(p)
    assert q == pytest.approx(0.3 * 0.8 / 30.0, rel=1e-12)
    assert classify_sur(p, q * 0.9999) is SurCase.C
    assert classify_sur(p, q) is SurCase.D


def test_infinite_marginal_collapses_lower_thresholds():
    p = _mk(AlphaFairUtility(alpha=0.5, mu=0.0), UniformTypes(155.0))
    assert case_bound_b_sur(p) == 0.0
    assert theta3(p, 0.004) == 0.0
    # the no-watching and pooled-watching cases are squeezed out
    assert classify_sur(p, case_bound_a(p) * 1.001) is SurCase.C


# ---------------------------------------------------------------------------
# threshold roots
# ---------------------------------------------------------------------------


def test_theta2_defining_equation(log_uniform):
    p = log_uniform
    w = 1.2 * case_bound_b_sar(p)
    t2 = solve_theta2(p, w)
    assert theta1(p, w) < t2 < theta0(p)
    level = p.utility.inverse_marginal(p.phi / (w * t2))
    h = t2 * p.utility.u(level) - p.F - (p.phi / w) * (level - p.Q)
    assert abs(h) <= 1e-8 * p.F


def test_theta2_decreases_with_reward(log_uniform):
    p = log_uniform
    w = 1.2 * case_bound_b_sar(p)
    assert solve_theta2(p, 1.1 * w) < solve_theta2(p, w)


def test_theta2_against_dense_scan(log_uniform):
    p = log_uniform
    w = 1.2 * case_bound_b_sar(p)
    t2 = solve_theta2(p, w)
    grid = np.linspace(theta1(p, w), theta0(p), 1_000_000)

    def h(theta):
        level = p.phi / (w * theta)
        lvl = 1.0 / level - 1.0
        return theta * np.log1p(lvl) - p.F - (p.phi / w) * (lvl - p.Q)

    vals = h(grid)
    flips = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    assert len(flips) == 1
    assert grid[flips[0]] <= t2 <= grid[flips[0] + 1]


def test_theta2_wrong_case_raises(log_uniform):
    p = log_uniform
    with pytest.raises(InternalConsistencyError):
        solve_theta2(p, 0.5 * case_bound_b_sar(p))


@pytest.mark.parametrize(
    "utility",
    [LogUtility(), AlphaFairUtility(alpha=0.8, mu=0.8), ExpUtility(gamma=0.7)],
)
def test_theta4_defining_equation(utility):
    p = _mk(utility, UniformTypes(155.0), F=10.0)
    w = 0.5 * (case_bound_b_sur(p) + case_bound_d(p))
    t4 = solve_theta4(p, w)
    assert theta3(p, w) < t4 < theta1(p, w)
    assert t4 > theta0(p)
    level = p.utility.inverse_marginal(p.phi / (w * t4))
    v = (t4 * p.utility.u(level) - (p.phi / w) * level
         - t4 * p.utility.u(p.Q) + p.F)
    assert abs(v) <= 1e-7 * p.F


def test_theta4_increases_with_reward(log_uniform):
    p = log_uniform
    b2, q = case_bound_b_sur(p), case_bound_d(p)
    ws = np.geomspace(b2 * 1.05, q * 0.999, 12)
    t4s = [solve_theta4(p, float(w)) for w in ws]
    assert all(a < b for a, b in zip(t4s, t4s[1:]))


# ---------------------------------------------------------------------------
# best responses: closed forms
# ---------------------------------------------------------------------------


def test_case_a_subscription_rule(log_uniform):
    p = log_uniform
    w = 0.5 * case_bound_a(p)
    t0 = theta0(p)
    for theta, r in [(t0 * 0.9, 0), (t0, 1), (t0 * 1.1, 1), (155.0, 1)]:
        dec = best_response_sar(p, theta, w)
        assert (dec.r, dec.x) == (r, 0.0)


def test_case_b_log_watch_rate_is_affine(log_uniform):
    p = log_uniform
    w = 0.9 * case_bound_b_sar(p)
    t1 = theta1(p, w)
    for theta in [t1 * 1.1, t1 * 1.5, 150.0]:
        dec = best_response_sar(p, theta, w)
        assert dec.r == 1
        assert dec.x == pytest.approx((theta - t1) / p.phi, rel=1e-10)
    below = best_response_sar(p, t1 * 0.9, w)
    assert below.x == 0.0


def test_case_c_every_subscriber_watches(log_uniform):
    p = log_uniform
    w = 1.3 * case_bound_b_sar(p)
    t2 = solve_theta2(p, w)
    for theta in np.linspace(t2, 155.0, 20):
        dec = best_response_sar(p, float(theta), w)
        assert dec.r == 1
        assert dec.x > 0.0
    dec = best_response_sar(p, t2 * 0.999, w)
    assert (dec.r, dec.x) == (0, 0.0)


def test_sur_case_d_nobody_subscribes(log_uniform):
    p = log_uniform
    w = 1.5 * case_bound_d(p)
    for theta in np.linspace(0.0, 155.0, 25):
        dec = best_response_sur(p, float(theta), w)
        assert dec.r == 0
    # high types still watch ads
    assert best_response_sur(p, 150.0, w).x > 0.0


def test_sur_case_b_matches_sar_case_b(log_uniform):
    p = log_uniform
    w = 0.9 * case_bound_b_sur(p)
    assert classify_sur(p, w) is SurCase.B
    for theta in np.linspace(0.0, 155.0, 40):
        a = best_response_sar(p, float(theta), w)
        b = best_response_sur(p, float(theta), w)
        assert (a.r, a.x) == (b.r, b.x)


def test_sur_case_c_non_subscriber_band(log_uniform):
    p = log_uniform
    w = 0.5 * (case_bound_b_sur(p) + case_bound_d(p))
    thr = thresholds(p, w, scheme_aware=False)
    t3, t4 = thr.theta3, thr.theta4
    inside = best_response_sur(p, 0.5 * (t3 + t4), w)
    assert inside.r == 0 and inside.x > 0.0
    above = best_response_sur(p, t4 * 1.001, w)
    assert above.r == 1
    below = best_response_sur(p, t3 * 0.99, w)
    assert (below.r, below.x) == (0, 0.0)


def test_sar_constraint_no_watching_without_subscription(log_uniform):
    p = log_uniform
    for w in np.linspace(0.0, 2 * case_bound_d(p), 15):
        for theta in np.linspace(0.0, 155.0, 15):
            dec = best_response_sar(p, float(theta), float(w))
            if dec.x > 0.0:
                assert dec.r == 1


# ---------------------------------------------------------------------------
# shape laws and monotonicity on the watching segment
# ---------------------------------------------------------------------------


def _watch_curve(p: MarketParams, w: float, n=200):
    t1 = theta1(p, w)
    grid = np.linspace(t1 * 1.01, p.dist.theta_max, n)
    xs = np.array([best_response_sar(p, float(t), w).x for t in grid])
    return grid, xs


def test_watch_rate_monotone_in_type():
    for utility in (LogUtility(), AlphaFairUtility(0.8, 0.8), ExpUtility(0.7)):
        p = _mk(utility, UniformTypes(155.0), F=10.0)
        w = 0.9 * case_bound_b_sar(p)
        _, xs = _watch_curve(p, w)
        assert np.all(np.diff(xs) >= -1e-12)


def test_watch_rate_shape_by_utility():
    w_scale = 0.9
    p = _mk(LogUtility(), UniformTypes(155.0))
    _, xs = _watch_curve(p, w_scale * case_bound_b_sar(p))
    assert np.max(np.abs(np.diff(xs, 2))) <= 1e-6  # affine

    p = _mk(ExpUtility(gamma=0.7), UniformTypes(155.0), F=10.0)
    _, xs = _watch_curve(p, w_scale * case_bound_b_sar(p))
    assert np.all(np.diff(xs, 2) <= 1e-9)  # concave

    p = _mk(AlphaFairUtility(alpha=0.8, mu=0.8), UniformTypes(155.0), F=10.0)
    _, xs = _watch_curve(p, w_scale * case_bound_b_sar(p))
    assert np.all(np.diff(xs, 2) >= -1e-9)  # convex


# ---------------------------------------------------------------------------
# oracle dominance (small sample here; the full 1000-draw run is in
# the acceptance suite)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "utility,dist",
    [
        (LogUtility(), UniformTypes(155.0)),
        (AlphaFairUtility(0.8, 0.8), UniformTypes(155.0)),
        (ExpUtility(0.7), UniformTypes(155.0)),
    ],
)
def test_best_response_beats_grid_oracle(utility, dist):
    p = _mk(utility, dist, F=10.0)
    rng = np.random.default_rng(7)
    w_hi = 2.0 * case_bound_d(p)
    for scheme, br in (
        (Scheme.SAR, best_response_sar),
        (Scheme.SUR, best_response_sur),
    ):
        for _ in range(60):
            theta = rng.uniform(0.0, p.dist.theta_max)
            w = rng.uniform(0.0, w_hi)
            mine = br(p, theta, w)
            _, grid_payoff = oracle_user_br(p, theta, w, scheme, n_x=2001)
            my_payoff = user_payoff(p, theta, mine.r, mine.x, w)
            scale = max(abs(grid_payoff), abs(my_payoff), 1.0)
            assert my_payoff >= grid_payoff - 1e-8 * scale
