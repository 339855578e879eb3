"""Command-line interface: scenario solving, capacity sweeps,
verification against the brute-force oracle, preset reproduction, and
threshold dumps.

Exit codes: 0 success, 2 missing input file, 3 parse error,
4 scenario/model invariant violation, 1 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .admarket import (
    ad_stats,
    advertiser_best_response,
    optimal_price,
)
from .errors import DataRewardsError, ScenarioError
from .model import MarketParams, Scheme, load_scenario
from .oracle import oracle_adv_br, oracle_user_br, user_payoff
from .presets import PRESETS
from .solver import (
    DEFAULT_CONFIG,
    SolverConfig,
    solve,
)
from .users import (
    best_response_sar,
    best_response_sur,
    thresholds,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_MISSING_FILE = 2
EXIT_PARSE_ERROR = 3
EXIT_INVARIANT = 4

SCHEME_ORDER = [Scheme.SAR, Scheme.SUR, Scheme.SURD]

RECORD_FIELDS = [
    "scheme", "omega_star", "p_star", "p_star_I", "p_star_II",
    "r_data", "r_ad", "r_total", "demand", "case", "capacity_binding",
]


def fmt_value(x) -> str:
    """Diff-stable CSV formatting: 10 significant digits, scientific
    notation for magnitudes of a million and up."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0.0:
        return "0"
    if abs(v) >= 1e6:
        return f"{v:.9e}"
    return f"{v:.10g}"


def emit_records(records: list[dict], fields: list[str], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(records, indent=2))
        return
    print(",".join(fields))
    for rec in records:
        print(",".join(fmt_value(rec.get(f)) for f in fields))


def _parse_scheme(text: str) -> Scheme:
    try:
        return Scheme(text.lower())
    except ValueError:
        raise ScenarioError(f"unknown scheme {text!r}; expected sar, sur, or surd")


def _config(args) -> SolverConfig:
    if args.grid is None:
        return DEFAULT_CONFIG
    return SolverConfig(
        grid_points=args.grid,
        scan_points=min(DEFAULT_CONFIG.scan_points, max(args.grid, 50)),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    params = load_scenario(args.scenario)
    scheme = _parse_scheme(args.scheme)
    outcome = solve(params, scheme, _config(args))
    emit_records([outcome.to_record()], RECORD_FIELDS, args.format)
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = load_scenario(args.scenario)
    if not args.from_ < args.to:
        raise ScenarioError("sweep needs --from < --to")
    if not 2 <= args.steps <= 100_000:
        raise ScenarioError("sweep steps must lie in [2, 100000]")
    schemes = (
        [_parse_scheme(s) for s in args.scheme]
        if args.scheme
        else list(SCHEME_ORDER)
    )
    schemes = [s for s in SCHEME_ORDER if s in schemes]
    config = _config(args)
    records = []
    for c in np.linspace(args.from_, args.to, args.steps):
        point = MarketParams(
            N=params.N, F=params.F, Q=params.Q, phi=params.phi,
            K=params.K, A=params.A, B=params.B, C=float(c),
            utility=params.utility, dist=params.dist,
        )
        for scheme in schemes:
            rec = {"C": float(c)}
            rec.update(solve(point, scheme, config).to_record())
            records.append(rec)
    emit_records(records, ["C"] + RECORD_FIELDS, args.format)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    preset = PRESETS.get(args.figure)
    if preset is None:
        raise ScenarioError(
            f"unknown figure id {args.figure!r}; choose from "
            + ", ".join(sorted(PRESETS))
        )
    config = _config(args)
    records = []
    if preset.sweep_to is None:
        params = preset.params()
        for scheme in SCHEME_ORDER:
            rec = {"C": params.C}
            rec.update(solve(params, scheme, config).to_record())
            records.append(rec)
    else:
        c_values = np.linspace(
            preset.sweep_from(), preset.sweep_to, preset.sweep_steps
        )
        for c in c_values:
            params = preset.params(float(c))
            for scheme in SCHEME_ORDER:
                rec = {"C": float(c)}
                rec.update(solve(params, scheme, config).to_record())
                records.append(rec)
    emit_records(records, ["C"] + RECORD_FIELDS, args.format)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    params = load_scenario(args.scenario)
    scheme = _parse_scheme(args.scheme)
    aware = scheme is Scheme.SAR

    if args.responses_at is not None:
        w = args.responses_at
        br = best_response_sar if aware else best_response_sur
        records = []
        for theta in np.linspace(0.0, params.dist.theta_max, args.steps):
            dec = br(params, float(theta), w)
            records.append({"theta": float(theta), "r": dec.r, "x": dec.x})
        emit_records(records, ["theta", "r", "x"], args.format)
        return EXIT_OK

    if not args.from_ < args.to:
        raise ScenarioError("threshold dump needs --from < --to")
    records = []
    for w in np.linspace(args.from_, args.to, args.steps):
        thr = thresholds(params, float(w), scheme_aware=aware)
        records.append({
            "omega": float(w),
            "theta0": thr.theta0,
            "theta1": thr.theta1,
            "theta2": thr.theta2,
            "theta3": thr.theta3,
            "theta4": thr.theta4,
        })
    emit_records(
        records,
        ["omega", "theta0", "theta1", "theta2", "theta3", "theta4"],
        args.format,
    )
    return EXIT_OK


def _verify_user_br(params: MarketParams, scheme: Scheme, rng, n: int) -> tuple[bool, str]:
    w_hi = 2.0 * params.phi * params.Q / params.F
    worst = 0.0
    br = best_response_sar if scheme is Scheme.SAR else best_response_sur
    for _ in range(n):
        theta = rng.uniform(0.0, params.dist.theta_max)
        w = rng.uniform(0.0, w_hi)
        analytic = br(params, theta, w)
        _, oracle_payoff = oracle_user_br(params, theta, w, scheme)
        mine = user_payoff(params, theta, analytic.r, analytic.x, w)
        scale = max(abs(oracle_payoff), abs(mine), 1.0)
        worst = max(worst, (oracle_payoff - mine) / scale)
    return worst <= 1e-8, f"worst relative payoff gap {worst:.3e}"


def _verify_adv_br(params: MarketParams, rng) -> tuple[bool, str]:
    w = 0.9 * params.phi * params.Q / params.F
    stats = ad_stats(params, w, Scheme.SUR)
    if stats.n_ad <= 0:
        return True, "no watchers at probe reward (vacuous)"
    p = rng.uniform(0.1 * params.B, 0.9 * params.B)
    grid_m = oracle_adv_br(stats, params, p, n_m=100001)
    closed = advertiser_best_response(stats, params, p)
    step = 2.0 * params.B * stats.n_ad * stats.ey**2 / (
        2.0 * params.A * stats.ey2
    ) / 100000
    ok = abs(grid_m - closed) <= step * 1.5
    return ok, f"grid {grid_m:.6g} vs closed form {closed:.6g}"


def _verify_price(params: MarketParams) -> tuple[bool, str]:
    w = 0.9 * params.phi * params.Q / params.F
    stats = ad_stats(params, w, Scheme.SUR)
    if stats.n_ad <= 0:
        return True, "no watchers at probe reward (vacuous)"
    p_grid = np.linspace(params.B / 2000, params.B, 2000)
    revs = [
        params.K * advertiser_best_response(stats, params, float(p)) * p
        for p in p_grid
    ]
    best_grid = float(p_grid[int(np.argmax(revs))])
    closed = optimal_price(stats, params)
    ok = abs(best_grid - closed) <= params.B / 1000
    return ok, f"grid price {best_grid:.6g} vs closed form {closed:.6g}"


def _verify_dominance(params: MarketParams) -> tuple[bool, str]:
    config = SolverConfig(grid_points=250, scan_points=200)
    pooled = solve(params, Scheme.SUR, config)
    split = solve(params, Scheme.SURD, config)
    ok = split.r_total >= pooled.r_total * (1.0 - 1e-6)
    return ok, (
        f"differentiated {split.r_total:.6g} vs pooled {pooled.r_total:.6g}"
    )


def cmd_verify(args) -> int:
    if args.scenario:
        params = load_scenario(args.scenario)
    else:
        params = PRESETS["fig5a"].params(1.6e7)
    rng = np.random.default_rng(args.seed)
    checks = [
        ("user best response (aware)",
         _verify_user_br(params, Scheme.SAR, rng, args.draws)),
        ("user best response (unaware)",
         _verify_user_br(params, Scheme.SUR, rng, args.draws)),
        ("advertiser best response", _verify_adv_br(params, rng)),
        ("optimal slot price", _verify_price(params)),
        ("differentiation dominance", _verify_dominance(params)),
    ]
    failed = 0
    for name, (ok, detail) in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}: {detail}")
        if not ok:
            failed += 1
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datarewards",
        description="Equilibrium solver for mobile-data-rewarding markets",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_required=True):
        p.add_argument("--scenario", required=scenario_required,
                       help="path to a JSON scenario file")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--grid", type=int, default=None,
                       help="solver grid override")

    p_solve = sub.add_parser("solve", help="solve one scenario for one scheme")
    add_common(p_solve)
    p_solve.add_argument("--scheme", required=True)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="capacity sweep")
    add_common(p_sweep)
    p_sweep.add_argument("--scheme", action="append", default=None)
    p_sweep.add_argument("--from", dest="from_", type=float, required=True)
    p_sweep.add_argument("--to", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="run a built-in preset sweep")
    p_rep.add_argument("figure", help="preset id, e.g. fig5a or appK")
    p_rep.add_argument("--format", choices=["csv", "json"], default="csv")
    p_rep.add_argument("--grid", type=int, default=None)
    p_rep.set_defaults(func=cmd_reproduce)

    p_thr = sub.add_parser(
        "thresholds", help="dump thresholds vs reward, or user responses"
    )
    add_common(p_thr)
    p_thr.add_argument("--scheme", required=True)
    p_thr.add_argument("--from", dest="from_", type=float, default=0.0)
    p_thr.add_argument("--to", type=float, default=0.0)
    p_thr.add_argument("--steps", type=int, default=100)
    p_thr.add_argument(
        "--responses-at", type=float, default=None, metavar="OMEGA",
        help="dump per-type (theta, r, x) decisions at this reward instead",
    )
    p_thr.set_defaults(func=cmd_thresholds)

    p_ver = sub.add_parser("verify", help="compare against brute-force oracle")
    p_ver.add_argument("--scenario", default=None)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--draws", type=int, default=100)
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except ScenarioError as exc:
        message = str(exc)
        if "cannot parse" in message:
            print(f"error: {message}", file=sys.stderr)
            return EXIT_PARSE_ERROR
        print(f"error: invalid scenario: {message}", file=sys.stderr)
        return EXIT_INVARIANT
    except DataRewardsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
