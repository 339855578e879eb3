"""Built-in scenario presets for the reproduction sweeps.

Each preset fixes the market parameters of one reference comparison
scenario and a capacity sweep range. The sweep ranges start at the
zero-reward demand D(0) (the smallest capacity any scenario admits);
the upper endpoints are documented approximations chosen to cover the
interesting part of the capacity axis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    AlphaFairUtility,
    ExpUtility,
    LogUtility,
    MarketParams,
    TruncatedNormalTypes,
    TypeDistribution,
    UniformTypes,
    UtilityModel,
)


@dataclass(frozen=True)
class Preset:
    name: str
    utility: UtilityModel
    dist: TypeDistribution
    N: float
    F: float
    Q: float
    phi: float
    K: float
    A: float
    B: float
    sweep_to: float | None  # None: single solve at fixed_c
    sweep_steps: int = 60
    fixed_c: float | None = None

    def params(self, c: float | None = None) -> MarketParams:
        if c is None:
            c = self.fixed_c if self.fixed_c is not None else self.sweep_to
        assert c is not None
        return MarketParams(
            N=self.N, F=self.F, Q=self.Q, phi=self.phi, K=self.K,
            A=self.A, B=self.B, C=c, utility=self.utility, dist=self.dist,
        )

    def sweep_from(self) -> float:
        return self.params().baseline_demand()


PRESETS: dict[str, Preset] = {
    # uniform types
    "fig5a": Preset(
        "fig5a", LogUtility(), UniformTypes(155.0),
        N=1e7, F=30.0, Q=0.8, phi=0.3, K=23.0, A=0.6, B=5.0,
        sweep_to=2.2e7,
    ),
    "fig5b": Preset(
        "fig5b", AlphaFairUtility(alpha=0.8, mu=0.8), UniformTypes(155.0),
        N=1e7, F=30.0, Q=0.8, phi=0.3, K=23.0, A=0.6, B=5.0,
        sweep_to=2.2e7,
    ),
    "fig5c": Preset(
        "fig5c", ExpUtility(gamma=0.7), UniformTypes(250.0),
        N=1e7, F=45.0, Q=2.0, phi=0.3, K=23.0, A=0.9, B=5.0,
        sweep_to=2.2e7,
    ),
    "fig5d": Preset(
        "fig5d", ExpUtility(gamma=0.7), UniformTypes(250.0),
        N=1e7, F=45.0, Q=2.0, phi=0.3, K=23.0, A=0.2, B=5.0,
        sweep_to=2.2e7,
    ),
    # truncated-normal types
    "fig7a": Preset(
        "fig7a", LogUtility(),
        TruncatedNormalTypes(mean=75.0, sd=40.0, lo=0.0, hi=150.0),
        N=1e7, F=40.0, Q=2.0, phi=0.03, K=8.0, A=0.5, B=10.0,
        sweep_to=2.5e7,
    ),
    "fig7b": Preset(
        "fig7b", AlphaFairUtility(alpha=0.8, mu=0.8),
        TruncatedNormalTypes(mean=75.0, sd=40.0, lo=0.0, hi=150.0),
        N=1e7, F=40.0, Q=2.0, phi=0.03, K=8.0, A=0.5, B=10.0,
        sweep_to=2.5e7,
    ),
    "fig7c": Preset(
        "fig7c", ExpUtility(gamma=0.7),
        TruncatedNormalTypes(mean=125.0, sd=30.0, lo=0.0, hi=250.0),
        N=1e7, F=40.0, Q=2.0, phi=0.5, K=16.0, A=0.9, B=5.0,
        sweep_to=2.6e7,
    ),
    "fig7d": Preset(
        "fig7d", ExpUtility(gamma=0.7),
        TruncatedNormalTypes(mean=125.0, sd=30.0, lo=0.0, hi=250.0),
        N=1e7, F=40.0, Q=2.0, phi=0.5, K=16.0, A=0.2, B=5.0,
        sweep_to=2.6e7,
    ),
    # alternative parameter scales
    "appR-a": Preset(
        "appR-a", LogUtility(), UniformTypes(155.0),
        N=1e7, F=25.0, Q=0.7, phi=0.2, K=30.0, A=0.5, B=3.0,
        sweep_to=2.2e7, sweep_steps=40,
    ),
    "appR-b": Preset(
        "appR-b", LogUtility(), UniformTypes(170.0),
        N=1e5, F=32.0, Q=0.6, phi=0.3, K=18.0, A=0.6, B=4.0,
        sweep_to=2.2e5, sweep_steps=40,
    ),
    "appR-c": Preset(
        "appR-c", LogUtility(), UniformTypes(150.0),
        N=1e4, F=28.0, Q=0.6, phi=0.2, K=18.0, A=0.4, B=3.0,
        sweep_to=2.2e4, sweep_steps=40,
    ),
    # capacity-non-exhaustion counterexample (single capacity)
    "appK": Preset(
        "appK", ExpUtility(gamma=0.95),
        TruncatedNormalTypes(mean=30.0, sd=60.0, lo=0.0, hi=320.0),
        N=1e7, F=40.0, Q=2.0, phi=0.5, K=16.0, A=0.9, B=5.0,
        sweep_to=None, fixed_c=2.15e7,
    ),
}
