import pytest

from datarewards import MarketParams
from datarewards.presets import PRESETS


@pytest.fixture(scope="session")
def fig5a_params() -> MarketParams:
    """Logarithmic utility, uniform types, mid-range capacity."""
    return PRESETS["fig5a"].params(1.6e7)


@pytest.fixture(scope="session")
def fig5a_tight() -> MarketParams:
    """Same market, capacity in the range where differentiation pays."""
    return PRESETS["fig5a"].params(1.24e7)


@pytest.fixture(scope="session")
def fig7c_params() -> MarketParams:
    """Exponential utility, truncated-normal types, strong wear-out."""
    return PRESETS["fig7c"].params(2.07e7)


@pytest.fixture(scope="session")
def appk_params() -> MarketParams:
    """The capacity-non-exhaustion counterexample market."""
    return PRESETS["appK"].params()
