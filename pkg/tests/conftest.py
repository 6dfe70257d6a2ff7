import pytest

from lsa_cran import REFERENCE_SCENARIO, load_scenario
from lsa_cran.allocator import CostModel, MvnoRequest, SystemLimits
from lsa_cran.rate import RateModelParams

MBPS = 1_000_000
MHZ = 1_000_000

# reference pricing: income dominates every configuration cost
HIGH_PRICE = 1000
REF_COST = CostModel(cost_per_antenna=100_000, cost_per_hz=2)


def mvnos(n, rate_bps=200 * MBPS, price=HIGH_PRICE):
    return [MvnoRequest(f"m{i + 1}", rate_bps, price) for i in range(n)]


@pytest.fixture
def reference():
    return load_scenario(REFERENCE_SCENARIO)


@pytest.fixture
def params():
    return RateModelParams()


@pytest.fixture
def limits():
    return SystemLimits()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
