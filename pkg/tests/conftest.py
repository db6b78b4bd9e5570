import pytest

from cogrelay.model import SystemParams, Topology, link_variances


@pytest.fixture
def params():
    # default experimental setup: 20 dB budgets, epsilon = 0.1
    return SystemParams(rate_primary=0.8, rate_secondary=0.2,
                        outage_threshold=0.1, snr_primary=100.0,
                        snr_relay_max=100.0, pathloss_exponent=4.0)


@pytest.fixture
def topology():
    return Topology(pt=(0.0, 1.82), st=(0.0, 0.0), pd=(1.0, 1.82),
                    sd=(1.0, 0.0), relay=(0.5, 0.9))


@pytest.fixture
def variances(topology):
    return link_variances(topology, 4.0)
