import math

import numpy as np
import pytest

from cogrelay.model import (LINKS, ChannelDraw, SystemParams, Topology,
                            lambda_threshold, link_variances,
                            rate_cutoff_primary, sample_channels,
                            sample_gain_matrix, secondary_power,
                            snr_cutoff_primary)


def test_lambda_threshold_values():
    assert lambda_threshold(0.0) == 0.0
    assert lambda_threshold(0.5) == pytest.approx(1.0)
    assert lambda_threshold(0.8) == pytest.approx(2.0314331330207964)
    with pytest.raises(ValueError):
        lambda_threshold(-0.1)


def test_system_params_thresholds(params):
    assert params.lambda_primary == pytest.approx(2.0314331330207964)
    assert params.lambda_secondary == pytest.approx(2 ** 0.4 - 1)


def test_system_params_validation():
    with pytest.raises(ValueError):
        SystemParams(rate_primary=0.8, rate_secondary=0.2,
                     outage_threshold=1.5, snr_primary=100.0,
                     snr_relay_max=100.0, pathloss_exponent=4.0)
    with pytest.raises(ValueError):
        SystemParams(rate_primary=0.8, rate_secondary=0.2,
                     outage_threshold=0.1, snr_primary=-1.0,
                     snr_relay_max=100.0, pathloss_exponent=4.0)


def test_topology_rejects_coincident_nodes():
    with pytest.raises(ValueError):
        Topology(pt=(0.0, 0.0), st=(0.0, 0.0), pd=(1.0, 1.0),
                 sd=(1.0, 0.0), relay=(0.5, 0.5))
    topo = Topology(pt=(0.0, 1.82), st=(0.0, 0.0), pd=(1.0, 1.82),
                    sd=(1.0, 0.0), relay=(0.5, 0.9))
    with pytest.raises(ValueError):
        topo.with_relay((1.0, 0.0))  # lands on SD


def test_link_variances_unit_distance(topology):
    v = link_variances(topology, 4.0)
    # PT->PD and ST->SD are both unit-distance horizontal links
    assert v.pp == pytest.approx(1.0)
    assert v.ss == pytest.approx(1.0)
    # ST->PD spans (1, 1.82): d^2 = 1 + 1.82^2
    assert v.sp == pytest.approx((1.0 + 1.82 ** 2) ** -2)
    assert v.sp == pytest.approx(0.0537727, rel=1e-5)


def test_secondary_power_reference_setup(params, variances):
    gs = secondary_power(params, variances)
    # hand evaluation of the interference-constrained power
    lam_p = params.lambda_primary
    rho = math.exp(-lam_p / (2 * 100.0 * variances.pp)) / 0.9 - 1.0
    expected = 2 * 100.0 * variances.pp * rho / (lam_p * variances.sp)
    assert gs == pytest.approx(expected)
    assert gs == pytest.approx(182.875, rel=1e-3)


def test_secondary_power_zero_below_cutoff(params, variances):
    import dataclasses
    weak = dataclasses.replace(params, snr_primary=4.0)  # 6 dB
    assert secondary_power(weak, variances) == 0.0


def test_snr_cutoff(params, variances):
    cut = snr_cutoff_primary(params, variances)
    assert cut == pytest.approx(9.6397, abs=1e-3)
    # at the cutoff the power is (numerically) zero, just above positive
    import dataclasses
    at = dataclasses.replace(params, snr_primary=cut * (1 + 1e-9))
    assert secondary_power(at, variances) >= 0.0
    below = dataclasses.replace(params, snr_primary=cut * (1 - 1e-6))
    assert secondary_power(below, variances) == 0.0


def test_rate_cutoff(params, variances):
    cut = rate_cutoff_primary(params, variances)
    assert cut == pytest.approx(2.2323, abs=1e-3)
    import dataclasses
    beyond = dataclasses.replace(params, rate_primary=cut + 0.01,
                                 rate_secondary=(cut + 0.01) / 2)
    assert secondary_power(beyond, variances) == 0.0


def test_sample_channels_moments(variances):
    rng = np.random.default_rng(42)
    draws = sample_gain_matrix(rng, variances, 200_000)
    means = draws.mean(axis=0)
    for j, name in enumerate(LINKS):
        sigma2 = getattr(variances, name)
        assert means[j] == pytest.approx(sigma2, rel=0.02), name


def test_scalar_and_vector_sampling_agree(variances):
    r1 = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
    r2 = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
    scalar = sample_channels(r1, variances)
    matrix = sample_gain_matrix(r2, variances, 3)
    for j, name in enumerate(LINKS):
        assert getattr(scalar, name) == matrix[0, j]


def test_channel_draw_rejects_negative():
    with pytest.raises(ValueError):
        ChannelDraw(pp=-1.0, ps=0.1, pr=0.1, sp=0.1, ss=0.1, sr=0.1,
                    rp=0.1, rs=0.1)
