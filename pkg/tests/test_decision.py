import numpy as np
import pytest

from cogrelay.decision import (Decision, DecodeEvents, RelayingMetrics,
                               decide_scheme1, decide_scheme2, decode_events,
                               decode_events_rate_form, relaying_metrics,
                               sinr_pair)
from cogrelay.model import ChannelDraw, Powers


POWERS = Powers(gamma_s=180.0, gamma_r_p=20.0, gamma_r_s=60.0,
                gamma_r_ps=100.0, alpha=0.5)


def _draw(**kw):
    base = dict(pp=1.0, ps=0.05, pr=0.3, sp=0.05, ss=1.0, sr=0.3,
                rp=0.8, rs=0.8)
    base.update(kw)
    return ChannelDraw(**base)


def _metrics(a_0, a_p, a_s, a_ps=0.0):
    return RelayingMetrics(a_0=a_0, a_p=a_p, a_s=a_s, a_ps=a_ps)


def test_decode_events_matches_rate_form(params):
    rng = np.random.default_rng(3)
    for _ in range(500):
        draw = _draw(pr=float(rng.exponential(0.3)),
                     sr=float(rng.exponential(0.3)))
        assert decode_events(draw, POWERS, params) == \
            decode_events_rate_form(draw, POWERS, params)


def test_decode_event_thresholds_inclusive(params):
    lam_p = params.lambda_primary
    # exact equality: sig_p = lam_p * (sig_s + 1) with sig_s = 0
    draw = _draw(pr=lam_p / params.snr_primary, sr=0.0)
    ev = decode_events(draw, Powers(gamma_s=0.0), params)
    assert ev.a_p and ev.b_p


def test_scheme1_rules():
    both = DecodeEvents(a_p=True, a_s=True, b_p=True, b_s=True)
    only_p = DecodeEvents(a_p=True, a_s=False, b_p=True, b_s=False)
    only_s = DecodeEvents(a_p=False, a_s=True, b_p=False, b_s=True)
    none = DecodeEvents(a_p=False, a_s=False, b_p=False, b_s=False)

    # only the primary decodable: relay helps iff it beats repetition
    assert decide_scheme1(only_p, _metrics(1.0, 2.0, 9.0), POWERS).d == \
        Decision.D1
    assert decide_scheme1(only_p, _metrics(2.0, 1.0, 9.0), POWERS).d == \
        Decision.D0
    # only the secondary decodable
    assert decide_scheme1(only_s, _metrics(1.0, 9.0, 2.0), POWERS).d == \
        Decision.D2
    assert decide_scheme1(only_s, _metrics(2.0, 9.0, 1.0), POWERS).d == \
        Decision.D0
    # both decodable: argmax among a_0, a_p, a_s
    assert decide_scheme1(both, _metrics(1.0, 3.0, 2.0), POWERS).d == \
        Decision.D1
    assert decide_scheme1(both, _metrics(1.0, 2.0, 3.0), POWERS).d == \
        Decision.D2
    assert decide_scheme1(both, _metrics(3.0, 1.0, 2.0), POWERS).d == \
        Decision.D0
    # ties break toward D1
    assert decide_scheme1(both, _metrics(1.0, 2.0, 2.0), POWERS).d == \
        Decision.D1
    assert decide_scheme1(none, _metrics(0.0, 9.0, 9.0), POWERS).d == \
        Decision.D0


def test_scheme1_infeasible_primary_assist_degrades():
    only_p = DecodeEvents(a_p=True, a_s=False, b_p=True, b_s=False)
    nop = Powers(gamma_s=180.0, gamma_r_p=None, gamma_r_s=60.0)
    assert decide_scheme1(only_p, _metrics(1.0, 2.0, 0.0), nop).d == \
        Decision.D0


def test_scheme2_superposition_requires_sic_decode():
    m = _metrics(1.0, 2.0, 3.0, a_ps=4.0)
    sic = DecodeEvents(a_p=True, a_s=False, b_p=True, b_s=True)
    assert sic.sic_both
    assert decide_scheme2(sic, m, POWERS).d == Decision.D3
    no_sic = DecodeEvents(a_p=True, a_s=False, b_p=True, b_s=False)
    assert not no_sic.sic_both
    # a_s undecodable, a_p decodable but not interference-free for the
    # other signal: falls back to the single-assist clause
    assert decide_scheme2(no_sic, m, POWERS).d == Decision.D1


def test_scheme2_single_decode_clauses():
    m = _metrics(1.0, 2.0, 3.0, a_ps=0.5)
    # secondary decoded with interference, primary not even clean
    ev = DecodeEvents(a_p=False, a_s=True, b_p=False, b_s=True)
    assert decide_scheme2(ev, m, POWERS).d == Decision.D2
    # secondary decoded and primary clean -> SIC pair available
    ev2 = DecodeEvents(a_p=False, a_s=True, b_p=True, b_s=True)
    assert ev2.sic_both
    assert decide_scheme2(ev2, m, POWERS).d == Decision.D2  # a_s is argmax


def test_scheme2_alpha_infeasible_disables_d3():
    m = _metrics(1.0, 2.0, 3.0, a_ps=9.0)
    sic = DecodeEvents(a_p=True, a_s=True, b_p=True, b_s=True)
    no_alpha = Powers(gamma_s=180.0, gamma_r_p=20.0, gamma_r_s=60.0,
                      gamma_r_ps=100.0, alpha=None)
    out = decide_scheme2(sic, m, no_alpha)
    assert out.d == Decision.D2  # a_s wins once a_ps is unavailable


def test_relaying_metrics_values(params):
    draw = _draw()
    m = relaying_metrics(draw, POWERS, params.snr_primary)
    den_ps = params.snr_primary * draw.ps + 1.0
    assert m.a_0 == pytest.approx(POWERS.gamma_s * draw.ss / den_ps)
    assert m.a_p == pytest.approx(POWERS.gamma_s * draw.ss /
                                  (POWERS.gamma_r_p * draw.rs + 1.0))
    assert m.a_s == pytest.approx(POWERS.gamma_r_s * draw.rs / den_ps)
    rel = POWERS.gamma_r_ps * draw.rs
    assert m.a_ps == pytest.approx(0.5 * rel / (0.5 * rel + 1.0))


def test_sinr_pair_modes(params):
    draw = _draw()
    gp, gs = params.snr_primary, POWERS.gamma_s
    first_p = gp * draw.pp / (gs * draw.sp + 1.0)
    first_s = gs * draw.ss / (gp * draw.ps + 1.0)

    from cogrelay.decision import DecisionOutcome
    p0, s0 = sinr_pair(draw, POWERS, params, DecisionOutcome(Decision.D0))
    assert (p0, s0) == (pytest.approx(2 * first_p), pytest.approx(2 * first_s))

    p1, s1 = sinr_pair(draw, POWERS, params, DecisionOutcome(Decision.D1))
    assert p1 == pytest.approx(first_p + 20.0 * draw.rp /
                               (gs * draw.sp + 1.0))
    assert s1 == pytest.approx(first_s + gs * draw.ss /
                               (20.0 * draw.rs + 1.0))

    p2, s2 = sinr_pair(draw, POWERS, params, DecisionOutcome(Decision.D2))
    assert p2 == pytest.approx(first_p + gp * draw.pp /
                               (60.0 * draw.rp + 1.0))
    assert s2 == pytest.approx(first_s + 60.0 * draw.rs /
                               (gp * draw.ps + 1.0))

    p3, s3 = sinr_pair(draw, POWERS, params, DecisionOutcome(Decision.D3))
    rel_p, rel_s = 100.0 * draw.rp, 100.0 * draw.rs
    assert p3 == pytest.approx(first_p + 0.5 * rel_p / (0.5 * rel_p + 1.0))
    assert s3 == pytest.approx(first_s + 0.5 * rel_s / (0.5 * rel_s + 1.0))


def test_sinr_pair_rejects_unresolved_powers(params):
    from cogrelay.decision import DecisionOutcome
    draw = _draw()
    with pytest.raises(ValueError):
        sinr_pair(draw, Powers(gamma_s=1.0, gamma_r_p=None), params,
                  DecisionOutcome(Decision.D1))
    with pytest.raises(ValueError):
        sinr_pair(draw, Powers(gamma_s=1.0, alpha=None), params,
                  DecisionOutcome(Decision.D3))


def test_scalar_kernel_matches_vectorized(params, topology, variances):
    """The per-draw functions and the array kernel must agree exactly."""
    from cogrelay import montecarlo
    from cogrelay.model import LINKS

    system = montecarlo.resolve_system(params, topology, scheme2=True)
    gains = montecarlo._chunk_gains(variances, seed=99, chunk=0, m=512)
    for policy, decider in [
            (montecarlo.SchemePolicy.ADAPTIVE1, decide_scheme1),
            (montecarlo.SchemePolicy.ADAPTIVE2, decide_scheme2)]:
        d, sinr_p, sinr_s = montecarlo._decide_and_sinr(system, policy, gains)
        for i in range(gains.shape[0]):
            draw = ChannelDraw(**{k: float(gains[i, j])
                                  for j, k in enumerate(LINKS)})
            ev = decode_events(draw, system.powers, params)
            m = relaying_metrics(draw, system.powers, params.snr_primary)
            out = decider(ev, m, system.powers)
            assert out.d == d[i], (policy, i)
            sp, ss = sinr_pair(draw, system.powers, params, out)
            assert sp == pytest.approx(sinr_p[i], rel=1e-12)
            assert ss == pytest.approx(sinr_s[i], rel=1e-12)
