"""Per-draw relaying decisions and two-sub-slot SINR computation.

Scheme 1: the relay decodes at most one signal per slot and assists the
primary (D=1), the secondary (D=2) or stays silent (D=0).

Scheme 2: a SIC receiver lets the relay decode both signals
(decode one treating the other as noise, cancel it, decode the other
interference-free) and additionally superpose both in the second
sub-slot (D=3) with power split alpha.

All functions are pure and stateless; the vectorized Monte Carlo kernel
mirrors this logic on arrays and is cross-checked against it in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .model import ChannelDraw, Powers, SystemParams


class Decision(IntEnum):
    D0 = 0  # no relaying, both transmitters repeat
    D1 = 1  # relay forwards the primary signal
    D2 = 2  # relay forwards the secondary signal
    D3 = 3  # relay superposes both signals (scheme 2 only)


@dataclass(frozen=True)
class DecodeEvents:
    """Decoding outcomes at the relay after the first sub-slot.

    a_p/a_s: decode treating the other signal as noise.
    b_p/b_s: decode interference-free (after SIC cancellation).
    a_i implies b_i since removing interference only helps.
    """

    a_p: bool
    a_s: bool
    b_p: bool
    b_s: bool

    @property
    def sic_both(self) -> bool:
        """Relay decodes both signals via successive cancellation."""
        return (self.a_p and self.b_s) or (self.a_s and self.b_p)


@dataclass(frozen=True)
class RelayingMetrics:
    """Secondary-side SINR metrics compared to pick the relaying mode.

    a_0: direct repetition, a_p: relay assists primary, a_s: relay
    forwards the secondary signal, a_ps: secondary share of the
    superposed relay transmission.
    """

    a_0: float
    a_p: float
    a_s: float
    a_ps: float

    def __post_init__(self):
        if min(self.a_0, self.a_p, self.a_s, self.a_ps) < 0:
            raise ValueError("metrics must be nonnegative")


@dataclass(frozen=True)
class DecisionOutcome:
    d: Decision
    relay_snr_used: float = 0.0
    alpha_used: float = 1.0  # meaningful only for D3


def decode_events(draw: ChannelDraw, powers: Powers,
                  params: SystemParams) -> DecodeEvents:
    """Decode events at the relay; thresholds are inclusive (>=)."""
    lam_p = params.lambda_primary
    lam_s = params.lambda_secondary
    sig_p = params.snr_primary * draw.pr
    sig_s = powers.gamma_s * draw.sr
    return DecodeEvents(
        a_p=sig_p >= lam_p * (sig_s + 1.0),
        a_s=sig_s >= lam_s * (sig_p + 1.0),
        b_p=sig_p >= lam_p,
        b_s=sig_s >= lam_s,
    )


def relaying_metrics(draw: ChannelDraw, powers: Powers,
                     snr_primary: float) -> RelayingMetrics:
    """Comparison metrics for one draw, with relay powers resolved."""
    g_r_p = powers.gamma_r_p if powers.gamma_r_p is not None else 0.0
    alpha = powers.alpha
    num_ss = powers.gamma_s * draw.ss
    den_ps = snr_primary * draw.ps + 1.0
    a_0 = num_ss / den_ps
    a_p = num_ss / (g_r_p * draw.rs + 1.0)
    a_s = powers.gamma_r_s * draw.rs / den_ps
    if alpha is None:
        a_ps = 0.0
    else:
        rel = powers.gamma_r_ps * draw.rs
        a_ps = (1.0 - alpha) * rel / (alpha * rel + 1.0)
    return RelayingMetrics(a_0=a_0, a_p=a_p, a_s=a_s, a_ps=a_ps)


def decide_scheme1(events: DecodeEvents, metrics: RelayingMetrics,
                   powers: Powers) -> DecisionOutcome:
    """Three-way rule: assist primary, assist secondary, or stay silent.

    Exact metric ties are broken with priority D1 > D2 > D0; an
    infeasible primary-assist power degrades D=1 to D=0.
    """
    d1_feasible = powers.gamma_r_p is not None
    a_0, a_p, a_s = metrics.a_0, metrics.a_p, metrics.a_s
    best_p = a_p >= a_s and a_p >= a_0
    best_s = a_s > a_p and a_s >= a_0
    if events.a_p and ((not events.a_s and a_p > a_0) or
                       (events.a_s and best_p)):
        if d1_feasible:
            return DecisionOutcome(Decision.D1, relay_snr_used=powers.gamma_r_p)
        return DecisionOutcome(Decision.D0)
    if events.a_s and ((not events.a_p and a_s > a_0) or
                       (events.a_p and best_s)):
        return DecisionOutcome(Decision.D2, relay_snr_used=powers.gamma_r_s)
    return DecisionOutcome(Decision.D0)


def decide_scheme2(events: DecodeEvents, metrics: RelayingMetrics,
                   powers: Powers) -> DecisionOutcome:
    """Four-way rule with SIC: additionally allows superposed relaying.

    When the power split alpha is infeasible, D=3 is unavailable and the
    remaining rules apply; exact ties are broken D1 > D2 > D3 > D0.
    """
    d1_feasible = powers.gamma_r_p is not None
    d3_feasible = powers.alpha is not None
    e = events.sic_both
    a_0, a_p, a_s = metrics.a_0, metrics.a_p, metrics.a_s
    a_ps = metrics.a_ps if d3_feasible else 0.0
    c_p = a_p >= a_s and a_p >= a_ps and a_p >= a_0
    c_s = a_s > a_p and a_s >= a_ps and a_s >= a_0
    c_ps = d3_feasible and a_ps > a_p and a_ps > a_s and a_ps >= a_0
    if e and c_ps:
        return DecisionOutcome(Decision.D3, relay_snr_used=powers.gamma_r_ps,
                               alpha_used=powers.alpha)
    if (events.a_s and not events.b_p and a_s > a_0) or (e and c_s):
        return DecisionOutcome(Decision.D2, relay_snr_used=powers.gamma_r_s)
    if (events.a_p and not events.b_s and a_p > a_0) or (e and c_p):
        if d1_feasible:
            return DecisionOutcome(Decision.D1, relay_snr_used=powers.gamma_r_p)
        return DecisionOutcome(Decision.D0)
    return DecisionOutcome(Decision.D0)


def sinr_pair(draw: ChannelDraw, powers: Powers, params: SystemParams,
              outcome: DecisionOutcome) -> tuple[float, float]:
    """MRC-combined (SINR_p, SINR_s) over the two sub-slots for one draw."""
    gp = params.snr_primary
    gs = powers.gamma_s
    first_p = gp * draw.pp / (gs * draw.sp + 1.0)
    first_s = gs * draw.ss / (gp * draw.ps + 1.0)
    d = outcome.d
    if d == Decision.D0:
        # both transmitters repeat over block-static channels: MRC of two
        # identical-branch observations doubles each first-sub-slot SINR
        return 2.0 * first_p, 2.0 * first_s
    if d == Decision.D1:
        if powers.gamma_r_p is None:
            raise ValueError("D1 outcome with infeasible primary-assist power")
        g_r = powers.gamma_r_p
        sinr_p = first_p + g_r * draw.rp / (gs * draw.sp + 1.0)
        sinr_s = first_s + gs * draw.ss / (g_r * draw.rs + 1.0)
        return sinr_p, sinr_s
    if d == Decision.D2:
        g_r = powers.gamma_r_s
        sinr_p = first_p + gp * draw.pp / (g_r * draw.rp + 1.0)
        sinr_s = first_s + g_r * draw.rs / (gp * draw.ps + 1.0)
        return sinr_p, sinr_s
    if d == Decision.D3:
        if powers.alpha is None:
            raise ValueError("D3 outcome with unresolved power split")
        alpha = powers.alpha
        rel_p = powers.gamma_r_ps * draw.rp
        rel_s = powers.gamma_r_ps * draw.rs
        sinr_p = first_p + alpha * rel_p / ((1.0 - alpha) * rel_p + 1.0)
        sinr_s = first_s + (1.0 - alpha) * rel_s / (alpha * rel_s + 1.0)
        return sinr_p, sinr_s
    raise ValueError(f"unknown decision {d!r}")


def decode_events_rate_form(draw: ChannelDraw, powers: Powers,
                            params: SystemParams) -> DecodeEvents:
    """Rate-domain evaluation of the decode events (test oracle for the
    SINR-threshold form used by decode_events)."""
    gp = params.snr_primary
    gs = powers.gamma_s
    r_p = 0.5 * math.log2(1.0 + gp * draw.pr / (gs * draw.sr + 1.0))
    r_s = 0.5 * math.log2(1.0 + gs * draw.sr / (gp * draw.pr + 1.0))
    return DecodeEvents(
        a_p=r_p >= params.rate_primary,
        a_s=r_s >= params.rate_secondary,
        b_p=0.5 * math.log2(1.0 + gp * draw.pr) >= params.rate_primary,
        b_s=0.5 * math.log2(1.0 + gs * draw.sr) >= params.rate_secondary,
    )
