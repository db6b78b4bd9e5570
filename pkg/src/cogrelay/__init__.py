"""Opportunistic adaptive relaying in underlay cognitive radio networks.

One decode-and-forward relay opportunistically assists the primary
transmission, the secondary transmission, or (with a SIC receiver) both,
subject to a primary outage probability threshold.  The package provides
the closed-form outage expressions, the per-draw decision protocols and a
reproducible Monte Carlo engine that validates the formulas.
"""

from .model import (
    ChannelDraw,
    LinkVariances,
    Powers,
    SystemParams,
    Topology,
    lambda_threshold,
    link_variances,
    sample_channels,
    secondary_power,
)
from .decision import (
    Decision,
    DecisionOutcome,
    DecodeEvents,
    RelayingMetrics,
    decide_scheme1,
    decide_scheme2,
    decode_events,
    relaying_metrics,
    sinr_pair,
)
from .analytic import (
    EffectiveSnrs,
    OutageBreakdown,
    cond_outage_D0,
    cond_primary_outage_D1,
    cond_secondary_outage_D1_upper,
    exp_integral,
    exp_integral_neg_scaled,
    outage_breakdown_scheme1,
    prob_ap_gt_as_upper,
    prob_decision1_upper,
    prob_decision2_upper,
    quotient_pdf,
    relay_power_D1,
    relay_power_D2,
    relay_power_D2_exact,
    solve_power_split,
    total_outage_upper,
)
from .montecarlo import (
    OutageEstimate,
    SchemePolicy,
    average_over_positions,
    empirical_pdf,
    estimate_conditional_outage,
    estimate_outage,
    primary_constraint_check,
    resolve_system,
)

__all__ = [name for name in dir() if not name.startswith("_")]
