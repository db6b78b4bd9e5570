"""Reproducible Monte Carlo engine for outage estimation.

Trials are processed in fixed-size chunks; chunk c draws its randomness
from SeedSequence(seed, spawn_key=(c,)), so any partitioning of chunks
across workers reproduces the exact per-trial streams.  Accumulation is
integer event counting, which makes the estimates bit-identical for any
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import analytic
from .model import (LINKS, LinkVariances, Powers, SystemParams, Topology,
                    link_variances, secondary_power)

CHUNK = 1 << 15

_COL = {k: i for i, k in enumerate(LINKS)}


class SchemePolicy(Enum):
    DIRECT = "direct"  # always D0
    PRIMARY_ONLY = "primary-only"  # D1 whenever decodable and feasible
    SECONDARY_ONLY = "secondary-only"  # D2 whenever decodable
    ADAPTIVE1 = "adaptive1"
    ADAPTIVE2 = "adaptive2"


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    trials: int
    half_width_95: float
    decision_freq: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ResolvedSystem:
    """Powers and link statistics resolved once per (params, topology)."""

    params: SystemParams
    topology: Topology
    variances: LinkVariances
    powers: Powers


def resolve_system(params: SystemParams, topology: Topology,
                   scheme2: bool = False,
                   alpha_seed: int = 0x5EED) -> ResolvedSystem:
    """Resolve gamma_s and the per-mode relay powers for a topology."""
    variances = link_variances(topology, params.pathloss_exponent)
    gamma_s = secondary_power(params, variances)
    lam_p = params.lambda_primary
    eps = params.outage_threshold
    g_pp = params.snr_primary * variances.pp
    g_sp = gamma_s * variances.sp
    gamma_r_p = analytic.relay_power_D1(g_pp, g_sp, variances.rp, lam_p, eps,
                                        params.snr_relay_max)
    gamma_r_s = analytic.relay_power_D2_exact(
        params.snr_primary, gamma_s, variances, lam_p, eps,
        params.snr_relay_max)
    alpha = None
    gamma_r_ps = params.snr_relay_max
    if scheme2 and gamma_s > 0.0:
        alpha = analytic.solve_power_split(
            params.snr_primary, gamma_s, gamma_r_ps, variances, lam_p, eps,
            seed=alpha_seed)
    powers = Powers(gamma_s=gamma_s, gamma_r_p=gamma_r_p,
                    gamma_r_s=gamma_r_s, gamma_r_ps=gamma_r_ps, alpha=alpha)
    return ResolvedSystem(params, topology, variances, powers)


# ---------------------------------------------------------------------------
# vectorized per-chunk kernel


def _chunk_gains(variances: LinkVariances, seed: int, chunk: int,
                 m: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    rng = np.random.Generator(np.random.Philox(ss))
    u = rng.random((m, len(LINKS)))
    return -variances.as_array() * np.log1p(-u)


def _decide_and_sinr(system: ResolvedSystem, policy: SchemePolicy,
                     gains: np.ndarray):
    """Vectorized decisions and MRC SINRs for a block of draws.

    Returns (d, sinr_p, sinr_s) arrays; mirrors decision.decide_scheme1/
    decide_scheme2/sinr_pair element-for-element.
    """
    params, powers = system.params, system.powers
    gp = params.snr_primary
    gs = powers.gamma_s
    lam_p = params.lambda_primary
    lam_s = params.lambda_secondary
    g = {k: gains[:, _COL[k]] for k in LINKS}

    d1_feasible = powers.gamma_r_p is not None
    g_r_p = powers.gamma_r_p if d1_feasible else 0.0
    g_r_s = powers.gamma_r_s

    sig_p = gp * g["pr"]
    sig_s = gs * g["sr"]
    a_p_ev = sig_p >= lam_p * (sig_s + 1.0)
    a_s_ev = sig_s >= lam_s * (sig_p + 1.0)

    den_ps = gp * g["ps"] + 1.0
    a0 = gs * g["ss"] / den_ps
    ap = gs * g["ss"] / (g_r_p * g["rs"] + 1.0)
    a_s = g_r_s * g["rs"] / den_ps

    n = gains.shape[0]
    d = np.zeros(n, dtype=np.int8)

    if policy == SchemePolicy.DIRECT:
        pass
    elif policy == SchemePolicy.PRIMARY_ONLY:
        if d1_feasible:
            d[a_p_ev] = 1
    elif policy == SchemePolicy.SECONDARY_ONLY:
        d[a_s_ev] = 2
    elif policy == SchemePolicy.ADAPTIVE1:
        best_p = (ap >= a_s) & (ap >= a0)
        best_s = (a_s > ap) & (a_s >= a0)
        want1 = a_p_ev & ((~a_s_ev & (ap > a0)) | (a_s_ev & best_p))
        want2 = a_s_ev & ((~a_p_ev & (a_s > a0)) | (a_p_ev & best_s)) & ~want1
        if d1_feasible:
            d[want1] = 1
        d[want2] = 2
    elif policy == SchemePolicy.ADAPTIVE2:
        b_p_ev = sig_p >= lam_p
        b_s_ev = sig_s >= lam_s
        e = (a_p_ev & b_s_ev) | (a_s_ev & b_p_ev)
        d3_feasible = powers.alpha is not None
        if d3_feasible:
            alpha = powers.alpha
            rel = powers.gamma_r_ps * g["rs"]
            a_ps = (1.0 - alpha) * rel / (alpha * rel + 1.0)
        else:
            a_ps = np.zeros(n)
        c_p = (ap >= a_s) & (ap >= a_ps) & (ap >= a0)
        c_s = (a_s > ap) & (a_s >= a_ps) & (a_s >= a0)
        c_ps = (a_ps > ap) & (a_ps > a_s) & (a_ps >= a0) if d3_feasible \
            else np.zeros(n, dtype=bool)
        want3 = e & c_ps
        want2 = ((a_s_ev & ~b_p_ev & (a_s > a0)) | (e & c_s)) & ~want3
        want1 = ((a_p_ev & ~b_s_ev & (ap > a0)) | (e & c_p)) & ~want3 & ~want2
        d[want3] = 3
        d[want2] = 2
        if d1_feasible:
            d[want1] = 1
    else:
        raise ValueError(f"unknown policy {policy!r}")

    int_sp = gs * g["sp"] + 1.0
    first_p = gp * g["pp"] / int_sp
    sinr_p = 2.0 * first_p
    sinr_s = 2.0 * a0
    m1 = d == 1
    if m1.any():
        sinr_p = np.where(m1, first_p + g_r_p * g["rp"] / int_sp, sinr_p)
        sinr_s = np.where(m1, a0 + ap, sinr_s)
    m2 = d == 2
    if m2.any():
        sinr_p = np.where(m2, first_p + gp * g["pp"] / (g_r_s * g["rp"] + 1.0),
                          sinr_p)
        sinr_s = np.where(m2, a0 + a_s, sinr_s)
    m3 = d == 3
    if m3.any():
        alpha = powers.alpha
        rel_p = powers.gamma_r_ps * g["rp"]
        rel = powers.gamma_r_ps * g["rs"]
        a_ps_v = (1.0 - alpha) * rel / (alpha * rel + 1.0)
        sinr_p = np.where(
            m3, first_p + alpha * rel_p / ((1.0 - alpha) * rel_p + 1.0),
            sinr_p)
        sinr_s = np.where(m3, a0 + a_ps_v, sinr_s)
    return d, sinr_p, sinr_s


def _chunk_counts(system: ResolvedSystem, policy: SchemePolicy, seed: int,
                  chunk: int, m: int) -> np.ndarray:
    gains = _chunk_gains(system.variances, seed, chunk, m)
    d, sinr_p, sinr_s = _decide_and_sinr(system, policy, gains)
    lam_p = system.params.lambda_primary
    lam_s = system.params.lambda_secondary
    counts = np.zeros(6, dtype=np.int64)
    counts[0] = int(np.count_nonzero(sinr_p < lam_p))
    counts[1] = int(np.count_nonzero(sinr_s < lam_s))
    counts[2:6] = np.bincount(d, minlength=4)
    return counts


def _half_width(p_hat: float, trials: int) -> float:
    return 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / trials)


def estimate_outage(system: ResolvedSystem, policy: SchemePolicy,
                    n_trials: int, seed: int,
                    workers: int = 1) -> tuple[OutageEstimate, OutageEstimate]:
    """Estimate (primary, secondary) outage probabilities for a policy.

    Results are bit-identical for a given seed regardless of the worker
    count.  A silenced secondary (gamma_s = 0) short-circuits the
    secondary estimate to exactly 1.0.
    """
    if n_trials <= 0:
        raise ValueError("n_trials must be positive")
    chunks = [(c, min(CHUNK, n_trials - c * CHUNK))
              for c in range((n_trials + CHUNK - 1) // CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda cm: _chunk_counts(system, policy, seed, cm[0], cm[1]),
                chunks))
    else:
        parts = [_chunk_counts(system, policy, seed, c, m) for c, m in chunks]
    totals = [int(t) for t in np.sum(parts, axis=0)]
    freq = {i: totals[2 + i] / n_trials for i in range(4)}
    p_pri = totals[0] / n_trials
    primary = OutageEstimate(p_pri, n_trials, _half_width(p_pri, n_trials),
                             freq)
    if system.powers.gamma_s == 0.0:
        secondary = OutageEstimate(1.0, n_trials, 0.0, freq)
    else:
        p_sec = totals[1] / n_trials
        secondary = OutageEstimate(p_sec, n_trials,
                                   _half_width(p_sec, n_trials), freq)
    return primary, secondary


def estimate_conditional_outage(system: ResolvedSystem, policy: SchemePolicy,
                                decision: int, n_trials: int, seed: int,
                                min_accepted: int = 10_000
                                ) -> tuple[Optional[OutageEstimate],
                                           Optional[OutageEstimate]]:
    """Rejection estimate of the per-mode conditional outages.

    Returns (None, None) when fewer than min_accepted trials land on the
    requested decision, rather than a noisy estimate.
    """
    accepted = 0
    n_out_p = 0
    n_out_s = 0
    lam_p = system.params.lambda_primary
    lam_s = system.params.lambda_secondary
    for c in range((n_trials + CHUNK - 1) // CHUNK):
        m = min(CHUNK, n_trials - c * CHUNK)
        gains = _chunk_gains(system.variances, seed, c, m)
        d, sinr_p, sinr_s = _decide_and_sinr(system, policy, gains)
        mask = d == decision
        accepted += int(np.count_nonzero(mask))
        n_out_p += int(np.count_nonzero(sinr_p[mask] < lam_p))
        n_out_s += int(np.count_nonzero(sinr_s[mask] < lam_s))
    if accepted < min_accepted:
        return None, None
    p_p = n_out_p / accepted
    p_s = n_out_s / accepted
    return (OutageEstimate(p_p, accepted, _half_width(p_p, accepted)),
            OutageEstimate(p_s, accepted, _half_width(p_s, accepted)))


def primary_constraint_check(system: ResolvedSystem, policy: SchemePolicy,
                             n_trials: int, seed: int) -> dict:
    """Report whether the simulated primary outage respects the threshold.

    The constraint applies only while the secondary transmits; callers
    decide severity of a violation.
    """
    primary, _ = estimate_outage(system, policy, n_trials, seed)
    eps = system.params.outage_threshold
    active = system.powers.gamma_s > 0.0
    limit = eps + 3.0 * primary.half_width_95
    return {
        "policy": policy.value,
        "secondary_active": active,
        "primary_outage": primary.p_hat,
        "half_width_95": primary.half_width_95,
        "threshold": eps,
        "satisfied": (not active) or primary.p_hat <= limit,
    }


def empirical_pdf(g_num: float, g_den: float, n: int, bins: int,
                  seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Normalized histogram of the quotient X = num/(den+1).

    Suitable for chi-square comparison against analytic.quotient_pdf;
    the density integrates to 1 over the sampled range.
    """
    if n < 100_000:
        raise ValueError("need at least 1e5 samples for a stable histogram")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    num = rng.exponential(g_num, n)
    den = rng.exponential(g_den, n) if g_den > 0 else np.zeros(n)
    x = num / (den + 1.0)
    density, edges = np.histogram(x, bins=bins, density=True)
    return edges, density


def average_over_positions(params: SystemParams, topology: Topology,
                           policy: SchemePolicy, n_positions: int,
                           n_trials: int, seed: int,
                           region: tuple[float, float, float, float] =
                           (0.1, 0.9, 0.1, 1.7),
                           scheme2: Optional[bool] = None
                           ) -> tuple[OutageEstimate, OutageEstimate]:
    """Average outage over uniform random relay positions in a region.

    Each position gets its own sub-seed; outage probabilities (not dB)
    are averaged and the half-widths combined as independent estimates.
    """
    if scheme2 is None:
        scheme2 = policy == SchemePolicy.ADAPTIVE2
    x0, x1, y0, y1 = region
    pos_rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0xB0A7,))))
    pris, secs = [], []
    freq = np.zeros(4)
    for k in range(n_positions):
        relay = (float(pos_rng.uniform(x0, x1)), float(pos_rng.uniform(y0, y1)))
        system = resolve_system(params, topology.with_relay(relay),
                                scheme2=scheme2)
        pri, sec = estimate_outage(system, policy, n_trials,
                                   seed=_subseed(seed, k))
        pris.append(pri)
        secs.append(sec)
        for i in range(4):
            freq[i] += sec.decision_freq[i]
    freq /= n_positions

    def combine(parts: list[OutageEstimate]) -> OutageEstimate:
        p = sum(e.p_hat for e in parts) / len(parts)
        hw = math.sqrt(sum(e.half_width_95 ** 2 for e in parts)) / len(parts)
        return OutageEstimate(p, n_trials * len(parts), hw,
                              {i: float(freq[i]) for i in range(4)})

    return combine(pris), combine(secs)


def _subseed(seed: int, k: int) -> int:
    # distinct deterministic stream per relay position
    return int(np.random.SeedSequence(seed, spawn_key=(0x9051, k))
               .generate_state(1)[0])
