"""Closed-form outage probabilities, bounds and relay-power solvers.

Effective SNR notation: ``g_ab = gamma_a * sigma_ab**2`` is the mean of
the exponential variable ``gamma_a |h_ab|**2``.  All probabilities are
computed in the linear domain with double precision and clamped to
[0,1] where the printed expressions are bounds.

The conditional primary outage under D=1 (lambda_1 + lambda_2 below) is
exact; its second term is implemented with the sign that follows from
the convolution derivation, which Monte Carlo confirms (the printed
numerator is negated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import LinkVariances, Powers, SystemParams

_EULER_GAMMA = 0.57721566490153286060651209008240243

# bisection controls for the relay-power and power-split solvers
_BISECT_MAX_ITER = 200
_BISECT_REL_TOL = 1e-6


# ---------------------------------------------------------------------------
# special function: exponential integral on the negative axis


def exp_integral(x: float) -> float:
    """Exponential integral Ei(x) = int_{-inf}^{x} e^t / t dt for x < 0.

    Power series around 0 for |x| <= 6, continued fraction beyond;
    accurate to ~1e-13 relative over the range used by the bounds.
    """
    if x >= 0:
        raise ValueError("exp_integral is defined here for x < 0 only")
    z = -x
    if z <= 6.0:
        # Ei(x) = gamma + ln|x| + sum_k x^k / (k * k!)
        total = _EULER_GAMMA + math.log(z)
        term = 1.0
        for k in range(1, 200):
            term *= x / k
            contrib = term / k
            total += contrib
            if abs(contrib) < 1e-18 * max(1.0, abs(total)):
                break
        return total
    return -math.exp(-z) * _e1_scaled_cf(z)


def exp_integral_neg_scaled(t: float) -> float:
    """Overflow-safe product -Ei(-t) * e^t for t > 0.

    Used where the bounds multiply the exponential integral by a large
    exponential (e.g. small g_ps in the D=1 occurrence bound).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if t <= 6.0:
        return -exp_integral(-t) * math.exp(t)
    return _e1_scaled_cf(t)


def _e1_scaled_cf(z: float) -> float:
    """e^z * E1(z) by modified Lentz continued fraction, z > 1."""
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for k in range(1, 400):
        a = -k * k
        b += 2.0
        d = 1.0 / (b + a * d)
        c = b + a / c
        if c == 0.0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return f


# ---------------------------------------------------------------------------
# effective SNRs


@dataclass(frozen=True)
class EffectiveSnrs:
    """gamma_a * sigma_ab^2 for every link used by the closed forms."""

    pp: float
    ps: float
    pr: float
    sp: float
    ss: float
    sr: float
    rp_p: float  # relay->PD when assisting the primary
    rs_p: float  # relay->SD when assisting the primary
    rp_s: float  # relay->PD when assisting the secondary
    rs_s: float  # relay->SD when assisting the secondary

    @classmethod
    def from_system(cls, params: SystemParams, variances: LinkVariances,
                    powers: Powers) -> "EffectiveSnrs":
        gp = params.snr_primary
        gs = powers.gamma_s
        g_r_p = powers.gamma_r_p if powers.gamma_r_p is not None else 0.0
        g_r_s = powers.gamma_r_s
        return cls(
            pp=gp * variances.pp, ps=gp * variances.ps, pr=gp * variances.pr,
            sp=gs * variances.sp, ss=gs * variances.ss, sr=gs * variances.sr,
            rp_p=g_r_p * variances.rp, rs_p=g_r_p * variances.rs,
            rp_s=g_r_s * variances.rp, rs_s=g_r_s * variances.rs,
        )


# ---------------------------------------------------------------------------
# helper distributions


def quotient_pdf(x: float, g_num: float, g_den: float) -> float:
    """pdf of X = gamma_a|h_a|^2 / (gamma_b|h_b|^2 + 1) at x >= 0."""
    if x < 0:
        return 0.0
    if g_num <= 0:
        raise ValueError("g_num must be positive")
    den = g_num + x * g_den
    return math.exp(-x / g_num) / den * (1.0 + g_num * g_den / den)


def quotient_cdf(x: float, g_num: float, g_den: float) -> float:
    """cdf of the same quotient: 1 - g_num e^{-x/g_num}/(g_num + x g_den)."""
    if x <= 0:
        return 0.0
    return 1.0 - g_num * math.exp(-x / g_num) / (g_num + x * g_den)


def cond_outage_D0(g_direct: float, g_interferer: float, lam: float) -> float:
    """Outage of a repeated direct link under MRC doubling: P(2X < lam)."""
    if lam <= 0:
        return 0.0
    if g_direct == 0.0:
        return 1.0
    return quotient_cdf(lam / 2.0, g_direct, g_interferer)


# ---------------------------------------------------------------------------
# conditional outage under D=1 (and its p<->s mirror under D=2)


def cond_primary_outage_D1(g_pp: float, g_sp: float, g_rp: float,
                           lam_p: float) -> float:
    """Exact P(SINR_p(D=1) < lam_p) for the MRC-combined primary link.

    Continuous across the removable singularity g_rp == g_pp (the limit
    form is used when the relative difference is below 1e-6).
    """
    if lam_p <= 0:
        return 0.0
    if g_pp == 0.0:
        if g_rp == 0.0:
            return 1.0
        return quotient_cdf(lam_p, g_rp, g_sp)
    b1 = g_pp + lam_p * g_sp
    if g_rp == 0.0:
        return (lam_p * g_sp + g_pp * (1.0 - math.exp(-lam_p / g_pp))) / b1
    b2 = g_rp + lam_p * g_sp
    lam1 = (g_sp ** 2 * lam_p ** 2 +
            g_rp * g_sp * lam_p * (1.0 - math.exp(-lam_p / g_rp))) / (b1 * b2)
    if abs(g_rp - g_pp) < 1e-6 * g_pp:
        # L'Hopital limit of lam2 in g_rp at g_rp = g_pp
        e = math.exp(-lam_p / g_pp)
        lam2 = g_pp * ((1.0 - e) - (lam_p / g_pp) * e) / b1
    else:
        lam2 = (g_rp * g_pp * (1.0 - math.exp(-lam_p / g_rp)) -
                g_pp ** 2 * (1.0 - math.exp(-lam_p / g_pp))) / \
            (b1 * (g_rp - g_pp))
    return min(1.0, max(0.0, lam1 + lam2))


def _phi_factor(g_dir: float, g_int: float, lam: float) -> float:
    """1 - e^{-lam/g_dir} (1 + ln(1 + lam g_int/g_dir)/g_int)."""
    if lam <= 0:
        return 0.0
    if g_dir == 0.0:
        return 1.0
    if g_int < 1e-12:
        bracket = 1.0 + lam / g_dir
    else:
        bracket = 1.0 + math.log1p(lam * g_int / g_dir) / g_int
    return 1.0 - math.exp(-lam / g_dir) * bracket


def cond_secondary_outage_D1_upper(g_ss: float, g_ps: float, g_rs: float,
                                   lam_s: float) -> float:
    """Upper bound phi * (g_rs + 1) on the secondary outage under D=1.

    Bounds the sum-outage probability of the two quotient SINR terms as
    evaluated in its derivation (independent draws); clamped to [0,1].
    """
    return min(1.0, max(0.0, _phi_factor(g_ss, g_ps, lam_s) * (g_rs + 1.0)))


# ---------------------------------------------------------------------------
# occurrence probabilities of the relaying modes (scheme 1)


def prob_ap_gt_as_upper(g_ps: float, g_ss: float, g_rs_s: float) -> float:
    """Upper bound on P(a_p > a_s) via the exponential integral.

    Bounding the quotient-pdf integrand at y=0 and integrating the
    remaining exponential/linear kernel gives
    (1 + g_ps)/g_ps * e^t E1(t) with t = (1 + g_rs_s/g_ss)/g_ps; the
    1/g_ps factor comes from the kernel integral (the direct-link mean
    cancels out of the prefactor).
    """
    if g_ps <= 0 or g_ss <= 0:
        raise ValueError("g_ps and g_ss must be positive")
    t = 1.0 / g_ps + g_rs_s / (g_ss * g_ps)
    val = exp_integral_neg_scaled(t) * (1.0 + g_ps) / g_ps
    return min(1.0, max(0.0, val))


def prob_decision1_upper(snrs: EffectiveSnrs, lam_p: float,
                         lam_s: float) -> float:
    """Upper bound on P(D=1) under scheme 1, as printed.

    The joint-decode exponential factors carry (1 - lam_p lam_s)
    denominators; when lam_p lam_s >= 1 the joint no-SIC decoding
    region is empty and those factors are taken at their 0 limit.
    """
    if snrs.pr == 0.0 or snrs.ss == 0.0:
        return 0.0
    pref = _safe_ratio(snrs.ps, snrs.ps + snrs.rs_p)
    prod = lam_p * lam_s
    if prod < 1.0 and snrs.sr > 0.0:
        e_joint_s = math.exp(-lam_s * (1.0 + lam_p) / ((1.0 - prod) * snrs.sr))
    else:
        e_joint_s = 0.0
    if prod < 1.0:
        e_joint_p = math.exp(-lam_p * (1.0 + lam_s) / ((1.0 - prod) * snrs.pr))
    else:
        e_joint_p = 0.0
    t1 = pref * snrs.pr * math.exp(-lam_p / snrs.pr) * e_joint_s / \
        (snrs.pr + lam_p * snrs.sr)
    if snrs.sr > 0.0:
        as_marg = snrs.sr * math.exp(-lam_s / snrs.sr) / \
            (snrs.sr + lam_s * snrs.pr)
    else:
        as_marg = 0.0
    t2 = pref * (1.0 - as_marg) * (1.0 - e_joint_s)
    t3 = prob_ap_gt_as_upper(snrs.ps, snrs.ss, snrs.rs_s) * pref * \
        as_marg * e_joint_p
    return min(1.0, max(0.0, t1 + t2 + t3))


def prob_decision2_upper(snrs: EffectiveSnrs, lam_p: float,
                         lam_s: float) -> float:
    """Upper bound on P(D=2): the role-swapped occurrence bound.

    Mirrors the D=1 derivation with primary and secondary exchanged;
    P(a_s > a_p) is bounded by 1 (no printed closed form exists for it).
    Note P(a_s > a_0) compares the shared-denominator metrics, giving
    the prefactor g_rs_s / (g_rs_s + g_ss).
    """
    if snrs.sr == 0.0 or snrs.rs_s == 0.0:
        return 0.0
    pref = _safe_ratio(snrs.rs_s, snrs.rs_s + snrs.ss)
    prod = lam_p * lam_s
    if prod < 1.0 and snrs.pr > 0.0:
        e_joint_p = math.exp(-lam_p * (1.0 + lam_s) / ((1.0 - prod) * snrs.pr))
    else:
        e_joint_p = 0.0
    if prod < 1.0:
        e_joint_s = math.exp(-lam_s * (1.0 + lam_p) / ((1.0 - prod) * snrs.sr))
    else:
        e_joint_s = 0.0
    t1 = pref * snrs.sr * math.exp(-lam_s / snrs.sr) * e_joint_p / \
        (snrs.sr + lam_s * snrs.pr)
    if snrs.pr > 0.0:
        ap_marg = snrs.pr * math.exp(-lam_p / snrs.pr) / \
            (snrs.pr + lam_p * snrs.sr)
    else:
        ap_marg = 0.0
    t2 = pref * (1.0 - ap_marg) * (1.0 - e_joint_p)
    t3 = pref * ap_marg * e_joint_s
    return min(1.0, max(0.0, t1 + t2 + t3))


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 0.0 else 1.0


# ---------------------------------------------------------------------------
# relay power solvers


def relay_power_D1(g_pp: float, g_sp: float, sigma_rp2: float, lam_p: float,
                   eps: float, gamma_r_max: float) -> Optional[float]:
    """Smallest relay SNR keeping the exact D=1 primary outage <= eps.

    Bisection on [0, gamma_r_max]; outage is monotone non-increasing in
    the relay power.  Returns None when even the full budget misses the
    threshold (the caller maps this to D=0).
    """
    def outage(gamma_r: float) -> float:
        return cond_primary_outage_D1(g_pp, g_sp, gamma_r * sigma_rp2, lam_p)

    if outage(0.0) <= eps:
        return 0.0
    if outage(gamma_r_max) > eps:
        return None
    lo, hi = 0.0, gamma_r_max
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_REL_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if outage(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def relay_power_D2(g_pp: float, g_sp: float, sigma_rp2: float, lam_p: float,
                   eps: float, gamma_r_max: float) -> float:
    """Relay SNR for assisting the secondary: (eps/phi' - 1)/sigma_rp^2.

    Clamped below at 0 (eps <= phi': even zero relay interference already
    violates the bound, and less power only protects the primary) and
    above at gamma_r_max.
    """
    phi_prime = _phi_factor(g_pp, g_sp, lam_p)
    if phi_prime <= 0.0:
        return gamma_r_max
    raw = (eps / phi_prime - 1.0) / sigma_rp2
    return min(max(raw, 0.0), gamma_r_max)


def relay_power_D2_exact(snr_primary: float, gamma_s: float,
                         variances: LinkVariances, lam_p: float, eps: float,
                         gamma_r_max: float, n_draws: int = 200_000,
                         seed: int = 0x0D2) -> float:
    """Largest relay SNR keeping the exact D=2 primary outage <= eps.

    The phi'-based closed form bounds the outage of an independent-draw
    surrogate, not the true combined SINR (both sub-slot terms share the
    direct-link gain), and can badly under-protect the primary.  Here the
    outage is evaluated semi-analytically -- exactly over the direct gain,
    Monte Carlo (fixed internal seed) over the two interference gains --
    and inverted by bisection.
    """
    if lam_p == 0.0:
        return gamma_r_max  # primary never in outage
    if variances.pp == 0.0:
        return 0.0  # primary always in outage; add no interference
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    h_sp = rng.exponential(variances.sp, n_draws)
    h_rp = rng.exponential(variances.rp, n_draws)
    scale = lam_p / (snr_primary * variances.pp)
    u1 = 1.0 / (gamma_s * h_sp + 1.0)

    def outage(gamma_r: float) -> float:
        u2 = 1.0 / (gamma_r * h_rp + 1.0)
        return float(np.mean(-np.expm1(-scale / (u1 + u2))))

    if outage(gamma_r_max) <= eps:
        return gamma_r_max
    if outage(0.0) > eps:
        return 0.0
    lo, hi = 0.0, gamma_r_max
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_REL_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if outage(mid) <= eps:
            lo = mid
        else:
            hi = mid
    return lo


def solve_power_split(snr_primary: float, gamma_s: float, gamma_r_ps: float,
                      variances: LinkVariances, lam_p: float, eps: float,
                      n_draws: int = 100_000,
                      seed: int = 0x5EED) -> Optional[float]:
    """Smallest power split alpha in [0,1] meeting the primary threshold.

    The D=3 primary outage has no internal closed form, so the solver
    bisects on a Monte Carlo estimate computed from a fixed internal
    draw set (isolated generator; the same draws are reused across all
    alpha evaluations, which makes the estimate monotone in alpha).
    Returns None when even alpha=1 exceeds the threshold.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    h_pp = rng.exponential(variances.pp, n_draws)
    h_sp = rng.exponential(variances.sp, n_draws)
    h_rp = rng.exponential(variances.rp, n_draws)
    first = snr_primary * h_pp / (gamma_s * h_sp + 1.0)
    rel = gamma_r_ps * h_rp

    def outage(alpha: float) -> float:
        boost = alpha * rel / ((1.0 - alpha) * rel + 1.0)
        return float(np.mean(first + boost < lam_p))

    if outage(1.0) > eps:
        return None
    if outage(0.0) <= eps:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_REL_TOL:
            break
        mid = 0.5 * (lo + hi)
        if outage(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# total outage (weighted combination over the relaying modes)


@dataclass(frozen=True)
class OutageBreakdown:
    """Occurrence probabilities and conditional outages per mode."""

    p_d: tuple[float, float, float]  # P(D=0), P(D=1), P(D=2)
    cond_primary: tuple[float, float, float]
    cond_secondary: tuple[float, float, float]
    total_primary: float
    total_secondary: float


def total_outage_upper(weights: Sequence[float], cond_primary: Sequence[float],
                       cond_secondary: Sequence[float]) -> tuple[float, float]:
    """Weighted total outage: sum_i P(D=i) * P_c(out.|D=i), clamped."""
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("mode probabilities must sum to 1")
    if any(w < 0 for w in weights):
        raise ValueError("mode probabilities must be nonnegative")
    for conds in (cond_primary, cond_secondary):
        if any(not 0.0 <= c <= 1.0 for c in conds):
            raise ValueError("conditional outages must lie in [0,1]")
    tot_p = sum(w * c for w, c in zip(weights, cond_primary))
    tot_s = sum(w * c for w, c in zip(weights, cond_secondary))
    return min(1.0, max(0.0, tot_p)), min(1.0, max(0.0, tot_s))


def outage_breakdown_scheme1(params: SystemParams, variances: LinkVariances,
                             powers: Powers) -> OutageBreakdown:
    """Analytic scheme-1 outage bound: occurrence bounds for D=1 and D=2,
    the remainder assigned to D=0, combined with the per-mode
    conditional outages."""
    lam_p = params.lambda_primary
    lam_s = params.lambda_secondary
    g = EffectiveSnrs.from_system(params, variances, powers)
    if powers.gamma_s == 0.0:
        # silenced secondary: pure repetition, secondary always in outage
        c0p = cond_outage_D0(g.pp, 0.0, lam_p)
        return OutageBreakdown(
            p_d=(1.0, 0.0, 0.0),
            cond_primary=(c0p, 0.0, 0.0),
            cond_secondary=(1.0, 1.0, 1.0),
            total_primary=c0p, total_secondary=1.0)
    p1 = prob_decision1_upper(g, lam_p, lam_s) \
        if powers.gamma_r_p is not None else 0.0
    p2 = prob_decision2_upper(g, lam_p, lam_s)
    if p1 + p2 > 1.0:
        # occurrence bounds may overshoot jointly; renormalize so the
        # weights remain a distribution
        scale = 1.0 / (p1 + p2)
        p1 *= scale
        p2 *= scale
    p0 = max(0.0, 1.0 - p1 - p2)
    cond_p = (
        cond_outage_D0(g.pp, g.sp, lam_p),
        cond_primary_outage_D1(g.pp, g.sp, g.rp_p, lam_p),
        cond_secondary_outage_D1_upper(g.pp, g.sp, g.rp_s, lam_p),
    )
    cond_s = (
        cond_outage_D0(g.ss, g.ps, lam_s),
        cond_secondary_outage_D1_upper(g.ss, g.ps, g.rs_p, lam_s),
        cond_primary_outage_D1(g.ss, g.ps, g.rs_s, lam_s),
    )
    tot_p, tot_s = total_outage_upper((p0, p1, p2), cond_p, cond_s)
    return OutageBreakdown(p_d=(p0, p1, p2), cond_primary=cond_p,
                           cond_secondary=cond_s,
                           total_primary=tot_p, total_secondary=tot_s)
