"""System parameters, topology, per-link statistics and channel sampling.

Conventions used throughout the package:

* all powers are SNRs (power over noise density), stored linear;
* a link label ``ab`` means "transmitter of system a -> receiver of
  system b", e.g. ``sp`` is the secondary transmitter seen at the
  primary destination;
* channel gains are squared magnitudes, exponentially distributed with
  mean equal to the link variance ``d**(-beta)``.

dB values are converted to linear exactly once, at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

# fixed link order shared with the vectorized Monte Carlo kernel
LINKS = ("pp", "ps", "pr", "sp", "ss", "sr", "rp", "rs")

# (transmitter node, receiver node) per link
_LINK_NODES = {
    "pp": ("pt", "pd"),
    "ps": ("pt", "sd"),
    "pr": ("pt", "relay"),
    "sp": ("st", "pd"),
    "ss": ("st", "sd"),
    "sr": ("st", "relay"),
    "rp": ("relay", "pd"),
    "rs": ("relay", "sd"),
}


@dataclass(frozen=True)
class SystemParams:
    """Rates, outage threshold and transmit SNR budget (all linear)."""

    rate_primary: float  # bits/s/Hz
    rate_secondary: float  # bits/s/Hz
    outage_threshold: float  # primary outage probability cap, in (0,1)
    snr_primary: float  # linear
    snr_relay_max: float  # linear
    pathloss_exponent: float

    def __post_init__(self):
        if not (0.0 < self.outage_threshold < 1.0):
            raise ValueError("outage_threshold must lie in (0,1)")
        if self.rate_primary <= 0 or self.rate_secondary <= 0:
            raise ValueError("rates must be positive")
        if self.pathloss_exponent <= 0:
            raise ValueError("pathloss_exponent must be positive")
        if self.snr_primary < 0 or self.snr_relay_max < 0:
            raise ValueError("SNRs must be nonnegative")

    @property
    def lambda_primary(self) -> float:
        return lambda_threshold(self.rate_primary)

    @property
    def lambda_secondary(self) -> float:
        return lambda_threshold(self.rate_secondary)


@dataclass(frozen=True)
class Topology:
    """2-D node coordinates, in distance units."""

    pt: tuple[float, float]
    st: tuple[float, float]
    pd: tuple[float, float]
    sd: tuple[float, float]
    relay: tuple[float, float]

    def __post_init__(self):
        nodes = {"pt": self.pt, "st": self.st, "pd": self.pd,
                 "sd": self.sd, "relay": self.relay}
        names = list(nodes)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if _dist(nodes[a], nodes[b]) == 0.0:
                    raise ValueError(f"coincident nodes: {a} and {b}")

    def node(self, name: str) -> tuple[float, float]:
        return getattr(self, name)

    def with_relay(self, relay: tuple[float, float]) -> "Topology":
        return Topology(self.pt, self.st, self.pd, self.sd, relay)


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class LinkVariances:
    """Per-link Rayleigh variances sigma_ab^2 = d_ab^(-beta)."""

    pp: float
    ps: float
    pr: float
    sp: float
    ss: float
    sr: float
    rp: float
    rs: float

    def __post_init__(self):
        if any(getattr(self, k) <= 0 for k in LINKS):
            raise ValueError("all link variances must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in LINKS])


@dataclass(frozen=True)
class ChannelDraw:
    """One realization of all eight squared channel magnitudes.

    Channels are block-static over a time-slot: the same draw is used
    for both sub-slots.
    """

    pp: float
    ps: float
    pr: float
    sp: float
    ss: float
    sr: float
    rp: float
    rs: float

    def __post_init__(self):
        if any(getattr(self, k) < 0 for k in LINKS):
            raise ValueError("channel gains must be nonnegative")


@dataclass(frozen=True)
class Powers:
    """Resolved transmit SNRs for one (params, topology) pair.

    ``gamma_r_p`` is None when assisting the primary is infeasible
    (required relay power exceeds the budget); ``alpha`` is None when
    the simultaneous-assist power split cannot meet the primary outage
    threshold (scheme 2 only).
    """

    gamma_s: float
    gamma_r_p: Optional[float] = None
    gamma_r_s: float = 0.0
    gamma_r_ps: float = 0.0
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.gamma_s < 0:
            raise ValueError("gamma_s must be nonnegative")
        if self.gamma_r_p is not None and self.gamma_r_p < 0:
            raise ValueError("gamma_r_p must be nonnegative")
        if self.gamma_r_s < 0 or self.gamma_r_ps < 0:
            raise ValueError("relay SNRs must be nonnegative")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0,1]")


def lambda_threshold(rate: float) -> float:
    """SINR threshold 2**(2R) - 1 for rate R over the two sub-slots."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    return 2.0 ** (2.0 * rate) - 1.0


def link_variances(topology: Topology, beta: float) -> LinkVariances:
    """Map every transmitter-receiver link to d**(-beta)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    values = {}
    for link, (a, b) in _LINK_NODES.items():
        d = _dist(topology.node(a), topology.node(b))
        if d == 0.0:
            raise ValueError(f"coincident nodes for link {link}")
        values[link] = d ** (-beta)
    return LinkVariances(**values)


def secondary_power(params: SystemParams, variances: LinkVariances) -> float:
    """Secondary transmit SNR that keeps repetition-mode primary outage at
    the threshold; 0 when even a silent secondary cannot meet it."""
    lam_p = params.lambda_primary
    g_pp = params.snr_primary * variances.pp
    if g_pp == 0.0:
        return 0.0
    rho = math.exp(-lam_p / (2.0 * g_pp)) / (1.0 - params.outage_threshold) - 1.0
    if rho <= 0.0:
        return 0.0
    return 2.0 * params.snr_primary * variances.pp * rho / (lam_p * variances.sp)


def snr_cutoff_primary(params: SystemParams, variances: LinkVariances) -> float:
    """Primary SNR below which the secondary is silenced (root of rho=0)."""
    lam_p = params.lambda_primary
    return lam_p / (2.0 * variances.pp *
                    math.log(1.0 / (1.0 - params.outage_threshold)))


def rate_cutoff_primary(params: SystemParams, variances: LinkVariances) -> float:
    """Primary rate beyond which the secondary is silenced at fixed SNR."""
    lam_max = 2.0 * params.snr_primary * variances.pp * \
        math.log(1.0 / (1.0 - params.outage_threshold))
    return 0.5 * math.log2(1.0 + lam_max)


def sample_channels(rng: np.random.Generator,
                    variances: LinkVariances) -> ChannelDraw:
    """Draw one realization of all eight gains (inverse-CDF transform)."""
    u = rng.random(len(LINKS))
    gains = -variances.as_array() * np.log1p(-u)
    return ChannelDraw(**{k: float(g) for k, g in zip(LINKS, gains)})


def sample_gain_matrix(rng: np.random.Generator, variances: LinkVariances,
                       n: int) -> np.ndarray:
    """Vectorized channel sampling: shape (n, 8), columns in LINKS order.

    Row i uses the same uniform-to-exponential transform as
    sample_channels, so scalar and vectorized paths agree draw-for-draw.
    """
    u = rng.random((n, len(LINKS)))
    return -variances.as_array() * np.log1p(-u)
