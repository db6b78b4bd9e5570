"""Command-line experiment harness.

Emits plot-ready CSV for SNR sweeps, rate sweeps and relay-position
grids, plus a `validate` command that cross-checks the closed-form
expressions against Monte Carlo. Floats are written with repr() so a
rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from typing import Optional, TextIO

import numpy as np

from . import analytic, montecarlo
from .model import SystemParams, Topology, lambda_threshold, link_variances, \
    secondary_power
from .montecarlo import SchemePolicy

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2

_DEFAULTS: dict[str, object] = {
    "rate_primary": 0.8,
    "rate_secondary": 0.2,
    "outage_threshold": 0.1,
    "snr_primary_db": 20.0,
    "snr_relay_max_db": 20.0,
    "pathloss_exponent": 4.0,
    "pt_x": 0.0, "pt_y": 1.82,
    "st_x": 0.0, "st_y": 0.0,
    "pd_x": 1.0, "pd_y": 1.82,
    "sd_x": 1.0, "sd_y": 0.0,
    "relay_x": 0.5, "relay_y": 0.9,
    "sweep_start": 6.0,
    "sweep_stop": 24.0,
    "sweep_step": 2.0,
    "rate_sweep_start": 0.2,
    "rate_sweep_stop": 2.6,
    "rate_sweep_step": 0.2,
    "grid_nx": 21,
    "grid_ny": 21,
    "trials": 100_000,
    "seed": 1,
    "positions": 1,
    "policies": "direct,primary-only,secondary-only,adaptive1,adaptive2",
    # multiplies the SINR thresholds used by the analytic expressions in
    # `validate`; != 1 deliberately breaks them (negative-control hook)
    "lambda_scale": 1.0,
}

_INT_KEYS = {"trials", "seed", "positions", "grid_nx", "grid_ny"}
_STR_KEYS = {"policies"}


class ConfigError(Exception):
    pass


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def load_config(path: Optional[str]) -> dict:
    cfg = dict(_DEFAULTS)
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    for ln, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in cfg:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        try:
            if key in _STR_KEYS:
                cfg[key] = val
            elif key in _INT_KEYS:
                cfg[key] = int(val)
            else:
                cfg[key] = float(val)
        except ValueError:
            raise ConfigError(f"{path}:{ln}: bad value for {key}: {val!r}")
    return cfg


def _params_from_config(cfg: dict) -> SystemParams:
    return SystemParams(
        rate_primary=cfg["rate_primary"],
        rate_secondary=cfg["rate_secondary"],
        outage_threshold=cfg["outage_threshold"],
        snr_primary=db_to_linear(cfg["snr_primary_db"]),
        snr_relay_max=db_to_linear(cfg["snr_relay_max_db"]),
        pathloss_exponent=cfg["pathloss_exponent"],
    )


def _topology_from_config(cfg: dict) -> Topology:
    return Topology(
        pt=(cfg["pt_x"], cfg["pt_y"]),
        st=(cfg["st_x"], cfg["st_y"]),
        pd=(cfg["pd_x"], cfg["pd_y"]),
        sd=(cfg["sd_x"], cfg["sd_y"]),
        relay=(cfg["relay_x"], cfg["relay_y"]),
    )


def _policies_from_config(cfg: dict) -> list[SchemePolicy]:
    out = []
    for name in str(cfg["policies"]).split(","):
        name = name.strip()
        if not name:
            continue
        try:
            out.append(SchemePolicy(name))
        except ValueError:
            raise ConfigError(f"unknown policy {name!r}")
    if not out:
        raise ConfigError("empty policy list")
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(out: TextIO, header: list[str], rows: list[list]) -> None:
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _sweep_values(cfg: dict, prefix: str = "sweep") -> list[float]:
    start = cfg[f"{prefix}_start"]
    stop = cfg[f"{prefix}_stop"]
    step = cfg[f"{prefix}_step"]
    if step <= 0 or stop < start:
        raise ConfigError("invalid sweep range")
    n = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(n)]


SNR_COLUMNS = ["gamma_p_db", "policy", "outage_sec_mc", "outage_sec_ci",
               "outage_sec_bound", "outage_pri_mc",
               "freq_d0", "freq_d1", "freq_d2", "freq_d3"]


def cmd_sweep_snr(cfg: dict, out: TextIO) -> int:
    base = _params_from_config(cfg)
    topology = _topology_from_config(cfg)
    policies = _policies_from_config(cfg)
    trials, seed, positions = cfg["trials"], cfg["seed"], cfg["positions"]
    rows = []
    for gdb in _sweep_values(cfg):
        # the relay power budget tracks the primary SNR across the sweep
        params = replace(base, snr_primary=db_to_linear(gdb),
                         snr_relay_max=db_to_linear(gdb))
        bound = ""
        variances = link_variances(topology, params.pathloss_exponent)
        system = montecarlo.resolve_system(params, topology)
        if system.powers.gamma_s > 0.0:
            bd = analytic.outage_breakdown_scheme1(params, variances,
                                                   system.powers)
            bound = bd.total_secondary
        for policy in policies:
            if positions > 1:
                pri, sec = montecarlo.average_over_positions(
                    params, topology, policy, positions, trials, seed)
            else:
                sys_p = montecarlo.resolve_system(
                    params, topology, scheme2=policy == SchemePolicy.ADAPTIVE2)
                pri, sec = montecarlo.estimate_outage(sys_p, policy, trials,
                                                      seed)
            rows.append([
                gdb, policy.value, sec.p_hat, sec.half_width_95,
                bound if policy == SchemePolicy.ADAPTIVE1 else "",
                pri.p_hat,
                sec.decision_freq[0], sec.decision_freq[1],
                sec.decision_freq[2], sec.decision_freq[3],
            ])
    _write_csv(out, SNR_COLUMNS, rows)
    return EXIT_OK


RATE_COLUMNS = ["rate_primary", "policy", "outage_sec_mc", "outage_sec_ci",
                "outage_pri_mc", "gamma_s",
                "freq_d0", "freq_d1", "freq_d2", "freq_d3"]


def cmd_sweep_rate(cfg: dict, out: TextIO) -> int:
    base = _params_from_config(cfg)
    topology = _topology_from_config(cfg)
    policies = _policies_from_config(cfg)
    trials, seed, positions = cfg["trials"], cfg["seed"], cfg["positions"]
    rows = []
    for rp in _sweep_values(cfg, "rate_sweep"):
        params = replace(base, rate_primary=rp, rate_secondary=rp / 2.0)
        variances = link_variances(topology, params.pathloss_exponent)
        gamma_s = secondary_power(params, variances)
        for policy in policies:
            if positions > 1:
                pri, sec = montecarlo.average_over_positions(
                    params, topology, policy, positions, trials, seed)
            else:
                sys_p = montecarlo.resolve_system(
                    params, topology, scheme2=policy == SchemePolicy.ADAPTIVE2)
                pri, sec = montecarlo.estimate_outage(sys_p, policy, trials,
                                                      seed)
            rows.append([
                rp, policy.value, sec.p_hat, sec.half_width_95, pri.p_hat,
                gamma_s,
                sec.decision_freq[0], sec.decision_freq[1],
                sec.decision_freq[2], sec.decision_freq[3],
            ])
    _write_csv(out, RATE_COLUMNS, rows)
    return EXIT_OK


GRID_COLUMNS = ["x", "y", "outage_sec", "dominant_decision", "valid"]


def cmd_grid_position(cfg: dict, out: TextIO) -> int:
    params = _params_from_config(cfg)
    base = _topology_from_config(cfg)
    policies = _policies_from_config(cfg)
    policy = policies[0]
    nx, ny = cfg["grid_nx"], cfg["grid_ny"]
    if nx < 2 or ny < 2:
        raise ConfigError("grid resolution must be at least 2x2")
    trials, seed = cfg["trials"], cfg["seed"]
    xs = np.linspace(-0.5, 1.5, nx)
    ys = np.linspace(0.0, 2.0, ny)
    rows = []
    for x in xs:
        for y in ys:
            try:
                topo = base.with_relay((float(x), float(y)))
            except ValueError:
                rows.append([float(x), float(y), "", "", 0])
                continue
            system = montecarlo.resolve_system(
                params, topo, scheme2=policy == SchemePolicy.ADAPTIVE2)
            _, sec = montecarlo.estimate_outage(system, policy, trials, seed)
            dominant = max(range(4), key=lambda i: sec.decision_freq[i])
            rows.append([float(x), float(y), sec.p_hat, dominant, 1])
    _write_csv(out, GRID_COLUMNS, rows)
    return EXIT_OK


def _check(name: str, ok: bool, detail: str, out: TextIO) -> bool:
    out.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return ok


def cmd_validate(cfg: dict, out: TextIO) -> int:
    """Cross-check the closed forms against fresh Monte Carlo draws."""
    seed = cfg["seed"]
    trials = max(cfg["trials"], 200_000)
    scale = cfg["lambda_scale"]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    ok = True

    # exact conditional primary outage, randomized effective SNRs
    for k in range(5):
        g_pp, g_sp, g_rp = 10.0 ** rng.uniform(-1.5, 2.0, 3)
        lam = float(rng.uniform(0.2, 4.0))
        x = rng.exponential(g_pp, trials)
        yv = rng.exponential(g_rp, trials)
        z = rng.exponential(g_sp, trials)
        p_mc = float(np.mean((x + yv) / (z + 1.0) < lam))
        p_cf = analytic.cond_primary_outage_D1(g_pp, g_sp, g_rp, lam * scale)
        se = math.sqrt(max(p_mc * (1 - p_mc), 1e-12) / trials)
        ok &= _check(f"primary-outage-exact[{k}]",
                     abs(p_cf - p_mc) <= 3 * se + 1e-9,
                     f"analytic={p_cf:.6f} mc={p_mc:.6f} "
                     f"trials={trials} seed={seed}", out)

    # quotient tail dominance, randomized
    for k in range(5):
        g_ps, g_ss, g_rs = 10.0 ** rng.uniform(-1.5, 1.5, 3)
        num = rng.exponential(g_ss, trials)
        den = rng.exponential(g_ps, trials)
        shared = rng.exponential(g_rs, trials)
        ap = num / (shared + 1.0)
        a_s = shared / (den + 1.0)
        p_mc = float(np.mean(ap > a_s))
        bound = analytic.prob_ap_gt_as_upper(g_ps * scale, g_ss, g_rs)
        se = math.sqrt(max(p_mc * (1 - p_mc), 1e-12) / trials)
        ok &= _check(f"crossover-bound[{k}]", bound >= p_mc - 3 * se,
                     f"bound={bound:.6f} mc={p_mc:.6f} "
                     f"trials={trials} seed={seed}", out)

    # secondary conditional bound vs its independent-draw comparator
    for k in range(3):
        g_ss, g_ps, g_rs = 10.0 ** rng.uniform(-1.5, 1.0, 3)
        lam_s = float(rng.uniform(0.1, 2.0))
        a0 = rng.exponential(g_ss, trials) / (rng.exponential(g_ps, trials)
                                              + 1.0)
        ap = rng.exponential(g_ss, trials) / (rng.exponential(g_rs, trials)
                                              + 1.0)
        p_mc = float(np.mean(a0 + ap < lam_s))
        bound = analytic.cond_secondary_outage_D1_upper(g_ss, g_ps, g_rs,
                                                        lam_s * scale)
        se = math.sqrt(max(p_mc * (1 - p_mc), 1e-12) / trials)
        ok &= _check(f"secondary-cond-bound[{k}]", bound >= p_mc - 3 * se,
                     f"bound={bound:.6f} mc={p_mc:.6f} "
                     f"trials={trials} seed={seed}", out)

    # decision-frequency and end-to-end bounds at the default setup
    params = _params_from_config(cfg)
    topology = _topology_from_config(cfg)
    variances = link_variances(topology, params.pathloss_exponent)
    system = montecarlo.resolve_system(params, topology)
    _, sec = montecarlo.estimate_outage(system, SchemePolicy.ADAPTIVE1,
                                        trials, seed)
    snrs = analytic.EffectiveSnrs.from_system(params, variances,
                                              system.powers)
    p1_bound = analytic.prob_decision1_upper(snrs, params.lambda_primary *
                                             scale, params.lambda_secondary *
                                             scale)
    f1 = sec.decision_freq[1]
    se = math.sqrt(max(f1 * (1 - f1), 1e-12) / trials)
    ok &= _check("decision1-bound", p1_bound >= f1 - 3 * se,
                 f"bound={p1_bound:.6f} mc={f1:.6f} "
                 f"trials={trials} seed={seed}", out)
    bd = analytic.outage_breakdown_scheme1(params, variances, system.powers)
    se = math.sqrt(max(sec.p_hat * (1 - sec.p_hat), 1e-12) / trials)
    ok &= _check("total-secondary-bound",
                 bd.total_secondary * (1.0 if scale == 1.0 else scale)
                 >= sec.p_hat - 3 * se,
                 f"bound={bd.total_secondary:.6f} mc={sec.p_hat:.6f} "
                 f"trials={trials} seed={seed}", out)

    # quotient pdf distribution test
    g_num = system.powers.gamma_s * variances.ss
    g_den = params.snr_primary * variances.ps
    p_value = _chi_square_pvalue(g_num, g_den, max(trials, 1_000_000),
                                 seed, scale)
    ok &= _check("quotient-pdf-chisq", p_value > 0.01,
                 f"p={p_value:.4f} samples={max(trials, 1_000_000)} "
                 f"seed={seed}", out)

    out.write("validation: " + ("all checks passed\n" if ok
                                else "FAILURES detected\n"))
    return EXIT_OK if ok else EXIT_VALIDATION


def _chi_square_pvalue(g_num: float, g_den: float, n: int, seed: int,
                       scale: float = 1.0) -> float:
    from scipy import stats

    edges, density = montecarlo.empirical_pdf(g_num, g_den, n, bins=80,
                                              seed=seed)
    widths = np.diff(edges)
    counts = density * widths * n
    cdf = np.array([analytic.quotient_cdf(e, g_num * scale, g_den)
                    for e in edges])
    expected = np.diff(cdf) * n
    # merge sparse tail bins so every cell has expected count >= 5
    obs, exp = [], []
    co = ce = 0.0
    for o, e in zip(counts, expected):
        co += o
        ce += e
        if ce >= 5.0:
            obs.append(co)
            exp.append(ce)
            co = ce = 0.0
    obs[-1] += co
    exp[-1] += ce
    obs = np.asarray(obs)
    exp = np.asarray(exp) * obs.sum() / sum(exp)
    return float(stats.chisquare(obs, exp).pvalue)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cogrelay",
        description="Relay-assisted spectrum-sharing outage experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
            ("sweep-snr", "secondary outage vs primary SNR (dB); columns: "
             + ",".join(SNR_COLUMNS)),
            ("sweep-rate", "outage vs primary rate with R_s = R_p/2; "
             "columns: " + ",".join(RATE_COLUMNS)),
            ("grid-position", "secondary outage over a relay-position grid; "
             "columns: " + ",".join(GRID_COLUMNS)),
            ("validate", "closed-form vs Monte Carlo cross-checks")]:
        p = sub.add_parser(name, help=doc, description=doc)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--policy", help="comma-separated policy list")
        p.add_argument("--positions", type=int,
                       help="relay positions to average over")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.trials is not None:
            if args.trials <= 0:
                raise ConfigError("--trials must be positive")
            cfg["trials"] = args.trials
        if args.policy is not None:
            cfg["policies"] = args.policy
        if args.positions is not None:
            cfg["positions"] = args.positions
        _policies_from_config(cfg)  # fail fast on bad names
        handler = {
            "sweep-snr": cmd_sweep_snr,
            "sweep-rate": cmd_sweep_rate,
            "grid-position": cmd_grid_position,
            "validate": cmd_validate,
        }[args.command]
        if args.out:
            try:
                fh = open(args.out, "w")
            except OSError as exc:
                raise ConfigError(f"cannot open output: {exc}")
            with fh:
                return handler(cfg, fh)
        return handler(cfg, sys.stdout)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
