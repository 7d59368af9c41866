"""Experiment harness: bound sweeps, the two affinity-vs-n experiments,
and detection runs, all driven by flags or a TOML config.

Every command writes CSV with a ``# schema=1`` comment header; all log
columns are natural logarithms.  Flags override config values; seeded
commands are byte-reproducible.  Exit codes: 0 success, 2 invalid input,
3 numerical failure.
"""
import argparse
import json
import math
import sys

import numpy as np

try:
    import tomllib
except ImportError:           # python < 3.11
    import tomli as tomllib

from .affinity import affinity_grouped
from .chernoff import (log_shannon_lower_bound, theorem1_bounds,
                       tilted_mc_affinity)
from .detect import _derived_seed, detect_communities, mis
from .dists import GroupedPair, _frozen, pair_from_csv, group
from .errors import (ChernoffSbmError, ConvergenceFailure, DegenerateSplit,
                     GridTooLarge)
from .sbm import SbmModel, read_adjacency, sample_adjacency, write_labels

SCHEMA_COMMENT = "schema=1"
LOG_COMMENT = "log columns are natural logarithms"


def _iid_grouped(p0: float, p1: float, n: int) -> GroupedPair:
    return GroupedPair(_frozen([p0]), _frozen([p1]),
                       np.asarray([int(n)], dtype=np.int64))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _write_csv(out, comments, header, rows):
    lines = [f"# {SCHEMA_COMMENT}", f"# {LOG_COMMENT}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _parse_int_list(value):
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).split(",") if v.strip()]


def _load_config(path, section):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        table = tomllib.load(fh)
    return table.get(section, {})


def _setting(args, cfg, name, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return default


# ----------------------------------------------------------------- bounds

def _log_eta_exact(grouped, mc_samples, seed):
    try:
        return affinity_grouped(grouped).log_eta, "grouped"
    except GridTooLarge:
        est = tilted_mc_affinity(grouped, mc_samples, seed)
        print("note: exact grid too large, Monte-Carlo estimate used",
              file=sys.stderr)
        return est.log_estimate, "mc"


def cmd_bounds(args):
    cfg = _load_config(args.config, "bounds")
    out = _setting(args, cfg, "out")
    seed = int(_setting(args, cfg, "seed", 0))
    pair_csv = _setting(args, cfg, "pair_csv")
    if pair_csv is not None:
        pairs = [group(pair_from_csv(pair_csv))]
        ns = [pairs[0].n]
    else:
        p0 = _setting(args, cfg, "p0")
        p1 = _setting(args, cfg, "p1")
        n_list = _setting(args, cfg, "n_list")
        if p0 is None or p1 is None or n_list is None:
            raise ChernoffSbmError(
                "bounds needs either pair_csv or p0/p1/n_list")
        ns = _parse_int_list(n_list)
        pairs = [_iid_grouped(float(p0), float(p1), n) for n in ns]
    rows = []
    for n, gp in zip(ns, pairs):
        rep = theorem1_bounds(gp)
        log_eta, _method = _log_eta_exact(gp, 10 ** 6, seed)
        rows.append([n, rep.alpha_star, rep.d_star, rep.sigma_bar, log_eta,
                     rep.log_lower, rep.log_upper, rep.lower_applicable,
                     log_shannon_lower_bound(gp)])
    _write_csv(out, [], ["n", "alpha_star", "d_star", "sigma_bar",
                         "log_eta_exact", "log_lower", "log_upper",
                         "lower_applicable", "log_shannon"], rows)


# ------------------------------------------------- section 5, symmetric

_P_SYM = 0.55
_Q_SYM = 0.45
# per-coordinate divergence at the symmetric maximizer alpha = 1/2
_D_SYM = -math.log(2.0 * math.sqrt(_P_SYM * _Q_SYM))


def symmetric_pair_affinity(n: int, mc_samples: int = 10 ** 7,
                            mc_seed: int = 0):
    """log affinity of the 2n-coordinate blockwise-swapped pair, exactly.

    The pair has n coordinates at (0.55, 0.45) and n at (0.45, 0.55).
    Flipping both outcome labels of the second block is a bijection of
    the sample space that sends (0.45, 0.55) to (0.55, 0.45) and leaves
    the min-mass sum unchanged, so the pair collapses to one iid group of
    2n coordinates and the exact grid has only 2n+1 cells.  Falls back to
    Monte Carlo if that grid ever exceeds the exact budget.
    """
    gp = _iid_grouped(_P_SYM, _Q_SYM, 2 * n)
    try:
        return affinity_grouped(gp).log_eta, "grouped"
    except GridTooLarge:
        est = tilted_mc_affinity(gp, mc_samples, mc_seed)
        return est.log_estimate, "mc"


def section5_symmetric_rows(n_list, trials, seed, mc_samples=10 ** 7):
    """Rows (n, a_n, a_n_alt, b_n_mean, b_n_stderr, trials, method)."""
    rows = []
    for n in n_list:
        log_eta, method = symmetric_pair_affinity(n, mc_samples, seed)
        a_n = log_eta + 2 * n * _D_SYM
        a_alt = log_eta + n * _D_SYM
        b_mean = b_se = None
        if trials > 0:
            z = np.repeat([0, 1], n)
            model = SbmModel(z, np.array([[_P_SYM, _Q_SYM],
                                          [_Q_SYM, _P_SYM]]))
            rates = []
            for t in range(trials):
                A = sample_adjacency(model, _derived_seed(seed, n, t, 0))
                labels, _ = detect_communities(
                    A, 2, _derived_seed(seed, n, t, 1))
                rates.append(mis(labels, z, 2))
            mean = float(np.mean(rates))
            if mean > 0:
                b_mean = math.log(2.0 * mean) + 2 * n * _D_SYM
                if trials > 1:
                    b_se = float(np.std(rates, ddof=1)
                                 / math.sqrt(trials) / mean)
            else:
                b_mean = -math.inf
        rows.append([n, a_n, a_alt, b_mean, b_se, trials, method])
    return rows


def cmd_section5_symmetric(args):
    cfg = _load_config(args.config, "section5_symmetric")
    out = _setting(args, cfg, "out")
    seed = int(_setting(args, cfg, "seed", 0))
    trials = int(_setting(args, cfg, "trials", 0))
    n_list = _parse_int_list(_setting(args, cfg, "n_list", "100,200,400"))
    rows = section5_symmetric_rows(n_list, trials, seed)
    _write_csv(out, [
        "pair: n coords at (0.55,0.45) and n at (0.45,0.55); SBM has 2n nodes",
        "a_n = log(eta) - 2*n*log(2*sqrt(0.55*0.45))  [2n-coordinate exponent]",
        "a_n_alt = log(eta) - n*log(2*sqrt(0.55*0.45))  [n-exponent convention]",
        "b_n_mean = log(2*mean(mis)) - 2*n*log(2*sqrt(0.55*0.45))",
        "b_n_stderr = stderr(mis)/mean(mis)",
    ], ["n", "a_n", "a_n_alt", "b_n_mean", "b_n_stderr", "trials", "method"],
        rows)


# ----------------------------------------------- section 5, oscillation

_P_OSC = 0.3
_Q_OSC = 0.7
_D_OSC = -math.log(2.0 * math.sqrt(_P_OSC * _Q_OSC))


def section5_oscillation_rows(n_values):
    """Rows (n, a_n, c_n) for the iid 0.3-vs-0.7 pair.

    ``a_n = log(eta) - n*log(2*sqrt(0.3*0.7))`` removes the exponential
    decay; ``c_n = a_n + 0.5*log(n)`` removes the square-root trend, so
    any remaining movement in c_n is genuine non-convergence.
    """
    rows = []
    for n in n_values:
        log_eta = affinity_grouped(_iid_grouped(_P_OSC, _Q_OSC, n)).log_eta
        a_n = log_eta + n * _D_OSC
        rows.append([n, a_n, a_n + 0.5 * math.log(n)])
    return rows


def cmd_section5_oscillation(args):
    cfg = _load_config(args.config, "section5_oscillation")
    out = _setting(args, cfg, "out")
    start = int(_setting(args, cfg, "n_start", 5000))
    stop = int(_setting(args, cfg, "n_stop", 10000))
    step = int(_setting(args, cfg, "n_step", 1))
    rows = section5_oscillation_rows(range(start, stop + 1, step))
    _write_csv(out, [
        "a_n = log(eta) - n*log(2*sqrt(0.3*0.7))",
        "c_n = a_n + 0.5*log(n)",
        "method: grouped (single group, grid = n+1 cells)",
    ], ["n", "a_n", "c_n"], rows)


# ----------------------------------------------------------------- detect

def cmd_detect(args):
    cfg = _load_config(args.config, "detect")
    adjacency = _setting(args, cfg, "adjacency")
    if adjacency is None:
        raise ChernoffSbmError("detect needs an adjacency edge-list path")
    A, k_file = read_adjacency(adjacency)
    k = int(_setting(args, cfg, "k", k_file))
    seed = int(_setting(args, cfg, "seed", 0))
    mode = _setting(args, cfg, "mode", "fast_loo")
    out_labels = _setting(args, cfg, "out_labels", "labels.txt")
    out_trace = _setting(args, cfg, "out_trace")
    labels, trace = detect_communities(A, k, seed, mode=mode)
    write_labels(out_labels, labels)
    if out_trace is not None:
        with open(out_trace, "w") as fh:
            json.dump(trace.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")


# --------------------------------------------------------------- sandwich

def cmd_sandwich(args):
    cfg = _load_config(args.config, "sandwich")
    out = _setting(args, cfg, "out")
    seed = int(_setting(args, cfg, "seed", 0))
    p0 = float(_setting(args, cfg, "p0", 0.55))
    p1 = float(_setting(args, cfg, "p1", 0.45))
    n_list = _parse_int_list(_setting(args, cfg, "n_list",
                                      "100,200,400,800,1600,3200"))
    rows = []
    for n in n_list:
        gp = _iid_grouped(p0, p1, n)
        rep = theorem1_bounds(gp)
        log_eta, _ = _log_eta_exact(gp, 10 ** 6, seed)
        r_n = math.exp(log_eta + rep.d_star) * rep.scale
        rows.append([n, rep.alpha_star, rep.d_star, rep.sigma_bar,
                     rep.scale, log_eta, r_n])
    _write_csv(out, [
        "r_n = eta * sqrt(n)*sigma_bar*alpha*(1-alpha*) * exp(d_star)",
    ], ["n", "alpha_star", "d_star", "sigma_bar", "scale", "log_eta", "r_n"],
        rows)


# ------------------------------------------------------------------ main

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="chernoff-sbm",
        description="Chernoff-bound sweeps and SBM detection experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        for flag, kw in flags.items():
            p.add_argument(flag, **kw)
        p.set_defaults(fn=fn)
        return p

    add("bounds", cmd_bounds,
        **{"--pair-csv": dict(dest="pair_csv", default=None),
           "--p0": dict(type=float, default=None),
           "--p1": dict(type=float, default=None),
           "--n-list": dict(dest="n_list", default=None),
           "--seed": dict(type=int, default=None)})
    add("section5-symmetric", cmd_section5_symmetric,
        **{"--n-list": dict(dest="n_list", default=None),
           "--trials": dict(type=int, default=None),
           "--seed": dict(type=int, default=None)})
    add("section5-oscillation", cmd_section5_oscillation,
        **{"--n-start": dict(dest="n_start", type=int, default=None),
           "--n-stop": dict(dest="n_stop", type=int, default=None),
           "--n-step": dict(dest="n_step", type=int, default=None)})
    add("detect", cmd_detect,
        **{"--adjacency": dict(default=None),
           "--k": dict(type=int, default=None),
           "--seed": dict(type=int, default=None),
           "--mode": dict(choices=["fast_loo", "exact_loo"], default=None),
           "--out-labels": dict(dest="out_labels", default=None),
           "--out-trace": dict(dest="out_trace", default=None)})
    add("sandwich", cmd_sandwich,
        **{"--p0": dict(type=float, default=None),
           "--p1": dict(type=float, default=None),
           "--n-list": dict(dest="n_list", default=None),
           "--seed": dict(type=int, default=None)})
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.fn(args)
    except (ConvergenceFailure, DegenerateSplit, GridTooLarge,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ChernoffSbmError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
