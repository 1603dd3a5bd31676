"""Command-line experiment runner.

Subcommands: bench, run, reach, probe, eos, check.  Configuration comes
from ``--config file.json`` and/or inline flags (flags win); the resolved
configuration is echoed verbatim into the output directory, and identical
config + seed reproduce byte-identical CSV/JSON outputs.  Exit codes:
0 success, 1 procedure failure status, 2 configuration error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import serialize
from .descent import run_gd
from .flow import FlowSettings, integrate
from .landscape import BUILTIN_NAMES, make_builtin
from .reach import (ReachBudgets, edge_of_stability, reach_continuous,
                    reach_discrete, reach_general, stability_probe)
from .reverse import prox, prox_certificates
from .sampling import Lcg64
from .schedule import parse_schedule

#: every config field and its documented default
CONFIG_DEFAULTS = {
    "function": "double_well",   # name or name:p1,p2,...
    "schedule": "constant:0.02", # constant:C or power:C:P
    "procedure": "gd",           # gd | flow | reach | reach-general | probe | eos | prox-check
    "target": None,              # point [..] or catalog index (int)
    "x0": None,                  # start point for gd/flow/eos
    "direction": "forward",      # flow direction
    "mode": "discrete",          # reach/probe mode: discrete | continuous
    "epsilon": 0.4,              # reach/probe ball radius
    "seed_radius": 1e-3,         # ascent-seed sphere radius
    "tol": 1e-4,                 # reach success tolerance
    "delta": None,               # saddle-mode escape radius (default epsilon/2)
    "gtol": 1e-10,               # gradient stopping tolerance
    "h": 1e-3,                   # flow integrator step
    "t_max": 50.0,               # flow time budget
    "event_refine_tol": None,    # sphere-crossing refinement (default h/1000)
    "max_iter": 1000000,         # discrete iteration budget
    "kbar_max": 65536,           # reverse-orbit horizon budget
    "n_samples": 8,              # probe quasi-random starts per radius
    "alpha": None,               # eos step size
    "n_checks": 500,             # prox-check sample count
    "seed": 0,                   # quasi-random generator seed
    "output_dir": None,          # default: $BASINREACH_OUT or ./basinreach_out
}


class ConfigError(ValueError):
    pass


def parse_function(text):
    """name or name:p1,p2,... e.g. quad:1,4 or double_well:2."""
    name, _, rest = text.partition(":")
    params = tuple(float(v) for v in rest.split(",")) if rest else ()
    try:
        return make_builtin(name, params)
    except ValueError as exc:
        raise ConfigError(f"function: {exc}") from exc


def resolve_config(args):
    cfg = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from exc
        for key, val in loaded.items():
            if key not in cfg:
                raise ConfigError(f"config: unknown field {key!r}")
            cfg[key] = val
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def output_dir(args, cfg):
    out = getattr(args, "out", None) or os.environ.get("BASINREACH_OUT") \
        or cfg.get("output_dir") or "basinreach_out"
    os.makedirs(out, exist_ok=True)
    cfg["output_dir"] = out
    return out


def resolve_target(cfg, f):
    target = cfg.get("target")
    if target is None:
        raise ConfigError("target: required for this procedure")
    if isinstance(target, int):
        try:
            return f.critical_points[target].point
        except IndexError as exc:
            raise ConfigError(f"target: catalog index {target} out of range") from exc
    return np.asarray(target, dtype=float)


def parse_point(text):
    return [float(v) for v in text.split(",")]


def flow_settings(cfg):
    return FlowSettings(h=float(cfg["h"]), t_max=float(cfg["t_max"]),
                        gtol=float(cfg["gtol"]),
                        event_refine_tol=cfg["event_refine_tol"])


def catalog_json(f):
    return {
        "name": f.name,
        "dim": f.dim,
        "lipschitz_L": f.lipschitz_L,
        "box": [[float(lo), float(hi)] for lo, hi in f.box],
        "critical_points": [
            {"point": [float(c) for c in cp.point], "kind": cp.kind,
             "f_value": float(cp.f_value)}
            for cp in f.critical_points
        ],
    }


def cmd_bench(args):
    functions = [make_builtin("quad", (1.0,)), make_builtin("double_well"),
                 make_builtin("himmelblau")]
    if args.json:
        print(json.dumps([catalog_json(f) for f in functions], indent=2, sort_keys=True))
        return 0
    for f in functions:
        print(f"{f.name}  dim={f.dim}  L={f.lipschitz_L:.6g}  "
              f"box={[list(map(float, b)) for b in f.box]}")
        for i, cp in enumerate(f.critical_points):
            pt = ", ".join(f"{c:.12g}" for c in cp.point)
            print(f"  [{i}] ({pt})  {cp.kind}  f={cp.f_value:.12g}")
    return 0


def cmd_run(args):
    cfg = resolve_config(args)
    f = parse_function(cfg["function"])
    if cfg["x0"] is None:
        raise ConfigError("x0: required for run")
    x0 = np.asarray(cfg["x0"], dtype=float)
    out = output_dir(args, cfg)
    if cfg["procedure"] == "flow":
        traj = integrate(f, x0, cfg["direction"], flow_settings(cfg))
    elif cfg["procedure"] == "gd":
        s = parse_schedule(cfg["schedule"])
        traj = run_gd(f, x0, s, gtol=float(cfg["gtol"]), max_iter=int(cfg["max_iter"]))
    else:
        raise ConfigError(f"procedure: {cfg['procedure']!r} is not a run procedure")
    serialize.write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
    serialize.write_json(serialize.trajectory_summary(traj),
                         os.path.join(out, "summary.json"))
    serialize.write_json(cfg, os.path.join(out, "config.json"))
    print(f"{cfg['procedure']}: {traj.terminal_status} after {len(traj) - 1} steps")
    return 0


def cmd_reach(args):
    cfg = resolve_config(args)
    if args.general:
        cfg["procedure"] = "reach-general"
    elif cfg["procedure"] != "reach-general":
        cfg["procedure"] = "reach"
    f = parse_function(cfg["function"])
    target = resolve_target(cfg, f)
    out = output_dir(args, cfg)
    budgets = ReachBudgets(max_iter=int(cfg["max_iter"]), kbar_max=int(cfg["kbar_max"]),
                           probe_samples=int(cfg["n_samples"]), seed=int(cfg["seed"]))
    mode = cfg["mode"]
    if cfg["procedure"] == "reach-general":
        report = reach_general(
            f, target, float(cfg["epsilon"]), mode, float(cfg["seed_radius"]),
            tol=float(cfg["tol"]),
            delta=None if cfg["delta"] is None else float(cfg["delta"]),
            s=parse_schedule(cfg["schedule"]) if mode == "discrete" else None,
            settings=flow_settings(cfg) if mode == "continuous" else None,
            budgets=budgets)
    elif mode == "continuous":
        report = reach_continuous(f, target, float(cfg["epsilon"]), flow_settings(cfg),
                                  float(cfg["seed_radius"]), float(cfg["tol"]), budgets)
    else:
        report = reach_discrete(f, target, float(cfg["epsilon"]),
                                parse_schedule(cfg["schedule"]),
                                float(cfg["seed_radius"]), float(cfg["tol"]), budgets)

    forward_csv = reverse_csv = None
    if report.forward_part is not None:
        forward_csv = "forward.csv"
        serialize.write_trajectory_csv(report.forward_part, os.path.join(out, forward_csv))
    if report.reverse_part is not None:
        reverse_csv = "reverse.csv"
        s = parse_schedule(cfg["schedule"])
        serialize.write_reverse_part_csv(report.reverse_part, f, s,
                                         os.path.join(out, reverse_csv))
    serialize.write_json(serialize.reach_report_json(report, forward_csv, reverse_csv),
                         os.path.join(out, "reach.json"))
    serialize.write_json(cfg, os.path.join(out, "config.json"))
    print(f"reach: {report.status}, final_distance={report.final_distance:.6g}")
    return 0 if report.status == "success" else 1


def cmd_probe(args):
    cfg = resolve_config(args)
    cfg["procedure"] = "probe"
    f = parse_function(cfg["function"])
    target = resolve_target(cfg, f)
    out = output_dir(args, cfg)
    est = stability_probe(
        f, target, float(cfg["epsilon"]),
        parse_schedule(cfg["schedule"]) if cfg["mode"] == "discrete" else None,
        n_samples=int(cfg["n_samples"]), mode=cfg["mode"],
        settings=flow_settings(cfg) if cfg["mode"] == "continuous" else None,
        seed=int(cfg["seed"]), max_iter=min(int(cfg["max_iter"]), 100000),
        gtol=max(float(cfg["gtol"]), 1e-10))
    serialize.write_json({
        "epsilon": est.epsilon,
        "delta_hat": est.delta_hat,
        "samples": est.samples,
        "failures": [[float(c) for c in p] for p in est.failures],
    }, os.path.join(out, "probe.json"))
    serialize.write_json(cfg, os.path.join(out, "config.json"))
    print(f"probe: delta_hat={est.delta_hat:.6g} (epsilon={est.epsilon:.6g})")
    return 0 if est.delta_hat > 0.0 else 1


def cmd_eos(args):
    cfg = resolve_config(args)
    cfg["procedure"] = "eos"
    f = parse_function(cfg["function"])
    if cfg["alpha"] is None:
        raise ConfigError("alpha: required for eos")
    x0 = np.ones(f.dim) if cfg["x0"] is None else np.asarray(cfg["x0"], dtype=float)
    try:
        verdict = edge_of_stability(f, float(cfg["alpha"]), x0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = output_dir(args, cfg)
    serialize.write_json({"alpha": float(cfg["alpha"]), "x0": [float(c) for c in x0],
                          "verdict": verdict}, os.path.join(out, "eos.json"))
    serialize.write_json(cfg, os.path.join(out, "config.json"))
    print(f"eos: {verdict}")
    return 0


def cmd_check(args):
    cfg = resolve_config(args)
    cfg["procedure"] = "prox-check"
    f = parse_function(cfg["function"])
    out = output_dir(args, cfg)
    rng = Lcg64(int(cfg["seed"]))
    lo, hi = f.box[:, 0], f.box[:, 1]
    span = 0.8  # sample the inner 80% so prox iterates stay inside the box
    n = int(cfg["n_checks"])
    identity_fails = cert_fails = 0
    for _ in range(n):
        u = np.array([rng.uniform() for _ in range(f.dim)])
        x = lo + (0.5 * (1 - span) + span * u) * (hi - lo)
        lam = (0.05 + 0.85 * rng.uniform()) / max(f.lipschitz_L, 1e-12)
        xp = prox(f, x, lam)
        residual = float(np.linalg.norm(xp - (x - lam * f.gradient(xp))))
        if residual > 1e-10 * (1.0 + np.linalg.norm(x)):
            identity_fails += 1
        dec_ok, step_ok = prox_certificates(f, x, lam, xp)
        if not (dec_ok and step_ok):
            cert_fails += 1
    serialize.write_json({"n": n, "identity_failures": identity_fails,
                          "certificate_failures": cert_fails},
                         os.path.join(out, "check.json"))
    serialize.write_json(cfg, os.path.join(out, "config.json"))
    print(f"check: {n} samples, {identity_fails} identity failures, "
          f"{cert_fails} certificate failures")
    return 0 if identity_fails == 0 and cert_fails == 0 else 1


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output directory (BASINREACH_OUT overrides the default)")
    p.add_argument("--function", help="builtin, e.g. quad:1,4 or double_well:1.5")
    p.add_argument("--schedule", help="constant:C or power:C:P")
    p.add_argument("--seed", type=int)
    p.add_argument("--gtol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="basinreach",
        description="construct initial points from which gradient dynamics "
                    "converge to a designated critical point")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="list the benchmark catalog")
    p.add_argument("what", choices=["list"])
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("run", help="emit a trajectory CSV + summary JSON")
    _add_common(p)
    p.add_argument("--procedure", choices=["gd", "flow"])
    p.add_argument("--x0", type=parse_point)
    p.add_argument("--direction", choices=["forward", "reverse"])
    p.add_argument("--h", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("reach", help="construct x0 reaching a designated target")
    _add_common(p)
    p.add_argument("--mode", choices=["discrete", "continuous"])
    p.add_argument("--general", action="store_true",
                   help="saddle-targeting general case")
    p.add_argument("--target", type=parse_point)
    p.add_argument("--target-index", dest="target", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed-radius", dest="seed_radius", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--kbar-max", dest="kbar_max", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.set_defaults(handler=cmd_reach)

    p = sub.add_parser("probe", help="estimate a stability radius")
    _add_common(p)
    p.add_argument("--mode", choices=["discrete", "continuous"])
    p.add_argument("--target", type=parse_point)
    p.add_argument("--target-index", dest="target", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.set_defaults(handler=cmd_probe)

    p = sub.add_parser("eos", help="edge-of-stability verdict on the quad builtin")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--x0", type=parse_point)
    p.set_defaults(handler=cmd_eos)

    p = sub.add_parser("check", help="proximal identity and certificate sweep")
    _add_common(p)
    p.add_argument("--n-checks", dest="n_checks", type=int)
    p.set_defaults(handler=cmd_check)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
