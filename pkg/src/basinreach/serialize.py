"""CSV and JSON output, deterministic byte-for-byte given the same data.

Trajectory CSV columns: k,t,x_1..x_n,f,gnorm (header mandatory, one row
per recorded state).  Reverse orbits use the same layout plus a direction
flag column.  Floats are written with repr (shortest round-trip form).
"""

import json

import numpy as np


def _fmt(v):
    return repr(float(v))


def trajectory_rows(traj):
    dim = traj.states[0].x.size
    header = ["k", "t"] + [f"x_{i + 1}" for i in range(dim)] + ["f", "gnorm"]
    rows = [header]
    for st in traj.states:
        rows.append([str(st.k), _fmt(st.t)] + [_fmt(c) for c in st.x]
                    + [_fmt(st.f_value), _fmt(st.grad_norm)])
    return rows


def write_trajectory_csv(traj, path):
    with open(path, "w", newline="") as fh:
        for row in trajectory_rows(traj):
            fh.write(",".join(row) + "\n")


def orbit_rows(orbit, f, s):
    """Orbit points in index order; t is the cumulative step sum, matching
    the piecewise-linear interpolation parameterization of the iterates."""
    dim = orbit.anchor.size
    header = (["k", "t"] + [f"x_{i + 1}" for i in range(dim)]
              + ["f", "gnorm", "direction"])
    rows = [header]
    t = 0.0
    for i, x in enumerate(orbit.points):
        k = orbit.start_index + i
        rows.append([str(k), _fmt(t)] + [_fmt(c) for c in x]
                    + [_fmt(f.value(x)), _fmt(f.grad_norm(x)), "reverse"])
        t += s.alpha(k)
    return rows


def write_orbit_csv(orbit, f, s, path):
    with open(path, "w", newline="") as fh:
        for row in orbit_rows(orbit, f, s):
            fh.write(",".join(row) + "\n")


def write_reverse_part_csv(reverse_part, f, s, path):
    """A reach report's reverse part is an orbit (discrete) or a reverse
    trajectory (continuous); both export to the flagged CSV layout."""
    if hasattr(reverse_part, "anchor"):
        write_orbit_csv(reverse_part, f, s, path)
        return
    rows = trajectory_rows(reverse_part)
    rows[0].append("direction")
    for row in rows[1:]:
        row.append("reverse")
    with open(path, "w", newline="") as fh:
        for row in rows:
            fh.write(",".join(row) + "\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(c) for c in v]
    if isinstance(v, (np.floating, np.integer)):
        return float(v)
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def trajectory_summary(traj, events=()):
    last = traj.final_state
    out = {
        "status": traj.terminal_status,
        "states": len(traj.states),
        "final_x": _jsonable(last.x),
        "final_f": last.f_value,
        "final_gnorm": last.grad_norm,
        "final_t": last.t,
        "limit": _jsonable(traj.limit) if traj.limit is not None else None,
    }
    if events:
        out["events"] = list(events)
    return out


def reach_report_json(report, forward_csv_path=None, reverse_csv_path=None):
    return {
        "target": _jsonable(report.target),
        "x0": _jsonable(report.x0) if report.x0 is not None else None,
        "delta_used": _jsonable(report.delta_used),
        "seed_radius": report.seed_radius,
        "final_distance": _jsonable(report.final_distance),
        "status": report.status,
        "forward_csv_path": forward_csv_path,
        "reverse_csv_path": reverse_csv_path,
    }


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
