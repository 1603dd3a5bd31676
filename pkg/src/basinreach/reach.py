"""Reachability procedures: construct initial points from which gradient
descent or gradient flow converges to a designated target, estimate
stability radii empirically, and run the step-size sharpness-exclusion
experiment.

The discrete pipeline follows the reverse-orbit construction: pick an
ascent seed a near the target with f(a) > f(target), climb backward by
exact implicit ascent steps until the orbit first crosses an escape
sphere, and replay forward under the full schedule.  The escape radius
rho is chosen with rho + eta(rho) <= delta_hat, where eta bounds the
one-step overshoot past the sphere and delta_hat is the probed stability
radius, so the constructed x0 always lands inside the ball whose capture
has been verified.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .descent import DIVERGENCE_FACTOR, classify_limit, run_gd
from .flow import NoCrossingError, _sphere_exit_detail, integrate, integrate_minnorm
from .landscape import LeftBoxError, cap
from .reverse import reverse_orbit
from .sampling import Lcg64
from .schedule import admissible, constant
from .trajectory import State, Trajectory, emit

REACH_STATUSES = ("success", "no_escape", "no_converge")

# strictness floor for the ascent seed: f(a) > f(target) + floor
SEED_FLOOR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class StabilityEstimate:
    epsilon: float
    delta_hat: float
    samples: int
    failures: tuple


@dataclass(frozen=True, eq=False)
class GradLowerBound:
    level: float
    region_radius: float
    zeta: float


@dataclass(frozen=True, eq=False)
class ReachReport:
    target: np.ndarray
    x0: np.ndarray
    reverse_part: object
    forward_part: object
    final_distance: float
    delta_used: float
    ascent_seed: np.ndarray
    status: str
    seed_radius: float
    escape_radius: float = float("nan")
    crossing: np.ndarray = None


@dataclass(frozen=True)
class ReachBudgets:
    """Iteration and sampling budgets for the reach pipelines.

    gtol defaults to min(1e-8, 1e-3 * tol); probe_epsilon (the
    critical-value isolation ball of the stability probe) defaults to the
    caller's epsilon; delta_override skips the probe and reuses a
    previously estimated radius, which is legitimate because the
    stability radius is uniform over admissible schedules.
    """

    max_iter: int = 200_000
    gtol: float = None
    kbar_max: int = 1 << 16
    probe_epsilon: float = None
    probe_samples: int = 8
    probe_max_iter: int = 20_000
    probe_gtol: float = 1e-8
    probe_bisect: int = 6
    delta_override: float = None
    margin_grid: int = 41
    alpha_shrinks: int = 3
    scan_random: int = 64
    seed: int = 0


def _ball_fits_box(f, center, radius):
    lo = f.box[:, 0]
    hi = f.box[:, 1]
    return bool(np.all(center - radius >= lo - 1e-12) and np.all(center + radius <= hi + 1e-12))


def _unit_directions(dim, n_random, seed, axis_first=True):
    axis = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        axis += [e, -e]
    rng = Lcg64(seed)
    rand = [rng.direction(dim) for _ in range(n_random)]
    return axis + rand if axis_first else rand + axis


def stability_probe(f, target, epsilon, s, n_samples=8, mode="discrete",
                    settings=None, seed=0, max_iter=20_000, gtol=1e-8, n_bisect=6):
    """Empirical stability radius around a cataloged local minimum.

    Bisects on the radius delta in (0, epsilon]: each candidate runs
    trajectories from the 2n axis points plus n_samples quasi-random
    points on the delta-sphere, and fails if any trajectory leaves
    B_epsilon(target) or does not converge within budget.  delta_hat is
    the largest tested radius with zero failures (0 when every tested
    radius failed, which signals that epsilon violates the locality
    requirement).  Deterministic given the seed.
    """
    target = np.asarray(target, dtype=float)
    if f.catalog_entry(target, "local_min") is None:
        raise ValueError("probe target must be a cataloged local minimum")
    if not _ball_fits_box(f, target, epsilon):
        raise ValueError("B_epsilon(target) must fit inside the operating box")
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown probe mode {mode!r}")
    if mode == "continuous" and settings is None:
        raise ValueError("continuous probe needs FlowSettings")
    if mode == "discrete" and (s is None or not admissible(s, f, "stability")):
        raise ValueError("discrete probe needs a schedule with sup alpha < 2/L")

    dirs = _unit_directions(f.dim, n_samples, seed)
    contain = epsilon * (1.0 + 1e-9)

    def trial(radius):
        bad = []
        for d in dirs:
            start = target + radius * d
            if mode == "discrete":
                traj = run_gd(f, start, s, gtol=gtol, max_iter=max_iter)
            else:
                traj = integrate(f, start, "forward", settings)
            ok = traj.terminal_status == "converged" and all(
                np.linalg.norm(st.x - target) <= contain for st in traj.states
            )
            if not ok:
                bad.append(start)
        return bad

    failures = []
    bad = trial(epsilon)
    if not bad:
        return StabilityEstimate(epsilon, epsilon, len(dirs), ())
    failures.extend(bad)
    lo, hi = 0.0, epsilon
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        bad = trial(mid)
        if bad:
            failures.extend(bad)
            hi = mid
        else:
            lo = mid
    return StabilityEstimate(epsilon, lo, len(dirs), tuple(failures))


def _ball_lattice(target, radius, n_grid):
    axes = [np.linspace(t - radius, t + radius, n_grid) for t in target]
    for pt in itertools.product(*axes):
        x = np.array(pt)
        if np.linalg.norm(x - target) <= radius:
            yield x


def grad_lower_bound(f, target, delta, level, n_grid=101):
    """zeta = min |grad f| over a lattice of B_delta(target) intersected
    with {f >= level}; requires level > f(target) and a nonempty
    intersection."""
    target = np.asarray(target, dtype=float)
    if not level > f.value(target):
        raise ValueError("level must exceed f(target)")
    zeta = np.inf
    found = False
    for x in _ball_lattice(target, delta, n_grid):
        if f.value(x) >= level:
            found = True
            zeta = min(zeta, f.grad_norm(x))
    if not found:
        raise ValueError("empty intersection: level too high for the ball")
    return GradLowerBound(float(level), float(delta), float(zeta))


def ball_grid_stats(f, target, radius, level, n_grid=41):
    """(max |grad f|, max f) over the lattice of the ball, restricted to
    {f >= level}; used by the overshoot margin and escape-step bound."""
    target = np.asarray(target, dtype=float)
    gmax = 0.0
    fmax = -np.inf
    for x in _ball_lattice(target, radius, n_grid):
        fx = f.value(x)
        if fx >= level:
            gmax = max(gmax, f.grad_norm(x))
            fmax = max(fmax, fx)
    return gmax, fmax


def _overshoot_margin(f, target, rho, alpha_bar, level, n_grid):
    """eta = 2 a/(1 - L a) * max{|grad f| : B_rho, f >= level}: the
    step-length bound on how far one implicit ascent step can land past
    the rho-sphere."""
    coef = 2.0 * alpha_bar / (1.0 - f.lipschitz_L * alpha_bar)
    gmax, _ = ball_grid_stats(f, target, rho, level, n_grid)
    return coef * gmax


def _escape_radius(f, target, delta_hat, alpha_bar, level, n_grid):
    """Largest grid radius rho with rho + eta(rho) <= delta_hat, so the
    first orbit point past the rho-sphere still lies inside the probed
    stability ball."""
    for frac in np.linspace(0.95, 0.05, 19):
        rho = frac * delta_hat
        if rho + _overshoot_margin(f, target, rho, alpha_bar, level, n_grid) <= delta_hat:
            return rho
    return None


def _ascent_candidates(f, target, seed_radius, level, n_random, seed, axis_first=True):
    """Seeds a = target + seed_radius * d with f(a) strictly above the
    target value (floor 1e-12 * (1 + |level|)); axis directions first for
    minimum targets, quasi-random first for saddle targets."""
    floor = SEED_FLOOR_RTOL * (1.0 + abs(level))
    for d in _unit_directions(f.dim, n_random, seed, axis_first=axis_first):
        a = target + seed_radius * d
        if f.in_box(a) and f.value(a) > level + floor:
            yield a


def _first_crossing_orbit(f, a, s, rho, cap, target, kbar_max):
    """Reverse orbit anchored at a whose root is the first backward
    crossing of the rho-sphere.

    Searches for the smallest horizon whose orbit root leaves B_rho by
    doubling plus bisection; every probed horizon rebuilds the orbit from
    scratch with x_kbar = a, so the root keeps index 0 and the forward
    replay consumes the schedule from index 0.  The accepted root must
    also lie within the capture radius ``cap``; returns None when the box
    or the horizon budget interferes, or when every escaping root
    overshoots cap (callers then shrink the step scale).
    """
    def build(k):
        orbit = reverse_orbit(f, a, s, k)
        if orbit.status != "complete":
            return orbit, True  # box exit: overshoot, search downward
        return orbit, bool(np.linalg.norm(orbit.points[0] - target) > rho)

    def usable(orbit):
        return (orbit.status == "complete"
                and np.linalg.norm(orbit.points[0] - target) <= cap * (1.0 + 1e-9))

    lo, hi, hi_orbit = 0, None, None
    kbar = 1
    while kbar <= kbar_max:
        orbit, escaped = build(kbar)
        if escaped:
            hi, hi_orbit = kbar, orbit
            break
        lo = kbar
        kbar *= 2
    if hi is None:
        return None
    while hi - lo > 1 and not usable(hi_orbit):
        mid = (lo + hi) // 2
        orbit, escaped = build(mid)
        if escaped:
            hi, hi_orbit = mid, orbit
        else:
            lo = mid
    return hi_orbit if usable(hi_orbit) else None


def _failed(target, seed_radius, delta_used, status, ascent_seed=None,
            reverse_part=None, forward_part=None, escape_radius=float("nan")):
    return ReachReport(
        target=np.asarray(target, dtype=float),
        x0=None,
        reverse_part=reverse_part,
        forward_part=forward_part,
        final_distance=float("inf"),
        delta_used=float(delta_used),
        ascent_seed=ascent_seed,
        status=status,
        seed_radius=float(seed_radius),
        escape_radius=escape_radius,
    )


def _probe_delta(f, target, epsilon, s, mode, settings, budgets):
    if budgets.delta_override is not None:
        return float(budgets.delta_override)
    probe_eps = budgets.probe_epsilon if budgets.probe_epsilon is not None else epsilon
    est = stability_probe(
        f, target, probe_eps,
        constant(s.sup_alpha) if s is not None else None,
        n_samples=budgets.probe_samples, mode=mode, settings=settings,
        seed=budgets.seed, max_iter=budgets.probe_max_iter,
        gtol=budgets.probe_gtol, n_bisect=budgets.probe_bisect,
    )
    return est.delta_hat


def reach_discrete(f, target, epsilon, s, seed_radius, tol, budgets=None):
    """Construct x0 with |x0 - target| <= epsilon, x0 != target, from which
    gradient descent under the schedule converges back to the target.

    Pipeline: probe the stability radius delta_hat (with the constant
    schedule at the same sup alpha, the fastest member of the family the
    radius is uniform over); pick an ascent seed on the seed_radius
    sphere; escape the rho-sphere by reverse orbit; replay forward under
    the full schedule.  Success iff the forward limit lands within tol.
    """
    b = budgets or ReachBudgets()
    target = np.asarray(target, dtype=float)
    if f.catalog_entry(target, "local_min") is None:
        raise ValueError("target must be a cataloged local minimum")
    if not admissible(s, f, "prox"):
        raise ValueError("reach_discrete needs sup alpha < 1/L (prox regime)")
    if not (epsilon > 0.0 and seed_radius > 0.0 and tol > 0.0):
        raise ValueError("epsilon, seed_radius and tol must be positive")

    delta_hat = min(_probe_delta(f, target, epsilon, s, "discrete", None, b), epsilon)
    if delta_hat <= 0.0:
        return _failed(target, seed_radius, delta_hat, "no_escape")
    if seed_radius > 0.5 * delta_hat:
        raise ValueError(
            f"seed_radius {seed_radius} must be well inside the probed "
            f"stability radius {delta_hat}")

    level = f.value(target)
    gtol = b.gtol if b.gtol is not None else min(1e-8, 1e-3 * tol)
    cap = min(delta_hat, epsilon)
    s_cur = s
    for _ in range(b.alpha_shrinks + 1):
        rho = _escape_radius(f, target, delta_hat, s_cur.sup_alpha, level, b.margin_grid)
        if rho is not None and rho > seed_radius:
            for a in _ascent_candidates(f, target, seed_radius, level,
                                        b.scan_random, b.seed):
                orbit = _first_crossing_orbit(f, a, s_cur, rho, cap, target, b.kbar_max)
                if orbit is None:
                    continue
                x0 = orbit.points[0]
                traj = run_gd(f, x0, s_cur, gtol=gtol, max_iter=b.max_iter)
                end = traj.limit if traj.limit is not None else traj.final_x
                dist = float(np.linalg.norm(end - target))
                ok = traj.terminal_status == "converged" and dist <= tol
                return ReachReport(
                    target=target, x0=x0, reverse_part=orbit, forward_part=traj,
                    final_distance=dist, delta_used=delta_hat, ascent_seed=a,
                    status="success" if ok else "no_converge",
                    seed_radius=float(seed_radius), escape_radius=rho,
                )
        s_cur = s_cur.scaled(0.5)
    return _failed(target, seed_radius, delta_hat, "no_escape")


def reach_continuous(f, target, epsilon, settings, seed_radius, tol, budgets=None):
    """Continuous counterpart: reverse flow from the ascent seed to its
    first crossing of the delta_hat-sphere (the crossing is located on
    the sphere, so no overshoot margin is needed), then forward flow."""
    b = budgets or ReachBudgets()
    target = np.asarray(target, dtype=float)
    if f.catalog_entry(target, "local_min") is None:
        raise ValueError("target must be a cataloged local minimum")
    if not (epsilon > 0.0 and seed_radius > 0.0 and tol > 0.0):
        raise ValueError("epsilon, seed_radius and tol must be positive")

    delta_hat = min(_probe_delta(f, target, epsilon, None, "continuous", settings, b),
                    epsilon)
    if delta_hat <= 0.0:
        return _failed(target, seed_radius, delta_hat, "no_escape")
    if seed_radius > 0.5 * delta_hat:
        raise ValueError(
            f"seed_radius {seed_radius} must be well inside the probed "
            f"stability radius {delta_hat}")

    level = f.value(target)
    for a in _ascent_candidates(f, target, seed_radius, level, b.scan_random, b.seed):
        try:
            _, bpt, rev = _sphere_exit_detail(f, a, "reverse", target, delta_hat, settings)
        except (NoCrossingError, LeftBoxError):
            continue
        fwd = integrate(f, bpt, "forward", settings)
        end = fwd.limit if fwd.limit is not None else fwd.final_x
        dist = float(np.linalg.norm(end - target))
        ok = fwd.terminal_status == "converged" and dist <= tol
        return ReachReport(
            target=target, x0=bpt, reverse_part=rev, forward_part=fwd,
            final_distance=dist, delta_used=delta_hat, ascent_seed=a,
            status="success" if ok else "no_converge",
            seed_radius=float(seed_radius), escape_radius=delta_hat,
        )
    return _failed(target, seed_radius, delta_hat, "no_escape")


def _run_to_level(f, x0, s, level, gtol, max_iter):
    """GD until f(x_k) <= level; returns (trajectory, crossing or None).

    The crossing is the linear interpolation between the last state above
    the level and the first at or below it, i.e. the point where the
    piecewise-linear interpolation of the iterates crosses the level set.
    """
    x = np.array(x0, dtype=float)
    g = f.gradient(x)
    gn = float(np.linalg.norm(g))
    fx = f.value(x)
    states = [State(0, 0.0, x.copy(), fx, gn)]
    div_thresh = DIVERGENCE_FACTOR * (1.0 + f.box_diameter())
    t = 0.0
    status, crossing = "budget_exhausted", None
    for k in range(max_iter):
        if fx <= level:
            status = "converged"
            crossing = x.copy()
            break
        if gn < gtol:
            status = "converged"  # stalled at a critical point above the level
            break
        a = s.alpha(k)
        x_prev, f_prev = x, fx
        x = x - a * g
        t += a
        g = f.gradient(x)
        gn = float(np.linalg.norm(g))
        fx = f.value(x)
        states.append(State(k + 1, t, x.copy(), fx, gn))
        if fx <= level:
            theta = (f_prev - level) / (f_prev - fx) if f_prev > fx else 1.0
            status = "converged"
            crossing = x_prev + theta * (x - x_prev)
            break
        if not f.in_box(x):
            status = "left_box"
            break
        if np.linalg.norm(x) > div_thresh:
            status = "diverged"
            break
    traj = emit(Trajectory(
        states=tuple(states),
        terminal_status=status,
        limit=crossing,
        provenance={"producer": "gd", "f": f, "schedule": s, "gtol": gtol,
                    "unsafe": False, "stopped_on": "level_crossing"},
    ))
    return traj, crossing


def reach_general(f, target, epsilon, mode, seed_radius, tol=1e-2, delta=None,
                  s=None, settings=None, budgets=None):
    """Reach a cataloged saddle (critical, neither local max nor min).

    continuous: run the minimum-targeting pipeline on g = max{f, f(target)}
    (the target is a local minimum of g but not a local maximum), with the
    forward capture by the minimum-norm flow, which stalls on the level
    set; the reported distance is from the stall point to the target.
    discrete: reverse orbit through {f > f(target)} on f itself, forward
    replay, and linear interpolation to the first crossing of the level
    f(target); the reported distance shrinks as seed_radius shrinks.

    Axis directions are scanned after quasi-random ones here: for saddles
    they can lie on the stable manifold, where the forward dynamics never
    cross the level set.
    """
    b = budgets or ReachBudgets()
    target = np.asarray(target, dtype=float)
    if f.catalog_entry(target, "saddle") is None:
        raise ValueError("target must be a cataloged saddle")
    cls = classify_limit(f, target)
    if cls.kind != "saddle":
        raise ValueError(f"classify_limit disagrees with the catalog: {cls.kind}")
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown mode {mode!r}")
    if delta is None:
        delta = 0.5 * epsilon
    if not (0.0 < seed_radius < delta <= epsilon):
        raise ValueError("need 0 < seed_radius < delta <= epsilon")

    level = f.value(target)
    candidates = _ascent_candidates(f, target, seed_radius, level,
                                    b.scan_random, b.seed, axis_first=False)

    if mode == "continuous":
        if settings is None:
            raise ValueError("continuous mode needs FlowSettings")
        g = cap(f, level)
        for a in candidates:
            try:
                _, bpt, rev = _sphere_exit_detail(f, a, "reverse", target, delta, settings)
            except (NoCrossingError, LeftBoxError):
                continue
            fwd = integrate_minnorm(g, bpt, settings)
            stall = fwd.limit if fwd.limit is not None else fwd.final_x
            dist = float(np.linalg.norm(stall - target))
            ok = fwd.terminal_status == "converged" and dist <= tol
            return ReachReport(
                target=target, x0=bpt, reverse_part=rev, forward_part=fwd,
                final_distance=dist, delta_used=float(delta), ascent_seed=a,
                status="success" if ok else "no_converge",
                seed_radius=float(seed_radius), escape_radius=float(delta),
                crossing=stall,
            )
        return _failed(target, seed_radius, delta, "no_escape")

    if s is None or not admissible(s, f, "prox"):
        raise ValueError("discrete mode needs a schedule with sup alpha < 1/L")
    gtol = b.gtol if b.gtol is not None else min(1e-8, 1e-3 * tol)
    for a in candidates:
        orbit = _first_crossing_orbit(f, a, s, delta, epsilon, target, b.kbar_max)
        if orbit is None:
            continue
        x0 = orbit.points[0]
        traj, crossing = _run_to_level(f, x0, s, level, gtol, b.max_iter)
        if crossing is None:
            end = traj.final_x
            return ReachReport(
                target=target, x0=x0, reverse_part=orbit, forward_part=traj,
                final_distance=float(np.linalg.norm(end - target)),
                delta_used=float(delta), ascent_seed=a, status="no_converge",
                seed_radius=float(seed_radius), escape_radius=float(delta),
            )
        dist = float(np.linalg.norm(crossing - target))
        return ReachReport(
            target=target, x0=x0, reverse_part=orbit, forward_part=traj,
            final_distance=dist, delta_used=float(delta), ascent_seed=a,
            status="success" if dist <= tol else "no_converge",
            seed_radius=float(seed_radius), escape_radius=float(delta),
            crossing=crossing,
        )
    return _failed(target, seed_radius, delta, "no_escape")


def edge_of_stability(f, alpha, x0):
    """Exact convergence verdict for gradient descent on the quad builtin.

    Spectral criterion on the eigendirections carrying x0: with
    r = max |1 - alpha * l_i| over components where x0 is nonzero, the
    verdict is converges (r < 1), diverges (r > 1) or neutral (r = 1).
    Cross-checked by running 10^3 iterations and thresholding |x|; only a
    clear contradiction raises.
    """
    if f.name != "quad":
        raise ValueError("the exact spectral criterion applies to the quad builtin only")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    lam = np.array(f.params)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (f.dim,):
        raise ValueError(f"x0 must have dimension {f.dim}")
    supported = np.abs(x0) > 0.0
    r = float(np.abs(1.0 - alpha * lam)[supported].max()) if supported.any() else 0.0
    if r < 1.0:
        verdict = "converges"
    elif r > 1.0:
        verdict = "diverges"
    else:
        verdict = "neutral"

    x = x0.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(1000):
            x = x - alpha * (lam * x)
    n0 = float(np.linalg.norm(x0))
    n1 = float(np.linalg.norm(x))
    threshold = max(10.0 * n0, DIVERGENCE_FACTOR * (1.0 + f.box_diameter()))
    empirical = None
    if not np.isfinite(n1) or n1 > threshold:
        empirical = "diverges"
    elif n0 == 0.0 or n1 < 0.1 * n0:
        empirical = "converges"
    elif 0.5 * n0 <= n1 <= 2.0 * n0:
        empirical = "neutral"
    if empirical is not None and {verdict, empirical} == {"converges", "diverges"}:
        raise ArithmeticError(
            f"spectral verdict {verdict} contradicts the {empirical} iteration check")
    return verdict
