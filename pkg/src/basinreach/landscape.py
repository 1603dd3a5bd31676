"""Benchmark objectives with exact gradients, Lipschitz data and
critical-point catalogs, plus the max-of-smooth-pieces machinery
(generator sets and minimum-norm element) used by the nonsmooth
capped dynamics.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np


class LeftBoxError(RuntimeError):
    """An iterate left the operating box on which the Lipschitz constant holds."""

    def __init__(self, point, message="iterate left the operating box"):
        super().__init__(message)
        self.point = np.asarray(point, dtype=float)


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    point: np.ndarray
    kind: str  # local_min | local_max | saddle
    f_value: float


CRITICAL_KINDS = ("local_min", "local_max", "saddle")


@dataclass(frozen=True, eq=False)
class ObjectiveFunction:
    """A C^1 objective on an axis-aligned operating box.

    ``lipschitz_L`` is a gradient Lipschitz constant valid on ``box``
    (shape (dim, 2), rows are [lower, upper]).  Iterating outside the
    box voids every certificate, so the dynamics modules treat exits as
    first-class events.  ``lipschitz_L == 0`` is allowed for constant
    pieces used by :func:`cap`.  Instances are immutable; arrays are
    defensive copies and must be treated as read-only.
    """

    dim: int
    f: object
    grad: object
    lipschitz_L: float
    box: np.ndarray
    critical_points: tuple = ()
    hessian: object = None
    name: str = ""
    params: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.lipschitz_L < 0:
            raise ValueError("lipschitz_L must be nonnegative")
        box = np.array(self.box, dtype=float)
        if box.shape != (self.dim, 2) or np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("box must be (dim, 2) with lower < upper")
        object.__setattr__(self, "box", box)
        pad = 1e-12 * (1.0 + np.abs(box).max())
        object.__setattr__(self, "_box_lo", box[:, 0] - pad)
        object.__setattr__(self, "_box_hi", box[:, 1] + pad)

    def value(self, x):
        return float(self.f(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float)

    def hess(self, x):
        if self.hessian is None:
            raise ValueError(f"objective {self.name!r} has no Hessian")
        return np.asarray(self.hessian(np.asarray(x, dtype=float)), dtype=float)

    def grad_norm(self, x):
        return float(np.linalg.norm(self.gradient(x)))

    def in_box(self, x):
        x = np.asarray(x, dtype=float)
        return not (np.any(x < self._box_lo) or np.any(x > self._box_hi))

    def box_diameter(self):
        return float(np.linalg.norm(self.box[:, 1] - self.box[:, 0]))

    def catalog_entry(self, point, kind=None, tol=1e-8):
        """Catalog entry matching ``point`` (and ``kind`` if given), or None."""
        point = np.asarray(point, dtype=float)
        for cp in self.critical_points:
            if np.linalg.norm(cp.point - point) <= tol * (1.0 + np.linalg.norm(point)):
                if kind is None or cp.kind == kind:
                    return cp
        return None


@dataclass(frozen=True, eq=False)
class MaxFunction:
    """Pointwise maximum of smooth pieces sharing dim and box.

    ``activity_tol`` is a relative coefficient: piece i is active at x
    iff piece_i(x) >= value(x) - activity_tol * (1 + |value(x)|).  Exact
    ties are measure-zero in floating point, hence the relative band.
    """

    pieces: tuple
    activity_tol: float = 1e-9

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("MaxFunction needs at least one piece")
        dim = self.pieces[0].dim
        box = self.pieces[0].box
        for p in self.pieces:
            if p.dim != dim or not np.array_equal(p.box, box):
                raise ValueError("pieces must share dim and box")
        if self.activity_tol < 0:
            raise ValueError("activity_tol must be nonnegative")
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def dim(self):
        return self.pieces[0].dim

    @property
    def box(self):
        return self.pieces[0].box

    @property
    def lipschitz_L(self):
        return max(p.lipschitz_L for p in self.pieces)

    def value(self, x):
        return max(p.value(x) for p in self.pieces)

    def active_indices(self, x):
        vals = [p.value(x) for p in self.pieces]
        top = max(vals)
        band = self.activity_tol * (1.0 + abs(top))
        return [i for i, v in enumerate(vals) if v >= top - band]

    def in_box(self, x):
        return self.pieces[0].in_box(x)

    def box_diameter(self):
        return self.pieces[0].box_diameter()


# ---------------------------------------------------------------------------
# builtins

# Himmelblau critical points, produced once by a Newton root-finding oracle
# on the gradient refined to 1e-12 (see refine_critical_point); the
# regeneration test re-derives them from rounded seeds.
HIMMELBLAU_CRITICAL_POINTS = (
    ((3.0, 2.0), "local_min"),
    ((-2.805118086952745, 3.131312518250573), "local_min"),
    ((-3.779310253377747, -3.2831859912861696), "local_min"),
    ((3.5844283403304917, -1.8481265269644034), "local_min"),
    ((-0.2708445906673476, -0.9230385564799815), "local_max"),
    ((-3.0730257507643897, -0.08135304428796751), "saddle"),
    ((-0.12796134673068005, -1.9537149802445766), "saddle"),
    ((0.08667750455539634, 2.884254701174776), "saddle"),
    ((3.385154183607021, 0.0738518798377493), "saddle"),
)

BUILTIN_NAMES = ("quad", "double_well", "himmelblau")


def _himmelblau_value(p):
    x, y = p
    return (x * x + y - 11.0) ** 2 + (x + y * y - 7.0) ** 2


def _himmelblau_grad(p):
    x, y = p
    return np.array([
        4.0 * x * (x * x + y - 11.0) + 2.0 * (x + y * y - 7.0),
        2.0 * (x * x + y - 11.0) + 4.0 * y * (x + y * y - 7.0),
    ])


def _himmelblau_hess(p):
    x, y = p
    return np.array([
        [12.0 * x * x + 4.0 * y - 42.0, 4.0 * (x + y)],
        [4.0 * (x + y), 12.0 * y * y + 4.0 * x - 26.0],
    ])


def make_builtin(name, params=()):
    """Construct a benchmark objective by name.

    quad:        params are eigenvalues l_1..l_n (all > 0), f = 0.5*sum l_i x_i^2,
                 L = max l_i (global), box [-10, 10]^n.
    double_well: 1-D f(x) = (x^2 - 1)^2 on [-b, b] (params optionally (b,),
                 default b = 1.5, b >= 1 required), L = 12 b^2 - 4.
    himmelblau:  f(x, y) = (x^2 + y - 11)^2 + (x + y^2 - 7)^2 on [-5, 5]^2.
                 L = 326.79215610874223, the max spectral norm of the Hessian
                 over the box corners; the Hessian entries are quadratics with
                 no interior stationary points, and a dense-grid cross-check
                 reproduces the same constant.
    """
    params = tuple(float(v) for v in params)
    if name == "quad":
        if not params:
            raise ValueError("quad needs at least one eigenvalue")
        lam = np.array(params)
        if np.any(lam <= 0.0):
            raise ValueError("quad eigenvalues must be positive (0 must be a minimum)")
        n = lam.size
        box = np.array([[-10.0, 10.0]] * n)
        crit = (CriticalPoint(np.zeros(n), "local_min", 0.0),)
        return ObjectiveFunction(
            dim=n,
            f=lambda x, lam=lam: 0.5 * float(lam @ (x * x)),
            grad=lambda x, lam=lam: lam * x,
            hessian=lambda x, lam=lam: np.diag(lam),
            lipschitz_L=float(lam.max()),
            box=box,
            critical_points=crit,
            name="quad",
            params=params,
        )
    if name == "double_well":
        b = params[0] if params else 1.5
        if b < 1.0:
            raise ValueError("double_well box half-width must be >= 1")
        box = np.array([[-b, b]])
        crit = (
            CriticalPoint(np.array([-1.0]), "local_min", 0.0),
            CriticalPoint(np.array([0.0]), "local_max", 1.0),
            CriticalPoint(np.array([1.0]), "local_min", 0.0),
        )
        return ObjectiveFunction(
            dim=1,
            f=lambda x: float((x[0] * x[0] - 1.0) ** 2),
            grad=lambda x: np.array([4.0 * x[0] * (x[0] * x[0] - 1.0)]),
            hessian=lambda x: np.array([[12.0 * x[0] * x[0] - 4.0]]),
            lipschitz_L=12.0 * b * b - 4.0,
            box=box,
            critical_points=crit,
            name="double_well",
            params=(b,),
        )
    if name == "himmelblau":
        if params:
            raise ValueError("himmelblau takes no parameters")
        box = np.array([[-5.0, 5.0], [-5.0, 5.0]])
        corners = [np.array(c, dtype=float) for c in itertools.product((-5.0, 5.0), repeat=2)]
        lip = max(float(np.linalg.norm(_himmelblau_hess(c), 2)) for c in corners)
        crit = tuple(
            CriticalPoint(np.array(p), kind, _himmelblau_value(p))
            for p, kind in HIMMELBLAU_CRITICAL_POINTS
        )
        return ObjectiveFunction(
            dim=2,
            f=_himmelblau_value,
            grad=_himmelblau_grad,
            hessian=_himmelblau_hess,
            lipschitz_L=lip,
            box=box,
            critical_points=crit,
            name="himmelblau",
            params=(),
        )
    raise ValueError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")


def refine_critical_point(f, x0, tol=1e-12, max_iter=100):
    """Newton iteration on the gradient; the oracle behind the frozen catalogs."""
    x = np.asarray(x0, dtype=float)
    for _ in range(max_iter):
        g = f.gradient(x)
        if np.linalg.norm(g) <= tol:
            try:
                x = x - np.linalg.solve(f.hess(x), f.gradient(x))  # one polish step
            except np.linalg.LinAlgError:
                pass
            return x
        x = x - np.linalg.solve(f.hess(x), g)
    raise RuntimeError(f"Newton refinement did not reach |grad| <= {tol} from {x0}")


def fd_gradient(f, x, rel_step=1e-6):
    """Central-difference gradient, the independent check on analytic gradients."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h)
    return g


# ---------------------------------------------------------------------------
# capped construction and Clarke machinery


def constant_objective(dim, level, box, name=None):
    level = float(level)
    return ObjectiveFunction(
        dim=dim,
        f=lambda x, c=level: c,
        grad=lambda x, n=dim: np.zeros(n),
        hessian=lambda x, n=dim: np.zeros((n, n)),
        lipschitz_L=0.0,
        box=box,
        name=name if name is not None else f"const({level!r})",
    )


def cap(f, level):
    """max{f, level}: the capped function whose minima include every
    non-maximum critical point of f at value ``level``."""
    level = float(level)
    if not np.isfinite(level):
        raise ValueError("cap level must be finite")
    const = constant_objective(f.dim, level, f.box)
    return MaxFunction(pieces=(f, const))


def clarke_generators(g, x):
    """Gradients of the pieces active at x, in piece-index order.

    Their convex hull is the Clarke subdifferential of the max-function.
    """
    x = np.asarray(x, dtype=float)
    if not g.in_box(x):
        raise LeftBoxError(x, "generator query outside the operating box")
    return [g.pieces[i].gradient(x) for i in g.active_indices(x)]


def _affine_min_norm_weights(points):
    # Minimum-norm point of the affine hull: KKT system for
    # min |w P|^2  s.t.  sum w = 1  (w unconstrained in sign).
    m = points.shape[0]
    a = np.zeros((m + 1, m + 1))
    a[:m, :m] = points @ points.T
    a[:m, m] = 1.0
    a[m, :m] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(a, b, rcond=None)[0]
    return sol[:m]


def min_norm_element(generators, tol=1e-12):
    """Minimum-Euclidean-norm point of the convex hull of the generators.

    Wolfe's active-set method: keep a corral of affinely independent
    generators, alternate the affine minimizer with line searches back to
    the simplex, and stop when <x, g> >= |x|^2 - tol*(1 + |x|^2) for all
    generators, which certifies the hull minimum to ~2*tol in the
    squared objective.
    """
    pts = np.array([np.asarray(g, dtype=float) for g in generators])
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("min_norm_element needs a nonempty generator list")
    m = pts.shape[0]
    if m == 1:
        return pts[0].copy()

    start = int(np.argmin(np.einsum("ij,ij->i", pts, pts)))
    corral = [start]
    w = np.array([1.0])
    x = pts[start].copy()
    for _ in range(16 * m * m + 64):
        dots = pts @ x
        xx = float(x @ x)
        j = int(np.argmin(dots))
        if dots[j] >= xx - tol * (1.0 + xx) or j in corral:
            return x
        corral.append(j)
        w = np.append(w, 0.0)
        while True:
            v = _affine_min_norm_weights(pts[corral])
            if np.all(v > 1e-14):
                w = v
                break
            shrink = v <= 1e-14
            theta = min(1.0, float(np.min(w[shrink] / (w[shrink] - v[shrink]))))
            w = w + theta * (v - w)
            w[w < 1e-14] = 0.0
            keep = w > 0.0
            corral = [c for c, k in zip(corral, keep) if k]
            w = w[keep]
            w = w / w.sum()
        x = w @ pts[corral]
    return x
