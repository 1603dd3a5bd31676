"""Exact reverse dynamics for gradient descent.

The proximal mapping and its ascent counterpart are solved by Picard
iteration on y -> x -/+ lambda * grad(y), a strict contraction with
factor lambda * L < 1, so the unique fixed point coincides with the
strongly convex (resp. concave) subproblem optimum and no inner line
search is needed.  The inner tolerance is two orders tighter than the
orbit certificates so residuals never need per-step retuning.
"""

import math
from dataclasses import dataclass

import numpy as np

from .landscape import LeftBoxError

FIXED_POINT_RTOL = 1e-13
FORWARD_RESIDUAL_RTOL = 1e-10
_MAX_INNER_ITER = 200_000


@dataclass(frozen=True, eq=False)
class ReverseOrbit:
    """Backward-constructed points x_start..x_kbar with x_kbar = anchor.

    ``points[i]`` is x_{start_index + i}; ``steps_used`` records the
    consumed alpha indices (kbar-1 down to start_index).  ``status`` is
    'left_box' when the construction escaped the operating box early and
    the orbit is partial; that exit is a legitimate escape event for the
    reachability pipeline.  forward_residuals[i] certifies
    |x_{k+1} - (x_k - alpha_k grad(x_k))| for consecutive points.
    """

    points: tuple
    steps_used: tuple
    anchor: np.ndarray
    forward_residuals: tuple
    status: str = "complete"
    start_index: int = 0


def _picard(f, base, lam, sign, tol_scale):
    """Fixed point of y -> base + sign * lam * grad(y).  Returns (y, iters)."""
    tol_sq = (FIXED_POINT_RTOL * (1.0 + tol_scale)) ** 2
    step = sign * lam
    grad = f.gradient
    lo, hi = f._box_lo, f._box_hi
    y = np.array(base, dtype=float)
    for it in range(1, _MAX_INNER_ITER + 1):
        y_next = base + step * grad(y)
        if np.any(y_next < lo) or np.any(y_next > hi):
            raise LeftBoxError(y_next, "fixed-point iterate left the operating box")
        d = y_next - y
        y = y_next
        if float(d @ d) <= tol_sq:
            return y, it
    raise ArithmeticError("fixed-point iteration failed to contract")


def contraction_iteration_bound(lam, L, tol=FIXED_POINT_RTOL):
    """ln(tol)/ln(lam*L) + 2, the certified Picard iteration count."""
    q = lam * L
    if not 0.0 < q < 1.0:
        raise ValueError("contraction bound needs lam * L in (0, 1)")
    return math.log(tol) / math.log(q) + 2.0


def _require_prox_regime(f, lam):
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    if f.lipschitz_L > 0.0 and not lam < 1.0 / f.lipschitz_L:
        raise ValueError(
            f"lambda {lam} is not below 1/L = {1.0 / f.lipschitz_L}: the implicit "
            "step is neither a contraction nor a strongly convex subproblem"
        )


def prox(f, x, lam):
    """argmin_y f(y) + |y - x|^2 / (2 lam) via the implicit equation
    y = x - lam * grad(y), for lam < 1/L."""
    x = np.asarray(x, dtype=float)
    _require_prox_regime(f, lam)
    if not f.in_box(x):
        raise LeftBoxError(x, "prox called outside the operating box")
    y, _ = _picard(f, x, lam, -1.0, float(np.linalg.norm(x)))
    return y


def prox_certificates(f, x, lam, xplus, slack_rtol=1e-9):
    """The two certified inequalities of the proximal step:

    dec_ok : f(x) - f(x+) >= (lam/2) |grad(x+)|^2
    step_ok: |x+ - x| <= 2 lam / (1 - L lam) |grad(x)|

    both with slack slack_rtol * (1 + |f(x)|).
    """
    x = np.asarray(x, dtype=float)
    xplus = np.asarray(xplus, dtype=float)
    fx = f.value(x)
    slack = slack_rtol * (1.0 + abs(fx))
    dec_ok = fx - f.value(xplus) >= 0.5 * lam * f.grad_norm(xplus) ** 2 - slack
    bound = 2.0 * lam / (1.0 - f.lipschitz_L * lam) * f.grad_norm(x)
    step_ok = float(np.linalg.norm(xplus - x)) <= bound + slack
    return dec_ok, step_ok


def ascent_prox(f, xnext, a):
    """argmax_y f(y) - |y - xnext|^2 / (2a): the exact preimage of an
    explicit gradient step, solved as the fixed point of
    y = xnext + a * grad(y) for a < 1/L.  The returned point replays
    forward onto xnext to within 1e-10 * (1 + |result|)."""
    xnext = np.asarray(xnext, dtype=float)
    _require_prox_regime(f, a)
    if not f.in_box(xnext):
        raise LeftBoxError(xnext, "ascent_prox called outside the operating box")
    y, _ = _picard(f, xnext, a, +1.0, float(np.linalg.norm(xnext)))
    residual = float(np.linalg.norm((y - a * f.gradient(y)) - xnext))
    if residual > FORWARD_RESIDUAL_RTOL * (1.0 + np.linalg.norm(y)):
        raise ArithmeticError(f"ascent step failed its inverse certificate: {residual:.3e}")
    return y


def reverse_orbit(f, a, s, kbar):
    """Build x_kbar = a and x_k = ascent_prox(f, x_{k+1}, alpha_k) for
    k = kbar-1 down to 0.

    The index alignment guarantees the forward replay
    x_{k+1} = x_k - alpha_k grad(x_k) consumes the schedule from index 0.
    A box exit mid-construction returns the partial orbit with status
    'left_box' rather than raising.
    """
    anchor = np.asarray(a, dtype=float)
    if kbar < 0:
        raise ValueError("kbar must be nonnegative")
    if not f.in_box(anchor):
        raise LeftBoxError(anchor, "orbit anchor outside the operating box")
    points = [anchor.copy()]
    steps = []
    status = "complete"
    start_index = 0
    for k in range(kbar - 1, -1, -1):
        try:
            prev = ascent_prox(f, points[0], s.alpha(k))
        except LeftBoxError:
            status = "left_box"
            start_index = k + 1
            break
        points.insert(0, prev)
        steps.append(k)
    residuals = []
    for i in range(len(points) - 1):
        k = start_index + i
        pred = points[i] - s.alpha(k) * f.gradient(points[i])
        residuals.append(float(np.linalg.norm(points[i + 1] - pred)))
    return ReverseOrbit(
        points=tuple(points),
        steps_used=tuple(steps),
        anchor=anchor.copy(),
        forward_residuals=tuple(residuals),
        status=status,
        start_index=start_index,
    )
