"""Step-size sequences with the stability/prox admissibility thresholds
made checkable.  Only nonsummable families are constructible.
"""

import math
from dataclasses import dataclass

import numpy as np

SCHEDULE_KINDS = ("constant", "power")


@dataclass(frozen=True)
class StepSchedule:
    """alpha_k = c (constant) or c / (k+1)^p with p in [0, 1] (power).

    p > 1 would make the sequence summable and is rejected: every
    reachability and stability statement assumes a divergent step sum.
    sup_alpha = c for both kinds.
    """

    kind: str
    c: float
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.c > 0.0:
            raise ValueError("step scale c must be positive")
        if self.kind == "power" and not 0.0 <= self.p <= 1.0:
            raise ValueError("power exponent must lie in [0, 1] (nonsummable)")

    @property
    def sup_alpha(self):
        return self.c

    def alpha(self, k):
        if self.kind == "constant":
            return self.c
        return self.c / (k + 1.0) ** self.p

    def partial_sum(self, K):
        """sum_{k=0}^{K-1} alpha_k."""
        if K < 0:
            raise ValueError("K must be nonnegative")
        if self.kind == "constant":
            return self.c * K
        return self.c * float(np.sum((np.arange(K) + 1.0) ** -self.p))

    def index_reaching(self, M):
        """An explicit K with partial_sum(K) > M (witness of nonsummability)."""
        if M <= 0.0:
            return 1
        if self.kind == "constant":
            return int(math.ceil(M / self.c)) + 1
        if self.p == 1.0:
            # sum >= c * ln(K + 1)
            return int(math.ceil(math.exp(M / self.c)))
        # sum >= c * ((K + 1)^(1-p) - 1) / (1 - p)
        q = 1.0 - self.p
        return int(math.ceil((M * q / self.c + 1.0) ** (1.0 / q))) + 1

    def scaled(self, factor):
        """Same family with c scaled; used when shrinking sup_alpha."""
        return StepSchedule(self.kind, self.c * factor, self.p)


def constant(c):
    return StepSchedule("constant", c)


def power(c, p):
    return StepSchedule("power", c, p)


def admissible(s, f, regime):
    """stability: sup alpha < 2/L (plain descent); prox: sup alpha < 1/L
    (the regime in which the implicit reverse step is a contraction)."""
    if regime not in ("stability", "prox"):
        raise ValueError(f"unknown regime {regime!r}")
    L = f.lipschitz_L
    if L == 0.0:
        return True
    bound = 2.0 / L if regime == "stability" else 1.0 / L
    return s.sup_alpha < bound


def parse_schedule(text):
    """CLI grammar: 'constant:0.5' or 'power:1.0:0.5' (c then p)."""
    parts = text.split(":")
    if parts[0] == "constant" and len(parts) == 2:
        return constant(float(parts[1]))
    if parts[0] == "power" and len(parts) == 3:
        return power(float(parts[1]), float(parts[2]))
    raise ValueError(f"bad schedule {text!r}; use constant:C or power:C:P")
