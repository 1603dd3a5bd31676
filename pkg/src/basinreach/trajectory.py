"""Trajectory record shared by the discrete and continuous engines."""

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

TERMINAL_STATUSES = ("converged", "budget_exhausted", "left_box", "diverged")


@dataclass(frozen=True, eq=False)
class State:
    k: int
    t: float
    x: np.ndarray
    f_value: float
    grad_norm: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Immutable run record.  ``provenance`` carries the producing
    operation and its inputs so certificates can be re-checked later."""

    states: tuple
    terminal_status: str
    limit: np.ndarray = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.terminal_status not in TERMINAL_STATUSES:
            raise ValueError(f"bad terminal status {self.terminal_status!r}")
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.states)

    @property
    def initial_x(self):
        return self.states[0].x

    @property
    def final_x(self):
        return self.states[-1].x

    @property
    def final_state(self):
        return self.states[-1]


# Optional capture of every produced trajectory, used by the acceptance
# suite to assert the descent certificates on everything the run touched.
# Single-threaded use only.
_sink = None


@contextmanager
def record_trajectories(into):
    global _sink
    previous = _sink
    _sink = into
    try:
        yield into
    finally:
        _sink = previous


def emit(traj):
    if _sink is not None:
        _sink.append(traj)
    return traj
