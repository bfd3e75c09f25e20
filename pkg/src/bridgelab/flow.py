"""Gradient-flow integration and the exactly solvable reference flows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._integrate import integrate_grid
from .errors import DomainError, NonUniformGrid, OffGrid, UnsupportedKind
from .potential import ALL_SPACE, NEG_LOG, QUADRATIC_ISOTROPIC, Potential

#: Relative spacing variation tolerated before a grid counts as non-uniform.
UNIFORMITY_RTOL = 1e-12


@dataclass
class Trajectory:
    """A time grid with one state and one velocity per node."""

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        n = self.times.shape[0]
        if n < 2:
            raise ValueError("a trajectory needs at least two nodes")
        if self.states.shape[0] != n or self.velocities.shape[0] != n:
            raise ValueError("times, states and velocities must have equal length")
        if self.states.shape != self.velocities.shape:
            raise ValueError("states and velocities must have matching shapes")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.times.shape[0]

    def spacing(self) -> float:
        """Uniform grid step; raises NonUniformGrid when spacing varies."""
        dt = np.diff(self.times)
        h = float(dt[0])
        if np.max(np.abs(dt - h)) > UNIFORMITY_RTOL * max(h, 1.0):
            raise NonUniformGrid("trajectory grid is not uniform")
        return h

    def index_of(self, t: float) -> int:
        """Grid index of time t; raises OffGrid when t is not a node."""
        h = self.spacing()
        idx = int(round((t - self.times[0]) / h))
        if idx < 0 or idx >= self.n_nodes or abs(self.times[idx] - t) > 1e-9 * max(1.0, abs(t)):
            raise OffGrid(f"time {t} is not a grid node")
        return idx

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.index_of(t)]

    def velocity_at(self, t: float) -> np.ndarray:
        return self.velocities[self.index_of(t)]


def default_steps(T: float) -> int:
    """Grid-interval heuristic keeping per-step error around 1e-10."""
    return int(math.ceil(max(100.0, 100.0 * T)))


def gradient_flow(P: Potential, x0, T: float, steps: int | None = None) -> Trajectory:
    """Integrate dS/dt = -F'(S) from x0 over [0, T] with classical RK4.

    The grid is uniform with `steps` intervals (default heuristic
    ``ceil(max(100, 100 T))``). Node velocities are -F'(state). For
    positive-orthant potentials a step that leaves the orthant is retried
    with halved substeps before DomainEscape is raised.
    """
    x0 = P.check_domain(x0)
    if T <= 0:
        raise ValueError("T must be positive")
    if steps is None:
        steps = default_steps(T)
    if steps < 2:
        raise ValueError("steps must be >= 2")

    feasible = P.in_domain if P.domain != "all_space" else None
    states = integrate_grid(lambda z: -P.grad_many(z[None, :])[0], x0, T, steps, feasible)
    times = np.linspace(0.0, T, steps + 1)
    velocities = -P.grad_many(states)
    traj = Trajectory(times, states, velocities)
    traj.states[0] = x0  # keep the initial condition exact
    return traj


def closed_form_flow(kind: str, x0, t: float) -> np.ndarray:
    """Exact gradient flow for the two solvable builtin potentials."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if kind == QUADRATIC_ISOTROPIC:
        return math.exp(-t) * x0
    if kind == NEG_LOG:
        return np.sqrt(2.0 * t + x0 * x0)
    raise UnsupportedKind(f"no closed-form flow for kind {kind!r}")
