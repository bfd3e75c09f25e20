"""Fixed-step classical Runge-Kutta with domain-guarded step refinement."""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import DomainEscape, NonFinite

MAX_HALVINGS = 40


class _InfeasibleStage(Exception):
    pass


def _rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + (0.5 * h) * k1)
    k3 = f(z + (0.5 * h) * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def integrate_grid(
    rhs: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    T: float,
    steps: int,
    feasible: Optional[Callable[[np.ndarray], bool]] = None,
) -> np.ndarray:
    """Integrate dz/dt = rhs(z) on a uniform grid of `steps` intervals.

    Returns an array of shape (steps + 1, len(z0)). When a `feasible`
    predicate is given, any grid step whose result (or internal stage) is
    infeasible is retried with halved substeps, up to MAX_HALVINGS levels,
    before raising DomainEscape. States that stop being finite raise
    NonFinite.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z0 = np.asarray(z0, dtype=float)
    h = T / steps

    if feasible is None:
        guarded = rhs
    else:
        def guarded(z):
            if not feasible(z):
                raise _InfeasibleStage
            return rhs(z)

    # refinement exists to recover marginal steps; a trajectory that keeps
    # demanding substeps is running into a genuine escape, so cap the total
    budget = [4 * steps + 1000]

    def advance(z, dt, depth):
        budget[0] -= 1
        if budget[0] < 0:
            raise DomainEscape("integration exceeded its refinement budget")
        try:
            znew = _rk4_step(guarded, z, dt)
            bad = not np.all(np.isfinite(znew))
            if not bad and feasible is not None:
                bad = not feasible(znew)
        except _InfeasibleStage:
            znew, bad = None, True
        if not bad:
            return znew
        if depth >= MAX_HALVINGS:
            if znew is not None and not np.all(np.isfinite(znew)):
                raise NonFinite("state overflowed during integration")
            raise DomainEscape("state left the domain and refinement failed")
        zmid = advance(z, 0.5 * dt, depth + 1)
        return advance(zmid, 0.5 * dt, depth + 1)

    out = np.empty((steps + 1, z0.size))
    out[0] = z0
    z = z0
    for i in range(steps):
        z = advance(z, h, 0)
        out[i + 1] = z
    if not np.all(np.isfinite(out)):
        raise NonFinite("integration produced non-finite states")
    return out
