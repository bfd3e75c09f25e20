import math

import numpy as np
import pytest

from bridgelab import (
    DomainEscape,
    Potential,
    Trajectory,
    UnsupportedKind,
    closed_form_flow,
    concavity_profile,
    gradient_flow,
)
from bridgelab.potential import POSITIVE_ORTHANT


def test_quadratic_flow_hits_exponential_decay():
    P = Potential.quadratic_isotropic(1)
    traj = gradient_flow(P, [1.0], 1.0)
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-8)
    assert traj.states[0, 0] == 1.0  # initial condition exact


def test_neglog_flow_hits_sqrt_profile():
    P = Potential.neg_log(1)
    traj = gradient_flow(P, [1.0], 4.0)
    assert traj.states[-1, 0] == pytest.approx(3.0, abs=1e-8)


def test_flow_oracle_agreement_on_fine_grids():
    for kind, P, x0 in (
        ("quadratic_isotropic", Potential.quadratic_isotropic(1), [2.0]),
        ("neg_log", Potential.neg_log(1), [1.0]),
    ):
        for T in (1.0, 10.0):
            steps = int(1000 * T)
            traj = gradient_flow(P, x0, T, steps=steps)
            exact = np.array([closed_form_flow(kind, x0, t)[0] for t in traj.times])
            assert np.max(np.abs(traj.states[:, 0] - exact)) <= 1e-7


def test_closed_form_flow_values():
    np.testing.assert_allclose(
        closed_form_flow("quadratic_isotropic", [2.0, 0.0], math.log(2.0)), [1.0, 0.0]
    )
    assert closed_form_flow("neg_log", [1.0], 0.0)[0] == 1.0
    assert closed_form_flow("neg_log", [1.0], 4.0)[0] == pytest.approx(3.0)
    with pytest.raises(UnsupportedKind):
        closed_form_flow("quadratic_matrix", [1.0], 1.0)


def test_flow_velocities_are_negative_gradients():
    P = Potential.neg_log(2)
    traj = gradient_flow(P, [1.0, 2.0], 2.0)
    np.testing.assert_allclose(traj.velocities, -P.grad_many(traj.states))


def test_monotone_dissipation_along_flows():
    for P, x0 in (
        (Potential.quadratic_isotropic(2), [1.5, -2.0]),
        (Potential.neg_log(2), [0.5, 3.0]),
    ):
        traj = gradient_flow(P, x0, 5.0)
        values = P.value_many(traj.states)
        assert np.all(np.diff(values) <= 1e-10)


def test_costa_profile_concave_along_neglog_flow():
    for d, x0 in ((1, [1.0]), (2, [1.0, 2.0])):
        P = Potential.neg_log(d)
        traj = gradient_flow(P, x0, 4.0, steps=1600)
        phi = P.value_many(traj.states)
        prof = concavity_profile(traj.times, phi, 2.0 / P.n_dim)
        scale = np.max(np.abs(prof.values))
        assert prof.max_second_difference <= 1e-8 * scale


def test_fisher_decay_along_neglog_flow():
    for d, x0 in ((1, [1.0]), (3, [0.5, 1.0, 2.0])):
        P = Potential.neg_log(d)
        traj = gradient_flow(P, x0, 5.0)
        grads = P.grad_many(traj.states)
        fisher = np.sum(grads**2, axis=1)
        t = traj.times
        bound = P.n_dim / (2.0 * t[1:])
        assert np.all(fisher[1:] <= bound + 1e-10)


def test_entropy_gap_bound_along_neglog_flow():
    for d, x0 in ((1, [1.0]), (2, [0.5, 2.0])):
        P = Potential.neg_log(d)
        n = P.n_dim
        for T in (0.5, 2.0, 10.0):
            traj = gradient_flow(P, x0, T)
            lhs = P.value(traj.states[0]) - P.value(traj.states[-1])
            g0 = P.grad(traj.states[0])
            rhs = 0.5 * n * math.log1p((2.0 * T / n) * float(g0 @ g0))
            assert lhs <= rhs + 1e-8


def test_flow_escape_raises():
    # constant drift toward the boundary of the positive orthant
    P = Potential.custom(
        1,
        lambda x: float(x[0]),
        grad_fn=lambda x: np.ones(1),
        domain=POSITIVE_ORTHANT,
    )
    with pytest.raises(DomainEscape):
        gradient_flow(P, [0.5], 2.0, steps=100)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0]), np.zeros((1, 1)), np.zeros((1, 1)))
    traj = Trajectory(np.array([0.0, 0.5, 1.0]), np.zeros((3, 2)), np.zeros((3, 2)))
    assert traj.dim == 2 and traj.spacing() == 0.5
