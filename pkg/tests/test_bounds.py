import numpy as np
import pytest

from bridgelab import (
    DegenerateSeries,
    Potential,
    SolverOptions,
    closed_form_energy,
    closed_form_flow,
    closed_form_solution,
    fit_rate,
    solve_bridge_shooting,
    verify_bounds,
)
from bridgelab.bounds import EXPONENTIAL, POWER_LAW

NEGLOG = "neg_log"
QUAD = "quadratic_isotropic"


# -- rate fits ----------------------------------------------------------------


def test_fit_rate_exact_exponential():
    T = np.arange(1.0, 9.0)
    fit = fit_rate(T, np.exp(-T), EXPONENTIAL)
    assert fit.exponent == pytest.approx(-1.0, abs=1e-10)
    assert fit.prefactor == pytest.approx(1.0, abs=1e-10)
    assert fit.residual <= 1e-12


def test_fit_rate_exact_power_law():
    T = np.array([10.0, 100.0, 1000.0])
    fit = fit_rate(T, 5.0 / T, POWER_LAW)
    assert fit.exponent == pytest.approx(-1.0, abs=1e-12)
    assert fit.prefactor == pytest.approx(5.0, rel=1e-10)


def test_fit_rate_rejects_bad_series():
    with pytest.raises(DegenerateSeries):
        fit_rate([1.0, 2.0, 3.0, 4.0], [1.0, -1.0, 1.0, 1.0], POWER_LAW)
    with pytest.raises(DegenerateSeries):
        fit_rate([1.0, 1.0, 2.0, 3.0], [1.0, 1.0, 1.0, 1.0], POWER_LAW)
    with pytest.raises(DegenerateSeries):
        fit_rate([1.0], [1.0], POWER_LAW)


def test_fit_rate_neglog_energy_decay():
    Ts = [10.0, 100.0, 1000.0, 10000.0]
    vals = [abs(closed_form_energy(NEGLOG, [1.0], [1.0], T)) for T in Ts]
    fit = fit_rate(Ts, vals, POWER_LAW)
    assert fit.exponent == pytest.approx(-1.0, abs=0.05)


# -- bound catalogue -----------------------------------------------------------


def _by_id(reports):
    out = {}
    for rep in reports:
        out.setdefault(rep.bound_id, []).append(rep)
    return out


def test_quadratic_case_runs_the_convex_bounds_and_passes():
    P = Potential.quadratic_isotropic(1)
    opts = SolverOptions(grid_points=2001)
    sol = solve_bridge_shooting(P, [2.0], [1.0], 5.0, opts)
    reports = verify_bounds(P, [2.0], [1.0], 5.0, solution=sol, opts=opts)
    groups = _by_id(reports)
    assert set(groups) == {"B4", "B5", "B6", "B7", "B9", "B10"}
    for rep in reports:
        assert rep.passed, (rep.bound_id, rep.context, rep.lhs, rep.rhs)
    # both orientations present for the asymmetric bounds
    assert {r.context["orientation"] for r in groups["B4"]} == {"forward", "reversed"}


def test_neglog_case_runs_the_dimensional_bounds_and_passes():
    P = Potential.neg_log(1)
    opts = SolverOptions(grid_points=2001)
    sol = solve_bridge_shooting(P, [1.0], [1.0], 10.0, opts)
    reports = verify_bounds(P, [1.0], [1.0], 10.0, solution=sol, opts=opts)
    groups = _by_id(reports)
    assert set(groups) == {"B1", "B2", "B3", "B8", "B11", "B12"}
    for rep in reports:
        assert rep.passed, (rep.bound_id, rep.context, rep.lhs, rep.rhs)


def test_b3_turnpike_value_neglog():
    P = Potential.neg_log(1)
    T = 10.0
    sol = closed_form_solution(NEGLOG, P, [1.0], [1.0], T, 2000)
    reports = verify_bounds(
        P, [1.0], [1.0], T, solution=sol, theta_values=[0.5], t_values=[T / 2], c1=1.0
    )
    b3 = [r for r in reports if r.bound_id == "B3"]
    assert len(b3) == 1
    assert b3[0].rhs == pytest.approx(0.2)
    assert b3[0].lhs == pytest.approx(-closed_form_energy(NEGLOG, [1.0], [1.0], T), rel=1e-9)
    assert b3[0].passed


def test_stationary_case_all_bounds_trivially_pass():
    P = Potential.quadratic_isotropic(1)
    sol = solve_bridge_shooting(P, [0.0], [0.0], 3.0)
    reports = verify_bounds(P, [0.0], [0.0], 3.0, solution=sol)
    assert reports
    for rep in reports:
        assert rep.passed
        assert abs(rep.lhs) <= 1e-10


def test_b6_is_tight_on_the_isotropic_quadratic():
    # equality case: the comparison solution of the second-order inequality
    P = Potential.quadratic_isotropic(1)
    T = 2.0
    sol = closed_form_solution(QUAD, P, [2.0], [1.0], T, 2000)
    reports = verify_bounds(P, [2.0], [1.0], T, solution=sol, both_orientations=False)
    b6 = [r for r in reports if r.bound_id == "B6"]
    assert len(b6) == 3
    for rep in b6:
        assert abs(rep.margin) <= 1e-9 * (1.0 + abs(rep.rhs))
        assert rep.passed


def test_b10_log_sobolev_equality_for_isotropic_quadratic():
    P = Potential.quadratic_isotropic(1)
    sol = closed_form_solution(QUAD, P, [2.0], [1.0], 2.0, 1000)
    reports = verify_bounds(P, [2.0], [1.0], 2.0, solution=sol, both_orientations=False)
    b10 = [r for r in reports if r.bound_id == "B10"]
    assert len(b10) == 2
    for rep in b10:
        assert rep.margin == pytest.approx(0.0, abs=1e-12)


def test_b1_cross_check_with_b3_midpoint():
    # at theta = 1/2 the turnpike right side equals the energy bound 2n/T
    P = Potential.neg_log(1)
    T = 10.0
    sol = closed_form_solution(NEGLOG, P, [1.0], [1.0], T, 2000)
    reports = verify_bounds(
        P, [1.0], [1.0], T, solution=sol, theta_values=[0.5], t_values=[T / 2], c1=1.0
    )
    b1_energy = [r for r in reports if r.bound_id == "B1" and r.context.get("part") == "energy"]
    b3 = [r for r in reports if r.bound_id == "B3"]
    assert b1_energy[0].rhs == pytest.approx(b3[0].rhs)
    assert b1_energy[0].lhs == pytest.approx(b3[0].lhs, rel=1e-9)


def test_full_grid_no_failures():
    # the acceptance-scale sweep, at a coarser grid to stay quick
    opts = SolverOptions(grid_points=2001)
    for P, x, y in (
        (Potential.neg_log(1), [1.0], [1.0]),
        (Potential.quadratic_isotropic(1), [2.0], [1.0]),
    ):
        for T in (2.0, 5.0):
            reports = verify_bounds(P, x, y, T, opts=opts)
            bad = [r for r in reports if not r.passed]
            assert not bad, [(r.bound_id, r.context.get("t"), r.margin) for r in bad]


def test_rate_of_convergence_to_flow_quadratic_exponential():
    P = Potential.quadratic_isotropic(1)
    Ts = list(range(2, 11))
    dists = []
    for T in Ts:
        sol = solve_bridge_shooting(P, [1.0], [1.0], float(T))
        idx = sol.trajectory.index_of(1.0)
        s1 = closed_form_flow(QUAD, [1.0], 1.0)[0]
        dists.append(abs(sol.trajectory.states[idx, 0] - s1))
    fit = fit_rate(Ts, dists, EXPONENTIAL)
    assert fit.exponent == pytest.approx(-1.0, abs=0.05)


def test_rate_of_convergence_to_flow_neglog_power_law():
    from bridgelab import closed_form_bridge

    Ts = [10.0, 100.0, 1000.0, 10000.0]
    s1 = closed_form_flow(NEGLOG, [1.0], 1.0)[0]
    dists = [abs(closed_form_bridge(NEGLOG, [1.0], [1.0], T, 1.0)[0] - s1) for T in Ts]
    fit = fit_rate(Ts, dists, POWER_LAW)
    assert fit.exponent == pytest.approx(-1.0, abs=0.1)
