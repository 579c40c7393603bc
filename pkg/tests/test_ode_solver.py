import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pdm_dyon.config import ScenarioConfig
from pdm_dyon.ode_solver import (
    MassProfile,
    Termination,
    _hermite_eval,
    branch_rhs,
    integrate_ivp,
    kummer_nodes,
    solve_branch,
    stitch,
)
from pdm_dyon.pdm_core import SpinBranch, mapping_rhs

DEFAULT = ScenarioConfig()


def test_zero_rhs_is_exact():
    prof = integrate_ivp(lambda r, M, dM: 0.0, 0.1, 1.0, 0.0, 2.0)
    assert prof.termination.kind is Termination.REACHED_END
    assert np.all(prof.M == 1.0) and np.all(prof.dM == 0.0)
    assert prof.mass(1.234) == 1.0


def test_harmonic_oscillator():
    prof = integrate_ivp(lambda r, M, dM: -M, 0.0, 1.0, 0.0, math.pi, mass_floor=None)
    assert prof.termination.completed
    assert prof.M[-1] == pytest.approx(-1.0, abs=1e-8)
    r = np.linspace(0, math.pi, 97)
    M, dM, d2M = prof.evaluate(r)
    assert np.max(np.abs(M - np.cos(r))) < 1e-8
    assert np.max(np.abs(dM + np.sin(r))) < 1e-8
    assert np.max(np.abs(d2M + np.cos(r))) < 1e-7


def test_backward_integration():
    prof = integrate_ivp(lambda r, M, dM: M, 1.0, math.e, math.e, 0.0)
    assert prof.span == (0.0, 1.0)
    assert prof.mass(0.0) == pytest.approx(1.0, rel=1e-9)


def test_blow_up_event_located():
    # M' = M^2 with M(0) = 1 diverges at r = 1; M = 1/(1-r) solves M'' = 2 M^3
    prof = integrate_ivp(lambda r, M, dM: 2 * M**3, 0.0, 1.0, 1.0, 2.0, blowup_threshold=1e3)
    assert prof.termination.kind is Termination.BLOW_UP
    assert prof.termination.r_event == pytest.approx(1 - 1e-3, abs=1e-8)


def test_mass_floor_event():
    prof = integrate_ivp(lambda r, M, dM: -1.0, 0.0, 1.0, 0.0, 5.0, mass_floor=0.5)
    assert prof.termination.kind is Termination.MASS_VANISHED
    assert prof.termination.r_event == pytest.approx(1.0, abs=1e-9)


def test_singular_barrier_gives_radial_node():
    prof = integrate_ivp(lambda r, M, dM: 0.0, 0.0, 1.0, 0.0, 2.0, singular_points=[1.5])
    assert prof.termination.kind is Termination.RADIAL_NODE
    assert prof.termination.r_event == 1.5
    assert prof.span[1] < 1.5


def test_invalid_arguments():
    with pytest.raises(ValueError):
        integrate_ivp(lambda r, M, dM: 0.0, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        integrate_ivp(lambda r, M, dM: 0.0, 0.0, 1.0, 0.0, 1.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        integrate_ivp(lambda r, M, dM: 0.0, 0.0, 1e-9, 0.0, 1.0)


def test_hermite_quintic_exact():
    p = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.5, -0.7, 1.1])
    x0, x1 = 0.2, 0.9
    y0 = (p(x0), p.deriv()(x0), p.deriv(2)(x0))
    y1 = (p(x1), p.deriv()(x1), p.deriv(2)(x1))
    x = np.linspace(x0, x1, 11)
    for order in range(3):
        assert np.allclose(_hermite_eval(x0, x1, y0, y1, order, x), p.deriv(order)(x), rtol=1e-12, atol=1e-12)


def test_profile_is_read_only():
    prof = integrate_ivp(lambda r, M, dM: 0.0, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        prof.M[0] = 3.0
    with pytest.raises(ValueError):
        prof.evaluate(1.5)


@pytest.fixture(scope="module")
def default_up():
    params = DEFAULT.mapping_params()
    return params, solve_branch(params, SpinBranch.UP, DEFAULT)


def test_matches_scipy_oracle(default_up):
    params, res = default_up
    rhs = branch_rhs(params, SpinBranch.UP)
    lo, hi = res.forward_span
    sol = solve_ivp(lambda r, y: [y[1], rhs(r, y[0], y[1])], (DEFAULT.r_i, 0.4), [1.0, 0.0],
                    method="DOP853", rtol=1e-12, atol=1e-16, dense_output=True)
    r = np.linspace(DEFAULT.r_i, 0.4, 40)
    assert np.allclose(res.profile.mass(r), sol.sol(r)[0], rtol=1e-7)


def test_dense_output_consistent_with_ode(default_up):
    params, res = default_up
    rng = np.random.default_rng(0)
    lo, hi = res.profile.span
    for r in rng.uniform(lo, hi, 50):
        M, dM, d2M = res.profile.evaluate(r)
        expect = mapping_rhs(r, M, dM, params, SpinBranch.UP)
        assert d2M == pytest.approx(expect, rel=1e-6, abs=1e-6 * abs(M) / r**2)


def test_dense_output_reproduces_nodes(default_up):
    _, res = default_up
    p = res.profile
    M, dM, _ = p.evaluate(p.r)
    assert np.allclose(M, p.M, rtol=1e-12, atol=0)
    assert np.allclose(dM, p.dM, rtol=1e-12, atol=0)
    assert np.all(p.M > 0)


def test_stitch_shares_start(default_up):
    _, res = default_up
    i = int(np.searchsorted(res.profile.r, DEFAULT.r_i))
    assert res.profile.r[i] == DEFAULT.r_i
    assert res.profile.M[i] == 1.0 and res.profile.dM[i] == 0.0
    assert np.all(np.diff(res.profile.r) > 0)


def test_tolerance_convergence():
    params = DEFAULT.mapping_params()
    rhs = branch_rhs(params, SpinBranch.UP)
    a = integrate_ivp(rhs, 0.2, 1.0, 0.0, 0.4, rel_tol=1e-10, abs_tol=1e-16)
    b = integrate_ivp(rhs, 0.2, 1.0, 0.0, 0.4, rel_tol=5e-11, abs_tol=1e-16)
    assert abs(a.M[-1] - b.M[-1]) < 10 * max(a.err_estimate, 1e-15)


def test_stitch_rejects_mismatched():
    a = integrate_ivp(lambda r, M, dM: 0.0, 1.0, 1.0, 0.0, 0.5)
    b = integrate_ivp(lambda r, M, dM: 0.0, 1.1, 1.0, 0.0, 1.5)
    with pytest.raises(ValueError):
        stitch(a, b)


def test_constant_free_profile():
    cfg = ScenarioConfig(mu=0, m=0, n=0, M_i=2.0)
    params = cfg.mapping_params()
    res = solve_branch(params, SpinBranch.UP, cfg)
    assert res.termination.completed and res.backward_termination.completed
    assert np.all(res.profile.M == 2.0)
    assert res.residual.max_rel_residual == 0.0
    assert all(u == 0.0 for _, u in res.u_eff_samples)


def test_kummer_nodes_stop_forward_run():
    cfg = ScenarioConfig(n=-2800, N=3)
    params = cfg.mapping_params()
    nodes = kummer_nodes(params)
    assert len(nodes) == 3
    res = solve_branch(params, SpinBranch.UP, cfg)
    lo, hi = res.profile.span
    assert not any(lo < x < hi for x in nodes)


def test_u_eff_samples_inside_span(default_up):
    _, res = default_up
    lo, hi = res.profile.span
    assert all(lo <= r <= hi for r, _ in res.u_eff_samples)
