import math

import numpy as np
import pytest

from pdm_dyon.config import ScenarioConfig
from pdm_dyon.ode_solver import MassProfile, integrate_ivp, solve_branch
from pdm_dyon.pdm_core import MappingParams, SpinBranch
from pdm_dyon.specfun import HalfInt
from pdm_dyon.target_system import QuantumNumbers
from pdm_dyon.verification import (
    ResidualReport,
    angular_operator_check,
    angular_remainder,
    branch_agreement,
    chebyshev_points,
    crossing_radius,
    k2_identity_check,
    ode_residual,
    pde_residual_at_point,
)

DEFAULT_Q = QuantumNumbers(mu=7, m=HalfInt(13), N=0, n=-1800)
THETA0 = math.radians(30)


def _angles(count=20, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.2, math.pi - 0.2, count), rng.uniform(0, 2 * math.pi, count)


def test_report_invariants():
    with pytest.raises(ValueError):
        ResidualReport(-1.0, None, 1)
    with pytest.raises(ValueError):
        ResidualReport(0.0, None, 0)


def test_chebyshev_points_interior_and_sorted():
    x = chebyshev_points(0.1, 0.5, 30)
    assert np.all(np.diff(x) > 0) and x[0] > 0.1 and x[-1] < 0.5


class TestAngular:
    def test_standard_harmonics_remainder(self):
        for l in range(4):
            rem = angular_remainder(0, l, 0, 1.1, 0.3)
            assert rem == pytest.approx(-l * (l + 1), abs=1e-6)

    def test_measured_sign_uniform(self):
        values = []
        for t, p in zip(*_angles()):
            values.extend(angular_operator_check(DEFAULT_Q, t, p, 5e-4).measured_s)
        s = round(values[0])
        assert abs(s) == 1
        assert max(abs(v - s) for v in values) < 1e-4

    def test_measured_sign_independent_of_phi(self):
        a = angular_operator_check(DEFAULT_Q, 0.9, 0.0).measured_s
        b = angular_operator_check(DEFAULT_Q, 0.9, 2.5).measured_s
        assert a == pytest.approx(b, abs=1e-6)

    def test_k2_identity_names_one_sign(self):
        signs = set()
        for t, p in zip(*_angles(seed=3)):
            rep = k2_identity_check(DEFAULT_Q, t, p)
            assert rep.max_rel_residual <= 1e-4
            signs.add(rep.sign)
            assert "closes with" in rep.notes
        assert len(signs) == 1 and None not in signs

    def test_k2_agrees_with_angular_check(self):
        s_k2 = k2_identity_check(DEFAULT_Q, 1.0, 0.5).sign
        s_ang = round(angular_operator_check(DEFAULT_Q, 1.0, 0.5).measured_s[0])
        assert s_k2 == s_ang

    def test_k2_trivial_at_mu_zero(self):
        rep = k2_identity_check(QuantumNumbers(mu=0, m=0), 1.0, 0.5)
        assert rep.max_rel_residual < 1e-6

    def test_large_step_degrades(self):
        fine = abs(angular_operator_check(DEFAULT_Q, 1.0, 0.5, 1e-4).measured_s[0] + 1)
        coarse = abs(angular_operator_check(DEFAULT_Q, 1.0, 0.5, 1e-1).measured_s[0] + 1)
        assert coarse > 100 * fine

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            angular_operator_check(DEFAULT_Q, 1e-5, 0.0, 1e-4)


@pytest.fixture(scope="module")
def default_solution():
    cfg = ScenarioConfig()
    params = cfg.mapping_params()
    return cfg, params, {b: solve_branch(params, b, cfg) for b in SpinBranch}


class TestProfileChecks:
    def test_solved_profiles_small_residual(self, default_solution):
        _, _, res = default_solution
        for r in res.values():
            assert r.residual.max_rel_residual < 1e-6

    def test_constant_profile_zero_residual(self):
        q = QuantumNumbers(mu=0, m=0, n=0)
        params = MappingParams(q, THETA0)
        prof = integrate_ivp(lambda r, M, dM: 0.0, 0.1, 2.0, 0.0, 0.5)
        assert ode_residual(prof, params, SpinBranch.UP).max_rel_residual == 0.0

    def test_corrupted_profile_detected(self, default_solution):
        _, params, res = default_solution
        p = res[SpinBranch.UP].profile
        bad = MassProfile(p.r, 1.01 * p.M, p.dM, p.d2M, p.termination)
        assert ode_residual(bad, params, SpinBranch.UP).max_rel_residual > 1e-3

    def test_agreement_identical_is_zero(self, default_solution):
        _, _, res = default_solution
        p = res[SpinBranch.UP].profile
        assert branch_agreement(p, p, 0.21, 0.3) == 0.0

    def test_agreement_requires_coverage(self, default_solution):
        _, _, res = default_solution
        p = res[SpinBranch.UP].profile
        with pytest.raises(ValueError):
            branch_agreement(p, p, 0.25, 0.5)

    def test_condition_violated_branches_differ(self):
        cfg = ScenarioConfig(mu=1, m=HalfInt(1))
        params = cfg.mapping_params()
        up, down = (solve_branch(params, b, cfg) for b in SpinBranch)
        lo, hi = 0.25, cfg.r_max
        if up.covers(lo, hi) and down.covers(lo, hi):
            assert branch_agreement(up.profile, down.profile, lo, hi) > 0.2
        else:
            assert not (up.termination.completed and down.termination.completed)

    def test_crossing_radius(self):
        prof = integrate_ivp(lambda r, M, dM: 0.0, 0.0, 1.0, 2.0, 10.0)
        assert crossing_radius(prof, 10.0) == pytest.approx(4.5, abs=1e-10)
        assert crossing_radius(prof, 100.0) is None


class TestPdeResidual:
    @staticmethod
    @pytest.fixture(scope="class")
    def consistent():
        # measured sigma.r eigenvalue with the attractive Coulomb sign
        cfg = ScenarioConfig(sigma_r_eigenvalue=-1, radial_sign=1)
        params = cfg.mapping_params()
        return params, {b: solve_branch(params, b, cfg) for b in SpinBranch}

    @pytest.mark.parametrize("r", [0.15, 0.2, 0.25])
    @pytest.mark.parametrize("branch", list(SpinBranch))
    def test_holds_on_cone(self, consistent, branch, r):
        params, res = consistent
        assert res[branch].residual.max_rel_residual < 1e-6
        val = pde_residual_at_point(res[branch].profile, params, branch, r, THETA0, 0.7)
        assert abs(val) <= 1e-4

    @pytest.mark.parametrize("theta", [0.9, 1.5, 2.4])
    def test_fails_off_cone(self, consistent, theta):
        params, res = consistent
        val = pde_residual_at_point(res[SpinBranch.UP].profile, params, SpinBranch.UP, 0.25, theta, 0.7)
        assert abs(val) > 0.1

    def test_literal_conventions_do_not_map(self, default_solution):
        _, params, res = default_solution
        val = pde_residual_at_point(res[SpinBranch.UP].profile, params, SpinBranch.UP, 0.25, THETA0, 0.7)
        assert abs(val) > 0.1

    def test_free_constant_mass(self):
        q = QuantumNumbers(mu=0, m=0, n=0)
        params = MappingParams(q, THETA0)
        prof = integrate_ivp(lambda r, M, dM: 0.0, 0.1, 2.0, 0.0, 0.5)
        assert abs(pde_residual_at_point(prof, params, SpinBranch.UP, 0.3, 1.0, 0.2)) < 1e-6
