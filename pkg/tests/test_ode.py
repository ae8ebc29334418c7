import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from staticlab.errors import (
    DegenerateInitialization,
    EmptyDomainIntersection,
    InvalidTolerance,
)
from staticlab.ode import (
    FFamilyParams,
    HFamilyParams,
    Trajectory,
    chebyshev_nodes,
    common_domain,
    first_order_constraint_residual,
    h3_first_integral,
    h3_fourth_derivative,
    h4_first_integral,
    integrate_f_second_order,
    integrate_h3,
    integrate_h4,
    pick_seed,
    seed_value,
)
from staticlab.profiles import ProfileValue, Trig


class TestParams:
    def test_positive_h0_and_span(self):
        with pytest.raises(ValueError):
            HFamilyParams(R=0, a=0, h0=0.0, h0p=0)
        with pytest.raises(ValueError):
            HFamilyParams(R=0, a=0, h0=1.0, h0p=0, span=-1.0)

    @pytest.mark.parametrize("rtol", [0.0, 1.0, -1e-8])
    def test_bad_tolerance(self, rtol):
        with pytest.raises(InvalidTolerance):
            integrate_h4(HFamilyParams(R=12, a=0, h0=1, h0p=0), rtol=rtol)


class TestWarpIntegration:
    def test_sphere_warp(self):
        s0 = 0.3
        traj = integrate_h4(HFamilyParams(R=12, a=0, h0=math.sin(s0), h0p=math.cos(s0),
                                          s0=s0, span=2.0))
        assert traj.first_integral_k == pytest.approx(1.0, abs=1e-15)
        assert traj.termination == "complete"
        for s in np.linspace(s0, s0 + 2.0, 17):
            assert abs(traj.profile.eval(s).d0 - math.sin(s)) < 1e-9

    def test_collapse_event_truncates(self):
        traj = integrate_h4(HFamilyParams(R=12, a=0, h0=1.0, h0p=0.0, span=5.0))
        assert traj.termination == "collapse"
        assert traj.domain[1] == pytest.approx(math.pi / 2, abs=1e-6)

    def test_stored_derivatives_follow_the_ode(self):
        R, a = 12.0, 0.3
        traj = integrate_h4(HFamilyParams(R=R, a=a, h0=1.0, h0p=0.0))
        v = traj.profile.values
        np.testing.assert_allclose(v[:, 2], -R / 12 * v[:, 0] + a * v[:, 0] ** -3, rtol=1e-14)

    def test_h3_warp(self):
        traj = integrate_h3(HFamilyParams(R=0, a=1.0, h0=4.0, h0p=math.sqrt(0.5), span=3.0))
        assert traj.first_integral_k == pytest.approx(1.0)
        v = traj.profile.values
        np.testing.assert_allclose(v[:, 0] ** 2 * v[:, 2], 1.0, rtol=1e-13)

    @given(R=st.sampled_from([12.0, 0.0, -12.0]), a=st.floats(0.05, 0.5),
           h0=st.floats(0.6, 1.5))
    @settings(max_examples=8, deadline=None)
    def test_first_integral_conserved(self, R, a, h0):
        traj = integrate_h4(HFamilyParams(R=R, a=a, h0=h0, h0p=0.0, span=2.0))
        v = traj.profile.values
        drift = np.abs(h4_first_integral(R, a, v[:, 0], v[:, 1]) - traj.first_integral_k)
        assert drift.max() == pytest.approx(traj.max_drift)
        assert traj.max_drift < 1e-8

    def test_h3_fourth_derivative(self):
        # differentiate h''' = -2 alpha h' / h^3 along a trajectory numerically
        alpha = 0.7
        traj = integrate_h3(HFamilyParams(R=0, a=alpha, h0=3.0, h0p=0.2, span=1.0))
        g = traj.profile
        s, step = 0.5, 1e-5
        fd = (g.eval(s + step).d3 - g.eval(s - step).d3) / (2 * step)
        v = g.eval(s)
        assert fd == pytest.approx(h3_fourth_derivative(alpha, v.d0, v.d1), rel=1e-5)

    def test_first_integral_helpers(self):
        assert h4_first_integral(12.0, 0.0, 1.0, 0.0) == 1.0
        assert h3_first_integral(1.0, 4.0, math.sqrt(0.5)) == pytest.approx(1.0)

    def test_trajectory_file_round_trip(self, tmp_path):
        traj = integrate_h3(HFamilyParams(R=0, a=1.0, h0=4.0, h0p=0.5, span=0.5))
        traj.write(tmp_path / "t.txt")
        back = Trajectory.read(tmp_path / "t.txt")
        assert back.first_integral_k == traj.first_integral_k
        np.testing.assert_array_equal(back.profile.values, traj.profile.values)


class TestPotential:
    def test_sphere_static_potential_is_cosine(self):
        s0 = 0.3
        hp = HFamilyParams(R=12, a=0, h0=math.sin(s0), h0p=math.cos(s0), s0=s0,
                           span=math.pi - 0.6)
        traj = integrate_h4(hp)
        f = integrate_f_second_order(traj, hp, FFamilyParams(0.0, 0.0, c=-1.0,
                                                             s0=math.pi / 2))
        for s in np.linspace(0.4, 2.7, 9):
            assert abs(f.eval(s).d0 - math.cos(s)) < 1e-9

    def test_constraint_propagates(self):
        R, a, x, y = 12.0, 0.3, 1.0, -0.5
        hp = HFamilyParams(R=R, a=a, h0=1.0, h0p=0.0)
        traj = integrate_h4(hp)
        f = integrate_f_second_order(traj, hp, FFamilyParams(x, y))
        assert first_order_constraint_residual(traj, f, R, x, y) < 1e-8

    def test_linear_in_scale_for_zero_constants(self):
        hp = HFamilyParams(R=12, a=0.3, h0=1.0, h0p=0.0)
        traj = integrate_h4(hp)
        f1 = integrate_f_second_order(traj, hp, FFamilyParams(0.0, 0.0, c=1.0))
        f3 = integrate_f_second_order(traj, hp, FFamilyParams(0.0, 0.0, c=3.0))
        s = 2.2
        assert f3.eval(s).d0 == pytest.approx(3 * f1.eval(s).d0, rel=1e-8)

    def test_seed_is_largest_curvature_node(self):
        h = Trig(domain=(0.3, 2.8))
        assert pick_seed(h) == pytest.approx(math.pi / 2, abs=0.02)

    def test_degenerate_seed(self):
        with pytest.raises(DegenerateInitialization):
            seed_value(ProfileValue(1.0, 1.0, 0.0, 0.0), 0.0, 0.0, 0.0, 1.0)

    def test_seed_satisfies_constraint(self):
        hv = ProfileValue(0.8, 0.3, -0.5, 0.1)
        R, x, y, c = 12.0, 0.5, 0.25, 1.7
        f0 = seed_value(hv, R, x, y, c)
        lhs = hv.d1 * c - f0 * hv.d2
        assert lhs == pytest.approx(x * (hv.d2 + R * hv.d0 / 3) + y * hv.d0)


class TestHelpers:
    def test_chebyshev_nodes(self):
        n = chebyshev_nodes(-1.0, 1.0, 5)
        np.testing.assert_allclose(n, [-1, -math.sqrt(0.5), 0, math.sqrt(0.5), 1], atol=1e-15)

    def test_common_domain(self):
        assert common_domain(Trig(domain=(0, 2)), Trig(domain=(1, 3))) == (1, 2)
        with pytest.raises(EmptyDomainIntersection):
            common_domain(Trig(domain=(0, 1)), Trig(domain=(2, 3)))
