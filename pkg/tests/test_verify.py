import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import get_entry
from staticlab.catalog import build_sphere_closed_form, build_type_i, build_type_iv
from staticlab.errors import MissingScalar, WrongModelClass
from staticlab.models import Potential, WarpedModel, double_warp, single_warp
from staticlab.profiles import Constant, Trig
from staticlab.verify import (
    COMPONENT_NAMES,
    SINGLE_WARP_COMPONENTS,
    ResidualReport,
    Specialization,
    check_specialization,
    component_residuals,
    master_residual,
    oracle_master_residual,
    sample_points,
    scalar_curvature,
    verify,
    zeta_coincidence,
)


def _scale_profile(prof, lam, warp):
    """``lam * q(s / lam)`` for warps, ``q(s / lam)`` otherwise."""
    dom = (lam * prof.domain[0], lam * prof.domain[1])
    amp = lam if warp else 1.0
    if isinstance(prof, Trig):
        return replace(prof, amplitude=amp * prof.amplitude, frequency=prof.frequency / lam,
                       offset=amp * prof.offset, domain=dom)
    if isinstance(prof, Constant):
        return replace(prof, c=amp * prof.c, domain=dom)
    raise TypeError(type(prof))


def scale_solution(model, pot, lam):
    """Homothety ``g -> lam^2 g``: ``x`` is invariant and ``y`` picks up ``lam^-2``."""
    m = WarpedModel(model.kind, h=_scale_profile(model.h, lam, True), fiber_k=model.fiber_k,
                    p=_scale_profile(model.p, lam, True),
                    R_expected=model.R_expected / lam**2)
    return m, Potential(_scale_profile(pot.f, lam, False), pot.x, pot.y / lam**2)


class TestSpecialization:
    @pytest.mark.parametrize("text,x,y", [("static", 0, 0), ("miao-tam", 0, -1 / 3),
                                          ("v-static:2", 0, -2 / 3),
                                          ("critical-point", 1, -3),
                                          ("general:0.5,-1", 0.5, -1)])
    def test_resolve(self, text, x, y):
        assert Specialization.parse(text).resolve(12.0) == pytest.approx((x, y))

    @pytest.mark.parametrize("text", ["static", "miao-tam", "v-static:2.5", "critical-point",
                                      "general:1,-0.25"])
    def test_label_round_trip(self, text):
        spec = Specialization.parse(text)
        assert Specialization.parse(spec.label) == spec

    @pytest.mark.parametrize("text", ["", "static:1", "v-static", "v-static:x",
                                      "general:1", "einstein"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            Specialization.parse(text)


class TestMasterResidual:
    def test_sphere_product_passes(self):
        entry = get_entry("type_i_x1")
        rep = master_residual(entry.model, entry.potential)
        assert rep.passes()
        assert rep.R == 6.0
        assert set(rep.component_residuals) == set(COMPONENT_NAMES)
        assert max(rep.component_residuals.values()) < 1e-10

    def test_wrong_constant_fails(self):
        entry = get_entry("type_i_x1")
        rep = master_residual(entry.model, entry.potential.with_constants(y=-1.0))
        assert rep.master_max == pytest.approx(1.0)
        assert not rep.passes()

    def test_single_warp_components(self):
        entry = get_entry("type_iv_sphere_cf")
        assert set(master_residual(entry.model, entry.potential).component_residuals) \
            == set(SINGLE_WARP_COMPONENTS)
        with pytest.raises(WrongModelClass):
            component_residuals(entry.model, entry.potential)

    def test_missing_scalar(self):
        h = Trig(0.2, 1.0, 0.0, 1.0, domain=(0.0, 2.0))
        with pytest.raises(MissingScalar):
            scalar_curvature(single_warp(h, 1.0))

    def test_scalar_from_samples(self):
        model = single_warp(Trig(domain=(0.3, 2.8)), 1.0)
        assert scalar_curvature(model) == pytest.approx(12.0)

    def test_sample_points_include_grid_nodes(self):
        entry = get_entry("type_iv_a03")
        pts = sample_points(entry.model, entry.potential, samples=11)
        assert np.all(np.isin(entry.model.h.nodes, pts))

    def test_report_json(self):
        rep = ResidualReport(1.0, 2.0, {"eq_m20xx": 0.5}, {"admissible": True}, 6.0, 101)
        assert rep.to_json()["component_residuals"] == {"eq_m20xx": 0.5}

    def test_zeta_coincidence(self):
        entry = get_entry("type_iv_s4")
        assert zeta_coincidence(entry.model, entry.potential) < 1e-6
        assert zeta_coincidence(get_entry("type_v").model, get_entry("type_v").potential) is None

    def test_oracle_random_fiber_points(self):
        entry = get_entry("type_i_R6")
        rng = np.random.default_rng(3)
        assert oracle_master_residual(entry.model, entry.potential, samples=21, rng=rng) < 1e-4


class TestInvariances:
    @given(lam=st.floats(0.25, 4.0), x=st.floats(-2.0, 2.0), c1=st.floats(0.1, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_homothety(self, lam, x, c1):
        entry = build_type_i(R=6.0, c1=c1, x=x)
        model, pot = scale_solution(entry.model, entry.potential, lam)
        assert master_residual(model, pot, samples=31).master_max < 1e-9
        bad = pot.with_constants(y=entry.potential.y)
        if abs(entry.potential.y) * abs(1 - lam**-2) > 1e-6:
            assert master_residual(model, bad, samples=31).master_max > 1e-8

    @given(mu=st.floats(-3.0, 3.0))
    @settings(max_examples=20, deadline=None)
    def test_linearity(self, mu):
        entry = build_sphere_closed_form(k=1.0, c=1.3, x=0.4, y=-0.7)
        pot = entry.potential
        f = replace(pot.f, amplitude=mu * pot.f.amplitude, offset=mu * pot.f.offset)
        scaled = Potential(f, mu * pot.x, mu * pot.y)
        assert master_residual(entry.model, scaled, samples=31).master_max < 1e-9

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_v_static_constant_scales(self, lam):
        entry = build_sphere_closed_form(k=1.0 / lam, c=1.0, x=0.0, y=-1.0 / (3 * lam**2))
        _, ok = verify(entry.model, entry.potential, Specialization.parse(f"v-static:{lam**-2}"))
        assert ok
        _, ok = verify(entry.model, entry.potential, Specialization.parse("miao-tam"))
        assert not ok


class TestConstantSolutions:
    @pytest.mark.parametrize("x,y,solves", [(1.0, -4.0, True), (1.0, -3.0, False),
                                            (0.0, 0.0, True), (-0.5, 1.0, False)])
    def test_biconditional(self, x, y, solves):
        model = build_sphere_closed_form().model
        pot = Potential(Constant(-x, domain=model.domain), x, y)
        flags = check_specialization(model, pot)
        assert flags["constant_f"]
        assert flags["constant_solution_consistent"]
        assert (master_residual(model, pot).master_max < 1e-10) is solves

    def test_flat_constant_needs_zero_y(self):
        entry = get_entry("type_v")
        assert verify(entry.model, entry.potential, claimed_type="V")[1]
        pot = entry.potential.with_constants(y=0.5)
        assert not check_specialization(entry.model, pot, claimed_type="V")["admissible"]


class TestVerdicts:
    def test_type_requirements(self):
        entry = get_entry("type_i_x1")
        flags = check_specialization(entry.model, entry.potential, claimed_type="I")
        assert flags["xR3_plus_y_zero"] and flags["admissible"] and not flags["R_zero"]
        assert not check_specialization(entry.model, entry.potential,
                                        claimed_type="III")["admissible"]

    def test_spec_mismatch_fails(self):
        entry = get_entry("type_i_x1")
        report, ok = verify(entry.model, entry.potential, Specialization.parse("static"))
        assert report.passes() and not ok
        assert report.constraint_flags["matches_spec"] is False

    def test_critical_point_on_type_i(self):
        entry = build_type_i(R=6.0, x=1.0)
        _, ok = verify(entry.model, entry.potential.with_constants(1.0, -1.5),
                       Specialization.parse("critical-point"))
        assert not ok
        _, ok = verify(entry.model, entry.potential, Specialization.parse("general:1,-2"))
        assert ok

    def test_threshold(self):
        entry = build_type_iv(R=12.0, a=0.3, k_fiber=1.3, x=0.5, y=0.25)
        _, ok = verify(entry.model, entry.potential, threshold=1e-30)
        assert not ok
        assert verify(entry.model, entry.potential)[1]

    def test_surface_product_double_warp_form(self):
        # the same metric written as a generic double warp verifies identically
        entry = get_entry("type_i_R6")
        m = entry.model
        generic = double_warp(m.p, m.h, m.fiber_k, R=6.0)
        a = master_residual(m, entry.potential).master_max
        b = master_residual(generic, entry.potential).master_max
        assert a == b
        assert math.isfinite(a)
