"""Residuals of the master equation and its specializations.

For a model ``g`` of constant scalar curvature ``R`` and a potential
``(f, x, y)`` the master equation in dimension four is

    nabla df = f (Rc - R/3 g) + x Rc + y g.

Everything is evaluated in the adapted orthonormal frame, where both sides are
diagonal for radial ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingScalar, StencilOutOfDomain, WrongModelClass
from .models import (
    Potential,
    WarpedModel,
    hessian_radial,
    ricci_closed_form,
    ricci_derivative_closed_form,
    zeta_values,
)
from .ode import chebyshev_nodes, common_domain
from .oracle import DEFAULT_FD_STEP, covariant_hessian_fd, default_point, fiber_points, ricci_fd
from .profiles import Grid

DEFAULT_SAMPLES = 101
CLOSED_FORM_THRESHOLD = 1e-8
ORACLE_THRESHOLD = 1e-4
SCALAR_TOL = 1e-9
FLAG_TOL = 1e-10

COMPONENT_NAMES = ("eq_m20xx", "eq_m04x", "eq_m04bx", "eq_m01x", "eq_m02x",
                   "eq_m05x_E2", "eq_m05x_E3", "eq_m10x")
SINGLE_WARP_COMPONENTS = ("eq_m20xx", "eq_m04bx")

STATIC = "static"
MIAO_TAM = "miao-tam"
V_STATIC = "v-static"
CRITICAL_POINT = "critical-point"
GENERAL = "general"


@dataclass(frozen=True)
class Specialization:
    """Named choice of the constants ``(x, y)``.

    ``critical-point`` fixes ``y = -R/4`` only once ``R`` is known, so
    constants are obtained through :meth:`resolve`.
    """

    kind: str
    x: float = 0.0
    y: float = 0.0
    c: float = 0.0

    def resolve(self, R: float) -> tuple[float, float]:
        if self.kind == STATIC:
            return 0.0, 0.0
        if self.kind == MIAO_TAM:
            return 0.0, -1.0 / 3.0
        if self.kind == V_STATIC:
            return 0.0, -self.c / 3.0
        if self.kind == CRITICAL_POINT:
            return 1.0, -R / 4.0
        return self.x, self.y

    @property
    def label(self) -> str:
        if self.kind == V_STATIC:
            return f"v-static:{self.c:g}"
        if self.kind == GENERAL:
            return f"general:{self.x:g},{self.y:g}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Specialization":
        """Parse ``static``, ``miao-tam``, ``v-static:<c>``, ``critical-point``
        or ``general:<x>,<y>``."""
        text = text.strip().lower()
        head, _, arg = text.partition(":")
        if head in (STATIC, MIAO_TAM, CRITICAL_POINT) and not arg:
            return cls(head)
        try:
            if head == V_STATIC:
                return cls(V_STATIC, c=float(arg))
            if head == GENERAL:
                xs, ys = arg.split(",")
                return cls(GENERAL, x=float(xs), y=float(ys))
        except ValueError:
            pass
        raise ValueError(f"cannot parse specialization {text!r}")


@dataclass
class ResidualReport:
    master_max: float
    trace_max: float
    component_residuals: dict[str, float] = field(default_factory=dict)
    constraint_flags: dict[str, bool] = field(default_factory=dict)
    R: float = math.nan
    samples: int = 0
    zeta_gap: float | None = None

    def passes(self, threshold: float = CLOSED_FORM_THRESHOLD) -> bool:
        return self.master_max < threshold and self.trace_max < threshold

    def to_json(self) -> dict:
        return {"master_max": self.master_max, "trace_max": self.trace_max,
                "component_residuals": dict(self.component_residuals),
                "constraint_flags": dict(self.constraint_flags),
                "R": self.R, "samples": self.samples, "zeta_gap": self.zeta_gap}


def sample_points(model: WarpedModel, potential: Potential | None = None,
                  samples: int = DEFAULT_SAMPLES, margin: float = 0.0) -> np.ndarray:
    """Chebyshev points on the common domain plus every grid node inside it."""
    profiles = [model.h] if model.is_single else [model.h, model.p]
    if potential is not None:
        profiles.append(potential.f)
    lo, hi = common_domain(*profiles)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("sampling needs a bounded common domain")
    lo, hi = lo + margin, hi - margin
    pts = [chebyshev_nodes(lo, hi, samples)]
    for prof in profiles:
        if isinstance(prof, Grid):
            nodes = prof.nodes
            pts.append(nodes[(nodes >= lo) & (nodes <= hi)])
    return np.unique(np.concatenate(pts))


def scalar_curvature(model: WarpedModel, points=None) -> float:
    """``R_expected`` if declared, else the sampled scalar when it is constant."""
    if model.R_expected is not None:
        return float(model.R_expected)
    if points is None:
        points = sample_points(model)
    vals = np.array([ricci_closed_form(model, s).scalar for s in points])
    if np.ptp(vals) > SCALAR_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise MissingScalar(
            f"no R_expected and sampled scalar varies by {np.ptp(vals):.3g}")
    return float(np.mean(vals))


def _master_terms(H, ric, f, R, x, y):
    return [abs(H[i] - f * (ric[i] - R / 3.0) - x * ric[i] - y) for i in range(4)]


def master_residual(model: WarpedModel, potential: Potential,
                    samples: int = DEFAULT_SAMPLES) -> ResidualReport:
    pts = sample_points(model, potential, samples)
    R = scalar_curvature(model, pts)
    x, y = potential.x, potential.y
    master = trace = 0.0
    for s in pts:
        fv = potential.f.eval(s)
        H = hessian_radial(model, potential.f, s)
        ric = ricci_closed_form(model, s).ricci_diag
        master = max(master, *_master_terms(H, ric, fv.d0, R, x, y))
        z = zeta_values(model, s)
        lap = fv.d2 + sum(z) * fv.d1
        trace = max(trace, abs(lap + R / 3.0 * fv.d0 - x * R - 4.0 * y))
    comps = component_residuals(model, potential, samples, allow_subset=True)
    return ResidualReport(master, trace, comps, R=R, samples=int(pts.size),
                          zeta_gap=zeta_coincidence(model, potential, samples))


def component_residuals(model: WarpedModel, potential: Potential,
                        samples: int = DEFAULT_SAMPLES,
                        allow_subset: bool = False) -> dict[str, float]:
    """Scalar reductions of the master equation along the warp structure.

    Double warps use ``a = p'/p`` and ``b = h'/h``.  Single warps only admit
    the ``E1`` equation and the fibre equation in direct form; they raise
    :class:`WrongModelClass` unless ``allow_subset`` is set.
    """
    if model.is_single and not allow_subset:
        raise WrongModelClass("component residuals need a double warp; "
                              "pass allow_subset=True for the single-warp subset")
    pts = sample_points(model, potential, samples)
    R = scalar_curvature(model, pts)
    x, y, k = potential.x, potential.y, model.fiber_k
    names = SINGLE_WARP_COMPONENTS if model.is_single else COMPONENT_NAMES
    out = dict.fromkeys(names, 0.0)

    def bump(name, value):
        out[name] = max(out[name], abs(value))

    for s in pts:
        fv = potential.f.eval(s)
        f, f1, f2 = fv.d0, fv.d1, fv.d2
        pv, hv = model.warps(s)
        ric = ricci_closed_form(model, s).ricci_diag
        bump("eq_m20xx", f2 - ((f + x) * ric[0] - R / 3.0 * f + y))
        b = hv.d1 / hv.d0
        if model.is_single:
            bump("eq_m04bx", b * f1 - ((f + x) * ric[1] - R / 3.0 * f + y))
            continue
        a = pv.d1 / pv.d0
        da = pv.d2 / pv.d0 - a * a
        db = hv.d2 / hv.d0 - b * b
        kh = k / hv.d0**2
        bump("eq_m04x", f1 * a - (f * (da + a * a) - x * (da + a * a + 2 * a * b) + y))
        bump("eq_m04bx", f1 * b - (f * (db + b * b) - x * (db + 2 * b * b + a * b - kh) + y))
        bump("eq_m01x", 2 * da + 2 * a * a + 2 * a * b + R / 3.0)
        bump("eq_m02x", 2 * db + 3 * b * b + a * b - kh + R / 3.0)
        dric = ricci_derivative_closed_form(model, s)
        bump("eq_m05x_E2", dric[1] + a * (ric[1] - ric[0]))
        bump("eq_m05x_E3", dric[2] + b * (ric[2] - ric[0]))
        bump("eq_m10x", x * (a * b + R / 3.0) + y + f * a * b)
    return out


def zeta_coincidence(model: WarpedModel, potential: Potential,
                     samples: int = DEFAULT_SAMPLES, rel_floor: float = 1e-3) -> float | None:
    """Max gap between the potential-based and geometric ``zeta_i``.

    The potential form divides by ``f'``; samples where ``|f'|`` is below
    ``rel_floor`` times its maximum are skipped.  ``None`` for constant ``f``.
    """
    pts = sample_points(model, potential, samples)
    R = scalar_curvature(model, pts)
    d1 = np.array([potential.f.eval(s).d1 for s in pts])
    top = float(np.max(np.abs(d1)))
    if top < 1e-12:
        return None
    x, y = potential.x, potential.y
    gap = 0.0
    for s, fp in zip(pts, d1):
        if abs(fp) < rel_floor * top:
            continue
        f = potential.f.eval(s).d0
        ric = ricci_closed_form(model, s).ricci_diag
        geo = zeta_values(model, s)
        for i in range(3):
            z = ((f + x) * ric[i + 1] - R / 3.0 * f + y) / fp
            gap = max(gap, abs(z - geo[i]))
    return gap


def dichotomy_gap(model: WarpedModel, samples: int = DEFAULT_SAMPLES) -> float:
    """Max over samples of ``min(|ab + R/12|, |b|)``."""
    pts = sample_points(model, None, samples)
    R = scalar_curvature(model, pts)
    worst = 0.0
    for s in pts:
        a, b, _ = zeta_values(model, s)
        worst = max(worst, min(abs(a * b + R / 12.0), abs(b)))
    return worst


# Constraints each type imposes on (R, x, y)
TYPE_REQUIREMENTS = {
    "I": ("xR3_plus_y_zero",),
    "II": ("xR3_plus_y_zero",),
    "III": ("R_zero", "y0_zero"),
    "IV": (),
    "V": ("y0_zero",),
}


def _is_constant(profile, pts, tol=1e-12) -> bool:
    vals = np.array([profile.eval(s).d0 for s in pts])
    return float(np.ptp(vals)) <= tol * max(1.0, float(np.max(np.abs(vals))))


def check_specialization(model: WarpedModel, potential: Potential,
                         spec: Specialization | None = None,
                         claimed_type: str | None = None,
                         samples: int = DEFAULT_SAMPLES) -> dict[str, bool]:
    """Constraint flags for a potential; never raises on a failed check.

    ``admissible`` holds when every constraint of ``claimed_type`` is met
    (always true without a claim).  For constant ``f = -x`` the flag
    ``constant_solution_consistent`` records whether passing the master equation agrees
    with ``|y + xR/3| < 1e-10``.
    """
    pts = sample_points(model, potential, samples)
    R = scalar_curvature(model, pts)
    x, y = potential.x, potential.y
    flags = {
        "xR3_plus_y_zero": abs(x * R / 3.0 + y) < FLAG_TOL,
        "R_zero": abs(R) < FLAG_TOL,
        "y0_zero": abs(y) < FLAG_TOL,
    }
    if spec is not None:
        sx, sy = spec.resolve(R)
        flags["matches_spec"] = abs(sx - x) < FLAG_TOL and abs(sy - y) < FLAG_TOL
    if _is_constant(potential.f, pts):
        f0 = potential.f.eval(pts[0]).d0
        flags["constant_f"] = True
        if abs(f0 + x) < FLAG_TOL * max(1.0, abs(x)):
            passes = master_residual(model, potential, samples).master_max < FLAG_TOL
            flags["constant_solution_consistent"] = passes == flags["xR3_plus_y_zero"]
    else:
        flags["constant_f"] = False
    need = TYPE_REQUIREMENTS.get(claimed_type, ()) if claimed_type else ()
    flags["admissible"] = all(flags[n] for n in need)
    return flags


def oracle_master_residual(model: WarpedModel, potential: Potential,
                           samples: int = DEFAULT_SAMPLES,
                           fd_step: float = DEFAULT_FD_STEP, rng=None) -> float:
    """Master residual with Hessian and Ricci both taken from finite differences.

    Samples stop two stencil widths short of the domain ends.  With a numpy
    ``rng`` each sample uses a random point of its level set instead of the
    default chart point.
    """
    pts = sample_points(model, potential, samples, margin=2 * fd_step)
    R = scalar_curvature(model, pts)
    worst = 0.0
    for s in pts:
        if rng is None:
            pt = default_point(model, float(s))
        else:
            pt = fiber_points(model, float(s))[int(rng.integers(10))]._replace(
                theta=float(rng.uniform(0.0, 2.0 * math.pi)))
        try:
            H = covariant_hessian_fd(model, potential.f, pt, fd_step)
        except StencilOutOfDomain:
            continue
        ric = ricci_fd(model, pt, fd_step).ricci_frame_diag
        f = potential.f.eval(s).d0
        worst = max(worst, *_master_terms(H, ric, f, R, potential.x, potential.y))
    return worst


def verify(model: WarpedModel, potential: Potential, spec: Specialization | None = None,
           claimed_type: str | None = None, samples: int = DEFAULT_SAMPLES,
           threshold: float = CLOSED_FORM_THRESHOLD) -> tuple[ResidualReport, bool]:
    """Full closed-form check; the boolean is the overall verdict."""
    report = master_residual(model, potential, samples)
    report.constraint_flags = check_specialization(model, potential, spec, claimed_type,
                                                   samples)
    ok = report.passes(threshold) and report.constraint_flags["admissible"]
    if spec is not None:
        ok = ok and report.constraint_flags["matches_spec"]
    return report, ok
