"""Warped-product metric families and their closed-form curvature.

All curvature is reported in the adapted orthonormal frame
``E1 = d/ds, E2 = p^-1 d/dt, E3, E4`` (for single warps ``E2..E4`` span the
three-dimensional fibre).  Ricci is diagonal in this frame for every class
handled here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .errors import NonPositiveWarp, OutOfDomain
from .ode import Trajectory, common_domain
from .profiles import (
    Constant,
    Grid,
    HyperbolicTrig,
    Profile,
    ProfileValue,
    Trig,
    profile_from_dict,
    write_grid,
)

SINGLE = "single_warp"
DOUBLE = "double_warp"
SURFACE = "surface_product"
LINE_W3 = "line_cross_w3"
MODEL_CLASSES = (SINGLE, DOUBLE, SURFACE, LINE_W3)

_ONE = ProfileValue(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class WarpedModel:
    """A metric ansatz.

    ``kind`` is one of ``single_warp`` (``ds^2 + h^2 g_k``), ``double_warp``
    (``ds^2 + p^2 dt^2 + h^2 g~``), ``surface_product`` (a double warp with
    constant ``h``) or ``line_cross_w3`` (a double warp with ``p == 1``).
    ``fiber_k`` is the curvature of the unit fibre metric ``g_k`` / ``g~``.
    """

    kind: str
    h: Profile
    fiber_k: float
    p: Profile | None = None
    R_expected: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in MODEL_CLASSES:
            raise ValueError(f"unknown model class {self.kind!r}")
        if self.kind == SINGLE and self.p is not None:
            raise ValueError("single warps carry no p profile")
        if self.kind != SINGLE and self.p is None:
            object.__setattr__(self, "p", Constant(1.0))

    @property
    def is_single(self) -> bool:
        return self.kind == SINGLE

    @property
    def domain(self) -> tuple[float, float]:
        if self.is_single:
            return self.h.domain
        return common_domain(self.h, self.p)

    def warps(self, s: float) -> tuple[ProfileValue, ProfileValue]:
        """``(p, h)`` values at ``s``; ``p`` is the unit profile for single warps."""
        lo, hi = self.domain
        if not (self.h.contains(s) and (self.is_single or self.p.contains(s))):
            raise OutOfDomain(f"s={s!r} outside model domain [{lo}, {hi}]")
        hv = self.h.eval(s)
        pv = _ONE if self.is_single else self.p.eval(s)
        if hv.d0 <= 0 or pv.d0 <= 0:
            raise NonPositiveWarp(f"warp not positive at s={s!r}: p={pv.d0}, h={hv.d0}")
        return pv, hv

    def section_curvatures(self) -> tuple[float, float] | None:
        """Gauss curvatures ``(base, fibre)`` of a surface product, else ``None``."""
        if self.kind != SURFACE:
            return None
        pv = self.p.eval(_midpoint(self.p.domain))
        hv = self.h.eval(_midpoint(self.h.domain))
        return (-pv.d2 / pv.d0, self.fiber_k / hv.d0**2)

    def to_dict(self, grid_refs: dict[str, str] | None = None) -> dict:
        refs = grid_refs or {}
        profiles = {}
        for name in ("h", "p"):
            prof = getattr(self, name)
            if prof is None:
                continue
            if isinstance(prof, Grid):
                profiles[name] = prof.to_dict(ref=refs.get(name))
            else:
                profiles[name] = prof.to_dict()
        return {"class": self.kind, "fiber_k": self.fiber_k, "profiles": profiles,
                "R_expected": self.R_expected, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path | None = None) -> "WarpedModel":
        profs = {k: profile_from_dict(v, base_dir) for k, v in d["profiles"].items()}
        return cls(kind=d["class"], h=profs["h"], p=profs.get("p"),
                   fiber_k=float(d["fiber_k"]), R_expected=d.get("R_expected"),
                   label=d.get("label", ""))


def _midpoint(domain):
    lo, hi = domain
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    return 0.0 if lo <= 0.0 <= hi else (lo + 1.0 if math.isfinite(lo) else hi - 1.0)


def single_warp(h: Profile | Trajectory, fiber_k: float, R: float | None = None,
                label: str = "") -> WarpedModel:
    h = h.profile if isinstance(h, Trajectory) else h
    return WarpedModel(SINGLE, h=h, fiber_k=fiber_k, R_expected=R, label=label)


def double_warp(p: Profile, h: Profile, fiber_k: float, R: float | None = None,
                label: str = "") -> WarpedModel:
    return WarpedModel(DOUBLE, h=h, p=p, fiber_k=fiber_k, R_expected=R, label=label)


def line_cross_w3(h: Profile | Trajectory, fiber_k: float, label: str = "") -> WarpedModel:
    """``dt^2 + ds^2 + h(s)^2 g_k``; scalar curvature zero when ``h^2 h''`` is constant."""
    h = h.profile if isinstance(h, Trajectory) else h
    return WarpedModel(LINE_W3, h=h, p=Constant(1.0, domain=h.domain), fiber_k=fiber_k,
                       R_expected=0.0, label=label)


def surface_profile(k: float, domain=None, branch: str = "default") -> Profile:
    """Warp ``p`` with ``p'' + k p = 0`` realising ``ds^2 + p^2 dt^2`` of curvature ``k``.

    ``k > 0`` uses ``sin(sqrt(k) s)/sqrt(k)``.  For ``k < 0`` the branch is
    ``cosh`` (default), ``sinh`` (polar form) or ``exp``.
    """
    if k > 0:
        r = math.sqrt(k)
        domain = domain or (0.05 * math.pi / r, 0.95 * math.pi / r)
        return Trig(1.0 / r, r, 0.0, 0.0, domain=domain)
    if k < 0:
        r = math.sqrt(-k)
        if branch in ("default", "cosh"):
            return HyperbolicTrig(0.5 / r, 0.5 / r, r, 0.0, domain=domain or (-2.0 / r, 2.0 / r))
        if branch == "sinh":
            return HyperbolicTrig(0.5 / r, -0.5 / r, r, 0.0, domain=domain or (0.1 / r, 2.5 / r))
        if branch == "exp":
            return HyperbolicTrig(1.0 / r, 0.0, r, 0.0, domain=domain or (-2.0 / r, 2.0 / r))
        raise ValueError(f"unknown branch {branch!r}")
    raise ValueError("flat surfaces are not surface-product factors here")


def surface_product(k1: float, k2: float, domain=None, branch: str = "default",
                    label: str = "") -> WarpedModel:
    """``N^2(k1) x N^2(k2)``; the second factor is ``h^2 g~`` with ``h = 1/sqrt|k2|``."""
    if k2 == 0:
        raise ValueError("k2 must be non-zero")
    p = surface_profile(k1, domain, branch)
    h = Constant(1.0 / math.sqrt(abs(k2)), domain=p.domain)
    return WarpedModel(SURFACE, h=h, p=p, fiber_k=math.copysign(1.0, k2),
                       R_expected=2.0 * (k1 + k2), label=label)


@dataclass(frozen=True)
class Potential:
    """Solution data ``(f, x, y)``; ``y`` is the value ``y(R)`` at the model's ``R``."""

    f: Profile
    x: float = 0.0
    y: float = 0.0

    def with_constants(self, x: float | None = None, y: float | None = None) -> "Potential":
        return Potential(self.f, self.x if x is None else float(x), self.y if y is None else float(y))

    def to_dict(self, grid_ref: str | None = None) -> dict:
        f = self.f.to_dict(ref=grid_ref) if isinstance(self.f, Grid) else self.f.to_dict()
        return {"f": f, "x": self.x, "y": self.y}

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path | None = None) -> "Potential":
        return cls(profile_from_dict(d["f"], base_dir), float(d["x"]), float(d["y"]))


class CurvatureSample(NamedTuple):
    s: float
    ricci_diag: tuple[float, float, float, float]
    scalar: float


def ricci_closed_form(model: WarpedModel, s: float) -> CurvatureSample:
    pv, hv = model.warps(s)
    h, h1, h2 = hv.d0, hv.d1, hv.d2
    k = model.fiber_k
    if model.is_single:
        r11 = -3.0 * h2 / h
        rii = -h2 / h - 2.0 * (h1 / h) ** 2 + 2.0 * k / h**2
        ric = (r11, rii, rii, rii)
    else:
        p, p1, p2 = pv.d0, pv.d1, pv.d2
        a, b = p1 / p, h1 / h
        r11 = -p2 / p - 2.0 * h2 / h
        r22 = -p2 / p - 2.0 * a * b
        r33 = -h2 / h - a * b - b * b + k / h**2
        ric = (r11, r22, r33, r33)
    return CurvatureSample(s, ric, ric[0] + ric[1] + ric[2] + ric[3])


def zeta_values(model: WarpedModel, s: float) -> tuple[float, float, float]:
    """Mean-curvature-type coefficients ``(p'/p, h'/h, h'/h)`` of the level sets."""
    pv, hv = model.warps(s)
    b = hv.d1 / hv.d0
    a = b if model.is_single else pv.d1 / pv.d0
    return (a, b, b)


def hessian_radial(model: WarpedModel, f: Profile, s: float) -> tuple[float, float, float, float]:
    """Frame-diagonal Hessian of a radial function; off-diagonal terms vanish."""
    fv = f.eval(s)
    a, b, c = zeta_values(model, s)
    return (fv.d2, a * fv.d1, b * fv.d1, c * fv.d1)


def ricci_derivative_closed_form(model: WarpedModel, s: float) -> tuple[float, float, float, float]:
    """``d/ds`` of the frame Ricci components (needs third derivatives of the warps)."""
    pv, hv = model.warps(s)
    h, h1, h2, h3 = hv
    k = model.fiber_k
    b = h1 / h
    db = h2 / h - b * b
    if model.is_single:
        d11 = -3.0 * (h3 / h - h2 * h1 / h**2)
        dii = -(h3 / h - h2 * h1 / h**2) - 4.0 * b * db - 4.0 * k * h1 / h**3
        return (d11, dii, dii, dii)
    p, p1, p2, p3 = pv
    a = p1 / p
    da = p2 / p - a * a
    dpp = p3 / p - p2 * p1 / p**2
    dhh = h3 / h - h2 * h1 / h**2
    d11 = -dpp - 2.0 * dhh
    d22 = -dpp - 2.0 * (da * b + a * db)
    d33 = -dhh - (da * b + a * db) - 2.0 * b * db - 2.0 * k * h1 / h**3
    return (d11, d22, d33, d33)


def write_model_grids(model: WarpedModel, directory: Path, stem: str) -> dict[str, str]:
    """Write any grid-backed profiles next to a model document; returns file refs."""
    refs = {}
    for name in ("h", "p"):
        prof = getattr(model, name)
        if isinstance(prof, Grid):
            fname = f"{stem}_{name}.txt"
            write_grid(prof, Path(directory) / fname)
            refs[name] = fname
    return refs
