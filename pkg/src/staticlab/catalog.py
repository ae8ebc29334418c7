"""Named example spaces with their potentials and expected types.

Each entry is rebuilt from a builder and keyword arguments, so a different
specialization can be imposed on any entry (see :func:`build_entry`).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import HorizonViolation, IntegrabilityMismatch, InvalidR, UnknownEntry
from .models import (
    Potential,
    WarpedModel,
    line_cross_w3,
    single_warp,
    surface_product,
    write_model_grids,
)
from .ode import (
    HFamilyParams,
    h3_fourth_derivative,
    integrate_h3,
    integrate_h4,
    warp_potential,
)
from .profiles import (
    Constant,
    Grid,
    HyperbolicTrig,
    Linear,
    Profile,
    Trig,
    grid_from_columns,
    write_grid,
)
from .verify import Specialization

INTEGRABILITY_TOL = 1e-10


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    model: WarpedModel
    potential: Potential
    expected_type: str
    expected_R: float
    notes: str = ""
    incomplete: bool = False
    params: dict = field(default_factory=dict)

    def to_dict(self, grid_refs: dict[str, str] | None = None) -> dict:
        refs = grid_refs or {}
        return {"id": self.id, "expected_type": self.expected_type,
                "expected_R": self.expected_R, "notes": self.notes,
                "incomplete": self.incomplete, "params": self.params,
                "model": self.model.to_dict(refs),
                "potential": self.potential.to_dict(refs.get("f"))}


# ---------------------------------------------------------------- builders


def build_type_i(R: float = 6.0, c1: float = 1.0, x: float = 0.0,
                 entry_id: str | None = None) -> CatalogEntry:
    """``S^2(R/6) x S^2(R/3)`` with ``f = c1 cos(sqrt(R/6) s) - x``."""
    if not R > 0:
        raise InvalidR(f"type I needs R > 0, got {R}")
    model = surface_product(R / 6.0, R / 3.0, label="type I")
    r0 = math.sqrt(R / 6.0)
    f = Trig(c1, r0, 0.5 * math.pi, -x, domain=model.domain)
    return CatalogEntry(entry_id or f"type_i_R{R:g}", model, Potential(f, x, -x * R / 3.0),
                        "I", R, notes="product of round spheres",
                        params={"R": R, "c1": c1, "x": x})


def build_type_ii(R: float = -6.0, c2: float = 1.0, x: float = 0.0,
                  branch: str = "cosh", entry_id: str | None = None) -> CatalogEntry:
    """``H^2(R/6) x H^2(R/3)`` with ``f = c2 p' - x``.

    ``branch`` picks the solution of ``p'' + (R/6) p = 0``: ``cosh``
    (default), ``sinh`` or ``exp``.
    """
    if not R < 0:
        raise InvalidR(f"type II needs R < 0, got {R}")
    model = surface_product(R / 6.0, R / 3.0, branch=branch, label=f"type II ({branch})")
    p = model.p
    r = p.rate
    f = HyperbolicTrig(c2 * r * p.c_plus, -c2 * r * p.c_minus, r, -x, domain=model.domain)
    return CatalogEntry(entry_id or f"type_ii_R{R:g}", model, Potential(f, x, -x * R / 3.0),
                        "II", R, notes=f"product of hyperbolic planes, {branch} representative",
                        params={"R": R, "c2": c2, "x": x, "branch": branch})


def build_type_iii(alpha: float = 1.0, k: float = 1.0, c: float = 1.0, x: float = 0.0,
                   h0: float = 4.0, span: float = 3.0,
                   entry_id: str | None = None) -> CatalogEntry:
    """``R x W^3`` with ``h^2 h'' = alpha`` and ``f = c h' - x``; ``R = y = 0``."""
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    disc = k - 2.0 * alpha / h0
    if disc < 0:
        raise HorizonViolation(f"k - 2 alpha / h0 = {disc:.6g} < 0; start outside the horizon")
    traj = integrate_h3(HFamilyParams(R=0.0, a=alpha, h0=h0, h0p=math.sqrt(disc), span=span))
    model = line_cross_w3(traj, fiber_k=k, label="type III")
    hg = traj.profile
    v = hg.values
    h4 = h3_fourth_derivative(alpha, v[:, 0], v[:, 1])
    f = grid_from_columns(hg.nodes, c * v[:, 1] - x, c * v[:, 2], c * v[:, 3], c * h4)
    incomplete = alpha < 0
    notes = "line times a three-dimensional warp"
    if incomplete:
        notes += "; incomplete (h reaches zero in finite backward time)"
    return CatalogEntry(entry_id or f"type_iii_a{alpha:g}", model, Potential(f, x, 0.0),
                        "III", 0.0, notes=notes, incomplete=incomplete,
                        params={"alpha": alpha, "k": k, "c": c, "x": x, "h0": h0,
                                "span": span, "max_drift": traj.max_drift})


def build_type_iv(R: float, a: float, k_fiber: float, x: float = 0.0, y: float = 0.0,
                  init: tuple[float, float, float] = (0.0, 1.0, 0.0), span: float = 5.0,
                  c: float = 1.0, s_f0: float | None = None,
                  entry_id: str | None = None) -> CatalogEntry:
    """Single warp from the warp ODE with an ODE potential.

    ``init`` is ``(s0, h0, h0')``; the first integral at ``s0`` must equal
    ``k_fiber``.  ``c`` is ``f'`` at the potential seed point ``s_f0``.  When
    ``h''`` vanishes identically (flat case) ``c`` is the seed value of ``f``
    and ``f'`` comes from the first-order constraint.
    """
    s0, h0, h0p = init
    k = h0p * h0p + a / (h0 * h0) + R / 12.0 * h0 * h0
    if abs(k - k_fiber) > INTEGRABILITY_TOL:
        raise IntegrabilityMismatch(
            f"first integral {k:.12g} at s0 differs from k_fiber={k_fiber:.12g}")
    hp = HFamilyParams(R=R, a=a, h0=h0, h0p=h0p, s0=s0, span=span)
    traj = integrate_h4(hp)
    f = warp_potential(traj, hp, x, y, c, s_f0)
    model = single_warp(traj, k_fiber, R, label="type IV")
    return CatalogEntry(entry_id or f"type_iv_R{R:g}_a{a:g}", model, Potential(f, x, y), "IV",
                        R, notes=f"warp ODE run ({traj.termination})",
                        params={"R": R, "a": a, "k_fiber": k_fiber, "x": x, "y": y,
                                "init": list(init), "span": span, "c": c, "s_f0": s_f0,
                                "max_drift": traj.max_drift})


def build_sphere_closed_form(k: float = 1.0, c: float = 1.0, x: float = 0.0, y: float = 0.0,
                             entry_id: str | None = None) -> CatalogEntry:
    """Round ``S^4`` of radius ``1/k`` with ``f = c cos(ks) + 3x + y/k^2``."""
    dom = (0.3 / k, (math.pi - 0.3) / k)
    h = Trig(1.0 / k, k, 0.0, 0.0, domain=dom)
    f = Trig(c, k, 0.5 * math.pi, 3.0 * x + y / k**2, domain=dom)
    R = 12.0 * k * k
    return CatalogEntry(entry_id or f"sphere_k{k:g}", single_warp(h, 1.0, R, label="round S4"),
                        Potential(f, x, y), "IV", R, notes="round sphere, closed form",
                        params={"k": k, "c": c, "x": x, "y": y})


def build_hyperbolic_closed_form(k: float = 1.0, c: float = 1.0, x: float = 0.0,
                                 y: float = 0.0, entry_id: str | None = None) -> CatalogEntry:
    """Hyperbolic space with ``f = c cosh(ks) + 3x - y/k^2``."""
    dom = (0.3 / k, 2.5 / k)
    h = HyperbolicTrig(0.5 / k, -0.5 / k, k, 0.0, domain=dom)
    f = HyperbolicTrig(0.5 * c, 0.5 * c, k, 3.0 * x - y / k**2, domain=dom)
    R = -12.0 * k * k
    return CatalogEntry(entry_id or f"hyperbolic_k{k:g}",
                        single_warp(h, 1.0, R, label="hyperbolic H4"),
                        Potential(f, x, y), "IV", R, notes="hyperbolic space, closed form",
                        params={"k": k, "c": c, "x": x, "y": y})


def build_product_line(k: float = 1.0, c1: float = 1.0, c2: float = 0.0, x: float = 0.0,
                       entry_id: str | None = None) -> CatalogEntry:
    """``R x N^3(k)`` with ``f = c1 sin(w s) + c2 cos(w s) - x``, ``w = sqrt(R/3)``.

    Here ``R = 6k > 0`` and ``y = -xR/3``.
    """
    if not k > 0:
        raise InvalidR("the line product needs k > 0")
    R = 6.0 * k
    w = math.sqrt(R / 3.0)
    dom = (-3.0, 3.0)
    amp = math.hypot(c1, c2)
    f = Trig(amp, w, math.atan2(c2, c1), -x, domain=dom)
    model = single_warp(Constant(1.0, domain=dom), k, R, label="line x N3")
    return CatalogEntry(entry_id or f"product_k{k:g}", model, Potential(f, x, -x * R / 3.0),
                        "IV", R, notes="line times a space form",
                        params={"k": k, "c1": c1, "c2": c2, "x": x})


def build_type_v(f0: float = 1.0, entry_id: str | None = None) -> CatalogEntry:
    """Flat chart ``ds^2 + s^2 g_1`` with constant potential."""
    dom = (0.5, 2.5)
    model = single_warp(Linear(0.0, 1.0, domain=dom), 1.0, 0.0, label="flat")
    return CatalogEntry(entry_id or "type_v", model, Potential(Constant(f0, domain=dom), 0.0, 0.0),
                        "V", 0.0, notes="Ricci-flat, constant potential", params={"f0": f0})


def external_entry(entry_id: str, h: Profile, f: Profile, R: float, fiber_k: float,
                   x: float = 0.0, y: float = 0.0, expected_type: str = "IV",
                   notes: str = "user-supplied grids") -> CatalogEntry:
    """Wrap user-supplied profiles for the cases with no in-package construction."""
    return CatalogEntry(entry_id, single_warp(h, fiber_k, R, label=entry_id),
                        Potential(f, x, y), expected_type, R, notes=notes)


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class Recipe:
    builder: Callable[..., CatalogEntry]
    kwargs: dict
    expected_type: str
    expected_R: float
    # how a specialization is imposed: "x_derives_y" rebuilds with x and then
    # overrides y, "xy" passes both to the builder, "override" replaces (x, y)
    mode: str = "x_derives_y"
    external: bool = False


_SPHERE_INIT = (0.3, math.sin(0.3), math.cos(0.3))

REGISTRY: dict[str, Recipe] = {
    "type_i_R6": Recipe(build_type_i, {"R": 6.0}, "I", 6.0),
    "type_i_x1": Recipe(build_type_i, {"R": 6.0, "c1": 1.0, "x": 1.0}, "I", 6.0),
    "type_i_R12": Recipe(build_type_i, {"R": 12.0, "c1": 2.0}, "I", 12.0),
    "type_ii_Rm6": Recipe(build_type_ii, {"R": -6.0}, "II", -6.0),
    "type_iii_a1": Recipe(build_type_iii, {"alpha": 1.0, "c": 2.0, "x": 1.0}, "III", 0.0),
    "type_iii_am1": Recipe(build_type_iii, {"alpha": -1.0, "h0": 1.0}, "III", 0.0),
    "type_iv_s4": Recipe(build_type_iv, {"R": 12.0, "a": 0.0, "k_fiber": 1.0,
                                         "init": _SPHERE_INIT, "span": math.pi - 0.6,
                                         "c": -1.0}, "IV", 12.0, mode="xy"),
    "type_iv_h4": Recipe(build_type_iv, {"R": -12.0, "a": 0.0, "k_fiber": 1.0,
                                         "init": (0.3, math.sinh(0.3), math.cosh(0.3)),
                                         "span": 2.2}, "IV", -12.0, mode="xy"),
    "type_iv_a03": Recipe(build_type_iv, {"R": 12.0, "a": 0.3, "k_fiber": 1.3,
                                          "init": (0.0, 1.0, 0.0), "span": 5.0},
                          "IV", 12.0, mode="xy"),
    "type_iv_flat": Recipe(build_type_iv, {"R": 0.0, "a": 0.0, "k_fiber": 1.0, "y": 1.0,
                                           "init": (0.5, 0.5, 1.0), "span": 2.0},
                           "IV", 0.0, mode="xy"),
    "type_iv_sphere_cf": Recipe(build_sphere_closed_form, {"k": 1.0}, "IV", 12.0, mode="xy"),
    "type_iv_hyperbolic_cf": Recipe(build_hyperbolic_closed_form, {"k": 1.0}, "IV", -12.0,
                                    mode="xy"),
    "type_iv_product": Recipe(build_product_line, {"k": 1.0}, "IV", 6.0),
    "type_v": Recipe(build_type_v, {}, "V", 0.0, mode="override"),
    "type_iv_5_external": Recipe(external_entry, {}, "IV", math.nan, external=True),
    "type_iv_6_external": Recipe(external_entry, {}, "IV", math.nan, external=True),
}


def entry_ids(include_external: bool = False) -> list[str]:
    return [k for k, r in REGISTRY.items() if include_external or not r.external]


def build_entry(entry_id: str, spec: Specialization | None = None) -> CatalogEntry:
    """Build a registered entry, optionally imposing a specialization.

    The imposed ``(x, y)`` is resolved against the entry's ``R``.  Entries
    whose ``y`` is tied to ``x`` are rebuilt with the new ``x`` and then get
    the new ``y`` verbatim, so an incompatible specialization shows up as a
    verifier failure rather than being silently repaired.
    """
    try:
        recipe = REGISTRY[entry_id]
    except KeyError:
        raise UnknownEntry(f"no catalog entry {entry_id!r}") from None
    if recipe.external:
        raise UnknownEntry(f"{entry_id!r} is an external-data slot; supply grids with --model")
    kwargs = dict(recipe.kwargs)
    if spec is None:
        return recipe.builder(entry_id=entry_id, **kwargs)
    x, y = spec.resolve(recipe.expected_R)
    if recipe.mode == "xy":
        return recipe.builder(entry_id=entry_id, **{**kwargs, "x": x, "y": y})
    if recipe.mode == "x_derives_y":
        entry = recipe.builder(entry_id=entry_id, **{**kwargs, "x": x})
    else:
        entry = recipe.builder(entry_id=entry_id, **kwargs)
    return CatalogEntry(entry.id, entry.model, entry.potential.with_constants(x, y),
                        entry.expected_type, entry.expected_R, entry.notes,
                        entry.incomplete, {**entry.params, "spec": spec.label})


def list_entries() -> list[dict]:
    return [{"id": k, "type": r.expected_type, "R": r.expected_R, "external": r.external}
            for k, r in REGISTRY.items()]


# ---------------------------------------------------------------- files


def write_entry(entry: CatalogEntry, directory: str | Path) -> Path:
    """Write ``<id>.json`` plus any grid files into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    refs = write_model_grids(entry.model, directory, entry.id)
    if isinstance(entry.potential.f, Grid):
        fname = f"{entry.id}_f.txt"
        write_grid(entry.potential.f, directory / fname)
        refs["f"] = fname
    path = directory / f"{entry.id}.json"
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(jsonable(entry.to_dict(refs)), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return path


def load_entry(path: str | Path) -> CatalogEntry:
    path = Path(path)
    d = json.loads(path.read_text())
    base = path.parent
    model = WarpedModel.from_dict(d["model"], base)
    pot = Potential.from_dict(d["potential"], base)
    exp_R = d.get("expected_R")
    if exp_R is None:
        exp_R = model.R_expected if model.R_expected is not None else math.nan
    return CatalogEntry(d.get("id", path.stem), model, pot, d.get("expected_type", "IV"),
                        float(exp_R), d.get("notes", ""), bool(d.get("incomplete", False)),
                        d.get("params", {}))


def jsonable(obj):
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def cached_entry(entry_id: str, spec: Specialization | None = None,
                 data_dir: str | Path | None = None) -> CatalogEntry:
    """Build through an on-disk cache under ``data_dir`` (or ``STATICLAB_DATA_DIR``)."""
    data_dir = data_dir or os.environ.get("STATICLAB_DATA_DIR")
    if not data_dir:
        return build_entry(entry_id, spec)
    tag = "default" if spec is None else spec.label.replace(":", "_").replace(",", "_")
    directory = Path(data_dir) / entry_id / tag
    path = directory / f"{entry_id}.json"
    if path.exists():
        return load_entry(path)
    entry = build_entry(entry_id, spec)
    write_entry(entry, directory)
    return entry
