"""Integration of the warp and potential ODEs with first-integral monitoring.

The warp equations are

* four-dimensional single warp: ``h'' + (R/12) h = a h^-3`` with first
  integral ``(h')^2 + a h^-2 + (R/12) h^2 = k``;
* three-dimensional slice of ``R x W^3``: ``h^2 h'' = alpha`` with first
  integral ``(h')^2 + 2 alpha / h = k``.

The potential solves the linear second-order equation
``f'' = -f (R/12 + 3 a h^-4) + 3 x (R/12 - a h^-4) + y`` seeded so that the
first-order constraint ``h' f' - f h'' = x (h'' + R h / 3) + y h`` holds at
the seed point; the second-order flow then propagates the constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateInitialization,
    EmptyDomainIntersection,
    InvalidTolerance,
    StepFailure,
)
from .profiles import Grid, Profile, grid_from_columns, read_grid, write_grid

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
# Node spacing cap; keeps Hermite interpolation error far below the 1e-8 gates.
DEFAULT_MAX_STEP = 1e-2
COLLAPSE_FRACTION = 1e-8


@dataclass(frozen=True)
class HFamilyParams:
    R: float
    a: float
    h0: float
    h0p: float
    s0: float = 0.0
    span: float = 5.0

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValueError(f"h0 must be positive, got {self.h0}")
        if not self.span > 0:
            raise ValueError(f"span must be positive, got {self.span}")


@dataclass(frozen=True)
class FFamilyParams:
    x: float
    y: float
    c: float = 1.0
    s0: float | None = None


@dataclass(frozen=True)
class Trajectory:
    profile: Grid
    first_integral_k: float
    max_drift: float
    # "complete", "collapse" (h -> 0 event) or "step_failure"
    termination: str = "complete"

    @property
    def domain(self):
        return self.profile.domain

    def write(self, path) -> None:
        write_grid(self.profile, path,
                   sidecar={"first_integral_k": self.first_integral_k,
                            "max_drift": self.max_drift})

    @classmethod
    def read(cls, path) -> "Trajectory":
        grid, side = read_grid(path)
        return cls(grid, side.get("first_integral_k", math.nan),
                   side.get("max_drift", math.nan))


def h4_first_integral(R, a, h, hp):
    return hp * hp + a / (h * h) + R / 12.0 * h * h


def h3_first_integral(alpha, h, hp):
    return hp * hp + 2.0 * alpha / h


def _check_tolerances(rtol, atol):
    for name, tol in (("rtol", rtol), ("atol", atol)):
        if not (0 < tol <= 1e-2):
            raise InvalidTolerance(f"{name}={tol} outside (0, 1e-2]")


def _integrate_warp(rhs, p: HFamilyParams, rtol, atol, max_step):
    _check_tolerances(rtol, atol)
    threshold = COLLAPSE_FRACTION * p.h0

    def collapse(s, y):
        return y[0] - threshold

    collapse.terminal = True
    collapse.direction = -1

    sol = solve_ivp(rhs, (p.s0, p.s0 + p.span), [p.h0, p.h0p], method="RK45",
                    rtol=rtol, atol=atol, max_step=max_step, events=collapse)
    if sol.status == -1:
        if sol.t.size < 2:
            raise StepFailure(sol.message)
        termination = "step_failure"
    elif sol.status == 1:
        termination = "collapse"
    else:
        termination = "complete"
    s, h, hp = sol.t, sol.y[0], sol.y[1]
    if termination == "collapse":
        # solve_ivp already appends the located event point as the last node
        keep = np.concatenate([np.diff(s) > 0, [True]])
        s, h, hp = s[keep], h[keep], hp[keep]
    return s, h, hp, termination


def integrate_h4(params: HFamilyParams, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, max_step: float = DEFAULT_MAX_STEP) -> Trajectory:
    """Integrate ``h'' + (R/12) h = a h^-3`` from ``(s0, h0, h0p)`` over ``span``.

    Stops at the end of the span, or earlier if ``h`` falls below
    ``1e-8 * h0`` (the reported domain is then truncated there).
    """
    R, a = params.R, params.a

    def rhs(s, y):
        return [y[1], -R / 12.0 * y[0] + a * y[0] ** -3]

    s, h, hp, termination = _integrate_warp(rhs, params, rtol, atol, max_step)
    hpp = -R / 12.0 * h + a * h**-3
    hppp = -(R / 12.0 + 3.0 * a * h**-4) * hp
    k = h4_first_integral(R, a, params.h0, params.h0p)
    drift = float(np.max(np.abs(h4_first_integral(R, a, h, hp) - k)))
    return Trajectory(grid_from_columns(s, h, hp, hpp, hppp), float(k), drift, termination)


def integrate_h3(params: HFamilyParams, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, max_step: float = DEFAULT_MAX_STEP) -> Trajectory:
    """Integrate ``h'' = alpha / h^2`` (``params.a`` is ``alpha``; ``R`` is ignored)."""
    alpha = params.a

    def rhs(s, y):
        return [y[1], alpha / (y[0] * y[0])]

    s, h, hp, termination = _integrate_warp(rhs, params, rtol, atol, max_step)
    hpp = alpha / h**2
    hppp = -2.0 * alpha * hp / h**3
    k = h3_first_integral(alpha, params.h0, params.h0p)
    drift = float(np.max(np.abs(h3_first_integral(alpha, h, hp) - k)))
    return Trajectory(grid_from_columns(s, h, hp, hpp, hppp), float(k), drift, termination)


def h3_fourth_derivative(alpha, h, hp):
    """``h''''`` along ``h^2 h'' = alpha``, for building ``c h' - x`` grids."""
    return 2.0 * alpha * (3.0 * hp * hp / h**4 - alpha / h**5)


def _profile(h) -> Profile:
    return h.profile if isinstance(h, Trajectory) else h


def pick_seed(h: Profile) -> float:
    """Node of ``h`` with the largest ``|h''|`` (best-conditioned seed point)."""
    if isinstance(h, Grid):
        nodes = h.nodes
    else:
        lo, hi = h.domain
        nodes = np.linspace(lo, hi, 201)
    values = [abs(h.eval(s).d2) for s in nodes]
    return float(nodes[int(np.argmax(values))])


def seed_value(hv, R, x, y, c):
    """``f(s0)`` making the first-order constraint hold with ``f'(s0) = c``."""
    h, hp, hpp = hv.d0, hv.d1, hv.d2
    if abs(hpp) < 1e-12 * max(1.0, abs(h)):
        raise DegenerateInitialization(
            f"h''(s0) = {hpp!r} vanishes; choose a seed point with h'' != 0")
    return (c * hp - (x * (hpp + R / 3.0 * h) + y * h)) / hpp


def integrate_f_second_order(h, hparams: HFamilyParams, fparams: FFamilyParams,
                             rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                             max_step: float = DEFAULT_MAX_STEP,
                             initial_value: float | None = None) -> Grid:
    """Potential on the domain of ``h`` for a four-dimensional single warp.

    ``initial_value`` overrides the constraint-derived ``f(s0)``; callers use
    it only where ``h''`` vanishes identically and the seed formula is void.
    """
    _check_tolerances(rtol, atol)
    h = _profile(h)
    R, a = hparams.R, hparams.a
    x, y = fparams.x, fparams.y
    s0 = pick_seed(h) if fparams.s0 is None else float(fparams.s0)
    hv0 = h.eval(s0)
    f0 = seed_value(hv0, R, x, y, fparams.c) if initial_value is None else initial_value

    def coeff(s):
        hv = h.eval(s)
        return hv, R / 12.0 + 3.0 * a * hv.d0**-4

    def rhs(s, z):
        hv, q = coeff(s)
        return [z[1], -z[0] * q + 3.0 * x * (R / 12.0 - a * hv.d0**-4) + y]

    lo, hi = h.domain
    pieces = []
    for end in (lo, hi):
        if end == s0:
            continue
        sol = solve_ivp(rhs, (s0, end), [f0, fparams.c], method="RK45",
                        rtol=rtol, atol=atol, max_step=max_step)
        if sol.status != 0:
            raise StepFailure(sol.message)
        pieces.append((sol.t, sol.y))
    s_all = [np.array([s0])]
    z_all = [np.array([[f0], [fparams.c]])]
    for t, z in pieces:
        s_all.append(t[1:])
        z_all.append(z[:, 1:])
    s = np.concatenate(s_all)
    z = np.concatenate(z_all, axis=1)
    order = np.argsort(s)
    s, f, fp = s[order], z[0, order], z[1, order]

    d2 = np.empty_like(s)
    d3 = np.empty_like(s)
    for i, si in enumerate(s):
        hv, q = coeff(si)
        hinv5 = hv.d0**-5
        d2[i] = -f[i] * q + 3.0 * x * (R / 12.0 - a * hv.d0**-4) + y
        d3[i] = -fp[i] * q + 12.0 * a * hinv5 * hv.d1 * (f[i] + x)
    return grid_from_columns(s, f, fp, d2, d3)



def warp_potential(h, hparams: HFamilyParams, x: float, y: float, c: float = 1.0,
                   s0: float | None = None, **solver) -> Grid:
    """Potential for a warp run with ``f'(s0) = c``.

    For the flat family (``R = a = 0``) ``h''`` vanishes and the seed formula
    is void, so ``c`` is taken as the seed value instead and ``f'(s0)``
    follows from the first-order constraint.  A constant flat warp leaves the
    slope free; it is set to zero.
    """
    if hparams.R == 0 and hparams.a == 0:
        sf = hparams.s0 if s0 is None else s0
        hv = _profile(h).eval(sf)
        slope = 0.0 if hv.d1 == 0 else (x * hv.d2 + y * hv.d0 + c * hv.d2) / hv.d1
        return integrate_f_second_order(h, hparams, FFamilyParams(x, y, slope, sf),
                                        initial_value=c, **solver)
    return integrate_f_second_order(h, hparams, FFamilyParams(x, y, c, s0), **solver)

def chebyshev_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[lo, hi]`` (endpoints included)."""
    j = np.arange(n)
    return lo + (hi - lo) * (1.0 - np.cos(np.pi * j / (n - 1))) / 2.0


def common_domain(*profiles: Profile) -> tuple[float, float]:
    lo = max(p.domain[0] for p in profiles)
    hi = min(p.domain[1] for p in profiles)
    if not lo < hi:
        raise EmptyDomainIntersection(f"profiles share no interval ({lo}, {hi})")
    return lo, hi


def first_order_constraint_residual(h, f, R: float, x: float, y: float,
                                    samples: int = 101) -> float:
    """Max of ``|h'f' - f h'' - x (h'' + R h/3) - y h|`` on the common domain."""
    h, f = _profile(h), _profile(f)
    lo, hi = common_domain(h, f)
    worst = 0.0
    for s in chebyshev_nodes(lo, hi, samples):
        hv, fv = h.eval(s), f.eval(s)
        r = hv.d1 * fv.d1 - fv.d0 * hv.d2 - x * (hv.d2 + R / 3.0 * hv.d0) - y * hv.d0
        worst = max(worst, abs(r))
    return worst
