"""Finite-difference curvature of the coordinate metric.

This module only ever evaluates metric *values* (``d0`` of the warp
profiles) and differentiates them numerically, so it is independent of the
closed-form curvature in :mod:`staticlab.models`.  All stencils are second
order central differences; the error model is ``O(fd_step**2)``.

Coordinates
-----------
double warps: ``(s, t, r, theta)`` with ``g = diag(1, p^2, h^2, h^2 u(r)^2)``;
single warps: ``(s, t, r, theta)`` read as a nested polar chart,
``g = diag(1, h^2, h^2 u_k(t)^2, h^2 u_k(t)^2 sin(r)^2)``.
Here ``u_k`` is ``sin(sqrt(k) r)/sqrt(k)``, ``r`` or ``sinh(sqrt(-k) r)/sqrt(-k)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import SingularMetric, StencilOutOfDomain
from .models import WarpedModel
from .profiles import Profile

DEFAULT_FD_STEP = 1e-3
POLE_GUARD = 1e-3
DIM = 4


class CoordinatePoint(NamedTuple):
    s: float
    t: float
    r: float
    theta: float


@dataclass
class OracleReport:
    point: tuple[float, float, float, float]
    ricci_frame_diag: tuple[float, float, float, float]
    scalar: float
    fd_step: float
    ricci_offdiag_max: float = 0.0
    codazzi_max: float | None = None
    hessian_frame_diag: tuple[float, float, float, float] | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        return {"point": list(self.point), "ricci": list(self.ricci_frame_diag),
                "scalar": self.scalar, "codazzi_max": self.codazzi_max,
                "fd_step": self.fd_step, "ricci_offdiag_max": d["ricci_offdiag_max"],
                "hessian": None if self.hessian_frame_diag is None
                else list(self.hessian_frame_diag)}


def fiber_warp(k: float, r: float) -> float:
    if k > 0:
        q = math.sqrt(k)
        return math.sin(q * r) / q
    if k < 0:
        q = math.sqrt(-k)
        return math.sinh(q * r) / q
    return r


def fiber_midpoint(k: float) -> float:
    return 0.5 * math.pi / math.sqrt(k) if k > 0 else 1.0


def default_point(model: WarpedModel, s: float) -> CoordinatePoint:
    if model.is_single:
        return CoordinatePoint(s, fiber_midpoint(model.fiber_k), 0.5 * math.pi, 0.0)
    return CoordinatePoint(s, 0.0, fiber_midpoint(model.fiber_k), 0.0)


def fiber_points(model: WarpedModel, s: float, n: int = 10) -> list[CoordinatePoint]:
    """Deterministic spread of points on the level set ``{s = const}``.

    Polar angles stay in the middle band ``[0.3, 0.7]`` of their chart range,
    where the angular warps are at least ``sin(0.3 pi)`` of their maximum.
    """
    rmid = fiber_midpoint(model.fiber_k)
    pts = []
    for j in range(n):
        w = 0.3 + 0.4 * (j + 0.5) / n
        theta = 2.0 * math.pi * (j + 0.5) / n
        if model.is_single:
            pts.append(CoordinatePoint(s, 2.0 * rmid * w, math.pi * w, theta))
        else:
            pts.append(CoordinatePoint(s, 6.0 * w - 3.0, 2.0 * rmid * w, theta))
    return pts


def _metric_diag(model: WarpedModel, x) -> np.ndarray:
    s, t, r, _ = x
    h = model.h.eval(s).d0
    k = model.fiber_k
    if model.is_single:
        u = fiber_warp(k, t)
        v = math.sin(r)
        if abs(u) < POLE_GUARD or abs(v) < POLE_GUARD:
            raise SingularMetric(f"fibre chart degenerates at {tuple(x)}")
        return np.array([1.0, h * h, (h * u) ** 2, (h * u * v) ** 2])
    p = model.p.eval(s).d0
    u = fiber_warp(k, r)
    if abs(u) < POLE_GUARD:
        raise SingularMetric(f"fibre chart degenerates at {tuple(x)}")
    return np.array([1.0, p * p, h * h, (h * u) ** 2])


def metric_at(model: WarpedModel, pt) -> np.ndarray:
    g = np.diag(_metric_diag(model, pt))
    if np.min(np.diag(g)) < 1e-14:
        raise SingularMetric(f"metric degenerate at {tuple(pt)}")
    return g


def _check_stencil(model: WarpedModel, pt, reach: float):
    s = pt[0]
    lo, hi = model.domain
    if s - reach < lo or s + reach > hi:
        raise StencilOutOfDomain(
            f"stencil [{s - reach}, {s + reach}] leaves model domain [{lo}, {hi}]")


def _metric_jets(model, x, eps):
    """Metric, first and second coordinate derivatives at ``x``.

    The stencils act on the coframe lengths ``sqrt(g_ii)`` of the diagonal
    metric; derivatives of ``g`` then follow from the product rule.  This
    keeps the truncation constants of the metric's own frequencies.
    """
    x = np.asarray(x, dtype=float)
    E = np.eye(DIM) * eps

    def e(y):
        return np.sqrt(_metric_diag(model, y))

    e0 = e(x)
    if np.min(e0) ** 2 < 1e-14:
        raise SingularMetric(f"metric degenerate at {tuple(x)}")
    plus = [e(x + E[i]) for i in range(DIM)]
    minus = [e(x - E[i]) for i in range(DIM)]
    de = np.array([(plus[i] - minus[i]) / (2 * eps) for i in range(DIM)])
    dde = np.empty((DIM, DIM, DIM))
    for i in range(DIM):
        dde[i, i] = (plus[i] - 2 * e0 + minus[i]) / eps**2
        for j in range(i + 1, DIM):
            v = e(x + E[i] + E[j]) - e(x + E[i] - E[j]) - e(x - E[i] + E[j]) + e(x - E[i] - E[j])
            dde[i, j] = dde[j, i] = v / (4 * eps**2)
    g0 = np.diag(e0 * e0)
    dg = np.zeros((DIM, DIM, DIM))
    ddg = np.zeros((DIM, DIM, DIM, DIM))
    idx = np.arange(DIM)
    dg[:, idx, idx] = 2.0 * e0 * de
    ddg[:, :, idx, idx] = 2.0 * (de[:, None, :] * de[None, :, :] + e0 * dde)
    return g0, dg, ddg


def christoffel(g, dg):
    """``Gamma[a, b, c] = Gamma^a_{bc}`` from ``dg[k, i, j] = d_k g_ij``."""
    ginv = np.linalg.inv(g)
    lower = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg)
                   - np.einsum("dbc->dbc", dg))
    return np.einsum("ad,dbc->abc", ginv, lower), ginv


def _ricci_coord(g, dg, ddg):
    gamma, ginv = christoffel(g, dg)
    # d_e g^{ad} = -g^{am} d_e g_mn g^{nd}
    dginv = -np.einsum("am,emn,nd->ead", ginv, dg, ginv)
    lower = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    dlower = 0.5 * (np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg)
                    - np.einsum("edbc->edbc", ddg))
    dgamma = (np.einsum("ead,dbc->eabc", dginv, lower)
              + np.einsum("ad,edbc->eabc", ginv, dlower))
    ric = (np.einsum("aabd->bd", dgamma) - np.einsum("daba->bd", dgamma)
           + np.einsum("aae,ebd->bd", gamma, gamma) - np.einsum("ade,eba->bd", gamma, gamma))
    return 0.5 * (ric + ric.T), gamma, ginv


def to_frame(T: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Orthonormal-frame components of a covariant 2-tensor on a diagonal metric."""
    scale = np.sqrt(np.diag(g))
    return T / np.outer(scale, scale)


def to_coordinates(T_frame: np.ndarray, g: np.ndarray) -> np.ndarray:
    scale = np.sqrt(np.diag(g))
    return T_frame * np.outer(scale, scale)


def _ricci_at(model, x, eps):
    g, dg, ddg = _metric_jets(model, x, eps)
    ric, gamma, ginv = _ricci_coord(g, dg, ddg)
    return g, ric, gamma, ginv


def ricci_fd(model: WarpedModel, pt, fd_step: float = DEFAULT_FD_STEP,
             richardson: bool = False) -> OracleReport:
    """Frame-diagonal Ricci and scalar curvature by finite differences.

    With ``richardson`` the steps ``fd_step`` and ``fd_step/2`` are combined
    to cancel the leading ``O(fd_step**2)`` term.
    """
    _check_stencil(model, pt, fd_step)
    g, ric, _, ginv = _ricci_at(model, pt, fd_step)
    if richardson:
        ric = (4.0 * _ricci_at(model, pt, 0.5 * fd_step)[1] - ric) / 3.0
    frame = to_frame(ric, g)
    off = frame - np.diag(np.diag(frame))
    return OracleReport(point=tuple(float(v) for v in pt),
                        ricci_frame_diag=tuple(float(v) for v in np.diag(frame)),
                        scalar=float(np.einsum("ij,ij->", ginv, ric)),
                        fd_step=fd_step, ricci_offdiag_max=float(np.max(np.abs(off))))


def codazzi_residual_fd(model: WarpedModel, pt, fd_step: float = DEFAULT_FD_STEP) -> float:
    """Max over frame index triples of ``|nabla_k R_ij - nabla_i R_kj|``."""
    _check_stencil(model, pt, 2 * fd_step)
    x = np.asarray(pt, dtype=float)
    E = np.eye(DIM) * fd_step
    g, ric, gamma, _ = _ricci_at(model, x, fd_step)
    dric = np.array([(_ricci_at(model, x + E[k], fd_step)[1]
                      - _ricci_at(model, x - E[k], fd_step)[1]) / (2 * fd_step)
                     for k in range(DIM)])
    # nabla_k R_ij = d_k R_ij - Gamma^m_ki R_mj - Gamma^m_kj R_im
    nabla = (dric - np.einsum("mki,mj->kij", gamma, ric)
             - np.einsum("mkj,im->kij", gamma, ric))
    cod = nabla - np.einsum("ikj->kij", nabla)
    scale = np.sqrt(np.diag(g))
    cod = cod / np.einsum("k,i,j->kij", scale, scale, scale)
    return float(np.max(np.abs(cod)))


def covariant_hessian_fd(model: WarpedModel, f: Profile, pt,
                         fd_step: float = DEFAULT_FD_STEP) -> tuple[float, float, float, float]:
    """Frame-diagonal ``nabla df = d^2 f - Gamma . df`` for a function of ``s``."""
    _check_stencil(model, pt, fd_step)
    if not (f.contains(pt[0] - fd_step) and f.contains(pt[0] + fd_step)):
        raise StencilOutOfDomain("potential stencil leaves its domain")
    x = np.asarray(pt, dtype=float)
    E = np.eye(DIM) * fd_step

    def F(y):
        return f.eval(y[0]).d0

    f0 = F(x)
    df = np.array([(F(x + E[i]) - F(x - E[i])) / (2 * fd_step) for i in range(DIM)])
    ddf = np.empty((DIM, DIM))
    for i in range(DIM):
        ddf[i, i] = (F(x + E[i]) - 2 * f0 + F(x - E[i])) / fd_step**2
        for j in range(i + 1, DIM):
            v = (F(x + E[i] + E[j]) - F(x + E[i] - E[j]) - F(x - E[i] + E[j])
                 + F(x - E[i] - E[j]))
            ddf[i, j] = ddf[j, i] = v / (4 * fd_step**2)
    g, dg, _ = _metric_jets(model, x, fd_step)
    gamma, _ = christoffel(g, dg)
    hess = ddf - np.einsum("mij,m->ij", gamma, df)
    return tuple(float(v) for v in np.diag(to_frame(hess, g)))


def oracle_report(model: WarpedModel, pt, fd_step: float = DEFAULT_FD_STEP,
                  f: Profile | None = None, codazzi: bool = True) -> OracleReport:
    rep = ricci_fd(model, pt, fd_step)
    if codazzi:
        rep.codazzi_max = codazzi_residual_fd(model, pt, fd_step)
    if f is not None:
        rep.hessian_frame_diag = covariant_hessian_fd(model, f, pt, fd_step)
    return rep
