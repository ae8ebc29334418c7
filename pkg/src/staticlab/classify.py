"""Ricci-eigenvalue patterns, obstruction quantities and type assignment.

The classifier only looks at sampled eigenvalues, sampled ``zeta`` values and
the potential constants; it never reads the declared model class, so it can
be pointed at negative controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import StencilOutOfDomain, TooFewSamples
from .models import Potential, WarpedModel, ricci_closed_form, zeta_values
from .oracle import DEFAULT_FD_STEP, default_point, ricci_fd
from .verify import DEFAULT_SAMPLES, FLAG_TOL, sample_points

ALL_EQUAL = "AllEqual"
TWO_EQUAL = "TwoEqualAmongFiber"
PAIRWISE_DISTINCT = "PairwiseDistinctFiber"
DEGENERATE = "Degenerate"

TYPES = ("I", "II", "III", "IV", "V", "Unclassified")

DEFAULT_CLUSTER_TOL = 1e-6
ZERO_TOL = 1e-8


@dataclass
class EigenProfile:
    """Samples ``(s, l1, l2, l3, l4)`` with ``l1`` the ``E1`` eigenvalue.

    ``zeta`` optionally carries ``(zeta2, zeta3, zeta4)`` per sample.
    """

    samples: list[tuple[float, float, float, float, float]]
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    zeta: list[tuple[float, float, float]] | None = None

    def __post_init__(self):
        if not self.cluster_tol > 0:
            raise ValueError("cluster_tol must be positive")
        order = np.argsort([row[0] for row in self.samples], kind="stable")
        self.samples = [tuple(float(v) for v in self.samples[i]) for i in order]
        if self.zeta is not None:
            self.zeta = [tuple(float(v) for v in self.zeta[i]) for i in order]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([row[1:] for row in self.samples])


@dataclass
class SpectralPattern:
    signature: str
    theorem1_type: str = "Unclassified"
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"signature": self.signature, "theorem1_type": self.theorem1_type,
                "diagnostics": self.diagnostics}


class ObstructionValues(NamedTuple):
    P: float
    A: float
    gamma_product: float
    fprime_over_f_rhs: float
    p_zero: bool


def _close(u, v, tol):
    return abs(u - v) <= tol * max(1.0, abs(u), abs(v))


def _sample_signature(l2, l3, l4, tol) -> str:
    e23, e24, e34 = _close(l2, l3, tol), _close(l2, l4, tol), _close(l3, l4, tol)
    if e23 and e24 and e34:
        return ALL_EQUAL
    if e23 or e24 or e34:
        return TWO_EQUAL
    return PAIRWISE_DISTINCT


def eigen_multiplicity(profile: EigenProfile) -> SpectralPattern:
    """Samplewise clustering of the fibre eigenvalues ``(l2, l3, l4)``.

    A pattern that changes along ``s`` is reported as ``Degenerate`` together
    with the per-signature sample counts.
    """
    if len(profile.samples) < 3:
        raise TooFewSamples(f"need at least 3 samples, got {len(profile.samples)}")
    sigs = [_sample_signature(l2, l3, l4, profile.cluster_tol)
            for _, _, l2, l3, l4 in profile.samples]
    counts = {s: sigs.count(s) for s in dict.fromkeys(sigs)}
    if len(counts) > 1:
        return SpectralPattern(DEGENERATE, diagnostics={"signature_counts": counts})
    diag = {}
    if sigs[0] == TWO_EQUAL:
        lam = profile.eigenvalues
        if not all(_close(r[2], r[3], profile.cluster_tol) for r in lam):
            diag["pairing"] = "relabelled"
    return SpectralPattern(sigs[0], diagnostics=diag)


def obstruction_values(a: float, b: float, c: float, p_tol: float = 1e-12) -> ObstructionValues:
    """``P``, ``A`` and the derived ratios for ``(a, b, c) = (zeta2, zeta3, zeta4)``.

    Where ``P`` vanishes the ratios are ``nan`` and ``p_zero`` is set.
    """
    P = a * a + b * b + c * c - a * b - b * c - a * c
    A = (6 * a * b * c - a * a * b - a * b * b - a * a * c - a * c * c
         - b * b * c - b * c * c)
    if abs(P) <= p_tol:
        return ObstructionValues(P, A, math.nan, math.nan, True)
    gamma = (a - b) * (a - c) * (b - c) ** 2 / (4.0 * P)
    return ObstructionValues(P, A, gamma, -A / (2.0 * P), False)


def eigen_profile(model: WarpedModel, samples: int = DEFAULT_SAMPLES,
                  source: str = "closed_form", fd_step: float = DEFAULT_FD_STEP,
                  cluster_tol: float = DEFAULT_CLUSTER_TOL) -> EigenProfile:
    """Sample the frame Ricci diagonal from closed forms or the oracle."""
    if source not in ("closed_form", "oracle"):
        raise ValueError(f"unknown eigenvalue source {source!r}")
    margin = 2 * fd_step if source == "oracle" else 0.0
    rows, zetas = [], []
    for s in sample_points(model, None, samples, margin=margin):
        s = float(s)
        if source == "oracle":
            try:
                lam = ricci_fd(model, default_point(model, s), fd_step).ricci_frame_diag
            except StencilOutOfDomain:
                continue
        else:
            lam = ricci_closed_form(model, s).ricci_diag
        rows.append((s, *lam))
        zetas.append(zeta_values(model, s))
    return EigenProfile(rows, cluster_tol, zetas)


def _range(values) -> list[float] | None:
    vals = [v for v in values if math.isfinite(v)]
    return [min(vals), max(vals)] if vals else None


def _f_is_constant(potential: Potential, eigen: EigenProfile) -> bool:
    vals = np.array([potential.f.eval(row[0]).d0 for row in eigen.samples])
    return float(np.ptp(vals)) <= 1e-12 * max(1.0, float(np.max(np.abs(vals))))


def classify_theorem1(potential: Potential, eigen: EigenProfile,
                      zero_tol: float = ZERO_TOL,
                      constraint_tol: float = ZERO_TOL) -> SpectralPattern:
    """Assign one of the five local types from sampled spectral data.

    ``R`` is the mean sampled trace.  The two-equal branch uses the sampled
    ``zeta`` values to recognise a constant fibre warp (``zeta3 = 0``) or a
    constant line factor (``zeta2 = 0``).  ``constraint_tol`` loosens the
    constraint flags for oracle-sourced eigenvalues.
    """
    pattern = eigen_multiplicity(eigen)
    lam = eigen.eigenvalues
    R = float(np.mean(lam.sum(axis=1)))
    x, y = potential.x, potential.y
    tol = constraint_tol
    flags = {"xR3_plus_y_zero": abs(x * R / 3.0 + y) < tol,
             "R_zero": abs(R) < tol, "y0_zero": abs(y) < FLAG_TOL}
    diag = dict(pattern.diagnostics)
    diag["constraint_flags"] = flags
    diag["R"] = R
    if eigen.zeta is not None:
        obs = [obstruction_values(*z) for z in eigen.zeta]
        diag["P_range"] = _range(o.P for o in obs)
        diag["A_range"] = _range(o.A for o in obs)
    else:
        diag["P_range"] = diag["A_range"] = None
    constant_f = _f_is_constant(potential, eigen)
    pattern.diagnostics = diag

    if float(np.max(np.abs(lam))) < zero_tol:
        # Ricci-flat: a constant potential is the pure flat case, otherwise
        # the flat member of the conformally flat family
        pattern.theorem1_type = "V" if constant_f else "IV"
        return pattern
    sig = pattern.signature
    if sig == ALL_EQUAL:
        pattern.theorem1_type = "IV"
    elif sig == TWO_EQUAL and eigen.zeta is not None:
        zeta = np.array(eigen.zeta)
        a_zero = bool(np.all(np.abs(zeta[:, 0]) < zero_tol))
        b_zero = bool(np.all(np.abs(zeta[:, 1]) < zero_tol))
        if b_zero and flags["xR3_plus_y_zero"] and R > tol:
            pattern.theorem1_type = "I"
        elif b_zero and flags["xR3_plus_y_zero"] and R < -tol:
            pattern.theorem1_type = "II"
        elif a_zero and flags["R_zero"] and flags["y0_zero"]:
            pattern.theorem1_type = "III"
    elif sig == PAIRWISE_DISTINCT and not constant_f:
        diag["distinct_fiber_violation"] = True
    return pattern


def classify(model: WarpedModel, potential: Potential, samples: int = DEFAULT_SAMPLES,
             source: str = "closed_form", fd_step: float = DEFAULT_FD_STEP,
             cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralPattern:
    eigen = eigen_profile(model, samples, source, fd_step, cluster_tol)
    tol = ZERO_TOL if source == "closed_form" else 1e-4
    return classify_theorem1(potential, eigen, zero_tol=tol, constraint_tol=tol)
