"""Scalar profiles of the radial variable ``s``.

A profile returns its value and first three ``s``-derivatives.  Closed-form
families are differentiated analytically; :class:`Grid` profiles interpolate
stored nodal data ``(d0, d1, d2, d3)`` produced by the ODE integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DomainTooSmall, NonFinite, OutOfDomain

__all__ = [
    "ProfileValue",
    "Profile",
    "Constant",
    "Linear",
    "Trig",
    "HyperbolicTrig",
    "PowerLaw",
    "Grid",
    "derivative_selfcheck",
    "sample_to_grid",
    "profile_from_dict",
    "write_grid",
    "read_grid",
]

_INF = math.inf
_ENDPOINT_SLACK = 1e-12


class ProfileValue(NamedTuple):
    d0: float
    d1: float
    d2: float
    d3: float


@dataclass(frozen=True)
class Profile:
    """Base class; subclasses implement :meth:`_eval`."""

    domain: tuple[float, float] = field(default=(-_INF, _INF), kw_only=True)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise DomainTooSmall(f"empty domain {self.domain}")
        object.__setattr__(self, "domain", (float(lo), float(hi)))

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def _clamp(self, s: float) -> float:
        lo, hi = self.domain
        if lo <= s <= hi:
            return s
        slack = _ENDPOINT_SLACK * self.length if math.isfinite(self.length) else 0.0
        if lo - slack <= s < lo:
            return lo
        if hi < s <= hi + slack:
            return hi
        raise OutOfDomain(f"s={s!r} outside domain [{lo!r}, {hi!r}]")

    def contains(self, s: float) -> bool:
        try:
            self._clamp(s)
        except OutOfDomain:
            return False
        return True

    def eval(self, s: float) -> ProfileValue:
        try:
            value = self._eval(self._clamp(float(s)))
        except (OverflowError, ZeroDivisionError) as exc:
            raise NonFinite(f"profile evaluation failed at s={s!r}: {exc}") from None
        if not all(math.isfinite(v) for v in value):
            raise NonFinite(f"non-finite profile value at s={s!r}: {value}")
        return ProfileValue(*value)

    def __call__(self, s: float) -> float:
        return self.eval(s).d0

    def _eval(self, s: float) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def restrict(self, lo: float, hi: float) -> "Profile":
        """Same profile on a sub-interval of the current domain."""
        lo, hi = max(lo, self.domain[0]), min(hi, self.domain[1])
        return _replace_domain(self, (lo, hi))


def _replace_domain(profile: Profile, domain):
    import dataclasses

    return dataclasses.replace(profile, domain=domain)


def _domain_list(domain):
    return [None if not math.isfinite(v) else v for v in domain]


@dataclass(frozen=True)
class Constant(Profile):
    c: float = 0.0

    def _eval(self, s):
        return (self.c, 0.0, 0.0, 0.0)

    def to_dict(self):
        return {"kind": "constant", "c": self.c, "domain": _domain_list(self.domain)}


@dataclass(frozen=True)
class Linear(Profile):
    """``c0 + c1 * s``."""

    c0: float = 0.0
    c1: float = 1.0

    def _eval(self, s):
        return (self.c0 + self.c1 * s, self.c1, 0.0, 0.0)

    def to_dict(self):
        return {"kind": "linear", "c0": self.c0, "c1": self.c1,
                "domain": _domain_list(self.domain)}


@dataclass(frozen=True)
class Trig(Profile):
    """``amplitude * sin(frequency * s + phase) + offset``."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0
    offset: float = 0.0

    def _eval(self, s):
        a, w = self.amplitude, self.frequency
        arg = w * s + self.phase
        sn, cs = math.sin(arg), math.cos(arg)
        return (a * sn + self.offset, a * w * cs, -a * w * w * sn, -a * w**3 * cs)

    def to_dict(self):
        return {"kind": "trig", "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase, "offset": self.offset,
                "domain": _domain_list(self.domain)}


@dataclass(frozen=True)
class HyperbolicTrig(Profile):
    """``c_plus * exp(rate * s) + c_minus * exp(-rate * s) + offset``.

    ``cosh`` and ``sinh`` are the cases ``c_plus = ±c_minus = 1/2``.
    """

    c_plus: float = 0.5
    c_minus: float = 0.5
    rate: float = 1.0
    offset: float = 0.0

    def _eval(self, s):
        r = self.rate
        ep = self.c_plus * math.exp(r * s)
        em = self.c_minus * math.exp(-r * s)
        return (ep + em + self.offset, r * (ep - em), r * r * (ep + em), r**3 * (ep - em))

    def to_dict(self):
        return {"kind": "hyperbolic_trig", "c_plus": self.c_plus, "c_minus": self.c_minus,
                "rate": self.rate, "offset": self.offset,
                "domain": _domain_list(self.domain)}


@dataclass(frozen=True)
class PowerLaw(Profile):
    """``coefficient * (s - shift) ** exponent + offset``.

    Non-integer exponents need ``s > shift`` on the whole domain.
    """

    coefficient: float = 1.0
    exponent: float = 1.0
    shift: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if float(self.exponent) != int(self.exponent) and self.domain[0] <= self.shift:
            raise OutOfDomain("non-integer power needs domain strictly right of shift")

    def _eval(self, s):
        c, p, z = self.coefficient, self.exponent, s - self.shift
        out = []
        factor = c
        for k in range(4):
            e = p - k
            if factor == 0.0:
                out.append(0.0)
            elif e == 0:
                out.append(factor)
            else:
                out.append(factor * z**e)
            factor *= e
        out[0] += self.offset
        return tuple(out)

    def to_dict(self):
        return {"kind": "power_law", "coefficient": self.coefficient,
                "exponent": self.exponent, "shift": self.shift, "offset": self.offset,
                "domain": _domain_list(self.domain)}


def _hermite5(t, dx, y0, y1, m0, m1, c0, c1):
    """Quintic Hermite interpolant on one cell from value, slope, curvature."""
    t2, t3 = t * t, t * t * t
    t4, t5 = t3 * t, t3 * t2
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
    h3 = 0.5 * (t3 - 2 * t4 + t5)
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    return (h0 * y0 + h5 * y1 + dx * (h1 * m0 + h4 * m1)
            + dx * dx * (h2 * c0 + h3 * c1))


def _hermite5_jet(t, dx, y0, y1, m0, m1, c0, c1):
    """First and second ``s``-derivatives of :func:`_hermite5`."""
    t2, t3, t4 = t * t, t * t * t, t ** 4
    g0 = -30 * t2 + 60 * t3 - 30 * t4
    g1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    g2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4)
    g3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4)
    g4 = -12 * t2 + 28 * t3 - 15 * t4
    k0 = -60 * t + 180 * t2 - 120 * t3
    k1 = -36 * t + 96 * t2 - 60 * t3
    k2 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3)
    k3 = 0.5 * (6 * t - 24 * t2 + 20 * t3)
    k4 = -24 * t + 84 * t2 - 60 * t3
    first = (g0 * (y0 - y1) + dx * (g1 * m0 + g4 * m1) + dx * dx * (g2 * c0 + g3 * c1)) / dx
    second = (k0 * (y0 - y1) + dx * (k1 * m0 + k4 * m1)
              + dx * dx * (k2 * c0 + k3 * c1)) / (dx * dx)
    return first, second


class Grid(Profile):
    """Nodal profile with stored derivatives through third order.

    ``d0`` and ``d1`` are interpolated by quintic Hermite polynomials on
    ``(d0, d1, d2)`` and ``(d1, d2, d3)``; ``d2`` and ``d3`` are the
    derivatives of the ``d1`` interpolant.  The value interpolant is C².
    At nodes the stored data are returned exactly.
    """

    __slots__ = ("nodes", "values")

    def __init__(self, nodes, values):
        nodes = np.array(nodes, dtype=float)
        values = np.array(values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainTooSmall("a grid needs at least two nodes")
        if values.shape != (nodes.size, 4):
            raise ValueError(f"values must have shape ({nodes.size}, 4), got {values.shape}")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must strictly increase")
        if not np.all(np.isfinite(values)):
            raise NonFinite("grid values contain non-finite entries")
        nodes.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", (float(nodes[0]), float(nodes[-1])))

    def __setattr__(self, name, value):
        raise AttributeError("Grid profiles are immutable")

    def __repr__(self):
        return f"Grid(n={self.nodes.size}, domain={self.domain})"

    def __reduce__(self):
        return (Grid, (np.array(self.nodes), np.array(self.values)))

    __eq__ = object.__eq__
    __hash__ = object.__hash__

    def _eval(self, s):
        x, v = self.nodes, self.values
        i = int(np.searchsorted(x, s, side="right")) - 1
        i = min(max(i, 0), x.size - 2)
        if s == x[i]:
            return tuple(float(c) for c in v[i])
        if s == x[i + 1]:
            return tuple(float(c) for c in v[i + 1])
        dx = x[i + 1] - x[i]
        t = (s - x[i]) / dx
        a, b = v[i], v[i + 1]
        d0 = _hermite5(t, dx, a[0], b[0], a[1], b[1], a[2], b[2])
        args = (t, dx, a[1], b[1], a[2], b[2], a[3], b[3])
        d1 = _hermite5(*args)
        d2, d3 = _hermite5_jet(*args)
        return (float(d0), float(d1), float(d2), float(d3))

    def restrict(self, lo, hi):
        mask = (self.nodes >= lo) & (self.nodes <= hi)
        return Grid(self.nodes[mask], self.values[mask])

    def to_dict(self, ref: str | None = None):
        d = {"kind": "grid", "domain": list(self.domain), "nodes": int(self.nodes.size)}
        if ref is not None:
            d["file"] = ref
        else:
            d["data"] = np.column_stack([self.nodes, self.values]).tolist()
        return d


def grid_from_columns(nodes, d0, d1, d2, d3) -> Grid:
    return Grid(nodes, np.column_stack([d0, d1, d2, d3]))


def sample_to_grid(profile: Profile, nodes) -> Grid:
    """Tabulate a profile (typically closed-form) at the given nodes."""
    nodes = np.asarray(nodes, dtype=float)
    return Grid(nodes, [tuple(profile.eval(s)) for s in nodes])


def derivative_selfcheck(profile: Profile, samples: int = 100) -> float:
    """Max ``|d1 - centred FD of d0|`` over interior samples.

    The difference step is ``1e-4`` of the domain length; a large value
    signals inconsistent stored derivatives.
    """
    lo, hi = profile.domain
    length = hi - lo
    if not math.isfinite(length) or length <= 0:
        raise DomainTooSmall("self-check needs a finite domain")
    if samples < 3:
        raise DomainTooSmall("self-check needs at least 3 samples")
    step = 1e-4 * length
    worst = 0.0
    for s in np.linspace(lo + step, hi - step, samples):
        fd = (profile.eval(s + step).d0 - profile.eval(s - step).d0) / (2 * step)
        worst = max(worst, abs(profile.eval(s).d1 - fd))
    return worst


_CLOSED_FORMS = {
    "constant": (Constant, ("c",)),
    "linear": (Linear, ("c0", "c1")),
    "trig": (Trig, ("amplitude", "frequency", "phase", "offset")),
    "hyperbolic_trig": (HyperbolicTrig, ("c_plus", "c_minus", "rate", "offset")),
    "power_law": (PowerLaw, ("coefficient", "exponent", "shift", "offset")),
}


def profile_from_dict(d: dict, base_dir: str | Path | None = None) -> Profile:
    kind = d["kind"]
    if kind == "grid":
        if "file" in d:
            path = Path(d["file"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return read_grid(path)[0]
        data = np.asarray(d["data"], dtype=float)
        return Grid(data[:, 0], data[:, 1:])
    try:
        cls, names = _CLOSED_FORMS[kind]
    except KeyError:
        raise ValueError(f"unknown profile kind {kind!r}") from None
    lo, hi = d.get("domain", [None, None])
    domain = (-_INF if lo is None else lo, _INF if hi is None else hi)
    return cls(**{n: d[n] for n in names}, domain=domain)


GRID_HEADER = "s d0 d1 d2 d3"


def write_grid(grid: Grid, path: str | Path, sidecar: dict | None = None) -> None:
    """Write the columnar text format; ``sidecar`` becomes a leading ``#`` line."""
    lines = []
    if sidecar:
        lines.append("# " + " ".join(f"{k}={v:.17g}" for k, v in sidecar.items()))
    lines.append(GRID_HEADER)
    for s, row in zip(grid.nodes, grid.values):
        lines.append(" ".join(f"{v:.17g}" for v in (s, *row)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path: str | Path) -> tuple[Grid, dict]:
    """Parse the columnar format; returns the grid and any sidecar fields."""
    sidecar: dict[str, float] = {}
    rows = []
    header_seen = False
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, val = token.split("=", 1)
                    sidecar[key] = float(val)
            continue
        if not header_seen:
            if line.split() != GRID_HEADER.split():
                raise ValueError(f"bad grid header in {path}: {line!r}")
            header_seen = True
            continue
        rows.append([float(tok) for tok in line.split()])
    if not header_seen:
        raise ValueError(f"missing grid header in {path}")
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 5:
        raise ValueError(f"grid rows in {path} must have 5 columns")
    return Grid(data[:, 0], data[:, 1:]), sidecar
