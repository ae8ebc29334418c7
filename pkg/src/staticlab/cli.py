"""Command-line front end.

Exit codes: 0 when every requested check passes, 1 on a failed check, 2 on
I/O or parse errors.  Reports are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import cached_entry, list_entries, load_entry, write_entry, jsonable
from .classify import DEFAULT_CLUSTER_TOL, classify
from .errors import StaticLabError, UnknownEntry
from .models import Potential, line_cross_w3, single_warp
from .ode import (
    HFamilyParams,
    h3_fourth_derivative,
    integrate_h3,
    integrate_h4,
    warp_potential,
)
from .oracle import DEFAULT_FD_STEP
from .profiles import grid_from_columns
from .verify import (
    CLOSED_FORM_THRESHOLD,
    DEFAULT_SAMPLES,
    ORACLE_THRESHOLD,
    TYPE_REQUIREMENTS,
    Specialization,
    master_residual,
    oracle_master_residual,
    verify,
)

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


class InputError(Exception):
    """Bad input files or arguments; maps to exit code 2."""


# ---------------------------------------------------------------- helpers


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return parse


def _samples(text):
    n = _positive(int)(text)
    if n < 3:
        raise argparse.ArgumentTypeError("need at least 3 samples")
    return n


def _spec(text):
    try:
        return Specialization.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_range(text: str) -> list[float]:
    """``v`` or inclusive ``start:stop:step``; the step follows the direction."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3 or vals[2] == 0:
        raise argparse.ArgumentTypeError(f"range must be start:stop:step, step != 0: {text!r}")
    start, stop, step = vals
    step = math.copysign(abs(step), stop - start) if stop != start else abs(step)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def write_atomic(path: str | Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    if isinstance(cfg.get("spec"), Specialization):
        cfg["spec"] = cfg["spec"].label
    cfg["version"] = __version__
    return cfg


def _header(args) -> dict:
    head = {"config": _config(args)}
    if not args.no_timestamp:
        head["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return head


def _load(args):
    if bool(args.catalog) == bool(args.model):
        raise InputError("give exactly one of --catalog or --model")
    if args.catalog:
        return cached_entry(args.catalog, args.spec)
    try:
        entry = load_entry(args.model)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read model {args.model}: {exc}") from exc
    if args.spec is not None:
        x, y = args.spec.resolve(entry.expected_R)
        entry = type(entry)(entry.id, entry.model, entry.potential.with_constants(x, y),
                            entry.expected_type, entry.expected_R, entry.notes,
                            entry.incomplete, entry.params)
    return entry


# ---------------------------------------------------------------- commands


def cmd_catalog_list(args) -> int:
    rows = list_entries()
    if args.format == "json":
        text = _dump_json(rows)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "type", "R", "external"])
        for r in rows:
            w.writerow([r["id"], r["type"], "" if math.isnan(r["R"]) else f"{r['R']:g}",
                        int(r["external"])])
        text = buf.getvalue()
    write_atomic(args.out, text)
    return EXIT_OK


def cmd_catalog_build(args) -> int:
    entry = cached_entry(args.id, args.spec)
    path = write_entry(entry, args.out)
    print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    entry = _load(args)
    report, ok = verify(entry.model, entry.potential, spec=args.spec,
                        claimed_type=entry.expected_type, samples=args.samples,
                        threshold=args.threshold)
    out = {**_header(args), "model_id": entry.id,
           "spec": None if args.spec is None else args.spec.label,
           "expected_type": entry.expected_type, **report.to_json()}
    if args.oracle:
        rng = None if args.seed is None else np.random.default_rng(args.seed)
        om = oracle_master_residual(entry.model, entry.potential, args.samples,
                                    args.fd_step, rng=rng)
        out["oracle_master_max"] = om
        ok = ok and om < args.oracle_threshold
    out["pass"] = bool(ok)
    write_atomic(args.out, _dump_json(out))
    if not ok:
        flags = report.constraint_flags
        keys = ("matches_spec", "admissible", *TYPE_REQUIREMENTS.get(entry.expected_type, ()))
        failed = [k for k in keys if flags.get(k) is False]
        print(f"verify failed: master_max={report.master_max:.3g}"
              + (f"; false flags: {', '.join(failed)}" if failed else ""), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_classify(args) -> int:
    entry = _load(args)
    verdict = classify(entry.model, entry.potential, args.samples, args.source,
                       args.fd_step, args.cluster_tol)
    out = {**_header(args), "model_id": entry.id, **verdict.to_json()}
    write_atomic(args.out, _dump_json(out))
    ok = verdict.theorem1_type != "Unclassified"
    if args.expect is not None:
        ok = ok and verdict.theorem1_type == args.expect
    if not ok:
        print(f"classification {verdict.theorem1_type} ({verdict.signature})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def sweep_point(family: str, R: float, a: float, h0: float, h0p: float, span: float,
                spec: Specialization, samples: int) -> dict:
    """One sweep row; numerical failures become ``nan`` entries."""
    row = {"R": R, "a": a, "k": math.nan, "max_drift": math.nan, "master_max": math.nan,
           "termination": "error"}
    try:
        params = HFamilyParams(R=R, a=a, h0=h0, h0p=h0p, span=span)
        if family == "h4":
            traj = integrate_h4(params)
        else:
            traj = integrate_h3(params)
        row.update(k=traj.first_integral_k, max_drift=traj.max_drift,
                   termination=traj.termination)
        if family == "h4":
            x, y = spec.resolve(R)
            model = single_warp(traj, traj.first_integral_k, R)
            f = warp_potential(traj, params, x, y)
        else:
            x, y = spec.resolve(0.0)
            model = line_cross_w3(traj, traj.first_integral_k)
            v = traj.profile.values
            h4 = h3_fourth_derivative(a, v[:, 0], v[:, 1])
            f = grid_from_columns(traj.profile.nodes, v[:, 1] - x, v[:, 2], v[:, 3], h4)
        row["master_max"] = master_residual(model, Potential(f, x, y), samples).master_max
    except (StaticLabError, ValueError, ZeroDivisionError, FloatingPointError) as exc:
        row["error"] = str(exc)
    return row


def cmd_sweep(args) -> int:
    jobs = [(args.family, R, a, args.h0, args.h0p, args.span, args.spec, args.samples)
            for R in args.R for a in args.a]
    workers = args.jobs or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [sweep_point(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(sweep_point, *zip(*jobs)))
    if args.format == "json":
        text = _dump_json({**_header(args), "rows": rows})
    else:
        buf = io.StringIO()
        cols = ["R", "a", "k", "max_drift", "master_max", "termination"]
        w = csv.writer(buf, lineterminator="\n")
        if not args.no_timestamp:
            buf.write(f"# {_header(args)['timestamp']}\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], str) else repr(float(r[c])) for c in cols])
        text = buf.getvalue()
    write_atomic(args.out, text)
    bad = [r for r in rows if "error" in r]
    for r in bad:
        print(f"sweep point R={r['R']:g} a={r['a']:g} failed: {r.get('error')}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p, model_source=True, fmt=("json",)):
    if model_source:
        p.add_argument("--catalog", metavar="ID", help="catalog entry id")
        p.add_argument("--model", metavar="PATH", help="entry document written by 'catalog build'")
    p.add_argument("--spec", type=_spec, default=None,
                   help="static | miao-tam | v-static:<c> | critical-point | general:<x>,<y>")
    p.add_argument("--samples", type=_samples, default=DEFAULT_SAMPLES)
    p.add_argument("--fd-step", type=_positive(float), default=DEFAULT_FD_STEP)
    p.add_argument("--out", metavar="PATH", default=None, help="report path (default stdout)")
    p.add_argument("--format", choices=fmt, default=fmt[0])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-timestamp", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staticlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="list or build catalog entries")
    csub = cat.add_subparsers(dest="catalog_command", required=True)
    lst = csub.add_parser("list")
    lst.add_argument("--format", choices=("csv", "json"), default="csv")
    lst.add_argument("--out", default=None)
    lst.set_defaults(func=cmd_catalog_list)
    bld = csub.add_parser("build")
    bld.add_argument("id")
    bld.add_argument("--out", required=True, metavar="DIR")
    bld.add_argument("--spec", type=_spec, default=None)
    bld.set_defaults(func=cmd_catalog_build)

    ver = sub.add_parser("verify", help="master-equation residuals and constraints")
    _common(ver)
    ver.add_argument("--threshold", type=_positive(float), default=CLOSED_FORM_THRESHOLD)
    ver.add_argument("--oracle", action="store_true", help="also run the finite-difference path")
    ver.add_argument("--oracle-threshold", type=_positive(float), default=ORACLE_THRESHOLD)
    ver.set_defaults(func=cmd_verify)

    cls = sub.add_parser("classify", help="eigenvalue pattern and type verdict")
    _common(cls)
    cls.add_argument("--source", choices=("closed_form", "oracle"), default="closed_form")
    cls.add_argument("--cluster-tol", type=_positive(float), default=DEFAULT_CLUSTER_TOL)
    cls.add_argument("--expect", choices=("I", "II", "III", "IV", "V"), default=None)
    cls.set_defaults(func=cmd_classify)

    sw = sub.add_parser("sweep", help="batch of warp ODE runs")
    _common(sw, model_source=False, fmt=("csv", "json"))
    sw.add_argument("--family", choices=("h4", "h3"), default="h4")
    sw.add_argument("--R", type=parse_range, default=[12.0])
    sw.add_argument("--a", type=parse_range, default=[0.0])
    sw.add_argument("--h0", type=_positive(float), default=1.0)
    sw.add_argument("--h0p", type=float, default=0.0)
    sw.add_argument("--span", type=_positive(float), default=5.0)
    sw.add_argument("--jobs", type=_positive(int), default=None)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "sweep" and args.spec is None:
        args.spec = Specialization("static")
    try:
        return args.func(args)
    except (InputError, UnknownEntry, OSError) as exc:
        print(f"staticlab: {exc}", file=sys.stderr)
        return EXIT_IO
    except StaticLabError as exc:
        print(f"staticlab: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
