"""Command-line entry point.

Exit codes: 0 success, 2 malformed input, 3 well-formed input with no answer
(flux imbalance, ambiguous depth, point off the domain). ``--json`` replaces
the text output with one JSON summary that validates against
``schema/summary.schema.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import __version__
from .errors import DomainError, FluxImbalance, InputError, ThurstonError
from .metric import (
    DEFAULT_DEPTH,
    DEFAULT_GAP,
    DEFAULT_LAMINATION_GAP,
    ratio_profile,
    stretch_lamination,
    thurston_distance,
)
from .torus import (
    length_of_slope,
    markov_complete,
    parse_measured,
    parse_point,
    parse_slope,
    trace_of_slope,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    depth: int = DEFAULT_DEPTH
    tol: float | None = None  # membership tolerance; None means adaptive
    gap: float = DEFAULT_GAP
    lamination_gap: float = DEFAULT_LAMINATION_GAP
    width_tol: float = 2.0
    threads: int | None = None
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise InputError(f"depth must be >= 1, got {self.depth}")
        for name in ("gap", "lamination_gap", "width_tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.tol is not None and not self.tol > 0:
            raise InputError("tol must be positive")
        if self.threads is not None and self.threads < 1:
            raise InputError("threads must be >= 1")

    @classmethod
    def from_args(cls, ns):
        threads = getattr(ns, "threads", None)
        if threads is None and os.environ.get("THURSTON_THREADS"):
            from .envelope import thread_count

            threads = thread_count()
        return cls(
            depth=getattr(ns, "depth", DEFAULT_DEPTH),
            tol=getattr(ns, "tol", None),
            gap=getattr(ns, "gap", DEFAULT_GAP),
            lamination_gap=getattr(ns, "lamination_gap", DEFAULT_LAMINATION_GAP),
            width_tol=getattr(ns, "width_tol", 2.0),
            threads=threads,
            out=getattr(ns, "out", None),
            seed=getattr(ns, "seed", 0),
        )


# --- helpers -----------------------------------------------------------------


def _floats(text, n, what):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse {what} {text!r}") from None
    if len(vals) != n:
        raise InputError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _slopes(seq):
    return [str(s) for s in seq]


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --- metric / torus ----------------------------------------------------------


def cmd_dist(ns, cfg):
    X, Y = parse_point(ns.src), parse_point(ns.dst)
    est = thurston_distance(X, Y, cfg.depth, ns.conv_tol, cfg.gap)
    result = {
        "value": est.value,
        "depth": est.depth,
        "converged": est.converged,
        "previous": est.previous,
        "argmax_cluster": _slopes(est.argmax_cluster),
    }
    text = f"distance {est.value!r} (depth {est.depth}, converged={est.converged})"
    return result, text


def cmd_profile(ns, cfg):
    X, Y = parse_point(ns.src), parse_point(ns.dst)
    prof = ratio_profile(X, Y, cfg.depth)
    rows = list(prof.csv_rows())
    if ns.json and cfg.out in (None, "-"):
        raise InputError("profile --json needs --out for the CSV")
    _write_csv(cfg.out, ("p", "q", "length_src", "length_dst", "ratio"), rows)
    return {"rows": len(rows), "depth": cfg.depth, "out": cfg.out}, None


def cmd_lamination(ns, cfg):
    X, Y = parse_point(ns.src), parse_point(ns.dst)
    est = stretch_lamination(X, Y, cfg.depth, cfg.lamination_gap)
    result = {
        "kind": est.kind,
        "slope": str(est.slope) if est.slope is not None else None,
        "convergents": _slopes(est.convergents),
        "gap": est.gap,
        "depth": cfg.depth,
    }
    label = f"rational {est.slope}" if est.is_rational else "irrational"
    text = f"{label}; convergents {' '.join(result['convergents'])}; gap {est.gap!r}"
    return result, text


def cmd_torus_length(ns, cfg):
    P, s = parse_point(ns.point), parse_slope(ns.slope)
    result = {"slope": str(s), "trace": trace_of_slope(P, s), "length": length_of_slope(P, s)}
    return result, f"length {result['length']!r} (trace {result['trace']!r})"


def cmd_torus_complete(ns, cfg):
    x, y = _floats(ns.xy, 2, "--xy")
    z = markov_complete(x, y, ns.root)
    return {"point": [x, y, z], "root": ns.root}, f"{x!r},{y!r},{z!r}"


# --- envelope ----------------------------------------------------------------


def _sample(ns, cfg):
    from .envelope import Chart, sample_envelope

    X, Y = parse_point(ns.x), parse_point(ns.y)
    x0, x1, y0, y1 = _floats(ns.rect, 4, "--rect")
    chart = Chart(x0, x1, y0, y1, ns.res, ns.res, ns.root)
    return chart, sample_envelope(X, Y, chart, cfg.tol, cfg.depth, cfg.threads)


def _sample_summary(s):
    return {
        "members": s.n_members,
        "tol": s.tol,
        "depth": s.depth,
        "d_xy": s.d_xy,
        "slack": s.slack,
        "grid": [s.chart.nx, s.chart.ny],
    }


def cmd_env_sample(ns, cfg):
    from .envelope import GRID_COLUMNS, grid_rows

    _, s = _sample(ns, cfg)
    if cfg.out not in (None, "-"):
        _write_csv(cfg.out, GRID_COLUMNS, grid_rows(s))
    elif not ns.json:
        _write_csv(None, GRID_COLUMNS, grid_rows(s))
        return _sample_summary(s), None
    return _sample_summary(s), f"{s.n_members} member cells, tol {s.tol!r}"


def cmd_env_classify(ns, cfg):
    from .envelope import GRID_COLUMNS, classify_boundary, grid_rows

    _, s = _sample(ns, cfg)
    c = classify_boundary(s, cfg.depth, cfg.gap)
    if cfg.out not in (None, "-"):
        _write_csv(cfg.out, GRID_COLUMNS, grid_rows(s, c))
    counts = dict(sorted(c.counts().items()))
    result = dict(_sample_summary(s), labels=counts)
    return result, " ".join(f"{k}={v}" for k, v in counts.items())


def cmd_env_report(ns, cfg):
    from .envelope import classify_boundary, shape_report

    _, s = _sample(ns, cfg)
    c = classify_boundary(s, cfg.depth, cfg.gap)
    r = shape_report(s, c, cfg.width_tol)
    corners = [
        {"name": name, "x": xy[0], "y": xy[1], "cells": len(cells)}
        for name, xy, cells in r.corners
    ]
    result = dict(
        _sample_summary(s),
        shape=r.shape,
        corners=corners,
        dimension=r.dimension,
        width_cells=r.width_cells,
        chart_diameter=r.chart_diameter,
        thurston_radius=r.thurston_radius,
        diagnostics=list(r.diagnostics),
    )
    text = f"{r.shape}: dimension {r.dimension:.3f}, width {r.width_cells:g} cells, " + (
        ", ".join(f"{c['name']}@({c['x']:.4f},{c['y']:.4f})" for c in corners)
    )
    return result, text


def cmd_env_continuity(ns, cfg):
    from .envelope import Chart, continuity_probe

    X, Y = parse_point(ns.x), parse_point(ns.y)
    x0, x1, y0, y1 = _floats(ns.rect, 4, "--rect")
    chart = Chart(x0, x1, y0, y1, ns.res, ns.res, ns.root)
    deltas = [float(t) for t in ns.deltas.split(",")]
    res = continuity_probe(X, Y, chart, deltas, ns.moved, cfg.depth, cfg.tol)
    probes = [asdict(r) for r in res]
    text = "\n".join(
        f"delta={r.delta!r} hausdorff={r.hausdorff!r} {r.note}".rstrip() for r in res
    )
    return {"moved": ns.moved, "probes": probes}, text


# --- train tracks ------------------------------------------------------------


def _decorated(path):
    from .traintrack import load_json, track_from_json

    return track_from_json(load_json(path))


def _weights(path):
    from .traintrack import WeightSystem, load_json

    obj = load_json(path)
    if not isinstance(obj, dict):
        raise InputError("weights must be a JSON object of branch -> 'p/q'")
    return WeightSystem(obj)


def cmd_track_check(ns, cfg):
    from .traintrack import DecoratedTrack, check_switch_conditions

    t = _decorated(ns.track)
    track = t.track if isinstance(t, DecoratedTrack) else t
    result = {
        "branches": len(track.branches),
        "switches": len(track.switches),
        "decorated": isinstance(t, DecoratedTrack),
    }
    text = f"valid track: {len(track.branches)} branches, {len(track.switches)} switches"
    if ns.weights:
        ok = check_switch_conditions(track, _weights(ns.weights))
        result["switch_conditions"] = ok
        text += f"; switch conditions {'hold' if ok else 'FAIL'}"
    return result, text


def _need_decorated(t):
    from .traintrack import DecoratedTrack

    if not isinstance(t, DecoratedTrack):
        raise InputError("this command needs a track with 'marks'")
    return t


def cmd_track_flux(ns, cfg):
    from .traintrack import component_flux, decompose_components, far_from_json, load_json

    d = _need_decorated(_decorated(ns.track))
    f = far_from_json(load_json(ns.far))
    f.validate(d)
    comps = []
    for c in decompose_components(d):
        row = {"index": c.index, "branches": list(c.branches), "orientable": c.orientable}
        if c.orientable:
            fin, fout = component_flux(d, c, f)
            row.update(in_sum=str(fin), out_sum=str(fout), balanced=fin == fout)
        comps.append(row)
    lines = []
    for c in comps:
        if c["orientable"]:
            lines.append(f"component {c['index']}: in={c['in_sum']} out={c['out_sum']}")
        else:
            lines.append(f"component {c['index']}: non-orientable")
    return {"components": comps}, "\n".join(lines)


def cmd_track_straighten(ns, cfg):
    from .traintrack import far_from_json, load_json, straighten_lift

    d = _need_decorated(_decorated(ns.track))
    f = far_from_json(load_json(ns.far))
    w = straighten_lift(d, f)
    if cfg.out not in (None, "-"):
        _write_json(cfg.out, w.to_json())
    elif not ns.json:
        _write_json(None, w.to_json())
        return {"weights": w.to_json()}, None
    return {"weights": w.to_json()}, f"wrote {cfg.out}"


def cmd_track_cut(ns, cfg):
    from .traintrack import cut

    d = _need_decorated(_decorated(ns.track))
    far = cut(d, _weights(ns.weights))
    if cfg.out not in (None, "-"):
        _write_json(cfg.out, far.to_json())
    elif not ns.json:
        _write_json(None, far.to_json())
        return far.to_json(), None
    return far.to_json(), f"wrote {cfg.out}"


# --- boundary ----------------------------------------------------------------


def cmd_boundary_L(ns, cfg):
    from .boundary import lipschitz_estimate

    P, eta = parse_point(ns.point), parse_measured(ns.eta)
    est = lipschitz_estimate(P, eta, cfg.depth)
    result = {
        "value": est.value,
        "depth": est.depth,
        "stabilized": est.stabilized,
        "realizing": _slopes(est.cluster),
    }
    return result, f"L = {est.value!r} (depth {est.depth}, stabilized={est.stabilized})"


def cmd_boundary_criterion(ns, cfg):
    from .boundary import accumulation_criterion

    P = parse_point(ns.point)
    ev = accumulation_criterion(P, parse_measured(ns.eta), parse_measured(ns.mu), cfg.depth, cfg.gap)
    result = {
        "holds": ev.holds,
        "contained": ev.contained,
        "blocking": _slopes(ev.blocking),
        "max_ratio": None if ev.max_ratio == float("inf") else ev.max_ratio,
        "attained_on_cluster": ev.attained_on_cluster,
        "cluster_eta": _slopes(ev.cluster_eta),
        "cluster_mu": _slopes(ev.cluster_mu),
    }
    return result, f"criterion {'holds' if ev.holds else 'fails'}"


# --- selftest ----------------------------------------------------------------


def cmd_selftest(ns, cfg):
    from .selftest import run_all

    results = run_all(seed=cfg.seed, quick=not ns.full)
    ok = all(r["passed"] for r in results)
    text = "\n".join(
        f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {r['detail']}" for r in results
    )
    return {"suites": results, "passed": ok}, text


# --- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON summary")
    common.add_argument("--out", help="output file (CSV or JSON)")

    depth = argparse.ArgumentParser(add_help=False)
    depth.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    depth.add_argument("--gap", type=float, default=DEFAULT_GAP)

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--from", dest="src", required=True, metavar="X,Y,Z")
    pair.add_argument("--to", dest="dst", required=True, metavar="X,Y,Z")

    chart = argparse.ArgumentParser(add_help=False)
    chart.add_argument("--x", required=True, metavar="X,Y,Z", help="initial point")
    chart.add_argument("--y", required=True, metavar="X,Y,Z", help="terminal point")
    chart.add_argument("--rect", required=True, metavar="X0,X1,Y0,Y1")
    chart.add_argument("--res", type=int, default=200)
    chart.add_argument("--root", choices=("larger", "smaller"), default="smaller")
    chart.add_argument("--tol", type=float, default=None)
    chart.add_argument("--threads", type=int, default=None)
    chart.add_argument("--width-tol", dest="width_tol", type=float, default=2.0)

    p = _Parser(prog="thurston", description="Thurston-metric envelopes and train tracks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dist", parents=[common, depth, pair], help="Thurston distance")
    s.add_argument("--conv-tol", dest="conv_tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_dist)
    s = sub.add_parser("profile", parents=[common, depth, pair], help="length-ratio CSV")
    s.set_defaults(func=cmd_profile)
    s = sub.add_parser("lamination", parents=[common, depth, pair], help="stretch lamination")
    s.add_argument("--lamination-gap", dest="lamination_gap", type=float,
                   default=DEFAULT_LAMINATION_GAP)
    s.set_defaults(func=cmd_lamination)

    env = sub.add_parser("envelope", help="envelope sampling").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    for name, fn in (("sample", cmd_env_sample), ("classify", cmd_env_classify),
                     ("report", cmd_env_report)):
        e = env.add_parser(name, parents=[common, depth, chart])
        e.set_defaults(func=fn)
    e = env.add_parser("continuity", parents=[common, depth, chart])
    e.add_argument("--deltas", default="0.1,0.05,0.025")
    e.add_argument("--moved", choices=("X", "Y", "both"), default="X")
    e.set_defaults(func=cmd_env_continuity)

    tr = sub.add_parser("track", help="train tracks").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    t = tr.add_parser("check", parents=[common])
    t.add_argument("--track", required=True)
    t.add_argument("--weights")
    t.set_defaults(func=cmd_track_check)
    t = tr.add_parser("flux", parents=[common])
    t.add_argument("--track", required=True)
    t.add_argument("--far", required=True)
    t.set_defaults(func=cmd_track_flux)
    t = tr.add_parser("straighten", parents=[common])
    t.add_argument("--track", required=True)
    t.add_argument("--far", required=True)
    t.set_defaults(func=cmd_track_straighten)
    t = tr.add_parser("cut", parents=[common])
    t.add_argument("--track", required=True)
    t.add_argument("--weights", required=True)
    t.set_defaults(func=cmd_track_cut)

    to = sub.add_parser("torus", help="trace coordinates").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    t = to.add_parser("length", parents=[common])
    t.add_argument("--point", required=True, metavar="X,Y,Z")
    t.add_argument("--slope", required=True, metavar="P/Q")
    t.set_defaults(func=cmd_torus_length)
    t = to.add_parser("complete", parents=[common])
    t.add_argument("--xy", required=True, metavar="X,Y")
    t.add_argument("--root", choices=("larger", "smaller"), default="larger")
    t.set_defaults(func=cmd_torus_complete)

    bd = sub.add_parser("boundary", help="boundary functionals").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    b = bd.add_parser("L", parents=[common, depth])
    b.add_argument("--point", required=True, metavar="X,Y,Z")
    b.add_argument("--eta", required=True, metavar="P/Q:W")
    b.set_defaults(func=cmd_boundary_L)
    b = bd.add_parser("criterion", parents=[common, depth])
    b.add_argument("--point", required=True, metavar="X,Y,Z")
    b.add_argument("--eta", required=True, metavar="P/Q:W")
    b.add_argument("--mu", required=True, metavar="P/Q:W")
    b.set_defaults(func=cmd_boundary_criterion)

    s = sub.add_parser("selftest", parents=[common], help="run the property suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--full", action="store_true", help="full-size suites")
    s.set_defaults(func=cmd_selftest)
    return p


def _command_name(ns):
    action = getattr(ns, "action", None)
    return f"{ns.command} {action}" if action else ns.command


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    name = _command_name(ns)
    try:
        cfg = RunConfig.from_args(ns)
        result, text = ns.func(ns, cfg)
    except FluxImbalance as exc:
        return _fail(ns, name, EXIT_DOMAIN, exc, exc.payload())
    except InputError as exc:
        return _fail(ns, name, EXIT_INPUT, exc)
    except DomainError as exc:
        extra = {"depth": exc.depth} if getattr(exc, "depth", None) is not None else {}
        return _fail(ns, name, EXIT_DOMAIN, exc, extra)
    except ThurstonError as exc:
        return _fail(ns, name, EXIT_DOMAIN, exc)
    code = EXIT_OK
    if name == "selftest" and not result["passed"]:
        code = EXIT_FAIL
    if ns.json:
        summary = {"command": name, "status": "ok", "result": result}
        sys.stdout.write(json.dumps(summary, sort_keys=True, default=_jsonable) + "\n")
    elif text:
        print(text)
    return code


def _fail(ns, name, code, exc, payload=None):
    err = {"type": type(exc).__name__, "message": str(exc)}
    if payload:
        err["payload"] = payload
    if getattr(ns, "json", False):
        summary = {"command": name, "status": "error", "error": err}
        sys.stdout.write(json.dumps(summary, sort_keys=True, default=_jsonable) + "\n")
    else:
        if payload:
            sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
        sys.stderr.write(f"thurston {name}: {type(exc).__name__}: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
