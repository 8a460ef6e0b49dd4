"""Command-line front end, surface documents, CSV export and SVG rendering."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .boundary_shapes import classify_path, level_locus, ray_circle_sequence
from .deform import Cocycle, CocycleError, deform
from .exact_num import Vec2, rat, rat_str
from .iet_push import AccidentReport, wms_family
from .surface_core import (
    SurfaceError,
    TranslationSurface,
    area,
    build_from_polygons,
    parallelogram_torus,
    stratum_signature,
)
from .wms_family import RegimeError, WmsParams, m_abc, m_wms, v0

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """A malformed input file; the message carries the position when known."""


# -- surface documents ---------------------------------------------------------------

def _side_refs(M: TranslationSurface) -> list[str]:
    ids = M.edge_ids()
    refs = []
    for h in range(M.n_half_edges):
        refs.append(ids[h >> 1] + ("'" if h & 1 else ""))
    if len(set(refs)) != len(refs):
        raise SurfaceError("edge ids clash with their primed twins")
    return refs


def surface_to_json(M: TranslationSurface) -> dict:
    refs = _side_refs(M)
    edges = []
    for i, eid in enumerate(M.edge_ids()):
        entry = {"id": eid, "period": [rat_str(M.vec[2 * i].x), rat_str(M.vec[2 * i].y)]}
        if M.labels[i] is None:
            entry["label"] = None
        edges.append(entry)
    vertex_sides = {}
    for h in range(M.n_half_edges):
        vertex_sides.setdefault(M.origin[h], refs[h])
    return {
        "faces": [[refs[h] for h in cyc] for cyc in M.faces()],
        "edges": edges,
        "gluings": [[refs[2 * i], refs[2 * i + 1]] for i in range(M.n_edges)],
        "singularity_order": list(M.singularity_order),
        "vertex_sides": vertex_sides,
    }


def surface_from_json(data: dict) -> TranslationSurface:
    try:
        periods = {}
        labels = {}
        for e in data["edges"]:
            v = Vec2(rat(e["period"][0]), rat(e["period"][1]))
            periods[e["id"]] = v
            periods[e["id"] + "'"] = -v
            if "label" in e and e["label"] is None:
                labels[e["id"]] = None
        gluings = [tuple(g) for g in data["gluings"]]
        for s, t in gluings:
            if s not in periods or t not in periods:
                raise SurfaceError(f"pairing mismatch: unknown side in gluing {s}-{t}")
            if periods[s] != -periods[t]:
                raise SurfaceError(f"pairing mismatch: sides {s} and {t} have non-opposite periods")
        names = list(data.get("singularity_order", []))
        sides_of = data.get("vertex_sides", {})
        order_sides = [sides_of[n] for n in names if n in sides_of]
        order_names = [n for n in names if n in sides_of]
        M = build_from_polygons(data["faces"], periods, gluings, order_sides, order_names, labels)
    except (KeyError, TypeError, IndexError, ZeroDivisionError) as exc:
        raise DocumentError(f"malformed surface: {exc!r}") from exc
    return M


@dataclass
class SurfaceDocument:
    surface: TranslationSurface
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "surface": surface_to_json(self.surface),
            "metadata": {str(k): str(v) for k, v in self.metadata.items()},
        }

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "SurfaceDocument":
        if not isinstance(data, dict) or "surface" not in data:
            raise DocumentError("document must be an object with a 'surface' field")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise DocumentError(f"unsupported schema_version {version}")
        return cls(surface_from_json(data["surface"]), dict(data.get("metadata", {})), version)

    @classmethod
    def loads(cls, text: str, source: str = "<string>") -> "SurfaceDocument":
        return cls.from_json(load_json(text, source))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_json(text: str, source: str = "<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def read_document(path: str) -> SurfaceDocument:
    return SurfaceDocument.loads(Path(path).read_text(), path)


# -- numbers in output -----------------------------------------------------------------

def fmt(x, approx: bool = False) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return repr(float(x)) if approx else rat_str(x)


def _approx_json(obj):
    """Turn every "p/q" string into a float."""
    if isinstance(obj, dict):
        return {k: _approx_json(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_approx_json(v) for v in obj]
    if isinstance(obj, str):
        try:
            return float(Fraction(obj))
        except (ValueError, ZeroDivisionError):
            return obj
    return obj


# -- CSV exports -------------------------------------------------------------------------

SCAN_COLUMNS = ["A", "is_accident", "kind", "consistent", "closed_form", "edge_case"]


def scan_csv(reports: Sequence[AccidentReport], approx: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in reports:
        cf = "" if r.closed_form is None else str(r.closed_form).lower()
        w.writerow([fmt(r.parameter, approx), str(r.is_accident).lower(), r.kind, str(r.consistent).lower(), cf, str(r.edge_case).lower()])
    return buf.getvalue()


def points_csv(points, approx: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["A", "C"])
    for a, c in points:
        w.writerow([fmt(a, approx), fmt(c, approx)])
    return buf.getvalue()


# -- SVG ---------------------------------------------------------------------------------

PALETTE = ["#d62728", "#ff7f0e", "#1f77b4", "#9467bd", "#2ca02c", "#8c564b", "#e377c2", "#17becf"]
NAMED = {"red": "#d62728", "orange": "#ff7f0e", "blue": "#1f77b4", "violet": "#9467bd"}


@dataclass
class RenderSpec:
    anchors: dict  # face index -> position of its first vertex
    colors: dict  # singularity name -> colour
    scale: Fraction = Fraction(60)


def layout(M: TranslationSurface) -> dict[int, Vec2]:
    """Breadth-first placement across gluings, rooted at face 0 at the origin."""
    faces = M.faces()
    where = {}
    for f, cyc in enumerate(faces):
        for k, h in enumerate(cyc):
            where[h] = (f, k)
    pts = {0: M.face_points(faces[0])}
    anchors = {0: pts[0][0]}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for k, h in enumerate(faces[f]):
            g, j = where[h ^ 1]
            if g in anchors:
                continue
            # the twin starts where this side ends
            start = pts[f][k] + M.vec[h]
            for t in range(j):
                start = start - M.vec[faces[g][t]]
            anchors[g] = start
            pts[g] = M.face_points(faces[g], start)
            queue.append(g)
    # shift a disconnected remainder (never expected) to stay deterministic
    for f in range(len(faces)):
        anchors.setdefault(f, Vec2(Fraction(0), Fraction(0)))
    return anchors


def default_render_spec(M: TranslationSurface, scale=60) -> RenderSpec:
    colors = {}
    for i, name in enumerate(M.singularity_order):
        colors[name] = NAMED.get(name, PALETTE[i % len(PALETTE)])
    return RenderSpec(layout(M), colors, rat(scale))


def render_svg(M: TranslationSurface, spec: RenderSpec | None = None) -> str:
    spec = spec or default_render_spec(M)
    faces = M.faces()
    refs = _side_refs(M)
    polys = [M.face_points(cyc, spec.anchors[f]) for f, cyc in enumerate(faces)]
    xs = [float(p.x) for poly in polys for p in poly]
    ys = [float(p.y) for poly in polys for p in poly]
    s = float(spec.scale)
    pad = 20.0
    x0, y1 = min(xs), max(ys)
    width = (max(xs) - x0) * s + 2 * pad
    height = (y1 - min(ys)) * s + 2 * pad

    def X(p):
        return f"{(float(p.x) - x0) * s + pad:.3f}"

    def Y(p):
        return f"{(y1 - float(p.y)) * s + pad:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
    ]
    for f, (cyc, poly) in enumerate(zip(faces, polys)):
        path = " ".join(f"{X(p)},{Y(p)}" for p in poly)
        out.append(f'<polygon class="face" data-face="{f}" points="{path}" fill="#f4f4f4" stroke="none"/>')
        for k, h in enumerate(cyc):
            a, b = poly[k], poly[(k + 1) % len(poly)]
            out.append(
                f'<line class="side" data-side="{escape(refs[h])}" x1="{X(a)}" y1="{Y(a)}" x2="{X(b)}" y2="{Y(b)}" '
                'stroke="#333" stroke-width="1"/>'
            )
            mid = a + (b - a) * Fraction(1, 2)
            out.append(f'<text x="{X(mid)}" y="{Y(mid)}" font-size="9" text-anchor="middle">{escape(refs[h])}</text>')
        for k, h in enumerate(cyc):
            name = M.origin[h]
            out.append(
                f'<circle class="vertex" data-singularity="{escape(name)}" cx="{X(poly[k])}" cy="{Y(poly[k])}" r="4" '
                f'fill="{spec.colors.get(name, "#000")}"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def loci_svg(locus, window=(Fraction(0), Fraction(1), Fraction(0), Fraction(1, 2)), scale=400) -> str:
    a0, a1, c0, c1 = (float(w) for w in window)
    s = float(scale)
    pad = 20.0
    width, height = (a1 - a0) * s + 2 * pad, (c1 - c0) * s + 2 * pad

    def X(a):
        return f"{(a - a0) * s + pad:.3f}"

    def Y(c):
        return f"{(c1 - c) * s + pad:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">',
        f'<line class="axis" x1="{X(a0)}" y1="{Y(0)}" x2="{X(a1)}" y2="{Y(0)}" stroke="#999"/>',
        f'<circle class="base" cx="{X(0.5)}" cy="{Y(0)}" r="3" fill="#000"/>',
    ]
    steps = 200
    pts = []
    if locus.kind == "vertical":
        pts = [[(0.5, 0.0), (0.5, c1)]]
    elif locus.kind == "half_lines":
        slope = math.sqrt(float(locus.slope2))
        for side in (1, -1):
            pts.append([(0.5, 0.0), (0.5 + side * c1 / slope if slope else side * a1, c1 if slope else 0.0)])
    else:
        a, b = (float(x) for x in locus.center)
        r = float(locus.radius)
        stop = math.pi if locus.kind == "half_circle" else 2 * math.pi
        pts = [[(a + r * math.cos(stop * i / steps), b + r * math.sin(stop * i / steps)) for i in range(steps + 1)]]
    for line in pts:
        d = " ".join(f"{X(p)},{Y(q)}" for p, q in line)
        out.append(f'<polyline class="locus" points="{d}" fill="none" stroke="#d62728" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- command implementations ---------------------------------------------------------------

def _threads() -> int:
    try:
        return max(1, int(os.environ.get("STRATA_PUSH_THREADS", "1")))
    except ValueError:
        return 1


def _scan_one(args):
    A, B, C, source = args
    fam = wms_family(B, source)
    return fam.test(A, C)


def run_scan(lo, hi, qmax: int, C, B=0, source: str = "closed_form", workers: int = 1) -> list[AccidentReport]:
    from .iet_push import rationals_in

    jobs = [(A, rat(B), rat(C), source) for A in rationals_in(lo, hi, qmax)]
    if workers <= 1 or len(jobs) < 2:
        return [_scan_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_one, jobs))


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, args) -> None:
    _write(dumps(_approx_json(obj) if args.approx else obj), args.out)


def cmd_validate(args) -> int:
    doc = read_document(args.path)
    M = doc.surface
    sig = stratum_signature(M)
    _emit_json(
        {
            "valid": True,
            "genus": sig.genus,
            "kappa": [[name, order] for name, order in sig.kappa],
            "area": rat_str(area(M)),
            "faces": len(M.faces()),
            "edges": M.n_edges,
        },
        args,
    )
    return 0


def cmd_build(args) -> int:
    if args.family == "wms":
        if args.A is None:
            M, meta = m_wms(), {"family": "wms"}
        else:
            p = WmsParams.of(args.A, args.B or "0", args.C or "0")
            M, meta = m_abc(p), {"family": "wms", "A": rat_str(p.A), "B": rat_str(p.B), "C": rat_str(p.C)}
    else:
        M, meta = parallelogram_torus(), {"family": "torus"}
    _write(SurfaceDocument(M, meta).dumps(), args.out)
    if args.cocycle_out:
        if args.family != "wms":
            raise ValueError("the default cocycle is only defined for the wms family")
        Path(args.cocycle_out).write_text(dumps(v0(M).to_json(M)))
    return 0


def cmd_deform(args) -> int:
    doc = read_document(args.surface)
    M = doc.surface
    cocycle = Cocycle.from_json(M, load_json(Path(args.cocycle).read_text(), args.cocycle))
    outcome = deform(M, cocycle, rat(args.t), max_flips=args.max_flips)
    t = outcome.final_time
    report = {
        "kind": outcome.kind,
        "final_time": rat_str(t.r) if t.is_rational else float(t),
        "collapsed": list(outcome.collapsed),
        "witness_cylinder": list(outcome.witness_cylinder),
        "flips": len(outcome.flip_log),
        "flip_log": outcome.flip_log_json(),
    }
    if outcome.surface is not None:
        report["surface"] = SurfaceDocument(outcome.surface, doc.metadata).to_json()
    _emit_json(report, args)
    return 0


def cmd_scan(args) -> int:
    if args.family != "wms":
        raise ValueError(f"unknown family {args.family}")
    lo, hi = _parse_range(args.range)
    reports = run_scan(lo, hi, args.qmax, args.C, args.B or "0", args.source, _threads())
    if args.json:
        _emit_json([r.to_json() for r in reports], args)
    else:
        _write(scan_csv(reports, args.approx), args.out)
    return 0


def cmd_loci(args) -> int:
    locus = level_locus(args.quantity, args.value)
    if args.format == "svg":
        _write(loci_svg(locus), args.out)
    else:
        _write(points_csv(locus.sample(args.samples), args.approx), args.out)
    return 0


def cmd_classify_path(args) -> int:
    if args.ray is not None:
        path = level_locus("h", _ray_height(rat(args.ray))).approach(args.n)
    elif args.circle is not None:
        path = level_locus("t_tilde", args.circle).approach(args.n)
    elif args.sequence is not None:
        path = ray_circle_sequence(args.sequence, args.n)
    else:
        path = _read_samples(args.samples)
    result = classify_path(path)
    out = {"kind": result.kind, "samples": len(path)}
    if result.shape is not None:
        out["shape"] = result.shape.to_json()
    if result.witness is not None:
        out["witness"] = list(result.witness)
    _emit_json(out, args)
    return 0


def cmd_render(args) -> int:
    doc = read_document(args.surface)
    _write(render_svg(doc.surface, default_render_spec(doc.surface, args.scale)), args.out)
    return 0


def _ray_height(s: Fraction) -> Fraction:
    """The h level whose half-lines have slope ``s``; returns h with h^2 = s^2 / (4(1+s^2))."""
    from .exact_num import rational_sqrt

    h = rational_sqrt(s * s / (4 * (1 + s * s)))
    if h is None:
        raise ValueError("ray slope must make 1 + s^2 a rational square")
    return h


def _parse_range(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError("range must look like lo:hi")
    return rat(parts[0]), rat(parts[1])


def _read_samples(path: str) -> list[tuple[Fraction, Fraction]]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#") or row[0].strip() == "A":
                continue
            try:
                rows.append((rat(row[0]), rat(row[1])))
            except (ValueError, IndexError, ZeroDivisionError) as exc:
                raise DocumentError(f"{path}:{lineno}: bad sample row {row!r}") from exc
    return rows


# -- argument parsing ----------------------------------------------------------------------

def _rational(text: str) -> str:
    try:
        Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strata-push", description="Exact translation surface pushes and accident scans.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--approx", action="store_true", help="print floats instead of exact rationals")

    sp = sub.add_parser("validate", help="check a surface document")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("build", help="write a surface document for a named family")
    sp.add_argument("--family", choices=["wms", "torus"], default="wms")
    sp.add_argument("--A", type=_rational)
    sp.add_argument("--B", type=_rational)
    sp.add_argument("--C", type=_rational)
    sp.add_argument("--cocycle-out", help="also write the default cocycle here")
    common(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("deform", help="deform a surface along a cocycle")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--cocycle", required=True)
    sp.add_argument("--t", type=_rational, default="1")
    sp.add_argument("--max-flips", type=int, default=10**6)
    common(sp)
    sp.set_defaults(func=cmd_deform)

    sp = sub.add_parser("scan", help="scan a family for accidents")
    sp.add_argument("--family", default="wms")
    sp.add_argument("--range", required=True, help="lo:hi")
    sp.add_argument("--qmax", type=int, required=True)
    sp.add_argument("--C", type=_rational, required=True)
    sp.add_argument("--B", type=_rational)
    sp.add_argument("--source", choices=["closed_form", "push"], default="closed_form")
    sp.add_argument("--json", action="store_true", help="JSON with witnesses instead of CSV")
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("loci", help="level sets in the (A, C) plane")
    sp.add_argument("--quantity", choices=["h", "m", "t_tilde"], required=True)
    sp.add_argument("--value", type=_rational, required=True)
    sp.add_argument("--format", choices=["csv", "svg"], default="csv")
    sp.add_argument("--samples", type=int, default=8)
    common(sp)
    sp.set_defaults(func=cmd_loci)

    sp = sub.add_parser("classify-path", help="classify an approach to (1/2, 0)")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--ray", type=_rational, help="slope of a ray through (1/2, 0)")
    g.add_argument("--circle", type=_rational, help="twist level of a half-circle")
    g.add_argument("--sequence", type=_rational, help="slope whose ray meets the integer-twist half-circles")
    g.add_argument("--samples", help="CSV file of A,C rows")
    sp.add_argument("--n", type=int, default=12)
    common(sp)
    sp.set_defaults(func=cmd_classify_path)

    sp = sub.add_parser("render", help="draw a surface document as SVG")
    sp.add_argument("surface")
    sp.add_argument("--scale", type=_rational, default="60")
    common(sp)
    sp.set_defaults(func=cmd_render)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DocumentError, SurfaceError, CocycleError, RegimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
