"""Interval exchanges from the vertical flow, limit surfaces and the accident scan."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Sequence

from .deform import Cocycle
from .exact_num import Vec2, ZERO, rat, rat_str
from .periodic import (
    Barrier,
    BarrierSet,
    Cylinder,
    FaceGeometry,
    NotPeriodic,
    VERTICAL,
    WaistCutSurface,
    cylinder_decomposition,
    direction_slots,
    gamma_nonempty,
    strip_cylinders,
    trace,
    trace_slot,
    waist_cut,
    xi_set,
)
from .surface_core import (
    SurfaceError,
    TranslationSurface,
    build_from_polygons,
    point_in_polygon,
)

HORIZONTAL_DIR = Vec2(Fraction(1), Fraction(0))
DOWN = Vec2(Fraction(0), Fraction(-1))

NONE = "none"
SADDLE_COLLAPSE = "saddle_collapse"
CYLINDER_ACCUMULATION = "cylinder_accumulation"
ISOLATED = "isolated"
ACCUMULATION = "accumulation"

# k = 1 members of the two accident families; reported, not cross-checked
EDGE_PARAMETERS = (Fraction(1, 3), Fraction(1))


class Undetermined(RuntimeError):
    pass


# -- cyclic relabelling and the safe bound -----------------------------------------

def cyclic_relabel(values: Sequence) -> int:
    """Start index whose rotation has only non-negative partial sums.

    The start is where the running sum of the original order is smallest,
    which is the same as where its negative peaks; ties go to the smallest index.
    """
    vals = [rat(v) for v in values]
    if sum(vals, Fraction(0)) != 0:
        raise ValueError("values must sum to zero")
    best, best_i, run = Fraction(0), 0, Fraction(0)
    for i, v in enumerate(vals):
        if run < best:
            best, best_i = run, i
        run += v
    return best_i


@dataclass(frozen=True)
class CylinderCocycleData:
    height: Fraction
    chain_values: tuple[Fraction, ...]
    side_value: Fraction


def cylinder_cocycle_data(M: TranslationSurface, v: Cocycle, cyl: Cylinder) -> CylinderCocycleData:
    """Height, cocycle values along the bottom chain and on the side of a cylinder."""
    if cyl.bottom_edges is None or cyl.side_edge is None:
        raise SurfaceError("cylinder boundary must run along edges")
    h = cyl.height()
    if h is None:
        raise ValueError("cylinder height is irrational")
    return CylinderCocycleData(h, tuple(v.value(e) for e in cyl.bottom_edges), v.value(cyl.side_edge))


def compute_eta(M: TranslationSurface, v: Cocycle, cylinders: Sequence[Cylinder], sign: int | None = None):
    """Largest ``|C|`` keeping every relabelled cylinder side non-degenerate.

    Returns a Fraction, or ``None`` when no side carries a cocycle value.
    """
    signs = (1, -1) if sign is None else (sign,)
    eta = None
    for cyl in cylinders:
        data = cylinder_cocycle_data(M, v, cyl)
        if sum(data.chain_values, Fraction(0)) != 0:
            raise ValueError("not in finiteness subspace")
        for sg in signs:
            vals = [x * sg for x in data.chain_values]
            s = cyclic_relabel(vals)
            side = data.side_value - sum(data.chain_values[:s], Fraction(0))
            if side == 0:
                continue
            bound = data.height / abs(side)
            eta = bound if eta is None else min(eta, bound)
    return eta


# -- the first-visit exchange -------------------------------------------------------

@dataclass
class SubInterval:
    interval: int
    start: Fraction
    length: Fraction
    target: int
    shift: Fraction  # image starts at start + shift in the target interval


@dataclass
class IntervalExchange:
    intervals: list[Fraction]
    bottom: list[list[SubInterval]]
    degenerate: bool = False
    sign: int = 1

    @property
    def sub_lengths_bottom(self) -> list[list[Fraction]]:
        return [[s.length for s in row] for row in self.bottom]

    def top_pieces(self) -> list[list[SubInterval]]:
        out: list[list[SubInterval]] = [[] for _ in self.intervals]
        for row in self.bottom:
            for s in row:
                out[s.target].append(s)
        for row in out:
            row.sort(key=lambda s: s.start + s.shift)
        return out

    @property
    def sub_lengths_top(self) -> list[list[Fraction]]:
        return [[s.length for s in row] for row in self.top_pieces()]

    @property
    def permutation(self) -> dict[tuple[int, int], tuple[int, int]]:
        tops = self.top_pieces()
        out = {}
        for i, row in enumerate(self.bottom):
            for k, s in enumerate(row):
                out[(i, k)] = (s.target, next(n for n, t in enumerate(tops[s.target]) if t is s))
        return out

    @property
    def translations(self) -> list[list[Fraction]]:
        return [[s.shift for s in row] for row in self.bottom]

    def is_identity(self) -> bool:
        return all(s.target == i and s.shift == 0 for i, row in enumerate(self.bottom) for s in row)

    def to_json(self) -> dict:
        return {
            "intervals": [rat_str(x) for x in self.intervals],
            "sub_lengths_bottom": [[rat_str(x) for x in row] for row in self.sub_lengths_bottom],
            "sub_lengths_top": [[rat_str(x) for x in row] for row in self.sub_lengths_top],
            "permutation": [[list(k), list(v)] for k, v in sorted(self.permutation.items())],
            "translations": [[rat_str(x) for x in row] for row in self.translations],
            "degenerate": self.degenerate,
        }


def _locate(G: FaceGeometry, face: int, X: Vec2, d: Vec2):
    """Start data for a trace in direction ``d`` from a point in or on a face."""
    pts, cyc = G.points[face], G.cycles[face]
    where = point_in_polygon(X, pts)
    if where > 0:
        return face, X, None
    for k, h in enumerate(cyc):
        e = G.M.vec[h]
        rel = X - pts[k]
        if rel.cross(e) == 0 and 0 <= rel.dot(e) <= e.norm2():
            w = rel.dot(e) / e.norm2()
            if w in (0, 1):
                raise SurfaceError("point sits on a vertex")
            if e.cross(d) > 0:
                return face, X, k
            g = h ^ 1
            f2, k2 = G.where[g]
            return f2, G.points[f2][k2] + G.M.vec[g] * (1 - w), k2
    raise SurfaceError("point is not in the face")


def _place_in_cylinder(G: FaceGeometry, cyl: Cylinder, X: Vec2) -> Vec2:
    pts = G.points[cyl.face]
    for shift in (ZERO, cyl.core, -cyl.core):
        if point_in_polygon(X + shift, pts) >= 0:
            return X + shift
    raise SurfaceError("reference point lies outside its cylinder")


def _segment_barriers(G, face, X, length, tag) -> list[Barrier]:
    f, P, entered = _locate(G, face, X, HORIZONTAL_DIR)
    res = trace(G, f, P, HORIZONTAL_DIR, entered=entered, max_length=length)
    if res.kind != "length":
        raise SurfaceError(f"transversal hit {res.kind} before its full length")
    out, off = [], Fraction(0)
    for fc, A, B in res.segments:
        L = B.x - A.x
        out.append(Barrier(fc, A, B, tag, off, L))
        off += L
    return out


def _point_at(barriers: list[Barrier], x: Fraction) -> tuple[int, Vec2]:
    for b in barriers:
        if b.offset <= x <= b.offset + b.scale:
            return b.face, b.start + HORIZONTAL_DIR * (x - b.offset)
    raise ValueError("position beyond the transversal")


def first_visit_iet(W: WaistCutSurface, height_fraction=Fraction(1, 3), max_crossings: int = 10_000) -> IntervalExchange:
    """Downward first-return map from the lower transversals to the upper ones."""
    G = W.geometry or FaceGeometry(W.base)
    M = W.base
    k = rat(height_fraction)
    if not 0 < k < Fraction(1, 2):
        raise ValueError("transversals must sit strictly between boundary and waist")
    lower, upper, lengths = [], [], []
    for i, cyl in enumerate(W.cylinders):
        if cyl.face is None or cyl.core.x <= 0:
            raise SurfaceError("cylinders must be faces with a rightward core")
        cyc = G.cycles[cyl.face]
        j = cyc.index(cyl.side ^ 1)
        bottom_left = G.points[cyl.face][(j + 1) % len(cyc)]
        rise = Vec2(Fraction(0), cyl.span.y * k)
        lo = _place_in_cylinder(G, cyl, bottom_left + rise)
        hi = _place_in_cylinder(G, cyl, bottom_left + cyl.span - rise)
        lengths.append(cyl.core.x)
        lower.append(_segment_barriers(G, cyl.face, lo, cyl.core.x, ("minus", i)))
        upper.append(_segment_barriers(G, cyl.face, hi, cyl.core.x, ("plus", i)))
    both = BarrierSet()
    for row in lower + upper:
        both.extend(row)
    tops = BarrierSet()
    for row in upper:
        tops.extend(row)

    cuts: list[set[Fraction]] = [{Fraction(0), L} for L in lengths]
    degenerate = False
    slots = direction_slots(M, VERTICAL)
    for name in M.singularity_order:
        for sl in slots.get(name, ()):
            if sl.sign != 1:
                continue
            res = trace_slot(G, sl, VERTICAL, barriers=both, max_crossings=max_crossings)
            if res.kind == "vertex":
                degenerate = True
            elif res.kind == "bound":
                raise Undetermined("vertical separatrix did not reach a transversal")
            elif res.barrier.tag[0] == "minus":
                cuts[res.barrier.tag[1]].add(res.barrier_param)
    for j, row in enumerate(upper):
        for x in (Fraction(0), lengths[j]):
            f, P = _point_at(row, x)
            f, P, entered = _locate(G, f, P, VERTICAL)
            res = trace(G, f, P, VERTICAL, entered=entered, barriers=both, max_crossings=max_crossings)
            if res.kind == "barrier" and res.barrier.tag[0] == "minus":
                cuts[res.barrier.tag[1]].add(res.barrier_param)
            elif res.kind == "bound":
                raise Undetermined("vertical trajectory did not reach a transversal")

    bottom: list[list[SubInterval]] = []
    for i, row in enumerate(lower):
        pts = sorted(cuts[i])
        pieces: list[SubInterval] = []
        for a, b in zip(pts, pts[1:]):
            m = (a + b) / 2
            f, P = _point_at(row, m)
            f, P, entered = _locate(G, f, P, DOWN)
            res = trace(G, f, P, DOWN, entered=entered, barriers=tops, max_crossings=max_crossings)
            if res.kind != "barrier":
                raise Undetermined(f"downward trajectory ended with {res.kind}")
            target, shift = res.barrier.tag[1], res.barrier_param - m
            if pieces and pieces[-1].target == target and pieces[-1].shift == shift:
                pieces[-1].length += b - a
            else:
                pieces.append(SubInterval(i, a, b - a, target, shift))
        bottom.append(pieces)
    return IntervalExchange(lengths, bottom, degenerate)


def build_limit_surface(iet: IntervalExchange, side_vectors: Sequence) -> TranslationSurface:
    """One cylinder per interval, bottoms and tops cut by the exchange and glued by it."""
    if iet.degenerate or any(s.length == 0 for row in iet.bottom for s in row):
        raise SurfaceError("limit leaves stratum")
    sides = [Vec2(rat(v[0]), rat(v[1])) for v in side_vectors]
    if len(sides) != len(iet.intervals):
        raise ValueError("one side vector per interval expected")
    periods, gluings, faces = {}, [], []
    name = {}
    for i, row in enumerate(iet.bottom):
        for k, s in enumerate(row):
            nm = f"i{i}p{k}"
            name[id(s)] = nm
            periods[nm] = Vec2(s.length, Fraction(0))
            periods[nm + "'"] = Vec2(-s.length, Fraction(0))
            gluings.append((nm, nm + "'"))
    tops = iet.top_pieces()
    for i, row in enumerate(iet.bottom):
        side = f"side{i}"
        periods[side] = sides[i]
        periods[side + "'"] = -sides[i]
        gluings.append((side, side + "'"))
        top = [name[id(s)] + "'" for s in reversed(tops[i])]
        faces.append([name[id(s)] for s in row] + [side] + top + [side + "'"])
    return build_from_polygons(faces, periods, gluings)


# -- accidents -----------------------------------------------------------------------

Evaluator = Callable[[Fraction, Fraction], TranslationSurface]


@dataclass
class AccidentReport:
    parameter: Fraction
    is_accident: bool
    kind: str
    witnesses: list = field(default_factory=list)
    gamma_witness: list = field(default_factory=list)
    consistent: bool = True
    closed_form: bool | None = None
    edge_case: bool = False
    undetermined: bool = False

    @property
    def agrees(self) -> bool | None:
        if self.closed_form is None or self.edge_case:
            return None
        return self.closed_form == self.is_accident

    def to_json(self) -> dict:
        return {
            "A": rat_str(self.parameter),
            "is_accident": self.is_accident,
            "kind": self.kind,
            "consistent": self.consistent,
            "closed_form": self.closed_form,
            "edge_case": self.edge_case,
            "undetermined": self.undetermined,
            "xi": [
                {"from": c.start, "to": c.end, "holonomy": [rat_str(c.total_holonomy.x), rat_str(c.total_holonomy.y)]}
                for c in self.witnesses
            ],
            "gamma": [[c.start.vertex, rat_str(c.length)] for c in self.gamma_witness],
        }


def _probe(N: TranslationSurface, direction: Vec2 | None = None, count: int | None = None):
    """Xi and Gamma of ``N``, plus whether the cylinders had to be guessed."""
    cyls = strip_cylinders(N)
    unsure, cover = False, True
    if not cyls and direction is not None:
        # A pushed surface comes back triangulated, so decompose it instead.
        # Thin cylinders opened by the push have area of order C and carry no
        # waist; the originals are the ``count`` largest.
        cyls = cylinder_decomposition(N, direction)
        if isinstance(cyls, NotPeriodic):
            raise SurfaceError(f"cylinder direction is not periodic: {cyls.reason}")
        if count is not None and len(cyls) > count:
            cyls = sorted(cyls, key=lambda c: c.area, reverse=True)
            unsure = cyls[count - 1].area == cyls[count].area
            cyls, cover = cyls[:count], False
    W = waist_cut(N, cyls, cover)
    xi = xi_set(W)
    return xi, gamma_nonempty(W, xi=xi), unsure


def accident_test(
    evaluator: Evaluator,
    A,
    C_probe,
    closed_form: Callable | None = None,
    direction: Callable[[Fraction, Fraction], Vec2] | None = None,
    cylinder_count: int | None = None,
) -> AccidentReport:
    A, C = rat(A), rat(C_probe)
    if C <= 0:
        raise ValueError("C_probe must be positive")
    found = []
    undetermined = False
    for c in (C, -C):
        xi, gamma, unsure = _probe(evaluator(A, c), None if direction is None else direction(A, c), cylinder_count)
        undetermined |= xi.undetermined > 0 or unsure
        found.append((xi, gamma))
    (xi_p, g_p), (xi_m, g_m) = found
    is_acc = xi_p.nonempty
    gamma = g_p if g_p.nonempty else g_m
    kind = NONE
    if is_acc or xi_m.nonempty:
        kind = CYLINDER_ACCUMULATION if gamma.nonempty else SADDLE_COLLAPSE
    return AccidentReport(
        A,
        is_acc,
        kind,
        list(xi_p.chains),
        list(gamma.witness),
        consistent=xi_p.nonempty == xi_m.nonempty,
        closed_form=None if closed_form is None else bool(closed_form(A)),
        edge_case=A in EDGE_PARAMETERS,
        undetermined=undetermined,
    )


def rationals_in(lo, hi, max_denominator: int) -> list[Fraction]:
    lo, hi = rat(lo), rat(hi)
    out = set()
    for q in range(1, max_denominator + 1):
        for p in range(int(lo * q) - 1, int(hi * q) + 2):
            if gcd(p, q) == 1 and lo <= Fraction(p, q) <= hi:
                out.add(Fraction(p, q))
    return sorted(out)


@dataclass
class Family:
    evaluator: Evaluator
    closed_form: Callable | None = None
    direction: Callable[[Fraction, Fraction], Vec2] | None = None  # cylinder cores when faces are not strips
    cylinder_count: int | None = None

    def test(self, A, C_probe) -> AccidentReport:
        return accident_test(self.evaluator, A, C_probe, self.closed_form, self.direction, self.cylinder_count)


def wms_family(B=0, source: str = "closed_form") -> Family:
    """The WMS family at fixed ``B``, evaluated by the closed form or by pushing."""
    from .deform import push
    from .wms_family import WmsParams, closed_form_accident, m_abc, n_abc_closed_form, v0

    B = rat(B)

    def closed(A, C):
        return n_abc_closed_form(WmsParams.of(A, B, C))

    def pushed(A, C):
        M = m_abc(WmsParams.of(A, B, C))
        out = push(M, v0(M))
        if out.surface is None:
            raise SurfaceError(f"push stopped: {out.kind}")
        return out.surface

    def core_direction(A, C):
        # v0 vanishes on the boundary circles, so the push keeps the cores of M_{A,B,C}
        return Vec2(A, C)

    evaluator = closed if source == "closed_form" else pushed
    return Family(evaluator, closed_form_accident, core_direction, 2)


def accident_scan(family: Family, A_range, max_denominator: int, C_probe) -> list[AccidentReport]:
    lo, hi = (rat(x) for x in A_range)
    if lo > hi:
        return []
    return [family.test(A, C_probe) for A in rationals_in(lo, hi, max_denominator)]


def harmonic_order_type(points: Sequence, center) -> bool:
    """Whether ``points`` look like a truncation of ``{0} U {+-1/n}`` around ``center``.

    Both sides must hold the same number of points, and consecutive gaps
    must shrink strictly toward the centre on each side.
    """
    c = rat(center)
    pts = sorted(set(rat(p) for p in points))
    if c not in pts:
        return False
    left = [c - p for p in pts if p < c]
    right = [p - c for p in pts if p > c]
    if len(left) != len(right) or not left:
        return False

    def shrinking(dists):
        dists = sorted(dists, reverse=True)
        gaps = [a - b for a, b in zip(dists, dists[1:])]
        return all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))

    return shrinking(left) and shrinking(right)


@dataclass
class Classification:
    kind: str
    report: AccidentReport
    nearby: list[Fraction] = field(default_factory=list)
    order_type_ok: bool | None = None


def classify_accident(A0, family: Family | None = None, C_probe=Fraction(1, 100), radius=Fraction(1, 10), max_denominator: int = 13) -> Classification:
    family = family or wms_family()
    rep = family.test(A0, C_probe)
    if not rep.is_accident:
        raise ValueError(f"{rat_str(rep.parameter)} is not an accident")
    if rep.kind != CYLINDER_ACCUMULATION:
        return Classification(ISOLATED, rep)
    A0 = rep.parameter
    scan = accident_scan(family, (A0 - radius, A0 + radius), max_denominator, C_probe)
    nearby = [r.parameter for r in scan if r.is_accident]
    return Classification(ACCUMULATION, rep, nearby, harmonic_order_type(nearby, A0))
