"""Straight-line flow, cylinders, waist cuts and the vertical obstruction sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact_num import Vec2, ZERO, frac_mod, rat, rational_sqrt
from .surface_core import (
    SaddleConnection,
    SurfaceError,
    TranslationSurface,
    angle_before,
    polygon_area2,
    stratum_signature,
    strictly_between,
)

DEFAULT_MAX_CROSSINGS = 10_000
VERTICAL = Vec2(Fraction(0), Fraction(1))


class Undetermined(RuntimeError):
    """A trace exceeded its crossing bound."""


# -- geometry of faces ----------------------------------------------------------

class FaceGeometry:
    """Face cycles with vertex positions in face-local coordinates."""

    def __init__(self, M: TranslationSurface):
        self.M = M
        self.cycles = M.faces()
        self.points = [M.face_points(c) for c in self.cycles]
        self.where: dict[int, tuple[int, int]] = {}
        for f, cyc in enumerate(self.cycles):
            for k, h in enumerate(cyc):
                self.where[h] = (f, k)

    def corner(self, h: int) -> tuple[int, Vec2]:
        f, k = self.where[h]
        return f, self.points[f][k]

    def edge_point(self, h: int, w: Fraction) -> tuple[int, Vec2]:
        """Point at fraction ``w`` along half-edge ``h``, in the coordinates of its face."""
        f, k = self.where[h]
        return f, self.points[f][k] + self.M.vec[h] * w


@dataclass(frozen=True)
class Barrier:
    face: int
    start: Vec2
    end: Vec2
    tag: object
    offset: Fraction = Fraction(0)  # position of ``start`` along the tagged curve
    scale: Fraction = Fraction(1)  # curve parameter per unit of the segment


class BarrierSet:
    def __init__(self, barriers: Iterable[Barrier] = (), edges: dict | None = None):
        self.by_face: dict[int, list[Barrier]] = {}
        for b in barriers:
            self.by_face.setdefault(b.face, []).append(b)
        self.edges = dict(edges or {})

    def add(self, b: Barrier) -> None:
        self.by_face.setdefault(b.face, []).append(b)

    def extend(self, bs: Iterable[Barrier]) -> None:
        for b in bs:
            self.add(b)


@dataclass
class TraceResult:
    kind: str  # "vertex", "barrier", "length", "bound"
    length: Fraction  # in units of the direction vector
    segments: list[tuple[int, Vec2, Vec2]]
    vertex: str | None = None
    arrival: tuple[int, bool] | None = None  # (corner half-edge, arrived along that edge)
    barrier: Barrier | None = None
    barrier_param: Fraction | None = None
    end: tuple[int, Vec2] | None = None

    @property
    def holonomy_factor(self) -> Fraction:
        return self.length


def _ray_hits(points, cyc, M, X, d, skip: set[int]):
    """Smallest positive crossing of the ray X + s d with the face boundary."""
    best = None
    n = len(cyc)
    for k in range(n):
        if k in skip:
            continue
        P = points[k]
        e = M.vec[cyc[k]]
        den = d.cross(e)
        if den == 0:
            continue
        rel = P - X
        s = rel.cross(e) / den
        if s <= 0:
            continue
        w = rel.cross(d) / den
        if w < 0 or w > 1:
            continue
        if best is None or s < best[0]:
            best = (s, k, w)
    return best


def _barrier_hit(barriers: list[Barrier], X: Vec2, d: Vec2, s_max: Fraction):
    best = None
    for b in barriers:
        e = b.end - b.start
        den = d.cross(e)
        if den == 0:
            continue
        rel = b.start - X
        s = rel.cross(e) / den
        if s <= 0 or s > s_max:
            continue
        w = rel.cross(d) / den
        if w < 0 or w > 1:
            continue
        if best is None or s < best[0]:
            best = (s, b, w)
    return best


def trace(
    G: FaceGeometry,
    face: int,
    point: Vec2,
    d: Vec2,
    *,
    entered: int | None = None,
    from_corner: int | None = None,
    barriers: BarrierSet | None = None,
    max_length: Fraction | None = None,
    max_crossings: int = DEFAULT_MAX_CROSSINGS,
) -> TraceResult:
    """Follow the straight line from ``point`` in direction ``d``.

    ``entered`` is the index (within the face cycle) of the edge the point lies on;
    ``from_corner`` the index of the corner the point sits at.
    """
    M = G.M
    total = Fraction(0)
    segments = []
    barriers = barriers or BarrierSet()
    X = point
    skip: set[int] = set()
    if entered is not None:
        skip = {entered}
    if from_corner is not None:
        n = len(G.cycles[face])
        skip = {from_corner, (from_corner - 1) % n}
    for _ in range(max_crossings):
        cyc, pts = G.cycles[face], G.points[face]
        hit = _ray_hits(pts, cyc, M, X, d, skip)
        if hit is None:
            raise SurfaceError("ray left a face without crossing its boundary")
        s, k, w = hit
        limit = s
        if max_length is not None and total + s > max_length:
            limit = max_length - total
        bh = _barrier_hit(barriers.by_face.get(face, ()), X, d, limit)
        if bh is not None:
            sb, b, wb = bh
            end = X + d * sb
            segments.append((face, X, end))
            return TraceResult("barrier", total + sb, segments, barrier=b, barrier_param=b.offset + wb * b.scale, end=(face, end))
        if max_length is not None and total + s > max_length:
            end = X + d * limit
            segments.append((face, X, end))
            return TraceResult("length", max_length, segments, end=(face, end))
        end = X + d * s
        segments.append((face, X, end))
        total += s
        h = cyc[k]
        if w == 0 or w == 1:
            corner = k if w == 0 else (k + 1) % len(cyc)
            ch = cyc[corner]
            return TraceResult("vertex", total, segments, vertex=M.origin[ch], arrival=(ch, False), end=(face, end))
        if h in barriers.edges or (h ^ 1) in barriers.edges:
            if h in barriers.edges:
                tag, param = barriers.edges[h], w
            else:
                tag, param = barriers.edges[h ^ 1], 1 - w
            return TraceResult("barrier", total, segments, barrier=tag, barrier_param=param, end=(face, end))
        g = h ^ 1
        face, kk = G.where[g]
        X = G.points[face][kk] + M.vec[g] * (1 - w)
        skip = {kk}
    return TraceResult("bound", total, segments, end=(face, X))


# -- direction slots ------------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    vertex: str
    sign: int  # +1 leaves along d, -1 along -d
    corner: int  # outgoing half-edge whose corner contains the slot
    aligned: bool  # the slot runs along ``corner`` itself
    index: int  # position in counter-clockwise order at the vertex


def _parallel_sign(v: Vec2, d: Vec2) -> int:
    if v.cross(d) != 0:
        return 0
    return 1 if v.dot(d) > 0 else -1


def direction_slots(M: TranslationSurface, d: Vec2) -> dict[str, list[Slot]]:
    """Outgoing ``+d`` and ``-d`` directions at each vertex, counter-clockwise."""
    prev = M.prev
    out: dict[str, list[Slot]] = {}
    for cls in M.vertex_classes():
        name = M.origin[cls[0]]
        raw = []
        for h in cls:
            u = M.vec[h]
            w = -M.vec[prev[h]]
            ps = _parallel_sign(u, d)
            if ps:
                raw.append((ps, h, True))
            inside = [sg for sg in (1, -1) if strictly_between(u, d * sg, w)]
            if len(inside) == 2:
                # order by angle measured from u
                first = 1 if _angle_from(u, d, -d) else -1
                inside = [first, -first]
            for sg in inside:
                raw.append((sg, h, False))
        out[name] = [Slot(name, sg, h, al, i) for i, (sg, h, al) in enumerate(raw)]
    return out


def _angle_from(u: Vec2, x: Vec2, y: Vec2) -> bool:
    """True if ``x`` comes before ``y`` turning counter-clockwise from ``u``."""
    def key(v):
        # rotate into the frame of u: angle of v relative to u
        rel = Vec2(u.dot(v), u.cross(v))
        return rel
    rx, ry = key(x), key(y)
    return angle_before(rx, ry) if not (rx == ry) else False


def trace_slot(G: FaceGeometry, slot: Slot, d: Vec2, **kw) -> TraceResult:
    M = G.M
    dd = d * slot.sign
    if slot.aligned:
        h = slot.corner
        s = M.vec[h].x / dd.x if dd.x != 0 else M.vec[h].y / dd.y
        f, P = G.corner(h)
        barriers = kw.get("barriers")
        if barriers is not None:
            bh = _barrier_hit(barriers.by_face.get(f, ()), P, dd, s)
            if bh is None:
                f2, P2 = G.corner(h ^ 1)
                bh2 = _barrier_hit(barriers.by_face.get(f2, ()), P2 + M.vec[h ^ 1], -dd, s)
                if bh2 is not None:
                    sb, b, wb = bh2
                    bh = (s - sb, b, wb)
            if bh is not None:
                sb, b, wb = bh
                return TraceResult("barrier", sb, [(f, P, P + dd * sb)], barrier=b, barrier_param=b.offset + wb * b.scale)
        max_length = kw.get("max_length")
        if max_length is not None and s > max_length:
            return TraceResult("length", max_length, [(f, P, P + dd * max_length)], end=(f, P + dd * max_length))
        return TraceResult("vertex", s, [(f, P, P + M.vec[h])], vertex=M.target(h), arrival=(h ^ 1, True), end=(f, P + M.vec[h]))
    f, k = G.where[slot.corner]
    return trace(G, f, G.points[f][k], dd, from_corner=k, **kw)


def arrival_slot(slots: dict[str, list[Slot]], res: TraceResult, sign: int) -> Slot:
    """The slot pointing back along a trace that ended at a vertex (``sign`` of the trace)."""
    ch, along = res.arrival
    for sl in slots[res.vertex]:
        if sl.corner == ch and sl.aligned == along and sl.sign == -sign:
            return sl
    raise SurfaceError("arrival slot not found")


# -- saddle connections in a direction -------------------------------------------------

@dataclass
class DirectedConnection:
    ident: int
    start: Slot
    end: Slot  # back-pointing slot at the far vertex
    length: Fraction  # in units of the direction
    segments: list

    def holonomy(self, d: Vec2) -> Vec2:
        return d * self.length


def connections_in_direction(G: FaceGeometry, d: Vec2, barriers: BarrierSet | None = None, max_crossings: int = DEFAULT_MAX_CROSSINGS):
    """Trace every ``+d`` separatrix. Returns (slots, connections, other results)."""
    slots = direction_slots(G.M, d)
    conns: dict[Slot, DirectedConnection] = {}
    other: dict[Slot, TraceResult] = {}
    for name in G.M.singularity_order:
        for sl in slots.get(name, ()):
            if sl.sign != 1:
                continue
            res = trace_slot(G, sl, d, barriers=barriers, max_crossings=max_crossings)
            if res.kind == "vertex":
                end = arrival_slot(slots, res, 1)
                conns[sl] = DirectedConnection(len(conns), sl, end, res.length, res.segments)
            else:
                other[sl] = res
    return slots, conns, other


def _neighbour(slots, sl: Slot, step: int) -> Slot:
    ring = slots[sl.vertex]
    return ring[(sl.index + step) % len(ring)]


def successor(slots, conns, c: DirectedConnection, side: str):
    """Next connection turning by pi on the ``"left"`` or ``"right"`` of ``c``."""
    nb = _neighbour(slots, c.end, -1 if side == "left" else 1)
    if nb.sign != 1:
        raise SurfaceError("slots do not alternate")
    return conns.get(nb)


def successor_cycles(slots, conns, side: str) -> list[list[DirectedConnection]]:
    seen = set()
    cycles = []
    for c in conns.values():
        if c.ident in seen:
            continue
        path = []
        cur = c
        index = {}
        while cur is not None and cur.ident not in index and cur.ident not in seen:
            index[cur.ident] = len(path)
            path.append(cur)
            cur = successor(slots, conns, cur, side)
        if cur is not None and cur.ident in index:
            cycles.append(path[index[cur.ident]:])
        seen.update(x.ident for x in path)
    return cycles


# -- cylinders ---------------------------------------------------------------------------

@dataclass
class Cylinder:
    direction: Vec2
    core: Vec2
    span: Vec2
    bottom: tuple[Vec2, ...] = ()
    top: tuple[Vec2, ...] = ()
    face: int | None = None
    side: int | None = None
    waist_start: tuple | None = None  # (face, point, entered edge index or None)
    polygon_area: Fraction | None = None  # set when the face is not a parallelogram
    bottom_edges: tuple[int, ...] | None = None  # when the bottom chain runs along edges
    side_edge: int | None = None  # an edge crossing from the bottom start to the top

    @property
    def area(self) -> Fraction:
        if self.polygon_area is not None:
            return self.polygon_area
        return self.core.cross(self.span)

    @property
    def circumference2(self) -> Fraction:
        return self.core.norm2()

    @property
    def height2(self) -> Fraction:
        a = self.core.cross(self.span)
        return a * a / self.core.norm2()

    @property
    def modulus(self) -> Fraction:
        return self.core.cross(self.span) / self.core.norm2()

    @property
    def twist(self) -> Fraction:
        """Shift between the boundary circles as a fraction of the circumference, in [0, 1)."""
        return frac_mod(self.core.dot(self.span) / self.core.norm2(), Fraction(1))

    def circumference(self) -> Fraction | None:
        return rational_sqrt(self.circumference2)

    def height(self) -> Fraction | None:
        return rational_sqrt(self.height2)


@dataclass
class NotPeriodic:
    reason: str


_PROBES = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 5), Fraction(3, 7), Fraction(5, 11))


def _barriers_from_connections(conns: dict, d: Vec2, M: TranslationSurface) -> BarrierSet:
    bs = BarrierSet()
    for c in conns.values():
        if c.start.aligned:
            bs.edges[c.start.corner] = ("sc", c.ident)
            continue
        offset = Fraction(0)
        for f, P, Q in c.segments:
            seg_len = _param_along(P, Q, d)
            bs.add(Barrier(f, P, Q, ("sc", c.ident), offset, seg_len))
            offset += seg_len
    return bs


def _param_along(P: Vec2, Q: Vec2, d: Vec2) -> Fraction:
    v = Q - P
    return v.x / d.x if d.x != 0 else v.y / d.y


def _point_on_trace(res: TraceResult, d: Vec2, s: Fraction) -> tuple[int, Vec2]:
    acc = Fraction(0)
    for f, P, Q in res.segments:
        L = _param_along(P, Q, d)
        if acc + L >= s:
            return f, P + d * (s - acc)
        acc += L
    raise ValueError("parameter beyond trace")


def cylinder_decomposition(M: TranslationSurface, direction: Vec2, max_crossings: int = DEFAULT_MAX_CROSSINGS):
    """Cylinders of a completely periodic direction, or :class:`NotPeriodic`."""
    d = Vec2(rat(direction[0]), rat(direction[1]))
    if d.is_zero():
        raise ValueError("direction must be non-zero")
    G = FaceGeometry(M)
    slots, conns, other = connections_in_direction(G, d, max_crossings=max_crossings)
    if other:
        kinds = sorted({r.kind for r in other.values()})
        return NotPeriodic(f"separatrices did not close: {kinds}")
    bottoms = successor_cycles(slots, conns, "left")
    tops = successor_cycles(slots, conns, "right")
    top_of = {}
    for i, cyc in enumerate(tops):
        for c in cyc:
            top_of[c.ident] = i
    barriers = _barriers_from_connections(conns, d, M)
    normal = Vec2(-d.y, d.x)
    cylinders = []
    for cyc in bottoms:
        sigma = cyc[0]
        for frac in _PROBES:
            if sigma.start.aligned:
                h = sigma.start.corner
                f, k = G.where[h]
                mid = G.points[f][k] + M.vec[h] * frac
                start_kw = {"entered": k}
                m_off = sigma.length * frac
            else:
                f, P, Q = sigma.segments[0]
                mid = P + (Q - P) * frac
                start_kw = {}
                m_off = _param_along(P, Q, d) * frac
            res = trace(G, f, mid, normal, barriers=barriers, max_crossings=max_crossings, **start_kw)
            if res.kind == "barrier":
                break
        else:
            return NotPeriodic("height trace did not reach a boundary")
        tag = res.barrier if not isinstance(res.barrier, Barrier) else res.barrier.tag
        tau_id = tag[1]
        o = res.barrier_param
        if not isinstance(res.barrier, Barrier):
            o = res.barrier_param * next(c.length for c in conns.values() if c.ident == tau_id)
        s = res.length
        span = d * m_off + normal * s - d * o
        core = d * sum((c.length for c in cyc), Fraction(0))
        top_cycle = tops[top_of[tau_id]]
        waist = _point_on_trace(res, normal, s / 2)
        edges = tuple(c.start.corner for c in cyc) if all(c.start.aligned for c in cyc) else None
        cylinders.append(
            Cylinder(
                d,
                core,
                span,
                tuple(c.holonomy(d) for c in cyc),
                tuple(c.holonomy(d) for c in top_cycle),
                waist_start=(waist[0], waist[1], None),
                bottom_edges=edges,
                side_edge=_side_edge(M, sigma.start, span),
            )
        )
    return cylinders


def _side_edge(M: TranslationSurface, slot: Slot, span: Vec2) -> int | None:
    """First edge counter-clockwise from ``slot`` whose period is ``span``."""
    cls = next(c for c in M.vertex_classes() if slot.corner in c)
    k = cls.index(slot.corner)
    for t in range(1, len(cls) + 1):
        h = cls[(k + t) % len(cls)]
        if M.vec[h] == span:
            return h
    return None


def face_cylinder(M: TranslationSurface, face: int, side: int) -> Cylinder:
    """A face presented as ``bottom chain, side, top chain reversed, side``'s twin."""
    G = FaceGeometry(M)
    cyc = G.cycles[face]
    if side not in cyc or (side ^ 1) not in cyc:
        raise SurfaceError("side and its twin must both bound the face")
    i, j = cyc.index(side), cyc.index(side ^ 1)
    n = len(cyc)
    bottom = [cyc[(j + 1 + t) % n] for t in range((i - j - 1) % n)]
    top = [cyc[(i + 1 + t) % n] for t in range((j - i - 1) % n)]
    core = sum((M.vec[h] for h in bottom), ZERO)
    if sum((M.vec[h] for h in top), ZERO) != -core:
        raise SurfaceError("face is not a cylinder: chains differ")
    span = M.vec[side]
    f, k = G.where[side ^ 1]
    waist_point = G.points[f][k] + M.vec[side ^ 1] * Fraction(1, 2)
    return Cylinder(
        core,
        core,
        span,
        tuple(M.vec[h] for h in bottom),
        tuple(-M.vec[h] for h in reversed(top)),
        face=face,
        side=side,
        waist_start=(f, waist_point, k),
        polygon_area=polygon_area2(G.points[face]) / 2,
        bottom_edges=tuple(bottom),
        side_edge=side,
    )


def _upward(v: Vec2) -> bool:
    return v.y > 0 or (v.y == 0 and v.x < 0)


def strip_cylinders(M: TranslationSurface) -> list[Cylinder]:
    """Every face whose two sides are glued to each other, as a cylinder."""
    out = []
    for f, cyc in enumerate(M.faces()):
        for h in cyc:
            if (h ^ 1) in cyc:
                try:
                    cyl = face_cylinder(M, f, h)
                except SurfaceError:
                    continue
                if cyl.core.cross(cyl.span) > 0 and _upward(cyl.span):
                    out.append(cyl)
                    break
    return out


# -- waist cut ---------------------------------------------------------------------------

@dataclass
class WaistCutSurface:
    base: TranslationSurface
    cylinders: list[Cylinder]
    waists: list[list[Barrier]]
    geometry: FaceGeometry = field(repr=False, default=None)

    @property
    def half_cylinders(self) -> list[str]:
        out = []
        for i in range(len(self.cylinders)):
            out += [f"C{i + 1}+", f"C{i + 1}-"]
        return out

    def barriers(self) -> BarrierSet:
        bs = BarrierSet()
        for w in self.waists:
            bs.extend(w)
        return bs


def closed_trace(G: FaceGeometry, start: tuple, core: Vec2, tag) -> list[Barrier]:
    f, P, entered = start
    res = trace(G, f, P, core, entered=entered, max_length=Fraction(1))
    if res.kind != "length":
        raise SurfaceError(f"waist trace stopped early ({res.kind})")
    out = []
    offset = Fraction(0)
    for face, A, B in res.segments:
        L = _param_along(A, B, core)
        out.append(Barrier(face, A, B, tag, offset, L))
        offset += L
    return out


def waist_cut(N: TranslationSurface, cylinders: Sequence[Cylinder], cover: bool = True) -> WaistCutSurface:
    """Cut ``N`` along one waist per cylinder; ``cover=False`` allows cylinders that leave gaps."""
    if not cylinders:
        raise SurfaceError("no cylinders given")
    from .surface_core import area

    total = sum((c.area for c in cylinders), Fraction(0))
    if total > area(N) or (cover and total != area(N)):
        raise SurfaceError("cylinders do not cover the surface")
    G = FaceGeometry(N)
    waists = [closed_trace(G, c.waist_start, c.core, ("waist", i)) for i, c in enumerate(cylinders)]
    return WaistCutSurface(N, list(cylinders), waists, G)


# -- the sets Xi and Gamma ----------------------------------------------------------------

@dataclass
class VerticalChain:
    segments: tuple[DirectedConnection, ...]

    @property
    def total_holonomy(self) -> Vec2:
        return VERTICAL * sum((c.length for c in self.segments), Fraction(0))

    @property
    def start(self) -> str:
        return self.segments[0].start.vertex

    @property
    def end(self) -> str:
        return self.segments[-1].end.vertex


@dataclass
class XiResult:
    connections: list[DirectedConnection]
    chains: list[VerticalChain]
    undetermined: int
    slots: dict = field(repr=False, default_factory=dict)
    by_slot: dict = field(repr=False, default_factory=dict)

    @property
    def nonempty(self) -> bool:
        return bool(self.connections)


def vertical_connections(W: WaistCutSurface, length_bound=None, max_crossings: int = DEFAULT_MAX_CROSSINGS):
    G = W.geometry or FaceGeometry(W.base)
    bs = W.barriers()
    slots = direction_slots(W.base, VERTICAL)
    conns = {}
    undetermined = 0
    for name in W.base.singularity_order:
        for sl in slots.get(name, ()):
            if sl.sign != 1:
                continue
            res = trace_slot(G, sl, VERTICAL, barriers=bs, max_length=length_bound, max_crossings=max_crossings)
            if res.kind == "vertex":
                conns[sl] = DirectedConnection(len(conns), sl, arrival_slot(slots, res, 1), res.length, res.segments)
            elif res.kind == "bound":
                undetermined += 1
    return slots, conns, undetermined


def xi_set(W: WaistCutSurface, length_bound=None, max_crossings: int = DEFAULT_MAX_CROSSINGS) -> XiResult:
    """Vertical saddle connections avoiding the waists, and their chains."""
    slots, conns, undetermined = vertical_connections(W, length_bound, max_crossings)
    items = list(conns.values())
    starting: dict[str, list[DirectedConnection]] = {}
    for c in items:
        starting.setdefault(c.start.vertex, []).append(c)
    cap = 2 * len(items)
    chains: list[VerticalChain] = []

    def extend(path, used):
        chains.append(VerticalChain(tuple(path)))
        if len(path) >= cap or len(chains) > 10_000:
            return
        for nxt_c in starting.get(path[-1].end.vertex, ()):
            if nxt_c.ident not in used:
                used.add(nxt_c.ident)
                extend(path + [nxt_c], used)
                used.discard(nxt_c.ident)

    for c in items:
        extend([c], {c.ident})
    return XiResult(items, chains, undetermined, slots, conns)


@dataclass
class GammaResult:
    nonempty: bool
    witness: list[DirectedConnection] = field(default_factory=list)
    side: str | None = None

    def __bool__(self):
        return self.nonempty


def gamma_nonempty(W: WaistCutSurface, length_bound=None, xi: XiResult | None = None) -> GammaResult:
    """A vertical cylinder inside the waist-cut surface, found as a closed boundary chain."""
    xi = xi or xi_set(W, length_bound)
    for side in ("left", "right"):
        cycles = successor_cycles(xi.slots, xi.by_slot, side)
        if cycles:
            return GammaResult(True, cycles[0], side)
    return GammaResult(False)


def edge_path_around(W: WaistCutSurface, chain: VerticalChain) -> list[int]:
    """Half-edges of a boundary path homotopic to the chain with its endpoints fixed.

    Inside each face crossed, the path walks counter-clockwise along the face
    boundary from where the chain enters to where it leaves, so holonomy and
    relative homology class both agree with the chain.
    """
    M = W.base
    G = W.geometry or FaceGeometry(M)
    path: list[int] = []
    for c in chain.segments:
        if c.start.aligned:
            path.append(c.start.corner)
            continue
        path += _boundary_walk(G, c)
    path = _reduce(path)
    if sum((M.vec[h] for h in path), ZERO) != chain.total_holonomy:
        raise SurfaceError("edge path holonomy mismatch")
    return path


def _walk(cyc: list[int], start: int, stop: int) -> list[int]:
    out = []
    k = cyc.index(start)
    while cyc[k] != stop:
        out.append(cyc[k])
        k = (k + 1) % len(cyc)
    return out


def _boundary_walk(G: FaceGeometry, c: DirectedConnection) -> list[int]:
    M = G.M
    corner = c.start.corner
    path: list[int] = []
    for e in _crossed_edges(G, c):
        path += _walk(G.cycles[G.where[e][0]], corner, e)
        corner = M.nxt[e ^ 1]
    path += _walk(G.cycles[G.where[corner][0]], corner, c.end.corner)
    return path


def _crossed_edges(G: FaceGeometry, c: DirectedConnection) -> list[int]:
    """Edges crossed between consecutive segments of a trace."""
    out = []
    for f, _, Q in c.segments[:-1]:
        cyc, pts = G.cycles[f], G.points[f]
        for k, h in enumerate(cyc):
            e = G.M.vec[h]
            rel = Q - pts[k]
            if rel.cross(e) == 0 and 0 < rel.dot(e) < e.norm2():
                out.append(h)
                break
        else:
            raise SurfaceError("trace segment does not end on an edge")
    return out


def _reduce(path: list[int]) -> list[int]:
    out: list[int] = []
    for h in path:
        if out and out[-1] == h ^ 1:
            out.pop()
        else:
            out.append(h)
    return out


# -- degenerations ------------------------------------------------------------------------

def injectivity_radius_upper_bound(circumference, stretch_h) -> Fraction:
    l, h = rat(circumference), rat(stretch_h)
    return l / (1 + l * h)


class _Halves:
    """Mutable half-edge soup with explicit twins, renumbered when frozen."""

    def __init__(self, M: TranslationSurface):
        n = M.n_half_edges
        self.nxt = {h: M.nxt[h] for h in range(n)}
        self.twin = {h: h ^ 1 for h in range(n)}
        self.vec = {h: M.vec[h] for h in range(n)}
        self.origin = {h: M.origin[h] for h in range(n)}
        self.label = {h: M.labels[h >> 1] for h in range(n)}
        self.order = list(M.singularity_order)
        self.fresh = n

    def new(self, vec: Vec2, origin=None, label=None) -> int:
        h = self.fresh
        self.fresh += 1
        self.nxt[h] = h
        self.vec[h] = vec
        self.origin[h] = origin
        self.label[h] = label
        return h

    def prev_of(self, h: int) -> int:
        for g, n in self.nxt.items():
            if n == h:
                return g
        raise KeyError(h)

    def split(self, h: int, parts: Sequence[Fraction]) -> list[int]:
        """Split ``h`` (and its twin) at the given fractions in (0, 1). Returns pieces of ``h``."""
        if not parts:
            return [h]
        g = self.twin[h]
        v = self.vec[h]
        cuts = [Fraction(0)] + sorted(parts) + [Fraction(1)]
        pieces_h = [h]
        pieces_g = [g]
        lab = self.label[h]
        for _ in parts:
            pieces_h.append(self.new(ZERO, None, lab))
            pieces_g.append(self.new(ZERO, None, lab))
        for i, ph in enumerate(pieces_h):
            self.vec[ph] = v * (cuts[i + 1] - cuts[i])
        # twin pieces run the other way
        for i, pg in enumerate(pieces_g):
            self.vec[pg] = -self.vec[pieces_h[len(pieces_h) - 1 - i]]
        after_h, after_g = self.nxt[h], self.nxt[g]
        for a, b in zip(pieces_h, pieces_h[1:]):
            self.nxt[a] = b
        self.nxt[pieces_h[-1]] = after_h
        for a, b in zip(pieces_g, pieces_g[1:]):
            self.nxt[a] = b
        self.nxt[pieces_g[-1]] = after_g
        for i, ph in enumerate(pieces_h):
            self.twin[ph] = pieces_g[len(pieces_g) - 1 - i]
            self.twin[pieces_g[len(pieces_g) - 1 - i]] = ph
        self.origin[pieces_g[0]] = self.origin[g]
        return pieces_h

    def remove_face(self, face: Sequence[int]) -> None:
        for h in face:
            del self.nxt[h], self.twin[h], self.vec[h], self.origin[h], self.label[h]

    def freeze(self) -> TranslationSurface:
        index: dict[int, int] = {}
        for h in sorted(self.nxt):
            if h in index:
                continue
            k = len(index)
            index[h] = k
            index[self.twin[h]] = k + 1
        n = len(index)
        back = {v: h for h, v in index.items()}
        nxt = [index[self.nxt[back[i]]] for i in range(n)]
        vec = [self.vec[back[i]] for i in range(n)]
        origin = [self.origin[back[i]] for i in range(n)]
        labels = []
        for i in range(0, n, 2):
            a, b = self.label[back[i]], self.label[back[i + 1]]
            labels.append(a if a is not None else b)
        return TranslationSurface(nxt, vec, origin, labels, self.order)


def collapse_cylinder(M: TranslationSurface, cyl: Cylinder) -> TranslationSurface:
    """Remove a face cylinder and glue its two boundary chains by the straight flow across it."""
    if cyl.face is None:
        raise SurfaceError("cylinder must be presented as a face")
    cyc = M.faces()[cyl.face]
    if len(M.faces()) == 1:
        raise SurfaceError("no residual surface")
    side = cyl.side
    i, j = cyc.index(side), cyc.index(side ^ 1)
    n = len(cyc)
    bottom = [cyc[(j + 1 + t) % n] for t in range((i - j - 1) % n)]
    top = list(reversed([cyc[(i + 1 + t) % n] for t in range((j - i - 1) % n)]))
    if any((h ^ 1) in cyc for h in bottom + top):
        raise SurfaceError("cylinder boundary is glued to the cylinder itself")
    core = cyl.core
    # offsets along the core, in units of the core
    def offsets(edges, sign):
        acc, out = Fraction(0), []
        for h in edges:
            acc += _param_along(ZERO, M.vec[h] * sign, core)
            out.append(acc)
        return out

    bo = offsets(bottom, 1)
    to = offsets(top, -1)
    breaks = sorted(set(bo) | set(to))
    H = _Halves(M)

    def cut(edges, offs, sign):
        pieces = []
        start = Fraction(0)
        for h, end in zip(edges, offs):
            inner = [b for b in breaks if start < b < end]
            fr = [(b - start) / (end - start) for b in inner]
            hp = H.split(h, fr) if sign > 0 else list(reversed(H.split(h, [1 - x for x in reversed(fr)])))
            pieces += hp
            start = end
        return pieces

    bottom_pieces = cut(bottom, bo, 1)
    top_pieces = cut(top, to, -1)
    face_now = []
    h = bottom_pieces[0]
    start = h
    while True:
        face_now.append(h)
        h = H.nxt[h]
        if h == start:
            break
    partners = [(H.twin[b], H.twin[t]) for b, t in zip(bottom_pieces, top_pieces)]
    if len(bottom_pieces) != len(top_pieces):
        raise SurfaceError("boundary subdivision mismatch")
    for b, t in zip(bottom_pieces, top_pieces):
        if H.vec[b] != -H.vec[t]:
            raise SurfaceError("boundary pieces do not match")
    H.remove_face(face_now)
    for pb, pt in partners:
        H.twin[pb] = pt
        H.twin[pt] = pb
    return H.freeze()


def slit_attach_cylinder(M: TranslationSurface, sc: SaddleConnection | int, h) -> TranslationSurface:
    """Cut along an edge and glue in a cylinder of height ``h`` perpendicular to it."""
    e = sc.edge if isinstance(sc, SaddleConnection) else sc
    if e is None:
        raise SurfaceError("slit must be an edge of the presentation")
    h = rat(h)
    if h <= 0:
        raise ValueError("height must be positive")
    w = M.vec[e]
    length = rational_sqrt(w.norm2())
    if length is None:
        raise SurfaceError("slit length must be rational")
    side = Vec2(-w.y, w.x) * (h / length)
    H = _Halves(M)
    g = e ^ 1
    b = H.new(w, M.origin[e])
    s = H.new(side, M.target(e))
    t = H.new(-w, M.target(e))
    s2 = H.new(-side, M.origin[e])
    H.nxt[b], H.nxt[s], H.nxt[t], H.nxt[s2] = s, t, s2, b
    H.twin[e], H.twin[t] = t, e
    H.twin[g], H.twin[b] = b, g
    H.twin[s], H.twin[s2] = s2, s
    H.label[b] = H.label[t] = H.label[e]
    return H.freeze()


def cylinder_faces(M: TranslationSurface) -> list[tuple[int, int]]:
    """(face, side) pairs for faces presented as cylinders."""
    return [(c.face, c.side) for c in strip_cylinders(M)]


def signature_orders(M: TranslationSurface) -> tuple[int, ...]:
    return tuple(sorted(stratum_signature(M).orders, reverse=True))
