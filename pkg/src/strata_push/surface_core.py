"""Translation surfaces as half-edge structures with exact periods.

Half-edges are numbered ``0 .. 2n-1``; half-edge ``e`` and ``e ^ 1`` are
the two sides of undirected edge ``e >> 1``. ``nxt`` walks each face
counter-clockwise, ``vec`` holds the period of each half-edge and
``origin`` names the singularity a half-edge starts at.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exact_num import Mat2, Vec2, ZERO, det, mat_apply, rat


class SurfaceError(ValueError):
    """Raised when a surface description is geometrically invalid."""


def opp(e: int) -> int:
    return e ^ 1


def _half(v: Vec2) -> int:
    return 0 if (v.y > 0 or (v.y == 0 and v.x > 0)) else 1


def angle_before(w: Vec2, u: Vec2) -> bool:
    """True if the direction of ``w`` has smaller argument in [0, 2pi) than ``u``."""
    hw, hu = _half(w), _half(u)
    if hw != hu:
        return hw < hu
    return u.cross(w) < 0


def strictly_between(u: Vec2, d: Vec2, w: Vec2) -> bool:
    """True if ``d`` lies strictly inside the counter-clockwise sector from ``u`` to ``w``.

    The sector is assumed to have angle in ``(0, 2pi)``.
    """
    cu, cw = u.cross(d), d.cross(w)
    if u.cross(w) > 0:
        return cu > 0 and cw > 0
    if u.cross(w) < 0:
        return cu > 0 or cw > 0
    # straight or reflex-through-pi sector
    if u.dot(w) < 0:
        return cu > 0
    return not (cu == 0 and u.dot(d) > 0)


@dataclass(frozen=True)
class StratumSignature:
    kappa: tuple[tuple[str, int], ...]
    genus: int

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.kappa)


@dataclass(frozen=True)
class SaddleConnection:
    start: str
    end: str
    holonomy: Vec2
    start_half_edge: int
    path: tuple[int, ...] = ()
    edge: int | None = None

    @property
    def length2(self) -> Fraction:
        return self.holonomy.norm2()


class TranslationSurface:
    """Immutable translation surface.

    Build one with :func:`build_from_polygons` rather than by hand unless the
    half-edge arrays are already consistent.
    """

    __slots__ = ("nxt", "vec", "origin", "labels", "singularity_order", "_cache")

    def __init__(
        self,
        nxt: Sequence[int],
        vec: Sequence[Vec2],
        origin: Sequence[str] | None = None,
        labels: Sequence[str | None] | None = None,
        singularity_order: Sequence[str] = (),
        check: bool = True,
    ):
        self.nxt = tuple(nxt)
        self.vec = tuple(Vec2(rat(v[0]), rat(v[1])) for v in vec)
        n = len(self.nxt)
        if n % 2 or n != len(self.vec):
            raise SurfaceError("half-edge arrays have inconsistent sizes")
        if sorted(self.nxt) != list(range(n)):
            raise SurfaceError("face successor map is not a permutation")
        self.labels = tuple(labels) if labels is not None else (None,) * (n // 2)
        if len(self.labels) != n // 2:
            raise SurfaceError("one label slot per undirected edge expected")
        self._cache = {}
        self.origin, self.singularity_order = self._settle_names(origin, singularity_order)
        if check:
            self.validate()

    # -- combinatorics -------------------------------------------------
    @property
    def n_half_edges(self) -> int:
        return len(self.nxt)

    @property
    def n_edges(self) -> int:
        return len(self.nxt) // 2

    @property
    def prev(self) -> tuple[int, ...]:
        if "prev" not in self._cache:
            p = [0] * len(self.nxt)
            for e, f in enumerate(self.nxt):
                p[f] = e
            self._cache["prev"] = tuple(p)
        return self._cache["prev"]

    def faces(self) -> list[list[int]]:
        """Face cycles, each starting at its smallest half-edge."""
        if "faces" not in self._cache:
            seen = [False] * len(self.nxt)
            out = []
            for e in range(len(self.nxt)):
                if seen[e]:
                    continue
                cyc = []
                h = e
                while not seen[h]:
                    seen[h] = True
                    cyc.append(h)
                    h = self.nxt[h]
                out.append(cyc)
            self._cache["faces"] = out
        return self._cache["faces"]

    def face_of(self) -> list[int]:
        if "face_of" not in self._cache:
            fo = [0] * len(self.nxt)
            for i, cyc in enumerate(self.faces()):
                for h in cyc:
                    fo[h] = i
            self._cache["face_of"] = fo
        return self._cache["face_of"]

    def vertex_classes(self) -> list[list[int]]:
        """Outgoing half-edges grouped by vertex, in counter-clockwise order."""
        if "vclasses" not in self._cache:
            self._cache["vclasses"] = _vertex_classes(self.nxt)
        return self._cache["vclasses"]

    def target(self, e: int) -> str:
        return self.origin[self.nxt[e]]

    def face_points(self, face: Sequence[int], start: Vec2 = ZERO) -> list[Vec2]:
        """Positions of the vertices of a face cycle, developed from ``start``."""
        pts = [start]
        for h in face[:-1]:
            pts.append(pts[-1] + self.vec[h])
        return pts

    def label(self, e: int) -> str | None:
        return self.labels[e >> 1]

    def half_edge(self, label: str) -> int:
        """Even half-edge of the undirected edge carrying ``label``."""
        for i, lab in enumerate(self.labels):
            if lab == label:
                return 2 * i
        raise KeyError(label)

    def edge_ids(self) -> list[str]:
        return [lab if lab is not None else f"e{i}" for i, lab in enumerate(self.labels)]

    # -- naming --------------------------------------------------------
    def _settle_names(self, origin, order):
        classes = _vertex_classes(self.nxt)
        self._cache["vclasses"] = classes
        order = list(order)
        rank = {name: i for i, name in enumerate(order)}
        names = [None] * len(self.nxt)
        used = set()
        for cls in classes:
            cands = sorted(
                {origin[h] for h in cls if origin is not None and origin[h] is not None},
                key=lambda s: (rank.get(s, len(rank)), s),
            )
            cands = [c for c in cands if c not in used]
            name = cands[0] if cands else None
            if name is not None:
                used.add(name)
            for h in cls:
                names[h] = name
        counter = 0
        for cls in classes:
            if names[cls[0]] is None:
                while f"p{counter}" in used:
                    counter += 1
                fresh = f"p{counter}"
                used.add(fresh)
                for h in cls:
                    names[h] = fresh
        present = []
        for cls in classes:
            present.append(names[cls[0]])
        final_order = [n for n in order if n in present]
        final_order += sorted((n for n in present if n not in final_order), key=lambda s: present.index(s))
        return tuple(names), tuple(final_order)

    def with_names(self, mapping: Mapping[str, str]) -> "TranslationSurface":
        """Rename singularities; ``mapping`` may be partial."""
        origin = [mapping.get(n, n) for n in self.origin]
        order = [mapping.get(n, n) for n in self.singularity_order]
        return TranslationSurface(self.nxt, self.vec, origin, self.labels, order, check=False)

    # -- validation ----------------------------------------------------
    def validate(self) -> None:
        for e in range(0, len(self.vec), 2):
            if self.vec[e] != -self.vec[e + 1]:
                raise SurfaceError(f"pairing mismatch on edge {self.edge_ids()[e >> 1]}")
        for cyc in self.faces():
            total = ZERO
            for h in cyc:
                total = total + self.vec[h]
            if not total.is_zero():
                raise SurfaceError("face does not close")
            pts = self.face_points(cyc)
            if polygon_area2(pts) <= 0:
                raise SurfaceError("face has non-positive area")
            if not polygon_is_simple(pts):
                raise SurfaceError("non-simple face polygon")
        if not self._connected():
            raise SurfaceError("disconnected surface")

    def _connected(self) -> bool:
        n = len(self.nxt)
        seen = {0}
        stack = [0]
        while stack:
            h = stack.pop()
            for g in (self.nxt[h], h ^ 1):
                if g not in seen:
                    seen.add(g)
                    stack.append(g)
        return len(seen) == n

    # -- equality ------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TranslationSurface):
            return NotImplemented
        return (
            self.nxt == other.nxt
            and self.vec == other.vec
            and self.origin == other.origin
            and self.labels == other.labels
            and self.singularity_order == other.singularity_order
        )

    def __hash__(self):
        return hash((self.nxt, self.vec, self.origin))

    def __repr__(self):
        return f"TranslationSurface(faces={len(self.faces())}, edges={self.n_edges}, area={area(self)})"


def _vertex_classes(nxt: Sequence[int]) -> list[list[int]]:
    n = len(nxt)
    prev = [0] * n
    for e, f in enumerate(nxt):
        prev[f] = e
    seen = [False] * n
    out = []
    for e in range(n):
        if seen[e]:
            continue
        cls = []
        h = e
        while not seen[h]:
            seen[h] = True
            cls.append(h)
            h = prev[h] ^ 1  # counter-clockwise around the origin
        out.append(cls)
    return out


# -- planar predicates ----------------------------------------------------

def polygon_area2(pts: Sequence[Vec2]) -> Fraction:
    s = Fraction(0)
    n = len(pts)
    for i in range(n):
        s += pts[i].cross(pts[(i + 1) % n])
    return s


def orient(a: Vec2, b: Vec2, c: Vec2) -> Fraction:
    return (b - a).cross(c - a)


def on_segment(p: Vec2, a: Vec2, b: Vec2) -> bool:
    if orient(a, b, p) != 0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool:
    """Closed segments ``ab`` and ``cd`` share a point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    return on_segment(c, a, b) or on_segment(d, a, b) or on_segment(a, c, d) or on_segment(b, c, d)


def polygon_is_simple(pts: Sequence[Vec2]) -> bool:
    n = len(pts)
    if n < 3:
        return False
    if len(set(pts)) != n:
        return False
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = pts[j], pts[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges: only the shared vertex may be common
                shared = b if j == i + 1 else a
                other_ab = a if j == i + 1 else b
                other_cd = d if j == i + 1 else c
                if orient(shared, other_ab, other_cd) == 0 and (other_ab - shared).dot(other_cd - shared) > 0:
                    return False
                continue
            if segments_intersect(a, b, c, d):
                return False
    return True


def point_in_polygon(p: Vec2, pts: Sequence[Vec2]) -> int:
    """1 inside, 0 on the boundary, -1 outside."""
    n = len(pts)
    inside = False
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if on_segment(p, a, b):
            return 0
        if (a.y > p.y) != (b.y > p.y):
            xcross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if xcross > p.x:
                inside = not inside
    return 1 if inside else -1


# -- construction -----------------------------------------------------------

def build_from_polygons(
    faces: Sequence[Sequence[str]],
    periods: Mapping[str, Sequence],
    gluings: Sequence[Sequence[str]],
    singularity_order: Sequence[str] = (),
    singularity_names: Sequence[str] | None = None,
    labels: Mapping[str, str] | None = None,
) -> TranslationSurface:
    """Assemble a surface from polygons given as cyclic lists of side ids.

    ``periods`` maps each side id to its vector, ``gluings`` pairs sides.
    ``singularity_order`` lists sides whose origin names each singularity,
    optionally with explicit ``singularity_names``.
    """
    half = {}
    for k, pair in enumerate(gluings):
        if len(pair) != 2:
            raise SurfaceError("each gluing pairs exactly two sides")
        s, t = pair
        for side, idx in ((s, 2 * k), (t, 2 * k + 1)):
            if side in half:
                raise SurfaceError(f"pairing mismatch: side {side} glued twice")
            half[side] = idx
    sides = [s for face in faces for s in face]
    if sorted(sides) != sorted(half):
        missing = set(sides) ^ set(half)
        raise SurfaceError(f"pairing mismatch: unmatched sides {sorted(missing)}")
    if len(set(sides)) != len(sides):
        raise SurfaceError("pairing mismatch: a side appears in two faces")
    n = 2 * len(gluings)
    nxt = [0] * n
    vec = [ZERO] * n
    for face in faces:
        for i, s in enumerate(face):
            nxt[half[s]] = half[face[(i + 1) % len(face)]]
    for s, idx in half.items():
        if s not in periods:
            raise SurfaceError(f"side {s} has no period")
        p = periods[s]
        vec[idx] = Vec2(rat(p[0]), rat(p[1]))
    edge_labels = []
    for s, t in gluings:
        if labels and s in labels:
            edge_labels.append(labels[s])
        elif t == s + "'":
            edge_labels.append(s)
        else:
            edge_labels.append(s)
    for k in range(len(gluings)):
        if vec[2 * k] != -vec[2 * k + 1]:
            raise SurfaceError(f"pairing mismatch on edge {edge_labels[k]}")
    names = list(singularity_names) if singularity_names is not None else [str(i) for i in range(len(singularity_order))]
    if len(names) != len(singularity_order):
        raise SurfaceError("one name per singularity reference expected")
    classes = _vertex_classes(nxt)
    origin: list[str | None] = [None] * n
    for side, name in zip(singularity_order, names):
        h = half[side]
        for cls in classes:
            if h in cls:
                for g in cls:
                    if origin[g] is not None and origin[g] != name:
                        raise SurfaceError(f"singularity {side} named twice")
                    origin[g] = name
    return TranslationSurface(nxt, vec, origin, edge_labels, names)


def parallelogram_torus(u=(1, 0), v=(0, 1)) -> TranslationSurface:
    """The torus ``R^2 / (Zu + Zv)`` with one marked point ``P``."""
    u = Vec2(rat(u[0]), rat(u[1]))
    v = Vec2(rat(v[0]), rat(v[1]))
    periods = {"b": u, "b'": -u, "r": v, "r'": -v}
    return build_from_polygons([["b", "r", "b'", "r'"]], periods, [("b", "b'"), ("r", "r'")], ["b"], ["P"])


# -- invariants --------------------------------------------------------------

def cone_turns(M: TranslationSurface) -> dict[str, int]:
    """Total angle of each vertex divided by 2*pi (an exact integer)."""
    out = {}
    prev = M.prev
    for cls in M.vertex_classes():
        turns = 0
        for e in cls:
            u = M.vec[e]
            w = -M.vec[prev[e]]
            if angle_before(w, u):
                turns += 1
        out[M.origin[cls[0]]] = turns
    return out


def genus(M: TranslationSurface) -> int:
    chi = len(M.vertex_classes()) - M.n_edges + len(M.faces())
    if chi % 2:
        raise SurfaceError("odd Euler characteristic")
    return (2 - chi) // 2


def stratum_signature(M: TranslationSurface) -> StratumSignature:
    turns = cone_turns(M)
    kappa = tuple((name, turns[name] - 1) for name in M.singularity_order)
    g = genus(M)
    if sum(k for _, k in kappa) != 2 * g - 2:
        raise SurfaceError("cone angles violate Gauss-Bonnet")
    return StratumSignature(kappa, g)


def area(M: TranslationSurface) -> Fraction:
    total = Fraction(0)
    for cyc in M.faces():
        total += polygon_area2(M.face_points(cyc))
    return total / 2


# -- SL(2,R) action ----------------------------------------------------------

def apply_matrix(M: TranslationSurface, g: Mat2) -> TranslationSurface:
    if det(g) <= 0:
        raise SurfaceError("orientation-reversing or singular matrix")
    vec = [mat_apply(g, v) for v in M.vec]
    return TranslationSurface(M.nxt, vec, M.origin, M.labels, M.singularity_order, check=False)


def normalize_area(M: TranslationSurface) -> TranslationSurface:
    """Rescale the horizontal direction so that the area becomes 1."""
    a = area(M)
    return apply_matrix(M, Mat2(1 / a, Fraction(0), Fraction(0), Fraction(1)))


# -- triangulation -------------------------------------------------------------

class _Builder:
    """Mutable half-edge arrays used by surgery routines."""

    def __init__(self, M: TranslationSurface):
        self.nxt = list(M.nxt)
        self.vec = list(M.vec)
        self.origin = list(M.origin)
        self.labels = list(M.labels)
        self.order = list(M.singularity_order)

    def new_edge(self, v: Vec2, origin_a: str, origin_b: str, label=None) -> int:
        e = len(self.nxt)
        self.nxt += [e, e + 1]
        self.vec += [v, -v]
        self.origin += [origin_a, origin_b]
        self.labels.append(label)
        return e

    def freeze(self, check: bool = True) -> TranslationSurface:
        return TranslationSurface(self.nxt, self.vec, self.origin, self.labels, self.order, check=check)


def triangulate(M: TranslationSurface) -> TranslationSurface:
    """Ear-clip every face. Original half-edges keep their indices."""
    if all(len(c) == 3 for c in M.faces()):
        return M
    b = _Builder(M)
    for cyc in M.faces():
        poly = list(cyc)
        while len(poly) > 3:
            pts = []
            p = ZERO
            for h in poly:
                pts.append(p)
                p = p + b.vec[h]
            m = len(poly)
            for i in range(m):
                a_, c_, d_ = pts[i - 1], pts[i], pts[(i + 1) % m]
                if orient(a_, c_, d_) <= 0:
                    continue
                blocked = False
                for j in range(m):
                    if j in (i - 1 if i else m - 1, i, (i + 1) % m):
                        continue
                    q = pts[j]
                    o1, o2, o3 = orient(a_, c_, q), orient(c_, d_, q), orient(d_, a_, q)
                    if o1 >= 0 and o2 >= 0 and o3 >= 0:
                        blocked = True
                        break
                if blocked:
                    continue
                h_in, h_out = poly[i - 1], poly[i]
                h_after = poly[(i + 1) % m]
                diag = b.new_edge(a_ - d_, b.origin[h_after], b.origin[h_in])
                # ear: h_in, h_out, diag ; remainder uses diag ^ 1
                b.nxt[h_in] = h_out
                b.nxt[h_out] = diag
                b.nxt[diag] = h_in
                before = poly[i - 2] if m > 2 else None
                b.nxt[before] = diag + 1
                b.nxt[diag + 1] = h_after
                if i == 0:
                    poly = [diag + 1] + poly[1:-1]
                else:
                    poly = poly[: i - 1] + [diag + 1] + poly[i + 1 :]
                break
            else:
                raise SurfaceError("ear clipping failed on a face")
    return b.freeze(check=False)


# -- flips and Delaunay ---------------------------------------------------------

def flip_in_place(nxt: list[int], vec: list[Vec2], origin: list[str], e: int) -> None:
    """Replace the diagonal ``e`` of the quadrilateral formed by its two triangles."""
    o = e ^ 1
    e1, e2 = nxt[e], nxt[nxt[e]]
    o1, o2 = nxt[o], nxt[nxt[o]]
    # e: P0->P1, e1: P1->P2, e2: P2->P0, o1: P0->Q, o2: Q->P1; new e runs Q->P2
    vec[e] = vec[o2] + vec[e1]
    vec[o] = -vec[e]
    origin[e] = origin[o2]
    origin[o] = origin[e2]
    nxt[o1] = e
    nxt[e] = e2
    nxt[e2] = o1
    nxt[e1] = o
    nxt[o] = o2
    nxt[o2] = e1


def incircle_sign(vec: Sequence[Vec2], nxt: Sequence[int], e: int) -> int:
    """Positive if the apex across ``e`` lies inside the circumcircle of e's triangle."""
    b = vec[e]
    c = b + vec[nxt[e]]
    d = vec[nxt[e ^ 1]]
    bb, cc, dd = b.norm2(), c.norm2(), d.norm2()
    m = (
        b.x * (c.y * dd - cc * d.y)
        - b.y * (c.x * dd - cc * d.x)
        + bb * (c.x * d.y - c.y * d.x)
    )
    return (m < 0) - (m > 0)


def _same_triangle(nxt, e) -> bool:
    o = e ^ 1
    return o in (e, nxt[e], nxt[nxt[e]])


def delaunay_triangulation(M: TranslationSurface) -> TranslationSurface:
    T = triangulate(M)
    nxt, vec, origin = list(T.nxt), list(T.vec), list(T.origin)
    stack = list(range(0, len(nxt), 2))
    on_stack = set(stack)
    guard = 0
    labels = list(T.labels)
    while stack:
        e = stack.pop()
        on_stack.discard(e)
        if _same_triangle(nxt, e):
            continue
        if incircle_sign(vec, nxt, e) > 0:
            ring = [nxt[e], nxt[nxt[e]], nxt[e ^ 1], nxt[nxt[e ^ 1]]]
            flip_in_place(nxt, vec, origin, e)
            labels[e >> 1] = None
            for h in ring:
                k = h & ~1
                if k not in on_stack:
                    on_stack.add(k)
                    stack.append(k)
            guard += 1
            if guard > 10**6:
                raise RuntimeError("Delaunay flipping did not terminate")
    return TranslationSurface(nxt, vec, origin, labels, T.singularity_order, check=False)


def delaunay_cells(M: TranslationSurface) -> TranslationSurface:
    """Merge Delaunay triangles across cocircular edges. The result is unique."""
    D = delaunay_triangulation(M)
    nxt, vec = D.nxt, D.vec
    removed = set()
    for e in range(0, len(nxt), 2):
        if not _same_triangle(nxt, e) and incircle_sign(vec, nxt, e) == 0:
            removed.add(e)
            removed.add(e + 1)
    if not removed:
        return D
    keep = [h for h in range(len(nxt)) if h not in removed]
    index = {h: i for i, h in enumerate(keep)}
    new_nxt = []
    for h in keep:
        g = nxt[h]
        while g in removed:
            g = nxt[g ^ 1]
        new_nxt.append(index[g])
    new_vec = [vec[h] for h in keep]
    new_origin = [D.origin[h] for h in keep]
    new_labels = [D.labels[h >> 1] for h in keep[::2]]
    return TranslationSurface(new_nxt, new_vec, new_origin, new_labels, D.singularity_order, check=False)


def _code_from(M: TranslationSurface, start: int, with_names: bool):
    num = {start: 0}
    order = [start]
    i = 0
    while i < len(order):
        h = order[i]
        for g in (M.nxt[h], h ^ 1):
            if g not in num:
                num[g] = len(order)
                order.append(g)
        i += 1
    code = []
    for h in order:
        item = (num[M.nxt[h]], num[h ^ 1], M.vec[h].x, M.vec[h].y)
        if with_names:
            item = item + (M.origin[h],)
        code.append(item)
    return tuple(code)


def canonical_form(M: TranslationSurface, label_preserving: bool = False):
    """A hashable code that is equal for translation-equivalent surfaces."""
    cells = delaunay_cells(M)
    best_key = min((v.x, v.y) for v in cells.vec)
    starts = [h for h, v in enumerate(cells.vec) if (v.x, v.y) == best_key]
    return min(_code_from(cells, s, label_preserving) for s in starts)


def translation_equivalent(M: TranslationSurface, N: TranslationSurface, label_preserving: bool = False) -> bool:
    if area(M) != area(N):
        return False
    if len(M.vertex_classes()) != len(N.vertex_classes()):
        return False
    return canonical_form(M, label_preserving) == canonical_form(N, label_preserving)


# -- saddle connections ----------------------------------------------------------

def _seg_dist2(a: Vec2, b: Vec2) -> Fraction:
    """Squared distance from the origin to the closed segment ``ab``."""
    d = b - a
    dd = d.norm2()
    t = -a.dot(d)
    if t <= 0:
        return a.norm2()
    if t >= dd:
        return b.norm2()
    return a.norm2() - t * t / dd


def saddle_connections_up_to(M: TranslationSurface, L2) -> list[SaddleConnection]:
    """All directed saddle connections with squared length at most ``L2``."""
    L2 = rat(L2)
    T = triangulate(M)
    nxt, vec = T.nxt, T.vec
    prev = T.prev
    out = []
    for e in range(len(nxt)):
        if vec[e].norm2() <= L2:
            out.append(SaddleConnection(T.origin[e], T.target(e), vec[e], e, (), e))
    for e in range(len(nxt)):
        b = vec[e]
        c = -vec[prev[e]]
        stack = [(nxt[e], b, c, b, c, ())]
        while stack:
            h, P, Q, right, left, path = stack.pop()
            if _seg_dist2(P, Q) > L2:
                continue
            o = h ^ 1
            R = P + vec[nxt[o]]
            path2 = path + (h,)
            cr, cl = right.cross(R), R.cross(left)
            if cr > 0 and cl > 0:
                if R.norm2() <= L2:
                    out.append(SaddleConnection(T.origin[e], T.origin[nxt[nxt[o]]], R, e, path2))
                stack.append((nxt[o], P, R, right, R, path2))
                stack.append((nxt[nxt[o]], R, Q, R, left, path2))
            elif cr <= 0:
                stack.append((nxt[nxt[o]], R, Q, right, left, path2))
            else:
                stack.append((nxt[o], P, R, right, left, path2))
    out.sort(key=lambda s: (s.length2, s.start, s.holonomy.x, s.holonomy.y))
    return out


def systole_squared(M: TranslationSurface) -> Fraction:
    T = triangulate(M)
    bound = min(v.norm2() for v in T.vec)
    return min(s.length2 for s in saddle_connections_up_to(T, bound))
