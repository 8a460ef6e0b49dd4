"""Cocycles on edges and the linear push of periods with flip handling."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exact_num import QuadReal, Vec2, quadratic_roots, rat, rat_str
from .surface_core import (
    SurfaceError,
    TranslationSurface,
    flip_in_place,
    triangulate,
)


class CocycleError(ValueError):
    pass


class Cocycle:
    """Antisymmetric rational labelling of the edges of one surface.

    ``values[i]`` is the value on the even half-edge ``2*i``.
    """

    __slots__ = ("values",)

    def __init__(self, values: Sequence):
        self.values = tuple(rat(v) for v in values)

    def value(self, h: int) -> Fraction:
        v = self.values[h >> 1]
        return v if h % 2 == 0 else -v

    @classmethod
    def zero(cls, M: TranslationSurface) -> "Cocycle":
        return cls([0] * M.n_edges)

    @classmethod
    def from_mapping(cls, M: TranslationSurface, mapping: Mapping[str, object], complete: bool = True) -> "Cocycle":
        """Values keyed by edge id; unknown edges are solved face by face when ``complete``."""
        ids = M.edge_ids()
        index = {name: i for i, name in enumerate(ids)}
        known: list[Fraction | None] = [None] * M.n_edges
        for key, val in mapping.items():
            if key not in index:
                raise CocycleError(f"unknown edge {key}")
            known[index[key]] = rat(val)
        if complete:
            known = _propagate(M, known)
        if any(v is None for v in known):
            missing = [ids[i] for i, v in enumerate(known) if v is None]
            raise CocycleError(f"missing edge values: {missing}")
        return cls(known)

    def extend_to(self, T: TranslationSurface) -> "Cocycle":
        """Extend to a refinement whose first edges are this cocycle's edges."""
        known: list[Fraction | None] = list(self.values) + [None] * (T.n_edges - len(self.values))
        known = _propagate(T, known)
        if any(v is None for v in known):
            raise CocycleError("missing edge values after refinement")
        return Cocycle(known)

    def to_json(self, M: TranslationSurface) -> dict:
        return {"values": {name: rat_str(v) for name, v in zip(M.edge_ids(), self.values)}}

    @classmethod
    def from_json(cls, M: TranslationSurface, data: Mapping) -> "Cocycle":
        return cls.from_mapping(M, data["values"])

    def __neg__(self):
        return Cocycle([-v for v in self.values])

    def __add__(self, other):
        return Cocycle([a + b for a, b in zip(self.values, other.values)])

    def scaled(self, k) -> "Cocycle":
        k = rat(k)
        return Cocycle([k * v for v in self.values])

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def __eq__(self, other):
        return isinstance(other, Cocycle) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return f"Cocycle({[rat_str(v) for v in self.values]})"


def _propagate(M: TranslationSurface, known: list) -> list:
    known = list(known)
    faces = M.faces()
    progress = True
    while progress:
        progress = False
        for cyc in faces:
            unknown = [h for h in cyc if known[h >> 1] is None]
            if len(unknown) != 1:
                continue
            h = unknown[0]
            s = Fraction(0)
            for g in cyc:
                if g != h:
                    v = known[g >> 1]
                    s += v if g % 2 == 0 else -v
            known[h >> 1] = -s if h % 2 == 0 else s
            progress = True
    return known


def validate_cocycle(M: TranslationSurface, v) -> bool:
    """Antisymmetry holds by construction; check that every face sum vanishes."""
    if not isinstance(v, Cocycle):
        v = Cocycle.from_mapping(M, v, complete=False)
    if len(v.values) != M.n_edges:
        raise CocycleError("missing edge values")
    for cyc in M.faces():
        if sum((v.value(h) for h in cyc), Fraction(0)) != 0:
            return False
    return True


def is_real_rel(M: TranslationSurface, v: Cocycle) -> bool:
    """True if ``v`` is the coboundary of a function on the singularities."""
    potential: dict[str, Fraction] = {}
    root = M.origin[0]
    potential[root] = Fraction(0)
    stack = [root]
    out_edges: dict[str, list[int]] = {}
    for h in range(M.n_half_edges):
        out_edges.setdefault(M.origin[h], []).append(h)
    while stack:
        p = stack.pop()
        for h in out_edges[p]:
            q = M.target(h)
            if q not in potential:
                potential[q] = potential[p] + v.value(h)
                stack.append(q)
    return all(potential[M.target(h)] - potential[M.origin[h]] == v.value(h) for h in range(M.n_half_edges))


# -- deformation engine ------------------------------------------------------

COMPLETED = "Completed"
HIT_BOUNDARY = "HitBoundary"
ACCUMULATION = "Accumulation"


@dataclass(frozen=True)
class FlipRecord:
    time: QuadReal
    edge: int
    quad: tuple[int, int, int, int]

    def to_json(self) -> dict:
        t = self.time
        if t.is_rational:
            time = rat_str(t.r)
        else:
            time = {"poly": [rat_str(t.a), rat_str(t.b), rat_str(t.c)], "root": t.root, "approx": float(t)}
        return {"time": time, "edge": self.edge, "quad": list(self.quad)}


@dataclass
class DeformationOutcome:
    kind: str
    final_time: QuadReal
    surface: TranslationSurface | None = None
    collapsed: list[str] = field(default_factory=list)
    witness_cylinder: list[str] = field(default_factory=list)
    flip_log: list[FlipRecord] = field(default_factory=list)

    def flip_log_json(self) -> list[dict]:
        return [r.to_json() for r in self.flip_log]


def _area_poly(p, v, a, b):
    """Coefficients (s^2, s, 1) of cross(p_a + s v_a, p_b + s v_b)."""
    return (
        v[a].cross(v[b]),
        p[a].cross(v[b]) + v[a].cross(p[b]),
        p[a].cross(p[b]),
    )


def _dot_poly(p, v, a_sign, a, b_sign, b):
    pa, va = (p[a], v[a]) if a_sign > 0 else (-p[a], -v[a])
    pb, vb = (p[b], v[b]) if b_sign > 0 else (-p[b], -v[b])
    return (va.dot(vb), pa.dot(vb) + va.dot(pb), pa.dot(pb))


def _degeneration_time(q, tau: QuadReal) -> QuadReal | None:
    """Earliest root at or after ``tau`` past which the quadratic turns negative."""
    a, b, c = q
    if a == 0 and b == 0:
        return None
    roots = quadratic_roots(a, b, c)
    for r in roots:
        if r < tau:
            continue
        if a == 0:
            if b < 0:
                return r
            continue
        if len(roots) == 1:
            continue  # double root: the sign does not change
        # sign just after r is that of the derivative 2a r + b
        if r.sign_of_poly(0, 2 * a, b) < 0:
            return r
    return None


def _collapse_time(p: Vec2, v: Vec2) -> Fraction | None:
    if v.x != 0:
        s = -p.x / v.x
    elif v.y != 0:
        s = -p.y / v.y
    else:
        return None
    if p.x + s * v.x == 0 and p.y + s * v.y == 0:
        return s
    return None


def _certified_decreasing(times: Sequence[QuadReal]) -> bool:
    """Every gap between consecutive times is certified smaller than the previous one."""
    for bits in (40, 96, 200):
        iv = [t.interval(bits) for t in times]
        ok = True
        for i in range(len(iv) - 2):
            gap_hi_next = iv[i + 2][1] - iv[i + 1][0]
            gap_lo_prev = iv[i + 1][0] - iv[i][1]
            if not gap_hi_next < gap_lo_prev:
                ok = False
                break
        if ok:
            return True
    return False


def deform(
    M: TranslationSurface,
    v: Cocycle | Mapping,
    t_target=1,
    max_flips: int = 10**6,
    window: int = 64,
) -> DeformationOutcome:
    """Flow the periods along ``v`` up to time ``t_target``, flipping edges as triangles degenerate."""
    t_target = rat(t_target)
    if t_target <= 0:
        raise ValueError("t_target must be positive")
    if not isinstance(v, Cocycle):
        v = Cocycle.from_mapping(M, v)
    if len(v.values) != M.n_edges:
        raise CocycleError("missing edge values")
    if not validate_cocycle(M, v):
        raise CocycleError("cocycle has a non-vanishing face sum")
    T = triangulate(M)
    if T is not M:
        v = v.extend_to(T)
    nxt = list(T.nxt)
    p = list(T.vec)
    vel = [_horizontal(v.value(h)) for h in range(T.n_half_edges)]
    origin = list(T.origin)
    labels = list(T.labels)
    original = {}
    for i, lab in enumerate(T.labels):
        if lab is not None:
            original[(p[2 * i], vel[2 * i])] = lab
            original[(p[2 * i + 1], vel[2 * i + 1])] = lab
    return _run(T, nxt, p, vel, origin, labels, original, t_target, max_flips, window)


def _horizontal(x: Fraction) -> Vec2:
    return Vec2(x, Fraction(0))


def _triangle_key(nxt, h):
    tri = (h, nxt[h], nxt[nxt[h]])
    m = tri.index(min(tri))
    return tri[m:] + tri[:m]


def _run(T, nxt, p, vel, origin, labels, original, t_target, max_flips, window):
    tau = QuadReal.from_rational(0)
    target = QuadReal.from_rational(t_target)
    stamp = {}
    heap = []
    counter = [0]

    def schedule(key):
        counter[0] += 1
        stamp[key] = counter[0]
        t = _degeneration_time(_area_poly(p, vel, key[0], key[1]), tau)
        if t is not None and t <= target:
            heapq.heappush(heap, (t, key[0], counter[0], key))

    seen = set()
    for h in range(len(nxt)):
        key = _triangle_key(nxt, h)
        if key not in seen:
            seen.add(key)
            schedule(key)

    collapse = {}
    for i in range(len(nxt) // 2):
        collapse[i] = _collapse_time(p[2 * i], vel[2 * i])

    log: list[FlipRecord] = []
    times: list[QuadReal] = []
    flipped_recent: list[int] = []

    def edge_name(i):
        lab = labels[i]
        if lab is not None:
            return lab
        return original.get((p[2 * i], vel[2 * i]), f"e{i}")

    def boundary(at: Fraction):
        names = sorted(edge_name(i) for i, s in collapse.items() if s is not None and s == at)
        return DeformationOutcome(HIT_BOUNDARY, QuadReal.from_rational(at), None, names, [], log)

    while True:
        while heap and stamp.get(heap[0][3]) != heap[0][2]:
            heapq.heappop(heap)
        next_flip = heap[0][0] if heap else None
        pending = [s for s in collapse.values() if s is not None and s > 0 and tau <= s]
        next_collapse = min(pending) if pending else None
        if next_collapse is not None and next_collapse <= t_target and (next_flip is None or next_flip >= next_collapse):
            return boundary(next_collapse)
        if next_flip is None:
            surface = _freeze(T, nxt, p, vel, origin, labels, t_target)
            return DeformationOutcome(COMPLETED, target, surface, [], [], log)
        when, _, _, key = heapq.heappop(heap)
        tau = when
        e = _flip_edge(p, vel, key, when)
        quad = (nxt[e], nxt[nxt[e]], nxt[e ^ 1], nxt[nxt[e ^ 1]])
        if (e ^ 1) in key:
            raise SurfaceError("degenerating triangle is glued to itself")
        other = _triangle_key(nxt, e ^ 1)
        flip_in_place(nxt, p, origin, e)
        vel[e] = vel[quad[3]] + vel[quad[0]]
        vel[e ^ 1] = -vel[e]
        labels[e >> 1] = None
        stamp.pop(key, None)
        stamp.pop(other, None)
        new_keys = [_triangle_key(nxt, e), _triangle_key(nxt, e ^ 1)]
        for nk in new_keys:
            sgn = when.sign_of_poly(*_area_poly(p, vel, nk[0], nk[1]))
            if sgn < 0:
                raise SurfaceError("flip produced a negatively oriented triangle")
            if sgn == 0:
                log.append(FlipRecord(when, e >> 1, quad))
                return DeformationOutcome(HIT_BOUNDARY, when, None, [edge_name(e >> 1)], [], log)
        for nk in new_keys:
            schedule(nk)
        collapse[e >> 1] = _collapse_time(p[e], vel[e])
        log.append(FlipRecord(when, e >> 1, quad))
        times.append(when)
        flipped_recent.append(e >> 1)
        if len(log) > max_flips:
            return _accumulation(when, log, flipped_recent[-window:], labels)
        if len(times) >= window and len(times) % window == 0 and _certified_decreasing(times[-window:]):
            return _accumulation(when, log, flipped_recent[-window:], labels)


def _accumulation(when, log, recent, labels):
    witness = sorted({labels[i] if labels[i] is not None else f"e{i}" for i in recent})
    return DeformationOutcome(ACCUMULATION, when, None, [], witness, log)


def _flip_edge(p, vel, key, when: QuadReal) -> int:
    """The edge opposite the vertex whose angle tends to pi."""
    e, e1, e2 = key
    # vertex between e and e2 (origin of e): outgoing e and -e2
    if when.sign_of_poly(*_dot_poly(p, vel, 1, e, -1, e2)) < 0:
        return e1
    if when.sign_of_poly(*_dot_poly(p, vel, -1, e, 1, e1)) < 0:
        return e2
    if when.sign_of_poly(*_dot_poly(p, vel, -1, e1, 1, e2)) < 0:
        return e
    raise SurfaceError("degenerate triangle has no straight angle")


def _freeze(T, nxt, p, vel, origin, labels, t):
    vec = [p[h] + vel[h] * t for h in range(len(p))]
    return TranslationSurface(nxt, vec, origin, labels, T.singularity_order)


def push(M: TranslationSurface, v, **limits) -> DeformationOutcome:
    return deform(M, v, 1, **limits)
