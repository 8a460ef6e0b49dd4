"""Shapes of a shrinking simple cylinder and the twist classifier in the (A, C) plane."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .exact_num import Vec2, frac_mod, rat, rat_str, rational_sqrt
from .periodic import Cylinder, collapse_cylinder
from .surface_core import SurfaceError, TranslationSurface

HALF = Fraction(1, 2)
MIN_SAMPLES = 8


def primitive_direction(v: Vec2) -> tuple[int, int]:
    """The primitive integer vector pointing along a non-zero rational vector."""
    if v.is_zero():
        raise ValueError("zero vector has no direction")
    den = lcm(v.x.denominator, v.y.denominator)
    x, y = int(v.x * den), int(v.y * den)
    g = gcd(x, y)
    return x // g, y // g


@dataclass(frozen=True)
class CylinderInvariants:
    direction: tuple[int, int]
    h_squared: Fraction
    modulus: Fraction
    twist_tilde: Fraction

    @property
    def twist(self) -> Fraction:
        return frac_mod(self.twist_tilde, Fraction(1))

    def height(self) -> float:
        return float(self.h_squared) ** 0.5

    def to_json(self) -> dict:
        return {
            "direction": list(self.direction),
            "h_squared": rat_str(self.h_squared),
            "modulus": rat_str(self.modulus),
            "twist_tilde": rat_str(self.twist_tilde),
            "twist": rat_str(self.twist),
        }


def simple_cylinder_invariants(X, Y) -> CylinderInvariants:
    """Invariants of the cylinder with core ``X`` and crossing vector ``Y``.

    ``Y`` goes from the singularity on one boundary to the one on the other.
    If ``X`` and ``Y`` are positively oriented the crossing is reversed so the
    modulus comes out positive.
    """
    X = Vec2(rat(X[0]), rat(X[1]))
    Y = Vec2(rat(Y[0]), rat(Y[1]))
    if X.is_zero():
        raise ValueError("core vector must be non-zero")
    wedge = X.cross(Y)
    if wedge == 0:
        raise ValueError("degenerate cylinder")
    if wedge > 0:
        Y, wedge = -Y, -wedge
    n2 = X.norm2()
    return CylinderInvariants(primitive_direction(X), wedge * wedge / n2, -wedge / n2, X.dot(Y) / n2)


def phase_vectors(A, C) -> tuple[Vec2, Vec2]:
    A, C = rat(A), rat(C)
    return Vec2(2 * A - 1, 2 * C), Vec2(1 - A, -C)


def wms_phase_invariants(A, C) -> CylinderInvariants:
    A, C = rat(A), rat(C)
    if A == HALF and C == 0:
        raise ValueError("the point (1/2, 0) is excluded")
    return simple_cylinder_invariants(*phase_vectors(A, C))


def phase_closed_forms(A, C) -> tuple[Fraction, Fraction, Fraction]:
    """(m, t~, h^2) written as rational functions of A and C."""
    A, C = rat(A), rat(C)
    D = (2 * A - 1) ** 2 + 4 * C * C
    return C / D, ((2 * A - 1) * (1 - A) - 2 * C * C) / D, C * C / D


# -- level sets -------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseLocus:
    """``half_lines``: rays from (1/2, 0) with ``slope2`` = slope squared.
    ``circle``: full circle. ``half_circle``: its upper half. ``vertical``: the ray A = 1/2.
    """

    kind: str
    center: tuple[Fraction, Fraction] | None = None
    radius: Fraction | None = None
    slope2: Fraction | None = None

    @property
    def endpoints(self) -> tuple[tuple[Fraction, Fraction], ...]:
        if self.kind != "half_circle":
            return ()
        a, _ = self.center
        return ((a - self.radius, Fraction(0)), (a + self.radius, Fraction(0)))

    def contains(self, A, C) -> bool:
        A, C = rat(A), rat(C)
        if C <= 0:
            return False
        u = A - HALF
        if self.kind == "vertical":
            return u == 0
        if self.kind == "half_lines":
            return C * C == self.slope2 * u * u
        a, b = self.center
        return (A - a) ** 2 + (C - b) ** 2 == self.radius ** 2

    def sample(self, n: int = 8) -> list[tuple[Fraction, Fraction]]:
        """Rational points with C > 0, from a rational parametrisation."""
        out = []
        if self.kind == "vertical":
            return [(HALF, Fraction(k + 1, n)) for k in range(n)]
        if self.kind == "half_lines":
            root = rational_sqrt(self.slope2)
            if root is None:
                raise ValueError("slope is irrational; no rational samples")
            for k in range(1, n + 1):
                u = Fraction(1, 4 * k) if k % 2 else -Fraction(1, 4 * k)
                out.append((HALF + u, root * abs(u)))
            return out
        a, b = self.center
        r = self.radius
        # q in (0, 1) keeps the point above the centre, so C > 0 on both circle kinds
        for k in range(1, n + 1):
            q = Fraction(k, n + 1)
            x = r * 2 * q / (1 + q * q)
            y = b + r * (1 - q * q) / (1 + q * q)
            out.append((a + x if k % 2 else a - x, y))
        return out


    def approach(self, n: int = 12) -> list[tuple[Fraction, Fraction]]:
        """Rational points of the locus marching monotonically towards (1/2, 0)."""
        if self.kind == "vertical":
            return [(HALF, Fraction(1, 2 ** k)) for k in range(n)]
        if self.kind == "half_lines":
            root = rational_sqrt(self.slope2)
            if root is None:
                raise ValueError("slope is irrational; no rational samples")
            return [(HALF + Fraction(1, 2 ** (k + 2)), root / 2 ** (k + 2)) for k in range(n)]
        a, b = self.center
        r = self.radius
        out = []
        for k in range(1, n + 1):
            q = Fraction(1, 2 ** k)
            along, across = r * (1 - q * q) / (1 + q * q), r * 2 * q / (1 + q * q)
            if self.kind == "circle":
                out.append((a + across, b - along))
            else:
                out.append((a - along, across))
        return out

def level_locus(quantity: str, value) -> PhaseLocus:
    value = rat(value)
    if quantity == "h":
        if not 0 <= value < HALF:
            raise ValueError("h must lie in [0, 1/2)")
        return PhaseLocus("half_lines", slope2=4 * value * value / (1 - 4 * value * value))
    if quantity == "m":
        if value <= 0:
            raise ValueError("m must be positive")
        R = 1 / (8 * value)
        return PhaseLocus("circle", (HALF, R), R)
    if quantity in ("t_tilde", "t"):
        if value == -HALF:
            return PhaseLocus("vertical")
        r = 1 / (4 * (1 + 2 * value))
        return PhaseLocus("half_circle", (HALF + r, Fraction(0)), abs(r))
    raise ValueError(f"unknown quantity {quantity!r}")


def ray_circle_sequence(s, count: int) -> list[tuple[Fraction, Fraction]]:
    """Points where the ray of slope ``s`` meets the half-circles of integer twist 1, 2, ..."""
    s = rat(s)
    out = []
    for n in range(1, count + 1):
        u = 1 / (2 * (1 + s * s) * (2 * n + 1))
        out.append((HALF + u, s * u))
    return out


# -- boundary shapes and the classifier ---------------------------------------------

@dataclass(frozen=True)
class BoundaryShape:
    kind: str  # "iet_slit", "infinitesimal_cylinder", "thin_cylinder"
    direction: tuple[int, int]
    twist: Fraction
    modulus: Fraction | None = None
    h_squared: Fraction | None = None  # thin cylinders only; None there means infinite length
    exact: bool = True

    def to_json(self) -> dict:
        out = {"kind": self.kind, "direction": list(self.direction), "twist": rat_str(self.twist), "exact": self.exact}
        if self.modulus is not None:
            out["modulus"] = rat_str(self.modulus)
        if self.kind == "thin_cylinder":
            out["h_squared"] = "inf" if self.h_squared is None else rat_str(self.h_squared)
        return out


@dataclass(frozen=True)
class PathClass:
    kind: str  # "converges_to" or "twist_divergent"
    shape: BoundaryShape | None = None
    witness: tuple[int, int] | None = None  # indices of two tail samples with far-apart twists


def _circle_gap(a: Fraction, b: Fraction) -> Fraction:
    d = frac_mod(a - b, Fraction(1))
    return min(d, 1 - d)


def _simplest_within(x: Fraction, tol: Fraction) -> Fraction:
    d = 1
    while abs(x.limit_denominator(d) - x) > tol:
        d *= 2
    return x.limit_denominator(d)


def _limit(values: Sequence[Fraction]) -> tuple[Fraction, bool]:
    """Limit of a convergent tail: exact if the tail is constant, else an Aitken estimate
    snapped to the simplest rational within the last step."""
    if all(v == values[-1] for v in values):
        return values[-1], True
    a, b, c = values[-3:]
    denom = c - 2 * b + a
    guess = c - (c - b) ** 2 / denom if denom else c
    return _simplest_within(guess, abs(c - b)), False


def _increments_grow(xs: Sequence[Fraction]) -> bool:
    steps = [b - a for a, b in zip(xs, xs[1:])]
    return all(d > 0 for d in steps) and all(e >= d for d, e in zip(steps, steps[1:]))


def _monotone(xs) -> int:
    pairs = list(zip(xs, xs[1:]))
    if all(b > a for a, b in pairs):
        return 1
    if all(b < a for a, b in pairs):
        return -1
    return 0


def classify_invariants(invs: Sequence[CylinderInvariants]) -> PathClass:
    if len(invs) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    tail = list(invs[len(invs) // 2:])
    offset = len(invs) - len(tail)
    tt = [i.twist_tilde for i in tail]
    if _monotone([abs(x) for x in tt]) == 1 and abs(tt[-1] - tt[0]) >= 1:
        for a in range(len(tail)):
            for b in range(a + 1, len(tail)):
                if _circle_gap(tt[a], tt[b]) >= Fraction(1, 4):
                    return PathClass("twist_divergent", witness=(offset + a, offset + b))
    t_lim, t_exact = _limit(tt)
    t_lim = frac_mod(t_lim, Fraction(1))
    dir_lim, d_exact = _limit_direction(tail)
    ms = [i.modulus for i in tail]
    if _increments_grow(ms):
        hs = [i.h_squared for i in tail]
        # an unbounded height is stored as None: the thin cylinder of infinite length
        h_lim, h_exact = (None, True) if _increments_grow(hs) else _limit(hs)
        shape = BoundaryShape("thin_cylinder", dir_lim, t_lim, None, h_lim, t_exact and d_exact and h_exact)
    elif _increments_grow([1 / m for m in ms]):
        shape = BoundaryShape("iet_slit", dir_lim, t_lim, None, None, t_exact and d_exact)
    else:
        m_lim, m_exact = _limit(ms)
        shape = BoundaryShape("infinitesimal_cylinder", dir_lim, t_lim, m_lim, None, t_exact and d_exact and m_exact)
    return PathClass("converges_to", shape)


def _limit_direction(tail: Sequence[CylinderInvariants]) -> tuple[tuple[int, int], bool]:
    dirs = [i.direction for i in tail]
    if all(d == dirs[-1] for d in dirs):
        return dirs[-1], True
    x, y = dirs[-1]
    if abs(y) >= abs(x):
        s, _ = _limit([Fraction(a, b) for a, b in dirs])
        v = Vec2(s, Fraction(1)) if y > 0 else Vec2(-s, Fraction(-1))
    else:
        s, _ = _limit([Fraction(b, a) for a, b in dirs])
        v = Vec2(Fraction(1), s) if x > 0 else Vec2(Fraction(-1), -s)
    return primitive_direction(v), False


def classify_path(path: Sequence[tuple]) -> PathClass:
    """Classify a sampled approach to (1/2, 0) with C > 0."""
    pts = [(rat(a), rat(c)) for a, c in path]
    if len(pts) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    if any(c <= 0 for _, c in pts):
        raise ValueError("samples must have C > 0")
    dist = [(a - HALF) ** 2 + c * c for a, c in pts]
    if _monotone(dist) != -1:
        raise ValueError("samples must approach (1/2, 0) monotonically")
    return classify_invariants([wms_phase_invariants(a, c) for a, c in pts])


# -- detaching a simple cylinder ------------------------------------------------------

def is_simple(M: TranslationSurface, cyl: Cylinder) -> bool:
    """Each boundary is one saddle connection, and the two boundaries carry different singularities."""
    if cyl.face is None or len(cyl.bottom) != 1 or len(cyl.top) != 1:
        return False
    cyc = M.faces()[cyl.face]
    i, j = cyc.index(cyl.side), cyc.index(cyl.side ^ 1)
    bottom = cyc[(j + 1) % len(cyc)]
    top = cyc[(i + 1) % len(cyc)]
    return M.origin[bottom] != M.origin[top]


def detach_cylinder(M: TranslationSurface, cyl: Cylinder) -> tuple[TranslationSurface, CylinderInvariants]:
    if not is_simple(M, cyl):
        raise SurfaceError("cylinder is not simple")
    inv = simple_cylinder_invariants(cyl.core, -cyl.span)
    return collapse_cylinder(M, cyl), inv
