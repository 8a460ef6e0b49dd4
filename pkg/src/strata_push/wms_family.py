"""The Eierlegende Wollmilchsau, its SL(2,R) family and the explicit pushes.

Parameters ``(A, B, C)`` act by the matrix ``[[A, B], [C, (1+BC)/A]]``.
Edge labels ``a``..``h`` are the horizontal unit edges, ``alpha`` and
``beta`` the vertical sides of the upper and lower strips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .deform import Cocycle, validate_cocycle
from .exact_num import Mat2, Vec2, frac_mod, rat
from .surface_core import SurfaceError, TranslationSurface, apply_matrix, build_from_polygons

SINGULARITIES = ("red", "orange", "blue", "violet")
HORIZONTAL = ("a", "b", "c", "d", "e", "f", "g", "h")


class RegimeError(ValueError):
    pass


@dataclass(frozen=True)
class WmsParams:
    A: Fraction
    B: Fraction
    C: Fraction

    @classmethod
    def of(cls, A, B, C) -> "WmsParams":
        return cls(rat(A), rat(B), rat(C))

    def matrix(self) -> Mat2:
        if self.A <= 0:
            raise RegimeError("A must be positive")
        return Mat2(self.A, self.B, self.C, (1 + self.B * self.C) / self.A)


def _square(bottom: str, right: str, top: str, left: str) -> list[str]:
    return [bottom, right, top + "'", left + "'"]


def m_wms() -> TranslationSurface:
    """Eight unit squares in two horizontal strips of four."""
    faces = []
    periods = {}
    gluings = []
    labels = {}

    def edge(name, vec, label=True):
        periods[name] = vec
        periods[name + "'"] = (-vec[0], -vec[1])
        gluings.append((name, name + "'"))
        if not label:
            labels[name] = None

    for x in HORIZONTAL:
        edge(x, (1, 0))
    edge("alpha", (0, 1))
    edge("beta", (0, 1))
    for i in range(3):
        edge(f"u{i}", (0, 1), label=False)
        edge(f"l{i}", (0, 1), label=False)
    upper_bottom, upper_top = "abcd", "efgh"
    lower_bottom, lower_top = "fehg", "dcba"
    up_sides = ["alpha", "u0", "u1", "u2", "alpha"]
    lo_sides = ["beta", "l0", "l1", "l2", "beta"]
    for i in range(4):
        faces.append(_square(upper_bottom[i], up_sides[i + 1], upper_top[i], up_sides[i]))
        faces.append(_square(lower_bottom[i], lo_sides[i + 1], lower_top[i], lo_sides[i]))
    return build_from_polygons(
        faces,
        periods,
        gluings,
        singularity_order=["f", "beta'", "a", "alpha'"],
        singularity_names=list(SINGULARITIES),
        labels=labels,
    )


def m_abc(p: WmsParams) -> TranslationSurface:
    return apply_matrix(m_wms(), p.matrix())


# -- cocycles ----------------------------------------------------------------

_ORBIT_DATA = {
    "v0": {"a": 1, "c": -1, "alpha": "1/2", "beta": "1/2"},
    "v1": {"b": 1, "d": -1, "alpha": "1/2", "beta": "1/2"},
    "v2": {"e": 1, "g": -1, "alpha": "-1/2", "beta": "1/2"},
    "v3": {"f": 1, "h": -1, "alpha": "-1/2", "beta": "1/2"},
}


def named_cocycle(M: TranslationSurface, values: dict) -> Cocycle:
    """Labelled values, zero on unnamed labelled edges, solved on internal edges."""
    full = {lab: values.get(lab, 0) for lab in M.labels if lab is not None}
    return Cocycle.from_mapping(M, full)


def v0(M: TranslationSurface | None = None) -> Cocycle:
    M = M if M is not None else m_wms()
    return named_cocycle(M, _ORBIT_DATA["v0"])


@dataclass(frozen=True)
class DirOrbit:
    names: tuple[str, ...]
    vectors: tuple[dict, ...]

    def cocycles(self, M: TranslationSurface) -> list[Cocycle]:
        return [named_cocycle(M, v) for v in self.vectors]

    def __len__(self):
        return len(self.vectors)


def dir_orbit() -> DirOrbit:
    names, vectors = [], []
    for sgn, prefix in ((1, ""), (-1, "-")):
        for key, data in _ORBIT_DATA.items():
            names.append(prefix + key)
            vectors.append({k: rat(x) * sgn for k, x in data.items()})
    return DirOrbit(tuple(names), tuple(vectors))


F_CONDITIONS = (
    {"a": 1, "b": 1, "c": 1, "d": 1},
    {"e": 1, "f": 1, "g": 1, "h": 1},
    {"a": 2, "b": 1, "d": -1, "e": -1, "g": -1, "alpha": -2, "beta": -2},
)


def in_f_subspace(values: dict) -> bool:
    return all(sum(rat(values.get(k, 0)) * c for k, c in cond.items()) == 0 for cond in F_CONDITIONS)


def check_orbit(orbit: DirOrbit | None = None) -> bool:
    orbit = orbit or dir_orbit()
    M = m_wms()
    negs = {tuple(sorted((k, -v) for k, v in vec.items())) for vec in orbit.vectors}
    own = {tuple(sorted(vec.items())) for vec in orbit.vectors}
    return (
        len(orbit) == 8
        and negs == own
        and all(in_f_subspace(v) for v in orbit.vectors)
        and all(validate_cocycle(M, c) for c in orbit.cocycles(M))
    )


# -- two-strip presentations ---------------------------------------------------

def strip_surface(
    upper_chain: Sequence[str],
    lower_chain: Sequence[str],
    chain_periods: dict,
    upper_side: Vec2,
    lower_side: Vec2,
    top: Vec2,
) -> TranslationSurface:
    """Two polygons: an upper one with bottom chain ``upper_chain`` and top ``e..h``,
    a lower one with bottom ``f, e, h, g`` and top chain ``lower_chain``.

    Chains are read left to right; pieces with equal names are glued.
    """
    periods: dict = {}
    gluings = []

    def edge(name, vec):
        periods[name] = vec
        periods[name + "'"] = -vec
        gluings.append((name, name + "'"))

    for name in upper_chain:
        edge(name, chain_periods[name])
    for x in "efgh":
        edge(x, top)
    edge("alpha", upper_side)
    edge("beta", lower_side)
    upper = list(upper_chain) + ["alpha", "h'", "g'", "f'", "e'", "alpha'"]
    lower = ["f", "e", "h", "g", "beta"] + [x + "'" for x in reversed(lower_chain)] + ["beta'"]
    refs = ["f", "beta'", upper_chain[0], "alpha'"]
    try:
        return build_from_polygons([upper, lower], periods, gluings, refs, list(SINGULARITIES))
    except SurfaceError as err:
        if "named twice" not in str(err):
            raise
        return build_from_polygons([upper, lower], periods, gluings)


def _regime(p: WmsParams) -> None:
    if not (p.A > 0 and p.B > Fraction(-1, 2) and 0 < abs(p.C) < 2):
        raise RegimeError("parameters outside the closed-form regime (A>0, B>-1/2, 0<|C|<2)")


def n_abc_closed_form(p: WmsParams) -> TranslationSurface:
    """The push of ``M_{A,B,C}`` along v0, written down directly."""
    _regime(p)
    A, B, C = p.A, p.B, p.C
    per = {
        "a": Vec2(A + 1, C),
        "b": Vec2(A, C),
        "c": Vec2(A - 1, C),
        "d": Vec2(A, C),
    }
    side = Vec2(B + Fraction(1, 2), (1 + B * C) / A)
    top = Vec2(A, C)
    plain_upper = (["a", "b", "c", "d"], side)
    plain_lower = (["d", "c", "b", "a"], side)
    # rotating the chains moves the side edges onto other saddle connections
    turned_upper = (["b", "c", "d", "a"], side - per["a"])
    turned_lower = (["b", "a", "d", "c"], side + per["d"] + per["c"])
    uppers = [plain_upper, turned_upper] if C > 0 else [turned_upper, plain_upper]
    lowers = [plain_lower, turned_lower] if C > 0 else [turned_lower, plain_lower]
    last = None
    for up in uppers:
        for lo in lowers:
            try:
                return strip_surface(up[0], lo[0], per, up[1], lo[1], top)
            except SurfaceError as err:
                last = err
    raise RegimeError(f"no valid presentation: {last}")


# -- limits C -> 0 -------------------------------------------------------------

IN_STRATUM = "in_stratum"
SADDLE_COLLAPSE = "saddle_collapse"
CYLINDER_DEGENERATION = "cylinder_degeneration"


@dataclass
class LimitResult:
    kind: str
    lengths: dict = field(default_factory=dict)
    surface: TranslationSurface | None = None

    @property
    def on_boundary(self) -> bool:
        return self.kind != IN_STRATUM


def limit_lengths(A, sign: int) -> tuple[list[str], list[str], dict, Vec2 | None]:
    """Chain names (upper, lower), horizontal lengths and an optional side shift."""
    A = rat(A)
    half = Fraction(1, 2)
    if half < A <= 1:
        m = frac_mod(1 - A, 2 * A - 1)
        if sign > 0:
            lengths = {"a'": A + 1, "b'": m, "c'": 2 * A - 1 - m, "d": A}
            return ["a'", "b'", "c'", "d"], ["d", "c'", "b'", "a'"], lengths, None
        lengths = {"a": A + 1, "b": A, "c'": 2 * A - 1 - m, "d'": m}
        return ["a", "b", "c'", "d'"], ["d'", "c'", "b", "a"], lengths, None
    if Fraction(1, 5) <= A < half:
        m = frac_mod(A, 1 - 2 * A)
        if sign > 0:
            lengths = {"a'": 1 - 2 * A - m, "b'": m, "c'": 5 * A - 1, "d": A}
            return ["a'", "b'", "c'", "d"], ["d", "c'", "b'", "a'"], lengths, None
        lengths = {"b": A, "c'": 5 * A - 1, "d'": m, "a'": 1 - 2 * A - m}
        return ["b", "c'", "d'", "a'"], ["a'", "d'", "c'", "b"], lengths, Vec2(-(A + 1), Fraction(0))
    raise RegimeError("A outside [1/5, 1]")


def n_half(B) -> TranslationSurface:
    """The limit at A = 1/2: the horizontal cylinder has collapsed."""
    B = rat(B)
    per = {"a": Vec2(Fraction(3, 2), Fraction(0)), "b": Vec2(Fraction(1, 2), Fraction(0))}
    side = Vec2(B + Fraction(1, 2), Fraction(2))
    return strip_surface(["a", "b"], ["b", "a"], per, side, side, Vec2(Fraction(1, 2), Fraction(0)))


def n_limit(A, B, sign: int) -> LimitResult:
    A, B = rat(A), rat(B)
    if not Fraction(1, 5) <= A <= 1:
        raise RegimeError("A outside [1/5, 1]")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if A == Fraction(1, 2):
        return LimitResult(CYLINDER_DEGENERATION, {}, n_half(B))
    upper, lower, lengths, shift = limit_lengths(A, sign)
    if any(v == 0 for v in lengths.values()):
        return LimitResult(SADDLE_COLLAPSE, lengths, None)
    side = Vec2(B + Fraction(1, 2), 1 / A)
    if shift is not None:
        side = side + shift
    per = {k: Vec2(v, Fraction(0)) for k, v in lengths.items()}
    surface = strip_surface(upper, lower, per, side, side, Vec2(A, Fraction(0)))
    return LimitResult(IN_STRATUM, lengths, surface)


# -- the sets U and W ----------------------------------------------------------

def u_set(max_k: int) -> list[Fraction]:
    out = [Fraction(1, 5), Fraction(1, 2)]
    for k in range(2, max_k + 1):
        out += [Fraction(k, 2 * k + 1), Fraction(k, 2 * k - 1)]
    seen = []
    for x in out:
        if x not in seen:
            seen.append(x)
    return seen


def closed_form_accident(A) -> bool:
    """Membership of ``A`` in the listed accident parameters (k >= 2 in the two families)."""
    A = rat(A)
    if A in (Fraction(1, 5), Fraction(1, 2)):
        return True
    for denom_shift in (1, -1):
        # A = k / (2k + s)  <=>  k = s*A / (1 - 2A)
        if A == Fraction(1, 2):
            continue
        k = denom_shift * A / (1 - 2 * A)
        if k.denominator == 1 and k >= 2:
            return True
    return False


def in_region_w(p: WmsParams) -> bool:
    A, B, C = p.A, p.B, p.C
    third = Fraction(1, 3)
    return Fraction(1, 5) < A < 1 and -A * A / 3 < B < A * A / 3 and -third < C < third


def n_half_with_cylinder(B, C) -> TranslationSurface:
    """``N_{1/2,B,C}`` (C > 0) re-cut so the thin cylinder around ``c`` is its own face.

    The notch triangles on either side of ``b`` are split off along vertical
    chords ``k`` and ``m`` and glued along ``b``; what remains of ``b`` is interior.
    """
    B, C = rat(B), rat(C)
    p = WmsParams.of(Fraction(1, 2), B, C)
    _regime(p)
    if C <= 0:
        raise RegimeError("the cut presentation needs C > 0")
    A = p.A
    vecs = {
        "a": Vec2(A + 1, C),
        "c": Vec2(A - 1, C),
        "d": Vec2(A, C),
        "alpha": Vec2(B + Fraction(1, 2), (1 + B * C) / A),
        "beta": Vec2(B + Fraction(1, 2), (1 + B * C) / A),
        "k": Vec2(Fraction(0), -2 * C),
        "m": Vec2(Fraction(0), 2 * C),
    }
    for x in "efgh":
        vecs[x] = Vec2(A, C)
    periods = {}
    gluings = []
    for name, v in vecs.items():
        periods[name] = v
        periods[name + "'"] = -v
        gluings.append((name, name + "'"))
    upper = ["a", "k'", "d", "alpha", "h'", "g'", "f'", "e'", "alpha'"]
    lower = ["f", "e", "h", "g", "beta", "a'", "m'", "d'", "beta'"]
    thin = ["c", "k", "c'", "m"]
    return build_from_polygons(
        [upper, lower, thin],
        periods,
        gluings,
        ["f", "beta'", "a", "alpha'"],
        list(SINGULARITIES),
    )
