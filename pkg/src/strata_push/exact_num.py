"""Exact scalars and small linear algebra.

Rationals are plain :class:`fractions.Fraction`. Roots of rational
quadratics are :class:`QuadReal`, stored as ``r + s*sqrt(D)`` with exact
rational ``r``, ``s`` and ``D`` so that ordering never needs floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import NamedTuple, Union

Rat = Fraction
Scalar = Union[Fraction, int]


def rat(value) -> Fraction:
    """Parse ``"p/q"``, ints and Fractions into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def rat_str(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def sign(x) -> int:
    return (x > 0) - (x < 0)


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sign_with_root(p: Fraction, q: Fraction, d: Fraction) -> int:
    """Sign of ``p + q*sqrt(d)`` for rational ``p, q`` and ``d >= 0``."""
    sp, sq = sign(p), sign(q) if d else 0
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    diff = p * p - q * q * d
    if diff > 0:
        return sp
    if diff < 0:
        return sq
    return 0


class QuadReal:
    """A real root of ``a*x**2 + b*x + c`` with rational coefficients.

    ``root`` selects ``"lower"`` or ``"upper"`` when there are two roots.
    Instances are immutable and compare exactly with each other and with
    rationals.
    """

    __slots__ = ("a", "b", "c", "root", "r", "s", "d", "_interval")

    def __init__(self, a, b, c, root: str = "lower"):
        a, b, c = rat(a), rat(b), rat(c)
        if root not in ("lower", "upper"):
            raise ValueError("root must be 'lower' or 'upper'")
        self.a, self.b, self.c, self.root = a, b, c, root
        self._interval = None
        if a == 0:
            if b == 0:
                raise ValueError("degenerate event polynomial")
            self.r, self.s, self.d = -c / b, Fraction(0), Fraction(0)
            return
        disc = b * b - 4 * a * c
        if disc < 0:
            raise ValueError("quadratic has no real root")
        shift = Fraction(1, 2 * abs(a.numerator)) * a.denominator
        if root == "lower":
            shift = -shift
        centre = -b / (2 * a)
        exact = rational_sqrt(disc)
        if exact is not None:
            self.r, self.s, self.d = centre + shift * exact, Fraction(0), Fraction(0)
        else:
            self.r, self.s, self.d = centre, shift, disc

    @classmethod
    def from_rational(cls, q) -> "QuadReal":
        q = rat(q)
        return cls(0, 1, -q)

    @property
    def is_rational(self) -> bool:
        return self.s == 0

    def as_rational(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("value is irrational")
        return self.r

    def __float__(self) -> float:
        return float(self.r) + float(self.s) * float(self.d) ** 0.5

    def __repr__(self) -> str:
        if self.is_rational:
            return f"QuadReal({rat_str(self.r)})"
        return f"QuadReal({rat_str(self.r)} + {rat_str(self.s)}*sqrt({rat_str(self.d)}))"

    def __hash__(self):
        if self.is_rational:
            return hash(self.r)
        return hash((self.r, self.s * self.s * self.d, sign(self.s)))

    def interval(self, bits: int = 32) -> tuple[Fraction, Fraction]:
        """Rational interval of width at most ``2**-bits`` (times |s|) around the value."""
        if self.is_rational:
            return self.r, self.r
        if self._interval is not None and self._interval[0] >= bits:
            return self._interval[1]
        n, den = self.d.numerator, self.d.denominator
        scale = 1 << bits
        root = isqrt(n * den * scale * scale)
        lo = Fraction(root, den * scale)
        hi = Fraction(root + 1, den * scale)
        ends = sorted((self.r + self.s * lo, self.r + self.s * hi))
        self._interval = (bits, (ends[0], ends[1]))
        return ends[0], ends[1]

    def sign_of_poly(self, p2, p1, p0) -> int:
        """Exact sign of ``p2*x**2 + p1*x + p0`` at this value."""
        p2, p1, p0 = rat(p2), rat(p1), rat(p0)
        if self.is_rational:
            x = self.r
            return sign((p2 * x + p1) * x + p0)
        r, s, d = self.r, self.s, self.d
        rational_part = p2 * (r * r + s * s * d) + p1 * r + p0
        root_part = 2 * p2 * r * s + p1 * s
        return sign_with_root(rational_part, root_part, d)

    def _cmp(self, other) -> int:
        if not isinstance(other, QuadReal):
            other = QuadReal.from_rational(other)
        return quad_compare(self, other)

    def __eq__(self, other):
        if not isinstance(other, (QuadReal, Fraction, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def quad_compare(x: QuadReal, y: QuadReal) -> int:
    """Exact three-way comparison: -1, 0 or 1."""
    c = x.r - y.r
    u_s, u_d = x.s, x.d
    w_s, w_d = y.s, y.d
    su, sw = sign(u_s), sign(w_s)
    # sign of u - w where u = u_s*sqrt(u_d), w = w_s*sqrt(w_d)
    if su == sw and su != 0:
        sq = su * sign(u_s * u_s * u_d - w_s * w_s * w_d)
    else:
        sq = sign(su - sw)
    sc = sign(c)
    if sq == 0:
        return sc
    if sc == 0 or sc == sq:
        return sq
    k = u_s * u_s * u_d + w_s * w_s * w_d - c * c
    l_coef = -2 * u_s * w_s
    return sq * sign_with_root(k, l_coef, u_d * w_d)


def quadratic_roots(a, b, c) -> list[QuadReal]:
    """Real roots of a non-zero polynomial of degree at most two, ascending."""
    a, b, c = rat(a), rat(b), rat(c)
    if a == 0:
        if b == 0:
            if c == 0:
                raise ValueError("degenerate event polynomial")
            return []
        return [QuadReal(0, b, c)]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    if disc == 0:
        return [QuadReal(a, b, c, "lower")]
    return [QuadReal(a, b, c, "lower"), QuadReal(a, b, c, "upper")]


def earliest_positive_root(a, b, c, t_max) -> QuadReal | None:
    """Smallest root in ``(0, t_max]`` of ``a*t**2 + b*t + c``."""
    t_max = rat(t_max)
    for root in quadratic_roots(a, b, c):
        if root > 0 and root <= t_max:
            return root
    return None


class Vec2(NamedTuple):
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x, y) -> "Vec2":
        return cls(rat(x), rat(y))

    def __add__(self, other):
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def cross(self, other) -> Fraction:
        return self.x * other.y - self.y * other.x

    def dot(self, other) -> Fraction:
        return self.x * other.x + self.y * other.y

    def norm2(self) -> Fraction:
        return self.x * self.x + self.y * self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0


ZERO = Vec2(Fraction(0), Fraction(0))


class Mat2(NamedTuple):
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def of(cls, a, b, c, d) -> "Mat2":
        return cls(rat(a), rat(b), rat(c), rat(d))

    @classmethod
    def identity(cls) -> "Mat2":
        return cls.of(1, 0, 0, 1)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def inverse(self) -> "Mat2":
        dt = det(self)
        if dt == 0:
            raise ZeroDivisionError("singular matrix")
        return Mat2(self.d / dt, -self.b / dt, -self.c / dt, self.a / dt)


def mat_apply(g: Mat2, v: Vec2) -> Vec2:
    return Vec2(g.a * v.x + g.b * v.y, g.c * v.x + g.d * v.y)


def mat_mul(g: Mat2, h: Mat2) -> Mat2:
    return Mat2(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def det(g: Mat2) -> Fraction:
    return g.a * g.d - g.b * g.c


def horocycle(s) -> Mat2:
    """Upper unipotent ``[[1, s], [0, 1]]``."""
    return Mat2.of(1, s, 0, 1)


def diagonal(k) -> Mat2:
    """``[[k, 0], [0, 1/k]]``, a rational stand-in for the geodesic flow."""
    k = rat(k)
    return Mat2(k, Fraction(0), Fraction(0), 1 / k)


def frac_mod(x: Fraction, y: Fraction) -> Fraction:
    """Representative of ``x mod y`` in ``[0, y)``."""
    if y <= 0:
        raise ValueError("modulus must be positive")
    return x - y * (x // y)
