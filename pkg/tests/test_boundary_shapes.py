import random
from fractions import Fraction as F

import pytest
import sympy
from conftest import stacked_torus
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_push.boundary_shapes import (
    CylinderInvariants,
    classify_invariants,
    classify_path,
    detach_cylinder,
    is_simple,
    level_locus,
    phase_closed_forms,
    primitive_direction,
    ray_circle_sequence,
    simple_cylinder_invariants,
    wms_phase_invariants,
)
from strata_push.exact_num import Vec2
from strata_push.periodic import cylinder_faces, face_cylinder
from strata_push.surface_core import (
    SurfaceError,
    area,
    parallelogram_torus,
    stratum_signature,
    translation_equivalent,
)
from strata_push.wms_family import m_wms, n_half_with_cylinder, n_limit

phase_points = st.tuples(
    st.fractions(min_value=-2, max_value=3, max_denominator=40),
    st.fractions(min_value=F(1, 40), max_value=2, max_denominator=40),
)


def as_tuple(inv):
    return inv.modulus, inv.twist_tilde, inv.h_squared


def test_invariant_examples():
    half_square = simple_cylinder_invariants((F(1, 2), F(1, 2)), (F(1, 4), F(-1, 4)))
    assert as_tuple(half_square) == (F(1, 2), 0, F(1, 8))
    assert as_tuple(simple_cylinder_invariants((1, 0), (0, -1))) == (1, 0, 1)
    sheared = simple_cylinder_invariants((1, 0), (F(1, 2), -1))
    assert (sheared.modulus, sheared.twist_tilde, sheared.twist) == (1, F(1, 2), F(1, 2))


def test_orientation_is_normalised():
    a = simple_cylinder_invariants((1, 0), (F(1, 3), -2))
    b = simple_cylinder_invariants((1, 0), (F(-1, 3), 2))
    assert a == b and a.modulus == 2


def test_degenerate_cylinder_is_rejected():
    with pytest.raises(ValueError, match="degenerate cylinder"):
        simple_cylinder_invariants((1, 1), (2, 2))
    with pytest.raises(ValueError):
        simple_cylinder_invariants((0, 0), (1, 0))


def test_primitive_direction():
    assert primitive_direction(Vec2.of(F(2, 3), F(4, 3))) == (1, 2)
    assert primitive_direction(Vec2.of(-3, 0)) == (-1, 0)


def test_phase_examples():
    inv = wms_phase_invariants(F(3, 4), F(1, 4))
    assert (inv.modulus, inv.twist_tilde) == (F(1, 2), 0)
    for c in (F(1, 7), F(2), F(1, 1000)):
        assert wms_phase_invariants(F(1, 2), c).twist_tilde == F(-1, 2)
    with pytest.raises(ValueError):
        wms_phase_invariants(F(1, 2), 0)


def symbolic_invariants():
    A, C = sympy.symbols("A C", positive=True)
    X = sympy.Matrix([2 * A - 1, 2 * C])
    Y = sympy.Matrix([1 - A, -C])
    wedge = X[0] * Y[1] - X[1] * Y[0]
    n2 = X.dot(X)
    return (A, C), (-wedge / n2, X.dot(Y) / n2, wedge**2 / n2)


SYMBOLIC = symbolic_invariants()


def test_closed_forms_against_symbolic_oracle():
    (A, C), exprs = SYMBOLIC
    rng = random.Random(5)
    for _ in range(100):
        a = F(rng.randint(-80, 120), rng.randint(1, 40))
        c = F(rng.randint(1, 80), rng.randint(1, 40))
        if (a, c) == (F(1, 2), 0):
            continue
        oracle = tuple(F(str(e.subs({A: sympy.Rational(a), C: sympy.Rational(c)}))) for e in exprs)
        assert as_tuple(wms_phase_invariants(a, c)) == oracle == phase_closed_forms(a, c)


@settings(max_examples=100, deadline=None)
@given(phase_points)
def test_invariants_match_closed_forms(point):
    a, c = point
    assert as_tuple(wms_phase_invariants(a, c)) == phase_closed_forms(a, c)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=F(1, 10), max_value=5, max_denominator=10), st.integers(1, 40), st.integers(1, 40))
def test_height_is_constant_on_rays(s, k1, k2):
    u1, u2 = F(1, k1), F(1, k2)
    h1 = wms_phase_invariants(F(1, 2) + u1, s * u1).h_squared
    h2 = wms_phase_invariants(F(1, 2) + u2, s * u2).h_squared
    assert h1 == h2
    assert level_locus("h", 0).slope2 == 0


def test_height_locus_slope():
    s = F(3, 4)
    h2 = wms_phase_invariants(F(1, 2) + F(1, 5), s * F(1, 5)).h_squared
    assert h2 == s * s / (4 * (1 + s * s))
    locus = level_locus("h", F(3, 10))
    assert locus.slope2 == s * s
    assert locus.contains(F(1, 2) + F(1, 8), s / 8)


@pytest.mark.parametrize("m", [F(1, 2), F(3), F(1, 10)])
def test_modulus_circle(m):
    locus = level_locus("m", m)
    assert locus.kind == "circle"
    assert locus.center == (F(1, 2), 1 / (8 * m)) and locus.radius == 1 / (8 * m)
    pts = locus.sample(8)
    assert len(pts) >= 8
    for a, c in pts:
        assert locus.contains(a, c)
        assert wms_phase_invariants(a, c).modulus == m


def test_twist_half_circles():
    zero = level_locus("t_tilde", 0)
    assert zero.kind == "half_circle" and zero.endpoints == ((F(1, 2), 0), (F(1), 0))
    one = level_locus("t_tilde", 1)
    assert {F(1, 2), F(2, 3)} == {p[0] for p in one.endpoints}
    assert level_locus("t_tilde", F(-1, 2)).kind == "vertical"


@pytest.mark.parametrize("t", [F(0), F(1), F(3), F(-1, 4), F(-2), F(5, 3)])
def test_twist_is_constant_on_its_half_circle(t):
    locus = level_locus("t_tilde", t)
    for a, c in locus.sample(10):
        assert c > 0
        assert wms_phase_invariants(a, c).twist_tilde == t


def test_loci_reject_bad_values():
    with pytest.raises(ValueError):
        level_locus("h", F(1, 2))
    with pytest.raises(ValueError):
        level_locus("m", 0)
    with pytest.raises(ValueError):
        level_locus("width", 1)


def test_non_spiraling_half_circle():
    out = classify_path(level_locus("t_tilde", 0).approach(14))
    assert out.kind == "converges_to"
    shape = out.shape
    assert shape.kind == "thin_cylinder"
    assert shape.direction == (0, 1) and shape.twist == 0 and shape.h_squared == F(1, 4)


def test_spiraling_ray():
    s = F(3, 4)
    path = [(F(1, 2) + F(1, 2**k), s / 2**k) for k in range(1, 15)]
    out = classify_path(path)
    assert out.kind == "twist_divergent"
    i, j = out.witness
    ti = wms_phase_invariants(*path[i]).twist
    tj = wms_phase_invariants(*path[j]).twist
    assert min(abs(ti - tj), 1 - abs(ti - tj)) >= F(1, 4)


def test_ray_circle_subsequence_converges():
    s = F(3, 4)
    pts = ray_circle_sequence(s, 12)
    for n, (a, c) in enumerate(pts, start=1):
        inv = wms_phase_invariants(a, c)
        assert inv.twist_tilde == n and c == s * (a - F(1, 2))
    out = classify_path(pts)
    assert out.kind == "converges_to"
    assert out.shape.kind == "thin_cylinder"
    assert out.shape.direction == (4, 3) and out.shape.twist == 0
    assert out.shape.h_squared == s * s / (4 * (1 + s * s)) == F(9, 100)


def test_vertical_ray():
    out = classify_path([(F(1, 2), F(1, 2**k)) for k in range(1, 12)])
    assert out.kind == "converges_to" and out.shape.twist == F(1, 2)


def test_classifier_needs_enough_good_samples():
    with pytest.raises(ValueError):
        classify_path([(F(1, 2) + F(1, k), F(1, k)) for k in range(1, 5)])
    with pytest.raises(ValueError):
        classify_path([(F(1, 2) + F(1, k), F(-1, k)) for k in range(1, 12)])
    with pytest.raises(ValueError):
        classify_path([(F(1, 2) + F(1, k), F(1, k)) for k in range(12, 1, -1)])


def fixed_shape_family(moduli, twist=F(1, 3)):
    return [CylinderInvariants((1, 0), m * m, m, twist) for m in moduli]


def test_small_modulus_gives_iet_slit():
    out = classify_invariants(fixed_shape_family([F(1, 2**k) for k in range(12)]))
    assert out.shape.kind == "iet_slit"
    assert out.shape.direction == (1, 0) and out.shape.twist == F(1, 3)


def test_large_modulus_gives_thin_cylinder():
    out = classify_invariants(fixed_shape_family([F(2**k) for k in range(12)]))
    assert out.shape.kind == "thin_cylinder"
    assert out.shape.h_squared is None
    assert out.shape.to_json()["h_squared"] == "inf"


def test_converging_modulus_gives_infinitesimal_cylinder():
    out = classify_invariants(fixed_shape_family([2 - F(1, 2**k) for k in range(12)]))
    assert out.shape.kind == "infinitesimal_cylinder" and out.shape.modulus == 2
    exact = classify_invariants(fixed_shape_family([F(5, 4)] * 9))
    assert exact.shape.exact and exact.shape.modulus == F(5, 4)


def test_detach_from_stacked_torus():
    M = stacked_torus()
    for f, s in cylinder_faces(M):
        cyl = face_cylinder(M, f, s)
        assert is_simple(M, cyl)
        residual, inv = detach_cylinder(M, cyl)
        assert stratum_signature(residual).orders == (0,)
        assert area(residual) == 1
        assert translation_equivalent(residual, parallelogram_torus((1, 0), (F(-1, 2), 1)))
        assert inv.modulus == 1 and inv.direction in ((1, 0), (-1, 0))


def test_detach_rejects_non_simple_cylinders():
    T = parallelogram_torus()
    cyl = face_cylinder(T, *cylinder_faces(T)[0])
    assert not is_simple(T, cyl)
    with pytest.raises(SurfaceError, match="not simple"):
        detach_cylinder(T, cyl)


def test_detach_thin_cylinder_at_one_half():
    C = F(1, 100)
    N = n_half_with_cylinder(0, C)
    simple = [face_cylinder(N, f, s) for f, s in cylinder_faces(N) if is_simple(N, face_cylinder(N, f, s))]
    assert len(simple) == 1
    residual, inv = detach_cylinder(N, simple[0])
    assert inv == wms_phase_invariants(F(1, 2), C)
    assert area(residual) == area(N) - simple[0].area
    # end loops are reglued rather than pinched, so genus is kept
    sig = stratum_signature(residual)
    assert sig.genus == 3 and sorted(sig.orders) == [1, 1, 2]
    assert stratum_signature(n_limit(F(1, 2), 0, 1).surface).orders == (1, 0, 0, 1)


def test_wms_squares_are_not_strip_cylinders():
    assert cylinder_faces(m_wms()) == []
