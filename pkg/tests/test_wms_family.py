import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_push.deform import COMPLETED, push, validate_cocycle
from strata_push.exact_num import Vec2
from strata_push.iet_push import rationals_in
from strata_push.periodic import cylinder_decomposition
from strata_push.surface_core import area, stratum_signature, systole_squared, translation_equivalent
from strata_push.wms_family import (
    CYLINDER_DEGENERATION,
    IN_STRATUM,
    SADDLE_COLLAPSE,
    RegimeError,
    WmsParams,
    check_orbit,
    dir_orbit,
    in_f_subspace,
    in_region_w,
    m_abc,
    m_wms,
    n_abc_closed_form,
    n_half_with_cylinder,
    n_limit,
    u_set,
    v0,
)


def test_wms_basics():
    M = m_wms()
    assert stratum_signature(M).orders == (1, 1, 1, 1)
    assert systole_squared(M) == 1
    cyls = cylinder_decomposition(M, Vec2.of(1, 0))
    assert len(cyls) == 2
    assert sorted((c.circumference2, c.height2) for c in cyls) == [(16, 1), (16, 1)]


def test_m_abc_periods():
    A, B, C = F(6, 5), F(1, 10), F(1, 10)
    M = m_abc(WmsParams.of(A, B, C))
    for x in "abcdefgh":
        assert M.vec[M.half_edge(x)] == Vec2.of(A, C)
    for x in ("alpha", "beta"):
        assert M.vec[M.half_edge(x)] == Vec2.of(B, (1 + B * C) / A)
    assert M == m_abc(WmsParams.of(A, B, C))
    assert translation_equivalent(m_abc(WmsParams.of(1, 0, 0)), m_wms())
    with pytest.raises(RegimeError):
        m_abc(WmsParams.of(0, 0, 0))


@settings(max_examples=30, deadline=None)
@given(
    st.fractions(min_value=F(1, 10), max_value=3, max_denominator=12),
    st.fractions(min_value=-2, max_value=2, max_denominator=12),
    st.fractions(min_value=-2, max_value=2, max_denominator=12),
)
def test_m_abc_area_is_eight(A, B, C):
    assert area(m_abc(WmsParams.of(A, B, C))) == 8


def test_orbit():
    orbit = dir_orbit()
    assert len(orbit) == 8
    assert check_orbit(orbit)
    assert in_f_subspace({"a": 1, "c": -1, "alpha": F(1, 2), "beta": F(1, 2)})
    assert in_f_subspace({"e": 1, "g": -1, "alpha": F(-1, 2), "beta": F(1, 2)})
    assert not in_f_subspace({"a": 1})
    M = m_wms()
    assert all(validate_cocycle(M, c) for c in orbit.cocycles(M))


def test_closed_form_examples():
    for p in (WmsParams.of(F(6, 5), F(1, 10), F(1, 10)), WmsParams.of(1, F(1, 10), F(1, 10))):
        N = n_abc_closed_form(p)
        assert stratum_signature(N).orders == (1, 1, 1, 1)
        assert area(N) == 8
    N = n_abc_closed_form(WmsParams.of(F(6, 5), F(1, 10), F(1, 10)))
    assert N.vec[N.half_edge("a")] == Vec2.of(F(11, 5), F(1, 10))
    assert N.vec[N.half_edge("c")] == Vec2.of(F(1, 5), F(1, 10))
    with pytest.raises(RegimeError):
        n_abc_closed_form(WmsParams.of(1, 0, 2))
    with pytest.raises(RegimeError):
        n_abc_closed_form(WmsParams.of(1, -1, F(1, 10)))


def test_closed_form_matches_push_on_random_parameters():
    rng = random.Random(2024)
    for _ in range(50):
        A = F(rng.randint(21, 199), 100)
        B = F(rng.randint(-39, 39), 100)
        C = F(rng.choice([1, -1]) * rng.randint(1, 49), 100)
        p = WmsParams.of(A, B, C)
        M = m_abc(p)
        out = push(M, v0(M))
        assert out.kind == COMPLETED, p
        assert translation_equivalent(out.surface, n_abc_closed_form(p)), p


def test_limit_examples():
    r = n_limit(F(7, 10), 0, 1)
    assert r.kind == IN_STRATUM
    assert r.lengths["b'"] == F(3, 10) and r.lengths["c'"] == F(1, 10)
    for sign in (1, -1):
        half = n_limit(F(1, 2), 0, sign)
        assert half.kind == CYLINDER_DEGENERATION
        assert stratum_signature(half.surface).orders == (1, 0, 0, 1)
    assert n_limit(F(2, 5), 0, 1).kind == SADDLE_COLLAPSE
    with pytest.raises(RegimeError):
        n_limit(F(1, 10), 0, 1)


def test_limit_length_formulas_on_grid():
    for A in rationals_in(F(1, 5), 1, 13):
        r = n_limit(A, 0, 1)
        if F(1, 2) < A < 1:
            assert r.lengths["b'"] == (1 - A) % (2 * A - 1)
        elif F(1, 5) < A < F(1, 2):
            assert r.lengths["c'"] == 5 * A - 1
            assert r.lengths["b'"] == A % (1 - 2 * A)


def test_limits_agree_exactly_on_the_stated_set():
    for A in rationals_in(F(1, 5), 1, 13):
        plus, minus = n_limit(A, 0, 1), n_limit(A, 0, -1)
        inside = F(1, 5) <= A <= F(1, 3) or A in (F(1, 2), 1)
        if plus.surface is not None and minus.surface is not None:
            assert translation_equivalent(plus.surface, minus.surface) == inside, A
        else:
            # both one-sided limits leave the stratum the same way
            assert plus.kind == minus.kind == SADDLE_COLLAPSE, A


def test_boundary_set_is_u_plus_the_first_members():
    grid = rationals_in(F(1, 5), 1, 13)
    U = {u for u in u_set(13) if u in grid}
    hits = {A for A in grid if n_limit(A, 0, 1).on_boundary or n_limit(A, 0, -1).on_boundary}
    # k = 1 in both families gives 1/3 and 1; they collapse too but are left out of U
    assert hits == U | {F(1, 3), F(1)}


def test_limit_limits_converge_from_small_c():
    for A in (F(7, 10), F(3, 10), F(2, 7)):
        N = n_abc_closed_form(WmsParams.of(A, 0, F(1, 10**6)))
        lim = n_limit(A, 0, 1).surface
        assert stratum_signature(N).orders == stratum_signature(lim).orders


def test_u_set_and_region():
    assert set(u_set(3)) == {F(1, 5), F(1, 2), F(2, 5), F(2, 3), F(3, 7), F(3, 5)}
    assert in_region_w(WmsParams.of(F(1, 2), 0, 0))
    assert not in_region_w(WmsParams.of(F(1, 2), F(1, 3), 0))


def test_cylinder_presentation_at_one_half():
    C = F(1, 50)
    N = n_half_with_cylinder(0, C)
    assert translation_equivalent(N, n_abc_closed_form(WmsParams.of(F(1, 2), 0, C)))
