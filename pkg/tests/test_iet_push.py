import random
from collections import Counter
from fractions import Fraction as F
from itertools import accumulate

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_push.deform import COMPLETED, Cocycle, push
from strata_push.exact_num import Vec2
from strata_push.iet_push import (
    ACCUMULATION,
    CYLINDER_ACCUMULATION,
    EDGE_PARAMETERS,
    ISOLATED,
    NONE,
    SADDLE_COLLAPSE,
    IntervalExchange,
    SubInterval,
    accident_scan,
    accident_test,
    build_limit_surface,
    classify_accident,
    compute_eta,
    cyclic_relabel,
    first_visit_iet,
    harmonic_order_type,
    rationals_in,
    wms_family,
)
from strata_push.periodic import cylinder_decomposition, strip_cylinders, waist_cut
from strata_push.surface_core import (
    SurfaceError,
    build_from_polygons,
    parallelogram_torus,
    translation_equivalent,
)
from strata_push.wms_family import (
    WmsParams,
    closed_form_accident,
    m_abc,
    m_wms,
    n_abc_closed_form,
    n_limit,
    v0,
)

HORIZONTAL = Vec2.of(1, 0)
LISTED_ACCIDENTS = {
    F(1, 5), F(2, 5), F(3, 7), F(4, 9), F(5, 11), F(6, 13), F(1, 2),
    F(2, 3), F(3, 5), F(4, 7), F(5, 9), F(6, 11), F(7, 13),
}


def wms_iet(A, C=F(1, 100), height=F(1, 3)):
    N = n_abc_closed_form(WmsParams.of(A, 0, C))
    return first_visit_iet(waist_cut(N, strip_cylinders(N)), height)


def random_parameters(lo, hi, count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        A = F(rng.randint(1, 999), 1000) * (hi - lo) + lo
        if lo < A < hi and not closed_form_accident(A):
            out.append(A)
    return out


@pytest.mark.parametrize("values,start", [([1, -1], 0), ([0, 0, 0], 0), ([-1, 2, -1], 1)])
def test_cyclic_relabel_examples(values, start):
    assert cyclic_relabel(values) == start


def test_cyclic_relabel_needs_zero_sum():
    with pytest.raises(ValueError):
        cyclic_relabel([1, 1])


@st.composite
def zero_sum_lists(draw):
    head = draw(st.lists(st.integers(-4, 4), min_size=0, max_size=7))
    return head + [-sum(head)]


@settings(max_examples=200, deadline=None)
@given(zero_sum_lists())
def test_cyclic_relabel_matches_brute_force(values):
    n = len(values)
    valid = [s for s in range(n) if min(accumulate(values[s:] + values[:s])) >= 0]
    assert cyclic_relabel(values) == valid[0]


def test_eta_on_wms():
    M = m_wms()
    cyls = cylinder_decomposition(M, HORIZONTAL)
    assert compute_eta(M, v0(M), cyls) == 2
    assert compute_eta(M, Cocycle.zero(M), cyls) is None


def two_strip_surface():
    """Unit cylinder stacked on a cylinder of height 1/2."""
    half = F(1, 2)
    periods = {"b": (1, 0), "b'": (-1, 0), "m": (1, 0), "m'": (-1, 0), "s": (0, 1), "s'": (0, -1), "t": (0, half), "t'": (0, -half)}
    return build_from_polygons(
        [["b", "s", "m'", "s'"], ["m", "t", "b'", "t'"]],
        periods,
        [("b", "b'"), ("m", "m'"), ("s", "s'"), ("t", "t'")],
    )


def test_eta_takes_the_minimum_over_cylinders():
    M = two_strip_surface()
    ids = M.edge_ids()
    values = {ids[M.half_edge(x) >> 1]: val for x, val in (("s", F(1, 2)), ("t", 1), ("b", 0), ("m", 0))}
    v = Cocycle.from_mapping(M, values)
    assert compute_eta(M, v, cylinder_decomposition(M, HORIZONTAL)) == F(1, 2)


def test_eta_rejects_cocycles_outside_the_finiteness_subspace():
    M = two_strip_surface()
    ids = M.edge_ids()
    v = Cocycle.from_mapping(M, {ids[M.half_edge(x) >> 1]: val for x, val in (("s", 0), ("t", 0), ("b", 1), ("m", 0))})
    with pytest.raises(ValueError, match="finiteness"):
        compute_eta(M, v, cylinder_decomposition(M, HORIZONTAL))


def test_eta_is_a_safe_bound():
    C = F(2) * F(9, 10)
    for A in random_parameters(F(1, 5), F(2), 6, seed=3):
        M = m_abc(WmsParams.of(A, 0, C))
        assert push(M, v0(M)).kind == COMPLETED, A


def test_iet_at_seven_tenths():
    iet = wms_iet(F(7, 10))
    assert not iet.degenerate
    assert iet.intervals == [F(14, 5), F(14, 5)]
    assert iet.sub_lengths_bottom == [[F(17, 10), F(3, 10), F(1, 10), F(7, 10)], [F(7, 10)] * 4]
    assert {F(3, 10), F(1, 10)} <= set(iet.sub_lengths_top[1])


def test_iet_at_two_fifths_is_degenerate():
    iet = wms_iet(F(2, 5))
    assert iet.degenerate
    with pytest.raises(SurfaceError, match="leaves stratum"):
        build_limit_surface(iet, [(F(1, 2), F(5, 2))] * 2)


def test_iet_at_three_tenths():
    assert F(1, 2) in wms_iet(F(3, 10)).sub_lengths_top[1]


def test_torus_iet_is_identity():
    T = parallelogram_torus()
    iet = first_visit_iet(waist_cut(T, strip_cylinders(T)))
    assert iet.is_identity()
    S = build_limit_surface(iet, [(0, 1)])
    assert translation_equivalent(S, T)


def test_transversal_height_must_be_interior():
    N = n_abc_closed_form(WmsParams.of(F(7, 10), 0, F(1, 100)))
    W = waist_cut(N, strip_cylinders(N))
    with pytest.raises(ValueError):
        first_visit_iet(W, F(1, 2))


def test_limit_surface_at_seven_tenths():
    A = F(7, 10)
    S = build_limit_surface(wms_iet(A), [(F(1, 2), 1 / A)] * 2)
    assert translation_equivalent(S, n_limit(A, 0, 1).surface)


@pytest.mark.parametrize("A", [F(7, 10), F(5, 12), F(3, 4), F(5, 8), F(3, 10)])
def test_iet_is_measure_preserving_and_height_independent(A):
    iet = wms_iet(A)
    for bottom, top, total in zip(iet.sub_lengths_bottom, iet.sub_lengths_top, iet.intervals):
        assert sum(bottom) == sum(top) == total
    assert Counter(x for row in iet.sub_lengths_bottom for x in row) == Counter(x for row in iet.sub_lengths_top for x in row)
    assert wms_iet(A, height=F(1, 4)).to_json() == iet.to_json()
    assert wms_iet(A, C=F(1, 200)).to_json() == iet.to_json()


def test_limit_surfaces_match_closed_forms():
    for A in random_parameters(F(1, 2), F(1), 8, seed=11):
        S = build_limit_surface(wms_iet(A), [(F(1, 2), 1 / A)] * 2)
        assert translation_equivalent(S, n_limit(A, 0, 1).surface), A


def test_build_limit_surface_checks_side_count():
    iet = IntervalExchange([F(1)], [[SubInterval(0, F(0), F(1), 0, F(0))]])
    with pytest.raises(ValueError):
        build_limit_surface(iet, [(0, 1), (0, 1)])


def test_accident_examples():
    fam = wms_family()
    half = accident_test(fam.evaluator, F(1, 2), F(1, 100), fam.closed_form)
    assert half.is_accident and half.kind == CYLINDER_ACCUMULATION and half.gamma_witness
    two_thirds = accident_test(fam.evaluator, F(2, 3), F(1, 100), fam.closed_form)
    assert two_thirds.is_accident and two_thirds.kind == SADDLE_COLLAPSE
    plain = accident_test(fam.evaluator, F(5, 12), F(1, 100), fam.closed_form)
    assert not plain.is_accident and plain.kind == NONE
    for rep in (half, two_thirds, plain):
        assert rep.consistent and rep.agrees


def test_accident_probe_must_be_positive():
    fam = wms_family()
    with pytest.raises(ValueError):
        accident_test(fam.evaluator, F(1, 2), 0)


@pytest.mark.parametrize("A", [F(1, 2), F(2, 3), F(5, 12), F(3, 7), F(4, 5)])
def test_accidents_are_stable_under_halving_the_probe(A):
    fam = wms_family()
    a = accident_test(fam.evaluator, A, F(1, 100))
    b = accident_test(fam.evaluator, A, F(1, 200))
    assert a.is_accident == b.is_accident and a.kind == b.kind


def test_scan_of_the_unit_window():
    reports = accident_scan(wms_family(), (F(1, 5), 1), 13, F(1, 100))
    assert [r.parameter for r in reports] == rationals_in(F(1, 5), 1, 13)
    found = {r.parameter for r in reports if r.is_accident and not r.edge_case}
    assert found == LISTED_ACCIDENTS
    assert all(r.consistent and not r.undetermined for r in reports)
    assert all(r.agrees for r in reports if not r.edge_case)
    edges = {r.parameter: r for r in reports if r.edge_case}
    assert set(edges) == set(EDGE_PARAMETERS)
    for r in edges.values():
        assert r.is_accident and r.closed_form is False and r.agrees is None


def test_scan_of_quiet_window_and_empty_range():
    assert not any(r.is_accident for r in accident_scan(wms_family(), (F(3, 4), F(9, 10)), 13, F(1, 100)))
    assert accident_scan(wms_family(), (1, F(1, 2)), 13, F(1, 100)) == []


def test_pushed_family_agrees_with_closed_form():
    pushed, closed = wms_family(source="push"), wms_family()
    for A in (F(1, 2), F(2, 3), F(5, 12), F(3, 7), F(4, 5), F(3, 5), F(1, 5)):
        a, b = pushed.test(A, F(1, 100)), closed.test(A, F(1, 100))
        assert not a.undetermined
        assert (a.is_accident, a.kind) == (b.is_accident, b.kind), A


def test_harmonic_order_type():
    pts = [F(0)] + [s * F(1, n) for n in range(1, 5) for s in (1, -1)]
    assert harmonic_order_type(pts, 0)
    assert not harmonic_order_type([F(-1), F(0), F(1), F(2)], 0)
    assert not harmonic_order_type([F(-3), F(-2), F(-1), F(0), F(1), F(2), F(3)], 0)
    assert not harmonic_order_type([F(-1), F(1)], 0)


def test_classify_accidents():
    c = classify_accident(F(1, 2))
    assert c.kind == ACCUMULATION and c.order_type_ok
    assert F(1, 2) in c.nearby and {F(3, 7), F(4, 7)} <= set(c.nearby)
    assert classify_accident(F(2, 3)).kind == ISOLATED
    assert classify_accident(F(3, 5)).kind == ISOLATED
    with pytest.raises(ValueError, match="not an accident"):
        classify_accident(F(5, 12))
