from fractions import Fraction as F
from math import gcd

import pytest
from conftest import positive, rationals, square_tiled, square_tiled_surfaces
from hypothesis import given, settings
from hypothesis import strategies as st

from strata_push.exact_num import Mat2, Vec2, diagonal, horocycle, mat_mul
from strata_push.surface_core import (
    SurfaceError,
    apply_matrix,
    area,
    build_from_polygons,
    canonical_form,
    parallelogram_torus,
    saddle_connections_up_to,
    stratum_signature,
    systole_squared,
    translation_equivalent,
    triangulate,
)
from strata_push.wms_family import SINGULARITIES, m_wms, n_half


def euler_genus(M):
    chi = len(M.vertex_classes()) - M.n_edges + len(M.faces())
    return (2 - chi) // 2


def test_wms_signature_and_area():
    M = m_wms()
    sig = stratum_signature(M)
    assert sig.genus == 3
    assert sig.kappa == tuple((name, 1) for name in SINGULARITIES)
    assert area(M) == 8


def test_unit_square_torus():
    T = parallelogram_torus()
    sig = stratum_signature(T)
    assert (sig.genus, sig.orders, area(T)) == (1, (0,), 1)


def test_broken_face_is_rejected():
    periods = {"b": (1, 0), "b'": (-1, 0), "r": (0, 1), "r'": (0, F(-3, 2))}
    with pytest.raises(SurfaceError):
        build_from_polygons([["b", "r", "b'", "r'"]], periods, [("b", "b'"), ("r", "r'")])
    periods = {"b": (1, 0), "b'": (-1, 0), "r": (0, 1), "r'": (0, -1), "x": (1, 0), "x'": (0, -1)}
    with pytest.raises(SurfaceError, match="pairing mismatch"):
        build_from_polygons([["b", "r", "b'", "r'"], ["x", "x'"]], periods, [("b", "b'"), ("r", "r'"), ("x", "x'")])


def test_non_closing_face_message():
    periods = {"b": (1, 0), "b'": (-1, 0), "r": (0, 1), "r'": (0, -1), "s": (1, 2), "s'": (-1, -2)}
    with pytest.raises(SurfaceError, match="face does not close"):
        build_from_polygons([["b", "r", "s'"], ["b'", "s", "r'"]], periods, [("b", "b'"), ("r", "r'"), ("s", "s'")])


def test_limit_at_one_half_has_two_marked_points():
    assert stratum_signature(n_half(0)).orders == (1, 0, 0, 1)


def test_matrix_action_on_wms():
    A, B, C = F(6, 5), F(1, 10), F(1, 10)
    M = apply_matrix(m_wms(), Mat2.of(A, B, C, (1 + B * C) / A))
    for x in "abcdefgh":
        assert M.vec[M.half_edge(x)] == Vec2.of(F(6, 5), F(1, 10))
    with pytest.raises(SurfaceError, match="orientation-reversing"):
        apply_matrix(M, Mat2.of(1, 0, 0, -1))


def test_matrix_then_inverse():
    g = Mat2.of(2, 1, 1, 1)
    M = m_wms()
    assert translation_equivalent(apply_matrix(apply_matrix(M, g), g.inverse()), M)
    assert translation_equivalent(apply_matrix(M, Mat2.identity()), M)


def test_triangulate_counts():
    T = triangulate(parallelogram_torus())
    assert len(T.faces()) == 2 and T.n_edges == 3
    W = triangulate(m_wms())
    assert len(W.faces()) == 16
    assert triangulate(W).faces() == W.faces()


def test_relabelled_wms_is_equivalent_only_without_labels():
    M = m_wms()
    N = M.with_names({"red": "orange", "orange": "red"})
    assert translation_equivalent(M, N)
    assert not translation_equivalent(M, N, label_preserving=True)
    assert translation_equivalent(M, M, label_preserving=True)


def test_tori_of_different_shape_differ():
    assert not translation_equivalent(parallelogram_torus(), parallelogram_torus((1, 0), (0, 2)))


def test_torus_saddle_connections():
    found = sorted((s.holonomy.x, s.holonomy.y) for s in saddle_connections_up_to(parallelogram_torus(), F(9, 4)))
    expected = sorted((F(x), F(y)) for x in (-1, 0, 1) for y in (-1, 0, 1) if (x, y) != (0, 0))
    assert found == expected
    assert saddle_connections_up_to(parallelogram_torus(), F(1, 2)) == []


def test_wms_unit_edges_are_saddle_connections():
    M = m_wms()
    hol = {s.holonomy for s in saddle_connections_up_to(M, 1)}
    assert {M.vec[h] for h in range(M.n_half_edges)} <= hol


def test_systoles():
    assert systole_squared(parallelogram_torus()) == 1
    assert systole_squared(m_wms()) == 1
    assert systole_squared(apply_matrix(parallelogram_torus(), diagonal(2))) == F(1, 4)


def lattice_oracle(u, v, L2):
    out = []
    bound = 40
    for m in range(-bound, bound + 1):
        for n in range(-bound, bound + 1):
            if gcd(m, n) != 1:
                continue
            w = u * m + v * n
            if w.norm2() <= L2:
                out.append(w)
    return sorted(out)


@settings(max_examples=25, deadline=None)
@given(
    st.fractions(min_value=F(1, 2), max_value=2, max_denominator=4),
    st.fractions(min_value=-1, max_value=1, max_denominator=4),
    st.fractions(min_value=F(1, 2), max_value=2, max_denominator=4),
    st.fractions(min_value=1, max_value=25, max_denominator=4),
)
def test_torus_connections_match_lattice_oracle(ux, vx, vy, L2):
    u, v = Vec2.of(ux, 0), Vec2.of(vx, vy)
    T = parallelogram_torus(u, v)
    found = sorted(s.holonomy for s in saddle_connections_up_to(T, L2))
    assert found == lattice_oracle(u, v, L2)


@settings(max_examples=40, deadline=None)
@given(square_tiled_surfaces())
def test_gauss_bonnet_on_square_tiled(M):
    sig = stratum_signature(M)
    assert sig.genus == euler_genus(M)
    assert sum(sig.orders) == 2 * sig.genus - 2


@settings(max_examples=30, deadline=None)
@given(square_tiled_surfaces())
def test_triangulate_preserves_surface(M):
    T = triangulate(M)
    assert all(len(f) == 3 for f in T.faces())
    assert translation_equivalent(M, T)
    assert area(T) == area(M)


@settings(max_examples=30, deadline=None)
@given(square_tiled_surfaces(4), rationals, positive)
def test_matrix_action_is_a_group_action(M, s, k):
    g, h = horocycle(s), diagonal(k)
    lhs = apply_matrix(M, mat_mul(g, h))
    rhs = apply_matrix(apply_matrix(M, h), g)
    assert translation_equivalent(lhs, rhs)
    assert area(lhs) == area(M)


def test_canonical_form_is_presentation_independent():
    M = square_tiled([1, 2, 0], [0, 2, 1])
    N = square_tiled([2, 0, 1], [0, 2, 1])
    assert canonical_form(M) == canonical_form(triangulate(M))
    assert translation_equivalent(M, N) == (canonical_form(M) == canonical_form(N))
