from fractions import Fraction as F

from hypothesis import strategies as st

from strata_push.surface_core import build_from_polygons


def square_tiled(right, up):
    """Square-tiled surface: square i has right neighbour right[i] and top neighbour up[i]."""
    n = len(right)
    rinv = {right[i]: i for i in range(n)}
    faces, periods, gluings = [], {}, []
    for i in range(n):
        periods[f"h{i}"], periods[f"h{i}'"] = (1, 0), (-1, 0)
        periods[f"v{i}"], periods[f"v{i}'"] = (0, 1), (0, -1)
        gluings += [(f"h{i}", f"h{i}'"), (f"v{i}", f"v{i}'")]
        faces.append([f"h{i}", f"v{i}", f"h{up[i]}'", f"v{rinv[i]}'"])
    return build_from_polygons(faces, periods, gluings)


def _transitive(right, up):
    seen, stack = {0}, [0]
    while stack:
        i = stack.pop()
        for j in (right[i], up[i]):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(right)


@st.composite
def square_tiled_surfaces(draw, max_squares=5):
    n = draw(st.integers(1, max_squares))
    right = draw(st.permutations(range(n)))
    up = draw(st.permutations(range(n)))
    if not _transitive(right, up):
        right = list(range(1, n)) + [0]
    return square_tiled(right, up)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6)
positive = st.fractions(min_value=F(1, 6), max_value=3, max_denominator=6)


def stacked_torus():
    """Two 1x1 strips; marked point P on the bottom circle and Q on the middle circle, half a unit apart."""
    half = F(1, 2)
    periods = {
        "a": (1, 0), "a'": (-1, 0), "c": (-1, 0), "c'": (1, 0),
        "s": (half, 1), "s'": (-half, -1), "u": (-half, 1), "u'": (half, -1),
    }
    return build_from_polygons(
        [["a", "s", "c", "s'"], ["c'", "u", "a'", "u'"]],
        periods,
        [("a", "a'"), ("c", "c'"), ("s", "s'"), ("u", "u'")],
        ["a", "c'"],
        ["P", "Q"],
    )
