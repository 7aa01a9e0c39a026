import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horoshift import fixtures
from horoshift.cayley_ball import build_ball
from horoshift.errors import PreconditionError
from horoshift.morse_metrics import (contracting_words, contraction_profile, convexity_defect,
                                     fellow_travel_bound, gauge_estimate, geodesic_family,
                                     geodesic_words, is_quasi_geodesic, k_convexity,
                                     projection_diameter, quasigeodesic_excursion, rectangle_slim,
                                     separating_factors, slim_constant)
from horoshift.rays_fields import busemann, field_from_function

from conftest import xy


@pytest.fixture(scope="module")
def f2_ball4(f2):
    return build_ball(f2, radius=4)


@pytest.fixture(scope="module")
def z2_ball6(z2):
    return build_ball(z2, radius=6)


# --- thin triangles ---------------------------------------------------------------

def test_tree_triangles_are_zero_slim(f2_ball4):
    b = f2_ball4
    pts = [v for v in range(len(b)) if b.dist_from_center[v] <= 2]
    for y, z in itertools.combinations(pts, 2):
        assert slim_constant(b, 0, y, z, 1) == 0
        assert slim_constant(b, 0, y, z, 2) == 0


def test_flat_triangle_all_sides(z2_ball8):
    b = z2_ball8
    y, z = b.vertex("a^4"), b.vertex("b^4")
    xs = [b.vertex(f"a^{t}") if t else 0 for t in range(5)]
    zs = [b.vertex(f"b^{t}") if t else 0 for t in range(5)]
    # the diagonal staircase from (4,0) to (0,4): (2,2) is 2 away from both axes
    stair = ["a^4", "a^4 b", "a^3 b", "a^3 b^2", "a^2 b^2", "a^2 b^3", "a b^3", "a b^4", "b^4"]
    sides = (xs, [b.vertex(w) for w in stair], zs)
    assert slim_constant(b, 0, y, z, 1, sides=sides) == 2
    # over every choice of sides the worst third side passes through (4,4)
    assert slim_constant(b, 0, y, z, 1, sides="all") == 4
    assert slim_constant(b, 0, y, z, 1) <= 4


def test_degenerate_triangle(z2_ball6):
    b = z2_ball6
    y = b.vertex("a^2 b")
    assert slim_constant(b, y, y, 0, 1) == 0


def test_bad_condition(z2_ball6):
    with pytest.raises(PreconditionError):
        slim_constant(z2_ball6, 0, 1, 2, 3)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_condition_two_dominates_condition_one(i, j, k):
    z2 = fixtures.group("z2")
    b = build_ball(z2, radius=6)
    inner = [v for v in range(len(b)) if b.dist_from_center[v] <= 3]
    x, y, z = (inner[n % len(inner)] for n in (i, j, k))
    assert slim_constant(b, x, y, z, 2) >= slim_constant(b, x, y, z, 1)


def test_rectangle_slim(z2_ball6):
    b = z2_ball6
    p, q, r, s = (b.vertex(t) for t in ("1", "a^2", "a^2 b^2", "b^2"))
    assert rectangle_slim(b, p, q, r, s) >= 0


# --- convexity defect ---------------------------------------------------------------

def test_tree_convexity_defect(f2_ball4):
    b = f2_ball4
    pts = [v for v in range(len(b)) if b.dist_from_center[v] <= 2]
    for y, z in itertools.combinations(pts, 2):
        assert convexity_defect(b, 0, y, z, 1, 2) <= 0


def test_flat_convexity_defect(z2_ball8):
    b = z2_ball8
    y, z = b.vertex("a^4"), b.vertex("b^4")
    delta2 = slim_constant(b, 0, y, z, 2)
    assert convexity_defect(b, 0, y, z, 1, 2) <= 2 * delta2 * 2


def test_convexity_defect_t_zero(z2_ball6):
    b = z2_ball6
    assert convexity_defect(b, 0, b.vertex("a^3"), b.vertex("b^2"), 0, 5) == 0
    with pytest.raises(PreconditionError):
        convexity_defect(b, 0, 1, 2, 3, 2)


# --- field convexity ---------------------------------------------------------------

def test_k_convexity_tree(f2):
    b = build_ball(f2, radius=4)
    h = busemann(b, fixtures.ray("f2_a", f2))
    assert k_convexity(h, geodesic_family(b)).k_hat == 0


def test_k_convexity_constant(z2_ball6):
    h = field_from_function(z2_ball6, lambda x: 7)
    assert k_convexity(h, geodesic_family(z2_ball6, range(13))).k_hat == 0


def flat_k_oracle(R):
    """Largest K for h = -(x+y) over monotone lattice geodesics in the l1 ball.

    A lattice geodesic from p to q moves monotonically in each coordinate; the
    worst point of -(x+y) above the chord is found by brute force over the
    step orders.
    """
    pts = [(x, y) for x in range(-R, R + 1) for y in range(-R, R + 1) if abs(x) + abs(y) <= R]
    best = 0
    for p, q in itertools.combinations(pts, 2):
        dx, dy = q[0] - p[0], q[1] - p[1]
        sx, sy = (dx > 0) - (dx < 0), (dy > 0) - (dy < 0)
        L = abs(dx) + abs(dy)
        # the box spanned by p and q must lie in the ball for the geodesics to be contained
        corners = [(p[0], q[1]), (q[0], p[1])]
        if any(abs(a) + abs(b) > R for a, b in corners):
            continue
        h0, h1 = -(p[0] + p[1]), -(q[0] + q[1])
        for order in set(itertools.permutations("x" * abs(dx) + "y" * abs(dy))):
            x, y = p
            for k, step in enumerate(order, 1):
                if step == "x":
                    x += sx
                else:
                    y += sy
                lhs = L * -(x + y) - (L - k) * h0 - k * h1
                best = max(best, -((-lhs) // L))
    return best


def test_k_convexity_flat_matches_oracle(z2):
    R = 4
    b = build_ball(z2, radius=R)
    h = field_from_function(b, lambda x: -sum(xy(x)))
    k = k_convexity(h, geodesic_family(b))
    assert k.k_hat == flat_k_oracle(R)
    assert k.k_hat > 0  # -(x+y) is not convex along lattice geodesics running against it


def test_k_convexity_empty():
    with pytest.raises(PreconditionError):
        k_convexity(None, [])


# --- contraction ---------------------------------------------------------------

def test_tree_contraction(f2):
    gamma = fixtures.ray("f2_a", f2).points(6)
    prof = contraction_profile(f2, gamma, radii=(1, 2, 3))
    assert prof.d_hat == 0 and prof.verdict == "bounded-so-far"


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_flat_contraction_closed_form(z2, m):
    gamma = [z2.parse_element(f"a^{t}") if t else () for t in range(0, 21)]
    center = z2.parse_element(f"a^10 b^{m}")
    assert projection_diameter(z2, gamma, center, m - 1) == 2 * (m - 1)


def test_flat_contraction_profile(z2):
    gamma = fixtures.ray("z2_x_axis", z2).points(12)
    prof = contraction_profile(z2, gamma, radii=(1, 2, 3, 4))
    assert [s[2] for s in prof.samples] == [2, 4, 6, 8]
    assert prof.strictly_growing and prof.verdict == "growing"
    assert prof.to_csv().startswith("center,radius,diameter\n")


def test_contraction_sample_must_be_disjoint(z2):
    gamma = fixtures.ray("z2_x_axis", z2).points(4)
    with pytest.raises(PreconditionError):
        contraction_profile(z2, gamma, samples=[(z2.parse_element("a b"), 1)])
    with pytest.raises(PreconditionError):
        contraction_profile(z2, [(), z2.parse_element("a b")])


# --- quasi-geodesics --------------------------------------------------------------

def test_is_quasi_geodesic(z2):
    detour = [z2.parse_element(w) for w in ["1", "b", "a b", "a"]]
    assert is_quasi_geodesic(z2, detour, 3, 0)
    assert not is_quasi_geodesic(z2, detour, 1, 0)
    assert is_quasi_geodesic(z2, detour, Fraction(3, 2), 1)


def test_flat_excursion_grows(z2):
    gamma = fixtures.ray("z2_x_axis", z2).points(8)
    e2 = quasigeodesic_excursion(z2, gamma, 3, 0, budget=2)
    e4 = quasigeodesic_excursion(z2, gamma, 3, 0, budget=4)
    assert e4.n_hat >= 4 and e4.n_hat >= e2.n_hat
    assert is_quasi_geodesic(z2, [z2.parse_element(w) for w in e4.witness], 3, 0)
    assert "flat detours" in e4.scope


def test_tree_excursion_zero(f2):
    gamma = fixtures.ray("f2_a", f2).points(6)
    e = quasigeodesic_excursion(f2, gamma, 3, 0, budget=3)
    assert e.n_hat == 0 and not e.partial


def test_degenerate_segment(z2):
    assert quasigeodesic_excursion(z2, [()], 3, 0, budget=3).n_hat == 0


def test_gauge_estimate(z2):
    gamma = fixtures.ray("z2_x_axis", z2).points(4)
    with pytest.raises(PreconditionError):
        gauge_estimate(z2, gamma, [], 2)
    est = gauge_estimate(z2, gamma, [(3, 0), (2, 1)], 2)
    assert len(est.to_dict()["pairs"]) == 2
    with pytest.raises(PreconditionError):
        quasigeodesic_excursion(z2, gamma, Fraction(1, 2), 0, 2)


def test_fellow_travel_bound():
    assert fellow_travel_bound(0, 0) == 0
    assert fellow_travel_bound(1, 2) == 20


# --- contracting-word experiment ----------------------------------------------------

def test_geodesic_words_count(f2, z2):
    assert len(geodesic_words(f2, 3)) == 36
    assert len(geodesic_words(z2, 2)) == 12  # 4 straight + 8 turning words


def test_separating_factors(zz):
    good, bad = contracting_words(zz, 0, 2, radii=(1,))
    assert good and bad
    forbidden, missed = separating_factors(good, bad, 2)
    assert all(w not in good for w in bad)
    assert isinstance(missed, list) and forbidden
