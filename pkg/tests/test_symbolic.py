import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horoshift import fixtures
from horoshift.cayley_ball import build_ball
from horoshift.errors import ConfigError, IntegrationError, LipschitzError, PreconditionError
from horoshift.rays_fields import ScalarField, field_from_function, translate
from horoshift.symbolic import (ABSENT, Alphabet, ForbiddenSet, Pattern, SymbolField,
                                coding_pipeline, constant_letter_field, derivative, forbidden_scan,
                                integrate, load_derivative_csv, load_forbidden_json, loop_check,
                                relator_squares, shift_act)

from conftest import random_lipschitz_field, xy
from oracles import tree_busemann


@pytest.fixture(scope="module")
def z2_ball6(z2):
    return build_ball(z2, radius=6)


LEFT = (-1, 1, 0, 0)  # letters a, a', b, b' for h(x, y) = -x


# --- alphabet -------------------------------------------------------------------

def test_alphabet_rank_round_trip():
    al = Alphabet(["a", "a'", "b", "b'"])
    assert len(al) == 81
    for i in range(81):
        assert al.index(al.letter(i)) == i
    assert al.as_dict((1, ABSENT, 0, -1)) == {"a": 1, "a'": None, "b": 0, "b'": -1}
    with pytest.raises(PreconditionError):
        al.index((2, 0, 0, 0))


# --- derivative ----------------------------------------------------------------

def test_left_shift_field_letter(z2_ball6):
    b = z2_ball6
    sigma = derivative(field_from_function(b, lambda x: -xy(x)[0]))
    for v in range(len(b)):
        if b.is_interior(v):
            assert sigma.letter(v) == LEFT
    assert sigma.alphabet.as_dict(sigma.letter(0)) == {"a": -1, "a'": 1, "b": 0, "b'": 0}


def test_tree_letter_at_identity(f2_busemann6):
    assert derivative(f2_busemann6).letter(0) == (-1, 1, 1, 1)


def test_constant_field_letters(z2_ball6):
    sigma = derivative(field_from_function(z2_ball6, lambda x: 4))
    assert all(sigma.letter(v) == (0, 0, 0, 0) for v in range(len(z2_ball6)) if z2_ball6.is_interior(v))


def test_boundary_letters_absent(z2_ball6):
    sigma = derivative(field_from_function(z2_ball6, lambda x: 0))
    v = z2_ball6.vertex("a^6")
    assert sigma.symbol(v)[0] is None and sigma.symbol(v)[1] == 0


def test_non_lipschitz_rejected(z2_ball6):
    vals = np.zeros(len(z2_ball6))
    vals[0] = 5
    with pytest.raises(LipschitzError):
        derivative(ScalarField(z2_ball6, vals))


def test_csv_round_trip(z2_ball6):
    h = field_from_function(z2_ball6, lambda x: -xy(x)[0] + abs(xy(x)[1]))
    sigma = derivative(h)
    text = sigma.to_csv()
    assert text.splitlines()[0] == "normal_form,a,a',b,b'"
    back = load_derivative_csv(z2_ball6, text)
    assert np.array_equal(back.letters, sigma.letters)


def test_csv_errors(z2_ball6):
    with pytest.raises(ConfigError):
        load_derivative_csv(z2_ball6, "normal_form,a,b\n")
    with pytest.raises(ConfigError):
        load_derivative_csv(z2_ball6, "normal_form,a,a',b,b'\n1,2,0,0,0\n")


# --- integration ----------------------------------------------------------------

def test_integrate_constant_letter(z2_ball6):
    sigma = constant_letter_field(z2_ball6, LEFT)
    h = integrate(sigma, 0, 5)
    assert h(z2_ball6.vertex("a^2 b^3")) == 3


def test_integrate_tree_round_trip(f2_busemann6):
    h = integrate(derivative(f2_busemann6), 0, 0)
    assert np.array_equal(h.values, f2_busemann6.values)


def test_integrate_zero(z2_ball6):
    h = integrate(constant_letter_field(z2_ball6, (0, 0, 0, 0)), 3, -2)
    assert set(h.values.tolist()) == {-2}


def test_loop_check_edge_violation(z2_ball6):
    sigma = constant_letter_field(z2_ball6, (-1, 0, -1, 0))
    rep = loop_check(sigma)
    assert not rep.passed and rep.edge_violations
    with pytest.raises(IntegrationError) as err:
        integrate(sigma, 0, 0)
    assert err.value.cycle


def test_loop_check_square_violation(z2_ball6):
    sigma = derivative(field_from_function(z2_ball6, lambda x: -xy(x)[0]))
    letters = sigma.letters.copy()
    v = z2_ball6.vertex("a b")
    w = z2_ball6.vertex("a^2 b")
    # flip the a-edge (a b) -> (a^2 b) consistently on both ends: antisymmetry holds,
    # the square around it picks up 2
    letters[v, 0], letters[w, 1] = 1, -1
    from horoshift.symbolic import DerivativeField
    rep = loop_check(DerivativeField(z2_ball6, letters))
    assert not rep.passed and not rep.edge_violations
    assert any(abs(total) == 2 for *_, total in rep.loop_violations)
    assert any(row[0] in ("a", "a b") for row in rep.loop_violations)


def test_relator_squares(z2, f2, zz):
    assert relator_squares(z2) == [(0, 2)]
    assert relator_squares(f2) == []
    assert relator_squares(zz) == [(0, 2)]


@pytest.mark.parametrize("name,R", [("z2", 6), ("f2", 5), ("z2_star_z", 3)])
def test_random_round_trip(name, R):
    b = build_ball(fixtures.group(name), radius=R)
    rng = random.Random(7)
    for _ in range(20):
        h = random_lipschitz_field(b, rng)
        sigma = derivative(h)
        assert loop_check(sigma).passed
        p = rng.randrange(len(b))
        assert np.array_equal(integrate(sigma, p, h(p)).values, h.values)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(-1, 1), st.integers(-1, 1))
def test_loop_passing_fields_integrate(seed, da, db):
    """Any loop-consistent letter field on a window integrates (and differentiates back)."""
    z2 = fixtures.group("z2")
    b = build_ball(z2, radius=4)
    rng = random.Random(seed)
    h = random_lipschitz_field(b, rng, k=2)
    sigma = derivative(h)
    h2 = integrate(sigma, 0, 0)
    assert np.array_equal(derivative(h2).letters, sigma.letters)


# --- shift action -------------------------------------------------------------------

def test_shift_identity_and_constant(z2_ball6):
    b = z2_ball6
    sigma = derivative(field_from_function(b, lambda x: -xy(x)[0] + abs(xy(x)[1])))
    assert np.array_equal(shift_act((), sigma).letters, sigma.letters)
    const = constant_letter_field(b, LEFT)
    moved = shift_act(b.vertices[b.vertex("a b^2")], const)
    assert moved.equal_on_overlap(const)


def test_shift_pointwise(z2, z2_ball6):
    b = z2_ball6
    sigma = derivative(field_from_function(b, lambda x: -xy(x)[0] + abs(xy(x)[1])))
    g = z2.parse_element("b")
    moved = shift_act(g, sigma)
    for v in range(len(b)):
        u = b.index.get(z2.multiply(z2.inverse(g), b.vertices[v]))
        if u is None:
            assert moved.symbol(v) is None
        else:
            assert moved.letter(v) == sigma.letter(u)


def test_shift_no_overlap(z2):
    b = build_ball(z2, radius=1)
    sigma = constant_letter_field(b, LEFT)
    with pytest.raises(PreconditionError):
        shift_act(z2.parse_element("a^5"), sigma)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 24), st.integers(0, 24), st.integers(0, 2 ** 32))
def test_action_law(i, j, seed):
    zz = fixtures.group("z2_star_z")
    b = build_ball(zz, radius=3)
    h = random_lipschitz_field(b, random.Random(seed))
    sigma = derivative(h)
    g1, g2 = b.vertices[i], b.vertices[j]
    try:
        lhs = shift_act(g1, shift_act(g2, sigma))
    except PreconditionError:
        return
    rhs = shift_act(zz.multiply(g1, g2), sigma)
    both = lhs.domain & rhs.domain
    assert np.array_equal(lhs.letters[both], rhs.letters[both])


@pytest.mark.parametrize("name,R", [("z2", 6), ("f2", 5), ("z2_star_z", 3)])
def test_equivariance(name, R):
    b = build_ball(fixtures.group(name), radius=R)
    rng = random.Random(11)
    for _ in range(10):
        h = random_lipschitz_field(b, rng)
        g = b.vertices[rng.randrange(len(b))]
        if b.group.length(g) > R // 2:
            continue
        assert derivative(translate(h, g)).equal_on_overlap(shift_act(g, derivative(h)))


# --- patterns ------------------------------------------------------------------------

def test_antisymmetry_patterns_absent_from_valid_field(z2, z2_ball6):
    sigma = derivative(field_from_function(z2_ball6, lambda x: -xy(x)[0] + abs(xy(x)[1])))
    a = z2.parse_element("a")
    # a-letter at the origin and a'-letter at a must be opposite
    bad = [((x, None, None, None), (None, y, None, None))
           for x in (-1, 0, 1) for y in (-1, 0, 1) if x != -y]
    forb = ForbiddenSet.from_assignments(((), a), bad)
    assert forbidden_scan(sigma, forb).consistent


def test_single_forbidden_letter_found(z2, z2_ball6):
    b = z2_ball6
    letters = derivative(field_from_function(b, lambda x: 0)).letters.copy()
    v = b.vertex("a b")
    letters[v, 0], letters[v, 1] = -1, -1
    from horoshift.symbolic import DerivativeField
    sigma = DerivativeField(b, letters)
    forb = ForbiddenSet.from_assignments(((),), [((-1, -1, None, None),)])
    rep = forbidden_scan(sigma, forb)
    assert rep.matches == [(v, 0)]


def test_tic_tac_toe(z2):
    b = build_ball(z2, radius=4)
    row = [z2.parse_element(w) for w in ("1", "a", "a^2")]
    col = [z2.parse_element(w) for w in ("1", "b", "b^2")]
    board = ["o"] * len(b)
    for w in ("a'", "1", "a"):
        board[b.vertex(w)] = "x"
    field = SymbolField(b, board)
    rows = ForbiddenSet.from_assignments(row, [("x",) * 3, ("o",) * 3])
    rep = forbidden_scan(field, rows)
    assert (b.vertex("a'"), 0) in rep.matches
    cols = ForbiddenSet.from_assignments(col, [("x",) * 3])
    assert forbidden_scan(field, cols).consistent


def test_pattern_shift_and_json(z2):
    p = Pattern(((), z2.parse_element("a")), ((1, None, 0, 0), None))
    moved = shift_act(z2.parse_element("b"), p, z2)
    assert moved.support == (z2.parse_element("b"), z2.parse_element("a b"))
    with pytest.raises(PreconditionError):
        shift_act((), p)
    forb = ForbiddenSet(p.support, [p])
    back = load_forbidden_json(z2, forb.to_json(z2))
    assert back.support == forb.support and back.patterns == forb.patterns
    with pytest.raises(ConfigError):
        load_forbidden_json(z2, "{}")
    with pytest.raises(PreconditionError):
        ForbiddenSet(((),), [p])


def test_pattern_too_big_for_window(z2):
    b = build_ball(z2, radius=1)
    forb = ForbiddenSet.from_assignments(((), z2.parse_element("a^5")), [(None, None)])
    with pytest.raises(PreconditionError):
        forbidden_scan(SymbolField(b, [0] * len(b)), forb)


# --- pipeline -----------------------------------------------------------------------

def test_pipeline_tree(f2):
    b = build_ball(f2, radius=5)
    h, sigma = coding_pipeline(b, fixtures.ray("f2_a", f2))
    from conftest import free_text
    assert all(h(v) == tree_busemann(free_text(x), "a") for v, x in enumerate(b.vertices))
    assert sigma.letter(0) == (-1, 1, 1, 1)


def test_pipeline_axis(z2):
    b = build_ball(z2, radius=5)
    h, sigma = coding_pipeline(b, fixtures.ray("z2_x_axis", z2))
    assert all(h(v) == -xy(x)[0] + abs(xy(x)[1]) for v, x in enumerate(b.vertices))
    assert loop_check(sigma).passed


def test_pipeline_free_product(zz):
    b = build_ball(zz, radius=4)
    h, sigma = coding_pipeline(b, fixtures.ray("z2_star_z_increasing_powers", zz))
    assert loop_check(sigma).passed and h(0) == 0


def test_pipeline_rejects_offset_ray(z2):
    b = build_ball(z2, center=z2.parse_element("a"), radius=3)
    with pytest.raises(PreconditionError):
        coding_pipeline(b, fixtures.ray("z2_x_axis", z2))
