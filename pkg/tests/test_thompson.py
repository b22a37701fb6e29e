import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from thompson_closure.diagram import compose, reduce
from thompson_closure.thompson import (
    IDENTITY,
    X0,
    X1,
    ElementError,
    TreeDiagram,
    breakpoints,
    commutator,
    components_at,
    dyadic,
    evaluate,
    format_element,
    from_diagram,
    from_word,
    generator,
    parse_element,
    parse_generators,
    pl_pieces,
    power,
    support_and_orbitals,
    to_diagram,
)

from helpers import random_dyadic, random_element, two_bump

F = Fraction
seeds = st.integers(0, 1_000_000)


@pytest.mark.parametrize("t, value", [
    (F(1, 8), F(1, 4)), (F(1, 4), F(1, 2)), (F(3, 8), F(5, 8)), (F(3, 4), F(7, 8)), (F(0), F(0)), (F(1), F(1)),
])
def test_x0_branches(t, value):
    # .00a -> .0a, .01a -> .10a, .1a -> .11a
    assert X0(t) == value


@pytest.mark.parametrize("t, value", [
    (F(1, 4), F(1, 4)), (F(9, 16), F(5, 8)), (F(5, 8), F(3, 4)), (F(3, 4), F(7, 8)), (F(7, 8), F(15, 16)),
])
def test_x1_branches(t, value):
    # .0a -> .0a, .100a -> .10a, .101a -> .110a, .11a -> .111a
    assert X1(t) == value


def test_standard_relators_are_trivial():
    a = X0 * X1.inverse()
    assert commutator(a, from_word("x0^-1 x1 x0")).is_identity()
    assert commutator(a, from_word("x0^-2 x1 x0^2")).is_identity()
    # x_{n+1} = x_0^-1 x_n x_0 for n >= 1
    assert generator(3) == from_word("x0^-1 x2 x0")


def test_reduced_tables():
    assert TreeDiagram((("0", "0"), ("1", "1"))) == IDENTITY
    assert X0.carets == 2 and X1.carets == 3
    assert (X0 * X0.inverse()).is_identity()


def test_invalid_tables_are_rejected():
    with pytest.raises(ElementError):
        TreeDiagram((("0", "0"), ("11", "1")))
    with pytest.raises(ElementError):
        TreeDiagram((("0", "0"), ("1", "2")))
    with pytest.raises(ElementError):
        dyadic(F(1, 3))


def test_homomorphism_on_random_dyadics():
    rng = random.Random(11)
    for _ in range(1000):
        g, h = random_element(rng, rng.randint(0, 6)), random_element(rng, rng.randint(0, 6))
        t = random_dyadic(rng)
        assert (g * h)(t) == h(g(t))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_diagram_roundtrip_and_product(seed):
    rng = random.Random(seed)
    g, h = random_element(rng, rng.randint(0, 7)), random_element(rng, rng.randint(0, 7))
    assert from_diagram(to_diagram(g)) == g
    assert reduce(compose(to_diagram(g), to_diagram(h))).moves == to_diagram(g * h).moves
    assert to_diagram(g).cells == 2 * g.carets


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_pl_pieces_are_dyadic_with_power_of_two_slopes(seed):
    g = random_element(random.Random(seed), 6)
    pieces = pl_pieces(g)
    assert pieces[0].start == 0 and pieces[-1].end == 1
    for p, q in zip(pieces, pieces[1:]):
        assert p.end == q.start and p.slope != q.slope
    for p in pieces:
        s = p.slope
        assert s.numerator & (s.numerator - 1) == 0 and s.denominator & (s.denominator - 1) == 0
        assert evaluate(g, p.start) == p.value
    assert breakpoints(g) == [p.start for p in pieces[1:]]


def test_power_and_words():
    assert power(X0, 3) == X0 * X0 * X0
    assert power(X0, -2) * power(X0, 2) == IDENTITY
    assert from_word("x0^2 x1^-1") == X0 * X0 * X1.inverse()
    with pytest.raises(ElementError):
        from_word("y0")


def test_two_bump_components():
    f, f1, f2 = two_bump()
    g1, g2 = components_at(f, F(1, 2))
    assert (g1, g2) == (f1, f2)
    orbits = support_and_orbitals(f)
    assert [(o.start, o.end) for o in orbits] == [(0, F(1, 2)), (F(1, 2), 1)]
    assert all(o.direction == "up" for o in orbits)  # x0(t) > t inside its support
    with pytest.raises(ElementError):
        components_at(X0, F(1, 2))


def test_text_format():
    text = format_element(X1)
    assert text.splitlines()[0] == "0 -> 0"
    assert parse_element(text) == X1
    assert parse_element("ε -> ε\nword: x0\n") == X0
    gens = parse_generators("word: x0\n---\n# comment\n00 -> 0\n01 -> 10\n1 -> 11\n")
    assert gens == [X0, X0]
