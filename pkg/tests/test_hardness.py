from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from thompson_closure.diagram import reduce
from thompson_closure.hardness import (
    HardnessError,
    balance,
    conjugacy_instance,
    derive,
    drop_symbol,
    eliminate_fresh,
    encode,
    expand_symbol,
    explicit_replacement,
    find_encoded_seed,
    find_prefix,
    format_presentation,
    free_reduce,
    parse_presentation,
    positive_system,
    positivize,
    shift_words,
    tree_encode,
)
from thompson_closure.rewriting import validate_tree_system

Z_TEXT = "gens: a b\nrel: a b A B\nrel: a B\n"


def rank(rows):
    """Rank over Q by Gaussian elimination on Fractions."""
    m = [[Fraction(x) for x in r] for r in rows]
    r = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def exponent_sums(word, n):
    v = [0] * n
    for g, s in word:
        v[g] += s
    return v


def holds_in_abelianization(gp, lhs, rhs):
    """Whether lhs rhs^-1 dies in G/[G,G] tensored with Q."""
    n = len(gp.generators)
    rows = [exponent_sums(r, n) for r in gp.relators]
    d = [a - b for a, b in zip(exponent_sums(lhs, n), exponent_sums(rhs, n))]
    return rank(rows) == rank(rows + [d])


presentations = st.integers(1, 3).flatmap(lambda m: st.tuples(
    st.just(m),
    st.lists(st.lists(st.tuples(st.integers(0, m - 1), st.sampled_from((1, -1))), min_size=1, max_size=4),
             min_size=m, max_size=m + 1),
))


def make(m, rels):
    gens = " ".join("abc"[:m])
    lines = [f"gens: {gens}"]
    for r in rels:
        lines.append("rel: " + " ".join("abc"[g] if s > 0 else "ABC"[g] for g, s in r))
    return parse_presentation("\n".join(lines) + "\n")


def test_parse_and_format():
    gp = parse_presentation(Z_TEXT)
    assert gp.generators == ("a", "b")
    assert gp.relators == (((0, 1), (1, 1), (0, -1), (1, -1)), ((0, 1), (1, -1)))
    assert parse_presentation(format_presentation(gp)) == gp
    with pytest.raises(HardnessError):
        parse_presentation("rel: a\n")
    with pytest.raises(HardnessError):
        parse_presentation("gens: a\nrel: q\n")


def test_free_reduce():
    assert free_reduce([(0, 1), (1, 1), (1, -1), (0, -1)]) == ()
    assert free_reduce([(0, 1), (0, 1), (0, -1)]) == ((0, 1),)


def test_balance_shape():
    b = balance(parse_presentation(Z_TEXT))
    assert b.generators == ("a0", "a1", "a2")
    assert b.relators[0] == ((0, 1), (1, 1), (1, 1), (2, 1))
    assert b.relators[2] == ((1, 1), (2, -1))
    with pytest.raises(HardnessError):
        balance(parse_presentation("gens: a b\nrel: a\n"))


def test_shift_words_for_two_generators():
    sh = shift_words(2)
    assert sh.E == (0, 1, 1, 2) and sh.E_t == (1, 2, 0, 1)
    assert sh.left == ((0, 1, 1, 2), (1, 1, 2, 0), (2, 0, 1, 1))
    # the right shift for a_1 ends at its second occurrence
    assert sh.right == ((1, 1, 2, 0), (2, 0, 1, 1), (0, 1, 1, 2))


def test_z_example_positive_relations():
    # G' is Z with a1 = a2 = t and a0 = t^-3: every relation must have equal images
    _, pp, enc = encode(parse_presentation(Z_TEXT))
    image = {0: -3, 1: 1, 2: 1}
    for v, target in pp.relations:
        assert sum(image[a] for a in v) == image[target]
    ks = [len(v) for v, _ in pp.relations]
    assert len(enc.system.alphabet) == 3 + sum(k - 2 for k in ks)
    assert len(enc.system.rules) == sum(k - 1 for k in ks)
    assert (len(enc.system.alphabet), len(enc.system.rules)) == (32, 32)


@settings(max_examples=40, deadline=None)
@given(presentations)
def test_positive_relations_hold(data):
    m, rels = data
    balanced, pp, enc = encode(make(m, rels))
    sh = pp.shifts
    for j in range(1, len(balanced.relators)):
        # substituting E back gives the positive relator; dropping it gives the original
        w = explicit_replacement(balanced, j)
        assert expand_symbol(w, sh.E) == tuple((g, 1) for g in pp.positive_relators[j - 1])
        assert drop_symbol(w) == free_reduce(balanced.relators[j])
    for v, target in pp.relations:
        assert holds_in_abelianization(balanced, [(a, 1) for a in v], [(target, 1)])


@settings(max_examples=40, deadline=None)
@given(presentations)
def test_encoding_is_a_tree_system(data):
    m, rels = data
    _, pp, enc = encode(make(m, rels))
    assert validate_tree_system(enc.system).ok
    # with fresh letters substituted every rule reads as a suffix of a positive relation
    expanded = eliminate_fresh(enc)
    relations = {(tuple(v), (t,)) for v, t in pp.relations}
    assert {(lhs, rhs) for lhs, rhs in expanded if len(rhs) == 1 and rhs[0] <= len(pp.generators) - 1} >= relations
    # a final a0 can neither appear nor disappear
    for v, t in pp.relations:
        assert (v[-1] == 0) == (t == 0)


def test_tree_encode_rejects_short_relations():
    pp = positivize(balance(parse_presentation(Z_TEXT)))
    bad = type(pp)(pp.generators, ((pp.relations[0][0][:2], 0),) + pp.relations[1:], pp.positive_relators, pp.shifts)
    with pytest.raises(HardnessError):
        tree_encode(bad)


def test_a0_must_stay_last():
    _, _, enc = encode(parse_presentation(Z_TEXT))
    with pytest.raises(HardnessError):
        find_prefix(enc, (1,), cap=12)


def test_derive_lifts_to_the_tree_system():
    _, pp, enc = encode(parse_presentation(Z_TEXT))
    v, t = pp.relations[1]
    d = derive(enc, v, (t,), cap=len(v))
    assert d is not None and d.top == v and d.bottom == (t,)
    assert d.system == enc.system
    assert derive(enc, (1,), (2,), cap=12) is None


def test_prefix_and_delta_on_z_example():
    _, pp, enc = encode(parse_presentation(Z_TEXT))
    u = (1, 0)
    p, psi = find_prefix(enc, u, cap=13)
    assert psi.top == (0,) and psi.bottom == p + (0,) + u
    seed = find_encoded_seed(enc, cap=37, max_states=1_500_000)
    assert seed is not None and reduce(seed).moves
    inst = conjugacy_instance(enc, u, u, seed, psi=psi, phi=psi)
    assert inst.delta_u == inst.delta_v
    assert inst.delta_u.top == (0,) and inst.delta_u.bottom == (0,)
    assert positive_system(pp).distinguished == 0
