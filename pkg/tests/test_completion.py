import random
from itertools import product

from hypothesis import given, settings, strategies as st

from thompson_closure.completion import (
    TAG_IOTA,
    TAG_R,
    TAG_TAU,
    default_length_cap,
    minimal_paths,
    semi_complete,
    verify_semicompletion,
)
from thompson_closure.core import build_core, core_stats
from thompson_closure.rewriting import shortlex_key
from thompson_closure.thompson import X0, X1

from helpers import random_element

seeds = st.integers(0, 1_000_000)


def brute_force_tables(c, max_len):
    """ShortLex-least paths found by enumerating every edge sequence up to ``max_len``."""
    iota = {c.iota: ()}
    tau = {c.tau: ()}
    m = len(c.edges)
    for n in range(1, max_len + 1):
        for path in product(range(m), repeat=n):
            if any(c.dst(a) != c.src(b) for a, b in zip(path, path[1:])):
                continue
            s, t = c.src(path[0]), c.dst(path[-1])
            if s == c.iota and (t not in iota or shortlex_key(path) < shortlex_key(iota[t])):
                iota[t] = path
            if t == c.tau and (s not in tau or shortlex_key(path) < shortlex_key(tau[s])):
                tau[s] = path
    return iota, tau


def test_x0_tables_and_rules():
    sc = semi_complete(build_core([X0]))
    rs = sc.combined
    assert sc.tables.iota_of == ((), (0,), (1,))
    assert sc.tables.tau_of == ((0,), (), (2,))
    spell = lambda rules: sorted((rs.spell(r.lhs), rs.spell(r.rhs)) for r in rules)  # noqa: E731
    assert spell(sc.r_iota) == [("a b", "ρ"), ("a c", "a")]
    assert spell(sc.r_tau) == [("a b", "ρ"), ("c b", "b")]
    rule = rs.rule(0)
    assert sc.rule_tags(rule) == {TAG_R, TAG_IOTA, TAG_TAU}


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_minimal_paths_match_brute_force(seed):
    rng = random.Random(seed)
    c = build_core([random_element(rng, rng.randint(1, 5))])
    if len(c.edges) > 7:
        return
    tables = minimal_paths(c)
    longest = max(len(w) for w in tables.iota_of + tables.tau_of)
    iota, tau = brute_force_tables(c, longest)
    assert tuple(iota[v] for v in range(c.vertex_count)) == tables.iota_of
    assert tuple(tau[v] for v in range(c.vertex_count)) == tables.tau_of


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_verification_passes_on_random_cores(seed):
    rng = random.Random(seed)
    c = build_core([random_element(rng, rng.randint(1, 8)) for _ in range(2)])
    sc = semi_complete(c)
    report = verify_semicompletion(sc)
    assert report.ok, [ch.as_dict() for ch in report.checks if not ch.ok]
    stats = core_stats(c)
    if not c.degenerate:
        assert len(sc.r_iota) == len(sc.r_tau) == stats.m - stats.n
    assert sc.combined.is_decreasing()


def test_report_schema_and_cap():
    sc = semi_complete(build_core([X0, X1]))
    report = verify_semicompletion(sc)
    d = report.as_dict()
    assert d["schema"] == 1 and d["length_cap"] == default_length_cap(sc)
    assert {ch["name"] for ch in d["checks"]} >= {"left_divisors", "right_divisors", "euler_counts"}


def test_verification_catches_a_broken_table():
    sc = semi_complete(build_core([X0]))
    # drop the rule a c -> a: the word a c now has no reduced equivalent among the tables
    broken = sc.combined.with_rules(r for r in sc.combined.rules if r.rhs != (1,))
    sc2 = type(sc)(sc.core, sc.base, broken, sc.tables, sc.r_iota, sc.r_tau, sc.tags)
    report = verify_semicompletion(sc2)
    assert not report.ok
