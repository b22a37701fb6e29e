"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Sequence, Tuple

from thompson_closure.diagram import Diagram, Move
from thompson_closure.rewriting import RewritingSystem, Rule, neighbours
from thompson_closure.thompson import X0, X1, IDENTITY, TreeDiagram, multiply


def random_system(rng: random.Random, max_letters: int = 4, max_rules: int = 4) -> RewritingSystem:
    k = rng.randint(1, max_letters)
    rules = []
    seen = set()
    for _ in range(rng.randint(1, max_rules)):
        lhs = tuple(rng.randrange(k) for _ in range(rng.randint(1, 3)))
        rhs = tuple(rng.randrange(k) for _ in range(rng.randint(1, 2)))
        if lhs == rhs or (lhs, rhs) in seen:
            continue
        seen.add((lhs, rhs))
        rules.append(Rule(lhs, rhs, len(rules)))
    if not rules:
        rules.append(Rule((0, 0), (0,), 0))
    return RewritingSystem(tuple("abcd"[:k]), tuple(rules))


def random_walk(rs: RewritingSystem, rng: random.Random, start: Sequence[int], steps: int, cap: int = 8) -> Diagram:
    w = tuple(start)
    moves = []
    for _ in range(steps):
        options = list(neighbours(w, rs, cap))
        if not options:
            break
        e = rng.choice(options)
        moves.append(Move(len(e.left), e.rule, e.forward))
        w = e.target
    return Diagram(rs, tuple(start), tuple(moves))


def random_diagram(rng: random.Random, max_word: int = 8, steps: int = 12) -> Diagram:
    rs = random_system(rng)
    top = tuple(rng.randrange(len(rs.alphabet)) for _ in range(rng.randint(1, max_word)))
    return random_walk(rs, rng, top, rng.randint(0, steps), cap=max_word)


def shuffle_commuting(d: Diagram, rng: random.Random, swaps: int = 30) -> Diagram:
    """Swap adjacent moves acting on disjoint spans; the diagram is unchanged."""
    moves = list(d.moves)
    for _ in range(swaps):
        if len(moves) < 2:
            break
        i = rng.randrange(len(moves) - 1)
        a, b = moves[i], moves[i + 1]
        da = len(a.dst) - len(a.src)
        if b.offset + len(b.src) <= a.offset:
            # b is left of a: a shifts by b's growth once b goes first
            db = len(b.dst) - len(b.src)
            moves[i], moves[i + 1] = b, Move(a.offset + db, a.rule, a.forward)
        elif b.offset >= a.offset + len(a.dst):
            moves[i], moves[i + 1] = Move(b.offset - da, b.rule, b.forward), a
    return Diagram(d.system, d.top, tuple(moves))


def insert_dipole(d: Diagram, rng: random.Random) -> Diagram:
    """Insert a cell followed by its mirror somewhere in the trace."""
    words = d.words()
    i = rng.randrange(len(words))
    options = list(neighbours(words[i], d.system))
    if not options:
        return d
    e = rng.choice(options)
    m = Move(len(e.left), e.rule, e.forward)
    moves = list(d.moves)
    moves[i:i] = [m, m.flipped()]
    return Diagram(d.system, d.top, tuple(moves))


def trace_reduce_count(d: Diagram) -> int:
    """Cell count after cancelling dipoles found by tracking edge identities in the trace.

    Independent of the plane-graph implementation: a later move that consumes
    exactly the edges produced by an earlier move, with the mirrored rule,
    cancels against it.
    """
    moves = list(d.moves)
    while True:
        found = _find_trace_dipole(d.top, moves)
        if found is None:
            return len(moves)
        i, j = found
        a = moves[i]
        grow = len(a.dst) - len(a.src)
        start = a.offset
        between = []
        for m in moves[i + 1:j]:
            if m.offset + len(m.src) <= start:
                start += len(m.dst) - len(m.src)
            else:
                m = Move(m.offset - grow, m.rule, m.forward)
            between.append(m)
        moves = moves[:i] + between + moves[j + 1:]
        Diagram(d.system, d.top, tuple(moves))  # raises if the cancellation broke the trace


def _find_trace_dipole(top, moves) -> Tuple[int, int] | None:
    ids = list(range(len(top)))
    fresh = len(top)
    produced_by = {}
    for j, m in enumerate(moves):
        k = len(m.src)
        consumed = ids[m.offset:m.offset + k]
        key = tuple(consumed)
        if key in produced_by:
            i = produced_by[key]
            a = moves[i]
            if a.rule == m.rule and a.forward != m.forward:
                return i, j
        new = list(range(fresh, fresh + len(m.dst)))
        fresh += len(m.dst)
        ids[m.offset:m.offset + k] = new
        produced_by[tuple(new)] = j
    return None


# --- elements of F --------------------------------------------------------


def random_element(rng: random.Random, length: int) -> TreeDiagram:
    g = IDENTITY
    for _ in range(length):
        base = rng.choice((X0, X1))
        g = multiply(g, base if rng.random() < 0.5 else base.inverse())
    return g


def random_dyadic(rng: random.Random, depth: int = 12) -> Fraction:
    return Fraction(rng.randrange(2 ** depth + 1), 2 ** depth)


def copy_into(g: TreeDiagram, u: str) -> TreeDiagram:
    """The copy of ``g`` supported on the dyadic interval [u], identity elsewhere."""
    pairs: List[Tuple[str, str]] = []
    # complement of [u]: siblings along the path from the root
    for i in range(len(u)):
        sib = u[:i] + ("1" if u[i] == "0" else "0")
        pairs.append((sib, sib))
    pairs.extend((u + a, u + b) for a, b in g.pairs)
    pairs.sort(key=lambda p: (Fraction(int(p[0], 2), 2 ** len(p[0])) if p[0] else Fraction(0)))
    return TreeDiagram(tuple(pairs))


def two_bump() -> Tuple[TreeDiagram, TreeDiagram, TreeDiagram]:
    """``f = f1 f2`` with x0 copied onto [0, 1/2] and onto [1/2, 1]."""
    f1 = copy_into(X0, "0")
    f2 = copy_into(X0, "1")
    return multiply(f1, f2), f1, f2
