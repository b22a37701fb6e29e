"""Generators of the closure of a subgroup and the constructive factorization.

The generating edges ``X`` are the edges ``(ι_{ℓ-}, ℓ -> r, τ_{ℓ+})`` for rules of
the semi-completion that are not initial rules.  Each edge yields a loop at ρ,
hence a spherical diagram.  ``θ`` replaces every cell of an added rule by a
fixed diagram over the core rules; ``Y = θ(X)`` generates the closure.
``factorize`` writes a (ρ,ρ)-diagram as a word in ``X`` of length at most
three times its cell count.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .completion import TAG_IOTA, TAG_R, SemiCompletion
from .core import RHO, path_end
from .diagram import (
    Diagram,
    Move,
    atomic,
    compose,
    enumerate_rtl,
    invert,
    path_to_diagram,
    reduce,
    shift_diagram,
    split_spherical,
    trivial,
)
from .rewriting import (
    LEFT,
    RIGHT,
    DerivationPath,
    Rule,
    SquierEdge,
    Word,
    derivation_to_normal_form,
    find_derivation,
    normal_form,
    principal_edge,
)
from .thompson import TreeDiagram, relabel_into_F, multiply, IDENTITY


class ClosureError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorX:
    index: int
    edge: SquierEdge
    loop: Diagram


@dataclass(frozen=True)
class GeneratorY:
    x_index: int
    diagram: Diagram
    element: TreeDiagram


Letter = Tuple[int, int]  # (generator index, +1 or -1)


@dataclass(frozen=True)
class FactorWord:
    letters: Tuple[Letter, ...]

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "FactorWord":
        return FactorWord(tuple((i, -s) for i, s in reversed(self.letters)))

    def __str__(self) -> str:
        if not self.letters:
            return "ε"
        return " ".join(f"y{i}" if s > 0 else f"y{i}^-1" for i, s in self.letters)


def free_reduce(letters: Sequence[Letter]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for g, s in letters:
        if out and out[-1] == (g, -s):
            out.pop()
        else:
            out.append((g, s))
    return tuple(out)


def _left_path_to_rho(sc: SemiCompletion, w: Word) -> DerivationPath:
    d = derivation_to_normal_form(w, sc.combined, LEFT)
    if d.target != (RHO,):
        raise ClosureError(f"{sc.combined.spell(w)} is not equivalent to ρ")
    return d


def edge_class_diagram(e: SquierEdge, sc: SemiCompletion) -> Diagram:
    """The loop ``d(e-, ρ)^-1 · e · d(e+, ρ)`` as a reduced diagram over the semi-completion."""
    to_rho_src = _left_path_to_rho(sc, e.source)
    to_rho_dst = _left_path_to_rho(sc, e.target)
    p = to_rho_src.inverse().then(DerivationPath((e,), e.source, e.target)).then(to_rho_dst)
    return reduce(path_to_diagram(sc.combined, p))


def _dunce_edges(sc: SemiCompletion) -> List[SquierEdge]:
    # positive edges (u, ρρ -> ρ, v) with u, v reduced that are not principal left edges
    rs = sc.combined
    if len(rs.rules) != 1 or rs.rules[0].lhs != (RHO, RHO) or rs.rules[0].rhs != (RHO,):
        raise ClosureError("degenerate cores other than the one-cell x x -> x complex are not supported")
    rule = rs.rules[0]
    out = []
    for u in ((), (RHO,)):
        for v in ((), (RHO,)):
            e = SquierEdge(u, rule, True, v)
            if principal_edge(e.source, rs, LEFT) != e:
                out.append(e)
    return out


def generating_edges(sc: SemiCompletion) -> List[GeneratorX]:
    if "X" in sc._cache:
        return sc._cache["X"]
    c = sc.core
    if c.degenerate:
        edges = _dunce_edges(sc)
    else:
        edges = []
        for rule in sc.combined.rules:
            if TAG_IOTA in sc.rule_tags(rule):
                continue
            first, last = rule.lhs[0], rule.lhs[-1]
            edges.append(SquierEdge(sc.iota(c.src(first)), rule, True, sc.tau(c.dst(last))))
    gens = [GeneratorX(i, e, edge_class_diagram(e, sc)) for i, e in enumerate(edges)]
    sc._cache["X"] = gens
    return gens


def _x_lookup(sc: SemiCompletion) -> Dict[Tuple[Word, int, Word], int]:
    if "X_lookup" not in sc._cache:
        sc._cache["X_lookup"] = {(g.edge.left, g.edge.rule.id, g.edge.right): g.index for g in generating_edges(sc)}
    return sc._cache["X_lookup"]


# --- the retract θ ----------------------------------------------------------


def _cap_schedule(lhs: Word, rhs: Word, cap: Optional[int]) -> List[int]:
    if cap is not None:
        return [cap]
    env = os.environ.get("THOMPSON_CORE_CAP")
    if env:
        return [int(env)]
    lo = max(len(lhs), len(rhs))
    hi = 2 * lo + 4
    return list(range(lo + 1, hi + 1))


def rule_diagram(sc: SemiCompletion, rule: Rule, cap: Optional[int] = None) -> Diagram:
    """The fixed (ℓ,r)-diagram over the core rules used by θ for ``rule``."""
    cache = sc._cache.setdefault("theta", {})
    if rule.id in cache:
        return cache[rule.id]
    if TAG_R in sc.rule_tags(rule):
        d = atomic(sc.base, SquierEdge((), sc.base.rule(rule.id), True, ()))
    else:
        path = None
        for bound in _cap_schedule(rule.lhs, rule.rhs, cap):
            path = find_derivation(sc.base, rule.lhs, rule.rhs, bound)
            if path is not None:
                break
        if path is None:
            sp = sc.base.spell
            raise ClosureError(f"no derivation {sp(rule.lhs)} -> {sp(rule.rhs)} over the core rules within the cap")
        d = reduce(path_to_diagram(sc.base, path))
    cache[rule.id] = d
    return d


def retract_theta(d: Diagram, sc: SemiCompletion, cap: Optional[int] = None) -> Diagram:
    """Map a diagram over the semi-completion to one over the core rules."""
    base = sc.base
    moves: List[Move] = []
    word = d.top
    for m in d.moves:
        n = len(m.src)
        left, right = word[:m.offset], word[m.offset + n:]
        if TAG_R in sc.rule_tags(m.rule):
            moves.append(Move(m.offset, base.rule(m.rule.id), m.forward))
        else:
            piece = rule_diagram(sc, m.rule, cap)
            if not m.forward:
                piece = invert(piece)
            moves.extend(shift_diagram(piece, left, right).moves)
        word = left + m.dst + right
    return reduce(Diagram(base, d.top, tuple(moves)))


def lift(d: Diagram, sc: SemiCompletion) -> Diagram:
    """View a diagram over the core rules as a diagram over the semi-completion."""
    rs = sc.combined
    return Diagram(rs, d.top, tuple(Move(m.offset, rs.rule(m.rule.id), m.forward) for m in d.moves))


def generating_set_Y(sc: SemiCompletion, cap: Optional[int] = None) -> List[GeneratorY]:
    key = ("Y", cap)
    if key not in sc._cache:
        out = []
        for g in generating_edges(sc):
            y = retract_theta(g.loop, sc, cap)
            out.append(GeneratorY(g.index, y, relabel_into_F(y)))
        sc._cache[key] = out
    return sc._cache[key]


# --- factorization ----------------------------------------------------------


class _Factorizer:
    def __init__(self, sc: SemiCompletion):
        self.sc = sc
        self.rs = sc.combined
        self.lookup = _x_lookup(sc)

    def reduced_left(self, x: Word) -> Word:
        c = self.sc.core
        if c.degenerate:
            return normal_form(x, self.rs, LEFT)
        end = path_end(c, x, c.iota)
        if end is None:
            raise ClosureError(f"{self.rs.spell(x)} is not a path from ι")
        return self.sc.iota(end)

    def edge_letters(self, left: Word, rule: Rule, right: Word) -> List[Letter]:
        """Letter of the positive edge (left, rule, right) when ``right`` is reduced."""
        u = self.reduced_left(left)
        idx = self.lookup.get((u, rule.id, right))
        if idx is not None:
            return [(idx, 1)]
        e = SquierEdge(u, rule, True, right)
        if principal_edge(e.source, self.rs, LEFT) == e:
            return []
        raise ClosureError(f"edge ({self.rs.spell(u)}, rule {rule.id}, {self.rs.spell(right)}) is neither "
                           "a generator nor a principal left edge")

    def right_derivation_letters(self, prefix: Word, v: Word) -> Tuple[List[Letter], Word]:
        d = derivation_to_normal_form(v, self.rs, RIGHT)
        out: List[Letter] = []
        for e in d.edges:
            out.extend(self.edge_letters(prefix + e.left, e.rule, e.right))
        return out, d.target

    def half(self, edges: Sequence[SquierEdge]) -> List[Letter]:
        """Letters for ``[e_1]...[e_n]`` where the e_i enumerate an expanding half right to left."""
        word: List[Letter] = []
        prev_v = prev_vbar = None
        for i, e in enumerate(edges):
            u, v = e.left, e.right
            ul = u + e.rule.lhs
            if i == 0:
                letters, vbar = self.right_derivation_letters(ul, v)
                word.extend(letters)
            else:
                s = v[:len(v) - len(prev_v)]
                if s + prev_v != v:
                    raise ClosureError("right-to-left enumeration broke the suffix chain")
                letters, vbar = self.right_derivation_letters(ul, s + prev_vbar)
                word.extend(letters)
            # e is negative, so its class is the inverse of the positive edge's class
            word.extend((g, -s_) for g, s_ in reversed(self.edge_letters(u, e.rule, vbar)))
            prev_v, prev_vbar = v, vbar
        if edges:
            last = edges[-1]
            letters, _ = self.right_derivation_letters(last.left + last.rule.lhs, last.right)
            word.extend((g, -s_) for g, s_ in reversed(letters))
        return word


def factorize(d: Diagram, sc: SemiCompletion) -> FactorWord:
    """Write a (ρ,ρ)-diagram as a word in the generating edges ``X``."""
    if d.top != (RHO,) or d.bottom != (RHO,):
        raise ClosureError("factorize needs a (ρ,ρ)-diagram")
    if d.system != sc.base:
        d = retract_theta(d, sc)
    # split over the core rules, which form a tree system; the added rules need not
    r = reduce(d)
    if not r.moves:
        return FactorWord(())
    split = split_spherical(r)
    f = _Factorizer(sc)
    upper = f.half(enumerate_rtl(split.positive))
    lower = f.half(enumerate_rtl(invert(split.negative)))
    word = free_reduce(upper + [(g, -s) for g, s in reversed(lower)])
    bound = 3 * len(r.moves)
    if len(word) > bound:
        raise ClosureError(f"factorization has length {len(word)} > 3N = {bound}")
    return FactorWord(word)


def evaluate_word_x(word: FactorWord, sc: SemiCompletion) -> Diagram:
    gens = generating_edges(sc)
    out = trivial(sc.combined, (RHO,))
    for i, s in word.letters:
        loop = gens[i].loop
        out = reduce(compose(out, loop if s > 0 else invert(loop)))
    return out


def evaluate_word_y(word: FactorWord, sc: SemiCompletion, cap: Optional[int] = None) -> TreeDiagram:
    ys = generating_set_Y(sc, cap)
    out = IDENTITY
    for i, s in word.letters:
        el = ys[i].element
        out = multiply(out, el if s > 0 else el.inverse())
    return out


def y_product_diagram(word: FactorWord, sc: SemiCompletion, cap: Optional[int] = None) -> Diagram:
    ys = generating_set_Y(sc, cap)
    out = trivial(sc.base, (RHO,))
    for i, s in word.letters:
        d = ys[i].diagram
        out = reduce(compose(out, d if s > 0 else invert(d)))
    return out


# --- distortion probe -------------------------------------------------------


def random_y_word(rng: random.Random, ngens: int, max_len: int) -> FactorWord:
    if ngens == 0:
        return FactorWord(())
    n = rng.randint(1, max_len)
    return FactorWord(tuple((rng.randrange(ngens), rng.choice((1, -1))) for _ in range(n)))


def distortion_probe(sc: SemiCompletion, samples: int = 1000, seed: int = 0, max_len: int = 10,
                     cap: Optional[int] = None) -> dict:
    """Sample elements of the closure and compare factorization length with cell counts."""
    rng = random.Random(seed)
    ys = generating_set_Y(sc, cap)
    rows = []
    worst = 0.0
    violations = 0
    for k in range(samples):
        w = random_y_word(rng, len(ys), max_len)
        d = y_product_diagram(w, sc, cap)
        n = len(d.moves)
        fw = factorize(d, sc)
        if evaluate_word_y(fw, sc, cap) != relabel_into_F(d):
            raise ClosureError(f"sample {k}: factorization does not evaluate back to the element")
        if len(fw) > 3 * n:
            violations += 1
        ratio = len(fw) / n if n else 0.0
        worst = max(worst, ratio)
        rows.append({"sample": k, "cells": n, "factor_length": len(fw), "sampled_length": len(w),
                     "ratio": round(ratio, 6)})
    return {
        "schema": 1,
        "seed": seed,
        "samples": samples,
        "generators": len(ys),
        "max_ratio": round(worst, 6),
        "bound": 3,
        "violations": violations,
        "rows": rows,
    }
