"""Semi-completion of a core rewriting system.

For each vertex ν of the core, ``ι_ν`` is the ShortLex-least directed path
from ι to ν and ``τ_ν`` the least path from ν to τ.  The initial rules
``ι_{e-} e -> ι_{e+}`` and terminal rules ``e τ_{e+} -> τ_{e-}`` are added to
the core rules; in the enlarged system every divisor of ρ has a unique
reduced form.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .core import Core, CoreError, extract_system
from .rewriting import (
    LEFT,
    RIGHT,
    RewritingSystem,
    Rule,
    Word,
    derivation_to_normal_form,
    is_reduced,
    principal_edge,
    shortlex_key,
)

TAG_R = "R"
TAG_IOTA = "R_iota"
TAG_TAU = "R_tau"


@dataclass(frozen=True)
class MinimalPathTables:
    iota_of: Tuple[Word, ...]
    tau_of: Tuple[Word, ...]


def reorder_core(c: Core, order: Sequence[int]) -> Core:
    """Renumber edges so that ``order`` lists the old ids from least to greatest."""
    order = list(order)
    if sorted(order) != list(range(len(c.edges))):
        raise CoreError("order must be a permutation of the edge ids")
    if order[0] != c.rho:
        raise CoreError("ρ must be the least letter")
    new = {old: i for i, old in enumerate(order)}
    edges = tuple(c.edges[old] for old in order)
    names = tuple(c.names[old] for old in order)
    cells = tuple(sorted((new[t], new[l], new[r]) for t, l, r in c.cells))
    return Core(c.vertex_count, edges, cells, c.iota, c.tau, 0, names)


def minimal_paths(c: Core) -> MinimalPathTables:
    """ShortLex-least paths ι -> ν and ν -> τ under the edge-id order."""
    nv = c.vertex_count
    out_edges: List[List[int]] = [[] for _ in range(nv)]
    in_edges: List[List[int]] = [[] for _ in range(nv)]
    for e, (s, t) in enumerate(c.edges):
        out_edges[s].append(e)
        in_edges[t].append(e)

    def layered(root: int, forward: bool) -> List[Optional[Word]]:
        dist = [-1] * nv
        dist[root] = 0
        queue = deque([root])
        layers = [[root]]
        while queue:
            v = queue.popleft()
            for e in (out_edges[v] if forward else in_edges[v]):
                w = c.dst(e) if forward else c.src(e)
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    if len(layers) <= dist[w]:
                        layers.append([])
                    layers[dist[w]].append(w)
                    queue.append(w)
        best: List[Optional[Word]] = [None] * nv
        best[root] = ()
        for layer in layers[1:]:
            for v in layer:
                cands = []
                for e in (in_edges[v] if forward else out_edges[v]):
                    u = c.src(e) if forward else c.dst(e)
                    if dist[u] == dist[v] - 1:
                        cands.append(best[u] + (e,) if forward else (e,) + best[u])
                best[v] = min(cands)
        return best

    iota_of = layered(c.iota, True)
    tau_of = layered(c.tau, False)
    for v in range(nv):
        if iota_of[v] is None:
            raise CoreError(f"vertex {v} is not reachable from ι")
        if tau_of[v] is None:
            raise CoreError(f"τ is not reachable from vertex {v}")
    return MinimalPathTables(tuple(iota_of), tuple(tau_of))


@dataclass(frozen=True)
class SemiCompletion:
    core: Core
    base: RewritingSystem
    combined: RewritingSystem
    tables: MinimalPathTables
    r_iota: Tuple[Rule, ...]
    r_tau: Tuple[Rule, ...]
    tags: Dict[int, FrozenSet[str]] = field(compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def degenerate(self) -> bool:
        return self.core.degenerate

    def iota(self, v: int) -> Word:
        return self.tables.iota_of[v]

    def tau(self, v: int) -> Word:
        return self.tables.tau_of[v]

    def rule_tags(self, rule: Rule) -> FrozenSet[str]:
        return self.tags[rule.id]


def semi_complete(c: Core) -> SemiCompletion:
    base = extract_system(c)
    tables = minimal_paths(c)
    rules: List[Rule] = list(base.rules)
    tags: Dict[int, set] = {r.id: {TAG_R} for r in rules}
    by_sides: Dict[Tuple[Word, Word], Rule] = {(r.lhs, r.rhs): r for r in rules}
    r_iota: List[Rule] = []
    r_tau: List[Rule] = []

    def add(lhs: Word, rhs: Word, tag: str, bucket: List[Rule]) -> None:
        rule = by_sides.get((lhs, rhs))
        if rule is None:
            rule = Rule(lhs, rhs, len(rules))
            rules.append(rule)
            by_sides[(lhs, rhs)] = rule
            tags[rule.id] = set()
        tags[rule.id].add(tag)
        bucket.append(rule)

    # with ι = τ the initial and terminal words would collapse to the empty word;
    # such cores are used as they are
    if not c.degenerate:
        for e, (s, t) in enumerate(c.edges):
            lhs, rhs = tables.iota_of[s] + (e,), tables.iota_of[t]
            if lhs != rhs:
                add(lhs, rhs, TAG_IOTA, r_iota)
        for e, (s, t) in enumerate(c.edges):
            lhs, rhs = (e,) + tables.tau_of[t], tables.tau_of[s]
            if lhs != rhs:
                add(lhs, rhs, TAG_TAU, r_tau)
    combined = RewritingSystem(base.alphabet, tuple(rules), base.distinguished)
    return SemiCompletion(c, base, combined, tables, tuple(r_iota), tuple(r_tau),
                          {k: frozenset(v) for k, v in tags.items()})


# --- verification -----------------------------------------------------------


def _paths(c: Core, start: int, limit: int, forward: bool):
    """All directed paths of length 1..limit leaving (or entering) ``start``."""
    adj: List[List[int]] = [[] for _ in range(c.vertex_count)]
    for e, (s, t) in enumerate(c.edges):
        adj[s if forward else t].append(e)
    stack = [((), start)]
    while stack:
        w, v = stack.pop()
        if w:
            yield w, v
        if len(w) < limit:
            for e in adj[v]:
                nxt = c.dst(e) if forward else c.src(e)
                stack.append((w + (e,) if forward else (e,) + w, nxt))


def _longest_reduced_prefix(w: Word, rs: RewritingSystem) -> int:
    k = 0
    while k < len(w) and is_reduced(w[:k + 1], rs):
        k += 1
    return k


def _longest_reduced_suffix(w: Word, rs: RewritingSystem) -> int:
    k = 0
    while k < len(w) and is_reduced(w[len(w) - k - 1:], rs):
        k += 1
    return k


@dataclass
class Check:
    name: str
    ok: bool = True
    examined: int = 0
    counterexamples: List[str] = field(default_factory=list)
    skipped: bool = False
    note: str = ""

    def fail(self, msg: str) -> None:
        self.ok = False
        if len(self.counterexamples) < 5:
            self.counterexamples.append(msg)

    def as_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "skipped": self.skipped, "examined": self.examined,
                "counterexamples": self.counterexamples, "note": self.note}


@dataclass
class VerificationReport:
    checks: List[Check]
    length_cap: int
    counts: Dict[str, int]
    degenerate: bool

    @property
    def ok(self) -> bool:
        return all(ch.ok for ch in self.checks)

    def check(self, name: str) -> Check:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"schema": 1, "ok": self.ok, "length_cap": self.length_cap, "degenerate": self.degenerate,
                "counts": self.counts, "checks": [ch.as_dict() for ch in self.checks]}


def default_length_cap(sc: SemiCompletion) -> int:
    return max(len(w) for w in sc.tables.iota_of) + 3


def verify_semicompletion(sc: SemiCompletion, length_cap: Optional[int] = None) -> VerificationReport:
    """Check the semi-completeness properties on all divisor paths up to ``length_cap``."""
    L = default_length_cap(sc) if length_cap is None else length_cap
    rs = sc.combined
    c = sc.core
    sp = rs.spell
    decreasing = Check("rules_decreasing")
    tables_reduced = Check("tables_reduced")
    left_div = Check("left_divisors")
    right_div = Check("right_divisors")
    left_edges = Check("left_edges")
    right_der = Check("right_derivation_bound")
    euler = Check("euler_counts")

    for r in rs.rules:
        decreasing.examined += 1
        if not shortlex_key(r.rhs) < shortlex_key(r.lhs):
            decreasing.fail(f"{sp(r.lhs)} -> {sp(r.rhs)} does not decrease")
    for v in range(c.vertex_count):
        for w, what in ((sc.iota(v), "ι"), (sc.tau(v), "τ")):
            tables_reduced.examined += 1
            if not is_reduced(w, rs):
                tables_reduced.fail(f"{what}_{v} = {sp(w)} is not reduced")

    if c.degenerate:
        for ch in (left_div, right_div, left_edges, right_der):
            ch.skipped = True
            ch.note = "degenerate core (ι = τ)"
        euler.skipped = True
        euler.note = "degenerate core (ι = τ)"
    else:
        iota_tag = TAG_IOTA
        for w, end in _paths(c, c.iota, L, True):
            left_div.examined += 1
            target = sc.iota(end)
            reduced = is_reduced(w, rs)
            if reduced != (w == target):
                left_div.fail(f"{sp(w)}: reduced={reduced} but ι-word is {sp(target)}")
            dl = derivation_to_normal_form(w, rs, LEFT)
            dr = derivation_to_normal_form(w, rs, RIGHT)
            if dl.target != target or dr.target != target:
                left_div.fail(f"{sp(w)}: normal forms {sp(dl.target)}/{sp(dr.target)} differ from {sp(target)}")
            if reduced:
                continue
            left_edges.examined += 1
            k = _longest_reduced_prefix(w, rs)
            e = w[k]
            first = principal_edge(w, rs, LEFT)
            expect_lhs = sc.iota(c.src(e)) + (e,)
            if (first.left != () or first.rule.lhs != expect_lhs or first.rule.rhs != sc.iota(c.dst(e))
                    or first.right != w[k + 1:]):
                left_edges.fail(f"{sp(w)}: principal left edge uses {sp(first.rule.lhs)} -> {sp(first.rule.rhs)}")
            if any(iota_tag not in sc.rule_tags(x.rule) for x in dl.edges):
                left_edges.fail(f"{sp(w)}: left derivation leaves the initial rules")
            if len(dl) > len(w) - k:
                left_edges.fail(f"{sp(w)}: left derivation has {len(dl)} edges, bound {len(w) - k}")
        for w, start in _paths(c, c.tau, L, False):
            right_div.examined += 1
            target = sc.tau(start)
            reduced = is_reduced(w, rs)
            if reduced != (w == target):
                right_div.fail(f"{sp(w)}: reduced={reduced} but τ-word is {sp(target)}")
            dl = derivation_to_normal_form(w, rs, LEFT)
            dr = derivation_to_normal_form(w, rs, RIGHT)
            if dl.target != target or dr.target != target:
                right_div.fail(f"{sp(w)}: normal forms {sp(dl.target)}/{sp(dr.target)} differ from {sp(target)}")
            right_der.examined += 1
            bound = len(w) - _longest_reduced_suffix(w, rs)
            if len(dr) > bound:
                right_der.fail(f"{sp(w)}: right derivation has {len(dr)} edges, bound {bound}")
        stats_n = c.vertex_count - 2
        stats_m = len(c.edges) - 1
        euler.examined = 1
        if not len(sc.r_iota) == len(sc.r_tau) == stats_m - stats_n:
            euler.fail(f"|R_iota|={len(sc.r_iota)}, |R_tau|={len(sc.r_tau)}, m-n={stats_m - stats_n}")
    counts = {
        "rules_R": len(sc.base.rules),
        "rules_R_iota": len(sc.r_iota),
        "rules_R_tau": len(sc.r_tau),
        "rules_combined": len(sc.combined.rules),
        "vertices": c.vertex_count,
        "edges": len(c.edges),
        "cells": len(c.cells),
    }
    return VerificationReport([decreasing, tables_reduced, left_div, right_div, left_edges, right_der, euler],
                              L, counts, c.degenerate)
