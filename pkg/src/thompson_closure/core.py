"""Stallings 2-cores of finitely generated subgroups of F.

The core is built by gluing the top and bottom edges of every generator's
diagram to a distinguished edge ``ρ`` and folding cells that share their top
edge or their bottom pair.  Each core cell has a one-edge side (``top``) and a
two-edge side (``bottom``); the cells read as rules ``bottom -> top``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .diagram import Diagram, Move, PlaneGraph, compose, enumerate_rtl, invert, split_spherical
from .rewriting import RewritingSystem, Rule
from .thompson import TreeDiagram, to_diagram


class CoreError(ValueError):
    pass


RHO = 0


class UnionFind:
    """Union-find over integers, smallest id wins."""

    def __init__(self):
        self.parent: Dict[int, int] = {}

    def add(self, x: int) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def edge_name(i: int) -> str:
    if i == 0:
        return "ρ"
    if i <= 26:
        return chr(ord("a") + i - 1)
    return f"e{i}"


@dataclass(frozen=True)
class Core:
    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    cells: Tuple[Tuple[int, int, int], ...]
    iota: int
    tau: int
    rho: int = RHO
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(edge_name(i) for i in range(len(self.edges))))

    @property
    def degenerate(self) -> bool:
        return self.iota == self.tau

    def src(self, e: int) -> int:
        return self.edges[e][0]

    def dst(self, e: int) -> int:
        return self.edges[e][1]

    def cell_with_top(self, e: int) -> Optional[Tuple[int, int, int]]:
        for c in self.cells:
            if c[0] == e:
                return c
        return None

    def signature(self) -> Tuple:
        return (self.vertex_count, self.edges, tuple(sorted(self.cells)), self.iota, self.tau)


def _glue_generator(d: Diagram, uf_e: UnionFind, uf_v: UnionFind, ends: Dict[int, Tuple[int, int]],
                    cells: List[Tuple[int, int, int]], e_base: int, v_base: int) -> Tuple[int, int]:
    g = PlaneGraph(d)
    for i in range(len(g.label)):
        e = e_base + i
        uf_e.add(e)
        ends[e] = (v_base + g.start[i], v_base + g.end[i])
    for v in range(g.vertex_count):
        uf_v.add(v_base + v)
    for c in g.cells:
        single, pair = (c.tops, c.bots) if len(c.tops) == 1 else (c.bots, c.tops)
        cells.append((e_base + single[0], e_base + pair[0], e_base + pair[1]))
    for e in g.top + g.bottom:
        _merge_edges(RHO, e_base + e, uf_e, uf_v, ends)
    return e_base + len(g.label), v_base + g.vertex_count


def _merge_edges(a: int, b: int, uf_e: UnionFind, uf_v: UnionFind, ends: Dict[int, Tuple[int, int]]) -> bool:
    if not uf_e.union(a, b):
        return False
    uf_v.union(ends[a][0], ends[b][0])
    uf_v.union(ends[a][1], ends[b][1])
    return True


def build_core(gens: Sequence[TreeDiagram], seed: Optional[int] = None) -> Core:
    """Fold the glued generator diagrams to a fixpoint.

    ``seed`` shuffles the folding order; the resulting core does not depend on it.
    """
    if not gens:
        raise CoreError("need at least one generator")
    rng = random.Random(seed) if seed is not None else None
    uf_e, uf_v = UnionFind(), UnionFind()
    ends: Dict[int, Tuple[int, int]] = {RHO: (0, 1)}
    uf_e.add(RHO)
    uf_v.add(0)
    uf_v.add(1)
    cells: List[Tuple[int, int, int]] = []
    e_next, v_next = 1, 2
    diagrams = [to_diagram(g) for g in gens]
    if rng is not None:
        rng.shuffle(diagrams)
    for d in diagrams:
        e_next, v_next = _glue_generator(d, uf_e, uf_v, ends, cells, e_next, v_next)
    changed = True
    while changed:
        changed = False
        if rng is not None:
            rng.shuffle(cells)
        by_top: Dict[int, Tuple[int, int]] = {}
        by_bottom: Dict[Tuple[int, int], int] = {}
        for top, bl, br in cells:
            top, bl, br = uf_e.find(top), uf_e.find(bl), uf_e.find(br)
            if top in by_top:
                ol, orr = by_top[top]
                changed |= _merge_edges(ol, bl, uf_e, uf_v, ends)
                changed |= _merge_edges(orr, br, uf_e, uf_v, ends)
            else:
                by_top[top] = (bl, br)
            if (bl, br) in by_bottom:
                changed |= _merge_edges(by_bottom[(bl, br)], top, uf_e, uf_v, ends)
            else:
                by_bottom[(bl, br)] = top
        cells = list({(uf_e.find(t), uf_e.find(l), uf_e.find(r)) for t, l, r in cells})
    return _canonical_core(uf_e, uf_v, ends, cells)


def _canonical_core(uf_e: UnionFind, uf_v: UnionFind, ends, cells) -> Core:
    children = {t: (l, r) for t, l, r in cells}
    order = [uf_e.find(RHO)]
    index = {order[0]: 0}
    i = 0
    while i < len(order):
        e = order[i]
        i += 1
        for child in children.get(e, ()):
            if child not in index:
                index[child] = len(order)
                order.append(child)
    live = sorted({uf_e.find(e) for e in uf_e.parent})
    for e in live:
        if e not in index:
            index[e] = len(order)
            order.append(e)
    iota, tau = uf_v.find(ends[RHO][0]), uf_v.find(ends[RHO][1])
    vindex = {iota: 0}
    if tau not in vindex:
        vindex[tau] = 1
    edge_list = []
    for e in order:
        s, t = uf_v.find(ends[e][0]), uf_v.find(ends[e][1])
        for v in (s, t):
            if v not in vindex:
                vindex[v] = len(vindex)
        edge_list.append((vindex[s], vindex[t]))
    new_cells = tuple(sorted((index[t], index[l], index[r]) for t, l, r in cells))
    return Core(len(vindex), tuple(edge_list), new_cells, 0, vindex[tau])


def extract_system(c: Core) -> RewritingSystem:
    rules = tuple(Rule((l, r), (t,), i) for i, (t, l, r) in enumerate(c.cells))
    return RewritingSystem(c.names, rules, RHO)


@dataclass(frozen=True)
class CoreStats:
    n: int
    m: int
    f: int
    degenerate: bool


def core_stats(c: Core) -> CoreStats:
    boundary = 1 if c.degenerate else 2
    return CoreStats(c.vertex_count - boundary, len(c.edges) - 1, len(c.cells), c.degenerate)


# --- membership -------------------------------------------------------------


@dataclass(frozen=True)
class MembershipResult:
    accepted: bool
    certificate: Optional[Diagram] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _label_expansions(system: RewritingSystem, edges, start: int):
    labels: List[int] = [start]
    moves: List[Move] = []
    for i, e in enumerate(edges):
        pos = len(e.left)
        top = labels[pos]
        rules = system.rules_with_rhs((top,))
        if not rules:
            return None, f"cell {i + 1}: no rule has right-hand side {system.alphabet[top]}"
        rule = rules[0]
        labels[pos:pos + 1] = list(rule.lhs)
        moves.append(Move(pos, rule, False))
    return Diagram(system, (start,), tuple(moves)), ""


def label_diagram(system: RewritingSystem, d: Diagram, letter: int = RHO) -> MembershipResult:
    """Try to label a reduced diagram over ``x x -> x`` as an (a,a)-diagram over a tree system."""
    if not d.moves:
        return MembershipResult(True, Diagram(system, (letter,)), "")
    s = split_spherical(d)
    upper, why = _label_expansions(system, enumerate_rtl(s.positive), letter)
    if upper is None:
        return MembershipResult(False, None, "upper half: " + why)
    lower, why = _label_expansions(system, enumerate_rtl(invert(s.negative)), letter)
    if lower is None:
        return MembershipResult(False, None, "lower half: " + why)
    if upper.bottom != lower.bottom:
        return MembershipResult(
            False, None,
            f"horizontal labels differ: {system.spell(upper.bottom)} vs {system.spell(lower.bottom)}",
        )
    return MembershipResult(True, compose(upper, invert(lower)), "")


def membership(c: Core, g: TreeDiagram, system: Optional[RewritingSystem] = None) -> MembershipResult:
    """Decide whether ``g`` lies in the closure of the subgroup whose core is ``c``."""
    system = system or extract_system(c)
    return label_diagram(system, to_diagram(g), RHO)


# --- paths in the core ------------------------------------------------------


@dataclass(frozen=True)
class WordClass:
    kind: str  # left, right, both, neither, empty
    start: Optional[int]
    end: Optional[int]


def classify_word(c: Core, w: Sequence[int]) -> WordClass:
    """Where a word of edges sits in the core: a path from ι, into τ, both, or neither."""
    for a in w:
        if not 0 <= a < len(c.edges):
            raise CoreError(f"letter {a!r} is not an edge of the core")
    if not w:
        return WordClass("empty", None, None)
    for x, y in zip(w, w[1:]):
        if c.dst(x) != c.src(y):
            return WordClass("neither", None, None)
    s, t = c.src(w[0]), c.dst(w[-1])
    from_iota, to_tau = s == c.iota, t == c.tau
    kind = "both" if from_iota and to_tau else "left" if from_iota else "right" if to_tau else "neither"
    return WordClass(kind, s, t)


def path_end(c: Core, w: Sequence[int], start: int) -> Optional[int]:
    v = start
    for a in w:
        if c.src(a) != v:
            return None
        v = c.dst(a)
    return v


# --- text formats -----------------------------------------------------------


def format_core(c: Core) -> str:
    lines = [f"vertices {c.vertex_count}", f"iota {c.iota}", f"tau {c.tau}"]
    for i, (s, t) in enumerate(c.edges):
        lines.append(f"edge {i} {s} {t} {c.names[i]}")
    for t, l, r in c.cells:
        lines.append(f"cell {t} {l} {r}")
    lines.append(f"rho {c.rho}")
    return "\n".join(lines) + "\n"


def parse_core(text: str) -> Core:
    nv = None
    iota = tau = None
    rho = RHO
    edges: Dict[int, Tuple[int, int]] = {}
    names: Dict[int, str] = {}
    cells = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            key = parts[0]
            if key in ("vertices", "vertex"):
                nv = int(parts[1])
            elif key == "iota":
                iota = int(parts[1])
            elif key == "tau":
                tau = int(parts[1])
            elif key == "edge":
                eid = int(parts[1])
                edges[eid] = (int(parts[2]), int(parts[3]))
                names[eid] = parts[4] if len(parts) > 4 else edge_name(eid)
            elif key == "cell":
                cells.append((int(parts[1]), int(parts[2]), int(parts[3])))
            elif key == "rho":
                rho = int(parts[1])
            else:
                raise CoreError(f"line {lineno}: unknown keyword {key!r}")
        except (IndexError, ValueError):
            raise CoreError(f"line {lineno}: malformed {line.strip()!r}") from None
    if rho != RHO:
        raise CoreError("the distinguished edge must have id 0")
    if sorted(edges) != list(range(len(edges))) or RHO not in edges:
        raise CoreError("edge ids must be 0..m")
    if nv is None:
        nv = 1 + max(v for st in edges.values() for v in st)
    for eid, (s, t) in sorted(edges.items()):
        if not (0 <= s < nv and 0 <= t < nv):
            raise CoreError(f"edge {eid} ({s} -> {t}) leaves the vertex range 0..{nv - 1}")
    if iota is None:
        iota = edges[RHO][0]
    if tau is None:
        tau = edges[RHO][1]
    if (iota, tau) != edges[RHO]:
        raise CoreError("ρ must run from iota to tau")
    for t, l, r in cells:
        if not all(x in edges for x in (t, l, r)):
            raise CoreError(f"cell {(t, l, r)} uses an unknown edge")
        if edges[l][1] != edges[r][0] or edges[l][0] != edges[t][0] or edges[r][1] != edges[t][1]:
            raise CoreError(f"cell {(t, l, r)} does not bound a disc")
    n = len(edges)
    return Core(nv, tuple(edges[i] for i in range(n)), tuple(sorted(cells)), iota, tau, RHO,
                tuple(names[i] for i in range(n)))


def core_to_dot(c: Core) -> str:
    lines = ["digraph core {", "  rankdir=LR;"]
    for v in range(c.vertex_count):
        label = "ι" if v == c.iota else "τ" if v == c.tau else str(v)
        lines.append(f'  v{v} [label="{label}"];')
    for i, (s, t) in enumerate(c.edges):
        style = ', color=red, penwidth=2' if i == c.rho else ""
        lines.append(f'  v{s} -> v{t} [label="{c.names[i]}"{style}];')
    for t, l, r in c.cells:
        lines.append(f"  // cell {c.names[l]} {c.names[r]} -> {c.names[t]}")
    lines.append("}")
    return "\n".join(lines) + "\n"
