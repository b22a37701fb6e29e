"""Diagrams over a rewriting system, stored as a top word plus a trace of moves.

A move rewrites the current word at a given offset, forwards (``lhs -> rhs``)
or backwards.  Replaying the moves from the top word yields the bottom word.
Equality of diagrams is decided by reducing to a canonical representative:
dipoles are cancelled on the materialized plane graph and the surviving cells
are emitted leftmost-first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .rewriting import (
    DerivationPath,
    RewritingError,
    RewritingSystem,
    Rule,
    SquierEdge,
    Word,
    is_tree_system,
)


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    offset: int
    rule: Rule
    forward: bool = True

    @property
    def src(self) -> Word:
        return self.rule.lhs if self.forward else self.rule.rhs

    @property
    def dst(self) -> Word:
        return self.rule.rhs if self.forward else self.rule.lhs

    def flipped(self) -> "Move":
        return Move(self.offset, self.rule, not self.forward)


def _apply(word: Word, move: Move) -> Word:
    src = move.src
    o = move.offset
    if o < 0 or word[o:o + len(src)] != src:
        raise DiagramError(f"move at offset {o} (rule {move.rule.id}) does not match word {word}")
    return word[:o] + move.dst + word[o + len(src):]


@dataclass(frozen=True)
class Diagram:
    system: RewritingSystem
    top: Word
    moves: Tuple[Move, ...] = ()
    bottom: Word = field(init=False, compare=False)
    _canonical: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "top", tuple(self.top))
        object.__setattr__(self, "moves", tuple(self.moves))
        self.system.check_word(self.top)
        w = self.top
        for m in self.moves:
            w = _apply(w, m)
        object.__setattr__(self, "bottom", w)

    @property
    def cells(self) -> int:
        return len(self.moves)

    def __len__(self) -> int:
        return len(self.moves)

    def is_spherical(self) -> bool:
        return self.top == self.bottom

    def words(self) -> List[Word]:
        """The sequence of words visited by the trace, top first."""
        out = [self.top]
        for m in self.moves:
            out.append(_apply(out[-1], m))
        return out

    def edges(self) -> List[SquierEdge]:
        out = []
        w = self.top
        for m in self.moves:
            n = len(m.src)
            out.append(SquierEdge(w[:m.offset], m.rule, m.forward, w[m.offset + n:]))
            w = _apply(w, m)
        return out

    def path(self) -> DerivationPath:
        return DerivationPath(tuple(self.edges()), self.top, self.bottom)

    def __mul__(self, other: "Diagram") -> "Diagram":
        return compose(self, other)

    def __add__(self, other: "Diagram") -> "Diagram":
        return sum_diagrams(self, other)

    def __repr__(self) -> str:
        sp = self.system.spell
        return f"Diagram(top={sp(self.top)!r}, bottom={sp(self.bottom)!r}, cells={len(self.moves)})"


def trivial(system: RewritingSystem, w: Sequence[int] = ()) -> Diagram:
    return Diagram(system, tuple(w), (), True)


def atomic(system: RewritingSystem, e: SquierEdge) -> Diagram:
    return Diagram(system, e.source, (Move(len(e.left), e.rule, e.forward),))


def path_to_diagram(system: RewritingSystem, p: DerivationPath) -> Diagram:
    return Diagram(system, p.source, tuple(Move(len(e.left), e.rule, e.forward) for e in p.edges))


def compose(d1: Diagram, d2: Diagram) -> Diagram:
    if d1.system is not d2.system and d1.system != d2.system:
        raise DiagramError("diagrams are over different systems")
    if d1.bottom != d2.top:
        sp = d1.system.spell
        raise DiagramError(f"cannot compose: bottom {sp(d1.bottom)!r} differs from top {sp(d2.top)!r}")
    return Diagram(d1.system, d1.top, d1.moves + d2.moves)


def sum_diagrams(d1: Diagram, d2: Diagram) -> Diagram:
    if d1.system is not d2.system and d1.system != d2.system:
        raise DiagramError("diagrams are over different systems")
    shift = len(d1.bottom)
    moves = d1.moves + tuple(Move(m.offset + shift, m.rule, m.forward) for m in d2.moves)
    return Diagram(d1.system, d1.top + d2.top, moves)


def invert(d: Diagram) -> Diagram:
    return Diagram(d.system, d.bottom, tuple(m.flipped() for m in reversed(d.moves)))


def shift_diagram(d: Diagram, left: Sequence[int] = (), right: Sequence[int] = ()) -> Diagram:
    """``ε(left) + d + ε(right)``."""
    left, right = tuple(left), tuple(right)
    n = len(left)
    return Diagram(d.system, left + d.top + right, tuple(Move(m.offset + n, m.rule, m.forward) for m in d.moves))


# --- plane graph ------------------------------------------------------------


@dataclass
class Cell:
    rule: Rule
    forward: bool
    tops: List[int]
    bots: List[int]
    alive: bool = True

    @property
    def expanding(self) -> bool:
        return len(self.tops) == 1 and len(self.bots) == 2


class PlaneGraph:
    """Edges, vertices and cells of a diagram.

    Every edge records the cell above it (``producer``, None on the top path)
    and the cell below it (``consumer``, None on the bottom path).  Vertex data
    is only meaningful before any dipole has been cancelled.
    """

    def __init__(self, d: Diagram):
        self.system = d.system
        self.label: List[int] = []
        self.producer: List[Optional[int]] = []
        self.consumer: List[Optional[int]] = []
        self.start: List[int] = []
        self.end: List[int] = []
        self.cells: List[Cell] = []
        self.vertex_count = len(d.top) + 1
        cur = [self._new_edge(a, None, i, i + 1) for i, a in enumerate(d.top)]
        verts = list(range(len(d.top) + 1))
        self.top = list(cur)
        self.top_vertices = list(verts)
        for m in d.moves:
            k = len(m.src)
            consumed = cur[m.offset:m.offset + k]
            cid = len(self.cells)
            dst = m.dst
            inner = list(range(self.vertex_count, self.vertex_count + len(dst) - 1))
            self.vertex_count += len(dst) - 1
            vs = [verts[m.offset]] + inner + [verts[m.offset + k]]
            produced = [self._new_edge(a, cid, vs[i], vs[i + 1]) for i, a in enumerate(dst)]
            for e in consumed:
                self.consumer[e] = cid
            self.cells.append(Cell(m.rule, m.forward, consumed, produced))
            cur[m.offset:m.offset + k] = produced
            verts[m.offset:m.offset + k + 1] = vs
        self.bottom = cur
        self.bottom_vertices = verts

    def _new_edge(self, letter: int, producer: Optional[int], s: int, t: int) -> int:
        self.label.append(letter)
        self.producer.append(producer)
        self.consumer.append(None)
        self.start.append(s)
        self.end.append(t)
        return len(self.label) - 1

    def live_cells(self) -> List[int]:
        return [i for i, c in enumerate(self.cells) if c.alive]

    def cell_top_word(self, cid: int) -> Word:
        return tuple(self.label[e] for e in self.cells[cid].tops)

    def cell_bottom_word(self, cid: int) -> Word:
        return tuple(self.label[e] for e in self.cells[cid].bots)

    def _dipole_partner(self, c2: int) -> Optional[int]:
        cell = self.cells[c2]
        c1 = self.producer[cell.tops[0]]
        if c1 is None:
            return None
        upper = self.cells[c1]
        if upper.rule.id == cell.rule.id and upper.forward != cell.forward and upper.bots == cell.tops:
            return c1
        return None

    def cancel_dipoles(self) -> int:
        """Cancel dipoles until none is left; returns the number removed."""
        removed = 0
        work = self.live_cells()
        while work:
            c2 = work.pop()
            if not self.cells[c2].alive:
                continue
            c1 = self._dipole_partner(c2)
            if c1 is None:
                continue
            upper, lower = self.cells[c1], self.cells[c2]
            upper.alive = lower.alive = False
            removed += 1
            for keep, drop in zip(upper.tops, lower.bots):
                below = self.consumer[drop]
                self.consumer[keep] = below
                if below is None:
                    self.bottom[self.bottom.index(drop)] = keep
                else:
                    tops = self.cells[below].tops
                    tops[tops.index(drop)] = keep
                    work.append(below)
        return removed

    def linearize(self, leftmost: bool = True, first: Optional[Callable[[Cell], bool]] = None) -> Tuple[List[Move], List[Move]]:
        """Emit the live cells as moves, always firing the leftmost (or rightmost) ready cell.

        With ``first`` given, cells satisfying it are fired before any other
        cell; the two groups are returned separately.
        """
        pending: Dict[int, int] = {}
        on_top = set(self.top)
        for cid in self.live_cells():
            pending[cid] = sum(1 for e in self.cells[cid].tops if e not in on_top)
        cur = list(self.top)

        def ready_in_order(cands):
            cands = sorted(cands, key=lambda c: cur.index(self.cells[c].tops[0]))
            # the stack pops from the end, so the cell to fire next goes last
            return cands[::-1] if leftmost else cands

        initial = [c for c, n in pending.items() if n == 0]
        phases: List[List[Move]] = [[], []]
        deferred: List[int] = []
        if first is not None:
            deferred = [c for c in initial if not first(self.cells[c])]
            initial = [c for c in initial if first(self.cells[c])]
        stack = ready_in_order(initial)
        phase = 0 if first is not None else 1
        while True:
            while stack:
                cid = stack.pop()
                cell = self.cells[cid]
                pos = cur.index(cell.tops[0])
                k = len(cell.tops)
                if cur[pos:pos + k] != cell.tops:
                    raise DiagramError("plane graph is inconsistent")
                cur[pos:pos + k] = cell.bots
                phases[phase].append(Move(pos, cell.rule, cell.forward))
                fresh = []
                for e in cell.bots:
                    below = self.consumer[e]
                    if below is not None:
                        pending[below] -= 1
                        if pending[below] == 0:
                            fresh.append(below)
                if phase == 0:
                    deferred.extend(c for c in fresh if not first(self.cells[c]))
                    fresh = [c for c in fresh if first(self.cells[c])]
                stack.extend(ready_in_order(fresh))
            if phase == 1:
                break
            phase = 1
            stack = ready_in_order(deferred)
            deferred = []
        fired = len(phases[0]) + len(phases[1])
        if fired != len(pending):
            raise DiagramError("plane graph has cells that never become ready")
        return phases[0], phases[1]

    def to_dot(self, name: str = "diagram") -> str:
        sp = self.system.alphabet
        lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [shape=point];"]
        for v in range(self.vertex_count):
            lines.append(f"  v{v};")
        for e in range(len(self.label)):
            lines.append(f'  v{self.start[e]} -> v{self.end[e]} [label="{sp[self.label[e]]}", id="e{e}"];')
        for cid, c in enumerate(self.cells):
            if not c.alive:
                continue
            kind = "fwd" if c.forward else "bwd"
            edges = " ".join(f"e{e}" for e in c.tops + c.bots)
            lines.append(f'  // cell {cid}: rule {c.rule.id} {kind}; edges {edges}')
        lines.append("}")
        return "\n".join(lines) + "\n"


def reduce(d: Diagram) -> Diagram:
    """The canonical reduced representative of ``d``."""
    if d._canonical:
        return d
    g = PlaneGraph(d)
    g.cancel_dipoles()
    _, moves = g.linearize(leftmost=True)
    return Diagram(d.system, d.top, tuple(moves), True)


def is_reduced_diagram(d: Diagram) -> bool:
    g = PlaneGraph(d)
    return g.cancel_dipoles() == 0


def equal(d1: Diagram, d2: Diagram) -> bool:
    if d1.system != d2.system:
        return False
    r1, r2 = reduce(d1), reduce(d2)
    return r1.top == r2.top and r1.bottom == r2.bottom and r1.moves == r2.moves


def canonical_key(d: Diagram) -> Tuple:
    r = reduce(d)
    return (r.top, tuple((m.offset, m.rule.id, m.forward) for m in r.moves))


def to_dot(d: Diagram, name: str = "diagram") -> str:
    return PlaneGraph(d).to_dot(name)


@dataclass(frozen=True)
class SphericalSplit:
    positive: Diagram
    negative: Diagram
    horizontal: Word


def _require_tree(d: Diagram) -> None:
    if not is_tree_system(d.system):
        raise DiagramError("operation needs a tree rewriting system")


def split_spherical(d: Diagram) -> SphericalSplit:
    """Split a reduced spherical diagram over a tree system along its horizontal path."""
    _require_tree(d)
    if not d.is_spherical():
        raise DiagramError("diagram is not spherical")
    g = PlaneGraph(d)
    if g.cancel_dipoles():
        raise DiagramError("diagram is not reduced")
    try:
        pos_moves, neg_moves = g.linearize(leftmost=True, first=lambda c: c.expanding)
    except DiagramError as exc:
        raise DiagramError(f"no horizontal path separates the cells: {exc}") from None
    positive = Diagram(d.system, d.top, tuple(pos_moves))
    negative = Diagram(d.system, positive.bottom, tuple(neg_moves))
    if any(_is_expanding(m) for m in negative.moves):
        raise DiagramError("no horizontal path separates the cells: an expanding cell lies below a reducing one")
    if len(positive.moves) != len(negative.moves):
        raise DiagramError("halves have different cell counts")
    return SphericalSplit(reduce(positive), reduce(negative), positive.bottom)


def _is_expanding(m: Move) -> bool:
    return len(m.src) == 1 and len(m.dst) == 2


def enumerate_rtl(part: Diagram) -> List[SquierEdge]:
    """Atomic factorization of an all-expanding diagram, rightmost cell first.

    Each edge has the form ``(u, rule, backward, v)`` and the i-th one
    rewrites the bottom word of the first i-1 cells.
    """
    _require_tree(part)
    if not all(_is_expanding(m) for m in part.moves):
        raise DiagramError("enumerate_rtl needs a diagram whose cells are all expanding")
    g = PlaneGraph(part)
    _, moves = g.linearize(leftmost=False)
    return Diagram(part.system, part.top, tuple(moves)).edges()


def sum_components(d: Diagram) -> List[Diagram]:
    """Decompose a spherical diagram into spherical summands.

    Each summand is trivial or cannot be written as a sum of spherical
    diagrams, and no two consecutive summands are trivial.
    """
    if not d.is_spherical():
        raise DiagramError("diagram is not spherical")
    g = PlaneGraph(d)
    n = len(d.top)
    cuts = [k for k in range(n + 1) if g.top_vertices[k] == g.bottom_vertices[k]]
    # each top edge belongs to the segment between consecutive cut points
    seg_of_pos = []
    for s in range(len(cuts) - 1):
        seg_of_pos.extend([s] * (cuts[s + 1] - cuts[s]))
    nseg = len(cuts) - 1
    seg_moves: List[List[Move]] = [[] for _ in range(nseg)]
    cur = list(seg_of_pos)
    lengths = [cuts[s + 1] - cuts[s] for s in range(nseg)]
    for m in d.moves:
        k = len(m.src)
        segs = set(cur[m.offset:m.offset + k])
        if len(segs) != 1:
            raise DiagramError("a cell straddles a cut vertex")
        s = segs.pop()
        before = sum(lengths[:s])
        seg_moves[s].append(Move(m.offset - before, m.rule, m.forward))
        cur[m.offset:m.offset + k] = [s] * len(m.dst)
        lengths[s] += len(m.dst) - k
    pieces: List[Diagram] = []
    pending_trivial: Word = ()
    for s in range(nseg):
        top = d.top[cuts[s]:cuts[s + 1]]
        if not seg_moves[s]:
            pending_trivial += top
            continue
        if pending_trivial:
            pieces.append(trivial(d.system, pending_trivial))
            pending_trivial = ()
        pieces.append(Diagram(d.system, top, tuple(seg_moves[s])))
    if pending_trivial or not pieces:
        pieces.append(trivial(d.system, pending_trivial))
    return pieces


def map_diagram(d: Diagram, target: RewritingSystem, rule_map: Callable[[Rule], Rule],
                letter_map: Callable[[int], int]) -> Diagram:
    """Relabel letters and cells of ``d`` into another system."""
    top = tuple(letter_map(a) for a in d.top)
    return Diagram(target, top, tuple(Move(m.offset, rule_map(m.rule), m.forward) for m in d.moves))


def format_diagram(d: Diagram) -> str:
    lines = ["top: " + " ".join(d.system.alphabet[a] for a in d.top)]
    for m in d.moves:
        lines.append(f"@{m.offset} {m.rule.id} {'fwd' if m.forward else 'bwd'}")
    return "\n".join(lines) + "\n"


def parse_diagram(text: str, system: RewritingSystem) -> Diagram:
    top: Optional[Word] = None
    moves = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("top:"):
            top = system.word(line[4:].replace("ε", " "))
        elif line.startswith("@"):
            parts = line[1:].split()
            if len(parts) != 3 or parts[2] not in ("fwd", "bwd"):
                raise DiagramError(f"line {lineno}: expected '@<offset> <ruleid> fwd|bwd'")
            try:
                rule = system.rule(int(parts[1]))
            except (KeyError, ValueError):
                raise DiagramError(f"line {lineno}: unknown rule {parts[1]!r}") from None
            moves.append(Move(int(parts[0]), rule, parts[2] == "fwd"))
        else:
            raise DiagramError(f"line {lineno}: cannot parse {line!r}")
    if top is None:
        raise DiagramError("missing 'top:' line")
    try:
        return Diagram(system, top, tuple(moves))
    except RewritingError as exc:
        raise DiagramError(str(exc)) from None
