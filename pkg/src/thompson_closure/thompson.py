"""Elements of Thompson's group F.

An element is stored as its reduced table of branch pairs ``u -> v`` (binary
strings); the leaves ``u`` form the plus tree and the leaves ``v`` the minus
tree.  The same element can be viewed as a piecewise-linear map of [0, 1] or
as a spherical diagram over the one-letter system ``x x -> x``.
Composition is left to right: ``(g * h)(t) = h(g(t))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .diagram import Diagram, Move, compose, invert, map_diagram, reduce, split_spherical
from .rewriting import DUNCE, is_tree_system

Pair = Tuple[str, str]

X = 0
_DUNCE_RULE = DUNCE.rules[0]


class ElementError(ValueError):
    pass


def dyadic(value) -> Fraction:
    """Coerce to an exact dyadic rational; rejects anything else."""
    q = Fraction(value)
    d = q.denominator
    if d & (d - 1):
        raise ElementError(f"{value} is not a dyadic rational")
    return q


def interval(u: str) -> Tuple[Fraction, Fraction]:
    """The dyadic interval ``[u]`` of reals whose binary expansion starts with ``u``."""
    lo = Fraction(int(u, 2), 2 ** len(u)) if u else Fraction(0)
    return lo, lo + Fraction(1, 2 ** len(u))


def _check_code(words: Sequence[str], what: str) -> None:
    for w in words:
        if set(w) - {"0", "1"}:
            raise ElementError(f"{what}: {w!r} is not a binary word")
    pos = Fraction(0)
    for w in words:
        lo, hi = interval(w)
        if lo != pos:
            raise ElementError(f"{what}: branches do not form a complete ordered prefix code (gap or overlap at {w or 'ε'!r})")
        pos = hi
    if pos != 1:
        raise ElementError(f"{what}: branches do not cover [0,1]")


def _reduce_pairs(pairs: List[Pair]) -> Tuple[Pair, ...]:
    out: List[Pair] = []
    for u, v in pairs:
        out.append((u, v))
        # merge sibling pairs (w0 -> z0, w1 -> z1) into w -> z, innermost first
        while len(out) >= 2:
            (u1, v1), (u2, v2) = out[-2], out[-1]
            if (u1 and v1 and u1[-1] == "0" and v1[-1] == "0" and u2 == u1[:-1] + "1"
                    and v2 == v1[:-1] + "1"):
                out[-2:] = [(u1[:-1], v1[:-1])]
            else:
                break
    return tuple(out)


@dataclass(frozen=True)
class TreeDiagram:
    pairs: Tuple[Pair, ...]

    def __post_init__(self):
        pairs = tuple((str(u), str(v)) for u, v in self.pairs)
        _check_code([u for u, _ in pairs], "domain")
        _check_code([v for _, v in pairs], "range")
        object.__setattr__(self, "pairs", _reduce_pairs(list(pairs)))

    @property
    def plus_leaves(self) -> Tuple[str, ...]:
        return tuple(u for u, _ in self.pairs)

    @property
    def minus_leaves(self) -> Tuple[str, ...]:
        return tuple(v for _, v in self.pairs)

    @property
    def carets(self) -> int:
        return len(self.pairs) - 1

    def is_identity(self) -> bool:
        return self.pairs == (("", ""),)

    def __call__(self, t) -> Fraction:
        return evaluate(self, t)

    def __mul__(self, other: "TreeDiagram") -> "TreeDiagram":
        return multiply(self, other)

    def __pow__(self, n: int) -> "TreeDiagram":
        return power(self, n)

    def inverse(self) -> "TreeDiagram":
        return invert_element(self)

    def __str__(self) -> str:
        return format_element(self)


IDENTITY = TreeDiagram((("", ""),))


def from_branch_pairs(pairs: Iterable[Tuple[str, str]]) -> TreeDiagram:
    return TreeDiagram(tuple(pairs))


def to_branch_pairs(g: TreeDiagram) -> Tuple[Pair, ...]:
    return g.pairs


def _all_ones(s: str) -> bool:
    return s.count("1") == len(s)


def multiply(g: TreeDiagram, h: TreeDiagram) -> TreeDiagram:
    """``g`` then ``h``.

    Both range leaves of ``g`` and domain leaves of ``h`` are ordered prefix
    codes, so a single merge pass refines them to a common subdivision.
    """
    out = []
    gp, hp = g.pairs, h.pairs
    i = j = 0
    while i < len(gp) and j < len(hp):
        u, v = gp[i]
        p, q = hp[j]
        if v.startswith(p):
            out.append((u, q + v[len(p):]))
            i += 1
            if _all_ones(v[len(p):]):
                j += 1
        else:
            out.append((u + p[len(v):], q))
            j += 1
            if _all_ones(p[len(v):]):
                i += 1
    return TreeDiagram(tuple(out))


def invert_element(g: TreeDiagram) -> TreeDiagram:
    return TreeDiagram(tuple((v, u) for u, v in g.pairs))


def power(g: TreeDiagram, n: int) -> TreeDiagram:
    base = g if n >= 0 else invert_element(g)
    out = IDENTITY
    n = abs(n)
    while n:
        if n & 1:
            out = multiply(out, base)
        n >>= 1
        if n:
            base = multiply(base, base)
    return out


def evaluate(g: TreeDiagram, t) -> Fraction:
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ElementError(f"{t} is outside [0,1]")
    for u, v in g.pairs:
        lo, hi = interval(u)
        if lo <= t <= hi:
            vlo, vhi = interval(v)
            return vlo + (t - lo) * (vhi - vlo) / (hi - lo)
    raise ElementError("branch table does not cover t")  # unreachable for valid elements


@dataclass(frozen=True)
class PLPiece:
    start: Fraction
    end: Fraction
    value: Fraction
    slope: Fraction


def pl_pieces(g: TreeDiagram) -> List[PLPiece]:
    """Maximal linear pieces: (breakpoint, image of breakpoint, slope)."""
    pieces: List[PLPiece] = []
    for u, v in g.pairs:
        lo, hi = interval(u)
        vlo, vhi = interval(v)
        slope = (vhi - vlo) / (hi - lo)
        if pieces and pieces[-1].slope == slope:
            pieces[-1] = PLPiece(pieces[-1].start, hi, pieces[-1].value, slope)
        else:
            pieces.append(PLPiece(lo, hi, vlo, slope))
    return pieces


def breakpoints(g: TreeDiagram) -> List[Fraction]:
    return [p.start for p in pl_pieces(g)[1:]]


def format_pl_table(g: TreeDiagram) -> str:
    rows = ["breakpoint\tvalue\tslope"]
    for p in pl_pieces(g):
        rows.append(f"{p.start}\t{p.value}\t{p.slope}")
    rows.append("1\t1\t-")
    return "\n".join(rows) + "\n"


# --- generators and words ---------------------------------------------------

X0 = TreeDiagram((("00", "0"), ("01", "10"), ("1", "11")))
X1 = TreeDiagram((("0", "0"), ("100", "10"), ("101", "110"), ("11", "111")))


def generator(n: int) -> TreeDiagram:
    """``x_n``, with ``x_{n+1} = x_0^{-n} x_1 x_0^n`` for n >= 1."""
    if n == 0:
        return X0
    return multiply(multiply(power(X0, -(n - 1)), X1), power(X0, n - 1))


_TOKEN = re.compile(r"^x(\d+)(?:\^(-?\d+))?$")


def from_word(text: str) -> TreeDiagram:
    """Parse a word such as ``x0 x1^-1 x0^2`` in the generators ``x_n``."""
    g = IDENTITY
    for token in text.split():
        m = _TOKEN.match(token)
        if not m:
            raise ElementError(f"cannot parse generator {token!r}")
        g = multiply(g, power(generator(int(m.group(1))), int(m.group(2) or 1)))
    return g


def commutator(g: TreeDiagram, h: TreeDiagram) -> TreeDiagram:
    """``g^-1 h^-1 g h``."""
    return multiply(multiply(invert_element(g), invert_element(h)), multiply(g, h))


# --- diagrams over x x -> x -------------------------------------------------


def _expansion_moves(leaves: Sequence[str]) -> List[Move]:
    """Moves growing the single edge x into the tree with the given leaves."""
    moves: List[Move] = []
    leafset = set(leaves)
    # preorder, left first: a node's offset is the number of leaves already passed
    stack = [""]
    passed = 0
    while stack:
        node = stack.pop()
        if node in leafset:
            passed += 1
            continue
        moves.append(Move(passed, _DUNCE_RULE, False))
        stack.append(node + "1")
        stack.append(node + "0")
    return moves


def to_diagram(g: TreeDiagram) -> Diagram:
    plus = Diagram(DUNCE, (X,), tuple(_expansion_moves(g.plus_leaves)))
    minus = Diagram(DUNCE, (X,), tuple(_expansion_moves(g.minus_leaves)))
    return reduce(compose(plus, invert(minus)))


def _leaves_of(part: Diagram) -> List[str]:
    addr = [""]
    for m in part.moves:
        if m.forward:
            raise ElementError("expected an expanding diagram")
        a = addr[m.offset]
        addr[m.offset:m.offset + 1] = [a + "0", a + "1"]
    return addr


def from_diagram(d: Diagram) -> TreeDiagram:
    """Read the tree pair off a spherical (x,x)-diagram over ``x x -> x``."""
    if d.system != DUNCE:
        raise ElementError("diagram is not over the system x x -> x")
    if d.top != (X,) or d.bottom != (X,):
        raise ElementError("diagram is not an (x,x)-diagram")
    d = reduce(d)
    if not d.moves:
        return IDENTITY
    s = split_spherical(d)
    plus = _leaves_of(s.positive)
    minus = _leaves_of(invert(s.negative))
    return TreeDiagram(tuple(zip(plus, minus)))


def embed_into_dunce(d: Diagram) -> Diagram:
    """Replace every letter by x and every cell by an x x -> x cell."""
    if not is_tree_system(d.system):
        raise ElementError("relabeling into F needs a tree rewriting system")
    return map_diagram(d, DUNCE, lambda r: _DUNCE_RULE, lambda a: X)


def relabel_into_F(d: Diagram) -> TreeDiagram:
    if len(d.top) != 1 or d.top != d.bottom:
        raise ElementError("relabeling into F needs an (a,a)-diagram")
    return from_diagram(embed_into_dunce(d))


# --- dynamics ---------------------------------------------------------------


def _subdivide_at(g: TreeDiagram, alpha: Fraction) -> List[Pair]:
    pairs = list(g.pairs)
    while True:
        for i, (u, v) in enumerate(pairs):
            lo, hi = interval(u)
            if lo < alpha < hi:
                pairs[i:i + 1] = [(u + "0", v + "0"), (u + "1", v + "1")]
                break
        else:
            return pairs


def components_at(g: TreeDiagram, alpha) -> Tuple[TreeDiagram, TreeDiagram]:
    """Split ``g`` at a fixed dyadic point into its parts left and right of it."""
    alpha = dyadic(alpha)
    if not 0 < alpha < 1:
        raise ElementError("alpha must lie in (0,1)")
    if evaluate(g, alpha) != alpha:
        raise ElementError(f"g does not fix {alpha}")
    pairs = _subdivide_at(g, alpha)
    left = [(u, v) for u, v in pairs if interval(u)[1] <= alpha]
    right = [(u, v) for u, v in pairs if interval(u)[0] >= alpha]
    g1 = TreeDiagram(tuple(left + [(u, u) for u, _ in right]))
    g2 = TreeDiagram(tuple([(u, u) for u, _ in left] + right))
    return g1, g2


@dataclass(frozen=True)
class Orbital:
    start: Fraction
    end: Fraction
    push_up: bool

    @property
    def direction(self) -> str:
        return "up" if self.push_up else "down"


def support_and_orbitals(g: TreeDiagram) -> List[Orbital]:
    """Maximal open intervals moved by ``g``, tagged push-up or push-down."""
    marks = {Fraction(0), Fraction(1)}
    for p in pl_pieces(g):
        marks.update((p.start, p.end))
        if p.slope != 1:
            # fixed point of t -> value + slope (t - start)
            t = (p.value - p.slope * p.start) / (1 - p.slope)
            if p.start < t < p.end:
                marks.add(t)
    pts = sorted(marks)
    fixed = {t for t in pts if evaluate(g, t) == t}
    out: List[Orbital] = []
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        diff = evaluate(g, mid) - mid
        if diff == 0:
            continue
        up = diff > 0
        if out and out[-1].end == a and a not in fixed:
            out[-1] = Orbital(out[-1].start, b, up)
        else:
            out.append(Orbital(a, b, up))
    return out


# --- text format ------------------------------------------------------------


def parse_element(text: str) -> TreeDiagram:
    """Parse ``u -> v`` lines (``ε`` is the empty word) and/or ``word:`` lines.

    Several pieces are multiplied in the order given.
    """
    pairs: List[Pair] = []
    g: Optional[TreeDiagram] = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("word:"):
            w = from_word(line[5:])
            g = w if g is None else multiply(g, w)
        elif "->" in line:
            u, v = (s.strip() for s in line.split("->", 1))
            pairs.append((u.replace("ε", ""), v.replace("ε", "")))
        else:
            raise ElementError(f"line {lineno}: cannot parse {line!r}")
    if pairs:
        t = TreeDiagram(tuple(pairs))
        g = t if g is None else multiply(g, t)
    if g is None:
        raise ElementError("no element given")
    return g


def parse_generators(text: str) -> List[TreeDiagram]:
    """Elements separated by lines consisting of ``---``."""
    chunks, cur = [], []
    for line in text.splitlines():
        if line.strip() == "---":
            chunks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    chunks.append("\n".join(cur))
    return [parse_element(c) for c in chunks if any(l.split("#", 1)[0].strip() for l in c.splitlines())]


def format_element(g: TreeDiagram) -> str:
    return "\n".join(f"{u or 'ε'} -> {v or 'ε'}" for u, v in g.pairs) + "\n"
