"""Words, ShortLex order, string rewriting systems and derivations.

Letters are small integers; the integer order is the fixed well order on the
alphabet.  Words are tuples of letters.  A rule ``lhs -> rhs`` may be applied
forwards (``lhs`` replaced by ``rhs``) or backwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

Word = Tuple[int, ...]

LEFT = "left"
RIGHT = "right"


class RewritingError(ValueError):
    pass


def shortlex_key(w: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    return (len(w), tuple(w))


@dataclass(frozen=True)
class Rule:
    lhs: Word
    rhs: Word
    id: int

    def __post_init__(self):
        if not self.lhs or not self.rhs:
            raise RewritingError(f"rule {self.id}: both sides must be non-empty")


@dataclass(frozen=True)
class RewritingSystem:
    alphabet: Tuple[str, ...]
    rules: Tuple[Rule, ...]
    distinguished: Optional[int] = None
    _by_id: Dict[int, Rule] = field(init=False, repr=False, compare=False)
    _by_lhs: Dict[Word, Tuple[Rule, ...]] = field(init=False, repr=False, compare=False)
    _by_rhs: Dict[Word, Tuple[Rule, ...]] = field(init=False, repr=False, compare=False)
    _lhs_lengths: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    _rhs_lengths: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "rules", tuple(self.rules))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise RewritingError("alphabet names must be distinct")
        by_id: Dict[int, Rule] = {}
        by_lhs: Dict[Word, List[Rule]] = {}
        by_rhs: Dict[Word, List[Rule]] = {}
        n = len(self.alphabet)
        for rule in self.rules:
            if rule.id in by_id:
                raise RewritingError(f"duplicate rule id {rule.id}")
            for a in rule.lhs + rule.rhs:
                if not 0 <= a < n:
                    raise RewritingError(f"rule {rule.id} uses letter {a} outside the alphabet")
            by_id[rule.id] = rule
            by_lhs.setdefault(rule.lhs, []).append(rule)
            by_rhs.setdefault(rule.rhs, []).append(rule)
        if self.distinguished not in (None, 0):
            raise RewritingError("the distinguished letter must be the least letter (id 0)")
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_lhs", {k: tuple(v) for k, v in by_lhs.items()})
        object.__setattr__(self, "_by_rhs", {k: tuple(v) for k, v in by_rhs.items()})
        object.__setattr__(self, "_lhs_lengths", tuple(sorted({len(k) for k in by_lhs})))
        object.__setattr__(self, "_rhs_lengths", tuple(sorted({len(k) for k in by_rhs})))

    def __hash__(self):
        return hash((self.alphabet, self.rules, self.distinguished))

    def rule(self, rule_id: int) -> Rule:
        return self._by_id[rule_id]

    def rules_with_lhs(self, lhs: Sequence[int]) -> Tuple[Rule, ...]:
        return self._by_lhs.get(tuple(lhs), ())

    def rules_with_rhs(self, rhs: Sequence[int]) -> Tuple[Rule, ...]:
        return self._by_rhs.get(tuple(rhs), ())

    def letter(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise RewritingError(f"unknown letter {name!r}") from None

    def word(self, text: str | Iterable[str]) -> Word:
        tokens = text.split() if isinstance(text, str) else list(text)
        return tuple(self.letter(t) for t in tokens)

    def spell(self, w: Sequence[int]) -> str:
        return " ".join(self.alphabet[a] for a in w) if w else "ε"

    def check_word(self, w: Sequence[int]) -> None:
        n = len(self.alphabet)
        for a in w:
            if not (isinstance(a, int) and 0 <= a < n):
                raise RewritingError(f"letter {a!r} is not in the alphabet")

    def with_rules(self, rules: Iterable[Rule]) -> "RewritingSystem":
        return RewritingSystem(self.alphabet, tuple(rules), self.distinguished)

    def is_decreasing(self) -> bool:
        return all(shortlex_key(r.rhs) < shortlex_key(r.lhs) for r in self.rules)


@dataclass(frozen=True)
class TreeReport:
    ok: bool
    violations: Tuple[str, ...] = ()


def validate_tree_system(rs: RewritingSystem) -> TreeReport:
    violations = []
    for r in rs.rules:
        if len(r.lhs) != 2 or len(r.rhs) != 1:
            violations.append(
                f"rule {r.id} ({rs.spell(r.lhs)} -> {rs.spell(r.rhs)}) has |lhs|={len(r.lhs)}, |rhs|={len(r.rhs)}"
            )
    for lhs, rules in rs._by_lhs.items():
        if len(rules) > 1:
            violations.append(f"rules {[r.id for r in rules]} share lhs {rs.spell(lhs)}")
    for rhs, rules in rs._by_rhs.items():
        if len(rules) > 1:
            violations.append(f"rules {[r.id for r in rules]} share rhs {rs.spell(rhs)}")
    return TreeReport(not violations, tuple(violations))


def is_tree_system(rs: RewritingSystem) -> bool:
    return validate_tree_system(rs).ok


def shortlex_cmp(w1: Sequence[int], w2: Sequence[int], rs: Optional[RewritingSystem] = None) -> int:
    """Return -1, 0 or 1.  Letters are checked against ``rs`` when given."""
    if rs is not None:
        rs.check_word(w1)
        rs.check_word(w2)
    k1, k2 = shortlex_key(w1), shortlex_key(w2)
    return (k1 > k2) - (k1 < k2)


def is_reduced(w: Sequence[int], rs: RewritingSystem) -> bool:
    w = tuple(w)
    for n in rs._lhs_lengths:
        for i in range(len(w) - n + 1):
            if w[i:i + n] in rs._by_lhs:
                return False
    return True


@dataclass(frozen=True)
class SquierEdge:
    """The edge ``(left, rule, right)`` of the Squier complex.

    A forward edge goes from ``left+lhs+right`` to ``left+rhs+right``; a
    backward edge is its inverse.
    """

    left: Word
    rule: Rule
    forward: bool
    right: Word

    @property
    def source(self) -> Word:
        return self.left + (self.rule.lhs if self.forward else self.rule.rhs) + self.right

    @property
    def target(self) -> Word:
        return self.left + (self.rule.rhs if self.forward else self.rule.lhs) + self.right

    def inverse(self) -> "SquierEdge":
        return SquierEdge(self.left, self.rule, not self.forward, self.right)

    def positive(self) -> "SquierEdge":
        return self if self.forward else self.inverse()

    def prefixed(self, w: Sequence[int]) -> "SquierEdge":
        return SquierEdge(tuple(w) + self.left, self.rule, self.forward, self.right)

    def suffixed(self, w: Sequence[int]) -> "SquierEdge":
        return SquierEdge(self.left, self.rule, self.forward, self.right + tuple(w))


@dataclass(frozen=True)
class DerivationPath:
    edges: Tuple[SquierEdge, ...]
    source: Word
    target: Word

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        current = tuple(self.source)
        for i, e in enumerate(self.edges):
            if e.source != current:
                raise RewritingError(f"path breaks at edge {i}: expected source {current}, got {e.source}")
            current = e.target
        if current != tuple(self.target):
            raise RewritingError(f"path ends at {current}, not at {tuple(self.target)}")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[SquierEdge]:
        return iter(self.edges)

    @classmethod
    def empty(cls, w: Sequence[int]) -> "DerivationPath":
        return cls((), tuple(w), tuple(w))

    def inverse(self) -> "DerivationPath":
        return DerivationPath(tuple(e.inverse() for e in reversed(self.edges)), self.target, self.source)

    def then(self, other: "DerivationPath") -> "DerivationPath":
        return DerivationPath(self.edges + other.edges, self.source, other.target)

    def prefixed(self, w: Sequence[int]) -> "DerivationPath":
        w = tuple(w)
        return DerivationPath(tuple(e.prefixed(w) for e in self.edges), w + self.source, w + self.target)

    def suffixed(self, w: Sequence[int]) -> "DerivationPath":
        w = tuple(w)
        return DerivationPath(tuple(e.suffixed(w) for e in self.edges), self.source + w, self.target + w)


def _least_rule(rules: Sequence[Rule]) -> Rule:
    return min(rules, key=lambda r: (shortlex_key(r.rhs), r.id))


def principal_edge(w: Sequence[int], rs: RewritingSystem, side: str = LEFT) -> Optional[SquierEdge]:
    """The unique outgoing principal left (or right) edge of ``w``; None iff ``w`` is reduced."""
    w = tuple(w)
    lengths = rs._lhs_lengths
    if side == LEFT:
        # shortest non-reduced prefix, then the longest lhs that is a suffix of it
        for k in range(1, len(w) + 1):
            best = None
            for n in lengths:
                if n <= k and w[k - n:k] in rs._by_lhs:
                    best = n
            if best is not None:
                lhs = w[k - best:k]
                return SquierEdge(w[:k - best], _least_rule(rs._by_lhs[lhs]), True, w[k:])
        return None
    if side == RIGHT:
        for j in range(len(w) - 1, -1, -1):
            best = None
            for n in lengths:
                if j + n <= len(w) and w[j:j + n] in rs._by_lhs:
                    best = n
            if best is not None:
                lhs = w[j:j + best]
                return SquierEdge(w[:j], _least_rule(rs._by_lhs[lhs]), True, w[j + best:])
        return None
    raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}, got {side!r}")


def derivation_to_normal_form(w: Sequence[int], rs: RewritingSystem, side: str = LEFT) -> DerivationPath:
    """The longest left (right) derivation from ``w``; it ends in a reduced word."""
    start = current = tuple(w)
    edges = []
    while True:
        e = principal_edge(current, rs, side)
        if e is None:
            return DerivationPath(tuple(edges), start, current)
        edges.append(e)
        current = e.target


def normal_form(w: Sequence[int], rs: RewritingSystem, side: str = LEFT) -> Word:
    return derivation_to_normal_form(w, rs, side).target


def neighbours(w: Word, rs: RewritingSystem, cap: Optional[int] = None) -> Iterator[SquierEdge]:
    """All edges of the Squier complex leaving ``w``, forward ones first."""
    for n in rs._lhs_lengths:
        for i in range(len(w) - n + 1):
            for rule in rs._by_lhs.get(w[i:i + n], ()):
                if cap is None or len(w) - n + len(rule.rhs) <= cap:
                    yield SquierEdge(w[:i], rule, True, w[i + n:])
    for n in rs._rhs_lengths:
        for i in range(len(w) - n + 1):
            for rule in rs._by_rhs.get(w[i:i + n], ()):
                if cap is None or len(w) - n + len(rule.lhs) <= cap:
                    yield SquierEdge(w[:i], rule, False, w[i + n:])


def default_cap(w1: Sequence[int], w2: Sequence[int]) -> int:
    return 2 * max(len(w1), len(w2)) + 4


def find_derivation(
    rs: RewritingSystem,
    w1: Sequence[int],
    w2: Sequence[int],
    cap: Optional[int] = None,
    max_states: int = 2_000_000,
) -> Optional[DerivationPath]:
    """Bidirectional breadth-first search for a path ``w1 -> w2`` in the Squier complex.

    Only words of length at most ``cap`` are visited.  Returns None when the
    bounded component does not contain ``w2`` (or ``max_states`` is hit).
    """
    w1, w2 = tuple(w1), tuple(w2)
    rs.check_word(w1)
    rs.check_word(w2)
    if cap is None:
        cap = default_cap(w1, w2)
    if cap < max(len(w1), len(w2)):
        raise RewritingError(f"cap {cap} is shorter than the endpoints")
    if w1 == w2:
        return DerivationPath.empty(w1)
    # parent maps: word -> (neighbour towards the root, edge from that neighbour to word)
    fwd: Dict[Word, Optional[Tuple[Word, SquierEdge]]] = {w1: None}
    bwd: Dict[Word, Optional[Tuple[Word, SquierEdge]]] = {w2: None}
    fq, bq = deque([w1]), deque([w2])
    states = 2
    meet = None
    while fq and bq and meet is None:
        grow_fwd = len(fq) <= len(bq)
        queue, seen, other = (fq, fwd, bwd) if grow_fwd else (bq, bwd, fwd)
        for _ in range(len(queue)):
            w = queue.popleft()
            for e in neighbours(w, rs, cap):
                t = e.target
                if t in seen:
                    continue
                seen[t] = (w, e)
                states += 1
                if t in other:
                    meet = t
                    break
                queue.append(t)
            if meet is not None or states > max_states:
                break
        if states > max_states:
            return None
    if meet is None:
        return None
    head = []
    w = meet
    while fwd[w] is not None:
        prev, e = fwd[w]
        head.append(e)
        w = prev
    head.reverse()
    tail = []
    w = meet
    while bwd[w] is not None:
        prev, e = bwd[w]
        tail.append(e.inverse())
        w = prev
    return DerivationPath(tuple(head + tail), w1, w2)


def parse_system(text: str) -> RewritingSystem:
    """Parse the ``alphabet:``/``distinguished:``/``a b -> c`` text format."""
    alphabet: Optional[List[str]] = None
    distinguished = None
    raw_rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = line[len("alphabet:"):].split()
        elif line.startswith("distinguished:"):
            distinguished = line[len("distinguished:"):].strip()
        elif "->" in line:
            lhs, rhs = line.split("->", 1)
            raw_rules.append((lineno, lhs.split(), rhs.split()))
        else:
            raise RewritingError(f"line {lineno}: cannot parse {line!r}")
    if alphabet is None:
        alphabet = []
        names = ([distinguished] if distinguished else []) + [t for _, l, r in raw_rules for t in l + r]
        for t in names:
            if t not in alphabet:
                alphabet.append(t)
    index = {a: i for i, a in enumerate(alphabet)}
    rules = []
    for rid, (lineno, lhs, rhs) in enumerate(raw_rules):
        try:
            rules.append(Rule(tuple(index[t] for t in lhs), tuple(index[t] for t in rhs), rid))
        except KeyError as exc:
            raise RewritingError(f"line {lineno}: letter {exc.args[0]!r} not in alphabet") from None
    rho = None
    if distinguished is not None:
        if distinguished not in index:
            raise RewritingError(f"distinguished letter {distinguished!r} not in alphabet")
        rho = index[distinguished]
    return RewritingSystem(tuple(alphabet), tuple(rules), rho)


def format_system(rs: RewritingSystem) -> str:
    lines = ["alphabet: " + " ".join(rs.alphabet)]
    if rs.distinguished is not None:
        lines.append("distinguished: " + rs.alphabet[rs.distinguished])
    for r in rs.rules:
        lines.append(f"{rs.spell(r.lhs)} -> {rs.spell(r.rhs)}")
    return "\n".join(lines) + "\n"


DUNCE = RewritingSystem(("x",), (Rule((0, 0), (0,), 0),))
