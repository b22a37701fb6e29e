"""Encoding a group presentation as a tree rewriting system.

The pipeline balances a presentation by adding generators ``a_0 .. a_n`` and
the relator ``E = a_0 a_1^2 a_2 ... a_n``, turns every relator into a positive
semigroup relation, and splits each relation ``b_1 ... b_k = a_i`` into a
chain of length-2 rules using fresh letters.  It also builds the pair of
spherical diagrams whose conjugacy encodes equality of two words.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .diagram import Diagram, Move, compose, invert, path_to_diagram, reduce, shift_diagram, trivial
from .rewriting import (
    DerivationPath,
    RewritingSystem,
    Rule,
    SquierEdge,
    Word,
    find_derivation,
    neighbours,
    validate_tree_system,
)

# A group word is a sequence of (generator index, exponent +1/-1).
GroupWord = Tuple[Tuple[int, int], ...]


class HardnessError(ValueError):
    pass


def free_reduce(w: Sequence[Tuple[int, int]]) -> GroupWord:
    out: List[Tuple[int, int]] = []
    for g, s in w:
        if out and out[-1] == (g, -s):
            out.pop()
        else:
            out.append((g, s))
    return tuple(out)


def group_inverse(w: Sequence[Tuple[int, int]]) -> GroupWord:
    return tuple((g, -s) for g, s in reversed(w))


@dataclass(frozen=True)
class GroupPresentation:
    generators: Tuple[str, ...]
    relators: Tuple[GroupWord, ...]

    def spell(self, w: Sequence[Tuple[int, int]]) -> str:
        if not w:
            return "1"
        return " ".join(self.generators[g] if s > 0 else self.generators[g].upper() if self.generators[g].islower()
                        else self.generators[g] + "^-1" for g, s in w)


def parse_presentation(text: str) -> GroupPresentation:
    """``gens: a b`` then ``rel: a b A B`` lines; a capital letter is the inverse generator."""
    gens: Optional[List[str]] = None
    rels: List[GroupWord] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("gens:"):
            gens = line[5:].split()
            for g in gens:
                if not g.islower():
                    raise HardnessError(f"line {lineno}: generator names must be lower case ({g!r})")
        elif line.startswith("rel:"):
            if gens is None:
                raise HardnessError(f"line {lineno}: 'gens:' must come first")
            word = []
            for tok in line[4:].split():
                if tok in gens:
                    word.append((gens.index(tok), 1))
                elif tok.lower() in gens and tok != tok.lower():
                    word.append((gens.index(tok.lower()), -1))
                elif tok.endswith("^-1") and tok[:-3] in gens:
                    word.append((gens.index(tok[:-3]), -1))
                else:
                    raise HardnessError(f"line {lineno}: unknown generator {tok!r}")
            rels.append(tuple(word))
        else:
            raise HardnessError(f"line {lineno}: cannot parse {line!r}")
    if gens is None:
        raise HardnessError("missing 'gens:' line")
    return GroupPresentation(tuple(gens), tuple(rels))


def balance(gp: GroupPresentation) -> GroupPresentation:
    """Rename generators to a_1..a_m, pad to a_n, and add a_0 with relator a_0 a_1^2 a_2 ... a_n."""
    m, n = len(gp.generators), len(gp.relators)
    if n < m:
        raise HardnessError(f"balancing needs at least as many relators as generators ({n} < {m})")
    if m < 1:
        raise HardnessError("need at least one generator")
    names = tuple(f"a{i}" for i in range(n + 1))
    e = ((0, 1), (1, 1), (1, 1)) + tuple((i, 1) for i in range(2, n + 1))
    rels = (e,) + tuple(tuple((g + 1, s) for g, s in r) for r in gp.relators)
    return GroupPresentation(names, rels)


@dataclass(frozen=True)
class ShiftWords:
    E: Word
    E_t: Word
    left: Tuple[Word, ...]   # left[i] starts with a_i
    right: Tuple[Word, ...]  # right[i] ends with a_i
    right_cut: Tuple[int, ...]  # right[i] == E[cut:] + E[:cut]


def shift_words(n: int) -> ShiftWords:
    E = (0, 1, 1) + tuple(range(2, n + 1))
    E_t = tuple(range(1, n + 1)) + (0, 1)
    left, right, cuts = [], [], []
    for i in range(n + 1):
        first = E.index(i)
        left.append(E[first:] + E[:first])
        # a_1 occurs twice; its right shift ends at the second occurrence
        last = len(E) - 1 - E[::-1].index(i)
        cut = last + 1
        right.append(E[cut:] + E[:cut])
        cuts.append(cut)
    return ShiftWords(E, E_t, tuple(left), tuple(right), tuple(cuts))


@dataclass(frozen=True)
class PositivePresentation:
    generators: Tuple[str, ...]
    relations: Tuple[Tuple[Word, int], ...]  # (positive word, single letter it equals)
    positive_relators: Tuple[Word, ...]      # u_j' for j = 1..n
    shifts: ShiftWords


def positivize(gp: GroupPresentation) -> PositivePresentation:
    """Build the positive relations from a balanced presentation."""
    n = len(gp.generators) - 1
    if n < 1 or len(gp.relators) != n + 1:
        raise HardnessError("positivize expects a balanced presentation a_0..a_n with n+1 relators")
    sh = shift_words(n)
    if tuple(g for g, s in gp.relators[0]) != sh.E or any(s < 0 for _, s in gp.relators[0]):
        raise HardnessError("first relator must be a_0 a_1^2 a_2 ... a_n")
    u_prime = []
    for u in gp.relators[1:]:
        w: List[Tuple[int, int]] = []
        for g, s in u:
            if s > 0:
                w.append((g, 1))
            else:
                w.extend((x, 1) for x in sh.right[g])
                w.append((g, -1))
        w = list(free_reduce(w))
        if any(s < 0 for _, s in w):
            raise HardnessError("replacement left a negative letter")
        u_prime.append(tuple(g for g, _ in w))
    relations: List[Tuple[Word, int]] = [(sh.E_t + (0,), 0)]
    for j in range(1, n + 1):
        k = j + 1 if j < n else 1
        relations.append((sh.left[k] + u_prime[j - 1] + (j,) + sh.right[k], j))
    return PositivePresentation(gp.generators, tuple(relations), tuple(u_prime), sh)


def explicit_replacement(gp: GroupPresentation, j: int) -> List[Tuple[int, int]]:
    """Relator j (1-based) with every a_i^-1 replaced by c^-1 E c a_i^-1, E as the symbol (-1, 1).

    Reading ``E`` as the word E and free-reducing gives the positive relator; deleting
    ``E`` and free-reducing gives the original relator.
    """
    n = len(gp.generators) - 1
    sh = shift_words(n)
    out: List[Tuple[int, int]] = []
    for g, s in gp.relators[j]:
        if s > 0:
            out.append((g, 1))
        else:
            c = tuple((x, 1) for x in sh.E[:sh.right_cut[g]])
            out.extend(group_inverse(c))
            out.append((-1, 1))
            out.extend(c)
            out.append((g, -1))
    return out


def expand_symbol(w: Sequence[Tuple[int, int]], E: Word) -> GroupWord:
    out: List[Tuple[int, int]] = []
    for g, s in w:
        if g == -1:
            out.extend((x, 1) for x in E) if s > 0 else out.extend((x, -1) for x in reversed(E))
        else:
            out.append((g, s))
    return free_reduce(out)


def drop_symbol(w: Sequence[Tuple[int, int]]) -> GroupWord:
    return free_reduce([x for x in w if x[0] != -1])


@dataclass(frozen=True)
class TreeEncoding:
    system: RewritingSystem
    chains: Tuple[Tuple[int, Tuple[int, ...], Word], ...]  # (target letter, fresh letters, relation word)


def tree_encode(pp: PositivePresentation) -> TreeEncoding:
    names = list(pp.generators)
    rules: List[Rule] = []
    chains = []
    for ridx, (v, target) in enumerate(pp.relations):
        k = len(v)
        if k <= 2:
            raise HardnessError(f"relation {ridx} has length {k}; need more than 2")
        fresh = []
        for j in range(1, k - 1):
            fresh.append(len(names))
            names.append(f"t{ridx}_{j}")
        heads = [target] + fresh
        for j in range(k - 2):
            rules.append(Rule((v[j], fresh[j]), (heads[j],), len(rules)))
        rules.append(Rule((v[k - 2], v[k - 1]), (heads[k - 2],), len(rules)))
        chains.append((target, tuple(fresh), v))
    rs = RewritingSystem(tuple(names), tuple(rules), 0)
    report = validate_tree_system(rs)
    if not report.ok:
        raise HardnessError("encoded system is not a tree system: " + "; ".join(report.violations))
    return TreeEncoding(rs, tuple(chains))


def eliminate_fresh(enc: TreeEncoding) -> List[Tuple[Word, Word]]:
    """Substitute every fresh letter by the suffix it stands for; returns (lhs, rhs) per rule."""
    meaning: Dict[int, Word] = {}
    for target, fresh, v in enc.chains:
        for j, t in enumerate(fresh):
            meaning[t] = v[j + 1:]

    def expand(w: Word) -> Word:
        out: Tuple[int, ...] = ()
        for a in w:
            out += meaning.get(a, (a,))
        return out

    return [(expand(r.lhs), expand(r.rhs)) for r in enc.system.rules]


def encode(gp: GroupPresentation) -> Tuple[GroupPresentation, PositivePresentation, TreeEncoding]:
    balanced = balance(gp)
    pp = positivize(balanced)
    return balanced, pp, tree_encode(pp)


# --- conjugacy instances ----------------------------------------------------


def positive_system(pp: PositivePresentation) -> RewritingSystem:
    """The positive relations as rules ``v -> a_i`` over the letters a_0..a_n."""
    rules = tuple(Rule(tuple(v), (t,), i) for i, (v, t) in enumerate(pp.relations))
    return RewritingSystem(pp.generators, rules, 0)


def _chain_moves(enc: TreeEncoding, ridx: int, offset: int) -> List[Move]:
    """Tree-system moves collapsing relation ``ridx``'s word at ``offset`` into its target."""
    rs = enc.system
    _, _, v = enc.chains[ridx]
    k = len(v)
    moves = []
    lhs = (v[k - 2], v[k - 1])
    for j in range(k - 2, -1, -1):
        (rule,) = rs.rules_with_lhs(lhs)
        moves.append(Move(offset + j, rule, True))
        if j:
            lhs = (v[j - 1], rule.rhs[0])
    return moves


def lift_path(enc: TreeEncoding, path: DerivationPath) -> Diagram:
    """Replay a derivation over the positive presentation as a diagram over the tree system."""
    moves: List[Move] = []
    for e in path.edges:
        chain = _chain_moves(enc, e.rule.id, len(e.left))
        if not e.forward:
            chain = [m.flipped() for m in reversed(chain)]
        moves.extend(chain)
    return Diagram(enc.system, path.source, tuple(moves))


_DERIVE_CACHE: Dict[Tuple[RewritingSystem, Word, Word, int], Optional[Diagram]] = {}


def derive(enc: TreeEncoding, w1: Word, w2: Word, cap: int, max_states: int = 2_000_000) -> Optional[Diagram]:
    """A ``(w1, w2)``-diagram over the tree system, or None if none is found within ``cap``.

    The search runs over the positive presentation (words in a_0..a_n of length
    at most ``cap``) after stripping the common prefix and suffix of the two
    words; the path found is lifted back, so the lifted diagram never passes
    through a word longer than ``cap`` plus the stripped letters.
    """
    w1, w2 = tuple(w1), tuple(w2)
    i = 0
    while i < min(len(w1), len(w2)) - 1 and w1[i] == w2[i]:
        i += 1
    j = 0
    while j < min(len(w1), len(w2)) - i - 1 and w1[-1 - j] == w2[-1 - j]:
        j += 1
    core1, core2 = w1[i:len(w1) - j], w2[i:len(w2) - j]
    key = (enc.system, core1, core2, cap)
    if key not in _DERIVE_CACHE:
        ps = positive_system(_positive_of(enc))
        if cap < max(len(core1), len(core2)):
            path = None
        else:
            path = find_derivation(ps, core1, core2, cap, max_states)
        _DERIVE_CACHE[key] = None if path is None else lift_path(enc, path)
    d = _DERIVE_CACHE[key]
    return None if d is None else shift_diagram(d, w1[:i], w1[len(w1) - j:])


def _positive_of(enc: TreeEncoding) -> PositivePresentation:
    n = len(enc.chains) - 1
    rels = tuple((v, target) for target, _, v in enc.chains)
    return PositivePresentation(enc.system.alphabet[:n + 1], rels, (), shift_words(n))


def max_width(d: Diagram) -> int:
    return max(len(w) for w in d.words())


def find_prefix(enc: TreeEncoding, u: Word, cap: int, max_states: int = 500_000) -> Optional[Tuple[Word, Diagram]]:
    """Breadth-first search for ``p'`` and an ``(a_0, p' a_0 u)``-diagram.

    Every relation keeps the last letter a_0 in place, so words derivable from a_0
    end with a_0; ``u`` must therefore be empty or end with a_0.
    """
    u = tuple(u)
    if u and u[-1] != 0:
        raise HardnessError(f"no word derivable from a0 ends with {enc.system.spell(u)}: "
                            "every relation preserves a final a0")
    ps = positive_system(_positive_of(enc))
    goal = (0,) + u
    parent: Dict[Word, Optional[Tuple[Word, SquierEdge]]] = {(0,): None}
    queue = deque([(0,)])
    while queue and len(parent) < max_states:
        w = queue.popleft()
        if len(w) > len(goal) and w[-len(goal):] == goal:
            edges = []
            while parent[w] is not None:
                prev, e = parent[w]
                edges.append(e)
                w = prev
            p = DerivationPath(tuple(reversed(edges)), (0,), edges[0].target if edges else (0,))
            d = lift_path(enc, p)
            return d.bottom[:-len(goal)], d
        for e in neighbours(w, ps, cap):
            if e.target not in parent:
                parent[e.target] = (w, e)
                queue.append(e.target)
    return None


def find_seed_loop(rs: RewritingSystem, letter: int = 0, cap: int = 8, max_states: int = 200_000,
                   lift: Optional[Callable[[DerivationPath], Diagram]] = None) -> Optional[Diagram]:
    """Search the Squier complex near ``letter`` for a non-trivial reduced spherical diagram.

    With ``lift`` the search runs in ``rs`` and each candidate loop is mapped
    (and reduced) through ``lift`` before the non-triviality test.
    """
    start = (letter,)
    parent: Dict[Word, Optional[Tuple[Word, SquierEdge]]] = {start: None}
    order = deque([start])

    def path_from_root(w: Word) -> List[SquierEdge]:
        edges = []
        while parent[w] is not None:
            prev, e = parent[w]
            edges.append(e)
            w = prev
        return edges[::-1]

    while order and len(parent) < max_states:
        w = order.popleft()
        for e in neighbours(w, rs, cap):
            t = e.target
            if t not in parent:
                parent[t] = (w, e)
                order.append(t)
                continue
            # a non-tree edge closes a loop
            if parent[t] is not None and parent[t][1] == e:
                continue
            if parent[w] is not None and parent[w][1] == e.inverse():
                continue
            back = [x.inverse() for x in reversed(path_from_root(t))]
            loop = DerivationPath(tuple(path_from_root(w) + [e] + back), start, start)
            d = reduce(lift(loop) if lift else path_to_diagram(rs, loop))
            if d.moves:
                return d
    return None


def find_encoded_seed(enc: TreeEncoding, cap: int = 13, max_states: int = 200_000) -> Optional[Diagram]:
    """A non-trivial reduced ``(a_0, a_0)``-diagram over the tree system."""
    ps = positive_system(_positive_of(enc))
    return find_seed_loop(ps, 0, cap, max_states, lift=lambda p: lift_path(enc, p))


@dataclass(frozen=True)
class ConjugacyInstance:
    delta_u: Diagram
    delta_v: Diagram
    p_prime: Word
    q_prime: Word
    psi: Diagram
    phi: Diagram
    middle_u: Diagram
    middle_v: Diagram


def build_delta(seed: Diagram, prefix: Word, u: Word, psi: Diagram) -> Tuple[Diagram, Diagram]:
    """``Ψ ∘ (ε(prefix) + seed + ε(u)) ∘ Ψ^-1`` for an ``(a_0, prefix a_0 u)``-diagram Ψ."""
    middle = shift_diagram(seed, prefix, u)
    if psi.bottom != middle.top:
        raise HardnessError("Ψ does not end at prefix a0 u")
    return reduce(compose(compose(psi, middle), invert(psi))), middle


def conjugacy_instance(enc: TreeEncoding, u: Word, v: Word, seed: Diagram, cap: int = 24,
                       psi: Optional[Diagram] = None, phi: Optional[Diagram] = None) -> ConjugacyInstance:
    """Build Δ(u) and Δ(v).

    Ψ is an ``(a_0, p' a_0 u)``-diagram and Φ an ``(a_0, q' a_0 v)``-diagram; the
    prefixes p', q' are read off their bottoms.  When not given they are found
    by breadth-first search from a_0 within ``cap``.
    """
    rs = enc.system
    if seed.top != (0,) or seed.bottom != (0,) or not reduce(seed).moves:
        raise HardnessError("seed must be a non-trivial (a0,a0)-diagram")

    def prefix_of(w: Word, d: Optional[Diagram], what: str) -> Tuple[Word, Diagram]:
        w = tuple(w)
        if d is None:
            found = find_prefix(enc, w, cap)
            if found is None:
                raise HardnessError(f"{what}: no word p' a0 {rs.spell(w)} found from a0 within cap {cap}")
            return found
        tail = (0,) + w
        if d.top != (0,) or d.bottom[len(d.bottom) - len(tail):] != tail or len(d.bottom) < len(tail):
            raise HardnessError(f"{what}: expected an (a0, p' a0 {rs.spell(w)})-diagram, "
                                f"got ({rs.spell(d.top)}, {rs.spell(d.bottom)})")
        return d.bottom[:len(d.bottom) - len(tail)], d

    p_prime, psi = prefix_of(u, psi, "Ψ")
    q_prime, phi = prefix_of(v, phi, "Φ")
    du, mu = build_delta(seed, p_prime, u, psi)
    dv, mv = build_delta(seed, q_prime, v, phi)
    return ConjugacyInstance(du, dv, p_prime, q_prime, psi, phi, mu, mv)


def find_conjugator(enc: TreeEncoding, inst: ConjugacyInstance, u: Word, v: Word, cap: int = 12,
                    max_states: int = 2_000_000) -> Optional[Diagram]:
    """Look for η with η^-1 Δ(u) η = Δ(v) of the form Ψ ∘ (ξ1 + ε(a0) + ξ2) ∘ Φ^-1.

    ξ1 : p' -> q' and ξ2 : u -> v are bounded derivations; returns None if either
    is not found within ``cap``.
    """
    rs = enc.system
    xi1 = derive(enc, inst.p_prime, inst.q_prime, cap, max_states)
    xi2 = derive(enc, tuple(u), tuple(v), cap, max_states)
    if xi1 is None or xi2 is None:
        return None
    xi = xi1 + trivial(rs, (0,)) + xi2
    eta = reduce(compose(compose(inst.psi, xi), invert(inst.phi)))
    lhs = reduce(compose(compose(invert(eta), inst.delta_u), eta))
    if lhs.moves != inst.delta_v.moves or lhs.top != inst.delta_v.top:
        raise HardnessError("constructed conjugator does not conjugate")
    return eta


def format_presentation(gp: GroupPresentation) -> str:
    lines = ["gens: " + " ".join(gp.generators)]
    for r in gp.relators:
        lines.append("rel: " + " ".join(gp.generators[g] if s > 0 else gp.generators[g] + "^-1" for g, s in r))
    return "\n".join(lines) + "\n"
