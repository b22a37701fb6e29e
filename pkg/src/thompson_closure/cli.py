"""Command line interface: ``thompson-closure <group> <command> ...``.

Exit codes: 0 on success, 1 when a computation or input check fails (the
message names the failing check), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import closure, completion, core, hardness, thompson
from .diagram import format_diagram, reduce, to_dot
from .rewriting import format_system


class CommandError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc.strerror}") from exc


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _frac(x: Fraction) -> str:
    return str(x)


def _load_core(path: str) -> core.Core:
    return core.parse_core(_read(path))


def _load_element(path: str) -> thompson.TreeDiagram:
    return thompson.parse_element(_read(path))


# --- element ----------------------------------------------------------------


def cmd_element_show(args) -> int:
    g = _load_element(args.element)
    pieces = thompson.pl_pieces(g)
    payload = {
        "schema": 1,
        "pairs": [list(p) for p in g.pairs],
        "carets": g.carets,
        "pieces": [{"start": _frac(p.start), "value": _frac(p.value), "slope": _frac(p.slope)} for p in pieces],
        "orbitals": [{"start": _frac(o.start), "end": _frac(o.end), "direction": o.direction}
                     for o in thompson.support_and_orbitals(g)],
    }
    text = thompson.format_element(g) + "\n" + thompson.format_pl_table(g)
    _emit(args, payload, text)
    return 0


def cmd_element_multiply(args) -> int:
    g = thompson.IDENTITY
    for path in args.element:
        g = thompson.multiply(g, _load_element(path))
    if args.output:
        _write(args.output, thompson.format_element(g))
    _emit(args, {"schema": 1, "pairs": [list(p) for p in g.pairs]}, thompson.format_element(g))
    return 0


def cmd_element_eval(args) -> int:
    g = _load_element(args.element)
    rows = []
    for t in args.point:
        try:
            x = thompson.dyadic(Fraction(t))
        except (ValueError, ZeroDivisionError) as exc:
            raise CommandError(f"point {t!r}: {exc}") from exc
        rows.append((x, thompson.evaluate(g, x)))
    payload = {"schema": 1, "values": [{"t": _frac(x), "value": _frac(y)} for x, y in rows]}
    _emit(args, payload, "\n".join(f"{x}\t{y}" for x, y in rows))
    return 0


def cmd_element_diagram(args) -> int:
    d = thompson.to_diagram(_load_element(args.element))
    out = to_dot(d) if args.format == "dot" else format_diagram(d)
    if args.output:
        _write(args.output, out)
    _emit(args, {"schema": 1, "cells": d.cells, "diagram": format_diagram(d)}, out)
    return 0


# --- core -------------------------------------------------------------------


def _core_payload(c: core.Core) -> dict:
    st = core.core_stats(c)
    return {"schema": 1, "vertices": c.vertex_count, "edges": len(c.edges), "cells": len(c.cells),
            "n": st.n, "m": st.m, "f": st.f, "degenerate": st.degenerate}


def cmd_core_build(args) -> int:
    gens = thompson.parse_generators(_read(args.generators))
    if not gens:
        raise CommandError(f"{args.generators}: no generators given")
    c = core.build_core(gens, seed=args.seed)
    if args.output:
        _write(args.output, core.format_core(c))
    if args.dot:
        _write(args.dot, core.core_to_dot(c))
    text = f"core: {c.vertex_count} vertices, {len(c.edges)} edges, {len(c.cells)} cells"
    if not args.output:
        text = core.format_core(c)
    _emit(args, _core_payload(c), text)
    return 0


def cmd_core_member(args) -> int:
    c = _load_core(args.core)
    g = _load_element(args.element)
    res = core.membership(c, g)
    if args.certificate and res.certificate is not None:
        _write(args.certificate, format_diagram(res.certificate))
    payload = {"schema": 1, "member": res.accepted, "reason": res.reason,
               "certificate_cells": res.certificate.cells if res.certificate is not None else None}
    text = "member: yes" if res.accepted else f"member: no ({res.reason})"
    _emit(args, payload, text)
    return 0


def cmd_core_stats(args) -> int:
    c = _load_core(args.core)
    p = _core_payload(c)
    _emit(args, p, "\n".join(f"{k}\t{p[k]}" for k in ("vertices", "edges", "cells", "n", "m", "f", "degenerate")))
    return 0


def cmd_core_system(args) -> int:
    rs = core.extract_system(_load_core(args.core))
    text = format_system(rs)
    if args.output:
        _write(args.output, text)
    _emit(args, {"schema": 1, "system": text}, text)
    return 0


def cmd_core_dot(args) -> int:
    text = core.core_to_dot(_load_core(args.core))
    if args.output:
        _write(args.output, text)
    _emit(args, {"schema": 1, "dot": text}, text)
    return 0


# --- completion -------------------------------------------------------------


def _format_semicompletion(sc: completion.SemiCompletion) -> str:
    lines = [format_system(sc.combined).rstrip("\n"), "# rule tags"]
    for r in sc.combined.rules:
        lines.append(f"# {r.id}: {','.join(sorted(sc.rule_tags(r)))}")
    return "\n".join(lines) + "\n"


def cmd_completion_build(args) -> int:
    sc = completion.semi_complete(_load_core(args.core))
    if args.output:
        _write(args.output, _format_semicompletion(sc))
    payload = {"schema": 1, "rules": len(sc.combined.rules), "r_iota": len(sc.r_iota), "r_tau": len(sc.r_tau)}
    text = _format_semicompletion(sc) if not args.output else (
        f"semi-completion: {len(sc.combined.rules)} rules (|R_iota| = {len(sc.r_iota)}, |R_tau| = {len(sc.r_tau)})")
    _emit(args, payload, text)
    return 0


def cmd_completion_verify(args) -> int:
    sc = completion.semi_complete(_load_core(args.core))
    report = completion.verify_semicompletion(sc, args.length)
    lines = []
    for ch in report.checks:
        status = "skip" if ch.skipped else ("ok" if ch.ok else "FAIL")
        lines.append(f"{status}\t{ch.name}\texamined={ch.examined}")
        lines.extend(f"\t{msg}" for msg in ch.counterexamples)
    _emit(args, report.as_dict(), "\n".join(lines))
    if not report.ok:
        failed = [ch.name for ch in report.checks if not ch.ok]
        sys.stderr.write("error: semi-completion check failed: " + ", ".join(failed) + "\n")
        return 1
    return 0


# --- closure ----------------------------------------------------------------


def cmd_closure_gens(args) -> int:
    sc = completion.semi_complete(_load_core(args.core))
    xs = closure.generating_edges(sc)
    ys = closure.generating_set_Y(sc, args.cap)
    blocks = []
    for y in ys:
        e = xs[y.x_index].edge
        rs = sc.combined
        head = (f"# y{y.x_index}: edge {rs.spell(e.left)} [{rs.spell(e.rule.lhs)} -> {rs.spell(e.rule.rhs)}] "
                f"{rs.spell(e.right)}")
        blocks.append(head + "\n" + thompson.format_element(y.element))
    text = "---\n".join(blocks) if blocks else "# the closure is trivial\n"
    if args.output:
        _write(args.output, text)
        if args.loops:
            _write(args.loops, "---\n".join(format_diagram(y.diagram) for y in ys))
    payload = {"schema": 1, "generators": [{"index": y.x_index, "pairs": [list(p) for p in y.element.pairs],
                                            "cells": y.diagram.cells} for y in ys]}
    _emit(args, payload, text if not args.output else f"{len(ys)} generators")
    return 0


def cmd_closure_factorize(args) -> int:
    c = _load_core(args.core)
    g = _load_element(args.element)
    sc = completion.semi_complete(c)
    res = core.membership(c, g, sc.base)
    if not res.accepted:
        raise CommandError(f"element is not in the closure: {res.reason}")
    word = closure.factorize(res.certificate, sc)
    n = len(reduce(closure.lift(res.certificate, sc)).moves)
    if closure.evaluate_word_y(word, sc, args.cap) != g:
        raise CommandError("factorization does not evaluate back to the element")
    payload = {"schema": 1, "word": str(word), "length": len(word), "cells": n, "bound": 3 * n,
               "within_bound": len(word) <= 3 * n}
    _emit(args, payload, f"{word}\nlength {len(word)} <= 3N = {3 * n}")
    return 0


def cmd_closure_probe(args) -> int:
    sc = completion.semi_complete(_load_core(args.core))
    report = closure.distortion_probe(sc, samples=args.samples, seed=args.seed, max_len=args.max_len, cap=args.cap)
    text = (f"samples {report['samples']}, generators {report['generators']}, max ratio {report['max_ratio']}, "
            f"bound {report['bound']}, violations {report['violations']}")
    _emit(args, report, text)
    if report["violations"]:
        sys.stderr.write(f"error: {report['violations']} samples exceed the 3N bound\n")
        return 1
    return 0


# --- hardness ---------------------------------------------------------------


def cmd_hardness_encode(args) -> int:
    gp = hardness.parse_presentation(_read(args.presentation))
    balanced, pp, enc = hardness.encode(gp)
    rs = enc.system
    if args.output:
        _write(args.output, format_system(rs))
    payload = {
        "schema": 1,
        "balanced": hardness.format_presentation(balanced),
        "relations": [{"word": rs.spell(v), "target": rs.alphabet[t]} for v, t in pp.relations],
        "letters": len(rs.alphabet),
        "rules": len(rs.rules),
    }
    text = hardness.format_presentation(balanced) + "\n" + "\n".join(
        f"{rs.spell(v)} = {rs.alphabet[t]}" for v, t in pp.relations) + "\n\n"
    text += f"tree system: {len(rs.alphabet)} letters, {len(rs.rules)} rules"
    if not args.output:
        text += "\n" + format_system(rs)
    _emit(args, payload, text)
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a subcommand from resetting a --json given before it
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    p = argparse.ArgumentParser(prog="thompson-closure", parents=[common],
                                description="Closures of subgroups of Thompson's group F via diagram groups.")
    groups = p.add_subparsers(dest="group", required=True)

    def sub(parent, name, func, help_text):
        sp = parent.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    el = groups.add_parser("element", help="elements of F").add_subparsers(dest="cmd", required=True)
    s = sub(el, "show", cmd_element_show, "branch pairs and PL table")
    s.add_argument("-e", "--element", required=True)
    s = sub(el, "multiply", cmd_element_multiply, "product, left to right")
    s.add_argument("-e", "--element", action="append", required=True)
    s.add_argument("-o", "--output")
    s = sub(el, "eval", cmd_element_eval, "evaluate at dyadic points")
    s.add_argument("-e", "--element", required=True)
    s.add_argument("-t", "--point", action="append", required=True)
    s = sub(el, "diagram", cmd_element_diagram, "the spherical diagram over x x -> x")
    s.add_argument("-e", "--element", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--format", choices=("text", "dot"), default="text")

    co = groups.add_parser("core", help="Stallings 2-cores").add_subparsers(dest="cmd", required=True)
    s = sub(co, "build", cmd_core_build, "build the core of a generating set")
    s.add_argument("-g", "--generators", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--dot")
    s.add_argument("--seed", type=int, help="shuffle the folding order")
    s = sub(co, "member", cmd_core_member, "membership in the closure")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-e", "--element", required=True)
    s.add_argument("--certificate")
    s = sub(co, "stats", cmd_core_stats, "vertex, edge and cell counts")
    s.add_argument("-c", "--core", required=True)
    s = sub(co, "system", cmd_core_system, "the core rewriting system")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-o", "--output")
    s = sub(co, "dot", cmd_core_dot, "DOT rendering")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-o", "--output")

    cp = groups.add_parser("completion", help="semi-completion").add_subparsers(dest="cmd", required=True)
    s = sub(cp, "build", cmd_completion_build, "write the semi-complete system")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-o", "--output")
    s = sub(cp, "verify", cmd_completion_verify, "run the bounded verification")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-L", "--length", type=_positive, help="length cap for divisor paths")

    cl = groups.add_parser("closure", help="generators and factorization").add_subparsers(dest="cmd", required=True)
    s = sub(cl, "gens", cmd_closure_gens, "finite generating set Y")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--loops", help="also write the loop diagrams here (with -o)")
    s.add_argument("--cap", type=_positive)
    s = sub(cl, "factorize", cmd_closure_factorize, "write an element of the closure in Y")
    s.add_argument("-c", "--core", required=True)
    s.add_argument("-e", "--element", required=True)
    s.add_argument("--cap", type=_positive)
    for parent, name in ((cl, "probe"), (groups, "probe")):
        s = sub(parent, name, cmd_closure_probe, "distortion probe")
        s.add_argument("-c", "--core", required=True)
        s.add_argument("-n", "--samples", type=_positive, default=1000)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--max-len", type=_positive, default=10)
        s.add_argument("--cap", type=_positive)

    hd = groups.add_parser("hardness", help="presentation encoding").add_subparsers(dest="cmd", required=True)
    s = sub(hd, "encode", cmd_hardness_encode, "encode a group presentation as a tree system")
    s.add_argument("-p", "--presentation", required=True)
    s.add_argument("-o", "--output")
    return p


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{v} is not positive")
    return v


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
