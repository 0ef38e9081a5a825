"""Command-line front end.

    coarsekit [-f FILE] COMMAND ARGS... [--space X] [--horizon N] [--eps p/q]
              [--witnesses FILE] [--format plain|lines]

Arguments are declared names from FILE or inline terms such as ``(metric-nat)``.
Without a command the directives of FILE run in order.

Exit status: 0 every verdict True, 1 some verdict False, 2 some verdict Unknown
(and none False), 3 an error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import __version__
from .analysis import (
    EPS_GRID,
    PreconditionError,
    asymptotically_disjoint,
    asymptotically_separated,
    is_antidiscrete,
    is_asymptotic_neighborhood,
    is_discrete,
    is_slowly_oscillating,
    synthesize_separator,
    ultranormal_search,
)
from .bornology import DomainError, InvalidDeclaration, cardinal_invariants, has_countable_base, is_unbounded
from .constructions import build
from .core import UnsupportedPresentation, enumerate_coarse_structures, is_bounded, is_connected, mask_to_pairs
from .corpus import corpus
from .groundsets import DEFAULT_HORIZON, EncodingError, GroundMismatch, Verdict, finiteness, is_empty, is_subset
from .inference import InconsistencyError, countable_base_check, cross_validate, infer_properties
from .instance import (
    COMMANDS,
    Env,
    InstanceDocument,
    compile_relation,
    kind_of,
    parse_document,
)
from .sexpr import Node, ParseError, Symbol, parse, parse_one, render

EXIT_OK, EXIT_FALSE, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

# property -> (argument kinds, description)
CHECKS = {
    "bounded": (("set?",), "S is bounded in X (X itself when S is omitted)"),
    "connected": ((), "every pair of points is related by some entourage"),
    "metrizable": ((), "X has a countable base"),
    "discrete": ((), "X is the smallest structure compatible with its bornology"),
    "antidiscrete": ((), "X is the largest structure compatible with its bornology"),
    "asymptotically-disjoint": (("set", "set"), "thickenings of Y and Z meet in bounded sets"),
    "asymptotically-separated": (("set", "set"), "Y and Z have disjoint asymptotic neighbourhoods"),
    "asymptotic-neighborhood": (("set", "set"), "U is an asymptotic neighbourhood of Y (args: Y U)"),
    "slowly-oscillating": (("function",), "ball images of f shrink below eps outside a bounded set"),
    "ultranormal": (("set*",), "no two listed unbounded sets are asymptotically disjoint"),
    "finite": (("set",), "S is finite"),
    "empty": (("set",), "S is empty"),
    "subset": (("set", "set"), "S is contained in T"),
    "unbounded": (("bornology",), "the bornology does not contain its ground"),
    "countable-base": (("bornology",), "the bornology has a countable base"),
}
ALIASES = {"asymptotic-neighbourhood": "asymptotic-neighborhood"}


class UsageError(ValueError):
    pass


@dataclass
class Result:
    name: str
    prop: str
    verdict: Verdict
    counts: bool = True  # informational results do not affect the exit status

    def justification(self) -> str:
        v = self.verdict
        bits = []
        if v.note:
            bits.append(v.note)
        if v.witness is not None:
            bits.append(f"witness {_short(v.witness)}")
        if v.is_unknown and v.horizon is not None:
            bits.append(f"searched to horizon {v.horizon}")
        return "; ".join(bits)


@dataclass
class Report:
    results: list = field(default_factory=list)
    body: list = field(default_factory=list)  # extra plain-text lines (tables, listings)
    error: Optional[str] = None

    def add(self, name, prop, verdict, counts=True):
        self.results.append(Result(name, prop, verdict, counts))

    def extend(self, other: "Report"):
        self.results += other.results
        self.body += other.body
        self.error = self.error or other.error

    @property
    def exit_code(self) -> int:
        return exit_code([r.verdict for r in self.results if r.counts], self.error is not None)

    def render(self, fmt="plain") -> str:
        if fmt == "lines":
            out = [f"{r.name}\t{r.prop}\t{r.verdict.label()}" for r in self.results]
            if self.error:
                out.append(f"-\terror\t{self.error}")
            return "\n".join(out)
        out = [f"{r.prop} {r.name}: {r.verdict.label()}" for r in self.results]
        why = [(r, r.justification()) for r in self.results]
        why = [f"  {r.prop} {r.name}: {j}" for r, j in why if j]
        if why:
            out += ["justification:"] + why
        out += self.body
        if self.error:
            out.append(f"error: {self.error}")
        return "\n".join(out)


def exit_code(verdicts, error=False) -> int:
    """0/1/2/3 from the multiset of verdicts alone."""
    if error:
        return EXIT_ERROR
    if any(v.is_false for v in verdicts):
        return EXIT_FALSE
    if any(v.is_unknown for v in verdicts):
        return EXIT_UNKNOWN
    return EXIT_OK


def _short(x, limit=240):
    s = str(x)
    return s if len(s) <= limit else s[: limit - 3] + "..."


# ====================================================================== options

@dataclass
class Options:
    horizon: int = DEFAULT_HORIZON
    eps: Optional[Fraction] = None
    space: object = None  # term
    witnesses: tuple = ()
    table: Optional[int] = None

    def merged(self, node: Node) -> tuple:
        """Split ``:key value`` options off a directive; they override these."""
        args, opts, i = [], Options(self.horizon, self.eps, self.space, self.witnesses, self.table), 1
        while i < len(node):
            t = node[i]
            if isinstance(t, Symbol) and t.startswith(":"):
                if i + 1 >= len(node):
                    raise ParseError(f"option {t} needs a value", *node.where(i))
                key, val = str(t)[1:], node[i + 1]
                if key == "space":
                    opts.space = val
                elif key == "horizon":
                    opts.horizon = _positive(val)
                elif key == "eps":
                    opts.eps = _eps(val)
                elif key == "table":
                    opts.table = _positive(val)
                else:
                    raise ParseError(f"unknown option {t}", *node.where(i))
                i += 2
            else:
                args.append(t)
                i += 1
        return args, opts


def _positive(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise UsageError(f"expected a positive integer, got {v}")
    return v


def _eps(v) -> Fraction:
    try:
        e = Fraction(str(v)) if not isinstance(v, Fraction) else v
    except ValueError:
        raise UsageError(f"eps must look like p/q, got {v}") from None
    if not 0 < e:
        raise UsageError("eps must be positive")
    return e


# ====================================================================== dispatch

def _name(t) -> str:
    return str(t) if isinstance(t, Symbol) else render(t)


def _space(doc: InstanceDocument, args, opts):
    """The space: a leading ballean argument, else --space, else metric N."""
    if args and doc.kind(args[0]) == "ballean":
        return args[0], args[1:]
    return (opts.space if opts.space is not None else parse_one("(metric-nat)")), args


def run_directive(doc: InstanceDocument, node: Node, base: Options) -> Report:
    cmd = str(node.head)
    args, opts = base.merged(node)
    if cmd == "check":
        return cmd_check(doc, args, opts)
    if cmd == "infer":
        return cmd_infer(doc, args, opts)
    if cmd == "separate":
        return cmd_separate(doc, args, opts)
    if cmd == "invariants":
        return cmd_invariants(doc, args, opts)
    if cmd == "enumerate-finite":
        return cmd_enumerate(args)
    if cmd == "cross-validate":
        return cmd_cross_validate(doc, args, opts)
    raise UsageError(f"unknown command {cmd}")


def cmd_check(doc, args, opts) -> Report:
    if not args:
        raise UsageError("check needs a property: " + ", ".join(sorted(CHECKS)))
    prop = ALIASES.get(str(args[0]), str(args[0]))
    if prop not in CHECKS:
        raise UsageError(f"unknown property {prop}; known: {', '.join(sorted(CHECKS))}")
    kinds = CHECKS[prop][0]
    rest = args[1:]
    rep = Report()
    h = opts.horizon
    if kinds and kinds[0] == "bornology":
        if len(rest) != 1:
            raise UsageError(f"check {prop} takes one bornology")
        B = doc.bornology(rest[0])
        v = is_unbounded(B, h) if prop == "unbounded" else has_countable_base(B, h)
        rep.add(_name(rest[0]), prop, v)
        return rep
    space_t, rest = _space(doc, rest, opts)
    X = build(doc.ballean(space_t))
    sets = lambda ts: [doc.set(t, X.ground) for t in ts]  # noqa: E731
    label = ",".join(_name(t) for t in rest) or _name(space_t)
    if prop in ("asymptotically-disjoint", "asymptotically-separated", "asymptotic-neighborhood", "subset"):
        if len(rest) != 2:
            raise UsageError(f"check {prop} takes two sets")
        a, b = sets(rest)
        fn = {"asymptotically-disjoint": asymptotically_disjoint, "asymptotically-separated": asymptotically_separated,
              "asymptotic-neighborhood": is_asymptotic_neighborhood}.get(prop)
        v = is_subset(a, b, h) if prop == "subset" else fn(X, a, b, h)
        rep.add(label, prop, v)
    elif prop in ("finite", "empty"):
        if len(rest) != 1:
            raise UsageError(f"check {prop} takes one set")
        (s,) = sets(rest)
        rep.add(label, prop, finiteness(s, h) if prop == "finite" else is_empty(s, h))
    elif prop == "bounded":
        if len(rest) > 1:
            raise UsageError("check bounded takes at most one set")
        s = sets(rest)[0] if rest else X.full_set
        rep.add(label, prop, is_bounded(X, s, h))
    elif prop == "slowly-oscillating":
        if len(rest) != 1:
            raise UsageError("check slowly-oscillating takes one function")
        f = doc.function(rest[0], X.ground)
        for e in ([opts.eps] if opts.eps is not None else EPS_GRID):
            rep.add(f"{label}@{e}", prop, is_slowly_oscillating(X, f, e, h))
    elif prop == "ultranormal":
        cat = [(_name(t), s) for t, s in zip(rest, sets(rest))]
        rep.add(label, prop, ultranormal_search(X, cat, h))
    else:
        if rest:
            raise UsageError(f"check {prop} takes no set arguments")
        if prop == "connected":
            v = is_connected(X, h)
        elif prop == "metrizable":
            v = countable_base_check(X)
        elif prop == "discrete":
            v = is_discrete(X, h)
        else:
            v = is_antidiscrete(X, opts.witnesses, h)
        rep.add(label, prop, v)
    return rep


def cmd_infer(doc, args, opts) -> Report:
    if len(args) != 1:
        raise UsageError("infer takes one ballean")
    expr = doc.ballean(args[0])
    pr = infer_properties(expr)
    rep = Report()
    from .inference import PROPERTIES

    for p in PROPERTIES:
        # rule-derived verdicts are reports, not tests: they never set the exit status
        rep.add(_name(args[0]), p, pr[p], counts=False)
    return rep


def cmd_separate(doc, args, opts) -> Report:
    space_t, rest = _space(doc, args, opts)
    if len(rest) != 2:
        raise UsageError("separate takes two sets Y Z")
    X = build(doc.ballean(space_t))
    Y, Z = doc.set(rest[0], X.ground), doc.set(rest[1], X.ground)
    label = f"{_name(rest[0])},{_name(rest[1])}"
    rep = Report()
    grid = [opts.eps] if opts.eps is not None else EPS_GRID
    try:
        f = synthesize_separator(X, Y, Z, opts.horizon, verify=False)
    except PreconditionError as exc:
        d = asymptotically_disjoint(X, Y, Z, opts.horizon)
        v = d if not d.is_true else Verdict.false(note=str(exc))
        rep.add(label, "separator", Verdict(v.value, v.witness, v.horizon, str(exc)))
        return rep
    from .analysis import verify_separator

    checks = verify_separator(X, f, Y, Z, opts.horizon, grid)
    for k, v in checks.items():
        if isinstance(v, bool):
            v = Verdict.true() if v else Verdict.false(note=f"fails at the horizon {opts.horizon}")
        rep.add(label, k, v)
    rows = f.table(X, opts.table if opts.table is not None else opts.horizon)
    rep.body += [f"separator: {f.name} ({f.provenance})", "table:"]
    rep.body += [f"  {x}\t{val}" for x, val in rows]
    return rep


def cmd_invariants(doc, args, opts) -> Report:
    if len(args) != 1:
        raise UsageError("invariants takes one bornology")
    B = doc.bornology(args[0])
    inv = cardinal_invariants(B, opts.horizon)
    rep = Report()
    ordered = Verdict.true(note=str(inv)) if inv.ordered() else Verdict.false(str(inv), note="add <= cov <= cof fails")
    rep.add(_name(args[0]), "add<=cov<=cof", ordered)
    rep.body += [f"add = {inv.add}", f"cov = {inv.cov}", f"cof = {inv.cof}"]
    rep.body += [f"  because {t}" for t in inv.trace]
    return rep


def _blocks(mask: int, n: int) -> str:
    """Connected blocks of the union of a structure (its points' equivalence classes)."""
    pairs = mask_to_pairs(mask, n)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        parent[find(a)] = find(b)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return " ".join("{" + ",".join(map(str, g)) + "}" for g in sorted(groups.values()))


def cmd_enumerate(args) -> Report:
    if len(args) != 1 or not isinstance(args[0], int):
        raise UsageError("enumerate-finite takes a number of points (1..4)")
    n = args[0]
    found = enumerate_coarse_structures(n)
    rep = Report()
    rep.body.append(f"{len(found)} coarse structures on {n} points")
    for k, fam in enumerate(found):
        top = 0
        for m in fam:
            top |= m
        rep.body.append(f"  #{k}: {len(fam)} entourages; largest relates the blocks {_blocks(top, n)}")
    return rep


def cmd_cross_validate(doc, args, opts) -> Report:
    rep = Report()
    if args:
        items = []
        for t in args:
            expr = doc.ballean(t)
            try:
                g = build(expr).ground
            except UnsupportedPresentation:
                g = None
            cat = []
            if g is not None:
                for name in doc.names("set"):
                    try:
                        cat.append((name, doc.set(name, g)))
                    except (ParseError, ValueError):
                        continue  # set not expressible on this ground
            items.append((_name(t), expr, cat))
    else:
        items = []
        for inst in corpus():
            try:
                cat = inst.catalog(build(inst.expr))
            except UnsupportedPresentation:
                cat = []
            items.append((inst.name, inst.expr, cat))
    for name, expr, cat in items:
        cr = cross_validate(name, expr, cat, opts.horizon)
        if cr.skipped:
            rep.body.append(f"  {name}: executable checks skipped ({cr.skipped})")
        for r in cr.records:
            v = Verdict.false(note=f"rule {r.rule.label()} vs check {r.check.label()}") if r.inconsistent \
                else Verdict.true(note=f"rule {r.rule.label()} / check {r.check.label()}"
                                  + ("" if r.verified else " (check open)"))
            rep.add(name, f"consistent({r.prop}{' ' + r.detail if r.detail else ''})", v)
    bad = [r for r in rep.results if r.verdict.is_false]
    rep.body.insert(0, f"{len(items)} instances, {len(rep.results)} records, {len(bad)} inconsistencies")
    return rep


# ====================================================================== entry point

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coarsekit",
        description="Check coarse-geometry predicates and constructions.",
        epilog="exit status: 0 all true, 1 a false verdict, 2 an unknown verdict, 3 an error",
    )
    p.add_argument("command", nargs="?", choices=COMMANDS, help="omit to run the directives of --file")
    p.add_argument("args", nargs="*", help="names declared in --file or inline terms like '(metric-nat)'")
    p.add_argument("-f", "--file", help="instance document ('-' for stdin)")
    p.add_argument("--space", help="ballean the sets live in (default (metric-nat))")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--eps", help="tolerance p/q for slow oscillation (default: the grid 1/2, 1/4, 1/8)")
    p.add_argument("--witnesses", help="file of relation terms registered for antidiscreteness tests")
    p.add_argument("--table", type=int, help="rows of the separator table (default: the horizon)")
    p.add_argument("--format", choices=("plain", "lines"), default="plain")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _load(path) -> InstanceDocument:
    if path is None:
        return InstanceDocument(Env())
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    return parse_document(text)


def _witnesses(path) -> tuple:
    if path is None:
        return ()
    with open(path, encoding="utf-8") as fh:
        return tuple(compile_relation(t) for t in parse(fh.read()))


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    p = _parser()
    ns = p.parse_intermixed_args(argv)
    fmt = ns.format
    report = Report()
    try:
        if ns.horizon < 1:
            raise UsageError("--horizon must be positive")
        doc = _load(ns.file)
        opts = Options(ns.horizon, _eps(ns.eps) if ns.eps else None,
                       parse_one(ns.space) if ns.space else None, _witnesses(ns.witnesses), ns.table)
        if ns.command is None:
            if not doc.directives:
                raise UsageError("nothing to do: give a command or a --file with directives")
            nodes = doc.directives
        else:
            nodes = [Node((Symbol(ns.command),) + tuple(_arg(a) for a in ns.args))]
        for node in nodes:
            report.extend(run_directive(doc, node, opts))
    except (ParseError, UsageError, DomainError, InvalidDeclaration, PreconditionError, UnsupportedPresentation,
            GroundMismatch, EncodingError, InconsistencyError, OSError, KeyError, ValueError) as exc:
        report.error = f"{type(exc).__name__}: {exc}" if not isinstance(exc, (ParseError, UsageError)) else str(exc)
    print(report.render(fmt), file=out)
    return report.exit_code


def _arg(text: str):
    t = parse_one(text)
    if kind_of(t) is None and isinstance(t, Node):
        raise UsageError(f"unknown node label '{t.head}'")
    return t


if __name__ == "__main__":
    sys.exit(main())
