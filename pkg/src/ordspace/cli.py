"""Command-line interface.

Exit codes: 0 on success, 1 on a domain error (or a failed verification),
2 on a usage error.  JSON output is canonical: sorted keys, compact
separators, one trailing newline.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import OrdspaceError, ParseError
from .ppform import (
    BoundOverflow,
    bound_B,
    check_tower,
    evaluate,
    parse,
    parse_formula_file,
    search_counterexample_subspace,
)
from .qx import (
    QuotientResult,
    Tower,
    build_tower,
    construct_quotient,
    parse_ordering,
    restrict,
    verify_inverse_system,
)
from .ratpoly import parse_polynomial
from .space import FiniteSpace, verify_axioms
from .structure import components, decompose, fan_graph_dot, four_fans, stability_index


class UsageError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.pos) from None


def _load_space(path) -> FiniteSpace:
    """A space JSON, or a quotient JSON carrying one under ``"space"``."""
    data = _read_json(path)
    if isinstance(data, dict) and "space" in data:
        data = data["space"]
    return FiniteSpace.from_json(data)


def _polys(texts):
    return [parse_polynomial(t) for t in texts]


def _split_levels(items):
    levels, cur = [], []
    for item in items:
        if item == "/":
            levels.append(cur)
            cur = []
        else:
            cur.append(item)
    levels.append(cur)
    if any(not lv for lv in levels):
        raise UsageError("every tower level needs at least one polynomial")
    return levels


def _emit(args, text):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------


def cmd_quotient(args):
    if not args.polys:
        raise UsageError("quotient needs at least one polynomial")
    q = construct_quotient(_polys(args.polys))
    if args.summary:
        sp = q.space
        line = (
            f"|X|={sp.size} |G|={sp.order} components={len(components(sp))} "
            f"stindex={stability_index(sp)}\n"
        )
        sys.stdout.write(line)
        if args.output:
            _emit(args, dumps(q.to_json()))
        return 0
    _emit(args, dumps(q.to_json()))
    return 0


def cmd_analyze(args):
    space = _load_space(args.space)
    verdict = verify_axioms(space, method=args.method)
    if not verdict.ok:
        _emit(args, dumps({"axioms": verdict.to_json(space)}))
        return 1
    if args.dot:
        _emit(args, fan_graph_dot(space))
        return 0
    report = {
        "axioms": verdict.to_json(space),
        "components": components(space),
        "four_fans": [list(f) for f in four_fans(space)],
        "stability_index": stability_index(space),
        "decomposition": decompose(space).to_json(),
        "size": space.size,
        "rank": space.rank,
    }
    _emit(args, dumps(report))
    return 0


def _binding(arg):
    if arg is None:
        return {}
    text = arg.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid binding JSON ({exc.msg})", exc.pos) from None
    else:
        data = _read_json(arg)
    if not isinstance(data, dict):
        raise UsageError("binding must be a JSON object")
    return data


def cmd_pp(args):
    if args.bound is not None:
        n, k = args.bound
        if n < 0 or k < 0:
            raise UsageError("--bound needs nonnegative n and k")
        value = bound_B(n, k)
        if isinstance(value, BoundOverflow):
            _emit(args, dumps(value.to_json()))
        else:
            _emit(args, f"{value}\n")
        return 0
    want = 1 if args.tower else 2
    if len(args.inputs) != want:
        shape = "FORMULA" if args.tower else "SPACE_JSON FORMULA"
        raise UsageError(f"pp expects {shape} (or --bound N K)")
    args.formula = args.inputs[-1]
    args.space = None if args.tower else args.inputs[0]
    if args.file:
        formulas = parse_formula_file(_read_text(args.formula))
    else:
        formulas = [parse(args.formula)]
    binding = _binding(args.binding)
    results = []
    if args.tower:
        tower = Tower.from_json(_read_json(args.tower))
        for f in formulas:
            res = check_tower(tower, f, binding, level=args.level)
            out = res.to_json(tower)
            out["per_level"] = list(res.per_level)
            results.append(out)
    else:
        space = _load_space(args.space)
        for f in formulas:
            out = evaluate(space, f, binding).to_json(space)
            if args.subspace_search is not None:
                n = min(args.subspace_search, space.size)
                if n < 1:
                    raise UsageError("--subspace-search needs a positive size")
                ce = search_counterexample_subspace(space, f, binding, n)
                out["counterexample"] = None if ce is None else ce.to_json()
                k = len(f.parameters)
                b = bound_B(len(f.variables), k)
                out["bound"] = b.to_json() if isinstance(b, BoundOverflow) else str(b)
            results.append(out)
    _emit(args, dumps(results if args.file else results[0]))
    return 0


def cmd_tower(args):
    levels = [_polys(lv) for lv in _split_levels(args.levels)]
    tower = build_tower(levels)
    verdict = verify_inverse_system(tower)
    if args.summary:
        sizes = " ".join(f"|X{i}|={lv.space.size}" for i, lv in enumerate(tower.levels))
        sys.stdout.write(f"levels={len(tower.levels)} {sizes} verified={str(verdict.ok).lower()}\n")
        return 0 if verdict.ok else 1
    _emit(args, dumps({"tower": tower.to_json(), "verification": verdict.to_json()}))
    return 0 if verdict.ok else 1


def cmd_restrict(args):
    if args.quotient:
        q = QuotientResult.from_json(_read_json(args.quotient))
    elif args.poly:
        q = construct_quotient(_polys(args.poly))
    else:
        raise UsageError("restrict needs --quotient FILE or --poly POLY")
    out = {text: restrict(parse_ordering(text), q) for text in args.orderings}
    _emit(args, dumps(out))
    return 0


def cmd_verify(args):
    space = _load_space(args.space)
    verdict = verify_axioms(space, method=args.method)
    _emit(args, dumps(verdict.to_json(space)))
    return 0 if verdict.ok else 1


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ordspace", description="Finite spaces of orderings and quotients of Q(x).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out_opt(sp):
        sp.add_argument("-o", "--output", help="write the result to a file instead of stdout")

    q = sub.add_parser("quotient", help="finite quotient of the orderings of Q(x)")
    q.add_argument("polys", nargs="*", metavar="POLY")
    q.add_argument("--summary", action="store_true", help="print sizes, components and stability index")
    out_opt(q)
    q.set_defaults(func=cmd_quotient)

    a = sub.add_parser("analyze", help="components, fans, stability index, decomposition")
    a.add_argument("space", metavar="SPACE_JSON")
    a.add_argument("--dot", action="store_true", help="emit the 4-fan graph in DOT")
    a.add_argument("--method", choices=["reduced", "exhaustive"], default="reduced")
    out_opt(a)
    a.set_defaults(func=cmd_analyze)

    pp = sub.add_parser("pp", help="decide a pp formula")
    pp.add_argument(
        "inputs",
        nargs="*",
        metavar="ARG",
        help="SPACE_JSON FORMULA, or just FORMULA with --tower; FORMULA is a file with --file",
    )
    pp.add_argument("--binding", help="binding JSON file or inline JSON object")
    pp.add_argument("--file", action="store_true", help="FORMULA names a file with one formula per line")
    pp.add_argument("--subspace-search", type=int, metavar="N", help="search seeds of up to N points")
    pp.add_argument("--tower", metavar="TOWER_JSON")
    pp.add_argument("--level", type=int, default=0, help="tower level the binding lives in")
    pp.add_argument("--bound", type=int, nargs=2, metavar=("N", "K"), help="print B(n, k)")
    out_opt(pp)
    pp.set_defaults(func=cmd_pp)

    t = sub.add_parser("tower", help="inverse system of quotients; levels separated by '/'")
    t.add_argument("levels", nargs="+", metavar="POLY_OR_SLASH")
    t.add_argument("--summary", action="store_true")
    out_opt(t)
    t.set_defaults(func=cmd_tower)

    r = sub.add_parser("restrict", help="restrict orderings of Q(x) to a quotient")
    r.add_argument("orderings", nargs="+", metavar="ORDERING")
    r.add_argument("--quotient", metavar="QUOTIENT_JSON")
    r.add_argument("--poly", action="append", metavar="POLY")
    out_opt(r)
    r.set_defaults(func=cmd_restrict)

    v = sub.add_parser("verify", help="check the space-of-orderings axioms")
    v.add_argument("space", metavar="SPACE_JSON")
    v.add_argument("--method", choices=["reduced", "exhaustive"], default="reduced")
    out_opt(v)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"ordspace: usage error: {exc}\n")
        return 2
    except OrdspaceError as exc:
        sys.stderr.write(f"ordspace: error [{exc.code}]: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"ordspace: error [value]: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
