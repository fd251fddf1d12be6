"""Command line surface: enumeration, expansion, series, comparison.

Exit codes: 0 success (or isomorphic / check passed), 1 checked and false,
2 usage or input error, 3 enumeration finished with Unknown lift statuses.
All JSON payloads carry a "format" field and re-parse to equal values.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datum import TreeDatum, expand
from .enum_trees import No, Unknown, Yes, lifted_tree, naive_tree
from .errors import PadicTreesError
from .padic import Certified
from .poincare import compare, datum_poincare, expand_series
from .polysys import PolySystem
from .ratfun import RationalGF
from .realize import RealizationContext, realize, verify_realization
from .trees import TruncTree, is_isomorphic, poincare_coeffs, to_dot

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="padictrees", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, depth=True):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument(
            "--format", choices=["json", "dot", "text"], default="json",
            help="output rendering",
        )
        sp.add_argument("--node-budget", type=int, default=10**7)
        sp.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; unused by deterministic commands")
        if depth:
            sp.add_argument("--depth", type=int, required=True, help="truncation depth")

    sp = sub.add_parser("enum", help="tree of lifting residue classes")
    sp.add_argument("system", help="polynomial system JSON")
    sp.add_argument("--delta", type=int, default=None,
                    help="certification window (default: depth)")
    sp.add_argument("--cert-budget", type=int, default=4000,
                    help="per-class certification search budget")
    common(sp)

    sp = sub.add_parser("naive", help="tree of residue-class solutions")
    sp.add_argument("system")
    common(sp)

    sp = sub.add_parser("expand", help="expand a tree datum")
    sp.add_argument("datum")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--param", default="",
                    help="comma-separated parameter values")
    common(sp)

    sp = sub.add_parser("poincare", help="exact Poincare series")
    sp.add_argument("--datum", help="tree datum JSON")
    sp.add_argument("--tree", help="tree JSON (coefficient mode)")
    sp.add_argument("--p", type=int, default=3,
                    help="prime for datum mode (default 3)")
    sp.add_argument("--coeffs", type=int, default=None,
                    help="expand the series to this order")
    common(sp, depth=False)

    sp = sub.add_parser("iso", help="compare two trees up to isomorphism")
    sp.add_argument("a")
    sp.add_argument("b")
    common(sp, depth=False)

    sp = sub.add_parser("realize", help="witness cloud of a datum")
    sp.add_argument("datum")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--check", action="store_true",
                    help="verify the cloud against the expansion")
    common(sp)

    sp = sub.add_parser("dot", help="render a tree as DOT")
    sp.add_argument("tree")
    sp.add_argument("--thick", action="store_true",
                    help="heavy pen on edges from nodes with full p-fold branching")
    sp.add_argument("--p", type=int, default=None,
                    help="branching factor for --thick")
    sp.add_argument("--labels", action="store_true")
    common(sp, depth=False)
    return ap


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit_tree(t: TruncTree, args) -> None:
    if args.format == "json":
        _emit(json.dumps(t.to_json()), args.out)
    elif args.format == "dot":
        _emit(to_dot(t), args.out)
    else:
        _emit(" ".join(str(n) for n in t.layer_sizes()), args.out)


def _status_json(st) -> dict:
    if isinstance(st, Yes):
        cert = st.certificate
        if isinstance(cert, Certified):
            detail = {"kind": "newton", "margin": cert.margin, "depth": cert.depth}
        else:
            detail = {"kind": "witness", "point": [str(q) for q in cert]}
        return {"status": "yes", **detail}
    if isinstance(st, No):
        return {"status": "no", "exhausted_at": st.exhausted_at}
    return {"status": "unknown", "budget": st.budget}


def _cmd_enum(args) -> int:
    system = PolySystem.load(args.system)
    delta = args.delta if args.delta is not None else args.depth
    t, statuses = lifted_tree(
        system, args.depth, delta,
        node_budget=args.node_budget, search_budget=args.cert_budget,
    )
    _emit_tree(t, args)
    rows = [
        {"depth": d, "label": list(lab), **_status_json(st)}
        for (d, lab), st in sorted(statuses.items())
    ]
    sidecar = json.dumps({"format": 1, "statuses": rows})
    if args.out:
        _emit(sidecar, args.out + ".status.json")
    unknowns = sum(isinstance(st, Unknown) for st in statuses.values())
    if unknowns:
        print(f"{unknowns} Unknown statuses remain", file=sys.stderr)
        return EXIT_UNKNOWN
    return EXIT_OK


def _cmd_naive(args) -> int:
    system = PolySystem.load(args.system)
    t = naive_tree(system, args.depth, args.node_budget)
    _emit_tree(t, args)
    return EXIT_OK


def _cmd_expand(args) -> int:
    D = TreeDatum.load(args.datum)
    kappa = tuple(int(s) for s in args.param.split(",") if s.strip() != "")
    t = expand(D, kappa, args.p, args.depth, args.node_budget)
    _emit_tree(t, args)
    return EXIT_OK


def _cmd_poincare(args) -> int:
    if (args.datum is None) == (args.tree is None):
        raise _UsageError("exactly one of --datum and --tree is required")
    if args.tree is not None:
        t = TruncTree.load(args.tree)
        counts = poincare_coeffs(t)
        if args.coeffs is not None:
            counts = counts[: args.coeffs + 1]
        if args.format == "json":
            _emit(json.dumps({"format": 1, "coeffs": counts}), args.out)
        else:
            _emit(" ".join(str(c) for c in counts), args.out)
        return EXIT_OK
    D = TreeDatum.load(args.datum)
    f = datum_poincare(D, args.p)
    if args.coeffs is not None:
        coeffs = [str(c) for c in expand_series(f, args.coeffs)]
        if args.format == "json":
            _emit(json.dumps({"format": 1, "coeffs": coeffs}), args.out)
        else:
            _emit(" ".join(coeffs), args.out)
        return EXIT_OK
    if args.format == "json":
        _emit(json.dumps(f.to_json()), args.out)
    else:
        _emit(str(f), args.out)
    return EXIT_OK


def _cmd_iso(args) -> int:
    t1 = TruncTree.load(args.a)
    t2 = TruncTree.load(args.b)
    if t1.depth_cap != t2.depth_cap:
        _emit(
            f"not isomorphic: depth caps differ ({t1.depth_cap} vs {t2.depth_cap})",
            args.out,
        )
        return EXIT_FALSE
    if is_isomorphic(t1, t2):
        _emit("isomorphic", args.out)
        return EXIT_OK
    l1, l2 = t1.layer_sizes(), t2.layer_sizes()
    for d in range(min(t1.depth_cap, t2.depth_cap) + 1):
        if l1[d] != l2[d]:
            _emit(
                f"not isomorphic: layer {d} has {l1[d]} vs {l2[d]} nodes",
                args.out,
            )
            return EXIT_FALSE
    _emit("not isomorphic: equal layer sizes, different shapes", args.out)
    return EXIT_FALSE


def _cmd_realize(args) -> int:
    D = TreeDatum.load(args.datum)
    cloud = realize(D, args.depth, p=args.p)
    _emit(json.dumps(cloud.to_json()), args.out)
    if args.check:
        report = verify_realization(cloud, D, args.p, args.depth)
        print(report.message, file=sys.stderr)
        return EXIT_OK if report.ok else EXIT_FALSE
    return EXIT_OK


def _cmd_dot(args) -> int:
    t = TruncTree.load(args.tree)
    thick = None
    if args.thick:
        if args.p is None:
            raise _UsageError("--thick requires --p")
        counts = [
            [layer.count(i) for i in range(n)]
            for layer, n in zip(t.parents, t.layer_sizes())
        ]

        def thick(d, par, i):
            # an edge stands for a p-fold bundle when its node branches fully
            return counts[d - 1][par] == args.p

    _emit(to_dot(t, thick_edge=thick, show_labels=args.labels), args.out)
    return EXIT_OK


_DISPATCH = {
    "enum": _cmd_enum,
    "naive": _cmd_naive,
    "expand": _cmd_expand,
    "poincare": _cmd_poincare,
    "iso": _cmd_iso,
    "realize": _cmd_realize,
    "dot": _cmd_dot,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PadicTreesError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
