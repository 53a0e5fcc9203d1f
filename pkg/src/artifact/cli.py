"""Command-line front end.

Every subcommand reads one JSON instance (see :mod:`artifact.instance`) and
writes one JSON object to stdout. Failures print an error object and exit
with 2 (hypothesis unmet), 3 (budget or cap), 4 (parse) or 5 (unsupported q).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ArtifactError, HypothesisUnmet, ParseError
from .instance import Instance, dumps, load


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, input_required=True, formats=("json", "dot", "csv")):
        p.add_argument("--input", required=input_required, help="instance JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--cap", type=int, default=None)
        p.add_argument("--emit", default=None, help="write line-delimited records here")
        p.add_argument("--strict", action="store_true", default=None)
        p.add_argument("--format", choices=formats, default=formats[0])

    common(sub.add_parser("classify", help="irreducibility, defining field and family"))
    common(sub.add_parser("graph", help="transvection graph and its metrics"))
    common(sub.add_parser("synthesize", help="words for every transvection"))
    p = sub.add_parser("oracle", help="brute-force group computations")
    p.add_argument("what", choices=("order", "closure", "diameter"))
    common(p)
    p = sub.add_parser("acceptance", help="run the acceptance suite")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    common(p, input_required=False, formats=("table", "json"))
    return ap


def _opt(args, inst: Instance, name: str, default):
    v = getattr(args, name)
    if v is not None:
        return v
    return inst.options.get(name, default)


def _write(out, obj):
    out.write(dumps(obj))


# ---------------------------------------------------------------------------

def cmd_classify(args, inst: Instance, out) -> int:
    from .classify import classify, confirm_with_oracle
    Y = inst.transvections()
    rng = np.random.default_rng(_opt(args, inst, "seed", 0))
    res = classify(Y, rng)
    strict = bool(_opt(args, inst, "strict", False))
    if strict:
        confirm_with_oracle(res, Y, _opt(args, inst, "cap", 2 * 10 ** 6))
        if not res.confirmed:
            raise HypothesisUnmet("the oracle did not confirm the classification",
                                  classification=res.to_json())
    body = res.to_json()
    if res.notes:
        body["notes"] = res.notes
    _write(out, body)
    return 0


def cmd_graph(args, inst: Instance, out) -> int:
    from .graph import build_graph, graph_metrics, parts
    g = build_graph(inst.transvections())
    if args.format == "dot":
        out.write(g.to_dot() + "\n")
    elif args.format == "csv":
        out.write("source,target,label,twoway\n")
        F = g.field
        for s, t in np.argwhere(g.adj):
            out.write(f"{s},{t},{' '.join(map(str, F.coeffs(g.label(int(s), int(t)))))},"
                      f"{int(g.twoway[s, t])}\n")
    else:
        body = g.to_json()
        body["metrics"] = graph_metrics(g)
        pr = parts(list(g.verts))
        body["V_span_dim"] = pr["V_span_dim"]
        body["Vstar_span_dim"] = pr["Vstar_span_dim"]
        _write(out, _plain(body))
    return 0


def cmd_synthesize(args, inst: Instance, out) -> int:
    from .pipeline import DEFAULT_BUDGET, synthesize
    from .trans import all_transvections
    spec = inst.spec()
    if spec is None:
        raise ParseError("synthesize needs a family in the instance")
    budget = _opt(args, inst, "budget", DEFAULT_BUDGET)
    gs, rep = synthesize(spec, inst.generators, budget=budget)
    emit = args.emit
    if emit:
        with open(emit, "w") as fh:
            for t in all_transvections(spec):
                w = gs.words[gs.index[t]]
                fh.write(json.dumps({"transvection": t.to_json(), "length": len(w),
                                     "word": w.to_json()}, sort_keys=True) + "\n")
    body = {"group": spec.name(), "report": rep.to_json(), "flags": sorted(gs.flags)}
    if emit:
        body["emitted"] = str(emit)
    _write(out, body)
    return 0


def cmd_oracle(args, inst: Instance, out) -> int:
    from .oracle import DEFAULT_CAP, cayley_diameter, closure_enumerate, group_order
    cap = _opt(args, inst, "cap", DEFAULT_CAP)
    if args.what == "order":
        spec = inst.spec()
        if spec is None:
            raise ParseError("oracle order needs a family in the instance")
        _write(out, {"group": spec.name(), "order": group_order(spec)})
        return 0
    mats = inst.matrices()
    if args.what == "closure":
        res = closure_enumerate(inst.field, mats, cap)
        _write(out, {"order": res.order, "truncated": res.truncated,
                     "max_depth": res.max_depth})
    else:
        _write(out, {"diameter": cayley_diameter(inst.field, mats, cap)})
    return 0


def cmd_acceptance(args, out) -> int:
    from .acceptance import CRITERIA, run_criterion
    numbers = ([int(x) for x in args.only.split(",")] if args.only
               else [c[0] for c in CRITERIA])
    results = []
    for k in numbers:
        r = run_criterion(k)
        results.append(r)
        if args.format != "json":
            out.write(r.line() + "\n")
            out.flush()
    ok = all(r.passed and r.in_time for r in results)
    if args.format == "json":
        _write(out, _plain({"passed": ok, "criteria": [r.to_json() for r in results]}))
    else:
        out.write(f"{sum(r.passed and r.in_time for r in results)}/{len(results)} passed\n")
    return 0 if ok else 1


def _plain(obj):
    """numpy scalars and tuples to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    try:
        if args.command == "acceptance":
            return cmd_acceptance(args, out)
        inst = load(args.input)
        handler = {"classify": cmd_classify, "graph": cmd_graph,
                   "synthesize": cmd_synthesize, "oracle": cmd_oracle}[args.command]
        return handler(args, inst, out)
    except ArtifactError as exc:
        body = exc.to_json()
        if exc.result is not None and hasattr(exc.result, "to_json"):
            body["result"] = exc.result.to_json()
        _write(out, _plain(body))
        print(f"artifact: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
