"""Command-line entry point: ``lattice-rigidity <command> ...``.

Every command prints a report (a table, or JSON with --json) and can write
the JSON payload to --out.  Exit codes: 0 success, 2 invalid input,
3 precision exhausted after one retry at doubled precision, 4 size cap.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

from . import __version__
from .census import census_rigid
from .errors import CapExceeded, LatticeError, PrecisionExhausted, ValidationError
from .genval import generic_valuation, naive_valuation, valuation_at_lift, variety_membership, witness_lift
from .groups import double_cosets, group_order, hochschild1_vanishes, make_group, permutation_lattice, subgroup
from .io import (
    context_from,
    dumps,
    lattice_from,
    order_from,
    parse_element,
    parse_point,
    point_from,
    polynomial_from,
    read_json,
)
from .orders import end_rank_mod_p, ext1_invariants, hom_basis, is_rigid
from .witt import (
    RingElement,
    WittDigits,
    digitwise_add,
    digitwise_mul,
    from_witt_digits,
    teichmuller,
    to_witt_digits,
)

EXIT_OK, EXIT_INVALID, EXIT_PRECISION, EXIT_CAP = 0, 2, 3, 4
DEFAULT_PRECISION = 8


@dataclass
class RunReport:
    command: str
    inputs: dict
    context: dict
    seed: int
    result: dict
    precision_retries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    timings: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "context": self.context,
            "seed": self.seed,
            "precision_retries": self.precision_retries,
            "warnings": self.warnings,
            "result": self.result,
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return out


def _run_with_retry(body: Callable[[int], tuple[dict, dict]], N: int, report_retries: list):
    """Call body(N); on PrecisionExhausted retry once at 2N and record it."""
    try:
        return body(N)
    except PrecisionExhausted as exc:
        report_retries.append({"from": N, "to": 2 * N, "reason": str(exc)})
        return body(2 * N)


def _precision(args, data_ctx: dict | None = None) -> int:
    if args.precision is not None:
        return args.precision
    if data_ctx and "N" in data_ctx:
        return data_ctx["N"]
    return DEFAULT_PRECISION


def _ext_dict(ext) -> dict:
    return {"invariants": list(ext.invariants), "exponent": ext.exponent, "certified": ext.certified}


# -- commands -----------------------------------------------------------------

def cmd_witt(args) -> RunReport:
    retries: list = []

    def body(N):
        ctx = context_from(None, p=args.p, m=args.m or 1, N=N)
        op = args.op
        res: dict = {"op": op}
        if op in ("add", "mul"):
            if args.a is None or args.b is None:
                raise ValidationError(f"--op {op} needs --a and --b")
            a = RingElement(ctx, parse_element(args.a, ctx))
            b = RingElement(ctx, parse_element(args.b, ctx))
            c = a + b if op == "add" else a * b
            da, db = to_witt_digits(a, N), to_witt_digits(b, N)
            dc = (digitwise_add if op == "add" else digitwise_mul)(da, db)
            res.update(
                ring=c.encode(),
                digits=_digits(ctx, to_witt_digits(c, N)),
                digit_path=_digits(ctx, dc),
                agree=dc == to_witt_digits(c, N),
            )
        elif op == "teichmuller":
            if args.a is None:
                raise ValidationError("--op teichmuller needs --a (a residue element)")
            obj = parse_element(args.a, ctx.residue_field)
            t = teichmuller(obj, ctx)
            res.update(ring=t.encode(), digits=_digits(ctx, to_witt_digits(t, N)))
        elif op == "to-digits":
            if args.a is None:
                raise ValidationError("--op to-digits needs --a")
            a = RingElement(ctx, parse_element(args.a, ctx))
            res.update(digits=_digits(ctx, to_witt_digits(a, args.l or N)))
        elif op == "from-digits":
            if not args.digits:
                raise ValidationError("--op from-digits needs --digits")
            try:
                vals = [int(v) for v in args.digits.split(",")]
            except ValueError as exc:
                raise ValidationError(f"bad digit list {args.digits!r}") from exc
            d = WittDigits.from_ints(ctx, vals)
            res.update(ring=from_witt_digits(d).encode())
        return res, ctx.to_dict()

    result, ctxd = _run_with_retry(body, _precision(args), retries)
    return RunReport("witt", {}, ctxd, args.seed, result, retries)


def _digits(ctx, d: WittDigits) -> list[int]:
    return [ctx.residue_to_int(x) for x in d.digits]


def _load_order_lattice(args):
    inputs = {}
    lat_data, inputs["lattice"] = read_json(args.lattice)
    order_data = lat_data.get("order") if isinstance(lat_data, dict) else None
    if args.order:
        order_data, inputs["order"] = read_json(args.order)
    if order_data is None:
        raise ValidationError("no order given (--order or an inline 'order' record)")
    if not isinstance(order_data, dict):
        raise ValidationError("order record must be an object")
    return order_data, lat_data, inputs


def _build_lattice(order_data, lat_data, args, N):
    ctx = context_from(order_data.get("context"), p=args.p, m=args.m, N=N)
    order = order_from(order_data, ctx)
    return lattice_from(lat_data, order)


def cmd_rigid(args) -> RunReport:
    order_data, lat_data, inputs = _load_order_lattice(args)
    retries: list = []

    def body(N):
        L = _build_lattice(order_data, lat_data, args, N)
        ext = ext1_invariants(L, L)
        res = {
            "rigid": is_rigid(L),
            "end_rank": hom_basis(L, L).rank,
            "end_rank_mod_p": end_rank_mod_p(L),
            "ext1": _ext_dict(ext),
        }
        return res, L.ctx.to_dict()

    result, ctxd = _run_with_retry(body, _precision(args, order_data.get("context")), retries)
    return RunReport("rigid", inputs, ctxd, args.seed, result, retries)


def cmd_census(args) -> RunReport:
    order_data, lat_data, inputs = _load_order_lattice(args)
    retries: list = []

    def body(N):
        L = _build_lattice(order_data, lat_data, args, N)
        rep = census_rigid(L, args.max_colength, seed=args.seed)
        return rep.encode(), L.ctx.to_dict()

    result, ctxd = _run_with_retry(body, _precision(args, order_data.get("context")), retries)
    return RunReport("census", inputs, ctxd, args.seed, result, retries)


def cmd_genval(args) -> RunReport:
    inputs = {}
    data, inputs["polynomial"] = read_json(args.polynomial)
    if not isinstance(data, dict):
        raise ValidationError("polynomial record must be an object")
    point_data = None
    if args.point_file:
        point_data, inputs["point"] = read_json(args.point_file)
    elif args.point is None:
        raise ValidationError("give --point or --point-file")
    retries: list = []

    def body(N):
        ctx = context_from(data.get("context"), p=args.p, m=args.m, N=N)
        f = polynomial_from(data, ctx)
        x = point_from(point_data, ctx) if point_data is not None else parse_point(args.point, ctx, args.digits)
        res: dict = {"naive_valuation": _capped(naive_valuation(f), N), "l": x.l}
        if args.threshold is not None:
            res["member"] = variety_membership(f, x, args.threshold)
        try:
            res["generic_valuation"] = generic_valuation(f, x)
        except PrecisionExhausted:
            if args.threshold is None:
                raise
            res["generic_valuation"] = f">={N}"
        if args.witness and isinstance(res["generic_valuation"], int):
            w = witness_lift(f, x, seed=args.seed)
            res["witness"] = w.encode()
            res["witness"]["achieved"] = valuation_at_lift(f, x, w.z)
        return res, ctx.to_dict()

    result, ctxd = _run_with_retry(body, _precision(args, data.get("context")), retries)
    return RunReport("genval", inputs, ctxd, args.seed, result, retries)


def _capped(v: int, N: int):
    return v if v < N else f">={N}"


def cmd_group(args) -> RunReport:
    G = make_group(args.group)
    H = subgroup(G, args.subgroup or "")
    retries: list = []

    def body(N):
        ctx = context_from(None, p=args.p, m=args.m or 1, N=N)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            O = group_order(G, ctx)
        res: dict = {"op": args.op, "group_order": G.order, "subgroup_order": len(H)}
        if args.op == "hh1":
            res["hh1_vanishes"] = hochschild1_vanishes(O)
            return res, ctx.to_dict()
        L = permutation_lattice(G, H, ctx, O)
        res["rank"] = L.rank
        if args.op == "endrank":
            res["end_rank"] = hom_basis(L, L).rank
            res["double_cosets"] = len(double_cosets(G, H))
        elif args.op == "rigid":
            res["rigid"] = is_rigid(L)
            res["ext1"] = _ext_dict(ext1_invariants(L, L))
        elif args.op == "census":
            res["census"] = census_rigid(L, args.max_colength, seed=args.seed).encode()
        return res, ctx.to_dict()

    result, ctxd = _run_with_retry(body, _precision(args), retries)
    inputs = {"group": args.group, "subgroup": args.subgroup or ""}
    return RunReport("group", inputs, ctxd, args.seed, result, retries)


COMMANDS = {"witt": cmd_witt, "rigid": cmd_rigid, "census": cmd_census, "genval": cmd_genval, "group": cmd_group}


# -- argument parsing -----------------------------------------------------------

def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized searches")
    common.add_argument("--precision", type=_positive, default=argparse.SUPPRESS, help="working precision N")
    common.add_argument("--m", type=_positive, default=argparse.SUPPRESS, help="residue degree")
    common.add_argument("--p", type=int, default=argparse.SUPPRESS, help="the prime p")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON report here")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print JSON instead of a table")
    common.add_argument("--timings", action="store_true", default=argparse.SUPPRESS, help="include wall-clock timings")

    parser = argparse.ArgumentParser(prog="lattice-rigidity", description=__doc__.splitlines()[0], parents=[common])
    parser.set_defaults(seed=0, precision=None, m=None, p=None, out=None, json=False, timings=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("witt", parents=[common], help="Galois ring / Witt vector arithmetic")
    w.add_argument("--op", required=True, choices=["add", "mul", "teichmuller", "to-digits", "from-digits"])
    w.add_argument("--a", help="ring element: integer or JSON list of m integers")
    w.add_argument("--b", help="second operand")
    w.add_argument("--l", type=_positive, help="number of Witt digits")
    w.add_argument("--digits", help="comma-separated Witt digits (packed residue integers)")

    r = sub.add_parser("rigid", parents=[common], help="rigidity and Ext^1 of a lattice")
    r.add_argument("--order", help="order file (optional when the lattice file inlines it)")
    r.add_argument("lattice", help="lattice file")

    c = sub.add_parser("census", parents=[common], help="sublattice census by isomorphism class")
    c.add_argument("--order", help="order file (optional when the lattice file inlines it)")
    c.add_argument("lattice", help="lattice file")
    c.add_argument("--max-colength", type=int, required=True)

    g = sub.add_parser("genval", parents=[common], help="naive and generic valuations")
    g.add_argument("polynomial", help="polynomial file")
    g.add_argument("--point", help="coordinates separated by ',', digits by ':'")
    g.add_argument("--point-file", help="point file {n, l, digits}")
    g.add_argument("--digits", type=_positive, help="number of Witt digits l (pads with zeros)")
    g.add_argument("--witness", action="store_true")
    g.add_argument("--threshold", type=int)

    gr = sub.add_parser("group", parents=[common], help="permutation lattices of finite groups")
    gr.add_argument("--group", required=True, help='generators, e.g. "(1 2),(1 2 3)"')
    gr.add_argument("--subgroup", default="", help="subgroup generators (default: trivial)")
    gr.add_argument("--op", required=True, choices=["rigid", "endrank", "hh1", "census"])
    gr.add_argument("--max-colength", type=int, default=2)
    return parser


def _table(report: dict) -> str:
    lines = [f"command   {report['command']}"]
    ctx = report["context"]
    lines.append(f"context   p={ctx['p']} m={ctx['m']} N={ctx['N']}")
    for r in report["precision_retries"]:
        lines.append(f"retry     precision {r['from']} -> {r['to']}")
    for w in report["warnings"]:
        lines.append(f"warning   {w}")

    def walk(prefix, obj):
        if isinstance(obj, dict) and obj:
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        else:
            lines.append(f"{prefix:<28}{_compact(obj)}")

    walk("", report["result"])
    return "\n".join(lines) + "\n"


def _compact(obj) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return obj
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    caught: list = []
    try:
        with warnings.catch_warnings(record=True) as wlist:
            warnings.simplefilter("always")
            report = COMMANDS[args.command](args)
            caught = sorted({str(w.message) for w in wlist})
    except PrecisionExhausted as exc:
        print(f"error: precision exhausted after one retry at doubled precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except CapExceeded as exc:
        print(f"error: size cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, LatticeError, ValueError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report.warnings = caught
    if args.timings:
        report.timings = {"wall_seconds": round(time.perf_counter() - start, 6)}
    payload = report.to_dict()
    text = dumps(payload)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_INVALID
    sys.stdout.write(text if args.json else _table(payload))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
