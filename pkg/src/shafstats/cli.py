"""Command-line entry point: ``shafstats <subcommand> --a A --b B --x X ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction

from . import charsums, frobenius, sha_stats, store
from .arith import is_squarefree
from .curve import has_irrational_two_torsion, is_cm, new_curve
from .errors import DegenerateFitError, ShafstatsError

log = logging.getLogger("shafstats")

HISTOGRAM_TOP = 5


def parse_int(text: str) -> int:
    """Integers in plain, ``10^6``, ``10**6`` or ``1e6`` notation."""
    t = text.strip().replace("_", "")
    for op in ("**", "^"):
        if op in t:
            base, exp = t.split(op, 1)
            return int(base) ** int(exp)
    if "e" in t.lower():
        mant, exp = t.lower().split("e", 1)
        value = Fraction(mant) * 10 ** int(exp)
        if value.denominator != 1:
            raise argparse.ArgumentTypeError(f"not an integer: {text}")
        return int(value)
    try:
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from None


def parse_int_list(text: str) -> list[int]:
    return [parse_int(part) for part in text.split(",") if part.strip()]


def parse_float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def default_checkpoints(x: int) -> list[int]:
    out, c = [], 10
    while c <= x:
        out.append(c)
        c *= 10
    if not out or out[-1] != x:
        out.append(x)
    return out


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, (float, Fraction)):
        return f"{float(v):.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, int)) or v is None:
        return v
    if isinstance(v, (float, Fraction)):
        f = float(f"{float(v):.6g}")
        return f if math.isfinite(f) else None
    if isinstance(v, (list, tuple)):
        return [_jsonable(i) for i in v]
    return str(v)


def render(command: str, params: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        doc = {
            "command": command,
            "params": {k: _jsonable(v) for k, v in params.items()},
            "rows": [{k: _jsonable(v) for k, v in row.items()} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    columns = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _checkpoints(args) -> list[int]:
    cps = args.checkpoints or default_checkpoints(args.x)
    return sorted({c for c in cps if 1 <= c <= args.x})


def _table(args):
    curve = new_curve(args.a, args.b)
    return store.load_or_build(curve, args.x, args.cache, args.threads)


def cmd_trace(args):
    table = _table(args)
    curve = table.curve
    return {"x": args.x}, [
        {
            "x": args.x,
            "xmax": table.xmax,
            "records": table.count_up_to(args.x),
            "delta": curve.delta,
            "bad_primes": ";".join(map(str, curve.bad_primes)),
            "cm": is_cm(curve),
            "irrational_two_torsion": has_irrational_two_torsion(curve),
        }
    ]


def cmd_sha_stats(args):
    table = _table(args)
    sha = sha_stats.build_sha_table(table)
    rows = []
    for x in _checkpoints(args):
        pi = charsums.prime_count(table, x)
        k = sha.cut(x)
        hist = sha_stats.sha_histogram(sha, x)
        top = sorted(hist.items(), key=lambda kv: (-kv[1], kv[0]))[:HISTOGRAM_TOP]
        pts = sha_stats.pi_ts(sha, x)
        tail_cut = x ** (12 / 13)
        rows.append(
            {
                "x": x,
                "pi": pi,
                "good_count": k,
                "pi_ts": pts,
                "ratio": pts / pi if pi else 0.0,
                "sha_max": max(hist) if hist else 0,
                "diagnostic_x^12/13": tail_cut,
                "diagnostic_count_sha_above": sum(c for s, c in hist.items() if s > tail_cut),
                "histogram_top": ";".join(f"{s}:{c}" for s, c in top),
            }
        )
    return {"checkpoints": _checkpoints(args)}, rows


def cmd_dxy(args):
    sha = sha_stats.build_sha_table(_table(args))
    x = args.x
    rows = [
        {
            "x": x,
            "y": y,
            "D": sha_stats.d_xy(sha, x, y),
            "diagnostic_x^13/7*y^-13/7": x ** (13 / 7) * y ** (-13 / 7),
        }
        for y in args.y
    ]
    return {"y": args.y}, rows


def cmd_sm(args):
    sha = sha_stats.build_sha_table(_table(args))
    index = frobenius.build_index(sha)
    cps = [c for c in _checkpoints(args) if c >= 2]
    rows = []
    for m in args.m:
        sf = is_squarefree(m)
        beta = None
        if sf and cps:
            try:
                beta = frobenius.lang_trotter_fit(index, m, cps).meta["beta_hat"]
            except DegenerateFitError:
                beta = None
        rows.append(
            {
                "x": args.x,
                "m": m,
                "squarefree": sf,
                "S_m": sha_stats.s_m(sha, m, args.x),
                "S_m_kernel": sha_stats.s_m_kernel(sha, m, args.x),
                "pi_K": frobenius.pi_K(index, m, args.x) if sf else None,
                "diagnostic_lang_trotter_beta": beta,
            }
        )
    return {"m": args.m}, rows


def cmd_sigma(args):
    index = frobenius.build_index(sha_stats.build_sha_table(_table(args)))
    u, v = args.u, args.v
    rows = []
    for x in _checkpoints(args):
        if u > 4 * x:
            continue
        rows.append(
            {
                "x": x,
                "u": u,
                "v": v,
                "sigma": frobenius.sigma(index, x, u, v),
                "diagnostic_(vx)^55/59": (v * x) ** (55 / 59),
                "diagnostic_v^13/14*x^13/14": v ** (13 / 14) * x ** (13 / 14),
                "suggested_z_long": charsums.suggested_z(v, x),
                "suggested_z_short": charsums.suggested_z(v, x, short=True),
            }
        )
    return {"u": u, "v": v}, rows


def cmd_mset(args):
    index = frobenius.build_index(sha_stats.build_sha_table(_table(args)))
    rows = []
    for x in _checkpoints(args):
        ms, top = frobenius.m_set(index, x)
        rows.append({"x": x, "size": len(ms), "max_m": top, "diagnostic_x^1/13": x ** (1 / 13)})
    return {"checkpoints": _checkpoints(args)}, rows


def cmd_charsum(args):
    if args.kind == "lemma1":
        rep = charsums.lemma1_report(_table(args), args.x, args.l1, args.l2)
        params = {"kind": "lemma1", "l1": args.l1, "l2": args.l2}
        if rep.residual > args.x**0.75:
            log.warning("U(x; l1 l2) residual %.6g exceeds x^(3/4)", float(rep.residual))
    elif args.kind == "burgess":
        rep = charsums.burgess_sum(args.u, args.v, args.s)
        params = {"kind": "burgess", "u": args.u, "v": args.v, "s": args.s}
    else:
        X, Y = args.X, args.Y
        flags = charsums.squarefree_flags(X)
        rep = charsums.hb_double_sum(X, Y, {int(m): 1 for m in flags.nonzero()[0]})
        params = {"kind": "hb", "X": X, "Y": Y, "f": "1"}
    row = {
        "x": args.x,
        "value": rep.value,
        "main_term": rep.main_term,
        "residual": rep.residual,
        "diagnostic_bound": rep.bound,
    }
    if "ratio" in rep.meta:
        row["diagnostic_ratio"] = rep.meta["ratio"]
    return params, [row]


def cmd_sieve(args):
    sha = sha_stats.build_sha_table(_table(args))
    rows = []
    for m in args.m:
        u = args.u if args.u is not None else m
        config = charsums.make_sieve_config(u, args.z, sha.base.curve.bad_primes)
        rep = charsums.square_sieve_rhs(sha, m, args.x, config)
        rows.append(
            {
                "x": args.x,
                "m": m,
                "z": args.z,
                "L": rep.meta["L"],
                "z_floor_ok": config.z_floor_ok,
                "value": rep.value,
                "S_m": rep.meta["s_m"],
                "diagnostic_ratio": rep.meta["ratio"],
            }
        )
    return {"z": args.z, "m": args.m}, rows


COMMANDS = {
    "trace": cmd_trace,
    "sha-stats": cmd_sha_stats,
    "dxy": cmd_dxy,
    "sm": cmd_sm,
    "sigma": cmd_sigma,
    "mset": cmd_mset,
    "charsum": cmd_charsum,
    "sieve": cmd_sieve,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=parse_int, required=True, help="coefficient a of y^2 = x^3 + ax + b")
    common.add_argument("--b", type=parse_int, required=True, help="coefficient b")
    common.add_argument("--x", type=parse_int, required=True, help="upper bound for primes")
    common.add_argument("--threads", type=int, default=1, help="worker processes for point counting")
    common.add_argument("--cache", default=None, help="trace cache file (created or extended)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--checkpoints", type=parse_int_list, default=None, help="comma-separated x values")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shafstats", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trace", parents=[common], help="compute and cache a_p for good p <= x")
    sub.add_parser("sha-stats", parents=[common], help="pi_TS(x) and the Sha size histogram")
    p = sub.add_parser("dxy", parents=[common], help="D(x, y)")
    p.add_argument("--y", type=parse_float_list, required=True)
    p = sub.add_parser("sm", parents=[common], help="S_m(x) and Pi(K_m, x)")
    p.add_argument("--m", type=parse_int_list, required=True)
    p = sub.add_parser("sigma", parents=[common], help="sigma(x; u, v)")
    p.add_argument("--u", type=parse_int, required=True)
    p.add_argument("--v", type=parse_int, required=True)
    sub.add_parser("mset", parents=[common], help="M(x) and its maximum")
    p = sub.add_parser("charsum", parents=[common], help="character sums U, Burgess window, mean square")
    p.add_argument("--kind", choices=("lemma1", "burgess", "hb"), default="lemma1")
    p.add_argument("--l1", type=parse_int, default=5)
    p.add_argument("--l2", type=parse_int, default=7)
    p.add_argument("--u", type=parse_int)
    p.add_argument("--v", type=parse_int)
    p.add_argument("--s", type=parse_int)
    p.add_argument("--X", type=parse_int)
    p.add_argument("--Y", type=parse_int)
    p = sub.add_parser("sieve", parents=[common], help="square-sieve majorant for S_m(x)")
    p.add_argument("--m", type=parse_int_list, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--u", type=float, default=None, help="window top used for the z >= (log u)^2 check")
    return parser


def _setup_logging(verbose: bool) -> None:
    for handler in list(log.handlers):
        if getattr(handler, "_shafstats_cli", False):
            log.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._shafstats_cli = True
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    if args.command == "charsum":
        needed = {"burgess": ("u", "v", "s"), "hb": ("X", "Y")}.get(args.kind, ())
        missing = [f"--{n}" for n in needed if getattr(args, n) is None]
        if missing:
            parser.error(f"charsum --kind {args.kind} needs {', '.join(missing)}")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        params, rows = COMMANDS[args.command](args)
    except ShafstatsError as exc:
        print(f"shafstats: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"shafstats: error: {exc}", file=sys.stderr)
        return 3
    except MemoryError as exc:
        print(f"shafstats: error: out of memory: {exc}", file=sys.stderr)
        return 4
    params = {"a": args.a, "b": args.b, "x": args.x, **params}
    sys.stdout.write(render(args.command, params, rows, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
