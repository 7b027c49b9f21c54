"""Command line front end: ``saw <command> [options]``.

Every command writes one JSON report (stdout unless ``--out``) and, with
``--csv``, a table of plot data. Exit status is 0 when all asserted residuals
are within tolerance, 1 on a tolerance violation and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import functools
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .weights import PI, AngleError, local_weights, parse_angle, parse_angles

EXIT_OK, EXIT_TOL, EXIT_USAGE = 0, 1, 2


# --- serialisation ------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _pmap(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))  # ordered, so the merge is deterministic


# --- argument helpers -----------------------------------------------------------

def _angles(args) -> tuple[float, ...]:
    from .tiling import read_angle_file

    if getattr(args, "angles_file", None):
        return tuple(read_angle_file(args.angles_file))
    if not args.angles:
        raise AngleError("give --angles or --angles-file")
    return tuple(parse_angles(args.angles))


def _add_angles(p):
    p.add_argument("--angles", help='comma separated, e.g. "pi/3,pi/2,2pi/3"')
    p.add_argument("--angles-file", help="one angle per line, # comments")


# --- commands ---------------------------------------------------------------------

def cmd_weights(args):
    thetas = [parse_angle(t) for t in args.theta.split(",")]
    rows = [local_weights(t).as_dict() for t in thetas]
    return {"weights": rows}, [], ["theta", "u1", "u2", "v", "w1", "w2"], [
        [r[k] for k in ("theta", "u1", "u2", "v", "w1", "w2")] for r in rows]


def _yb_point(g):
    from .yangbaxter import check_yb

    return check_yb(0.0, g[0], g[0] + g[1])


def _yb_random_point(d):
    from .yangbaxter import check_yb

    return check_yb(*d)


def cmd_verify_yb(args):
    gaps = np.linspace(0.1, PI - 0.1, args.grid)
    grid, skipped = [], []
    for g1 in gaps:
        for g2 in gaps:
            s = (g1 + g2) % PI
            if min(s, PI - s) < 1e-9:
                skipped.append((float(g1), float(g2)))
            else:
                grid.append((float(g1), float(g2)))
    res = _pmap(_yb_point, grid, args.jobs)
    rng = np.random.default_rng(args.seed)
    triples = []
    while len(triples) < args.random:
        d = tuple(float(x) for x in rng.uniform(0.0, PI, size=3))
        ds = sorted(x % PI for x in d)
        if min(ds[1] - ds[0], ds[2] - ds[1], PI - (ds[2] - ds[0])) >= 1e-6:
            triples.append(d)
    rres = _pmap(_yb_random_point, triples, args.jobs)
    worst = max(res + rres) if res or rres else 0.0
    out = {"max_residual": worst, "grid_max": max(res, default=0.0),
           "random_max": max(rres, default=0.0), "grid_points": len(grid),
           "degenerate_skipped": len(skipped), "random_triples": len(triples)}
    csv_rows = [[g1, g2, r] for (g1, g2), r in zip(grid, res)]
    return out, [("max_residual", worst)], ["gap1", "gap2", "residual"], csv_rows


def cmd_verify_cr(args):
    from .enumeration import cr_residuals, observable
    from .tiling import build_rect

    dom = build_rect(_angles(args), args.L)
    F = observable(dom)
    r = cr_residuals(dom, F)
    worst = float(np.max(np.abs(r))) if len(r) else 0.0
    rows = [[i, abs(z)] for i, z in enumerate(r)]
    return {"max_residual": worst, "faces": len(r)}, [("max_residual", worst)], ["face", "residual"], rows


def cmd_verify_rect(args):
    from .enumeration import rect_partition

    rep = rect_partition(_angles(args), args.L)
    res = rep.identity_residual()
    out = {"A": rep.A, "B": rep.B, "D": rep.D, "E": rep.E, "walks": rep.walk_count, "residual": res}
    return out, [("residual", abs(res))], ["A", "B", "D", "E", "residual"], [[rep.A, rep.B, rep.D, rep.E, res]]


def cmd_verify_fug(args):
    from .fugacity import check_fugacity_sum_rule

    thetas = _angles(args)
    rows, checks, table = [], [], []
    for y in args.y:
        c = check_fugacity_sum_rule(thetas, args.L, y)
        rows.append({"y": y, "A": c.A, "B": c.B, "D": c.D, "E": c.E,
                     "b_coefficient": c.coefficient, "residual": c.residual})
        checks.append((f"residual(y={y})", abs(c.residual)))
        table.append([y, c.A, c.B, c.D, c.E, c.residual])
    worst = max(abs(r["residual"]) for r in rows)
    return ({"max_residual": worst, "points": rows}, checks,
            ["y", "A", "B", "D", "E", "residual"], table)


def cmd_partition(args):
    thetas = _angles(args)
    if args.domain == "rect":
        if args.method == "brute":
            from .enumeration import rect_partition

            rep = rect_partition(thetas, args.L, x=args.x, y=args.y)
            vals = {"A": rep.A, "B": rep.B, "D": rep.D, "E": rep.E}
        else:
            if args.x != 1.0:
                raise ValueError("length fugacity needs --method brute")
            from .transfer import TransferMatrix

            vals = TransferMatrix(thetas, y=args.y).rect(args.L)
        res = math.cos(3 * PI / 8) * vals["A"] + vals["B"] + vals["D"] + vals["E"] - 1.0
        checks = [("residual", abs(res))] if args.y == 1.0 and args.x == 1.0 else []
        return dict(vals, residual=res), checks, list(vals), [list(vals.values())]
    from .transfer import strip_partition

    rep = strip_partition(thetas, y=args.y, eps=args.eps, L_max=args.L_max)
    out = {"A": rep.A, "B": rep.B, "L": rep.L, "converged": rep.converged,
           "last_increment": rep.increment, "eps": args.eps, "strip_residual": rep.strip_residual,
           "rect_residual": rep.rect_residual}
    checks = [("strip_residual", abs(rep.strip_residual))] if args.y == 1.0 and rep.converged else []
    rows = [[L, v["A"], v["B"], v["D"], v["E"]] for L, v in rep.history]
    return out, checks, ["L", "A", "B", "D", "E"], rows


def cmd_two_point(args):
    thetas = _angles(args)
    if args.method == "brute":
        from .enumeration import two_point
        from .tiling import build_rect

        dom = build_rect(thetas, args.L)
        col, side = (1, "W") if args.side == "alpha" else (len(thetas), "E")
        g = two_point(dom, dom.mid(1, args.a_row, "W"), dom.mid(col, args.b_row, side))
    else:
        from .transfer import TransferMatrix

        g = TransferMatrix(thetas).endpoint_two_point(args.L, args.side, args.b_row, start_row=args.a_row)
    return {"G": g}, [], ["G"], [[g]]


def cmd_swap(args):
    from .yangbaxter import column_swap_experiment

    rows = column_swap_experiment(_angles(args), args.i, args.a_row, args.b_row,
                                  Ls=range(max(1, abs(args.a_row), abs(args.b_row)), args.L_max + 1))
    diffs = [r[3] for r in rows]
    out = {"rows": [{"L": L, "G": g, "G_swapped": g2, "difference": d} for L, g, g2, d in rows],
           "final_difference": diffs[-1] if diffs else None}
    checks = [("final_difference", diffs[-1])] if diffs else []
    return out, checks, ["L", "G", "G_swapped", "difference"], [list(r) for r in rows]


def cmd_triangle(args):
    from .triangle import tri_partition

    parts = _pmap(tri_partition, range(args.L_max + 1), args.jobs)
    rows = [{"L": p.L, "A_delta": p.A_delta, "D_delta": p.D_delta, "ang": p.ang,
             "identity_residual": p.identity_residual} for p in parts]
    checks = [(f"identity_residual(L={p.L})", abs(p.identity_residual)) for p in parts]
    table = [[p.L, p.A_delta, p.D_delta, p.identity_residual] for p in parts]
    out = {"rows": rows}
    if args.concatenation:
        from .triangle import concatenation_report

        out["concatenation"] = concatenation_report(1, L_cap=4)
    return out, checks, ["L", "A_delta", "D_delta", "identity_residual"], table


def cmd_bridges(args):
    from .triangle import bridge_decay_report

    rows = bridge_decay_report(args.T_max, L_cap=args.L_cap)
    out = {"rows": [{"T": r.T, "A": r.A, "B": r.B, "D_delta": r.D_delta, "bound": r.bound,
                     "holds": r.holds, "partial_sum_B3_over_T": r.partial_sum} for r in rows]}
    checks = [(f"B_{r.T} - bound", max(0.0, r.B - r.bound)) for r in rows if r.bound is not None]
    table = [[r.T, r.A, r.B, r.bound if r.bound is not None else float("nan"), r.partial_sum] for r in rows]
    return out, checks, ["T", "A", "B", "bound", "partial_sum"], table


def _yc_of(thetas, tol):
    from .transfer import yc_strip

    return yc_strip(thetas, tol=tol)


def cmd_yc(args):
    thetas = _angles(args)
    if args.T_max:
        seqs = [thetas[:T] if len(thetas) >= T else (PI / 3,) * T for T in range(1, args.T_max + 1)]
    else:
        seqs = [thetas]
    values = _pmap(functools.partial(_yc_of, tol=args.tol), seqs, args.jobs)
    rows = [{"T": len(s), "thetas": list(s), "y_c": v, "gap": v - (1 + math.sqrt(2))}
            for s, v in zip(seqs, values)]
    return {"y_c": values[-1], "rows": rows}, [], ["T", "y_c", "gap"], [[r["T"], r["y_c"], r["gap"]] for r in rows]


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saw", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write plot data as CSV")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent points")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", parents=[common], help="plaquette weights")
    w.add_argument("--theta", required=True, help="angle token(s), comma separated")
    w.add_argument("--format", choices=["json", "csv"], default="json")
    w.set_defaults(func=cmd_weights, tol=None)

    v = sub.add_parser("verify", help="identity checks")
    vs = v.add_subparsers(dest="check", required=True)
    yb = vs.add_parser("yb", parents=[common])
    yb.add_argument("--grid", type=int, default=20)
    yb.add_argument("--random", type=int, default=400)
    yb.add_argument("--seed", type=int, default=0)
    yb.add_argument("--tol", type=float, default=1e-11)
    yb.set_defaults(func=cmd_verify_yb)
    cr = vs.add_parser("cr", parents=[common])
    _add_angles(cr)
    cr.add_argument("--L", type=int, required=True)
    cr.add_argument("--tol", type=float, default=1e-10)
    cr.set_defaults(func=cmd_verify_cr)
    ri = vs.add_parser("rect-identity", parents=[common])
    _add_angles(ri)
    ri.add_argument("--L", type=int, required=True)
    ri.add_argument("--tol", type=float, default=1e-10)
    ri.set_defaults(func=cmd_verify_rect)
    fi = vs.add_parser("fugacity-identity", parents=[common])
    _add_angles(fi)
    fi.add_argument("--L", type=int, required=True)
    fi.add_argument("--y", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0])
    fi.add_argument("--tol", type=float, default=1e-9)
    fi.set_defaults(func=cmd_verify_fug)

    pa = sub.add_parser("partition", parents=[common], help="A, B, D, E sums")
    pa.add_argument("domain", choices=["rect", "strip"])
    _add_angles(pa)
    pa.add_argument("--L", type=int, default=2)
    pa.add_argument("--x", type=float, default=1.0)
    pa.add_argument("--y", type=float, default=1.0)
    pa.add_argument("--method", choices=["transfer", "brute"], default="transfer")
    pa.add_argument("--eps", type=float, default=1e-12)
    pa.add_argument("--L-max", dest="L_max", type=int, default=200)
    pa.add_argument("--tol", type=float, default=1e-6)
    pa.set_defaults(func=cmd_partition)

    tp = sub.add_parser("two-point", parents=[common], help="G(a, b) for boundary points")
    _add_angles(tp)
    tp.add_argument("--L", type=int, required=True)
    tp.add_argument("--a-row", dest="a_row", type=int, default=0)
    tp.add_argument("--b-row", dest="b_row", type=int, required=True)
    tp.add_argument("--side", choices=["alpha", "beta"], default="alpha")
    tp.add_argument("--method", choices=["transfer", "brute"], default="transfer")
    tp.set_defaults(func=cmd_two_point, tol=None)

    sw = sub.add_parser("swap-experiment", parents=[common], help="column transposition gap vs L")
    _add_angles(sw)
    sw.add_argument("--i", type=int, required=True)
    sw.add_argument("--a-row", dest="a_row", type=int, default=0)
    sw.add_argument("--b-row", dest="b_row", type=int, default=1)
    sw.add_argument("--L-max", dest="L_max", type=int, default=30)
    sw.add_argument("--tol", type=float, default=1e-4)
    sw.set_defaults(func=cmd_swap)

    tr = sub.add_parser("triangle", parents=[common], help="hexagonal-lattice triangle sums")
    tr.add_argument("--L-max", dest="L_max", type=int, default=2)
    tr.add_argument("--tol", type=float, default=1e-10)
    tr.add_argument("--concatenation", action="store_true",
                    help="also report the three-walk concatenation bound at L=1 (needs Tri_4, minutes)")
    tr.set_defaults(func=cmd_triangle)

    br = sub.add_parser("bridges", parents=[common], help="bridge decay table at pi/3")
    br.add_argument("--T-max", dest="T_max", type=int, default=6)
    br.add_argument("--L-cap", dest="L_cap", type=int, default=3)
    br.add_argument("--tol", type=float, default=1e-9)
    br.set_defaults(func=cmd_bridges)

    yc = sub.add_parser("yc", parents=[common], help="critical surface fugacity of a strip")
    _add_angles(yc)
    yc.add_argument("--T-max", dest="T_max", type=int, default=0,
                    help="also report widths 1..T_max (prefixes of --angles, pi/3 otherwise)")
    yc.add_argument("--tol", type=float, default=1e-9, help="bisection tolerance")
    yc.set_defaults(func=cmd_yc, bisection=True)
    return p


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([_num(x).strip('"') if isinstance(x, (float, np.floating)) else x for x in r])


def _params(args) -> dict:
    skip = {"func", "out", "csv", "jobs", "timing", "command", "check"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    t0 = time.perf_counter()
    try:
        result, checks, header, rows = args.func(args)
    except (AngleError, ValueError) as e:
        print(f"saw: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    tol = None if getattr(args, "bisection", False) else getattr(args, "tol", None)
    failed = [(name, r) for name, r in checks if tol is not None and not r <= tol]
    command = args.command + (f" {args.check}" if args.command == "verify" else "")
    report = {"command": command, "parameters": _params(args), "results": result,
              "residuals": {name: r for name, r in checks}, "tolerance": tol,
              "status": "fail" if failed else "ok"}
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - t0
    if args.command == "weights" and args.format == "csv" and not args.csv:
        wr = csv.writer(sys.stdout, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([_num(x) for x in r])
    else:
        text = dumps(report) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    if args.csv:
        _write_csv(args.csv, header, rows)
    for name, r in failed:
        print(f"saw: tolerance violated: {name} = {r:.3e} > {tol:.1e}", file=sys.stderr)
    return EXIT_TOL if failed else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
