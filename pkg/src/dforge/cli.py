"""Command-line front end: gen, disc, verify, witness, measure.

Every output starts with the run configuration and package version. Tables
go to --out (or stdout); diagnostics go to stderr. Exit codes: 0 when every
requested check holds, 1 when a check fails, 2 for invalid input, 3 when the
cost guard refuses a computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .checks import SUITES, run_suite
from .digitalseq import GeneratorTuple, GridPoint, named_tuple, point_set, sample_tuple
from .discrepancy import check_cost, local_direct, local_spectral, log_predictors, star_grid
from .errors import CostGuardError, DforgeError
from .metric import lowerbound as lb
from .metric import measure as ms
from .qadic import check_base

EXIT_FAIL, EXIT_INVALID, EXIT_REFUSED = 1, 2, 3
SPECTRAL_SAMPLES = 16
GROWTH_COLUMNS = ["seed", "r_total", "m", "N", "certified_bound", "max_abs_D", "predictor", "ratio"]


def fmt(x: float | None) -> str:
    """12 significant digits; empty for missing values."""
    if x is None:
        return ""
    return f"{float(x):.12g}"


def _ints(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise DforgeError(f"expected comma-separated integers, got {text!r}") from None


def _config(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k != "func"}


class Output:
    """Collects a header, then CSV rows or a JSON document, and writes once."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _config(args)

    def _write(self, text: str) -> None:
        if self.args.out in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.args.out, "w", newline="") as fh:
                fh.write(text)

    def csv(self, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        buf = io.StringIO()
        buf.write(f"# dforge {__version__}\n")
        buf.write("# config " + json.dumps(self.config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        self._write(buf.getvalue())

    def json(self, body: dict[str, Any]) -> None:
        doc = {"version": __version__, "config": self.config, **body}
        self._write(json.dumps(doc, indent=2) + "\n")


def _need_seed(args: argparse.Namespace, why: str) -> int:
    if args.seed is None:
        raise DforgeError(f"--seed is required for {why}")
    return args.seed


def _default_m(q: int, N: int) -> int:
    m = 1
    while q**m < N:
        m += 1
    return m


def _generator(args: argparse.Namespace, m: int) -> GeneratorTuple:
    if args.load:
        with open(args.load) as fh:
            T = GeneratorTuple.from_json(fh.read())
        if T.q != args.q or T.s != args.s:
            raise DforgeError(f"loaded tuple has q={T.q}, s={T.s}; flags say q={args.q}, s={args.s}")
        return T
    if args.matrix == "random":
        seed = _need_seed(args, "random generator matrices")
        return sample_tuple(args.s, args.q, m, m, seed=seed, stream=args.stream)
    return named_tuple([args.matrix] * args.s, args.q, m, m)


def cmd_gen(args: argparse.Namespace) -> int:
    check_base(args.q)
    if args.N < 0:
        raise DforgeError(f"N must be nonnegative, got {args.N}")
    m = args.m or _default_m(args.q, args.N)
    T = _generator(args, m)
    ps = point_set(T, args.N, m)
    if args.save_tuple:
        with open(args.save_tuple, "w") as fh:
            fh.write(T.to_json())
    den = args.q**m
    out = Output(args)
    if args.format == "json":
        out.json({"denominator": den, "points": [
            {"n": n, "numerators": row.tolist(), "values": [fmt(v / den) for v in row]}
            for n, row in enumerate(ps.numerators)]})
        return 0
    cols = ["n"]
    for j in range(1, args.s + 1):
        cols += [f"x{j}", f"x{j}_num", f"x{j}_den"]
    rows = []
    for n, row in enumerate(ps.numerators):
        line: list[Any] = [n]
        for v in row.tolist():
            line += [fmt(v / den), v, den]
        rows.append(line)
    out.csv(cols, rows)
    return 0


def _spectral_deviation(T: GeneratorTuple, ps, N: int, m: int) -> float:
    """Max |spectral - direct| over a fixed stride of grid points."""
    q, s = T.q, T.s
    check_cost(q ** (m * s))
    total = q ** (m * s)
    step = max(1, total // SPECTRAL_SAMPLES)
    worst = 0.0
    for flat in range(0, total, step):
        coords, rest = [], flat
        for _ in range(s):
            coords.append(rest % q**m)
            rest //= q**m
        x = GridPoint(tuple(coords), m, q)
        worst = max(worst, abs(local_spectral(T, x, N, m) - local_direct(ps, x, N).value))
    return worst


def cmd_disc(args: argparse.Namespace) -> int:
    check_base(args.q)
    if args.N is not None:
        Ns = [args.N]
    else:
        Ns = list(range(1, args.N_max + 1))
    if not Ns or min(Ns) < 1:
        raise DforgeError("need N >= 1 (use --N or --N-max)")
    # strict q^m > N keeps every row inside the spectral identity's range
    m = args.m or _default_m(args.q, max(Ns) + 1)
    T = _generator(args, m)
    if T.m_r < m:
        raise DforgeError(f"generator has {T.m_r} rows, fewer than m = {m}")
    check_cost((args.q**m + 1) ** args.s)
    ps = point_set(T, max(Ns), m)
    rows = []
    for N in Ns:
        d = star_grid(ps, N, exact=True)
        primary = d / N if args.normalized else d
        pred, pred_ll = log_predictors(N, args.s)
        row = {"N": N, "D_star": float(primary), "D_star_num": primary.numerator,
               "D_star_den": primary.denominator, "D_star_normalized": float(d / N),
               "logN_s": pred, "logN_s_loglogN": pred_ll}
        if args.spectral_check:
            row["deviation"] = _spectral_deviation(T, ps, N, m)
        rows.append(row)
    ok = all(r.get("deviation", 0.0) <= 1e-7 for r in rows)
    out = Output(args)
    if args.format == "json":
        out.json({"m": m, "rows": rows, "ok": ok})
    else:
        cols = list(rows[0])
        out.csv(cols, [[r[c] if isinstance(r[c], int) else fmt(r[c]) for c in cols] for r in rows])
    if args.figure:
        from .plotting import plot_discrepancy

        plot_discrepancy(rows, args.s, args.figure)
    if not ok:
        bad = [r for r in rows if r["deviation"] > 1e-7][:10]
        for r in bad:
            print(f"spectral deviation {r['deviation']:.3e} at N={r['N']}", file=sys.stderr)
        return EXIT_FAIL
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    check_base(args.q)
    if args.mode == "montecarlo":
        _need_seed(args, "Monte Carlo suites")
    checks = run_suite(args.suite, args.q, args.s, args.m, args.mode, args.trials,
                       args.seed, _ints(args.k))
    ok = all(c.ok for c in checks)
    out = Output(args)
    if args.format == "csv":
        out.csv(["name", "expected", "observed", "tolerance", "cases", "ok"],
                [[c.name, c.expected, c.observed if isinstance(c.observed, str) else fmt(c.observed),
                  c.tolerance, c.cases, c.ok] for c in checks])
    else:
        out.json({"suite": args.suite, "ok": ok, "checks": [c.to_dict() for c in checks]})
    for c in checks:
        print(f"{'ok  ' if c.ok else 'FAIL'} {c.name} ({c.cases} cases)", file=sys.stderr)
    violations = [v for c in checks for v in c.violations][:10]
    for v in violations:
        print(f"  violation: {v}", file=sys.stderr)
    return 0 if ok else EXIT_FAIL


def _witness_one(job: tuple[int, int, int, int, int, int, int, int, bool]) -> dict[str, Any]:
    seed, stream, s, q, rows, r_min, r_max, J, scan = job
    T = sample_tuple(s, q, rows, rows, seed=seed, stream=stream)
    report = lb.witness_search(T, r_min, r_max, J, scan=scan)
    if report is None:
        return {"seed": seed, "found": False, "report": None, "violations": []}
    problems = lb.reverify_report(T, report)
    return {"seed": seed, "found": True, "report": report.to_dict(), "violations": problems}


def cmd_witness(args: argparse.Namespace) -> int:
    check_base(args.q)
    first = _need_seed(args, "sampled generator matrices")
    jobs = [(first + i, args.stream, args.s, args.q, args.rows, args.r_min, args.r_max,
             args.J, args.scan) for i in range(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_witness_one, jobs))
    else:
        results = [_witness_one(j) for j in jobs]
    found = [r for r in results if r["found"]]
    table = []
    for r in found:
        rep = r["report"]
        table.append({"seed": r["seed"], "r_total": sum(rep["r"]), "m": rep["m"], "N": rep["N"],
                      "certified_bound": rep["certified_bound"], "max_abs_D": rep["max_abs_D"],
                      "predictor": rep["predictor"], "ratio": rep["ratio"]})
    ratios = [t["ratio"] for t in table if t["ratio"] is not None]
    summary = {
        "seeds": len(results),
        "found": len(found),
        "found_rate": len(found) / len(results) if results else 0.0,
        "none_found": not found,
        "ratio_min": min(ratios) if ratios else None,
        "ratio_max": max(ratios) if ratios else None,
        "ratio_mean": sum(ratios) / len(ratios) if ratios else None,
    }
    ok = all(not r["violations"] for r in results)
    summary["ok"] = ok
    out = Output(args)
    csv_rows = [[t[c] if isinstance(t[c], int) else fmt(t[c]) for c in GROWTH_COLUMNS] for t in table]
    if args.format == "csv":
        out.csv(GROWTH_COLUMNS, csv_rows)
    else:
        out.json({"summary": summary, "growth": table, "results": results})
    if args.table:
        Output(argparse.Namespace(**{**vars(args), "out": args.table})).csv(GROWTH_COLUMNS, csv_rows)
    if args.figure:
        from .plotting import plot_witness

        plot_witness(table, args.figure)
    print(f"witnesses found for {len(found)} of {len(results)} seeds", file=sys.stderr)
    if not found:
        print("no witness in range; this is a legitimate outcome", file=sys.stderr)
    shown = 0
    for r in results:
        for v in r["violations"]:
            if shown < 10:
                print(f"  seed {r['seed']}: {v}", file=sys.stderr)
                shown += 1
    return 0 if ok else EXIT_FAIL


def cmd_measure(args: argparse.Namespace) -> int:
    check_base(args.q)
    if args.mode == "montecarlo":
        _need_seed(args, "Monte Carlo measures")
    k = _ints(args.k) or (1,) * args.s
    if args.kind == "mm":
        res = ms.measure_mm(args.s, args.q, args.m or 3, k, args.mode, args.trials, args.seed)
        expected = Fraction(1, args.q ** ((args.m or 3) - 1))
    else:
        shifts = _ints(args.shift)
        if shifts is None:
            raise DforgeError("--shift is required for --kind joint")
        res = ms.joint_measure(args.s, args.q, k, shifts, args.mode, args.trials, args.seed)
        m = res.params["m"]
        expected = Fraction(1, args.q ** (m + m // 2 - 2))
    if args.mode == "montecarlo":
        p = float(expected)
        tol = 3 * math.sqrt(p * (1 - p) / res.trials)
        ok = abs(float(res.estimate) - p) <= tol
    else:
        tol = 0.0
        ok = res.estimate == expected
    body = {"result": res.to_dict(), "expected": str(expected), "expected_value": float(expected),
            "tolerance": tol, "ok": ok}
    out = Output(args)
    if args.format == "csv":
        d = res.to_dict()
        out.csv(["estimate", "estimate_exact", "stderr", "trials", "successes", "expected",
                 "tolerance", "ok"],
                [[fmt(d["estimate"]), d["estimate_exact"] or "", fmt(d["stderr"]), d["trials"],
                  d["successes"], str(expected), fmt(tol), ok]])
    else:
        out.json(body)
    if not ok:
        print(f"estimate {res.estimate} differs from {expected} beyond {tol:.3g}", file=sys.stderr)
        return EXIT_FAIL
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, fmt_default: str = "csv") -> None:
        sp.add_argument("--q", type=int, default=2, help="prime base")
        sp.add_argument("--s", type=int, default=1, help="dimension")
        sp.add_argument("--m", type=int, default=None, help="digit precision")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--stream", type=int, default=0)
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    def matrices(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--matrix", choices=("random", "identity", "pascal"), default="random")
        sp.add_argument("--load", default=None, help="read a generator tuple from JSON")

    g = sub.add_parser("gen", help="list points of a digital sequence")
    common(g)
    matrices(g)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--save-tuple", default=None, help="write the generator tuple as JSON")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("disc", help="star discrepancy table")
    common(d)
    matrices(d)
    grp = d.add_mutually_exclusive_group(required=True)
    grp.add_argument("--N", type=int)
    grp.add_argument("--N-max", type=int)
    d.add_argument("--normalized", action="store_true", help="report D*/N in the D_star columns")
    d.add_argument("--spectral-check", action="store_true")
    d.add_argument("--figure", default=None, help="write a PNG plot to this path")
    d.set_defaults(func=cmd_disc)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    common(v, "json")
    v.add_argument("--mode", choices=("exhaustive", "montecarlo"), default="exhaustive")
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--k", default=None, help="index tuple, e.g. 1,3")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("witness", help="search for lower-bound witnesses")
    common(w, "json")
    w.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    w.add_argument("--rows", type=int, default=32, help="generator matrix size")
    w.add_argument("--r-min", type=int, default=2)
    w.add_argument("--r-max", type=int, default=8)
    w.add_argument("--J", type=int, default=4)
    w.add_argument("--scan", action="store_true", help="also scan max|D| on the grid")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--table", default=None, help="also write the growth table as CSV")
    w.add_argument("--figure", default=None, help="write a PNG plot to this path")
    w.set_defaults(func=cmd_witness)

    me = sub.add_parser("measure", help="measure of valuation events over random matrices")
    common(me, "json")
    me.add_argument("--kind", choices=("mm", "joint"), default="mm")
    me.add_argument("--k", default=None, help="index tuple, e.g. 1,3")
    me.add_argument("--shift", default=None, help="shift tuple for --kind joint")
    me.add_argument("--mode", choices=("exhaustive", "montecarlo"), default="exhaustive")
    me.add_argument("--trials", type=int, default=100_000)
    me.set_defaults(func=cmd_measure)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CostGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (DforgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
