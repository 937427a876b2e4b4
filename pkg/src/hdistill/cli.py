"""Command-line front end: code checks, oracle validation, search, sizing and curve fits.

Exit status: 0 success, 1 a check failed or a target is unreachable, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Sequence

from . import hcodes, oracle, search
from .pauli import UsageError

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


@dataclass
class Tolerances:
    """Pass/fail windows shared by CLI checks and the acceptance suite."""

    coefficient_abs: float = 0.0
    conditional_rel: float = 0.05
    table_cost_rel: float = 0.05
    slope_min: float = 12.5
    slope_max: float = 15.5
    intercept_min: float = -48.0
    intercept_max: float = -32.0
    gamma_max: float = 1.3

    def update(self, pairs: Sequence[str]) -> None:
        for pair in pairs:
            key, sep, value = pair.partition("=")
            if not sep or key not in self.__dataclass_fields__:
                raise UsageError(f"unknown tolerance {pair!r}")
            setattr(self, key, float(value))


@dataclass
class RunConfig:
    command: str
    eps0: float = 0.01
    target: float | None = None
    max_rounds: int = search.MAX_ROUNDS
    max_k: int = search.MAX_K
    max_weight: int | None = None
    dims: tuple[int, ...] = ()
    emit: str = "text"
    output_path: str | None = None
    threads: int = 1
    families: tuple[str, ...] = search.ALL_FAMILIES
    exponents: tuple[int, ...] = tuple(range(5, 41))
    eps_l: float = 1e-3
    eps_p: float = 1e-3
    n_range: tuple[int, int] = (6, 24)
    rounds: int = 2
    k: int = 2
    budget: int = oracle.DEFAULT_BUDGET
    tolerances: Tolerances = field(default_factory=Tolerances)


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_range(text: str, sep: str = "..") -> tuple[int, int]:
    lo, _, hi = text.partition(sep)
    try:
        a, b = int(lo), int(hi or lo)
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if a > b:
        raise UsageError(f"empty range {text!r}")
    return a, b


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(d) for d in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad dims {text!r}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# verify-codes ----------------------------------------------------------------

def run_verify(cfg: RunConfig) -> tuple[int, dict]:
    lo, hi = cfg.n_range
    rows = []
    for n in range(lo, hi + 1):
        if n % 2:
            continue
        row = {"n": n, "k": n - 4}
        try:
            code = hcodes.build_hcode(n)
            code.check_invariants()
            row["invariants"] = True
        except ValueError as exc:
            row["invariants"] = False
            row["error"] = str(exc)
            rows.append(row)
            continue
        row["transversal_hadamard"] = hcodes.verify_transversal_hadamard(code)
        row["distance"] = hcodes.code_distance_exhaustive(code) if n <= 10 else None
        rows.append(row)
    ok = all(r["invariants"] and r["transversal_hadamard"] and r["distance"] in (2, None) for r in rows)
    return (EXIT_OK if ok else EXIT_CHECK), {"command": "verify-codes", "ok": ok, "codes": rows}


def _verify_text(report: dict) -> str:
    lines = ["n   k   invariants  hadamard  distance"]
    for r in report["codes"]:
        dist = "-" if r.get("distance") is None else str(r["distance"])
        lines.append(f"{r['n']:<3} {r['k']:<3} {str(r['invariants']):<11} "
                     f"{str(r.get('transversal_hadamard')):<9} {dist}")
    lines.append("ok" if report["ok"] else "FAILED")
    return "\n".join(lines) + "\n"


# oracle ----------------------------------------------------------------------

def _count_rows(counts: dict) -> list[list[int]]:
    return [[l, p, c] for (l, p), c in sorted(counts.items())]


def run_oracle(cfg: RunConfig) -> tuple[int, dict]:
    grid = hcodes.build_grid_code(cfg.dims)
    bits = grid.encoded + 2 * grid.sites
    if cfg.max_weight is None:
        result = oracle.enumerate_exact(grid, workers=cfg.threads)
    else:
        result = oracle.enumerate_truncated(grid, cfg.max_weight, eps_max=max(cfg.eps_l, cfg.eps_p),
                                            budget=cfg.budget, workers=cfg.threads)
    checks = oracle.compare_with_closed_form(result)
    tol = cfg.tolerances.coefficient_abs
    failed = [c for c in checks if c.checked and abs(c.oracle - c.closed_form) > tol]
    cond = oracle.conditional_error(result, cfg.eps_l, cfg.eps_p)
    report = {
        "command": "oracle",
        "dims": list(grid.dims),
        "config_bits": bits,
        "configs": result.configs,
        "truncation_weight": result.truncation_weight,
        "tail_bound": result.tail_bound,
        "outputs_symmetric": oracle.outputs_symmetric(result),
        "event_counts": {
            "accept": _count_rows(result.accept_counts),
            "marginal_output0": _count_rows(result.marginal_counts[0]),
            "all_correct": _count_rows(result.all_correct_counts),
        },
        "marginal_poly_output0": result.marginal_error[0].to_json()["terms"],
        "conditional_error": {"eps_l": cfg.eps_l, "eps_p": cfg.eps_p, "value": cond},
        "comparison": [c.to_dict() for c in checks],
        "ok": not failed,
    }
    return (EXIT_OK if not failed else EXIT_CHECK), report


def _oracle_text(report: dict) -> str:
    lines = [f"grid {'x'.join(map(str, report['dims']))}: {report['configs']} configurations, "
             f"truncation {report['truncation_weight']}, tail bound {report['tail_bound']:.3g}"]
    lines.append("term      oracle  closed-form  status")
    for c in report["comparison"]:
        term = f"({c['term'][0]},{c['term'][1]})"
        lines.append(f"{term:<9} {c['oracle']:<7} {c['closed_form']:<12} {c['status']}")
    ce = report["conditional_error"]
    lines.append(f"conditional error at eps_l={ce['eps_l']:g}, eps_p={ce['eps_p']:g}: {ce['value']:.6g}")
    lines.append("ok" if report["ok"] else "FAILED")
    return "\n".join(lines) + "\n"


# search / fit ----------------------------------------------------------------

def _search(cfg: RunConfig) -> search.ParetoSet:
    return search.pareto_search(cfg.eps0, max_rounds=cfg.max_rounds, max_k=cfg.max_k,
                                families=cfg.families, threads=cfg.threads)


def _series_rows(pset: search.ParetoSet, exponents: Sequence[int]) -> list[dict]:
    rows = []
    for x in exponents:
        try:
            expr, ev = search.query(pset, 10.0 ** (-x))
        except search.UnreachableTarget:
            rows.append({"target_exponent": x, "reachable": False})
            continue
        rows.append({
            "target_exponent": x,
            "reachable": True,
            "achieved_neg_log10_eps": ev.neg_log10_eps,
            "eps_out": ev.eps_out,
            "cost": ev.cost,
            "accept": ev.accept,
            "protocol": str(expr),
        })
    return rows


def search_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["target_exponent", "achieved_neg_log10_eps", "cost", "protocol"])
    for r in rows:
        if r["reachable"]:
            writer.writerow([r["target_exponent"], repr(r["achieved_neg_log10_eps"]),
                             repr(r["cost"]), r["protocol"]])
        else:
            writer.writerow([r["target_exponent"], "", "", "unreachable"])
    return buf.getvalue()


def run_search(cfg: RunConfig) -> tuple[int, dict]:
    pset = _search(cfg)
    exponents = cfg.exponents
    if cfg.target is not None:
        try:
            expr, ev = search.query(pset, cfg.target)
        except search.UnreachableTarget as exc:
            return EXIT_CHECK, {"command": "search", "ok": False, "error": "unreachable",
                                "reason": str(exc), "target": cfg.target}
        row = {"target": cfg.target, "achieved_neg_log10_eps": ev.neg_log10_eps,
               "eps_out": ev.eps_out, "cost": ev.cost, "accept": ev.accept, "protocol": str(expr)}
        return EXIT_OK, {"command": "search", "ok": True, "eps0": cfg.eps0, "result": row,
                         "pareto_size": len(pset)}
    rows = _series_rows(pset, exponents)
    ok = all(r["reachable"] for r in rows)
    return (EXIT_OK if ok else EXIT_CHECK), {"command": "search", "ok": ok, "eps0": cfg.eps0,
                                             "pareto_size": len(pset), "rows": rows}


def emit_plot_data(pset: search.ParetoSet, path: str | None,
                   exponents: Sequence[int] = tuple(range(5, 41))) -> tuple[str, search.FitResult]:
    """Two-column series (log10(1/eps_out), cost) with the fitted line in a comment header."""
    if not exponents:
        raise UsageError("empty exponent range")
    fit = search.fit_cost_curve(pset, exponents)
    lines = [f"# fit: cost = {fit.slope!r} * log10(1/eps_out) + {fit.intercept!r}; gamma = {fit.gamma!r}",
             "neg_log10_eps,cost"]
    lines += [f"{x!r},{c!r}" for _, x, c in fit.points]
    text = "\n".join(lines) + "\n"
    if path:
        write_atomic(path, text)
    return text, fit


def run_fit(cfg: RunConfig) -> tuple[int, dict, str]:
    pset = _search(cfg)
    text, fit = emit_plot_data(pset, None, cfg.exponents)
    t = cfg.tolerances
    checks = {
        "slope": t.slope_min <= fit.slope <= t.slope_max,
        "intercept": t.intercept_min <= fit.intercept <= t.intercept_max,
        "gamma": fit.gamma <= t.gamma_max,
    }
    ok = all(checks.values())
    report = {"command": "fit", "ok": ok, "slope": fit.slope, "intercept": fit.intercept,
              "gamma": fit.gamma, "checks": checks,
              "points": [[x, a, c] for x, a, c in fit.points]}
    return (EXIT_OK if ok else EXIT_CHECK), report, text


# size ------------------------------------------------------------------------

def run_size(cfg: RunConfig) -> tuple[int, dict]:
    total = search.total_input_count(cfg.rounds, cfg.k)
    return EXIT_OK, {"command": "size", "ok": True, "rounds": cfg.rounds, "k": cfg.k,
                     "total_inputs": total}


# plumbing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdistill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, emits):
        p.add_argument("--emit", choices=emits, default="text")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                       help="override a pass/fail tolerance")

    p = sub.add_parser("verify-codes", help="check H-code invariants and distances")
    p.add_argument("--n", default="6..24", help="even block sizes, e.g. 6..24")
    common(p, ("text", "json"))

    p = sub.add_parser("oracle", help="enumerate error configurations and compare with closed forms")
    p.add_argument("--dims", required=True, help="6 or 6x6")
    p.add_argument("--max-weight", type=int)
    p.add_argument("--eps-l", type=float, default=1e-3)
    p.add_argument("--eps-p", type=float, default=1e-3)
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    common(p, ("text", "json"))

    for name, emits in (("search", ("text", "csv", "json")), ("fit", ("text", "csv", "json"))):
        p = sub.add_parser(name, help="Pareto search" if name == "search" else "cost-curve fit")
        p.add_argument("--eps0", type=float, default=0.01)
        if name == "search":
            p.add_argument("--target", type=float)
        p.add_argument("--max-rounds", type=int, default=search.MAX_ROUNDS)
        p.add_argument("--max-k", type=int, default=search.MAX_K)
        p.add_argument("--families", default=",".join(search.ALL_FAMILIES))
        p.add_argument("--exponents", default="5..40")
        common(p, emits)

    p = sub.add_parser("size", help="total inputs of an r-round distiller")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p, ("text", "json"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, emit=args.emit, output_path=args.output_path,
                    threads=args.threads)
    if cfg.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg.tolerances.update(args.tol)
    if args.command == "verify-codes":
        cfg.n_range = _parse_range(args.n)
    elif args.command == "oracle":
        cfg.dims = _parse_dims(args.dims)
        cfg.max_weight = args.max_weight
        cfg.eps_l, cfg.eps_p, cfg.budget = args.eps_l, args.eps_p, args.budget
    elif args.command in ("search", "fit"):
        cfg.eps0, cfg.max_rounds, cfg.max_k = args.eps0, args.max_rounds, args.max_k
        cfg.families = tuple(f for f in args.families.split(",") if f)
        lo, hi = _parse_range(args.exponents)
        cfg.exponents = tuple(range(lo, hi + 1))
        cfg.target = getattr(args, "target", None)
    elif args.command == "size":
        cfg.rounds, cfg.k = args.rounds, args.k
    return cfg


def _render(cfg: RunConfig, report: dict, extra_text: str | None = None) -> str:
    if cfg.emit == "json":
        return _dumps(report)
    if cfg.command == "verify-codes":
        return _verify_text(report)
    if cfg.command == "oracle":
        return _oracle_text(report)
    if cfg.command == "size":
        return f"{report['total_inputs']}\n"
    if cfg.command == "fit":
        return extra_text if cfg.emit == "csv" else (
            f"slope {report['slope']:.4f}\nintercept {report['intercept']:.4f}\n"
            f"gamma {report['gamma']:.4f}\n" + ("ok\n" if report["ok"] else "FAILED\n"))
    # search
    if "error" in report:
        return f"error: {report['reason']}\n"
    if "result" in report:
        r = report["result"]
        return (f"{r['protocol']}\n-log10(eps_out) {r['achieved_neg_log10_eps']:.4f}\n"
                f"cost {r['cost']:.4f}\n")
    if cfg.emit == "csv":
        return search_csv(report["rows"])
    lines = [f"{'exp':>3}  {'-log10 eps':>10}  {'cost':>9}  protocol"]
    for r in report["rows"]:
        if r["reachable"]:
            lines.append(f"{r['target_exponent']:>3}  {r['achieved_neg_log10_eps']:>10.3f}  "
                         f"{r['cost']:>9.2f}  {r['protocol']}")
        else:
            lines.append(f"{r['target_exponent']:>3}  unreachable")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a configuration; returns (exit status, emitted text)."""
    extra = None
    if cfg.command == "verify-codes":
        status, report = run_verify(cfg)
    elif cfg.command == "oracle":
        status, report = run_oracle(cfg)
    elif cfg.command == "search":
        status, report = run_search(cfg)
    elif cfg.command == "fit":
        status, report, extra = run_fit(cfg)
    elif cfg.command == "size":
        status, report = run_size(cfg)
    else:
        raise UsageError(f"unknown command {cfg.command!r}")
    text = _render(cfg, report, extra)
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    return status, text


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    emit = getattr(args, "emit", "text")
    try:
        status, text = run(config_from_args(args))
    except (UsageError, search.DomainError) as exc:
        if emit == "json":
            sys.stdout.write(_dumps({"command": args.command, "ok": False, "error": "usage",
                                     "reason": str(exc)}))
        else:
            print(f"hdistill: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.output_path:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
