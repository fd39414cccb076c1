"""Batch benchmark harness for SteinLib instances.

Example::

    stpvnd --dir steinlib/E --runs 8 --time-limit 120 --emit csv > e.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import statistics
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .exact import MAX_TERMINALS, exact_steiner
from .graph import Instance, validate_tree
from .reduce import ALL_TESTS
from .scores import GLOBAL, PER_NODE, ScoreConfig
from .solve import SolveConfig, solve
from .steinlib import OptimaTable, bundled_optima, load_optima, read_stp, write_solution
from .vnd import GRAPH_DEGREE, SOLUTION_DEGREE, VndParams

log = logging.getLogger("stpvnd")

CSV_COLUMNS = ["name", "V", "E", "T", "best", "avg", "worst", "time_s", "gap_pct", "stdev", "best_known"]
SUMMARY_COLUMNS = ["set", "instances", "optima", "time_s", "gap_pct"]
# SteinLib test-set names for instance-name prefixes that differ from the set name
SET_ALIASES = {"HC": "PUC", "CC": "PUC", "BIP": "PUC"}


@dataclass
class RunReport:
    name: str
    V: int
    E: int
    T: int
    best: int
    avg: float
    worst: int
    time_s: Optional[float]
    gap_pct: Optional[float]
    stdev: float
    best_known: Optional[int]
    costs: Tuple[int, ...] = ()

    def csv_row(self) -> List[str]:
        def fmt(x, spec):
            return "" if x is None else format(x, spec)
        return [self.name, str(self.V), str(self.E), str(self.T), str(self.best),
                fmt(self.avg, ".2f"), str(self.worst), fmt(self.time_s, ".3f"),
                fmt(self.gap_pct, ".2f"), fmt(self.stdev, ".2f"),
                "" if self.best_known is None else str(self.best_known)]


def aggregate(instance: Instance, costs: Sequence[int], times: Optional[Sequence[float]],
              optima: OptimaTable) -> RunReport:
    avg = statistics.fmean(costs)
    known = optima.get(instance.name)
    return RunReport(
        name=instance.name,
        V=instance.graph.num_nodes,
        E=instance.graph.num_edges,
        T=len(instance.terminals),
        best=min(costs),
        avg=round(avg, 2),
        worst=max(costs),
        time_s=None if times is None else round(statistics.fmean(times), 3),
        gap_pct=optima.gap(instance.name, avg),
        stdev=round(statistics.pstdev(costs), 2),
        best_known=None if known is None else known.cost,
        costs=tuple(costs),
    )


def test_set(name: str) -> str:
    m = re.match(r"[A-Za-z]+", name)
    prefix = m.group(0).upper() if m else name.upper()
    return SET_ALIASES.get(prefix, prefix)


def summarize(reports: Sequence[RunReport]) -> List[dict]:
    """Per-test-set rows: instance count, optima hit, total time, mean gap."""
    groups: Dict[str, List[RunReport]] = {}
    for r in reports:
        groups.setdefault(test_set(r.name), []).append(r)
    rows = []
    for key in sorted(groups):
        rs = groups[key]
        gaps = [r.gap_pct for r in rs if r.gap_pct is not None]
        times = [r.time_s for r in rs if r.time_s is not None]
        rows.append({
            "set": key,
            "instances": len(rs),
            "optima": sum(1 for r in rs if r.best_known is not None and r.best <= r.best_known),
            "time_s": round(sum(times), 3) if times else None,
            "gap_pct": round(statistics.fmean(gaps), 2) if gaps else None,
        })
    return rows


def run_instance(path: str, config: SolveConfig, runs: int, oracle: bool,
                 optima: OptimaTable, solution_dir: Optional[str] = None) -> RunReport:
    instance, _ = read_stp(path)
    costs, times = [], []
    best_sol = None
    for r in range(runs):
        cfg = replace(config, vnd=replace(config.vnd, seed=config.vnd.seed + r))
        if oracle and len(instance.terminals) <= MAX_TERMINALS:
            t0 = time.perf_counter()
            cost, sol = exact_steiner(instance)
            elapsed = time.perf_counter() - t0
        else:
            res = solve(instance, cfg)
            sol, cost, elapsed = res.solution, res.cost, res.time_to_best
        problem = validate_tree(sol, instance)
        if problem is not None:
            raise RuntimeError(f"{instance.name} run {r}: invalid tree ({problem})")
        costs.append(cost)
        times.append(elapsed)
        if best_sol is None or cost < best_sol.cost:
            best_sol = sol
        log.info("%s run %d: cost %d", instance.name, r, cost)
    if solution_dir:
        out = Path(solution_dir) / f"{instance.name}.sol"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(write_solution(best_sol, instance))
    return aggregate(instance, costs, None if config.deterministic else times, optima)


def run_benchmark(paths: Sequence[str], config: SolveConfig, runs: int = 8,
                  optima: Optional[OptimaTable] = None, oracle: bool = False,
                  jobs: int = 1, solution_dir: Optional[str] = None) -> Tuple[List[RunReport], List[str]]:
    """Solve every instance ``runs`` times; returns reports sorted by name plus failure messages."""
    optima = bundled_optima() if optima is None else optima
    reports, failures = [], []
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {p: pool.submit(run_instance, p, config, runs, oracle, optima, solution_dir)
                       for p in paths}
            for p, fut in futures.items():
                try:
                    reports.append(fut.result())
                except Exception as exc:
                    failures.append(f"{p}: {exc}")
    else:
        for p in paths:
            try:
                reports.append(run_instance(p, config, runs, oracle, optima, solution_dir))
            except Exception as exc:
                log.debug("%s", traceback.format_exc())
                failures.append(f"{p}: {exc}")
    reports.sort(key=lambda r: r.name)
    return reports, failures


def format_csv(reports: Sequence[RunReport], summary: Optional[Sequence[dict]] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    if summary:
        buf.write("\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in summary:
            w.writerow(["" if row[c] is None else row[c] for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def format_json(reports: Sequence[RunReport], summary: Sequence[dict]) -> str:
    rows = []
    for r in reports:
        d = asdict(r)
        d["costs"] = list(r.costs)
        rows.append(d)
    return json.dumps({"reports": rows, "summary": list(summary)}, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stpvnd", description="Reduce-and-VND Steiner tree solver for SteinLib instances.")
    src = ap.add_argument_group("instances")
    src.add_argument("--instance", action="append", default=[], help="path to an .stp file (repeatable)")
    src.add_argument("--dir", action="append", default=[], help="directory of .stp files (repeatable)")
    ap.add_argument("--runs", type=int, default=8, help="runs per instance (default: 8)")
    ap.add_argument("--seed", type=int, default=0, help="seed of the first run; run r uses seed+r")
    ap.add_argument("--time-limit", type=float, default=60.0, help="seconds per run (default: 60)")
    ap.add_argument("--bmin", type=int, default=1)
    ap.add_argument("--bmax", type=int, default=256)
    ap.add_argument("--restarts", type=int, default=5, help="score restarts per local search")
    ap.add_argument("--combinations", type=int, default=50, help="victim subsets sampled per removal sweep")
    ap.add_argument("--sd-cap", type=int, default=10, help="nearest terminals used by the special distance test")
    ap.add_argument("--deterministic", action="store_true",
                    help="run the reducer inline, one task per VND round; time columns are left empty")
    ap.add_argument("--no-reduce", action="append", default=[], choices=ALL_TESTS, metavar="TEST",
                    type=lambda s: s.strip().lower().replace("-", "_"),
                    help=f"disable a reduction test ({', '.join(ALL_TESTS)})")
    ap.add_argument("--degree-mode", choices=[SOLUTION_DEGREE, GRAPH_DEGREE], default=SOLUTION_DEGREE)
    ap.add_argument("--window-mode", choices=[PER_NODE, GLOBAL], default=PER_NODE)
    ap.add_argument("--oracle", action="store_true", help="solve exactly when |T| <= 12")
    ap.add_argument("--emit", choices=["csv", "json"], default="csv")
    ap.add_argument("--optima", help="CSV of name,cost,is_optimal (default: bundled table)")
    ap.add_argument("--jobs", type=int, default=1, help="instances solved in parallel")
    ap.add_argument("--solutions", metavar="DIR", help="write the best tree of each instance here")
    ap.add_argument("--output", "-o", help="write the report here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    paths = list(args.instance)
    for d in args.dir:
        found = sorted(str(p) for p in Path(d).glob("*.stp"))
        if not found:
            ap.error(f"no .stp files in {d}")
        paths.extend(found)
    if not paths:
        ap.error("give at least one --instance or --dir")
    if args.runs < 1:
        ap.error("--runs must be at least 1")
    try:
        config = SolveConfig(
            vnd=VndParams(b_min=args.bmin, b_max=args.bmax, max_restarts=args.restarts,
                          combination_cap=args.combinations, seed=args.seed,
                          degree_mode=args.degree_mode),
            scores=ScoreConfig(window_mode=args.window_mode),
            time_limit=args.time_limit,
            deterministic=args.deterministic,
            tests=frozenset(ALL_TESTS) - set(args.no_reduce),
            sd_cap=args.sd_cap,
        )
        optima = load_optima(Path(args.optima).read_text()) if args.optima else bundled_optima()
    except (ValueError, OSError) as exc:
        ap.error(str(exc))

    reports, failures = run_benchmark(paths, config, args.runs, optima, args.oracle,
                                      args.jobs, args.solutions)
    summary = summarize(reports)
    text = format_json(reports, summary) if args.emit == "json" else format_csv(reports, summary)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for f in failures:
        print(f"error: {f}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
