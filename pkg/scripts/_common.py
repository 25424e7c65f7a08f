"""Helpers shared by the experiment scripts."""
import argparse
import json
from pathlib import Path

from spartan_ts.bench import BenchPlan, dumps, run_benchmark

PLANS = Path(__file__).resolve().parent / "plans"


def parser(description, default_plan):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--plan", default=str(PLANS / default_plan))
    ap.add_argument("--replicates", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--report", help="also write the JSON report here")
    return ap


def run(args):
    plan = BenchPlan.from_dict(json.loads(Path(args.plan).read_text()))
    if args.replicates is not None:
        plan.replicates = args.replicates
    if args.seed is not None:
        plan.seed = args.seed
    report = run_benchmark(plan)
    if args.report:
        Path(args.report).write_text(dumps(report))
    return report


def pct(v):
    return "   n/a" if v is None else f"{100 * v:6.2f}"


def num(v, width=7, digits=3):
    return " " * (width - 3) + "n/a" if v is None else f"{v:{width}.{digits}f}"
