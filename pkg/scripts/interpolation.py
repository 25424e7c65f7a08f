"""SP and KWP interpolation errors per neighbour category.

    python scripts/interpolation.py [--plan scripts/plans/tables23.plan]

MRE and MARE are printed in percent.
"""
from _common import num, parser, pct, run


def table(name, rep):
    cats = rep["categories"]
    cols = list(cats) + ["total"]
    rows = {**cats, "total": rep["total"]}
    print(f"\n{name.upper()}")
    print(f"{'':6}" + "".join(f"{c:>8}" for c in cols))
    for metric, fmt in (("mae", num), ("mre", pct), ("mare", pct), ("rmse", num)):
        print(f"{metric.upper():6}" + "".join(f"{fmt(rows[c][metric]):>8}" for c in cols))
    print(f"{'count':6}" + "".join(f"{rows[c]['count']:>8}" for c in cols))
    print(f"R = {num(rep['r'])}")


def main():
    args = parser(__doc__.splitlines()[0], "tables23.plan").parse_args()
    data = run(args).data
    print(f"model {data['plan']['model']}, N={data['plan']['n']}, p={data['p']}, "
          f"{data['plan']['replicates']} partitions")
    for k, rep in data["predictors"].items():
        if rep is not None:
            table(k, rep)
    if data["failures"]:
        print(f"\n{len(data['failures'])} failed rounds: {data['failures'][0]['error']}")


if __name__ == "__main__":
    main()
