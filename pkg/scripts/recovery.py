"""Parameter recovery on complete synthetic series, MMoM vs MLE.

    python scripts/recovery.py [--plan scripts/plans/recovery.plan]
"""
from _common import parser, run


def main():
    args = parser(__doc__.splitlines()[0], "recovery.plan").parse_args()
    report = run(args)
    fits = report.data["fits"]
    print(f"{'method':6} {'<eta0>':>9} {'<eta1>':>8} {'<xi>':>7} {'<N_it>':>7} {'<F*>':>10} {'<T> s':>8}")
    for m, f in fits.items():
        if not f["count"]:
            print(f"{m:6} no successful fits")
            continue
        mean = f["mean"]
        t = report.timings["mean_fit_seconds"][m]
        print(f"{m:6} {mean['eta0']:9.3f} {mean['eta1']:8.3f} {mean['xi']:7.3f} "
              f"{mean['iterations']:7.1f} {mean['objective']:10.3g} {t:8.4f}")
        std = f["std"]
        print(f"{'  sd':6} {std['eta0']:9.3f} {std['eta1']:8.3f} {std['xi']:7.3f}")
    if report.data["failures"]:
        print(f"{len(report.data['failures'])} failed fits")


if __name__ == "__main__":
    main()
