"""Wall time of the distance metric and of whole fits versus series length.

    python scripts/cost_profile.py [--sizes 100 1000 10000]
"""
import argparse

from spartan_ts.bench import cost_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    print(f"{'N':>7} {'DM call us':>11} {'MMoM s':>9} {'MLE s':>9} {'it MMoM':>8} {'it MLE':>7} {'ratio':>7}")
    for r in cost_profile(args.sizes, repeats=args.repeats):
        print(f"{r['n']:7d} {1e6 * r['dm_call_seconds']:11.2f} {r['mmom_seconds']:9.4f} "
              f"{r['mle_seconds']:9.4f} {r['mmom_iterations']:8d} {r['mle_iterations']:7d} {r['ratio']:7.1f}")


if __name__ == "__main__":
    main()
