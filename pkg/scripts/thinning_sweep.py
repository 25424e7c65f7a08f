"""Prediction quality as the validation fraction p varies.

    python scripts/thinning_sweep.py [--plan scripts/plans/sweep.plan]
"""
from _common import num, parser, pct, run


def main():
    args = parser(__doc__.splitlines()[0], "sweep.plan").parse_args()
    data = run(args).data
    preds = data["plan"]["predictors"]
    print(f"{'p':>5} " + " ".join(f"{k + ' MARE%':>10} {k + ' R':>7}" for k in preds) + "  failures")
    for rnd in data["sweep"]:
        cells = []
        for k in preds:
            rep = rnd["predictors"][k]
            cells.append(f"{pct(rep and rep['total']['mare']):>10} {num(rep and rep['r']):>7}")
        print(f"{rnd['p']:5.2f} " + " ".join(cells) + f"  {len(rnd['failures']):8d}")


if __name__ == "__main__":
    main()
