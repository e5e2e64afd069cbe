"""Fourth moment over rotations for rho = n^tau, tau in {2, 4, 6, 8}.

The fitted log-log slope shows where the 1/n^2 law sets in.
"""
import argparse
import os
from fractions import Fraction

from sparsetorus import curvekit, moments
from sparsetorus.cli import rho_for
from sparsetorus.tables import write_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--taus", default="2,4,6,8")
    ap.add_argument("--n", default="8,16,32,64")
    ap.add_argument("--out", default="results/moments.csv")
    args = ap.parse_args(argv)
    circle = curvekit.circle()
    ns = [int(v) for v in args.n.split(",")]
    rows = []
    for tau in (Fraction(v) for v in args.taus.split(",")):
        reps = [moments.fourth_moment(circle, (), rho_for(f"poly:{tau}", n), n, (1, 0)) for n in ns]
        part = moments.moment_rows(reps, float(tau))
        rows += part
        print(f"tau={float(tau):g}: slope={part[-1][3]:+.3f} estimates={[f'{r.estimate:.3g}' for r in reps]}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(args.out, moments.CSV_HEADER, rows)


if __name__ == "__main__":
    main()
