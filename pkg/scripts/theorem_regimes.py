"""Weyl-sum decay for the built-in families across dilation laws.

Writes one CSV row per (family, rho rule, n) with the largest |S_n(h)| over
the frequency box and the verdict per series.
"""
import argparse
import math
import os

from sparsetorus import curvekit, equidist
from sparsetorus.cli import rho_for
from sparsetorus.tables import write_csv

FAMILIES = {
    "circle": ((), ["poly:1/2", "poly:1", "poly:3/2", "poly:3"]),
    "ellipse": ((0.5,), ["poly:1", "poly:3/2"]),
    "line:sqrt(2)": ((), ["poly:1", "poly:2"]),
    "line-sine:sqrt(2)": ((), ["poly:1", "poly:2"]),
    "monomial:2": ((), ["poly:2"]),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="100,300,1000,3000")
    ap.add_argument("--H", type=int, default=3)
    ap.add_argument("--out", default="results/regimes.csv")
    args = ap.parse_args(argv)
    ns = [int(float(v)) for v in args.n.split(",")]
    rows = []
    for spec, (x, rules) in FAMILIES.items():
        fam = curvekit.get_family(spec)
        for rule in rules:
            reps = [equidist.weyl_report(fam, x, rho_for(rule, n), n, args.H) for n in ns]
            verdict = equidist.equidist_verdict(reps)
            for r in reps:
                rows.append((spec, rule, r.n, r.max_abs, verdict.slope, verdict.label))
            print(f"{spec:20s} {rule:10s} slope={verdict.slope:+.3f} last={reps[-1].max_abs:.4f} {verdict.label}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(args.out, ("family", "rho_rule", "n", "max_abs", "slope", "verdict"), rows)


if __name__ == "__main__":
    main()
