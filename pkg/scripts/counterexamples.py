"""Both Diophantine constructions side by side.

Polynomial families of finite order get rho_n = n^kappa q and keep
|S_n(h)| near 1; the circle gets rho_n = q log n and its samples collapse
into the cube of half-width 1/3 around the origin.
"""
import argparse
import os

from sparsetorus import curvekit, dioph, equidist
from sparsetorus.tables import write_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--coeffs", default="sqrt(2),sqrt(3)")
    ap.add_argument("--n-poly", default="10..40")
    ap.add_argument("--n-generic", default="4,6,8")
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    lo, hi = (int(v) for v in args.n_poly.split(".."))
    coeffs = args.coeffs.split(",")
    fam = curvekit.witness_curve(coeffs)
    rows = []
    for n in range(lo, hi + 1):
        bad = dioph.bad_dilation_poly(coeffs, len(coeffs), n)
        chk = dioph.verify_nondecay(fam, (1, 0), bad)
        rows.append((n, bad.rho_tilde, max(bad.errors), chk.abs_S, chk.max_delta, chk.delta_bound))
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "poly_counterexample.csv"), ("n", "q", "max_error", "abs_S", "max_delta", "delta_bound"), rows)
    print(f"polynomial: min |S| = {min(r[3] for r in rows):.3f} over n={lo}..{hi}")

    circle = curvekit.circle()
    grows = []
    for n in (int(v) for v in args.n_generic.split(",")):
        bad = dioph.bad_dilation_generic(circle, (), n)
        cloud = equidist.sample_measure(circle, (), bad.rho, n)
        disc = equidist.box_discrepancy(cloud, 30, periodic=True)
        grows.append((n, bad.rho_tilde, max(bad.errors), int(dioph.verify_confinement(cloud, 1 / 3)), disc))
        print(f"generic n={n}: q={bad.rho_tilde} max error={max(bad.errors):.3f} discrepancy={disc:.3f}")
    write_csv(os.path.join(args.out, "generic_counterexample.csv"), ("n", "q", "max_error", "confined", "discrepancy"), grows)


if __name__ == "__main__":
    main()
