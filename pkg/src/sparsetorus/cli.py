"""Command line experiment runner.

Every command writes plot-ready CSV files, a ``summary.json`` validated against
the bundled schema and a ``metadata.json`` holding timestamps.  Options can
come from an INI file (one section per command, keys named like the long
flags) and flags given on the command line take precedence.

Exit codes: 0 success, 2 invalid configuration, 3 computation failure.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

import mpmath
import numpy as np

from . import curvekit, dioph, equidist, moments, sublevel, vdc
from .constants import Real
from .phase import Dilation, PrecisionError
from .tables import write_csv

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ parsing


def parse_n_list(text: str) -> list:
    """'1e3,1e4', '10..40' or a mix; the result must be strictly increasing."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out += list(range(_as_int(lo), _as_int(hi) + 1))
        else:
            out.append(_as_int(part))
    if not out:
        raise ConfigError("empty n list")
    if any(b <= a for a, b in zip(out[:-1], out[1:])):
        raise ConfigError("n list must be strictly increasing")
    if out[0] < 1:
        raise ConfigError("n values must be positive")
    return out


def _as_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ConfigError(f"{s!r} is not an integer")
    return int(v)


def _floor_power(base: int, c: Fraction) -> int:
    """floor(base^c) for rational c >= 0, in exact integer arithmetic."""
    p, q = c.numerator, c.denominator
    target = base**p
    with mpmath.workprec(64 + target.bit_length() // q):
        r = int(mpmath.floor(mpmath.mpf(target) ** (mpmath.mpf(1) / q)))
    while (r + 1) ** q <= target:
        r += 1
    while r**q > target:
        r -= 1
    return r


def rho_for(rule: str, n: int, index: int = 0) -> Dilation:
    """Dilation for one n under a rho rule."""
    kind, _, arg = rule.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "poly":
            c = Fraction(arg)
            if c < 0:
                raise ConfigError("poly exponent must be >= 0")
            return Dilation.exact(_floor_power(n, c))
        if kind == "exp2":
            c = Fraction(arg)
            return Dilation.exact(_floor_power(2, c * n) if (c * n).denominator > 1 else 2 ** int(c * n))
        if kind == "exact":
            vals = [int(v) for v in arg.replace(";", " ").split()]
            return Dilation.exact(vals[index])
        if kind == "real":
            return Dilation.machine(float(arg))
    except (ValueError, IndexError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rho rule {rule!r}: {exc}") from exc
    raise ConfigError(f"unknown rho rule {rule!r}")


def parse_vector(text, typ=float) -> tuple:
    if text is None or str(text).strip() == "":
        return ()
    return tuple(typ(v) for v in str(text).replace(";", ",").split(","))


def family_from(spec: str):
    try:
        return curvekit.get_family(spec)
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def field_from(spec: str) -> sublevel.Field:
    """sine | linear | quadratic | pairing:<family>:<h1;h2..>:<j>"""
    name, _, rest = spec.partition(":")
    if name == "sine":
        return sublevel.Field(lambda x, t: np.sin(2 * np.pi * (t + (x[0] if x else 0.0))), 1, "sine")
    if name == "linear":
        return sublevel.Field(lambda x, t: t - x[0], 1, "linear")
    if name == "quadratic":
        return sublevel.Field(lambda x, t: (t - 0.5) ** 2 - x[0], 1, "quadratic")
    if name == "pairing":
        fam, h, j = rest.rsplit(":", 2)
        return sublevel.pairing_field(family_from(fam), parse_vector(h, int), int(j))
    raise ConfigError(f"unknown field {spec!r}")


# ------------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    command: str
    family: str = "circle"
    n: list = field(default_factory=list)
    rho_rule: str = "poly:1.5"
    H: int = 5
    omega: Optional[float] = None
    draws: int = 256
    seed: int = 0
    out: str = "out"
    prec_cap: int = 4096
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.n and any(b <= a for a, b in zip(self.n[:-1], self.n[1:])):
            raise ConfigError("n list must be strictly increasing")
        if self.H < 1:
            raise ConfigError("H must be >= 1")
        if self.command == "rotations" and self.seed is None:
            raise ConfigError("rotations need a seed")
        return self

    def digest(self) -> str:
        blob = json.dumps({k: v for k, v in asdict(self).items() if k != "out"}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


COMMON = ("family", "n", "rho_rule", "H", "omega", "draws", "seed", "out", "prec_cap")


def _read_ini(path: str, section: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config {path!r}")
    out = {}
    for sec in ("common", section):
        if cp.has_section(sec):
            out.update({k.replace("-", "_"): v for k, v in cp.items(sec)})
    return out


def build_config(ns: argparse.Namespace) -> ExperimentConfig:
    command = ns.command if ns.command != "bad-dilation" else f"bad-dilation-{ns.mode}"
    vals = _read_ini(ns.config, command) if ns.config else {}
    for k, v in vars(ns).items():
        if k in ("command", "config", "mode", "func") or v is None:
            continue
        vals[k] = v
    cfg = ExperimentConfig(command)
    try:
        for k, v in vals.items():
            if k == "n":
                cfg.n = parse_n_list(v) if not isinstance(v, list) else v
            elif k in ("H", "draws", "seed", "prec_cap"):
                setattr(cfg, k, int(v))
            elif k == "omega":
                cfg.omega = float(v)
            elif k in COMMON:
                setattr(cfg, k, str(v))
            else:
                cfg.options[k] = v
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def opt(cfg: ExperimentConfig, key: str, default, typ=str):
    v = cfg.options.get(key, default)
    if v is None:
        return None
    try:
        if typ is bool:
            return v if isinstance(v, bool) else str(v).strip().lower() in ("1", "true", "yes", "on")
        return typ(v)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {v!r}") from exc


def need_n(cfg):
    if not cfg.n:
        raise ConfigError("empty n list")
    return cfg.n


# ------------------------------------------------------------------ output


def load_schema() -> dict:
    return json.loads(resources.files("sparsetorus").joinpath("summary.schema.json").read_text())


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def write_summary(cfg: ExperimentConfig, metrics: dict, verdicts: dict, argv=None):
    import jsonschema

    summary = {"command": cfg.command, "inputs_hash": cfg.digest(), "metrics": _clean(metrics), "verdicts": _clean(verdicts)}
    jsonschema.validate(summary, load_schema())
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    meta = {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "argv": list(argv or sys.argv), "config": _clean(asdict(cfg))}
    with open(os.path.join(cfg.out, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return summary


def _csv(cfg, name, header, rows):
    os.makedirs(cfg.out, exist_ok=True)
    write_csv(os.path.join(cfg.out, name), header, rows)


# ---------------------------------------------------------------- commands


def _dilations(cfg, fam, x):
    if cfg.rho_rule.strip().lower() == "constructed":
        return [dioph.bad_dilation_generic(fam, x, n).rho for n in cfg.n]
    return [rho_for(cfg.rho_rule, n, i) for i, n in enumerate(cfg.n)]


def cmd_weyl(cfg):
    fam = family_from(cfg.family)
    x = parse_vector(opt(cfg, "x", ""))
    need_n(cfg)
    R = opt(cfg, "R", 32, int)
    reports, discs, rows = [], [], []
    for n, rho in zip(cfg.n, _dilations(cfg, fam, x)):
        cloud = equidist.sample_measure(fam, x, rho, n, cfg.omega)
        rep = equidist.weyl_report(fam, x, rho, n, cfg.H, cfg.omega, cloud=cloud)
        disc = equidist.box_discrepancy(cloud, R)
        reports.append(rep)
        discs.append(disc)
        rows += equidist.report_rows(rep, disc)
    _csv(cfg, "weyl.csv", equidist.CSV_HEADER, rows)
    metrics = {"max_abs": {str(r.n): r.max_abs for r in reports}, "discrepancy": {str(n): d for n, d in zip(cfg.n, discs)}}
    verdicts = {}
    if len(reports) >= equidist.VerdictRule().min_reports:
        v = equidist.equidist_verdict(reports)
        metrics["slope"] = v.slope
        verdicts["equidistribution"] = v.label
    else:
        verdicts["equidistribution"] = "inconclusive"
    return metrics, verdicts


def cmd_discrepancy(cfg):
    fam = family_from(cfg.family)
    x = parse_vector(opt(cfg, "x", ""))
    need_n(cfg)
    R = opt(cfg, "R", 32, int)
    periodic = opt(cfg, "periodic", False, bool)
    rows, metrics = [], {}
    for n, rho in zip(cfg.n, _dilations(cfg, fam, x)):
        cloud = equidist.sample_measure(fam, x, rho, n, cfg.omega)
        d = equidist.box_discrepancy(cloud, R, periodic=periodic)
        rows.append((n, rho.magnitude_bits, R, int(periodic), d))
        metrics[str(n)] = d
    _csv(cfg, "discrepancy.csv", ("n", "rho_bits", "R", "periodic", "discrepancy"), rows)
    return {"discrepancy": metrics}, {}


def cmd_rnd(cfg):
    fam = family_from(cfg.family)
    jmax = opt(cfg, "jmax", curvekit.J_MAX_DEFAULT, int)
    rep = curvekit.rnd_order(fam, cfg.H, jmax)
    row = (cfg.family, cfg.H, rep.label, "" if rep.kappa_next is None else rep.kappa_next, rep.witness_h or "", int(rep.numerical), int(rep.unstable))
    _csv(cfg, "rnd.csv", ("family", "H", "kappa", "kappa_next_H", "witness_h", "numerical", "unstable"), [row])
    metrics = {"kappa": rep.label, "kappa_next_H": "" if rep.kappa_next is None else rep.kappa_next, "witness_h": list(rep.witness_h or ())}
    return metrics, {"order": rep.label, "stable_in_H": "no" if rep.unstable else "yes"}


def cmd_sublevel(cfg):
    F = field_from(opt(cfg, "field", "sine"))
    x = parse_vector(opt(cfg, "x", "0"))
    deltas = parse_vector(opt(cfg, "delta", "0.5"))
    grid = opt(cfg, "grid", sublevel.GRID_DEFAULT, int)
    profiles = [sublevel.sublevel_intervals(F, x, d, grid) for d in deltas]
    _csv(cfg, "sublevel.csv", sublevel.CSV_HEADER, sublevel.profile_rows(x, profiles))
    metrics = {
        "profiles": [
            {"delta": p.delta, "intervals": [list(iv) for iv in p.intervals], "complement_measure": p.complement_measure, "component_count": p.component_count}
            for p in profiles
        ]
    }
    return metrics, {"tangency": "flagged" if any(p.tangency for p in profiles) else "none"}


def cmd_alpha(cfg):
    F = field_from(opt(cfg, "field", "sine"))
    k = opt(cfg, "x_points", 8, int)
    x_grid = [(i / k,) for i in range(k)]
    lo, hi = opt(cfg, "eps_min", 1e-11, float), opt(cfg, "eps_max", 1e-1, float)
    count = opt(cfg, "eps_count", 11, int)
    eps = np.logspace(math.log10(lo), math.log10(hi), count)
    try:
        fit = sublevel.alpha_fit(F, x_grid, eps)
    except sublevel.AlphaFitError as exc:
        raise ComputeError(str(exc)) from exc
    rows = [(x, d, cnt, c) for x, e, d, c, cnt in fit.data]
    _csv(cfg, "alpha.csv", sublevel.CSV_HEADER, rows)
    return {"alpha": fit.alpha, "C": fit.C, "max_component_count": fit.max_component_count, "worst_ratio": fit.worst_ratio}, {"alpha_found": "yes"}


def cmd_vdc(cfg):
    ls = parse_vector(opt(cfg, "l", "2,3,4,5"), int)
    n = opt(cfg, "n_scale", 1000.0, float)
    delta = opt(cfg, "delta", 1 / math.log(n), float)
    eta = opt(cfg, "eta", 1 / math.log(n), float)
    alpha = opt(cfg, "alpha", 1.0, float)
    metrics = {}
    for l in ls:
        try:
            rep = vdc.schedule_sweep(l, delta, eta, alpha, n=n)
        except vdc.ScheduleViolation as exc:
            raise ComputeError(str(exc)) from exc
        _csv(cfg, f"vdc_l{l}.csv", vdc.CSV_HEADER, vdc.sweep_rows(rep))
        metrics[f"l{l}"] = {"max_T1": rep.max_T1, "max_T2": rep.max_T2, "T1_uniform": rep.T1_uniform, "T2_uniform": rep.T2_uniform, "nu_uniform": rep.nu_uniform}
    return metrics, {"uniform_bounds": "hold"}


def cmd_moment(cfg):
    fam = family_from(cfg.family)
    x = parse_vector(opt(cfg, "x", ""))
    h = parse_vector(opt(cfg, "h", "1,0"), int)
    tau = opt(cfg, "tau", 6.0, float)
    method = opt(cfg, "method", "auto")
    need_n(cfg)
    reps = []
    for n in cfg.n:
        rho = rho_for(f"poly:{Fraction(tau).limit_denominator(1000)}", n)
        reps.append(moments.fourth_moment(fam, x, rho, n, h, method=method))
    rows = moments.moment_rows(reps, tau)
    _csv(cfg, "moments.csv", moments.CSV_HEADER, rows)
    slope = rows[-1][3]
    verdict = "n^-2 regime" if slope != "" and slope <= -1.5 else "not established"
    return {"estimate": {str(r.n): r.estimate for r in reps}, "method": {str(r.n): r.method for r in reps}, "slope": slope}, {"decay": verdict}


def cmd_bad_poly(cfg):
    need_n(cfg)
    coeffs = opt(cfg, "coeffs", None)
    if coeffs:
        coeffs = [c.strip() for c in coeffs.split(",")]
        kappa = opt(cfg, "kappa", len(coeffs), int)
        fam = curvekit.witness_curve(coeffs)
        h = (1, 0)
    else:
        fam = family_from(cfg.family)
        kappa, h, coeffs = dioph.poly_witness(fam, cfg.H)
    c0 = opt(cfg, "c0", 0.5, float)
    rows, certs, ok = [], [], True
    for n in cfg.n:
        bad = dioph.bad_dilation_poly(coeffs, kappa, n)
        chk = dioph.verify_nondecay(fam, h, bad, c0)
        ok &= chk.passed
        rows.append((n, bad.rho_tilde, bad.rho.integer, max(bad.errors), chk.abs_S, chk.max_delta, int(chk.passed)))
        certs.append(bad.certificate_json())
    _csv(cfg, "bad_poly.csv", ("n", "rho_tilde", "rho", "max_error", "abs_S", "max_delta", "pass"), rows)
    with open(os.path.join(cfg.out, "certificates.jsonl"), "w") as fh:
        fh.write("\n".join(certs) + "\n")
    return {"kappa": kappa, "witness_h": list(h), "min_abs_S": min(r[4] for r in rows)}, {"nondecay": "pass" if ok else "fail"}


def cmd_bad_generic(cfg):
    need_n(cfg)
    fam = family_from(cfg.family)
    x = parse_vector(opt(cfg, "x", ""))
    R = opt(cfg, "R", 30, int)
    rows, certs, ok = [], [], True
    for n in cfg.n:
        bad = dioph.bad_dilation_generic(fam, x, n)
        cloud = equidist.sample_measure(fam, x, bad.rho, n)
        conf = dioph.verify_confinement(cloud, 1 / 3)
        disc = equidist.box_discrepancy(cloud, R, periodic=True)
        ok &= conf
        rows.append((n, bad.rho_tilde, float(bad.rho), max(bad.errors), int(conf), disc, "" if bad.soft_bound_ok is None else int(bad.soft_bound_ok)))
        certs.append(bad.certificate_json())
    _csv(cfg, "bad_generic.csv", ("n", "rho_tilde", "rho", "max_error", "confined", "discrepancy", "soft_bound"), rows)
    with open(os.path.join(cfg.out, "certificates.jsonl"), "w") as fh:
        fh.write("\n".join(certs) + "\n")
    return {"min_discrepancy": min(r[5] for r in rows)}, {"confinement": "pass" if ok else "fail"}


def cmd_rotations(cfg):
    fam = family_from(cfg.family)
    x = parse_vector(opt(cfg, "x", ""))
    h = parse_vector(opt(cfg, "h", "1,0"), int)
    threshold = opt(cfg, "threshold", 0.2, float)
    need_n(cfg)
    rng = np.random.default_rng(cfg.seed)
    omegas = rng.random(cfg.draws)
    rows, frac = [], {}
    for i, n in enumerate(cfg.n):
        rho = rho_for(cfg.rho_rule, n, i)
        vals = [abs(equidist.weyl_sum(fam, x, rho, n, h, float(w))) for w in omegas]
        rows += [(n, j, float(w), v) for j, (w, v) in enumerate(zip(omegas, vals))]
        frac[str(n)] = float(np.mean(np.array(vals) <= threshold))
    _csv(cfg, "rotations.csv", ("n", "draw", "omega", "abs_S"), rows)
    last = frac[str(cfg.n[-1])]
    return {"fraction_below": frac, "threshold": threshold}, {"generic_omega": "pass" if last >= 0.95 else "fail"}


class ComputeError(RuntimeError):
    pass


COMMANDS = {
    "weyl": cmd_weyl,
    "discrepancy": cmd_discrepancy,
    "rnd-order": cmd_rnd,
    "sublevel": cmd_sublevel,
    "alpha-fit": cmd_alpha,
    "vdc-sweep": cmd_vdc,
    "fourth-moment": cmd_moment,
    "bad-dilation-poly": cmd_bad_poly,
    "bad-dilation-generic": cmd_bad_generic,
    "rotations": cmd_rotations,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; section named after the command")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--family", help="circle, ellipse, monomial:K, line:ALPHA, line-sine:ALPHA, witness:A,B, file:PATH")
    common.add_argument("--n", help="n list, e.g. 1e3,1e4 or 10..40")
    common.add_argument("--rho-rule", dest="rho_rule", help="poly:C, exp2:C, exact:V1;V2, real:V or constructed")
    common.add_argument("--H", type=int, help="frequency box")
    common.add_argument("--omega", type=float, help="fixed rotation")
    common.add_argument("--seed", type=int)
    common.add_argument("--x", help="curve parameter x, comma separated")

    p = argparse.ArgumentParser(prog="sparsetorus", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("weyl", parents=[common], help="Weyl sums over a frequency box")
    s.add_argument("--R", type=int, help="discrepancy grid resolution")
    s = sub.add_parser("discrepancy", parents=[common], help="box discrepancy of sample clouds")
    s.add_argument("--R", type=int)
    s.add_argument("--periodic", action="store_const", const=True)
    s = sub.add_parser("rnd-order", parents=[common], help="estimate the RND order")
    s.add_argument("--jmax", type=int)
    s = sub.add_parser("sublevel", parents=[common], help="super-level set profile")
    s.add_argument("--field", help="sine, linear, quadratic or pairing:FAMILY:H:J")
    s.add_argument("--delta", help="comma separated thresholds")
    s.add_argument("--grid", type=int)
    s = sub.add_parser("alpha-fit", parents=[common], help="fit the sub-level exponent alpha")
    s.add_argument("--field")
    s.add_argument("--x-points", dest="x_points", type=int)
    s.add_argument("--eps-min", dest="eps_min", type=float)
    s.add_argument("--eps-max", dest="eps_max", type=float)
    s.add_argument("--eps-count", dest="eps_count", type=int)
    s = sub.add_parser("vdc-sweep", parents=[common], help="exponent schedule sweep")
    s.add_argument("--l", help="comma separated l values")
    s.add_argument("--n-scale", dest="n_scale", type=float, help="n used for delta = eta = 1/log n")
    s.add_argument("--delta", type=float)
    s.add_argument("--eta", type=float)
    s.add_argument("--alpha", type=float)
    s = sub.add_parser("fourth-moment", parents=[common], help="fourth moment over rotations")
    s.add_argument("--tau", type=float)
    s.add_argument("--h")
    s.add_argument("--method", choices=("auto", "quadrature", "expansion"))
    s = sub.add_parser("bad-dilation", help="counterexample dilations")
    modes = s.add_subparsers(dest="mode", required=True)
    m = modes.add_parser("poly", parents=[common])
    m.add_argument("--coeffs", help="a_kappa..a_1, e.g. sqrt(2),sqrt(3)")
    m.add_argument("--kappa", type=int)
    m.add_argument("--c0", type=float)
    m = modes.add_parser("generic", parents=[common])
    m.add_argument("--R", type=int)
    s = sub.add_parser("rotations", parents=[common], help="Monte-Carlo over rotations omega")
    s.add_argument("--draws", type=int)
    s.add_argument("--h")
    s.add_argument("--threshold", type=float)
    return p


def run(cfg: ExperimentConfig, argv=None) -> int:
    """Execute one validated configuration and write its artifacts."""
    try:
        cfg.validate()
        cfg.out = cfg.out or "out"
        if cfg.command not in COMMANDS:
            raise ConfigError(f"unknown command {cfg.command!r}")
        metrics, verdicts = COMMANDS[cfg.command](cfg)
        write_summary(cfg, metrics, verdicts, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComputeError, PrecisionError, dioph.ScanBudgetError, moments.BudgetError, ArithmeticError, RuntimeError) as exc:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "error.json"), "w") as fh:
            json.dump({"error": str(exc), "type": type(exc).__name__, "command": cfg.command}, fh, indent=2)
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for k, v in verdicts.items():
        print(f"{k}: {v}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        cfg = build_config(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, ["sparsetorus"] + argv)


if __name__ == "__main__":
    sys.exit(main())
