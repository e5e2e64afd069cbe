import json

import jsonschema
import pytest

from sparsetorus import cli
from sparsetorus.phase import Dilation


def run(args, out):
    return cli.main(args + ["--out", str(out)])


def test_parse_n_list():
    assert cli.parse_n_list("1e3,1e4") == [1000, 10000]
    assert cli.parse_n_list("10..13") == [10, 11, 12, 13]
    for bad in ("", "5,5", "10,3", "2.5"):
        with pytest.raises(cli.ConfigError):
            cli.parse_n_list(bad)


def test_rho_rules():
    assert cli.rho_for("poly:3/2", 100).integer == 1000
    assert cli.rho_for("poly:1.5", 10**5).integer == 31622776
    assert cli.rho_for("poly:1/3", 10**30 - 1).integer == 10**10 - 1
    assert cli.rho_for("exp2:1/2", 200).integer == 2**100
    assert cli.rho_for("exp2:1/2", 5).integer == 5  # floor(2^2.5)
    assert cli.rho_for("exact:7;9", 3, 1).integer == 9
    assert cli.rho_for("real:2.5", 1) == Dilation.machine(2.5)
    with pytest.raises(cli.ConfigError):
        cli.rho_for("weird:1", 3)


def test_empty_n_list_exit_2(outdir, capsys):
    assert run(["weyl", "--n", ""], outdir) == 2
    assert run(["weyl", "--n", "5,4"], outdir) == 2
    assert run(["weyl", "--family", "nope", "--n", "5,6,7"], outdir) == 2
    assert run(["frobnicate"], outdir) == 2


def test_compute_failure_exit_3(outdir):
    code = run(["fourth-moment", "--n", "8", "--tau", "12", "--method", "quadrature"], outdir)
    assert code == 3
    err = json.loads((outdir / "error.json").read_text())
    assert err["type"] == "BudgetError"


def test_weyl_outputs_and_schema(outdir):
    assert run(["weyl", "--family", "monomial:2", "--rho-rule", "poly:2", "--n", "10,20,40", "--H", "2"], outdir) == 0
    summary = json.loads((outdir / "summary.json").read_text())
    jsonschema.validate(summary, cli.load_schema())
    assert summary["verdicts"]["equidistribution"] == "non-equidistributing"
    header = (outdir / "weyl.csv").read_text().splitlines()[0]
    assert header == "n,rho_bits,h,abs_S,discrepancy"
    assert (outdir / "metadata.json").exists()


def test_byte_identical_reruns(tmp_path):
    cmds = [
        ["weyl", "--family", "circle", "--rho-rule", "poly:1.5", "--n", "50,100,200", "--H", "2"],
        ["rotations", "--n", "30", "--rho-rule", "exp2:1/2", "--draws", "8", "--seed", "3"],
        ["bad-dilation", "poly", "--family", "monomial:2", "--n", "10..12"],
        ["vdc-sweep", "--l", "2,3"],
    ]
    for i, cmd in enumerate(cmds):
        a, b = tmp_path / f"a{i}", tmp_path / f"b{i}"
        assert run(cmd, a) == 0 and run(cmd, b) == 0
        for f in sorted(a.glob("*.csv")) + [a / "summary.json"]:
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_config_file_and_flag_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[weyl]\nfamily = monomial:2\nrho_rule = poly:2\nn = 10,20,30\nH = 1\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["weyl", "--config", str(ini)], a) == 0
    s = json.loads((a / "summary.json").read_text())
    assert set(s["metrics"]["max_abs"]) == {"10", "20", "30"}
    assert run(["weyl", "--config", str(ini), "--n", "11,21,31"], b) == 0
    s = json.loads((b / "summary.json").read_text())
    assert set(s["metrics"]["max_abs"]) == {"11", "21", "31"}
    assert run(["weyl", "--config", str(tmp_path / "missing.ini")], b) == 2


def test_bad_dilation_poly_example(outdir):
    assert run(["bad-dilation", "poly", "--family", "monomial:2", "--n", "10..40"], outdir) == 0
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["verdicts"]["nondecay"] == "pass"
    certs = (outdir / "certificates.jsonl").read_text().splitlines()
    assert len(certs) == 31 and all(json.loads(c)["bound_met"] for c in certs)


@pytest.mark.parametrize(
    "cmd",
    [
        ["discrepancy", "--n", "30,60", "--R", "8", "--periodic"],
        ["rnd-order", "--family", "line:sqrt(3)"],
        ["sublevel", "--field", "sine", "--delta", "0.25,0.5"],
        ["sublevel", "--field", "pairing:ellipse:1;1:1", "--x", "0.5", "--delta", "1"],
        ["alpha-fit", "--field", "linear", "--eps-count", "6"],
        ["fourth-moment", "--n", "4,8", "--tau", "6"],
        ["bad-dilation", "generic", "--family", "circle", "--n", "4"],
    ],
)
def test_commands_run(cmd, outdir):
    assert run(cmd, outdir) == 0
    summary = json.loads((outdir / "summary.json").read_text())
    jsonschema.validate(summary, cli.load_schema())
    assert list(outdir.glob("*.csv"))


def test_run_with_dataclass_config(tmp_path):
    cfg = cli.ExperimentConfig("discrepancy", family="identity", n=[10, 20], rho_rule="poly:1", out=str(tmp_path), options={"R": "10"})
    assert cli.run(cfg) == 0
    assert (tmp_path / "discrepancy.csv").read_text().splitlines()[1].startswith("10,")
    assert cli.run(cli.ExperimentConfig("weyl", n=[5, 3], out=str(tmp_path))) == 2
    assert cli.run(cli.ExperimentConfig("nonsense", out=str(tmp_path))) == 2
