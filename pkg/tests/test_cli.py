import csv
import json
import random

import pytest

from g2kit import cli
from g2kit.exterior import Form, interior
from g2kit.g2algebra import decompose_H, phi0
from g2kit.generalized import LieCoeff, PointFields
from g2kit.sampling import random_form, random_torsion


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_spin_exact(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "spin", "--backend", "exact")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    ids = {c["id"] for c in report["checks"]}
    assert {"spinor_constants", "slashed_eigenvalues", "so7_commutator"} <= ids
    assert all(c["max_residual"] == 0 for c in report["checks"])


def test_verify_all_f64_reports_only_the_yang_mills_failure(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all", "--backend", "f64", "--seed", "42")
    report = json.loads(out)
    failed = [c["id"] for c in report["checks"] if c["status"] != "pass"]
    assert code == 1 and failed == ["ym_identity"]
    for c in report["checks"]:
        if c["id"] not in ("ym_identity", "ccy_scaling"):
            assert c["max_residual"] < 1e-9


def test_verify_is_deterministic(capsys):
    a = json.loads(run(capsys, "verify", "--suite", "g2", "--seed", "5")[1])
    b = json.loads(run(capsys, "verify", "--suite", "g2", "--seed", "5")[1])
    strip = lambda r: [(c["id"], c["status"], c["max_residual"]) for c in r["checks"]]
    assert strip(a) == strip(b)


def test_verify_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--suite", "bogus"])
    assert exc.value.code == 2


def test_verify_help_lists_check_ids(capsys):
    with pytest.raises(SystemExit):
        cli.main(["verify", "--help"])
    out = capsys.readouterr().out
    for cid in ("hodge_phi_is_psi", "ym_identity", "gravitino_samples", "ccy_scaling"):
        assert cid in out


def test_decompose_phi_is_pure_singlet(capsys, tmp_path):
    path = write(tmp_path, "phi.json", phi0().to_dict())
    code, out, _ = run(capsys, "decompose", path, "--space", "3")
    d = json.loads(out)
    assert code == 0 and d["resum_exact"]
    assert Form.from_dict(d["pi1"]["form"]) == phi0()
    assert d["pi7"]["norm2"] == 0 and d["pi27"]["norm2"] == 0


def test_decompose_lambda27_input(capsys, tmp_path):
    b = interior([1, 0, 0, 0, 0, 0, 0], phi0())
    d = json.loads(run(capsys, "decompose", write(tmp_path, "b.json", b.to_dict()),
                       "--space", "2")[1])
    assert Form.from_dict(d["pi7"]["form"]) == b and d["pi14"]["norm2"] == 0


def test_decompose_random_resums(capsys, tmp_path):
    f = random_form(random.Random(3), 3)
    d = json.loads(run(capsys, "decompose", write(tmp_path, "f.json", f.to_dict()),
                       "--space", "3")[1])
    parts = [Form.from_dict(d[k]["form"]) for k in ("pi1", "pi7", "pi27")]
    assert parts[0] + parts[1] + parts[2] == f and d["resum_exact"]


def test_decompose_bad_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "decompose", str(bad), "--space", "2")[0] == 2
    path = write(tmp_path, "phi.json", phi0().to_dict())
    code, _, err = run(capsys, "decompose", path, "--space", "2")
    assert code == 2 and "grade" in err


def test_torsion_both_directions(capsys, tmp_path):
    t = random_torsion(random.Random(1))
    code, out, _ = run(capsys, "torsion", write(tmp_path, "t.json", t.to_dict()))
    d = json.loads(out)
    assert code == 0 and d["norm2"] == d["norm2_formula"]
    h = Form.from_dict(d["H"])
    code, out, _ = run(capsys, "torsion", write(tmp_path, "h.json", h.to_dict()))
    back = json.loads(out)
    assert back == decompose_H(h).to_dict() == t.to_dict()


def test_torsion_rejects_bad_tau3(capsys, tmp_path):
    bad = {"tau0": "0", "tau1": Form.zero(1).to_dict(), "tau3": phi0().to_dict()}
    code, _, err = run(capsys, "torsion", write(tmp_path, "t.json", bad))
    assert code == 2 and "27" in err


def test_spin_command(capsys, tmp_path):
    d = json.loads(run(capsys, "spin", write(tmp_path, "phi.json", phi0().to_dict()))[1])
    assert d["action_on_eta0"] == [-7] + [0] * 7
    assert d["slashed_on_eta0"] == ["-21/2"] + [0] * 7


def test_residual_command(capsys, tmp_path):
    p = PointFields.zero(LieCoeff((1, -1))).to_dict()
    code, out, _ = run(capsys, "residual", write(tmp_path, "p.json", p))
    assert code == 0 and json.loads(out) == {"sym": 0, "skew": 0, "lie": 0, "splus": 0}


def test_coupled_samples_zero(capsys):
    code, out, _ = run(capsys, "coupled", "--samples", "3", "--seed", "1", "--json")
    d = json.loads(out)
    assert code == 0 and not d["nonzero_residual"]
    assert all(v == 0 for v in d["max_residual"].values())


def test_coupled_break_bianchi_flags(capsys):
    code, out, _ = run(capsys, "coupled", "--samples", "1", "--break-bianchi")
    assert code == 0 and "nonzero residual flagged" in out


def test_coupled_rejects_zero_samples(capsys):
    assert run(capsys, "coupled", "--samples", "0")[0] == 2


def test_tower_command(capsys):
    code, out, _ = run(capsys, "tower", "--n", "7", "--r1", "14", "--depth", "4")
    assert code == 0 and json.loads(out)["ranks"] == [14, 189, 35539, 1262984989]
    code, _, err = run(capsys, "tower", "--r1", "14", "--depth", "9")
    assert code == 1 and "last safe index" in err
    assert run(capsys, "tower", "--r1", "0")[0] == 2


def test_ccy_sweep_writes_files(capsys, tmp_path):
    out_csv, out_svg = tmp_path / "t.csv", tmp_path / "p.svg"
    code, out, _ = run(capsys, "ccy", "sweep", "--case", "1", "--delta", "1",
                       "--out", str(out_csv), "--svg", str(out_svg), "--fit")
    assert code == 0
    line = out.strip().splitlines()[-1]
    fields = dict(kv.split("=") for kv in line.split())
    assert fields["case"] == "1" and 1.95 <= float(fields["slope"]) <= 2.05
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["alpha", "norm", "norm_over_alpha2"] and len(rows) == 10
    svg = out_svg.read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 9 and "stroke-dasharray" in svg


def test_ccy_sweep_json(capsys):
    code, out, _ = run(capsys, "ccy", "sweep", "--case", "3", "--m", "0", "--json")
    d = json.loads(out[:out.rindex("}") + 1])
    assert code == 0 and abs(d["slope"] - 2) < 0.05 and len(d["rows"]) == 9


def test_ccy_sweep_regime_error(capsys):
    code, _, err = run(capsys, "ccy", "sweep", "--case", "2", "--m", "-1")
    assert code == 2 and "m < -1" in err


def test_ccy_sweep_grid_error(capsys):
    code, _, err = run(capsys, "ccy", "sweep", "--case", "1", "--delta", "1", "--points", "1")
    assert code == 2 and "grid" in err


def test_threads_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("G2KIT_THREADS", "3")
    assert run(capsys, "coupled", "--samples", "2")[0] == 0
    monkeypatch.setenv("G2KIT_THREADS", "many")
    assert run(capsys, "coupled", "--samples", "2")[0] == 2
