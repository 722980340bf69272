import subprocess
import sys

import numpy as np
import pytest

from g2kit import spin7, verify
from g2kit.verify import Context, run_suite


def test_every_suite_has_checks():
    for suite in verify.SUITES:
        assert verify.select(suite)
    assert len(verify.select("all")) == len(verify.REGISTRY)


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.select("bogus")


@pytest.mark.parametrize("suite", ["forms", "g2", "spin", "coupled", "ccy"])
def test_exact_suites_pass_with_zero_residual(suite):
    report = run_suite(suite, Context(trials=4))
    assert report.passed
    if suite != "ccy":
        assert all(r.residual == 0 for r in report.results)


def test_generalized_suite_fails_only_on_the_yang_mills_identity():
    report = run_suite("generalized", Context(trials=4))
    failed = [r.id for r in report.results if not r.passed]
    assert failed == ["ym_identity"]
    assert not report.passed


def test_report_shape():
    d = run_suite("forms", Context(trials=2, seed=3)).to_dict()
    assert d["suite"] == "forms" and d["seed"] == 3 and d["passed"]
    assert set(d["checks"][0]) == {"id", "anchor", "status", "max_residual", "elapsed"}


def test_check_rng_is_seeded_per_check():
    a, b = Context(seed=1), Context(seed=1)
    assert a.rng("x").random() == b.rng("x").random()
    assert a.rng("x").random() != a.rng("y").random()


def test_f64_tolerance_policy():
    ctx = Context(backend="f64", trials=2, rtol=0.0, atol=0.0)
    report = run_suite("spin", ctx)
    assert all(r.passed == (r.residual == 0) for r in report.results)


def test_convention_self_test_aborts_on_flipped_generators(monkeypatch):
    flipped = {i: np.array(-spin7._generator(i, "exact")) for i in range(1, 8)}
    monkeypatch.setattr(spin7, "_signed_perm", lambda idx: _flipped_perm(idx, flipped))
    with pytest.raises(RuntimeError, match="sign convention"):
        run_suite("spin", Context(trials=1))


def _flipped_perm(idx, gens):
    m = np.identity(8, dtype=int)
    for i in idx:
        m = m.dot(gens[i])
    perm = [int(np.nonzero(row)[0][0]) if any(row) else 0 for row in m]
    sign = [int(m[r, perm[r]]) for r in range(8)]
    return perm, sign


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "g2kit", "tower", "--r1", "14"],
                         capture_output=True, text=True, check=True)
    assert '"ranks"' in out.stdout and "189" in out.stdout
