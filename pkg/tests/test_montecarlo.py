import numpy as np
import pytest

from signfv import montecarlo as mc
from signfv.bounds import wmv_error_bound


def test_verdict_rule():
    assert mc.verdict(0.30, 0.01, 0.2) == mc.VIOLATED
    assert mc.verdict(0.21, 0.02, 0.2) == mc.HOLDS
    assert mc.verdict(0.5, 0.0, 1.0) == mc.VACUOUS
    assert mc.verdict(0.5, 0.0, 1.3) == mc.VACUOUS


def test_known_configs():
    checks = mc.verify_wmv_bound(20_000, configs=[[0.1, 0.1, 0.1], [0.3]], seed=4)
    assert checks[0].exact == pytest.approx(0.028, abs=1e-15)
    assert checks[0].bound == pytest.approx(0.2676, abs=1e-4)
    assert checks[1].exact == pytest.approx(0.3, abs=1e-15)
    assert checks[1].bound == pytest.approx(0.919, abs=1e-3)
    assert all(c.verdict == mc.HOLDS and c.exact_agrees for c in checks)


def test_minimum_trials():
    with pytest.raises(ValueError):
        mc.verify_wmv_bound(1000, count=1)


def test_sample_configs_ranges():
    cfgs = mc.sample_configs(200, 1)
    assert {c.size for c in cfgs} <= set(range(2, 16))
    assert all(np.all((c > 0.01) & (c < 0.49)) for c in cfgs)


def test_zero_perturbation_reproduces_perfect_weights():
    a = mc.verify_wmv_bound(10_000, count=5, seed=2)
    b = mc.verify_imperfect_bound(10_000, 0.0, 0.0, count=5, seed=2)
    assert [c.errors for c in a] == [c.errors for c in b]


def test_large_delta_max_weakens_bound():
    checks = mc.verify_imperfect_bound(10_000, 0.0, 10.0, count=5, seed=2)
    for c in checks:
        assert c.bound > wmv_error_bound(c.config["p"])
        assert c.passed


def test_imperfect_m15_band():
    rng = np.random.default_rng(0)
    p = rng.uniform(0.05, 0.3, 15)
    checks = mc.verify_imperfect_bound(100_000, 0.2, 0.2, configs=[p], seed=7)
    assert checks[0].verdict == mc.HOLDS


def test_corollary1_report():
    out = mc.verify_corollary1(samples=200_000, seed=3)
    assert [c.a for c in out] == [0.1, 0.25, 0.5]
    assert out[2].closed_form == 0.25
    assert all(c.agrees for c in out)


def test_lemma2_checks_and_serialization():
    checks = mc.verify_lemma2(batches=(1, 16), sigmas=(0.5, 1.0), trials=20_000, seed=1)
    assert len(checks) == 4
    assert all(c.passed for c in checks)
    assert checks[1].verdict == mc.VACUOUS  # B = 1, sigma = 1 saturates
    text = mc.format_table(checks, "t")
    assert "0 violated" in text
    assert '"lemma2"' in mc.to_json(lemma2=checks)
