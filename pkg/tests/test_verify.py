import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from khessian import verify
from khessian.exceptions import ConfigError
from khessian.funcspace import FunctionSpec, RadialPoly, random_admissible
from khessian.quadrature import Grid, RadialGauss
from khessian.verify import (
    SUITE_NAMES,
    SuiteConfig,
    load_configs,
    newton_divergence,
    poincare_chain,
    random_polynomial_function,
    replay_case,
    run_case,
    run_suite,
)


# --- configuration --------------------------------------------------------

def test_config_defaults():
    cfg = SuiteConfig(suite="garding", n=3, k=2)
    assert cfg.samples == 200
    assert cfg.quadrature == RadialGauss(64)
    assert SuiteConfig(suite="poincare_real", n=2, k=1).space == "real"


@pytest.mark.parametrize("fields,name", [
    ({"suite": "hoelder", "n": 2, "k": 3}, "k"),
    ({"suite": "hoelder", "n": 0, "k": 1}, "n"),
    ({"suite": "hoelder", "n": 2, "k": 2, "m": 2}, "m"),
    ({"suite": "hoelder", "n": 2, "k": 2, "samples": 0}, "samples"),
    ({"suite": "hoelder", "n": 2, "k": 2, "richness": "wild"}, "richness"),
    ({"suite": "hoelder", "n": 2, "k": 2, "colour": "red"}, "colour"),
    ({"suite": "nope", "n": 2, "k": 2}, "suite"),
    ({"suite": "hoelder", "n": 2}, "k"),
    ({"suite": "divergence", "n": 3, "k": 2, "degree": 5}, "degree"),
    ({"suite": "hoelder", "n": 2, "k": 2, "quadrature": {"kind": "simpson"}}, "quadrature"),
])
def test_config_errors_name_field(fields, name):
    with pytest.raises(ConfigError, match=f"^{name}"):
        SuiteConfig.from_dict(fields)


def test_load_configs_forms():
    one = {"suite": "hoelder", "n": 1, "k": 1}
    assert len(load_configs(one)) == 1
    assert len(load_configs([one, one])) == 2
    assert len(load_configs({"suites": [one]})) == 1
    cfg = load_configs({**one, "quadrature": {"kind": "grid", "resolution": 20}})[0]
    assert cfg.quadrature == Grid(20)
    assert SuiteConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        load_configs([])


# --- every suite passes with its equality cases ----------------------------

SMALL = [
    ("hoelder", 2, 2, {}),
    ("hoelder", 2, 2, {"space": "real", "richness": "perturbed"}),
    ("convexity", 3, 2, {"m": 1}),
    ("cauchy_schwarz", 2, 2, {}),
    ("cauchy_schwarz", 3, 3, {"space": "real"}),
    ("poincare_complex", 2, 2, {"m": 1}),
    ("poincare_real", 3, 2, {"m": 1}),
    ("divergence", 3, 3, {"degree": 4}),
    ("divergence", 3, 2, {"degree": 3}),
    ("symmetry", 2, 2, {"richness": "perturbed"}),
    ("symmetry", 2, 2, {"space": "real", "quadrature": Grid(32)}),
    ("garding", 4, 3, {}),
]


@pytest.mark.parametrize("suite,n,k,extra", SMALL)
def test_suites_pass(suite, n, k, extra):
    report = run_suite(SuiteConfig(suite=suite, n=n, k=k, samples=12, **extra))
    assert report.cases == 12
    assert report.violations == 0 and report.aborted == 0
    assert report.equality and report.equality_failures == 0, report.equality
    assert report.passed
    for e in report.equality:
        assert abs(e["margin"]) <= e["tolerance"]


def test_all_suites_registered():
    assert set(SUITE_NAMES) == set(verify.SUITES)


# --- determinism and replay ------------------------------------------------

@pytest.mark.parametrize("suite", ["hoelder", "garding", "divergence"])
def test_determinism_and_jobs(suite):
    cfg = SuiteConfig(suite=suite, n=3, k=2, samples=8, seed=11, richness="radial")
    a, b = run_suite(cfg), run_suite(cfg)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    c = run_suite(cfg, jobs=2)
    assert c.to_json() == a.to_json() and c.to_csv() == a.to_csv()


def test_seed_changes_cases():
    a = run_suite(SuiteConfig(suite="hoelder", n=2, k=2, samples=5, seed=1))
    b = run_suite(SuiteConfig(suite="hoelder", n=2, k=2, samples=5, seed=2))
    assert a.to_csv() != b.to_csv()


@pytest.mark.parametrize("suite,extra", [("hoelder", {"richness": "perturbed"}), ("convexity", {}),
                                         ("poincare_complex", {}), ("garding", {}), ("divergence", {}),
                                         ("symmetry", {}), ("cauchy_schwarz", {"space": "real"})])
def test_worst_case_replays(suite, extra):
    cfg = SuiteConfig(suite=suite, n=2, k=2, samples=6, seed=3, **extra)
    report = run_suite(cfg)
    w = report.worst
    assert abs(replay_case(cfg, w["inputs"], w["case_id"]) - w["margin"]) <= 1e-12 * max(1.0, abs(w["margin"]))


def test_csv_layout():
    report = run_suite(SuiteConfig(suite="garding", n=2, k=2, samples=3))
    lines = report.to_csv().splitlines()
    assert lines[0] == "case_id,margin,tolerance,status,spec_digest"
    assert len(lines) == 4
    assert all(line.split(",")[3] == "pass" for line in lines[1:])
    assert "elapsed_seconds" not in report.payload()
    assert "elapsed_seconds" in report.to_dict()


# --- counting -------------------------------------------------------------

def test_aborted_cases_counted(monkeypatch):
    s = verify.SUITES["hoelder"]
    monkeypatch.setitem(verify.SUITES, "hoelder", verify._Suite(s.sample, s.evaluate, s.equality,
                                                                lambda cfg, x: False))
    report = run_suite(SuiteConfig(suite="hoelder", n=1, k=1, samples=2))
    assert report.aborted == 2 and report.regenerated == 2 * verify.MAX_ATTEMPTS
    assert not report.passed
    assert all(r.status == "aborted" for r in report.rows)


def test_violations_counted(monkeypatch):
    s = verify.SUITES["garding"]
    fake = lambda cfg, sample, i: (-1.0 if i % 2 else 1.0, 1e-3, {})  # noqa: E731
    monkeypatch.setitem(verify.SUITES, "garding", verify._Suite(s.sample, fake, s.equality))
    report = run_suite(SuiteConfig(suite="garding", n=2, k=2, samples=6))
    assert report.violations == 3
    assert report.min_margin == -1.0 and report.worst["margin"] == -1.0
    assert not report.passed


def test_regeneration_recorded():
    report = run_suite(SuiteConfig(suite="convexity", n=2, k=2, samples=5, richness="perturbed"))
    assert report.regenerated == sum(r.regenerated for r in report.rows)


# --- suite-specific properties -------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.2, 5.0))
def test_hoelder_margin_scales(seed, c):
    cfg = SuiteConfig(suite="hoelder", n=2, k=2)
    rng = np.random.default_rng(seed)
    specs = [random_admissible(rng, 2, 2, "complex", "perturbed") for _ in range(3)]
    m1, _ = verify._hoelder_margin(cfg, specs)
    m2, _ = verify._hoelder_margin(cfg, [s.scaled(c) for s in specs])
    if abs(m1) > 1e-8:
        assert m2 / m1 == pytest.approx(c ** 3, rel=1e-9)


def test_poincare_disc_equality():
    cfg = SuiteConfig(suite="poincare_complex", n=1, k=1, m=0)
    v = FunctionSpec("complex", 1, RadialPoly((1.0,)))
    c = poincare_chain(cfg, v, 0)
    assert c["I_m"] == pytest.approx(math.pi / 2, abs=1e-12)
    assert c["I_k"] == pytest.approx(math.pi / 2, abs=1e-12)
    assert c["constant"] == pytest.approx(1.0, abs=1e-11)
    rhs = math.sqrt(c["I_k"]) * math.sqrt(c["I_k_v"])
    assert abs(c["I_m"] - rhs) <= 1e-10


def test_poincare_real_unit_potential():
    cfg = SuiteConfig(suite="poincare_real", n=3, k=2, m=1)
    v = FunctionSpec("real", 3, RadialPoly((0.5,)))
    c = poincare_chain(cfg, v, 1)
    assert abs(c["margin_mixed"]) <= c["tolerance"] and abs(c["margin_hoelder"]) <= c["tolerance"]


def test_poincare_ratio_bounded_by_chain_constant():
    report = run_suite(SuiteConfig(suite="poincare_complex", n=2, k=2, samples=20, richness="perturbed"))
    assert report.extras["sup_within_chain_constant"]
    assert math.isfinite(report.extras["sup_ratio"])


def test_divergence_quadratic_and_cubic():
    rng = np.random.default_rng(0)
    x = np.array([0.1, -0.3, 0.2])
    quad = [random_polynomial_function(rng, 3, 2) for _ in range(2)]
    r, _ = newton_divergence(quad, x, 1e-2)
    assert np.abs(r).max() <= 1e-12
    cubic = [random_polynomial_function(rng, 3, 3)]
    r, scale = newton_divergence(cubic, x, 1e-2)
    assert np.abs(r).max() <= 1e-10 * max(1.0, scale)


def test_divergence_detects_nonzero_field(monkeypatch):
    # a matrix field that is not a Hessian has a nonzero Newton-tensor divergence
    monkeypatch.setattr(verify, "real_hessian", lambda s, pts: np.einsum("pi,jk->pjk", pts, np.eye(2)) + np.eye(2))
    r, _ = newton_divergence([None], np.array([0.2, 0.1]), 1e-3)
    assert np.abs(r).max() > 0.1


def test_divergence_ratio_band():
    report = run_suite(SuiteConfig(suite="divergence", n=4, k=3, samples=20, degree=4))
    assert report.extras["ratio_cases"] == 20
    assert 3.5 <= report.extras["ratio_min"] <= report.extras["ratio_max"] <= 4.5


def test_garding_boundary_skip():
    report = run_suite(SuiteConfig(suite="garding", n=2, k=2, samples=4))
    skip = [e for e in report.equality if e["name"] == "boundary_mu_skip"]
    assert skip and skip[0]["passed"] and skip[0]["skipped"]


def test_run_case_row_fields():
    row = run_case(SuiteConfig(suite="garding", n=3, k=2, seed=5), 7)
    assert row.case_id == 7 and row.status == "pass" and len(row.spec_digest) == 16
    assert set(row.inputs) == {"m", "lam", "a", "b"}
