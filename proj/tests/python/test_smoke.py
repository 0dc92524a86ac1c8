"""End-to-end smoke tests for the pairmix Python bindings."""

import json
import os
import subprocess

import numpy as np
import pytest
import scipy.stats

import pairmix


def test_normal_kernels_match_scipy():
    xs = np.linspace(-6.0, 6.0, 41)
    for x in xs:
        assert pairmix.std_normal_cdf(x) == pytest.approx(
            scipy.stats.norm.cdf(x), abs=1e-14
        )
        assert pairmix.std_normal_pdf(x) == pytest.approx(
            scipy.stats.norm.pdf(x), abs=1e-14
        )
    for p in np.linspace(0.001, 0.999, 21):
        assert pairmix.std_normal_quantile(p) == pytest.approx(
            scipy.stats.norm.ppf(p), abs=1e-10
        )


def test_bivariate_cdf_matches_scipy():
    rng = np.random.default_rng(4)
    for _ in range(25):
        x, y = rng.uniform(-3.0, 3.0, size=2)
        rho = rng.uniform(-0.95, 0.95)
        cov = np.array([[1.0, rho], [rho, 1.0]])
        ref = scipy.stats.multivariate_normal(mean=[0.0, 0.0], cov=cov).cdf(
            [x, y]
        )
        assert pairmix.bvn_cdf(x, y, rho) == pytest.approx(ref, abs=5e-6)


def test_parse_formula():
    parsed = pairmix.parse_formula("y1 + z1 ~ 0 + X1 + X2")
    assert parsed["responses"] == ["y1", "z1"]
    assert parsed["covariates"] == ["X1", "X2"]
    assert parsed["intercept_suppressed"] is True
    assert parsed["text"] == "y1 + z1 ~ 0 + X1 + X2"


def test_toy_model_has_expected_parameter_count():
    config = pairmix.toy_config()
    assert pairmix.count_parameters(json.dumps(config["model"])) == 26


def test_simulate_fit_roundtrip_is_deterministic(tmp_path):
    config = pairmix.toy_config()
    config["n"] = 150
    config["seed"] = 5
    csv_path = str(tmp_path / "toy.csv")
    pairmix.simulate(config, csv_path)
    assert os.path.exists(csv_path)

    kwargs = dict(
        formula="y1 + y2 + z1 + z2 ~ 0 + X1 + X2 + X3",
        types="ordinal,ordinal,gaussian,gaussian",
        threads=2,
        seed=3,
    )
    first = pairmix.fit(csv_path, **kwargs)
    second = pairmix.fit(csv_path, **kwargs)
    assert first == second
    assert first["converged"] is True
    assert len(first["parameter_names"]) == 26
    assert len(first["estimates"]) == 26
    assert np.isfinite(first["log_pl"])
    assert first["claic"] > 0 and first["clbic"] > first["claic"]

    report = pairmix.render_report(json.dumps(first))
    assert report.startswith("Formula:")
    assert "CLAIC:" in report and "CLBIC:" in report
    assert "Thresholds:" in report


def test_cli_binary_responds():
    cli = os.environ.get("PAIRMIX_CLI")
    if not cli:
        pytest.skip("PAIRMIX_CLI not set")
    out = subprocess.run(
        [cli, "--version"], capture_output=True, text=True, check=True
    )
    assert "pairmix" in out.stdout
