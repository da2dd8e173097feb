import numpy as np

from qworkmeter import (
    DetectorConfig,
    ShotPlan,
    run_ramsey,
    sample_position,
    sample_ramsey,
    sample_tmp,
    tmp_distribution,
)

from util import nmr_endpoints, random_instance


def test_sample_tmp_frequencies_close_to_exact():
    rho0, H0, HT, U = nmr_endpoints(beta=0.5)
    exact = tmp_distribution(rho0, H0, HT, U)
    empirical, report = sample_tmp(rho0, H0, HT, U, ShotPlan(40000, seed=5))
    lookup = dict(zip(np.round(empirical.w, 9), empirical.weights))
    for w, p in zip(exact.w, exact.weights):
        assert abs(lookup.get(round(w, 9), 0.0) - p) < 5 * np.sqrt(p * (1 - p) / 40000) + 1e-4
    assert abs(report.estimates["mean_work"] - exact.mean) < 5 * report.standard_errors["mean_work"]


def test_sample_tmp_deterministic():
    rng = np.random.default_rng(40)
    rho0, H0, HT, U = random_instance(rng, 3)
    a, ra = sample_tmp(rho0, H0, HT, U, ShotPlan(5000, seed=123))
    b, rb = sample_tmp(rho0, H0, HT, U, ShotPlan(5000, seed=123))
    assert np.array_equal(a.w, b.w)
    assert np.array_equal(a.weights, b.weights)
    assert ra.estimates == rb.estimates
    c, _ = sample_tmp(rho0, H0, HT, U, ShotPlan(5000, seed=124))
    assert not np.array_equal(a.weights, c.weights)


def test_sample_ramsey_matches_exact():
    rho0, H0, HT, U = nmr_endpoints(beta=1.0)
    lam = 0.8
    exact = run_ramsey(rho0, H0, HT, U, [lam])[0]
    report = sample_ramsey(rho0, H0, HT, U, lam, ShotPlan(50000, seed=9))
    for name, value in (("sigma_z", exact.sigma_z), ("sigma_y", exact.sigma_y)):
        se = max(report.standard_errors[name], 1e-4)
        assert abs(report.estimates[name] - value) < 5 * se
    assert report.estimates["chi_re"] == report.estimates["sigma_z"]


def test_sample_position_delta_branch():
    rho0, H0, HT, U = nmr_endpoints(beta=1.0)
    cfg = DetectorConfig(lam=1.0, p0=1.0, sigma=0.1)
    samples, report = sample_position(rho0, H0, HT, U, cfg, ShotPlan(20000, seed=3),
                                      delta_localized=True)
    exact = tmp_distribution(rho0, H0, HT, U)
    atoms = set(np.round(exact.w, 6))
    assert set(np.round(samples.values, 6)) <= atoms
    assert abs(report.estimates["mean_shift"] - exact.mean) < 5 * report.standard_errors["mean_shift"]


def test_sample_position_gaussian_branch_deterministic():
    rho0, H0, HT, U = nmr_endpoints(beta=1.0)
    cfg = DetectorConfig(lam=0.2, p0=1.0, sigma=0.4)
    a, _ = sample_position(rho0, H0, HT, U, cfg, ShotPlan(2000, seed=77))
    b, _ = sample_position(rho0, H0, HT, U, cfg, ShotPlan(2000, seed=77))
    assert np.array_equal(a.values, b.values)
    # sample mean near exact mean (lam/p0) * <W>
    exact = tmp_distribution(rho0, H0, HT, U)
    assert abs(np.mean(a.values) - 0.2 * exact.mean) < 0.05
