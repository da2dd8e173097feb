import numpy as np
import pytest
from scipy.linalg import expm

from qworkmeter import (
    HADAMARD,
    NumericalCheckError,
    characteristic_function_tmp,
    crooks_check,
    delta_F,
    g_lambda,
    invert_characteristic,
    invert_characteristic_fft,
    jarzynski_check,
    make_distribution,
    moment_identities_check,
    quasi_distribution,
    thermal_state,
    tmp_distribution,
    tmp_distribution_thermal,
    transition_data,
    work_moments,
)

from util import nmr_endpoints, random_instance, random_unitary

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)  # |+><+|


def test_make_distribution_merges_and_sorts():
    d = make_distribution([1.0, -1.0, 1.0 + 1e-12], [0.25, 0.5, 0.25])
    assert len(d) == 2
    assert np.allclose(d.w, [-1.0, 1.0])
    assert np.allclose(d.weights, [0.5, 0.5])
    assert abs(d.mean) < 1e-12
    assert abs(d.moment(2) - 1.0) < 1e-12


def test_make_distribution_rejects_bad_weights():
    with pytest.raises(NumericalCheckError):
        make_distribution([0.0, 1.0], [0.5, 0.6])  # total 1.1
    with pytest.raises(NumericalCheckError):
        make_distribution([0.0, 1.0], [1.2, -0.2])  # negative probability


def test_tmp_hadamard_thermal_oracle():
    # sudden switch H0 = sigma_z -> HT = H sigma_z H with thermal start:
    # transition probabilities are all 1/2, populations e^{-+beta}/2cosh(beta)
    beta = 1.0
    HT = HADAMARD @ SIGMA_Z @ HADAMARD
    rho0 = thermal_state(SIGMA_Z, beta)
    dist = tmp_distribution(rho0, SIGMA_Z, HT, np.eye(2, dtype=complex))
    z = 2 * np.cosh(beta)
    assert np.allclose(dist.w, [-2.0, 0.0, 2.0])
    # W = -2 requires starting in the excited level (population e^{-beta}/z)
    assert np.allclose(
        dist.weights, [np.exp(-beta) / (2 * z), 0.5, np.exp(beta) / (2 * z)],
        atol=1e-12)


def test_tmp_thermal_matches_dense_route():
    rng = np.random.default_rng(10)
    for beta in (0.3, 1.0):
        _, H0, HT, U = random_instance(rng, 3)
        a = tmp_distribution(thermal_state(H0, beta), H0, HT, U)
        b = tmp_distribution_thermal(H0, HT, U, beta)
        assert np.max(np.abs(a.w - b.w)) < 1e-10
        assert np.max(np.abs(a.weights - b.weights)) < 1e-10


def test_transition_data_degenerate_levels():
    # H0 with a doubly degenerate ground space: projector-based weights
    H0 = np.diag([0.0, 0.0, 1.0]).astype(complex)
    HT = np.diag([0.0, 1.0, 1.0]).astype(complex)
    U = random_unitary(np.random.default_rng(11), 3)
    rho0 = np.diag([0.5, 0.3, 0.2]).astype(complex)
    data = transition_data(rho0, H0, HT, U)
    assert data.P_i.shape == (2,)
    assert data.P_ij.shape == (2, 2)
    assert np.allclose(data.P_ij.sum(axis=1), 1.0)
    assert data.U_elements is None
    dist = tmp_distribution(rho0, H0, HT, U)
    assert abs(sum(dist.weights) - 1) < 1e-12


def test_characteristic_function_is_fourier_transform():
    rng = np.random.default_rng(12)
    rho0, H0, HT, U = random_instance(rng, 3)
    lambdas = np.linspace(0, 5, 40)
    chi = characteristic_function_tmp(rho0, H0, HT, U, lambdas)
    ft = tmp_distribution(rho0, H0, HT, U).characteristic(lambdas)
    assert np.max(np.abs(chi.values - ft.values)) < 1e-12


def test_quasi_plus_state_oracle():
    # |+> input, Hadamard-rotated sudden quench: five atoms with one
    # negative weight -1/2 witnessing the initial coherence
    HT = HADAMARD @ SIGMA_Z @ HADAMARD
    quasi = quasi_distribution(PLUS, SIGMA_Z, HT, np.eye(2, dtype=complex))
    assert np.allclose(quasi.w, [-2, -1, 0, 1, 2])
    assert np.allclose(quasi.weights, [0.25, -0.5, 0.5, 0.5, 0.25], atol=1e-12)
    assert quasi.kind == "quasi-probability"
    assert abs(quasi.min_weight + 0.5) < 1e-12


def test_g_lambda_is_quasi_fourier_transform():
    rng = np.random.default_rng(13)
    rho0, H0, HT, U = random_instance(rng, 3, pure=True)
    lambdas = np.linspace(0, 4, 30)
    g = g_lambda(rho0, H0, HT, U, lambdas)
    ft = quasi_distribution(rho0, H0, HT, U).characteristic(lambdas)
    assert np.max(np.abs(g.values - ft.values)) < 1e-10


def test_moment_identities():
    rng = np.random.default_rng(14)
    rho0, H0, HT, U = random_instance(rng, 3, pure=True)
    rep = moment_identities_check(rho0, H0, HT, U)
    assert abs(rep["first_moment_delta"]) < 1e-10
    assert abs(rep["second_moment_delta"]) < 1e-10
    dist = tmp_distribution(rho0, H0, HT, U)
    assert work_moments(dist, 1) == dist.mean
    with pytest.raises(ValueError):
        work_moments(dist, 3)


def test_invert_characteristic_roundtrip():
    rng = np.random.default_rng(15)
    rho0, H0, HT, U = random_instance(rng, 3, spaced=True)
    dist = tmp_distribution(rho0, H0, HT, U)
    e0 = np.linalg.eigvalsh(H0)
    eT = np.linalg.eigvalsh(HT)
    support = np.unique(np.round((eT[:, None] - e0[None, :]).ravel(), 12))
    lambdas = np.linspace(0, 25, 64)
    inv = invert_characteristic(dist.characteristic(lambdas), support)
    assert inv.residual < 1e-10
    recovered = dict(zip(np.round(inv.distribution.w, 9), inv.distribution.weights))
    for w, p in zip(dist.w, dist.weights):
        assert abs(recovered.get(round(w, 9), 0.0) - p) < 1e-9


def test_invert_characteristic_rejects_ill_conditioned():
    samples = make_distribution([0.0, 1.0], [0.5, 0.5]).characteristic(
        np.linspace(0, 0.01, 8))
    with pytest.raises(ValueError, match="ill-conditioned"):
        invert_characteristic(samples, [0.0, 1e-8, 1.0])


def test_invert_characteristic_fft_peaks():
    dist = make_distribution([-1.0, 2.0], [0.4, 0.6])
    lambdas = np.arange(0, 512) * 0.05
    w_grid, density = invert_characteristic_fft(dist.characteristic(lambdas))
    for w, p in zip(dist.w, dist.weights):
        k = np.argmin(np.abs(w_grid - w))
        window = density[max(k - 3, 0):k + 4]
        assert window.max() > 0.5 * p / (w_grid[1] - w_grid[0]) * 0.1


def test_delta_F_closed_form():
    H0 = np.diag([-1.0, 1.0]).astype(complex)
    HT = np.diag([-2.0, 2.0]).astype(complex)
    beta = 1.3
    expected = -np.log(np.cosh(2 * beta) / np.cosh(beta)) / beta
    assert abs(delta_F(H0, HT, beta) - expected) < 1e-12


def test_jarzynski_and_crooks_nmr():
    beta = 1.0
    rho0, H0, HT, U = nmr_endpoints(beta=beta)
    fwd = tmp_distribution_thermal(H0, HT, U, beta)
    rep = jarzynski_check(fwd, beta, delta_F(H0, HT, beta))
    assert rep["relative_deviation"] < 1e-12

    _, H0b, HTb, _ = nmr_endpoints(beta=beta, direction="backward")
    assert np.allclose(np.linalg.eigvalsh(H0b), np.linalg.eigvalsh(HT))
    bwd = tmp_distribution_thermal(HT, H0, U.conj().T, beta)
    crooks = crooks_check(fwd, bwd, beta)
    assert abs(crooks["slope"] - beta) < 1e-12
    assert abs(crooks["deltaF_fit"] - delta_F(H0, HT, beta)) < 1e-10
    assert crooks["max_pointwise_deviation"] < 1e-12


def test_crooks_rejects_unpairable_atoms():
    fwd = make_distribution([0.0, 1.0], [0.5, 0.5])
    bwd = make_distribution([0.0, 2.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        crooks_check(fwd, bwd, 1.0)


def test_chi_lambda_dephases_coherences():
    # chi uses the projectively dephased state: coherent and dephased
    # inputs must give identical TMP statistics
    rng = np.random.default_rng(16)
    rho0, H0, HT, U = random_instance(rng, 3, pure=True)
    lambdas = np.linspace(0, 3, 12)
    chi = characteristic_function_tmp(rho0, H0, HT, U, lambdas)
    evals, evecs = np.linalg.eigh(H0)
    diag = evecs @ np.diag(np.diag(evecs.conj().T @ rho0 @ evecs)) @ evecs.conj().T
    chi_d = characteristic_function_tmp(diag, H0, HT, U, lambdas)
    assert np.max(np.abs(chi.values - chi_d.values)) < 1e-12
