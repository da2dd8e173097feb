"""Exact work statistics for a driven finite-dimensional system.

Given an initial state rho0, endpoint Hamiltonians H0 and HT and the
driving unitary U, this module computes:

* the two-measurement-protocol (TMP) work distribution and its
  characteristic function chi_lambda,
* the detector-phase characteristic function G_lambda and the associated
  work quasi-probability distribution, whose negative weights witness
  initial coherence in the energy basis,
* moment identities, Fourier inversion on a known candidate support, and
  Jarzynski / Tasaki-Crooks fluctuation-theorem checks.

Distributions are finite lists of atoms (work value, real weight);
degenerate levels are handled through eigenspace projectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import (
    DEFAULT_CLUSTER_TOL,
    NumericalCheckError,
    check_density,
    check_hermitian,
    check_unitary,
    spectral_decompose,
)

QUASI_IMAG_TOL = 1e-10
PAIRING_WEIGHT_TOL = 1e-12
MAX_CONDITION = 1e12


def default_merge_tol(*energy_arrays) -> float:
    """Absolute merge tolerance for work atoms: 1e-9 * max|eps| (at least 1e-12)."""
    emax = max((float(np.max(np.abs(e))) for e in energy_arrays if len(e)), default=0.0)
    return 1e-9 * max(emax, 1e-3)


@dataclass(frozen=True)
class WorkDistribution:
    """Finite atomic distribution of work values.

    kind is "probability" (all weights nonnegative) or "quasi-probability"
    (signed weights allowed).  Atoms are sorted by work value and
    normalized to total weight 1.
    """

    w: np.ndarray
    weights: np.ndarray
    kind: str

    def __len__(self):
        return len(self.w)

    def moment(self, order: int = 1) -> float:
        return float(np.sum(self.weights * self.w**order))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def min_weight(self) -> float:
        return float(np.min(self.weights))

    def characteristic(self, lambdas) -> "CharacteristicFunctionSamples":
        """Fourier transform sum_k weight_k exp(i lambda w_k)."""
        lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
        values = np.exp(1j * np.outer(lambdas, self.w)) @ self.weights.astype(complex)
        return CharacteristicFunctionSamples(lambdas, values)

    def exp_average(self, beta: float) -> float:
        """<exp(-beta W)> over the atoms."""
        return float(np.sum(self.weights * np.exp(-beta * self.w)))


def make_distribution(values, weights, kind: str = "probability",
                      merge_tol: float | None = None,
                      norm_tol: float = 1e-6) -> WorkDistribution:
    """Sort, merge and validate work atoms.

    Atoms closer than merge_tol are merged (weights summed).  The total
    weight must be 1 within norm_tol; for kind="probability" weights must
    be nonnegative within 1e-12.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise ValueError("values and weights must have matching shapes")
    if kind not in ("probability", "quasi-probability"):
        raise ValueError(f"unknown distribution kind {kind!r}")
    if merge_tol is None:
        merge_tol = default_merge_tol(values)

    order = np.argsort(values)
    values, weights = values[order], weights[order]
    merged_w, merged_p = [], []
    for v, p in zip(values, weights):
        if merged_w and v - merged_w[-1] <= merge_tol:
            merged_p[-1] += p
        else:
            merged_w.append(v)
            merged_p.append(p)
    w = np.array(merged_w)
    p = np.array(merged_p)

    total = p.sum()
    if abs(total - 1) > norm_tol:
        raise NumericalCheckError(f"work distribution normalization breach: sum of weights = {total:.12g}")
    if kind == "probability" and p.min() < -1e-12:
        raise NumericalCheckError(f"negative weight {p.min():.3e} in a probability distribution")
    return WorkDistribution(w, p, kind)


@dataclass(frozen=True)
class CharacteristicFunctionSamples:
    """Complex samples of a work characteristic function on a lambda grid."""

    lambdas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        at_zero = np.abs(self.lambdas) < 1e-15
        if np.any(at_zero) and np.max(np.abs(self.values[at_zero] - 1)) > 1e-10:
            raise NumericalCheckError("characteristic function at lambda=0 deviates from 1")


# ---------------------------------------------------------------------------
# Transition data and the TMP distribution


@dataclass(frozen=True)
class TransitionData:
    """Level populations and transition probabilities of a driven process.

    P_i are the initial-level probabilities Tr[Pi_i rho0]; P_ij[i, j] the
    conditional probability of ending in final level j given initial level
    i.  U_elements holds the amplitudes <eps_j^T|U|eps_i^0> (indexed
    [j, i]) when every level is nondegenerate, else None.
    """

    energies0: np.ndarray
    energiesT: np.ndarray
    P_i: np.ndarray
    P_ij: np.ndarray
    U_elements: np.ndarray | None

    @property
    def work_values(self) -> np.ndarray:
        """Matrix of eps_j^T - eps_i^0, indexed [i, j]."""
        return self.energiesT[None, :] - self.energies0[:, None]


def transition_data(rho0, H0, HT, U, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> TransitionData:
    rho0 = check_density(rho0, name="rho0")
    U = check_unitary(U, name="U")
    dec0 = spectral_decompose(H0, cluster_tol)
    decT = spectral_decompose(HT, cluster_tol)
    if not (rho0.shape == U.shape and dec0.dim == decT.dim == rho0.shape[0]):
        raise ValueError("rho0, H0, HT and U must share one dimension")

    n0, nT = dec0.nlevels, decT.nlevels
    P_i = np.array([np.trace(proj @ rho0).real for proj in dec0.projectors])
    joint = np.zeros((n0, nT))
    P_ij = np.zeros((n0, nT))
    for i, Pi in enumerate(dec0.projectors):
        collapsed = Pi @ rho0 @ Pi
        evolved = U @ collapsed @ U.conj().T
        for j, Pj in enumerate(decT.projectors):
            joint[i, j] = np.trace(Pj @ evolved).real
        if P_i[i] > 1e-14:
            P_ij[i] = joint[i] / P_i[i]
        else:
            # state-independent transition probabilities of the unitary channel
            chan = U @ Pi @ U.conj().T / dec0.multiplicities[i]
            P_ij[i] = [np.trace(Pj @ chan).real for Pj in decT.projectors]

    U_elements = None
    if all(m == 1 for m in dec0.multiplicities) and all(m == 1 for m in decT.multiplicities):
        v0 = np.column_stack([np.linalg.eigh(proj)[1][:, -1] for proj in dec0.projectors])
        vT = np.column_stack([np.linalg.eigh(proj)[1][:, -1] for proj in decT.projectors])
        U_elements = vT.conj().T @ U @ v0
    return TransitionData(dec0.energies, decT.energies, P_i, P_ij, U_elements)


def tmp_distribution(rho0, H0, HT, U, cluster_tol: float = DEFAULT_CLUSTER_TOL,
                     merge_tol: float | None = None) -> WorkDistribution:
    """Work distribution of the two-measurement protocol.

    Atoms sit at eps_j^T - eps_i^0 with weights P_i * P_{i->j}.
    """
    data = transition_data(rho0, H0, HT, U, cluster_tol)
    joint = data.P_i[:, None] * data.P_ij
    if merge_tol is None:
        merge_tol = default_merge_tol(data.energies0, data.energiesT)
    return make_distribution(data.work_values.ravel(), joint.ravel(),
                             kind="probability", merge_tol=merge_tol)


def tmp_distribution_thermal(H0, HT, U, beta: float,
                             cluster_tol: float = DEFAULT_CLUSTER_TOL,
                             merge_tol: float | None = None) -> WorkDistribution:
    """TMP distribution for a thermal initial state, exact in the tail.

    Boltzmann populations are formed directly from the spectrum (softmax
    in log space) instead of through density-matrix traces, which would
    drown exponentially small populations in rounding noise; per-atom
    weights then satisfy the Tasaki-Crooks identity to near machine
    relative precision.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    U = check_unitary(U, name="U")
    dec0 = spectral_decompose(H0, cluster_tol)
    decT = spectral_decompose(HT, cluster_tol)
    logw = -beta * dec0.energies + np.log(dec0.multiplicities)
    P_i = np.exp(logw - logsumexp(logw))
    values, weights = [], []
    for i, Pi in enumerate(dec0.projectors):
        chan = U @ Pi @ U.conj().T / dec0.multiplicities[i]
        for j, Pj in enumerate(decT.projectors):
            values.append(decT.energies[j] - dec0.energies[i])
            weights.append(P_i[i] * np.trace(Pj @ chan).real)
    if merge_tol is None:
        merge_tol = default_merge_tol(dec0.energies, decT.energies)
    return make_distribution(values, weights, kind="probability", merge_tol=merge_tol)


# ---------------------------------------------------------------------------
# Characteristic functions


def characteristic_function_tmp(rho0, H0, HT, U, lambdas,
                                cluster_tol: float = DEFAULT_CLUSTER_TOL) -> CharacteristicFunctionSamples:
    """Two-time correlation function chi_lambda of the TMP.

    chi_lambda = Tr[U^dag exp(i lambda HT) U exp(-i lambda H0) rho_proj]
    where rho_proj is rho0 dephased in the H0 eigenbasis.
    """
    rho0 = check_density(rho0, name="rho0")
    U = check_unitary(U, name="U")
    dec0 = spectral_decompose(H0, cluster_tol)
    decT = spectral_decompose(HT, cluster_tol)
    rho_proj = sum(P @ rho0 @ P for P in dec0.projectors)

    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    values = np.empty(len(lambdas), dtype=complex)
    for n, lam in enumerate(lambdas):
        eT = decT.apply(lambda e: np.exp(1j * lam * e))
        e0 = dec0.apply(lambda e: np.exp(-1j * lam * e))
        values[n] = np.trace(U.conj().T @ eT @ U @ e0 @ rho_proj)
    return CharacteristicFunctionSamples(lambdas, values)


def g_lambda(rho0, H0, HT, U, lambdas,
             cluster_tol: float = DEFAULT_CLUSTER_TOL) -> CharacteristicFunctionSamples:
    """Detector-phase characteristic function of the unified framework.

    G_lambda = Tr[e^{i lam HT/2} U e^{-i lam H0/2} rho0 e^{-i lam H0/2} U^dag e^{i lam HT/2}]

    with the symmetric +-lambda/2 split coming from the +-p0/2 momentum
    readout.  Coherences of rho0 are retained; for rho0 diagonal in the H0
    basis this coincides with the TMP characteristic function.
    """
    rho0 = check_density(rho0, name="rho0")
    U = check_unitary(U, name="U")
    dec0 = spectral_decompose(H0, cluster_tol)
    decT = spectral_decompose(HT, cluster_tol)

    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    values = np.empty(len(lambdas), dtype=complex)
    for n, lam in enumerate(lambdas):
        eT = decT.apply(lambda e: np.exp(1j * lam * e / 2))
        e0 = dec0.apply(lambda e: np.exp(-1j * lam * e / 2))
        # both halves carry e^{+i lam HT/2} / e^{-i lam H0/2}: the phases add
        values[n] = np.trace(eT @ U @ e0 @ rho0 @ e0 @ U.conj().T @ eT)
    return CharacteristicFunctionSamples(lambdas, values)


def quasi_distribution(rho0, H0, HT, U, cluster_tol: float = DEFAULT_CLUSTER_TOL,
                       merge_tol: float | None = None) -> WorkDistribution:
    """Quasi-probability distribution of work (Fourier dual of G_lambda).

    Atoms sit at eps_j^T - (eps_i^0 + eps_k^0)/2 with weights
    Re Tr[Pi_j U Pi_i rho0 Pi_k U^dag]; the imaginary parts cancel in
    pairs under (i, k) exchange and the residual is asserted small.
    Negative weights witness initial energy-basis coherence.
    """
    rho0 = check_density(rho0, name="rho0")
    U = check_unitary(U, name="U")
    dec0 = spectral_decompose(H0, cluster_tol)
    decT = spectral_decompose(HT, cluster_tol)

    values, weights = [], []
    for j, Pj in enumerate(decT.projectors):
        for i, Pi in enumerate(dec0.projectors):
            for k, Pk in enumerate(dec0.projectors):
                c = np.trace(Pj @ U @ Pi @ rho0 @ Pk @ U.conj().T)
                values.append(decT.energies[j] - (dec0.energies[i] + dec0.energies[k]) / 2)
                weights.append(c)
    if merge_tol is None:
        merge_tol = default_merge_tol(dec0.energies, decT.energies)

    # (i, k) and (k, i) land on the same atom with conjugate contributions,
    # so each merged weight must come out real
    values = np.asarray(values)
    weights = np.asarray(weights, dtype=complex)
    order = np.argsort(values)
    values, weights = values[order], weights[order]
    merged_w, merged_c = [], []
    for v, c in zip(values, weights):
        if merged_w and v - merged_w[-1] <= merge_tol:
            merged_c[-1] += c
        else:
            merged_w.append(v)
            merged_c.append(c)
    merged_c = np.array(merged_c)
    imag_residual = float(np.max(np.abs(merged_c.imag)))
    if imag_residual > QUASI_IMAG_TOL:
        raise NumericalCheckError(
            f"quasi-probability weights have imaginary residue {imag_residual:.3e}")
    return make_distribution(merged_w, merged_c.real, kind="quasi-probability",
                             merge_tol=merge_tol)


# ---------------------------------------------------------------------------
# Moments


def work_moments(dist: WorkDistribution, order: int) -> float:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return dist.moment(order)


def moment_identities_check(rho0, H0, HT, U,
                            cluster_tol: float = DEFAULT_CLUSTER_TOL) -> dict:
    """Compare quasi-distribution moments against their operator identities.

    First moment vs Tr[HT rho_T] - Tr[H0 rho_0]; second moment vs
    Tr[(U^dag HT U - H0)^2 rho0].  The report also splits the mean into
    the classical TMP part and the coherence term.
    """
    rho0 = check_density(rho0, name="rho0")
    H0 = check_hermitian(H0, name="H0")
    HT = check_hermitian(HT, name="HT")
    U = check_unitary(U, name="U")

    quasi = quasi_distribution(rho0, H0, HT, U, cluster_tol)
    tmp = tmp_distribution(rho0, H0, HT, U, cluster_tol)
    rho_T = U @ rho0 @ U.conj().T

    m1 = quasi.moment(1)
    m1_op = float((np.trace(HT @ rho_T) - np.trace(H0 @ rho0)).real)
    m2 = quasi.moment(2)
    A = U.conj().T @ HT @ U - H0
    m2_op = float(np.trace(A @ A @ rho0).real)

    return {
        "first_moment": m1,
        "first_moment_operator": m1_op,
        "first_moment_delta": m1 - m1_op,
        "second_moment": m2,
        "second_moment_operator": m2_op,
        "second_moment_delta": m2 - m2_op,
        "tmp_mean": tmp.mean,
        "coherence_term": m1 - tmp.mean,
    }


# ---------------------------------------------------------------------------
# Fourier inversion


@dataclass(frozen=True)
class InversionResult:
    distribution: WorkDistribution
    residual: float
    condition: float


def invert_characteristic(samples: CharacteristicFunctionSamples, candidate_support,
                          kind: str | None = None,
                          merge_tol: float | None = None) -> InversionResult:
    """Recover work atoms from characteristic-function samples.

    Solves the least-squares system sum_k w_k exp(i lambda_n w_k) =
    chi(lambda_n) for real weights on the deduplicated candidate support.
    The support must list every possible work value; the lambda grid must
    have at least as many points as the support.
    """
    support = np.sort(np.asarray(candidate_support, dtype=float))
    if merge_tol is None:
        merge_tol = default_merge_tol(support)
    dedup = [support[0]]
    for v in support[1:]:
        if v - dedup[-1] > merge_tol:
            dedup.append(v)
    support = np.array(dedup)

    lambdas = samples.lambdas
    if len(lambdas) < len(support):
        raise ValueError(f"need at least {len(support)} lambda samples, got {len(lambdas)}")

    A = np.exp(1j * np.outer(lambdas, support))
    A_real = np.vstack([A.real, A.imag])
    b_real = np.concatenate([samples.values.real, samples.values.imag])
    condition = float(np.linalg.cond(A_real))
    if condition > MAX_CONDITION:
        raise ValueError(
            f"inversion system is ill-conditioned (cond = {condition:.3e}); "
            "use a denser or wider lambda grid")
    weights, *_ = np.linalg.lstsq(A_real, b_real, rcond=None)
    residual = float(np.linalg.norm(A_real @ weights - b_real))

    if kind is None:
        kind = "probability" if weights.min() >= -1e-9 else "quasi-probability"
    if kind == "probability":
        weights = np.clip(weights, 0.0, None)
    dist = make_distribution(support, weights, kind=kind, merge_tol=merge_tol)
    return InversionResult(dist, residual, condition)


def invert_characteristic_fft(samples: CharacteristicFunctionSamples,
                              window: str | None = "hann"):
    """Windowed-FFT inversion on a uniform lambda grid (experiment-like mode).

    The samples must lie on a uniform grid starting at lambda = 0; the
    negative-lambda half is filled in by Hermitian symmetry (valid for
    real work distributions).  Returns (w_grid, density); peaks of the
    density sit near the work atoms, broadened by the window.
    """
    lam = samples.lambdas
    if len(lam) < 2:
        raise ValueError("need at least two lambda samples")
    dl = lam[1] - lam[0]
    if abs(lam[0]) > 1e-12 or np.max(np.abs(np.diff(lam) - dl)) > 1e-9 * dl:
        raise ValueError("FFT inversion needs a uniform lambda grid starting at 0")

    chi = samples.values
    full = np.concatenate([np.conj(chi[:0:-1]), chi])  # lambda from -max..max
    n = len(full)
    if window == "hann":
        full = full * np.hanning(n)
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")
    # inversion kernel is e^{-i lambda w}: forward FFT, not inverse
    spectrum = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(full))) * dl / (2 * np.pi)
    w_grid = np.fft.fftshift(np.fft.fftfreq(n, d=dl)) * 2 * np.pi
    return w_grid, spectrum.real


# ---------------------------------------------------------------------------
# Fluctuation theorems


def delta_F(H0, HT, beta: float) -> float:
    """Equilibrium free-energy difference -(1/beta) ln(Z_T / Z_0)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    e0 = np.linalg.eigvalsh(check_hermitian(H0, name="H0"))
    eT = np.linalg.eigvalsh(check_hermitian(HT, name="HT"))
    return float(-(logsumexp(-beta * eT) - logsumexp(-beta * e0)) / beta)


def jarzynski_check(dist: WorkDistribution, beta: float, deltaF: float) -> dict:
    """Compare <exp(-beta W)> over the atoms against exp(-beta deltaF)."""
    if dist.kind != "probability":
        raise ValueError("Jarzynski equality needs a probability distribution")
    lhs = dist.exp_average(beta)
    rhs = float(np.exp(-beta * deltaF))
    return {
        "exp_average": lhs,
        "exp_minus_beta_deltaF": rhs,
        "relative_deviation": abs(lhs - rhs) / rhs,
        "beta": beta,
        "deltaF": deltaF,
    }


def crooks_check(forward: WorkDistribution, backward: WorkDistribution, beta: float,
                 merge_tol: float | None = None) -> dict:
    """Per-atom Tasaki-Crooks check ln[P_F(W)/P_B(-W)] = beta (W - deltaF).

    Forward atoms at W are paired with backward atoms at -W within
    merge_tol; a least-squares line through the log-ratios gives the
    fitted slope (should equal beta) and the fitted deltaF.
    """
    if merge_tol is None:
        merge_tol = default_merge_tol(forward.w, backward.w)
    used_b = np.zeros(len(backward), dtype=bool)
    ws, ratios = [], []
    for wf, pf in zip(forward.w, forward.weights):
        idx = np.flatnonzero(np.abs(backward.w + wf) <= merge_tol)
        pb = backward.weights[idx].sum() if len(idx) else 0.0
        if pb <= 0:
            if pf > PAIRING_WEIGHT_TOL:
                raise ValueError(
                    f"forward atom at W = {wf:.12g} (weight {pf:.3e}) has no backward partner")
            continue
        used_b[idx] = True
        if pf > 0:
            ws.append(wf)
            ratios.append(np.log(pf / pb))
    leftover = backward.weights[~used_b]
    if np.any(leftover > PAIRING_WEIGHT_TOL):
        raise ValueError(
            f"backward atoms with total weight {leftover.sum():.3e} are unpaired")

    ws = np.array(ws)
    ratios = np.array(ratios)
    if len(ws) >= 2:
        slope, intercept = np.polyfit(ws, ratios, 1)
    else:
        slope, intercept = beta, float(ratios[0] - beta * ws[0]) if len(ws) else 0.0
    deltaF_fit = -intercept / slope if slope != 0 else np.nan
    return {
        "work_values": ws,
        "log_ratios": ratios,
        "slope": float(slope),
        "intercept": float(intercept),
        "beta": beta,
        "deltaF_fit": float(deltaF_fit),
        "max_pointwise_deviation": float(np.max(np.abs(ratios - beta * (ws - deltaF_fit))))
        if len(ws) else 0.0,
    }
