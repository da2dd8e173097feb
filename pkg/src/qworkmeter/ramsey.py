"""Auxiliary-qubit Ramsey interferometry for the work characteristic function.

The circuit is Hadamard, conditional evolution M_lambda, Hadamard on an
ancilla qubit coupled to the driven system; the work characteristic
function is read off the ancilla coherences, chi = <sigma_z> + i <sigma_y>.
Tensor ordering is fixed as system (x) qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_CLUSTER_TOL,
    HADAMARD,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_density,
    check_hermitian,
    check_unitary,
    partial_trace,
    spectral_decompose,
    tensor,
)

P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _exp_iH(H, coeff: float, cluster_tol: float) -> np.ndarray:
    """exp(1j * coeff * H) through the spectral decomposition."""
    dec = spectral_decompose(H, cluster_tol)
    return dec.apply(lambda e: np.exp(1j * coeff * e))


def build_m_lambda(H0, HT, U, lam: float,
                   cluster_tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Conditional evolution M_lambda on system (x) qubit.

    M = U exp(-i lam H0) (x) |0><0| + exp(-i lam HT) U (x) |1><1|.
    """
    H0 = check_hermitian(H0, name="H0")
    HT = check_hermitian(HT, name="HT")
    U = check_unitary(U, name="U")
    if not H0.shape == HT.shape == U.shape:
        raise ValueError("H0, HT and U must share one dimension")
    branch0 = U @ _exp_iH(H0, -lam, cluster_tol)
    branch1 = _exp_iH(HT, -lam, cluster_tol) @ U
    return tensor(branch0, P0) + tensor(branch1, P1)


def build_m1_m2(H0, HT, U, lam: float,
                cluster_tol: float = DEFAULT_CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Controlled-gate decomposition of M_lambda.

    M1 = I (x) |0><0| + exp(-i lam HT) U (x) |1><1|
    M2 = I (x) |0><0| + U exp(-i lam H0) (x) |1><1|

    and (I (x) sigma_x) M2 (I (x) sigma_x) M1 = M_lambda.
    """
    H0 = check_hermitian(H0, name="H0")
    HT = check_hermitian(HT, name="HT")
    U = check_unitary(U, name="U")
    eye = np.eye(U.shape[0], dtype=complex)
    M1 = tensor(eye, P0) + tensor(_exp_iH(HT, -lam, cluster_tol) @ U, P1)
    M2 = tensor(eye, P0) + tensor(U @ _exp_iH(H0, -lam, cluster_tol), P1)
    return M1, M2


@dataclass(frozen=True)
class RamseyOutcome:
    """Tomography result of one Ramsey run at fixed interaction time lambda."""

    lam: float
    rho_qubit: np.ndarray
    sigma_z: float
    sigma_y: float
    chi: complex


def run_ramsey(rho_s0, H0, HT, U, lambdas,
               cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[RamseyOutcome]:
    """Simulate the three-step Ramsey circuit over a lambda grid.

    The qubit starts in |0><0|; after Hadamard, M_lambda, Hadamard the
    system is traced out and chi = <sigma_z> + i <sigma_y> is reported.
    For rho_s0 diagonal in the H0 basis chi equals the TMP characteristic
    function; for coherent rho_s0 it equals the general trace
    Tr[U^dag exp(i lam HT) U exp(-i lam H0) rho_s0], which need not be a
    characteristic function of any probability distribution.
    """
    rho_s0 = check_density(rho_s0, name="rho_s0")
    dim = rho_s0.shape[0]
    hg = tensor(np.eye(dim, dtype=complex), HADAMARD)
    rho_tot0 = tensor(rho_s0, P0)

    outcomes = []
    for lam in np.atleast_1d(np.asarray(lambdas, dtype=float)):
        M = build_m_lambda(H0, HT, U, lam, cluster_tol)
        circuit = hg @ M @ hg
        rho_tot = circuit @ rho_tot0 @ circuit.conj().T
        rho_q = partial_trace(rho_tot, which=0, dims=[dim, 2])
        sz = float(np.trace(SIGMA_Z @ rho_q).real)
        sy = float(np.trace(SIGMA_Y @ rho_q).real)
        outcomes.append(RamseyOutcome(float(lam), rho_q, sz, sy, sz + 1j * sy))
    return outcomes
