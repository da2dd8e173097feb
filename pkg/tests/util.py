"""Shared helpers for the test suite: random well-conditioned instances."""

import numpy as np

from qworkmeter import evolve, nmr_schedule, thermal_state, NmrModel


def random_unitary(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, pure=False):
    if pure:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hamiltonian(rng, d, spaced=False):
    """Random Hermitian matrix; spaced=True puts eigenvalues on a 0.5 grid
    (distinct), which keeps Fourier-inversion systems well conditioned."""
    V = random_unitary(rng, d)
    if spaced:
        evals = rng.choice(np.arange(-2.0, 2.5, 0.5), size=d, replace=False)
    else:
        evals = np.sort(rng.uniform(-2, 2, d))
    return (V * evals) @ V.conj().T


def random_instance(rng, d, spaced=False, pure=False):
    """(rho0, H0, HT, U) with independent random pieces."""
    return (random_density(rng, d, pure=pure),
            random_hamiltonian(rng, d, spaced=spaced),
            random_hamiltonian(rng, d, spaced=spaced),
            random_unitary(rng, d))


def nmr_endpoints(beta=1.0, tau=0.1, direction="forward", steps=256):
    """(rho0, H0, HT, U) for the qubit field-ramp model with a thermal start."""
    sch = nmr_schedule(NmrModel(tau=tau, direction=direction))
    H0, HT = sch.initial_hamiltonian, sch.final_hamiltonian
    U = evolve(sch, steps)
    return thermal_state(H0, beta), H0, HT, U
