"""Dense operator algebra for small Hilbert spaces.

Everything is a plain complex numpy array; this module provides the
validated constructors and the handful of linear-algebra primitives the
rest of the package builds on: spectral decomposition with degeneracy
clustering, piecewise time-dependent Hamiltonian schedules with a
midpoint exponential integrator, Gibbs states, tensor products and
partial traces.  hbar = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-10
DENSITY_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-9

# Pauli matrices and friends, used all over the test models.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = (SIGMA_Z + SIGMA_X) / np.sqrt(2)


class NumericalCheckError(RuntimeError):
    """A numerical invariant (normalization, positivity, ...) failed."""


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(a) -> float:
    a = as_operator(a)
    return float(np.max(np.abs(a - a.conj().T)))


def unitarity_defect(u) -> float:
    u = as_operator(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_hermitian(a, tol: float = HERMITICITY_TOL, name: str = "operator") -> np.ndarray:
    a = as_operator(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian: max|A - A^dag| = {defect:.3e} > {tol:.1e}")
    return a


def check_unitary(u, tol: float = UNITARITY_TOL, name: str = "operator") -> np.ndarray:
    u = as_operator(u)
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValueError(f"{name} is not unitary: max|U^dag U - I| = {defect:.3e} > {tol:.1e}")
    return u


def check_density(rho, tol: float = DENSITY_TOL, name: str = "state") -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, positive semidefinite."""
    rho = check_hermitian(rho, tol, name)
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"{name} has trace {tr:.12g}, expected 1 within {tol:.1e}")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -tol:
        raise ValueError(f"{name} is not positive semidefinite: min eigenvalue {evals.min():.3e}")
    return rho


def _check_same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: got dims {sorted(dims)}")


# ---------------------------------------------------------------------------
# Spectral decomposition


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered eigendecomposition of a Hermitian operator.

    energies are strictly increasing after clustering; projectors[i] is the
    (possibly rank > 1) orthogonal projector onto the i-th eigenspace.
    """

    energies: np.ndarray
    projectors: list[np.ndarray]
    multiplicities: list[int]

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def nlevels(self) -> int:
        return len(self.energies)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Build the operator function f(H) = sum_i f(e_i) Pi_i."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        fvals = f(self.energies)
        for fv, proj in zip(fvals, self.projectors):
            out += fv * proj
        return out

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda e: e.astype(complex))


def spectral_decompose(H, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralDecomposition:
    """Eigendecompose a Hermitian operator, merging nearly degenerate levels.

    Eigenvalues closer than cluster_tol * max(1, ||H||) are merged into a
    single eigenspace projector.
    """
    H = check_hermitian(H, name="Hamiltonian")
    evals, evecs = np.linalg.eigh(H)
    scale = max(1.0, float(np.linalg.norm(H, 2)))
    gap = cluster_tol * scale

    energies = []
    projectors = []
    multiplicities = []
    start = 0
    for stop in range(1, len(evals) + 1):
        if stop == len(evals) or evals[stop] - evals[stop - 1] > gap:
            vecs = evecs[:, start:stop]
            energies.append(float(np.mean(evals[start:stop])))
            projectors.append(vecs @ vecs.conj().T)
            multiplicities.append(stop - start)
            start = stop
    return SpectralDecomposition(np.array(energies), projectors, multiplicities)


# ---------------------------------------------------------------------------
# Time-dependent Hamiltonian schedules


@dataclass(frozen=True)
class Segment:
    duration: float
    generator: Callable[[float], np.ndarray]  # local time in [0, duration] -> H

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Ordered piecewise time-dependent Hamiltonian H(t) on [0, T]."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule needs at least one segment")

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def hamiltonian(self, t: float) -> np.ndarray:
        """H at global time t (clamped to [0, T])."""
        remaining = t
        for seg in self.segments:
            if remaining <= seg.duration or seg is self.segments[-1]:
                return seg.generator(min(max(remaining, 0.0), seg.duration))
            remaining -= seg.duration
        raise AssertionError("unreachable")

    def concat(self, other: "HamiltonianSchedule") -> "HamiltonianSchedule":
        return HamiltonianSchedule(self.segments + other.segments)

    @staticmethod
    def constant(H, duration: float) -> "HamiltonianSchedule":
        H = check_hermitian(H)
        return HamiltonianSchedule((Segment(duration, lambda t: H),))

    @staticmethod
    def from_function(f: Callable[[float], np.ndarray], duration: float) -> "HamiltonianSchedule":
        return HamiltonianSchedule((Segment(duration, f),))

    @property
    def initial_hamiltonian(self) -> np.ndarray:
        return self.segments[0].generator(0.0)

    @property
    def final_hamiltonian(self) -> np.ndarray:
        return self.segments[-1].generator(self.segments[-1].duration)


def evolve(schedule: HamiltonianSchedule, steps_per_segment: int = 1024) -> np.ndarray:
    """Time-ordered evolution operator of a schedule.

    Midpoint rule: each segment is split into steps_per_segment sub-steps
    and U = prod exp(-i H(t_mid) dt), later factors applied on the left.
    Second order in dt.
    """
    if steps_per_segment < 1:
        raise ValueError("steps_per_segment must be >= 1")
    U = None
    for seg in schedule.segments:
        dt = seg.duration / steps_per_segment
        for k in range(steps_per_segment):
            H = check_hermitian(seg.generator((k + 0.5) * dt), name="H(t)")
            step = expm(-1j * H * dt)
            U = step if U is None else step @ U
    return U


# ---------------------------------------------------------------------------
# Thermal states


def thermal_state(H, beta: float) -> np.ndarray:
    """Gibbs state exp(-beta H)/Z.  beta >= 0; beta = 0 gives I/d."""
    H = check_hermitian(H, name="Hamiltonian")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if not np.isfinite(beta):
        raise ValueError("beta must be finite; use ground_state() for the zero-temperature limit")
    evals, evecs = np.linalg.eigh(H)
    # shift by the ground energy to keep the exponentials bounded
    w = np.exp(-beta * (evals - evals[0]))
    w /= w.sum()
    return (evecs * w) @ evecs.conj().T


def ground_state(H, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Projector onto the lowest eigenspace, normalized to trace 1 (beta -> inf)."""
    dec = spectral_decompose(H, cluster_tol)
    proj = dec.projectors[0]
    return proj / np.trace(proj).real


def partition_function(H, beta: float) -> float:
    H = check_hermitian(H)
    evals = np.linalg.eigvalsh(H)
    return float(np.sum(np.exp(-beta * evals)))


# ---------------------------------------------------------------------------
# Composite systems


def tensor(a, b) -> np.ndarray:
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(joint, which: int, dims: Sequence[int]) -> np.ndarray:
    """Trace out subsystem `which` of an operator on a tensor-product space.

    dims lists the subsystem dimensions in tensor order; the returned
    operator acts on the remaining subsystems (in order).
    """
    joint = as_operator(joint)
    dims = list(dims)
    if int(np.prod(dims)) != joint.shape[0]:
        raise ValueError(f"dims {dims} do not match operator dimension {joint.shape[0]}")
    if not 0 <= which < len(dims):
        raise ValueError(f"subsystem index {which} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = joint.reshape(dims + dims)
    t = np.trace(t, axis1=which, axis2=n + which)
    d_rest = int(np.prod(dims)) // dims[which]
    return t.reshape(d_rest, d_rest)


def expectation(obs, rho) -> complex:
    obs = as_operator(obs)
    rho = as_operator(rho)
    _check_same_dim(obs, rho)
    return complex(np.trace(obs @ rho))
