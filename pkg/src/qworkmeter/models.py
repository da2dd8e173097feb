"""Ready-made driving protocols: NMR qubit ramp, collective-spin rotation, sudden quench."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import SIGMA_X, SIGMA_Y, SIGMA_Z, HamiltonianSchedule, Segment


@dataclass(frozen=True)
class NmrModel:
    """Rotating-field qubit drive with a linear amplitude ramp.

    H(t) = 2 pi nu(t) [sigma_x sin(pi t / 2 tau) + sigma_y cos(pi t / 2 tau)]
    with nu(t) = nu1 + (nu2 - nu1) t / tau; the backward direction swaps
    nu1 and nu2.  Instantaneous spectrum +-2 pi nu(t).
    """

    nu1: float = 1.0
    nu2: float = 1.8
    tau: float = 1.0
    direction: str = "forward"

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.nu1 <= 0 or self.nu2 <= 0:
            raise ValueError("field amplitudes must be positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be forward or backward, got {self.direction!r}")

    @property
    def amplitudes(self) -> tuple[float, float]:
        if self.direction == "forward":
            return self.nu1, self.nu2
        return self.nu2, self.nu1


def nmr_schedule(m: NmrModel) -> HamiltonianSchedule:
    na, nb = m.amplitudes
    tau = m.tau

    def H(t: float) -> np.ndarray:
        nu = na + (nb - na) * t / tau
        angle = np.pi * t / (2 * tau)
        return 2 * np.pi * nu * (SIGMA_X * np.sin(angle) + SIGMA_Y * np.cos(angle))

    return HamiltonianSchedule((Segment(tau, H),))


# ---------------------------------------------------------------------------
# Collective spin


def spin_operators(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense angular-momentum matrices (Jx, Jy, Jz) for spin j.

    Basis ordered by decreasing magnetic quantum number m = j .. -j.
    """
    if j < 0 or round(2 * j) != 2 * j:
        raise ValueError("j must be a nonnegative half-integer")
    m = np.arange(j, -j - 1, -1)
    jp = np.diag(np.sqrt(j * (j + 1) - (m[1:] + 1) * m[1:]), 1).astype(complex)
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / (2 * 1j)
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


@dataclass(frozen=True)
class CollectiveSpinModel:
    """Atomic ensemble in a rotating field of constant amplitude.

    H(t) = -gammaB [cos(alpha(t)) Jz + sin(alpha(t)) Jy], alpha ramping
    from alpha0 to alphaT over `duration` (linearly unless a custom ramp
    alpha(t) is given).  Spectrum -gammaB * m for m = -j .. j at every t.
    """

    gammaB: float
    alpha0: float
    alphaT: float
    j: float
    duration: float = 1.0
    ramp: Callable[[float], float] | None = None

    def __post_init__(self):
        if round(2 * self.j) != 2 * self.j or self.j < 0:
            raise ValueError("j must be a nonnegative half-integer")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def alpha(self, t: float) -> float:
        if self.ramp is not None:
            return self.ramp(t)
        return self.alpha0 + (self.alphaT - self.alpha0) * t / self.duration

    @property
    def dim(self) -> int:
        return int(round(2 * self.j + 1))


def collective_spin_schedule(m: CollectiveSpinModel) -> HamiltonianSchedule:
    _, jy, jz = spin_operators(m.j)

    def H(t: float) -> np.ndarray:
        a = m.alpha(t)
        return -m.gammaB * (np.cos(a) * jz + np.sin(a) * jy)

    return HamiltonianSchedule((Segment(m.duration, H),))


# ---------------------------------------------------------------------------
# Sudden quench


def sudden_quench(H0, HT) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Instantaneous Hamiltonian switch: U = identity between distinct endpoints."""
    H0 = np.asarray(H0, dtype=complex)
    HT = np.asarray(HT, dtype=complex)
    if H0.shape != HT.shape:
        raise ValueError("H0 and HT must share one dimension")
    return H0, HT, np.eye(H0.shape[0], dtype=complex)
