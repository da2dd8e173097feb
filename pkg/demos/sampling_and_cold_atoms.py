"""Shot-noise simulation and experimental readout models.

Monte Carlo sampling of the two-measurement protocol converges to the
exact atoms; the light-quadrature readout obeys its closed-form moment
relations; and a two-level condensate kicked by two Stern-Gerlach pulses
of different strength shows the four-peak momentum signature.
"""

import numpy as np

from qworkmeter import (
    MomentumKick,
    NmrModel,
    ShotPlan,
    bec_four_peak_distribution,
    evolve,
    light_ancilla_moments,
    nmr_schedule,
    sample_tmp,
    thermal_state,
    tmp_distribution,
)

beta = 1.0
sch = nmr_schedule(NmrModel(tau=0.1))
H0, HT = sch.initial_hamiltonian, sch.final_hamiltonian
U = evolve(sch)
rho0 = thermal_state(H0, beta)

exact = tmp_distribution(rho0, H0, HT, U)
empirical, report = sample_tmp(rho0, H0, HT, U, ShotPlan(shots=200_000, seed=42))
print("sampled vs exact two-measurement weights (200k shots):")
lookup = dict(zip(np.round(empirical.w, 9), empirical.weights))
for w, p in zip(exact.w, exact.weights):
    print(f"  W = {w:+8.4f}   {lookup.get(round(w, 9), 0.0):.5f}  (exact {p:.5f})")
print(f"mean work {report.estimates['mean_work']:+.5f} "
      f"+- {report.standard_errors['mean_work']:.5f}")

light = light_ancilla_moments(exact, kappa=2.0, sigma=1.0, beta=beta)
print(f"\nlight-quadrature readout: <X> = {light['X_mean']:+.5f}, "
      f"Jarzynski correction {light['jarzynski_correction']:.6f} (= e^0.125)")

theta = np.pi / 4
U_spin = np.array([[np.cos(theta), -np.sin(theta)],
                   [np.sin(theta), np.cos(theta)]], dtype=complex)
rho_spin = np.diag([0.7, 0.3]).astype(complex)
peaks = bec_four_peak_distribution(rho_spin, U_spin,
                                   MomentumKick(1.0), MomentumKick(1.5))
print("\ncondensate four-peak momentum pattern:")
for dp, p in zip(peaks.atoms_dx, peaks.atoms_weight):
    print(f"  delta p = {dp:+.2f}   weight {p:.4f}")
