"""Ramsey interferometry readout of the work characteristic function.

An auxiliary qubit is swept through Hadamard - conditional evolution -
Hadamard while the qubit field-ramp model runs; <sigma_z> and <sigma_y>
of the ancilla trace out Re chi and Im chi.  The characteristic function
is then inverted on its known support to recover the work atoms.
"""

import numpy as np

from qworkmeter import (
    NmrModel,
    evolve,
    invert_characteristic,
    nmr_schedule,
    run_ramsey,
    thermal_state,
    tmp_distribution,
    CharacteristicFunctionSamples,
)

beta = 1.0
sch = nmr_schedule(NmrModel(nu1=1.0, nu2=1.8, tau=0.1))
H0, HT = sch.initial_hamiltonian, sch.final_hamiltonian
U = evolve(sch)
rho0 = thermal_state(H0, beta)

lambdas = np.linspace(0.0, 1.5, 48)
outcomes = run_ramsey(rho0, H0, HT, U, lambdas)
print("lambda    <sigma_z>   <sigma_y>")
for out in outcomes[::8]:
    print(f"{out.lam:5.2f}    {out.sigma_z:+.5f}    {out.sigma_y:+.5f}")

chi = CharacteristicFunctionSamples(lambdas, np.array([o.chi for o in outcomes]))
e0 = np.linalg.eigvalsh(H0)
eT = np.linalg.eigvalsh(HT)
support = np.unique(np.round((eT[:, None] - e0[None, :]).ravel(), 12))
inv = invert_characteristic(chi, support)

exact = tmp_distribution(rho0, H0, HT, U)
print(f"\ninversion residual {inv.residual:.2e}, condition {inv.condition:.1f}")
print("recovered vs exact atoms:")
lookup = dict(zip(np.round(exact.w, 9), exact.weights))
for w, p in zip(inv.distribution.w, inv.distribution.weights):
    print(f"  W = {w:+8.4f}   P = {p:.6f}   (exact {lookup.get(round(w, 9), 0.0):.6f})")
