"""Neutral degenerate fermions: the sound-like branch above the edge velocity.

Scans the neutral gas where the only restoring force is quantum pressure and
prints the phase velocity of the exact root against the closed-form branch.
The phase velocity stays pinned just above the edge velocity; the k -> 0
limit of the closed form is v_F (1 + 2 e^-2).
"""
import math

import numpy as np

from disperse import (
    BranchId,
    SpeciesParams,
    Statistics,
    derive_scales,
    omega_zero_sound,
    sweep,
)

M_E = 9.1093837015e-31
HBAR = 1.054571817e-34


def main() -> None:
    gas = SpeciesParams(mass=M_E, charge=0.0, spin_degeneracy=2,
                        density=1e28, temperature=0.0, statistics=Statistics.FERMI)
    scales = derive_scales(gas)
    v_f = scales.v_ch
    print(f"# neutral gas, v_F = {v_f:.6e} m/s, limit v_phi/v_F -> {1 + 2 * math.exp(-2):.6f}")

    # kappa = hbar k / (2 m v_F) is the natural wavenumber here
    kappa = np.linspace(0.45, 0.8, 15)
    k_grid = kappa * 2.0 * M_E * v_f / HBAR
    exact = sweep(k_grid, BranchId.ExactDegenerate, gas, scales)

    print("kappa    v_phi/v_F (exact)  v_phi/v_F (closed)  iters")
    for kap, res in zip(kappa, exact):
        closed = omega_zero_sound(res.k, scales) / (res.k * v_f)
        print(f"{kap:6.3f}  {res.rate.omega / (res.k * v_f):17.10f}"
              f"  {closed:18.10f}  {res.iterations}")


if __name__ == "__main__":
    main()
