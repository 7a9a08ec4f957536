"""Degenerate electron gas: exact root vs closed forms across k.

Sweeps the fully degenerate branch for a metallic-density electron gas and
prints how the exact root sits between the small-k expansion and the bare
plasma frequency, with and without the quantum-pressure term.  Run with
--csv to dump the table instead of pretty-printing it.
"""
import argparse
import math

import numpy as np

from disperse import (
    BranchId,
    SpeciesParams,
    Statistics,
    derive_scales,
    omega_degenerate_bohm_gross,
    omega_quantum_langmuir,
    sweep,
)

M_E = 9.1093837015e-31
Q_E = 1.602176634e-19


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--density", type=float, default=1e28, help="electrons per m^3")
    parser.add_argument("--points", type=int, default=25)
    parser.add_argument("--csv", action="store_true")
    args = parser.parse_args()

    gas = SpeciesParams(mass=M_E, charge=-Q_E, spin_degeneracy=2,
                        density=args.density, temperature=0.0,
                        statistics=Statistics.FERMI)
    scales = derive_scales(gas)
    print(f"# Omega_p = {scales.omega_p:.6e} rad/s, v_F = {scales.v_ch:.6e} m/s")

    unit_k = scales.omega_p / scales.v_ch
    k_grid = np.linspace(0.02, 0.9, args.points) * unit_k
    exact = sweep(k_grid, BranchId.ExactDegenerate, gas, scales)
    exact_off = sweep(k_grid, BranchId.ExactDegenerate, gas, scales, bohm_term=False)

    header = "k*vF/Op, omega/Op, omega_hbar_off/Op, bohm_gross/Op, langmuir/Op, iters"
    sep = "," if args.csv else "  "
    print(header if args.csv else header.replace(",", " "))
    for res, off in zip(exact, exact_off):
        k = res.k
        row = (
            f"{k / unit_k:9.4f}{sep}{res.rate.omega / scales.omega_p:12.8f}"
            f"{sep}{off.rate.omega / scales.omega_p:12.8f}"
            f"{sep}{omega_degenerate_bohm_gross(k, scales) / scales.omega_p:12.8f}"
            f"{sep}{omega_quantum_langmuir(k, scales) / scales.omega_p:12.8f}"
            f"{sep}{res.iterations}"
        )
        print(row)

    quantum_shift = exact[-1].rate.omega / exact_off[-1].rate.omega - 1.0
    print(f"# quantum-pressure shift at k*vF = 0.9*Op: {quantum_shift * 100:.3f}%")


if __name__ == "__main__":
    main()
