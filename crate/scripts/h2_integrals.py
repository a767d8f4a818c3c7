"""Write STO-3G H2 integrals in the `c`/`h`/`V` text format read by `qipa`.

Spin orbitals are interleaved (2P + spin). Two-body lines carry
V_ijkl = (ij|kl)/2 for the term a+_i a+_k a_l a_j. The FCI energy goes into a
header comment so the qubit Hamiltonian can be cross-checked.

    python scripts/h2_integrals.py data/h2 0.5 0.74 1.0 1.5 2.0 2.5
"""

import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, scf

CUTOFF = 1e-12


def integrals(r):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis="sto-3g", unit="angstrom", verbose=0)
    mf = scf.RHF(mol).run()
    c = mf.mo_coeff
    h = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])
    e_fci = fci.FCI(mf).kernel()[0]
    return mol.energy_nuc(), h, eri, e_fci


def render(r):
    e_nuc, h, eri, e_fci = integrals(r)
    n = h.shape[0]
    lines = [
        f"# H2 STO-3G, R = {r} angstrom, {2 * n} spin orbitals (interleaved)",
        f"# fci_energy {e_fci:.12f}",
        f"c {e_nuc:.12f}",
    ]
    for p in range(2 * n):
        for q in range(2 * n):
            if p % 2 == q % 2 and abs(h[p // 2, q // 2]) > CUTOFF:
                lines.append(f"h {p} {q} {h[p // 2, q // 2]:.12f}")
    for i in range(2 * n):
        for j in range(2 * n):
            if i % 2 != j % 2:
                continue
            for k in range(2 * n):
                for l in range(2 * n):
                    if k % 2 != l % 2:
                        continue
                    v = 0.5 * eri[i // 2, j // 2, k // 2, l // 2]
                    if abs(v) > CUTOFF:
                        lines.append(f"V {i} {j} {k} {l} {v:.12f}")
    return "\n".join(lines) + "\n"


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for r in sys.argv[2:]:
        (out / f"h2_r{r}.int").write_text(render(float(r)))


if __name__ == "__main__":
    main()
