"""Where each closed-form bound on the robustness of coherence is tight.

Evaluates the l1 bracket, the f bound and the purity-chain bound on the named
families (maximally coherent, rho_p, pure, X states) and on random states.
"""

import argparse
import sys

import numpy as np

from coherence_forge import CyclicRep, SeededSource, random_density_matrix
from coherence_forge.coherence import bound_report
from coherence_forge.randgen import maximally_coherent_state, random_generalized_x_state, random_pure_state, rho_p_family
from coherence_forge.robustness import roa_value


def row(name, rho):
    rep = bound_report(rho)
    roc = roa_value(CyclicRep(rho.shape[0]), rho)
    print(
        f"{name:<22} {roc:9.5f} {rep.l1_lower:9.5f} {rep.l1_upper:9.5f} {rep.f_bound:9.5f} "
        f"{rep.purity_chain[0]:9.5f} {rep.provenance or '-':>15}"
    )


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--seed", type=int, default=3)
    args = p.parse_args(argv)
    d = args.d
    src = SeededSource(args.seed)
    print(f"{'state':<22} {'RoC':>9} {'C/(d-1)':>9} {'C':>9} {'f(C,d)':>9} {'purity':>9} {'exact class':>15}")
    row("psi+", maximally_coherent_state(d))
    for q in np.linspace(0, 1 / (d - 1), 4):
        row(f"rho_p p={q:.3f}", rho_p_family(d, q))
    for k in range(3):
        row(f"pure #{k}", random_pure_state(d, src))
    for k in range(3):
        row(f"X state #{k}", random_generalized_x_state(d, src))
    for k in range(3):
        row(f"mixed #{k}", random_density_matrix(d, None, src))
    return 0


if __name__ == "__main__":
    sys.exit(main())
