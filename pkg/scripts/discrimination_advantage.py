"""Advantage of an asymmetric probe in guessing a phase rotation.

For each random probe the optimal success probability is compared with the
symmetric-probe baseline over a grid of priors; the largest ratio should sit
at the flat prior and equal 1 + RoA. A second part adds a dephasing channel
and a random covariant channel to the list and reports the (bounded) ratio.
"""

import argparse
import sys

import numpy as np

from coherence_forge import CyclicRep, QuantumChannel, SeededSource, random_density_matrix
from coherence_forge.discrimination import (
    DiscriminationGame,
    advantage_ratio,
    optimal_success_probability,
    prior_grid,
    symmetric_baseline,
)
from coherence_forge.randgen import random_covariant_channel
from coherence_forge.robustness import robustness_of_asymmetry


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--probes", type=int, default=5)
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)

    rep = CyclicRep(args.d)
    src = SeededSource(args.seed)
    grid = prior_grid(rep.order, args.grid, src.spawn(0))
    print(f"group Z_{args.d}, {len(grid)} priors (first is flat)")
    print(f"{'probe':>5} {'1+RoA':>10} {'ratio@flat':>11} {'max ratio':>10} {'argmax':>7}")
    for k in range(args.probes):
        probe = random_density_matrix(args.d, None, src.spawn(k + 1))
        roa = robustness_of_asymmetry(rep, probe).value
        ratios = [advantage_ratio(DiscriminationGame(rep, q, probe)) for q in grid]
        best = int(np.argmax(ratios))
        print(f"{k:5d} {1 + roa:10.6f} {ratios[0]:11.6f} {max(ratios):10.6f} {best:7d}")

    print("\nchannel list: group conjugations + full dephasing + random covariant channel")
    chans = [QuantumChannel.unitary(u) for u in rep.unitaries]
    chans += [QuantumChannel.dephasing(args.d), random_covariant_channel(rep, src.spawn(99))]
    for k in range(args.probes):
        csrc = src.spawn(200 + k)
        probe = random_density_matrix(args.d, None, csrc)
        priors = csrc.dirichlet(len(chans))
        game = DiscriminationGame(rep, priors, probe, tuple(chans))
        value, _ = optimal_success_probability(game)
        base = symmetric_baseline(game, src=csrc)
        roa = robustness_of_asymmetry(rep, probe).value
        print(f"{k:5d} p_succ={value:.6f} baseline={base.value:.6f} ({base.restarts} restarts) ratio={value / base.value:.6f} <= {1 + roa:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
