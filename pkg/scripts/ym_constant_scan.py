"""Compare the quadrangle identity coefficient |g|^2 (inner product) with 3|g|.

For each lattice the script evaluates the trace expansion at W = θ with both
constants and at a random unitary W against the direct inner-product action.
"""
import argparse

import numpy as np

from grouplattice.gauge import GaugeField, yang_mills_action, yang_mills_trace_expansion
from grouplattice.groups import build_group
from grouplattice.lattice import GroupLattice

LATTICES = [
    ("Z(4)", ["1", "2"]),
    ("Z(6)", ["1", "2", "3"]),
    ("S(3)", ["(12)", "(13)", "(23)"]),
    ("A(4)", ["(123)", "(243)", "(134)", "(142)"]),
    ("S(4)", ["(12)", "(13)", "(14)", "(23)", "(24)", "(34)"]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'group':6} {'plaquettes per class':22} {'S(θ) |g|^2':>11} {'S(θ) 3|g|':>10} {'random: direct':>15} {'expansion':>10}")
    for spec, S in LATTICES:
        L = GroupLattice(build_group(spec), S)
        mults = sorted({len(p) for g, p in L.pairs_by_product.items() if not L.in_S_e(g)})
        trivial = GaugeField.trivial(L, args.m)
        sq = yang_mills_trace_expansion(trivial)
        three_g = yang_mills_trace_expansion(trivial, lambda mult: 3 * mult)
        Wf = GaugeField.random_unitary(L, args.m, rng)
        print(f"{spec:6} {str(mults):22} {sq:11.4g} {three_g:10.4g} {yang_mills_action(Wf):15.6f} "
              f"{yang_mills_trace_expansion(Wf):10.6f}")


if __name__ == "__main__":
    main()
