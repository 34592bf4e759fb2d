"""Torsion and curvature survey: canonical, zero, identity and random connections."""
import argparse

import numpy as np

from grouplattice.groups import build_group
from grouplattice.lattice import GroupLattice
from grouplattice.lincon import (LinearConnection, first_bianchi_residual, second_bianchi_residual,
                                 torsion_report, transport_invertibility)

LATTICES = [
    ("Z(4)", ["1", "2"]),
    ("Z(6)", ["1", "2", "3"]),
    ("S(3)", ["(12)", "(13)", "(23)"]),
    ("A(4)", ["(123)", "(243)", "(134)", "(142)"]),
    ("Z(3)xZ(3)", ["(0,1)", "(1,0)"]),
]


def identity(L):
    V = np.zeros((L.n, L.k, L.k, L.k), dtype=complex)
    for b in range(L.k):
        V[:, :, b, :] = np.eye(L.k)
    return LinearConnection(L, V)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    for spec, S in LATTICES:
        L = GroupLattice(build_group(spec), S)
        print(f"{spec} S={','.join(S)}")
        for name, C in [("canonical", LinearConnection.canonical(L)), ("zero", LinearConnection.zero(L)),
                        ("identity", identity(L))]:
            r = torsion_report(C)
            inv = transport_invertibility(C)
            print(f"  {name:9} biangle={r.biangle_free!s:5} triangle={r.triangle_free!s:5} "
                  f"quadrangle={r.quadrangle_free!s:5} invertible transport={bool(inv)}")
        worst = 0.0
        for _ in range(args.trials):
            C = LinearConnection.random(L, rng)
            worst = max(worst, second_bianchi_residual(C), *(first_bianchi_residual(C, h) for h in L.S))
        print(f"  random    max Bianchi residual over {args.trials} connections: {worst:.2e}")


if __name__ == "__main__":
    main()
