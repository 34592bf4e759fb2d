"""Schreier diagrams, action tables and reduction relations for the coset examples."""
import argparse

from grouplattice.coset import build_coset_diagram, reduction_relations
from grouplattice.groups import build_group
from grouplattice.lattice import GroupLattice, export_dot

EXAMPLES = [
    ("S(3)", ["(12)", "(13)", "(23)"], ["e", "(12)"]),
    ("S(3)", ["(12)", "(13)", "(23)"], ["e", "(123)", "(132)"]),
    ("Z(6)", ["1", "2", "3"], ["0", "2", "4"]),
    ("S(4)", ["(12)", "(13)", "(14)", "(23)", "(24)", "(34)"], ["e", "(123)", "(132)"]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dot", action="store_true", help="also print the Schreier diagrams")
    args = parser.parse_args()
    for spec, S, H in EXAMPLES:
        L = GroupLattice(build_group(spec), S)
        D = build_coset_diagram(L, H)
        print(f"{spec} S={','.join(S)} H={{{','.join(H)}}}: {D.size} cosets")
        for K in range(D.size):
            members = ",".join(L.label(g) for g in D.cosets[K])
            row = " ".join(f"{D.label(int(D.action[K, i])):>10}" for i in range(L.k))
            print(f"  {D.label(K):>10} {{{members}}}\n  {'':>10} {row}")
        for r in reduction_relations(D):
            print(f"  {r.describe(D)}  closed={r.closed}")
        if args.dot:
            print(export_dot(D, name="schreier"))


if __name__ == "__main__":
    main()
