"""Print the worked lattice examples: classification, 2-form counts and bicovariance."""
import argparse

from grouplattice.cli import cmd_analyze, RunConfig
from grouplattice.jsonio import dumps

EXAMPLES = [
    ("Z(2)", ["1"]),
    ("Z(4)", ["1", "2"]),
    ("Z(6)", ["1", "2", "3"]),
    ("S(3)", ["(12)", "(13)", "(23)"]),
    ("A(4)", ["(123)", "(243)", "(134)", "(142)"]),
    ("S(4)", ["(12)", "(13)", "(14)", "(23)", "(24)", "(34)"]),
    ("A(5)", ["(12345)", "(15432)", "(12)(34)"]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", action="store_true", help="print full reports")
    args = parser.parse_args()
    for group, S in EXAMPLES:
        report = cmd_analyze(RunConfig(command="analyze", group=group, S=S))
        if args.json:
            print(dumps(report), end="")
            continue
        poly = report["polygons"]
        print(f"{group:6} S={','.join(S):34} sites={report['order']:3} bicovariant={report['bicovariant']!s:5} "
              f"relations={report['two_form_relations']:2} independent={report['independent_2forms']:2} "
              f"biangles={poly['biangles']} triangles={poly['triangles']} quadrangle classes={poly['quadrangle_classes']}")


if __name__ == "__main__":
    main()
