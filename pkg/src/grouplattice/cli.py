"""Command-line front end: ``grouplattice {analyze,dot,coset,ym,check}``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .checks import run_suites
from .coset import build_coset_diagram, reduction_relations
from .gauge import GaugeField, yang_mills
from .groups import DEFAULT_ORDER_CAP, build_group, split_top_level
from .jsonio import dumps, gauge_from_json
from .lattice import (DEFAULT_GRADE_CAP, DEFAULT_TOL, GroupLattice, classification_report,
                      connected_components, enumerate_polygons, export_dot, is_bicovariant, is_universal)


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    S: list[str] = field(default_factory=list)
    H: list[str] = field(default_factory=list)
    m: int = 1
    seed: int = 0
    tol: float = DEFAULT_TOL
    grade_cap: int = DEFAULT_GRADE_CAP
    order_cap: int = DEFAULT_ORDER_CAP
    trials: int = 100
    config: str | None = None
    random_w: bool = False
    out: str | None = None
    format: str = "json"

    def lattice(self) -> GroupLattice:
        if not self.group or not self.S:
            raise ValueError("--group and --s are required")
        G = build_group(self.group, order_cap=self.order_cap)
        return GroupLattice(G, self.S, tol=self.tol, grade_cap=self.grade_cap)


def _elements(text: str | None) -> list[str]:
    return split_top_level(text) if text else []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grouplattice",
                                     description="Differential calculi on finite group lattices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_lattice=True):
        p.add_argument("--group", required=need_lattice, help='group spec, e.g. "S(3)" or "Z(3)xZ(3)"')
        p.add_argument("--s", required=need_lattice, help='comma separated elements, e.g. "(12),(13),(23)"')
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--grade-cap", type=int, default=DEFAULT_GRADE_CAP)
        p.add_argument("--order-cap", type=int, default=DEFAULT_ORDER_CAP)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "dot"), default="json")

    common(sub.add_parser("analyze", help="classification, bicovariance and 2-form counts"))
    common(sub.add_parser("dot", help="DOT export of the lattice"))
    p = sub.add_parser("coset", help="Schreier diagram, action table and reduction relations")
    common(p)
    p.add_argument("--h", required=True, help="subgroup elements")
    for name in ("ym", "ym-eval"):
        p = sub.add_parser(name, help="Yang-Mills action of a gauge configuration")
        common(p, need_lattice=False)
        p.add_argument("--config", help="gauge configuration JSON; without it W = θ")
        p.add_argument("--m", type=int, default=1)
        p.add_argument("--seed", type=int, help="use a seeded random unitary W instead of W = θ")
    p = sub.add_parser("check", help="seeded invariant suites")
    common(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = "ym" if args.command == "ym-eval" else args.command
    cfg = RunConfig(command=command, group=args.group, S=_elements(args.s), tol=args.tol,
                    grade_cap=args.grade_cap, order_cap=args.order_cap, out=args.out, format=args.format)
    if hasattr(args, "h"):
        cfg.H = _elements(args.h)
    for name in ("m", "trials", "config"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    cfg.random_w = command == "ym" and getattr(args, "seed", None) is not None
    return cfg


def cmd_analyze(cfg: RunConfig) -> dict:
    L = cfg.lattice()
    G = L.group
    bicov = is_bicovariant(L)
    comps = connected_components(L)
    poly = enumerate_polygons(L)
    report = {
        "group": G.name,
        "order": G.order,
        "S": [L.label(h) for h in L.S],
        "out_degree": L.k,
        "components": len(comps),
        "connected": len(comps) == 1,
        "universal": is_universal(L),
        "bicovariant": bool(bicov),
        "classification": classification_report(L),
        "polygons": {
            "biangles": len(poly.biangles),
            "triangles": len(poly.triangles),
            "quadrangle_classes": len(poly.quadrangles),
        },
        "two_form_relations": len(L.S2),
        "independent_2forms": L.independent_2form_count(),
    }
    if not bicov:
        g, h, image = bicov.witness
        report["bicovariance_witness"] = {"g": L.label(g), "h": L.label(h), "ad_g_h": L.label(image)}
    return report


def cmd_dot(cfg: RunConfig) -> str:
    return export_dot(cfg.lattice())


def cmd_coset(cfg: RunConfig):
    L = cfg.lattice()
    D = build_coset_diagram(L, cfg.H)
    if cfg.format == "dot":
        return export_dot(D, name="schreier")
    rels = reduction_relations(D)
    return {
        "group": L.group.name,
        "S": [L.label(h) for h in L.S],
        "H": sorted(L.label(h) for h in D.H),
        "cosets": [{"label": D.label(K), "members": [L.label(g) for g in D.cosets[K]]}
                   for K in range(D.size)],
        "action_table": D.action_table(),
        "loops": [{"coset": D.label(K), "h": L.label(h)} for K, h in D.loops()],
        "multi_edges": [{"from": D.label(a), "to": D.label(b), "h": [L.label(h) for h in hs]}
                        for (a, b), hs in sorted(D.multi_edges().items())],
        "relations": [{"kind": r.kind, "text": r.describe(D), "closed": r.closed} for r in rels],
        "dot": export_dot(D, name="schreier"),
    }


def cmd_ym(cfg: RunConfig) -> dict:
    if cfg.config:
        with open(cfg.config, encoding="utf-8") as fh:
            gc = gauge_from_json(json.load(fh), tol=cfg.tol, grade_cap=cfg.grade_cap)
        L, Wf = gc.lattice, gc.field
    else:
        L = cfg.lattice()
        if cfg.random_w:
            Wf = GaugeField.random_unitary(L, cfg.m, np.random.default_rng(cfg.seed))
        else:
            Wf = GaugeField.trivial(L, cfg.m)
    res = yang_mills(Wf)
    out = {
        "group": L.group.name,
        "S": [L.label(h) for h in L.S],
        "m": Wf.m,
        "S_YM": _num(res.action),
        "breakdown": {
            "biangle": _num(res.biangle),
            "triangle": {L.label(g): _num(v) for g, v in res.triangle.items()},
            "quadrangle": {L.label(g): _num(v) for g, v in res.quadrangle.items()},
        },
        "unitary": Wf.is_unitary(),
    }
    if cfg.random_w:
        out["seed"] = cfg.seed
    return out


def cmd_check(cfg: RunConfig) -> dict:
    L = cfg.lattice()
    results = run_suites(L, cfg.seed, trials=cfg.trials, m=cfg.m)
    return {
        "group": L.group.name,
        "S": [L.label(h) for h in L.S],
        "seed": cfg.seed,
        "trials": cfg.trials,
        "suites": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }


def _num(x: float, digits: int = 12) -> float:
    # round away float noise so reruns are byte-identical
    v = round(float(x), digits)
    return 0.0 if v == 0.0 else v


COMMANDS = {"analyze": cmd_analyze, "dot": cmd_dot, "coset": cmd_coset, "ym": cmd_ym, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = COMMANDS[cfg.command](cfg)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"grouplattice: error: {msg}", file=sys.stderr)
        return 2
    text = result if isinstance(result, str) else dumps(result)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "check" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
