"""Command-line front end.

Exit codes: 0 pass, 1 mathematical failure (counterexample), 2 budget exceeded, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import grpsites as gs
from . import linmod as lm
from . import serialize as io
from . import sites as st
from .fincat import DEFAULT_NAT_BUDGET, BudgetExceeded, CFunctor, left_kan, right_kan
from .groups import AxiomError
from .report import Report, jsonable

EXIT_PASS, EXIT_FAIL, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    poset: str | None = None
    quotient: str = "orbit"
    kernels: str | None = None
    category: str | None = None
    site_file: str | None = None
    site: str = "c"
    topology: str = "atomic"
    inputs: list[str] = field(default_factory=list)
    nat_budget: int = DEFAULT_NAT_BUDGET
    sieve_budget: int = st.DEFAULT_SIEVE_BUDGET
    materialize_cap: int = lm.DEFAULT_MATERIALIZE_CAP
    seed: int = 0
    output: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        for name in ("nat_budget", "sieve_budget", "materialize_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def budgets(self) -> dict:
        return {"nat": self.nat_budget, "sieve": self.sieve_budget, "materialize": self.materialize_cap}


def _env_int(name: str, default: int) -> int:
    v = os.environ.get(name)
    return int(v) if v else default


# ----------------------------------------------------------------- contexts


def _bundle(cfg: RunConfig) -> gs.GroupSiteBundle:
    G = io.load_group(cfg.group)
    poset = io.parse_poset(cfg.poset)
    if isinstance(poset, dict):
        poset = io.gposet_from_json(poset, G)
    kernels = None
    if cfg.kernels:
        raw = io.read_json(cfg.kernels)
        kernels = [[G.element(k) if isinstance(k, str) else int(k) for k in ks] for ks in raw["kernels"]]
    b = gs.build_bundle(G, poset, cfg.quotient, kernels)
    for site in (b.g_site, b.pg_site, b.c_site):
        site.sieve_budget = cfg.sieve_budget
    return b


def _site(cfg: RunConfig) -> tuple[st.Site, gs.GroupSiteBundle | None]:
    """The site named by ``--site`` on the group bundle, or a site from a category file."""
    if cfg.site_file:
        s = io.site_from_json(io.read_json(cfg.site_file), Path(cfg.site_file).parent)
        s.sieve_budget = cfg.sieve_budget
        return s, None
    if cfg.category:
        C = io.category_from_json(io.read_json(cfg.category))
        top = st.TRIVIAL if cfg.topology == "trivial" else st.ATOMIC
        return st.Site(C, top, None, Path(cfg.category).stem, cfg.sieve_budget), None
    b = _bundle(cfg)
    s = {"c": b.c_site, "pg": b.pg_site, "g": b.g_site}[cfg.site]
    if cfg.topology == "trivial":
        s = st.Site(s.cat, st.TRIVIAL, s.initial, s.name + " (trivial)", cfg.sieve_budget)
    return s, b


def _report_doc(cfg: RunConfig, sections: dict[str, Report], extra: dict | None = None) -> dict:
    ok = all(r.ok for r in sections.values())
    doc = {"schema": io.SCHEMA["report"], "command": cfg.command, "status": "pass" if ok else "fail",
           "seed": cfg.seed, "budgets": cfg.budgets(),
           "sections": {k: r.to_json() for k, r in sections.items()}}
    if extra:
        doc.update(jsonable(extra))
    return doc


def _exit_for(doc: dict) -> int:
    if doc.get("status") == "pass":
        return EXIT_PASS
    for sec in doc.get("sections", {}).values():
        if "budget" in (sec.get("witness") or {}):
            return EXIT_BUDGET
    return EXIT_FAIL


# ----------------------------------------------------------------- commands


def cmd_build(cfg: RunConfig) -> tuple[dict | str, int]:
    b = _bundle(cfg)
    if cfg.fmt == "dot":
        return b.c_site.cat.to_dot(b.c_site.name), EXIT_PASS
    C = b.c_site.cat
    doc = {"schema": io.SCHEMA["bundle"], "status": "pass", "name": b.name, "group": io.group_to_json(b.group),
           "descriptor": {"group": cfg.group, "poset": cfg.poset or "all-subgroups", "quotient": cfg.quotient},
           "x0": b.x0, "objects": [str(l) for l in C.object_labels],
           "counts": {"C": [C.n_objects, C.n_morphisms], "PG": [b.pg_site.cat.n_objects, b.pg_site.cat.n_morphisms],
                      "G": [1, b.group.order]},
           "kernels": [sorted(k) for k in b.extension.kernels],
           "categories": {"C": io.category_to_json(C), "PG": io.category_to_json(b.pg_site.cat)}}
    return doc, EXIT_PASS


def cmd_check(cfg: RunConfig, args) -> tuple[dict, int]:
    sections: dict[str, Report] = {}
    if args.ore and not (cfg.category or cfg.site_file) and cfg.poset and not cfg.poset.startswith(("all", "p-")):
        # posets without initial object still give a transporter category to test
        G = io.load_group(cfg.group)
        P = io.gposet_from_json(io.read_json(cfg.poset), G)
        sections["ore"] = st.ore_condition(gs.transporter_category(P).cat)
        return _report_doc(cfg, sections), None
    site, b = _site(cfg)
    if args.topology_axioms or args.topology == "axioms":
        sections["topology"] = st.check_topology_axioms(site)
    if args.ore:
        sections["ore"] = st.ore_condition(site.cat)
    if args.continuity:
        if b is None:
            raise ValueError("--continuity needs a group bundle")
        pic = gs.is_continuous(b.pi, b.pg_site, b.g_site)
        sections["pi_continuous"] = pic
        sections["pi_cocontinuous"] = gs.is_cocontinuous(b.pi, b.pg_site, b.g_site)
        sections["rho_cocontinuous"] = gs.is_cocontinuous(b.rho, b.pg_site, b.c_site)
    for path in args.sheaf or []:
        F = io.presheaf_from_json(io.read_json(path), site.cat)
        sections[f"sheaf:{Path(path).name}"] = st.is_sheaf(F, site, args.method, cfg.nat_budget)
    if not sections:
        sections["topology"] = st.check_topology_axioms(site)
    return _report_doc(cfg, sections, {"site": site.name}), None


def cmd_verify(cfg: RunConfig, args) -> tuple[dict, int]:
    b = _bundle(cfg)
    G = b.group
    sections: dict[str, Report] = {}
    if args.artin or not args.module:
        bound = args.bound if args.bound is not None else G.order
        sections["artin"] = gs.verify_artin(b, bound, args.n_sheaves, cfg.seed, cfg.nat_budget)
    if args.module:
        R = lm.ring(args.ring)
        rb = args.rank_bound if args.rank_bound is not None else G.order
        sections["module"] = lm.verify_module_equivalence(G, R, b, rb, args.n_module_sheaves, cfg.seed,
                                                          cfg.materialize_cap)
    return _report_doc(cfg, sections, {"bundle": b.name}), None


def cmd_sheafify(cfg: RunConfig, args) -> tuple[dict, int]:
    site, _ = _site(cfg)
    F = io.presheaf_from_json(io.read_json(args.presheaf), site.cat)
    sh = st.sheafify(F, site, args.method, cfg.nat_budget)
    doc = io.presheaf_to_json(sh.presheaf)
    doc.update({"status": "pass", "unit": [list(c) for c in sh.unit], "seed": cfg.seed})
    return doc, EXIT_PASS


def cmd_kan(cfg: RunConfig, args) -> tuple[dict, int]:
    b = _bundle(cfg)
    alpha: CFunctor = b.pi if args.functor == "pi" else b.rho
    F = io.presheaf_from_json(io.read_json(args.presheaf), alpha.source)
    K = left_kan(alpha, F) if args.direction == "left" else right_kan(alpha, F, cfg.nat_budget)
    doc = io.presheaf_to_json(K.presheaf)
    doc.update({"status": "pass", "functor": args.functor, "direction": args.direction,
                "unit": [list(c) for c in K.unit]})
    return doc, EXIT_PASS


def cmd_export_dot(cfg: RunConfig, args) -> tuple[str, int]:
    site, _ = _site(cfg)
    return site.cat.to_dot(site.name.replace('"', "")), EXIT_PASS


# ------------------------------------------------------------------- parser


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grpsheaves", description="Sheaves on finite group sites.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, bundle=True):
        sp.add_argument("--group", help="builtin name (z2, z3, z4, s3, d4, ...) or group JSON file")
        if bundle:
            sp.add_argument("--poset", help="all-subgroups | p-subgroups:P | G-poset JSON file")
            sp.add_argument("--quotient", default="orbit", choices=["orbit", "transporter"])
            sp.add_argument("--kernels", help="JSON file {'kernels': [[elements], ...]} for a custom quotient")
        sp.add_argument("--nat-budget", type=int, default=_env_int("SHEAFSITE_NAT_BUDGET", DEFAULT_NAT_BUDGET))
        sp.add_argument("--sieve-budget", type=int,
                        default=_env_int("SHEAFSITE_SIEVE_BUDGET", st.DEFAULT_SIEVE_BUDGET))
        sp.add_argument("--materialize-cap", type=int,
                        default=_env_int("SHEAFSITE_MATERIALIZE_CAP", lm.DEFAULT_MATERIALIZE_CAP))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", default="json", choices=["json", "text", "dot"])

    def site_args(sp):
        sp.add_argument("--site", default="c", choices=["c", "pg", "g"], help="quotient, transporter, one-object")
        sp.add_argument("--category", help="category JSON file (instead of a group bundle)")
        sp.add_argument("--site-file", help="site JSON file")
        # a bare --topology asks for the axiom check on the (atomic) site
        sp.add_argument("--topology", nargs="?", const="axioms", default="atomic",
                        choices=["atomic", "trivial", "axioms"])

    b = sub.add_parser("build", help="build and validate a bundle")
    common(b)
    b.add_argument("--dot", action="store_true", help="emit DOT of the quotient category")

    c = sub.add_parser("check", help="run checkers on a site")
    common(c)
    site_args(c)
    c.add_argument("--topology-axioms", "--axioms", dest="topology_axioms", action="store_true")
    c.add_argument("--ore", action="store_true")
    c.add_argument("--continuity", action="store_true")
    c.add_argument("--sheaf", action="append", help="presheaf JSON to test (repeatable)")
    c.add_argument("--method", default="auto", choices=["auto", "fast", "definitional"])

    v = sub.add_parser("verify", help="verify the G-set and module equivalences")
    common(v)
    v.add_argument("--artin", action="store_true")
    v.add_argument("--module", action="store_true")
    v.add_argument("--bound", type=int)
    v.add_argument("--n-sheaves", type=int, default=20)
    v.add_argument("--ring", default="F2")
    v.add_argument("--rank-bound", type=int)
    v.add_argument("--n-module-sheaves", type=int, default=4)

    s = sub.add_parser("sheafify", help="sheafify a presheaf")
    common(s)
    site_args(s)
    s.add_argument("--presheaf", required=True)
    s.add_argument("--method", default="auto", choices=["auto", "fast", "general"])

    k = sub.add_parser("kan", help="pointwise Kan extension along pi or rho")
    common(k)
    k.add_argument("--functor", choices=["pi", "rho"], default="pi")
    k.add_argument("--direction", choices=["left", "right"], default="left")
    k.add_argument("--presheaf", required=True, help="presheaf on the transporter category")

    d = sub.add_parser("export-dot", help="DOT graph of a site's category")
    common(d)
    site_args(d)
    return p


def _config(args) -> RunConfig:
    return RunConfig(command=args.command, group=args.group, poset=getattr(args, "poset", None),
                     quotient=getattr(args, "quotient", "orbit"), kernels=getattr(args, "kernels", None),
                     category=getattr(args, "category", None), site_file=getattr(args, "site_file", None),
                     site=getattr(args, "site", "c"),
                     topology="atomic" if getattr(args, "topology", None) in (None, "axioms") else args.topology,
                     nat_budget=args.nat_budget, sieve_budget=args.sieve_budget,
                     materialize_cap=args.materialize_cap, seed=args.seed, output=args.out,
                     fmt="dot" if getattr(args, "dot", False) else args.format)


def render_text(doc: dict) -> str:
    lines = [f"{doc.get('command', doc.get('schema'))}: {doc.get('status')}"]
    for name, sec in doc.get("sections", {}).items():
        lines.append(f"  {name}: {sec['status']}")
        if "witness" in sec:
            lines.append(f"    witness: {json.dumps(sec['witness'], sort_keys=True)}")
        for k, v in sorted(sec.get("details", {}).items()):
            lines.append(f"    {k}: {json.dumps(v, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, out: dict | str) -> None:
    if isinstance(out, str):
        text = out
    elif cfg.fmt == "text":
        text = render_text(out)
    else:
        text = io.dumps(out)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if cfg.group is None and cfg.command in ("build", "verify", "kan"):
            raise ValueError("--group is required")
        if cfg.command in ("check", "sheafify", "export-dot") and not (cfg.group or cfg.category or cfg.site_file):
            raise ValueError("need --group, --category or --site-file")
        handlers = {"build": lambda: cmd_build(cfg), "check": lambda: cmd_check(cfg, args),
                    "verify": lambda: cmd_verify(cfg, args), "sheafify": lambda: cmd_sheafify(cfg, args),
                    "kan": lambda: cmd_kan(cfg, args), "export-dot": lambda: cmd_export_dot(cfg, args)}
        out, code = handlers[cfg.command]()
        if code is None:
            code = _exit_for(out)
    except BudgetExceeded as exc:
        out, code = {"schema": io.SCHEMA["error"], "status": "budget", "error": str(exc)}, EXIT_BUDGET
        cfg = locals().get("cfg") or RunConfig(args.command)
    except AxiomError as exc:
        out = {"schema": io.SCHEMA["error"], "status": "invalid", "error": str(exc),
               "witness": jsonable(exc.witness)}
        code = EXIT_INPUT
        cfg = locals().get("cfg") or RunConfig(args.command)
    except (ValueError, KeyError, FileNotFoundError, io.SchemaError) as exc:
        out, code = {"schema": io.SCHEMA["error"], "status": "invalid", "error": str(exc)}, EXIT_INPUT
        cfg = locals().get("cfg") or RunConfig(args.command)
    if isinstance(out, dict) and cfg.fmt == "dot":
        cfg.fmt = "json"
    _emit(cfg, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
