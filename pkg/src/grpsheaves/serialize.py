"""JSON schemas for groups, G-sets, G-posets, categories, presheaves, sites, modules and bundles.

Every document carries a ``"schema"`` field; loaders accept documents without one.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from . import groups as gr
from .fincat import FinCat, Presheaf
from .groups import FiniteGroup, GPoset, GSet
from .linmod import RGModule, ring
from .sites import ATOMIC, TRIVIAL, Site, explicit_topology

SCHEMA = {k: f"grpsheaves/{k}/v1" for k in
          ("group", "gset", "gposet", "category", "presheaf", "site", "module", "bundle", "report", "error")}


class SchemaError(ValueError):
    pass


def read_json(path_or_obj) -> Any:
    if isinstance(path_or_obj, (dict, list)):
        return path_or_obj
    try:
        return json.loads(Path(path_or_obj).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path_or_obj}: invalid JSON ({exc})") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _need(doc: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(f"missing field(s) {missing}")


# ---------------------------------------------------------------------- groups


def group_to_json(G: FiniteGroup) -> dict:
    return {"schema": SCHEMA["group"], "name": G.name, "order": G.order,
            "mul": [list(r) for r in G.mul], "labels": list(G.labels)}


def group_from_json(doc: dict) -> FiniteGroup:
    if "mul" in doc:
        mul = tuple(tuple(int(v) for v in row) for row in doc["mul"])
        if "order" in doc and doc["order"] != len(mul):
            raise SchemaError("order does not match the table")
        labels = tuple(doc.get("labels") or range(len(mul)))
        return FiniteGroup(mul, labels, doc.get("name", "G"))
    if "generators" in doc:
        return FiniteGroup.from_permutations(doc["generators"], doc.get("degree"), doc.get("name", "G"))
    raise SchemaError("group needs 'mul' or 'generators'")


def load_group(spec) -> FiniteGroup:
    """A builtin name (``z2``, ``s3``, ...) or a path / document in the group schema."""
    if isinstance(spec, FiniteGroup):
        return spec
    if isinstance(spec, str):
        key = spec.lower()
        if key.endswith(".json"):
            key = Path(key).stem
        if key in gr.BUILTIN_GROUPS and not Path(spec).exists():
            return gr.BUILTIN_GROUPS[key]()
    return group_from_json(read_json(spec))


# ---------------------------------------------------------------- G-sets etc.


def gset_to_json(M: GSet) -> dict:
    return {"schema": SCHEMA["gset"], "size": M.size, "act": [list(r) for r in M.act]}


def gset_from_json(doc: dict, G: FiniteGroup) -> GSet:
    _need(doc, "act")
    act = tuple(tuple(int(v) for v in row) for row in doc["act"])
    if "size" in doc and doc["size"] != len(act):
        raise SchemaError("size does not match the action table")
    return GSet(G, act, tuple(doc.get("labels") or ()))


def gposet_from_json(doc: dict, G: FiniteGroup | None = None) -> GPoset:
    """``{"group": ..., "carrier": gset, "le": matrix}`` or ``"relations": [[x, y], ...]``
    (reflexive-transitive closure taken)."""
    if G is None:
        _need(doc, "group")
        G = load_group(doc["group"])
    _need(doc, "carrier")
    M = gset_from_json(doc["carrier"], G)
    m = M.size
    if "le" in doc:
        le = [[bool(v) for v in row] for row in doc["le"]]
    else:
        le = [[x == y for y in range(m)] for x in range(m)]
        for x, y in doc.get("relations", []):
            le[x][y] = True
        for k in range(m):
            for i in range(m):
                if le[i][k]:
                    for j in range(m):
                        if le[k][j]:
                            le[i][j] = True
    return GPoset(M, tuple(tuple(r) for r in le))


# ------------------------------------------------------------------ categories


def category_to_json(C: FinCat) -> dict:
    comp = [[f, g, fg] for f in C.morphisms for g, fg in sorted(C.comp[f].items())]
    return {"schema": SCHEMA["category"], "objects": C.n_objects,
            "object_labels": [str(l) for l in C.object_labels],
            "morphisms": [{"dom": C.dom[u], "cod": C.cod[u], "label": str(C.morphism_labels[u])}
                          for u in C.morphisms],
            "identity": list(C.identity), "comp": comp}


def category_from_json(doc: dict) -> FinCat:
    _need(doc, "objects", "morphisms", "identity", "comp")
    mors = doc["morphisms"]
    comp = {(int(f), int(g)): int(fg) for f, g, fg in doc["comp"]}
    dom = [int(m["dom"]) for m in mors]
    cod = [int(m["cod"]) for m in mors]
    missing = [(f, g) for f in range(len(mors)) for g in range(len(mors)) if dom[f] == cod[g] and (f, g) not in comp]
    if missing:
        raise SchemaError(f"composition table is missing composable pairs, e.g. {list(missing[0])}")
    extra = [k for k in comp if dom[k[0]] != cod[k[1]]]
    if extra:
        raise SchemaError(f"composition given for a non-composable pair {list(extra[0])}")
    return FinCat.build(int(doc["objects"]), dom, cod, [int(i) for i in doc["identity"]], comp,
                        tuple(doc.get("object_labels") or ()), tuple(m.get("label", i) for i, m in enumerate(mors)))


def presheaf_to_json(F: Presheaf) -> dict:
    return {"schema": SCHEMA["presheaf"], "sizes": list(F.sizes), "maps": [list(m) for m in F.maps]}


def presheaf_from_json(doc: dict, C: FinCat) -> Presheaf:
    _need(doc, "sizes", "maps")
    return Presheaf(C, tuple(int(s) for s in doc["sizes"]), tuple(tuple(int(v) for v in m) for m in doc["maps"]))


def site_from_json(doc: dict, base: Path | None = None) -> Site:
    _need(doc, "category")
    cat = doc["category"]
    if isinstance(cat, str) and base is not None and not Path(cat).is_absolute():
        cat = str(base / cat)
    C = category_from_json(read_json(cat))
    top = doc.get("topology", "atomic")
    if top == "trivial":
        topology = TRIVIAL
    elif top == "atomic":
        topology = ATOMIC
    elif isinstance(top, dict) and "explicit" in top:
        topology = explicit_topology(top["explicit"])
    else:
        raise SchemaError(f"unknown topology {top!r}")
    return Site(C, topology, doc.get("initial"), doc.get("name", "site"))


# --------------------------------------------------------------------- modules


def module_from_json(doc: dict, G: FiniteGroup) -> RGModule:
    _need(doc, "ring", "rank", "action")
    R = ring(doc["ring"])
    d = int(doc["rank"])
    mats = np.zeros((G.order, d, d), dtype=np.int64)
    seen = set()
    for key, mat in doc["action"].items():
        g = G.element(key) if key in G.labels else int(key)
        mats[g] = np.asarray(mat, dtype=np.int64).reshape(d, d)
        seen.add(g)
    if len(seen) != G.order:
        raise SchemaError("action must list a matrix for every group element")
    return RGModule(R, G, mats)


# --------------------------------------------------------------------- bundles


def parse_poset(spec: str | dict | None):
    """``all-subgroups`` | ``p-subgroups:p`` | ``{"p-subgroups": p}`` | path to a G-poset file."""
    if spec is None or spec in ("all", "all-subgroups"):
        return "all"
    if isinstance(spec, dict):
        if "p-subgroups" in spec:
            return ("p", int(spec["p-subgroups"]))
        return spec
    if spec.startswith("p-subgroups:"):
        return ("p", int(spec.split(":", 1)[1]))
    return read_json(spec)
