"""Sites built from a finite group: the one-object site, transporter categories
``P x| G`` over a G-poset, their quotients, and the functors between them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from . import groups as gr
from .fincat import (DEFAULT_NAT_BUDGET, BudgetExceeded, CFunctor, FinCat, Presheaf, comma_under,
                     find_iso, is_filtered, left_kan, subpresheaf, opposite, poset_category, representable, restrict,
                     right_kan)
from .groups import AxiomError, FiniteGroup, GPoset, GSet, Subgroup
from .report import Report
from .sites import ATOMIC, Sieve, Site, generate_sieve, is_sheaf, sheafify


# ---------------------------------------------------------------- one object


def one_object_category(G: FiniteGroup) -> FinCat:
    n = G.order
    return FinCat.build(1, [0] * n, [0] * n, [G.identity], lambda f, g: G.mul[f][g], ("*",), G.labels,
                        check=False)


def one_object_site(G: FiniteGroup) -> Site:
    return Site(one_object_category(G), ATOMIC, initial=0, name=f"{G.name} (one object)")


def gset_to_presheaf(M: GSet, cat: FinCat | None = None) -> Presheaf:
    """A right G-set as a presheaf on the one-object category: ``F(g)(m) = m.g``."""
    G = M.group
    cat = cat or one_object_category(G)
    maps = tuple(tuple(M.act[m][g] for m in range(M.size)) for g in range(G.order))
    return Presheaf(cat, (M.size,), maps, (tuple(M.labels),), check=False)


def presheaf_to_gset(F: Presheaf, G: FiniteGroup) -> GSet:
    n = F.sizes[0]
    return GSet(G, tuple(tuple(F.maps[g][m] for g in range(G.order)) for m in range(n)),
                F.labels[0] if F.labels is not None else ())


# --------------------------------------------------------------- transporter


@dataclass(frozen=True, eq=False)
class TransporterCat:
    cat: FinCat
    poset: GPoset
    decode: tuple[tuple[int, int, int], ...]  # morphism -> (dom, cod, g)
    index: dict = field(repr=False)
    subgroups: tuple[Subgroup, ...] | None = None

    @property
    def group(self) -> FiniteGroup:
        return self.poset.group

    def morphism(self, x: int, y: int, g: int) -> int:
        return self.index[(x, y, g)]

    def aut(self, x: int) -> frozenset[int]:
        return frozenset(g for (a, b, g) in self.decode if a == x and b == x)


def hom_transporter(H: Subgroup, K: Subgroup) -> list[int]:
    """``{g : g H g^-1 <= K}``."""
    G = H.group
    return [g for g in range(G.order) if all(G.conj(g, h) in K.members for h in H.members)]


def transporter_category(P: GPoset, subgroups: Sequence[Subgroup] | None = None) -> TransporterCat:
    """``P x| G``: morphisms ``x -> y`` are ``g`` with ``^g x <= y``; composition multiplies."""
    G = P.group
    decode = sorted((x, y, g) for x in range(P.size) for y in range(P.size) for g in range(G.order)
                    if P.le[P.left(g, x)][y])
    index = {t: i for i, t in enumerate(decode)}

    def compose(f: int, h: int) -> int:
        y, z, g = decode[f]
        x, _, k = decode[h]
        return index[(x, z, G.mul[g][k])]

    labels = tuple(f"{G.labels[g]}:{P.carrier.labels[x]}->{P.carrier.labels[y]}" for x, y, g in decode)
    cat = FinCat.build(P.size, [t[0] for t in decode], [t[1] for t in decode],
                       [index[(x, x, G.identity)] for x in range(P.size)], compose,
                       tuple(P.carrier.labels), labels, check=False)
    return TransporterCat(cat, P, tuple(decode), index, tuple(subgroups) if subgroups is not None else None)


def transporter_site(P: GPoset, subgroups: Sequence[Subgroup] | None = None) -> tuple[TransporterCat, Site]:
    x0 = P.initial_object()
    if x0 is None:
        raise ValueError("G-poset has no initial object; the atomic transporter site needs one "
                         "(otherwise the Ore condition and minimal sieves are not guaranteed)")
    T = transporter_category(P, subgroups)
    return T, Site(T.cat, ATOMIC, initial=x0, name="PxG")


def poset_inclusion(T: TransporterCat) -> CFunctor:
    """The inclusion ``P -> P x| G`` sending ``x <= y`` to ``(x, y, e)``."""
    P = T.poset
    Pc = poset_category(P.le, P.carrier.labels)
    e = T.group.identity
    mor = tuple(T.index[(Pc.dom[u], Pc.cod[u], e)] for u in Pc.morphisms)
    return CFunctor(Pc, T.cat, tuple(Pc.objects), mor)


def pi_functor(T: TransporterCat, G_cat: FinCat | None = None) -> CFunctor:
    G_cat = G_cat or one_object_category(T.group)
    return CFunctor(T.cat, G_cat, tuple(0 for _ in T.cat.objects), tuple(g for (_, _, g) in T.decode))


# ----------------------------------------------------------------- quotients


@dataclass(frozen=True, eq=False)
class CatExtension:
    source: TransporterCat
    cat: FinCat
    rho: CFunctor
    kernels: tuple[frozenset[int], ...]
    reps: tuple[int, ...]  # quotient morphism -> least transporter morphism in its class

    def rep_triple(self, c: int) -> tuple[int, int, int]:
        return self.source.decode[self.reps[c]]

    def kernel_subgroup(self, x: int) -> Subgroup:
        return Subgroup(self.source.group, self.kernels[x])

    def canonical_morphism(self, x: int) -> int:
        """The image of ``(x0, x, e)``."""
        T = self.source
        x0 = T.poset.initial_object()
        return self.rho.mor[T.index[(x0, x, T.group.identity)]]


def orbit_quotient(T: TransporterCat, kernels: Sequence[Sequence[int]]) -> CatExtension:
    """Quotient by left ``K(cod)``-cosets; raises AxiomError with a composable-pair witness
    when the coset relation is not a congruence."""
    G = T.group
    C = T.cat
    kern = tuple(frozenset(k) | {G.identity} for k in kernels)
    if len(kern) != C.n_objects:
        raise AxiomError("need one kernel per object")
    for x, K in enumerate(kern):
        if not K <= T.aut(x):
            raise AxiomError("kernel is not inside Aut(x)", {"object": x, "elements": sorted(K - T.aut(x))})
        gr.Subgroup(G, K)
    cls_key = []
    for (x, y, g) in T.decode:
        cls_key.append((x, y, min(G.mul[k][g] for k in kern[y])))
    for f in C.morphisms:
        for h, fh in C.comp[f].items():
            x, y, gh = T.decode[h]
            for k in kern[y]:
                kh = T.index[(x, y, G.mul[k][gh])]
                if cls_key[C.comp[f][kh]] != cls_key[fh]:
                    raise AxiomError("kernel family is not a congruence",
                                     {"f": f, "g": h, "k": k, "object": y})
    keys = sorted(set(cls_key))
    kidx = {k: i for i, k in enumerate(keys)}
    rho_mor = tuple(kidx[k] for k in cls_key)
    reps = tuple(T.index[k] for k in keys)

    def compose(a: int, b: int) -> int:
        return rho_mor[C.comp[reps[a]][reps[b]]]

    labels = tuple(f"[{C.morphism_labels[r]}]" for r in reps)
    Q = FinCat.build(C.n_objects, [k[0] for k in keys], [k[1] for k in keys],
                     [kidx[cls_key[C.identity[x]]] for x in C.objects], compose, C.object_labels, labels,
                     check=False)
    rho = CFunctor(C, Q, tuple(C.objects), rho_mor)
    return CatExtension(T, Q, rho, kern, reps)


def identity_extension(T: TransporterCat) -> CatExtension:
    return orbit_quotient(T, [[] for _ in T.cat.objects])


def subgroup_kernels(T: TransporterCat) -> list[frozenset[int]]:
    if T.subgroups is None:
        raise ValueError("orbit kernels need a subgroup poset")
    return [H.members for H in T.subgroups]


# -------------------------------------------------------------------- bundles


@dataclass(eq=False)
class GroupSiteBundle:
    group: FiniteGroup
    transporter: TransporterCat
    extension: CatExtension
    g_site: Site
    pg_site: Site
    c_site: Site
    pi: CFunctor
    rho: CFunctor
    name: str = "bundle"

    @property
    def x0(self) -> int:
        return self.pg_site.initial


def build_bundle(G: FiniteGroup, poset="all", quotient: str = "orbit",
                 kernels: Sequence[Sequence[int]] | None = None) -> GroupSiteBundle:
    """``poset``: ``"all"``, ``("p", p)``, or a GPoset; ``quotient``: ``"transporter"`` or ``"orbit"``."""
    subs = None
    if isinstance(poset, GPoset):
        P, pname = poset, "P"
    else:
        if poset == "all":
            subs, pname = gr.enumerate_subgroups(G), "S"
        elif isinstance(poset, tuple) and poset[0] == "p":
            subs, pname = gr.p_subgroups(G, int(poset[1])), f"S_{poset[1]}"
        else:
            raise ValueError(f"unknown poset selector {poset!r}")
        P = gr.subgroup_poset(G, subs)
    T, pg = transporter_site(P, subs)
    if kernels is not None:
        E = orbit_quotient(T, kernels)
        cname = "C"
    elif quotient == "transporter":
        E = identity_extension(T)
        cname = "T" + pname[1:]
    elif quotient == "orbit":
        E = orbit_quotient(T, subgroup_kernels(T))
        cname = "O" + pname[1:]
    else:
        raise ValueError(f"unknown quotient {quotient!r}")
    g_site = one_object_site(G)
    c_site = Site(E.cat, ATOMIC, initial=pg.initial, name=cname)
    pi = pi_functor(T, g_site.cat)
    return GroupSiteBundle(G, T, E, g_site, pg, c_site, pi, E.rho, f"{G.name}:{pname}:{quotient}")


def standard_bundles(G: FiniteGroup) -> list[GroupSiteBundle]:
    """All-subgroup and p-subgroup posets, transporter and orbit quotients."""
    posets = ["all"] + [("p", p) for p in gr.prime_divisors(G.order)]
    return [build_bundle(G, P, q) for P in posets for q in ("transporter", "orbit")]


# --------------------------------------------------------------- continuity


def is_continuous(alpha: CFunctor, source: Site, target: Site) -> Report:
    """Cover-preserving (images of covers generate covers) and flat (every ``(d/alpha)^op`` filtered)."""
    C, D = alpha.source, alpha.target
    witness = None
    cover_ok = True
    try:
        for x in C.objects:
            for S in source.covering_sieves(x):
                img = generate_sieve(D, [alpha.mor[u] for u in S.members], alpha.obj[x])
                if not target.is_covering(img):
                    cover_ok = False
                    witness = {"clause": "cover-preserving", "object": x, "sieve": S.sorted_members()}
                    break
            if not cover_ok:
                break
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)})
    flat_ok = True
    for d in D.objects:
        ok, why = is_filtered(opposite(comma_under(d, alpha).cat))
        if not ok:
            flat_ok = False
            witness = witness or {"clause": "flat", "object": d, **why}
            break
    return Report(cover_ok and flat_ok, witness,
                  {"cover_preserving": cover_ok, "flat": flat_ok, "continuous": cover_ok and flat_ok})


def is_cocontinuous(beta: CFunctor, source: Site, target: Site) -> Report:
    """For every cover S of ``beta(x)``, ``{u : beta(u) in S}`` covers x."""
    C, D = beta.source, beta.target
    try:
        for x in C.objects:
            for S in target.covering_sieves(beta.obj[x]):
                pulled = frozenset(u for u in C.into[x] if beta.mor[u] in S.members)
                if not source.is_covering(Sieve(C, x, pulled)):
                    return Report(False, {"object": x, "sieve": S.sorted_members()})
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)})
    return Report(True)


# ----------------------------------------------------- fixed points and Upsilon


def fixed_point_sheaf(M: GSet, E: CatExtension) -> Presheaf:
    """``x -> M^{K(x)}``; a morphism represented by ``(x, y, g)`` acts as ``m -> m.g``."""
    C = E.cat
    values = [[m for m in range(M.size) if all(M.act[m][k] == m for k in E.kernels[x])] for x in C.objects]
    pos = [{m: i for i, m in enumerate(v)} for v in values]
    maps = []
    for c in C.morphisms:
        x, y, g = E.rep_triple(c)
        maps.append(tuple(pos[x][M.act[m][g]] for m in values[y]))
    labels = tuple(tuple(M.labels[m] for m in v) for v in values)
    return Presheaf(C, tuple(len(v) for v in values), tuple(maps), labels)


def evaluate_at_x0(F: Presheaf, E: CatExtension) -> GSet:
    """``F(x0)`` as a right G-set, acting through the automorphisms ``(x0, x0, g)``."""
    T = E.source
    x0 = T.poset.initial_object()
    if x0 is None:
        raise ValueError("no initial object")
    if len(E.kernels[x0]) > 1:
        raise ValueError("kernel at x0 is nontrivial; no G-set structure on F(x0) is fixed in that case")
    G = T.group
    n = F.sizes[x0]
    act = tuple(tuple(F.maps[E.rho.mor[T.index[(x0, x0, g)]]][m] for g in range(G.order)) for m in range(n))
    return GSet(G, act, F.labels[x0] if F.labels is not None else ())


def upsilon_push(M: GSet, bundle: GroupSiteBundle) -> Presheaf:
    """``RK_rho Res_pi M`` computed by pointwise Kan extension."""
    kappa = restrict(bundle.pi, gset_to_presheaf(M, bundle.g_site.cat))
    return right_kan(bundle.rho, kappa).presheaf


def upsilon_pull(F: Presheaf, bundle: GroupSiteBundle) -> GSet:
    """``LK_pi (Res_rho F)^#`` computed by pointwise Kan extension."""
    res = sheafify(restrict(bundle.rho, F), bundle.pg_site).presheaf
    return presheaf_to_gset(left_kan(bundle.pi, res).presheaf, bundle.group)


# --------------------------------------------------------- random presheaves


def _quotient_presheaf(F: Presheaf, pairs: Sequence[tuple[int, int, int]]) -> Presheaf:
    C = F.cat
    parent = [list(range(s)) for s in F.sizes]

    def find(x: int, a: int) -> int:
        p = parent[x]
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(x: int, a: int, b: int) -> bool:
        ra, rb = find(x, a), find(x, b)
        if ra == rb:
            return False
        parent[x][max(ra, rb)] = min(ra, rb)
        return True

    for x, a, b in pairs:
        union(x, a, b)
    changed = True
    while changed:
        changed = False
        for u in C.morphisms:
            y, z = C.dom[u], C.cod[u]
            mu = F.maps[u]
            for a in range(F.sizes[z]):
                r = find(z, a)
                if r != a and union(y, mu[a], mu[r]):
                    changed = True
    cls = []
    for x in C.objects:
        roots = sorted({find(x, a) for a in range(F.sizes[x])})
        rpos = {r: i for i, r in enumerate(roots)}
        cls.append((roots, [rpos[find(x, a)] for a in range(F.sizes[x])]))
    maps = tuple(tuple(cls[C.dom[u]][1][F.maps[u][r]] for r in cls[C.cod[u]][0]) for u in C.morphisms)
    return Presheaf(C, tuple(len(c[0]) for c in cls), maps, check=False)


def _generated_subpresheaf(F: Presheaf, seeds: Sequence[tuple[int, int]]) -> Presheaf:
    C = F.cat
    keep = [set() for _ in C.objects]
    stack = list(seeds)
    while stack:
        x, a = stack.pop()
        if a in keep[x]:
            continue
        keep[x].add(a)
        for u in C.into[x]:
            stack.append((C.dom[u], F.maps[u][a]))
    return subpresheaf(F, keep)


def coproduct(parts: Sequence[Presheaf]) -> Presheaf:
    C = parts[0].cat
    offs = [[0] * C.n_objects]
    for P in parts:
        offs.append([offs[-1][x] + P.sizes[x] for x in C.objects])
    maps = []
    for u in C.morphisms:
        y, z = C.dom[u], C.cod[u]
        row = []
        for i, P in enumerate(parts):
            row.extend(offs[i][y] + b for b in P.maps[u])
        maps.append(tuple(row))
    return Presheaf(C, tuple(offs[-1]), tuple(maps), check=False)


def random_presheaf(C: FinCat, rng: random.Random, max_generators: int = 3,
                    max_identifications: int = 4) -> Presheaf:
    """A seeded random finite presheaf: a quotient of a subpresheaf of a coproduct of representables."""
    k = rng.randint(1, max_generators)
    F = coproduct([representable(C, rng.randrange(C.n_objects)) for _ in range(k)])
    if rng.random() < 0.4:
        seeds = []
        for _ in range(rng.randint(1, 3)):
            x = rng.randrange(C.n_objects)
            if F.sizes[x]:
                seeds.append((x, rng.randrange(F.sizes[x])))
        if seeds:
            F = _generated_subpresheaf(F, seeds)
    if rng.random() < 0.7:
        pairs = []
        for _ in range(rng.randint(1, max_identifications)):
            x = rng.randrange(C.n_objects)
            if F.sizes[x] >= 2:
                pairs.append((x, rng.randrange(F.sizes[x]), rng.randrange(F.sizes[x])))
        F = _quotient_presheaf(F, pairs)
    F.validate()
    return F


def concentrated_presheaf(M: GSet, E: CatExtension) -> Presheaf:
    """``M`` at ``x0`` (acting through ``Aut(x0)``), empty elsewhere."""
    T = E.source
    C = E.cat
    x0 = T.poset.initial_object()
    sizes = [0] * C.n_objects
    sizes[x0] = M.size
    maps = []
    for c in C.morphisms:
        x, y, g = E.rep_triple(c)
        if y != x0:
            maps.append(())
        else:
            maps.append(tuple(M.act[m][g] for m in range(M.size)))
    return Presheaf(C, tuple(sizes), tuple(maps))


def presheaf_corpus(bundle: GroupSiteBundle, count: int, seed: int, site: str = "c") -> list[Presheaf]:
    """Seeded random presheaves on the quotient (``site="c"``) or transporter (``"pg"``) site."""
    rng = random.Random(seed)
    E = bundle.extension if site == "c" else identity_extension(bundle.transporter)
    C = E.cat
    G = bundle.group
    small = gr.gset_iso_classes(G, G.order)
    out = []
    while len(out) < count:
        r = rng.random()
        if r < 0.12:
            out.append(concentrated_presheaf(rng.choice(small), E))
        elif r < 0.24:
            out.append(fixed_point_sheaf(rng.choice(small), E))
        else:
            out.append(random_presheaf(C, rng))
    return out


# ------------------------------------------------------------------ verifier


def _iso_report(F: Presheaf, H: Presheaf, budget: int) -> bool:
    iso = find_iso(F, H, budget)
    return iso is not None and iso.is_natural() and iso.is_iso()


def verify_artin(bundle: GroupSiteBundle, size_bound: int, n_sheaves: int = 20, seed: int = 0,
                 budget: int = DEFAULT_NAT_BUDGET) -> Report:
    """Roundtrips ``Set-G -> Sh(C) -> Set-G`` and ``Sh(C) -> Set-G -> Sh(C)``, plus the
    classification of sheafifications as fixed-point sheaves."""
    G = bundle.group
    E = bundle.extension
    site = bundle.c_site
    failures: list[dict] = []
    inventory: dict[int, int] = {}
    classes = gr.gset_iso_classes(G, size_bound)
    try:
        for i, M in enumerate(classes):
            inventory[M.size] = inventory.get(M.size, 0) + 1
            F = upsilon_push(M, bundle)
            if not is_sheaf(F, site):
                failures.append({"clause": "a", "case": i, "reason": "push is not a sheaf"})
                continue
            if not _iso_report(F, fixed_point_sheaf(M, E), budget):
                failures.append({"clause": "a", "case": i, "reason": "push differs from fixed-point sheaf"})
            N = upsilon_pull(F, bundle)
            if not gr.gsets_isomorphic(M, N) or gr.find_gset_isomorphism(M, N) is None:
                failures.append({"clause": "a", "case": i, "reason": "roundtrip G-set not isomorphic"})
        corpus = presheaf_corpus(bundle, n_sheaves, seed)
        n_roundtrip = 0
        for i, P in enumerate(corpus):
            sh = sheafify(P, site).presheaf
            N = upsilon_pull(sh, bundle)
            if not _iso_report(sh, upsilon_push(N, bundle), budget):
                failures.append({"clause": "b", "case": i, "reason": "sheaf roundtrip not naturally isomorphic"})
            n_roundtrip += 1
            if not _iso_report(sh, fixed_point_sheaf(evaluate_at_x0(P, E), E), budget):
                failures.append({"clause": "c", "case": i, "reason": "sheafification is not F_{P(x0)}"})
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)})
    details = {"bundle": bundle.name, "size_bound": size_bound, "iso_classes": len(classes),
               "iso_classes_by_size": dict(sorted(inventory.items())), "sheaf_corpus": n_sheaves, "seed": seed}
    return Report(not failures, failures[0] if failures else None, details)
