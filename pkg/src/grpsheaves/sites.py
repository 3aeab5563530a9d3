"""Sieves, Grothendieck topologies, the sheaf condition and the plus construction."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .fincat import DEFAULT_NAT_BUDGET, BudgetExceeded, FinCat, Presheaf, _nat_search
from .groups import AxiomError
from .report import Report

DEFAULT_SIEVE_BUDGET = 10**5


@dataclass(frozen=True)
class Sieve:
    cat: FinCat = field(compare=False, hash=False, repr=False)
    base: int
    members: frozenset[int]

    def __post_init__(self):
        C = self.cat
        for u in self.members:
            if C.cod[u] != self.base:
                raise AxiomError("sieve member has wrong codomain", {"morphism": u})
            for v, uv in C.comp[u].items():
                if uv not in self.members:
                    raise AxiomError("sieve not closed under precomposition", {"u": u, "v": v})

    @property
    def key(self) -> tuple:
        return (len(self.members), tuple(sorted(self.members)))

    def __lt__(self, other: "Sieve") -> bool:
        return self.key < other.key

    def __len__(self):
        return len(self.members)

    def at(self, y: int) -> list[int]:
        return sorted(u for u in self.members if self.cat.dom[u] == y)

    def is_empty(self) -> bool:
        return not self.members

    def is_maximal(self) -> bool:
        return len(self.members) == len(self.cat.into[self.base])

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def as_presheaf(self) -> Presheaf:
        """The sieve as a subfunctor of ``Hom(-, base)``; labels are morphism indices."""
        C = self.cat
        values = [self.at(y) for y in C.objects]
        pos = [{f: i for i, f in enumerate(v)} for v in values]
        maps = tuple(tuple(pos[C.dom[u]][C.comp[f][u]] for f in values[C.cod[u]]) for u in C.morphisms)
        return Presheaf(C, tuple(len(v) for v in values), maps, tuple(tuple(v) for v in values), check=False)


def maximal_sieve(C: FinCat, x: int) -> Sieve:
    return Sieve(C, x, frozenset(C.into[x]))


def empty_sieve(C: FinCat, x: int) -> Sieve:
    return Sieve(C, x, frozenset())


def generate_sieve(C: FinCat, generators: Iterable[int], base: int | None = None) -> Sieve:
    """Smallest sieve containing the generators (all must share a codomain)."""
    gens = list(generators)
    cods = {C.cod[u] for u in gens}
    if len(cods) > 1:
        raise ValueError(f"generators have mixed codomains {sorted(cods)}")
    if base is None:
        if not gens:
            raise ValueError("base object required for an empty generating set")
        base = cods.pop()
    elif cods and cods != {base}:
        raise ValueError("generators do not end at the base object")
    members = set()
    for u in gens:
        members.update(C.comp[u].values())
    return Sieve(C, base, frozenset(members))


def principal_sieve(C: FinCat, u: int) -> Sieve:
    return generate_sieve(C, [u])


def pullback_sieve(u: int, S: Sieve) -> Sieve:
    """``u*(S) = {v : u o v in S}``."""
    C = S.cat
    if C.cod[u] != S.base:
        raise ValueError("morphism does not end at the sieve's base")
    y = C.dom[u]
    cu = C.comp[u]
    return Sieve(C, y, frozenset(v for v in C.into[y] if cu[v] in S.members))


def enumerate_sieves(C: FinCat, x: int, budget: int = DEFAULT_SIEVE_BUDGET) -> list[Sieve]:
    """Every sieve on x, as unions of principal sieves, sorted by (size, members)."""
    principal = {u: frozenset(C.comp[u].values()) for u in C.into[x]}
    start: frozenset[int] = frozenset()
    seen = {start}
    queue = deque([start])
    nodes = 0
    while queue:
        S = queue.popleft()
        for u, P in principal.items():
            if u in S:
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"sieve enumeration on object {x} exceeded {budget} nodes")
            T = S | P
            if T not in seen:
                seen.add(T)
                queue.append(T)
    return sorted(Sieve(C, x, m) for m in seen)


# ------------------------------------------------------------------ topologies


@dataclass(frozen=True)
class Topology:
    kind: str  # "trivial" | "atomic" | "explicit"
    explicit: tuple[tuple[frozenset[int], ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("trivial", "atomic", "explicit"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.kind == "explicit" and self.explicit is None:
            raise ValueError("explicit topology needs covering sieves per object")


TRIVIAL = Topology("trivial")
ATOMIC = Topology("atomic")


def explicit_topology(covers: Sequence[Iterable[Iterable[int]]]) -> Topology:
    return Topology("explicit", tuple(tuple(frozenset(S) for S in per) for per in covers))


@dataclass(eq=False)
class Site:
    cat: FinCat
    topology: Topology
    initial: int | None = None  # x0 when the site comes from a poset with initial object
    name: str = "site"
    sieve_budget: int = DEFAULT_SIEVE_BUDGET
    _covers: dict = field(default_factory=dict, repr=False)

    def is_covering(self, S: Sieve) -> bool:
        kind = self.topology.kind
        if kind == "trivial":
            return S.is_maximal()
        if kind == "atomic":
            return not S.is_empty()
        return S.members in self.topology.explicit[S.base]

    def covering_sieves(self, x: int) -> list[Sieve]:
        if x not in self._covers:
            kind = self.topology.kind
            if kind == "trivial":
                covers = [maximal_sieve(self.cat, x)]
            elif kind == "atomic":
                covers = [S for S in enumerate_sieves(self.cat, x, self.sieve_budget) if not S.is_empty()]
            else:
                covers = sorted(Sieve(self.cat, x, m) for m in self.topology.explicit[x])
            self._covers[x] = covers
        return self._covers[x]

    @property
    def has_minimal_sieves(self) -> bool:
        return self.topology.kind == "atomic" and self.initial is not None


def ore_condition(C: FinCat) -> Report:
    """Every cospan ``y -> x <- z`` completes to a commutative square."""
    for x in C.objects:
        into = C.into[x]
        principal = [frozenset(C.comp[u].values()) for u in into]
        for i, f in enumerate(into):
            for j in range(i + 1, len(into)):
                if not principal[i] & principal[j]:
                    return Report(False, {"object": x, "cospan": [f, into[j]]})
    return Report(True)


def check_topology_axioms(site: Site) -> Report:
    """Exhaustive check of maximality, pullback stability and transitivity."""
    C = site.cat
    checked = {"maximal": 0, "pullback": 0, "transitivity": 0}
    if site.topology.kind == "atomic":
        ore = ore_condition(C)
        if not ore:
            return Report(False, {"axiom": "ore", **ore.witness}, checked)
    try:
        for x in C.objects:
            if not site.is_covering(maximal_sieve(C, x)):
                return Report(False, {"axiom": 1, "object": x}, checked)
            checked["maximal"] += 1
        for x in C.objects:
            for S in site.covering_sieves(x):
                if S.base != x or not site.is_covering(S):
                    return Report(False, {"axiom": "membership", "object": x, "sieve": S.sorted_members()}, checked)
                for u in C.into[x]:
                    checked["pullback"] += 1
                    if not site.is_covering(pullback_sieve(u, S)):
                        return Report(False, {"axiom": 2, "object": x, "sieve": S.sorted_members(), "morphism": u},
                                      checked)
        for x in C.objects:
            covers = site.covering_sieves(x)
            for S2 in enumerate_sieves(C, x, site.sieve_budget):
                if site.is_covering(S2):
                    continue  # conclusion already holds
                for S1 in covers:
                    checked["transitivity"] += 1
                    if all(site.is_covering(pullback_sieve(u, S2)) for u in S1.members):
                        return Report(False, {"axiom": 3, "object": x, "covering": S1.sorted_members(),
                                              "sieve": S2.sorted_members()}, checked)
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)}, checked)
    return Report(True, None, checked)


def minimal_sieve(site: Site, x: int) -> Sieve:
    """The unique minimal nonempty sieve: ``Hom(x0, x)`` at ``x0``, empty elsewhere."""
    if site.topology.kind != "atomic" or site.initial is None:
        raise ValueError("minimal sieve not guaranteed: site is not atomic over a poset with initial object")
    C = site.cat
    S = Sieve(C, x, frozenset(C.hom[(site.initial, x)]))
    for u in C.into[x]:
        if not S.members <= frozenset(C.comp[u].values()):
            raise AxiomError("closed-form minimal sieve is not below a principal sieve", {"object": x, "morphism": u})
    return S


# ----------------------------------------------------------------------- sheaves


def nat_from_sieve(S: Sieve, F: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> list[tuple[int, ...]]:
    """``Nat(S, F)``, each transformation as its values on the sorted members of S."""
    P = S.as_presheaf()
    members = S.sorted_members()
    C = S.cat
    where = {}
    for y in C.objects:
        for i, u in enumerate(P.labels[y]):
            where[u] = (y, i)
    out = []
    for comps in _nat_search(P, F, budget):
        out.append(tuple(comps[where[u][0]][where[u][1]] for u in members))
    return sorted(out)


def _restriction_vector(F: Presheaf, S: Sieve, a: int) -> tuple[int, ...]:
    return tuple(F.maps[u][a] for u in S.sorted_members())


def sheaf_condition_at(F: Presheaf, S: Sieve, budget: int = DEFAULT_NAT_BUDGET) -> tuple[bool, dict]:
    """Is ``F(x) = Nat(Hom(-,x), F) -> Nat(S, F)`` bijective?"""
    nats = nat_from_sieve(S, F, budget)
    images = {_restriction_vector(F, S, a) for a in range(F.sizes[S.base])}
    ok = len(images) == F.sizes[S.base] == len(nats)
    return ok, {"object": S.base, "sieve": list(S.sorted_members()), "F(x)": F.sizes[S.base],
                "Nat(S,F)": len(nats)}


def is_sheaf(F: Presheaf, site: Site, method: str = "auto", budget: int = DEFAULT_NAT_BUDGET) -> Report:
    """Sheaf condition; ``fast`` uses only the minimal sieves, ``definitional`` every cover."""
    if method == "auto":
        method = "fast" if site.has_minimal_sieves else "definitional"
    if method == "fast" and not site.has_minimal_sieves:
        raise ValueError("fast sheaf check needs an atomic site with initial object")
    C = site.cat
    try:
        for x in C.objects:
            sieves = [minimal_sieve(site, x)] if method == "fast" else site.covering_sieves(x)
            for S in sieves:
                ok, info = sheaf_condition_at(F, S, budget)
                if not ok:
                    return Report(False, info, {"method": method})
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)}, {"method": method})
    return Report(True, None, {"method": method})


@dataclass(frozen=True, eq=False)
class PlusResult:
    presheaf: Presheaf
    unit: tuple[tuple[int, ...], ...]  # F -> F+


def plus_construction(F: Presheaf, site: Site, method: str = "auto",
                      budget: int = DEFAULT_NAT_BUDGET) -> PlusResult:
    """``F+(x) = colim over covering S (reverse inclusion) of Nat(S, F)``."""
    if method == "auto":
        method = "fast" if site.has_minimal_sieves else "general"
    if method == "fast":
        return _plus_fast(F, site, budget)
    return _plus_general(F, site, budget)


def _plus_fast(F: Presheaf, site: Site, budget: int) -> PlusResult:
    C = site.cat
    sieves = [minimal_sieve(site, x) for x in C.objects]
    members = [S.sorted_members() for S in sieves]
    values = [nat_from_sieve(S, F, budget) for S in sieves]
    pos = [{v: i for i, v in enumerate(vals)} for vals in values]
    maps = []
    for u in C.morphisms:
        y, x = C.dom[u], C.cod[u]
        mpos = {w: i for i, w in enumerate(members[x])}
        lookup = [mpos[C.comp[u][v]] for v in members[y]]
        maps.append(tuple(pos[y][tuple(eta[k] for k in lookup)] for eta in values[x]))
    plus = Presheaf(C, tuple(len(v) for v in values), tuple(maps), tuple(tuple(v) for v in values), check=False)
    unit = tuple(tuple(pos[x][_restriction_vector(F, sieves[x], a)] for a in range(F.sizes[x])) for x in C.objects)
    return PlusResult(plus, unit)


def _plus_general(F: Presheaf, site: Site, budget: int) -> PlusResult:
    C = site.cat
    if site.topology.kind == "atomic":
        ore = ore_condition(C)
        if not ore:
            raise AxiomError("covering sieves are not directed (Ore fails)", ore.witness)
    per_obj = []
    for x in C.objects:
        covers = site.covering_sieves(x)
        cidx = {S.members: i for i, S in enumerate(covers)}
        nats = [nat_from_sieve(S, F, budget) for S in covers]
        npos = [{v: i for i, v in enumerate(n)} for n in nats]
        offs = [0]
        for n in nats:
            offs.append(offs[-1] + len(n))
        parent = list(range(offs[-1]))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, S in enumerate(covers):
            mi = S.sorted_members()
            for j, T in enumerate(covers):
                if i == j or not T.members <= S.members:
                    continue
                mt = T.sorted_members()
                sel = [mi.index(u) for u in mt]
                for k, eta in enumerate(nats[i]):
                    a, b = find(offs[i] + k), find(offs[j] + npos[j][tuple(eta[s] for s in sel)])
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        roots: dict[int, int] = {}
        reps = []
        cls = []
        for i in range(len(covers)):
            row = []
            for k in range(len(nats[i])):
                r = find(offs[i] + k)
                if r not in roots:
                    roots[r] = len(reps)
                    reps.append((i, k))
                row.append(roots[r])
            cls.append(row)
        per_obj.append((covers, cidx, nats, npos, cls, reps))
    maps = []
    for u in C.morphisms:
        y, x = C.dom[u], C.cod[u]
        covers_x, _, nats_x, _, _, reps_x = per_obj[x]
        covers_y, cidx_y, _, npos_y, cls_y, _ = per_obj[y]
        row = []
        for (i, k) in reps_x:
            S = covers_x[i]
            T = pullback_sieve(u, S)
            if T.members not in cidx_y:
                raise AxiomError("pullback of a covering sieve is not covering", {"morphism": u})
            j = cidx_y[T.members]
            ms = S.sorted_members()
            spos = {w: s for s, w in enumerate(ms)}
            eta = nats_x[i][k]
            eta2 = tuple(eta[spos[C.comp[u][v]]] for v in T.sorted_members())
            row.append(cls_y[j][npos_y[j][eta2]])
        maps.append(tuple(row))
    sizes = tuple(len(p[5]) for p in per_obj)
    labels = tuple(tuple((p[0][i].sorted_members(), p[2][i][k]) for i, k in p[5]) for p in per_obj)
    plus = Presheaf(C, sizes, tuple(maps), labels, check=False)
    unit = []
    for x in C.objects:
        covers, cidx, nats, npos, cls, _ = per_obj[x]
        top = maximal_sieve(C, x)
        i = cidx[top.members]
        unit.append(tuple(cls[i][npos[i][_restriction_vector(F, top, a)]] for a in range(F.sizes[x])))
    return PlusResult(plus, tuple(unit))


@dataclass(frozen=True, eq=False)
class Sheafification:
    presheaf: Presheaf
    unit: tuple[tuple[int, ...], ...]
    plus: Presheaf  # the intermediate F+


def sheafify(F: Presheaf, site: Site, method: str = "auto", budget: int = DEFAULT_NAT_BUDGET,
             verify: bool = True) -> Sheafification:
    first = plus_construction(F, site, method, budget)
    second = plus_construction(first.presheaf, site, method, budget)
    unit = tuple(tuple(second.unit[x][b] for b in first.unit[x]) for x in site.cat.objects)
    if verify:
        rep = is_sheaf(second.presheaf, site, "auto", budget)
        if not rep:
            raise AxiomError("sheafification did not produce a sheaf", rep.witness)
    return Sheafification(second.presheaf, unit, first.presheaf)
