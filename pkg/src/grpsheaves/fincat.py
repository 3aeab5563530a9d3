"""Finite categories, functors, presheaves and pointwise Kan extensions.

Morphisms are global integer indices. ``comp[f][g]`` is ``f o g`` and is
defined exactly when ``cod(g) == dom(f)``. A presheaf stores, for each
morphism ``u: x -> y``, the function ``F(u): F(y) -> F(x)`` as a tuple indexed
by elements of ``F(y)``.
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

from .groups import AxiomError

DEFAULT_NAT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """An exhaustive search hit its node cap before finishing."""


@dataclass(frozen=True, eq=False)
class FinCat:
    n_objects: int
    dom: tuple[int, ...]
    cod: tuple[int, ...]
    identity: tuple[int, ...]
    comp: tuple[dict, ...] = field(repr=False)
    object_labels: tuple = ()
    morphism_labels: tuple = ()

    @classmethod
    def build(cls, n_objects: int, dom: Sequence[int], cod: Sequence[int], identity: Sequence[int],
              compose: Callable[[int, int], int] | dict, object_labels=(), morphism_labels=(),
              check: bool = True) -> "FinCat":
        m = len(dom)
        into: list[list[int]] = [[] for _ in range(n_objects)]
        for g in range(m):
            into[cod[g]].append(g)
        comp = []
        for f in range(m):
            row = {}
            for g in into[dom[f]]:
                row[g] = compose[(f, g)] if isinstance(compose, dict) else compose(f, g)
            comp.append(row)
        C = cls(n_objects, tuple(dom), tuple(cod), tuple(identity), tuple(comp),
                tuple(object_labels) or tuple(range(n_objects)), tuple(morphism_labels) or tuple(range(m)))
        if check:
            C.validate()
        return C

    @property
    def n_morphisms(self) -> int:
        return len(self.dom)

    @property
    def objects(self) -> range:
        return range(self.n_objects)

    @property
    def morphisms(self) -> range:
        return range(len(self.dom))

    def compose(self, f: int, g: int) -> int:
        return self.comp[f][g]

    @cached_property
    def into(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.objects]
        for u in self.morphisms:
            out[self.cod[u]].append(u)
        return tuple(tuple(v) for v in out)

    @cached_property
    def out(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.objects]
        for u in self.morphisms:
            out[self.dom[u]].append(u)
        return tuple(tuple(v) for v in out)

    @cached_property
    def hom(self) -> dict[tuple[int, int], tuple[int, ...]]:
        h: dict[tuple[int, int], list[int]] = {(x, y): [] for x in self.objects for y in self.objects}
        for u in self.morphisms:
            h[(self.dom[u], self.cod[u])].append(u)
        return {k: tuple(v) for k, v in h.items()}

    @cached_property
    def is_identity(self) -> tuple[bool, ...]:
        ids = set(self.identity)
        return tuple(u in ids for u in self.morphisms)

    def validate(self) -> None:
        dom, cod, ident = self.dom, self.cod, self.identity
        for x in self.objects:
            i = ident[x]
            if dom[i] != x or cod[i] != x:
                raise AxiomError("identity has wrong endpoints", {"object": x})
        for f in self.morphisms:
            if set(self.comp[f]) != set(self.into[dom[f]]):
                raise AxiomError("composition not defined exactly on composable pairs", {"f": f})
            for g, fg in self.comp[f].items():
                if dom[fg] != dom[g] or cod[fg] != cod[f]:
                    raise AxiomError("composite has wrong endpoints", {"f": f, "g": g})
            if self.comp[ident[cod[f]]][f] != f or self.comp[f][ident[dom[f]]] != f:
                raise AxiomError("identity is not neutral", {"morphism": f})
        for f in self.morphisms:
            cf = self.comp[f]
            for g, fg in cf.items():
                cg, cfg = self.comp[g], self.comp[fg]
                for h, gh in cg.items():
                    if cfg[h] != cf[gh]:
                        raise AxiomError("composition is not associative", {"f": f, "g": g, "h": h})

    def to_dot(self, name: str = "C") -> str:
        lines = [f"digraph {name} {{"]
        for x in self.objects:
            lines.append(f'  {x} [label="{self.object_labels[x]}"];')
        for u in self.morphisms:
            if not self.is_identity[u]:
                lines.append(f'  {self.dom[u]} -> {self.cod[u]} [label="{self.morphism_labels[u]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def opposite(C: FinCat) -> FinCat:
    comp = {}
    for f in C.morphisms:
        for g, fg in C.comp[f].items():
            comp[(g, f)] = fg
    return FinCat.build(C.n_objects, C.cod, C.dom, C.identity, comp, C.object_labels, C.morphism_labels,
                        check=False)


def discrete_category(n: int) -> FinCat:
    return FinCat.build(n, range(n), range(n), range(n), lambda f, g: f)


def poset_category(le: Sequence[Sequence[bool]], labels=()) -> FinCat:
    """Thin category of a finite preorder; morphism ``x -> y`` iff ``le[x][y]``."""
    n = len(le)
    pairs = [(x, y) for x in range(n) for y in range(n) if le[x][y]]
    index = {p: i for i, p in enumerate(pairs)}
    return FinCat.build(
        n, [p[0] for p in pairs], [p[1] for p in pairs], [index[(x, x)] for x in range(n)],
        lambda f, g: index[(pairs[g][0], pairs[f][1])], labels,
        [f"{labels[p[0]] if labels else p[0]}<={labels[p[1]] if labels else p[1]}" for p in pairs])


@dataclass(frozen=True, eq=False)
class CFunctor:
    source: FinCat
    target: FinCat
    obj: tuple[int, ...]
    mor: tuple[int, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check:
            self.validate()

    def validate(self) -> None:
        C, D = self.source, self.target
        if len(self.obj) != C.n_objects or len(self.mor) != C.n_morphisms:
            raise AxiomError("functor tables have wrong length")
        for x in C.objects:
            if self.mor[C.identity[x]] != D.identity[self.obj[x]]:
                raise AxiomError("functor does not preserve identity", {"object": x})
        for u in C.morphisms:
            v = self.mor[u]
            if D.dom[v] != self.obj[C.dom[u]] or D.cod[v] != self.obj[C.cod[u]]:
                raise AxiomError("functor does not preserve endpoints", {"morphism": u})
        for f in C.morphisms:
            for g, fg in C.comp[f].items():
                if self.mor[fg] != D.comp[self.mor[f]][self.mor[g]]:
                    raise AxiomError("functor does not preserve composition", {"f": f, "g": g})


def identity_functor(C: FinCat) -> CFunctor:
    return CFunctor(C, C, tuple(C.objects), tuple(C.morphisms), check=False)


def full_subcategory(C: FinCat, objects: Sequence[int]) -> tuple[FinCat, CFunctor]:
    objects = list(objects)
    pos = {x: i for i, x in enumerate(objects)}
    mors = [u for u in C.morphisms if C.dom[u] in pos and C.cod[u] in pos]
    mpos = {u: i for i, u in enumerate(mors)}
    S = FinCat.build(len(objects), [pos[C.dom[u]] for u in mors], [pos[C.cod[u]] for u in mors],
                     [mpos[C.identity[x]] for x in objects], lambda f, g: mpos[C.comp[mors[f]][mors[g]]],
                     [C.object_labels[x] for x in objects], [C.morphism_labels[u] for u in mors], check=False)
    return S, CFunctor(S, C, tuple(objects), tuple(mors), check=False)


# ------------------------------------------------------------------ presheaves


@dataclass(frozen=True, eq=False)
class Presheaf:
    """Contravariant functor ``cat -> FinSet``; ``F(x) = {0, ..., sizes[x]-1}``."""

    cat: FinCat
    sizes: tuple[int, ...]
    maps: tuple[tuple[int, ...], ...] = field(repr=False)
    labels: tuple | None = field(default=None, repr=False)
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check:
            self.validate()

    def validate(self) -> None:
        C = self.cat
        if len(self.sizes) != C.n_objects or len(self.maps) != C.n_morphisms:
            raise AxiomError("presheaf tables have wrong length")
        for u in C.morphisms:
            mu = self.maps[u]
            if len(mu) != self.sizes[C.cod[u]] or any(not 0 <= b < self.sizes[C.dom[u]] for b in mu):
                raise AxiomError("restriction map has wrong shape", {"morphism": u})
        for x in C.objects:
            if self.maps[C.identity[x]] != tuple(range(self.sizes[x])):
                raise AxiomError("F(id) is not the identity", {"object": x})
        for f in C.morphisms:
            mf = self.maps[f]
            for g, fg in C.comp[f].items():
                mg, mfg = self.maps[g], self.maps[fg]
                for a in range(len(mf)):
                    if mfg[a] != mg[mf[a]]:
                        raise AxiomError("F(f o g) != F(g) o F(f)", {"f": f, "g": g, "element": a})

    def restrict_along(self, u: int, a: int) -> int:
        return self.maps[u][a]

    def label(self, x: int, a: int):
        return self.labels[x][a] if self.labels is not None else a

    def total_size(self) -> int:
        return sum(self.sizes)


def constant_presheaf(C: FinCat, size: int) -> Presheaf:
    return Presheaf(C, tuple([size] * C.n_objects), tuple(tuple(range(size)) for _ in C.morphisms), check=False)


def terminal_presheaf(C: FinCat) -> Presheaf:
    return constant_presheaf(C, 1)


def representable(C: FinCat, x: int) -> Presheaf:
    """``Hom(-, x)`` acting by precomposition."""
    values = [C.hom[(y, x)] for y in C.objects]
    pos = [{f: i for i, f in enumerate(v)} for v in values]
    maps = []
    for u in C.morphisms:
        y, z = C.dom[u], C.cod[u]
        maps.append(tuple(pos[y][C.comp[f][u]] for f in values[z]))
    return Presheaf(C, tuple(len(v) for v in values), tuple(maps), tuple(values), check=False)


def subpresheaf(F: Presheaf, keep: Sequence[Sequence[int]]) -> Presheaf:
    """Restrict to the given element subsets (must be closed under restriction)."""
    C = F.cat
    keep = [sorted(k) for k in keep]
    pos = [{a: i for i, a in enumerate(k)} for k in keep]
    maps = []
    for u in C.morphisms:
        y, z = C.dom[u], C.cod[u]
        try:
            maps.append(tuple(pos[y][F.maps[u][a]] for a in keep[z]))
        except KeyError:
            raise AxiomError("element subsets are not closed under restriction", {"morphism": u})
    labels = tuple(tuple(F.label(x, a) for a in keep[x]) for x in C.objects)
    return Presheaf(C, tuple(len(k) for k in keep), tuple(maps), labels, check=False)


@dataclass(frozen=True, eq=False)
class NatTrans:
    source: Presheaf
    target: Presheaf
    components: tuple[tuple[int, ...], ...]

    def is_natural(self) -> bool:
        return is_natural(self.source, self.target, self.components)

    def is_iso(self) -> bool:
        return all(sorted(c) == list(range(self.target.sizes[x])) and len(c) == self.target.sizes[x]
                   for x, c in enumerate(self.components))


def is_natural(F: Presheaf, H: Presheaf, components: Sequence[Sequence[int]]) -> bool:
    C = F.cat
    for u in C.morphisms:
        y, z = C.dom[u], C.cod[u]
        for a in range(F.sizes[z]):
            if components[y][F.maps[u][a]] != H.maps[u][components[z][a]]:
                return False
    return True


def compose_nat(first: Sequence[Sequence[int]], second: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Vertical composite: apply ``first`` then ``second``."""
    return tuple(tuple(s[a] for a in f) for f, s in zip(first, second))


def _nat_search(F: Presheaf, H: Presheaf, budget: int, injective: bool = False, limit: int | None = None):
    """Enumerate natural transformations F -> H by backtracking with propagation.

    Assigning ``eta_x(a) = b`` forces ``eta_y(F(u)a) = H(u)b`` for every
    ``u: y -> x``; contradictions prune the branch.
    """
    C = F.cat
    n = C.n_objects
    for x in C.objects:
        if F.sizes[x] and not H.sizes[x]:
            return []
        if injective and F.sizes[x] > H.sizes[x]:
            return []
    into = [[u for u in C.into[x] if not C.is_identity[u]] for x in C.objects]
    dom = C.dom
    Fm, Hm = F.maps, H.maps
    objs = sorted(C.objects, key=lambda x: (-len(into[x]), x))
    variables = [(x, a) for x in objs for a in range(F.sizes[x])]
    assign = [[-1] * F.sizes[x] for x in range(n)]
    used = [set() for _ in range(n)]
    trail: list[tuple[int, int, int]] = []
    results = []
    nodes = 0

    def try_assign(x: int, a: int, b: int) -> bool:
        stack = [(x, a, b)]
        while stack:
            x, a, b = stack.pop()
            cur = assign[x][a]
            if cur >= 0:
                if cur != b:
                    return False
                continue
            if injective:
                if b in used[x]:
                    return False
                used[x].add(b)
            assign[x][a] = b
            trail.append((x, a, b))
            for u in into[x]:
                stack.append((dom[u], Fm[u][a], Hm[u][b]))
        return True

    def undo(mark: int) -> None:
        while len(trail) > mark:
            x, a, b = trail.pop()
            assign[x][a] = -1
            if injective:
                used[x].discard(b)

    def next_free(i: int) -> int | None:
        while i < len(variables):
            x, a = variables[i]
            if assign[x][a] < 0:
                return i
            i += 1
        return None

    first = next_free(0)
    if first is None:
        return [tuple(() for _ in range(n))]
    frames = [[first, 0, 0]]
    while frames:
        frame = frames[-1]
        i, b, mark = frame
        undo(mark)
        x, a = variables[i]
        if b >= H.sizes[x]:
            frames.pop()
            continue
        frame[1] = b + 1
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"natural transformation search exceeded {budget} nodes")
        if try_assign(x, a, b):
            j = next_free(i + 1)
            if j is None:
                results.append(tuple(tuple(row) for row in assign))
                if limit is not None and len(results) >= limit:
                    undo(mark)
                    return results
            else:
                frames.append([j, 0, len(trail)])
    return results


def nat_set(F: Presheaf, H: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> list[NatTrans]:
    """All natural transformations ``F -> H`` in lexicographic component order."""
    comps = sorted(_nat_search(F, H, budget))
    return [NatTrans(F, H, c) for c in comps]


def count_nat(F: Presheaf, H: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> int:
    return len(_nat_search(F, H, budget))


def find_iso(F: Presheaf, H: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> NatTrans | None:
    """Some natural isomorphism ``F -> H``, or None."""
    if F.sizes != H.sizes:
        return None
    found = _nat_search(F, H, budget, injective=True, limit=1)
    return NatTrans(F, H, found[0]) if found else None


# --------------------------------------------------------- limits and colimits


@dataclass(frozen=True)
class Colimit:
    size: int
    classes: tuple[tuple[int, ...], ...]  # classes[x][a] = class of (x, a)
    reps: tuple[tuple[int, int], ...]  # least (object, element) in each class


def colimit(P: Presheaf) -> Colimit:
    """Colimit of a presheaf: disjoint union of values modulo ``a ~ P(u)a``."""
    C = P.cat
    offset = [0]
    for s in P.sizes:
        offset.append(offset[-1] + s)
    parent = list(range(offset[-1]))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for u in C.morphisms:
        if C.is_identity[u]:
            continue
        y, z = C.dom[u], C.cod[u]
        mu = P.maps[u]
        for a in range(P.sizes[z]):
            r1, r2 = find(offset[z] + a), find(offset[y] + mu[a])
            if r1 != r2:
                parent[max(r1, r2)] = min(r1, r2)
    root_index: dict[int, int] = {}
    reps = []
    classes = []
    for x in C.objects:
        row = []
        for a in range(P.sizes[x]):
            r = find(offset[x] + a)
            if r not in root_index:
                root_index[r] = len(reps)
                reps.append((x, a))
            row.append(root_index[r])
        classes.append(tuple(row))
    return Colimit(len(reps), tuple(classes), tuple(reps))


def limit(P: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> list[tuple[int, ...]]:
    """Compatible families ``(a_x)`` with ``P(u)(a_cod u) = a_dom u``, sorted."""
    fams = _nat_search(terminal_presheaf(P.cat), P, budget)
    return sorted(tuple(c[0] for c in f) for f in fams)


# ------------------------------------------------------------ comma categories


@dataclass(frozen=True, eq=False)
class Comma:
    cat: FinCat
    projection: CFunctor
    objects: tuple[tuple[int, int], ...]  # (t, x) for under, (x, t) for over
    index: dict


# comma categories depend only on (alpha, d); Kan extensions along a fixed functor reuse them
_COMMAS: "weakref.WeakKeyDictionary[CFunctor, dict]" = weakref.WeakKeyDictionary()


def _cached(kind: str, alpha: CFunctor, d: int, build: Callable[[], Comma]) -> Comma:
    table = _COMMAS.setdefault(alpha, {})
    if (kind, d) not in table:
        table[(kind, d)] = build()
    return table[(kind, d)]


def comma_under(d: int, alpha: CFunctor) -> Comma:
    """``d/alpha``: objects ``(t: d -> alpha(x), x)``; morphisms ``u: x -> x'`` with ``t' = alpha(u) t``."""
    return _cached("under", alpha, d, lambda: _comma_under(d, alpha))


def comma_over(alpha: CFunctor, d: int) -> Comma:
    """``alpha/d``: objects ``(x, t: alpha(x) -> d)``; morphisms ``u: x -> x'`` with ``t' alpha(u) = t``."""
    return _cached("over", alpha, d, lambda: _comma_over(alpha, d))


def _comma_under(d: int, alpha: CFunctor) -> Comma:
    C, D = alpha.source, alpha.target
    objs = [(t, x) for x in C.objects for t in D.hom[(d, alpha.obj[x])]]
    oidx = {o: i for i, o in enumerate(objs)}
    dom, cod, under, key = [], [], [], {}
    for i, (t, x) in enumerate(objs):
        for u in C.out[x]:
            j = oidx[(D.comp[alpha.mor[u]][t], C.cod[u])]
            key[(i, u)] = len(dom)
            dom.append(i)
            cod.append(j)
            under.append(u)
    ident = [key[(i, C.identity[x])] for i, (t, x) in enumerate(objs)]

    def compose(f: int, g: int) -> int:
        return key[(dom[g], C.comp[under[f]][under[g]])]

    cat = FinCat.build(len(objs), dom, cod, ident, compose, tuple(objs), tuple(under), check=False)
    proj = CFunctor(cat, C, tuple(x for _, x in objs), tuple(under), check=False)
    return Comma(cat, proj, tuple(objs), oidx)


def _comma_over(alpha: CFunctor, d: int) -> Comma:
    C, D = alpha.source, alpha.target
    objs = [(x, t) for x in C.objects for t in D.hom[(alpha.obj[x], d)]]
    oidx = {o: i for i, o in enumerate(objs)}
    dom, cod, under, key = [], [], [], {}
    for j, (x2, t2) in enumerate(objs):
        for u in C.into[x2]:
            i = oidx[(C.dom[u], D.comp[t2][alpha.mor[u]])]
            key[(j, u)] = len(dom)
            dom.append(i)
            cod.append(j)
            under.append(u)
    ident = [key[(i, C.identity[x])] for i, (x, t) in enumerate(objs)]

    def compose(f: int, g: int) -> int:
        return key[(cod[f], C.comp[under[f]][under[g]])]

    cat = FinCat.build(len(objs), dom, cod, ident, compose, tuple(objs), tuple(under), check=False)
    proj = CFunctor(cat, C, tuple(x for x, _ in objs), tuple(under), check=False)
    return Comma(cat, proj, tuple(objs), oidx)


def is_filtered(C: FinCat) -> tuple[bool, dict | None]:
    """Nonempty, every pair of objects has a cocone, every parallel pair is coequalized."""
    if C.n_objects == 0:
        return False, {"reason": "empty category"}
    reach = []
    for x in C.objects:
        mask = 0
        for u in C.out[x]:
            mask |= 1 << C.cod[u]
        reach.append(mask)
    for a in C.objects:
        for b in range(a + 1, C.n_objects):
            if not reach[a] & reach[b]:
                return False, {"reason": "no cocone", "objects": [a, b]}
    for (a, b), hom in C.hom.items():
        for f, g in itertools.combinations(hom, 2):
            if not any(C.comp[h][f] == C.comp[h][g] for h in C.out[b]):
                return False, {"reason": "parallel pair not coequalized", "morphisms": [f, g]}
    return True, None


# ----------------------------------------------------------------- Kan extensions


def restrict(alpha: CFunctor, F: Presheaf) -> Presheaf:
    """``F o alpha``."""
    labels = None
    if F.labels is not None:
        labels = tuple(F.labels[alpha.obj[x]] for x in alpha.source.objects)
    return Presheaf(alpha.source, tuple(F.sizes[alpha.obj[x]] for x in alpha.source.objects),
                    tuple(F.maps[alpha.mor[u]] for u in alpha.source.morphisms), labels, check=False)


@dataclass(frozen=True, eq=False)
class KanExtension:
    presheaf: Presheaf
    commas: tuple[Comma, ...]
    unit: tuple[tuple[int, ...], ...]  # left: F -> Res LK F;  right: Res RK F -> F


def left_kan(alpha: CFunctor, F: Presheaf) -> KanExtension:
    """Pointwise ``LK(d) = colim`` of ``F`` over ``d/alpha``."""
    C, D = alpha.source, alpha.target
    commas, cols = [], []
    for d in D.objects:
        cm = comma_under(d, alpha)
        commas.append(cm)
        cols.append(colimit(restrict(cm.projection, F)))
    maps = []
    for v in D.morphisms:
        d2, d = D.dom[v], D.cod[v]
        cm, cm2 = commas[d], commas[d2]
        row = []
        for (o, a) in cols[d].reps:
            t, x = cm.objects[o]
            o2 = cm2.index[(D.comp[t][v], x)]
            row.append(cols[d2].classes[o2][a])
        maps.append(tuple(row))
    labels = tuple(tuple((commas[d].objects[o], a) for o, a in cols[d].reps) for d in D.objects)
    LK = Presheaf(D, tuple(c.size for c in cols), tuple(maps), labels, check=False)
    unit = []
    for x in C.objects:
        d = alpha.obj[x]
        o = commas[d].index[(D.identity[d], x)]
        unit.append(tuple(cols[d].classes[o][a] for a in range(F.sizes[x])))
    return KanExtension(LK, tuple(commas), tuple(unit))


def right_kan(alpha: CFunctor, F: Presheaf, budget: int = DEFAULT_NAT_BUDGET) -> KanExtension:
    """Pointwise ``RK(d) = lim`` of ``F`` over ``alpha/d``."""
    C, D = alpha.source, alpha.target
    commas, fams, pos = [], [], []
    for d in D.objects:
        cm = comma_over(alpha, d)
        commas.append(cm)
        fl = limit(restrict(cm.projection, F), budget)
        fams.append(fl)
        pos.append({f: i for i, f in enumerate(fl)})
    maps = []
    for v in D.morphisms:
        d2, d = D.dom[v], D.cod[v]
        cm, cm2 = commas[d], commas[d2]
        lookup = [cm.index[(x, D.comp[v][t2])] for (x, t2) in cm2.objects]
        maps.append(tuple(pos[d2][tuple(fam[k] for k in lookup)] for fam in fams[d]))
    RK = Presheaf(D, tuple(len(f) for f in fams), tuple(maps), tuple(tuple(f) for f in fams), check=False)
    counit = []
    for x in C.objects:
        d = alpha.obj[x]
        o = commas[d].index[(x, D.identity[d])]
        counit.append(tuple(fam[o] for fam in fams[d]))
    return KanExtension(RK, tuple(commas), tuple(counit))


# ------------------------------------------------------------- isomorphism search


def find_isomorphism(C: FinCat, D: FinCat, budget: int = DEFAULT_NAT_BUDGET) -> CFunctor | None:
    """Brute-force search for an isomorphism of categories (tiny inputs only)."""
    if C.n_objects != D.n_objects or C.n_morphisms != D.n_morphisms:
        return None
    nodes = 0
    for perm in itertools.permutations(D.objects):
        if any(len(C.hom[(x, y)]) != len(D.hom[(perm[x], perm[y])]) for x in C.objects for y in C.objects):
            continue
        mor = [-1] * C.n_morphisms
        used = set()
        for x in C.objects:
            mor[C.identity[x]] = D.identity[perm[x]]
            used.add(D.identity[perm[x]])
        order = [u for u in C.morphisms if mor[u] < 0]

        def consistent(u: int) -> bool:
            for g, fg in C.comp[u].items():
                if mor[g] >= 0 and mor[fg] >= 0 and D.comp[mor[u]][mor[g]] != mor[fg]:
                    return False
            for f in C.out[C.cod[u]]:
                fu = C.comp[f][u]
                if mor[f] >= 0 and mor[fu] >= 0 and D.comp[mor[f]][mor[u]] != mor[fu]:
                    return False
            for f in C.morphisms:
                for g, fg in C.comp[f].items():
                    if fg == u and mor[f] >= 0 and mor[g] >= 0 and D.comp[mor[f]][mor[g]] != mor[u]:
                        return False
            return True

        def search(k: int) -> bool:
            nonlocal nodes
            if k == len(order):
                return True
            u = order[k]
            for v in D.hom[(perm[C.dom[u]], perm[C.cod[u]])]:
                if v in used:
                    continue
                nodes += 1
                if nodes > budget:
                    raise BudgetExceeded("isomorphism search exceeded budget")
                mor[u] = v
                used.add(v)
                if consistent(u) and search(k + 1):
                    return True
                used.discard(v)
                mor[u] = -1
            return False

        if search(0):
            return CFunctor(C, D, tuple(perm), tuple(mor))
    return None
