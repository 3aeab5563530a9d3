"""Finite groups as Cayley tables, subgroups, right G-sets and G-posets.

Elements are integer indices ``0..n-1``. All tables are validated exhaustively
at construction; a failed check raises :class:`AxiomError` carrying a witness.
"""
from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class AxiomError(ValueError):
    """A structure failed one of its defining axioms."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mul: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = ()
    name: str = "G"

    def __post_init__(self):
        n = len(self.mul)
        if n == 0:
            raise AxiomError("a group needs at least one element")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        if len(self.labels) != n:
            raise AxiomError("label count does not match table size")
        table = np.asarray(self.mul, dtype=np.int64)
        if table.shape != (n, n) or table.min() < 0 or table.max() >= n:
            raise AxiomError("multiplication table must be n x n with entries in range")
        # (ab)c == a(bc), all triples at once
        left = table[table, :]  # left[a, b, c] = (ab)c
        right = table[:, table]  # right[a, b, c] = a(bc)
        bad = np.argwhere(left != right)
        if len(bad):
            a, b, c = (int(v) for v in bad[0])
            raise AxiomError(
                "multiplication is not associative",
                {"a": a, "b": b, "c": c, "(ab)c": int(left[a, b, c]), "a(bc)": int(right[a, b, c])},
            )
        ident = [e for e in range(n) if all(table[e, x] == x and table[x, e] == x for x in range(n))]
        if not ident:
            raise AxiomError("no two-sided identity")
        e = ident[0]
        for x in range(n):
            if not any(table[x, y] == e and table[y, x] == e for y in range(n)):
                raise AxiomError("element has no inverse", {"element": x})

    @property
    def order(self) -> int:
        return len(self.mul)

    @cached_property
    def identity(self) -> int:
        n = self.order
        return next(e for e in range(n) if all(self.mul[e][x] == x for x in range(n)))

    @cached_property
    def inv(self) -> tuple[int, ...]:
        e = self.identity
        return tuple(row.index(e) for row in self.mul)

    def m(self, *elements: int) -> int:
        out = self.identity
        for g in elements:
            out = self.mul[out][g]
        return out

    def conj(self, g: int, h: int) -> int:
        """g h g^-1."""
        return self.mul[self.mul[g][h]][self.inv[g]]

    def element(self, label: str) -> int:
        return self.labels.index(label)

    @classmethod
    def from_permutations(cls, generators: Sequence[Sequence[int]], degree: int | None = None,
                          name: str = "G") -> "FiniteGroup":
        """Close a set of permutations (0-based image arrays) under composition.

        The product ``gh`` is function composition: ``(gh)(i) = g(h(i))``.
        """
        gens = [tuple(int(v) for v in g) for g in generators]
        if degree is None:
            degree = len(gens[0]) if gens else 1
        for g in gens:
            if sorted(g) != list(range(degree)):
                raise AxiomError("generator is not a permutation", {"generator": list(g)})
        ident = tuple(range(degree))
        seen = {ident}
        queue = deque([ident])
        while queue:
            p = queue.popleft()
            for g in gens:
                q = tuple(p[g[i]] for i in range(degree))
                if q not in seen:
                    seen.add(q)
                    queue.append(q)
        elems = sorted(seen)
        index = {p: i for i, p in enumerate(elems)}
        mul = tuple(tuple(index[tuple(a[b[i]] for i in range(degree))] for b in elems) for a in elems)
        return cls(mul, tuple(cycle_label(p) for p in elems), name)


def cycle_label(perm: Sequence[int]) -> str:
    """1-based cycle notation, e.g. ``(1 2 3)``; identity is ``()``."""
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(i + 1)
            i = perm[i]
        cycles.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(cycles) or "()"


def trivial_group() -> FiniteGroup:
    return FiniteGroup(((0,),), ("e",), "1")


def cyclic_group(n: int) -> FiniteGroup:
    labels = ["e"] + ["a" if k == 1 else f"a^{k}" for k in range(1, n)]
    return FiniteGroup(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)), tuple(labels), f"Z{n}")


def symmetric_group(d: int) -> FiniteGroup:
    if d == 1:
        return trivial_group()
    gens = [tuple([1, 0] + list(range(2, d))), tuple(list(range(1, d)) + [0])]
    return FiniteGroup.from_permutations(gens, d, name=f"S{d}")


def dihedral_group(k: int) -> FiniteGroup:
    """Symmetries of a k-gon, order 2k."""
    rot = tuple((i + 1) % k for i in range(k))
    ref = tuple((-i) % k for i in range(k))
    return FiniteGroup.from_permutations([rot, ref], k, name=f"D{k}")


BUILTIN_GROUPS = {
    "1": trivial_group,
    "trivial": trivial_group,
    "z2": lambda: cyclic_group(2),
    "z3": lambda: cyclic_group(3),
    "z4": lambda: cyclic_group(4),
    "z6": lambda: cyclic_group(6),
    "s3": lambda: symmetric_group(3),
    "d4": lambda: dihedral_group(4),
    "s4": lambda: symmetric_group(4),
}


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True)
class Subgroup:
    group: FiniteGroup = field(compare=False, hash=False, repr=False)
    members: frozenset[int]

    def __post_init__(self):
        G = self.group
        if G.identity not in self.members:
            raise AxiomError("subgroup must contain the identity")
        for a in self.members:
            if G.inv[a] not in self.members:
                raise AxiomError("subgroup not closed under inverses", {"element": a})
            for b in self.members:
                if G.mul[a][b] not in self.members:
                    raise AxiomError("subgroup not closed under multiplication", {"a": a, "b": b})

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def key(self) -> tuple:
        return (len(self.members), tuple(sorted(self.members)))

    def __lt__(self, other: "Subgroup") -> bool:
        return self.key < other.key

    def __contains__(self, g: int) -> bool:
        return g in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def label(self) -> str:
        return "{" + ", ".join(self.group.labels[g] for g in sorted(self.members)) + "}"


def closure(G: FiniteGroup, elements: Iterable[int]) -> frozenset[int]:
    members = {G.identity}
    frontier = list(set(elements) - members)
    members.update(frontier)
    while frontier:
        new = []
        for a in list(members):
            for b in frontier:
                for c in (G.mul[a][b], G.mul[b][a]):
                    if c not in members:
                        members.add(c)
                        new.append(c)
        frontier = new
    return frozenset(members)


def subgroup(G: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    return Subgroup(G, closure(G, elements))


def whole(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, frozenset(range(G.order)))


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, frozenset([G.identity]))


def enumerate_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """All subgroups, sorted by (order, members); breadth-first element adjunction."""
    start = frozenset([G.identity])
    seen = {start}
    queue = deque([start])
    while queue:
        H = queue.popleft()
        for g in range(G.order):
            if g in H:
                continue
            K = closure(G, H | {g})
            if K not in seen:
                seen.add(K)
                queue.append(K)
    return sorted(Subgroup(G, m) for m in seen)


def p_subgroups(G: FiniteGroup, p: int) -> list[Subgroup]:
    """Subgroups of p-power order, trivial subgroup included."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")

    def p_power(n: int) -> bool:
        while n % p == 0:
            n //= p
        return n == 1

    return [H for H in enumerate_subgroups(G) if p_power(H.order)]


def conjugate_subgroup(H: Subgroup, g: int) -> Subgroup:
    G = H.group
    return Subgroup(G, frozenset(G.conj(g, h) for h in H.members))


def conjugacy_class_rep(H: Subgroup) -> Subgroup:
    return min(conjugate_subgroup(H, g) for g in range(H.group.order))


def normalizer(H: Subgroup) -> Subgroup:
    G = H.group
    return Subgroup(G, frozenset(g for g in range(G.order) if conjugate_subgroup(H, g) == H))


def prime_divisors(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if n % p == 0 and is_prime(p)]


# -------------------------------------------------------------------- G-sets


@dataclass(frozen=True, eq=False)
class GSet:
    """Right action: ``act[x][g] = x.g``."""

    group: FiniteGroup
    act: tuple[tuple[int, ...], ...]
    labels: tuple = ()

    def __post_init__(self):
        G = self.group
        m = len(self.act)
        for x, row in enumerate(self.act):
            if len(row) != G.order or any(not 0 <= y < m for y in row):
                raise AxiomError("action table has wrong shape", {"point": x})
            if row[G.identity] != x:
                raise AxiomError("identity does not act trivially", {"point": x})
        for x in range(m):
            for g in range(G.order):
                xg = self.act[x][g]
                for h in range(G.order):
                    if self.act[xg][h] != self.act[x][G.mul[g][h]]:
                        raise AxiomError("(x.g).h != x.(gh)", {"point": x, "g": g, "h": h})
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(m)))

    @property
    def size(self) -> int:
        return len(self.act)

    def __len__(self):
        return len(self.act)

    def stabilizer(self, x: int) -> Subgroup:
        return Subgroup(self.group, frozenset(g for g in range(self.group.order) if self.act[x][g] == x))

    def relabel(self, perm: Sequence[int]) -> "GSet":
        """Transport along the bijection ``x -> perm[x]``."""
        inv = [0] * len(perm)
        for x, y in enumerate(perm):
            inv[y] = x
        act = tuple(tuple(perm[self.act[inv[y]][g]] for g in range(self.group.order)) for y in range(self.size))
        return GSet(self.group, act)


def point_gset(G: FiniteGroup) -> GSet:
    return GSet(G, (tuple([0] * G.order),))


def empty_gset(G: FiniteGroup) -> GSet:
    return GSet(G, ())


def regular_gset(G: FiniteGroup) -> GSet:
    return GSet(G, G.mul)


def disjoint_union(*sets: GSet) -> GSet:
    G = sets[0].group
    act, offset = [], 0
    for M in sets:
        act.extend(tuple(offset + y for y in row) for row in M.act)
        offset += M.size
    return GSet(G, tuple(act))


def right_cosets(H: Subgroup) -> list[frozenset[int]]:
    G = H.group
    cosets = {frozenset(G.mul[h][g] for h in H.members) for g in range(G.order)}
    return sorted(cosets, key=min)


def coset_gset(H: Subgroup) -> GSet:
    """Right cosets ``Hg`` with ``Hg . g' = H(gg')``."""
    G = H.group
    cosets = right_cosets(H)
    where = {}
    for i, c in enumerate(cosets):
        for g in c:
            where[g] = i
    act = tuple(tuple(where[G.mul[min(c)][g]] for g in range(G.order)) for c in cosets)
    labels = tuple("H" + G.labels[min(c)] for c in cosets)
    return GSet(G, act, labels)


def fixed_points(M: GSet, H: Subgroup) -> list[int]:
    return [x for x in range(M.size) if all(M.act[x][h] == x for h in H.members)]


@dataclass(frozen=True)
class Orbit:
    points: tuple[int, ...]
    stabilizer: Subgroup
    class_rep: Subgroup


def orbits(M: GSet) -> list[Orbit]:
    seen: set[int] = set()
    out = []
    for x in range(M.size):
        if x in seen:
            continue
        pts = sorted(set(M.act[x]))
        seen.update(pts)
        stab = M.stabilizer(x)
        out.append(Orbit(tuple(pts), stab, conjugacy_class_rep(stab)))
    return out


def orbit_type(M: GSet) -> Counter:
    return Counter(o.class_rep.key for o in orbits(M))


def gsets_isomorphic(M: GSet, N: GSet) -> bool:
    return M.size == N.size and orbit_type(M) == orbit_type(N)


@dataclass(frozen=True, eq=False)
class GMap:
    source: GSet
    target: GSet
    table: tuple[int, ...]

    def __post_init__(self):
        S, T = self.source, self.target
        if len(self.table) != S.size:
            raise AxiomError("map table has wrong length")
        for x in range(S.size):
            for g in range(S.group.order):
                if self.table[S.act[x][g]] != T.act[self.table[x]][g]:
                    raise AxiomError("map is not equivariant", {"point": x, "g": g})

    def is_bijective(self) -> bool:
        return sorted(self.table) == list(range(self.target.size)) and self.source.size == self.target.size


def find_gset_isomorphism(M: GSet, N: GSet) -> GMap | None:
    """An explicit equivariant bijection built orbit by orbit, or None."""
    if M.size != N.size:
        return None
    table = [-1] * M.size
    free = list(orbits(N))
    for orb in orbits(M):
        x = orb.points[0]
        H = orb.stabilizer
        match = None
        for k, other in enumerate(free):
            if other.class_rep != orb.class_rep:
                continue
            y = next((y for y in other.points if N.stabilizer(y) == H), None)
            if y is not None:
                match = (k, y)
                break
        if match is None:
            return None
        k, y = match
        free.pop(k)
        for g in range(M.group.order):
            table[M.act[x][g]] = N.act[y][g]
    return GMap(M, N, tuple(table))


def gset_iso_classes(G: FiniteGroup, max_size: int) -> list[GSet]:
    """One representative per isomorphism class of G-sets of size <= max_size.

    Representatives are disjoint unions of coset G-sets over conjugacy class
    representatives, ordered by (size, orbit multiset).
    """
    reps = sorted({conjugacy_class_rep(H).key: conjugacy_class_rep(H) for H in enumerate_subgroups(G)}.values())
    reps = [H for H in reps if G.order // H.order <= max_size]
    out: list[tuple[int, tuple, list[Subgroup]]] = []

    def extend(start: int, size: int, chosen: list[Subgroup]):
        out.append((size, tuple(H.key for H in chosen), list(chosen)))
        for i in range(start, len(reps)):
            idx = G.order // reps[i].order
            if size + idx <= max_size:
                chosen.append(reps[i])
                extend(i, size + idx, chosen)
                chosen.pop()

    extend(0, 0, [])
    out.sort(key=lambda t: (t[0], t[1]))
    result = []
    for _, _, chosen in out:
        result.append(disjoint_union(*[coset_gset(H) for H in chosen]) if chosen else empty_gset(G))
    return result


# ------------------------------------------------------------------- G-posets


@dataclass(frozen=True, eq=False)
class GPoset:
    carrier: GSet
    le: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        m = self.carrier.size
        le = self.le
        if len(le) != m or any(len(r) != m for r in le):
            raise AxiomError("order relation has wrong shape")
        for x in range(m):
            if not le[x][x]:
                raise AxiomError("order is not reflexive", {"x": x})
        for x, y in itertools.product(range(m), repeat=2):
            if x != y and le[x][y] and le[y][x]:
                raise AxiomError("order is not antisymmetric", {"x": x, "y": y})
        for x, y, z in itertools.product(range(m), repeat=3):
            if le[x][y] and le[y][z] and not le[x][z]:
                raise AxiomError("order is not transitive", {"x": x, "y": y, "z": z})
        act = self.carrier.act
        for x, y in itertools.product(range(m), repeat=2):
            if le[x][y]:
                for g in range(self.carrier.group.order):
                    if not le[act[x][g]][act[y][g]]:
                        raise AxiomError("action does not preserve order", {"x": x, "y": y, "g": g})

    @property
    def group(self) -> FiniteGroup:
        return self.carrier.group

    @property
    def size(self) -> int:
        return self.carrier.size

    def left(self, g: int, x: int) -> int:
        """``^g x``, the left action derived from the stored right action."""
        return self.carrier.act[x][self.group.inv[g]]

    def initial_object(self) -> int | None:
        for x in range(self.size):
            if all(self.le[x]):
                return x
        return None

    def opposite(self) -> "GPoset":
        m = self.size
        return GPoset(self.carrier, tuple(tuple(self.le[y][x] for y in range(m)) for x in range(m)))


def subgroup_poset(G: FiniteGroup, subgroups: Sequence[Subgroup]) -> GPoset:
    """Subgroups under inclusion, with right conjugation action ``H.g = g^-1 H g``."""
    subgroups = list(subgroups)
    index = {H.members: i for i, H in enumerate(subgroups)}
    act = []
    for H in subgroups:
        row = []
        for g in range(G.order):
            K = conjugate_subgroup(H, G.inv[g])
            if K.members not in index:
                raise AxiomError("subgroup collection is not conjugation-closed", {"subgroup": sorted(H.members)})
            row.append(index[K.members])
        act.append(tuple(row))
    labels = tuple(H.label() for H in subgroups)
    le = tuple(tuple(H.members <= K.members for K in subgroups) for H in subgroups)
    return GPoset(GSet(G, tuple(act), labels), le)


def discrete_gposet(M: GSet) -> GPoset:
    m = M.size
    return GPoset(M, tuple(tuple(x == y for y in range(m)) for x in range(m)))
