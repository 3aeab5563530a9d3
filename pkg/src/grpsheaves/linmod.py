"""Modules over RG for R = F_p or Z/n, and module-valued presheaves on group sites.

Vectors are rows; a module acts on the right by ``v.g = v @ mat[g]``, so ``mat[gh] = mat[g] @ mat[h]``.
A module presheaf stores, for ``u: y -> x``, a matrix ``A_u`` with ``F(u)(v) = v @ A_u``.
"""
from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import groups as gr
from .fincat import BudgetExceeded, FinCat, Presheaf
from .groups import AxiomError, FiniteGroup, GSet, Subgroup
from .report import Report
from .sites import Site, is_sheaf, minimal_sieve

DEFAULT_MATERIALIZE_CAP = 10**4


class MaterializationCapExceeded(BudgetExceeded):
    pass


def materialize_cap() -> int:
    return int(os.environ.get("SHEAFSITE_MATERIALIZE_CAP", DEFAULT_MATERIALIZE_CAP))


# ---------------------------------------------------------------------- rings


@dataclass(frozen=True)
class FiniteRing:
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")

    @property
    def is_field(self) -> bool:
        return gr.is_prime(self.modulus)

    @property
    def kind(self) -> str:
        return "F_p" if self.is_field else "Z/n"

    @property
    def order(self) -> int:
        return self.modulus

    @property
    def name(self) -> str:
        return f"F{self.modulus}" if self.is_field else f"Z/{self.modulus}"

    def is_unit(self, a: int) -> bool:
        return math.gcd(a % self.modulus, self.modulus) == 1

    def inv(self, a: int) -> int:
        return pow(a % self.modulus, -1, self.modulus)

    def to_json(self) -> dict:
        return {"p": self.modulus} if self.is_field else {"mod": self.modulus}


def ring(spec) -> FiniteRing:
    """``"F3"``, ``"Z/4"``, ``"Z4"``, ``{"p": 3}``, ``{"mod": 4}`` or an int modulus."""
    if isinstance(spec, FiniteRing):
        return spec
    if isinstance(spec, int):
        return FiniteRing(spec)
    if isinstance(spec, dict):
        if "p" in spec:
            if not gr.is_prime(int(spec["p"])):
                raise ValueError(f"{spec['p']} is not prime")
            return FiniteRing(int(spec["p"]))
        return FiniteRing(int(spec["mod"]))
    s = str(spec).strip().upper().replace("_", "")
    if s.startswith("F") and s[1:].isdigit():
        if not gr.is_prime(int(s[1:])):
            raise ValueError(f"{spec} is not a prime field")
        return FiniteRing(int(s[1:]))
    if s.startswith("Z/"):
        s = s[2:]
    elif s.startswith("Z"):
        s = s[1:]
    if s.isdigit():
        return FiniteRing(int(s))
    raise ValueError(f"unknown ring {spec!r}")


# -------------------------------------------------------------- linear algebra


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def diagonalize(A: np.ndarray, n: int) -> tuple[list[int], np.ndarray]:
    """Unimodular row/column operations mod n bringing A (r x c) to diagonal form.

    Returns ``(diag, P)`` with ``P A Q = D`` for some unimodular Q; ``diag`` has length r,
    padded with zeros past ``min(r, c)``. Only P is tracked (enough for left kernels and spans).
    """
    A = np.array(A, dtype=np.int64) % n
    r, c = A.shape
    P = np.eye(r, dtype=np.int64)
    for t in range(min(r, c)):
        sub = A[t:, t:]
        nz = np.argwhere(sub != 0)
        if len(nz) == 0:
            break
        best = min(nz.tolist(), key=lambda ij: (math.gcd(int(sub[ij[0], ij[1]]), n), ij))
        i, j = best[0] + t, best[1] + t
        if i != t:
            A[[t, i]] = A[[i, t]]
            P[[t, i]] = P[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
        while True:
            for i in range(t + 1, r):
                b = int(A[i, t])
                if b == 0:
                    continue
                a = int(A[t, t])
                if b % a == 0:
                    q = b // a
                    A[i] = (A[i] - q * A[t]) % n
                    P[i] = (P[i] - q * P[t]) % n
                else:
                    g, s, u = _ext_gcd(a, b)
                    rt, ri = A[t].copy(), A[i].copy()
                    A[t] = (s * rt + u * ri) % n
                    A[i] = (-(b // g) * rt + (a // g) * ri) % n
                    pt, pi = P[t].copy(), P[i].copy()
                    P[t] = (s * pt + u * pi) % n
                    P[i] = (-(b // g) * pt + (a // g) * pi) % n
            for j in range(t + 1, c):
                b = int(A[t, j])
                if b == 0:
                    continue
                a = int(A[t, t])
                if b % a == 0:
                    A[:, j] = (A[:, j] - (b // a) * A[:, t]) % n
                else:
                    g, s, u = _ext_gcd(a, b)
                    ct, cj = A[:, t].copy(), A[:, j].copy()
                    A[:, t] = (s * ct + u * cj) % n
                    A[:, j] = (-(b // g) * ct + (a // g) * cj) % n
            if not A[t + 1:, t].any():
                break
    diag = [int(A[i, i]) if i < c else 0 for i in range(r)]
    return diag, P


def snf_left_kernel(A: np.ndarray, n: int) -> tuple[np.ndarray, list[int]]:
    """Generators of ``{v : v A = 0 mod n}`` and the orders of its cyclic summands."""
    r = A.shape[0]
    if r == 0:
        return np.zeros((0, 0), dtype=np.int64), []
    if A.shape[1] == 0:
        return np.eye(r, dtype=np.int64), [n] * r
    diag, P = diagonalize(A, n)
    gens, inv = [], []
    for i, d in enumerate(diag):
        g = math.gcd(n, d)
        if g > 1:
            gens.append((n // g) * P[i] % n)
            inv.append(g)
    return (np.array(gens, dtype=np.int64).reshape(len(gens), r), inv)


def gauss_left_kernel(A: np.ndarray, p: int) -> np.ndarray:
    """Basis of ``{v : v A = 0}`` over F_p by row reduction of ``A^T``."""
    r = A.shape[0]
    B = np.array(A, dtype=np.int64).T % p  # v A = 0  <=>  B v^T = 0
    m = B.shape[0]
    pivots = []
    row = 0
    for col in range(r):
        piv = next((i for i in range(row, m) if B[i, col]), None)
        if piv is None:
            continue
        B[[row, piv]] = B[[piv, row]]
        B[row] = B[row] * pow(int(B[row, col]), -1, p) % p
        for i in range(m):
            if i != row and B[i, col]:
                B[i] = (B[i] - B[i, col] * B[row]) % p
        pivots.append(col)
        row += 1
        if row == m:
            break
    free = [c for c in range(r) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(r, dtype=np.int64)
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -B[i, f] % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), r)


def left_kernel(A: np.ndarray, n: int, method: str = "auto") -> np.ndarray:
    if method == "auto":
        method = "gauss" if gr.is_prime(n) else "snf"
    if method == "gauss":
        if not gr.is_prime(n):
            raise ValueError("Gaussian elimination needs a prime modulus")
        return gauss_left_kernel(A, n)
    return snf_left_kernel(A, n)[0]


def _rows(a, dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    return np.zeros((0, dim), dtype=np.int64) if a.size == 0 else a.reshape(-1, dim)


def span_invariants(gens: np.ndarray, n: int) -> list[int]:
    """Orders of the cyclic summands of the row span (trivial summands dropped)."""
    if gens.size == 0:
        return []
    diag, _ = diagonalize(gens, n)
    k = min(gens.shape)
    out = [n // math.gcd(n, d) for d in diag[:k]]
    return sorted((o for o in out if o > 1), reverse=True)


def span_size(gens: np.ndarray, n: int) -> int:
    return math.prod(span_invariants(gens, n))


def span_elements(gens: np.ndarray, n: int, dim: int, cap: int | None = None) -> list[tuple[int, ...]]:
    cap = materialize_cap() if cap is None else cap
    size = span_size(gens, n) if gens.size else 1
    if size > cap:
        raise MaterializationCapExceeded(f"module value of size {size} exceeds materialization cap {cap}")
    elems = {tuple([0] * dim)}
    for g in gens:
        g = np.asarray(g) % n
        cur = np.array(sorted(elems), dtype=np.int64).reshape(len(elems), dim)
        order = n // math.gcd(n, math.gcd(*[int(x) for x in g])) if g.any() else 1
        for c in range(1, order):
            elems.update(map(tuple, ((cur + c * g) % n).tolist()))
    return sorted(elems)


def is_invertible(X: np.ndarray, n: int) -> bool:
    if X.shape[0] != X.shape[1]:
        return False
    if X.shape[0] == 0:
        return True
    diag, _ = diagonalize(X, n)
    return all(math.gcd(d, n) == 1 for d in diag)


def random_invertible(d: int, n: int, rng: random.Random, steps: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """A random invertible matrix and its inverse, as a product of elementary operations."""
    P = np.eye(d, dtype=np.int64)
    Pi = np.eye(d, dtype=np.int64)
    if d == 0:
        return P, Pi
    units = [u for u in range(1, n) if math.gcd(u, n) == 1]
    for _ in range(steps if steps is not None else 3 * d + 2):
        kind = rng.random()
        i = rng.randrange(d)
        if kind < 0.6 and d > 1:
            j = rng.choice([k for k in range(d) if k != i])
            c = rng.randrange(1, n)
            # P <- E P with E = I + c e_ij; E^-1 = I - c e_ij
            P[i] = (P[i] + c * P[j]) % n
            Pi[:, j] = (Pi[:, j] - c * Pi[:, i]) % n
        elif kind < 0.8 and d > 1:
            j = rng.choice([k for k in range(d) if k != i])
            P[[i, j]] = P[[j, i]]
            Pi[:, [i, j]] = Pi[:, [j, i]]
        else:
            u = rng.choice(units)
            P[i] = P[i] * u % n
            Pi[:, i] = Pi[:, i] * pow(u, -1, n) % n
    assert np.array_equal(P @ Pi % n, np.eye(d, dtype=np.int64))
    return P, Pi


# ------------------------------------------------------------------ submodules


@dataclass(eq=False)
class Submodule:
    """Row span of ``gens`` inside ``R^dim``."""

    ring: FiniteRing
    dim: int
    gens: np.ndarray

    def __post_init__(self):
        self.gens = _rows(self.gens, self.dim) % self.ring.modulus

    @cached_property
    def invariants(self) -> list[int]:
        return span_invariants(self.gens, self.ring.modulus)

    @property
    def size(self) -> int:
        return math.prod(self.invariants)

    @property
    def rank(self) -> int:
        """Number of free cyclic summands."""
        return sum(1 for g in self.invariants if g == self.ring.modulus)

    @property
    def n_generators(self) -> int:
        return len(self.invariants)

    @property
    def is_free(self) -> bool:
        return all(g == self.ring.modulus for g in self.invariants)

    def contains(self, vectors: np.ndarray) -> bool:
        vectors = _rows(vectors, self.dim)
        if self.size == self.ring.modulus ** self.dim:
            return True
        both = np.vstack([self.gens, vectors])
        return span_size(both, self.ring.modulus) == self.size

    def elements(self, cap: int | None = None) -> list[tuple[int, ...]]:
        return span_elements(self.gens, self.ring.modulus, self.dim, cap)

    def same_as(self, other: "Submodule") -> bool:
        return self.dim == other.dim and self.size == other.size and self.contains(other.gens)


def full_module(R: FiniteRing, d: int) -> Submodule:
    return Submodule(R, d, np.eye(d, dtype=np.int64))


# ------------------------------------------------------------------- RG-modules


@dataclass(eq=False)
class RGModule:
    ring: FiniteRing
    group: FiniteGroup
    mats: np.ndarray  # (|G|, d, d)
    name: str = "M"

    def __post_init__(self):
        G, n = self.group, self.ring.modulus
        self.mats = np.asarray(self.mats, dtype=np.int64) % n
        if self.mats.ndim != 3 or self.mats.shape[0] != G.order or self.mats.shape[1] != self.mats.shape[2]:
            raise AxiomError("action must be one square matrix per group element", {"shape": list(self.mats.shape)})
        d = self.rank
        if not np.array_equal(self.mats[G.identity], np.eye(d, dtype=np.int64) % n):
            raise AxiomError("identity element does not act as the identity matrix")
        for g in range(G.order):
            for h in range(G.order):
                if not np.array_equal(self.mats[g] @ self.mats[h] % n, self.mats[G.mul[g][h]]):
                    raise AxiomError("mat(gh) != mat(g) mat(h)", {"g": g, "h": h})

    @property
    def rank(self) -> int:
        return self.mats.shape[1]

    def act(self, v: np.ndarray, g: int) -> np.ndarray:
        return np.asarray(v) @ self.mats[g] % self.ring.modulus

    def to_json(self) -> dict:
        G = self.group
        return {"schema": "grpsheaves/module/v1", "ring": self.ring.to_json(), "rank": self.rank,
                "action": {G.labels[g]: self.mats[g].tolist() for g in range(G.order)}}


def zero_module(G: FiniteGroup, R: FiniteRing) -> RGModule:
    return RGModule(R, G, np.zeros((G.order, 0, 0), dtype=np.int64), "0")


def trivial_module(G: FiniteGroup, R: FiniteRing, d: int = 1) -> RGModule:
    return RGModule(R, G, np.broadcast_to(np.eye(d, dtype=np.int64), (G.order, d, d)).copy(), "R")


def sign_module(G: FiniteGroup, R: FiniteRing, N: Subgroup) -> RGModule:
    """Rank one, ``g`` acting by ``-1`` off the index-two subgroup N."""
    if G.order != 2 * N.order:
        raise ValueError("sign module needs an index-two subgroup")
    mats = np.array([[[1 if g in N.members else R.modulus - 1]] for g in range(G.order)], dtype=np.int64)
    return RGModule(R, G, mats, f"sign[{N.label()}]")


def gset_module(M: GSet, R: FiniteRing, name: str = "R[X]") -> RGModule:
    """Permutation module with basis the points of M: ``e_x . g = e_{x.g}``."""
    G = M.group
    mats = np.zeros((G.order, M.size, M.size), dtype=np.int64)
    for x in range(M.size):
        for g in range(G.order):
            mats[g, x, M.act[x][g]] = 1
    return RGModule(R, G, mats, name)


def regular_module(G: FiniteGroup, R: FiniteRing) -> RGModule:
    return gset_module(gr.regular_gset(G), R, "RG")


def permutation_module(K: Subgroup, R: FiniteRing) -> RGModule:
    return gset_module(gr.coset_gset(K), R, f"R[{K.label()}\\G]")


def direct_sum(*mods: RGModule) -> RGModule:
    G, R = mods[0].group, mods[0].ring
    d = sum(M.rank for M in mods)
    mats = np.zeros((G.order, d, d), dtype=np.int64)
    o = 0
    for M in mods:
        mats[:, o:o + M.rank, o:o + M.rank] = M.mats
        o += M.rank
    return RGModule(R, G, mats, "+".join(M.name for M in mods))


def conjugate_module(M: RGModule, P: np.ndarray, Pinv: np.ndarray) -> RGModule:
    """Same module in the basis where ``v -> v @ P`` is the isomorphism ``M -> M'``."""
    n = M.ring.modulus
    return RGModule(M.ring, M.group, np.einsum("ij,gjk,kl->gil", Pinv, M.mats, P) % n, M.name + "'")


def generating_set(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    span = frozenset([G.identity])
    for g in range(G.order):
        if g not in span:
            gens.append(g)
            span = gr.closure(G, gens)
    return gens


def fixed_submodule(M: RGModule, H: Subgroup, method: str = "auto") -> Submodule:
    """``M^H``: left kernel of ``[mat(h) - I]`` over a generating set of H."""
    n, d = M.ring.modulus, M.rank
    if d == 0:
        return Submodule(M.ring, 0, np.zeros((0, 0)))
    hs = generating_set_of(H)
    if not hs:
        return full_module(M.ring, d)
    A = np.hstack([M.mats[h] - np.eye(d, dtype=np.int64) for h in hs]) % n
    return Submodule(M.ring, d, left_kernel(A, n, method))


def generating_set_of(H: Subgroup) -> list[int]:
    G = H.group
    gens: list[int] = []
    span = frozenset([G.identity])
    for h in sorted(H.members):
        if h not in span:
            gens.append(h)
            span = gr.closure(G, gens)
    return gens


def hom_equations(M: RGModule, N: RGModule) -> np.ndarray:
    """Matrix L with ``vec(X) @ L = 0`` iff ``mat_M(g) X = X mat_N(g)`` for generators g (row-major vec)."""
    d, e = M.rank, N.rank
    blocks = []
    for g in generating_set(M.group):
        blocks.append(np.kron(M.mats[g].T, np.eye(e, dtype=np.int64)) - np.kron(np.eye(d, dtype=np.int64), N.mats[g]))
    if not blocks:
        return np.zeros((d * e, 0), dtype=np.int64)
    return np.hstack(blocks) % M.ring.modulus


def is_equivariant(M: RGModule, N: RGModule, X: np.ndarray) -> bool:
    n = M.ring.modulus
    return all(np.array_equal(M.mats[g] @ X % n, X @ N.mats[g] % n) for g in range(M.group.order))


def find_module_iso(M: RGModule, N: RGModule, seed: int = 0, tries: int = 400) -> np.ndarray | None:
    """An invertible equivariant X (``v -> v @ X``), searched inside the solution space of Hom_G."""
    n = M.ring.modulus
    if M.rank != N.rank:
        return None
    d = M.rank
    if d == 0:
        return np.zeros((0, 0), dtype=np.int64)
    basis = left_kernel(hom_equations(M, N), n)
    if basis.size == 0:
        return None
    rng = random.Random(seed)
    cands = [b for b in basis]
    for _ in range(tries):
        coeffs = np.array([rng.randrange(n) for _ in range(len(basis))], dtype=np.int64)
        cands.append(coeffs @ basis % n)
    for x in cands:
        X = x.reshape(d, d) % n
        if is_invertible(X, n) and is_equivariant(M, N, X):
            return X
    return None


def module_gset(M: RGModule, cap: int | None = None) -> GSet:
    """The underlying G-set of M (all of ``R^d``)."""
    cap = materialize_cap() if cap is None else cap
    n, d = M.ring.modulus, M.rank
    if n ** d > cap:
        raise MaterializationCapExceeded(f"module of size {n ** d} exceeds materialization cap {cap}")
    elems = np.array(np.meshgrid(*[range(n)] * d, indexing="ij")).reshape(d, -1).T if d else np.zeros((1, 0), int)
    weights = n ** np.arange(d - 1, -1, -1) if d else np.zeros(0, int)
    act = []
    imgs = [(elems @ M.mats[g] % n) @ weights for g in range(M.group.order)]
    for i in range(len(elems)):
        act.append(tuple(int(imgs[g][i]) for g in range(M.group.order)))
    return GSet(M.group, tuple(act), tuple(tuple(int(c) for c in v) for v in elems))


def module_corpus(G: FiniteGroup, R: FiniteRing, rank_bound: int, seed: int = 0, n_random: int = 3) -> list[RGModule]:
    """Zero, trivial, sign, permutation modules ``R[K\\G]`` (regular included) and seeded random
    direct sums in a random basis, all of rank at most ``rank_bound``."""
    mods = [zero_module(G, R)]
    if rank_bound >= 1:
        mods.append(trivial_module(G, R))
        for N in gr.enumerate_subgroups(G):
            if 2 * N.order == G.order:
                mods.append(sign_module(G, R, N))
    for K in gr.enumerate_subgroups(G):
        if 1 < G.order // K.order <= rank_bound:
            mods.append(regular_module(G, R) if K.order == 1 else permutation_module(K, R))
    rng = random.Random(seed)
    base = [M for M in mods if M.rank > 0]
    for _ in range(n_random if base else 0):
        A = rng.choice(base)
        pool = [B for B in base if A.rank + B.rank <= rank_bound]
        M = direct_sum(A, rng.choice(pool)) if pool and rng.random() < 0.7 else A
        P, Pi = random_invertible(M.rank, R.modulus, rng)
        mods.append(conjugate_module(M, P, Pi))
    return mods


# ------------------------------------------------------------ module presheaves


@dataclass(eq=False)
class ModulePresheaf:
    cat: FinCat
    ring: FiniteRing
    values: tuple[Submodule, ...]
    maps: tuple[np.ndarray, ...]  # for u: y -> x, a (dim x) x (dim y) matrix
    check: bool = True

    def __post_init__(self):
        self.values = tuple(self.values)
        n = self.ring.modulus
        self.maps = tuple(np.asarray(A, dtype=np.int64).reshape(self.values[self.cat.cod[u]].dim,
                                                                 self.values[self.cat.dom[u]].dim) % n
                          for u, A in enumerate(self.maps))
        if self.check:
            self.validate()

    def validate(self) -> None:
        C, n = self.cat, self.ring.modulus
        if len(self.values) != C.n_objects or len(self.maps) != C.n_morphisms:
            raise AxiomError("module presheaf has the wrong number of values or maps")
        for x in C.objects:
            V = self.values[x]
            if not np.array_equal(V.gens @ self.maps[C.identity[x]] % n, V.gens):
                raise AxiomError("identity does not restrict to the identity", {"object": x})
        for u in C.morphisms:
            x, y = C.cod[u], C.dom[u]
            img = self.values[x].gens @ self.maps[u] % n
            if not self.values[y].contains(img):
                raise AxiomError("restriction map leaves the value module", {"morphism": u})
            for v, uv in C.comp[u].items():
                if not np.array_equal(img @ self.maps[v] % n, self.values[x].gens @ self.maps[uv] % n):
                    raise AxiomError("functoriality fails", {"f": u, "g": v})

    def sizes(self) -> list[int]:
        return [V.size for V in self.values]

    def ranks(self) -> list[int]:
        return [V.rank for V in self.values]

    def underlying(self, cap: int | None = None) -> tuple[Presheaf, list[list[tuple[int, ...]]]]:
        """The presheaf of finite sets (elements as tuples, sorted)."""
        C, n = self.cat, self.ring.modulus
        elems = [V.elements(cap) for V in self.values]
        pos = [{e: i for i, e in enumerate(es)} for es in elems]
        maps = []
        for u in C.morphisms:
            x, y = C.cod[u], C.dom[u]
            if not elems[x]:
                maps.append(())
                continue
            E = np.array(elems[x], dtype=np.int64).reshape(len(elems[x]), self.values[x].dim)
            img = (E @ self.maps[u] % n).tolist()
            maps.append(tuple(pos[y][tuple(r)] for r in img))
        labels = tuple(tuple(es) for es in elems)
        return Presheaf(C, tuple(len(es) for es in elems), tuple(maps), labels, check=False), elems


def structure_sheaf(C: FinCat, R: FiniteRing) -> ModulePresheaf:
    """R at every object with identity restrictions."""
    one = np.eye(1, dtype=np.int64)
    return ModulePresheaf(C, R, tuple(full_module(R, 1) for _ in C.objects), tuple(one for _ in C.morphisms))


def module_fixed_point_sheaf(M: RGModule, E) -> ModulePresheaf:
    """``x -> M^{K(x)}``; a morphism represented by ``(x, y, g)`` acts by ``mat(g)``."""
    C = E.cat
    values = tuple(fixed_submodule(M, E.kernel_subgroup(x)) for x in C.objects)
    maps = tuple(M.mats[E.rep_triple(c)[2]] for c in C.morphisms)
    return ModulePresheaf(C, M.ring, values, maps)


def module_evaluate_at_x0(F: ModulePresheaf, E) -> RGModule:
    """``F(x0)`` as an RG-module; the value at x0 must be all of its ambient ``R^d``."""
    T = E.source
    x0 = T.poset.initial_object()
    V = F.values[x0]
    if V.size != F.ring.modulus ** V.dim:
        raise ValueError("value at x0 is a proper submodule of its ambient space")
    G = T.group
    mats = np.array([F.maps[E.rho.mor[T.index[(x0, x0, g)]]] for g in range(G.order)], dtype=np.int64)
    return RGModule(F.ring, G, mats.reshape(G.order, V.dim, V.dim), "F(x0)")


def twist(F: ModulePresheaf, rng: random.Random) -> ModulePresheaf:
    """Same presheaf after an independent random change of basis at every object."""
    n = F.ring.modulus
    T = [random_invertible(V.dim, n, rng) for V in F.values]
    values = tuple(Submodule(F.ring, V.dim, V.gens @ T[x][0] % n) for x, V in enumerate(F.values))
    maps = tuple(T[F.cat.cod[u]][1] @ A @ T[F.cat.dom[u]][0] % n for u, A in enumerate(F.maps))
    return ModulePresheaf(F.cat, F.ring, values, maps)


def _linear_comparison(F: ModulePresheaf, site: Site, x: int) -> tuple[bool, dict]:
    """``F(x) -> Nat(S_min(x), F)``, with Nat computed as the submodule of ``F(x0)`` fixed by
    the automorphisms of x0 that fix a chosen ``u0: x0 -> x``."""
    C, n = F.cat, F.ring.modulus
    x0 = site.initial
    aut0 = C.hom[(x0, x0)]
    homs = C.hom[(x0, x)]
    u0 = homs[0]
    if set(homs) != {C.comp[u0][w] for w in aut0}:
        raise ValueError("linear criterion needs Hom(x0, x) to be one Aut(x0)-orbit")
    stab = [w for w in aut0 if C.comp[u0][w] == u0]
    V0 = F.values[x0]
    d0 = V0.dim
    if d0 and V0.gens.shape[0]:
        cons = np.hstack([F.maps[w] - np.eye(d0, dtype=np.int64) for w in stab]) % n
        coeff = left_kernel(V0.gens @ cons % n, n, "snf")
        nat = coeff @ V0.gens % n if coeff.size else np.zeros((0, d0), dtype=np.int64)
    else:
        nat = np.zeros((0, d0), dtype=np.int64)
    nat_size = span_size(nat, n) if nat.size else 1
    img = F.values[x].gens @ F.maps[u0] % n
    img_size = span_size(img, n) if img.size else 1
    size = F.values[x].size
    ok = size == img_size == nat_size
    return ok, {"object": x, "F(x)": size, "image": img_size, "Nat(S,F)": nat_size}


def is_module_sheaf(F: ModulePresheaf, site: Site, cap: int | None = None, method: str = "auto",
                    seed: int = 0) -> Report:
    """Sheaf test on the underlying sets, plus linearity of the comparison maps; above the
    materialization cap (or with ``method="linear"``) a purely linear criterion on minimal sieves."""
    cap = materialize_cap() if cap is None else cap
    if method == "auto":
        method = "set" if max(F.sizes(), default=1) <= cap or not site.has_minimal_sieves else "linear"
    if method == "linear":
        for x in F.cat.objects:
            ok, info = _linear_comparison(F, site, x)
            if not ok:
                return Report(False, info, {"route": "linear"})
        return Report(True, None, {"route": "linear", "sizes": F.sizes()})
    P, elems = F.underlying(cap)
    rep = is_sheaf(P, site)
    if not rep:
        return Report(False, rep.witness, {"route": "set", **rep.details})
    lin = _comparison_linear(F, site, P, elems, random.Random(seed))
    if lin is not None:
        return Report(False, lin, {"route": "set"})
    return Report(True, None, {"route": "set", "sizes": F.sizes(), **rep.details})


def _comparison_linear(F: ModulePresheaf, site: Site, P: Presheaf, elems, rng: random.Random,
                       samples: int = 64) -> dict | None:
    """Spot-check that ``a -> (F(u) a)_u`` over the checked sieves respects + and scalars."""
    n = F.ring.modulus
    C = F.cat
    for x in C.objects:
        S = minimal_sieve(site, x) if site.has_minimal_sieves else None
        members = S.sorted_members() if S is not None else tuple(C.into[x])
        es = elems[x]
        if not es:
            continue
        pos = {e: i for i, e in enumerate(es)}

        def vec(i: int) -> list[tuple[int, ...]]:
            return [elems[C.dom[u]][P.maps[u][i]] for u in members]

        pairs = [(rng.randrange(len(es)), rng.randrange(len(es)), rng.randrange(n)) for _ in range(samples)]
        for i, j, r in pairs:
            a, b = np.array(es[i]), np.array(es[j])
            k = pos[tuple(((a + r * b) % n).tolist())]
            lhs = vec(k)
            rhs = [tuple(((np.array(p) + r * np.array(q)) % n).tolist()) for p, q in zip(vec(i), vec(j))]
            if lhs != rhs:
                return {"object": x, "a": list(es[i]), "b": list(es[j]), "scalar": r}
    return None


def coherent_check(F: ModulePresheaf) -> Report:
    """Per-object generator counts; every finite value is finitely generated, so this never fails."""
    return Report(True, None, {"generators": [V.n_generators for V in F.values],
                               "invariants": [V.invariants for V in F.values]})


def linear_natural_iso(F: ModulePresheaf, H: ModulePresheaf, comps: Sequence[np.ndarray]) -> dict | None:
    """None when the matrices ``comps[x]: F(x) -> H(x)`` form a natural linear isomorphism,
    else a witness."""
    C, n = F.cat, F.ring.modulus
    for x in C.objects:
        V, W = F.values[x], H.values[x]
        img = V.gens @ comps[x] % n
        if not W.contains(img):
            return {"object": x, "reason": "component leaves the target value"}
        img_size = span_size(img, n) if img.size else 1
        if not V.size == img_size == W.size:
            return {"object": x, "reason": "component is not bijective", "sizes": [V.size, img_size, W.size]}
    for u in C.morphisms:
        x, y = C.cod[u], C.dom[u]
        g = F.values[x].gens
        if not np.array_equal(g @ F.maps[u] @ comps[y] % n, g @ comps[x] @ H.maps[u] % n):
            return {"morphism": u, "reason": "not natural"}
    return None


def verify_module_equivalence(G: FiniteGroup, R: FiniteRing, bundle, rank_bound: int, n_sheaves: int = 4,
                              seed: int = 0, cap: int | None = None, gset_cap: int = 64) -> Report:
    """Module -> sheaf -> value at x0 recovers the module; sampled module sheaves in random bases
    return to themselves through their value at x0."""
    from .grpsites import upsilon_pull
    E = bundle.extension
    site = bundle.c_site
    failures: list[dict] = []
    corpus = module_corpus(G, R, rank_bound, seed)
    per_module = []
    try:
        for i, M in enumerate(corpus):
            F = module_fixed_point_sheaf(M, E)
            r = is_module_sheaf(F, site, cap)
            if not r:
                failures.append({"case": i, "module": M.name, "reason": "fixed-point module presheaf is not a sheaf",
                                 "witness": r.witness})
            N = module_evaluate_at_x0(F, E)
            X = find_module_iso(M, N, seed)
            if X is None:
                failures.append({"case": i, "module": M.name, "reason": "value at x0 not isomorphic to module"})
            if R.modulus ** M.rank <= gset_cap:
                Ms = module_gset(M, gset_cap)
                Fs, _ = F.underlying(gset_cap)
                if not gr.gsets_isomorphic(Ms, upsilon_pull(Fs, bundle)):
                    failures.append({"case": i, "module": M.name, "reason": "set-level roundtrip differs"})
            per_module.append({"module": M.name, "rank": M.rank, "ranks": F.ranks(), "route": r.details.get("route")})
        rng = random.Random(seed + 1)
        nonzero = [M for M in corpus if M.rank > 0]
        for i in range(n_sheaves if nonzero else 0):
            M = rng.choice(nonzero)
            F = twist(module_fixed_point_sheaf(M, E), rng)
            if not is_module_sheaf(F, site, cap):
                failures.append({"sheaf": i, "reason": "twisted sheaf is not a sheaf"})
            N = module_evaluate_at_x0(F, E)
            H = module_fixed_point_sheaf(N, E)
            comps = [F.maps[E.canonical_morphism(x)] for x in F.cat.objects]
            bad = linear_natural_iso(F, H, comps)
            if bad is not None:
                failures.append({"sheaf": i, "reason": "roundtrip not naturally isomorphic", **bad})
    except BudgetExceeded as exc:
        return Report(False, {"budget": str(exc)})
    details = {"bundle": bundle.name, "ring": R.name, "rank_bound": rank_bound, "modules": len(corpus),
               "sheaf_samples": n_sheaves, "seed": seed, "per_module": per_module}
    reg = next((m for m in per_module if m["module"] == "RG"), None)
    if reg is not None:
        details["regular_ranks"] = reg["ranks"]
    return Report(not failures, failures[0] if failures else None, details)


def bridge_table(G: FiniteGroup, R: FiniteRing) -> list[dict]:
    """For all subgroup pairs (H, K): rank of ``R[K\\G]^H``, H-fixed cosets, and H-orbits on ``K\\G``."""
    subs = gr.enumerate_subgroups(G)
    rows = []
    for K in subs:
        X = gr.coset_gset(K)
        M = gset_module(X, R)
        for H in subs:
            seen, n_orb = set(), 0
            for x in range(X.size):
                if x in seen:
                    continue
                n_orb += 1
                stack = [x]
                while stack:
                    y = stack.pop()
                    if y in seen:
                        continue
                    seen.add(y)
                    stack.extend(X.act[y][h] for h in H.members)
            rows.append({"H": H.label(), "K": K.label(), "rank": fixed_submodule(M, H).rank,
                         "fixed_points": len(gr.fixed_points(X, H)), "orbits": n_orb})
    return rows
