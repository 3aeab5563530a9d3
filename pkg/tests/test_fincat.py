import random

import pytest
from hypothesis import given, strategies as st

import grpsheaves.groups as gr
import grpsheaves.grpsites as gs
from grpsheaves.fincat import (BudgetExceeded, CFunctor, FinCat, Presheaf, colimit, comma_under, constant_presheaf,
                               count_nat, discrete_category, find_isomorphism, find_iso, full_subcategory,
                               identity_functor, is_filtered, left_kan, limit, nat_set, opposite, poset_category,
                               representable, restrict, right_kan, terminal_presheaf)
from grpsheaves.groups import AxiomError

import oracles

Z2 = gr.cyclic_group(2)
S3 = gr.symmetric_group(3)


def small_categories():
    """A handful of categories with at most 8 objects."""
    out = [discrete_category(2), one_object(Z2), one_object(gr.cyclic_group(3))]
    out.append(poset_category([[True, True, True], [False, True, True], [False, False, True]]))
    diamond = [[True, True, True, True], [False, True, False, True], [False, False, True, True],
               [False, False, False, True]]
    out.append(poset_category(diamond))
    out.append(gs.build_bundle(Z2, "all", "transporter").c_site.cat)
    out.append(gs.build_bundle(Z2, "all", "orbit").c_site.cat)
    return out


def one_object(G):
    return gs.one_object_category(G)


def test_composition_table_validated():
    # one object, morphisms id=0, a=1, b=2 with a.a=b, b.b=a, a.b=a, b.a=b
    table = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 0): 1, (2, 0): 2,
             (1, 1): 2, (2, 2): 1, (1, 2): 1, (2, 1): 2}
    assert table[(table[(1, 1)], 2)] != table[(1, table[(1, 2)])]  # (aa)b != a(ab)
    with pytest.raises(AxiomError) as exc:
        FinCat.build(1, [0, 0, 0], [0, 0, 0], [0], table)
    assert exc.value.witness


def test_representable_examples():
    R = representable(one_object(Z2), 0)
    assert R.sizes == (2,)
    D = discrete_category(3)
    assert representable(D, 1).sizes == (0, 1, 0)
    O = gs.build_bundle(Z2, "all", "orbit").c_site.cat
    assert representable(O, 0).sizes == (2, 0)


@pytest.mark.parametrize("k", range(7))
def test_yoneda_counts(k):
    C = small_categories()[k]
    rng = random.Random(k)
    for _ in range(3):
        F = gs.random_presheaf(C, rng, max_generators=2)
        for x in C.objects:
            assert count_nat(representable(C, x), F) == F.sizes[x]


@pytest.mark.parametrize("k", range(7))
def test_nat_set_against_product_oracle(k):
    C = small_categories()[k]
    rng = random.Random(100 + k)
    for _ in range(3):
        F = gs.random_presheaf(C, rng, max_generators=1)
        H = gs.random_presheaf(C, rng, max_generators=1)
        if F.total_size() > 6 or H.total_size() > 6:
            continue
        ours = sorted(n.components for n in nat_set(F, H))
        theirs = sorted(tuple(tuple(c) for c in fam) for fam in oracles.nat_by_product(F, H))
        assert ours == theirs
        assert all(n.is_natural() for n in nat_set(F, H))


def test_nat_contains_identity_and_budget():
    C = small_categories()[5]
    F = gs.random_presheaf(C, random.Random(3))
    ident = tuple(tuple(range(s)) for s in F.sizes)
    assert ident in {n.components for n in nat_set(F, F)}
    big = constant_presheaf(discrete_category(6), 4)
    with pytest.raises(BudgetExceeded):
        count_nat(big, big, budget=50)


def test_nat_from_minimal_sieve_into_regular_fixed_points():
    b = gs.build_bundle(Z2, "all", "orbit")
    from grpsheaves.sites import minimal_sieve, nat_from_sieve
    F = gs.fixed_point_sheaf(gr.regular_gset(Z2), b.extension)
    S = minimal_sieve(b.c_site, 1)
    assert nat_from_sieve(S, F) == []


def test_filtered_examples():
    top = poset_category([[True, True], [False, True]])
    assert is_filtered(top)[0]
    ok, why = is_filtered(discrete_category(2))
    assert not ok and why["reason"] == "no cocone"


def test_comma_under_identity_and_constant():
    C = poset_category([[True, True, True], [False, True, True], [False, False, True]])
    cm = comma_under(0, identity_functor(C))
    assert cm.cat.n_objects == 3  # everything under the bottom
    T = discrete_category(1)
    const = CFunctor(C, T, (0, 0, 0), tuple(0 for _ in C.morphisms))
    cm = comma_under(0, const)
    assert find_isomorphism(cm.cat, C) is not None


@pytest.mark.parametrize("gname", ["z2", "s3"])
def test_comma_under_pi_has_poset_skeleton(gname):
    G = gr.BUILTIN_GROUPS[gname]()
    b = gs.build_bundle(G, "all", "transporter")
    cm = comma_under(0, b.pi)
    C = cm.cat
    # isomorphism classes of objects correspond to the poset elements
    iso = {}
    for o in C.objects:
        cls = frozenset(o2 for o2 in C.objects if C.hom[(o, o2)] and C.hom[(o2, o)])
        iso[cls] = True
    assert len(iso) == b.transporter.poset.size
    assert is_filtered(opposite(C))[0]


def test_colimit_limit_examples():
    C = poset_category([[True, True, True], [False, True, False], [False, False, True]])  # bottom below a, b
    F = terminal_presheaf(C)
    assert colimit(F).size == 1 and len(limit(F)) == 1
    D = discrete_category(2)
    F = Presheaf(D, (1, 1), ((0,), (0,)))
    assert colimit(F).size == 2 and len(limit(F)) == 1


def test_colimit_over_transporter_is_value_at_x0():
    b = gs.build_bundle(S3, "all", "transporter")
    rng = random.Random(5)
    for _ in range(5):
        F = gs.random_presheaf(b.pg_site.cat, rng)
        # colimit over P x| G, G acting: orbits of F(x0) under Aut(x0); over P alone: F(x0)
        incl = gs.poset_inclusion(b.transporter)
        assert colimit(restrict(incl, F)).size == F.sizes[b.x0]


def test_kan_along_identity():
    C = small_categories()[6]
    F = gs.random_presheaf(C, random.Random(2))
    I = identity_functor(C)
    L = left_kan(I, F)
    R = right_kan(I, F)
    assert find_iso(L.presheaf, F) is not None and find_iso(R.presheaf, F) is not None


def test_left_kan_pi_of_constant_is_value():
    b = gs.build_bundle(Z2, "all", "transporter")
    M = gr.disjoint_union(gr.regular_gset(Z2), gr.point_gset(Z2))
    kappa = restrict(b.pi, gs.gset_to_presheaf(M))
    assert set(kappa.sizes) == {M.size}
    L = left_kan(b.pi, kappa).presheaf
    assert gr.gsets_isomorphic(gs.presheaf_to_gset(L, Z2), M)


def test_restrict_identity_and_full_subcategory():
    C = small_categories()[4]
    F = gs.random_presheaf(C, random.Random(4))
    assert restrict(identity_functor(C), F).maps == F.maps
    sub, incl = full_subcategory(C, [1, 3])
    R = restrict(incl, F)
    assert R.sizes == (F.sizes[1], F.sizes[3])


def test_opposite_involution_and_initial():
    for C in small_categories():
        CC = opposite(opposite(C))
        assert CC.dom == C.dom and CC.cod == C.cod and CC.comp == C.comp
    le = [[True, True, True], [False, True, True], [False, False, True]]
    P = poset_category(le)
    Pop = opposite(P)
    assert all(Pop.hom[(2, y)] for y in Pop.objects)


@pytest.mark.parametrize("gname", ["z2", "z3"])
def test_opposite_transporter(gname):
    G = gr.BUILTIN_GROUPS[gname]()
    P = gr.subgroup_poset(G, gr.enumerate_subgroups(G))
    T = gs.transporter_category(P)
    Top = gs.transporter_category(P.opposite())
    assert find_isomorphism(opposite(T.cat), Top.cat) is not None


@pytest.mark.parametrize("k", [0, 3, 4, 5, 6])
def test_kan_adjunction_counts(k):
    """|Nat(LK F, H)| = |Nat(F, Res H)| and |Nat(Res H, F)| = |Nat(H, RK F)|."""
    C = small_categories()[k]
    rng = random.Random(k)
    # functor into the one-object category of the trivial group (collapse) and identity
    T = discrete_category(1)
    alphas = [identity_functor(C), CFunctor(C, T, tuple(0 for _ in C.objects), tuple(0 for _ in C.morphisms))]
    for alpha in alphas:
        D = alpha.target
        for _ in range(2):
            F = gs.random_presheaf(C, rng, max_generators=2)
            H = gs.random_presheaf(D, rng, max_generators=2)
            L = left_kan(alpha, F).presheaf
            R = right_kan(alpha, F).presheaf
            assert count_nat(L, H) == count_nat(F, restrict(alpha, H))
            assert count_nat(restrict(alpha, H), F) == count_nat(H, R)


def test_kan_adjunction_counts_pi():
    b = gs.build_bundle(Z2, "all", "transporter")
    rng = random.Random(9)
    for _ in range(3):
        F = gs.random_presheaf(b.pg_site.cat, rng, max_generators=2)
        M = rng.choice(gr.gset_iso_classes(Z2, 3))
        H = gs.gset_to_presheaf(M)
        L = left_kan(b.pi, F).presheaf
        R = right_kan(b.pi, F).presheaf
        assert count_nat(L, H) == count_nat(F, restrict(b.pi, H))
        assert count_nat(restrict(b.pi, H), F) == count_nat(H, R)


@given(st.integers(0, 10_000))
def test_colimit_invariant_under_category_iso(seed):
    """Relabel objects of a category; colimit and limit sizes of the transported presheaf agree."""
    rng = random.Random(seed)
    C = small_categories()[rng.randrange(7)]
    F = gs.random_presheaf(C, rng, max_generators=2)
    perm = list(C.objects)
    rng.shuffle(perm)
    C2 = FinCat.build(C.n_objects, [perm[x] for x in C.dom], [perm[x] for x in C.cod],
                      [C.identity[perm.index(y)] for y in range(C.n_objects)],
                      {(f, g): fg for f in C.morphisms for g, fg in C.comp[f].items()})
    F2 = Presheaf(C2, tuple(F.sizes[perm.index(y)] for y in range(C.n_objects)), F.maps)
    assert colimit(F2).size == colimit(F).size
    assert len(limit(F2)) == len(limit(F))


@given(st.integers(0, 10_000))
def test_nat_closed_under_iso_composition(seed):
    rng = random.Random(seed)
    C = small_categories()[rng.randrange(7)]
    F = gs.random_presheaf(C, rng, max_generators=2)
    H = gs.random_presheaf(C, rng, max_generators=1)
    # relabel H's elements by random permutations: an isomorphism H -> H'
    perms = []
    for s in H.sizes:
        p = list(range(s))
        rng.shuffle(p)
        perms.append(p)
    maps = []
    for u in C.morphisms:
        y, z = C.dom[u], C.cod[u]
        inv_z = {perms[z][a]: a for a in range(H.sizes[z])}
        maps.append(tuple(perms[y][H.maps[u][inv_z[b]]] for b in range(H.sizes[z])))
    H2 = Presheaf(C, H.sizes, tuple(maps))
    moved = {tuple(tuple(perms[x][c] for c in comp) for x, comp in enumerate(n.components)) for n in nat_set(F, H)}
    assert moved == {n.components for n in nat_set(F, H2)}


def test_to_dot_deterministic():
    C = small_categories()[6]
    assert C.to_dot() == C.to_dot() and C.to_dot().startswith("digraph")
