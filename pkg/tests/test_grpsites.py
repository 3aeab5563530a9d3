import random

import pytest

import grpsheaves.groups as gr
import grpsheaves.grpsites as gs
from grpsheaves.fincat import (CFunctor, Presheaf, discrete_category, find_iso, left_kan, limit, poset_category,
                               representable, restrict, right_kan)
from grpsheaves.groups import AxiomError
from grpsheaves.sites import TRIVIAL, Site, is_sheaf, sheafify

GROUPS = {n: gr.BUILTIN_GROUPS[n]() for n in ["z2", "z3", "z4", "s3", "d4"]}


@pytest.mark.parametrize("name", ["z2", "s3", "d4"])
def test_transporter_and_orbit_hom_counts(name):
    G = GROUPS[name]
    subs = gr.enumerate_subgroups(G)
    bt = gs.build_bundle(G, "all", "transporter")
    bo = gs.build_bundle(G, "all", "orbit")
    T, O = bt.c_site.cat, bo.c_site.cat
    for i, H in enumerate(subs):
        for j, K in enumerate(subs):
            trans = gs.hom_transporter(H, K)
            assert len(T.hom[(i, j)]) == len(trans)
            # orbit category: G-maps H\G -> K\G are the H-fixed cosets of K
            assert len(O.hom[(i, j)]) == len(gr.fixed_points(gr.coset_gset(K), H))
            assert len(O.hom[(i, j)]) * K.order == len(T.hom[(i, j)])


def test_hom_transporter_examples():
    S3 = GROUPS["s3"]
    subs = gr.enumerate_subgroups(S3)
    one, t12, whole = subs[0], gr.subgroup(S3, [S3.element("(1 2)")]), subs[-1]
    assert len(gs.hom_transporter(one, t12)) == 6
    assert len(gs.hom_transporter(t12, t12)) == 2  # normalizer
    assert gs.hom_transporter(whole, t12) == []
    assert len(gs.hom_transporter(t12, whole)) == 6


def test_automorphisms_of_discrete_coset_poset():
    S3 = GROUPS["s3"]
    for H in gr.enumerate_subgroups(S3):
        X = gr.coset_gset(H)
        T = gs.transporter_category(gr.discrete_gposet(X))
        home = next(i for i, c in enumerate(gr.right_cosets(H)) if S3.identity in c)
        assert T.aut(home) == H.members


def test_pi_fibers_and_rho():
    b = gs.build_bundle(GROUPS["s3"], "all", "transporter")
    C = b.pg_site.cat
    for x in C.objects:
        for y in C.objects:
            gs_ = [b.pi.mor[u] for u in C.hom[(x, y)]]
            assert len(gs_) == len(set(gs_))
    assert b.rho.obj == tuple(C.objects)


@pytest.mark.parametrize("name", list(GROUPS))
def test_continuity_of_pi_and_cocontinuity(name):
    for b in gs.standard_bundles(GROUPS[name]):
        r = gs.is_continuous(b.pi, b.pg_site, b.g_site)
        assert r and r.details == {"cover_preserving": True, "flat": True, "continuous": True}
        assert gs.is_cocontinuous(b.pi, b.pg_site, b.g_site)
        assert gs.is_cocontinuous(b.rho, b.pg_site, b.c_site)


def test_flatness_counterexample():
    diamond = poset_category([[True, True, True, True], [False, True, False, True], [False, False, True, True],
                              [False, False, False, True]])
    D = discrete_category(2)
    alpha = CFunctor(D, diamond, (1, 2), (diamond.identity[1], diamond.identity[2]))
    r = gs.is_continuous(alpha, Site(D, TRIVIAL), Site(diamond, TRIVIAL))
    assert not r
    assert r.details["cover_preserving"] and not r.details["flat"]
    assert r.witness["object"] == 0


def test_fixed_point_sheaf_examples():
    Z2 = GROUPS["z2"]
    b = gs.build_bundle(Z2, "all", "orbit")
    assert gs.fixed_point_sheaf(gr.regular_gset(Z2), b.extension).sizes == (2, 0)
    assert gs.fixed_point_sheaf(gr.point_gset(Z2), b.extension).sizes == (1, 1)
    S3 = GROUPS["s3"]
    bs = gs.build_bundle(S3, "all", "orbit")
    F = gs.fixed_point_sheaf(gr.regular_gset(S3), bs.extension)
    assert F.sizes == tuple(6 if H.order == 1 else 0 for H in gr.enumerate_subgroups(S3))
    X = gr.coset_gset(gr.subgroup(S3, [S3.element("(1 2)")]))
    assert gs.fixed_point_sheaf(X, bs.extension).sizes == tuple(
        len(gr.fixed_points(X, H)) for H in gr.enumerate_subgroups(S3))


@pytest.mark.parametrize("name", ["z2", "z4", "s3"])
def test_evaluate_representable_is_coset_gset(name):
    G = GROUPS[name]
    b = gs.build_bundle(G, "all", "orbit")
    for i, K in enumerate(gr.enumerate_subgroups(G)):
        M = gs.evaluate_at_x0(representable(b.c_site.cat, i), b.extension)
        assert gr.gsets_isomorphic(M, gr.coset_gset(K))


@pytest.mark.parametrize("name", ["z2", "z3", "s3"])
def test_upsilon_push_is_fixed_point_sheaf(name):
    G = GROUPS[name]
    for b in gs.standard_bundles(G):
        for M in gr.gset_iso_classes(G, 3):
            F = gs.upsilon_push(M, b)
            assert find_iso(F, gs.fixed_point_sheaf(M, b.extension)) is not None
            assert gr.gsets_isomorphic(gs.upsilon_pull(F, b), M)


def test_broken_quotient_rejected():
    S3 = GROUPS["s3"]
    T = gs.build_bundle(S3, "all", "transporter").transporter
    kern = [[] for _ in T.cat.objects]
    kern[0] = sorted(gr.subgroup(S3, [S3.element("(1 2)")]).members)
    with pytest.raises(AxiomError) as exc:
        gs.orbit_quotient(T, kern)
    w = exc.value.witness
    assert set(w) == {"f", "g", "k", "object"}
    C = T.cat
    assert C.cod[w["g"]] == w["object"] == C.dom[w["f"]]


def test_kernel_outside_automorphisms_rejected():
    S3 = GROUPS["s3"]
    T = gs.build_bundle(S3, "all", "transporter").transporter
    t12 = gr.subgroup(S3, [S3.element("(1 2)")])
    j = next(i for i, H in enumerate(T.subgroups) if H.members == t12.members)
    kern = [[] for _ in T.cat.objects]
    kern[j] = [S3.element("(1 2 3)")]
    with pytest.raises(AxiomError):
        gs.orbit_quotient(T, kern)


def test_orbit_kernels_congruent_everywhere():
    for G in GROUPS.values():
        for b in gs.standard_bundles(G):
            E = b.extension
            for c in E.cat.morphisms:
                assert E.rho.mor[E.reps[c]] == c


def test_transporter_site_needs_initial_object():
    Z2 = GROUPS["z2"]
    P = gr.discrete_gposet(gr.regular_gset(Z2))
    with pytest.raises(ValueError, match="initial"):
        gs.transporter_site(P)


def test_one_object_site_every_presheaf_is_sheaf():
    for G in GROUPS.values():
        site = gs.one_object_site(G)
        for M in gr.gset_iso_classes(G, 4):
            assert is_sheaf(gs.gset_to_presheaf(M), site)


def test_gset_presheaf_roundtrip():
    S3 = GROUPS["s3"]
    for M in gr.gset_iso_classes(S3, 4):
        N = gs.presheaf_to_gset(gs.gset_to_presheaf(M), S3)
        assert N.act == M.act


@pytest.mark.parametrize("name", ["z2", "z3", "s3"])
def test_kan_collapse_on_pi(name):
    G = GROUPS[name]
    b = gs.build_bundle(G, "all", "transporter")
    incl = gs.poset_inclusion(b.transporter)
    for P in gs.presheaf_corpus(b, 6, seed=3, site="pg"):
        F = sheafify(P, b.pg_site).presheaf
        L = gs.presheaf_to_gset(left_kan(b.pi, F).presheaf, G)
        assert gr.gsets_isomorphic(L, gs.evaluate_at_x0(F, gs.identity_extension(b.transporter)))
        R = right_kan(b.pi, F).presheaf
        assert R.sizes[0] == len(limit(restrict(incl, F)))


def test_verify_artin_small():
    Z2 = GROUPS["z2"]
    for b in gs.standard_bundles(Z2):
        r = gs.verify_artin(b, 2, n_sheaves=5)
        assert r, r.witness
        assert r.details["iso_classes"] == 4


def test_corpus_deterministic():
    b = gs.build_bundle(GROUPS["s3"], "all", "orbit")
    a = gs.presheaf_corpus(b, 10, 4)
    c = gs.presheaf_corpus(b, 10, 4)
    assert [(F.sizes, F.maps) for F in a] == [(F.sizes, F.maps) for F in c]


def test_concentrated_presheaf_not_sheaf_but_sheafifies():
    Z2 = GROUPS["z2"]
    b = gs.build_bundle(Z2, "all", "orbit")
    G_M = gs.concentrated_presheaf(gr.point_gset(Z2), b.extension)
    assert not is_sheaf(G_M, b.c_site)
    sh = sheafify(G_M, b.c_site).presheaf
    assert sh.sizes == (1, 1)


def test_rho_quotient_rep_is_least():
    b = gs.build_bundle(GROUPS["d4"], "all", "orbit")
    E = b.extension
    T = E.source
    for c in E.cat.morphisms:
        members = [u for u in T.cat.morphisms if E.rho.mor[u] == c]
        assert E.reps[c] == min(members)


def test_random_presheaf_valid_on_all_bundles():
    rng = random.Random(0)
    for G in GROUPS.values():
        for b in gs.standard_bundles(G):
            F = gs.random_presheaf(b.c_site.cat, rng)
            assert isinstance(F, Presheaf)


def test_evaluate_rejects_kernel_at_x0():
    Z2 = GROUPS["z2"]
    T = gs.build_bundle(Z2, "all", "transporter").transporter
    E = gs.orbit_quotient(T, [list(range(Z2.order)), list(range(Z2.order))])
    F = gs.fixed_point_sheaf(gr.point_gset(Z2), E)
    with pytest.raises(ValueError, match="x0"):
        gs.evaluate_at_x0(F, E)
