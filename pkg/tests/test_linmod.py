import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import grpsheaves.groups as gr
import grpsheaves.grpsites as gs
import grpsheaves.linmod as lm
from grpsheaves.groups import AxiomError
from grpsheaves.sites import is_sheaf

import oracles

GROUPS = {n: gr.BUILTIN_GROUPS[n]() for n in ["z2", "z3", "z4", "s3", "d4"]}
RINGS = [lm.ring("F2"), lm.ring("F3"), lm.ring("Z/4")]


def test_ring_parsing():
    assert lm.ring("F3").is_field and lm.ring({"p": 3}).name == "F3"
    assert not lm.ring("Z/4").is_field and lm.ring({"mod": 4}).name == "Z/4"
    assert lm.ring("Z4").modulus == 4 and lm.ring(5).modulus == 5
    with pytest.raises(ValueError):
        lm.ring("F4")
    assert lm.ring("Z/4").inv(3) == 3 and not lm.ring("Z/4").is_unit(2)


@settings(max_examples=60)
@given(st.sampled_from([2, 3, 4, 6]), st.integers(1, 3), st.integers(1, 4), st.integers(0, 10_000))
def test_left_kernel_matches_enumeration(n, d, k, seed):
    rng = random.Random(seed)
    A = np.array([[rng.randrange(n) for _ in range(k)] for _ in range(d)], dtype=np.int64)
    K = lm.left_kernel(A, n)
    ours = oracles.span_by_enumeration(K, n) if K.size else {tuple([0] * d)}
    assert ours == oracles.kernel_by_enumeration(A, n)
    gens, _ = lm.snf_left_kernel(A, n)
    assert (oracles.span_by_enumeration(gens, n) if gens.size else {tuple([0] * d)}) == ours
    assert (lm.span_size(K, n) if K.size else 1) == len(ours)
    if gr.is_prime(n):
        G = lm.gauss_left_kernel(A, n)
        assert (oracles.span_by_enumeration(G, n) if G.size else {tuple([0] * d)}) == ours


@given(st.sampled_from([2, 4, 6, 9]), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10_000))
def test_span_size_and_elements(n, r, d, seed):
    rng = random.Random(seed)
    gens = np.array([[rng.randrange(n) for _ in range(d)] for _ in range(r)], dtype=np.int64)
    span = oracles.span_by_enumeration(gens, n)
    assert lm.span_size(gens, n) == len(span)
    assert set(lm.span_elements(gens, n, d)) == span


def test_diagonalize_examples():
    diag, P = lm.diagonalize(np.array([[2, 0], [0, 0]], dtype=np.int64), 4)
    assert sorted(np.gcd(diag, 4).tolist()) == [2, 4]
    assert lm.is_invertible(P, 4)


@pytest.mark.parametrize("R", RINGS, ids=lambda R: R.name)
@pytest.mark.parametrize("name", ["z2", "z3", "s3", "d4"])
def test_regular_fixed_rank_is_index(R, name):
    G = GROUPS[name]
    RG = lm.regular_module(G, R)
    for H in gr.enumerate_subgroups(G):
        V = lm.fixed_submodule(RG, H)
        assert V.is_free and V.rank == G.order // H.order
        W = lm.Submodule(R, G.order, oracles.orbit_sum_basis(G, H))
        assert V.same_as(W)


def test_fixed_submodule_examples():
    Z2 = GROUPS["z2"]
    F2, Z4 = lm.ring("F2"), lm.ring("Z/4")
    assert lm.fixed_submodule(lm.regular_module(Z2, F2), gr.whole(Z2)).rank == 1
    M = lm.regular_module(GROUPS["s3"], F2)
    assert lm.fixed_submodule(M, gr.trivial_subgroup(GROUPS["s3"])).size == 2 ** 6
    sign = lm.sign_module(Z2, Z4, gr.trivial_subgroup(Z2))
    V = lm.fixed_submodule(sign, gr.whole(Z2))
    assert sorted(V.elements()) == [(0,), (2,)] and V.rank == 0 and V.n_generators == 1
    assert lm.fixed_submodule(sign, gr.whole(Z2), "snf").same_as(V)
    F3 = lm.ring("F3")
    assert lm.fixed_submodule(lm.sign_module(Z2, F3, gr.trivial_subgroup(Z2)), gr.whole(Z2)).size == 1


def test_rgmodule_axioms_enforced():
    Z2 = GROUPS["z2"]
    with pytest.raises(AxiomError):
        lm.RGModule(lm.ring("F3"), Z2, np.array([[[1]], [[2]]]) * np.array([[[2]], [[1]]]))
    mats = np.array([[[1]], [[2]]])
    with pytest.raises(AxiomError):
        lm.RGModule(lm.ring("Z/4"), Z2, mats)  # 2*2 = 0 != 1


@pytest.mark.parametrize("R", RINGS, ids=lambda R: R.name)
def test_bridge_identity_as_stated(R):
    """rank R[K\\G]^H against the H-fixed cosets of K, for all subgroup pairs of S3."""
    rows = lm.bridge_table(GROUPS["s3"], R)
    bad = [r for r in rows if r["rank"] != r["fixed_points"]]
    assert not bad, f"{len(bad)} of {len(rows)} pairs differ, e.g. {bad[0]}"


@pytest.mark.parametrize("R", RINGS, ids=lambda R: R.name)
@pytest.mark.parametrize("name", ["z2", "z4", "s3", "d4"])
def test_permutation_fixed_rank_counts_orbits(R, name):
    """rank R[K\\G]^H is the number of H-orbits on K\\G (orbit sums are a basis)."""
    for r in lm.bridge_table(GROUPS[name], R):
        assert r["rank"] == r["orbits"]
        assert r["fixed_points"] <= r["orbits"]


def test_module_sheaf_examples():
    Z2 = GROUPS["z2"]
    b = gs.build_bundle(Z2, "all", "orbit")
    C = b.c_site.cat
    for R in RINGS:
        for M in lm.module_corpus(Z2, R, 2):
            assert lm.is_module_sheaf(lm.module_fixed_point_sheaf(M, b.extension), b.c_site)
    F2 = lm.ring("F2")
    # rank 2 at G\G over a trivial rank-1 value at 1\G
    values = (lm.full_module(F2, 1), lm.full_module(F2, 2))
    maps = []
    for u in C.morphisms:
        x = C.cod[u]
        maps.append(np.eye(1, dtype=np.int64) if x == 0 else (np.eye(2, dtype=np.int64) if C.is_identity[u]
                                                              else np.array([[1], [0]])))
    F = lm.ModulePresheaf(C, F2, values, maps)
    for method in ["set", "linear"]:
        r = lm.is_module_sheaf(F, b.c_site, method=method)
        assert not r and r.witness["object"] == 1 and r.details["route"] == method
    zero = lm.ModulePresheaf(C, F2, (lm.full_module(F2, 0),) * 2, [np.zeros((0, 0))] * C.n_morphisms)
    assert lm.is_module_sheaf(zero, b.c_site)


def test_module_presheaf_validation():
    C = gs.build_bundle(GROUPS["z2"], "all", "orbit").c_site.cat
    F2 = lm.ring("F2")
    with pytest.raises(AxiomError):
        lm.ModulePresheaf(C, F2, (lm.full_module(F2, 1),) * 2, [np.eye(1, dtype=np.int64) * 0] * C.n_morphisms)


@pytest.mark.parametrize("name", ["z2", "s3"])
def test_set_and_linear_routes_agree(name):
    G = GROUPS[name]
    rng = random.Random(2)
    for b in gs.standard_bundles(G):
        for R in RINGS:
            for M in lm.module_corpus(G, R, 3, seed=1):
                F = lm.module_fixed_point_sheaf(M, b.extension)
                F = lm.twist(F, rng)
                a = lm.is_module_sheaf(F, b.c_site, method="set")
                c = lm.is_module_sheaf(F, b.c_site, method="linear")
                assert bool(a) == bool(c) is True


def test_cap_switches_to_linear_route():
    S3 = GROUPS["s3"]
    b = gs.build_bundle(S3, "all", "orbit")
    F = lm.module_fixed_point_sheaf(lm.regular_module(S3, lm.ring("F3")), b.extension)
    r = lm.is_module_sheaf(F, b.c_site, cap=100)
    assert r and r.details["route"] == "linear"
    with pytest.raises(lm.MaterializationCapExceeded):
        F.underlying(cap=100)


def test_structure_sheaf():
    for G in GROUPS.values():
        for b in gs.standard_bundles(G):
            for R in RINGS:
                O = lm.structure_sheaf(b.c_site.cat, R)
                assert O.sizes() == [R.modulus] * b.c_site.cat.n_objects
                P, _ = O.underlying()
                assert is_sheaf(P, b.c_site)
                T = lm.module_fixed_point_sheaf(lm.trivial_module(G, R), b.extension)
                assert T.sizes() == O.sizes()


def test_coherent_check_examples():
    S3 = GROUPS["s3"]
    b = gs.build_bundle(S3, "all", "orbit")
    F = lm.module_fixed_point_sheaf(lm.regular_module(S3, lm.ring("F2")), b.extension)
    r = lm.coherent_check(F)
    assert r and r.details["generators"] == [6, 3, 3, 3, 2, 1]
    O = lm.structure_sheaf(b.c_site.cat, lm.ring("F3"))
    assert lm.coherent_check(O).details["generators"] == [1] * 6
    Z = lm.module_fixed_point_sheaf(lm.zero_module(S3, lm.ring("F3")), b.extension)
    assert lm.coherent_check(Z).details["generators"] == [0] * 6


def test_constant_on_transporter():
    S3 = GROUPS["s3"]
    b = gs.build_bundle(S3, "all", "transporter")
    M = lm.regular_module(S3, lm.ring("F2"))
    F = lm.module_fixed_point_sheaf(M, b.extension)
    assert F.ranks() == [6] * 6
    assert all(np.array_equal(F.maps[b.transporter.morphism(x, y, S3.identity)], np.eye(6))
               for x in range(6) for y in range(6) if b.transporter.index.get((x, y, S3.identity)) is not None)


def test_module_iso_examples():
    Z2 = GROUPS["z2"]
    F3 = lm.ring("F3")
    triv, sign = lm.trivial_module(Z2, F3), lm.sign_module(Z2, F3, gr.trivial_subgroup(Z2))
    assert lm.find_module_iso(triv, sign) is None
    assert lm.find_module_iso(triv, triv) is not None
    rng = random.Random(4)
    M = lm.direct_sum(triv, sign)
    P, Pi = lm.random_invertible(2, 3, rng)
    N = lm.conjugate_module(M, P, Pi)
    X = lm.find_module_iso(M, N)
    assert X is not None and lm.is_equivariant(M, N, X)
    # over F2 trivial and sign agree
    F2 = lm.ring("F2")
    assert lm.find_module_iso(lm.trivial_module(Z2, F2), lm.sign_module(Z2, F2, gr.trivial_subgroup(Z2))) is not None


def test_module_gset_matches_permutation():
    S3 = GROUPS["s3"]
    F2 = lm.ring("F2")
    M = lm.permutation_module(gr.subgroup(S3, [S3.element("(1 2)")]), F2)
    X = lm.module_gset(M)
    assert X.size == 8
    assert len(gr.fixed_points(X, gr.whole(S3))) == 2


@pytest.mark.parametrize("R", RINGS, ids=lambda R: R.name)
def test_verify_module_equivalence_small(R):
    Z2 = GROUPS["z2"]
    for b in gs.standard_bundles(Z2):
        r = lm.verify_module_equivalence(Z2, R, b, 2)
        assert r, r.witness
        names = [m["module"] for m in r.details["per_module"]]
        assert "R" in names and "0" in names
        if R.modulus != 2:
            assert any(n.startswith("sign") for n in names)


def test_regular_ranks_s3_over_f2():
    S3 = GROUPS["s3"]
    b = gs.build_bundle(S3, "all", "orbit")
    r = lm.verify_module_equivalence(S3, lm.ring("F2"), b, 6, n_sheaves=2)
    assert r and r.details["regular_ranks"] == [6, 3, 3, 3, 2, 1]


def test_evaluate_needs_full_value():
    Z2 = GROUPS["z2"]
    b = gs.build_bundle(Z2, "all", "orbit")
    F2 = lm.ring("F2")
    C = b.c_site.cat
    V = lm.Submodule(F2, 2, np.array([[1, 1]]))
    F = lm.ModulePresheaf(C, F2, (V, V), [np.eye(2, dtype=np.int64)] * C.n_morphisms)
    with pytest.raises(ValueError):
        lm.module_evaluate_at_x0(F, b.extension)
