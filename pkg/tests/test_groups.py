from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cfspectra.cyclotomic import Cyclo, zeta
from cfspectra.groups import (
    Automorphism,
    CatalogRecord,
    Character,
    Element,
    FinAbGroup,
    SameOrbit,
    Subgroup,
    abelian_group_types,
    all_characters,
    all_subgroups,
    annihilator,
    apply_dual,
    automorphisms,
    catalog_search,
    character_orbit_average,
    dual_automorphism,
    element_orbit_average,
    format_triple,
    least_period,
    multiplicity_set,
    multiplicity_set_naive,
    orbit,
    orbit_count_in_subgroup,
    parse_triple,
    separation_witness,
)


def z(n):
    return FinAbGroup((n,))


def neg(G):
    return Automorphism(G, [[-1 if i == j else 0 for j in range(G.rank)] for i in range(G.rank)])


def test_group_validation():
    with pytest.raises(ValueError):
        FinAbGroup((2, 3))  # 2 does not divide 3
    with pytest.raises(ValueError):
        FinAbGroup((1,))
    G = FinAbGroup((2, 6))
    assert G.order == 12 and G.exponent == 6
    assert len(list(G.elements())) == 12


def test_element_arithmetic():
    G = FinAbGroup((2, 4))
    a = G.element((1, 3))
    b = G.element((1, 2))
    assert (a + b).coords == (0, 1)
    assert (-a).coords == (1, 1)
    assert (a - a).is_identity()
    assert a.additive_order() == 4


def test_element_index_round_trip():
    G = FinAbGroup((2, 6))
    for g in G.elements():
        assert G.element_from_index(G.element_index(g)) == g


def test_orbit_examples():
    # identity automorphism: singleton orbits
    G = z(5)
    assert orbit(Automorphism.identity(G), G.element((1,))) == [G.element((1,))]
    # doubling on Z/5 starting at 1: 1,2,4,3
    v = Automorphism(G, [[2]])
    assert [e.coords[0] for e in orbit(v, G.element((1,)))] == [1, 2, 4, 3]
    # automorphisms fix the identity
    assert orbit(v, G.identity()) == [G.identity()]


def test_orbit_count_examples():
    G = z(5)
    v = Automorphism(G, [[2]])
    H = Subgroup(G, [G.element((1,))])
    assert orbit_count_in_subgroup(Automorphism.identity(G), G.element((1,)), H) == 1
    assert orbit_count_in_subgroup(v, G.element((1,)), H) == 4
    G2 = FinAbGroup((6,))
    v2 = neg(G2)
    H2 = Subgroup(G2, [G2.element((1,))])
    # orbit of 2 under negation mod 6 is {2, 4}
    assert orbit_count_in_subgroup(v2, G2.element((2,)), H2) == 2
    with pytest.raises(ValueError):
        orbit_count_in_subgroup(v, G.element((1,)), Subgroup(G, []))


def test_multiplicity_set_examples():
    G = z(2)
    H = Subgroup(G, [G.element((1,))])
    assert multiplicity_set(G, H, Automorphism.identity(G)) == {1}
    G5 = z(5)
    assert multiplicity_set(G5, Subgroup(G5, [G5.element((1,))]), Automorphism(G5, [[2]])) == {4}
    G6 = z(6)
    assert multiplicity_set(G6, Subgroup(G6, [G6.element((1,))]), neg(G6)) == {1, 2}
    assert multiplicity_set(G6, Subgroup(G6, []), neg(G6)) == frozenset()


@pytest.mark.parametrize("factors", [(2,), (4,), (6,), (2, 2), (8,), (3, 3), (2, 4)])
def test_multiplicity_set_matches_naive_recount(factors):
    G = FinAbGroup(factors)
    for v in automorphisms(G):
        cache = {}
        for H in all_subgroups(G):
            assert multiplicity_set(G, H, v, _orbit_cache=cache) == multiplicity_set_naive(G, H, v)


def test_orbit_divisibility_invariant():
    G = FinAbGroup((2, 4))
    for v in automorphisms(G):
        H = Subgroup(G, list(G.elements()))
        for h in G.elements():
            if h.is_identity():
                continue
            cnt = orbit_count_in_subgroup(v, h, H)
            assert len(orbit(v, h)) % cnt == 0
            assert cnt <= G.order


def test_character_pairing_laws():
    G = FinAbGroup((2, 6))
    for chi in all_characters(G):
        gs = list(G.elements())
        for g in gs[:4]:
            for h in gs[:4]:
                assert chi.exponent(g + h) == (chi.exponent(g) + chi.exponent(h)) % chi.root_order
        assert chi.value(G.identity()) == 1


def test_dual_automorphism_compatibility():
    for factors in [(6,), (2, 4), (3, 3), (2, 6)]:
        G = FinAbGroup(factors)
        for v in list(automorphisms(G))[:8]:
            vhat = dual_automorphism(v)
            for chi in all_characters(G):
                for g in G.elements():
                    lhs = chi.exponent(v(g))
                    rhs = Character(G, vhat(Element(G, chi.coords)).coords).exponent(g)
                    assert lhs == rhs


def test_orbit_average_examples():
    K = z(3)
    v = neg(K)
    trivial = Character(K, (0,))
    chi = Character(K, (1,))
    b = K.element((1,))
    # trivial character averages to 1 for every b
    assert character_orbit_average(trivial, b, v) == 1
    # b = 0 averages to 1 for every character
    assert character_orbit_average(chi, K.identity(), v) == 1
    # (omega + omega^2)/2 = -1/2
    assert character_orbit_average(chi, b, v) == Cyclo.from_fraction(Fraction(-1, 2))


def test_orbit_average_invariances():
    K = FinAbGroup((6,))
    v = neg(K)
    for chi in all_characters(K):
        for b in K.elements():
            val = character_orbit_average(chi, b, v)
            # invariant under replacing b by v(b)
            assert character_orbit_average(chi, v(b), v) == val
            # averaging over any multiple of the least period gives the same value
            p = least_period(v, b)
            total = Cyclo.zero(chi.root_order)
            x = b
            for _ in range(2 * p):
                total = total + chi.value(x)
                x = v(x)
            assert total / (2 * p) == val


def test_primal_and_dual_averages_agree():
    G = FinAbGroup((6,))
    v = neg(G)
    for a in all_characters(G):
        for g in G.elements():
            assert element_orbit_average(a, g, v) == character_orbit_average(a, g, v)


def test_separation_witness():
    K = z(3)
    # v = id: every character is its own dual orbit
    vid = Automorphism.identity(K)
    chi = Character(K, (1,))
    trivial = Character(K, (0,))
    res = separation_witness(chi, trivial, vid)
    assert res.found and res.witness == K.element((1,))
    assert res.value_a == zeta(3) and res.value_b == 1
    # same orbit is reported as such, not as NotFound
    v = neg(K)
    xi = apply_dual(v, chi)
    with pytest.raises(SameOrbit):
        separation_witness(chi, xi, v)


def test_periodic_points_periods():
    from cfspectra.groups import PeriodicPoints

    K = FinAbGroup((6,))
    v = neg(K)
    pp = PeriodicPoints(K, v)
    assert len(pp.elements()) == 6  # every point is periodic in a finite group
    assert pp.period(K.identity()) == 1
    assert pp.period(K.element((3,))) == 1  # fixed by negation
    assert pp.period(K.element((1,))) == 2
    # the period divides the automorphism order
    for a in pp.elements():
        assert 2 % pp.period(a) == 0


def test_separation_witness_element_pair():
    from cfspectra.groups import separation_witness_elements

    G = z(3)
    vid = Automorphism.identity(G)
    res = separation_witness_elements(G.element((1,)), G.element((2,)), vid)
    assert res.found
    with pytest.raises(SameOrbit):
        separation_witness_elements(G.element((1,)), G.element((2,)), neg(G))


def test_separation_witness_exhaustive_small_groups():
    from cfspectra.groups import same_dual_orbit

    for factors in [(3,), (4,), (5,), (6,), (2, 4)]:
        K = FinAbGroup(factors)
        for v in list(automorphisms(K))[:6]:
            chars = list(all_characters(K))
            for i, chi in enumerate(chars):
                for xi in chars[i + 1:]:
                    if same_dual_orbit(chi, xi, v):
                        continue
                    assert separation_witness(chi, xi, v).found


def test_annihilator():
    K = z(4)
    full = Subgroup(K, [K.element((1,))])
    assert [c.coords for c in annihilator(K, full)] == [(0,)]
    trivial = Subgroup(K, [])
    assert len(annihilator(K, trivial)) == 4
    half = Subgroup(K, [K.element((2,))])
    ann = annihilator(K, half)
    assert len(ann) == 2
    assert all(chi.exponent(K.element((2,))) == 0 for chi in ann)


def test_annihilator_closed_under_dual_when_subgroup_stable():
    K = FinAbGroup((2, 4))
    for v in automorphisms(K):
        for H in all_subgroups(K):
            if not H.is_stable_under(v):
                continue
            ann = {c.coords for c in annihilator(K, H)}
            for chi in annihilator(K, H):
                assert apply_dual(v, chi).coords in ann


@given(st.sampled_from([(2,), (3,), (4,), (6,), (2, 2), (2, 4), (3, 3)]))
def test_annihilator_counts(factors):
    K = FinAbGroup(factors)
    for H in all_subgroups(K):
        ann = annihilator(K, H)
        assert len(ann) == K.order // H.order
        # closed under products: it is a subgroup of the dual
        coords = {c.coords for c in ann}
        for c1 in ann:
            for c2 in ann:
                assert (c1 * c2).coords in coords


def test_abelian_group_types():
    assert abelian_group_types(1) == ((),)
    assert abelian_group_types(4) == ((2, 2), (4,))
    assert abelian_group_types(8) == ((2, 2, 2), (2, 4), (8,))
    assert abelian_group_types(12) == ((2, 6), (12,))


def test_all_subgroups_counts():
    # Z/4 has 3 subgroups; Z/2 x Z/2 has 5; Z/2 x Z/4 has 8
    assert len(all_subgroups(FinAbGroup((4,)))) == 3
    assert len(all_subgroups(FinAbGroup((2, 2)))) == 5
    assert len(all_subgroups(FinAbGroup((2, 4)))) == 8


def test_automorphism_counts():
    assert len(list(automorphisms(FinAbGroup((5,))))) == 4
    assert len(list(automorphisms(FinAbGroup((2, 2))))) == 6  # GL(2, 2)
    assert len(list(automorphisms(FinAbGroup((3, 3))))) == 48  # GL(2, 3)
    assert len(list(automorphisms(FinAbGroup((2, 4))))) == 8


def test_automorphism_algebra():
    G = FinAbGroup((2, 4))
    for v in automorphisms(G):
        w = v.inverse()
        assert v.compose(w).is_identity()
        assert w.compose(v).is_identity()


@pytest.mark.parametrize(
    "target,max_order",
    [({1}, 2), ({2}, 3), ({4}, 5), ({1, 2}, 6), ({1, 4}, 10), ({2, 4}, 15)],
)
def test_catalog_search_finds_verified_triples(target, max_order):
    rec = catalog_search(target, bound=40)
    assert rec is not None and rec.verified
    assert rec.group.order <= max_order
    assert multiplicity_set(rec.group, rec.subgroup, rec.automorphism) == frozenset(target)


def test_catalog_search_not_found_within_tiny_bound():
    assert catalog_search({4}, bound=4) is None


def test_triple_serialization_round_trip():
    rec = catalog_search({1, 2}, bound=10)
    text = format_triple(rec.group, rec.subgroup, rec.automorphism)
    G, H, v = parse_triple(text)
    assert G == rec.group
    assert H.members == rec.subgroup.members
    assert v.matrix == rec.automorphism.matrix
