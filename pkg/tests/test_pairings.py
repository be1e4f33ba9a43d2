import itertools
from fractions import Fraction

import pytest

from cfspectra.cocycle import rung_label
from cfspectra.cyclotomic import Cyclo, abs_upper
from cfspectra.groups import Automorphism, Character, FinAbGroup
from cfspectra.pairings import LevelPairing, PairingEngine, count_ge, out_of_range_count
from cfspectra.tower import Cylinder, EvenTag, StaggerTag, Tower, embed, measure


@pytest.fixture(scope="module")
def z3_tower():
    G = FinAbGroup((3,))
    v = Automorphism(G, [[-1]])
    t = Tower.seeded(G, v)
    a = G.element((1,))
    for tag in [EvenTag(a), StaggerTag(a, 1), EvenTag(a)]:
        t.extend(tag)
    return t


def characters(tower):
    return [Character(tower.group, (c,)) for c in range(3)]


def brute_pairing(tower, chi, m, A, B, N):
    """Direct rung enumeration; only usable at shallow depth."""
    EA = set(embed(tower, A, N).rungs)
    EB = embed(tower, B, N).rungs
    counts = {}
    outside = 0
    for f in EB:
        g = f + m
        if not 0 <= g < tower.h(N):
            outside += 1
            continue
        if g in EA:
            e = chi.exponent(rung_label(tower, g, N) - rung_label(tower, f, N))
            counts[e] = counts.get(e, 0) + 1
    value = Cyclo.from_exponent_counts(chi.root_order, counts) / tower.cut_product(N)
    return value, Fraction(outside, tower.cut_product(N))


CYLS = [
    Cylinder(0, (0,)),
    Cylinder(1, (0,)),
    Cylinder(1, (2,)),
    Cylinder(2, (0,)),
    Cylinder(2, (5, 7)),
]


@pytest.mark.parametrize("depth", [3, 4])
def test_engine_matches_brute_force(z3_tower, depth):
    t = z3_tower
    shifts = [0, 1, -1, 7, -11, 2 * t.h(2), 2 * t.h(depth - 1), -2 * t.h(2)]
    for chi in characters(t):
        eng = PairingEngine(t, chi)
        for A, B in itertools.product(CYLS, repeat=2):
            for m in shifts:
                got = eng.pairing(m, A, B, depth)
                want_value, want_err = brute_pairing(t, chi, m, A, B, depth)
                assert got.value == want_value, (chi, m, A, B)
                assert got.error_bound == want_err


def test_adjoint_step_drags_neighbour_rungs(z3_tower):
    """The one-step-back pairing carries [{1}] fully onto [{0}] at depth."""
    t = z3_tower
    chi0 = characters(t)[0]
    eng = PairingEngine(t, chi0)
    lower, upper = Cylinder(1, (0,)), Cylinder(1, (1,))
    p = eng.pairing(-1, lower, upper, t.depth)  # rungs of [{1}] stepping back into [{0}]
    assert p.value == Cyclo.from_fraction(measure(t, lower))
    assert p.error_bound == 0
    # and the forward step the other way round, with the adjoint symmetry
    q = eng.pairing(1, upper, lower, t.depth)
    assert q.value == p.value.conjugate()


def test_zero_shift_gives_overlap_measure(z3_tower):
    t = z3_tower
    chi = characters(t)[1]
    eng = PairingEngine(t, chi)
    for A in CYLS:
        p = eng.pairing(0, A, A, t.depth)
        assert p.error_bound == 0
        assert p.value == Cyclo.from_fraction(measure(t, A))
    # disjoint cylinders at equal level pair to zero
    p = eng.pairing(0, Cylinder(1, (0,)), Cylinder(1, (1,)), t.depth)
    assert p.value.is_zero()


def test_conjugate_symmetry(z3_tower):
    t = z3_tower
    for chi in characters(t):
        eng = PairingEngine(t, chi)
        for A, B in [(CYLS[1], CYLS[3]), (CYLS[3], CYLS[4]), (CYLS[0], CYLS[2])]:
            for m in (1, 5, 24, 2 * t.h(2)):
                ab = eng.pairing(m, A, B, t.depth)
                ba = eng.pairing(-m, B, A, t.depth)
                assert ab.value == ba.value.conjugate()


def test_deepening_consistency(z3_tower):
    t = z3_tower
    chi = characters(t)[1]
    eng = PairingEngine(t, chi)
    for A, B in [(CYLS[1], CYLS[1]), (CYLS[3], CYLS[4])]:
        for m in (1, 7, 2 * t.h(2)):
            prev = None
            for N in range(3, t.depth + 1):
                cur = eng.pairing(m, A, B, N)
                if prev is not None:
                    assert cur.error_bound <= prev.error_bound
                    gap = abs_upper(cur.value - prev.value, 64)
                    assert gap <= prev.error_bound + cur.error_bound
                prev = cur


def test_error_bound_vanishes_for_small_shift_at_depth(z3_tower):
    t = z3_tower
    eng = PairingEngine(t, characters(t)[0])
    p = eng.pairing(2 * t.h(2), CYLS[1], CYLS[1], t.depth)
    assert p.error_bound == 0  # the stack top absorbs the shift at deeper truncation


def test_mass_conservation_partition(z3_tower):
    t = z3_tower
    chi = characters(t)[0]  # trivial
    eng = PairingEngine(t, chi)
    n, N, m = 1, 4, 5
    full = Cylinder.full(t, n)
    total = Cyclo.zero(1)
    err_total = Fraction(0)
    for f in range(t.h(n)):
        p = eng.pairing(m, full, Cylinder.single(n, f), N)
        total = total + p.value
        err_total += p.error_bound
    want, werr = brute_pairing(t, chi, m, full, full, N)
    assert total == want
    assert err_total == werr


def test_count_ge_matches_enumeration(z3_tower):
    t = z3_tower
    base = (0, 5, 7)
    N = 4
    rungs = list(base)
    for j in range(3, N + 1):
        rungs = [f + c for f in rungs for c in t.level(j).cuts]
    rungs.sort()
    for threshold in [0, 1, 100, t.h(4) // 2, t.h(4) - 50, t.h(4), max(rungs), max(rungs) + 1]:
        want = sum(1 for f in rungs if f >= threshold)
        assert count_ge(t, base, 2, N, threshold) == want


def test_out_of_range_count_signs(z3_tower):
    t = z3_tower
    base = (0, 3)
    assert out_of_range_count(t, base, 2, 4, 0) == 0
    up = out_of_range_count(t, base, 2, 4, 10)
    down = out_of_range_count(t, base, 2, 4, -10)
    total = 2 * t.level(3).r * t.level(4).r
    brute_rungs = [f + c3 + c4 for f in base for c3 in t.level(3).cuts for c4 in t.level(4).cuts]
    assert up == sum(1 for f in brute_rungs if f + 10 >= t.h(4))
    assert down == sum(1 for f in brute_rungs if f - 10 < 0)
    assert up + down <= total


def test_shift_beyond_height_rejected(z3_tower):
    t = z3_tower
    eng = PairingEngine(t, characters(t)[0])
    with pytest.raises(ValueError):
        eng.pairing(t.h(3), CYLS[1], CYLS[1], 3)
