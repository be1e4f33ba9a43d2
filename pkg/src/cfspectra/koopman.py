"""Weighted shift operators on tower rungs and certified weak-limit residuals.

Every quantity here is a pairing of cylinder indicators computed exactly by
the pairing engine; residuals are certified upper bounds: an exact modulus
bound on the deviation plus the exact truncation error mass.  Comparisons
against thresholds therefore never involve floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cocycle import CosetSpace, rung_label_indices
from .cyclotomic import Cyclo, abs_lower, abs_upper
from .groups import Character, Subgroup, annihilator, character_orbit_average, same_dual_orbit
from .pairings import LevelPairing, PairingEngine
from .tower import Cylinder, EvenTag, Report, StaggerTag, Tower

_BITS = 128


def _engine(tower: Tower, chi: Character) -> PairingEngine:
    key = ("engine", chi.coords)
    eng = tower._cache.get(key)
    if eng is None:
        eng = PairingEngine(tower, chi)
        tower._cache[key] = eng
    return eng


def pairing(tower: Tower, chi: Character, m: int, A: Cylinder, B: Cylinder,
            N: int | None = None) -> LevelPairing:
    """<U^m 1_A, 1_B> at depth N (default: the full built depth)."""
    N = tower.depth if N is None else N
    return _engine(tower, chi).pairing(m, A, B, N)


def _require_tag(tower: Tower, n: int, kind, **attrs):
    lvl = tower.level(n + 1)
    if not isinstance(lvl.tag, kind):
        raise ValueError(f"step {n} does not carry a {kind.__name__} recipe level")
    for name, val in attrs.items():
        if getattr(lvl.tag, name) != val:
            raise ValueError(f"step {n} tag has {name}={getattr(lvl.tag, name)}, expected {val}")
    return lvl


def weak_limit_residual_even(tower: Tower, chi: Character, a, A: Cylinder, B: Cylinder,
                             n: int, N: int | None = None) -> Fraction:
    """Certified bound on |<U^{2h_n} 1_A, 1_B> - l * <1_A, 1_B>|.

    Here l is the orbit average of chi at the step element a; the step n must
    carry the even recipe with that element.
    """
    _require_tag(tower, n, EvenTag, a=a)
    p = pairing(tower, chi, 2 * tower.h(n), A, B, N)
    inner = pairing(tower, chi, 0, A, B, N)
    target = character_orbit_average(chi, a, tower.v) * inner.value
    return abs_upper(p.value - target, _BITS) + p.error_bound


def weak_limit_residual_stagger(tower: Tower, chi: Character, b, k: int, A: Cylinder,
                                B: Cylinder, n: int, N: int | None = None) -> Fraction:
    """Certified bound on the stagger-step limit deviation.

    The target mixes the identity (weighted by the orbit average over k+1)
    with the one-step-back pairing weighted by k/(k+1).
    """
    _require_tag(tower, n, StaggerTag, b=b, k=k)
    p = pairing(tower, chi, 2 * tower.h(n), A, B, N)
    back = pairing(tower, chi, -1, A, B, N)
    l = character_orbit_average(chi, b, tower.v)
    target = l * inner_value(tower, chi, A, B, N) / (k + 1) + back.value * Fraction(k, k + 1)
    dev = abs_upper(p.value - target, _BITS)
    return dev + p.error_bound + Fraction(k, k + 1) * back.error_bound


def inner_value(tower: Tower, chi: Character, A: Cylinder, B: Cylinder, N: int | None = None) -> Cyclo:
    return pairing(tower, chi, 0, A, B, N).value


def tail_shift_residual(tower: Tower, A: Cylinder, B: Cylinder, n: int,
                        N: int | None = None) -> Fraction:
    """Certified bound on |<U^{Z_n} 1_A, 1_B> - <U_S 1_A, 1_B>|.

    Z_n is the partial sum of the per-level shifts.  At truncation depth N the
    tail-shift map acts on the certified domain as the rung shift by Z_N, so
    its pairing is the Z_N-shift pairing and carries the top-window error mass.
    """
    from .cocycle import TailShift

    N = tower.depth if N is None else N
    ts = TailShift(tower)
    trivial = Character(tower.group, (0,) * tower.group.rank)
    zn = ts.z_prefix(n)
    zN = ts.z_prefix(N)
    if max(zn, zN) >= tower.h(N):
        raise ValueError("depth insufficient for the accumulated shift")
    pt = pairing(tower, trivial, zn, A, B, N)
    ps = pairing(tower, trivial, zN, A, B, N)
    return abs_upper(pt.value - ps.value, _BITS) + pt.error_bound + ps.error_bound


@dataclass
class SeparationResult:
    bound_a: Fraction
    bound_b: Fraction
    gap_lower: Fraction
    certified: bool


def separation_check(tower: Tower, chi: Character, xi: Character, a, A: Cylinder,
                     B: Cylinder, n: int) -> SeparationResult:
    """Certify that the two weighted limits at an even step stay apart.

    Both pairings approach their orbit-average targets within certified
    bounds; the result is certified when the exact gap between the two
    targets exceeds the sum of the bounds.
    """
    if same_dual_orbit(chi, xi, tower.v):
        raise ValueError("characters lie on the same dual orbit; no separation to certify")
    ra = weak_limit_residual_even(tower, chi, a, A, B, n)
    rb = weak_limit_residual_even(tower, xi, a, A, B, n)
    la = character_orbit_average(chi, a, tower.v)
    lb = character_orbit_average(xi, a, tower.v)
    inner = inner_value(tower, chi, A, B).as_fraction()
    gap = abs_lower(la - lb, _BITS) * inner
    return SeparationResult(ra, rb, gap, gap > ra + rb)


# -- explicit rung operators (shallow depths) ---------------------------------


class LevelOperator:
    """The weighted m-shift on depth-N rung functions, stored explicitly.

    A partial permutation: rung f maps to f+m when in range, with phase
    chi(rung_label(f+m) - rung_label(f)) tracked as a root-of-unity exponent.
    """

    def __init__(self, tower: Tower, chi: Character, m: int, N: int):
        self.tower = tower
        self.chi = chi
        self.m = m
        self.N = N
        self.L = chi.root_order
        G = tower.group
        labels = rung_label_indices(tower, N)
        exp_of = [chi.exponent(G.element_from_index(i)) for i in range(G.order)]
        h = tower.h(N)
        self.defined = [0 <= f + m < h for f in range(h)]
        self.phase_exponent = [
            (exp_of[labels[f + m]] - exp_of[labels[f]]) % self.L if self.defined[f] else None
            for f in range(h)
        ]
        self.undefined_count = h - sum(self.defined)
        self.error_mass = Fraction(self.undefined_count, tower.cut_product(N))

    def target(self, f: int) -> int | None:
        return f + self.m if self.defined[f] else None


def skew_decomposition_check(tower: Tower, H: Subgroup, N: int, m: int) -> Report:
    """Verify that the fiberwise character transform block-diagonalizes the skew shift.

    The skew shift on (rung, coset) pairs advances the rung by m and translates
    the coset by the rung-label increment a_f.  Conjugating by the character
    transform of the fiber must give, per character chi of the fiber, exactly
    the weighted LevelOperator block; off-diagonal character pairs must vanish.
    All checks are exact root-of-unity identities, grouped by the finitely many
    values of a_f.
    """
    rep = Report()
    G = tower.group
    cosets = CosetSpace(G, H)
    chars = annihilator(G, H)
    L = G.exponent
    labels = rung_label_indices(tower, N)
    h = tower.h(N)
    defined = [0 <= f + m < h for f in range(h)]
    increments = sorted({
        (G.element_from_index(labels[f + m]) - G.element_from_index(labels[f])).coords
        for f in range(h) if defined[f]
    })
    undefined_count = h - sum(defined)

    blocks = {chi.coords: LevelOperator(tower, chi, m, N) for chi in chars}

    for chi in chars:
        for xi in chars:
            ok = True
            detail = ""
            for coords in increments:
                a = G.element(coords)
                # conjugated matrix entry between (f, chi) and (f+m, xi):
                # (1/#cosets) * sum over coset reps of xi(a + kappa) * conj(chi(kappa))
                counts: dict[int, int] = {}
                for kappa in cosets.reps:
                    e = (xi.exponent(a + kappa) - chi.exponent(kappa)) % L
                    counts[e] = counts.get(e, 0) + 1
                entry = Cyclo.from_exponent_counts(L, counts) / cosets.size
                if chi.coords == xi.coords:
                    expected = Cyclo.root_of_unity(L, chi.exponent(a))
                else:
                    expected = Cyclo.zero(L)
                if entry != expected:
                    ok = False
                    detail = f"increment {coords}: entry {entry} != {expected}"
                    break
            name = (f"fiber block chi={chi.coords}" if chi.coords == xi.coords
                    else f"off-diagonal chi={chi.coords}, xi={xi.coords}")
            rep.add(name, N, ok, detail)

    # the diagonal blocks must be the weighted operators rung for rung
    for chi in chars:
        block = blocks[chi.coords]
        exp_of = [chi.exponent(G.element_from_index(i)) for i in range(G.order)]
        mism = 0
        for f in range(h):
            if not defined[f]:
                if block.defined[f]:
                    mism += 1
                continue
            want = (exp_of[labels[f + m]] - exp_of[labels[f]]) % L
            if block.phase_exponent[f] != want or block.target(f) != f + m:
                mism += 1
        rep.add(f"block phases chi={chi.coords}", N, mism == 0, f"{mism} mismatches")
        rep.add(f"error mass chi={chi.coords}", N,
                block.error_mass == Fraction(undefined_count, tower.cut_product(N)))
    return rep


# -- residual grids -------------------------------------------------------------


def cylinder_family(tower: Tower, max_level: int = 2) -> list[tuple[str, Cylinder]]:
    """The fixed dense family: the base stack plus all singleton rungs at low levels."""
    fam: list[tuple[str, Cylinder]] = [("X0", Cylinder(0, (0,)))]
    for n in range(1, max_level + 1):
        for f in range(tower.h(n)):
            fam.append((f"{n}:{f}", Cylinder.single(n, f)))
    return fam


@dataclass
class ResidualRow:
    n: int
    tag: str
    chi: tuple[int, ...]
    a_id: str
    b_id: str
    residual: Fraction
    error: Fraction


def residual_grid(tower: Tower, chars: list[Character], family=None) -> list[ResidualRow]:
    """All weak-limit residuals over the scheduled steps and the cylinder family."""
    family = cylinder_family(tower) if family is None else family
    rows: list[ResidualRow] = []
    for lvl in tower.levels:
        if lvl.tag is None:
            continue
        n = lvl.step
        for chi in chars:
            for a_id, A in family:
                for b_id, B in family:
                    if isinstance(lvl.tag, EvenTag):
                        p = pairing(tower, chi, 2 * tower.h(n), A, B)
                        res = weak_limit_residual_even(tower, chi, lvl.tag.a, A, B, n)
                        tag = f"even:{'+'.join(map(str, lvl.tag.a.coords))}"
                    else:
                        p = pairing(tower, chi, 2 * tower.h(n), A, B)
                        res = weak_limit_residual_stagger(tower, chi, lvl.tag.b, lvl.tag.k, A, B, n)
                        tag = f"stagger:{'+'.join(map(str, lvl.tag.b.coords))}:k={lvl.tag.k}"
                    rows.append(ResidualRow(n, tag, chi.coords, a_id, b_id, res, p.error_bound))
    rows.sort(key=lambda r: (r.n, r.tag, r.chi, r.a_id, r.b_id))
    return rows
