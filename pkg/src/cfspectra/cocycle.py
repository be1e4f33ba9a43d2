"""Cocycles over the tower's tail relation, skew products, and the tail-shift map.

The cocycle attaches to each pair of tail-equivalent points the sum of
cut-label differences along their decompositions.  On rungs of a fixed
truncation depth this reduces to a difference of "rung labels", the label
sums along the canonical decomposition; that reduction is what makes all
the exact pairing computations downstream finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .groups import Element, FinAbGroup, Subgroup
from .tower import Point, Tower, apply_T, canonical_point


def rung_label(tower: Tower, f: int, N: int) -> Element:
    """Sum of cut labels along the depth-N canonical decomposition of rung f."""
    key = ("rung_label", N, f)
    cached = tower._cache.get(key)
    if cached is not None:
        return cached
    n_min, _, coords = tower.decompose(f, N)
    total = tower.group.identity()
    for j in range(1, N + 1):
        total = total + tower.level(j).label(coords.get(j, 0))
    tower._cache[key] = total
    return total


def rung_label_indices(tower: Tower, N: int) -> list[int]:
    """Rung labels for all of [0, h_N), as element indices; built level by level."""
    key = ("rung_label_indices", N)
    cached = tower._cache.get(key)
    if cached is not None:
        return cached
    G = tower.group
    add = _addition_table(tower)
    newmass = G.element_index(G.identity())
    arr = [newmass]  # level 0: the single rung carries the identity
    for n in range(1, N + 1):
        lvl = tower.level(n)
        # rungs outside the embedded region decompose with all-zero coordinates
        newmass = add[newmass][G.element_index(lvl.label(0))]
        new = [newmass] * lvl.h
        for c in lvl.cuts:
            row = add[G.element_index(lvl.label(c))]
            for u, b in enumerate(arr):
                new[c + u] = row[b]
        arr = new
    tower._cache[key] = arr
    return arr


def _addition_table(tower: Tower) -> list[list[int]]:
    key = "addition_table"
    cached = tower._cache.get(key)
    if cached is None:
        G = tower.group
        els = [G.element_from_index(i) for i in range(G.order)]
        cached = [[G.element_index(a + b) for b in els] for a in els]
        tower._cache[key] = cached
    return cached


class NotEquivalent(Exception):
    """The two points are not tail-equivalent within their truncation."""


class Cocycle:
    """The label cocycle of a tower: sums of per-level label differences."""

    def __init__(self, tower: Tower):
        self.tower = tower

    def projection(self, p: Point) -> Point:
        """Base-level representative: zero rung, canonical cut coordinates."""
        t = self.tower
        N = p.truncation
        coords = t.gamma_coords(p.rung(t), N)
        return Point(0, 0, tuple(coords))

    def eval(self, x: Point, y: Point) -> Element:
        """Cocycle value between tail-equivalent points.

        Points truncated at a common depth share their implicit tail, so any
        two of them are equivalent and the value is the finite sum of label
        differences along the canonical coordinates.  Distinct truncations
        leave the implicit tails incomparable and are rejected.
        """
        t = self.tower
        if x.truncation != y.truncation:
            raise NotEquivalent("points have different truncation depths")
        N = x.truncation
        cx = t.gamma_coords(x.rung(t), N)
        cy = t.gamma_coords(y.rung(t), N)
        total = t.group.identity()
        for j in range(1, N + 1):
            if cx[j - 1] != cy[j - 1]:
                total = total + t.level(j).label(cx[j - 1]) - t.level(j).label(cy[j - 1])
        return total

    def along_orbit(self, p: Point, m: int) -> Element | None:
        """Cocycle value between the m-shifted point and p; None off the stack."""
        t = self.tower
        N = p.truncation
        r = p.rung(t)
        if not 0 <= r + m < t.h(N):
            return None
        return rung_label(t, r + m, N) - rung_label(t, r, N)


# -- coset fibers and the skew product ---------------------------------------


class CosetSpace:
    """The finite fiber K/H with uniform weights."""

    def __init__(self, group: FinAbGroup, H: Subgroup):
        if H.group != group:
            raise ValueError("subgroup of a different group")
        self.group = group
        self.H = H
        reps = {}
        for g in sorted(group.elements(), key=lambda e: e.coords):
            key = frozenset((g + h).coords for h in H.members)
            reps.setdefault(key, g)
        self.reps = sorted(reps.values(), key=lambda e: e.coords)
        self.size = len(self.reps)
        assert self.size == group.order // H.order
        self._canon = {}
        for rep in self.reps:
            for h in H.members:
                self._canon[rep + h] = rep

    def canonical(self, g: Element) -> Element:
        return self._canon[g]

    @property
    def weight(self) -> Fraction:
        return Fraction(1, self.size)


@dataclass(frozen=True)
class SkewPoint:
    base: Point
    fiber: Element  # canonical coset representative


def skew_apply(cocycle: Cocycle, cosets: CosetSpace, sp: SkewPoint, m: int) -> SkewPoint | None:
    """Advance the base by m rungs and translate the fiber by the cocycle value."""
    inc = cocycle.along_orbit(sp.base, m)
    if inc is None:
        return None
    new_base = apply_T(cocycle.tower, sp.base, m)
    return SkewPoint(new_base, cosets.canonical(inc + sp.fiber))


# -- the tail-shift commuting map ---------------------------------------------


class TailShift:
    """The map shifting the rung by z_1+...+z_n and every higher cut by z_m.

    Domain certification at truncation depth N checks, for some admissible
    level n: the rung bound at n, and that every known coordinate above n
    survives the z-shift.  Conditions beyond the truncation are out of
    sight by construction; the per-level descriptions are exactly the
    pieces that are checkable from the stored data.
    """

    def __init__(self, tower: Tower):
        self.tower = tower
        self.z = [0] * (tower.depth + 1)
        for n in range(1, tower.depth + 1):
            self.z[n] = tower.level(n).z if tower.level(n).tag is not None else 0

    def z_prefix(self, n: int) -> int:
        return sum(self.z[1:n + 1])

    def shifted_cut_set(self, m: int) -> frozenset[int]:
        """Cuts of level m surviving the z_m-shift: C_m intersect (C_m - z_m)."""
        lvl = self.tower.level(m)
        return frozenset(c for c in lvl.cuts if c + self.z[m] in lvl.cut_set)

    def apply(self, p: Point) -> Point | None:
        """The shifted point, or None when no admissible level certifies p."""
        t = self.tower
        N = p.truncation
        rung = p.rung(t)
        n_min, f0, coords = t.decompose(rung, N)
        level_rung = f0
        for n in range(n_min, N + 1):
            if n > n_min:
                level_rung += coords[n]
            if level_rung + self.z_prefix(n) >= t.h(n):
                continue
            ok = True
            for m in range(n + 1, N + 1):
                c = coords[m]
                if c + self.z[m] not in t.level(m).cut_set:
                    ok = False
                    break
            if ok:
                new_rung = level_rung + self.z_prefix(n)
                tail = tuple(coords[m] + self.z[m] for m in range(n + 1, N + 1))
                return Point(n, new_rung, tail)
        return None

    def undefined_rung_count(self, N: int) -> int:
        """Rungs of [0, h_N) outside the depth-N certified domain."""
        t = self.tower
        return sum(1 for f in range(t.h(N)) if self.apply(canonical_point(t, f, N)) is None)


def commutes_with_shift(ts: TailShift, cocycle: Cocycle, p: Point) -> bool | None:
    """Exact check of T(S(p)) == S(T(p)) where both sides are defined."""
    t = ts.tower
    tp = apply_T(t, p, 1)
    sp = ts.apply(p)
    if tp is None or sp is None:
        return None
    left = ts.apply(tp)
    right = apply_T(t, sp, 1)
    if left is None or right is None:
        return None
    return left.rung(t) == right.rung(t) and left.truncation == right.truncation


# -- coboundary-condition bookkeeping ------------------------------------------


@dataclass
class AlignedCutsReport:
    levels: list[int]
    aligned_counts: list[int]
    cut_counts: list[int]
    terms: list[Fraction]
    partial_sums: list[Fraction]

    @property
    def total(self) -> Fraction:
        return self.partial_sums[-1] if self.partial_sums else Fraction(0)


def aligned_cuts(tower: Tower, n: int) -> frozenset[int]:
    """Cuts c with c + z_n a cut and label(c + z_n) = v(label(c))."""
    lvl = tower.level(n)
    if lvl.tag is None or lvl.z == 0:
        return frozenset(lvl.cuts)
    v = tower.v
    return frozenset(
        c for c in lvl.cuts if c + lvl.z in lvl.cut_set and lvl.label(c + lvl.z) == v(lvl.label(c))
    )


def check_coboundary_condition(tower: Tower) -> AlignedCutsReport:
    """Per-level aligned-cut deficits 1 - #aligned/#cuts and their partial sums."""
    levels, acounts, ccounts, terms, partials = [], [], [], [], []
    run = Fraction(0)
    for n in range(1, tower.depth + 1):
        lvl = tower.level(n)
        ac = len(aligned_cuts(tower, n))
        term = 1 - Fraction(ac, lvl.r)
        run += term
        levels.append(n)
        acounts.append(ac)
        ccounts.append(lvl.r)
        terms.append(term)
        partials.append(run)
    return AlignedCutsReport(levels, acounts, ccounts, terms, partials)
