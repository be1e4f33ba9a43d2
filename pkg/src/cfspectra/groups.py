"""Finite abelian groups: elements, subgroups, automorphisms, characters.

Groups are given by invariant factors d_1 | d_2 | ... | d_r.  Everything
is exact and enumerable, which is what makes the orbit statistics and the
catalog search over small groups fully checkable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cyclotomic import Cyclo

_ENUMERATION_LIMIT = 100_000


@dataclass(frozen=True)
class FinAbGroup:
    invariant_factors: tuple[int, ...]

    def __post_init__(self):
        fs = tuple(int(d) for d in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", fs)
        for d in fs:
            if d < 2:
                raise ValueError("invariant factors must be >= 2")
        for a, b in zip(fs, fs[1:]):
            if b % a != 0:
                raise ValueError("each invariant factor must divide the next")

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def element(self, coords) -> "Element":
        cs = tuple(c % d for c, d in zip(coords, self.invariant_factors))
        if len(cs) != self.rank:
            raise ValueError("coordinate count does not match rank")
        return Element(self, cs)

    def identity(self) -> "Element":
        return Element(self, (0,) * self.rank)

    def elements(self):
        for coords in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield Element(self, coords)

    def element_index(self, el: "Element") -> int:
        idx = 0
        for c, d in zip(el.coords, self.invariant_factors):
            idx = idx * d + c
        return idx

    def element_from_index(self, idx: int) -> "Element":
        coords = []
        for d in reversed(self.invariant_factors):
            coords.append(idx % d)
            idx //= d
        return Element(self, tuple(reversed(coords)))

    def __repr__(self):
        return "Z" + "xZ".join(str(d) for d in self.invariant_factors) if self.rank else "0"


@dataclass(frozen=True)
class Element:
    group: FinAbGroup
    coords: tuple[int, ...]

    def __add__(self, other: "Element") -> "Element":
        if other.group != self.group:
            raise ValueError("elements of different groups")
        return Element(
            self.group,
            tuple((a + b) % d for a, b, d in zip(self.coords, other.coords, self.group.invariant_factors)),
        )

    def __neg__(self) -> "Element":
        return Element(self.group, tuple((-a) % d for a, d in zip(self.coords, self.group.invariant_factors)))

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def times(self, k: int) -> "Element":
        return Element(self.group, tuple((a * k) % d for a, d in zip(self.coords, self.group.invariant_factors)))

    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def additive_order(self) -> int:
        return math.lcm(1, *(d // math.gcd(c, d) for c, d in zip(self.coords, self.group.invariant_factors)))

    def __repr__(self):
        return "(" + ",".join(map(str, self.coords)) + ")"


class Automorphism:
    """Group automorphism given by an integer matrix acting on coordinates.

    Column j is the image of the j-th standard generator.  Well-definedness
    and bijectivity are checked at construction by enumeration.
    """

    def __init__(self, group: FinAbGroup, matrix, check: bool = True):
        self.group = group
        self.matrix = tuple(tuple(int(x) % group.invariant_factors[i] for x in row) for i, row in enumerate(matrix))
        if len(self.matrix) != group.rank or any(len(r) != group.rank for r in self.matrix):
            raise ValueError("matrix shape does not match group rank")
        if check:
            self._validate()

    def _validate(self):
        d = self.group.invariant_factors
        for i in range(self.group.rank):
            for j in range(self.group.rank):
                # image of generator j must be killed by d_j
                if (self.matrix[i][j] * d[j]) % d[i] != 0:
                    raise ValueError("matrix does not define a homomorphism")
        if self.group.order > _ENUMERATION_LIMIT:
            raise ValueError("group too large for the bijectivity check")
        seen = set()
        for g in self.group.elements():
            seen.add(self(g).coords)
        if len(seen) != self.group.order:
            raise ValueError("matrix does not define a bijection")

    def __call__(self, g: Element) -> Element:
        d = self.group.invariant_factors
        return Element(
            self.group,
            tuple(sum(self.matrix[i][j] * g.coords[j] for j in range(len(d))) % d[i] for i in range(len(d))),
        )

    def compose(self, other: "Automorphism") -> "Automorphism":
        d = self.group.invariant_factors
        r = self.group.rank
        m = [[sum(self.matrix[i][k] * other.matrix[k][j] for k in range(r)) % d[i] for j in range(r)] for i in range(r)]
        return Automorphism(self.group, m, check=False)

    def inverse(self) -> "Automorphism":
        cols = []
        images = {self(g).coords: g for g in self.group.elements()}
        for j in range(self.group.rank):
            gen = self.group.element(tuple(1 if i == j else 0 for i in range(self.group.rank)))
            cols.append(images[gen.coords].coords)
        m = [[cols[j][i] for j in range(self.group.rank)] for i in range(self.group.rank)]
        return Automorphism(self.group, m, check=False)

    def is_identity(self) -> bool:
        return all(self.matrix[i][j] == (1 if i == j else 0) % self.group.invariant_factors[i]
                   for i in range(self.group.rank) for j in range(self.group.rank))

    @staticmethod
    def identity(group: FinAbGroup) -> "Automorphism":
        return Automorphism(group, [[1 if i == j else 0 for j in range(group.rank)] for i in range(group.rank)],
                            check=False)

    def __eq__(self, other):
        return isinstance(other, Automorphism) and self.group == other.group and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.group, self.matrix))

    def __repr__(self):
        return f"Aut{self.matrix}"


class Subgroup:
    """Subgroup materialized as a frozenset of elements, closed at construction."""

    def __init__(self, group: FinAbGroup, generators):
        self.group = group
        self.generators = tuple(generators)
        members = {group.identity()}
        frontier = list(self.generators)
        while frontier:
            g = frontier.pop()
            if g in members:
                continue
            members.update(_cyclic_closure(members, g))
        self.members = frozenset(members)
        if group.order % len(self.members) != 0:
            raise AssertionError("subgroup order must divide group order")

    def __contains__(self, el: Element) -> bool:
        return el in self.members

    @property
    def order(self) -> int:
        return len(self.members)

    def elements_sorted(self):
        return sorted(self.members, key=lambda e: e.coords)

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_stable_under(self, v: Automorphism) -> bool:
        return all(v(h) in self.members for h in self.members)

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.group == other.group and self.members == other.members

    def __hash__(self):
        return hash((self.group, self.members))

    def __repr__(self):
        gens = ",".join(repr(g) for g in self.generators)
        return f"<{gens}>"


def _cyclic_closure(members, g):
    new = set()
    for m in list(members):
        x = m
        while True:
            x = x + g
            if x in members or x in new:
                break
            new.add(x)
    return new


@dataclass(frozen=True)
class Character:
    """Character of a finite abelian group, itself coordinatized by the dual group."""

    group: FinAbGroup
    coords: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(c % d for c, d in zip(self.coords, self.group.invariant_factors))
        object.__setattr__(self, "coords", cs)

    @property
    def root_order(self) -> int:
        return self.group.exponent

    def exponent(self, g: Element) -> int:
        """Pairing exponent e with chi(g) = zeta_L^e, L the group exponent."""
        L = self.root_order
        return sum(c * x * (L // d) for c, x, d in zip(self.coords, g.coords, self.group.invariant_factors)) % L

    def value(self, g: Element) -> Cyclo:
        return Cyclo.root_of_unity(self.root_order, self.exponent(g))

    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def inverse(self) -> "Character":
        return Character(self.group, tuple(-a for a in self.coords))

    def __repr__(self):
        return "chi" + repr(self.coords)


def all_characters(group: FinAbGroup):
    for coords in itertools.product(*(range(d) for d in group.invariant_factors)):
        yield Character(group, coords)


def dual_automorphism(v: Automorphism) -> Automorphism:
    """The automorphism of the dual group sending chi to chi o v."""
    d = v.group.invariant_factors
    L = v.group.exponent
    r = v.group.rank
    m = [[0] * r for _ in range(r)]
    for j in range(r):
        for i in range(r):
            num = v.matrix[i][j] * (L // d[i])
            if num % (L // d[j]) != 0:
                raise AssertionError("dual matrix entry is not integral")
            m[j][i] = (num // (L // d[j])) % d[j]
    return Automorphism(v.group, m, check=False)


def apply_dual(v: Automorphism, chi: Character) -> Character:
    """chi o v, computed through the dual automorphism matrix."""
    vhat = dual_automorphism(v)
    el = Element(chi.group, chi.coords)
    return Character(chi.group, vhat(el).coords)


# -- orbit statistics ----------------------------------------------------


def orbit(v: Automorphism, g: Element) -> list[Element]:
    """The v-orbit {v^i(g) : i in Z} in order of first appearance."""
    if g.group != v.group:
        raise ValueError("element and automorphism live on different groups")
    out = [g]
    seen = {g}
    x = v(g)
    while x not in seen:
        out.append(x)
        seen.add(x)
        x = v(x)
    return out


def least_period(v: Automorphism, g: Element) -> int:
    """Least p > 0 with v^p(g) = g; equals the orbit length in a finite group."""
    return len(orbit(v, g))


class PeriodicPoints:
    """The set of v-periodic points with their least periods (all points, here)."""

    def __init__(self, group: FinAbGroup, v: Automorphism):
        self.group = group
        self.v = v
        self._periods: dict[Element, int] = {}

    def period(self, a: Element) -> int:
        if a not in self._periods:
            self._periods[a] = least_period(self.v, a)
        return self._periods[a]

    def elements(self):
        return list(self.group.elements())


def orbit_count_in_subgroup(v: Automorphism, h: Element, H: Subgroup) -> int:
    """Number of points of the v-orbit of h lying in H.  Requires h in H."""
    if h not in H:
        raise ValueError("element is not in the subgroup")
    return sum(1 for x in orbit(v, h) if x in H)


def multiplicity_set(group: FinAbGroup, H: Subgroup, v: Automorphism,
                     _orbit_cache: dict | None = None) -> frozenset[int]:
    """Orbit-in-subgroup counts over all nonzero elements of H."""
    if H.is_trivial():
        return frozenset()
    counts = set()
    for h in H.members:
        if h.is_identity():
            continue
        if _orbit_cache is not None:
            if h not in _orbit_cache:
                _orbit_cache[h] = orbit(v, h)
            orb = _orbit_cache[h]
        else:
            orb = orbit(v, h)
        counts.add(sum(1 for x in orb if x in H))
    return frozenset(counts)


def multiplicity_set_naive(group: FinAbGroup, H: Subgroup, v: Automorphism) -> frozenset[int]:
    """Independent recount: repeated application of v, no orbit reuse or caching."""
    counts = set()
    for h in H.elements_sorted():
        if h.is_identity():
            continue
        hits = 0
        x = h
        while True:
            if x in H.members:
                hits += 1
            x = v(x)
            if x == h:
                break
        counts.add(hits)
    return frozenset(counts)


def character_orbit_average(chi: Character, b: Element, v: Automorphism) -> Cyclo:
    """(1/p) * sum of chi(v^i(b)) over one least period p of b under v."""
    orb = orbit(v, b)
    p = len(orb)
    counts: dict[int, Fraction] = {}
    for x in orb:
        e = chi.exponent(x)
        counts[e] = counts.get(e, Fraction(0)) + Fraction(1, p)
    return Cyclo.from_exponent_counts(chi.root_order, counts)


def element_orbit_average(a: Character, g: Element, v: Automorphism) -> Cyclo:
    """(1/p) * sum of a(v^i(g)) over one least period p of a under the dual of v."""
    vhat = dual_automorphism(v)
    p = least_period(vhat, Element(a.group, a.coords))
    counts: dict[int, Fraction] = {}
    x = g
    for _ in range(p):
        e = a.exponent(x)
        counts[e] = counts.get(e, Fraction(0)) + Fraction(1, p)
        x = v(x)
    return Cyclo.from_exponent_counts(a.root_order, counts)


# -- separation witnesses --------------------------------------------------


class SameOrbit(Exception):
    """The two inputs lie on the same dual-automorphism orbit."""


@dataclass
class WitnessResult:
    witness: Element | None
    value_a: Cyclo | None = None
    value_b: Cyclo | None = None

    @property
    def found(self) -> bool:
        return self.witness is not None


def same_dual_orbit(chi: Character, xi: Character, v: Automorphism) -> bool:
    vhat = dual_automorphism(v)
    return Element(xi.group, xi.coords) in orbit(vhat, Element(chi.group, chi.coords))


def separation_witness(chi: Character, xi: Character, v: Automorphism) -> WitnessResult:
    """An element b with exactly distinct orbit averages for chi and xi.

    Raises SameOrbit when chi and xi lie on one dual orbit (no witness can
    exist there: the averages agree identically).
    """
    if same_dual_orbit(chi, xi, v):
        raise SameOrbit(f"{chi} and {xi} lie on the same dual orbit")
    for b in sorted(v.group.elements(), key=lambda e: e.coords):
        la = character_orbit_average(chi, b, v)
        lb = character_orbit_average(xi, b, v)
        if la != lb:
            return WitnessResult(b, la, lb)
    return WitnessResult(None)


def separation_witness_elements(g1: Element, g2: Element, v: Automorphism) -> WitnessResult | Character:
    """Dual orientation: a character a with distinct averages at g1 and g2."""
    if g2 in orbit(v, g1):
        raise SameOrbit(f"{g1} and {g2} lie on the same orbit")
    for a in all_characters(g1.group):
        la = element_orbit_average(a, g1, v)
        lb = element_orbit_average(a, g2, v)
        if la != lb:
            return WitnessResult(Element(a.group, a.coords), la, lb)
    return WitnessResult(None)


# -- annihilators and duality ----------------------------------------------


def annihilator(K: FinAbGroup, H: Subgroup) -> list[Character]:
    """All characters of K vanishing on H; exactly order(K)/order(H) of them."""
    out = [chi for chi in all_characters(K) if all(chi.exponent(h) == 0 for h in H.members)]
    assert len(out) == K.order // H.order
    return sorted(out, key=lambda c: c.coords)


def annihilator_subgroup(K: FinAbGroup, H: Subgroup) -> Subgroup:
    """The annihilator of H realized as a subgroup of the dual group."""
    chars = annihilator(K, H)
    return Subgroup(K, [Element(K, c.coords) for c in chars])


# -- enumeration -----------------------------------------------------------


@lru_cache(maxsize=None)
def abelian_group_types(order: int) -> tuple[tuple[int, ...], ...]:
    """All invariant-factor chains d_1 | ... | d_r with product = order, lex sorted."""
    if order == 1:
        return ((),)

    def chains(n: int, max_last: int):
        # chains with product n whose last factor divides max_last
        out = []
        for d in range(2, n + 1):
            if n % d == 0 and max_last % d == 0:
                if d == n:
                    out.append((d,))
                for rest in chains(n // d, d):
                    out.append(rest + (d,))
        return out

    return tuple(sorted(chains(order, order)))


def all_subgroups(group: FinAbGroup) -> list[Subgroup]:
    """Every subgroup, found by breadth-first closure; deterministic order."""
    seen = {frozenset([group.identity()])}
    subs = [Subgroup(group, [])]
    frontier = [subs[0]]
    while frontier:
        H = frontier.pop()
        for g in group.elements():
            if g in H:
                continue
            H2 = Subgroup(group, list(H.generators) + [g])
            if H2.members not in seen:
                seen.add(H2.members)
                subs.append(H2)
                frontier.append(H2)
    subs.sort(key=lambda s: (s.order, sorted(e.coords for e in s.members)))
    return subs


def automorphisms(group: FinAbGroup):
    """All automorphisms, by matrix enumeration over exact-order generator images."""
    d = group.invariant_factors
    r = group.rank
    if r == 0:
        yield Automorphism(group, [], check=False)
        return
    candidates = []
    for j in range(r):
        cands = [g for g in group.elements() if g.additive_order() == d[j]]
        candidates.append(sorted(cands, key=lambda e: e.coords))
    order = group.order
    elements = list(group.elements())
    for cols in itertools.product(*candidates):
        matrix = [[cols[j].coords[i] for j in range(r)] for i in range(r)]
        if not all((matrix[i][j] * d[j]) % d[i] == 0 for i in range(r) for j in range(r)):
            continue
        aut = Automorphism(group, matrix, check=False)
        if len({aut(g).coords for g in elements}) == order:
            yield aut


@dataclass
class CatalogRecord:
    target: frozenset[int]
    group: FinAbGroup
    subgroup: Subgroup
    automorphism: Automorphism
    verified: bool = False


def catalog_search(E, bound: int) -> CatalogRecord | None:
    """Exhaustive search for (G, H, v) with multiplicity_set == E, order <= bound.

    Returns the first hit in a deterministic enumeration order, re-verified
    with the independent naive recount, or None when the bound is too small.
    """
    E = frozenset(int(x) for x in E)
    if not E or any(x < 1 for x in E):
        raise ValueError("target must be a nonempty set of positive integers")
    for order in range(2, bound + 1):
        for factors in abelian_group_types(order):
            group = FinAbGroup(factors)
            subgroups = all_subgroups(group)
            for aut in automorphisms(group):
                cache: dict = {}
                for H in subgroups:
                    if multiplicity_set(group, H, aut, _orbit_cache=cache) == E:
                        if multiplicity_set_naive(group, H, aut) != E:
                            raise AssertionError("cached and naive recounts disagree")
                        return CatalogRecord(E, group, H, aut, verified=True)
    return None


# -- serialization ----------------------------------------------------------


def format_triple(group: FinAbGroup, H: Subgroup, v: Automorphism) -> str:
    lines = [
        f"group = [{', '.join(map(str, group.invariant_factors))}]",
        "subgroup_gens = [" + ", ".join("[" + ", ".join(map(str, g.coords)) + "]"
                                        for g in _minimal_generators(H)) + "]",
        "aut = [" + ", ".join("[" + ", ".join(map(str, row)) + "]" for row in v.matrix) + "]",
    ]
    return "\n".join(lines)


def _minimal_generators(H: Subgroup):
    gens: list[Element] = []
    span = Subgroup(H.group, [])
    for g in H.elements_sorted():
        if g not in span:
            gens.append(g)
            span = Subgroup(H.group, gens)
        if span.order == H.order:
            break
    return gens if gens else []


def _parse_int_list(text: str) -> list:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"expected a bracketed list: {text!r}")
    body = text[1:-1].strip()
    if not body:
        return []
    depth = 0
    parts, cur = [], ""
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    out = []
    for p in parts:
        p = p.strip()
        out.append(_parse_int_list(p) if p.startswith("[") else int(p))
    return out


def parse_triple(text: str) -> tuple[FinAbGroup, Subgroup, Automorphism]:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    group = FinAbGroup(tuple(_parse_int_list(fields["group"])))
    gens = [group.element(tuple(c)) for c in _parse_int_list(fields["subgroup_gens"])]
    H = Subgroup(group, gens)
    aut = Automorphism(group, _parse_int_list(fields["aut"]))
    return group, H, aut
