"""Inductive cutting-and-stacking towers with group-labelled cuts.

A tower is a sequence of levels; each level has an integer height and a
finite set of cut positions below that height.  Each cut carries a label
in a finite abelian group; labels are generated by explicit ramp patterns
so that the shift-equivariance and frequency-band conditions checked by
``validate_labels`` hold by construction.  All quantities are exact:
heights and cuts are Python ints, measures are Fractions.

Levels come in two recipe flavours, named for their cut spacing:

* even: cuts uniformly spaced 2*h apart, labels stepping through the
  automorphism orbit of a fixed element ``a``;
* stagger: cuts mixing gaps of 2*h and 2*h+1 with mix ratio ``k``,
  labels stepping on the 2*h gaps and constant on the 2*h+1 gaps.

Two hand-seeded levels start the induction; recipe extension begins at
step 2 (level 3).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .groups import Automorphism, Element, FinAbGroup, least_period

_EMBED_GUARD = 5_000_000


@dataclass(frozen=True)
class EvenTag:
    """Recipe tag for a uniformly spaced level stepping the label by a."""

    a: Element


@dataclass(frozen=True)
class StaggerTag:
    """Recipe tag for a mixed-gap level with stepping element b and mix ratio k."""

    b: Element
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("mix ratio k must be >= 1")


Tag = EvenTag | StaggerTag


class GeneratorExhausted(Exception):
    """No structured label pattern passed validation (a bug signal for recipe levels)."""


class Level:
    """One tower level: height, cuts, and cut labels.

    Cuts are ``block + z * {0..reps-1}`` for recipe levels; labels are
    derived from the labels on the block via the automorphism power rule
    ``label(d + z*q) = v^q(label(d))`` unless an explicit full label map
    is attached (as happens for deserialized towers).
    """

    def __init__(self, n, h, z, cuts, block, reps, block_labels, tag, step,
                 r_expected, v_pow, explicit_labels=None):
        self.n = n
        self.h = h
        self.z = z
        self.cuts = tuple(cuts)
        self.cut_set = frozenset(self.cuts)
        self.block = tuple(block)
        self.reps = reps
        self.block_labels = dict(block_labels)
        self.tag = tag
        self.step = step
        self.r_expected = r_expected
        self._v_pow = v_pow
        self.explicit_labels = dict(explicit_labels) if explicit_labels is not None else None

    @property
    def r(self) -> int:
        return len(self.cuts)

    def label(self, c: int) -> Element:
        if self.explicit_labels is not None:
            return self.explicit_labels[c]
        if self.reps == 1 or self.z == 0:
            return self.block_labels[c]
        q, d = divmod(c, self.z)
        base = self.block_labels[d]
        return self._v_pow[q % len(self._v_pow)][base]

    def labels_full(self) -> dict[int, Element]:
        return {c: self.label(c) for c in self.cuts}

    def __repr__(self):
        return f"Level(n={self.n}, h={self.h}, r={self.r}, tag={self.tag})"


class Tower:
    """A finite stack of levels over a label group (K, v)."""

    def __init__(self, group: FinAbGroup, v: Automorphism):
        if v.group != group:
            raise ValueError("automorphism must act on the label group")
        self.group = group
        self.v = v
        self._v_pow = _power_tables(group, v)
        self.levels: list[Level] = []
        self._cache: dict = {}

    # -- seeding and extension ------------------------------------------

    @staticmethod
    def seeded(group: FinAbGroup, v: Automorphism) -> "Tower":
        """The default hand-seeded tower: levels 1 and 2 with zero labels."""
        t = Tower(group, v)
        zero = group.identity()
        t.levels.append(Level(1, 3, 0, (0, 1), (0, 1), 1, {0: zero, 1: zero},
                              None, None, 2, t._v_pow))
        t.levels.append(Level(2, 12, 0, (0, 3, 6), (0, 3, 6), 1,
                              {0: zero, 3: zero, 6: zero}, None, None, 3, t._v_pow))
        return t

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> Level:
        if not 1 <= n <= self.depth:
            raise IndexError(f"level {n} not built (depth {self.depth})")
        return self.levels[n - 1]

    def h(self, n: int) -> int:
        return 1 if n == 0 else self.level(n).h

    def cut_count(self, n: int) -> int:
        return self.level(n).r

    def cut_product(self, n: int) -> int:
        """Product of cut counts over levels 1..n."""
        return math.prod(self.level(j).r for j in range(1, n + 1))

    def mu_level(self, n: int) -> Fraction:
        """Measure of the level-n stack (height over cut product)."""
        return Fraction(self.h(n), self.cut_product(n)) if n else Fraction(1)

    def rung_measure(self, n: int) -> Fraction:
        return Fraction(1, self.cut_product(n))

    def extend(self, tag: Tag) -> Level:
        """Append the next level following the recipe for ``tag``."""
        n = self.depth
        if n < 2:
            raise ValueError("seed levels 1..2 must exist before extension")
        h = self.h(n)
        if isinstance(tag, EvenTag):
            lvl = self._extend_even(n, h, tag)
        elif isinstance(tag, StaggerTag):
            lvl = self._extend_stagger(n, h, tag)
        else:
            raise TypeError(f"unknown tag {tag!r}")
        self.levels.append(lvl)
        self._cache.clear()
        return lvl

    def _extend_even(self, n: int, h: int, tag: EvenTag) -> Level:
        m = least_period(self.v, tag.a)
        P = n * m
        z = 2 * h * P
        r = n**3 * m
        reps = r // P
        assert reps == n * n
        block = tuple(2 * h * t for t in range(P))
        cuts = tuple(2 * h * t for t in range(r))
        h_new = 2 * r * h
        level = None
        for offset in range(m):
            bl = _ramp_labels(block, self.v, self._v_pow, tag.a, m, len(block), offset)
            cand = Level(n + 1, h_new, z, cuts, block, reps, bl, tag, n, r, self._v_pow)
            if validate_labels(cand, self).passed:
                level = cand
                break
        if level is None:
            raise GeneratorExhausted(f"no valid label pattern for {tag} at step {n}")
        return level

    def _extend_stagger(self, n: int, h: int, tag: StaggerTag) -> Level:
        m = least_period(self.v, tag.b)
        k = tag.k
        z = m * n * (2 * h * (k + 1) + k)
        r = n**3 * (k + 1) * m
        reps = n * n
        block1 = [2 * h * t for t in range(n * m)]
        block2 = [2 * h * (n * m - 1) + (2 * h + 1) * j for j in range(1, n * k * m + 1)]
        block = tuple(block1 + block2)
        assert len(block) * reps == r
        cuts = tuple(sorted(d + z * t for t in range(reps) for d in block))
        kr = k * r
        if kr % (k + 1) != 0:
            raise AssertionError("mix term k*r/(k+1) must be an integer")
        h_new = 2 * r * h + kr // (k + 1)
        level = None
        for offset in range(m):
            bl = _ramp_labels(block, self.v, self._v_pow, tag.b, m, n * m, offset)
            cand = Level(n + 1, h_new, z, cuts, block, reps, bl, tag, n, r, self._v_pow)
            if validate_labels(cand, self).passed:
                level = cand
                break
        if level is None:
            raise GeneratorExhausted(f"no valid label pattern for {tag} at step {n}")
        return level

    # -- decomposition ----------------------------------------------------

    def find_cut(self, n: int, f: int) -> int | None:
        """The unique cut c of level n with f - c in [0, h_{n-1}), or None."""
        lvl = self.level(n)
        i = bisect.bisect_right(lvl.cuts, f) - 1
        if i < 0:
            return None
        c = lvl.cuts[i]
        return c if f - c < self.h(n - 1) else None

    def decompose(self, f: int, N: int) -> tuple[int, int, dict[int, int]]:
        """Unique decomposition of rung f at depth N.

        Returns (n_min, f0, coords) with f = f0 + sum(coords.values()),
        coords[j] a cut of level j for n_min < j <= N, f0 in [0, h(n_min)),
        and n_min minimal.
        """
        if not 0 <= f < self.h(N):
            raise ValueError(f"rung {f} outside [0, h_{N})")
        coords: dict[int, int] = {}
        for j in range(N, 0, -1):
            c = self.find_cut(j, f)
            if c is None:
                return j, f, coords
            coords[j] = c
            f -= c
        return 0, f, coords

    def gamma_coords(self, f: int, N: int) -> list[int]:
        """Cut coordinates of the canonical base-level representative, zeros below n_min."""
        n_min, _, coords = self.decompose(f, N)
        return [coords.get(j, 0) for j in range(1, N + 1)]

    # -- tag bookkeeping ---------------------------------------------------

    def steps_tagged(self, predicate) -> list[int]:
        return [lvl.step for lvl in self.levels if lvl.step is not None and predicate(lvl.tag)]

    def even_steps(self, a: Element | None = None) -> list[int]:
        return self.steps_tagged(lambda t: isinstance(t, EvenTag) and (a is None or t.a == a))

    def stagger_steps(self, b: Element | None = None, k: int | None = None) -> list[int]:
        return self.steps_tagged(
            lambda t: isinstance(t, StaggerTag) and (b is None or t.b == b) and (k is None or t.k == k)
        )


def _power_tables(group: FinAbGroup, v: Automorphism) -> list[dict[Element, Element]]:
    tables = [{g: g for g in group.elements()}]
    while True:
        nxt = {g: v(tables[-1][g]) for g in tables[0]}
        if all(nxt[g] == g for g in nxt):
            break
        tables.append(nxt)
        if len(tables) > group.order + 1:
            raise AssertionError("automorphism order exceeds group order bound")
    return tables


def _ramp_labels(block, v, v_pow, a, m, ramp_len, offset):
    """Labels along the block chain: orbit-stepping ramp, then constant."""
    zero = a.group.identity()
    labels = {block[0]: zero}
    cur = zero
    for t in range(1, len(block)):
        if t < ramp_len:
            cur = cur + v_pow[(t - 1 + offset) % len(v_pow)][a] if m > 0 else cur
        labels[block[t]] = cur
    return labels


# -- validation ------------------------------------------------------------


@dataclass
class CheckItem:
    name: str
    level: int
    ok: bool
    detail: str = ""


@dataclass
class Report:
    items: list[CheckItem] = field(default_factory=list)

    def add(self, name, level, ok, detail=""):
        self.items.append(CheckItem(name, level, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(it.ok for it in self.items)

    def failures(self) -> list[CheckItem]:
        return [it for it in self.items if not it.ok]

    def render(self) -> str:
        out = []
        for it in self.items:
            status = "ok" if it.ok else "FAIL"
            msg = f"  [{status}] level {it.level}: {it.name}"
            if it.detail:
                msg += f" ({it.detail})"
            out.append(msg)
        return "\n".join(out)


def validate_labels(level: Level, tower: Tower) -> Report:
    """Exact checks of the label conditions on one level.

    Verifies shift-equivariance of labels under the z-translation, the
    per-orbit-power increment frequency bands, and (for stagger levels)
    the carry-class frequency band.  All comparisons are exact rational
    inequalities; maximal classes are materialized by direct scan.
    """
    rep = Report()
    if level.tag is None:
        rep.add("seed level, no label conditions", level.n, True)
        return rep
    v = tower.v
    n = level.step
    h_prev = tower.h(level.n - 1)
    cuts = level.cut_set
    r = level.r

    bad = [c for c in level.cuts if c + level.z in cuts and level.label(c + level.z) != v(level.label(c))]
    rep.add("shift-equivariance", level.n, not bad,
            f"violated at cuts {bad[:3]}" if bad else f"checked {sum(1 for c in level.cuts if c + level.z in cuts)} cuts")

    if isinstance(level.tag, EvenTag):
        el, m = level.tag.a, least_period(v, level.tag.a)
        center = Fraction(1, m)
        width = Fraction(2, n * m)
    else:
        el, m = level.tag.b, least_period(v, level.tag.b)
        center = Fraction(1, (level.tag.k + 1) * m)
        width = Fraction(2, n * m)

    two_h = 2 * h_prev
    powers = [tower._v_pow[i % len(tower._v_pow)][el] for i in range(m)]
    for i in range(m):
        cls = [c for c in level.cuts if c - two_h in cuts and level.label(c) - level.label(c - two_h) == powers[i]]
        freq = Fraction(len(cls), r)
        ok = abs(freq - center) < width
        rep.add(f"increment-class-band i={i}", level.n, ok,
                f"|{freq} - {center}| vs {width}, class size {len(cls)}")

    if isinstance(level.tag, StaggerTag):
        k = level.tag.k
        cls = [c for c in level.cuts if c - two_h - 1 in cuts and level.label(c) == level.label(c - two_h - 1)]
        freq = Fraction(len(cls), r)
        ok = abs(freq - Fraction(k, k + 1)) < Fraction(2, n)
        rep.add("carry-class-band", level.n, ok, f"|{freq} - {Fraction(k, k+1)}| vs {Fraction(2, n)}")
    return rep


def validate_structure(tower: Tower) -> Report:
    """Exact checks of the structural conditions across all built levels."""
    rep = Report()
    for n in range(1, tower.depth + 1):
        lvl = tower.level(n)
        h_prev = tower.h(n - 1)
        rep.add("zero cut present", n, 0 in lvl.cut_set)
        rep.add("more than one cut", n, lvl.r > 1)
        rep.add("cut count matches recipe", n, lvl.r == lvl.r_expected,
                f"{lvl.r} vs {lvl.r_expected}")
        rep.add("stack containment", n, max(lvl.cuts) + h_prev <= lvl.h,
                f"max cut {max(lvl.cuts)} + {h_prev} vs height {lvl.h}")
        gaps_ok = all(b - a >= h_prev for a, b in zip(lvl.cuts, lvl.cuts[1:]))
        rep.add("cut disjointness", n, gaps_ok)
        if lvl.reps > 1:
            rebuilt = sorted(d + lvl.z * t for d in lvl.block for t in range(lvl.reps))
            rep.add("block replication", n, tuple(rebuilt) == lvl.cuts)
    mus = [tower.mu_level(n) for n in range(tower.depth + 1)]
    for n in range(1, tower.depth + 1):
        rep.add("measure nondecreasing", n, mus[n] >= mus[n - 1], f"{mus[n]} vs {mus[n-1]}")
        if tower.level(n).tag is not None:
            rep.add("measure doubling", n, mus[n] >= 2 * mus[n - 1], f"{mus[n]} vs 2*{mus[n-1]}")
        if n > 2:
            rep.add("measure growth floor", n, mus[n] >= Fraction(2) ** (n - 2))
    return rep


def validate_tower(tower: Tower) -> Report:
    rep = validate_structure(tower)
    for lvl in tower.levels:
        sub = validate_labels(lvl, tower)
        rep.items.extend(sub.items)
    return rep


# -- cylinders, points, measure ---------------------------------------------


@dataclass(frozen=True)
class Cylinder:
    """The set of points whose level-n rung lies in a fixed subset."""

    level: int
    rungs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rungs", tuple(sorted(set(self.rungs))))
        if not self.rungs:
            raise ValueError("empty cylinders are not represented")

    @staticmethod
    def single(level: int, f: int) -> "Cylinder":
        return Cylinder(level, (f,))

    @staticmethod
    def full(tower: Tower, level: int) -> "Cylinder":
        return Cylinder(level, tuple(range(tower.h(level))))


def measure(tower: Tower, cyl: Cylinder) -> Fraction:
    """Exact measure: rung count over the cut product at the cylinder's level."""
    if cyl.level > tower.depth:
        raise ValueError("cylinder level beyond tower depth")
    if any(not 0 <= f < tower.h(cyl.level) for f in cyl.rungs):
        raise ValueError("cylinder rungs out of range")
    return Fraction(len(cyl.rungs), tower.cut_product(cyl.level))


def embed(tower: Tower, cyl: Cylinder, target_level: int) -> Cylinder:
    """Re-express a cylinder at a deeper level by summing over cut choices."""
    if target_level < cyl.level:
        raise ValueError("target level must not precede the cylinder level")
    rungs = list(cyl.rungs)
    for j in range(cyl.level + 1, target_level + 1):
        cj = tower.level(j).cuts
        if len(rungs) * len(cj) > _EMBED_GUARD:
            raise MemoryError("explicit embedding would be too large; use the pairing engine")
        rungs = [f + c for f in rungs for c in cj]
    return Cylinder(target_level, tuple(rungs))


@dataclass(frozen=True)
class Point:
    """A truncated point: level rung plus explicit cut coordinates above it."""

    level: int
    f: int
    tail: tuple[int, ...]

    @property
    def truncation(self) -> int:
        return self.level + len(self.tail)

    def rung(self, tower: Tower) -> int:
        if not 0 <= self.f < tower.h(self.level):
            raise ValueError("rung out of range at the point's level")
        for offset, c in enumerate(self.tail):
            if c not in tower.level(self.level + 1 + offset).cut_set:
                raise ValueError(f"tail coordinate {c} is not a cut of level {self.level + 1 + offset}")
        return self.f + sum(self.tail)


def canonical_point(tower: Tower, rung: int, N: int) -> Point:
    """The point with the given depth-N rung, in minimal-level form."""
    n_min, f0, coords = tower.decompose(rung, N)
    return Point(n_min, f0, tuple(coords[j] for j in range(n_min + 1, N + 1)))


def apply_T(tower: Tower, p: Point, m: int) -> Point | None:
    """Shift by m rungs at the point's truncation depth; None when it leaves the stack."""
    N = p.truncation
    r = p.rung(tower)
    r2 = r + m
    if not 0 <= r2 < tower.h(N):
        return None
    return canonical_point(tower, r2, N)


def defect_fraction(tower: Tower, n: int) -> Fraction:
    """Fraction of level-n cuts lost under the level's shift: |cuts ^ (cuts - z)| / |cuts|."""
    lvl = tower.level(n)
    if lvl.z == 0:
        return Fraction(0)
    cuts = lvl.cut_set
    shifted = frozenset(c - lvl.z for c in cuts)
    return Fraction(len(cuts.symmetric_difference(shifted)), lvl.r)


# -- serialization -----------------------------------------------------------


def _compress_aps(values) -> str:
    """Greedy run-length compression into start:step:count arithmetic blocks."""
    vals = list(values)
    out = []
    i = 0
    while i < len(vals):
        if i + 1 >= len(vals):
            out.append(f"{vals[i]}:1:1")
            i += 1
            continue
        step = vals[i + 1] - vals[i]
        j = i + 1
        while j + 1 < len(vals) and vals[j + 1] - vals[j] == step:
            j += 1
        out.append(f"{vals[i]}:{step}:{j - i + 1}")
        i = j + 1
    return ",".join(out)


def _expand_aps(text: str) -> list[int]:
    out = []
    for blk in text.split(","):
        start, step, count = (int(x) for x in blk.split(":"))
        out.extend(start + step * i for i in range(count))
    return out


def _coords_str(el: Element) -> str:
    return ",".join(map(str, el.coords)) if el.coords else "-"


def _coords_from_str(text: str) -> tuple[int, ...]:
    return () if text in ("", "-") else tuple(int(x) for x in text.split(","))


def serialize_tower(tower: Tower) -> str:
    lines = ["# cfspectra tower format 1"]
    lines.append(f"group = [{', '.join(map(str, tower.group.invariant_factors))}]")
    lines.append("aut = [" + ", ".join("[" + ", ".join(map(str, row)) + "]" for row in tower.v.matrix) + "]")
    lines.append(f"depth = {tower.depth}")
    for lvl in tower.levels:
        lines.append(f"level {lvl.n}")
        if lvl.tag is None:
            lines.append("tag = seed")
        elif isinstance(lvl.tag, EvenTag):
            lines.append(f"tag = even {_coords_str(lvl.tag.a)}")
        else:
            lines.append(f"tag = stagger {_coords_str(lvl.tag.b)} k={lvl.tag.k}")
        lines.append(f"h = {lvl.h}")
        lines.append(f"z = {lvl.z}")
        lines.append(f"cuts = {_compress_aps(lvl.cuts)}")
        lines.append("labels = " + ";".join(f"{c}={_coords_str(lvl.label(c))}" for c in lvl.cuts))
    return "\n".join(lines) + "\n"


class TowerParseError(Exception):
    pass


def parse_tower(text: str) -> Tower:
    try:
        return _parse_tower_inner(text)
    except TowerParseError:
        raise
    except Exception as exc:
        raise TowerParseError(f"malformed tower file: {exc}") from exc


def _parse_tower_inner(text: str) -> Tower:
    from .groups import _parse_int_list

    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    fields = {}
    idx = 0
    while idx < len(lines) and not lines[idx].startswith("level"):
        key, _, val = lines[idx].partition("=")
        fields[key.strip()] = val.strip()
        idx += 1
    group = FinAbGroup(tuple(_parse_int_list(fields["group"])))
    v = Automorphism(group, _parse_int_list(fields["aut"]))
    depth = int(fields["depth"])
    tower = Tower(group, v)
    while idx < len(lines):
        header = lines[idx]
        if not header.startswith("level"):
            raise TowerParseError(f"expected level header, got {header!r}")
        n = int(header.split()[1])
        props = {}
        idx += 1
        while idx < len(lines) and not lines[idx].startswith("level"):
            key, _, val = lines[idx].partition("=")
            props[key.strip()] = val.strip()
            idx += 1
        cuts = _expand_aps(props["cuts"])
        labels = {}
        for entry in props["labels"].split(";"):
            cpart, _, coordpart = entry.partition("=")
            labels[int(cpart)] = group.element(_coords_from_str(coordpart))
        if set(labels) != set(cuts):
            raise TowerParseError(f"level {n}: labels do not cover the cuts exactly")
        tag_text = props["tag"]
        if tag_text == "seed":
            tag, step = None, None
        elif tag_text.startswith("even"):
            tag = EvenTag(group.element(_coords_from_str(tag_text.split()[1])))
            step = n - 1
        elif tag_text.startswith("stagger"):
            parts = tag_text.split()
            k = int(parts[2].split("=")[1])
            tag = StaggerTag(group.element(_coords_from_str(parts[1])), k)
            step = n - 1
        else:
            raise TowerParseError(f"unknown tag {tag_text!r}")
        r_expected = _expected_cut_count(tower, tag, n, len(cuts))
        lvl = Level(n, int(props["h"]), int(props["z"]), cuts, cuts, 1, labels, tag, step,
                    r_expected, tower._v_pow, explicit_labels=labels)
        if n != tower.depth + 1:
            raise TowerParseError(f"level {n} out of order")
        tower.levels.append(lvl)
    if tower.depth != depth:
        raise TowerParseError(f"declared depth {depth} but parsed {tower.depth} levels")
    return tower


def _expected_cut_count(tower: Tower, tag, n: int, actual: int) -> int:
    if tag is None:
        return actual
    step = n - 1
    if isinstance(tag, EvenTag):
        return step**3 * least_period(tower.v, tag.a)
    return step**3 * (tag.k + 1) * least_period(tower.v, tag.b)
