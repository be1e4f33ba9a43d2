"""Return-structure combinatorics: transport witnesses and recurrence searches.

The stagger levels place cuts at both gap 2h and gap 2h+1, so a block of
rungs can be transported down the stack by shifts of 2h while its rung
offset either stays (cuts returning after 2h) or drops by one (cuts
returning after 2h+1).  Chaining such levels moves any rung to any lower
rung with an explicitly certified measure fraction; that is the input the
product-ergodicity criterion consumes.  Everything here is verified by
per-level set inclusions and exact rational density counts, with optional
brute-force rung enumeration at shallow depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cocycle import rung_label
from .groups import Element, least_period
from .tower import Cylinder, EvenTag, StaggerTag, Tower, embed

_BRUTE_GUARD = 2_000_000
_INT64_MAX = 2**62


# -- return cuts ---------------------------------------------------------------


@dataclass(frozen=True)
class ProductCylinder:
    """A product of cylinders over a common level, one factor per coordinate."""

    factors: tuple[Cylinder, ...]

    def __post_init__(self):
        levels = {c.level for c in self.factors}
        if len(levels) != 1:
            raise ValueError("all factors must sit at a common level")

    @property
    def p(self) -> int:
        return len(self.factors)

    @property
    def level(self) -> int:
        return self.factors[0].level

    def measure(self, tower: Tower) -> Fraction:
        from .tower import measure as _measure

        out = Fraction(1)
        for c in self.factors:
            out *= _measure(tower, c)
        return out


@dataclass
class ReturnCuts:
    """Cuts of one stagger level that survive the two forward shifts."""

    level: int
    after_even: tuple[int, ...]   # c with c + 2h a cut
    after_odd: tuple[int, ...]    # c with c + 2h + 1 a cut
    density_even: Fraction
    density_odd: Fraction

    @property
    def certified(self) -> bool:
        third = Fraction(1, 3)
        return self.density_even >= third and self.density_odd >= third


def return_cuts(tower: Tower, n: int) -> ReturnCuts:
    """The two return-cut families of the level built at step n (stagger, ratio 1)."""
    lvl = tower.level(n + 1)
    if not isinstance(lvl.tag, StaggerTag) or lvl.tag.k != 1:
        raise ValueError(f"step {n} does not carry a ratio-1 stagger level")
    h = tower.h(n)
    cs = lvl.cut_set
    even = tuple(c for c in lvl.cuts if c + 2 * h in cs)
    odd = tuple(c for c in lvl.cuts if c + 2 * h + 1 in cs)
    return ReturnCuts(n + 1, even, odd,
                      Fraction(len(even), lvl.r), Fraction(len(odd), lvl.r))


def _return_cuts_cached(tower: Tower, level: int) -> ReturnCuts:
    key = ("return_cuts", level)
    rc = tower._cache.get(key)
    if rc is None:
        rc = return_cuts(tower, level - 1)
        tower._cache[key] = rc
    return rc


# -- transport witnesses ----------------------------------------------------------


@dataclass
class TransportWitness:
    """A product block transported between rung tuples by one integer shift.

    Per coordinate i the block is f_i plus a choice set at every level in
    (base, top]; ``plan[i][level]`` names the choice: "all" cuts, cuts
    returning "even" (rung offset kept), or returning "odd" (offset drops).
    A negative shift transports the block built for the reversed tuple.
    """

    p: int
    base_level: int
    top_level: int
    start: tuple[int, ...]
    target: tuple[int, ...]
    shift: int
    plan: tuple[dict, ...]
    measure_ratios: tuple[Fraction, ...]
    flipped: bool = False
    slip: int = 0
    slip_level: int | None = None

    def block_rungs(self, tower: Tower, i: int) -> list[int]:
        """Explicit rung enumeration of coordinate i (shallow towers only)."""
        rungs = [self.start[i] if not self.flipped else self.target[i]]
        size = 1
        for lvl in range(self.base_level + 1, self.top_level + 1):
            choice = self._choice_cuts(tower, lvl, i)
            size *= len(choice)
            if size > _BRUTE_GUARD:
                raise MemoryError("explicit block too large; rely on the structural checks")
            rungs = [f + c for f in rungs for c in choice]
        if self.flipped:
            rungs = [f + abs(self.shift) for f in rungs]
        return rungs

    def _choice_cuts(self, tower: Tower, lvl: int, i: int):
        return _cuts_for_kind(tower, lvl, self.plan[i].get(lvl, "all"))


def _cuts_for_kind(tower: Tower, lvl: int, kind):
    if kind == "all":
        return tower.level(lvl).cuts
    if kind == "even":
        return _return_cuts_cached(tower, lvl).after_even
    if kind == "odd":
        return _return_cuts_cached(tower, lvl).after_odd
    if isinstance(kind, tuple) and kind[0] == "slip":
        _, step = kind
        key = ("returning_cuts", lvl, step)
        cached = tower._cache.get(key)
        if cached is None:
            cs = tower.level(lvl).cut_set
            cached = tuple(c for c in tower.level(lvl).cuts if c + step in cs)
            tower._cache[key] = cached
        return cached
    raise ValueError(f"unknown plan entry {kind!r}")


class NoWitness(Exception):
    """The tower is not deep enough to transport the requested tuple."""

    def __init__(self, message, required_depth=None):
        super().__init__(message)
        self.required_depth = required_depth


def _stagger_one_levels(tower: Tower, above: int) -> list[int]:
    return [lvl.n for lvl in tower.levels
            if isinstance(lvl.tag, StaggerTag) and lvl.tag.k == 1 and lvl.n > above]


def transport_witness(tower: Tower, base_level: int, start, target) -> TransportWitness:
    """A witness moving the product cylinder over ``start`` onto ``target``.

    Same-orientation tuples follow the layered construction through ratio-1
    stagger levels; strictly mixed orientations for p = 2 slide the two
    coordinates along the two cut spacings of a single stagger level.
    """
    start = tuple(start)
    target = tuple(target)
    p = len(start)
    drops = tuple(f - g for f, g in zip(start, target))
    h_base = tower.h(base_level)
    if any(not 0 <= f < h_base for f in start + target):
        raise ValueError("rungs outside the base level")
    if all(d >= 0 for d in drops):
        return _layered_witness(tower, base_level, start, target, flipped=False)
    if all(d <= 0 for d in drops):
        w = _layered_witness(tower, base_level, target, start, flipped=True)
        return w
    if p != 2:
        raise NoWitness("mixed-orientation tuples handled for p = 2 only")
    return _slip_witness(tower, base_level, start, target)


def _layered_witness(tower, base_level, start, target, flipped):
    p = len(start)
    drops = tuple(f - g for f, g in zip(start, target))
    s = max(drops)
    levels = _stagger_one_levels(tower, base_level)
    if len(levels) < s:
        raise NoWitness(
            f"need {s} ratio-1 stagger levels above {base_level}, found {len(levels)}",
            required_depth=s,
        )
    chosen = levels[:s]
    top = max(chosen) if chosen else base_level
    plan = []
    ratios = []
    for i in range(p):
        entry: dict = {}
        ratio = Fraction(1)
        for j, lvl in enumerate(chosen):
            rc = _return_cuts_cached(tower, lvl)
            if j < drops[i]:
                entry[lvl] = "odd"
                ratio *= rc.density_odd
            else:
                entry[lvl] = "even"
                ratio *= rc.density_even
        plan.append(entry)
        ratios.append(ratio)
    shift = 2 * sum(tower.h(l - 1) for l in chosen)
    if flipped:
        return TransportWitness(p, base_level, top, target, start, -shift,
                                tuple(plan), tuple(ratios), flipped=True)
    return TransportWitness(p, base_level, top, start, target, shift,
                            tuple(plan), tuple(ratios))


def _returning_count(tower, level: int, step: int) -> int:
    key = ("returning_count", level, step)
    cnt = tower._cache.get(key)
    if cnt is None:
        lvl = tower.level(level)
        cs = lvl.cut_set
        cnt = sum(1 for c in lvl.cuts if c + step in cs)
        tower._cache[key] = cnt
    return cnt


def _slip_witness(tower, base_level, start, target):
    (f, d), (f2, d2) = start, target
    delta = (d2 - d) - (f2 - f)
    for lvl in tower.levels:
        if not isinstance(lvl.tag, StaggerTag) or lvl.n <= base_level:
            continue
        h = tower.h(lvl.n - 1)
        step_a = (2 * h + 1) * delta
        step_b = 2 * h * delta
        sa = _returning_count(tower, lvl.n, step_a)
        sb = _returning_count(tower, lvl.n, step_b)
        if sa and sb:
            shift = (f2 - f) + step_a
            assert shift == (d2 - d) + step_b
            plan = ({lvl.n: ("slip", step_a)}, {lvl.n: ("slip", step_b)})
            ratios = (Fraction(sa, lvl.r), Fraction(sb, lvl.r))
            return TransportWitness(2, base_level, lvl.n, start, target, shift,
                                    plan, ratios, slip=delta, slip_level=lvl.n)
    raise NoWitness(f"no stagger level can absorb a slip of {delta}")


def verify_witness(tower: Tower, w: TransportWitness) -> bool:
    """Structural verification: per-level inclusions plus the shift bookkeeping.

    Each selected choice set must land back in the cuts under its designated
    step, the per-coordinate rung drops must sum against the shift, and every
    choice set must be nonempty.  Together these force the containment of the
    shifted block, level by level.
    """
    src = w.target if w.flipped else w.start
    dst = w.start if w.flipped else w.target
    shift = -w.shift if w.flipped else w.shift

    def inclusion_ok(lvl: int, kind, step: int) -> bool:
        key = ("plan_inclusion", lvl, kind)
        verdict = tower._cache.get(key)
        if verdict is None:
            cuts = tower.level(lvl).cut_set
            choice = _cuts_for_kind(tower, lvl, kind)
            verdict = bool(choice) and all(c + step in cuts for c in choice)
            tower._cache[key] = verdict
        return verdict

    for i in range(w.p):
        expected_gain = 0
        for lvl in range(w.base_level + 1, w.top_level + 1):
            kind = w.plan[i].get(lvl, "all")
            if kind == "all":
                continue
            h = tower.h(lvl - 1)
            if kind == "even":
                step = 2 * h
            elif kind == "odd":
                step = 2 * h + 1
            else:
                step = kind[1]
            if not inclusion_ok(lvl, kind, step):
                return False
            expected_gain += step
        # the shift splits into cut gains plus the rung-offset move
        if expected_gain + (dst[i] - src[i]) != shift:
            return False
    return True


def brute_force_witness_check(tower: Tower, w: TransportWitness) -> bool:
    """Independent re-verification by explicit rung enumeration (shallow only)."""
    top = w.top_level
    for i in range(w.p):
        rungs = w.block_rungs(tower, i)
        target_rungs = set(embed(tower, Cylinder.single(w.base_level, w.target[i]), top).rungs)
        start_rungs = set(embed(tower, Cylinder.single(w.base_level, w.start[i]), top).rungs)
        for g in rungs:
            if g not in start_rungs:
                return False
            if g + w.shift not in target_rungs:
                return False
    return True


def ergodicity_sweep(tower: Tower, p: int, base_level: int, tuples) -> list[TransportWitness]:
    """Transport witnesses for every requested (start, target) rung tuple."""
    if p not in (1, 2):
        raise ValueError("desk-scale sweep supports p in {1, 2}")
    out = []
    for start, target in tuples:
        w = transport_witness(tower, base_level, start, target)
        if not verify_witness(tower, w):
            raise AssertionError(f"witness failed structural verification: {start}->{target}")
        out.append(w)
    return out


def all_rung_pairs(tower: Tower, base_level: int, p: int):
    """Every ordered (start, target) tuple of base-level rungs, p coordinates."""
    rungs = range(tower.h(base_level))
    singles = [((f,), (g,)) for f in rungs for g in rungs]
    if p == 1:
        return singles
    return [((f, d), (f2, d2)) for f in rungs for f2 in rungs for d in rungs for d2 in rungs]


# -- the summable-weight audit ------------------------------------------------------


def geometric_weight(p: int):
    """delta(g) = (1/8) * 4^(-sum |g_i|); total over all of Z^p is (5/3)^p / 8 < 1/2."""

    def delta(diffs):
        return Fraction(1, 8) * Fraction(1, 4) ** sum(abs(d) for d in diffs)

    return delta


def geometric_weight_total(p: int) -> Fraction:
    return Fraction(1, 8) * Fraction(5, 3) ** p


def transport_density_audit(tower: Tower, p: int, base_level: int, tuples,
                            delta=None) -> list[tuple]:
    """Check each witness carries more mass than the summable weight demands.

    The criterion needs, for every rung tuple, a transported block of product
    measure exceeding delta(differences) times the product cylinder measure;
    the audit certifies the exact inequality witness by witness.
    """
    delta = geometric_weight(p) if delta is None else delta
    if geometric_weight_total(p) >= Fraction(1, 2) and delta is geometric_weight(p):
        raise ValueError("weight function must sum below 1/2")
    results = []
    for start, target in tuples:
        w = transport_witness(tower, base_level, start, target)
        if not verify_witness(tower, w):
            raise AssertionError("witness failed verification")
        ratio = Fraction(1)
        for r in w.measure_ratios:
            ratio *= r
        bound = delta(tuple(f - g for f, g in zip(start, target)))
        results.append((start, target, ratio, bound, ratio > bound))
    return results


# -- label-value witnesses -----------------------------------------------------------


@dataclass
class LabelWitnessReport:
    step: int
    shift: int
    ratio: Fraction
    ratio_bound: Fraction
    ratio_ok: bool
    samples_checked: int
    label_ok: bool


def label_transport_witness(tower: Tower, p: int, base_level: int, rungs,
                            a: Element, samples: int = 64) -> LabelWitnessReport:
    """Blocks whose backward 2h-shift carries the cocycle value exactly ``a``.

    Uses the first even-tag level for ``a`` above the base: the increment
    class at power zero returns into the cuts under the backward shift, has
    density above 1/(2 * period), and every sampled block rung realizes the
    label increment a along the shift.
    """
    rungs = tuple(rungs)
    if len(rungs) != p:
        raise ValueError("one start rung per coordinate")
    lvl = next((l for l in tower.levels
                if isinstance(l.tag, EvenTag) and l.tag.a == a and l.n > base_level + 1), None)
    if lvl is None:
        raise NoWitness(f"no even level for {a} above level {base_level + 1}")
    k = lvl.n - 1  # the step whose height drives the shift
    h = tower.h(k)
    cs = lvl.cut_set
    cls = tuple(c for c in lvl.cuts
                if c - 2 * h in cs and lvl.label(c) - lvl.label(c - 2 * h) == a)
    m = least_period(tower.v, a)
    ratio = Fraction(len(cls), lvl.r)
    bound = Fraction(1, 2 * m)
    N = lvl.n
    checked = 0
    ok = True
    mid_cuts = [tower.level(j).cuts for j in range(base_level + 1, k + 1)]
    top_picks = sorted({cls[0], cls[len(cls) // 2], cls[-1]})
    for mid in _spread_product(mid_cuts, limit=max(1, samples // (len(top_picks) * p))):
        for c_top in top_picks:
            for f in rungs:
                g = f + sum(mid) + c_top
                val = rung_label(tower, g, N) - rung_label(tower, g - 2 * h, N)
                checked += 1
                if val != a:
                    ok = False
    return LabelWitnessReport(k, -2 * h, ratio, bound, ratio > bound, checked, ok)


def _spread_product(cut_lists, limit: int = 16):
    """A deterministic spread of cut combinations: ends and middles first."""
    picks = []
    for cuts in cut_lists:
        sel = sorted({cuts[0], cuts[len(cuts) // 2], cuts[-1]})
        picks.append(sel)
    return itertools.islice(itertools.product(*picks), limit)


# -- multiple recurrence -----------------------------------------------------------


def multiple_recurrence_search(tower: Tower, A: Cylinder, p: int, k_max: int,
                               N: int) -> tuple[int, Fraction] | None:
    """Least k <= k_max with positive (p+1)-fold intersection mass at depth N.

    A miss is a truncation statement, not a disproof; a hit is exact and
    monotone with depth.
    """
    if k_max * p >= tower.h(N):
        raise ValueError("search range exceeds the depth height")
    rungs = np.array(embed(tower, A, N).rungs, dtype=object)
    if tower.h(N) < _INT64_MAX:
        rungs = rungs.astype(np.int64)
    rung_set = set(int(x) for x in rungs)
    for k in range(1, k_max + 1):
        hits = 0
        for f in rung_set:
            if all((f + j * k) in rung_set for j in range(1, p + 1)):
                hits += 1
        if hits:
            return k, Fraction(hits, tower.cut_product(N))
    return None


def recurrence_holds_at(tower: Tower, A: Cylinder, p: int, k: int, N: int) -> bool:
    """Does the k-step (p+1)-fold intersection have positive mass at depth N?"""
    rungs = embed(tower, A, N).rungs
    if tower.h(N) >= _INT64_MAX:
        rung_set = set(rungs)
        return any(all(f + j * k in rung_set for j in range(1, p + 1)) for f in rungs)
    arr = np.array(rungs, dtype=np.int64)
    mask = np.ones(len(arr), dtype=bool)
    for j in range(1, p + 1):
        shifted = arr + j * k
        mask &= np.isin(shifted, arr, assume_unique=True)
        if not mask.any():
            return False
    return bool(mask.any())
