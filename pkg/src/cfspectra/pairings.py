"""Exact inner products of shifted cylinder indicators with certified error bounds.

The central object is the weighted pairing

    P(chi, m, A, B, N) = sum over rungs f at depth N with f in E_B and
    f + m in E_A of chi(rung_label(f+m) - rung_label(f)) * mu(rung),

where E_A, E_B are the depth-N rung sets of two cylinders.  The rung sets
are astronomically large at moderate depth, so the sum is never formed
directly.  Instead the levelwise product structure of the rung sets gives
an exact recursion: writing Q_j(d) for the unnormalized pairing of the
depth-j rung sets at shift d,

    Q_j(d) = sum over cut pairs (c, c') of level j with |d - (c'-c)| < h_{j-1}
             of chi(label(c') - label(c)) * Q_{j-1}(d - (c'-c)).

Cut differences of one level cluster far apart, so each shift meets only a
handful of (c'-c) values and the recursion stays tiny.  The coefficients of
the needed base shifts are propagated top-down once per (chi, m, N); the
base sets then enter only through a cheap explicit sum.  All phases are
tracked as integer histograms over root-of-unity exponents, so the final
value is an exact cyclotomic number.

The certified error bound is the exact measure of the rungs of E_B that the
shift pushes out of [0, h_N): their true contribution is determined only by
deeper levels, and is at most their mass in modulus.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .cyclotomic import Cyclo
from .groups import Character, Element
from .tower import Cylinder, Tower, embed
from .cocycle import rung_label

_STATE_GUARD = 4000


@dataclass
class LevelPairing:
    """An exact pairing value together with a certified truncation error bound."""

    value: Cyclo
    error_bound: Fraction
    depth: int
    shift: int


class PairingEngine:
    """Evaluates weighted pairings over one tower for one character."""

    def __init__(self, tower: Tower, chi: Character):
        if chi.group != tower.group:
            raise ValueError("character must live on the tower's label group")
        self.tower = tower
        self.chi = chi
        self.L = chi.root_order
        self._orbit_sums: dict[Element, list[int]] = {}
        self._prop_cache: dict[tuple[int, int, int], dict[int, dict[int, int]]] = {}

    # -- kernels -----------------------------------------------------------

    def _chi_exponents_on_orbit(self, g: Element) -> list[int]:
        """Exponents of chi on the forward v-orbit of g, one full period."""
        out = self._orbit_sums.get(g)
        if out is None:
            out = []
            x = g
            while True:
                out.append(self.chi.exponent(x))
                x = self.tower.v(x)
                if x == g:
                    break
            self._orbit_sums[g] = out
        return out

    def _range_exponent_counts(self, g: Element, count: int, start: int) -> dict[int, int]:
        """Histogram of chi(v^j(g)) for j = start .. start+count-1."""
        orb = self._chi_exponents_on_orbit(g)
        p = len(orb)
        hist: dict[int, int] = {}
        full, rem = divmod(count, p)
        if full:
            for e in orb:
                hist[e] = hist.get(e, 0) + full
        for j in range(start, start + rem):
            e = orb[j % p]
            hist[e] = hist.get(e, 0) + 1
        return hist

    def level_kernel(self, n: int, lo: int, hi: int) -> list[tuple[int, dict[int, int]]]:
        """All cut-difference transitions of level n with difference in [lo, hi].

        Returns a sorted list of (delta, histogram) where the histogram counts
        chi(label(c + delta) - label(c)) over all cut pairs at difference delta.
        """
        lvl = self.tower.level(n)
        v_pow = self.tower._v_pow
        ordv = len(v_pow)
        out: dict[int, dict[int, int]] = {}
        block = lvl.block
        bl = lvl.block_labels
        reps = lvl.reps
        z = lvl.z if lvl.reps > 1 else 0
        if lvl.explicit_labels is not None or reps == 1 or z == 0:
            # direct scan over cut pairs (seed levels and deserialized towers)
            cuts = lvl.cuts
            cut_set = lvl.cut_set
            for c in cuts:
                first = bisect.bisect_left(cuts, c + lo)
                last = bisect.bisect_right(cuts, c + hi)
                for c2 in cuts[first:last]:
                    if c2 not in cut_set:
                        continue
                    delta = c2 - c
                    e = self.chi.exponent(lvl.label(c2) - lvl.label(c))
                    out.setdefault(delta, {})[e] = out.setdefault(delta, {}).get(e, 0) + 1
            return sorted(out.items())
        # block structure: cuts = block + z*{0..reps-1};
        # pairs (d1 + z*j, d2 + z*(j+t)) contribute chi(v^j(v^t(label d2) - label d1))
        for d1 in block:
            l1 = bl[d1]
            for d2 in block:
                base = d2 - d1
                t_lo = -((base - lo) // z) if z else 0
                # smallest t with base + z*t >= lo
                t_min = -((base - lo) // z)
                t_max = (hi - base) // z
                for t in range(t_min, t_max + 1):
                    delta = base + z * t
                    if delta < lo or delta > hi:
                        continue
                    j_start = max(0, -t)
                    j_count = reps - abs(t)
                    if j_count <= 0:
                        continue
                    g = v_pow[t % ordv][bl[d2]] - l1
                    hist = self._range_exponent_counts(g, j_count, j_start)
                    slot = out.setdefault(delta, {})
                    for e, cnt in hist.items():
                        slot[e] = slot.get(e, 0) + cnt
        return sorted(out.items())

    # -- propagation ---------------------------------------------------------

    def propagate(self, N: int, m: int, base_level: int) -> dict[int, dict[int, int]]:
        """Coefficients of the base-level shifts reached from shift m at depth N.

        Returns {base_shift: exponent histogram}; the pairing is then
        sum over shifts of (histogram as cyclotomic) * Q_base(shift).
        """
        states: dict[int, dict[int, int]] = {m: {0: 1}}
        for j in range(N, base_level, -1):
            h_prev = self.tower.h(j - 1)
            lo = min(states) - h_prev + 1
            hi = max(states) + h_prev - 1
            kernel = self.level_kernel(j, lo, hi)
            deltas = [k[0] for k in kernel]
            new_states: dict[int, dict[int, int]] = {}
            for d, hist in states.items():
                first = bisect.bisect_right(deltas, d - h_prev)
                last = bisect.bisect_left(deltas, d + h_prev)
                for idx in range(first, last):
                    delta, khist = kernel[idx]
                    child = d - delta
                    slot = new_states.setdefault(child, {})
                    for e1, c1 in hist.items():
                        for e2, c2 in khist.items():
                            e = (e1 + e2) % self.L
                            slot[e] = slot.get(e, 0) + c1 * c2
            states = new_states
            if not states:
                return {}
            if len(states) > _STATE_GUARD:
                raise RuntimeError(
                    f"pairing propagation exceeded {_STATE_GUARD} states at level {j}; "
                    "this shift pattern is outside the supported desk workloads"
                )
        return states

    # -- base application and the public pairing -------------------------------

    def base_values(self, A: tuple[int, ...], B: tuple[int, ...], level: int,
                    shifts) -> dict[int, Cyclo]:
        """Q_level(d) computed explicitly: sum over u in B with u + d in A."""
        t = self.tower
        a_set = set(A)
        out: dict[int, Cyclo] = {}
        label_cache: dict[int, Element] = {}

        def lab(f: int) -> Element:
            el = label_cache.get(f)
            if el is None:
                el = rung_label(t, f, level)
                label_cache[f] = el
            return el

        for d in shifts:
            counts: dict[int, int] = {}
            for u in B:
                if u + d in a_set:
                    e = self.chi.exponent(lab(u + d) - lab(u))
                    counts[e] = counts.get(e, 0) + 1
            out[d] = Cyclo.from_exponent_counts(self.L, counts) if counts else Cyclo.zero(self.L)
        return out

    def pairing(self, m: int, A: Cylinder, B: Cylinder, N: int) -> LevelPairing:
        """<U^m 1_A, 1_B> at depth N: exact value plus certified boundary error."""
        t = self.tower
        if N > t.depth:
            raise ValueError("depth exceeds the built tower")
        if abs(m) >= t.h(N):
            raise ValueError("shift magnitude must stay below the depth height")
        base = max(A.level, B.level)
        A_base = embed(t, A, base).rungs
        B_base = embed(t, B, base).rungs
        key = (N, m, base)
        if key not in self._prop_cache:
            self._prop_cache[key] = self.propagate(N, m, base)
        coeffs = self._prop_cache[key]
        qvals = self.base_values(A_base, B_base, base, coeffs.keys())
        total = Cyclo.zero(self.L)
        for d, hist in coeffs.items():
            q = qvals[d]
            if q.is_zero():
                continue
            total = total + Cyclo.from_exponent_counts(self.L, hist) * q
        value = total / t.cut_product(N)
        err = Fraction(out_of_range_count(t, B_base, base, N, m), t.cut_product(N))
        return LevelPairing(value, err, N, m)


# -- structured rung-set counting -------------------------------------------


def count_ge(tower: Tower, base_rungs: tuple[int, ...], base_level: int, N: int,
             threshold: int) -> int:
    """#{f in E at depth N : f >= threshold} for E = base_rungs + cut sums."""

    maxes = {}
    cur = max(base_rungs)
    maxes[base_level] = cur
    for j in range(base_level + 1, N + 1):
        cur += max(tower.level(j).cuts)
        maxes[j] = cur

    sizes = {base_level: len(base_rungs)}
    for j in range(base_level + 1, N + 1):
        sizes[j] = sizes[j - 1] * tower.level(j).r

    def rec(j: int, t: int) -> int:
        if t <= 0:
            return sizes[j]
        if t > maxes[j]:
            return 0
        if j == base_level:
            return len(base_rungs) - bisect.bisect_left(base_rungs, t)
        cuts = tower.level(j).cuts
        # cuts >= t contribute fully; cuts <= t - 1 - maxes[j-1] contribute nothing
        full_from = bisect.bisect_left(cuts, t)
        total = (len(cuts) - full_from) * sizes[j - 1]
        lo = bisect.bisect_right(cuts, t - 1 - maxes[j - 1])
        for c in cuts[lo:full_from]:
            total += rec(j - 1, t - c)
        return total

    return rec(N, threshold)


def out_of_range_count(tower: Tower, B_base: tuple[int, ...], base_level: int,
                       N: int, m: int) -> int:
    """#{f in E_B at depth N with f + m outside [0, h_N)}."""
    if m == 0:
        return 0
    if m > 0:
        return count_ge(tower, B_base, base_level, N, tower.h(N) - m)
    total = len(B_base) * tower.cut_product(N) // tower.cut_product(base_level)
    return total - count_ge(tower, B_base, base_level, N, -m)
