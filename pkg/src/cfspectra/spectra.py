"""Finite unitary models: tensor/symmetric powers and eigenvalue multiplicities.

The exact mode works with diagonal unitaries whose angles are rational turns
p/q chosen free of small integer relations; eigenvalues of restricted tensor
powers are then exact fractions mod 1 and multiplicity counting is literal.
The floating mode takes arbitrary unitary matrices and clusters eigenvalues
with a stability audit.

Continuity of spectrum has no finite-dimensional counterpart; its working
shadow here is relation-freeness of the angles, which makes the permutation
action on index tuples with distinct entries behave exactly like the action
on generic fibers.  Multiplicity assertions are made on that free part of
the spectrum; eigenvalues carried by repeated-index tuples are reported
separately as the vanishing-proportion degenerate part.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tower import Report

_CLUSTER_TOL = 1e-9


# -- unitaries ---------------------------------------------------------------


class FiniteUnitary:
    """A unitary in exact-diagonal form (rational turns) or as a float matrix."""

    def __init__(self, turns=None, matrix=None):
        if (turns is None) == (matrix is None):
            raise ValueError("give exactly one of turns or matrix")
        if turns is not None:
            self.turns = tuple(Fraction(t) % 1 for t in turns)
            self.matrix = None
            self.dim = len(self.turns)
        else:
            m = np.asarray(matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("matrix must be square")
            if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-12):
                raise ValueError("matrix is not unitary within 1e-12")
            self.turns = None
            self.matrix = m
            self.dim = m.shape[0]

    @property
    def exact(self) -> bool:
        return self.turns is not None

    def to_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.diag(np.exp(2j * np.pi * np.array([float(t) for t in self.turns])))

    def eigen_turns(self) -> tuple[Fraction, ...]:
        if not self.exact:
            raise ValueError("exact eigenvalues require diagonal-turn form")
        return self.turns


def relation_free_turns(d: int, k: int) -> tuple[Fraction, ...]:
    """Angles p_i/q with no integer relation sum(n_i * theta_i) in Z, |n_i| <= k.

    Chosen as powers of a base exceeding k, so any small relation would be a
    vanishing base-B expansion; verified exhaustively before returning.
    """
    B = 2 * k + 1
    ps = [B**i for i in range(d)]
    q = 2 * k * sum(ps) + 1
    for n in itertools.product(range(-k, k + 1), repeat=d):
        if any(n) and sum(c * p for c, p in zip(n, ps)) % q == 0:
            raise AssertionError("relation found; base choice is broken")
    return tuple(Fraction(p, q) for p in ps)


def generic_diagonal(d: int, k: int) -> FiniteUnitary:
    """A diagonal unitary with relation-free angles, safe for k-fold powers."""
    return FiniteUnitary(turns=relation_free_turns(d, k))


# -- permutation groups --------------------------------------------------------


class PermGroup:
    """A subgroup of the symmetric group on k points, as tuples of images."""

    def __init__(self, k: int, generators):
        self.k = k
        gens = [tuple(g) for g in generators]
        ident = tuple(range(k))
        elems = {ident}
        frontier = [ident]
        while frontier:
            g = frontier.pop()
            for s in gens:
                t = tuple(s[g[i]] for i in range(k))
                if t not in elems:
                    elems.add(t)
                    frontier.append(t)
        self.elements = sorted(elems)
        if math.factorial(k) % len(self.elements) != 0:
            raise AssertionError("subgroup order must divide k!")

    @property
    def order(self) -> int:
        return len(self.elements)

    @staticmethod
    def symmetric(k: int) -> "PermGroup":
        if k == 1:
            return PermGroup(1, [])
        gens = [tuple([1, 0] + list(range(2, k)))]
        if k > 2:
            gens.append(tuple(list(range(1, k)) + [0]))
        return PermGroup(k, gens)

    @staticmethod
    def trivial(k: int) -> "PermGroup":
        return PermGroup(k, [])

    def tuple_orbit(self, t: tuple[int, ...]) -> frozenset[tuple[int, ...]]:
        # position action: sigma moves the entry at i to position sigma(i)
        return frozenset(tuple(t[_inverse(s)[i]] for i in range(self.k)) for s in self.elements)

    def __repr__(self):
        return f"PermGroup(k={self.k}, order={self.order})"


def _inverse(s: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(s)
    for i, x in enumerate(s):
        inv[x] = i
    return tuple(inv)


def all_subgroups_sym(k: int) -> list[PermGroup]:
    """Every subgroup of the symmetric group on k points (k <= 4)."""
    if k > 4:
        raise ValueError("subgroup enumeration supported for k <= 4 only")
    full = PermGroup.symmetric(k).elements
    seen = {frozenset([tuple(range(k))])}
    out = [PermGroup(k, [])]
    frontier = [out[0]]
    while frontier:
        H = frontier.pop()
        for g in full:
            if g in H.elements:
                continue
            H2 = PermGroup(k, [list(x) for x in H.elements] + [g])
            key = frozenset(H2.elements)
            if key not in seen:
                seen.add(key)
                out.append(H2)
                frontier.append(H2)
    out.sort(key=lambda h: (h.order, h.elements))
    return out


def orbit_count_burnside(gamma: PermGroup, d: int) -> int:
    """Number of orbits on index tuples, by averaging fixed-point counts."""
    total = 0
    for s in gamma.elements:
        cycles = 0
        seen = [False] * gamma.k
        for i in range(gamma.k):
            if not seen[i]:
                cycles += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = s[j]
        total += d**cycles
    return total // gamma.order


# -- restricted tensor powers ----------------------------------------------------


@dataclass
class RestrictedPower:
    """A tensor power restricted to the invariant subspace of a permutation group.

    For diagonal input the operator is diagonal in the orbit-sum basis; each
    basis vector is labelled by its orbit representative and carries the exact
    eigen-turn (the sum of the angle turns along the tuple).
    """

    dim: int
    k: int
    gamma_order: int
    orbit_reps: tuple[tuple[int, ...], ...]
    eigen_turns: tuple[Fraction, ...]
    contents: tuple[tuple[int, ...], ...]  # sorted index multiset per basis vector


def invariant_restriction(V: FiniteUnitary, k: int, gamma: PermGroup) -> RestrictedPower:
    """V^(tensor k) restricted to the gamma-invariant subspace (exact diagonal mode)."""
    if not V.exact:
        raise ValueError("exact restriction requires a diagonal-turn unitary")
    if gamma.k != k:
        raise ValueError("permutation group degree must equal the power")
    d = V.dim
    reps = []
    seen = set()
    for t in itertools.product(range(d), repeat=k):
        if t in seen:
            continue
        orb = gamma.tuple_orbit(t)
        seen.update(orb)
        reps.append(min(orb))
    reps.sort()
    turns = tuple(sum((V.turns[i] for i in rep), Fraction(0)) % 1 for rep in reps)
    contents = tuple(tuple(sorted(rep)) for rep in reps)
    rp = RestrictedPower(len(reps), k, gamma.order, tuple(reps), turns, contents)
    if rp.dim != orbit_count_burnside(gamma, d):
        raise AssertionError("orbit count disagrees with the Burnside average")
    return rp


def symmetric_power(V: FiniteUnitary, k: int) -> RestrictedPower:
    return invariant_restriction(V, k, PermGroup.symmetric(k))


# -- multiplicity functions --------------------------------------------------------


@dataclass
class MultiplicityFunction:
    clusters: dict
    mode: str
    stable: bool = True

    def values(self) -> Counter:
        return Counter(self.clusters.values())

    def multiplicity_set(self) -> frozenset[int]:
        return frozenset(self.clusters.values())

    def is_constant(self, value: int) -> bool:
        return set(self.clusters.values()) == {value}


def multiplicity_function(U) -> MultiplicityFunction:
    """Eigenvalue multiplicities: exact for turn-diagonal input, clustered for float."""
    if isinstance(U, RestrictedPower):
        return MultiplicityFunction(dict(Counter(U.eigen_turns)), "exact")
    if isinstance(U, FiniteUnitary) and U.exact:
        return MultiplicityFunction(dict(Counter(U.turns)), "exact")
    m = U.to_matrix() if isinstance(U, FiniteUnitary) else np.asarray(U, dtype=complex)
    if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-12):
        raise ValueError("input is not unitary within 1e-12")
    eigs = np.linalg.eigvals(m)
    clusters = _cluster(eigs, _CLUSTER_TOL)
    stable = len(clusters) == len(_cluster(eigs, _CLUSTER_TOL / 2))
    return MultiplicityFunction(clusters, "float", stable)


def _cluster(eigs, tol):
    order = np.argsort(np.angle(eigs))
    eigs = eigs[order]
    groups: list[list[complex]] = []
    for e in eigs:
        if groups and abs(e - groups[-1][-1]) < tol:
            groups[-1].append(e)
        else:
            groups.append([e])
    # the circle wraps: merge the last group into the first when adjacent
    if len(groups) > 1 and abs(groups[0][0] - groups[-1][-1]) < tol:
        groups[0].extend(groups.pop())
    return {g[0]: len(g) for g in groups}


# -- the homogeneous-multiplicity checks ----------------------------------------


def _power_hypothesis_ok(V: FiniteUnitary, k: int) -> bool:
    """The k-fold symmetric power has simple spectrum: all multiset sums distinct."""
    sums = Counter()
    for comb in itertools.combinations_with_replacement(range(V.dim), k):
        sums[sum((V.turns[i] for i in comb), Fraction(0)) % 1] += 1
    return all(c == 1 for c in sums.values())


def homogeneous_multiplicity_check(V: FiniteUnitary, k: int, gamma: PermGroup) -> Report:
    """The invariant restriction has constant multiplicity k!/#gamma on the free spectrum.

    The free spectrum is carried by tuples with pairwise distinct indices,
    where the permutation action on tuples is free: the exact finite analogue
    of the generic fiber.  Repeated-index eigenvalues form the degenerate
    part, a vanishing fraction of the spectrum as the dimension grows; they
    are counted and reported but carry no constancy claim.
    """
    rep = Report()
    if len(set(V.turns)) != V.dim or not _power_hypothesis_ok(V, k):
        rep.add("hypothesis: simple symmetric power", k, False, "HypothesisFail")
        return rep
    rep.add("hypothesis: simple symmetric power", k, True)
    rest = invariant_restriction(V, k, gamma)
    mf = multiplicity_function(rest)
    expected = math.factorial(k) // gamma.order
    free = {}
    degenerate = {}
    content_of_turn: dict[Fraction, tuple[int, ...]] = {}
    for turn, content in zip(rest.eigen_turns, rest.contents):
        content_of_turn[turn] = content
    for turn, mult in mf.clusters.items():
        if len(set(content_of_turn[turn])) == k:
            free[turn] = mult
        else:
            degenerate[turn] = mult
    ok = set(free.values()) == {expected}
    rep.add(f"free spectrum constant multiplicity {expected}", k, ok,
            f"multiplicities seen: {sorted(set(free.values()))}")
    rep.add("free spectrum nonempty", k, bool(free),
            f"free dim {sum(free.values())}, degenerate dim {sum(degenerate.values())}")
    if gamma.order == math.factorial(k):
        rep.add("full spectrum constant (symmetric case)", k, mf.is_constant(expected))
    return rep


def float_cluster_check(V: FiniteUnitary, k: int, gamma: PermGroup) -> Report:
    """Floating cross-check of the free-spectrum multiplicities via clustering."""
    rep = Report()
    rest = invariant_restriction(V, k, gamma)
    eigs = np.exp(2j * np.pi * np.array([float(t) for t in rest.eigen_turns]))
    clusters = _cluster(eigs, _CLUSTER_TOL)
    stable = len(clusters) == len(_cluster(eigs, _CLUSTER_TOL / 2))
    rep.add("cluster stability under tolerance halving", k, stable)
    exact = multiplicity_function(rest)
    rep.add("cluster count matches exact count", k, len(clusters) == len(exact.clusters))
    return rep


def product_power_multiplicity_check(V: FiniteUnitary, k: int) -> Report:
    """The (k-1)-fold symmetric power tensored with V has constant multiplicity k.

    Also verifies, entry by entry, that this operator coincides with the
    restriction of the k-fold tensor power to tensors invariant under the
    permutations fixing the last slot, through the canonical basis bijection.
    """
    rep = Report()
    if k < 1:
        raise ValueError("power must be positive")
    if k == 1:
        mf = multiplicity_function(V)
        rep.add("constant multiplicity 1", k, mf.is_constant(1))
        return rep
    if not _power_hypothesis_ok(V, k):
        rep.add("hypothesis: simple symmetric power", k, False, "HypothesisFail")
        return rep
    rep.add("hypothesis: simple symmetric power", k, True)
    d = V.dim
    sym = symmetric_power(V, k - 1)
    # product basis: (multiset of size k-1) x index, eigen-turn additive
    product_entries = {}
    for rep_tuple, turn in zip(sym.orbit_reps, sym.eigen_turns):
        for j in range(d):
            product_entries[(tuple(sorted(rep_tuple)), j)] = (turn + V.turns[j]) % 1

    # restriction to permutations of the first k-1 slots
    gens = []
    if k - 1 >= 2:
        gens.append(tuple([1, 0] + list(range(2, k))))
    if k - 1 >= 3:
        gens.append(tuple(list(range(1, k - 1)) + [0, k - 1]))
    gamma = PermGroup(k, gens)
    rest = invariant_restriction(V, k, gamma)
    bijection_ok = len(product_entries) == rest.dim
    matched = 0
    for rep_tuple, turn in zip(rest.orbit_reps, rest.eigen_turns):
        key = (tuple(sorted(rep_tuple[:-1])), rep_tuple[-1])
        if key in product_entries and product_entries[key] == turn:
            matched += 1
    rep.add("restriction identity: basis bijection", k, bijection_ok,
            f"{len(product_entries)} product vs {rest.dim} restricted")
    rep.add("restriction identity: diagonal entries equal", k, matched == rest.dim,
            f"{matched}/{rest.dim} matched")

    counts = {}
    content = {}
    for (ms, j), t in product_entries.items():
        counts[t] = counts.get(t, 0) + 1
        content[t] = tuple(sorted(ms + (j,)))
    free_vals = {c for t, c in counts.items() if len(set(content[t])) == k}
    rep.add(f"free spectrum constant multiplicity {k}", k, free_vals == {k},
            f"multiplicities seen: {sorted(free_vals)}")
    return rep


# -- symmetric polynomial generation and extraction -------------------------------


def _elementary_symmetric(k: int, i: int) -> dict[tuple[int, ...], Fraction]:
    """e_i in k variables as a dict over exponent vectors."""
    out = {}
    for comb in itertools.combinations(range(k), i):
        mono = [0] * k
        for j in comb:
            mono[j] = 1
        out[tuple(mono)] = Fraction(1)
    return out


def _poly_mul(a, b, cap):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            if sum(m) > cap:
                continue
            out[m] = out.get(m, Fraction(0)) + ca * cb
    return {m: c for m, c in out.items() if c}


def _partitions_at_most(total_max: int, parts: int):
    """All partitions (weakly decreasing tuples) with at most `parts` parts, size <= total_max."""
    out = [()]
    def rec(prefix, remaining, max_part):
        for p in range(min(max_part, remaining), 0, -1):
            nxt = prefix + (p,)
            out.append(nxt)
            if len(nxt) < parts:
                rec(nxt, remaining - p, p)
    rec((), total_max, total_max)
    return [p for p in out if sum(p) <= total_max and len(p) <= parts]


def symmetric_generation_check(k: int, degree_cap: int) -> Report:
    """Products of the elementary symmetric polynomials span all symmetric ones.

    Verified by exact rational rank computation against the partition count
    up to the degree cap.
    """
    rep = Report()
    if k > 4 or degree_cap > 6:
        raise ValueError("desk-scale parameters only: k <= 4, degree cap <= 6")
    es = {i: _elementary_symmetric(k, i) for i in range(k + 1)}
    # all monomials in e_1..e_k of weighted degree <= cap
    products = []
    for exps in itertools.product(*(range(degree_cap // i + 1) for i in range(1, k + 1))):
        if sum(i * e for i, e in zip(range(1, k + 1), exps)) > degree_cap:
            continue
        poly = {(0,) * k: Fraction(1)}
        for i, e in zip(range(1, k + 1), exps):
            for _ in range(e):
                poly = _poly_mul(poly, es[i], degree_cap)
        products.append(poly)
    monomials = sorted({m for p in products for m in p})
    index = {m: i for i, m in enumerate(monomials)}
    rows = []
    for p in products:
        row = [Fraction(0)] * len(monomials)
        for m, c in p.items():
            row[index[m]] = c
        rows.append(row)
    rank = _rational_rank(rows)
    target = len(_partitions_at_most(degree_cap, k))
    rep.add("span dimension equals partition count", k, rank == target,
            f"rank {rank} vs partitions {target}")
    # every product must be a symmetric polynomial: coefficients constant on orbits
    sym_ok = all(
        p.get(tuple(sorted(m, reverse=True)), Fraction(0)) == c
        for p in products for m, c in p.items()
    )
    rep.add("products are symmetric", k, sym_ok)
    return rep


def _rational_rank(rows) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    cols = len(rows[0]) if rows else 0
    pivot_row = 0
    for col in range(cols):
        sel = None
        for r in range(pivot_row, len(rows)):
            if rows[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
        pv = rows[pivot_row][col]
        for r in range(pivot_row + 1, len(rows)):
            if rows[r][col] != 0:
                factor = rows[r][col] / pv
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[pivot_row])]
        pivot_row += 1
        rank += 1
    return rank


def ratios_from_identity_mix(m: int) -> list[Fraction]:
    """The identity-to-adjoint weight ratios 1/k for mix ratios k = 1..m."""
    return [Fraction(1, k) for k in range(1, m + 1)]


def vandermonde_extraction_check(ratios) -> Report:
    """The power-sum system in the given distinct ratios is exactly invertible.

    Builds the (k+1) x (k+1) system whose rows are the powers of each ratio,
    closed by the trivial row pinning the top coefficient, inverts it over
    the rationals, and confirms the inverse recovers every coefficient vector.
    """
    rep = Report()
    ratios = [Fraction(r) for r in ratios]
    k = len(ratios)
    if len(set(ratios)) != k:
        raise ValueError("ratios must be pairwise distinct")
    rows = [[r**l for l in range(k + 1)] for r in ratios]
    rows.append([Fraction(0)] * k + [Fraction(1)])
    det = _rational_det([row[:] for row in rows])
    rep.add("system determinant nonzero", k, det != 0, f"det = {det}")
    if det == 0:
        return rep
    inv = _rational_inverse([row[:] for row in rows])
    n = k + 1
    prod_ok = all(
        sum(inv[i][t] * rows[t][j] for t in range(n)) == (1 if i == j else 0)
        for i in range(n) for j in range(n)
    )
    rep.add("inverse recovers coefficients exactly", k, prod_ok)
    return rep


def _rational_det(rows) -> Fraction:
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        sel = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if sel is None:
            return Fraction(0)
        if sel != col:
            rows[col], rows[sel] = rows[sel], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                factor = rows[r][col] / rows[col][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return det


def _rational_inverse(rows):
    n = len(rows)
    aug = [row + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
           for i, row in enumerate(rows)]
    for col in range(n):
        sel = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[sel] = aug[sel], aug[col]
        pv = aug[col][col]
        aug[col] = [a / pv for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# -- cyclic-vector spectrum test ----------------------------------------------------


def cyclic_vector_spectrum_test(U, trials: int = 8, seed: int = 0) -> Report:
    """Maximal Krylov dimension over sampled vectors, against eigenvalue distinctness.

    For a unitary with all eigenvalues distinct a dense vector is cyclic and
    the span of U^j v over |j| <= d has full dimension; repeated eigenvalues
    cap the dimension strictly below d.  Cross-checked against the clustered
    multiplicity function.
    """
    rep = Report()
    m = U.to_matrix() if isinstance(U, FiniteUnitary) else np.asarray(U, dtype=complex)
    d = m.shape[0]
    if d > 200:
        raise ValueError("cyclic test supported up to dimension 200")
    rng = np.random.default_rng(seed)
    uinv = m.conj().T
    best = 0
    for _ in range(trials):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        vecs = [v]
        fwd = bwd = v
        for _ in range(d):
            fwd = m @ fwd
            bwd = uinv @ bwd
            vecs.extend([fwd, bwd])
        rank = np.linalg.matrix_rank(np.array(vecs).T, tol=1e-8)
        best = max(best, rank)
    mf = multiplicity_function(m)
    distinct = len(mf.clusters)
    simple = distinct == d
    rep.add("cyclic dimension", d, True, f"max Krylov dimension {best} of {d}")
    rep.add("matches eigenvalue distinctness", d, (best == d) == simple,
            f"Krylov {best}, distinct eigenvalues {distinct}")
    return rep
