"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Values are stored as polynomials in zeta_n reduced modulo the n-th
cyclotomic polynomial, so equality is literal coefficient equality.
Rational coefficients throughout; nothing here touches floats except
the rendering helpers.  The module also provides certified rational
enclosures (directed-rounding Taylor series against hard-coded pi
bounds) so moduli of cyclotomic numbers can be bounded above/below by
exact fractions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

_ZERO = Fraction(0)
_ONE = Fraction(1)

# pi truncated / rounded up at 59 decimal places; certified enclosure.
PI_LOWER = Fraction(314159265358979323846264338327950288419716939937510582097494, 10**59)
PI_UPPER = PI_LOWER + Fraction(1, 10**59)


def _poly_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_div_exact(num: list[int], den: list[int]) -> list[int]:
    """Quotient of integer polynomials known to divide exactly (den monic up to sign)."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        if c % lead != 0:
            raise ArithmeticError("inexact polynomial division")
        q[i] = c // lead
        for j, d in enumerate(den):
            num[i + j] -= q[i] * d
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (constant term first) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return (-1, 1)
    poly = [0] * (n + 1)
    poly[0], poly[n] = -1, 1  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_div_exact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _phi_degree(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


def _reduce_mod_phi(coeffs: list[Fraction], n: int) -> tuple[Fraction, ...]:
    """Reduce a polynomial in zeta_n (exponent-indexed list) modulo Phi_n."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    work = list(coeffs)
    for i in range(len(work) - 1, deg - 1, -1):
        c = work[i]
        if c:
            for j in range(deg + 1):
                work[i - deg + j] -= c * phi[j]
    work = work[:deg]
    while len(work) < deg:
        work.append(_ZERO)
    return tuple(work)


class Cyclo:
    """An element of Q(zeta_n), canonical modulo the n-th cyclotomic polynomial."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        self.order = order
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != _phi_degree(order):
            raise ValueError("coefficient vector has wrong length")
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero(order: int = 1) -> "Cyclo":
        return Cyclo(order, [_ZERO] * _phi_degree(order))

    @staticmethod
    def from_fraction(q, order: int = 1) -> "Cyclo":
        v = [_ZERO] * _phi_degree(order)
        v[0] = Fraction(q)
        return Cyclo(order, v)

    @staticmethod
    def root_of_unity(order: int, k: int = 1) -> "Cyclo":
        v = [_ZERO] * order
        v[k % order] = _ONE
        return Cyclo(order, _reduce_mod_phi(v, order))

    @staticmethod
    def from_exponent_counts(order: int, counts) -> "Cyclo":
        """Sum of counts[e] * zeta_order^e; counts is a mapping exponent -> rational."""
        v = [_ZERO] * order
        for e, c in counts.items():
            v[e % order] += Fraction(c)
        return Cyclo(order, _reduce_mod_phi(v, order))

    # -- order promotion ---------------------------------------------

    def promoted(self, order: int) -> "Cyclo":
        if order == self.order:
            return self
        if order % self.order != 0:
            raise ValueError("can only promote to a multiple order")
        scale = order // self.order
        v = [_ZERO] * order
        for j, c in enumerate(self.coeffs):
            if c:
                v[j * scale] += c
        return Cyclo(order, _reduce_mod_phi(v, order))

    @staticmethod
    def _common(a: "Cyclo", b: "Cyclo") -> tuple["Cyclo", "Cyclo"]:
        if a.order == b.order:
            return a, b
        m = math.lcm(a.order, b.order)
        return a.promoted(m), b.promoted(m)

    # -- ring operations ----------------------------------------------

    def __add__(self, other) -> "Cyclo":
        other = _as_cyclo(other)
        a, b = Cyclo._common(self, other)
        return Cyclo(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "Cyclo":
        return Cyclo(self.order, [-c for c in self.coeffs])

    def __sub__(self, other) -> "Cyclo":
        return self + (-_as_cyclo(other))

    def __rsub__(self, other) -> "Cyclo":
        return _as_cyclo(other) - self

    def __mul__(self, other) -> "Cyclo":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return Cyclo(self.order, [c * q for c in self.coeffs])
        a, b = Cyclo._common(self, _as_cyclo(other))
        n = a.order
        conv = [_ZERO] * (2 * len(a.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        conv[i + j] += x * y
        return Cyclo(n, _reduce_mod_phi(conv, n))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Cyclo":
        q = Fraction(other)
        return Cyclo(self.order, [c / q for c in self.coeffs])

    def conjugate(self) -> "Cyclo":
        n = self.order
        v = [_ZERO] * n
        for j, c in enumerate(self.coeffs):
            if c:
                v[(-j) % n] += c
        return Cyclo(n, _reduce_mod_phi(v, n))

    def abs_squared(self) -> "Cyclo":
        return self * self.conjugate()

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is not rational")
        return self.coeffs[0]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Cyclo.from_fraction(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = Cyclo._common(self, other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        # hash through a canonical promotion-free invariant: rational values
        # hash like their Fraction, everything else by coefficients at own order
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    # -- rendering and enclosures ---------------------------------------

    def to_complex(self) -> complex:
        n = self.order
        return sum(
            complex(c) * complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n))
            for j, c in enumerate(self.coeffs)
        )

    def real_bounds(self, bits: int = 96) -> tuple[Fraction, Fraction]:
        """Certified rational enclosure of the value, which must be real (self-conjugate)."""
        if self != self.conjugate():
            raise ValueError("real_bounds requires a self-conjugate value")
        lo = hi = _ZERO
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            clo, chi = _cos_two_pi_enclosure(j, self.order, bits)
            if c > 0:
                lo += c * clo
                hi += c * chi
            else:
                lo += c * chi
                hi += c * clo
        return lo, hi

    def __repr__(self):
        return f"Cyclo(order={self.order}, {self.coeffs})"


def _as_cyclo(x) -> Cyclo:
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclo.from_fraction(x)
    raise TypeError(f"cannot coerce {type(x)} to Cyclo")


def zeta(order: int, k: int = 1) -> Cyclo:
    return Cyclo.root_of_unity(order, k)


# -- certified enclosures ---------------------------------------------


def _round_down(q: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.floor(q * scale), scale)


def _round_up(q: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.ceil(q * scale), scale)


def _cos_taylor_enclosure(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of cos(x) for |x| <= 4, by alternating Taylor series."""
    if abs(x) > 4:
        raise ValueError("argument out of the reduced range")
    x2 = x * x
    term = _ONE
    total = _ONE
    i = 0
    tol = Fraction(1, 1 << (bits + 4))
    while True:
        i += 1
        term = term * x2 / ((2 * i - 1) * (2 * i))
        total += term if i % 2 == 0 else -term
        # once the ratio of consecutive terms is < 1/2 the tail is under 2*next term
        if term < tol and x2 < (2 * i + 1) * (2 * i + 2) // 2:
            rem = 2 * term
            return total - rem, total + rem
        # keep coefficient bit-size bounded
        term = _round_up(term, 4 * bits)
        total = _round_down(total, 4 * bits) if total > 0 else _round_up(-(-total), 4 * bits)
        if i > 300:
            raise ArithmeticError("cosine series failed to converge")


@lru_cache(maxsize=None)
def _cos_two_pi_enclosure(j: int, n: int, bits: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of cos(2*pi*j/n)."""
    j %= n
    # fold to an angle in [0, pi] using cos(2*pi - t) = cos(t)
    if 2 * j > n:
        j = n - j
    sign = 1
    if 4 * j > n:
        # angle in (pi/2, pi]: cos(t) = -cos(pi - t), pi - t = pi*(1 - 2j/n)
        sign = -1
        frac = 1 - 2 * Fraction(j, n)  # in [0, 1/2)
        xlo = PI_LOWER * frac
        xhi = PI_UPPER * frac
    else:
        xlo = 2 * Fraction(j, n) * PI_LOWER
        xhi = 2 * Fraction(j, n) * PI_UPPER
    xlo = _round_down(xlo, 2 * bits)
    xhi = _round_up(xhi, 2 * bits)
    width = xhi - xlo
    lo, hi = _cos_taylor_enclosure(xlo, bits)
    # |cos'| <= 1, so widen by the interval width
    lo, hi = lo - width, hi + width
    if sign < 0:
        lo, hi = -hi, -lo
    return _round_down(lo, 2 * bits), _round_up(hi, 2 * bits)


def sqrt_lower(q: Fraction, bits: int = 96) -> Fraction:
    """Certified rational lower bound for sqrt(q), q >= 0."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative argument")
    scale = 1 << bits
    s = math.isqrt(q.numerator * q.denominator * scale * scale)
    return Fraction(s, q.denominator * scale)


def sqrt_upper(q: Fraction, bits: int = 96) -> Fraction:
    """Certified rational upper bound for sqrt(q), q >= 0."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative argument")
    scale = 1 << bits
    nd = q.numerator * q.denominator * scale * scale
    s = math.isqrt(nd)
    if s * s < nd:
        s += 1
    return Fraction(s, q.denominator * scale)


def abs_upper(z: Cyclo, bits: int = 96) -> Fraction:
    """Certified rational upper bound for |z|."""
    s = z.abs_squared()
    if s.is_rational():
        return sqrt_upper(s.as_fraction(), bits)
    _, hi = s.real_bounds(bits)
    return sqrt_upper(max(hi, _ZERO), bits)


def abs_lower(z: Cyclo, bits: int = 96) -> Fraction:
    """Certified rational lower bound for |z|."""
    s = z.abs_squared()
    if s.is_rational():
        return sqrt_lower(s.as_fraction(), bits)
    lo, _ = s.real_bounds(bits)
    return sqrt_lower(max(lo, _ZERO), bits)
