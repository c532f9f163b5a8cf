"""Exact arithmetic in cyclotomic fields Q(zeta_n).

An element is a rational vector of length phi(n) on the power basis of zeta_n
modulo the n-th cyclotomic polynomial. Orders n = 2 (mod 4) are stored as n/2
(zeta_{2m} = -zeta_m^{(m+1)/2} for odd m), so every field has one canonical
order. The complex embedding is always zeta_n -> exp(2 pi i / n).
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import mpmath
from sympy import Poly, QQ, Symbol, cyclotomic_poly

from .arith import divisors, euler_phi, factor, kronecker, lcm
from .linalg import solve_left

Rational = Union[int, Fraction]

_T = Symbol("t")
_TABLE_LOCK = threading.Lock()
# order -> (phi, reduced power table: zeta^e as sparse ((index, coeff), ...) for e < order)
_TABLES: Dict[int, Tuple[int, List[Tuple[Tuple[int, int], ...]]]] = {}
_PHI_POLYS: Dict[int, Poly] = {}
_LIFT_MATRICES: Dict[Tuple[int, int], List[List[Fraction]]] = {}


def canonical_order(n: int) -> int:
    n = int(n)
    if n <= 0:
        raise ValueError(f"cyclotomic order must be positive: {n}")
    return n // 2 if n % 4 == 2 else n


def _cyclotomic_poly(n: int) -> Poly:
    hit = _PHI_POLYS.get(n)
    if hit is None:
        hit = Poly(cyclotomic_poly(n, _T), _T, domain=QQ)
        _PHI_POLYS[n] = hit
    return hit


def _table(n: int):
    hit = _TABLES.get(n)
    if hit is not None:
        return hit
    phi = euler_phi(n)
    # monic: t^phi = -sum_{i<phi} c_i t^i
    low = [int(c) for c in reversed(_cyclotomic_poly(n).all_coeffs())][:phi]
    powers: List[List[int]] = []
    vec = [0] * phi
    vec[0] = 1
    for e in range(n):
        powers.append(list(vec))
        top = vec[-1]
        vec = [0] + vec[:-1]
        if top:
            for i in range(phi):
                vec[i] -= top * low[i]
    sparse = [tuple((i, c) for i, c in enumerate(v) if c) for v in powers]
    with _TABLE_LOCK:
        _TABLES[n] = (phi, sparse)
    return phi, sparse


def phi_of(order: int) -> int:
    return _table(canonical_order(order))[0]


def _reduce_exponent(n: int, e: int) -> Tuple[int, int, int]:
    """zeta_n^e = sign * zeta_m^e' with m the canonical order."""
    e %= n
    if n % 4 != 2:
        return n, 1, e
    m = n // 2
    sign = -1 if e % 2 else 1
    return m, sign, (e * (m + 1) // 2) % m if m > 1 else 0


class CyclotomicElement:
    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Sequence[Rational]):
        order = int(order)
        if order % 4 == 2:
            raise ValueError("use CyclotomicElement.from_exponents for orders 2 mod 4")
        phi = _table(order)[0]
        if len(coeffs) != phi:
            raise ValueError(f"expected {phi} coefficients for order {order}, got {len(coeffs)}")
        self.order = order
        self.coeffs = tuple(c if isinstance(c, Fraction) else Fraction(c) for c in coeffs)

    # -- constructors -------------------------------------------------------------
    @classmethod
    def rational(cls, x: Rational) -> "CyclotomicElement":
        return cls(1, (Fraction(x),))

    @classmethod
    def zeta(cls, n: int, e: int = 1) -> "CyclotomicElement":
        return cls.from_exponents(n, {e % n: 1})

    @classmethod
    def from_exponents(cls, n: int, terms: Union[Dict[int, Rational], Sequence[Rational]]) -> "CyclotomicElement":
        """sum_e c_e zeta_n^e for any n (exponents taken mod n)."""
        items = terms.items() if isinstance(terms, dict) else enumerate(terms)
        m = canonical_order(n)
        phi, powers = _table(m)
        acc = [Fraction(0)] * phi
        for e, c in items:
            if not c:
                continue
            _, sign, e2 = _reduce_exponent(n, e)
            for i, v in powers[e2]:
                acc[i] += sign * v * c
        return cls(m, acc)

    # -- predicates / conversions ---------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def lift(self, m: int) -> "CyclotomicElement":
        m = canonical_order(m)
        if m == self.order:
            return self
        if m % self.order:
            raise ValueError(f"Q(zeta_{self.order}) is not contained in Q(zeta_{m})")
        step = m // self.order
        return CyclotomicElement.from_exponents(m, {i * step: c for i, c in enumerate(self.coeffs) if c})

    def descend(self, o: int) -> "CyclotomicElement":
        """Rewrite in Q(zeta_o); raises ValueError when the element is not in it."""
        o = canonical_order(o)
        if o == self.order:
            return self
        c = lcm(o, self.order)
        x = self.lift(c)
        if c == o:
            return x
        rows = _lift_matrix(o, c)
        sol = solve_left(rows, list(x.coeffs))
        if sol is None:
            raise ValueError(f"element is not in Q(zeta_{o})")
        return CyclotomicElement(o, sol)

    def minimal(self) -> "CyclotomicElement":
        """Same element written over the smallest cyclotomic field containing it."""
        if self.order == 1:
            return self
        for d in sorted(_divisor_orders(self.order)):
            if d == self.order:
                break
            if self.in_subfield(d):
                return self.descend(d)
        return self

    def in_subfield(self, o: int) -> bool:
        o = canonical_order(o)
        if self.order % o:
            return False
        n = self.order
        for j in _subgroup_generators(n, o):
            if self.galois(j) != self:
                return False
        return True

    # -- arithmetic -----------------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "CyclotomicElement":
        if isinstance(other, CyclotomicElement):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicElement(1, (Fraction(other),))
        return NotImplemented

    def _common(self, other: "CyclotomicElement"):
        if self.order == other.order:
            return self, other
        m = lcm(self.order, other.order)
        return self.lift(m), other.lift(m)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicElement(self.order, (self.coeffs[0] + other,) + self.coeffs[1:])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._common(other)
        return CyclotomicElement(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.order, [-x for x in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CyclotomicElement(self.order, [Fraction(0)] * len(self.coeffs))
            return CyclotomicElement(self.order, [x * other for x in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._common(other)
        n = a.order
        if n == 1:
            return CyclotomicElement(1, (a.coeffs[0] * b.coeffs[0],))
        phi, powers = _table(n)
        conv: Dict[int, Fraction] = {}
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    conv[i + j] = conv.get(i + j, 0) + x * y
        acc = [Fraction(0)] * phi
        for e, c in conv.items():
            if e < phi:
                acc[e] += c
            else:
                for i, v in powers[e % n]:
                    acc[i] += v * c
        return CyclotomicElement(n, acc)

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.order == 1:
            return CyclotomicElement(1, (1 / self.coeffs[0],))
        poly = Poly([QQ(c.numerator, c.denominator) for c in reversed(self.coeffs)], _T, domain=QQ)
        inv = poly.invert(_cyclotomic_poly(self.order))
        coeffs = [Fraction(int(c.numerator), int(c.denominator)) for c in reversed(inv.all_coeffs())]
        coeffs += [Fraction(0)] * (len(self.coeffs) - len(coeffs))
        return CyclotomicElement(self.order, coeffs)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicElement(self.order, [x / other for x in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        out = CyclotomicElement.rational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CyclotomicElement):
            return NotImplemented
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        x = self.minimal()
        if x.order == 1:
            return hash(x.coeffs[0])
        return hash((x.order, x.coeffs))

    def __bool__(self):
        return not self.is_zero()

    # -- Galois action and embeddings ---------------------------------------------------
    def galois(self, j: int) -> "CyclotomicElement":
        """sigma_j: zeta_n -> zeta_n^j (j a unit mod n)."""
        n = self.order
        if n == 1:
            return self
        if math.gcd(j, n) != 1:
            raise ValueError(f"{j} is not a unit modulo {n}")
        return CyclotomicElement.from_exponents(n, {(i * j) % n: c for i, c in enumerate(self.coeffs) if c})

    def conjugate(self) -> "CyclotomicElement":
        return self.galois(-1)

    def embed(self, root=None):
        """Value at zeta_n -> root (default exp(2 pi i/n)) as an mpmath number."""
        if root is None:
            root = mpmath.expjpi(mpmath.mpf(2) / self.order)
        acc = mpmath.mpc(0)
        power = mpmath.mpc(1)
        for c in self.coeffs:
            if c:
                acc += mpmath.mpf(c.numerator) / c.denominator * power
            power *= root
        return acc

    def norm(self) -> Fraction:
        out = CyclotomicElement.rational(1)
        for j in range(1, self.order + 1):
            if math.gcd(j, self.order) == 1:
                out = out * self.galois(j)
        return out.to_fraction()

    # -- display ------------------------------------------------------------------------
    def __str__(self) -> str:
        return format_poly(self.coeffs, "t")

    def __repr__(self) -> str:
        return f"CyclotomicElement({self.order}, {self})"

    def to_json(self):
        if self.is_rational():
            return str(self.coeffs[0])
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs], "text": str(self)}


def format_poly(coeffs: Sequence, var: str) -> str:
    """Descending-power display like '-1/3*t^5 - 1/3*t^2'."""
    terms: List[str] = []
    for e in range(len(coeffs) - 1, -1, -1):
        c = coeffs[e]
        if not c:
            continue
        mono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
        if isinstance(c, Fraction):
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
        else:
            sign = "+"
            body = f"({c})*{mono}" if mono else f"({c})"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def cyclotomic_modulus(order: int) -> str:
    """Minimal polynomial of t = zeta_order as text, e.g. 't^8 + 1'."""
    order = canonical_order(order)
    coeffs = [Fraction(int(c)) for c in reversed(_cyclotomic_poly(order).all_coeffs())]
    return format_poly(coeffs, "t")


def cyclotomic_polynomial(order: int) -> List[int]:
    """Coefficients of Phi_order, low degree first."""
    return [int(c) for c in reversed(_cyclotomic_poly(canonical_order(order)).all_coeffs())]


def _divisor_orders(n: int) -> Iterable[int]:
    return {canonical_order(d) for d in divisors(n)}


def _subgroup_generators(c: int, o: int) -> List[int]:
    """Units j mod c with j = 1 mod o (all of them; the groups stay small)."""
    return [j for j in range(1, c + 1) if math.gcd(j, c) == 1 and (j - 1) % o == 0]


def _lift_matrix(o: int, c: int) -> List[List[Fraction]]:
    key = (o, c)
    hit = _LIFT_MATRICES.get(key)
    if hit is None:
        phi = _table(o)[0]
        hit = [list(CyclotomicElement.from_exponents(c, {i * (c // o): 1}).coeffs) for i in range(phi)]
        _LIFT_MATRICES[key] = hit
    return hit


def trace_data(c: int, o: int) -> Tuple[int, CyclotomicElement]:
    """(degree, generator) of Q(zeta_c) over Q(zeta_o)."""
    c, o = canonical_order(c), canonical_order(o)
    if c % o:
        raise ValueError(f"Q(zeta_{o}) is not a subfield of Q(zeta_{c})")
    return phi_of(c) // phi_of(o), CyclotomicElement.zeta(c)


def subcyclotomic_trace(x: CyclotomicElement, o: int, ambient: int = None) -> CyclotomicElement:
    """Trace from Q(zeta_ambient) (default: the field of x) down to Q(zeta_o)."""
    o = canonical_order(o)
    c = canonical_order(ambient) if ambient else x.order
    c = lcm(c, x.order)
    if c % o:
        raise ValueError(f"Q(zeta_{o}) is not a subfield of Q(zeta_{c})")
    x = x.lift(c)
    acc = None
    for j in _subgroup_generators(c, o):
        term = x.galois(j)
        acc = term if acc is None else acc + term
    return acc.descend(o)


def sqrt_integer(m: int) -> CyclotomicElement:
    """A square root of the integer m inside a cyclotomic field (Gauss sums)."""
    if m == 0:
        return CyclotomicElement.rational(0)
    out = CyclotomicElement.rational(1)
    if m < 0:
        out = CyclotomicElement.zeta(4)
        m = -m
    for p, e in factor(m).items():
        out = out * (p ** (e // 2))
        if e % 2 == 0:
            continue
        if p == 2:
            root2 = CyclotomicElement.zeta(8) + CyclotomicElement.zeta(8, 7)
            out = out * root2
        else:
            gauss = CyclotomicElement.from_exponents(p, {a: kronecker(a, p) for a in range(1, p)})
            # gauss^2 = (-1)^((p-1)/2) p
            if p % 4 == 3:
                gauss = gauss * CyclotomicElement.zeta(4, 3)
            out = out * gauss
    return out


def as_cyclotomic(x) -> CyclotomicElement:
    if isinstance(x, CyclotomicElement):
        return x
    return CyclotomicElement.rational(x)
