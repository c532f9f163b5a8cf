"""Relative extensions K[y]/(P) of a cyclotomic field K = Q(t), t = zeta_o.

Eigenvalue fields of newforms live here. Elements are coefficient vectors in y of
length deg P with entries in K (Fraction or CyclotomicElement).
"""
from __future__ import annotations

import sys
import threading
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from sympy import Poly, QQ, Symbol, resultant

from .. import config
from .cyclotomic import CyclotomicElement, _cyclotomic_poly, canonical_order, cyclotomic_modulus, format_poly
from .linalg import poly_divmod, poly_mul, poly_monic, poly_to_sympy, poly_trim, solve

_X = Symbol("x")
_T = Symbol("t")


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[RELFIELD] {msg}", file=sys.stderr)


def _simplify(c):
    if isinstance(c, CyclotomicElement) and c.is_rational():
        return c.coeffs[0]
    if isinstance(c, int):
        return Fraction(c)
    return c


class RelativeField:
    """K[y]/(P) with K = Q(zeta_o) and P monic irreducible over K."""

    def __init__(self, base_order: int, poly: Sequence):
        self.base_order = canonical_order(base_order)
        p = poly_monic([_simplify(c) for c in poly])
        if len(p) < 2:
            raise ValueError("defining polynomial must have degree >= 1")
        self.poly = [_simplify(c) for c in p]
        self.degree = len(p) - 1
        self._absolute: Optional[Tuple[List[Fraction], int]] = None
        self._lock = threading.Lock()

    def element(self, coeffs: Sequence) -> "RelativeElement":
        return RelativeElement(self, coeffs)

    def gen(self) -> "RelativeElement":
        if self.degree == 1:
            return self.element([-self.poly[0]])
        return self.element([Fraction(0), Fraction(1)])

    def reduce(self, p: Sequence) -> List:
        p = poly_trim(p)
        if len(p) > self.degree:
            p = poly_divmod(p, self.poly)[1]
        out = [_simplify(c) for c in p] + [Fraction(0)] * (self.degree - len(p))
        return out

    # -- absolute model ---------------------------------------------------------------------
    def absolute_model(self) -> Tuple[List[Fraction], int]:
        """(Q-polynomial of y + m t, m) for the smallest m giving a squarefree norm."""
        with self._lock:
            if self._absolute is not None:
                return self._absolute
            if self.base_order == 1:
                self._absolute = ([Fraction(c) for c in self.poly], 0)
                return self._absolute
            phi_t = _cyclotomic_poly(self.base_order).as_expr()
            base = poly_to_sympy(self.poly)
            for m in range(0, 16):
                norm = Poly(resultant(phi_t, base.subs(_X, _X - m * _T), _T), _X, domain=QQ)
                if Poly(norm.gcd(norm.diff(_X)), _X).degree() > 0:
                    continue
                coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(norm.all_coeffs())]
                _log(f"absolute model with shift {m}: degree {len(coeffs) - 1}")
                self._absolute = (poly_monic(coeffs), m)
                return self._absolute
        raise ValueError("no primitive element y + m t with m < 16")

    @property
    def absolute_degree(self) -> int:
        return self.degree * (len(CyclotomicElement.zeta(self.base_order).coeffs) if self.base_order > 1 else 1)

    # -- embeddings ----------------------------------------------------------------------------
    def roots(self, t_value=None) -> List:
        """Complex roots of P with t fixed at exp(2 pi i / o), sorted by real part."""
        if t_value is None:
            t_value = mpmath.expjpi(mpmath.mpf(2) / self.base_order)
        coeffs = [c.embed(t_value) if isinstance(c, CyclotomicElement) else mpmath.mpf(c.numerator) / c.denominator
                  for c in self.poly]
        if self.degree == 1:
            return [-coeffs[0]]
        roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=2 * mpmath.mp.prec)
        return sorted((mpmath.mpc(r) for r in roots), key=lambda z: (float(z.real), float(z.imag)))

    # -- display ---------------------------------------------------------------------------------
    def poly_text(self, var: str = "y") -> str:
        return format_poly(self.poly, var)

    def text(self) -> str:
        if self.base_order == 1:
            return self.poly_text()
        return f"{self.poly_text()} over {cyclotomic_modulus(self.base_order)}"

    def to_json(self) -> Dict:
        absolute, shift = self.absolute_model()
        return {
            "base": "Q" if self.base_order == 1 else cyclotomic_modulus(self.base_order),
            "relative": self.poly_text(),
            "absolute": format_poly(absolute, "y"),
            "absolute_shift": shift,
        }

    def __eq__(self, other):
        if not isinstance(other, RelativeField):
            return NotImplemented
        return self.base_order == other.base_order and self.poly == other.poly

    def __hash__(self):
        return hash((self.base_order, tuple(str(c) for c in self.poly)))

    def __repr__(self):
        return f"RelativeField({self.text()})"


class RelativeElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: RelativeField, coeffs: Sequence):
        self.field = field
        self.coeffs = tuple(field.reduce(list(coeffs)))

    @property
    def base_order(self) -> int:
        return self.field.base_order

    def simplified(self):
        """The base-field value when the element does not involve y."""
        if not any(self.coeffs[1:]):
            return _simplify(self.coeffs[0])
        return self

    def _lift(self, other):
        if isinstance(other, RelativeElement):
            if other.field != self.field:
                raise ValueError("elements of different relative fields")
            return other
        if isinstance(other, (int, Fraction, CyclotomicElement)):
            return RelativeElement(self.field, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return RelativeElement(self.field, [a + b for a, b in zip(self.coeffs, other.coeffs)]).simplified()

    __radd__ = __add__

    def __neg__(self):
        return RelativeElement(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return (self + (-other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement)):
            if not other:
                return Fraction(0)
            return RelativeElement(self.field, [a * other for a in self.coeffs]).simplified()
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return RelativeElement(self.field, poly_mul(self.coeffs, other.coeffs)).simplified()

    __rmul__ = __mul__

    def _matrix(self):
        """Columns: self * y^j reduced modulo P."""
        d = self.field.degree
        cols = []
        for j in range(d):
            shifted = [Fraction(0)] * j + list(self.coeffs)
            cols.append(self.field.reduce(shifted))
        return [[cols[j][i] for j in range(d)] for i in range(d)]

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in a relative field")
        e0 = [Fraction(1)] + [Fraction(0)] * (self.field.degree - 1)
        x = solve(self._matrix(), e0)
        if x is None:
            raise ZeroDivisionError("element is not invertible (reducible defining polynomial?)")
        return RelativeElement(self.field, x)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement)):
            return self * (1 / other if not isinstance(other, int) else Fraction(1, other))
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = RelativeElement(self.field, [1])
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement)):
            return not any(self.coeffs[1:]) and self.coeffs[0] == other
        if not isinstance(other, RelativeElement):
            return NotImplemented
        return self.field == other.field and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        return hash((hash(self.field), tuple(str(c) for c in self.coeffs)))

    def embed(self, y_value, t_value=None):
        if t_value is None:
            t_value = mpmath.expjpi(mpmath.mpf(2) / self.field.base_order)
        acc = mpmath.mpc(0)
        power = mpmath.mpc(1)
        for c in self.coeffs:
            if isinstance(c, CyclotomicElement):
                acc += c.embed(t_value) * power
            elif c:
                acc += mpmath.mpf(c.numerator) / c.denominator * power
            power *= y_value
        return acc

    def __str__(self):
        return format_poly([_simplify(c) for c in self.coeffs], "y")

    def __repr__(self):
        return f"RelativeElement({self}, {self.field.text()})"

    def to_json(self):
        return {"text": str(self), "field": self.field.text()}
