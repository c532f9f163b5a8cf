"""Eisenstein series G_k(chi1, chi2; m tau) and bases of the Eisenstein subspace.

a(n) = sum_{d | n} chi1(n/d) chi2(d) d^(k-1); the constant term is -B_{k,chi2}/(2k)
when chi1 is trivial and 0 otherwise (weight 1 adds the symmetric term in chi1).
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from sympy import Rational, bernoulli, symbols

from .. import config
from .arith import divisors, lcm
from .characters import DirichletCharacter, primitive_characters
from .cyclotomic import CyclotomicElement, as_cyclotomic, canonical_order, subcyclotomic_trace
from .errors import ParityError
from .qseries import (
    ONE,
    ZERO,
    FormExpr,
    Linear,
    char_coef,
    char_token,
    parse_char,
    register,
    simplify,
)

_X = symbols("x")
_BERNOULLI: Dict[Tuple[int, int, int], object] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[EISENSTEIN] {msg}", file=sys.stderr)


def generalized_bernoulli(k: int, chi: DirichletCharacter):
    """B_{k,chi} = f^(k-1) sum_{a=1}^{f} chi(a) B_k(a/f) for chi primitive of modulus f."""
    chi = chi.primitive()
    key = (k, chi.modulus, chi.label)
    hit = _BERNOULLI.get(key)
    if hit is not None:
        return hit
    f = chi.modulus
    poly = bernoulli(k, _X)
    acc = ZERO
    for a in range(1, f + 1):
        c = char_coef(chi, a)
        if c:
            v = poly.subs(_X, Rational(a, f))
            acc = acc + c * Fraction(int(v.p), int(v.q))
    out = simplify(acc * Fraction(f) ** (k - 1))
    _BERNOULLI[key] = out
    return out


def check_parity(k: int, chi: DirichletCharacter) -> None:
    if chi.parity != (-1) ** k:
        raise ParityError(f"chi(-1) = {chi.parity} but weight {k} needs {(-1) ** k}")


@register("eis")
class EisensteinSeries(FormExpr):
    """G_k(chi1, chi2; m tau) with chi1, chi2 primitive."""

    sparse = True

    def __init__(self, k: int, chi1: DirichletCharacter, chi2: DirichletCharacter, m: int = 1):
        k, m = int(k), int(m)
        chi1, chi2 = chi1.primitive(), chi2.primitive()
        if chi1.parity * chi2.parity != (-1) ** k:
            raise ParityError(f"chi1(-1) chi2(-1) must be {(-1) ** k} in weight {k}")
        if k < 1 or m < 1:
            raise ValueError("need k >= 1 and m >= 1")
        N = chi1.modulus * chi2.modulus * m
        super().__init__(N, k, chi1.induce(N) * chi2.induce(N))
        self.k, self.chi1, self.chi2, self.m = k, chi1, chi2, m
        self.quasi = k == 2 and chi1.modulus == 1 and chi2.modulus == 1
        self.constant = self._constant_term()

    def _constant_term(self):
        k, chi1, chi2 = self.k, self.chi1, self.chi2
        if k == 1:
            acc = ZERO
            if chi1.modulus == 1:
                acc = acc - generalized_bernoulli(1, chi2) / 2
            if chi2.modulus == 1:
                acc = acc - generalized_bernoulli(1, chi1) / 2
            return simplify(acc)
        if chi1.modulus == 1:
            return simplify(-generalized_bernoulli(k, chi2) / (2 * k))
        return ZERO

    def _values(self, indices):
        out = []
        k, m = self.k, self.m
        for i in indices:
            if i % m:
                out.append(ZERO)
                continue
            n = i // m
            if n == 0:
                out.append(self.constant)
                continue
            acc = ZERO
            for d in divisors(n):
                a = char_coef(self.chi1, n // d)
                if not a:
                    continue
                b = char_coef(self.chi2, d)
                if b:
                    acc = acc + a * b * d ** (k - 1)
            out.append(acc)
        return out

    def hecke_eigenvalue(self, p: int):
        """chi1(p) + chi2(p) p^(k-1), the T(p) eigenvalue for p prime to the level."""
        return simplify(char_coef(self.chi1, p) + char_coef(self.chi2, p) * p ** (self.k - 1))

    def field_order(self):
        return canonical_order(lcm(self.chi1.order, self.chi2.order))

    def prefix_args(self):
        return [str(self.k), char_token(self.chi1), char_token(self.chi2), str(self.m)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(int(args[0]), parse_char(args[1]), parse_char(args[2]), int(args[3]))


@dataclass(frozen=True)
class EisKey:
    k: int
    chi1: DirichletCharacter
    chi2: DirichletCharacter
    m: int

    @property
    def weight_two_trivial(self) -> bool:
        return self.k == 2 and self.chi1.modulus == 1 and self.chi2.modulus == 1

    def form(self) -> FormExpr:
        if self.weight_two_trivial:
            one = DirichletCharacter.trivial(1)
            g = Linear([EisensteinSeries(2, one, one, self.m), EisensteinSeries(2, one, one, 1)],
                       [ONE, Fraction(-1, self.m)])
            g.quasi = False
            return g
        return EisensteinSeries(self.k, self.chi1, self.chi2, self.m)

    def to_json(self) -> Dict:
        return {"k": self.k, "chi1": repr(self.chi1), "chi2": repr(self.chi2), "m": self.m}


def gk_expansion(k: int, chi1: DirichletCharacter, chi2: DirichletCharacter, L: int) -> List:
    if k == 2 and chi1.conductor == 1 and chi2.conductor == 1:
        _log("raw G_2(1, 1) is only quasi-modular")
    return EisensteinSeries(k, chi1, chi2).coefs(L)


def weisinger_basis(N: int, k: int, chi: DirichletCharacter) -> List[EisKey]:
    """All (chi1, chi2, m) with (chi1 chi2)_f = chi_f, N1 N2 m | N; chi1 even in weight 1."""
    check_parity(k, chi)
    chi = chi if chi.modulus == N else chi.induce(N)
    keys: List[EisKey] = []
    for N1 in divisors(N):
        for chi1 in primitive_characters(N1):
            if k == 1 and not chi1.is_even():
                continue
            chi2 = (chi * chi1.conj().induce(N)).primitive()
            N2 = chi2.modulus
            if N % (N1 * N2):
                continue
            for m in divisors(N // (N1 * N2)):
                if k == 2 and N1 == 1 and N2 == 1 and m == 1:
                    continue
                keys.append(EisKey(k, chi1, chi2, m))
    _log(f"N={N} k={k} {chi}: {len(keys)} Eisenstein series")
    return keys


def eisenstein_dim(N: int, k: int, chi: DirichletCharacter) -> int:
    if chi.parity != (-1) ** k:
        return 0
    return len(weisinger_basis(N, k, chi))


@register("eistr")
class TracedEisenstein(FormExpr):
    """Tr_{Q(zeta_L)/Q(zeta_o)}(zeta_L^j G) for an Eisenstein series G."""

    sparse = True

    def __init__(self, g: FormExpr, j: int, o: int, L: int):
        super().__init__(g.level, g.weight, g.char, (g,))
        self.j, self.o, self.L = int(j), canonical_order(o), canonical_order(L)
        self._alpha = CyclotomicElement.zeta(self.L, self.j)

    def _values(self, indices):
        vals = self.children[0].values(indices)
        return [subcyclotomic_trace(self._alpha * as_cyclotomic(v), self.o, ambient=self.L) if v else ZERO
                for v in vals]

    def field_order(self):
        return self.o

    def prefix_args(self):
        return [self.children[0].prefix(), str(self.j), str(self.o), str(self.L)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), int(args[1]), int(args[2]), int(args[3]))


def _galois_units(L: int, o: int) -> List[int]:
    return [j for j in range(1, L + 1) if math.gcd(j, L) == 1 and (j - 1) % o == 0]


def weisinger_basis_rational(N: int, k: int, chi: DirichletCharacter) -> List[FormExpr]:
    """A basis of the Eisenstein subspace with coefficients in Q(chi)."""
    keys = weisinger_basis(N, k, chi)
    o = chi.order
    seen = set()
    out: List[FormExpr] = []
    for key in keys:
        if key in seen:
            continue
        L = lcm(o, key.chi1.order, key.chi2.order)
        units = _galois_units(L, o)
        orbit = {EisKey(k, key.chi1.power(j), key.chi2.power(j), key.m) for j in units}
        seen.update(orbit)
        g = key.form()
        if canonical_order(L) == canonical_order(o):
            out.append(g)
            continue
        d = len(orbit)
        for j in range(d):
            out.append(TracedEisenstein(g, j, o, L))
    _log(f"rational Eisenstein basis: {len(out)} forms over Q(zeta_{o})")
    return out
