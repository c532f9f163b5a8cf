"""Lazy modular-form expressions.

A form is a tree of FormExpr nodes. Every node answers coefs(L, d), the list
[a(0), a(d), ..., a(Ld)]; sparse nodes (linear combinations, B(d), Hecke images,
twists, trace forms) only request the child coefficients they need, dense nodes
(products, quotients, eta quotients) expand a memoized block from q^0 upwards.
Trees print as prefix expressions, e.g. "(mul (E 4) (lin 2 (pow (delta) 2) (E 24) 1 1))",
and parse_prefix() rebuilds them.
"""
from __future__ import annotations

import math
import re
import sys
import threading
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from sympy import bernoulli, binomial

from .. import config
from .arith import divisors, lcm
from .characters import DirichletCharacter, quadratic_character_mod
from .cyclotomic import CyclotomicElement, cyclotomic_modulus
from .errors import ValuationError
from .linalg import inverse

ZERO = Fraction(0)
ONE = Fraction(1)

Weight = Union[int, Fraction]


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[QSERIES] {msg}", file=sys.stderr)


def _warn(msg: str) -> None:
    print(f"[QSERIES] warning: {msg}", file=sys.stderr)


# -- coefficient helpers ----------------------------------------------------------------

def norm_weight(k) -> Weight:
    k = Fraction(k)
    if k.denominator == 1:
        return int(k)
    if k.denominator != 2:
        raise ValueError(f"weight must be integral or half-integral: {k}")
    return k


def simplify(c):
    """Rational cyclotomic values become Fractions; everything else is returned as is."""
    if isinstance(c, CyclotomicElement):
        return c.coeffs[0] if c.is_rational() else c
    if isinstance(c, int):
        return Fraction(c)
    simplified = getattr(c, "simplified", None)
    return simplified() if simplified is not None else c


def coef_order(c) -> int:
    if isinstance(c, CyclotomicElement):
        return c.order
    return getattr(c, "base_order", 1)


def char_coef(chi: DirichletCharacter, x: int):
    e = chi.exponent(x)
    if e is None:
        return ZERO
    if e == 0:
        return ONE
    if 2 * e == chi.order:
        return -ONE
    return CyclotomicElement.zeta(chi.order, e)


def series_mul(a: Sequence, b: Sequence, n: int) -> List:
    out = [ZERO] * (n + 1)
    nzb = [(j, y) for j, y in enumerate(b[: n + 1]) if y]
    for i, x in enumerate(a[: n + 1]):
        if not x:
            continue
        for j, y in nzb:
            if i + j > n:
                break
            out[i + j] = out[i + j] + x * y
    return [simplify(c) for c in out]


def series_inverse(b: Sequence, n: int) -> List:
    if not b or not b[0]:
        raise ValuationError("series with zero constant term is not invertible")
    inv0 = ONE / b[0]
    out = [simplify(inv0)]
    for m in range(1, n + 1):
        acc = ZERO
        for j in range(1, min(m, len(b) - 1) + 1):
            if b[j]:
                acc = acc + b[j] * out[m - j]
        out.append(simplify(-acc * inv0))
    return out


def series_pow(a: Sequence, e: int, n: int) -> List:
    if e < 0:
        return series_pow(series_inverse(a, n), -e, n)
    out = [ONE] + [ZERO] * n
    base = list(a[: n + 1]) + [ZERO] * max(0, n + 1 - len(a))
    while e:
        if e & 1:
            out = series_mul(out, base, n)
        e >>= 1
        if e:
            base = series_mul(base, base, n)
    return out


def _int_mul(a: List[int], b: List[int], n: int) -> List[int]:
    out = [0] * (n + 1)
    nzb = [(j, y) for j, y in enumerate(b[: n + 1]) if y]
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in nzb:
                if i + j > n:
                    break
                out[i + j] += x * y
    return out


def _int_pow(a: List[int], e: int, n: int) -> List[int]:
    out = [1] + [0] * n
    base = a
    while e:
        if e & 1:
            out = _int_mul(out, base, n)
        e >>= 1
        if e:
            base = _int_mul(base, base, n)
    return out


def euler_product(n: int) -> List[int]:
    """prod_{m >= 1} (1 - q^m) to O(q^{n+1}) by the pentagonal number theorem."""
    out = [0] * (n + 1)
    out[0] = 1
    j = 1
    while True:
        hit = False
        sign = -1 if j % 2 else 1
        for g in (j * (3 * j - 1) // 2, j * (3 * j + 1) // 2):
            if g <= n:
                out[g] += sign
                hit = True
        if not hit:
            break
        j += 1
    return out


def partition_series(n: int) -> List[int]:
    """1 / prod (1 - q^m): the partition numbers p(0..n)."""
    e = euler_product(n)
    out = [1] + [0] * n
    for m in range(1, n + 1):
        out[m] = -sum(e[j] * out[m - j] for j in range(1, m + 1) if e[j])
    return out


def coef_text(c) -> str:
    text = str(simplify(c))
    if " " in text or "*" in text or "^" in text:
        return f"({text})"
    return text


def format_qexp(coeffs: Sequence, step: int = 1, var: str = "q") -> str:
    """'a0 + a1*q + ... + O(q^n)' display of a0, a(d), a(2d), ..."""
    terms: List[str] = []
    for j, c in enumerate(coeffs):
        if not c:
            continue
        e = j * step
        text = coef_text(c)
        mono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
        if not mono:
            terms.append(text)
        elif text == "1":
            terms.append(mono)
        elif text == "-1":
            terms.append(f"-{mono}")
        else:
            terms.append(f"{text}*{mono}")
    terms.append(f"O({var}^{len(coeffs) * step})")
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def coef_json(c):
    c = simplify(c)
    if isinstance(c, Fraction):
        return str(c)
    to_json = getattr(c, "to_json", None)
    if to_json is not None:
        return to_json()
    return [str(c.real), str(c.imag)]


def combined_char(level: int, parts: Sequence[Tuple[Weight, DirichletCharacter, int]], weight) -> DirichletCharacter:
    """Character of prod f_i^e_i.

    Half-integral weight characters are taken relative to the theta multiplier, so an
    integral-weight form of weight k enters as chi * chi_{-4}^k whenever a half-integral
    factor is present, and an integral result carries chi_{-4}^weight back.
    """
    out = DirichletCharacter.trivial(level)
    if all(isinstance(k, int) for k, _, _ in parts):
        for _, chi, e in parts:
            out = out * chi.induce(level).power(e)
        return out
    chi4 = DirichletCharacter.kronecker(-4).induce(level)
    for k, chi, e in parts:
        psi = chi.induce(level)
        if isinstance(k, int):
            psi = psi * chi4.power(k)
        out = out * psi.power(e)
    if isinstance(norm_weight(weight), int):
        out = out * chi4.power(int(weight))
    return out


# -- prefix tokens --------------------------------------------------------------------------

def scalar_token(c) -> str:
    c = simplify(c)
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, CyclotomicElement):
        return f"c{c.order}:" + ",".join(str(x) for x in c.coeffs)
    raise ValueError(f"scalar {c!r} has no prefix form")


def parse_scalar(tok: str):
    if tok.startswith("c") and ":" in tok:
        order, body = tok[1:].split(":", 1)
        return simplify(CyclotomicElement(int(order), [Fraction(x) for x in body.split(",")]))
    return Fraction(tok)


def char_token(chi: DirichletCharacter) -> str:
    return f"chi:{chi.modulus}:{chi.label}"


def parse_char(tok: str) -> DirichletCharacter:
    if not tok.startswith("chi:"):
        raise ValueError(f"expected a character token, got {tok!r}")
    _, n, a = tok.split(":")
    return DirichletCharacter(int(n), int(a))


_REGISTRY: Dict[str, Callable] = {}


def register(tag: str):
    """Class decorator: the class builds itself from prefix arguments via from_prefix."""

    def wrap(cls):
        cls.tag = tag
        _REGISTRY[tag] = cls.from_prefix
        return cls

    return wrap


# -- the node base -----------------------------------------------------------------------------

class FormExpr:
    """A modular form (or quasi-modular form) given by an expression tree."""

    tag = "form"
    sparse = False

    def __init__(self, level: int, weight, char: DirichletCharacter, children: Sequence["FormExpr"] = ()):
        self.level = int(level)
        self.weight = norm_weight(weight)
        if char.modulus != self.level:
            char = char.induce(self.level)
        self.char = char
        self.children = tuple(children)
        self.quasi = any(c.quasi for c in self.children)
        self._series: List = []
        self._points: Dict[int, object] = {}
        self._lock = threading.RLock()

    # -- coefficient protocol -------------------------------------------------------------
    def coefs(self, L: int, d: int = 1) -> List:
        """[a(0), a(d), ..., a(Ld)]."""
        if L < 0 or d < 1:
            raise ValueError(f"need L >= 0 and d >= 1, got L={L}, d={d}")
        if not self.sparse and len(self._series) <= L * d:
            self.series(L * d)
        return self.values([j * d for j in range(L + 1)])

    def values(self, indices: Sequence[int]) -> List:
        if not indices:
            return []
        with self._lock:
            if self.sparse:
                known = len(self._series)
                missing = sorted({i for i in indices if i >= known and i not in self._points})
                if missing:
                    for i, v in zip(missing, self._values(missing)):
                        self._points[i] = simplify(v)
                return [self._series[i] if i < known else self._points[i] for i in indices]
            top = max(indices)
            if len(self._series) <= top:
                self.series(top)
            return [self._series[i] for i in indices]

    def series(self, n: int) -> List:
        """a(0..n)."""
        with self._lock:
            if len(self._series) <= n:
                if self.sparse:
                    self._series = self.values(list(range(n + 1)))
                    self._points = {i: v for i, v in self._points.items() if i > n}
                else:
                    target = max(n, (len(self._series) - 1) * 3 // 2)
                    self._series = [simplify(c) for c in self._expand(target)]
            return self._series[: n + 1]

    def _expand(self, n: int) -> List:
        raise NotImplementedError

    def _values(self, indices: List[int]) -> List:
        raise NotImplementedError

    def valuation(self, bound: int) -> Optional[int]:
        for i, c in enumerate(self.coefs(bound)):
            if c:
                return i
        return None

    # -- parameters -------------------------------------------------------------------------
    def field_order(self) -> int:
        return lcm(*[c.field_order() for c in self.children]) if self.children else 1

    def field_text(self) -> str:
        o = self.field_order()
        return "Q" if o in (1, 2) else f"Q(t), {cyclotomic_modulus(o)} = 0"

    def params(self) -> Dict:
        return {
            "level": self.level,
            "weight": str(self.weight),
            "character": repr(self.char),
            "field": self.field_text(),
            "modular": not self.quasi,
        }

    # -- prefix form ---------------------------------------------------------------------------
    def prefix_args(self) -> List[str]:
        return [c.prefix() for c in self.children]

    def prefix(self) -> str:
        args = self.prefix_args()
        return f"({self.tag}{' ' if args else ''}{' '.join(args)})"

    def __repr__(self) -> str:
        return self.prefix()

    @classmethod
    def from_prefix(cls, args, build):
        raise NotImplementedError


# -- leaves ------------------------------------------------------------------------------------

@register("const")
class Constant(FormExpr):
    def __init__(self, c):
        super().__init__(1, 0, DirichletCharacter.trivial(1))
        self.value = simplify(c if not isinstance(c, int) else Fraction(c))

    def _expand(self, n):
        return [self.value] + [ZERO] * n

    def field_order(self):
        return coef_order(self.value)

    def prefix_args(self):
        return [scalar_token(self.value)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(parse_scalar(args[0]))


@register("E")
class LevelOneEisenstein(FormExpr):
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n; E_2 is quasi-modular."""

    def __init__(self, k: int):
        k = int(k)
        if k < 2 or k % 2:
            raise ValueError(f"level one Eisenstein series need even k >= 2, got {k}")
        super().__init__(1, k, DirichletCharacter.trivial(1))
        self.k = k
        self.quasi = k == 2
        b = bernoulli(k)
        self._scale = Fraction(-2 * k) / Fraction(int(b.p), int(b.q))

    def _expand(self, n):
        k = self.k
        out = [ONE]
        for m in range(1, n + 1):
            out.append(self._scale * sum(d ** (k - 1) for d in divisors(m)))
        return out

    def prefix_args(self):
        return [str(self.k)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(int(args[0]))


def eta_level(pairs: Sequence[Tuple[int, int]]) -> int:
    base = lcm(*[d for d, _ in pairs])
    for j in range(1, 25):
        N = base * j
        if sum(r * (N // d) for d, r in pairs) % 24 == 0:
            return N
    return 24 * base


@register("eta")
class EtaQuotient(FormExpr):
    """prod eta(d tau)^r, expanded via the pentagonal number theorem."""

    def __init__(self, pairs: Sequence[Tuple[int, int]]):
        pairs = tuple((int(d), int(r)) for d, r in pairs if r)
        if not pairs or any(d < 1 for d, _ in pairs):
            raise ValueError("eta quotient needs positive d_i and at least one nonzero r_i")
        shift = Fraction(sum(d * r for d, r in pairs), 24)
        if shift.denominator != 1 or shift < 0:
            raise ValuationError(f"eta quotient has q-order {shift}, not a power series in q")
        N = eta_level(pairs)
        k = Fraction(sum(r for _, r in pairs), 2)
        s = 1
        for d, r in pairs:
            s *= d ** abs(r)
        super().__init__(N, k, self._character(N, k, s))
        self.pairs = pairs
        self.shift = int(shift)

    @staticmethod
    def _character(N: int, k: Fraction, s: int) -> DirichletCharacter:
        D = (-1) ** int(k) * s if k.denominator == 1 else 2 * s
        try:
            return quadratic_character_mod(N, D)
        except ValueError:
            _log(f"({D}|.) is not defined modulo {N}; using the trivial character")
            return DirichletCharacter.trivial(N)

    def _expand(self, n):
        m = n - self.shift
        if m < 0:
            return [ZERO] * (n + 1)
        acc = [1] + [0] * m
        for d, r in self.pairs:
            top = m // d
            base = euler_product(top) if r > 0 else partition_series(top)
            factor = _int_pow(base, abs(r), top)
            spread = [0] * (m + 1)
            for i, c in enumerate(factor):
                spread[i * d] = c
            acc = _int_mul(acc, spread, m)
        return [ZERO] * self.shift + [Fraction(c) for c in acc]

    def order_at_cusp(self, c: int) -> Fraction:
        """Order of vanishing at a cusp a/c (c | level), in the local parameter q^(1/width)."""
        N = self.level
        total = sum(Fraction(math.gcd(d, c) ** 2 * r, d) for d, r in self.pairs)
        return total * N / (24 * math.gcd(c, N // c) * c)

    def prefix_args(self):
        return [str(x) for pair in self.pairs for x in pair]

    @classmethod
    def from_prefix(cls, args, build):
        nums = [int(a) for a in args]
        return cls(list(zip(nums[0::2], nums[1::2])))


@register("delta")
class Delta(EtaQuotient):
    def __init__(self):
        super().__init__([(1, 24)])

    def prefix_args(self):
        return []

    @classmethod
    def from_prefix(cls, args, build):
        return cls()


@register("theta")
class ThetaSeries(FormExpr):
    """sum_{n in Z} psi(n) n^e q^(n^2), e = 0 for even psi and 1 for odd psi."""

    sparse = True

    def __init__(self, psi: Optional[DirichletCharacter] = None):
        psi = psi or DirichletCharacter.trivial(1)
        self.psi = psi
        self.eps = 0 if psi.is_even() else 1
        f = psi.modulus
        level = 4 * f * f
        char = psi.induce(level) if f > 1 else DirichletCharacter.trivial(level)
        if self.eps:
            char = char * DirichletCharacter.kronecker(-4).induce(level)
        super().__init__(level, Fraction(1 + 2 * self.eps, 2), char)

    def _values(self, indices):
        out = []
        for i in indices:
            if i == 0:
                out.append(ONE if self.psi.modulus == 1 and self.eps == 0 else ZERO)
                continue
            r = math.isqrt(i)
            if r * r != i:
                out.append(ZERO)
            else:
                out.append(simplify(char_coef(self.psi, r) * (2 * r ** self.eps)))
        return out

    def field_order(self):
        return self.psi.order

    def prefix_args(self):
        return [] if self.psi.modulus == 1 else [char_token(self.psi)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(parse_char(args[0]) if args else None)


def _lattice_counts(A: List[List[int]], bound: int) -> List[int]:
    """#{x : x^T A x / 2 = n} for n <= bound, A even positive definite."""
    m = len(A)
    q = [[Fraction(A[i][j], 2) for j in range(m)] for i in range(m)]
    for i in range(m):
        if q[i][i] <= 0:
            raise ValueError("Gram matrix is not positive definite")
        for j in range(i + 1, m):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, m):
            for l in range(k, m):
                q[k][l] -= q[k][i] * q[i][l]
    diag = [float(q[i][i]) for i in range(m)]
    off = [[float(q[i][j]) for j in range(m)] for i in range(m)]
    counts = [0] * (bound + 1)
    x = [0] * m

    def norm() -> int:
        return sum(A[i][j] * x[i] * x[j] for i in range(m) for j in range(m)) // 2

    def rec(i: int, used: float) -> None:
        c = sum(off[i][j] * x[j] for j in range(i + 1, m))
        room = bound - used + 1e-9
        if room < 0:
            return
        r = math.sqrt(room / diag[i])
        for v in range(math.floor(-c - r), math.ceil(-c + r) + 1):
            t = v + c
            contrib = diag[i] * t * t
            if used + contrib > bound + 1e-9:
                continue
            x[i] = v
            if i == 0:
                n = norm()
                if n <= bound:
                    counts[n] += 1
            else:
                rec(i - 1, used + contrib)
        x[i] = 0

    rec(m - 1, 0.0)
    return counts


def _positive_pivots(A: List[List[int]]) -> Optional[List[Fraction]]:
    """Gaussian pivots of A, or None once one is <= 0 (A not positive definite)."""
    m = len(A)
    M = [[Fraction(v) for v in row] for row in A]
    pivots = []
    for i in range(m):
        if M[i][i] <= 0:
            return None
        pivots.append(M[i][i])
        for k in range(i + 1, m):
            f = M[k][i] / M[i][i]
            for l in range(i, m):
                M[k][l] -= f * M[i][l]
    return pivots


@register("qf")
class LatticeTheta(FormExpr):
    """Theta series of a positive definite integral quadratic form.

    A Gram matrix with an odd diagonal entry is read as x^T G x, an even one as x^T G x / 2.
    """

    def __init__(self, gram: Sequence[Sequence[int]]):
        G = [[int(v) for v in row] for row in gram]
        m = len(G)
        if m == 0 or m % 2 or any(len(row) != m for row in G):
            raise ValueError("Gram matrix must be square of even dimension")
        if any(G[i][j] != G[j][i] for i in range(m) for j in range(m)):
            raise ValueError("Gram matrix must be symmetric")
        self.gram = G
        even = all(G[i][i] % 2 == 0 for i in range(m))
        A = G if even else [[2 * v for v in row] for row in G]
        pivots = _positive_pivots(A)
        if pivots is None:
            raise ValueError("Gram matrix is not positive definite")
        self.A = A
        det = math.prod(pivots)
        Ainv = inverse([[Fraction(v) for v in row] for row in A])
        N = lcm(*[v.denominator for row in Ainv for v in row])
        if any((Ainv[i][i] * N) % 2 for i in range(m)):
            N *= 2
        D = (-1) ** (m // 2) * int(det)
        super().__init__(N, m // 2, quadratic_character_mod(N, D) if N > 1 else DirichletCharacter.trivial(1))

    def _expand(self, n):
        _log(f"lattice enumeration up to norm {n}")
        return [Fraction(c) for c in _lattice_counts(self.A, n)]

    def prefix_args(self):
        return [str(len(self.gram))] + [str(v) for row in self.gram for v in row]

    @classmethod
    def from_prefix(cls, args, build):
        m = int(args[0])
        vals = [int(a) for a in args[1:]]
        return cls([vals[i * m:(i + 1) * m] for i in range(m)])


# -- combinations ---------------------------------------------------------------------------

@register("lin")
class Linear(FormExpr):
    sparse = True

    def __init__(self, forms: Sequence[FormExpr], scalars: Sequence):
        forms = list(forms)
        if not forms or len(forms) != len(scalars):
            raise ValueError("mflinear needs as many scalars as forms, at least one")
        weights = {f.weight for f in forms}
        if len(weights) > 1:
            _warn(f"linear combination of forms of weights {sorted(str(w) for w in weights)}")
        N = lcm(*[f.level for f in forms])
        super().__init__(N, forms[0].weight, forms[0].char.induce(N), forms)
        self.scalars = [simplify(Fraction(c) if isinstance(c, int) else c) for c in scalars]

    def _values(self, indices):
        acc = [ZERO] * len(indices)
        for f, c in zip(self.children, self.scalars):
            if not c:
                continue
            for j, v in enumerate(f.values(indices)):
                if v:
                    acc[j] = acc[j] + c * v
        return acc

    def field_order(self):
        return lcm(super().field_order(), *[coef_order(c) for c in self.scalars])

    def prefix_args(self):
        return [str(len(self.children))] + [c.prefix() for c in self.children] + [scalar_token(c) for c in self.scalars]

    @classmethod
    def from_prefix(cls, args, build):
        n = int(args[0])
        return cls([build(a) for a in args[1:n + 1]], [parse_scalar(a) for a in args[n + 1:]])


@register("mul")
class Product(FormExpr):
    def __init__(self, f: FormExpr, g: FormExpr):
        N = lcm(f.level, g.level)
        k = f.weight + g.weight
        super().__init__(N, k, combined_char(N, [(f.weight, f.char, 1), (g.weight, g.char, 1)], k), (f, g))

    def _expand(self, n):
        f, g = self.children
        return series_mul(f.series(n), g.series(n), n)

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), build(args[1]))


@register("pow")
class Power(FormExpr):
    def __init__(self, f: FormExpr, e: int):
        e = int(e)
        if e < 0:
            raise ValueError("mfpow needs a nonnegative exponent; use mfdiv for inverses")
        k = f.weight * e
        super().__init__(f.level, k, combined_char(f.level, [(f.weight, f.char, e)], k), (f,))
        self.exponent = e

    def _expand(self, n):
        return series_pow(self.children[0].series(n), self.exponent, n)

    def prefix_args(self):
        return [self.children[0].prefix(), str(self.exponent)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), int(args[1]))


@register("div")
class Quotient(FormExpr):
    """f / g truncated; the valuation of g is located before dividing."""

    def __init__(self, f: FormExpr, g: FormExpr):
        N = lcm(f.level, g.level)
        k = f.weight - g.weight
        super().__init__(N, k, combined_char(N, [(f.weight, f.char, 1), (g.weight, g.char, -1)], k), (f, g))
        self._gval: Optional[int] = None

    def _denominator_valuation(self, n: int) -> int:
        if self._gval is not None:
            return self._gval
        g = self.children[1]
        bound = n + 8
        cap = 4 * n + 64
        while True:
            v = g.valuation(bound)
            if v is not None:
                self._gval = v
                return v
            if bound >= cap:
                raise ValuationError(f"divisor vanishes to order > {bound}; cannot determine the quotient")
            bound = min(2 * bound, cap)

    def _expand(self, n):
        f, g = self.children
        v = self._denominator_valuation(n)
        F = f.series(n + v)
        if any(F[:v]):
            raise ValuationError("quotient is not a power series in q")
        G = g.series(n + v)
        return series_mul(F[v:], series_inverse(G[v:], n), n)

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), build(args[1]))


@register("bd")
class ExpandB(FormExpr):
    """B(d): a(n) -> a(n/d)."""

    sparse = True

    def __init__(self, f: FormExpr, d: int):
        d = int(d)
        if d < 1:
            raise ValueError(f"B(d) needs d >= 1, got {d}")
        N = f.level * d
        super().__init__(N, f.weight, f.char.induce(N), (f,))
        self.d = d

    def _values(self, indices):
        d = self.d
        wanted = [i // d for i in indices if i % d == 0]
        got = dict(zip(wanted, self.children[0].values(wanted)))
        return [got[i // d] if i % d == 0 else ZERO for i in indices]

    def prefix_args(self):
        return [self.children[0].prefix(), str(self.d)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), int(args[1]))


@register("hecke")
class HeckeImage(FormExpr):
    """T_N(n) f: b(m) = sum_{a | (m, n)} chi(a) a^(k-1) a_f(mn / a^2)."""

    sparse = True

    def __init__(self, f: FormExpr, n: int, level: Optional[int] = None, char: Optional[DirichletCharacter] = None):
        n = int(n)
        if n < 1:
            raise ValueError(f"Hecke index must be positive, got {n}")
        if isinstance(f.weight, Fraction):
            raise ValueError("Hecke operators T(n) are only implemented in integral weight")
        N = int(level or f.level)
        chi = char or f.char
        super().__init__(N, f.weight, chi.induce(N), (f,))
        self.n = n

    def _values(self, indices):
        n, k, chi = self.n, self.weight, self.char
        plan = []
        need = set()
        for m in indices:
            terms = []
            for a in divisors(math.gcd(m, n)):
                c = char_coef(chi, a)
                if c:
                    idx = m * n // (a * a)
                    terms.append((c * a ** (k - 1), idx))
                    need.add(idx)
            plan.append(terms)
        need = sorted(need)
        got = dict(zip(need, self.children[0].values(need)))
        out = []
        for terms in plan:
            acc = ZERO
            for c, idx in terms:
                v = got[idx]
                if v:
                    acc = acc + c * v
            out.append(acc)
        return out

    def field_order(self):
        return lcm(super().field_order(), self.char.order)

    def prefix_args(self):
        return [self.children[0].prefix(), str(self.n), str(self.level), char_token(self.char)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), int(args[1]), int(args[2]), parse_char(args[3]))


@register("deriv")
class Derivative(FormExpr):
    """q d/dq."""

    sparse = True

    def __init__(self, f: FormExpr):
        super().__init__(f.level, f.weight + 2, f.char, (f,))
        self.quasi = True

    def _values(self, indices):
        return [v * i for i, v in zip(indices, self.children[0].values(indices))]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]))


@register("serre")
class SerreDerivative(FormExpr):
    """f' - (k/12) E_2 f."""

    def __init__(self, f: FormExpr):
        if isinstance(f.weight, Fraction):
            raise ValueError("Serre derivative needs integral weight")
        super().__init__(f.level, f.weight + 2, f.char, (f,))
        self._e2 = LevelOneEisenstein(2)

    def _expand(self, n):
        f = self.children[0]
        a = f.series(n)
        prod = series_mul(self._e2.series(n), a, n)
        c = Fraction(f.weight, 12)
        return [simplify(i * a[i] - c * prod[i]) for i in range(n + 1)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]))


@register("rc")
class RankinCohen(FormExpr):
    """[f, g]_n = sum_r (-1)^r C(k+n-1, n-r) C(l+n-1, r) D^r f D^(n-r) g with D = q d/dq."""

    def __init__(self, f: FormExpr, g: FormExpr, n: int):
        n = int(n)
        if n < 0:
            raise ValueError("bracket index must be nonnegative")
        if isinstance(f.weight, Fraction) or isinstance(g.weight, Fraction):
            raise ValueError("Rankin-Cohen brackets need integral weights")
        N = lcm(f.level, g.level)
        super().__init__(N, f.weight + g.weight + 2 * n, f.char * g.char, (f, g))
        self.n = n

    def _expand(self, m):
        f, g = self.children
        k, l, n = f.weight, g.weight, self.n
        a, b = f.series(m), g.series(m)
        out = [ZERO] * (m + 1)
        for r in range(n + 1):
            c = (-1) ** r * int(binomial(k + n - 1, n - r)) * int(binomial(l + n - 1, r))
            if not c:
                continue
            da = [a[i] * i ** r for i in range(m + 1)]
            db = [b[i] * i ** (n - r) for i in range(m + 1)]
            term = series_mul(da, db, m)
            out = [x + c * y for x, y in zip(out, term)]
        return out

    def prefix_args(self):
        return [c.prefix() for c in self.children] + [str(self.n)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), build(args[1]), int(args[2]))


@register("twist")
class Twist(FormExpr):
    """sum psi(n) a(n) q^n, on level lcm(N, f^2, f * cond(chi)) with character chi psi^2."""

    sparse = True

    def __init__(self, f: FormExpr, psi: DirichletCharacter):
        m = psi.modulus
        N = lcm(f.level, m * m, m * f.char.conductor)
        char = f.char.induce(N) * psi.power(2).induce(N) if m > 1 else f.char.induce(N)
        super().__init__(N, f.weight, char, (f,))
        self.psi = psi

    def _values(self, indices):
        vals = self.children[0].values(indices)
        return [char_coef(self.psi, i) * v if v else ZERO for i, v in zip(indices, vals)]

    def field_order(self):
        return lcm(super().field_order(), self.psi.order)

    def prefix_args(self):
        return [self.children[0].prefix(), char_token(self.psi)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(build(args[0]), parse_char(args[1]))


# -- constructors -------------------------------------------------------------------------------

def coeffs(f: FormExpr, L: int, d: int = 1) -> List:
    return f.coefs(L, d)


def constant(c) -> FormExpr:
    return Constant(c)


def mflinear(forms: Sequence[FormExpr], scalars: Sequence) -> FormExpr:
    return Linear(forms, scalars)


def mfmul(f: FormExpr, g: FormExpr) -> FormExpr:
    return Product(f, g)


def mfpow(f: FormExpr, e: int) -> FormExpr:
    return Power(f, e)


def mfdiv(f: FormExpr, g: FormExpr) -> FormExpr:
    return Quotient(f, g)


def mfbd(f: FormExpr, d: int) -> FormExpr:
    return f if d == 1 else ExpandB(f, d)


def derivative(f: FormExpr) -> FormExpr:
    return Derivative(f)


def serre_derivative(f: FormExpr) -> FormExpr:
    return SerreDerivative(f)


def rankin_cohen(f: FormExpr, g: FormExpr, n: int) -> FormExpr:
    return RankinCohen(f, g, n)


def twist(f: FormExpr, psi: DirichletCharacter) -> FormExpr:
    return Twist(f, psi)


def eta_quotient(pairs: Sequence[Tuple[int, int]]) -> FormExpr:
    return EtaQuotient(pairs)


def theta_char(psi: Optional[DirichletCharacter] = None) -> FormExpr:
    return ThetaSeries(psi)


def theta_qf(gram: Sequence[Sequence[int]]) -> FormExpr:
    return LatticeTheta(gram)


def delta() -> FormExpr:
    return Delta()


def eisenstein_level_one(k: int) -> FormExpr:
    return LevelOneEisenstein(k)


# -- parsing ------------------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _read(tokens: List[str], pos: int):
    tok = tokens[pos]
    if tok == "(":
        out = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            out.append(item)
        if pos >= len(tokens):
            raise ValueError("unbalanced parentheses in form expression")
        return out, pos + 1
    if tok == ")":
        raise ValueError("unexpected ')' in form expression")
    return tok, pos + 1


def _build(sexp) -> FormExpr:
    if not isinstance(sexp, list) or not sexp:
        raise ValueError(f"expected a form, got {sexp!r}")
    tag = sexp[0]
    maker = _REGISTRY.get(tag)
    if maker is None:
        raise ValueError(f"unknown form tag {tag!r}")
    return maker(sexp[1:], _build)


def parse_prefix(text: str) -> FormExpr:
    # leaves defined in the other engine modules register themselves on import
    from . import eisenstein, hecke, special_weights, trace  # noqa: F401

    tokens = _TOKEN.findall(text)
    if not tokens:
        raise ValueError("empty form expression")
    sexp, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise ValueError("trailing input after form expression")
    return _build(sexp)
