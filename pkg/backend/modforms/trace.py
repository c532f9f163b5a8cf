"""Traces of Hecke operators on S_k(Gamma0(N), chi).

trace_full is the Eichler-Selberg formula A1 - A2 - A3 + A4, trace_new the trace on
the new space obtained from it by Moebius-type inversion over the levels M with
f(chi) | M | N. Character values are accumulated as exponent vectors of zeta_o and
turned into one CyclotomicElement at the end.
"""
from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Tuple

from .. import config
from .arith import (
    class_number,
    crt_pair,
    divisors,
    euler_phi,
    factor,
    gamma0_index,
    moebius,
    squarefree_squarefull_split,
)
from .characters import DirichletCharacter
from .cyclotomic import CyclotomicElement
from .errors import ParityError
from .qseries import ZERO, FormExpr, char_token, parse_char, register, simplify

_LOCK = threading.Lock()
_TRACE_CACHE: Dict[Tuple[int, int, int, int, bool], object] = {}
_ROOTS: Dict[Tuple[int, int, int], List[int]] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[TRACE] {msg}", file=sys.stderr)


@dataclass(frozen=True)
class TraceContext:
    N: int
    k: int
    chi: DirichletCharacter

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"trace formula needs k >= 2, got {self.k}")
        if self.chi.modulus != self.N:
            object.__setattr__(self, "chi", self.chi.induce(self.N))
        if self.chi.parity != (-1) ** self.k:
            raise ParityError(f"chi(-1) = {self.chi.parity} is incompatible with weight {self.k}")

    @classmethod
    def make(cls, N: int, k: int, chi: DirichletCharacter = None) -> "TraceContext":
        return cls(N, k, chi if chi is not None else DirichletCharacter.trivial(N))


class _Accumulator:
    """sum of c * zeta_o^e, kept as a Fraction per exponent."""

    def __init__(self, order: int):
        self.order = order
        self.slots = [Fraction(0)] * order

    def add(self, e, c) -> None:
        if e is not None and c:
            self.slots[e % self.order] += c

    def value(self):
        if self.order == 1:
            return self.slots[0]
        return simplify(CyclotomicElement.from_exponents(self.order, self.slots))


def gegenbauer(k: int, t: int, n: int) -> int:
    """(rho^(k-1) - rhobar^(k-1)) / (rho - rhobar) for rho + rhobar = t, rho rhobar = n."""
    u0, u1 = 0, 1
    for _ in range(k - 2):
        u0, u1 = u1, t * u1 - n * u0
    return u1 if k >= 2 else u0


def _roots_mod_prime_power(t: int, n: int, p: int, e: int) -> List[int]:
    """Roots of x^2 - t x + n mod p^e, lifted one power of p at a time from the roots mod p."""
    roots = [x for x in range(p) if (x * x - t * x + n) % p == 0]
    q = p
    for _ in range(1, e):
        lifted = []
        for r in roots:
            for s in range(p):
                x = r + s * q
                if (x * x - t * x + n) % (q * p) == 0:
                    lifted.append(x)
        roots, q = lifted, q * p
        if not roots:
            break
    return sorted(roots)


def quadratic_roots(t: int, n: int, M: int) -> List[int]:
    """x mod M with x^2 - t x + n = 0 (mod M), by CRT over the prime powers of M."""
    key = (t % M, n % M, M)
    hit = _ROOTS.get(key)
    if hit is not None:
        return hit
    local = []
    for p, e in sorted(factor(M).items()):
        q = p ** e
        local.append((_roots_mod_prime_power(t, n, p, e), q))
    if any(not roots for roots, _ in local):
        out: List[int] = []
    else:
        out = []
        for combo in product(*[roots for roots, _ in local]):
            x, m = 0, 1
            for r, (_, q) in zip(combo, local):
                x, m = crt_pair(x, m, r, q)
            out.append(x % M)
        out.sort()
    with _LOCK:
        _ROOTS[key] = out
    return out


def quadratic_roots_brute(t: int, n: int, M: int) -> List[int]:
    return [x for x in range(M) if (x * x - t * x + n) % M == 0]


def _local_factor(N: int, g: int) -> Fraction:
    out = Fraction(g)
    rest = N // g
    for p in factor(N):
        if rest % p:
            out *= Fraction(p + 1, p)
    return out


def _a1(ctx: TraceContext, n: int, acc: _Accumulator, sign: int) -> None:
    r = math.isqrt(n)
    if r * r != n:
        return
    c = Fraction(r ** (ctx.k - 2) * (ctx.k - 1) * gamma0_index(ctx.N), 12)
    acc.add(ctx.chi.exponent(r), sign * c)


def _a2(ctx: TraceContext, n: int, acc: _Accumulator, sign: int) -> None:
    N, k, chi = ctx.N, ctx.k, ctx.chi
    tmax = math.isqrt(4 * n)
    for t in range(-tmax, tmax + 1):
        D = t * t - 4 * n
        if D >= 0:
            continue
        u = gegenbauer(k, t, n)
        if not u:
            continue
        for f in divisors(math.isqrt(-D)):
            if D % (f * f):
                continue
            d = D // (f * f)
            if d % 4 not in (0, 1):
                continue
            h, w = class_number(d)
            g = math.gcd(N, f)
            roots = [x for x in quadratic_roots(t, n, N * g) if x < N]
            if not roots:
                continue
            c = sign * u * Fraction(h, w) * _local_factor(N, g)
            for x in roots:
                acc.add(chi.exponent(x), c)


def _a3(ctx: TraceContext, n: int, acc: _Accumulator, sign: int) -> None:
    N, k, chi = ctx.N, ctx.k, ctx.chi
    cond = chi.conductor
    for d in divisors(n):
        if d * d > n:
            break
        half = Fraction(1, 2) if d * d == n else Fraction(1)
        e = n // d
        for c in divisors(N):
            g = math.gcd(c, N // c)
            if math.gcd(N // cond, e - d) % g:
                continue
            x1, _ = crt_pair(d % c, c, e % (N // c), N // c)
            acc.add(chi.exponent(x1), sign * half * d ** (k - 1) * euler_phi(g))


def _a4(ctx: TraceContext, n: int, acc: _Accumulator, sign: int) -> None:
    if ctx.k != 2 or not ctx.chi.is_trivial():
        return
    total = sum(t for t in divisors(n) if math.gcd(n // t, ctx.N) == 1)
    acc.add(0, sign * total)


def trace_full(ctx: TraceContext, n: int):
    """Trace of T(n) on S_k(Gamma0(N), chi)."""
    if n < 1:
        raise ValueError(f"trace needs n >= 1, got {n}")
    key = (ctx.N, ctx.k, ctx.chi.label, n, False)
    hit = _TRACE_CACHE.get(key)
    if hit is not None:
        return hit
    acc = _Accumulator(ctx.chi.order)
    _a1(ctx, n, acc, 1)
    _a2(ctx, n, acc, -1)
    _a3(ctx, n, acc, -1)
    _a4(ctx, n, acc, 1)
    out = acc.value()
    with _LOCK:
        _TRACE_CACHE[key] = out
    return out


def beta(n: int) -> int:
    out = 1
    for p, a in factor(n).items():
        out *= {1: -2, 2: 1}.get(a, 0)
    return out


def beta_m(m: int, n: int) -> int:
    """Multiplicative in n: beta(p^a) for p not dividing m, mu(p^a) for p | m."""
    out = 1
    for p, a in factor(n).items():
        out *= moebius(p ** a) if m % p == 0 else beta(p ** a)
        if not out:
            return 0
    return out


def trace_new(ctx: TraceContext, n: int):
    """Trace of T(n) on the new subspace."""
    if n < 1:
        raise ValueError(f"trace needs n >= 1, got {n}")
    key = (ctx.N, ctx.k, ctx.chi.label, n, True)
    hit = _TRACE_CACHE.get(key)
    if hit is not None:
        return hit
    N, k = ctx.N, ctx.k
    prim = ctx.chi.primitive()
    f = prim.modulus
    N1, _ = squarefree_squarefull_split(N)
    total = ZERO
    for M in divisors(N):
        if M % f:
            continue
        b_outer = N // M
        for d in divisors(math.gcd(M // f, N1)):
            if n % (d * d):
                continue
            level = M // d
            if level % f:
                continue
            m = n // (d * d)
            b = beta_m(m, b_outer)
            if not b:
                continue
            cd = prim.exponent(d)
            if cd is None:
                continue
            inner = trace_full(TraceContext(level, k, prim.induce(level)), m)
            if not inner:
                continue
            coef = CyclotomicElement.zeta(prim.order, cd) if cd else Fraction(1)
            total = total + coef * inner * (b * d ** (k - 1))
    out = simplify(total)
    with _LOCK:
        _TRACE_CACHE[key] = out
    return out


def dim_cusp(ctx: TraceContext) -> int:
    return int(Fraction(trace_full(ctx, 1)))


def dim_new(ctx: TraceContext) -> int:
    return int(Fraction(trace_new(ctx, 1)))


@register("trnew")
class TraceFormNew(FormExpr):
    """sum_n Tr^new(N, n) q^n, the sum of the normalized newforms."""

    sparse = True

    def __init__(self, ctx: TraceContext):
        super().__init__(ctx.N, ctx.k, ctx.chi)
        self.ctx = ctx

    def _values(self, indices):
        if len(indices) > 50:
            _log(f"Tr^new({self.ctx.N}) at {len(indices)} indices up to {max(indices)}")
        return [ZERO if i == 0 else trace_new(self.ctx, i) for i in indices]

    def field_order(self):
        return self.ctx.chi.order

    def prefix_args(self):
        return [str(self.ctx.N), str(self.ctx.k), char_token(self.ctx.chi)]

    @classmethod
    def from_prefix(cls, args, build):
        return cls(TraceContext(int(args[0]), int(args[1]), parse_char(args[2])))


def trace_form_new(ctx: TraceContext) -> FormExpr:
    return TraceFormNew(ctx)
