"""Expansions of f|_k gamma at the cusps.

Every integral-weight form is written as a combination of products of at most two
Eisenstein series of weight >= 3 (after multiplying by a level one form when the
weight is too small). Each Eisenstein factor is a combination of congruence-class
Eisenstein series

    G^(v)(tau) = sum_{(c, d) = v (mod M), (c, d) != 0} (c tau + d)^(-k),

on which SL2(Z) acts by v -> v gamma, so slashing only permutes classes. Numerics run
in mpmath at the working precision plus a guard; coefficients are recognized in
Q(zeta_u) with PSLQ and checked again at doubled precision. Half-integral weight goes
through f theta, whose slash is divided by the known expansion of theta at the cusp.
"""
from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from sympy import Rational, bernoulli, symbols
from sympy.core.intfunc import igcdex

from .. import config
from .arith import divisors, gamma0_index, lcm
from .characters import DirichletCharacter, characters_mod
from .cyclotomic import CyclotomicElement, canonical_order, cyclotomic_modulus, phi_of
from .eisenstein import EisKey, weisinger_basis
from .errors import ComputationError, ValuationError
from .hecke import Eigenform
from .linalg import IncrementalEchelon, solve_left
from .qseries import (
    ZERO,
    Delta,
    FormExpr,
    LevelOneEisenstein,
    Power,
    Product,
    ThetaSeries,
    coef_json,
    format_qexp,
    mflinear,
    series_inverse,
    simplify,
)
from .relfield import RelativeElement
from .spaces import ModularSpace, mfdim, sturm_bound

Matrix2 = Tuple[int, int, int, int]

GUARD = 12

_X = symbols("x")
_LOCK = threading.Lock()
_BERNOULLI: Dict[Tuple[int, int], List[Fraction]] = {}
_DECOMPOSITIONS: Dict[Tuple, List["ProductDecomposition"]] = {}
_FACTORS: Dict[Tuple, "FloatSeries"] = {}
_PRODUCTS: Dict[Tuple, "FloatSeries"] = {}
_BASIS_SLASH: Dict[Tuple, List["FloatSeries"]] = {}
_COSETS: Dict[int, "CosetTable"] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[CUSPEXP] {msg}", file=sys.stderr)


def _warn(msg: str) -> None:
    print(f"[CUSPEXP] warning: {msg}", file=sys.stderr)


def _space_key(space: ModularSpace) -> Tuple:
    return (space.N, str(space.k), space.chi.label, space.code)


# -- 2x2 matrices ----------------------------------------------------------------------------------

def as_matrix(gamma) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """[a, b, c, d] or [[a, b], [c, d]] with rational entries."""
    flat = list(gamma)
    if len(flat) == 2 and all(isinstance(r, (list, tuple)) for r in flat):
        flat = [flat[0][0], flat[0][1], flat[1][0], flat[1][1]]
    if len(flat) != 4:
        raise ValueError(f"expected a 2x2 matrix, got {gamma!r}")
    return tuple(Fraction(x) for x in flat)


def det2(g) -> int:
    a, b, c, d = g
    return a * d - b * c


def mul2(g, h) -> Matrix2:
    a, b, c, d = g
    e, f, x, y = h
    return (a * e + b * x, a * f + b * y, c * e + d * x, c * f + d * y)


def inv_sl2(g) -> Matrix2:
    a, b, c, d = g
    return (d, -b, -c, a)


def translation(m: int) -> Matrix2:
    return (1, m, 0, 1)


S_MATRIX: Matrix2 = (0, -1, 1, 0)


def hermite(a: int, b: int, c: int, d: int) -> Tuple[Matrix2, int, int, int]:
    """[a, b; c, d] = gamma' [A, B; 0, D] with gamma' in SL2(Z), A D = det, 0 <= B < D."""
    det = a * d - b * c
    if det <= 0:
        raise ValueError(f"matrix [{a}, {b}; {c}, {d}] must have positive determinant")
    g0 = math.gcd(a, c)
    a1, c1 = a // g0, c // g0
    s, t, _ = igcdex(a1, c1)
    x, y = -int(t), int(s)
    A, D = g0, det // g0
    B = y * b - x * d
    j, B = divmod(B, D)
    return (a1, x + j * a1, c1, y + j * c1), A, B, D


def rational_reduction(gamma) -> Tuple[Matrix2, Optional[Tuple[Fraction, Fraction]]]:
    """Split a rational matrix of positive determinant into gamma' in SL2(Z) and the
    affine substitution tau -> u tau + v it induces (None when gamma is already in SL2(Z))."""
    g = as_matrix(gamma)
    m = lcm(*[x.denominator for x in g])
    a, b, c, d = (int(x * m) for x in g)
    det = a * d - b * c
    if det <= 0:
        raise ValueError("the matrix must have positive determinant")
    if det == 1:
        return (a, b, c, d), None
    gp, A, B, D = hermite(a, b, c, d)
    return gp, (Fraction(A, D), Fraction(B, D))


def slash_params(N: int, k, chi: DirichletCharacter, gamma) -> Tuple[Fraction, int]:
    """(alpha, w): f|gamma = q^alpha sum a(n) q^(n/w), w = N / gcd(N, c^2),
    e^(2 pi i alpha w) = chi(1 + a c w)."""
    a, b, c, d = (int(x) for x in gamma)
    w = N // math.gcd(N, c * c)
    if c == 0:
        return Fraction(0), 1
    e = chi.exponent(1 + a * c * w)
    if e is None:
        raise ComputationError(f"1 + a c w is not a unit modulo {N}")
    return Fraction(e, chi.order) / w, w


def field_bound(N: int, M: int, gamma) -> int:
    """u with the coefficients of f|gamma in K(zeta_u): lcm(N/gcd(N, CD), M/gcd(M, BC))."""
    A, B, C, D = (int(x) for x in gamma)
    return lcm(N // math.gcd(N, C * D), M // math.gcd(M, B * C))


# -- sparse float series ------------------------------------------------------------------------

class FloatSeries:
    """sum_e c_e q^(e/den) with finitely many complex coefficients."""

    __slots__ = ("den", "terms")

    def __init__(self, den: int = 1, terms: Optional[Dict[int, object]] = None):
        self.den = int(den)
        self.terms = dict(terms or {})

    @classmethod
    def from_coefficients(cls, coeffs: Sequence, den: int = 1) -> "FloatSeries":
        return cls(den, {j: c for j, c in enumerate(coeffs) if c})

    def regrid(self, den: int) -> "FloatSeries":
        if den == self.den:
            return self
        if den % self.den:
            raise ValueError(f"grid 1/{den} does not refine 1/{self.den}")
        f = den // self.den
        return FloatSeries(den, {e * f: c for e, c in self.terms.items()})

    def __add__(self, other: "FloatSeries") -> "FloatSeries":
        den = lcm(self.den, other.den)
        out = dict(self.regrid(den).terms)
        for e, c in other.regrid(den).terms.items():
            out[e] = out.get(e, 0) + c
        return FloatSeries(den, out)

    def scaled(self, c) -> "FloatSeries":
        if not c:
            return FloatSeries(self.den)
        return FloatSeries(self.den, {e: c * v for e, v in self.terms.items()})

    def truncated(self, bound: Fraction) -> "FloatSeries":
        top = math.floor(bound * self.den)
        return FloatSeries(self.den, {e: c for e, c in self.terms.items() if e <= top})

    def pruned(self, eps, weight: int = 0) -> "FloatSeries":
        """Drop coefficients below eps (1 + exponent)^weight."""
        out = {}
        for e, c in self.terms.items():
            if abs(c) > eps * (1 + abs(e) / self.den) ** weight:
                out[e] = c
        return FloatSeries(self.den, out)

    def mul(self, other: "FloatSeries", bound: Fraction) -> "FloatSeries":
        den = lcm(self.den, other.den)
        a = sorted(self.regrid(den).terms.items())
        b = sorted(other.regrid(den).terms.items())
        top = math.floor(bound * den)
        out: Dict[int, object] = {}
        if not a or not b:
            return FloatSeries(den)
        low_b = b[0][0]
        for ea, ca in a:
            if ea + low_b > top:
                break
            for eb, cb in b:
                e = ea + eb
                if e > top:
                    break
                out[e] = out.get(e, 0) + ca * cb
        return FloatSeries(den, out)

    def valuation(self) -> Optional[Fraction]:
        if not self.terms:
            return None
        return Fraction(min(self.terms), self.den)

    def divide(self, other: "FloatSeries", bound: Fraction) -> "FloatSeries":
        """self / other up to exponent bound; other must be pruned."""
        if not other.terms:
            raise ValuationError("division by a series that vanishes to the working precision")
        eg = min(other.terms)
        W = lcm(self.den, other.den)
        r = W // other.den
        n = math.floor(bound * other.den) + 2
        G = [other.terms.get(eg + j, 0) for j in range(n + 1)]
        inv = series_inverse(G, n)
        top = math.floor(bound * W)
        out: Dict[int, object] = {}
        for e, c in self.regrid(W).terms.items():
            E = e - eg * r
            if E < 0:
                raise ValuationError("quotient has a pole at the cusp")
            for j, v in enumerate(inv):
                pos = E + r * j
                if pos > top:
                    break
                if v:
                    out[pos] = out.get(pos, 0) + c * v
        return FloatSeries(W, out)

    def coefficient(self, x: Fraction):
        e = Fraction(x) * self.den
        if e.denominator != 1:
            return mpmath.mpc(0)
        return self.terms.get(int(e), mpmath.mpc(0))

    def translated(self, m) -> "FloatSeries":
        """f(tau + m)."""
        if not m:
            return self
        m = Fraction(m)
        return FloatSeries(self.den, {e: c * mpmath.expjpi(2 * mpmath.mpf(e) * m.numerator / (self.den * m.denominator))
                                      for e, c in self.terms.items()})

    def substituted(self, u: Fraction, v: Fraction) -> "FloatSeries":
        """f(u tau + v) for rational u > 0."""
        shifted = self.translated(v)
        den = self.den * u.denominator
        return FloatSeries(den, {e * u.numerator: c for e, c in shifted.terms.items()})

    def evaluate(self, tau):
        tau = mpmath.mpmathify(tau)
        acc = mpmath.mpc(0)
        for e, c in self.terms.items():
            acc += c * mpmath.expjpi(2 * tau * e / self.den)
        return acc

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"FloatSeries(1/{self.den}, {len(self.terms)} terms)"


def to_complex(c, y_value=None, t_value=None):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, int):
        return mpmath.mpf(c)
    if isinstance(c, CyclotomicElement):
        return c.embed(t_value) if t_value is not None and c.order > 1 else c.embed()
    if isinstance(c, RelativeElement):
        return c.embed(y_value, t_value)
    return mpmath.mpmathify(c)


def _eps() -> object:
    return mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))


# -- congruence-class Eisenstein series ------------------------------------------------------------

def _bernoulli_values(k: int, M: int) -> List[Fraction]:
    """B_k(j/M) for j = 0..M-1."""
    key = (k, M)
    hit = _BERNOULLI.get(key)
    if hit is None:
        poly = bernoulli(k, _X)
        hit = []
        for j in range(M):
            v = poly.subs(_X, Rational(j, M))
            hit.append(Fraction(int(v.p), int(v.q)))
        with _LOCK:
            _BERNOULLI[key] = hit
    return hit


@dataclass(frozen=True)
class CosetEisenstein:
    """G^(v) / K with K = (-2 pi i)^k / ((k-1)! M^k), so that coefficients are cyclotomic.

    The expansion runs in q_M = e^(2 pi i tau / M).
    """

    k: int
    M: int
    v: Tuple[int, int]

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"congruence-class Eisenstein series need k >= 3, got {self.k}")
        object.__setattr__(self, "v", (self.v[0] % self.M, self.v[1] % self.M))

    def normalization(self):
        k, M = self.k, self.M
        return (-2 * mpmath.pi * 1j) ** k / (mpmath.factorial(k - 1) * mpmath.mpf(M) ** k)

    def slash(self, gamma) -> "CosetEisenstein":
        a, b, c, d = (int(x) for x in gamma)
        v0, v1 = self.v
        return CosetEisenstein(self.k, self.M, (v0 * a + v1 * c, v0 * b + v1 * d))

    def coefficients(self, nmax: int) -> List:
        return coset_coefficients(self.k, self.M, {self.v: mpmath.mpf(1)}, nmax)

    def evaluate(self, tau, nmax: Optional[int] = None):
        """The lattice sum itself (normalization included) from the expansion."""
        tau = mpmath.mpmathify(tau)
        if nmax is None:
            nmax = int(self.M * (mpmath.mp.dps + 5) * math.log(10) / (2 * math.pi * float(tau.imag))) + 10
        coeffs = self.coefficients(nmax)
        qM = mpmath.expjpi(2 * tau / self.M)
        acc = mpmath.mpc(0)
        power = mpmath.mpc(1)
        for c in coeffs:
            if c:
                acc += c * power
            power *= qM
        return self.normalization() * acc


def coset_constant(k: int, M: int, d0: int):
    """Constant term of G^((0, d0)) / K: -(-1)^k M^(k-1)/k sum_j zeta_M^(-j d0) B_k(j/M)."""
    acc = mpmath.mpc(0)
    for j, b in enumerate(_bernoulli_values(k, M)):
        if b:
            acc += mpmath.mpf(b.numerator) / b.denominator * mpmath.expjpi(-2 * mpmath.mpf(j * d0) / M)
    return -((-1) ** k) * mpmath.mpf(M) ** (k - 1) / k * acc


def coset_coefficients(k: int, M: int, weights: Dict[Tuple[int, int], object], nmax: int) -> List:
    """Coefficients in q_M of sum_v weights[v] G^(v) / K up to q_M^nmax."""
    zeta = [mpmath.expjpi(mpmath.mpf(2 * j) / M) for j in range(M)]
    rows: Dict[int, List] = {}
    out = [mpmath.mpc(0)] * (nmax + 1)
    for (c0, d0), a in weights.items():
        if not a:
            continue
        row = rows.setdefault(c0 % M, [mpmath.mpc(0)] * M)
        for r in range(M):
            row[r] += a * zeta[(r * d0) % M]
        if c0 % M == 0:
            out[0] += a * coset_constant(k, M, d0)
    sign = -1 if k % 2 else 1
    for c in range(1, nmax + 1):
        plus = rows.get(c % M)
        minus = rows.get((-c) % M)
        if plus is None and minus is None:
            continue
        for r in range(1, nmax // c + 1):
            t = mpmath.mpc(0)
            if plus is not None:
                t += plus[r % M]
            if minus is not None:
                t += sign * minus[(-r) % M]
            if t:
                out[c * r] += r ** (k - 1) * t
    return out


def _gauss_conj(chi: DirichletCharacter):
    """sum_b conj(chi(b)) e^(2 pi i b / N)."""
    N = chi.modulus
    acc = mpmath.mpc(0)
    for b in range(N):
        v = chi.complex_value(b)
        if v:
            acc += mpmath.conj(v) * mpmath.expjpi(mpmath.mpf(2 * b) / N)
    return acc


def eisenstein_slash(key: EisKey, gamma: Matrix2, X: Fraction) -> "FloatSeries":
    """G_k(chi1, chi2; m tau) | gamma up to exponent X, gamma in SL2(Z), k >= 3.

    G_k(chi1, chi2)(m tau) = H(s tau) / (2 g(conj chi2)) with s = N1 m and
    H = sum_{a mod N1, b mod N2} chi1(a) conj(chi2(b)) G^((N2 a, N1 b)) on level L = N1 N2.
    """
    cache_key = (key, tuple(gamma), X, mpmath.mp.dps)
    hit = _FACTORS.get(cache_key)
    if hit is not None:
        return hit
    k, chi1, chi2, m = key.k, key.chi1, key.chi2, key.m
    if k < 3:
        raise ValueError("Eisenstein factors of weight < 3 are not used")
    N1, N2 = chi1.modulus, chi2.modulus
    L = N1 * N2
    s = N1 * m
    a, b, c, d = gamma
    gp, A, B, D = hermite(s * a, s * b, c, d)
    ap, bp, cp, dp = gp
    weights: Dict[Tuple[int, int], object] = {}
    for x in range(N1):
        u = chi1.complex_value(x)
        if not u:
            continue
        for y in range(N2):
            v = chi2.complex_value(y)
            if not v:
                continue
            v0, v1 = (N2 * x) % L, (N1 * y) % L
            cls = ((v0 * ap + v1 * cp) % L, (v0 * bp + v1 * dp) % L)
            weights[cls] = weights.get(cls, 0) + u * mpmath.conj(v)
    nmax = math.floor(X * L * D / A)
    h = coset_coefficients(k, L, weights, nmax)
    scale = 1 / (2 * _gauss_conj(chi2) * mpmath.mpf(D) ** k)
    den = L * D
    terms = {}
    for n, hn in enumerate(h):
        if hn:
            terms[n * A] = scale * hn * mpmath.expjpi(mpmath.mpf(2 * n * B) / den)
    out = FloatSeries(den, terms).pruned(_eps(), k)
    with _LOCK:
        _FACTORS[cache_key] = out
    return out


# -- theta at the cusps ---------------------------------------------------------------------------------

def _quadratic_gauss(a: int, j: int, c: int):
    acc = mpmath.mpc(0)
    for x in range(c):
        acc += mpmath.expjpi(mpmath.mpf(2 * ((a * x * x + j * x) % c)) / c)
    return acc


def theta_slash(gamma: Matrix2, X: Fraction) -> FloatSeries:
    """theta |_(1/2) gamma for c > 0, or c = 0 and d = 1, up to exponent X.

    theta|gamma = (2ic)^(-1/2) sum_j G(a, j; c) e^(pi i j^2 d / (2c)) q^(j^2 / 4),
    with G(a, j; c) = sum_{x mod c} e^(2 pi i (a x^2 + j x) / c) and the principal branch.
    """
    a, b, c, d = gamma
    if c < 0 or (c == 0 and d < 0):
        raise ValueError("normalize gamma to c > 0 (or c = 0, d = 1) before slashing theta")
    if c == 0:
        J = math.isqrt(math.floor(X))
        terms = {0: mpmath.mpc(1)}
        for n in range(1, J + 1):
            terms[n * n] = mpmath.mpc(2)
        return FloatSeries(1, terms)
    J = math.isqrt(math.floor(4 * X))
    pref = 1 / mpmath.sqrt(mpmath.mpc(0, 2 * c))
    terms: Dict[int, object] = {}
    for j in range(-J, J + 1):
        g = _quadratic_gauss(a, j, c)
        if abs(g) < _eps():
            continue
        val = pref * g * mpmath.expjpi(mpmath.mpf(j * j * d) / (2 * c))
        terms[j * j] = terms.get(j * j, 0) + val
    return FloatSeries(4, terms).pruned(_eps())


def theta2_slash(gamma: Matrix2, X: Fraction) -> FloatSeries:
    """theta(2 tau) |_(1/2) gamma through [2, 0; 0, 1] gamma = gamma' [A, B; 0, D]."""
    a, b, c, d = gamma
    gp, A, B, D = hermite(2 * a, 2 * b, c, d)
    if gp[2] < 0 or (gp[2] == 0 and gp[3] < 0):
        gp = tuple(-x for x in gp)
    u = Fraction(A, D)
    inner = theta_slash(gp, X / u + 1)
    return inner.substituted(u, Fraction(B, D)).scaled(mpmath.mpf(D) ** mpmath.mpf(-0.5)).truncated(X)


def theta_order(gamma: Matrix2, which: int = 1) -> Fraction:
    """Order of theta (which = 1) or theta(2 tau) (which = 2) at the cusp gamma(oo)."""
    g = tuple(gamma)
    if g[2] < 0 or (g[2] == 0 and g[3] < 0):
        g = tuple(-x for x in g)
    series = theta_slash(g, Fraction(4)) if which == 1 else theta2_slash(g, Fraction(4))
    v = series.valuation()
    if v is None:
        raise ValuationError("theta expansion vanished to the working precision")
    return v


# -- cusps and right cosets of Gamma0(N) ------------------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    a: int
    c: int
    width: int
    matrix: Matrix2

    def text(self) -> str:
        if self.matrix == (1, 0, 0, 1):
            return "oo"
        return f"{self.a}/{self.c}"


def _sl2_with_bottom(a: int, c: int) -> Matrix2:
    s, t, _ = igcdex(a, c)
    return (a, -int(t), c, int(s))


def cusps(N: int) -> List[Cusp]:
    """Inequivalent cusps a/c of Gamma0(N), c | N, with widths N / gcd(N, c^2)."""
    out = []
    for c in divisors(N):
        if c == N:
            out.append(Cusp(1, N, 1, (1, 0, 0, 1)))
            continue
        g = math.gcd(c, N // c)
        for u in range(g):
            if math.gcd(u, g) != 1:
                continue
            a = u if g > 1 else 0
            while math.gcd(a, c) != 1:
                a += g
            out.append(Cusp(a, c, N // math.gcd(N, c * c), _sl2_with_bottom(a, c)))
    return out


class CosetTable:
    """Right cosets Gamma0(N) gamma_c T^m, one family per cusp, keyed by P^1(Z/NZ)."""

    def __init__(self, N: int):
        self.N = N
        self.units = [u for u in range(N) if math.gcd(u, N) == 1] if N > 1 else [0]
        self.cusps = cusps(N)
        self.reps: List[Tuple[Cusp, int, Matrix2]] = []
        self._index: Dict[Tuple[int, int], int] = {}
        for cusp in self.cusps:
            for m in range(cusp.width):
                g = mul2(cusp.matrix, translation(m))
                key = self.p1_key(g[2], g[3])
                if key in self._index:
                    raise ComputationError(f"coset table of Gamma0({N}) has a repeated class {key}")
                self._index[key] = len(self.reps)
                self.reps.append((cusp, m, g))
        if len(self.reps) != gamma0_index(N):
            raise ComputationError(f"found {len(self.reps)} cosets of Gamma0({N}), expected {gamma0_index(N)}")

    def p1_key(self, c: int, d: int) -> Tuple[int, int]:
        N = self.N
        if N == 1:
            return (0, 0)
        return min(((u * c) % N, (u * d) % N) for u in self.units)

    def locate(self, delta: Matrix2) -> Tuple[int, int]:
        """(j, d0) with delta = gamma0 reps[j], gamma0 in Gamma0(N) with lower right entry d0."""
        j = self._index[self.p1_key(delta[2], delta[3])]
        g0 = mul2(delta, inv_sl2(self.reps[j][2]))
        if g0[2] % self.N:
            raise ComputationError("coset lookup produced a matrix outside Gamma0(N)")
        return j, g0[3]

    def __len__(self):
        return len(self.reps)


def coset_table(N: int) -> CosetTable:
    hit = _COSETS.get(N)
    if hit is None:
        hit = CosetTable(N)
        with _LOCK:
            _COSETS[N] = hit
    return hit


# -- product decompositions ---------------------------------------------------------------------------

@dataclass
class ProductDecomposition:
    """target * multiplier = sum_j c_j e1_j e2_j (e2_j None for a single Eisenstein series)."""

    target: FormExpr
    terms: List[Tuple[object, EisKey, Optional[EisKey]]]
    multiplier: Optional[FormExpr]
    weight: int
    level: int
    char: DirichletCharacter = field(repr=False, default=None)

    def form(self) -> FormExpr:
        pieces = [e1.form() if e2 is None else Product(e1.form(), e2.form()) for _, e1, e2 in self.terms]
        return mflinear(pieces, [c for c, _, _ in self.terms])

    def verify(self, bound: Optional[int] = None) -> bool:
        bound = bound if bound is not None else sturm_bound(self.level, self.weight)
        lhs = self.target if self.multiplier is None else Product(self.target, self.multiplier)
        return all(simplify(x - y) == 0 for x, y in zip(lhs.coefs(bound), self.form().coefs(bound)))

    def to_json(self) -> Dict:
        return {
            "weight": self.weight,
            "multiplier": None if self.multiplier is None else self.multiplier.prefix(),
            "terms": [{"scalar": coef_json(c), "e1": e1.to_json(), "e2": None if e2 is None else e2.to_json()}
                      for c, e1, e2 in self.terms],
        }


def _multipliers(k: int, allow_none: bool):
    e4, e6 = LevelOneEisenstein(4), LevelOneEisenstein(6)
    if allow_none:
        yield 0, None
    for w, m in ((4, e4), (6, e6), (8, Power(e4, 2)), (10, Product(e4, e6)), (12, Power(e4, 3)), (12, Power(e6, 2)),
                 (12, Delta())):
        if k + w >= 6:
            yield w, m


def _candidates(N: int, k: int, chi: DirichletCharacter):
    if k >= 3:
        for key in weisinger_basis(N, k, chi):
            yield key, None
    cache: Dict[Tuple[int, int], List[EisKey]] = {}

    def keys(kk: int, psi: DirichletCharacter) -> List[EisKey]:
        slot = (kk, psi.label)
        if slot not in cache:
            cache[slot] = weisinger_basis(N, kk, psi)
        return cache[slot]

    chars = sorted(characters_mod(N), key=lambda psi: (psi.order, psi.label))
    for k1 in range(3, k // 2 + 1):
        k2 = k - k1
        for psi in chars:
            if psi.parity != (-1) ** k1:
                continue
            rest = chi * psi.conj()
            if rest.parity != (-1) ** k2:
                continue
            for e1 in keys(k1, psi):
                for e2 in keys(k2, rest):
                    yield e1, e2


def _decompose(N: int, k: int, chi: DirichletCharacter, targets: Sequence[FormExpr],
               multiplier: Optional[FormExpr]) -> Optional[List[ProductDecomposition]]:
    sturm = sturm_bound(N, k)
    goal = mfdim(N, k, chi, 4)
    inc = IncrementalEchelon()
    chosen: List[Tuple[EisKey, Optional[EisKey]]] = []
    rows = []
    for e1, e2 in _candidates(N, k, chi):
        form = e1.form() if e2 is None else Product(e1.form(), e2.form())
        row = form.coefs(sturm)
        if inc.add(row):
            chosen.append((e1, e2))
            rows.append(row)
            if len(chosen) == goal:
                break
    if len(chosen) < goal:
        _log(f"N={N} k={k} {chi!r}: products reach rank {len(chosen)} of {goal}")
        return None
    out = []
    for t in targets:
        lhs = t if multiplier is None else Product(t, multiplier)
        x = solve_left(rows, lhs.coefs(sturm))
        if x is None:
            return None
        terms = [(simplify(c), e1, e2) for c, (e1, e2) in zip(x, chosen) if c != 0]
        out.append(ProductDecomposition(t, terms, multiplier, k, N, chi))
    _log(f"N={N} k={k} {chi!r}: {len(chosen)} products span, {len(targets)} target(s) decomposed")
    return out


def product_decomposition(space: ModularSpace) -> List[ProductDecomposition]:
    """Each basis element (times theta in half-integral weight) as products of two
    Eisenstein series, after a level one multiplier when needed."""
    key = _space_key(space)
    hit = _DECOMPOSITIONS.get(key)
    if hit is not None:
        return hit
    if not space.dim:
        return []
    if isinstance(space.k, Fraction):
        theta = ThetaSeries()
        targets = [Product(b, theta) for b in space.basis]
        k = int(space.k + Fraction(1, 2))
        chi = targets[0].char
    else:
        targets = list(space.basis)
        k = space.k
        chi = space.chi
    if k < 1:
        raise ComputationError("no Eisenstein products in weight < 1")
    out = None
    for w, mult in _multipliers(k, allow_none=k >= 6 or space.code == 3):
        out = _decompose(space.N, k + w, chi, targets, mult)
        if out is not None:
            break
    if out is None:
        raise ComputationError(f"Eisenstein products do not span after lifting {space!r}")
    with _LOCK:
        _DECOMPOSITIONS[key] = out
    return out


# -- slashing ---------------------------------------------------------------------------------------------

def _product_slash(e1: EisKey, e2: Optional[EisKey], gamma: Matrix2, X: Fraction) -> FloatSeries:
    if e2 is None:
        return eisenstein_slash(e1, gamma, X)
    key = (e1, e2, tuple(gamma), X, mpmath.mp.dps)
    hit = _PRODUCTS.get(key)
    if hit is None:
        hit = eisenstein_slash(e1, gamma, X).mul(eisenstein_slash(e2, gamma, X), X)
        with _LOCK:
            _PRODUCTS[key] = hit
    return hit


def decomposition_slash(dec: ProductDecomposition, gamma: Matrix2, X: Fraction) -> FloatSeries:
    # level one multipliers have the same order at every cusp
    shift = 0 if dec.multiplier is None else dec.multiplier.valuation(1) or 0
    acc = FloatSeries()
    for c, e1, e2 in dec.terms:
        acc = acc + _product_slash(e1, e2, gamma, X + shift).scaled(to_complex(c))
    if dec.multiplier is not None:
        E = FloatSeries.from_coefficients([to_complex(x) for x in dec.multiplier.coefs(math.floor(X) + shift + 1)])
        acc = acc.pruned(_eps(), dec.weight).divide(E, X)
    return acc.pruned(_eps(), dec.weight)


def _in_gamma0(N: int, gamma: Matrix2) -> bool:
    return gamma[2] % N == 0


def normalize_half(gamma: Matrix2) -> Matrix2:
    a, b, c, d = gamma
    if c < 0 or (c == 0 and d < 0):
        return (-a, -b, -c, -d)
    return tuple(gamma)


def basis_slash(space: ModularSpace, gamma: Matrix2, X: Fraction) -> List[FloatSeries]:
    """b_i | gamma for every basis element, gamma in SL2(Z)."""
    gamma = tuple(int(x) for x in gamma)
    half = isinstance(space.k, Fraction)
    if half:
        gamma = normalize_half(gamma)
    key = _space_key(space) + (gamma, X, mpmath.mp.dps)
    hit = _BASIS_SLASH.get(key)
    if hit is not None:
        return hit
    top = math.floor(X)
    if half and gamma[2] == 0:
        out = [FloatSeries.from_coefficients([to_complex(c) for c in b.coefs(top)]) for b in space.basis]
    elif not half and (space.k == 0 or _in_gamma0(space.N, gamma)):
        scale = space.chi.complex_value(gamma[3]) if space.k else 1
        out = [FloatSeries.from_coefficients([scale * to_complex(c) for c in b.coefs(top)]) for b in space.basis]
    else:
        decs = product_decomposition(space)
        if half:
            th = theta_slash(gamma, X + 1)
            v = th.valuation() or 0
            out = [decomposition_slash(d, gamma, X + v).divide(th, X) for d in decs]
        else:
            out = [decomposition_slash(d, gamma, X) for d in decs]
    with _LOCK:
        _BASIS_SLASH[key] = out
    _log(f"{space!r} slashed by {list(gamma)} to q^{X}")
    return out


def coordinates_of(space: ModularSpace, f: FormExpr) -> List:
    if isinstance(f, Eigenform) and f.space is space:
        return list(f.vector)
    return space.to_basis(f)


def embedding_values(f: FormExpr, embedding: int = 0):
    """(y, t) used to turn the exact coefficients of f into complex numbers."""
    if isinstance(f, Eigenform):
        roots = f.field.roots()
        if not 0 <= embedding < len(roots):
            raise ValueError(f"embedding index {embedding} out of range 0..{len(roots) - 1}")
        return roots[embedding], None
    return None, None


def slash_series(space: ModularSpace, f: FormExpr, gamma: Matrix2, X: Fraction, embedding: int = 0) -> FloatSeries:
    """f | gamma up to q^X for gamma in SL2(Z), as a float series."""
    gamma = tuple(int(x) for x in gamma)
    y, t = embedding_values(f, embedding)
    half = isinstance(space.k, Fraction)
    if gamma[2] == 0 and (half or gamma[3] == 1):
        return FloatSeries.from_coefficients([to_complex(c, y, t) for c in f.coefs(math.floor(X))])
    if not half and _in_gamma0(space.N, gamma):
        scale = space.chi.complex_value(gamma[3])
        return FloatSeries.from_coefficients([scale * to_complex(c, y, t) for c in f.coefs(math.floor(X))])
    coords = coordinates_of(space, f)
    acc = FloatSeries()
    for x, s in zip(coords, basis_slash(space, gamma, X)):
        if x:
            acc = acc + s.scaled(to_complex(x, y, t))
    return acc


# -- recognition ---------------------------------------------------------------------------------------

def recognize(z, order: int, tol=None, maxcoeff: int = 10 ** 12):
    """An element of Q(zeta_order) within tol of z, found by PSLQ, or None."""
    order = canonical_order(order)
    z = mpmath.mpmathify(z)
    tol = tol if tol is not None else mpmath.mpf(10) ** (-(mpmath.mp.dps * 2 // 3))
    if abs(z) < tol:
        return Fraction(0)
    lam = mpmath.sqrt(2) + mpmath.pi / 7
    basis = [mpmath.expjpi(mpmath.mpf(2 * j) / order) for j in range(phi_of(order))]
    vec = [mpmath.re(z) + lam * mpmath.im(z)] + [-(mpmath.re(b) + lam * mpmath.im(b)) for b in basis]
    rel = mpmath.pslq(vec, tol=tol, maxcoeff=maxcoeff, maxsteps=20000)
    if rel is None or rel[0] == 0:
        return None
    coeffs = [Fraction(r, rel[0]) for r in rel[1:]]
    x = CyclotomicElement(order, coeffs) if order > 1 else coeffs[0]
    value = to_complex(x)
    if abs(value - z) > tol * (1 + abs(z)):
        return None
    return simplify(x)


# -- the public expansion -----------------------------------------------------------------------------

@dataclass
class SlashExpansion:
    """f|gamma = q^alpha sum_{n <= L} a(n) q^(n/w); for a rational gamma the value is
    u^(k/2) (f|gamma')(u tau + v) with (u, v) = affine."""

    gamma: Matrix2
    weight: object
    alpha: Fraction
    w: int
    u: int
    coeffs: List
    exact: bool
    affine: Optional[Tuple[Fraction, Fraction]] = None
    diagnostic: str = ""
    digits: int = 38

    def params(self) -> Tuple[Fraction, int]:
        return self.alpha, self.w

    def _coef_text(self, c):
        if self.exact:
            return c
        if abs(c) < mpmath.mpf(10) ** (-(self.digits - 5)):
            return ZERO
        re, im = mpmath.nstr(mpmath.re(c), self.digits), mpmath.nstr(abs(mpmath.im(c)), self.digits)
        if abs(mpmath.im(c)) < mpmath.mpf(10) ** (-(self.digits - 5)):
            return re
        return f"{re} {'-' if mpmath.im(c) < 0 else '+'} {im}*I"

    def text(self) -> str:
        head = f"(alpha, w, u) = ({self.alpha}, {self.w}, {self.u})"
        if self.exact and canonical_order(self.u) > 1:
            head += f", t = zeta_{canonical_order(self.u)}, {cyclotomic_modulus(self.u)} = 0"
        lines = [head]
        if self.affine is not None:
            lines.append(f"value = u^(k/2) F(u*tau + v) with (u, v) = ({self.affine[0]}, {self.affine[1]})")
        lines.append(format_qexp([self._coef_text(c) for c in self.coeffs]))
        if self.diagnostic:
            lines.append(f"note: {self.diagnostic}")
        return "\n".join(lines)

    def to_json(self) -> Dict:
        if self.exact:
            coeffs = [coef_json(c) for c in self.coeffs]
        else:
            coeffs = [[mpmath.nstr(mpmath.re(c), self.digits), mpmath.nstr(mpmath.im(c), self.digits)]
                      for c in self.coeffs]
        return {
            "gamma": list(self.gamma),
            "alpha": str(self.alpha),
            "w": self.w,
            "u": self.u,
            "exact": self.exact,
            "field": cyclotomic_modulus(self.u) if self.exact else None,
            "affine": None if self.affine is None else [str(x) for x in self.affine],
            "coefficients": coeffs,
            "diagnostic": self.diagnostic,
        }

    def float_coeffs(self) -> List:
        return [to_complex(c) for c in self.coeffs] if self.exact else list(self.coeffs)

    def evaluate(self, tau):
        """Value of the expansion at tau, including the affine substitution."""
        tau = mpmath.mpmathify(tau)
        k = self.weight
        z = tau
        pre = mpmath.mpf(1)
        if self.affine is not None:
            u, v = self.affine
            uu = mpmath.mpf(u.numerator) / u.denominator
            z = uu * tau + mpmath.mpf(v.numerator) / v.denominator
            pre = uu ** (mpmath.mpf(k.numerator if isinstance(k, Fraction) else k) /
                         (2 * (k.denominator if isinstance(k, Fraction) else 1)))
        acc = mpmath.mpc(0)
        for n, c in enumerate(self.float_coeffs()):
            x = mpmath.mpf(self.alpha.numerator) / self.alpha.denominator + mpmath.mpf(n) / self.w
            acc += c * mpmath.expjpi(2 * x * z)
        return pre * acc


def _alpha_from_series(series: FloatSeries, w: int) -> Fraction:
    v = series.valuation()
    if v is None:
        return Fraction(0)
    return v - Fraction(math.floor(v * w), w)


def _float_expansion(space: ModularSpace, f: FormExpr, gamma: Matrix2, L: int, embedding: int):
    N = space.N
    half = isinstance(space.k, Fraction)
    if half:
        gamma = normalize_half(gamma)
    c = gamma[2]
    w = N // math.gcd(N, c * c)
    if half:
        series = slash_series(space, f, gamma, Fraction(L + 1, w), embedding)
        alpha = _alpha_from_series(series.pruned(_eps()), w)
    else:
        alpha, w = slash_params(N, space.k, space.chi, gamma)
        series = slash_series(space, f, gamma, alpha + Fraction(L, w), embedding)
    return gamma, alpha, w, [series.coefficient(alpha + Fraction(n, w)) for n in range(L + 1)]


def mfslashexpansion(space: ModularSpace, f: FormExpr, gamma, L: int, algebraic: bool = False,
                     prec: Optional[int] = None, embedding: int = 0) -> SlashExpansion:
    """Expansion of f|_k gamma with L + 1 coefficients."""
    if L < 0:
        raise ValueError("need L >= 0")
    prec = prec or config.PREC
    gp, affine = rational_reduction(gamma)
    if not space.dim:
        raise ComputationError(f"{space.describe()} is zero-dimensional")
    with mpmath.workdps(prec + GUARD):
        gp2, alpha, w, floats = _float_expansion(space, f, gp, L, embedding)
    u = field_bound(space.N, space.chi.conductor, gp2)
    if isinstance(space.k, Fraction):
        u = lcm(u, 8)
    out = SlashExpansion(gp2, space.k, alpha, w, u, floats, False, affine, digits=prec)
    if not algebraic:
        return out
    if getattr(f, "degree", 1) > 1:
        out.diagnostic = "coefficients lie in a relative extension; returned as floats"
        _warn(out.diagnostic)
        return out
    order = lcm(u, f.field_order())
    with mpmath.workdps(prec + GUARD):
        exact = [recognize(z, order) for z in floats]
    if any(x is None for x in exact):
        out.diagnostic = f"recognition in Q(zeta_{canonical_order(order)}) failed at {prec} digits"
        _warn(out.diagnostic)
        return out
    with mpmath.workdps(2 * prec + GUARD):
        _, _, _, fine = _float_expansion(space, f, gp2, L, embedding)
        tol = mpmath.mpf(10) ** (-(2 * prec - 10))
        stable = all(abs(to_complex(x) - z) <= tol * (1 + abs(z)) for x, z in zip(exact, fine))
    if not stable:
        out.diagnostic = "recognized coefficients are not stable at doubled precision"
        _warn(out.diagnostic)
        return out
    out.coeffs = exact
    out.exact = True
    out.u = canonical_order(order)
    return out


def clear_cache() -> None:
    with _LOCK:
        for cache in (_DECOMPOSITIONS, _FACTORS, _PRODUCTS, _BASIS_SLASH):
            cache.clear()
