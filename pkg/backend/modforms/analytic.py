"""Evaluation, period integrals, Petersson products and Atkin-Lehner operators.

All of these read the expansions of f at the cusps of Gamma0(N). A right coset
Gamma0(N) gamma_c T^m is covered by the expansion at its cusp: for delta = g0 gamma_c T^m
with g0 in Gamma0(N), (f|delta)(z) = chi(d0) (f|gamma_c)(z + m).
"""
from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import binomial
from sympy.core.intfunc import igcdex

from .. import config
from .arith import crt_pair, lcm
from .characters import DirichletCharacter, characters_mod
from .cuspexp import (
    GUARD,
    S_MATRIX,
    FloatSeries,
    Matrix2,
    coordinates_of,
    coset_table,
    embedding_values,
    inv_sl2,
    mfslashexpansion,
    mul2,
    normalize_half,
    rational_reduction,
    recognize,
    slash_series,
    theta_slash,
    to_complex,
)
from .errors import ComputationError, NotInSpaceError, PrecisionError, RecognitionError
from .qseries import FormExpr, Product, ThetaSeries, coef_json, simplify
from .spaces import ModularSpace, mfinit

Point = Union[str, int, Fraction, complex, object]

_LOCK = threading.Lock()
_EVALUATORS: Dict[Tuple, "CosetExpansions"] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[ANALYTIC] {msg}", file=sys.stderr)


# -- points of the completed upper half-plane --------------------------------------------------

INFINITY = "oo"


def parse_point(x: Point) -> Tuple[str, object]:
    """("oo", None), ("cusp", Fraction) or ("point", mpc with Im > 0)."""
    if isinstance(x, str):
        s = x.strip().lower().replace(" ", "")
        if s in ("oo", "inf", "i*oo", "infinity"):
            return INFINITY, None
        if "," in s:
            re_, im_ = s.split(",", 1)
            x = mpmath.mpc(mpmath.mpf(re_), mpmath.mpf(im_))
        else:
            try:
                return "cusp", Fraction(s)
            except ValueError:
                x = mpmath.mpmathify(s.replace("i", "j").replace("*", ""))
    if isinstance(x, (int, Fraction)):
        return "cusp", Fraction(x)
    z = mpmath.mpc(x)
    if z.imag <= 0:
        raise ValueError(f"point {x} is not in the upper half-plane")
    return "point", z


def reduce_point(tau) -> Tuple[object, Matrix2]:
    """(tau', g) with tau' = g tau in the standard fundamental domain, g in SL2(Z)."""
    g: Matrix2 = (1, 0, 0, 1)
    tau = mpmath.mpc(tau)
    for _ in range(10 ** 4):
        n = int(mpmath.nint(tau.real))
        if n:
            tau -= n
            g = mul2((1, -n, 0, 1), g)
        if abs(tau) < 1:
            tau = -1 / tau
            g = mul2(S_MATRIX, g)
        else:
            return tau, g
    raise PrecisionError("reduction to the fundamental domain did not terminate")


def _cusp_matrix(x: Fraction) -> Matrix2:
    """gamma in SL2(Z) with gamma(oo) = x."""
    p, q = x.numerator, x.denominator
    s, t, _ = igcdex(p, q)
    return (p, -int(t), q, int(s))


def series_bound(dps: int, k, imag) -> Fraction:
    """Exponent bound X with the tail of a weight k expansion below 10^-dps at Im tau >= imag."""
    kk = float(k)
    x = (dps + 2 * abs(kk) + 5) * math.log(10) / (2 * math.pi * float(imag)) + 2
    return Fraction(math.ceil(x))


# -- cached expansions at the cusps ------------------------------------------------------------

class CosetExpansions:
    """f|gamma_c for every cusp c of Gamma0(N), to a fixed exponent bound."""

    def __init__(self, space: ModularSpace, f: FormExpr, prec: Optional[int] = None, embedding: int = 0,
                 imag=None):
        if isinstance(space.k, Fraction):
            raise ValueError("coset expansions need integral weight")
        self.space = space
        self.f = f
        self.N, self.k, self.chi = space.N, space.k, space.chi
        self.prec = prec or config.PREC
        self.dps = self.prec + GUARD
        self.embedding = embedding
        self.table = coset_table(self.N)
        self.X = series_bound(self.dps, self.k, imag if imag is not None else math.sqrt(3) / 2)
        self._series: Dict[Tuple[int, int], FloatSeries] = {}
        self._lock = threading.Lock()

    @property
    def r(self) -> int:
        return len(self.table)

    def cusp_series(self, cusp) -> FloatSeries:
        key = (cusp.a, cusp.c)
        hit = self._series.get(key)
        if hit is None:
            with mpmath.workdps(self.dps):
                hit = slash_series(self.space, self.f, cusp.matrix, self.X, self.embedding)
            with self._lock:
                self._series[key] = hit
        return hit

    def expansion_at(self, delta: Matrix2) -> FloatSeries:
        """f|delta for delta in SL2(Z)."""
        j, d0 = self.table.locate(delta)
        cusp, m, _ = self.table.reps[j]
        base = self.cusp_series(cusp).translated(m)
        scale = self.chi.complex_value(d0)
        return base if scale == 1 else base.scaled(scale)

    def constant_terms(self) -> List:
        with mpmath.workdps(self.dps):
            return [(c.text(), self.cusp_series(c).coefficient(Fraction(0))) for c in self.table.cusps]

    def is_cuspidal(self) -> bool:
        if self.space.code in (0, 1, 2):
            return True
        tol = mpmath.mpf(10) ** (-(self.prec - 5))
        return all(abs(c) < tol for _, c in self.constant_terms())

    def evaluate(self, tau) -> Tuple[object, object]:
        """(f(tau), size of the last retained term)."""
        with mpmath.workdps(self.dps):
            tp, g = reduce_point(tau)
            delta = inv_sl2(g)
            s = self.expansion_at(delta)
            a, b, c, d = delta
            value = s.evaluate(tp) * (c * tp + d) ** self.k
            top = max(s.terms) if s.terms else 0
            tail = abs(s.terms[top]) * mpmath.exp(-2 * mpmath.pi * mpmath.mpf(top) / s.den * tp.imag) if s.terms else 0
            return value, tail


def _evaluator(space: ModularSpace, f: FormExpr, prec: int, embedding: int) -> CosetExpansions:
    key = (space.N, str(space.k), space.chi.label, space.code, f.prefix(), prec, embedding)
    hit = _EVALUATORS.get(key)
    if hit is None:
        hit = CosetExpansions(space, f, prec, embedding)
        with _LOCK:
            _EVALUATORS[key] = hit
    return hit


def _theta_value(tau, dps: int):
    """theta(tau) through the expansion of theta at the cusp reached by reduction."""
    with mpmath.workdps(dps):
        tau = mpmath.mpc(tau)
        if tau.imag >= 0.5:
            return mpmath.jtheta(3, 0, mpmath.expjpi(2 * tau))
        tp, g = reduce_point(tau)
        delta = normalize_half(inv_sl2(g))
        a, b, c, d = delta
        s = theta_slash(delta, series_bound(dps, 1, tp.imag))
        return mpmath.sqrt(c * tp + d) * s.evaluate(tp)


def mfeval(space: ModularSpace, f: FormExpr, tau: Point, prec: Optional[int] = None, embedding: int = 0):
    """f(tau) for tau in the upper half-plane; at a cusp, the limit of f there."""
    prec = prec or config.PREC
    kind, x = parse_point(tau)
    if kind == INFINITY:
        y, t = embedding_values(f, embedding)
        with mpmath.workdps(prec + GUARD):
            return to_complex(f.coefs(0)[0], y, t)
    if kind == "cusp":
        exp = mfslashexpansion(space, f, _cusp_matrix(x), 0, prec=prec, embedding=embedding)
        return mpmath.mpc(0) if exp.alpha else exp.coeffs[0]
    if isinstance(space.k, Fraction):
        F = Product(f, ThetaSeries())
        Fspace = mfinit(space.N, F.weight, F.char, 4)
        num = mfeval(Fspace, F, x, prec, embedding)
        with mpmath.workdps(prec + GUARD):
            return num / _theta_value(x, prec + GUARD)
    ev = _evaluator(space, f, prec, embedding)
    value, tail = ev.evaluate(x)
    if tail > mpmath.mpf(10) ** (-prec) * (1 + abs(value)):
        _log(f"tail {mpmath.nstr(tail, 3)} at {prec} digits, retrying with a longer expansion")
        ev = CosetExpansions(space, f, prec, embedding, imag=math.sqrt(3) / 4)
        value, tail = ev.evaluate(x)
        if tail > mpmath.mpf(10) ** (-prec) * (1 + abs(value)):
            raise PrecisionError(f"expansion tail {mpmath.nstr(tail, 3)} exceeds 10^-{prec}")
    return value


# -- period integrals ----------------------------------------------------------------------------

def _poly_product(a: int, b: int, c: int, d: int, n: int, m: int) -> List[int]:
    """Coefficients (lowest first) of (a z + b)^n (c z + d)^m."""
    out = [1]
    for lin, e in (((b, a), n), ((d, c), m)):
        for _ in range(e):
            nxt = [0] * (len(out) + 1)
            for i, x in enumerate(out):
                nxt[i] += x * lin[0]
                nxt[i + 1] += x * lin[1]
            out = nxt
    return out


def _continued_fraction(p: int, q: int) -> List[int]:
    out = []
    while q:
        a = p // q
        out.append(a)
        p, q = q, p - a * q
    return out


def convergent_matrices(x: Fraction) -> List[Matrix2]:
    """g_j in SL2(Z) with g_j(0) = p_{j-1}/q_{j-1}, g_j(oo) = p_j/q_j, p_{-1}/q_{-1} = oo."""
    pp, qp = 1, 0
    ppp, qpp = 0, 1
    out = []
    for a in _continued_fraction(x.numerator, x.denominator):
        p, q = a * pp + ppp, a * qp + qpp
        eps = p * qp - pp * q
        out.append((p, eps * pp, q, eps * qp))
        ppp, qpp, pp, qp = pp, qp, p, q
    return out


class SymbolHandle(CosetExpansions):
    """Modular symbol data of a cusp form: integrals int tau^n (f|beta)(tau) d tau, 0 <= n <= k-2."""

    def __init__(self, space: ModularSpace, f: FormExpr, prec: Optional[int] = None, embedding: int = 0):
        if space.k < 2:
            raise ValueError("modular symbols need integral weight k >= 2")
        super().__init__(space, f, prec, embedding)
        if not self.is_cuspidal():
            raise NotInSpaceError("modular symbols and Petersson products need a cusp form")
        self._cache: Dict[Tuple, List] = {}

    def _vertical(self, series: FloatSeries, g: Matrix2, z0) -> List:
        """[int_{g z0}^{g oo} tau^n h(tau) d tau for n = 0..k-2], series = h|g."""
        k = self.k
        a, b, c, d = g
        polys = [_poly_product(a, b, c, d, n, k - 2 - n) for n in range(k - 1)]
        deg = k - 2
        out = [mpmath.mpc(0)] * (k - 1)
        tol = mpmath.mpf(10) ** (-(self.prec - 5))
        for e, coef in series.terms.items():
            if e <= 0:
                if abs(coef) > tol:
                    raise NotInSpaceError("integral diverges: the form does not vanish at the cusp")
                continue
            C = 2j * mpmath.pi * mpmath.mpf(e) / series.den
            E = mpmath.exp(C * z0)
            I = [-E / C]
            zp = mpmath.mpc(1)
            for m in range(1, deg + 1):
                zp *= z0
                I.append(-zp * E / C - m / C * I[-1])
            for n, P in enumerate(polys):
                acc = mpmath.mpc(0)
                for m, pm in enumerate(P):
                    if pm:
                        acc += pm * I[m]
                out[n] += coef * acc
        return out

    def _int(self, beta: Matrix2, g: Matrix2, z0) -> List:
        return self._vertical(self.expansion_at(mul2(beta, g)), g, z0)

    def _geodesic(self, beta: Matrix2, g: Matrix2) -> List:
        """int_{g 0}^{g oo} for h = f|beta."""
        key = (beta, g)
        hit = self._cache.get(key)
        if hit is None:
            i = mpmath.mpc(0, 1)
            top = self._int(beta, g, i)
            bottom = self._int(beta, mul2(g, S_MATRIX), i)
            hit = [x - y for x, y in zip(top, bottom)]
            self._cache[key] = hit
        return hit

    def to_infinity(self, x: Point, beta: Matrix2 = (1, 0, 0, 1)) -> List:
        """[int_x^{i oo} tau^n (f|beta)(tau) d tau for n = 0..k-2]."""
        kind, val = parse_point(x)
        zero = [mpmath.mpc(0)] * (self.k - 1)
        with mpmath.workdps(self.dps):
            if kind == INFINITY:
                return zero
            if kind == "cusp":
                acc = zero
                for g in convergent_matrices(val):
                    acc = [s - t for s, t in zip(acc, self._geodesic(beta, g))]
                return acc
            tp, g = reduce_point(val)
            delta = inv_sl2(g)
            head = self._int(beta, delta, tp)
            a, b, c, d = delta
            if c == 0:
                return head
            tail = self.to_infinity(Fraction(a, c), beta)
            return [s + t for s, t in zip(head, tail)]

    def symbol(self, a: Point, b: Point, beta: Matrix2 = (1, 0, 0, 1)) -> List:
        with mpmath.workdps(self.dps):
            ja = self.to_infinity(a, beta)
            jb = self.to_infinity(b, beta)
            return [x - y for x, y in zip(ja, jb)]

    def polynomial(self, a: Point, b: Point) -> List:
        """Coefficients (lowest first) of int_a^b (X - tau)^(k-2) f(tau) d tau."""
        w = self.k - 2
        I = self.symbol(a, b)
        return [int(binomial(w, j)) * (-1) ** (w - j) * I[w - j] for j in range(w + 1)]

    def period_polynomial(self) -> List:
        return self.polynomial(Fraction(0), INFINITY)


def mfsymbol(space: ModularSpace, f: FormExpr, prec: Optional[int] = None, embedding: int = 0) -> SymbolHandle:
    return SymbolHandle(space, f, prec, embedding)


def period_integral(handle: SymbolHandle, n: int, a: Point, b: Point):
    """I_n(a, b) = int_a^b tau^n f(tau) d tau along the geodesic, 0 <= n <= k-2."""
    if not 0 <= n <= handle.k - 2:
        raise ValueError(f"period index must lie in 0..{handle.k - 2}, got {n}")
    return handle.symbol(a, b)[n]


def mfsymboleval(handle: SymbolHandle, a: Point, b: Point, X=None):
    """int_a^b (X - tau)^(k-2) f(tau) d tau: coefficients in X (lowest first), or the value at X."""
    coeffs = handle.polynomial(a, b)
    if X is None:
        return coeffs
    with mpmath.workdps(handle.dps):
        return mpmath.polyval(coeffs[::-1], mpmath.mpmathify(X))


def period_polynomial(handle: SymbolHandle) -> List:
    return handle.period_polynomial()


def mfpetersson(fS: SymbolHandle, gS: Optional[SymbolHandle] = None):
    """<f, g> on Gamma0(N) from the period integrals of f|gamma_j and g|gamma_j."""
    gS = gS or fS
    if (fS.N, fS.k) != (gS.N, gS.k):
        raise ValueError("Petersson product of forms on different spaces")
    k, r = fS.k, fS.r
    total = mpmath.mpc(0)
    with mpmath.workdps(max(fS.dps, gS.dps)):
        for _, _, gam in fS.table.reps:
            A = fS.symbol(Fraction(0), INFINITY, gam)
            B = gS.symbol(Fraction(-1), Fraction(1), gam)
            for n in range(k - 1):
                total += (-1) ** n * int(binomial(k - 2, n)) * A[k - 2 - n] * mpmath.conj(B[n])
        value = total / (6 * r * (2j) ** (k - 1))
    _log(f"Petersson product on Gamma0({fS.N}) weight {k} over {r} cosets")
    return value


def gram_matrix(space: ModularSpace, forms: Optional[Sequence[FormExpr]] = None, prec: Optional[int] = None) -> List[List]:
    handles = [SymbolHandle(space, f, prec) for f in (forms if forms is not None else space.basis)]
    return [[mfpetersson(h1, h2) for h2 in handles] for h1 in handles]


# -- Atkin-Lehner ------------------------------------------------------------------------------------

def atkin_matrix(N: int, Q: int) -> Matrix2:
    """W_Q = [Q, 1; -N z, Q w] with Q w = 1 (mod N/Q), determinant Q."""
    R = N // Q
    w = pow(Q, -1, R) if R > 1 else 0
    z = (1 - Q * w) // R
    return (Q, 1, -N * z, Q * w)


def split_character(chi: DirichletCharacter, Q: int) -> Tuple[DirichletCharacter, DirichletCharacter]:
    """(chi_Q, chi_{N/Q}) with chi = chi_Q chi_{N/Q}."""
    N = chi.modulus
    R = N // Q

    def part(M: int, other: int) -> DirichletCharacter:
        for psi in characters_mod(M):
            ok = True
            for x in range(M):
                if math.gcd(x, M) != 1:
                    continue
                y = crt_pair(x, M, 1, other)[0] if other > 1 else x
                if Fraction(chi.exponent(y), chi.order) != Fraction(psi.exponent(x), psi.order):
                    ok = False
                    break
            if ok:
                return psi
        raise ComputationError(f"no character modulo {M} matches {chi!r}")

    return part(Q, R), part(R, Q)


def _gauss_sum(psi: DirichletCharacter):
    f = psi.modulus
    acc = mpmath.mpc(0)
    for x in range(f):
        v = psi.complex_value(x)
        if v:
            acc += v * mpmath.expjpi(mpmath.mpf(2 * x) / f)
    return acc


@dataclass
class AtkinLehner:
    """C F_i|W_Q = sum_j M[j][i] G_j with G the basis of the image space."""

    space: ModularSpace
    image: ModularSpace
    Q: int
    W: Matrix2
    C: object
    C_text: str
    matrix: List[List]
    exact: bool
    diagnostic: str = ""

    def to_json(self) -> Dict:
        return {
            "Q": self.Q,
            "W": list(self.W),
            "C": self.C_text,
            "image": self.image.params(),
            "exact": self.exact,
            "matrix": [[coef_json(x) if self.exact else mpmath.nstr(x, 20) for x in row] for row in self.matrix],
            "diagnostic": self.diagnostic,
        }

    def text(self) -> str:
        lines = [f"W_{self.Q} = {list(self.W)}, C = {self.C_text}", f"image: {self.image.describe()}"]
        for row in self.matrix:
            lines.append("[" + ", ".join(str(simplify(x)) if self.exact else mpmath.nstr(x, 15) for x in row) + "]")
        if self.diagnostic:
            lines.append(f"note: {self.diagnostic}")
        return "\n".join(lines)


def _atkin_columns(init_space: ModularSpace, image: ModularSpace, W: Matrix2, C, dps: int) -> List[List]:
    gp, affine = rational_reduction(W)
    u, v = affine
    k = init_space.k
    top = max(image.pivots) if image.pivots else 0
    X = Fraction(top) / u
    cols = []
    with mpmath.workdps(dps):
        uu = mpmath.mpf(u.numerator) / u.denominator
        pref = C * uu ** (mpmath.mpf(k) / 2)
        for b in init_space.basis:
            s = slash_series(init_space, b, gp, X)
            vals = []
            for p in image.pivots:
                x = Fraction(p) / u
                phase = mpmath.expjpi(2 * mpmath.mpf(x.numerator) * v.numerator / (x.denominator * v.denominator))
                vals.append(pref * s.coefficient(x) * phase)
            cols.append(image.pivot_coordinates(vals))
    return cols


def mfatkininit(space: ModularSpace, Q: int, prec: Optional[int] = None) -> AtkinLehner:
    N = space.N
    if isinstance(space.k, Fraction):
        raise ValueError("Atkin-Lehner operators are implemented in integral weight")
    if Q < 1 or N % Q or math.gcd(Q, N // Q) != 1:
        raise ValueError(f"Q = {Q} must be an exact divisor of N = {N}")
    prec = prec or config.PREC
    chiQ, chiR = split_character(space.chi, Q)
    image_chi = chiQ.conj().induce(N) * chiR.induce(N)
    image = mfinit(N, space.k, image_chi, space.code)
    W = atkin_matrix(N, Q)
    prim = chiQ.primitive()
    with mpmath.workdps(2 * prec + GUARD):
        if prim.modulus == 1:
            C, C_text = mpmath.mpf(1), "1"
        else:
            g = _gauss_sum(prim)
            C = 1 / g
            g2 = recognize(g * g, lcm(prim.order, prim.modulus))
            C_text = f"({g2})^(-1/2)" if g2 is not None else mpmath.nstr(C, 20)
            if isinstance(g2, Fraction) and g2 > 0 and abs(g - mpmath.sqrt(g2)) < mpmath.mpf(10) ** -prec:
                C_text = f"{g2}^(-1/2)"
    if not space.dim:
        return AtkinLehner(space, image, Q, W, C, C_text, [], True)
    dps = prec + GUARD
    cols = _atkin_columns(space, image, W, C, dps)
    M = [[cols[j][i] for j in range(space.dim)] for i in range(image.dim)]
    order = lcm(space.chi.order, image.chi.order)
    with mpmath.workdps(dps):
        exact = [[recognize(z, order) for z in row] for row in M]
    out = AtkinLehner(space, image, Q, W, C, C_text, M, False)
    if any(x is None for row in exact for x in row):
        out.diagnostic = f"entries not recognized in Q(zeta_{order}) at {prec} digits"
        return out
    fine = _atkin_columns(space, image, W, C, 2 * prec + GUARD)
    with mpmath.workdps(2 * prec + GUARD):
        tol = mpmath.mpf(10) ** (-(2 * prec - 10))
        stable = all(abs(to_complex(exact[i][j]) - fine[j][i]) <= tol * (1 + abs(fine[j][i]))
                     for i in range(image.dim) for j in range(space.dim))
    if not stable:
        out.diagnostic = "recognized entries are not stable at doubled precision"
        return out
    out.matrix = exact
    out.exact = True
    _log(f"W_{Q} on {space!r}: exact over Q(zeta_{order})")
    return out


def mfatkin(init: AtkinLehner, f: FormExpr) -> FormExpr:
    """C f|W_Q as an element of the image space."""
    if not init.exact:
        raise RecognitionError("the Atkin-Lehner matrix is only known numerically")
    x = coordinates_of(init.space, f)
    y = [sum((row[j] * x[j] for j in range(len(x)) if x[j]), Fraction(0)) for row in init.matrix]
    return init.image.combination([simplify(c) for c in y])


def clear_cache() -> None:
    with _LOCK:
        _EVALUATORS.clear()
