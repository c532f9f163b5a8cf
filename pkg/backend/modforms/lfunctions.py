"""L-functions of modular forms on Gamma0(N), eigenforms or not.

Lambda(s) = (sqrt(N)/2pi)^s Gamma(s) L(f, s) is split at y = 1 in its Mellin integral.
With g = f|W_N, x_n = 2 pi n / sqrt(N):

    Lambda(s) = sum a_n x_n^-s Gamma(s, x_n) + i^k sum b_n x_n^(s-k) Gamma(k-s, x_n)
                - a_0 / s - i^k b_0 / (k - s)

so the dual series b_n replaces the root number and forms with constant terms are covered.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import mpmath

from .. import config
from .cuspexp import GUARD, embedding_values, rational_reduction, recognize, slash_series, to_complex
from .eisenstein import EisKey
from .errors import ComputationError, PrecisionError
from .qseries import FormExpr
from .spaces import ModularSpace

FRICKE_DIGITS_PER_HEIGHT = 0.68


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[LFUN] {msg}", file=sys.stderr)


def fricke_matrix(N: int):
    return (0, -1, N, 0)


def _terms_needed(N: int, k: int, dps: int) -> int:
    return int(math.sqrt(N) * (dps * math.log(10) + 2 * k + 10) / (2 * math.pi)) + 10


class LFunctionHandle:
    """Coefficients of f at infinity and of f|W_N, ready for Lambda(s) with |Im s| <= tmax."""

    def __init__(self, space: ModularSpace, f: FormExpr, prec: Optional[int] = None, embedding: int = 0,
                 tmax: float = 30):
        if isinstance(space.k, Fraction):
            raise ValueError("L-functions are implemented in integral weight")
        if space.k < 1:
            raise ValueError("L-functions need weight k >= 1")
        self.space = space
        self.f = f
        self.embedding = embedding
        self.N, self.k = space.N, int(space.k)
        self.prec = prec or config.PREC
        self.tmax = float(tmax)
        self.dps = self.prec + GUARD + int(math.ceil(FRICKE_DIGITS_PER_HEIGHT * self.tmax))
        self.nmax = _terms_needed(self.N, self.k, self.dps)
        with mpmath.workdps(self.dps):
            self.a = self._direct()
            self.b = self._dual()
            self.root_number = self._root_number()
        _log(f"{space!r}: {self.nmax} terms at {self.dps} digits, "
             f"root number {'none' if self.root_number is None else mpmath.nstr(self.root_number, 10)}")

    def _direct(self) -> List:
        y, t = embedding_values(self.f, self.embedding)
        return [to_complex(c, y, t) for c in self.f.coefs(self.nmax)]

    def _dual(self) -> List:
        """b_n of g = f|W_N through g(tau) = N^(k/2) (f|gamma')(N tau)."""
        N, k = self.N, self.k
        if N == 1:
            return list(self.a)
        gp, affine = rational_reduction(fricke_matrix(N))
        u, v = affine
        series = slash_series(self.space, self.f, gp, Fraction(self.nmax) / u, self.embedding)
        scale = mpmath.mpf(u.numerator) / u.denominator
        scale = scale ** (mpmath.mpf(k) / 2)
        out = []
        for n in range(self.nmax + 1):
            x = Fraction(n) / u
            phase = mpmath.expjpi(2 * mpmath.mpf(x.numerator) * v.numerator / (x.denominator * v.denominator))
            out.append(scale * phase * series.coefficient(x))
        return out

    def _root_number(self):
        """epsilon with g = (epsilon / i^k) conj(f), or None when no such epsilon exists."""
        tol = mpmath.mpf(10) ** (-(self.prec - 5))
        ratio = None
        for an, bn in zip(self.a, self.b):
            ca = mpmath.conj(an)
            if abs(ca) < tol:
                if abs(bn) > tol * (1 + abs(bn)):
                    return None
                continue
            if ratio is None:
                ratio = bn / ca
            elif abs(bn - ratio * ca) > tol * (1 + abs(bn)):
                return None
        if ratio is None:
            return None
        return mpmath.power(1j, self.k) * ratio

    @property
    def self_dual(self) -> bool:
        return self.root_number is not None

    def _check_height(self, s) -> None:
        if abs(mpmath.im(s)) > self.tmax + 1:
            raise PrecisionError(f"|Im s| = {mpmath.nstr(abs(mpmath.im(s)), 5)} exceeds the prepared height {self.tmax}")

    def gamma_factor(self, s):
        return (mpmath.sqrt(self.N) / (2 * mpmath.pi)) ** s * mpmath.gamma(s)

    def completed(self, s):
        """Lambda(s)."""
        with mpmath.workdps(self.dps):
            s = mpmath.mpmathify(s)
            self._check_height(s)
            k = self.k
            ik = mpmath.power(1j, k)
            step = 2 * mpmath.pi / mpmath.sqrt(self.N)
            acc = mpmath.mpc(0)
            for n in range(1, self.nmax + 1):
                x = step * n
                an, bn = self.a[n], self.b[n]
                if an:
                    acc += an * x ** (-s) * mpmath.gammainc(s, x)
                if bn:
                    acc += ik * bn * x ** (s - k) * mpmath.gammainc(k - s, x)
            if self.a[0]:
                acc -= self.a[0] / s
            if self.b[0]:
                acc -= ik * self.b[0] / (k - s)
            return acc

    def dual_completed(self, s):
        """Lambda_g(s) = i^-k Lambda_f(k - s)."""
        with mpmath.workdps(self.dps):
            return self.completed(self.k - mpmath.mpmathify(s)) / mpmath.power(1j, self.k)

    def value(self, s):
        """L(f, s)."""
        with mpmath.workdps(self.dps):
            s = mpmath.mpmathify(s)
            lam = self.completed(s)
            return lam * (mpmath.sqrt(self.N) / (2 * mpmath.pi)) ** (-s) * mpmath.rgamma(s)

    def rotated(self, t):
        """epsilon^(-1/2) Lambda(k/2 + i t) / |gamma factor|; real when the handle is self-dual."""
        if self.root_number is None:
            raise ComputationError("the Hardy function needs f|W_N proportional to the conjugate of f")
        with mpmath.workdps(self.dps):
            s = mpmath.mpc(mpmath.mpf(self.k) / 2, t)
            return self.completed(s) / mpmath.sqrt(self.root_number) / abs(self.gamma_factor(s))

    def hardy(self, t):
        return mpmath.re(self.rotated(t))


def lfunmf(space: ModularSpace, f: FormExpr, prec: Optional[int] = None, embedding: int = 0,
           tmax: float = 30) -> LFunctionHandle:
    return LFunctionHandle(space, f, prec, embedding, tmax)


def lfun_eval(handle: LFunctionHandle, s):
    return handle.value(s)


def functional_equation_residual(handle: LFunctionHandle, s):
    """|Lambda(s) - epsilon conj(Lambda(k - conj(s)))|, meaningful for a self-dual handle."""
    if handle.root_number is None:
        raise ComputationError("no root number: the L-function is not self-dual")
    with mpmath.workdps(handle.dps):
        s = mpmath.mpmathify(s)
        lhs = handle.completed(s)
        rhs = handle.root_number * mpmath.conj(handle.completed(handle.k - mpmath.conj(s)))
        return abs(lhs - rhs)


def hardy(handle: LFunctionHandle, t):
    return handle.hardy(t)


def hardy_table(handle: LFunctionHandle, t0, t1, step) -> List[tuple]:
    """[(t, Z(t))] on t0, t0 + step, ..., t1."""
    if step <= 0:
        raise ValueError("step must be positive")
    out = []
    n = int(math.floor((float(t1) - float(t0)) / float(step) + 1e-9))
    for j in range(n + 1):
        t = mpmath.mpf(t0) + j * mpmath.mpf(step)
        out.append((t, handle.hardy(t)))
    return out


def _refine(handle: LFunctionHandle, t0, t1, tol):
    try:
        root = mpmath.findroot(handle.hardy, (t0, t1), solver="anderson", tol=tol)
        if t0 <= root <= t1:
            return root
    except (ValueError, ZeroDivisionError):
        pass
    return mpmath.findroot(handle.hardy, (t0, t1), solver="bisect", tol=tol, verify=False)


def lfun_zeros(handle: LFunctionHandle, T, step=0.25) -> List:
    """Zeros of L(f, s) on the critical line with 0 < Im s <= T, from sign changes of Z."""
    if T > handle.tmax:
        raise PrecisionError(f"height {T} exceeds the prepared height {handle.tmax}")
    zeros = []
    with mpmath.workdps(handle.dps):
        tol = mpmath.mpf(10) ** (-handle.prec)
        grid = hardy_table(handle, step, T, step)
        for (t0, z0), (t1, z1) in zip(grid, grid[1:]):
            if z0 == 0:
                zeros.append(t0)
            elif z1 != 0 and z0 * z1 < 0:
                zeros.append(_refine(handle, t0, t1, tol))
        if grid and grid[-1][1] == 0:
            zeros.append(grid[-1][0])
    _log(f"{len(zeros)} zeros up to height {T}")
    return zeros


# -- special values --------------------------------------------------------------------------------

@dataclass
class SpecialValues:
    """Lambda(s) for s = 1..k-1 as rational multiples of one period per parity of s:
    Lambda(s) = ratio * omega / 2."""

    even: List
    odd: List
    omega_plus: object
    omega_minus: object
    exact: bool
    diagnostic: str = ""
    digits: int = 38

    def _item(self, x):
        return str(x) if self.exact else mpmath.nstr(x, self.digits)

    def _omega(self, w):
        return None if w is None else mpmath.nstr(w, self.digits)

    def to_json(self) -> Dict:
        return {
            "even": [self._item(x) for x in self.even],
            "odd": [self._item(x) for x in self.odd],
            "omega_plus": self._omega(self.omega_plus),
            "omega_minus": self._omega(self.omega_minus),
            "exact": self.exact,
            "diagnostic": self.diagnostic,
        }

    def text(self) -> str:
        lines = ["[" + ", ".join(self._item(x) for x in self.odd) + "]",
                 "[" + ", ".join(self._item(x) for x in self.even) + "]"]
        for w in (self.omega_plus, self.omega_minus):
            lines.append(self._omega(w) or "-")
        if self.diagnostic:
            lines.append(f"note: {self.diagnostic}")
        return "\n".join(lines)


def _real_if_close(z):
    return mpmath.re(z) if abs(mpmath.im(z)) <= mpmath.eps ** 0.5 * (1 + abs(z)) else z


def _normalize(values: Dict[int, object], points: Sequence[int]):
    """Ratios to the value at the first s >= 2 of the list, and twice that value."""
    if not points:
        return [], None
    ref = next((s for s in points if s >= 2), points[0])
    base = _real_if_close(values[ref])
    return [_real_if_close(values[s] / base) for s in points], 2 * base


def lfun_special(handle: LFunctionHandle) -> SpecialValues:
    k = handle.k
    if k < 2:
        raise ValueError("special values need weight k >= 2")
    with mpmath.workdps(handle.dps):
        values = {s: handle.completed(s) for s in range(1, k)}
        even, omega_plus = _normalize(values, [s for s in range(1, k) if s % 2 == 0])
        odd, omega_minus = _normalize(values, [s for s in range(1, k) if s % 2 == 1])
        out = SpecialValues(even, odd, omega_plus, omega_minus, False, digits=handle.prec)
        exact_even = [recognize(z, 1) for z in even]
        exact_odd = [recognize(z, 1) for z in odd]
    if any(x is None for x in exact_even + exact_odd):
        out.diagnostic = "ratios are not rational at working precision"
        return out
    out.even, out.odd, out.exact = exact_even, exact_odd, True
    return out


# -- Eisenstein series -------------------------------------------------------------------------------

def _dirichlet_l(chi, s):
    if chi.modulus == 1:
        return mpmath.zeta(s)
    return mpmath.dirichlet(s, [chi.complex_value(x) for x in range(chi.modulus)])


def eisenstein_lvalue(key: EisKey, s, prec: Optional[int] = None):
    """L(G_k(chi1, chi2; m tau), s) = m^-s L(chi1, s) L(chi2, s - k + 1)."""
    prec = prec or config.PREC
    with mpmath.workdps(prec + GUARD):
        s = mpmath.mpmathify(s)
        base = _dirichlet_l(key.chi1.primitive(), s) * _dirichlet_l(key.chi2.primitive(), s - key.k + 1)
        if key.weight_two_trivial:
            return base * (mpmath.mpf(key.m) ** (-s) - mpmath.mpf(1) / key.m)
        return base * mpmath.mpf(key.m) ** (-s)
