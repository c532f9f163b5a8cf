"""Dirichlet characters in Conrey numbering.

chi_{N,a}(x) = exp(2 pi i * sum over p^e || N of the local pairing of a and x), where
for odd p the pairing is log_g(a) log_g(x) / phi(p^e) with g the least primitive root
modulo p^2, and for 2^e the logs are taken in the decomposition x = +-5^nu.
Values are stored as exponents modulo the order of the character.
"""
from __future__ import annotations

import math
import sys
import threading
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath
from sympy.ntheory import primitive_root

from .. import config
from .arith import divisors, factor, kronecker, lcm
from .cyclotomic import CyclotomicElement


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[CHARACTERS] {msg}", file=sys.stderr)


_LOCK = threading.Lock()
_LOG_TABLES: Dict[Tuple[int, int], Dict[int, int]] = {}
_CHAR_CACHE: Dict[Tuple[int, int], "DirichletCharacter"] = {}
_INDUCED: Dict[Tuple[int, int, int], int] = {}


def _local_logs(p: int, e: int) -> Dict[int, int]:
    """Discrete logarithms modulo p^e (for p = 2: encoded as 2*nu + (x = 3 mod 4))."""
    key = (p, e)
    hit = _LOG_TABLES.get(key)
    if hit is not None:
        return hit
    q = p ** e
    logs: Dict[int, int] = {}
    if p == 2:
        if e >= 2:
            x = 1
            for nu in range(max(1, q // 4)):
                logs[x] = 2 * nu
                logs[(-x) % q] = 2 * nu + 1
                x = x * 5 % q
        else:
            logs[1] = 0
    else:
        g = int(primitive_root(p * p)) if p > 2 else 1
        x = 1
        for j in range((p - 1) * p ** (e - 1)):
            logs[x] = j
            x = x * g % q
    with _LOCK:
        _LOG_TABLES[key] = logs
    return logs


def _local_phase(p: int, e: int, la: int, lx: int) -> Fraction:
    if p != 2:
        return Fraction(la * lx, (p - 1) * p ** (e - 1))
    if e < 2:
        return Fraction(0)
    eps_a, nu_a = la % 2, la // 2
    eps_x, nu_x = lx % 2, lx // 2
    phase = Fraction(eps_a * eps_x, 2)
    if e >= 3:
        phase += Fraction(nu_a * nu_x, 2 ** (e - 2))
    return phase


class DirichletCharacter:
    """Character modulo N with Conrey label a; chi(x) = 0 when gcd(x, N) > 1."""

    def __new__(cls, modulus: int, label: int = 1):
        modulus = int(modulus)
        if modulus < 1:
            raise ValueError(f"modulus must be positive: {modulus}")
        label = int(label) % modulus if modulus > 1 else 1
        if math.gcd(label, modulus) != 1:
            raise ValueError(f"Conrey label {label} is not coprime to {modulus}")
        key = (modulus, label)
        hit = _CHAR_CACHE.get(key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.modulus = modulus
        self.label = label
        self._build()
        with _LOCK:
            _CHAR_CACHE[key] = self
        return self

    def _build(self) -> None:
        N, a = self.modulus, self.label
        parts = [(p, e, _local_logs(p, e)) for p, e in sorted(factor(N).items())]
        phases: List[Optional[Fraction]] = [None] * N
        for x in range(N):
            if math.gcd(x, N) != 1:
                continue
            ph = Fraction(0)
            for p, e, logs in parts:
                q = p ** e
                ph += _local_phase(p, e, logs[a % q], logs[x % q])
            phases[x] = ph - math.floor(ph)
        order = 1
        for ph in phases:
            if ph is not None:
                order = lcm(order, ph.denominator)
        self.order = order
        self._exps = [None if ph is None else int(ph * order) for ph in phases]
        self._conductor: Optional[int] = None

    # -- evaluation ---------------------------------------------------------------------
    def exponent(self, x: int) -> Optional[int]:
        """e with chi(x) = zeta_order^e, or None when chi(x) = 0."""
        return self._exps[x % self.modulus]

    def __call__(self, x: int) -> CyclotomicElement:
        return self.value(x)

    def value(self, x: int) -> CyclotomicElement:
        e = self._exps[x % self.modulus]
        if e is None:
            return CyclotomicElement.rational(0)
        return CyclotomicElement.zeta(self.order, e)

    def complex_value(self, x: int):
        e = self._exps[x % self.modulus]
        if e is None:
            return mpmath.mpc(0)
        return mpmath.expjpi(mpmath.mpf(2 * e) / self.order)

    # -- invariants -------------------------------------------------------------------------
    @property
    def parity(self) -> int:
        e = self.exponent(-1)
        return 1 if e == 0 else -1

    def is_even(self) -> bool:
        return self.parity == 1

    def is_trivial(self) -> bool:
        return self.order == 1

    @property
    def conductor(self) -> int:
        if self._conductor is None:
            N = self.modulus
            for f in divisors(N):
                if all(self._exps[x] == 0 for x in range(1, N, f) if self._exps[x] is not None):
                    self._conductor = f
                    break
        return self._conductor

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def primitive(self) -> "DirichletCharacter":
        f = self.conductor
        return DirichletCharacter(f, self.label % f if f > 1 else 1)

    def induce(self, M: int) -> "DirichletCharacter":
        """The character modulo M (a multiple of the conductor) with the same primitive part."""
        prim = self.primitive()
        f = prim.modulus
        if M % f:
            raise ValueError(f"conductor {f} does not divide {M}")
        key = (f, prim.label, M)
        b = _INDUCED.get(key)
        if b is None:
            b = self._search_induced(prim, M)
            with _LOCK:
                _INDUCED[key] = b
        return DirichletCharacter(M, b)

    @staticmethod
    def _search_induced(prim: "DirichletCharacter", M: int) -> int:
        f = prim.modulus
        if f == M:
            return prim.label
        units = [x for x in range(1, M) if math.gcd(x, M) == 1] or [0]
        for j in range(M // f):
            b = (prim.label + f * j) % M if M > 1 else 1
            if math.gcd(b, M) != 1:
                continue
            cand = DirichletCharacter(M, b)
            if cand.order != prim.order:
                continue
            if all(cand._exps[x] == prim._exps[x % f] for x in units):
                return b
        raise ValueError(f"no induced character of {prim} modulo {M}")

    # -- group structure --------------------------------------------------------------------
    def power(self, j: int) -> "DirichletCharacter":
        N = self.modulus
        if N == 1:
            return self
        return DirichletCharacter(N, pow(self.label, j, N))

    def conj(self) -> "DirichletCharacter":
        return self.power(-1)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        M = lcm(self.modulus, other.modulus)
        a = self if self.modulus == M else self.induce(M)
        b = other if other.modulus == M else other.induce(M)
        return DirichletCharacter(M, a.label * b.label % M if M > 1 else 1)

    def galois_orbit(self) -> List["DirichletCharacter"]:
        seen = []
        for j in range(1, self.order + 1):
            if math.gcd(j, self.order) == 1:
                c = self.power(j)
                if c not in seen:
                    seen.append(c)
        return seen

    def orbit_representative(self) -> "DirichletCharacter":
        return min(self.galois_orbit(), key=lambda c: c.label)

    def same_primitive(self, other: "DirichletCharacter") -> bool:
        return self.primitive() == other.primitive()

    # -- constructors ------------------------------------------------------------------------
    @classmethod
    def trivial(cls, N: int = 1) -> "DirichletCharacter":
        return cls(N, 1)

    @classmethod
    def kronecker(cls, D: int) -> "DirichletCharacter":
        """(D|.) as a character modulo |D| (D = 0, 1 mod 4) or 4|D|."""
        D = int(D)
        if D == 0:
            raise ValueError("D = 0 does not define a character")
        if D == 1:
            return cls(1, 1)
        m = abs(D) if D % 4 in (0, 1) else 4 * abs(D)
        units = [x for x in range(1, m) if math.gcd(x, m) == 1]
        for a in range(1, m):
            if math.gcd(a, m) != 1 or a * a % m != 1:
                continue
            cand = cls(m, a)
            if all((cand._exps[x] == 0) == (kronecker(D, x) == 1) for x in units):
                return cand
        raise ValueError(f"no character modulo {m} matches ({D}|.)")

    # -- identity / display -------------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.modulus == other.modulus and self.label == other.label

    def __hash__(self):
        return hash((self.modulus, self.label))

    def __repr__(self):
        return f"Mod({self.label}, {self.modulus})"

    __str__ = __repr__

    def to_json(self) -> Dict:
        return {"modulus": self.modulus, "label": self.label, "order": self.order,
                "conductor": self.conductor, "parity": self.parity}


def char_value(chi: DirichletCharacter, x: int) -> CyclotomicElement:
    return chi.value(x)


def characters_mod(N: int) -> List[DirichletCharacter]:
    return [DirichletCharacter(N, a) for a in range(1, N + 1) if math.gcd(a, N) == 1] if N > 1 else [DirichletCharacter(1, 1)]


def primitive_character(chi: DirichletCharacter) -> DirichletCharacter:
    return chi.primitive()


def equivalent_class_reps(N: int, primitive_only: bool = False, parity: Optional[int] = None) -> List[DirichletCharacter]:
    """One character per Galois orbit modulo N (smallest Conrey label), sorted by (order, label)."""
    seen = set()
    reps = []
    for chi in characters_mod(N):
        if chi in seen:
            continue
        orbit = chi.galois_orbit()
        seen.update(orbit)
        rep = min(orbit, key=lambda c: c.label)
        if primitive_only and not rep.is_primitive():
            continue
        if parity is not None and rep.parity != parity:
            continue
        reps.append(rep)
    reps.sort(key=lambda c: (c.order, c.label))
    _log(f"{len(reps)} orbit(s) modulo {N}")
    return reps


def primitive_characters(f: int) -> List[DirichletCharacter]:
    return [chi for chi in characters_mod(f) if chi.conductor == f]


def quadratic_character_mod(N: int, D: int) -> DirichletCharacter:
    """The real character modulo N agreeing with (D|x) on units, when it is one."""
    units = [x for x in range(1, N) if math.gcd(x, N) == 1]
    for a in range(1, max(N, 2)):
        if math.gcd(a, N) != 1 or (a * a) % N != 1 % N:
            continue
        cand = DirichletCharacter(N, a)
        if all((cand.exponent(x) == 0) == (kronecker(D, x) == 1) for x in units):
            return cand
    raise ValueError(f"({D}|.) is not a character modulo {N}")
