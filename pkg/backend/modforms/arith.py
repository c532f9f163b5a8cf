"""Integer arithmetic shared by the engine.

Factorizations, divisor lists and class numbers of imaginary quadratic orders are
cached in one ArithCache; the class-number table is filled in batches (the bound
doubles whenever a lookup falls outside it) and can be persisted to a text file.
"""
from __future__ import annotations

import math
import sys
import threading
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from sympy import divisors as _sympy_divisors
from sympy import factorint
from sympy.ntheory import jacobi_symbol
from sympy.ntheory.modular import solve_congruence

from .. import config

CLASSNO_FILE = "classno_v1.txt"
CLASSNO_HEADER = "# classno v1"


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[ARITH] {msg}", file=sys.stderr)


class ArithCache:
    """Shared tables. Readers never block each other; fills take the lock."""

    def __init__(self, initial_bound: int = config.CLASSNO_INITIAL):
        self._lock = threading.RLock()
        self._factor: Dict[int, Dict[int, int]] = {}
        self._divisors: Dict[int, List[int]] = {}
        self._classno: List[int] = [0]
        self._bound = 0
        self._next_bound = max(16, int(initial_bound))
        # directory -> table bound last read from or written to it
        self._persisted: Dict[str, int] = {}

    # -- factorization / divisors -------------------------------------------------
    def factor(self, n: int) -> Dict[int, int]:
        n = abs(int(n))
        hit = self._factor.get(n)
        if hit is None:
            hit = dict(factorint(n)) if n > 1 else {}
            with self._lock:
                self._factor[n] = hit
        return hit

    def divisors(self, n: int) -> List[int]:
        n = abs(int(n))
        hit = self._divisors.get(n)
        if hit is None:
            hit = list(_sympy_divisors(n)) if n else []
            with self._lock:
                self._divisors[n] = hit
        return hit

    # -- class numbers --------------------------------------------------------------
    @property
    def classno_bound(self) -> int:
        return self._bound

    def class_number(self, d: int) -> Tuple[int, int]:
        if d >= 0 or d % 4 not in (0, 1):
            raise ValueError(f"not a negative discriminant: {d}")
        D = -d
        if D > self._bound:
            with self._lock:
                while D > self._bound:
                    self._fill(max(self._next_bound, D))
        return self._classno[D], units_count(d)

    def _fill(self, bound: int) -> None:
        _log(f"class number table {self._bound} -> {bound}")
        table = [0] * (bound + 1)
        a = 1
        while 3 * a * a <= bound:
            for b in range(-a + 1, a + 1):
                c = a
                while True:
                    D = 4 * a * c - b * b
                    if D > bound:
                        break
                    if (c > a or b >= 0) and math.gcd(math.gcd(a, b), c) == 1:
                        table[D] += 1
                    c += 1
            a += 1
        self._classno = table
        self._bound = bound
        self._next_bound = 2 * bound

    # -- persistence --------------------------------------------------------------
    def save(self, directory: Optional[Path] = None) -> Path:
        directory = Path(directory or config.CACHE_DIR)
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / CLASSNO_FILE
        with self._lock:
            bound = self._bound
            lines = [f"{CLASSNO_HEADER} bound={bound}"]
            for D, h in enumerate(self._classno):
                if h:
                    lines.append(f"{-D} {h} {units_count(-D)}")
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self._persisted[str(directory)] = bound
        _log(f"saved {len(lines) - 1} class numbers to {target}")
        return target

    def load(self, directory: Optional[Path] = None) -> bool:
        source = Path(directory or config.CACHE_DIR) / CLASSNO_FILE
        if not source.exists():
            return False
        text = source.read_text(encoding="utf-8").splitlines()
        if not text or not text[0].startswith(CLASSNO_HEADER):
            _log(f"ignoring {source}: unknown header")
            return False
        try:
            bound = int(text[0].split("bound=", 1)[1])
        except (IndexError, ValueError):
            _log(f"ignoring {source}: no bound in header")
            return False
        table = [0] * (bound + 1)
        for line in text[1:]:
            parts = line.split()
            if len(parts) != 3:
                continue
            d, h = int(parts[0]), int(parts[1])
            if -d <= bound:
                table[-d] = h
        with self._lock:
            if bound > self._bound:
                self._classno = table
                self._bound = bound
                self._next_bound = 2 * bound
        self._persisted[str(source.parent)] = bound
        _log(f"loaded class numbers up to {bound} from {source}")
        return True

    def attach(self, directory: Optional[Path] = None) -> None:
        """Load the table stored in directory, once per directory."""
        directory = Path(directory or config.CACHE_DIR)
        if str(directory) not in self._persisted:
            if not self.load(directory):
                self._persisted[str(directory)] = 0

    def save_if_grown(self, directory: Optional[Path] = None) -> Optional[Path]:
        """Write the table when it has grown past what directory holds."""
        directory = Path(directory or config.CACHE_DIR)
        if self._bound > self._persisted.get(str(directory), 0):
            return self.save(directory)
        return None


CACHE = ArithCache()


def units_count(d: int) -> int:
    if d == -3:
        return 6
    if d == -4:
        return 4
    return 2


def class_number(d: int) -> Tuple[int, int]:
    """(h(d), w(d)) for the imaginary quadratic order of discriminant d."""
    return CACHE.class_number(d)


def factor(n: int) -> Dict[int, int]:
    return CACHE.factor(n)


def divisors(n: int) -> List[int]:
    return CACHE.divisors(n)


def prime_divisors(n: int) -> List[int]:
    return sorted(factor(n))


def euler_phi(n: int) -> int:
    out = 1
    for p, e in factor(n).items():
        out *= (p - 1) * p ** (e - 1)
    return out


def moebius(n: int) -> int:
    f = factor(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factor(n).values())


def squarefree_squarefull_split(N: int) -> Tuple[int, int]:
    """N = N1*N2 with N1 squarefree, N2 squarefull, coprime."""
    n1 = 1
    for p, e in factor(N).items():
        if e == 1:
            n1 *= p
    return n1, N // n1


def gamma0_index(N: int) -> int:
    """[SL2(Z) : Gamma0(N)] = N prod (1 + 1/p)."""
    out = N
    for p in factor(N):
        out = out // p * (p + 1)
    return out


def lcm(*args: int) -> int:
    out = 1
    for a in args:
        out = out * a // math.gcd(out, a)
    return out


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> Optional[Tuple[int, int]]:
    """x = r1 mod m1, x = r2 mod m2 for possibly non-coprime moduli."""
    sol = solve_congruence((r1, m1), (r2, m2))
    if sol is None:
        return None
    return int(sol[0]), int(sol[1])


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D|n) for n >= 0."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi_symbol(D % n, n)


def is_fundamental(D: int) -> bool:
    if D == 1:
        return True
    if D % 4 == 1:
        return is_squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(abs(m))
    return False


def sigma(n: int, k: int) -> int:
    return sum(d ** k for d in divisors(n))


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)
