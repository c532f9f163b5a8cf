"""Exact linear algebra and polynomials over Q, Q(zeta_o) and relative extensions.

Matrices are lists of rows; polynomials are coefficient lists, lowest degree first.
Entries only need +, -, *, / and comparison with 0, so Fraction, CyclotomicElement
and RelativeElement all work.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from sympy import Poly, QQ, Symbol, factor_list, resultant

from .. import config

Matrix = List[List]
_X = Symbol("x")
_T = Symbol("t")


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[LINALG] {msg}", file=sys.stderr)


def _zero_like(x):
    return x * 0 if not isinstance(x, int) else Fraction(0)


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)] if A else []


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    out = []
    for row in A:
        out.append([_dot(row, col) for col in Bt])
    return out


def mat_vec(A: Matrix, v: Sequence) -> List:
    return [_dot(row, v) for row in A]


def _dot(u: Sequence, v: Sequence):
    acc = Fraction(0)
    for a, b in zip(u, v):
        if a != 0 and b != 0:
            acc = a * b + acc
    return acc


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(r, s)] for r, s in zip(A, B)]


def mat_scale(A: Matrix, c) -> Matrix:
    return [[a * c for a in r] for r in A]


def trace(A: Matrix):
    acc = Fraction(0)
    for i, row in enumerate(A):
        acc = row[i] + acc
    return acc


def echelon(rows: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns (pivot = leftmost nonzero column)."""
    M = [list(r) for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r >= len(M):
            break
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c] if not isinstance(M[r][c], int) else Fraction(1, M[r][c])
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(echelon(rows)[1])


class IncrementalEchelon:
    """Row space grown one vector at a time; add() reports whether the rank went up."""

    def __init__(self):
        self.rows: Matrix = []
        self.pivots: List[int] = []

    def reduce(self, v: Sequence) -> List:
        v = list(v)
        for row, c in zip(self.rows, self.pivots):
            if v[c] != 0:
                f = v[c]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def add(self, v: Sequence) -> bool:
        v = self.reduce(v)
        c = next((i for i, x in enumerate(v) if x != 0), None)
        if c is None:
            return False
        inv = 1 / v[c]
        v = [x * inv for x in v]
        for i, row in enumerate(self.rows):
            if row[c] != 0:
                f = row[c]
                self.rows[i] = [a - f * b for a, b in zip(row, v)]
        self.rows.append(v)
        self.pivots.append(c)
        return True

    def __len__(self):
        return len(self.rows)


def solve(A: Matrix, b: Sequence) -> Optional[List]:
    """One solution x of A x = b, or None."""
    m = len(A)
    if m == 0:
        return [] if all(x == 0 for x in b) else None
    n = len(A[0])
    aug = [list(A[i]) + [b[i]] for i in range(m)]
    R, piv = echelon(aug)
    if piv and piv[-1] == n:
        return None
    x = [Fraction(0)] * n
    for row, c in zip(R, piv):
        x[c] = row[n]
    return x


def solve_left(rows: Matrix, v: Sequence) -> Optional[List]:
    """Coefficients x with sum_i x_i rows[i] = v, or None."""
    if not rows:
        return [] if all(x == 0 for x in v) else None
    return solve(transpose(rows), v)


def kernel(A: Matrix, ncols: Optional[int] = None) -> Matrix:
    """Basis of {x : A x = 0}."""
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    if not A:
        return identity(n)
    R, piv = echelon(A)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, c in zip(R, piv):
            x[c] = -row[f]
        basis.append(x)
    return basis


def left_kernel(A: Matrix) -> Matrix:
    """Basis of {y : y A = 0}."""
    return kernel(transpose(A), len(A))


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + identity(n)[i] for i in range(n)]
    R, piv = echelon(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def charpoly(A: Matrix) -> List:
    """Characteristic polynomial det(x - A), monic, lowest degree first (Faddeev-LeVerrier)."""
    n = len(A)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    I = identity(n)
    for k in range(1, n + 1):
        Mk = mat_add(matmul(A, Mk), mat_scale(I, coeffs[n - k + 1]))
        coeffs[n - k] = -trace(matmul(A, Mk)) / k
    return coeffs


# -- polynomials over a field ---------------------------------------------------------------

def poly_trim(p: Sequence) -> List:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_add(p: Sequence, q: Sequence) -> List:
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else 0
        b = q[i] if i < len(q) else 0
        out.append(a + b if not (isinstance(a, int) and isinstance(b, int)) else Fraction(a + b))
    return poly_trim(out)


def poly_scale(p: Sequence, c) -> List:
    return poly_trim([a * c for a in p])


def poly_sub(p: Sequence, q: Sequence) -> List:
    return poly_add(p, poly_scale(q, -1))


def poly_mul(p: Sequence, q: Sequence) -> List:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            if b != 0:
                out[i + j] = a * b + out[i + j]
    return poly_trim(out)


def poly_divmod(p: Sequence, q: Sequence) -> Tuple[List, List]:
    q = poly_trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = poly_trim(p)
    lead_inv = 1 / q[-1] if not isinstance(q[-1], int) else Fraction(1, q[-1])
    quo = [Fraction(0)] * max(len(r) - len(q) + 1, 0)
    while len(r) >= len(q) and r:
        shift = len(r) - len(q)
        c = r[-1] * lead_inv
        quo[shift] = c
        for i, b in enumerate(q):
            r[i + shift] = r[i + shift] - c * b
        r = poly_trim(r[:-1]) if r[-1] == 0 else poly_trim(r)
    return poly_trim(quo), r


def poly_monic(p: Sequence) -> List:
    p = poly_trim(p)
    if not p:
        return p
    inv = 1 / p[-1] if not isinstance(p[-1], int) else Fraction(1, p[-1])
    return [a * inv for a in p]


def poly_gcd(p: Sequence, q: Sequence) -> List:
    a, b = poly_trim(p), poly_trim(q)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return poly_monic(a)


def poly_deriv(p: Sequence) -> List:
    return poly_trim([a * i for i, a in enumerate(p)][1:])


def poly_is_squarefree(p: Sequence) -> bool:
    return len(poly_gcd(p, poly_deriv(p))) <= 1


def poly_eval(p: Sequence, x):
    acc = Fraction(0)
    for a in reversed(list(p)):
        acc = acc * x + a
    return acc


def poly_eval_matrix(p: Sequence, A: Matrix) -> Matrix:
    n = len(A)
    acc = [[Fraction(0)] * n for _ in range(n)]
    I = identity(n)
    for a in reversed(list(p)):
        acc = mat_add(matmul(acc, A), mat_scale(I, a))
    return acc


def poly_power_mod(p: Sequence, e: int, mod: Sequence) -> List:
    out: List = [Fraction(1)]
    base = poly_divmod(p, mod)[1]
    while e:
        if e & 1:
            out = poly_divmod(poly_mul(out, base), mod)[1]
        base = poly_divmod(poly_mul(base, base), mod)[1]
        e >>= 1
    return out


# -- factorization ---------------------------------------------------------------------------

def _cyclo_to_expr(c):
    from .cyclotomic import CyclotomicElement

    if isinstance(c, CyclotomicElement):
        return sum(QQ(x.numerator, x.denominator) * _T ** i for i, x in enumerate(c.coeffs) if x)
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def poly_to_sympy(p: Sequence):
    """Polynomial in x whose coefficients are polynomials in t (t = zeta)."""
    return sum(_cyclo_to_expr(c) * _X ** i for i, c in enumerate(p) if c != 0)


def _sympy_to_poly(expr, o: int) -> List:
    from .cyclotomic import CyclotomicElement

    P = Poly(expr, _X, _T)
    deg = P.degree(_X)
    out: List = [dict() for _ in range(deg + 1)]
    for (ex, et), c in P.terms():
        out[ex][et] = Fraction(int(c.p), int(c.q)) if hasattr(c, "p") else Fraction(str(c))
    if o == 1:
        return [Fraction(sum(d.values())) if d else Fraction(0) for d in out]
    return [CyclotomicElement.from_exponents(o, d) for d in out]


def factor_rational(p: Sequence) -> List[Tuple[List[Fraction], int]]:
    """Monic irreducible factors over Q with multiplicities."""
    expr = poly_to_sympy([Fraction(c) if not hasattr(c, "to_fraction") else c.to_fraction() for c in p])
    _, factors = factor_list(Poly(expr, _X, domain=QQ))
    out = []
    for f, e in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
        out.append((poly_monic(coeffs), e))
    out.sort(key=lambda fe: (len(fe[0]), [str(c) for c in fe[0]]))
    return out


def factor_over_cyclotomic(p: Sequence, o: int) -> List[List]:
    """Irreducible monic factors of a squarefree polynomial over Q(zeta_o) (Trager)."""
    from .cyclotomic import CyclotomicElement, _cyclotomic_poly, canonical_order

    o = canonical_order(o)
    if o == 1:
        return [f for f, _ in factor_rational(p)]
    p = poly_monic([c if isinstance(c, CyclotomicElement) else CyclotomicElement.rational(c) for c in p])
    if len(p) <= 2:
        return [p]
    phi_t = _cyclotomic_poly(o).as_expr()
    base = poly_to_sympy(p)
    for s in range(0, 12):
        shifted = base.subs(_X, _X - s * _T)
        norm = Poly(resultant(phi_t, shifted, _T), _X, domain=QQ)
        if norm.degree() < 1:
            continue
        if Poly(norm.gcd(norm.diff(_X)), _X).degree() > 0:
            continue
        _, facs = factor_list(norm)
        out = []
        for f, _e in facs:
            back = f.as_expr().subs(_X, _X + s * _T)
            g = poly_gcd(p, _sympy_to_poly(back.expand(), o))
            if len(g) > 1:
                out.append(g)
        _log(f"Trager shift {s}: {len(out)} factor(s) of degree {len(p) - 1}")
        out.sort(key=lambda f: (len(f), [str(c) for c in f]))
        return out
    raise ValueError("no squarefree norm found; polynomial is not squarefree")
