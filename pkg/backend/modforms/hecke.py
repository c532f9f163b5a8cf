"""Hecke operators on spaces, splitting into eigenform orbits, embeddings and searches.

A new space is split by characteristic polynomials of T(p), p prime to the level,
falling back to small integer combinations of them. Each irreducible block gives one
Galois orbit whose field is K[y]/(P), K = Q(chi), P the block's characteristic
polynomial; the eigenvector is h(R, y) e1 with h(x, y) = (P(x) - P(y)) / (x - y).
"""
from __future__ import annotations

import sys
import threading
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import primerange

from .. import config
from .arith import is_fundamental
from .characters import DirichletCharacter
from .cyclotomic import CyclotomicElement, canonical_order
from .errors import SplittingError
from .linalg import (
    charpoly,
    factor_over_cyclotomic,
    factor_rational,
    identity,
    kernel,
    mat_add,
    mat_scale,
    mat_vec,
    poly_deriv,
    poly_divmod,
    poly_eval,
    poly_eval_matrix,
    poly_gcd,
    poly_monic,
    poly_mul,
    rank,
    solve_left,
)
from .qseries import ZERO, FormExpr, HeckeImage, char_token, format_qexp, parse_char, register, simplify
from .relfield import RelativeField
from .spaces import ModularSpace, mfinit, space_code

_LOCK = threading.Lock()
_MATRICES: Dict[Tuple, List[List]] = {}
_EIGEN: Dict[Tuple, List["Eigenform"]] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[HECKE] {msg}", file=sys.stderr)


def _space_key(space: ModularSpace) -> Tuple:
    return (space.N, str(space.k), space.chi.label, space.code)


# -- Hecke action ----------------------------------------------------------------------------

def hecke_apply(space: Union[ModularSpace, int], f: FormExpr, n: int,
                chi: Optional[DirichletCharacter] = None) -> FormExpr:
    """T_N(n) f, with N and chi taken from the space (or given explicitly)."""
    if isinstance(space, ModularSpace):
        N, chi = space.N, space.chi
    else:
        N = int(space)
        chi = chi if chi is not None else f.char
    if n == 1:
        return f
    return HeckeImage(f, n, N, chi)


def mfheckemat(space: ModularSpace, n: int) -> List[List]:
    """Matrix of T(n) on space.basis; column j holds the coordinates of T(n) b_j."""
    if isinstance(space.k, Fraction):
        raise ValueError("Hecke matrices are only available in integral weight")
    if n < 1:
        raise ValueError(f"Hecke index must be positive, got {n}")
    key = _space_key(space) + (n,)
    hit = _MATRICES.get(key)
    if hit is not None:
        return hit
    if n == 1:
        mat = identity(space.dim)
    else:
        cols = [space.coordinates(HeckeImage(b, n, space.N, space.chi).coefs(space.sturm)) for b in space.basis]
        mat = [[cols[j][i] for j in range(space.dim)] for i in range(space.dim)]
    with _LOCK:
        _MATRICES[key] = mat
    _log(f"T({n}) on {space!r}")
    return mat


# -- splitting ---------------------------------------------------------------------------------

def _restrict(A: List[List], W: List[List]) -> List[List]:
    """Matrix of A on the A-stable span of the column vectors W (given as rows)."""
    d = len(W)
    cols = []
    for w in W:
        x = solve_left(W, mat_vec(A, w))
        if x is None:
            raise SplittingError("subspace is not stable under the Hecke operator")
        cols.append(x)
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def _factor(P: List, o: int) -> List[Tuple[List, int]]:
    """Monic irreducible factors of P over Q(zeta_o) with multiplicities."""
    if o == 1:
        return factor_rational(P)
    square = poly_gcd(P, poly_deriv(P))
    radical = poly_divmod(P, square)[0] if len(square) > 1 else P
    out = []
    for g in factor_over_cyclotomic(radical, o):
        e, rest = 0, P
        while True:
            q, r = poly_divmod(rest, g)
            if any(c != 0 for c in r):
                break
            e, rest = e + 1, q
        out.append((g, e))
    return out


def _operators(space: ModularSpace):
    """(label, matrix) for T(p), p prime to N, then combinations T(p) + c T(p')."""
    primes = [p for p in primerange(2, 1000) if space.N % p][: config.SPLIT_PRIMES]
    for p in primes:
        yield f"T({p})", mfheckemat(space, p)
    bound = config.SPLIT_COEFF_BOUND
    coeffs = [c for c in range(1, bound + 1)] + [-c for c in range(1, bound + 1)]
    for p, q in combinations(primes, 2):
        for c in coeffs:
            A = mat_add(mfheckemat(space, p), mat_scale(mfheckemat(space, q), c))
            yield f"T({p}) + {c}*T({q})" if c != 1 else f"T({p}) + T({q})", A
    for p, q, r in combinations(primes[:4], 3):
        for c1, c2 in product(coeffs, repeat=2):
            A = mat_add(mfheckemat(space, p), mat_add(mat_scale(mfheckemat(space, q), c1),
                                                     mat_scale(mfheckemat(space, r), c2)))
            yield f"T({p}) + {c1}*T({q}) + {c2}*T({r})", A


def _span(W: List[List], xs: List[List]) -> List[List]:
    return [[sum((x[s] * W[s][i] for s in range(len(W)) if x[s] != 0), ZERO) for i in range(len(W[0]))] for x in xs]


def split_space(space: ModularSpace) -> List[Tuple[List[List], List[List], List, str]]:
    """Irreducible Hecke blocks as (vectors, restricted matrix, charpoly, operator label)."""
    if not space.dim:
        return []
    o = canonical_order(space.chi.order)
    pending = [identity(space.dim)]
    done = []
    for label, A in _operators(space):
        still = []
        for W in pending:
            R = _restrict(A, W)
            for g, e in _factor(charpoly(R), o):
                piece = kernel(poly_eval_matrix(_power(g, e), R))
                Wg = _span(W, piece)
                if e == 1:
                    Rg = _restrict(A, Wg)
                    done.append((Wg, Rg, poly_monic(g), label))
                else:
                    still.append(Wg)
        pending = still
        if not pending:
            _log(f"{space!r} split into {len(done)} orbit(s) using up to {label}")
            return done
    raise SplittingError(f"could not split {space!r}: {len(pending)} block(s) with repeated eigenvalues")


def _power(g: List, e: int) -> List:
    out = [Fraction(1)]
    for _ in range(e):
        out = poly_mul(out, g)
    return out


# -- eigenforms -----------------------------------------------------------------------------------

@register("eigen")
class Eigenform(FormExpr):
    """A normalized eigenform sum_i u_i b_i with u_i in K[y]/(P)."""

    sparse = True

    def __init__(self, space: ModularSpace, index: int, field: RelativeField, vector: Sequence, operator: str = ""):
        super().__init__(space.N, space.k, space.chi)
        self.space = space
        self.index = index
        self.field = field
        self.vector = [simplify(c) for c in vector]
        self.operator = operator

    def _values(self, indices):
        acc = [ZERO] * len(indices)
        for b, u in zip(self.space.basis, self.vector):
            if not u:
                continue
            for j, v in enumerate(b.values(indices)):
                if v:
                    acc[j] = acc[j] + u * v
        return acc

    @property
    def degree(self) -> int:
        return self.field.degree

    def is_rational(self) -> bool:
        return self.field.degree == 1 and self.field.base_order == 1

    def field_order(self):
        return self.field.base_order

    def field_text(self) -> str:
        return self.field.text()

    def params(self):
        out = super().params()
        out["eigenfield"] = self.field.text()
        return out

    def prefix_args(self):
        s = self.space
        return [str(s.N), str(s.k), char_token(s.chi), str(s.code), str(self.index)]

    @classmethod
    def from_prefix(cls, args, build):
        space = mfinit(int(args[0]), Fraction(args[1]), parse_char(args[2]), int(args[3]))
        return mfeigenbasis(space)[int(args[4])]

    def to_json(self, L: int = 10) -> Dict:
        return {"field": self.field.to_json(), "coefficients": [str(c) for c in self.coefs(L)],
                "operator": self.operator}


def _eigenvector(space: ModularSpace, W: List[List], R: List[List], P: List, field: RelativeField) -> List:
    d = len(W)
    if d == 1:
        return list(W[0])
    y = field.gen()
    e = [Fraction(int(i == 0)) for i in range(d)]
    powers = [e]
    for _ in range(d - 1):
        powers.append(mat_vec(R, powers[-1]))
    v = [ZERO] * d
    for j in range(d):
        c = ZERO
        for i in range(j + 1, d + 1):
            if P[i] != 0:
                c = c + P[i] * y ** (i - 1 - j)
        for s in range(d):
            if powers[j][s] != 0:
                v[s] = v[s] + c * powers[j][s]
    return [sum((v[s] * W[s][i] for s in range(d) if W[s][i] != 0), ZERO) for i in range(space.dim)]


def _normalize(space: ModularSpace, u: List) -> List:
    for n in range(1, space.sturm + 1):
        a = ZERO
        for b, c in zip(space.basis, u):
            if c:
                v = b.values([n])[0]
                if v:
                    a = a + c * v
        if a:
            if n > 1:
                _log(f"eigenvector has a(1) = 0; normalized at a({n})")
            inv = 1 / a
            return [simplify(c * inv) for c in u]
    raise SplittingError("eigenvector has no nonzero coefficient up to the Sturm bound")


def mfeigenbasis(space: ModularSpace) -> List[Eigenform]:
    """One normalized eigenform per Galois orbit, sorted by field degree then polynomial."""
    key = _space_key(space)
    hit = _EIGEN.get(key)
    if hit is not None:
        return hit
    o = canonical_order(space.chi.order)
    blocks = split_space(space)
    blocks.sort(key=lambda blk: (len(blk[0]), [str(c) for c in blk[2]]))
    out = []
    for i, (W, R, P, label) in enumerate(blocks):
        field = RelativeField(o, P if len(W) > 1 else [Fraction(0), Fraction(1)])
        u = _normalize(space, _eigenvector(space, W, R, P, field))
        out.append(Eigenform(space, i, field, u, label))
    with _LOCK:
        _EIGEN[key] = out
    return out


def mffields(space: ModularSpace) -> List[RelativeField]:
    return [f.field for f in mfeigenbasis(space)]


def mfembed(f: Eigenform, L: int = 10) -> List[List]:
    """a(0..L) under each embedding: t fixed at exp(2 pi i / o), y running over the roots of P."""
    coeffs = f.coefs(L)
    t = mpmath.expjpi(mpmath.mpf(2) / f.field.base_order) if f.field.base_order > 1 else mpmath.mpf(1)
    if f.field.degree == 1:
        roots = [mpmath.mpf(0)]
    else:
        roots = f.field.roots(t)
    out = []
    for y in roots:
        out.append([_embed(c, y, t) for c in coeffs])
    return out


def _embed(c, y, t):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, CyclotomicElement):
        return c.embed(t)
    return c.embed(y, t)


# -- searches -----------------------------------------------------------------------------------

def _eigenvalue_possible(space: ModularSpace, p: int, value) -> bool:
    P = charpoly(mfheckemat(space, p))
    return poly_eval(P, Fraction(value)) == 0


def mfeigensearch(levels: Sequence[int], k: int, constraints: Sequence[Tuple[int, int]],
                  chi: Optional[DirichletCharacter] = None) -> List[Eigenform]:
    """Rational newforms of weight k on the given levels with a(n) = v for every (n, v)."""
    found = []
    for N in levels:
        psi = chi.induce(N) if chi is not None else DirichletCharacter.trivial(N)
        if psi.parity != (-1) ** k:
            continue
        space = mfinit(N, k, psi, 0)
        if not space.dim:
            continue
        if not all(_eigenvalue_possible(space, n, v) for n, v in constraints):
            continue
        for f in mfeigenbasis(space):
            if not f.is_rational():
                continue
            if all(f.values([n])[0] == v for n, v in constraints):
                found.append(f)
        _log(f"level {N}: {len(found)} match(es) so far")
    return found


def search_discriminants(N: int, k: int) -> List[int]:
    """Fundamental D with |D| | N and sign matching the parity of k, by increasing |D|."""
    sign = 1 if k % 2 == 0 else -1
    out = [1] if sign == 1 else []
    for m in range(3, N + 1):
        if N % m == 0 and is_fundamental(sign * m):
            out.append(sign * m)
    return out


def mfsearch(levels: Sequence[int], k: int, prefix: Sequence, code: Union[int, str] = 1) -> List[FormExpr]:
    """Forms whose expansion starts with prefix = [a(0), a(1), ...], one per (level, D)."""
    code = space_code(code)
    prefix = [Fraction(c) if not isinstance(c, (Fraction, CyclotomicElement)) else c for c in prefix]
    L = len(prefix) - 1
    found: List[FormExpr] = []
    hits: Dict[int, List[int]] = {}
    for N in sorted(levels):
        for D in search_discriminants(N, k):
            if any(N % M == 0 for M in hits.get(D, [])):
                continue
            psi = DirichletCharacter.kronecker(D).induce(N) if D != 1 else DirichletCharacter.trivial(N)
            space = mfinit(N, k, psi, code)
            if not space.dim:
                continue
            rows = [b.coefs(L) for b in space.basis]
            if rank(rows) < space.dim:
                continue
            x = solve_left(rows, prefix)
            if x is None:
                continue
            form = space.combination(x)
            _log(f"match at level {N}, D = {D}: {format_qexp(form.coefs(L + 2))}")
            found.append(form)
            hits.setdefault(D, []).append(N)
    return found
