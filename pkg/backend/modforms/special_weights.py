"""Half-integral weight and weight 1.

Half-integral weight k = m + 1/2 on Gamma0(N): theta and theta(2 tau) have no common zero,
so f is determined by the pair g1 = f theta, g2 = f theta(2 tau) in
M_{m+1}(Gamma0(N'), chi') subject to g1 theta(2 tau) = g2 theta, and f = g1 / theta.

Weight 1: every f in S_1(N, chi) satisfies f E in S_2(Gamma0(N)) for each Eisenstein E in
M_1(N, conj chi). The candidate space cut out by these conditions may contain meromorphic
quotients; its largest subspace stable under one Hecke operator T(p), p prime to N, is
exactly S_1(N, chi).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from sympy import primerange

from .. import config
from .characters import DirichletCharacter
from .cuspexp import cusps, theta_order
from .eisenstein import weisinger_basis, weisinger_basis_rational
from .errors import ComputationError, NotInSpaceError, ParityError
from .hecke import _restrict, mfheckemat
from .linalg import (
    IncrementalEchelon,
    charpoly,
    echelon,
    kernel,
    poly_deriv,
    poly_divmod,
    poly_eval_matrix,
    poly_gcd,
)
from .qseries import (
    ZERO,
    ExpandB,
    FormExpr,
    HeckeImage,
    Product,
    Quotient,
    ThetaSeries,
    char_coef,
    char_token,
    mflinear,
    parse_char,
    register,
    series_inverse,
    series_mul,
    simplify,
)
from .spaces import ModularSpace, _old_parts, mfinit, sturm_bound


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[WEIGHTS] {msg}", file=sys.stderr)


@register("solved")
class SolvedForm(FormExpr):
    """Basis element of a space obtained by linear algebra; the expansion comes from expr."""

    def __init__(self, N: int, k, chi: DirichletCharacter, code: int, index: int, expr: FormExpr):
        super().__init__(N, k, chi, (expr,))
        self.code = code
        self.index = index

    def _expand(self, n):
        return self.children[0].series(n)

    def prefix_args(self):
        return [str(self.level), str(self.weight), char_token(self.char), str(self.code), str(self.index)]

    @classmethod
    def from_prefix(cls, args, build):
        return mfinit(int(args[0]), Fraction(args[1]), parse_char(args[2]), int(args[3])).basis[int(args[4])]


def _reduced(forms: Sequence[FormExpr], bound: int) -> List[List]:
    """Row-reduce the expansions of forms; returns the combinations giving the echelon basis."""
    n = len(forms)
    rows = [f.coefs(bound) + [Fraction(int(i == j)) for j in range(n)] for i, f in enumerate(forms)]
    R, piv = echelon(rows)
    if len(piv) != n or piv[-1] > bound:
        raise ComputationError(f"{n} forms are dependent up to q^{bound}")
    return [row[bound + 1:] for row in R]


def _wrap(N: int, k, chi: DirichletCharacter, code: int, exprs: Sequence[FormExpr], bound: int) -> List[FormExpr]:
    if not exprs:
        return []
    combos = _reduced(exprs, bound)
    return [SolvedForm(N, k, chi, code, i, mflinear(exprs, c)) for i, c in enumerate(combos)]


# -- half-integral weight -----------------------------------------------------------------------

@dataclass
class ThetaPair:
    """theta, theta(2 tau) and the integral-weight ambient they are multiplied into."""

    N: int
    k: Fraction
    chi: DirichletCharacter
    theta: FormExpr = field(default_factory=ThetaSeries)
    theta2: FormExpr = field(init=False)
    level: int = field(init=False)
    ambient_weight: int = field(init=False)
    ambient_char: DirichletCharacter = field(init=False)

    def __post_init__(self):
        self.theta2 = ExpandB(self.theta, 2)
        self.level = self.N if self.N % 8 == 0 else 2 * self.N
        self.ambient_weight = int(self.k + Fraction(1, 2))
        chi4 = DirichletCharacter.kronecker(-4).induce(self.level)
        self.ambient_char = self.chi.induce(self.level) * chi4.power(self.ambient_weight)

    def ambient(self, code: int) -> ModularSpace:
        return mfinit(self.level, self.ambient_weight, self.ambient_char, code)

    def solve(self, code: int) -> Tuple[ModularSpace, List[Tuple[List, List]]]:
        """(ambient, [(x, y)]) with g1 = sum x_i b_i, g2 = sum y_i b_i and g1 theta2 = g2 theta."""
        amb = self.ambient(code)
        d = amb.dim
        if not d:
            return amb, []
        bound = sturm_bound(self.level, self.ambient_weight + 1)
        t1 = self.theta.coefs(bound)
        t2 = self.theta2.coefs(bound)
        cols = []
        for b in amb.basis:
            cols.append(series_mul(b.coefs(bound), t2, bound))
        for b in amb.basis:
            cols.append([-c for c in series_mul(b.coefs(bound), t1, bound)])
        A = [[cols[j][i] for j in range(2 * d)] for i in range(bound + 1)]
        sols = kernel(A, 2 * d)
        _log(f"N'={self.level} weight {self.ambient_weight}: {len(sols)} solution(s) among {d}-dimensional ambient")
        return amb, [(v[:d], v[d:]) for v in sols]

    def quotients(self, amb: ModularSpace, x: Sequence, y: Sequence) -> Tuple[FormExpr, FormExpr]:
        """(g1 / theta, g2 / theta2)."""
        return (Quotient(mflinear(amb.basis, x), self.theta), Quotient(mflinear(amb.basis, y), self.theta2))

    def agree(self, amb: ModularSpace, x: Sequence, y: Sequence, bound: Optional[int] = None) -> bool:
        bound = bound if bound is not None else sturm_bound(self.level, self.ambient_weight)
        f1, f2 = self.quotients(amb, x, y)
        return all(simplify(a - b) == 0 for a, b in zip(f1.coefs(bound), f2.coefs(bound)))


def halfint_space(N: int, k: Fraction, chi: DirichletCharacter, code: int) -> ModularSpace:
    if N % 4:
        raise ValueError(f"half-integral weight needs 4 | N, got N={N}")
    if code not in (1, 4):
        raise ValueError("half-integral weight spaces are available as cusp (1) or full (4) only")
    if chi.parity != 1:
        raise ParityError(f"half-integral weight needs an even character, got {chi!r}")
    sturm = sturm_bound(N, k)
    if k < 0 or (k == Fraction(1, 2) and code == 1):
        return ModularSpace(N, k, chi, code, [], sturm)
    if k == Fraction(1, 2):
        raise ComputationError("weight 1/2 spaces are not constructed")
    pair = ThetaPair(N, k, chi)
    amb, sols = pair.solve(code)
    exprs = [pair.quotients(amb, x, y)[0] for x, y in sols]
    basis = _wrap(N, k, chi, code, exprs, sturm_bound(pair.level, pair.ambient_weight))
    return ModularSpace(N, k, chi, code, basis, sturm)


def coprimality_witness(N: int = 8) -> List[Tuple[str, Fraction, Fraction]]:
    """(cusp, ord theta, ord theta(2 tau)) at each cusp of Gamma0(N)."""
    return [(c.text(), theta_order(c.matrix, 1), theta_order(c.matrix, 2)) for c in cusps(N)]


# -- weight 1 -------------------------------------------------------------------------------------

def _weight_one_eisenstein(N: int, chi: DirichletCharacter) -> Tuple[List[FormExpr], List[int]]:
    """Eisenstein series of M_1(N, conj chi) and their valuations at infinity."""
    eis = [key.form() for key in weisinger_basis(N, 1, chi.conj())]
    reach = sturm_bound(N, 2)
    return eis, [e.valuation(reach) or 0 for e in eis]


def certification_bound(N: int, chi: DirichletCharacter) -> int:
    """Sturm bound of S_2(Gamma0(N)) plus the largest valuation of an Eisenstein series in
    M_1(N, conj chi): agreement of f E with S_2 up to here makes f E lie in S_2."""
    _, vals = _weight_one_eisenstein(N, chi)
    return sturm_bound(N, 2) + max(vals, default=0)


def _check_to(space: ModularSpace, g: FormExpr, bound: int) -> List:
    """Coordinates of g on space, with the expansions compared up to q^bound."""
    coords = space.to_basis(g)
    diff = [a - b for a, b in zip(g.coefs(bound), space.combination(coords).coefs(bound))]
    if any(diff):
        raise NotInSpaceError(f"expansion leaves the {space.describe()} below q^{bound}")
    return coords


@dataclass
class StabilityProblem:
    """Candidates f = h / E1, h in S_2(Gamma0(N)), narrowed by the other Eisenstein series
    and by Hecke stability. Candidates are rows of coordinates on the S_2 basis."""

    N: int
    chi: DirichletCharacter
    eis: List[FormExpr] = field(default_factory=list)
    ambient: Optional[ModularSpace] = None
    prime: int = 0
    rows: List[List] = field(default_factory=list)
    bound: int = 0

    def __post_init__(self):
        self.ambient = mfinit(self.N, 2, None, 1)
        self.prime = next(p for p in primerange(2, 10 ** 4) if self.N % p)
        self.eis, vals = _weight_one_eisenstein(self.N, self.chi)
        self.bound = sturm_bound(self.N, 2) + max(vals, default=0)
        order = sorted(range(len(self.eis)), key=lambda i: vals[i])
        self.eis = [self.eis[i] for i in order]
        self.valuations = [vals[i] for i in order]
        self.length = self.bound * self.prime

    def _h(self, row: Sequence, n: int) -> List:
        acc = [ZERO] * (n + 1)
        for c, b in zip(row, self.ambient.basis):
            if c:
                acc = [a + c * x for a, x in zip(acc, b.coefs(n))]
        return acc

    def candidate_series(self, row: Sequence) -> List:
        """(sum row_i s_i) / E1 up to q^length."""
        v = self.valuations[0]
        h = self._h(row, self.length + v)
        E = self.eis[0].coefs(self.length + v)
        return series_mul(h[v:], series_inverse(E[v:], self.length), self.length)

    def initial(self) -> None:
        d = self.ambient.dim
        v = self.valuations[0]
        if not d:
            self.rows = []
            return
        cols = [b.coefs(max(v - 1, 0)) for b in self.ambient.basis]
        cond = [[cols[j][i] for j in range(d)] for i in range(v)]
        self.rows = kernel(cond, d) if cond else [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]

    def intersect(self, E: FormExpr) -> None:
        """Keep the candidates f with f E in S_2 up to the Sturm bound."""
        if not self.rows:
            return
        n = self.bound
        prods = [series_mul(self.candidate_series(r), E.coefs(n), n) for r in self.rows]
        s = [b.coefs(n) for b in self.ambient.basis]
        cols = prods + [[-c for c in col] for col in s]
        A = [[col[i] for col in cols] for i in range(n + 1)]
        sols = kernel(A, len(cols))
        self.rows = self._combine([v[:len(self.rows)] for v in sols])

    def _combine(self, coeffs: Sequence[Sequence]) -> List[List]:
        inc = IncrementalEchelon()
        out = []
        d = self.ambient.dim
        for c in coeffs:
            row = [sum((c[j] * self.rows[j][i] for j in range(len(self.rows)) if c[j]), ZERO) for i in range(d)]
            if inc.add(row):
                out.append([simplify(x) for x in row])
        return out

    def hecke(self, series: Sequence, n: int) -> List:
        """T(p) on weight 1 with character chi, first n + 1 coefficients."""
        p = self.prime
        c = char_coef(self.chi, p)
        return [simplify(series[m * p] + (c * series[m // p] if m % p == 0 and c else ZERO)) for m in range(n + 1)]

    def stabilize(self) -> int:
        """Intersect with T(p)^-1 of itself until stable; returns the number of rounds."""
        rounds = 0
        n = self.bound
        while self.rows:
            rounds += 1
            F = [self.candidate_series(r) for r in self.rows]
            T = [self.hecke(f, n) for f in F]
            cols = T + [[-c for c in f[: n + 1]] for f in F]
            A = [[col[i] for col in cols] for i in range(n + 1)]
            sols = kernel(A, len(cols))
            before = len(self.rows)
            self.rows = self._combine([v[:before] for v in sols])
            _log(f"N={self.N} {self.chi!r}: T({self.prime}) round {rounds}, {before} -> {len(self.rows)}")
            if len(self.rows) == before:
                break
        return rounds

    def forms(self) -> List[FormExpr]:
        return [Quotient(mflinear(self.ambient.basis, r), self.eis[0]) for r in self.rows]


def _cusp_weight1(N: int, chi: DirichletCharacter) -> List[FormExpr]:
    prob = StabilityProblem(N, chi)
    prob.initial()
    for E in prob.eis[1:]:
        prob.intersect(E)
        if not prob.rows:
            break
    prob.stabilize()
    return prob.forms()


def _new_weight1(N: int, chi: DirichletCharacter, cusp: ModularSpace) -> List[FormExpr]:
    old, _ = _old_parts(N, 1, chi, include_new=False)
    target = cusp.dim - len(old)
    if target <= 0:
        return []
    if not old:
        return list(cusp.basis)
    W = [cusp.to_basis(b) for b in old]
    inc = IncrementalEchelon()
    for p in primerange(2, 10 ** 3):
        if N % p == 0:
            continue
        A = mfheckemat(cusp, p)
        P = charpoly(_restrict(A, W))
        sq = poly_gcd(P, poly_deriv(P))
        radical = poly_divmod(P, sq)[0] if len(sq) > 1 else P
        R = poly_eval_matrix(radical, A)
        for j in range(cusp.dim):
            inc.add([R[i][j] for i in range(cusp.dim)])
            if len(inc) == target:
                return [mflinear(cusp.basis, row) for row in inc.rows]
    raise ComputationError(f"Hecke operators do not separate the new part of {cusp!r}")


def weight1_space(N: int, chi: DirichletCharacter, code: int) -> ModularSpace:
    sturm = sturm_bound(N, 1)
    if chi.parity != -1:
        raise ParityError(f"weight 1 needs an odd character, got {chi!r}")
    if code == 3:
        return ModularSpace(N, 1, chi, 3, weisinger_basis_rational(N, 1, chi), sturm)
    if code == 2:
        basis, provenance = _old_parts(N, 1, chi, include_new=False)
        return ModularSpace(N, 1, chi, 2, basis, sturm, provenance)
    if code == 4:
        cusp = mfinit(N, 1, chi, 1)
        return ModularSpace(N, 1, chi, 4, weisinger_basis_rational(N, 1, chi) + cusp.basis, sturm)
    if code == 1:
        exprs = _cusp_weight1(N, chi)
    else:
        exprs = _new_weight1(N, chi, mfinit(N, 1, chi, 1))
    basis = _wrap(N, 1, chi, code, exprs, sturm)
    _log(f"S_1 N={N} {chi!r} code={code}: dim {len(basis)}")
    return ModularSpace(N, 1, chi, code, basis, sturm)


def stability_certificate(space: ModularSpace, primes: int = 2) -> List[int]:
    """The stabilizing prime and `primes` further primes p prime to N with T(p) space in
    space, checked up to the certification bound.

    Raises NotInSpaceError when some T(p) leaves the space."""
    bound = certification_bound(space.N, space.chi)
    checked: List[int] = []
    for p in primerange(2, 10 ** 4):
        if len(checked) == primes + 1:
            break
        if space.N % p == 0:
            continue
        for f in space.basis:
            _check_to(space, HeckeImage(f, p, space.N, space.chi), bound)
        checked.append(p)
    _log(f"T(p) stable on {space!r} for p in {checked} up to q^{bound}")
    return checked


def holomorphy_certificate(space: ModularSpace) -> bool:
    """f E lies in S_2(Gamma0(N)) for every basis element f and Eisenstein E in M_1(conj chi),
    with the expansions compared up to the certification bound."""
    S2 = mfinit(space.N, 2, None, 1)
    eis, vals = _weight_one_eisenstein(space.N, space.chi)
    bound = sturm_bound(space.N, 2) + max(vals, default=0)
    for E in eis:
        for f in space.basis:
            try:
                _check_to(S2, Product(f, E), bound)
            except NotInSpaceError:
                return False
    return True
