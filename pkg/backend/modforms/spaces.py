"""Spaces M_k(Gamma0(N), chi) and their new / cusp / old / Eisenstein parts.

The new space is spanned by the Hecke translates T(j) Tr^new; cusp and old spaces
are assembled from B(d)-images of new spaces of lower level; the full space adds the
rational Eisenstein basis. Membership and coordinates are decided on coefficients up
to the Sturm bound.
"""
from __future__ import annotations

import sys
import threading
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .. import config
from .arith import ceil_fraction, divisors, gamma0_index
from .characters import DirichletCharacter, equivalent_class_reps
from .eisenstein import eisenstein_dim, weisinger_basis_rational
from .errors import ComputationError, NotInSpaceError, ParityError
from .linalg import IncrementalEchelon, echelon, identity
from .qseries import (
    ExpandB,
    FormExpr,
    HeckeImage,
    coef_json,
    constant,
    format_qexp,
    mflinear,
    norm_weight,
    simplify,
)
from .trace import TraceContext, dim_cusp, dim_new, trace_form_new

SPACE_CODES = {0: "new", 1: "cusp", 2: "old", 3: "eisenstein", 4: "full"}
_CODE_NUMBERS = {name: code for code, name in SPACE_CODES.items()}

_LOCK = threading.Lock()
_SPACES: Dict[Tuple, "ModularSpace"] = {}


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[SPACES] {msg}", file=sys.stderr)


def space_code(code: Union[int, str, None]) -> int:
    if code is None:
        return 4
    if isinstance(code, str):
        key = code.strip().lower()
        if key in _CODE_NUMBERS:
            return _CODE_NUMBERS[key]
        if not key.lstrip("-").isdigit():
            raise ValueError(f"unknown space code {code!r}")
        code = int(key)
    if code not in SPACE_CODES:
        raise ValueError(f"unknown space code {code}; expected one of {sorted(SPACE_CODES)}")
    return code


def sturm_bound(N: int, k) -> int:
    """ceil(k [SL2(Z) : Gamma0(N)] / 12) + 1."""
    k = Fraction(k)
    if k <= 0:
        return 1
    return ceil_fraction(k * gamma0_index(N) / 12) + 1


def normalize_char(N: int, chi: Optional[DirichletCharacter]) -> DirichletCharacter:
    if chi is None:
        return DirichletCharacter.trivial(N)
    if N % chi.conductor:
        raise ValueError(f"conductor {chi.conductor} of {chi} does not divide the level {N}")
    return chi if chi.modulus == N else chi.induce(N)


class ModularSpace:
    """A space of forms with an explicit basis and an exact solver for coordinates."""

    def __init__(self, N: int, k, chi: DirichletCharacter, code: int, basis: Sequence[FormExpr],
                 sturm: Optional[int] = None, provenance: Sequence[Tuple[int, DirichletCharacter, int]] = ()):
        self.N = int(N)
        self.k = norm_weight(k)
        self.chi = normalize_char(self.N, chi)
        self.code = code
        self.basis = list(basis)
        self.sturm = sturm if sturm is not None else sturm_bound(self.N, self.k)
        self.provenance = list(provenance)
        self.rows = [f.coefs(self.sturm) for f in self.basis]
        n = self.sturm + 1
        aug = [list(row) + e for row, e in zip(self.rows, identity(len(self.basis)))]
        reduced, pivots = echelon(aug)
        if len(pivots) != len(self.basis) or (pivots and pivots[-1] >= n):
            raise ComputationError(
                f"basis of {self.describe()} is dependent up to q^{self.sturm}; raise the bound")
        self.echelon = [r[:n] for r in reduced]
        self.pivots = pivots
        self._combos = [r[n:] for r in reduced]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def name(self) -> str:
        return SPACE_CODES[self.code]

    def describe(self) -> str:
        return f"{self.name} space of weight {self.k} on Gamma0({self.N}) with character {self.chi!r}"

    def field_order(self) -> int:
        return self.chi.order

    # -- membership -------------------------------------------------------------------------
    def check_compatible(self, f: FormExpr) -> None:
        if f.quasi:
            raise NotInSpaceError("quasi-modular forms are not in any space of modular forms")
        if f.weight != self.k:
            raise NotInSpaceError(f"form has weight {f.weight}, space has weight {self.k}")
        if self.N % f.level:
            raise NotInSpaceError(f"form has level {f.level}, which does not divide {self.N}")
        if not f.char.same_primitive(self.chi):
            raise NotInSpaceError(f"form has character {f.char!r}, space has {self.chi!r}")

    def to_basis(self, f: FormExpr) -> List:
        """Coordinates of f on self.basis."""
        self.check_compatible(f)
        return self.coordinates(f.coefs(self.sturm))

    def coordinates(self, vec: Sequence) -> List:
        residual = list(vec)
        out = [Fraction(0)] * self.dim
        for row, c, combo in zip(self.echelon, self.pivots, self._combos):
            x = residual[c]
            if x == 0:
                continue
            residual = [a - x * b for a, b in zip(residual, row)]
            out = [o + x * w for o, w in zip(out, combo)]
        if any(r != 0 for r in residual):
            raise NotInSpaceError(f"expansion is not in the {self.describe()}")
        return [simplify(x) for x in out]

    def pivot_coordinates(self, values: Sequence) -> List:
        """Coordinates of a form known to lie in the space, from its coefficients at the
        pivot indices only; works with exact and floating coefficients alike."""
        if len(values) != len(self.pivots):
            raise ValueError(f"expected {len(self.pivots)} pivot values, got {len(values)}")
        out = [Fraction(0)] * self.dim
        for x, combo in zip(values, self._combos):
            if x:
                out = [o + x * w for o, w in zip(out, combo)]
        return out

    def contains(self, f: FormExpr) -> bool:
        try:
            self.to_basis(f)
        except NotInSpaceError:
            return False
        return True

    def combination(self, coords: Sequence) -> FormExpr:
        if not self.basis:
            return constant(0)
        return mflinear(self.basis, coords)

    # -- output -------------------------------------------------------------------------------
    def params(self) -> Dict:
        return {
            "level": self.N,
            "weight": str(self.k),
            "character": repr(self.chi),
            "space": self.name,
            "dim": self.dim,
            "sturm": self.sturm,
        }

    def to_json(self, L: Optional[int] = None) -> Dict:
        L = self.sturm if L is None else L
        out = self.params()
        out["basis"] = [[coef_json(c) for c in f.coefs(L)] for f in self.basis]
        out["forms"] = [f.prefix() for f in self.basis]
        if self.provenance:
            out["provenance"] = [{"level": M, "character": repr(c), "d": d} for M, c, d in self.provenance]
        return out

    def text(self, L: Optional[int] = None) -> str:
        L = self.sturm if L is None else L
        lines = [self.describe() + f", dimension {self.dim}"]
        for f in self.basis:
            lines.append("  " + format_qexp(f.coefs(L)))
        return "\n".join(lines)

    def __repr__(self):
        return f"ModularSpace({self.N}, {self.k}, {self.chi!r}, {self.name}, dim={self.dim})"


# -- construction ---------------------------------------------------------------------------

def _new_basis(N: int, k: int, chi: DirichletCharacter, sturm: int) -> List[FormExpr]:
    ctx = TraceContext(N, k, chi)
    target = dim_new(ctx)
    if target == 0:
        return []
    tr = trace_form_new(ctx)
    inc = IncrementalEchelon()
    basis: List[FormExpr] = []
    used = []
    for j in range(1, sturm + 1):
        g = tr if j == 1 else HeckeImage(tr, j, N, chi)
        if inc.add(g.coefs(sturm)):
            basis.append(g)
            used.append(j)
            if len(basis) == target:
                break
    if len(basis) != target:
        raise ComputationError(
            f"T(j) Tr^new for j <= {sturm} reach rank {len(basis)}, expected {target} (N={N}, k={k}, {chi!r})")
    _log(f"new space N={N} k={k} {chi!r}: dim {target} from T(j), j in {used}")
    return basis


def _old_parts(N: int, k: int, chi: DirichletCharacter, include_new: bool):
    f = chi.conductor
    prim = chi.primitive()
    basis: List[FormExpr] = []
    provenance = []
    for M in divisors(N):
        if M % f or (M == N and not include_new):
            continue
        sub = mfinit(M, k, prim.induce(M), 0)
        if not sub.dim:
            continue
        for d in divisors(N // M):
            provenance.append((M, prim.induce(M), d))
            basis.extend(g if d == 1 else ExpandB(g, d) for g in sub.basis)
    return basis, provenance


def _build(N: int, k, chi: DirichletCharacter, code: int) -> ModularSpace:
    if isinstance(k, Fraction) or k == 1:
        from . import special_weights

        if isinstance(k, Fraction):
            return special_weights.halfint_space(N, k, chi, code)
        return special_weights.weight1_space(N, chi, code)
    sturm = sturm_bound(N, max(k, 0))
    if k <= 0:
        basis = [constant(1)] if k == 0 and chi.is_trivial() and code in (3, 4) else []
        return ModularSpace(N, k, chi, code, basis, sturm)
    if chi.parity != (-1) ** k:
        raise ParityError(f"chi(-1) = {chi.parity} is incompatible with weight {k}")
    if code == 0:
        return ModularSpace(N, k, chi, 0, _new_basis(N, k, chi, sturm), sturm)
    if code in (1, 2):
        basis, provenance = _old_parts(N, k, chi, include_new=code == 1)
        return ModularSpace(N, k, chi, code, basis, sturm, provenance)
    eis = weisinger_basis_rational(N, k, chi)
    if code == 3:
        return ModularSpace(N, k, chi, 3, eis, sturm)
    cusp = mfinit(N, k, chi, 1)
    return ModularSpace(N, k, chi, 4, eis + cusp.basis, sturm, cusp.provenance)


def mfinit(N: int, k, chi: Optional[DirichletCharacter] = None, code: Union[int, str, None] = 4) -> ModularSpace:
    """The space of the given code (0 new, 1 cusp, 2 old, 3 Eisenstein, 4 full)."""
    N = int(N)
    if N < 1:
        raise ValueError(f"level must be positive, got {N}")
    k = norm_weight(k)
    code = space_code(code)
    chi = normalize_char(N, chi)
    key = (N, str(k), chi.label, code)
    hit = _SPACES.get(key)
    if hit is not None:
        return hit
    space = _build(N, k, chi, code)
    with _LOCK:
        _SPACES.setdefault(key, space)
    _log(f"{space!r}")
    return _SPACES[key]


# -- dimensions ---------------------------------------------------------------------------------

def _dim_one(N: int, k, chi: DirichletCharacter, code: int) -> int:
    if isinstance(k, Fraction) or k <= 1:
        if isinstance(k, Fraction) and N % 4:
            return 0
        if k == 1 and chi.parity != -1:
            return 0
        if k == 0:
            return int(chi.is_trivial() and code in (3, 4))
        if k < 0:
            return 0
        return mfinit(N, k, chi, code).dim
    if chi.parity != (-1) ** k:
        return 0
    if code == 3:
        return eisenstein_dim(N, k, chi)
    if code == 0:
        return dim_new(TraceContext(N, k, chi))
    cusp = dim_cusp(TraceContext(N, k, chi))
    if code == 1:
        return cusp
    if code == 2:
        return cusp - dim_new(TraceContext(N, k, chi))
    return cusp + eisenstein_dim(N, k, chi)


def cusp_dim_from_new(N: int, k: int, chi: DirichletCharacter) -> int:
    """sum over f | M | N of sigma_0(N/M) dim S_k^new(M)."""
    chi = normalize_char(N, chi)
    prim = chi.primitive()
    total = 0
    for M in divisors(N):
        if M % prim.modulus == 0:
            total += len(divisors(N // M)) * dim_new(TraceContext(M, k, prim.induce(M)))
    return total


def mfdim(N: int, k, chi: Union[DirichletCharacter, None, str, int] = None, code: Union[int, str, None] = 4):
    """Dimension of one space, or with the joker character a list of (order, chi, dim)
    over Galois orbits of characters modulo N with nonzero dimension."""
    N = int(N)
    k = norm_weight(k)
    code = space_code(code)
    if chi == 0 or (isinstance(chi, str) and chi.strip().lower() in ("0", "joker", "*")):
        if isinstance(k, Fraction):
            parity = 1
        else:
            parity = (-1) ** k
        table = []
        for rep in equivalent_class_reps(N, parity=parity):
            d = _dim_one(N, k, rep, code)
            if d:
                table.append((rep.order, rep, d))
        _log(f"joker scan N={N} k={k} code={code}: {len(table)} nonzero orbit(s)")
        return table
    return _dim_one(N, k, normalize_char(N, chi), code)


def mftobasis(space: ModularSpace, f: FormExpr) -> List:
    return space.to_basis(f)


def clear_cache() -> None:
    with _LOCK:
        _SPACES.clear()
