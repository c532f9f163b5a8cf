"""Command registry: every engine operation reachable from the CLI and the HTTP routes.

Each command declares its arguments once (COMMAND_META); `dispatch(name, params)` validates
the parameters, runs the owning engine operation and returns a Result with a JSON-ready
record and a text rendering.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath

from . import config
from .modforms import analytic, arith, cuspexp, hecke, lfunctions, qseries, spaces
from .modforms.characters import DirichletCharacter
from .modforms.qseries import FormExpr, coef_json, format_qexp, norm_weight
from .modforms.spaces import ModularSpace


class UsageError(ValueError):
    """Malformed request: unknown command, missing or unparsable argument."""


def _log(msg: str) -> None:
    if config.VERBOSE:
        print(f"[COMMANDS] {msg}", file=sys.stderr)


@dataclass
class Arg:
    name: str
    kind: str
    positional: bool = False
    default: object = None
    multiple: bool = False
    help: str = ""

    @property
    def required(self) -> bool:
        return self.positional and self.default is None


@dataclass
class Result:
    data: Dict
    text: str


# -- argument parsing -------------------------------------------------------------------------

_MOD_RE = re.compile(r"^\s*(?:mod\s*\(\s*(-?\d+)\s*,\s*(\d+)\s*\)|(-?\d+)\s+mod\s+(\d+))\s*$", re.IGNORECASE)


def parse_weight(raw) -> object:
    try:
        return norm_weight(Fraction(str(raw).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid weight {raw!r}") from exc


def parse_character(raw, N: Optional[int] = None) -> Optional[DirichletCharacter]:
    """None/'1' trivial, an integer D for (D|.), 'a mod N' or 'Mod(a,N)' for a Conrey label."""
    if raw is None or str(raw).strip() in ("", "1"):
        return None
    text = str(raw).strip()
    m = _MOD_RE.match(text)
    try:
        if m:
            a, n = (m.group(1), m.group(2)) if m.group(1) is not None else (m.group(3), m.group(4))
            return DirichletCharacter(int(n), int(a))
        if re.fullmatch(r"-?\d+", text):
            return DirichletCharacter.kronecker(int(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"invalid character {raw!r}; use an integer D or 'a mod N'")


def parse_levels(raw) -> List[int]:
    """'1..60', '11,23,37' or a list of integers."""
    if isinstance(raw, (list, tuple)):
        return [int(x) for x in raw]
    text = str(raw).strip()
    m = re.fullmatch(r"(\d+)\s*\.\.\s*(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo < 1 or hi < lo:
            raise UsageError(f"invalid level range {raw!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid levels {raw!r}") from exc


def parse_matrix(raw) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """'a,b,c,d' or '[a,b;c,d]' with rational entries."""
    if isinstance(raw, (list, tuple)):
        parts = [str(x) for x in raw]
    else:
        parts = [p for p in re.split(r"[\s,;\[\]]+", str(raw)) if p]
    if len(parts) != 4:
        raise UsageError(f"a matrix needs four entries, got {raw!r}")
    try:
        return tuple(Fraction(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"invalid matrix {raw!r}") from exc


def parse_complex(raw):
    """A complex number: 're,im', '6+13j', '6+13*I' or a real."""
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return mpmath.mpc(str(raw[0]), str(raw[1]))
    if isinstance(raw, (int, float, complex)):
        return mpmath.mpmathify(raw)
    text = str(raw).strip().replace(" ", "").replace("*", "")
    if "," in text:
        re_, im = text.split(",", 1)
        return mpmath.mpc(re_, im)
    text = re.sub(r"(?<![\d.])[iIjJ]", "1j", text)
    text = re.sub(r"[iIJ]", "j", text)
    try:
        z = complex(text)
    except ValueError as exc:
        raise UsageError(f"invalid complex number {raw!r}") from exc
    return mpmath.mpf(z.real) if z.imag == 0 else mpmath.mpc(z)


def parse_point(raw):
    """'oo', a rational cusp 'p/q', or a complex number in the upper half-plane."""
    if isinstance(raw, int):
        return Fraction(raw)
    text = str(raw).strip().replace(" ", "")
    if text in ("oo", "inf", "i*oo"):
        return analytic.INFINITY
    if isinstance(raw, str) and re.fullmatch(r"-?\d+(/\d+)?", text):
        return Fraction(text)
    return parse_complex(raw)


def parse_pairs(raw) -> List[Tuple[int, int]]:
    """['2=-1', '3=-3'] or {'2': -1, '3': -3}."""
    if isinstance(raw, dict):
        return [(int(n), int(v)) for n, v in raw.items()]
    out = []
    for item in raw if isinstance(raw, (list, tuple)) else [raw]:
        if isinstance(item, (list, tuple)):
            out.append((int(item[0]), int(item[1])))
            continue
        m = re.fullmatch(r"\s*(\d+)\s*=\s*(-?\d+)\s*", str(item))
        if not m:
            raise UsageError(f"invalid constraint {item!r}; expected n=v")
        out.append((int(m.group(1)), int(m.group(2))))
    return out


def parse_rationals(raw) -> List[Fraction]:
    items = raw if isinstance(raw, (list, tuple)) else [x for x in re.split(r"[\s,]+", str(raw)) if x]
    try:
        return [Fraction(str(x)) for x in items]
    except ValueError as exc:
        raise UsageError(f"invalid rational list {raw!r}") from exc


_SCALARS: Dict[str, Callable] = {
    "int": int,
    "float": lambda x: mpmath.mpf(str(x)),
    "weight": parse_weight,
    "char": lambda x: x,
    "levels": parse_levels,
    "matrix": parse_matrix,
    "point": parse_point,
    "complex": parse_complex,
    "pairs": parse_pairs,
    "rationals": parse_rationals,
    "str": str,
    "bool": lambda x: x if isinstance(x, bool) else str(x).strip().lower() in ("1", "true", "yes", "on"),
}


class Params:
    """Validated parameters of one request."""

    def __init__(self, args: Sequence[Arg], raw: Dict):
        self.raw = dict(raw)
        known = {a.name for a in args} | {"prec", "format"}
        unknown = sorted(set(self.raw) - known)
        if unknown:
            raise UsageError(f"unknown argument(s): {', '.join(unknown)}")
        self.values: Dict[str, object] = {}
        for a in args:
            value = self.raw.get(a.name)
            if value is None or (a.multiple and value == []):
                if a.required:
                    raise UsageError(f"missing argument: {a.name}")
                self.values[a.name] = a.default
                continue
            try:
                if a.kind == "pairs":
                    self.values[a.name] = parse_pairs(value)
                elif a.multiple:
                    items = value if isinstance(value, list) else [value]
                    self.values[a.name] = [_SCALARS[a.kind](x) for x in items]
                else:
                    self.values[a.name] = _SCALARS[a.kind](value)
            except UsageError:
                raise
            except (TypeError, ValueError) as exc:
                raise UsageError(f"invalid {a.name} {value!r}: {exc}") from exc
        try:
            self.prec = int(self.raw.get("prec") or config.PREC)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"invalid precision {self.raw.get('prec')!r}") from exc
        if self.prec < 5:
            raise UsageError("precision must be at least 5 digits")

    def __getitem__(self, name: str):
        return self.values[name]

    def get(self, name: str, default=None):
        value = self.values.get(name)
        return default if value is None else value

    def space(self, default_code: str = "full", form: Optional[FormExpr] = None) -> ModularSpace:
        level = self.get("level")
        code = self.get("space", default_code)
        if level is None:
            if form is None:
                raise UsageError("missing argument: level")
            return spaces.mfinit(form.level, form.weight, form.char, code)
        weight = self.get("weight")
        if weight is None:
            if form is None:
                raise UsageError("missing argument: weight")
            weight = form.weight
        chi = parse_character(self.get("char"), level)
        return spaces.mfinit(level, weight, chi, code)

    def form(self, name: str = "form", default_code: str = "full",
             with_space: bool = True) -> Tuple[FormExpr, Optional[ModularSpace]]:
        """The form named by a string and the space it is read in.

        basis:i and eigen:i always come with their space; other forms get the space given by
        the level/weight/char/space arguments, or the full space of their own parameters.
        """
        text = str(self.get(name, "")).strip()
        if not text:
            raise UsageError(f"missing argument: {name}")
        m = re.fullmatch(r"(basis|eigen):(\d+)", text)
        if m:
            space = self.space("new" if m.group(1) == "eigen" else default_code)
            items = hecke.mfeigenbasis(space) if m.group(1) == "eigen" else space.basis
            i = int(m.group(2))
            if i >= len(items):
                raise UsageError(f"{text}: the space has only {len(items)} {m.group(1)} element(s)")
            return items[i], space
        f = parse_form(text)
        return f, self.space(default_code, form=f) if with_space else None


def parse_form(text: str) -> FormExpr:
    """'delta', 'E4', 'theta', 'eta:1,24' or a prefix expression '(mul (E 4) (delta))'."""
    key = text.strip()
    low = key.lower()
    try:
        if low == "delta":
            return qseries.delta()
        if low == "theta":
            return qseries.theta_char()
        if re.fullmatch(r"e\d+", low):
            return qseries.eisenstein_level_one(int(low[1:]))
        if low.startswith("eta:"):
            nums = [int(x) for x in low[4:].split(",")]
            return qseries.eta_quotient(list(zip(nums[0::2], nums[1::2])))
        if key.startswith("("):
            return qseries.parse_prefix(key)
    except (IndexError, KeyError) as exc:
        raise UsageError(f"invalid form expression {text!r}") from exc
    raise UsageError(f"invalid form {text!r}; use delta, E<k>, theta, eta:d,e,..., basis:i, eigen:i "
                     "or a prefix expression")


# -- formatting -------------------------------------------------------------------------------

def fmt_float(x, digits: int) -> str:
    x = mpmath.mpmathify(x)
    tol = mpmath.mpf(10) ** (-(digits - 3))
    if isinstance(x, mpmath.mpc):
        if abs(x.imag) <= tol * (1 + abs(x)):
            return mpmath.nstr(x.real, digits)
        if abs(x.real) <= tol * (1 + abs(x)):
            return f"{mpmath.nstr(x.imag, digits)}*I"
        sign = "-" if x.imag < 0 else "+"
        return f"{mpmath.nstr(x.real, digits)} {sign} {mpmath.nstr(abs(x.imag), digits)}*I"
    return mpmath.nstr(x, digits)


def float_json(x, digits: int):
    x = mpmath.mpmathify(x)
    if isinstance(x, mpmath.mpc):
        return [mpmath.nstr(x.real, digits), mpmath.nstr(x.imag, digits)]
    return mpmath.nstr(x, digits)


def _form_record(f: FormExpr, L: int) -> Dict:
    out = dict(f.params())
    out["prefix"] = f.prefix()
    out["coefficients"] = [coef_json(c) for c in f.coefs(L)]
    return out


# -- commands ---------------------------------------------------------------------------------

SPACE_ARGS = [
    Arg("level", "int", help="level N"),
    Arg("weight", "weight", help="weight k, integral or like 5/2"),
    Arg("char", "char", help="character: integer D or 'a mod N'"),
    Arg("space", "str", help="new, cusp, old, eisenstein or full (or 0..4)"),
]


def _positional_space() -> List[Arg]:
    return [Arg("level", "int", positional=True, help="level N"),
            Arg("weight", "weight", positional=True, help="weight k"),
            Arg("char", "char", help="character: integer D or 'a mod N'"),
            Arg("space", "str", help="new, cusp, old, eisenstein or full (or 0..4)")]


def cmd_mfcoefs(p: Params) -> Result:
    f, _ = p.form(with_space=False)
    L = p["n"]
    coeffs = f.coefs(L)
    return Result({"form": f.prefix(), "coefficients": [coef_json(c) for c in coeffs]},
                  ",".join(str(qseries.simplify(c)) for c in coeffs))


def cmd_mfdim(p: Params) -> Result:
    raw_chi = p.get("char")
    code = p.get("space", "full")
    if raw_chi is not None and str(raw_chi).strip().lower() in ("0", "joker", "*"):
        table = spaces.mfdim(p["level"], p["weight"], 0, code)
        rows = [{"order": o, "character": repr(c), "dim": d} for o, c, d in table]
        return Result({"dims": rows}, "\n".join(f"[{r['order']}, {r['character']}, {r['dim']}]" for r in rows))
    d = spaces.mfdim(p["level"], p["weight"], parse_character(raw_chi, p["level"]), code)
    return Result({"dim": d}, str(d))


def cmd_mfinit(p: Params) -> Result:
    space = p.space("full")
    data = space.params()
    data["forms"] = [f.prefix() for f in space.basis]
    if space.provenance:
        data["provenance"] = [{"level": M, "character": repr(c), "d": d} for M, c, d in space.provenance]
    return Result(data, f"{space.describe()}, dimension {space.dim}, Sturm bound {space.sturm}")


def cmd_mfbasis(p: Params) -> Result:
    space = p.space("full")
    L = p.get("n", space.sturm)
    return Result(space.to_json(L), space.text(L))


def cmd_mfeigenbasis(p: Params) -> Result:
    space = p.space("new")
    L = p["n"]
    forms = hecke.mfeigenbasis(space)
    lines = []
    for f in forms:
        lines.append(f"[{f.field_text()}] " + format_qexp(f.coefs(L)))
    return Result({"space": space.params(), "eigenforms": [dict(f.to_json(L), prefix=f.prefix()) for f in forms]},
                  "\n".join(lines) or "(no eigenforms)")


def cmd_mffields(p: Params) -> Result:
    space = p.space("new")
    fields = hecke.mffields(space)
    return Result({"fields": [F.to_json() for F in fields]}, "\n".join(F.text() for F in fields))


def cmd_mfembed(p: Params) -> Result:
    space = p.space("new")
    forms = hecke.mfeigenbasis(space)
    i = p["index"]
    if not 0 <= i < len(forms):
        raise UsageError(f"index {i} out of range: {len(forms)} eigenform(s)")
    with mpmath.workdps(p.prec + 5):
        rows = hecke.mfembed(forms[i], p["n"])
        digits = p.get("digits", p.prec)
        return Result({"embeddings": [[float_json(x, digits) for x in row] for row in rows]},
                      "\n".join("[" + ", ".join(fmt_float(x, digits) for x in row) + "]" for row in rows))


def cmd_mfheckemat(p: Params) -> Result:
    space = p.space("new")
    M = hecke.mfheckemat(space, p["n"])
    return Result({"matrix": [[coef_json(x) for x in row] for row in M]},
                  "\n".join("[" + ", ".join(str(qseries.simplify(x)) for x in row) + "]" for row in M))


def cmd_mfatkininit(p: Params) -> Result:
    space = p.space("new")
    init = analytic.mfatkininit(space, p["Q"], prec=p.prec)
    return Result(init.to_json(), init.text())


def cmd_mfslashexpansion(p: Params) -> Result:
    f, space = p.form()
    exp = cuspexp.mfslashexpansion(space, f, p["gamma"], p["n"], algebraic=p.get("exact", False),
                                   prec=p.prec, embedding=p.get("embedding", 0))
    return Result(exp.to_json(), exp.text())


def cmd_mfeval(p: Params) -> Result:
    f, space = p.form()
    value = analytic.mfeval(space, f, p["tau"], prec=p.prec, embedding=p.get("embedding", 0))
    return Result({"value": float_json(value, p.prec)}, fmt_float(value, p.prec))


def cmd_mfsymboleval(p: Params) -> Result:
    f, space = p.form(default_code="cusp")
    handle = analytic.mfsymbol(space, f, prec=p.prec, embedding=p.get("embedding", 0))
    if p.get("X") is not None:
        value = analytic.mfsymboleval(handle, p.get("a", Fraction(0)), p.get("b", analytic.INFINITY), p["X"])
        return Result({"value": float_json(value, p.prec)}, fmt_float(value, p.prec))
    if p.get("a") is None and p.get("b") is None:
        coeffs = analytic.period_polynomial(handle)
    else:
        coeffs = analytic.mfsymboleval(handle, p.get("a", Fraction(0)), p.get("b", analytic.INFINITY))
    terms = [f"({fmt_float(c, p.prec)})" + ("" if j == 0 else "*X" if j == 1 else f"*X^{j}")
             for j, c in enumerate(coeffs)]
    return Result({"polynomial": [float_json(c, p.prec) for c in coeffs]}, " + ".join(reversed(terms)))


def cmd_mfpetersson(p: Params) -> Result:
    if p.get("form") is None:
        space = p.space("cusp")
        gram = analytic.gram_matrix(space, prec=p.prec)
        digits = min(p.prec, 25)
        return Result({"gram": [[float_json(x, digits) for x in row] for row in gram]},
                      "\n".join("[" + ", ".join(fmt_float(x, digits) for x in row) + "]" for row in gram))
    f, space = p.form(default_code="cusp")
    g = f
    if p.get("form2") is not None:
        g, _ = p.form("form2", default_code="cusp")
    fS = analytic.mfsymbol(space, f, prec=p.prec)
    gS = fS if g is f else analytic.mfsymbol(space, g, prec=p.prec)
    value = analytic.mfpetersson(fS, gS)
    return Result({"value": float_json(value, p.prec)}, fmt_float(value, p.prec))


def _lfun_handle(p: Params, tmax: float = 30) -> lfunctions.LFunctionHandle:
    f, space = p.form()
    return lfunctions.lfunmf(space, f, prec=p.prec, embedding=p.get("embedding", 0), tmax=tmax)


def cmd_lfunmf(p: Params) -> Result:
    points = p.get("s") or []
    tmax = max([30.0] + [abs(float(mpmath.im(s))) + 1 for s in points])
    L = _lfun_handle(p, tmax)
    rows = []
    for s in points:
        rows.append({"s": float_json(s, 15), "L": float_json(L.value(s), p.prec),
                     "Lambda": float_json(L.completed(s), p.prec)})
    eps = L.root_number
    data = {"level": L.N, "weight": L.k, "terms": L.nmax,
            "root_number": None if eps is None else float_json(eps, 20), "values": rows}
    lines = [f"L-function of weight {L.k} and conductor {L.N}, {L.nmax} terms",
             f"root number: {'not self-dual' if eps is None else fmt_float(eps, 20)}"]
    lines += [f"L({fmt_float(s, 15)}) = {fmt_float(L.value(s), p.prec)}" for s in points]
    return Result(data, "\n".join(lines))


def cmd_lfunmfspec(p: Params) -> Result:
    special = lfunctions.lfun_special(_lfun_handle(p))
    return Result(special.to_json(), special.text())


def cmd_lfunzeros(p: Params) -> Result:
    T = float(p["T"])
    zeros = lfunctions.lfun_zeros(_lfun_handle(p, T + 1), T)
    return Result({"zeros": [mpmath.nstr(z, p.prec) for z in zeros]},
                  "[" + ", ".join(mpmath.nstr(z, p.prec) for z in zeros) + "]")


def cmd_lfunhardy(p: Params) -> Result:
    t0, t1, step = p["t0"], p["t1"], p.get("step", mpmath.mpf("0.5"))
    L = _lfun_handle(p, float(max(abs(t0), abs(t1))) + 1)
    table = lfunctions.hardy_table(L, t0, t1, step)
    digits = min(p.prec, 20)
    return Result({"table": [[mpmath.nstr(t, 10), mpmath.nstr(z, digits)] for t, z in table]},
                  "\n".join(f"{mpmath.nstr(t, 10)}\t{mpmath.nstr(z, digits)}" for t, z in table))


def cmd_mfeigensearch(p: Params) -> Result:
    chi = parse_character(p.get("char"))
    found = hecke.mfeigensearch(p["levels"], int(p["weight"]), p.get("a", []), chi)
    L = p["n"]
    return Result({"levels": [f.space.N for f in found],
                   "forms": [dict(f.to_json(L), prefix=f.prefix(), level=f.space.N) for f in found]},
                  "\n".join(f"level {f.space.N}: {format_qexp(f.coefs(L))}" for f in found) or "(none)")


def cmd_mfsearch(p: Params) -> Result:
    found = hecke.mfsearch(p["levels"], p["weight"], p["prefix"], p.get("space", "cusp"))
    L = max(p["n"], len(p["prefix"]))
    return Result({"forms": [_form_record(f, L) for f in found]},
                  "\n".join(f"[{f.level}, {f.char!r}] {format_qexp(f.coefs(L))}" for f in found) or "(none)")


def cmd_mftobasis(p: Params) -> Result:
    f, space = p.form()
    coords = spaces.mftobasis(space, f)
    return Result({"space": space.params(), "coordinates": [coef_json(c) for c in coords]},
                  "[" + ", ".join(str(c) for c in coords) + "]")


def cmd_mfdescribe(p: Params) -> Result:
    f, _ = p.form(with_space=False)
    return Result({"prefix": f.prefix()}, f.prefix())


def cmd_mfparams(p: Params) -> Result:
    f, _ = p.form(with_space=False)
    params = f.params()
    text = f"[{params['level']}, {params['weight']}, {params['character']}, {params.get('eigenfield', params['field'])}]"
    return Result(params, text)


FORM = Arg("form", "str", positional=True, help="delta, E<k>, theta, eta:..., basis:i, eigen:i or a prefix expression")

COMMAND_META: Dict[str, Dict] = {
    "mfcoefs": {"label": "Fourier coefficients a(0..n)", "run": cmd_mfcoefs,
                "args": [FORM, Arg("n", "int", positional=True, default=10)] + SPACE_ARGS},
    "mfdim": {"label": "Dimension of a space ('--char 0' scans all characters)", "run": cmd_mfdim,
              "args": _positional_space()},
    "mfinit": {"label": "Space parameters and basis description", "run": cmd_mfinit, "args": _positional_space()},
    "mfbasis": {"label": "Basis expansions", "run": cmd_mfbasis,
                "args": _positional_space() + [Arg("n", "int")]},
    "mfeigenbasis": {"label": "Hecke eigenforms of the new space", "run": cmd_mfeigenbasis,
                     "args": _positional_space() + [Arg("n", "int", default=10)]},
    "mffields": {"label": "Coefficient fields of the eigenforms", "run": cmd_mffields,
                 "args": _positional_space()},
    "mfembed": {"label": "Complex embeddings of an eigenform", "run": cmd_mfembed,
                "args": _positional_space() + [Arg("index", "int", default=0), Arg("n", "int", default=10),
                                               Arg("digits", "int")]},
    "mfheckemat": {"label": "Matrix of T(n) on the basis", "run": cmd_mfheckemat,
                   "args": _positional_space() + [Arg("n", "int", positional=True)]},
    "mfatkininit": {"label": "Atkin-Lehner operator W_Q", "run": cmd_mfatkininit,
                    "args": _positional_space() + [Arg("Q", "int", positional=True)]},
    "mfslashexpansion": {"label": "Expansion of f|gamma", "run": cmd_mfslashexpansion,
                         "args": [FORM, Arg("gamma", "matrix", positional=True, help="a,b,c,d"),
                                  Arg("n", "int", default=8), Arg("exact", "bool", default=False),
                                  Arg("embedding", "int", default=0)] + SPACE_ARGS},
    "mfeval": {"label": "Value at a point of the upper half-plane or at a cusp", "run": cmd_mfeval,
               "args": [FORM, Arg("tau", "point", positional=True, help="oo, p/q, re,im or x+yj"),
                        Arg("embedding", "int", default=0)] + SPACE_ARGS},
    "mfsymboleval": {"label": "Period polynomial int_a^b (X - tau)^(k-2) f(tau) d tau, or its value at X",
                     "run": cmd_mfsymboleval,
                     "args": [FORM, Arg("a", "point"), Arg("b", "point"), Arg("X", "complex"),
                              Arg("embedding", "int", default=0)]
                     + SPACE_ARGS},
    "mfpetersson": {"label": "Petersson product, or the Gram matrix of a cusp space", "run": cmd_mfpetersson,
                    "args": [Arg("form", "str"), Arg("form2", "str")] + SPACE_ARGS},
    "lfunmf": {"label": "L-function: root number and values", "run": cmd_lfunmf,
               "args": [FORM, Arg("s", "complex", multiple=True), Arg("embedding", "int", default=0)] + SPACE_ARGS},
    "lfunmfspec": {"label": "Special values at s = 1..k-1 and the two periods", "run": cmd_lfunmfspec,
                   "args": [FORM, Arg("embedding", "int", default=0)] + SPACE_ARGS},
    "lfunzeros": {"label": "Zeros on the critical line up to height T", "run": cmd_lfunzeros,
                  "args": [FORM, Arg("T", "float", positional=True), Arg("embedding", "int", default=0)]
                  + SPACE_ARGS},
    "lfunhardy": {"label": "Hardy function table (t, Z(t))", "run": cmd_lfunhardy,
                  "args": [FORM, Arg("t0", "float", positional=True), Arg("t1", "float", positional=True),
                           Arg("step", "float"), Arg("embedding", "int", default=0)] + SPACE_ARGS},
    "mfeigensearch": {"label": "Rational newforms with prescribed a(n)", "run": cmd_mfeigensearch,
                      "args": [Arg("levels", "levels", default=None), Arg("weight", "weight"),
                               Arg("a", "pairs", multiple=True, help="n=v"), Arg("char", "char"),
                               Arg("n", "int", default=10)]},
    "mfsearch": {"label": "Forms with a prescribed expansion prefix", "run": cmd_mfsearch,
                 "args": [Arg("levels", "levels"), Arg("weight", "weight"),
                          Arg("prefix", "rationals", help="a(0),a(1),..."), Arg("space", "str"),
                          Arg("n", "int", default=10)]},
    "mftobasis": {"label": "Coordinates of a form on the basis of a space", "run": cmd_mftobasis,
                  "args": [FORM] + SPACE_ARGS},
    "mfdescribe": {"label": "Expression tree of a form", "run": cmd_mfdescribe, "args": [FORM] + SPACE_ARGS},
    "mfparams": {"label": "Level, weight, character and field of a form", "run": cmd_mfparams,
                 "args": [FORM] + SPACE_ARGS},
}

_REQUIRED_OPTIONS = {
    "mfeigensearch": ("levels", "weight"),
    "mfsearch": ("levels", "weight", "prefix"),
}

COMMANDS: Dict[str, Callable[[Params], Result]] = {name: meta["run"] for name, meta in COMMAND_META.items()}


def list_commands() -> List[Dict]:
    out: List[Dict] = []
    for name, meta in COMMAND_META.items():
        out.append({
            "name": name,
            "label": meta["label"],
            "args": [{"name": a.name, "kind": a.kind, "positional": a.positional, "multiple": a.multiple,
                      "default": None if a.default is None else str(a.default), "help": a.help}
                     for a in meta["args"]],
        })
    return out


def dispatch(name: str, raw: Dict, cache_dir: Optional[Path] = None) -> Result:
    """Validate raw parameters for a command and run it.

    The class-number table is read from cache_dir (default config.CACHE_DIR) before the
    first command and written back whenever a command has grown it.
    """
    meta = COMMAND_META.get(name)
    if meta is None:
        raise UsageError(f"unknown command {name!r}; available: {', '.join(COMMAND_META)}")
    if not isinstance(raw, dict):
        raise UsageError("parameters must be an object")
    params = Params(meta["args"], {k: v for k, v in raw.items() if v is not None})
    for req in _REQUIRED_OPTIONS.get(name, ()):
        if params.get(req) is None:
            raise UsageError(f"missing argument: {req}")
    directory = Path(cache_dir).expanduser() if cache_dir else config.CACHE_DIR
    arith.CACHE.attach(directory)
    _log(f"{name} {sorted(params.raw)} at {params.prec} digits")
    with mpmath.workdps(params.prec):
        result = meta["run"](params)
    try:
        arith.CACHE.save_if_grown(directory)
    except OSError as exc:
        _log(f"class-number table not saved to {directory}: {exc}")
    return result
