"""Charts, extension generators, and canonical rational expressions.

An Expr is always stored in canonical form: a quotient of two trig-reduced
multivariate polynomials over the rationals with the common polynomial factor
cancelled and a monic denominator.  Generators are the chart's base symbols
(coordinates and parameters) plus extension symbols created on demand:
sin/cos of a bare coordinate symbol (subject to the circle relation
sin^2 + cos^2 = 1, reduced so every sine exponent is at most one) and opaque
applications exp/ln/sqrt/sin/cos of compound arguments, which carry known
derivatives but no algebraic relations.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import (
    ChartMismatchError,
    PoleError,
    UnknownSymbolError,
    ZeroDenominatorError,
)
from .sympoly import (
    Monomial,
    Poly,
    mono_get,
    mono_key,
    mono_mul,
    mono_set,
    p_add,
    p_const,
    p_const_value,
    p_diff,
    p_div_exact,
    p_gcd,
    p_is_const,
    p_is_zero,
    p_lead,
    p_mul,
    p_neg,
    p_pow,
    p_scale,
    p_sub,
    p_total_degree,
    p_var,
    p_vars,
)

Scalar = Union["Expr", Fraction, int]

_IDENT_OK = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"

FUNCTIONS = ("sin", "cos", "tan", "cot", "exp", "ln", "sqrt")


@dataclass(frozen=True)
class GenInfo:
    """One generator of the polynomial ring underlying a chart."""

    name: str
    kind: str  # "base" | "sin" | "cos" | "opaque"
    base: Optional[str] = None  # angle symbol for bare-argument sin/cos
    func: Optional[str] = None  # opaque function name
    arg: Optional["Expr"] = None  # opaque function argument


def _valid_name(name: str) -> bool:
    return (
        bool(name)
        and (name[0].isalpha() or name[0] == "_")
        and all(ch in _IDENT_OK for ch in name)
    )


class Chart:
    """An ordered coordinate chart with named parameters.

    Coordinates come first in the generator numbering, then parameters, then
    dynamically registered extension generators.  Charts compare by identity;
    expressions from different charts never mix.
    """

    def __init__(self, coordinates: Iterable[str], parameters: Iterable[str] = ()):
        coords = tuple(coordinates)
        params = tuple(parameters)
        seen: set[str] = set()
        for name in coords + params:
            if not _valid_name(name):
                raise ValueError(f"invalid symbol name '{name}'")
            if name in FUNCTIONS:
                raise ValueError(f"symbol name '{name}' shadows a function")
            if name in seen:
                raise ValueError(f"duplicate symbol name '{name}'")
            seen.add(name)
        self.coordinates = coords
        self.parameters = params
        self._gens: list[GenInfo] = [GenInfo(n, "base", base=n) for n in coords]
        self._gens += [GenInfo(n, "base", base=n) for n in params]
        self._index: dict[str, int] = {g.name: i for i, g in enumerate(self._gens)}
        self._sin_to_cos: dict[int, int] = {}
        self._deriv_cache: dict[tuple[int, str], "Expr"] = {}
        self._coord_dep: dict[int, bool] = {}
        self._lock = threading.RLock()
        self._zero = Expr(self, p_const(0), p_const(1), _raw=True)
        self._one = Expr(self, p_const(1), p_const(1), _raw=True)

    # -- symbol access ----------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def has_symbol(self, name: str) -> bool:
        idx = self._index.get(name)
        return idx is not None and self._gens[idx].kind == "base"

    def sym(self, name: str) -> "Expr":
        if not self.has_symbol(name):
            raise UnknownSymbolError(name)
        return Expr(self, p_var(self._index[name]), p_const(1), _raw=True)

    def const(self, value: Fraction | int) -> "Expr":
        return Expr(self, p_const(Fraction(value)), p_const(1), _raw=True)

    @property
    def zero(self) -> "Expr":
        return self._zero

    @property
    def one(self) -> "Expr":
        return self._one

    def parse(self, text: str) -> "Expr":
        from .parser import parse as _parse

        return _parse(self, text)

    # -- generator registry ------------------------------------------------

    def gens(self) -> tuple[GenInfo, ...]:
        with self._lock:
            return tuple(self._gens)

    def gen_info(self, index: int) -> GenInfo:
        return self._gens[index]

    def sin_to_cos(self) -> dict[int, int]:
        return self._sin_to_cos

    def trig_pair(self, angle: str) -> tuple[int, int]:
        """Generator indices of sin(angle), cos(angle) for a base symbol."""
        if not self.has_symbol(angle):
            raise UnknownSymbolError(angle)
        skey = f"sin({angle})"
        ckey = f"cos({angle})"
        with self._lock:
            if skey not in self._index:
                self._gens.append(GenInfo(skey, "sin", base=angle))
                self._index[skey] = len(self._gens) - 1
                self._gens.append(GenInfo(ckey, "cos", base=angle))
                self._index[ckey] = len(self._gens) - 1
                self._sin_to_cos = dict(self._sin_to_cos)
                self._sin_to_cos[self._index[skey]] = self._index[ckey]
            return self._index[skey], self._index[ckey]

    def opaque(self, func: str, arg: "Expr") -> int:
        """Generator index of an opaque function application."""
        if arg.chart is not self:
            raise ChartMismatchError("opaque argument from another chart")
        key = f"{func}({arg.render()})"
        with self._lock:
            if key not in self._index:
                self._gens.append(GenInfo(key, "opaque", func=func, arg=arg))
                self._index[key] = len(self._gens) - 1
            return self._index[key]

    def _gen_expr(self, index: int) -> "Expr":
        return Expr(self, p_var(index), p_const(1), _raw=True)

    def gen_depends_on_coordinates(self, index: int) -> bool:
        cached = self._coord_dep.get(index)
        if cached is not None:
            return cached
        info = self._gens[index]
        coords = set(self.coordinates)
        if info.kind == "base":
            dep = info.name in coords
        elif info.kind in ("sin", "cos"):
            dep = info.base in coords
        else:
            dep = bool(info.arg.free_symbols() & coords)
        self._coord_dep[index] = dep
        return dep

    def extend(self, extra_coordinates: Iterable[str]) -> "Chart":
        """A fresh chart with coordinates appended after the existing ones."""
        return Chart(tuple(self.coordinates) + tuple(extra_coordinates), self.parameters)


def _reduce_trig(poly: Poly, sin_to_cos: dict[int, int]) -> Poly:
    """Normal form modulo sin^2 = 1 - cos^2 for every registered angle."""
    if not sin_to_cos:
        return poly
    needs = False
    for m in poly:
        for si in sin_to_cos:
            if mono_get(m, si) >= 2:
                needs = True
                break
        if needs:
            break
    if not needs:
        return poly
    out: Poly = {}
    for m, c in poly.items():
        term: Poly = {m: c}
        for si, ci in sin_to_cos.items():
            e = mono_get(m, si)
            if e >= 2:
                reduced: Poly = {}
                for tm, tc in term.items():
                    te = mono_get(tm, si)
                    base = {mono_set(tm, si, te % 2): tc}
                    one_minus_c2 = p_sub(p_const(1), p_pow(p_var(ci), 2))
                    reduced = p_add(reduced, p_mul(base, p_pow(one_minus_c2, te // 2)))
                term = reduced
        out = p_add(out, term)
    return out


class Expr:
    """A canonical rational expression over a chart."""

    __slots__ = ("chart", "num", "den", "_hash")

    def __init__(self, chart: Chart, num: Poly, den: Poly, _raw: bool = False):
        if not _raw:
            num, den = _canonicalize(chart, num, den)
        self.chart = chart
        self.num = num
        self.den = den
        self._hash: Optional[int] = None

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return p_is_zero(self.num)

    def is_constant(self) -> bool:
        return p_is_const(self.num) and p_is_const(self.den)

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self.render()}")
        return p_const_value(self.num) / p_const_value(self.den)

    def total_degree(self) -> int:
        return max(p_total_degree(self.num), p_total_degree(self.den))

    def free_symbols(self) -> set[str]:
        out: set[str] = set()
        for idx in p_vars(self.num) | p_vars(self.den):
            info = self.chart.gen_info(idx)
            if info.kind == "base":
                out.add(info.name)
            elif info.kind in ("sin", "cos"):
                out.add(info.base)
            else:
                out |= info.arg.free_symbols()
        return out

    def depends_only_on(self, names: Iterable[str]) -> bool:
        return self.free_symbols() <= set(names)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other: Scalar) -> "Expr":
        if isinstance(other, Expr):
            if other.chart is not self.chart:
                raise ChartMismatchError("operands on different charts")
            return other
        return self.chart.const(Fraction(other))

    def __add__(self, other: Scalar) -> "Expr":
        o = self._coerce(other)
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        if self.den == o.den:
            return Expr(self.chart, p_add(self.num, o.num), self.den)
        num = p_add(p_mul(self.num, o.den), p_mul(o.num, self.den))
        return Expr(self.chart, num, p_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(self.chart, p_neg(self.num), self.den, _raw=True)

    def __sub__(self, other: Scalar) -> "Expr":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "Expr":
        return self._coerce(other) - self

    def __mul__(self, other: Scalar) -> "Expr":
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return self.chart.zero
        return Expr(self.chart, p_mul(self.num, o.num), p_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Expr":
        o = self._coerce(other)
        return Expr(self.chart, p_mul(self.num, o.den), p_mul(self.den, o.num))

    def __rtruediv__(self, other: Scalar) -> "Expr":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n == 0:
            return self.chart.one
        if n < 0:
            return Expr(self.chart, p_pow(self.den, -n), p_pow(self.num, -n))
        return Expr(self.chart, p_pow(self.num, n), p_pow(self.den, n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return self.is_constant() and self.as_fraction() == Fraction(other)
            return NotImplemented
        return (
            self.chart is other.chart
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (id(self.chart), frozenset(self.num.items()), frozenset(self.den.items()))
            )
        return self._hash

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        ns = _render_poly(self.chart, self.num)
        if p_is_const(self.den) and p_const_value(self.den) == 1:
            return ns
        ds = _render_poly(self.chart, self.den)
        return f"({ns})/({ds})"

    def __repr__(self) -> str:
        return f"Expr({self.render()})"

    __str__ = render


def _sin_conjugate(poly: Poly, si: int) -> Poly:
    """Image under sin -> -sin for one angle (an automorphism of the ring)."""
    out: Poly = {}
    for m, c in poly.items():
        out[m] = -c if mono_get(m, si) % 2 else c
    return out


def _clear_sin_denominator(s2c: dict[int, int], num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Multiply through by conjugates until the denominator is sine-free.

    With sine-free denominators, cross-multiplied identities hold in the
    plain polynomial ring, which makes the canonical representative unique
    even though the circle ring is not a UFD.
    """
    for si in s2c:
        if any(mono_get(m, si) for m in den):
            conj = _sin_conjugate(den, si)
            num = _reduce_trig(p_mul(num, conj), s2c)
            den = _reduce_trig(p_mul(den, conj), s2c)
    return num, den


def _canonicalize(chart: Chart, num: Poly, den: Poly) -> tuple[Poly, Poly]:
    s2c = chart.sin_to_cos()
    num = _reduce_trig(num, s2c)
    den = _reduce_trig(den, s2c)
    if p_is_zero(den):
        raise ZeroDenominatorError("denominator is identically zero")
    if p_is_zero(num):
        return {}, p_const(1)
    if s2c:
        num, den = _clear_sin_denominator(s2c, num, den)
    if p_is_const(den):
        c = p_const_value(den)
        return p_scale(num, 1 / c), p_const(1)
    if not p_is_const(num):
        q = p_div_exact(num, den)
        if q is not None:
            num, den = q, p_const(1)
        else:
            g = p_gcd(num, den)
            if not p_is_const(g):
                qn = p_div_exact(num, g)
                qd = p_div_exact(den, g)
                assert qn is not None and qd is not None
                num, den = qn, qd
    if p_is_const(den):
        c = p_const_value(den)
        return p_scale(num, 1 / c), p_const(1)
    lc = p_lead(den)[1]
    if lc != 1:
        num = p_scale(num, 1 / lc)
        den = p_scale(den, 1 / lc)
    return num, den


def _render_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _render_poly(chart: Chart, poly: Poly) -> str:
    if p_is_zero(poly):
        return "0"
    terms = sorted(poly.items(), key=lambda kv: mono_key(kv[0]), reverse=True)
    pieces: list[str] = []
    for m, c in terms:
        factors = []
        for i, e in enumerate(m):
            if e:
                name = chart.gen_info(i).name
                factors.append(name if e == 1 else f"{name}^{e}")
        if not factors:
            body = _render_coeff(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = _render_coeff(abs(c)) + "*" + "*".join(factors)
        if not pieces:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append((" + " if c > 0 else " - ") + body)
    return "".join(pieces)


def normalize(e: Expr) -> Expr:
    """Canonical form of an expression.

    Expressions are canonicalized at construction, so this returns its
    argument; it exists so callers can state the intent explicitly.
    """
    return e


# -- elementary functions ----------------------------------------------------


def _as_bare_symbol(e: Expr) -> Optional[str]:
    if not p_is_const(e.den) or p_const_value(e.den) != 1:
        return None
    if len(e.num) != 1:
        return None
    m, c = next(iter(e.num.items()))
    if c != 1 or sum(m) != 1:
        return None
    idx = [i for i, ee in enumerate(m) if ee][0]
    info = e.chart.gen_info(idx)
    return info.name if info.kind == "base" else None


def fn_sin(arg: Expr) -> Expr:
    if arg.is_zero():
        return arg.chart.zero
    name = _as_bare_symbol(arg)
    if name is not None:
        si, _ = arg.chart.trig_pair(name)
        return arg.chart._gen_expr(si)
    return arg.chart._gen_expr(arg.chart.opaque("sin", arg))


def fn_cos(arg: Expr) -> Expr:
    if arg.is_zero():
        return arg.chart.one
    name = _as_bare_symbol(arg)
    if name is not None:
        _, ci = arg.chart.trig_pair(name)
        return arg.chart._gen_expr(ci)
    return arg.chart._gen_expr(arg.chart.opaque("cos", arg))


def fn_tan(arg: Expr) -> Expr:
    return fn_sin(arg) / fn_cos(arg)


def fn_cot(arg: Expr) -> Expr:
    return fn_cos(arg) / fn_sin(arg)


def fn_exp(arg: Expr) -> Expr:
    if arg.is_zero():
        return arg.chart.one
    return arg.chart._gen_expr(arg.chart.opaque("exp", arg))


def fn_ln(arg: Expr) -> Expr:
    if arg == 1:
        return arg.chart.zero
    return arg.chart._gen_expr(arg.chart.opaque("ln", arg))


def fn_sqrt(arg: Expr) -> Expr:
    if arg.is_constant():
        from .sympoly import _frac_sqrt

        r = _frac_sqrt(arg.as_fraction())
        if r is not None:
            return arg.chart.const(r)
    return arg.chart._gen_expr(arg.chart.opaque("sqrt", arg))


FUNCTION_TABLE: dict[str, Callable[[Expr], Expr]] = {
    "sin": fn_sin,
    "cos": fn_cos,
    "tan": fn_tan,
    "cot": fn_cot,
    "exp": fn_exp,
    "ln": fn_ln,
    "sqrt": fn_sqrt,
}


# -- differentiation ----------------------------------------------------------


def _gen_derivative(chart: Chart, index: int, sym: str) -> Expr:
    cached = chart._deriv_cache.get((index, sym))
    if cached is not None:
        return cached
    info = chart.gen_info(index)
    if info.kind == "base":
        out = chart.one if info.name == sym else chart.zero
    elif info.kind == "sin":
        if info.base == sym:
            _, ci = chart.trig_pair(info.base)
            out = chart._gen_expr(ci)
        else:
            out = chart.zero
    elif info.kind == "cos":
        if info.base == sym:
            si, _ = chart.trig_pair(info.base)
            out = -chart._gen_expr(si)
        else:
            out = chart.zero
    else:
        darg = differentiate(info.arg, sym)
        if darg.is_zero():
            out = chart.zero
        else:
            self_expr = chart._gen_expr(index)
            if info.func == "exp":
                out = self_expr * darg
            elif info.func == "ln":
                out = darg / info.arg
            elif info.func == "sqrt":
                out = darg / (chart.const(2) * self_expr)
            elif info.func == "sin":
                out = fn_cos(info.arg) * darg
            elif info.func == "cos":
                out = -fn_sin(info.arg) * darg
            else:
                raise ValueError(f"no derivative rule for '{info.func}'")
    chart._deriv_cache[(index, sym)] = out
    return out


def _poly_derivative(chart: Chart, poly: Poly, sym: str) -> Expr:
    total = chart.zero
    for idx in p_vars(poly):
        dgen = _gen_derivative(chart, idx, sym)
        if dgen.is_zero():
            continue
        dp = p_diff(poly, idx)
        if dp:
            total = total + Expr(chart, dp, p_const(1)) * dgen
    return total


def differentiate(e: Expr, sym: str) -> Expr:
    """Partial derivative with respect to a base symbol of the chart."""
    chart = e.chart
    if not chart.has_symbol(sym):
        raise UnknownSymbolError(sym)
    dn = _poly_derivative(chart, e.num, sym)
    if p_is_const(e.den):
        return dn
    dd = _poly_derivative(chart, e.den, sym)
    den_expr = Expr(chart, e.den, p_const(1), _raw=True)
    num_expr = Expr(chart, e.num, p_const(1), _raw=True)
    return (dn * den_expr - num_expr * dd) / (den_expr * den_expr)


# -- evaluation ----------------------------------------------------------------


def eval_at(e: Expr, point) -> Fraction:
    """Exact evaluation at a sample point; raises PoleError on a zero denominator."""
    if point.chart is not e.chart:
        raise ChartMismatchError("sample point from another chart")
    den = _eval_poly(e.den, point)
    if den == 0:
        raise PoleError(_render_poly(e.chart, e.den))
    return _eval_poly(e.num, point) / den


def _eval_poly(poly: Poly, point) -> Fraction:
    total = Fraction(0)
    for m, c in poly.items():
        term = c
        for i, ee in enumerate(m):
            if ee:
                term *= point.value(i) ** ee
        total += term
    return total


_FLOAT_FUNCS = {
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
}


def eval_float(e: Expr, base_values: dict[str, float]) -> float:
    """Float shadow evaluation from base-symbol values.

    Trig extension generators take their real values sin(theta), cos(theta),
    unlike exact sample points, which assign independent circle coordinates.
    """

    def gen_value(idx: int) -> float:
        info = e.chart.gen_info(idx)
        if info.kind == "base":
            return base_values[info.name]
        if info.kind == "sin":
            return math.sin(base_values[info.base])
        if info.kind == "cos":
            return math.cos(base_values[info.base])
        return _FLOAT_FUNCS[info.func](eval_float(info.arg, base_values))

    def poly_value(poly: Poly) -> float:
        total = 0.0
        for m, c in poly.items():
            term = float(c)
            for i, ee in enumerate(m):
                if ee:
                    term *= gen_value(i) ** ee
            total += term
        return total

    den = poly_value(e.den)
    if abs(den) < 1e-300:
        raise PoleError(_render_poly(e.chart, e.den))
    return poly_value(e.num) / den


# -- substitution and transfer --------------------------------------------------


def _rebuild(e: Expr, gen_value: Callable[[int], Expr], zero: Expr, one: Expr) -> Expr:
    def poly_to_expr(poly: Poly) -> Expr:
        total = zero
        for m, c in poly.items():
            term = one.chart.const(c)
            for i, ee in enumerate(m):
                if ee:
                    term = term * gen_value(i) ** ee
            total = total + term
        return total

    num = poly_to_expr(e.num)
    den = poly_to_expr(e.den)
    return num / den


def substitute(e: Expr, mapping: dict[str, Scalar]) -> Expr:
    """Substitute expressions (or constants) for base symbols, same chart."""
    chart = e.chart
    repl: dict[str, Expr] = {}
    for name, value in mapping.items():
        if not chart.has_symbol(name):
            raise UnknownSymbolError(name)
        repl[name] = value if isinstance(value, Expr) else chart.const(Fraction(value))
        if repl[name].chart is not chart:
            raise ChartMismatchError("substitution value on another chart")

    def gen_value(idx: int) -> Expr:
        info = chart.gen_info(idx)
        if info.kind == "base":
            return repl.get(info.name, chart._gen_expr(idx))
        if info.kind in ("sin", "cos"):
            if info.base not in repl:
                return chart._gen_expr(idx)
            fn = fn_sin if info.kind == "sin" else fn_cos
            return fn(repl[info.base])
        new_arg = substitute(info.arg, mapping)
        if new_arg == info.arg:
            return chart._gen_expr(idx)
        return FUNCTION_TABLE[info.func](new_arg)

    return _rebuild(e, gen_value, chart.zero, chart.one)


def transfer(e: Expr, target: Chart) -> Expr:
    """Rebuild an expression on another chart that contains its base symbols."""
    if e.chart is target:
        return e
    source = e.chart

    def gen_value(idx: int) -> Expr:
        info = source.gen_info(idx)
        if info.kind == "base":
            return target.sym(info.name)
        if info.kind == "sin":
            return fn_sin(target.sym(info.base))
        if info.kind == "cos":
            return fn_cos(target.sym(info.base))
        return FUNCTION_TABLE[info.func](transfer(info.arg, target))

    return _rebuild(e, gen_value, target.zero, target.one)


# -- exact antiderivatives -------------------------------------------------------


def antiderivative(e: Expr, sym: str) -> Optional[Expr]:
    """An expression F with dF/d(sym) = e, or None when outside the exact class.

    Supported integrands are polynomial in sym, sin(sym) and cos(sym) (with
    coefficients free of sym); denominators must not involve sym.  This is the
    class closed under the classic power-reduction formulas, which suffices
    for path integration of exact covector components.
    """
    chart = e.chart
    if not chart.has_symbol(sym):
        raise UnknownSymbolError(sym)

    def involves_sym(idx: int) -> bool:
        info = chart.gen_info(idx)
        if info.kind == "base":
            return info.name == sym
        if info.kind in ("sin", "cos"):
            return info.base == sym
        return sym in info.arg.free_symbols()

    for idx in p_vars(e.den):
        if involves_sym(idx):
            return None

    sym_idx = chart._index[sym]
    skey = f"sin({sym})"
    si = chart._index.get(skey)
    ci = chart._sin_to_cos.get(si) if si is not None else None

    total = chart.zero
    den_expr = Expr(chart, e.den, p_const(1), _raw=True)
    for m, c in e.num.items():
        p = mono_get(m, sym_idx)
        a = mono_get(m, si) if si is not None else 0
        b = mono_get(m, ci) if ci is not None else 0
        rest = mono_set(m, sym_idx, 0)
        if si is not None:
            rest = mono_set(rest, si, 0)
        if ci is not None:
            rest = mono_set(rest, ci, 0)
        for idx, ee in enumerate(rest):
            if ee and involves_sym(idx):
                return None
        piece = _integrate_monomial(chart, sym, p, a, b)
        if piece is None:
            return None
        total = total + Expr(chart, {rest: c}, p_const(1), _raw=True) * piece
    return total / den_expr


def _integrate_monomial(chart: Chart, sym: str, p: int, a: int, b: int) -> Optional[Expr]:
    """Integral of sym^p * sin(sym)^a * cos(sym)^b with respect to sym."""
    x = chart.sym(sym)
    if a == 0 and b == 0:
        return x ** (p + 1) / (p + 1)
    s = fn_sin(x)
    c = fn_cos(x)
    if p == 0:
        if a == 0:
            if b == 0:
                return x
            inner = _integrate_monomial(chart, sym, 0, 0, b - 2) if b >= 2 else chart.zero
            if b == 1:
                return s
            if inner is None:
                return None
            return c ** (b - 1) * s / b + inner * Fraction(b - 1, b)
        if a == 1:
            return -(c ** (b + 1)) / (b + 1)
        return None  # canonical forms keep sine exponents below two
    # integration by parts lowers the power of sym
    inner = _integrate_monomial(chart, sym, 0, a, b)
    if inner is None:
        return None
    tail = antiderivative(x ** (p - 1) * inner, sym)
    if tail is None:
        return None
    return x**p * inner - chart.const(p) * tail


def strip_coordinate_constant(e: Expr) -> Expr:
    """Drop monomials free of all coordinates when the denominator is too.

    Used to present first integrals without additive constants (which may be
    parameter expressions, e.g. the -eps left by path integration).
    """
    chart = e.chart
    for idx in p_vars(e.den):
        if chart.gen_depends_on_coordinates(idx):
            return e
    const_part: Poly = {}
    for m, c in e.num.items():
        if not any(
            ee and chart.gen_depends_on_coordinates(i) for i, ee in enumerate(m)
        ):
            const_part[m] = c
    if not const_part:
        return e
    return Expr(chart, p_sub(e.num, const_part), e.den)
