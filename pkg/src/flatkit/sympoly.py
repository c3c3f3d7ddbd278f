"""Exact sparse multivariate polynomial arithmetic over the rationals.

A polynomial is a dict mapping monomials to nonzero Fraction coefficients.
A monomial is a tuple of nonnegative exponents indexed by generator number,
stored with trailing zeros trimmed so the representation stays canonical
when the generator list grows.  The monomial order is graded lexicographic;
on trimmed tuples the plain (total degree, tuple) key realizes it because
equal-degree monomials are never prefixes of one another.
"""

from __future__ import annotations

import heapq
import math
from fractions import Fraction
from typing import Callable, Iterable, Optional

Monomial = tuple[int, ...]
Poly = dict[Monomial, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _trim(exps: Iterable[int]) -> Monomial:
    out = list(exps)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def mono_key(m: Monomial) -> tuple[int, Monomial]:
    return (sum(m), m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    return tuple(out)


def mono_div(a: Monomial, b: Monomial) -> Optional[Monomial]:
    """a / b componentwise, or None when b does not divide a."""
    if len(b) > len(a):
        return None
    out = list(a)
    for i, e in enumerate(b):
        out[i] -= e
        if out[i] < 0:
            return None
    return _trim(out)


def mono_get(m: Monomial, i: int) -> int:
    return m[i] if i < len(m) else 0


def mono_set(m: Monomial, i: int, e: int) -> Monomial:
    out = list(m) + [0] * max(0, i + 1 - len(m))
    out[i] = e
    return _trim(out)


def p_zero() -> Poly:
    return {}


def p_const(c: Fraction | int) -> Poly:
    c = Fraction(c)
    return {} if c == 0 else {(): c}


def p_var(i: int) -> Poly:
    return {mono_set((), i, 1): _ONE}


def p_is_zero(p: Poly) -> bool:
    return not p


def p_is_const(p: Poly) -> bool:
    return not p or (len(p) == 1 and () in p)


def p_const_value(p: Poly) -> Fraction:
    if not p:
        return _ZERO
    return p[()]


def p_add(a: Poly, b: Poly) -> Poly:
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def p_sub(a: Poly, b: Poly) -> Poly:
    return p_add(a, p_neg(b))


def p_scale(a: Poly, c: Fraction) -> Poly:
    if not c:
        return {}
    return {m: c * v for m, v in a.items()}


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            s = out.get(m, 0) + ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_pow(a: Poly, n: int) -> Poly:
    if n < 0:
        raise ValueError("negative polynomial power")
    out = p_const(1)
    base = a
    while n:
        if n & 1:
            out = p_mul(out, base)
        base_needed = n >> 1
        if base_needed:
            base = p_mul(base, base)
        n >>= 1
    return out


def p_total_degree(a: Poly) -> int:
    if not a:
        return 0
    return max(sum(m) for m in a)


def p_degree_in(a: Poly, i: int) -> int:
    d = 0
    for m in a:
        e = mono_get(m, i)
        if e > d:
            d = e
    return d


def p_vars(a: Poly) -> set[int]:
    out: set[int] = set()
    for m in a:
        for i, e in enumerate(m):
            if e:
                out.add(i)
    return out


def p_lead(a: Poly) -> tuple[Monomial, Fraction]:
    m = max(a, key=mono_key)
    return m, a[m]


def p_diff(a: Poly, i: int) -> Poly:
    """Formal partial derivative treating all generators as independent."""
    out: Poly = {}
    for m, c in a.items():
        e = mono_get(m, i)
        if e:
            dm = mono_set(m, i, e - 1)
            s = out.get(dm, _ZERO) + c * e
            if s:
                out[dm] = s
            else:
                out.pop(dm, None)
    return out


def p_eval(a: Poly, values: Callable[[int], Fraction]) -> Fraction:
    total = _ZERO
    for m, c in a.items():
        term = c
        for i, e in enumerate(m):
            if e:
                term *= values(i) ** e
        total += term
    return total


def p_substitute(a: Poly, i: int, value: Poly) -> Poly:
    """Replace generator i by a polynomial."""
    out: Poly = {}
    powers: dict[int, Poly] = {0: p_const(1)}

    def power(e: int) -> Poly:
        if e not in powers:
            powers[e] = p_mul(power(e - 1), value)
        return powers[e]

    for m, c in a.items():
        e = mono_get(m, i)
        base = {mono_set(m, i, 0): c}
        out = p_add(out, p_mul(base, power(e)) if e else base)
    return out


def _heap_key(m: Monomial) -> tuple[int, tuple[int, ...]]:
    """mono_key negated so a min-heap pops the graded-lex largest first."""
    return (-sum(m), tuple(-e for e in m))


def p_div_exact(a: Poly, b: Poly) -> Optional[Poly]:
    """Quotient a/b when b divides a exactly, else None.

    Single descending pass over the remainder support: every monomial in the
    remainder owns a live heap entry, entries for cancelled monomials are
    skipped on pop, and products of a quotient term only land strictly below
    the monomial being eliminated.
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    if p_is_const(b):
        inv = 1 / p_const_value(b)
        return p_scale(a, inv)
    mb, cb = p_lead(b)
    btail = [(m, c) for m, c in b.items() if m != mb]
    rem = dict(a)
    quo: Poly = {}
    heap = [(_heap_key(m), m) for m in rem]
    heapq.heapify(heap)
    while heap:
        _, mr = heapq.heappop(heap)
        cr = rem.pop(mr, _ZERO)
        if not cr:
            continue
        m = mono_div(mr, mb)
        if m is None:
            return None
        c = cr / cb
        quo[m] = c
        for mt, ct in btail:
            mm = mono_mul(m, mt)
            prev = rem.get(mm, _ZERO)
            val = prev - c * ct
            if val:
                if not prev:
                    heapq.heappush(heap, (_heap_key(mm), mm))
                rem[mm] = val
            elif prev:
                del rem[mm]
    return {m: c for m, c in quo.items() if c}


def p_content(a: Poly) -> Fraction:
    """Rational content; the primitive part has positive leading coefficient."""
    if not a:
        return _ZERO
    num = 0
    den = 1
    for c in a.values():
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    content = Fraction(num, den)
    if p_lead(a)[1] < 0:
        content = -content
    return content


def p_primitive(a: Poly) -> Poly:
    if not a:
        return {}
    return p_scale(a, 1 / p_content(a))


def _uv_coeffs(a: Poly, v: int) -> dict[int, Poly]:
    """View a as univariate in generator v with polynomial coefficients."""
    out: dict[int, Poly] = {}
    for m, c in a.items():
        e = mono_get(m, v)
        base = mono_set(m, v, 0)
        coeff = out.setdefault(e, {})
        s = coeff.get(base, 0) + c
        if s:
            coeff[base] = s
        else:
            coeff.pop(base, None)
    return {e: c for e, c in out.items() if c}


def _uv_assemble(coeffs: dict[int, Poly], v: int) -> Poly:
    out: Poly = {}
    for e, poly in coeffs.items():
        for m, c in poly.items():
            out[mono_set(m, v, e)] = c
    return out


# --- gcd core over integer coefficients ---
#
# The remainder sequence runs on dict[Monomial, int]: Fraction arithmetic
# renormalizes on every operation, which dominates runtime on the dense
# intermediate products, while plain ints are cheap.  p_add/p_sub/p_mul and
# the monomial helpers work on either coefficient ring.

ZPoly = Poly  # same shape, int coefficients


def _to_zz(a: Poly) -> ZPoly:
    den = 1
    for c in a.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    out = {m: int(c * den) for m, c in a.items()}
    g = _zcontent(out)
    if g > 1:
        out = {m: v // g for m, v in out.items()}
    return out


def _zcontent(a: ZPoly) -> int:
    g = 0
    for v in a.values():
        g = math.gcd(g, v)
        if g == 1:
            return 1
    return g


def _zposlead(a: ZPoly) -> ZPoly:
    if a and p_lead(a)[1] < 0:
        return {m: -c for m, c in a.items()}
    return dict(a)


def _zpow(a: ZPoly, n: int) -> ZPoly:
    out: Optional[ZPoly] = None
    base = a
    while n:
        if n & 1:
            out = base if out is None else p_mul(out, base)
        n >>= 1
        if n:
            base = p_mul(base, base)
    assert out is not None, "zero power not needed here"
    return out


def _zdiv_exact(a: ZPoly, b: ZPoly) -> Optional[ZPoly]:
    """Quotient a/b over the integers when exact, else None.

    Same heap walk as p_div_exact, with exactness decided per quotient term.
    """
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if not a:
        return {}
    mb, cb = p_lead(b)
    if len(b) == 1:
        quo: ZPoly = {}
        for mr, cr in a.items():
            m = mono_div(mr, mb)
            if m is None:
                return None
            c, leftover = divmod(cr, cb)
            if leftover:
                return None
            quo[m] = c
        return quo
    btail = [(m, c) for m, c in b.items() if m != mb]
    rem = dict(a)
    quo = {}
    heap = [(_heap_key(m), m) for m in rem]
    heapq.heapify(heap)
    while heap:
        _, mr = heapq.heappop(heap)
        cr = rem.pop(mr, 0)
        if not cr:
            continue
        m = mono_div(mr, mb)
        if m is None:
            return None
        c, leftover = divmod(cr, cb)
        if leftover:
            return None
        quo[m] = c
        for mt, ct in btail:
            mm = mono_mul(m, mt)
            prev = rem.get(mm, 0)
            val = prev - c * ct
            if val:
                if not prev:
                    heapq.heappush(heap, (_heap_key(mm), mm))
                rem[mm] = val
            elif prev:
                del rem[mm]
    return {m: c for m, c in quo.items() if c}


def _uv_zcontent(coeffs: dict[int, ZPoly]) -> ZPoly:
    g: ZPoly = {}
    for p in coeffs.values():
        g = _zgcd(g, p)
        if g == {(): 1}:
            return g
    return g


def _uv_zdivide(coeffs: dict[int, ZPoly], d: ZPoly) -> dict[int, ZPoly]:
    if d == {(): 1}:
        return coeffs
    out: dict[int, ZPoly] = {}
    for e, poly in coeffs.items():
        q = _zdiv_exact(poly, d)
        assert q is not None, "content division must be exact"
        out[e] = q
    return out


def _uv_prem(a: dict[int, ZPoly], b: dict[int, ZPoly]) -> dict[int, ZPoly]:
    """Standard pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b."""
    db = max(b)
    lb = b[db]
    steps = max(a) - db + 1
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        # r := lb*r - lr*b*v^(dr-db)
        new: dict[int, ZPoly] = {}
        for e, poly in r.items():
            new[e] = p_mul(lb, poly)
        for e, poly in b.items():
            shifted = e + dr - db
            new[shifted] = p_sub(new.get(shifted, {}), p_mul(lr, poly))
        r = {e: poly for e, poly in new.items() if poly}
        steps -= 1
    # pad skipped degree drops so the subresultant divisibility theory applies
    if steps > 0 and r:
        factor = _zpow(lb, steps)
        r = {e: p_mul(factor, poly) for e, poly in r.items()}
    return r


def _mono_content(a: Poly) -> Monomial:
    """Componentwise minimum exponent vector over the support of a."""
    it = iter(a)
    mins = list(next(it))
    for m in it:
        if not mins:
            break
        for i in range(len(mins)):
            e = m[i] if i < len(m) else 0
            if e < mins[i]:
                mins[i] = e
        while mins and mins[-1] == 0:
            mins.pop()
    return tuple(mins)


def _mono_shift_down(a: Poly, m: Monomial) -> Poly:
    if not m:
        return a
    out: Poly = {}
    for mm, c in a.items():
        q = mono_div(mm, m)
        assert q is not None
        out[q] = c
    return out


def _zgcd(a: ZPoly, b: ZPoly) -> ZPoly:
    """Integer gcd (content included), positive leading coefficient."""
    if not a:
        return _zposlead(b)
    if not b:
        return _zposlead(a)
    if p_is_const(a):
        return {(): math.gcd(a[()], _zcontent(b))}
    if p_is_const(b):
        return {(): math.gcd(b[()], _zcontent(a))}
    if a == b:
        return _zposlead(a)
    ia = _zcontent(a)
    ib = _zcontent(b)
    ig = math.gcd(ia, ib)
    if ia > 1:
        a = {m: c // ia for m, c in a.items()}
    if ib > 1:
        b = {m: c // ib for m, c in b.items()}
    # the monomial content splits off cheaply and shrinks everything below
    ma = _mono_content(a)
    mb = _mono_content(b)
    mg = tuple(min(x, y) for x, y in zip(ma, mb))
    while mg and mg[-1] == 0:
        mg = mg[:-1]
    a = _mono_shift_down(a, ma)
    b = _mono_shift_down(b, mb)

    def lift(g: ZPoly) -> ZPoly:
        if mg:
            g = {mono_mul(m, mg): c for m, c in g.items()}
        if ig > 1:
            g = {m: c * ig for m, c in g.items()}
        return g

    if p_is_const(a) or p_is_const(b):
        return lift({(): 1})
    common = p_vars(a) & p_vars(b)
    if not common:
        return lift({(): 1})
    # trial divisions catch the frequent "one operand divides the other" case
    if len(b) <= len(a) and _zdiv_exact(a, b) is not None:
        return _zposlead(lift(b))
    if len(a) <= len(b) and _zdiv_exact(b, a) is not None:
        return _zposlead(lift(a))
    v = max(common)
    ua = _uv_coeffs(a, v)
    ub = _uv_coeffs(b, v)
    ca = _uv_zcontent(ua)
    cb = _uv_zcontent(ub)
    cont = _zgcd(ca, cb)
    ua = _uv_zdivide(ua, ca)
    ub = _uv_zdivide(ub, cb)
    if max(ua) < max(ub):
        ua, ub = ub, ua
    # subresultant sequence: divide each remainder by the known factor g*h^d
    # instead of recomputing multivariate contents at every step
    g: ZPoly = {(): 1}
    h: ZPoly = {(): 1}
    while max(ub) > 0:
        d = max(ua) - max(ub)
        r = _uv_prem(ua, ub)
        if not r:
            break
        divisor = p_mul(g, _zpow(h, d)) if d else g
        r = _uv_zdivide(r, divisor)
        ua, ub = ub, r
        g = ua[max(ua)]
        if d == 1:
            h = g
        elif d > 1:
            hn = _zdiv_exact(_zpow(g, d), _zpow(h, d - 1))
            assert hn is not None, "subresultant h-sequence division must be exact"
            h = hn
    if max(ub) == 0:
        return _zposlead(lift(cont))
    rc = _uv_zcontent(ub)
    ub = _uv_zdivide(ub, rc)
    return _zposlead(lift(p_mul(cont, _uv_assemble(ub, v))))


def p_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive positive-lead gcd via an integer subresultant remainder sequence."""
    if p_is_zero(a):
        return p_primitive(b)
    if p_is_zero(b):
        return p_primitive(a)
    if p_is_const(a) or p_is_const(b):
        return p_const(1)
    if a == b:
        return p_primitive(a)
    g = _zgcd(_to_zz(a), _to_zz(b))
    if p_is_const(g):
        return p_const(1)
    return p_primitive({m: Fraction(c) for m, c in g.items()})


def p_lcm(a: Poly, b: Poly) -> Poly:
    if p_is_zero(a) or p_is_zero(b):
        return {}
    q = p_div_exact(p_mul(a, b), p_gcd(a, b))
    assert q is not None
    return p_primitive(q)


def _frac_sqrt(c: Fraction) -> Optional[Fraction]:
    if c < 0:
        return None
    ns = math.isqrt(c.numerator)
    ds = math.isqrt(c.denominator)
    if ns * ns != c.numerator or ds * ds != c.denominator:
        return None
    return Fraction(ns, ds)


def p_sqrt(a: Poly) -> Optional[Poly]:
    """Exact polynomial square root, or None when a is not a perfect square."""
    if not a:
        return {}
    if p_is_const(a):
        r = _frac_sqrt(p_const_value(a))
        return None if r is None else p_const(r)
    v = max(p_vars(a))
    cf = _uv_coeffs(a, v)
    n = max(cf)
    if n % 2:
        return None
    m = n // 2
    qm = p_sqrt(cf[n])
    if qm is None:
        return None
    q: dict[int, Poly] = {m: qm}
    two_qm = p_scale(qm, Fraction(2))
    for k in range(m - 1, -1, -1):
        s = cf.get(m + k, {})
        for i in range(k + 1, m):
            j = m + k - i
            if k + 1 <= j <= m - 1:
                s = p_sub(s, p_mul(q[i], q[j]))
        qk = p_div_exact(s, two_qm)
        if qk is None:
            return None
        q[k] = qk
    root = _uv_assemble({e: poly for e, poly in q.items() if poly}, v)
    if p_sub(p_mul(root, root), a):
        return None
    return root
