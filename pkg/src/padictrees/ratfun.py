"""Exact rational generating functions over Q.

A RationalGF is a sparse polynomial numerator divided by a multiset of
factors (1 - c * monomial) with positive integer c and nonconstant monomial.
Denominators are never expanded; equality is decided by cross-multiplied
polynomial identity, so all arithmetic stays exact.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

Mono = tuple[int, ...]
Poly = dict[Mono, Fraction]  # exponent vector -> coefficient
Factor = tuple[int, Mono]  # (c, e) stands for 1 - c * X^e


def poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, Fraction(0)) + c
        if s:
            out[m] = s
        elif m in out:
            del out[m]
    return out


def poly_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}

def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            s = out.get(m, Fraction(0)) + c1 * c2
            if s:
                out[m] = s
            elif m in out:
                del out[m]
    return out


def factor_poly(f: Factor, nvars: int) -> Poly:
    c, e = f
    zero = (0,) * nvars
    if e == zero:
        raise DomainError("constant denominator factor")
    out = {zero: Fraction(1)}
    prev = out.get(e, Fraction(0))
    out[e] = prev - c
    if not out[e]:
        del out[e]
    return out


def poly_div_exact(num: Poly, f: Factor, nvars: int) -> Poly | None:
    """num / (1 - c X^e) if the division is exact, else None."""
    c, e = f
    maxdeg = [0] * nvars
    for m in num:
        for i, x in enumerate(m):
            maxdeg[i] = max(maxdeg[i], x)
    q: Poly = {}
    r = dict(num)
    while r:
        m = min(r)  # lex-minimal term; divisor has constant term 1
        coef = r.pop(m)
        q[m] = q.get(m, Fraction(0)) + coef
        m2 = tuple(x + y for x, y in zip(m, e))
        if any(x > d for x, d in zip(m2, maxdeg)):
            # quotient degree bound exceeded: not divisible
            if c * coef:
                return None
        s = r.get(m2, Fraction(0)) + c * coef
        if s:
            r[m2] = s
        elif m2 in r:
            del r[m2]
    return q


@dataclass(frozen=True)
class RationalGF:
    variables: tuple[str, ...]
    numerator: tuple[tuple[Mono, Fraction], ...]
    denominator: tuple[tuple[Factor, int], ...]  # factor -> multiplicity

    @staticmethod
    def make(variables, num: Poly, den: Counter) -> "RationalGF":
        for (c, e), mult in den.items():
            if c < 1 or mult < 1:
                raise DomainError("denominator factor must be 1 - c*mono, c >= 1")
            if all(x == 0 for x in e):
                raise DomainError("constant denominator factor")
        return RationalGF(
            tuple(variables),
            tuple(sorted((m, c) for m, c in num.items() if c)),
            tuple(sorted(den.items())),
        )

    def num_poly(self) -> Poly:
        return {m: c for m, c in self.numerator}

    def den_counter(self) -> Counter:
        return Counter(dict(self.denominator))

    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.numerator

    def __str__(self):
        num = _poly_str(self.num_poly(), self.variables) or "0"
        if not self.denominator:
            return num
        dens = []
        for (c, e), mult in self.denominator:
            mono = _mono_str(c, e, self.variables)
            part = f"(1 - {mono})"
            if mult > 1:
                part += f"^{mult}"
            dens.append(part)
        return f"({num}) / " + "".join(dens)

    def to_json(self) -> dict:
        return {
            "format": 1,
            "variables": list(self.variables),
            "numerator": [
                {"e": list(m), "c": str(c)} for m, c in self.numerator
            ],
            "denominator": [
                {"c": c, "e": list(e), "mult": mult}
                for (c, e), mult in self.denominator
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "RationalGF":
        num = {
            tuple(t["e"]): Fraction(t["c"]) for t in data["numerator"]
        }
        den = Counter(
            {(int(t["c"]), tuple(t["e"])): int(t["mult"]) for t in data["denominator"]}
        )
        return RationalGF.make(tuple(data["variables"]), num, den)


def _mono_str(c: int, e: Mono, variables) -> str:
    parts = [] if c == 1 else [str(c)]
    for v, x in zip(variables, e):
        if x == 1:
            parts.append(v)
        elif x > 1:
            parts.append(f"{v}^{x}")
    return "*".join(parts) if parts else str(c)


def _poly_str(p: Poly, variables) -> str:
    if not p:
        return ""
    parts = []
    for m, c in sorted(p.items()):
        if all(x == 0 for x in m):
            parts.append(str(c))
            continue
        mono = _mono_str(1, m, variables)
        if c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append(f"-{mono}")
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def gf_zero(variables) -> RationalGF:
    return RationalGF.make(variables, {}, Counter())


def gf_const(variables, value) -> RationalGF:
    nv = len(variables)
    value = Fraction(value)
    num = {(0,) * nv: value} if value else {}
    return RationalGF.make(variables, num, Counter())


def gf_monomial(variables, expvec, coef=1) -> RationalGF:
    return RationalGF.make(variables, {tuple(expvec): Fraction(coef)}, Counter())


def gf_geometric(variables, factor: Factor) -> RationalGF:
    """1 / (1 - c X^e)."""
    nv = len(variables)
    return RationalGF.make(variables, {(0,) * nv: Fraction(1)}, Counter([factor]))


def _check_vars(f: RationalGF, g: RationalGF):
    if f.variables != g.variables:
        raise DomainError(f"variable mismatch: {f.variables} vs {g.variables}")


def gf_add(f: RationalGF, g: RationalGF) -> RationalGF:
    _check_vars(f, g)
    fd, gd = f.den_counter(), g.den_counter()
    common = Counter()
    for key in set(fd) | set(gd):
        common[key] = max(fd.get(key, 0), gd.get(key, 0))
    nv = f.nvars()
    fnum, gnum = f.num_poly(), g.num_poly()
    for key in common:
        for _ in range(common[key] - fd.get(key, 0)):
            fnum = poly_mul(fnum, factor_poly(key, nv))
        for _ in range(common[key] - gd.get(key, 0)):
            gnum = poly_mul(gnum, factor_poly(key, nv))
    return gf_normalize(RationalGF.make(f.variables, poly_add(fnum, gnum), common))


def gf_neg(f: RationalGF) -> RationalGF:
    return RationalGF.make(f.variables, poly_neg(f.num_poly()), f.den_counter())


def gf_sub(f: RationalGF, g: RationalGF) -> RationalGF:
    return gf_add(f, gf_neg(g))


def gf_mul(f: RationalGF, g: RationalGF) -> RationalGF:
    _check_vars(f, g)
    num = poly_mul(f.num_poly(), g.num_poly())
    return gf_normalize(
        RationalGF.make(f.variables, num, f.den_counter() + g.den_counter())
    )


def gf_equal(f: RationalGF, g: RationalGF) -> bool:
    """Exact equality via cross-multiplied polynomial identity."""
    _check_vars(f, g)
    nv = f.nvars()
    lhs = f.num_poly()
    for key, mult in g.denominator:
        for _ in range(mult):
            lhs = poly_mul(lhs, factor_poly(key, nv))
    rhs = g.num_poly()
    for key, mult in f.denominator:
        for _ in range(mult):
            rhs = poly_mul(rhs, factor_poly(key, nv))
    return lhs == rhs


def gf_normalize(f: RationalGF) -> RationalGF:
    """Cancel denominator factors that divide the numerator exactly."""
    num = f.num_poly()
    den = f.den_counter()
    nv = f.nvars()
    if not num:
        return RationalGF.make(f.variables, {}, Counter())
    changed = True
    while changed:
        changed = False
        for key in list(den):
            if den[key] == 0:
                continue
            q = poly_div_exact(num, key, nv)
            if q is not None:
                num = q
                den[key] -= 1
                if den[key] == 0:
                    del den[key]
                changed = True
    return RationalGF.make(f.variables, num, den)


def substitute(f: RationalGF, var: str, coef: int, target: dict[str, int]) -> RationalGF:
    """Substitute var -> coef * prod(target vars ^ exps).

    coef must be a positive integer.  If var itself appears in target the
    variable survives (e.g. Z -> p Z); otherwise it is removed from the
    variable list (e.g. the last parameter variable identified with Z).
    """
    if var not in f.variables:
        raise DomainError(f"unknown variable {var}")
    if coef < 1:
        raise DomainError("scalar must be a positive integer")
    keep = var in target
    new_vars = f.variables if keep else tuple(v for v in f.variables if v != var)
    vidx = f.variables.index(var)
    tidx = {new_vars.index(w): x for w, x in target.items()}

    def map_mono(m: Mono) -> tuple[Mono, int]:
        t = m[vidx]
        base = list(m) if keep else [x for i, x in enumerate(m) if i != vidx]
        if keep:
            base[vidx] = 0
        for i, x in tidx.items():
            base[i] += t * x
        return tuple(base), t

    num: Poly = {}
    for m, c in f.numerator:
        m2, t = map_mono(m)
        s = num.get(m2, Fraction(0)) + c * coef**t
        if s:
            num[m2] = s
        elif m2 in num:
            del num[m2]
    den = Counter()
    for (c, e), mult in f.denominator:
        e2, t = map_mono(e)
        if all(x == 0 for x in e2):
            raise DomainError("substitution makes a denominator factor constant")
        den[(c * coef**t, e2)] += mult
    return gf_normalize(RationalGF.make(new_vars, num, den))


def expand_series(f: RationalGF, k: int) -> list[Fraction]:
    """Coefficients c_0..c_k of the univariate expansion (exact rationals)."""
    if f.nvars() != 1:
        raise DomainError("expand_series needs a univariate GF")
    coeffs = [Fraction(0)] * (k + 1)
    for (e,), c in f.numerator:
        if e <= k:
            coeffs[e] += c
    for (c, (a,)), mult in f.denominator:
        for _ in range(mult):
            for i in range(a, k + 1):
                coeffs[i] += c * coeffs[i - a]
    return coeffs
