"""Linear functions and cell subsets of the value group Gamma = Z.

A GammaCell is a triangular normal form: per coordinate a lower bound that
is a linear function of the earlier coordinates, an upper bound that is a
linear function or infinity, and a congruence condition.  A GammaSet is a
finite disjoint union of cells.  cell_gf produces the exact rational
generating function of the lattice points by innermost-first telescoped
geometric sums, refining congruence classes on demand so that every bound
is constant modulo the summation period.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import ceil, floor as _floor, gcd, lcm

from .errors import (
    DomainError,
    NonIntegral,
    NonIntegralExponent,
    UnboundedBelow,
)
from .ratfun import RationalGF, gf_add, gf_const, gf_zero


class _Infinity:
    """Marker for an infinite bone length or a missing upper bound."""

    def __repr__(self):
        return "inf"

    def __deepcopy__(self, memo):
        return self


INFINITY = _Infinity()


@dataclass(frozen=True)
class LinearFn:
    """a_1 k_1 + ... + a_j k_j + b with rational coefficients."""

    coeffs: tuple[Fraction, ...]
    const: Fraction

    def arity(self) -> int:
        return len(self.coeffs)

    def value(self, point) -> Fraction:
        if len(point) < len(self.coeffs):
            raise DomainError("point has too few coordinates")
        total = Fraction(self.const)
        for a, k in zip(self.coeffs, point):
            total += a * k
        return total

    def is_constant(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def __str__(self):
        parts = []
        for i, a in enumerate(self.coeffs):
            if a:
                parts.append(f"{a}*k{i + 1}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


def linear(coeffs, const=0) -> LinearFn:
    return LinearFn(tuple(Fraction(a) for a in coeffs), Fraction(const))


def const_fn(value, arity=0) -> LinearFn:
    return LinearFn((Fraction(0),) * arity, Fraction(value))


def eval_linear(fn, point):
    """Exact integer value of fn at point, or INFINITY for the marker."""
    if fn is INFINITY:
        return INFINITY
    v = fn.value(point)
    if v.denominator != 1:
        raise NonIntegral(f"{fn} = {v} at {tuple(point)}")
    return int(v)


@dataclass(frozen=True)
class GammaCell:
    """Triangular cell: bounds[i] = (lo, hi) over coords < i, cong[i] = (r, rho)."""

    bounds: tuple[tuple[LinearFn, object], ...]
    cong: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.bounds) != len(self.cong):
            raise DomainError("bounds and congruences must have equal length")
        for i, (lo, hi) in enumerate(self.bounds):
            if lo is INFINITY or not isinstance(lo, LinearFn):
                raise UnboundedBelow(f"coordinate {i + 1} needs a linear lower bound")
            if lo.arity() > i:
                raise DomainError("lower bound uses later coordinates")
            if hi is not INFINITY:
                if not isinstance(hi, LinearFn) or hi.arity() > i:
                    raise DomainError("upper bound uses later coordinates")
        for r, rho in self.cong:
            if rho < 1:
                raise DomainError("congruence modulus must be >= 1")
            if not 0 <= r < rho:
                raise DomainError("residue must satisfy 0 <= r < rho")

    @property
    def m(self) -> int:
        return len(self.bounds)

    def contains(self, point) -> bool:
        if len(point) != self.m:
            return False
        for i, (k, (lo, hi), (r, rho)) in enumerate(
            zip(point, self.bounds, self.cong)
        ):
            if k % rho != r:
                return False
            prefix = point[:i]
            if Fraction(k) < lo.value(prefix):
                return False
            if hi is not INFINITY and Fraction(k) > hi.value(prefix):
                return False
        return True

    def to_json(self) -> dict:
        out = []
        for lo, hi in self.bounds:
            item = {"lo": {"a": [str(a) for a in lo.coeffs], "b": str(lo.const)}}
            if hi is INFINITY:
                item["hi"] = "inf"
            else:
                item["hi"] = {"a": [str(a) for a in hi.coeffs], "b": str(hi.const)}
            out.append(item)
        return {"bounds": out, "cong": [{"r": r, "rho": rho} for r, rho in self.cong]}

    @staticmethod
    def from_json(data: dict) -> "GammaCell":
        bounds = []
        for item in data["bounds"]:
            lo = linear(
                [Fraction(a) for a in item["lo"]["a"]], Fraction(item["lo"]["b"])
            )
            if item["hi"] == "inf":
                hi = INFINITY
            else:
                hi = linear(
                    [Fraction(a) for a in item["hi"]["a"]], Fraction(item["hi"]["b"])
                )
            bounds.append((lo, hi))
        cong = tuple((int(c["r"]), int(c["rho"])) for c in data["cong"])
        return GammaCell(tuple(bounds), cong)


def cell(bounds, cong=None) -> GammaCell:
    """Convenience constructor; bounds entries are (lo, hi) with int/Fraction
    shortcuts, cong defaults to no condition (r=0 mod 1)."""
    bnds = []
    for i, (lo, hi) in enumerate(bounds):
        if not isinstance(lo, LinearFn):
            if lo is INFINITY:
                raise UnboundedBelow(f"coordinate {i + 1} needs a linear lower bound")
            lo = const_fn(lo, i)
        if hi is not INFINITY and not isinstance(hi, LinearFn):
            hi = const_fn(hi, i)
        bnds.append((lo, hi))
    if cong is None:
        cong = [(0, 1)] * len(bnds)
    return GammaCell(tuple(bnds), tuple(cong))


def interval_cell(lo, hi, r=0, rho=1) -> GammaCell:
    """One-dimensional cell {k : lo <= k <= hi, k = r mod rho}."""
    return cell([(lo, hi)], [(r, rho)])


@dataclass(frozen=True)
class GammaSet:
    """Finite union of pairwise disjoint cells over the same arity."""

    cells: tuple[GammaCell, ...]
    m: int

    def __post_init__(self):
        for c in self.cells:
            if c.m != self.m:
                raise DomainError("cells of mixed arity")
        _check_disjoint(self.cells, self.m)

    def contains(self, point) -> bool:
        return any(c.contains(point) for c in self.cells)

    def to_json(self) -> dict:
        return {"cells": [c.to_json() for c in self.cells], "m": self.m}

    @staticmethod
    def from_json(data: dict) -> "GammaSet":
        cells = tuple(GammaCell.from_json(c) for c in data["cells"])
        m = int(data["m"]) if "m" in data else (cells[0].m if cells else 0)
        return GammaSet(cells, m)

    @staticmethod
    def load(path: str) -> "GammaSet":
        with open(path) as fh:
            return GammaSet.from_json(json.load(fh))


def gamma_set(cells_) -> GammaSet:
    cells_ = tuple(cells_)
    if not cells_:
        raise DomainError("a GammaSet needs an explicit arity when empty")
    return GammaSet(cells_, cells_[0].m)


def whole_quadrant(m: int) -> GammaSet:
    """Gamma_{>=0}^m as a single cell."""
    return GammaSet((cell([(0, INFINITY)] * m),), m)


def point_set(point) -> GammaSet:
    """The singleton {point} as a GammaSet."""
    bounds = [(const_fn(k, i), const_fn(k, i)) for i, k in enumerate(point)]
    return GammaSet((GammaCell(tuple(bounds), ((0, 1),) * len(point)),), len(point))


def _check_disjoint(cells, m):
    """Pairwise disjointness: exact for m <= 1, box-sampled otherwise."""
    if len(cells) < 2:
        return
    if m == 1:
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                if _intersect_1d(cells[i], cells[j]):
                    raise DomainError(f"cells {i} and {j} intersect")
        return
    span = 2
    for c in cells:
        for lo, hi in c.bounds:
            span = max(span, abs(int(lo.const)) + 1)
            if hi is not INFINITY:
                span = max(span, abs(int(hi.const)) + 1)
        for _, rho in c.cong:
            span = max(span, 2 * rho)
    box = [span + 4] * m
    seen = set()
    for c in cells:
        for pt in cell_members(c, box, floor=-span - 4):
            if pt in seen:
                raise DomainError(f"cells intersect at {pt}")
            seen.add(pt)


def _intersect_1d(c1, c2) -> bool:
    (lo1, hi1), (lo2, hi2) = c1.bounds[0], c2.bounds[0]
    lo = max(ceil(lo1.const), ceil(lo2.const))
    his = [_floor(h.const) for h in (hi1, hi2) if h is not INFINITY]
    hi = min(his) if his else None
    (r1, rho1), (r2, rho2) = c1.cong[0], c2.cong[0]
    g = gcd(rho1, rho2)
    if (r1 - r2) % g != 0:
        return False
    # CRT: solutions form one class mod lcm
    mod = lcm(rho1, rho2)
    t = (r2 - r1) // g * pow(rho1 // g, -1, rho2 // g) % (rho2 // g) if rho2 // g > 1 else 0
    r = (r1 + rho1 * t) % mod
    first = lo + (r - lo) % mod
    return hi is None or first <= hi


def cell_members(c: GammaCell, box, floor=0):
    """Lattice points of the cell with coordinates <= box (lexicographic).

    floor guards against unbounded-below enumeration of malformed cells.
    """
    if len(box) != c.m:
        raise DomainError("box arity mismatch")
    out = []

    def rec(prefix):
        i = len(prefix)
        if i == c.m:
            out.append(tuple(prefix))
            return
        lo_fn, hi_fn = c.bounds[i]
        r, rho = c.cong[i]
        lo_i = max(ceil(lo_fn.value(prefix)), floor)
        hi_i = box[i]
        if hi_fn is not INFINITY:
            hi_i = min(hi_i, _floor(hi_fn.value(prefix)))
        k = lo_i + (r - lo_i) % rho
        while k <= hi_i:
            rec(prefix + [k])
            k += rho

    rec([])
    return out


def members(M, box, floor=0):
    """All points of the GammaSet (or single cell) within the box."""
    cells = M.cells if isinstance(M, GammaSet) else (M,)
    pts = []
    for c in cells:
        pts.extend(cell_members(c, box, floor))
    return sorted(pts)


@lru_cache(maxsize=None)
def cell_nonempty(c: GammaCell) -> bool:
    """Probe-based nonemptiness (greedy box widening), cached."""
    span = 4
    for lo, hi in c.bounds:
        span = max(span, 2 * abs(int(lo.const)) + 2)
        if hi is not INFINITY:
            span = max(span, 2 * abs(int(hi.const)) + 2)
    for _, rho in c.cong:
        span = max(span, 2 * rho)
    for width in (span, 4 * span):
        pts = cell_members(c, [width] * c.m, floor=-width)
        if pts:
            return True
    return False


# ---------------------------------------------------------------------------
# Generating functions: innermost-first telescoped geometric sums.
#
# State during summation of coordinate k: a list of terms; each term is a
# rational coefficient, one affine exponent form per variable (affine in the
# not-yet-summed coordinates), and a multiset of accumulated denominator
# factors.  Summing coordinate k over {A <= kappa <= B, kappa = r mod rho'}
# uses (Q^first - Q^(last+rho')) / (1 - Q^rho') with Q the monomial carrying
# the kappa_k exponent coefficients.  rho' is a multiple of rho making all
# step exponents integral; outer congruence classes are refined until A and
# B are constant mod rho', which keeps first and last affine.
#
# Soundness condition (validated against brute force in tests): on each
# refined class, every finite range is nonempty or misses by at most one
# period, so the empty case telescopes to exactly zero.
# ---------------------------------------------------------------------------

Aff = tuple[tuple[Fraction, ...], Fraction]  # (coeffs over k_1..k_m, const)


def _aff_from_fn(fn: LinearFn, m: int) -> Aff:
    coeffs = tuple(fn.coeffs) + (Fraction(0),) * (m - len(fn.coeffs))
    return (coeffs, Fraction(fn.const))


def _aff_shift(a: Aff, d) -> Aff:
    return (a[0], a[1] + d)


def _aff_value(a: Aff, point) -> Fraction:
    return a[1] + sum((c * k for c, k in zip(a[0], point)), Fraction(0))


def _aff_subst(e: Aff, k: int, g: Aff) -> Aff:
    """Replace coordinate k in exponent form e by the affine form g."""
    alpha = e[0][k]
    coeffs = tuple(
        (Fraction(0) if i == k else c) + alpha * g[0][i] for i, c in enumerate(e[0])
    )
    return (coeffs, e[1] + alpha * g[1])


def cell_gf(M, variables=None) -> RationalGF:
    """Exact generating function sum over M of Y1^k1 ... Ym^km."""
    cells = M.cells if isinstance(M, GammaSet) else (M,)
    m = M.m
    if variables is None:
        variables = tuple(f"Y{i + 1}" for i in range(m))
    if len(variables) != m:
        raise DomainError("one variable per coordinate required")
    total = gf_zero(variables)
    for c in cells:
        total = gf_add(total, _one_cell_gf(c, variables))
    return total


def _one_cell_gf(c: GammaCell, variables) -> RationalGF:
    m = c.m
    if m == 0:
        return gf_const(variables, 1)
    basis = [
        (
            tuple(Fraction(1 if i == j else 0) for i in range(m)),
            Fraction(0),
        )
        for j in range(m)
    ]
    init = (Fraction(1), tuple(basis), Counter())
    return _region_sum(c, m - 1, tuple(c.cong), [init], variables)


def _region_sum(c, k, cong, terms, variables) -> RationalGF:
    m = c.m
    if k < 0:
        total = gf_zero(variables)
        for coef, exps, den in terms:
            mono = []
            for e in exps:
                if any(x != 0 for x in e[0]):
                    raise NonIntegralExponent("unsummed coordinate in exponent")
                if e[1].denominator != 1:
                    raise NonIntegralExponent(f"non-integer exponent {e[1]}")
                if e[1] < 0:
                    raise DomainError("negative exponent: set leaves Gamma_{>=0}")
                mono.append(int(e[1]))
            total = gf_add(
                total,
                RationalGF.make(variables, {tuple(mono): coef}, Counter(den)),
            )
        return total

    lo_fn, hi_fn = c.bounds[k]
    result = gf_zero(variables)
    for coef, exps, den in terms:
        r_k, rho_k = cong[k]
        alpha = [e[0][k] for e in exps]
        rho2 = lcm(rho_k, *(a.denominator for a in alpha)) if alpha else rho_k
        finite = hi_fn is not INFINITY
        lo_aff = _aff_from_fn(lo_fn, m)
        hi_aff = _aff_from_fn(hi_fn, m) if finite else None

        # refine outer congruence classes until bounds are constant mod rho2
        new_mod = [cong[i][1] for i in range(m)]
        forms = [lo_aff] + ([hi_aff] if finite else [])
        for i in range(k):
            for f in forms:
                ci = f[0][i]
                if ci == 0:
                    continue
                u, w = ci.numerator, ci.denominator
                need = (rho2 * w) // gcd(abs(u), rho2 * w)
                new_mod[i] = lcm(new_mod[i], need)
        splits = []
        for i in range(k):
            r_i, rho_i = cong[i]
            splits.append([r_i + t * rho_i for t in range(new_mod[i] // rho_i)])

        for choice in iproduct(*splits) if splits else [()]:
            cong2 = tuple(
                (choice[i], new_mod[i]) if i < k else cong[i] for i in range(m)
            )
            rep = list(choice)
            a_val = _aff_value(lo_aff, rep)
            if a_val.denominator != 1:
                raise NonIntegral(f"lower bound {lo_fn} non-integral on class {choice}")
            delta = (r_k - int(a_val)) % rho2
            first = _aff_shift(lo_aff, delta)
            if finite:
                b_val = _aff_value(hi_aff, rep)
                if b_val.denominator != 1:
                    raise NonIntegral(
                        f"upper bound {hi_fn} non-integral on class {choice}"
                    )
                delta2 = (int(b_val) - r_k) % rho2
                last = _aff_shift(hi_aff, -delta2)
                # constant-length ranges can be empty by more than one
                # period (e.g. reversed bounds); they contribute nothing
                if hi_aff[0] == lo_aff[0] and int(b_val) - delta2 < int(a_val) + delta:
                    continue

            pos = all(a >= 0 for a in alpha)
            neg = all(a <= 0 for a in alpha)
            mixed = not pos and not neg
            allzero = all(a == 0 for a in alpha)

            if mixed or allzero:
                # fall back to explicit enumeration; needs a constant range
                if not finite or lo_aff[0] != hi_aff[0]:
                    raise DomainError(
                        "coordinate with mixed-sign exponents needs a "
                        "constant-length finite range"
                    )
                count = (int(b_val) - delta2 - int(a_val) - delta) // rho2 + 1
                children = []
                for t in range(max(count, 0)):
                    g = _aff_shift(first, t * rho2)
                    children.append(
                        (coef, tuple(_aff_subst(e, k, g) for e in exps), den)
                    )
                if children:
                    result = gf_add(
                        result, _region_sum(c, k - 1, cong2, children, variables)
                    )
                continue

            sgn = 1 if pos else -1
            fexp = tuple(int(sgn * a * rho2) for a in alpha)
            den2 = Counter(den)
            den2[(1, fexp)] += 1
            if pos:
                hi_form = _aff_shift(last, rho2) if finite else None
                lo_form = first
            else:
                if not finite:
                    raise DomainError(
                        "negative exponent direction with an infinite range"
                    )
                lo_form = last
                hi_form = _aff_shift(first, -rho2)
            children = [(coef, tuple(_aff_subst(e, k, lo_form) for e in exps), den2)]
            if hi_form is not None:
                children.append(
                    (-coef, tuple(_aff_subst(e, k, hi_form) for e in exps), den2)
                )
            result = gf_add(result, _region_sum(c, k - 1, cong2, children, variables))
    return result
