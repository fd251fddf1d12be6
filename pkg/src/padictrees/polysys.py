"""Polynomial systems over Z defining subsets of Z_p^n.

A system is a finite list of multivariate integer polynomials together with
a prime p; it defines X = {x in Z_p^n : f_i(x) = 0 for all i}.  The empty
system (X = Z_p^n) must be requested explicitly via allow_empty.

Polynomials are sparse: a list of (coefficient, exponent vector) terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

Term = tuple[int, tuple[int, ...]]
Poly = tuple[Term, ...]


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PolySystem:
    p: int
    n: int
    polys: tuple[Poly, ...]
    witnesses: tuple[tuple[Fraction, ...], ...] = field(default=())
    allow_empty: bool = False

    def __post_init__(self):
        if not _is_prime(self.p):
            raise DomainError(f"{self.p} is not prime")
        if self.n < 1:
            raise DomainError("dimension must be >= 1")
        if not self.polys and not self.allow_empty:
            raise DomainError("empty system needs allow_empty=True")
        for w in self.witnesses:
            if len(w) != self.n:
                raise DomainError("witness has wrong dimension")
            for q in w:
                if q.denominator % self.p == 0:
                    raise DomainError("witness is not p-integral")
            for i in range(len(self.polys)):
                if self.eval_poly_rat(i, w) != 0:
                    raise DomainError(f"witness {w} does not satisfy equation {i}")

    def eval_poly(self, i: int, point) -> int:
        total = 0
        for c, exps in self.polys[i]:
            t = c
            for x, e in zip(point, exps):
                if e:
                    t *= x**e
            total += t
        return total

    def eval_poly_rat(self, i: int, point) -> Fraction:
        total = Fraction(0)
        for c, exps in self.polys[i]:
            t = Fraction(c)
            for x, e in zip(point, exps):
                if e:
                    t *= Fraction(x) ** e
            total += t
        return total

    def partial(self, i: int, j: int, point) -> int:
        """d f_i / d x_j evaluated at an integer point."""
        total = 0
        for c, exps in self.polys[i]:
            e = exps[j] if j < len(exps) else 0
            if e == 0:
                continue
            t = c * e
            for k, (x, ek) in enumerate(zip(point, exps)):
                if k == j:
                    t *= x ** (ek - 1)
                elif ek:
                    t *= x**ek
            total += t
        return total

    def jacobian_minor(self, point, cols) -> int:
        """det of the k x k Jacobian submatrix on the given columns."""
        k = len(self.polys)
        mat = [[self.partial(i, j, point) for j in cols] for i in range(k)]
        return _int_det(mat)

    def translate(self, shift: tuple[int, ...]) -> "PolySystem":
        """The system g(x) = f(x + shift)."""
        polys = tuple(_poly_translate(poly, shift, self.n) for poly in self.polys)
        ws = tuple(tuple(q - s for q, s in zip(w, shift)) for w in self.witnesses)
        return PolySystem(self.p, self.n, polys, ws, self.allow_empty)

    def to_json(self) -> dict:
        return {
            "format": 1,
            "p": self.p,
            "n": self.n,
            "polys": [
                [{"c": str(c), "e": list(e)} for c, e in poly] for poly in self.polys
            ],
            "witnesses": [[str(q) for q in w] for w in self.witnesses],
            "allow_empty": self.allow_empty,
        }

    @staticmethod
    def from_json(data: dict) -> "PolySystem":
        polys = tuple(
            tuple((int(t["c"]), tuple(int(x) for x in t["e"])) for t in poly)
            for poly in data["polys"]
        )
        ws = tuple(
            tuple(Fraction(s) for s in w) for w in data.get("witnesses", [])
        )
        return PolySystem(
            int(data["p"]), int(data["n"]), polys, ws, bool(data.get("allow_empty", False))
        )

    @staticmethod
    def load(path: str) -> "PolySystem":
        with open(path) as fh:
            return PolySystem.from_json(json.load(fh))


def _int_det(mat) -> int:
    """Exact determinant by fraction-free expansion (matrices are tiny)."""
    k = len(mat)
    if k == 1:
        return mat[0][0]
    if k == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    total = 0
    for j in range(k):
        if mat[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        total += (-1) ** j * mat[0][j] * _int_det(minor)
    return total


def _poly_translate(poly: Poly, shift, n) -> Poly:
    from math import comb

    out: dict[tuple[int, ...], int] = {}
    for c, exps in poly:
        exps = tuple(exps) + (0,) * (n - len(exps))
        # expand prod (x_j + s_j)^{e_j}
        terms = [(c, ())]
        for e, s in zip(exps, shift):
            new = []
            for cc, built in terms:
                for k in range(e + 1):
                    new.append((cc * comb(e, k) * s ** (e - k), built + (k,)))
            terms = new
        for cc, ee in terms:
            if cc:
                out[ee] = out.get(ee, 0) + cc
    return tuple((c, e) for e, c in sorted(out.items()) if c != 0)


def make_system(p: int, n: int, polys, witnesses=(), allow_empty=False) -> PolySystem:
    """Convenience constructor taking lists of (coef, exps) terms."""
    tpolys = tuple(tuple((int(c), tuple(e)) for c, e in poly) for poly in polys)
    ws = tuple(tuple(Fraction(q) for q in w) for w in witnesses)
    return PolySystem(p, n, tpolys, ws, allow_empty)


def cusp_system(p: int, with_witness=True) -> PolySystem:
    """x^3 - y^2 = 0 in Z_p^2, optionally with the origin as witness."""
    ws = [(0, 0)] if with_witness else []
    return make_system(p, 2, [[(1, (3, 0)), (-1, (0, 2))]], ws)
