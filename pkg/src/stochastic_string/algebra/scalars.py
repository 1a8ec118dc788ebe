"""Exact scalar coefficients for the operator algebra.

A coefficient is a finite sum  sum_j (re_j + i im_j) * a^{p_j} * sqrt(r_j)
with Gaussian-rational weights, integer powers of the normal-ordering
symbol ``a`` and squarefree integer radicands r_j. This closes under the
arithmetic the light-cone generators need (the sqrt(n) mode normalizations
and sqrt(2 alpha') factors) while staying exact: anomaly cancellation is
decided by exact zero tests, never by floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

_ZERO = (Fraction(0), Fraction(0))


def squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, f) with n = s^2 * f and f squarefree."""
    if n <= 0:
        raise ValueError(f"radicand must be positive, got {n}")
    s, f, d = 1, 1, 2
    while d * d <= n:
        while n % (d * d) == 0:
            n //= d * d
            s *= d
        if n % d == 0:
            n //= d
            f *= d
        d += 1
    return s, f * n


class Coeff:
    """Immutable exact coefficient; see module docstring for the form."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], tuple[Fraction, Fraction]] | None = None):
        cleaned = {}
        if terms:
            for key, (re, im) in terms.items():
                if re or im:
                    cleaned[key] = (re, im)
        self.terms = cleaned

    # -- constructors ------------------------------------------------------
    @staticmethod
    def zero() -> "Coeff":
        return Coeff()

    @staticmethod
    def rational(value) -> "Coeff":
        fr = Fraction(value)
        return Coeff({(0, 1): (fr, Fraction(0))})

    @staticmethod
    def imaginary(value=1) -> "Coeff":
        fr = Fraction(value)
        return Coeff({(0, 1): (Fraction(0), fr)})

    @staticmethod
    def symbol_a(power: int = 1) -> "Coeff":
        return Coeff({(power, 1): (Fraction(1), Fraction(0))})

    @staticmethod
    def sqrt(value) -> "Coeff":
        """Exact square root of a positive rational."""
        fr = Fraction(value)
        s, f = squarefree_split(fr.numerator * fr.denominator)
        return Coeff({(0, f): (Fraction(s, fr.denominator), Fraction(0))})

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "Coeff") -> "Coeff":
        out = dict(self.terms)
        for key, (re, im) in other.terms.items():
            cre, cim = out.get(key, _ZERO)
            out[key] = (cre + re, cim + im)
        return Coeff(out)

    def __neg__(self) -> "Coeff":
        return Coeff({k: (-re, -im) for k, (re, im) in self.terms.items()})

    def __sub__(self, other: "Coeff") -> "Coeff":
        return self + (-other)

    def __mul__(self, other: "Coeff") -> "Coeff":
        out: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        for (p1, r1), (re1, im1) in self.terms.items():
            for (p2, r2), (re2, im2) in other.terms.items():
                s, f = squarefree_split(r1 * r2)
                key = (p1 + p2, f)
                re = s * (re1 * re2 - im1 * im2)
                im = s * (re1 * im2 + im1 * re2)
                cre, cim = out.get(key, _ZERO)
                out[key] = (cre + re, cim + im)
        return Coeff(out)

    def scale(self, value) -> "Coeff":
        fr = Fraction(value)
        return Coeff({k: (re * fr, im * fr) for k, (re, im) in self.terms.items()})

    def conjugate(self) -> "Coeff":
        return Coeff({k: (re, -im) for k, (re, im) in self.terms.items()})

    # -- queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, Coeff) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def substitute_a(self, value) -> "Coeff":
        fr = Fraction(value)
        out: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        for (p, r), (re, im) in self.terms.items():
            w = fr**p
            cre, cim = out.get((0, r), _ZERO)
            out[(0, r)] = (cre + re * w, cim + im * w)
        return Coeff(out)

    def as_gaussian(self) -> tuple[Fraction, Fraction]:
        """Collapse to (re, im) Fractions; requires no symbol and no radicals."""
        re_total, im_total = Fraction(0), Fraction(0)
        for (p, r), (re, im) in self.terms.items():
            if p != 0 or r != 1:
                raise ValueError(f"coefficient is not a plain Gaussian rational: {self}")
            re_total += re
            im_total += im
        return re_total, im_total

    def a_polynomial(self) -> dict[int, Fraction]:
        """Collapse to a real rational polynomial in the symbol ``a``."""
        out: dict[int, Fraction] = {}
        for (p, r), (re, im) in self.terms.items():
            if r != 1 or im != 0:
                raise ValueError(f"coefficient is not a rational polynomial in a: {self}")
            out[p] = out.get(p, Fraction(0)) + re
        return {p: c for p, c in out.items() if c}

    def to_complex(self) -> complex:
        total = 0j
        for (p, r), (re, im) in self.terms.items():
            if p != 0:
                raise ValueError("coefficient still contains the symbol a")
            total += complex(re, im) * r**0.5
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (p, r), (re, im) in sorted(self.terms.items()):
            val = f"({re}{'+' if im >= 0 else '-'}{abs(im)}i)"
            if r != 1:
                val += f"*sqrt({r})"
            if p:
                val += f"*a^{p}" if p != 1 else "*a"
            parts.append(val)
        return " + ".join(parts)


ONE = Coeff.rational(1)
I_UNIT = Coeff.imaginary(1)


class PolyDA:
    """Exact rational polynomial in the spacetime dimension D and intercept a."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[tuple[int, int], Fraction] | None = None):
        self.coeffs = {k: Fraction(v) for k, v in (coeffs or {}).items() if v}

    def evaluate(self, dims, intercept) -> Fraction:
        dims, intercept = Fraction(dims), Fraction(intercept)
        return sum(
            (c * dims**pd * intercept**pa for (pd, pa), c in self.coeffs.items()),
            Fraction(0),
        )

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_affine(self) -> bool:
        return all(pd + pa <= 1 for pd, pa in self.coeffs)

    def coefficient(self, d_power: int, a_power: int) -> Fraction:
        return self.coeffs.get((d_power, a_power), Fraction(0))

    def scale(self, value) -> "PolyDA":
        fr = Fraction(value)
        return PolyDA({k: c * fr for k, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyDA) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for (pd, pa), c in sorted(self.coeffs.items()):
            term = str(c)
            if pd:
                term += "*D" + (f"^{pd}" if pd > 1 else "")
            if pa:
                term += "*a" + (f"^{pa}" if pa > 1 else "")
            parts.append(term)
        return " + ".join(parts)


def solve_affine_system(polys: Iterable[PolyDA]):
    """Common zeros of affine polynomials in (D, a).

    Returns ("point", D, a) for a unique solution, ("none",) when the system
    is inconsistent, and ("underdetermined",) otherwise.
    """
    rows = []
    for poly in polys:
        if not poly.is_affine():
            raise ValueError("system solver expects affine polynomials")
        rows.append(
            (
                poly.coefficient(1, 0),
                poly.coefficient(0, 1),
                -poly.coefficient(0, 0),
            )
        )
    # exact Gaussian elimination on a 2-unknown system
    pivot_d = next((r for r in rows if r[0]), None)
    reduced = []
    for r in rows:
        if pivot_d is not None and r[0]:
            fac = r[0] / pivot_d[0]
            r = (Fraction(0), r[1] - fac * pivot_d[1], r[2] - fac * pivot_d[2])
        reduced.append(r)
    pivot_a = next((r for r in reduced if r[0] == 0 and r[1]), None)
    if pivot_d is None or pivot_a is None:
        consistent = all(r[2] == 0 for r in reduced if r[0] == 0 and r[1] == 0)
        return ("underdetermined",) if consistent else ("none",)
    a_val = pivot_a[2] / pivot_a[1]
    d_val = (pivot_d[2] - pivot_d[1] * a_val) / pivot_d[0]
    for rd, ra, rhs in rows:
        if rd * d_val + ra * a_val != rhs:
            return ("none",)
    return ("point", d_val, a_val)
