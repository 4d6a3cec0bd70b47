"""Exact sums of roots of unity, sum_j c_j * zeta_L^j with rational c_j."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Mapping

from sympy import Poly, cyclotomic_poly, symbols

_x = symbols("x")


@lru_cache(maxsize=None)
def cyclotomic_coeffs(L: int) -> tuple[int, ...]:
    """Coefficients of Phi_L, lowest degree first."""
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(L, _x), _x).all_coeffs()))


def _reduce(coeffs: list[Fraction], L: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_coeffs(L)
    deg = len(phi) - 1
    work = list(coeffs)
    # Phi_L is monic, so plain long division keeps everything rational
    for top in range(len(work) - 1, deg - 1, -1):
        c = work[top]
        if c:
            shift = top - deg
            for i, a in enumerate(phi):
                work[shift + i] -= c * a
    out = work[:deg] + [Fraction(0)] * (deg - len(work))
    return tuple(out)


class CycSum:
    """An element of Q(zeta_L) in the power basis 1, zeta, ..., zeta^(phi(L)-1)."""

    __slots__ = ("L", "coeffs")

    def __init__(self, L: int, coeffs):
        self.L = L
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @classmethod
    def from_terms(cls, L: int, terms: Mapping[int, object]) -> CycSum:
        """sum_j terms[j] * zeta_L^j, reduced."""
        work = [Fraction(0)] * L
        for j, c in terms.items():
            work[j % L] += Fraction(c)
        return cls(L, _reduce(work, L))

    @classmethod
    def from_phases(cls, phases: Mapping[Fraction, object]) -> CycSum:
        """sum_r c_r * e^(2 pi i r) for rational r."""
        L = 1
        for r in phases:
            d = Fraction(r).denominator
            L = L * d // gcd(L, d)
        terms: dict[int, Fraction] = {}
        for r, c in phases.items():
            r = Fraction(r)
            j = (r.numerator * (L // r.denominator)) % L
            terms[j] = terms.get(j, Fraction(0)) + Fraction(c)
        return cls.from_terms(L, terms)

    @classmethod
    def rational(cls, c) -> CycSum:
        return cls(1, (Fraction(c),))

    def lift(self, L: int) -> CycSum:
        if L % self.L:
            raise ValueError(f"{self.L} does not divide {L}")
        step = L // self.L
        return CycSum.from_terms(L, {i * step: c for i, c in enumerate(self.coeffs) if c})

    def _common(self, other: CycSum):
        L = self.L * other.L // gcd(self.L, other.L)
        return self.lift(L), other.lift(L), L

    def __add__(self, other):
        if not isinstance(other, CycSum):
            other = CycSum.rational(other)
        a, b, L = self._common(other)
        return CycSum(L, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycSum(self.L, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, CycSum) else -Fraction(other))

    def __mul__(self, other):
        if not isinstance(other, CycSum):
            s = Fraction(other)
            return CycSum(self.L, [c * s for c in self.coeffs])
        a, b, L = self._common(other)
        work = [Fraction(0)] * (2 * len(a.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        work[i + j] += x * y
        return CycSum(L, _reduce(work, L))

    __rmul__ = __mul__

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, CycSum):
            try:
                other = CycSum.rational(other)
            except (TypeError, ValueError):
                return NotImplemented
        a, b, _ = self._common(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        # equal values may be written over different moduli, so only the
        # rational case has a cheap canonical form to hash
        if self.is_rational():
            return hash(self.to_fraction())
        return hash(CycSum)

    def __repr__(self):
        parts = [f"{c}*z^{i}" if i else f"{c}" for i, c in enumerate(self.coeffs) if c]
        return f"CycSum[L={self.L}](" + (" + ".join(parts) or "0") + ")"
