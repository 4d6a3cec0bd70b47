"""Ideals of O_K, reduced binary quadratic forms and ideal-class representatives."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import gcd, isqrt
from typing import Iterator, Optional

from sympy import isprime, primerange

from .errors import DomainError, HypothesisError, SearchExhausted
from .field import QuadElt, QuadField, chi
from .lattice import hnf


@dataclass(frozen=True)
class IdealHNF:
    """The Z-module Z*a + Z*(b + c*omega); c | a, c | b, 0 <= b < a."""

    K: QuadField
    a: int
    b: int
    c: int

    def __repr__(self):
        return f"Ideal[m={self.K.m}]({self.a}, {self.b}, {self.c})"

    @property
    def norm(self) -> int:
        return self.a * self.c

    def basis(self) -> tuple[QuadElt, QuadElt]:
        return self.K(self.a, 0), self.K(self.b, self.c)

    def contains(self, x: QuadElt) -> bool:
        if x.den != 1:
            return False
        if x.b % self.c:
            return False
        return (x.a - (x.b // self.c) * self.b) % self.a == 0

    def __contains__(self, x):
        return self.contains(self.K.coerce(x))

    def __mul__(self, other: IdealHNF) -> IdealHNF:
        _same(self, other)
        gens = [x * y for x in self.basis() for y in other.basis()]
        return ideal_from_generators(self.K, gens)

    def __add__(self, other: IdealHNF) -> IdealHNF:
        _same(self, other)
        return ideal_from_generators(self.K, [*self.basis(), *other.basis()])

    def divides(self, other: IdealHNF) -> bool:
        """self | other  <=>  other is contained in self."""
        _same(self, other)
        return all(self.contains(x) for x in other.basis())

    def conj(self) -> IdealHNF:
        return ideal_from_generators(self.K, [x.conj() for x in self.basis()])

    def is_unit(self) -> bool:
        return self.a == 1

    def rational_generator(self) -> Optional[int]:
        """r > 0 with self == r*O_K, or None if no such rational integer exists."""
        if self.b == 0 and self.a == self.c:
            return self.a
        return None

    def div_int(self, r: int) -> IdealHNF:
        if self.a % r or self.b % r or self.c % r:
            raise DomainError(f"{r} O_K does not divide {self}")
        return IdealHNF(self.K, self.a // r, self.b // r, self.c // r)


def _same(x: IdealHNF, y: IdealHNF) -> None:
    if x.K.m != y.K.m:
        raise DomainError("mixed-field ideals")


def ideal_from_generators(K: QuadField, gens) -> IdealHNF:
    """Normal form of the O_K-ideal generated by integral elements ``gens``."""
    pairs = []
    for g in gens:
        g = K.coerce(g)
        if g.den != 1:
            raise DomainError(f"generator {g} is not integral")
        pairs.append((g.a, g.b))
    return ideal_from_pairs(K, pairs)


def ideal_from_pairs(K: QuadField, pairs) -> IdealHNF:
    """Same as :func:`ideal_from_generators` for raw coordinate pairs (a, b)."""
    t, n = K.tr_w, K.nm_w
    vecs = []
    for a, b in pairs:
        if a == 0 and b == 0:
            continue
        # coordinates ordered (omega, 1) so the HNF is [[c, b], [0, a]]
        vecs.append((b, a))
        vecs.append((a + b * t, -b * n))  # omega * (a + b*omega)
    if not vecs:
        raise DomainError("the zero ideal is not representable")
    basis = hnf(vecs, 2)
    (c, b), (_, a) = basis
    return IdealHNF(K, a, b % a, c)


def unit_ideal(K: QuadField) -> IdealHNF:
    return IdealHNF(K, 1, 0, 1)


def principal(K: QuadField, x) -> IdealHNF:
    return ideal_from_generators(K, [x])


# --------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True, order=True)
class QuadForm:
    alpha: int
    beta: int
    gamma: int

    @property
    def disc(self) -> int:
        return self.beta * self.beta - 4 * self.alpha * self.gamma

    def is_reduced(self) -> bool:
        a, b, c = self.alpha, self.beta, self.gamma
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def reduce(self) -> QuadForm:
        """Properly equivalent reduced form (positive definite forms only)."""
        a, b, c = self.alpha, self.beta, self.gamma
        while True:
            # normalize -a < b <= a
            if not (-a < b <= a):
                r = (a - b) // (2 * a)
                b, c = b + 2 * r * a, a * r * r + b * r + c
            if a > c:
                a, b, c = c, -b, a
                continue
            if a == c and b < 0:
                b = -b
            return QuadForm(a, b, c)

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


def reduced_forms(K: QuadField) -> list[QuadForm]:
    """All primitive reduced forms of discriminant d_K, principal form first."""
    d = K.d
    out = []
    amax = isqrt(-d // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append(QuadForm(a, b, c))
    return out


def form_of_ideal(I: IdealHNF) -> QuadForm:
    """N(x*a + y*(b + c*omega)) / N(I) for the positively oriented HNF basis."""
    K = I.K
    a, b, c = I.a, I.b, I.c
    nb = b * b + b * c * K.tr_w + c * c * K.nm_w  # N(b + c*omega)
    alpha, rem1 = divmod(a * a, I.norm)
    beta, rem2 = divmod(a * (2 * b + c * K.tr_w), I.norm)
    gamma, rem3 = divmod(nb, I.norm)
    if rem1 or rem2 or rem3:
        raise DomainError(f"{I} is not an O_K-ideal")
    return QuadForm(alpha, beta, gamma)


def ideal_class_index(I: IdealHNF, forms: list[QuadForm] | None = None) -> int:
    """1-based index of the reduced form equivalent to the form of I."""
    forms = reduced_forms(I.K) if forms is None else forms
    f = form_of_ideal(I).reduce()
    g = gcd(gcd(f.alpha, f.beta), f.gamma)
    if g != 1:
        raise DomainError(f"form {f} of {I} is not primitive")
    return forms.index(f) + 1


def fractional_ideal_class_index(K: QuadField, gens, forms=None) -> int:
    """Class index of the fractional ideal generated by ``gens`` (clears denominators)."""
    gens = [K.coerce(g) for g in gens]
    den = 1
    for g in gens:
        den = den * g.den // gcd(den, g.den)
    return ideal_class_index(ideal_from_generators(K, [g * den for g in gens]), forms)


# --------------------------------------------------------------------------
# class representatives with the integer N


def minimal_denominator(x: QuadElt) -> int:
    """Least N >= 1 with N*x in O_K."""
    return x.den


@dataclass
class ClassRepSet:
    K: QuadField
    reps: list[tuple[QuadElt, QuadForm]]
    N: int
    avoided_prime: Optional[int] = None
    factors: list[int] = dc_field(default_factory=list)

    @property
    def h(self) -> int:
        return len(self.reps)

    @property
    def u(self) -> list[QuadElt]:
        return [u for u, _ in self.reps]


def check_class_rep_hypotheses(K: QuadField, p: int) -> None:
    if K.d in (-4, -8):
        raise HypothesisError("d_K not in {-4,-8}", f"d_K = {K.d} is excluded")
    if p % 2 == 0 or not isprime(p):
        raise HypothesisError("avoid_p odd prime", f"avoid_p = {p} is not an odd prime")
    if K.d % p:
        raise HypothesisError("avoid_p | d_K", f"avoid_p = {p} does not divide d_K = {K.d}")


def class_representatives(K: QuadField, avoid_p: int | None = None) -> ClassRepSet:
    """Representatives <u_j, 1> of the ideal classes and an N with N*u_j in O_K.

    With ``avoid_p`` set, representatives whose form has avoid_p | alpha are
    replaced by 2*alpha/(beta + sqrt(d_K)) and N_j = (beta^2 - d_K)/avoid_p, so
    that avoid_p does not divide N = N_1 * ... * N_h.
    """
    if avoid_p is not None:
        check_class_rep_hypotheses(K, avoid_p)
    sd = K.sqrt_d
    reps, factors = [], []
    for f in reduced_forms(K):
        u = (sd + f.beta) / (2 * f.alpha)
        n_j = minimal_denominator(u)
        if avoid_p is not None and f.alpha % avoid_p == 0:
            u = (sd + f.beta).inverse() * (2 * f.alpha)
            n_j = (f.beta * f.beta - K.d) // avoid_p
        reps.append((u, f))
        factors.append(n_j)
    N = 1
    for n_j in factors:
        N *= n_j
    if avoid_p is not None and N % avoid_p == 0:
        raise HypothesisError("p does not divide N", f"{avoid_p} | N = {N}")
    return ClassRepSet(K, reps, N, avoid_p, factors)


def default_avoid_prime(K: QuadField) -> int | None:
    """Smallest odd prime divisor of d_K when the class-rep hypotheses hold."""
    if K.d in (-4, -8):
        return None
    for p in primerange(3, -K.d + 1):
        if K.d % p == 0:
            return p
    return None


def representative_class_index(K: QuadField, u: QuadElt, forms=None) -> int:
    return fractional_ideal_class_index(K, [u, K.one], forms)


# --------------------------------------------------------------------------
# inert primes in arithmetic progressions


def inert_primes(K: QuadField, modulus: int, search_bound: int) -> Iterator[int]:
    if modulus < 1:
        raise DomainError("modulus must be positive")
    for p in primerange(2, search_bound + 1):
        if p % modulus == 1 % modulus and chi(K, p) == -1:
            yield p


def find_inert_prime(K: QuadField, modulus: int = 1, search_bound: int = 10**6) -> int:
    """Smallest prime p <= search_bound with p = 1 (mod modulus) and chi_K(p) = -1."""
    for p in inert_primes(K, modulus, search_bound):
        return p
    odd = [p for p in primerange(3, -K.d + 1) if K.d % p == 0 and modulus % p]
    note = "hypotheses hold" if K.d not in (-4, -8) and odd else "hypotheses NOT satisfied"
    raise SearchExhausted(
        f"no inert prime = 1 mod {modulus} below {search_bound} ({note})"
    )


def inert_search_hypotheses(K: QuadField, modulus: int) -> dict:
    odd = [p for p in primerange(3, -K.d + 1) if K.d % p == 0 and modulus % p]
    return {
        "d_K not in {-4,-8}": K.d not in (-4, -8),
        "odd prime divisor of d_K not dividing N": bool(odd),
    }
