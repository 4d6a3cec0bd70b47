"""Exact arithmetic in K = Q(sqrt(-m)) and its ring of integers O_K = Z + Z*omega."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Union

from sympy import isprime

from .errors import DomainError

Number = Union[int, Fraction, "QuadElt"]


def is_squarefree(m: int) -> bool:
    if m < 1:
        return False
    f = 2
    while f * f <= m:
        if m % (f * f) == 0:
            return False
        f += 1
    return True


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a / n) for arbitrary integers a, n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # n is now odd and positive: Jacobi symbol by reciprocity
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


class QuadField:
    """The imaginary-quadratic field Q(sqrt(-m)).

    Elements are written in the basis {1, omega} with omega = sqrt(-m) for
    m = 1, 2 (mod 4) and omega = (1 + sqrt(-m))/2 for m = 3 (mod 4).
    """

    __slots__ = ("m", "d", "omega_kind", "tr_w", "nm_w", "_h")

    def __init__(self, m: int):
        if not is_squarefree(m):
            raise DomainError(f"m={m} is not a squarefree positive integer")
        self.m = m
        if m % 4 == 3:
            self.d = -m
            self.omega_kind = "half"
            self.tr_w, self.nm_w = 1, (1 + m) // 4
        else:
            self.d = -4 * m
            self.omega_kind = "sqrt"
            self.tr_w, self.nm_w = 0, m
        self._h = None

    def __repr__(self):
        return f"QuadField(m={self.m})"

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.m == self.m

    def __hash__(self):
        return hash(("QuadField", self.m))

    def __reduce__(self):
        return (make_field, (self.m,))

    @property
    def h(self) -> int:
        """Class number (number of reduced primitive forms of discriminant d)."""
        if self._h is None:
            from .ideals import reduced_forms

            self._h = len(reduced_forms(self))
        return self._h

    def __call__(self, a=0, b=0, den=1) -> QuadElt:
        return QuadElt(self, a, b, den)

    @property
    def omega(self) -> QuadElt:
        return QuadElt(self, 0, 1)

    @property
    def one(self) -> QuadElt:
        return QuadElt(self, 1, 0)

    @property
    def zero(self) -> QuadElt:
        return QuadElt(self, 0, 0)

    @property
    def sqrt_d(self) -> QuadElt:
        """sqrt(d_K), which lies in O_K."""
        return QuadElt(self, -1, 2) if self.omega_kind == "half" else QuadElt(self, 0, 2)

    def units(self) -> list[QuadElt]:
        out = [self.one, -self.one]
        if self.m == 1:
            out += [self.omega, -self.omega]
        elif self.m == 3:
            w = self.omega
            out += [w, -w, w - 1, 1 - w]
        return out

    def coerce(self, x) -> QuadElt:
        if isinstance(x, QuadElt):
            if x.K.m != self.m:
                raise DomainError("mixed-field operands")
            return x
        if isinstance(x, int):
            return QuadElt(self, x, 0)
        if isinstance(x, Fraction):
            return QuadElt(self, x.numerator, 0, x.denominator)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    def chi(self, n: int) -> int:
        return chi(self, n)


@lru_cache(maxsize=None)
def make_field(m: int) -> QuadField:
    return QuadField(m)


class QuadElt:
    """(a + b*omega) / den with gcd(a, b, den) = 1 and den > 0."""

    __slots__ = ("K", "a", "b", "den")

    def __init__(self, K: QuadField, a: int, b: int = 0, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den != 1:
            if den < 0:
                a, b, den = -a, -b, -den
            g = gcd(gcd(a, b), den)
            if g > 1:
                a, b, den = a // g, b // g, den // g
        self.K = K
        self.a = a
        self.b = b
        self.den = den

    # construction helpers -------------------------------------------------
    def _new(self, a, b, den=1):
        return QuadElt(self.K, a, b, den)

    def _other(self, y) -> QuadElt:
        if isinstance(y, QuadElt):
            if y.K is not self.K and y.K.m != self.K.m:
                raise DomainError("mixed-field operands")
            return y
        if isinstance(y, int):
            return QuadElt(self.K, y, 0)
        if isinstance(y, Fraction):
            return QuadElt(self.K, y.numerator, 0, y.denominator)
        return NotImplemented

    # predicates -----------------------------------------------------------
    def is_integral(self) -> bool:
        return self.den == 1

    def is_rational(self) -> bool:
        return self.b == 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self):
        return not self.is_zero()

    def to_fraction(self) -> Fraction:
        if self.b:
            raise DomainError(f"{self} is not rational")
        return Fraction(self.a, self.den)

    # arithmetic -----------------------------------------------------------
    def __add__(self, y):
        y = self._other(y)
        if y is NotImplemented:
            return y
        if self.den == y.den == 1:
            return QuadElt(self.K, self.a + y.a, self.b + y.b)
        return self._new(self.a * y.den + y.a * self.den, self.b * y.den + y.b * self.den, self.den * y.den)

    __radd__ = __add__

    def __neg__(self):
        return QuadElt(self.K, -self.a, -self.b, self.den)

    def __sub__(self, y):
        y = self._other(y)
        if y is NotImplemented:
            return y
        return self + (-y)

    def __rsub__(self, y):
        return (-self) + y

    def __mul__(self, y):
        y = self._other(y)
        if y is NotImplemented:
            return y
        K = self.K
        a, b, c, d = self.a, self.b, y.a, y.b
        bd = b * d
        return self._new(a * c - bd * K.nm_w, a * d + b * c + bd * K.tr_w, self.den * y.den)

    __rmul__ = __mul__

    def conj(self) -> QuadElt:
        return QuadElt(self.K, self.a + self.b * self.K.tr_w, -self.b, self.den)

    def norm(self) -> Fraction:
        K = self.K
        n = self.a * self.a + self.a * self.b * K.tr_w + self.b * self.b * K.nm_w
        return Fraction(n, self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(2 * self.a + self.b * self.K.tr_w, self.den)

    def inverse(self) -> QuadElt:
        if self.is_zero():
            raise ZeroDivisionError("division by zero in K")
        nm = self.norm()
        c = self.conj()
        # c / nm with nm = p/q  ->  c * q / p
        return self._new(c.a * nm.denominator, c.b * nm.denominator, c.den * nm.numerator)

    def __truediv__(self, y):
        y = self._other(y)
        if y is NotImplemented:
            return y
        return self * y.inverse()

    def __rtruediv__(self, y):
        return self.inverse() * y

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = self._new(1, 0), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # comparison / hashing -------------------------------------------------
    def __eq__(self, y):
        if isinstance(y, QuadElt):
            return self.K.m == y.K.m and (self.a, self.b, self.den) == (y.a, y.b, y.den)
        if isinstance(y, (int, Fraction)):
            return self.b == 0 and Fraction(self.a, self.den) == y
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(Fraction(self.a, self.den))
        return hash((self.a, self.b, self.den))

    def __repr__(self):
        core = f"{self.a}{self.b:+}w" if self.b else f"{self.a}"
        return core if self.den == 1 else f"({core})/{self.den}"

    def coords(self) -> tuple[int, int, int]:
        return self.a, self.b, self.den

    def to_json(self):
        if self.den == 1:
            return [self.a, self.b]
        return {"num": [self.a, self.b], "den": self.den}


def elem_from_json(K: QuadField, obj) -> QuadElt:
    if isinstance(obj, dict):
        a, b = obj["num"]
        return QuadElt(K, int(a), int(b), int(obj["den"]))
    a, b = obj
    return QuadElt(K, int(a), int(b))


def chi(K: QuadField, n: int) -> int:
    """The character of K: Kronecker symbol (d_K / n)."""
    return kronecker(K.d, n)


def classify_prime(K: QuadField, p: int) -> str:
    if not isprime(p):
        raise DomainError(f"{p} is not prime")
    c = chi(K, p)
    if c == 0:
        return "ramified"
    return "split" if c == 1 else "inert"


def is_inert(K: QuadField, p: int) -> bool:
    return classify_prime(K, p) == "inert"


def prime_factors(n: int) -> list[int]:
    from sympy import factorint

    return sorted(factorint(abs(n)))


def is_inert_product(K: QuadField, q: int) -> bool:
    """True iff every prime divisor of q is inert in K (q = 1 counts)."""
    return q >= 1 and all(chi(K, p) == -1 for p in prime_factors(q))


def frac_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s))

